//! Deterministic artifact serialization.
//!
//! JSON artifacts carry 17-significant-digit numbers (round-trip exact);
//! CSV tables carry 9 significant digits. Re-running a command with the same
//! configuration produces byte-identical output.

use std::fmt::Write as _;

/// Order-preserving JSON value with fixed numeric formatting.
pub enum Json {
    Int(i64),
    Num(f64),
    Str(String),
    Bool(bool),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0);
        s.push('\n');
        s
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Num(v) => {
                let _ = write!(out, "{}", fmt_f64_17(*v));
            }
            Json::Str(v) => {
                out.push('"');
                for c in v.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Bool(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    pad(out, indent + 2);
                    item.write(out, indent + 2);
                }
                out.push('\n');
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    pad(out, indent + 2);
                    let _ = write!(out, "\"{k}\": ");
                    v.write(out, indent + 2);
                }
                out.push('\n');
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64_17(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:.16e}")
}

/// 9 significant digits for human-facing tables.
pub fn fmt_f64_9(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:.8e}")
}
