//! Minimal JSON emission with a fixed field order and reals rounded to six
//! significant digits.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Int(i64),
    UInt(u64),
    Real(f64),
    Str(String),
    Array(Vec<Json>),
    /// Insertion order is preserved verbatim in the output.
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::UInt(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Real(v) => {
                let _ = write!(out, "{}", fmt_g6(*v));
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
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
            Json::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Object(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    Json::Str(k.clone()).write(out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

/// Formats a real with six significant digits, decimal notation in a friendly
/// exponent range and scientific notation outside it; trailing zeros trimmed.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return "null".to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("roundtrip");
    if (-4..=8).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let mut s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let mut m = mantissa.to_string();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        format!("{m}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(0.5), "0.5");
        assert_eq!(fmt_g6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_g6(0.0445), "0.0445");
        assert_eq!(fmt_g6(1234567.0), "1234570");
        assert_eq!(fmt_g6(1.2345678e12), "1.23457e12");
        assert_eq!(fmt_g6(-3.14159265), "-3.14159");
        assert_eq!(fmt_g6(2.5e-7), "2.5e-7");
    }

    #[test]
    fn object_preserves_field_order() {
        let j = Json::obj(vec![
            ("zeta", Json::Int(1)),
            ("alpha", Json::Real(0.25)),
            ("mid", Json::Str("a\"b".into())),
        ]);
        assert_eq!(j.render(), r#"{"zeta":1,"alpha":0.25,"mid":"a\"b"}"#);
    }

    #[test]
    fn arrays_and_nesting() {
        let j = Json::obj(vec![(
            "xs",
            Json::Array(vec![Json::Real(1.5), Json::UInt(7)]),
        )]);
        assert_eq!(j.render(), r#"{"xs":[1.5,7]}"#);
    }
}
