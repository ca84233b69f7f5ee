//! Ordered JSON values with a byte-stable writer. Objects keep insertion
//! order; floats are written as `%.12e` (C style, two-digit exponent).

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// `%.12e` formatting; non-finite values become the strings `"nan"`, `"inf"`, `"-inf"`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "\"nan\"".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "\"inf\"".into() } else { "\"-inf\"".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", e.abs())
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

impl Json {
    pub fn obj() -> Self {
        Json::Obj(Vec::new())
    }

    /// Appends a key to an object; panics on other variants.
    pub fn with(mut self, key: &str, value: impl Into<Json>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Json>) {
        match self {
            Json::Obj(v) => v.push((key.to_string(), value.into())),
            _ => panic!("push on a non-object"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Json> {
        match self {
            Json::Obj(v) => v.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn to_compact(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, None, 0);
        s
    }

    pub fn to_pretty(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, Some(2), 0);
        s
    }

    fn write(&self, out: &mut String, indent: Option<usize>, level: usize) {
        let nl = |out: &mut String, level: usize| {
            if let Some(w) = indent {
                out.push('\n');
                out.push_str(&" ".repeat(w * level));
            }
        };
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => escape(s, out),
            Json::Arr(v) => {
                out.push('[');
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    nl(out, level + 1);
                    x.write(out, indent, level + 1);
                }
                if !v.is_empty() {
                    nl(out, level);
                }
                out.push(']');
            }
            Json::Obj(v) => {
                out.push('{');
                for (i, (k, x)) in v.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    nl(out, level + 1);
                    escape(k, out);
                    out.push(':');
                    if indent.is_some() {
                        out.push(' ');
                    }
                    x.write(out, indent, level + 1);
                }
                if !v.is_empty() {
                    nl(out, level);
                }
                out.push('}');
            }
        }
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Num(x)
    }
}

impl From<bool> for Json {
    fn from(x: bool) -> Self {
        Json::Bool(x)
    }
}

impl From<usize> for Json {
    fn from(x: usize) -> Self {
        Json::Int(x as i64)
    }
}

impl From<i64> for Json {
    fn from(x: i64) -> Self {
        Json::Int(x)
    }
}

impl From<u64> for Json {
    fn from(x: u64) -> Self {
        // seeds and counters beyond i64 are written as strings to stay exact
        i64::try_from(x).map_or_else(|_| Json::Str(x.to_string()), Json::Int)
    }
}

impl From<&str> for Json {
    fn from(x: &str) -> Self {
        Json::Str(x.to_string())
    }
}

impl From<String> for Json {
    fn from(x: String) -> Self {
        Json::Str(x)
    }
}

impl From<Vec<Json>> for Json {
    fn from(x: Vec<Json>) -> Self {
        Json::Arr(x)
    }
}

impl From<&[f64]> for Json {
    fn from(x: &[f64]) -> Self {
        Json::Arr(x.iter().map(|v| Json::Num(*v)).collect())
    }
}

impl From<Vec<f64>> for Json {
    fn from(x: Vec<f64>) -> Self {
        Json::from(x.as_slice())
    }
}

impl From<&nalgebra::DMatrix<f64>> for Json {
    fn from(m: &nalgebra::DMatrix<f64>) -> Self {
        Json::Arr((0..m.nrows()).map(|r| Json::Arr((0..m.ncols()).map(|c| Json::Num(m[(r, c)])).collect())).collect())
    }
}

/// Converts parsed input JSON into the ordered representation; object keys
/// keep the order of the parsed map.
pub fn from_value(v: &serde_json::Value) -> Json {
    match v {
        serde_json::Value::Null => Json::Null,
        serde_json::Value::Bool(b) => Json::Bool(*b),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Json::Int(i),
            None => Json::Num(n.as_f64().unwrap_or(f64::NAN)),
        },
        serde_json::Value::String(s) => Json::Str(s.clone()),
        serde_json::Value::Array(a) => Json::Arr(a.iter().map(from_value).collect()),
        serde_json::Value::Object(o) => Json::Obj(o.iter().map(|(k, v)| (k.clone(), from_value(v))).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_c_style() {
        assert_eq!(format_float(1.0), "1.000000000000e+00");
        assert_eq!(format_float(-0.5), "-5.000000000000e-01");
        assert_eq!(format_float(1.5e-123), "1.500000000000e-123");
        assert_eq!(format_float(0.0), "0.000000000000e+00");
        assert_eq!(format_float(f64::NAN), "\"nan\"");
    }

    #[test]
    fn writer_keeps_order() {
        let j = Json::obj().with("b", 1usize).with("a", vec![Json::Num(2.0), Json::Null]).with("s", "q\"");
        assert_eq!(j.to_compact(), r#"{"b":1,"a":[2.000000000000e+00,null],"s":"q\""}"#);
        assert_eq!(j.to_pretty().lines().count(), 8);
    }
}
