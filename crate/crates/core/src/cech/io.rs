//! JSON cover files.
//!
//! ```json
//! {"elements": 3, "nerve": [[1,2],[2,3],[1,3]], "group": "Z2",
//!  "values": {"1,2": -1, "2,3": 1, "1,3": 1}}
//! ```
//! Elements are one-based. Values encode `±1` for `Z2`, an integer for `Zk`,
//! a row-major array for `Od` and `[w, x, y, z]` for quaternions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Quaternion};
use serde::Deserialize;
use serde_json::Value;

use super::cochain::Cochain;
use super::cover::{Cover, Simplex};
use super::group::{Element, Group};
use super::CechError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverFile {
    elements: usize,
    nerve: Vec<Vec<usize>>,
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    values: BTreeMap<String, Value>,
}

/// A parsed cover file with its optional cochain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverDocument {
    pub cover: Cover,
    pub cochain: Option<Cochain>,
}

fn parse_key(key: &str, elements: usize) -> Result<Simplex, CechError> {
    let mut s = key
        .split(',')
        .map(|t| {
            let v: usize = t.trim().parse().map_err(|_| CechError::Format(format!("bad simplex key {key:?}")))?;
            if v == 0 || v > elements {
                return Err(CechError::Format(format!("element {v} out of range in key {key:?}")));
            }
            Ok(v - 1)
        })
        .collect::<Result<Vec<_>, _>>()?;
    s.sort_unstable();
    Ok(s)
}

fn parse_element(group: Group, v: &Value) -> Result<Element, CechError> {
    let bad = || CechError::Format(format!("cannot read {v} as an element of {}", group.tag()));
    let floats = || -> Result<Vec<f64>, CechError> {
        v.as_array().ok_or_else(bad)?.iter().map(|x| x.as_f64().ok_or_else(bad)).collect()
    };
    match group {
        Group::Z2 => match v.as_i64() {
            Some(1) => Ok(Element::Sign(1)),
            Some(-1) => Ok(Element::Sign(-1)),
            _ => Err(bad()),
        },
        Group::Zk(k) => {
            let x = v.as_i64().ok_or_else(bad)?;
            Ok(Element::Mod(x.rem_euclid(i64::from(k)) as u32))
        }
        Group::Orthogonal(d) => {
            let f = floats()?;
            if f.len() != d * d {
                return Err(bad());
            }
            Ok(Element::Matrix(DMatrix::from_row_slice(d, d, &f)))
        }
        Group::Quaternion => {
            let f = floats()?;
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(Element::Quat(Quaternion::new(f[0], f[1], f[2], f[3])))
        }
    }
}

pub fn parse_cover(text: &str) -> Result<CoverDocument, CechError> {
    let file: CoverFile = serde_json::from_str(text).map_err(|e| CechError::Format(e.to_string()))?;
    let listed = file
        .nerve
        .iter()
        .map(|s| {
            if s.iter().any(|&v| v == 0 || v > file.elements) {
                return Err(CechError::Format(format!("nerve simplex {s:?} out of range")));
            }
            Ok(s.iter().map(|v| v - 1).collect())
        })
        .collect::<Result<Vec<Simplex>, _>>()?;
    let cover = Cover::new(file.elements, &listed)?;
    let cochain = match file.group {
        None if file.values.is_empty() => None,
        None => return Err(CechError::Format("values given without a group tag".into())),
        Some(tag) => {
            let group = Group::from_tag(&tag)?;
            let mut values = BTreeMap::new();
            let mut degree = None;
            for (k, v) in &file.values {
                let s = parse_key(k, file.elements)?;
                let d = s.len() - 1;
                if *degree.get_or_insert(d) != d {
                    return Err(CechError::Format("values mix simplices of different degrees".into()));
                }
                values.insert(s, parse_element(group, v)?);
            }
            Some(Cochain::new(&cover, degree.unwrap_or(1), group, values)?)
        }
    };
    Ok(CoverDocument { cover, cochain })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_z2_and_rotations() {
        let doc = parse_cover(r#"{"elements": 3, "nerve": [[1,2],[2,3],[1,3],[1,2,3]], "group": "Z2", "values": {"1,2": -1, "3,2": -1, "1,3": -1}}"#).unwrap();
        let c = doc.cochain.unwrap();
        assert_eq!(c.degree, 1);
        assert_eq!(c.values[&vec![1, 2]], Element::Sign(-1));
        let doc =
            parse_cover(r#"{"elements": 2, "nerve": [[1,2]], "group": "O2", "values": {"1,2": [0,-1,1,0]}}"#).unwrap();
        assert!(doc.cochain.is_some());
        assert!(parse_cover(r#"{"elements": 2, "nerve": [[1,3]]}"#).is_err());
        assert!(
            parse_cover(r#"{"elements": 2, "nerve": [[1,2]], "group": "O2", "values": {"1,2": [1,1,0,1]}}"#).is_err()
        );
        assert!(parse_cover(r#"{"elements": 2, "nerve": [], "extra": 1}"#).is_err());
    }
}
