//! JSON point-data files.
//!
//! ```json
//! { "n": 5, "m": 1, "c": "1/4", "exact": true, "label": "sphere",
//!   "shape_operators": [[[1, 0, ...], ...]] }
//! ```
//!
//! `c` and matrix entries are numbers or exact `"p/q"` strings. With
//! `"exact": true` the data is kept as rationals; numbers are then read
//! through their decimal text so `0.1` means `1/10`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{Map, Number, Value};

use crate::curvature::PointData;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Field, Rational};

const KNOWN_KEYS: [&str; 7] = ["n", "m", "c", "shape_operators", "label", "exact", "model_spec"];

#[derive(Debug, Clone, PartialEq)]
pub enum PointValues {
    Float(PointData<f64>),
    Exact(PointData<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFile {
    pub label: Option<String>,
    pub values: PointValues,
    /// Passed through untouched.
    pub model_spec: Option<Value>,
}

impl PointFile {
    pub fn float(p: PointData<f64>) -> Self {
        Self {
            label: None,
            values: PointValues::Float(p),
            model_spec: None,
        }
    }

    pub fn exact(p: PointData<Rational>) -> Self {
        Self {
            label: None,
            values: PointValues::Exact(p),
            model_spec: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_model_spec(mut self, spec: Value) -> Self {
        self.model_spec = Some(spec);
        self
    }

    pub fn to_float(&self) -> PointData<f64> {
        match &self.values {
            PointValues::Float(p) => p.clone(),
            PointValues::Exact(p) => p.to_float(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, PointValues::Exact(_))
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        if let Some(label) = &self.label {
            obj.insert("label".into(), Value::String(label.clone()));
        }
        match &self.values {
            PointValues::Float(p) => {
                obj.insert("n".into(), p.n().into());
                obj.insert("m".into(), p.m().into());
                obj.insert("c".into(), float_value(*p.c()));
                obj.insert("exact".into(), Value::Bool(false));
                obj.insert("shape_operators".into(), matrices(p.shape_ops(), |x| float_value(*x)));
            }
            PointValues::Exact(p) => {
                obj.insert("n".into(), p.n().into());
                obj.insert("m".into(), p.m().into());
                obj.insert("c".into(), Value::String(format_rational(p.c())));
                obj.insert("exact".into(), Value::Bool(true));
                obj.insert(
                    "shape_operators".into(),
                    matrices(p.shape_ops(), |x| Value::String(format_rational(x))),
                );
            }
        }
        if let Some(spec) = &self.model_spec {
            obj.insert("model_spec".into(), spec.clone());
        }
        Value::Object(obj)
    }
}

fn float_value(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn matrices<T>(ops: &[DMatrix<T>], cell: impl Fn(&T) -> Value) -> Value {
    Value::Array(
        ops.iter()
            .map(|h| {
                Value::Array(
                    (0..h.nrows())
                        .map(|i| Value::Array((0..h.ncols()).map(|j| cell(&h[(i, j)])).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn read_usize(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = obj.get(key).ok_or_else(|| Error::schema(key, "missing required key"))?;
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::schema(key, format!("expected a non-negative integer, found {v}")))
}

trait Entry: Field {
    fn read(v: &Value, field: &str) -> Result<Self>;
}

impl Entry for f64 {
    fn read(v: &Value, field: &str) -> Result<Self> {
        match v {
            Value::Number(x) => x
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::schema(field, format!("{x} is not a finite number"))),
            Value::String(s) => parse_rational(s)
                .map(|r| r.as_f64())
                .map_err(|_| Error::schema(field, format!("{s:?} is not a number or p/q"))),
            other => Err(Error::schema(
                field,
                format!("expected a number or \"p/q\", found {other}"),
            )),
        }
    }
}

impl Entry for Rational {
    fn read(v: &Value, field: &str) -> Result<Self> {
        let text = match v {
            Value::Number(x) => x.to_string(),
            Value::String(s) => s.clone(),
            other => {
                return Err(Error::schema(
                    field,
                    format!("expected a number or \"p/q\", found {other}"),
                ))
            }
        };
        parse_rational(&text).map_err(|_| Error::schema(field, format!("{text:?} is not an exact number")))
    }
}

fn read_point<T: Entry>(obj: &Map<String, Value>, n: usize, m: usize, symmetry: f64) -> Result<PointData<T>> {
    let c = T::read(
        obj.get("c").ok_or_else(|| Error::schema("c", "missing required key"))?,
        "c",
    )?;
    let ops_value = obj
        .get("shape_operators")
        .ok_or_else(|| Error::schema("shape_operators", "missing required key"))?;
    let list = ops_value
        .as_array()
        .ok_or_else(|| Error::schema("shape_operators", "expected a list of matrices"))?;
    if list.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "shape_operators has {} matrices but m = {m}",
            list.len()
        )));
    }
    let mut ops = Vec::with_capacity(m);
    for (alpha, mat) in list.iter().enumerate() {
        let field = format!("shape_operators[{alpha}]");
        let rows = mat
            .as_array()
            .ok_or_else(|| Error::schema(&field, "expected a list of rows"))?;
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{field} has {} rows, expected n = {n}",
                rows.len()
            )));
        }
        let mut h = DMatrix::from_element(n, n, T::zero());
        for (i, row) in rows.iter().enumerate() {
            let field = format!("{field}[{i}]");
            let cells = row
                .as_array()
                .ok_or_else(|| Error::schema(&field, "expected a row array"))?;
            if cells.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{field} has {} entries, expected n = {n}",
                    cells.len()
                )));
            }
            for (j, cell) in cells.iter().enumerate() {
                h[(i, j)] = T::read(cell, &format!("{field}[{j}]"))?;
            }
        }
        ops.push(h);
    }
    PointData::with_symmetry_tolerance(n, c, ops, symmetry)
}

/// Parses and validates a point-data document.
pub fn parse_point_data(value: &Value, symmetry: f64) -> Result<PointFile> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::schema("$", "expected a JSON object"))?;
    if let Some(key) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::schema(key, "unknown key"));
    }
    let n = read_usize(obj, "n")?;
    let m = read_usize(obj, "m")?;
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("n = {n} must be >= 2")));
    }
    if m < 1 {
        return Err(Error::DimensionMismatch("m must be >= 1".into()));
    }
    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(Error::schema("label", format!("expected a string, found {other}"))),
    };
    let exact = match obj.get("exact") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(other) => return Err(Error::schema("exact", format!("expected a boolean, found {other}"))),
    };
    let values = if exact {
        PointValues::Exact(read_point(obj, n, m, symmetry)?)
    } else {
        PointValues::Float(read_point(obj, n, m, symmetry)?)
    };
    Ok(PointFile {
        label,
        values,
        model_spec: obj.get("model_spec").cloned(),
    })
}

pub fn parse_point_str(text: &str, symmetry: f64) -> Result<PointFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::schema("$", format!("invalid JSON: {e}")))?;
    parse_point_data(&value, symmetry)
}

pub fn load_point_data(path: impl AsRef<Path>) -> Result<PointFile> {
    load_point_data_with(path, crate::Tolerances::default().symmetry)
}

pub fn load_point_data_with(path: impl AsRef<Path>, symmetry: f64) -> Result<PointFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_point_str(&text, symmetry)
}

pub fn to_json_string(file: &PointFile) -> String {
    let mut s = serde_json::to_string_pretty(&file.to_json()).expect("point data serializes");
    s.push('\n');
    s
}

pub fn save_point_data(path: impl AsRef<Path>, file: &PointFile) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json_string(file)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_symmetric, stream};
    use crate::scalar::rational;
    use proptest::prelude::*;
    use serde_json::json;

    fn parse(v: Value) -> Result<PointFile> {
        parse_point_data(&v, 1e-9)
    }

    #[test]
    fn reads_well_formed_file() {
        let f = parse(json!({
            "n": 2, "m": 1, "c": 0.5, "label": "tiny",
            "shape_operators": [[[1.0, 2.0], [2.0, -1.0]]]
        }))
        .unwrap();
        assert_eq!(f.label.as_deref(), Some("tiny"));
        let p = f.to_float();
        assert_eq!(*p.c(), 0.5);
        assert_eq!(p.shape_op(0)[(0, 1)], 2.0);
    }

    #[test]
    fn exact_c_is_rational() {
        let f = parse(json!({
            "n": 2, "m": 1, "c": "1/4", "exact": true,
            "shape_operators": [[["1/3", 0.1], [0.1, 2]]]
        }))
        .unwrap();
        let PointValues::Exact(p) = &f.values else {
            panic!("not exact")
        };
        assert_eq!(*p.c(), rational(1, 4));
        assert_eq!(p.shape_op(0)[(0, 1)], rational(1, 10));
        let again = parse(f.to_json()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn asymmetry_names_the_entry() {
        let err = parse(json!({
            "n": 3, "m": 2, "c": 0,
            "shape_operators": [
                [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                [[0, 0, 1], [0, 0, 0], [0, 0, 0]]
            ]
        }))
        .unwrap_err();
        assert!(
            matches!(
                err,
                Error::Symmetry {
                    alpha: 1,
                    i: 0,
                    j: 2,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn schema_and_dimension_errors() {
        let e = parse(json!({"n": 2, "m": 1, "shape_operators": [[[1, 0], [0, 1]]]})).unwrap_err();
        assert!(matches!(e, Error::Schema { ref field, .. } if field == "c"));
        let e = parse(json!({"n": 2, "m": 2, "c": 0, "shape_operators": [[[1, 0], [0, 1]]]})).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch(_)));
        let e = parse(json!({"n": 2, "m": 1, "c": 0, "shape_operators": [[[1, 0], [0, 1, 2]]]})).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch(ref s) if s.contains("shape_operators[0][1]")));
        let e = parse(json!({"n": 2, "m": 1, "c": 0, "shape_operators": [[[1, "x"], [0, 1]]]})).unwrap_err();
        assert!(matches!(e, Error::Schema { ref field, .. } if field == "shape_operators[0][0][1]"));
        let e = parse(json!({"n": 2, "m": 1, "c": 0, "bogus": 1, "shape_operators": [[[1, 0], [0, 1]]]})).unwrap_err();
        assert!(matches!(e, Error::Schema { ref field, .. } if field == "bogus"));
        let e = parse(json!({"n": "2", "m": 1, "c": 0, "shape_operators": []})).unwrap_err();
        assert!(matches!(e, Error::Schema { ref field, .. } if field == "n"));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let mut rng = stream(5, &[]);
        let p = PointData::new(4, 0.3, vec![gaussian_symmetric(&mut rng, 4)]).unwrap();
        let f = PointFile::float(p).with_label("random");
        save_point_data(&path, &f).unwrap();
        assert_eq!(load_point_data(&path).unwrap(), f);
        assert!(matches!(
            load_point_data(dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn float_round_trip_is_exact(seed in any::<u64>(), n in 2usize..7, m in 1usize..4, c in -2.0f64..2.0) {
            let mut rng = stream(seed, &[]);
            let ops = (0..m).map(|_| gaussian_symmetric(&mut rng, n) * 1e3).collect();
            let f = PointFile::float(PointData::new(n, c, ops).unwrap());
            let back = parse_point_str(&to_json_string(&f), 1e-9).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn exact_round_trip(nums in proptest::collection::vec((-50i64..50, 1i64..40), 9), c in (-9i64..9, 1i64..9)) {
            let m = DMatrix::from_fn(3, 3, |i, j| {
                let (a, b) = nums[3 * i.min(j) + i.max(j)];
                rational(a, b)
            });
            let f = PointFile::exact(PointData::new(3, rational(c.0, c.1), vec![m]).unwrap());
            let back = parse_point_str(&to_json_string(&f), 1e-9).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
