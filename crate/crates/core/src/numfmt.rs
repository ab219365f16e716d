//! Fixed-width float formatting and deterministic JSON.
//!
//! Every float that leaves the crate is printed with 17 significant digits so
//! that golden files round-trip exactly and repeated runs are byte-identical.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};

/// Format `x` with exactly 17 significant digits. Plain notation for decimal
/// exponents in `-5..17`, scientific otherwise.
pub fn g17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let sci = format!("{x:.16e}");
    let (_, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

/// `serialize_with` adapter emitting [`g17`] text as a JSON number.
pub fn ser_g17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    let num: serde_json::Number = g17(*x).parse().map_err(S::Error::custom)?;
    num.serialize(s)
}

pub fn ser_g17_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&G17(*x))?;
    }
    seq.end()
}

/// Newtype serializing through [`ser_g17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G17(pub f64);

impl Serialize for G17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_g17(&self.0, s)
    }
}

/// Serialize to a single-line JSON string with object keys sorted.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string(&v).expect("JSON value renders")
}

/// Pretty variant of [`to_sorted_json`].
pub fn to_sorted_json_pretty<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string_pretty(&v).expect("JSON value renders")
}
