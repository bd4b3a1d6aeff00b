//! Serde adapters that keep `BigInt` values as plain JSON integer literals.
//!
//! `num-bigint`'s own serde format is a sign/digit tuple, which is not what
//! the wire formats of this crate use. These helpers go through
//! `serde_json::Number` (built with the `arbitrary_precision` feature) so
//! integers of any size round-trip as ordinary JSON numbers.

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;
use std::str::FromStr;

fn to_number<E: serde::ser::Error>(x: &BigInt) -> Result<Number, E> {
    Number::from_str(&x.to_string()).map_err(|e| E::custom(format!("bigint to json: {e}")))
}

fn from_number<E: serde::de::Error>(n: &Number) -> Result<BigInt, E> {
    BigInt::from_str(&n.to_string()).map_err(|_| E::custom(format!("expected integer, got {n}")))
}

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        to_number::<S::Error>(x)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let n = Number::deserialize(d)?;
        from_number::<D::Error>(&n)
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let ns: Vec<Number> = xs
            .iter()
            .map(to_number::<S::Error>)
            .collect::<Result<_, _>>()?;
        ns.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let ns = Vec::<Number>::deserialize(d)?;
        ns.iter().map(from_number::<D::Error>).collect()
    }
}

pub mod mat {
    use super::*;
    use crate::mat::IntMat;

    pub fn serialize<S: Serializer>(m: &IntMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Number>> = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| to_number::<S::Error>(&m[(i, j)]))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<IntMat, D::Error> {
        let rows = Vec::<Vec<Number>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in &rows {
            for n in r {
                data.push(from_number::<D::Error>(n)?);
            }
        }
        Ok(IntMat::from_vec(nrows, ncols, data))
    }
}
