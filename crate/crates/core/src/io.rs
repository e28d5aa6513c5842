//! Instance files.
//!
//! ```json
//! {"format": 1, "lattice": 2,
//!  "items": [{"support": [0, 1, 2], "masses": [[17, 20], [1, 10], [1, 20]]}],
//!  "hidden": {"kind": "sample-hard", ...}}
//! ```
//!
//! Mass numerators and denominators are JSON integers, or decimal strings when
//! they do not fit in 64 bits. The optional `hidden` block carries generator
//! secrets (pair orientation, perturbation offsets) for scoring; learners only
//! ever see the distribution through an oracle.

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

/// Arbitrary-size non-negative integer in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BigNum(BigInt);

impl Serialize for BigNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(x) => s.serialize_u64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for BigNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n
                .as_u64()
                .map(|x| BigNum(BigInt::from(x)))
                .ok_or_else(|| D::Error::custom(format!("expected a non-negative integer, got {n}"))),
            Value::String(s) => BigInt::from_str(&s)
                .map(BigNum)
                .map_err(|_| D::Error::custom(format!("bad integer string {s:?}"))),
            other => Err(D::Error::custom(format!("expected an integer, got {other}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ItemFile {
    support: Vec<u64>,
    masses: Vec<[BigNum; 2]>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: u32,
    lattice: u64,
    items: Vec<ItemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden: Option<Value>,
}

/// A product distribution with its optional generator secrets.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub dist: ProductDist<T>,
    pub hidden: Option<Value>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(dist: ProductDist<T>) -> Self {
        Self { dist, hidden: None }
    }

    pub fn with_hidden(dist: ProductDist<T>, hidden: Value) -> Self {
        Self {
            dist,
            hidden: Some(hidden),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            format: FORMAT_VERSION,
            lattice: self.dist.lattice(),
            items: self
                .dist
                .items()
                .iter()
                .map(|d| ItemFile {
                    support: d.support().to_vec(),
                    masses: d
                        .masses()
                        .iter()
                        .map(|m| {
                            let r = m.to_big_ratio();
                            [BigNum(r.numer().clone()), BigNum(r.denom().clone())]
                        })
                        .collect(),
                })
                .collect(),
            hidden: self.hidden.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.format != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {}, expected {FORMAT_VERSION}",
                file.format
            )));
        }
        let items = file
            .items
            .into_iter()
            .map(|it| {
                let masses = it
                    .masses
                    .into_iter()
                    .map(|[num, den]| {
                        if den.0 == BigInt::from(0) {
                            return Err(Error::Format("zero denominator".into()));
                        }
                        Ok(T::from_big_ratio(&BigRational::new(num.0, den.0)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DiscreteDist::new(file.lattice, it.support, masses)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dist: ProductDist::new(items)?,
            hidden: file.hidden,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
