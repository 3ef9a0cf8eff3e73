//! Reading input documents. Every file read goes through [`Loader`], which
//! keeps a digest per input so reports can name exactly what they used.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zariski_core::arith::parse_rational;
use zariski_core::equidist::{FormalReal, TorusPoint};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub sha256: String,
}

#[derive(Default)]
pub struct Loader {
    digests: Vec<InputDigest>,
    combined: Sha256,
}

impl Loader {
    pub fn read<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<T> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let value = serde_json::from_slice(&bytes).map_err(|e| CliError::json(path, &e))?;
        self.combined.update(role.as_bytes());
        self.combined.update([0]);
        self.combined.update((bytes.len() as u64).to_le_bytes());
        self.combined.update(&bytes);
        self.digests.push(InputDigest { role: role.into(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(value)
    }

    /// Digest over every input in reading order, tagged by role.
    pub fn finish(self) -> (String, Vec<InputDigest>) {
        (hex::encode(self.combined.finalize()), self.digests)
    }
}

/// A number given either as a JSON number or as a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

/// Points given with rational strings are exact; plain JSON numbers are
/// taken as floating-point samples.
#[derive(Debug, Clone)]
pub enum Points {
    Exact(Vec<TorusPoint>),
    Numeric(Vec<Vec<f64>>),
}

impl<'de> Deserialize<'de> for Points {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<Num>> = Vec::deserialize(d)?;
        let exact = raw.iter().flatten().all(|n| matches!(n, Num::Text(_)));
        if exact {
            raw.into_iter()
                .map(|p| {
                    p.into_iter()
                        .map(|n| match n {
                            Num::Text(s) => parse_rational(&s).map_err(serde::de::Error::custom),
                            _ => unreachable!(),
                        })
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map(TorusPoint::new)
                })
                .collect::<std::result::Result<_, _>>()
                .map(Points::Exact)
        } else if raw.iter().flatten().any(|n| matches!(n, Num::Text(_))) {
            Err(serde::de::Error::custom("mix of exact (string) and numeric coordinates"))
        } else {
            Ok(Points::Numeric(
                raw.into_iter()
                    .map(|p| {
                        p.into_iter()
                            .map(|n| match n {
                                Num::Int(v) => v as f64,
                                Num::Float(v) => v,
                                Num::Text(_) => unreachable!(),
                            })
                            .collect()
                    })
                    .collect(),
            ))
        }
    }
}

/// A single point, exact or numeric, as `[..]`.
pub fn single_point(p: Points, what: &str) -> Result<Points> {
    let n = match &p {
        Points::Exact(v) => v.len(),
        Points::Numeric(v) => v.len(),
    };
    if n == 1 {
        Ok(p)
    } else {
        Err(CliError::Usage(format!("{what} must hold exactly one point, got {n}")))
    }
}

/// `1/2 + b1` strings or `{"c0": .., "beta": {..}}` objects.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RealDoc {
    Text(String),
    // buffered untagged content loses integer map keys, so reparse
    Object(serde_json::Map<String, serde_json::Value>),
}

pub struct Reals(pub Vec<FormalReal>);

impl<'de> Deserialize<'de> for Reals {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<RealDoc> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|r| match r {
                RealDoc::Text(s) => s.parse().map_err(serde::de::Error::custom),
                RealDoc::Object(m) => serde_json::from_value(m.into()).map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<_, _>>()
            .map(Reals)
    }
}

/// Integers given as JSON numbers or decimal strings.
pub struct Integers(pub Vec<BigInt>);

impl<'de> Deserialize<'de> for Integers {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Num> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|n| match n {
                Num::Int(v) => Ok(BigInt::from(v)),
                Num::Text(s) => s.trim().parse().map_err(|_| serde::de::Error::custom(format!("not an integer: {s:?}"))),
                Num::Float(v) => Err(serde::de::Error::custom(format!("not an integer: {v}"))),
            })
            .collect::<std::result::Result<_, _>>()
            .map(Integers)
    }
}

pub fn rational(s: &str) -> Result<BigRational> {
    Ok(parse_rational(s)?)
}
