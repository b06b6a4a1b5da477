//! JSON game documents.
//!
//! ```json
//! {"weights":[1,"3/2"], "strategies":[[[0,1],[2]], [[0],[1,2]]],
//!  "latencies":[{"coeffs":[0,5]}, ...], "sharing":"congestion"}
//! ```
//!
//! Numbers are exact rationals (`"p/q"` strings or JSON numbers read in decimal).
//! `{"a":..,"b":..,"root":5}` stands for `a + b*sqrt(5)`; a document holding a
//! non-square root is evaluated in float mode.

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, LatencySpec, Profile, Sharing};
use crate::scalar::{format_rational, int, parse_rational, rational_sqrt, rational_to_f64, Scalar};

/// A rational, or `a + b sqrt(root)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Rational(BigRational),
    Surd { a: BigRational, b: BigRational, root: u64 },
}

impl Value {
    pub fn int(v: i64) -> Self {
        Value::Rational(int(v))
    }

    pub fn surd(a: BigRational, b: BigRational, root: u64) -> Self {
        Value::Surd { a, b, root }.simplify()
    }

    /// Folds perfect-square roots and zero surd parts back into rationals.
    pub fn simplify(self) -> Self {
        match self {
            Value::Surd { a, b, root } => {
                if b.is_zero() {
                    return Value::Rational(a);
                }
                match rational_sqrt(&int(root as i64)) {
                    Some(r) => Value::Rational(a + b * r),
                    None => Value::Surd { a, b, root },
                }
            }
            v => v,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Rational(r) => Some(r),
            Value::Surd { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => rational_to_f64(r),
            Value::Surd { a, b, root } => rational_to_f64(a) + rational_to_f64(b) * (*root as f64).sqrt(),
        }
    }

    pub fn to_scalar<T: Scalar>(&self) -> Result<T> {
        match self {
            Value::Rational(r) => Ok(T::from_rational(r)),
            Value::Surd { .. } if T::EXACT => {
                Err(Error::Parse(format!("surd value {self} needs float mode")))
            }
            Value::Surd { .. } => Ok(T::from_rational(
                &BigRational::from_float(self.to_f64()).expect("finite surd"),
            )),
        }
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::Rational(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{}", format_rational(r)),
            Value::Surd { a, b, root } => {
                write!(f, "{} + {}*sqrt({root})", format_rational(a), format_rational(b))
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Rational(r) if r.is_integer() => match r.numer().to_i64() {
                Some(v) => serializer.serialize_i64(v),
                None => serializer.serialize_str(&format_rational(r)),
            },
            Value::Rational(r) => serializer.serialize_str(&format_rational(r)),
            Value::Surd { a, b, root } => {
                #[derive(Serialize)]
                struct SurdDoc<'a> {
                    a: &'a Value,
                    b: &'a Value,
                    root: u64,
                }
                SurdDoc {
                    a: &Value::Rational(a.clone()),
                    b: &Value::Rational(b.clone()),
                    root: *root,
                }
                .serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(deserializer)?;
        Value::from_json(&raw).map_err(de::Error::custom)
    }
}

impl Value {
    pub fn from_json(raw: &serde_json::Value) -> Result<Self> {
        match raw {
            serde_json::Value::Number(n) => Ok(Value::Rational(parse_rational(&n.to_string())?)),
            serde_json::Value::String(s) => Ok(Value::Rational(parse_rational(s)?)),
            serde_json::Value::Object(map) => {
                let part = |key: &str| -> Result<BigRational> {
                    match map.get(key) {
                        None => Ok(<BigRational as Zero>::zero()),
                        Some(v) => Value::from_json(v)?
                            .as_rational()
                            .cloned()
                            .ok_or_else(|| Error::Parse(format!("surd part `{key}` must be rational"))),
                    }
                };
                let root = map
                    .get("root")
                    .and_then(serde_json::Value::as_u64)
                    .ok_or_else(|| Error::Parse("surd needs a non-negative integer `root`".into()))?;
                Ok(Value::surd(part("a")?, part("b")?, root))
            }
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyDoc {
    pub coeffs: Vec<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SharingDoc {
    #[default]
    Congestion,
    Fair,
}

/// The on-disk game format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub weights: Vec<Value>,
    pub strategies: Vec<Vec<Vec<usize>>>,
    pub latencies: Vec<LatencyDoc>,
    #[serde(default)]
    pub sharing: SharingDoc,
}

/// A game evaluated in the number mode its data requires.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGame {
    Exact(Game<BigRational>),
    Float(Game<f64>),
}

impl GameDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc: GameDoc = serde_json::from_str(text)?;
        for player in &mut doc.strategies {
            for s in player {
                s.sort_unstable();
            }
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game documents serialize")
    }

    pub fn is_exact(&self) -> bool {
        self.weights
            .iter()
            .chain(self.latencies.iter().flat_map(|l| l.coeffs.iter()))
            .all(|v| v.as_rational().is_some())
    }

    pub fn to_game<T: Scalar>(&self) -> Result<Game<T>> {
        let weights = self.weights.iter().map(Value::to_scalar).collect::<Result<_>>()?;
        let latencies = self
            .latencies
            .iter()
            .map(|l| LatencySpec::new(l.coeffs.iter().map(Value::to_scalar).collect::<Result<_>>()?))
            .collect::<Result<_>>()?;
        let sharing = match self.sharing {
            SharingDoc::Congestion => Sharing::Congestion,
            SharingDoc::Fair => Sharing::FairCostSharing,
        };
        Game::new(weights, self.strategies.clone(), latencies, sharing)
    }

    pub fn to_any(&self) -> Result<AnyGame> {
        if self.is_exact() {
            Ok(AnyGame::Exact(self.to_game()?))
        } else {
            Ok(AnyGame::Float(self.to_game()?))
        }
    }

    /// Document for an exact game.
    pub fn from_game(g: &Game<BigRational>) -> Self {
        let value = |r: &BigRational| Value::Rational(r.clone());
        GameDoc {
            weights: g.weights().iter().map(value).collect(),
            strategies: (0..g.players()).map(|i| g.strategies(i).to_vec()).collect(),
            latencies: g
                .latencies()
                .iter()
                .map(|l| LatencyDoc { coeffs: l.coeffs.iter().map(value).collect() })
                .collect(),
            sharing: match g.sharing() {
                Sharing::Congestion => SharingDoc::Congestion,
                Sharing::FairCostSharing => SharingDoc::Fair,
            },
        }
    }
}

/// Sidecar emitted next to generated games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generator: String,
    /// Strategy index per player in the equilibrium / walk outcome.
    pub k: Vec<usize>,
    /// Strategy index per player in the optimum.
    pub o: Vec<usize>,
    pub eps: Value,
    pub claimed_ratio: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Sidecar {
    pub fn profiles(&self) -> (Profile, Profile) {
        (Profile::new(self.k.clone()), Profile::new(self.o.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parses_the_documented_shape() {
        let text = r#"{"weights":[1,"3/2",{"a":"1/2","b":"1/2","root":5}],
            "strategies":[[[1,0],[2]],[[0]],[[2]]],
            "latencies":[{"coeffs":[0,5]},{"coeffs":[0.5]},{"coeffs":["0","2"]}],
            "sharing":"congestion"}"#;
        let doc = GameDoc::from_json(text).unwrap();
        assert_eq!(doc.strategies[0][0], vec![0, 1]);
        assert_eq!(doc.latencies[1].coeffs[0], Value::Rational(rat(1, 2)));
        assert!(!doc.is_exact());
        match doc.to_any().unwrap() {
            AnyGame::Float(g) => {
                assert!((g.weight(2) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15)
            }
            AnyGame::Exact(_) => panic!("surd must force float mode"),
        }
    }

    #[test]
    fn perfect_square_surds_stay_exact() {
        let v = Value::from_json(&serde_json::json!({"a": 1, "b": "1/2", "root": 16})).unwrap();
        assert_eq!(v, Value::Rational(rat(3, 1)));
    }

    #[test]
    fn reports_parse_location() {
        let err = GameDoc::from_json("{\"weights\": [1,\n  ]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(GameDoc::from_json(
            r#"{"weights":["x"],"strategies":[[[0]]],"latencies":[{"coeffs":[1]}]}"#
        )
        .is_err());
    }
}
