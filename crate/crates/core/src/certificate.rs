//! Dual certificates, the solution concepts they belong to, and the reduction
//! of a certificate to per-resource inequality families `g(K, O) >= 0`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value as Json};

use crate::dynamics::PotentialKind;
use crate::error::{Error, Result};
use crate::poly::BiPoly;
use crate::scalar::{
    floor_half_sum_sqrt, format_rational, harmonic, int, parse_rational, rat, rational_sqrt,
    rational_to_f64, Scalar,
};

/// A certificate value: exact when rational, a float when it involves a surd.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(BigRational),
    Approx(f64),
}

impl Num {
    pub fn int(v: i64) -> Self {
        Num::Exact(int(v))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Num::Exact(rat(p, q))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => rational_to_f64(r),
            Num::Approx(v) => *v,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_negative(),
            Num::Approx(v) => *v < 0.0,
        }
    }

    pub fn to_scalar<T: Scalar>(&self) -> Result<T> {
        match self {
            Num::Exact(r) => Ok(T::from_rational(r)),
            Num::Approx(v) if !T::EXACT => Ok(T::from_rational(
                &BigRational::from_float(*v).ok_or_else(|| Error::Parse(format!("non-finite value {v}")))?,
            )),
            Num::Approx(v) => Err(Error::CertificateMismatch(format!(
                "irrational value {v} cannot be used in exact mode"
            ))),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Num::Exact(r) if r.is_integer() => match r.numer().to_i64() {
                Some(v) => Json::from(v),
                None => Json::from(format_rational(r)),
            },
            Num::Exact(r) => Json::from(format_rational(r)),
            Num::Approx(v) => Json::from(*v),
        }
    }

    /// Strings and integers are exact. Other JSON numbers are exact decimals
    /// unless they carry more than 12 significant digits, in which case they
    /// are taken to be rounded irrationals.
    pub fn from_json(raw: &Json) -> Result<Self> {
        match raw {
            Json::String(s) => Ok(Num::Exact(parse_rational(s)?)),
            Json::Number(n) if n.is_i64() || n.is_u64() => Ok(Num::Exact(parse_rational(&n.to_string())?)),
            Json::Number(n) => {
                let text = n.to_string();
                let mantissa = text.split(['e', 'E']).next().unwrap_or("");
                let digits = mantissa.trim_start_matches('-').replace('.', "");
                let significant = digits.trim_start_matches('0').len();
                if significant > 12 {
                    Ok(Num::Approx(n.as_f64().unwrap_or(f64::NAN)))
                } else {
                    Ok(Num::Exact(parse_rational(&text)?))
                }
            }
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }
}

impl From<BigRational> for Num {
    fn from(r: BigRational) -> Self {
        Num::Exact(r)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{}", format_rational(r)),
            Num::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// `a + b sqrt(d)` with rational `a`, `b`, `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigRational,
}

impl Quad {
    pub fn rational(a: BigRational, d: &BigRational) -> Self {
        Quad { a, b: int(0), d: d.clone() }
    }

    pub fn sqrt(d: &BigRational) -> Self {
        Quad { a: int(0), b: int(1), d: d.clone() }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Quad { a: &self.a * s, b: &self.b * s, d: self.d.clone() }
    }

    pub fn conjugate(&self) -> Self {
        Quad { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    pub fn to_num(&self) -> Num {
        if self.b.is_zero() {
            return Num::Exact(self.a.clone());
        }
        match rational_sqrt(&self.d) {
            Some(root) => Num::Exact(&self.a + &self.b * root),
            None => Num::Approx(rational_to_f64(&self.a) + rational_to_f64(&self.b) * rational_to_f64(&self.d).sqrt()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_num().to_f64()
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, rhs: Quad) -> Quad {
        debug_assert_eq!(self.d, rhs.d);
        Quad { a: self.a + rhs.a, b: self.b + rhs.b, d: self.d }
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, rhs: Quad) -> Quad {
        self + (-rhs)
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, rhs: Quad) -> Quad {
        debug_assert_eq!(self.d, rhs.d);
        let a = &self.a * &rhs.a + &self.b * &rhs.b * &self.d;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Quad { a, b, d: self.d }
    }
}

impl Div for Quad {
    type Output = Quad;
    fn div(self, rhs: Quad) -> Quad {
        if let Some(root) = rational_sqrt(&rhs.d) {
            let fold = |q: Quad| &q.a + &q.b * &root;
            let d = rhs.d.clone();
            return Quad::rational(fold(self) / fold(rhs), &d);
        }
        let norm = &rhs.a * &rhs.a - &rhs.b * &rhs.b * &rhs.d;
        assert!(!norm.is_zero(), "division by a zero-norm surd");
        let num = self * rhs.conjugate();
        Quad { a: num.a / &norm, b: num.b / &norm, d: num.d }
    }
}

/// Which potential the PoS analysis minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialTag {
    EpsAffineUnweighted,
    EpsAffineWeighted,
    Quadratic,
    Cubic,
}

impl PotentialTag {
    pub fn name(self) -> &'static str {
        match self {
            PotentialTag::EpsAffineUnweighted => "eps-affine-unweighted",
            PotentialTag::EpsAffineWeighted => "eps-affine-weighted",
            PotentialTag::Quadratic => "quadratic",
            PotentialTag::Cubic => "cubic",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        [
            PotentialTag::EpsAffineUnweighted,
            PotentialTag::EpsAffineWeighted,
            PotentialTag::Quadratic,
            PotentialTag::Cubic,
        ]
        .into_iter()
        .find(|t| t.name() == name)
        .ok_or_else(|| Error::Unknown { kind: "potential", name: name.to_string() })
    }

    pub fn degree(self) -> usize {
        match self {
            PotentialTag::EpsAffineUnweighted | PotentialTag::EpsAffineWeighted => 1,
            PotentialTag::Quadratic => 2,
            PotentialTag::Cubic => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolutionConcept {
    EpsPoaUnweighted { eps: Num, d: usize },
    EpsPoaWeighted { eps: Num, d: usize },
    EpsPosViaPotential { eps: Num, d: usize, potential: PotentialTag },
    OneRoundWalk { d: usize, weighted: bool },
    MaxSocialPoa { n: usize },
    FairSharingPos { n: usize },
}

impl SolutionConcept {
    pub fn name(&self) -> &'static str {
        match self {
            SolutionConcept::EpsPoaUnweighted { .. } => "eps-poa-unweighted",
            SolutionConcept::EpsPoaWeighted { .. } => "eps-poa-weighted",
            SolutionConcept::EpsPosViaPotential { .. } => "eps-pos-potential",
            SolutionConcept::OneRoundWalk { .. } => "one-round-walk",
            SolutionConcept::MaxSocialPoa { .. } => "max-social-poa",
            SolutionConcept::FairSharingPos { .. } => "fair-sharing-pos",
        }
    }

    pub fn eps(&self) -> Num {
        match self {
            SolutionConcept::EpsPoaUnweighted { eps, .. }
            | SolutionConcept::EpsPoaWeighted { eps, .. }
            | SolutionConcept::EpsPosViaPotential { eps, .. } => eps.clone(),
            _ => Num::int(0),
        }
    }

    /// Latency degree `d` of the analysed games.
    pub fn degree(&self) -> usize {
        match self {
            SolutionConcept::EpsPoaUnweighted { d, .. }
            | SolutionConcept::EpsPoaWeighted { d, .. }
            | SolutionConcept::EpsPosViaPotential { d, .. }
            | SolutionConcept::OneRoundWalk { d, .. } => *d,
            SolutionConcept::MaxSocialPoa { .. } | SolutionConcept::FairSharingPos { .. } => 1,
        }
    }

    /// Whether the concept admits players of arbitrary weight.
    pub fn weighted(&self) -> bool {
        match self {
            SolutionConcept::EpsPoaWeighted { .. } => true,
            SolutionConcept::EpsPosViaPotential { potential, .. } => {
                *potential == PotentialTag::EpsAffineWeighted
            }
            SolutionConcept::OneRoundWalk { weighted, .. } => *weighted,
            _ => false,
        }
    }

    /// The potential a PoS concept minimizes, when `ε` is rational.
    pub fn potential_kind(&self) -> Option<PotentialKind> {
        match self {
            SolutionConcept::EpsPosViaPotential { eps, potential, .. } => {
                let e = eps.as_rational()?.clone();
                Some(match potential {
                    PotentialTag::EpsAffineUnweighted => PotentialKind::EpsAffineUnweighted(e),
                    PotentialTag::EpsAffineWeighted => PotentialKind::EpsAffineWeighted(e),
                    PotentialTag::Quadratic => PotentialKind::QuadraticExact,
                    PotentialTag::Cubic => PotentialKind::CubicExact,
                })
            }
            _ => None,
        }
    }

    /// Checks that the concept is one of the covered combinations.
    pub fn validate(&self) -> Result<()> {
        let out = |msg: String| Err(Error::ParameterOutOfRange(msg));
        if self.eps().is_negative() {
            return out(format!("ε must be non-negative, got {}", self.eps()));
        }
        match self {
            SolutionConcept::EpsPoaUnweighted { d, .. } if !(1..=3).contains(d) => {
                out(format!("degree {d} outside 1..=3"))
            }
            SolutionConcept::EpsPoaWeighted { d, .. } if *d != 1 => {
                out(format!("weighted ε-PoA is covered for affine latencies only, got d = {d}"))
            }
            SolutionConcept::EpsPosViaPotential { eps, d, potential } => {
                if *d != potential.degree() {
                    return out(format!("potential {} needs d = {}, got {d}", potential.name(), potential.degree()));
                }
                let exact_only = matches!(potential, PotentialTag::Quadratic | PotentialTag::Cubic);
                if exact_only && eps.to_f64() != 0.0 {
                    return out(format!("potential {} is covered for ε = 0 only", potential.name()));
                }
                Ok(())
            }
            SolutionConcept::OneRoundWalk { d, weighted } => {
                if !(1..=3).contains(d) || (*weighted && *d != 1) {
                    return out(format!("one-round walks covered for unweighted d ≤ 3 and weighted d = 1, got d = {d}"));
                }
                Ok(())
            }
            SolutionConcept::MaxSocialPoa { n } | SolutionConcept::FairSharingPos { n } if *n == 0 => {
                out("n must be at least 1".into())
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> (Json, Json) {
        let mut params = Map::new();
        match self {
            SolutionConcept::EpsPoaUnweighted { eps, d } | SolutionConcept::EpsPoaWeighted { eps, d } => {
                params.insert("eps".into(), eps.to_json());
                params.insert("d".into(), json!(d));
            }
            SolutionConcept::EpsPosViaPotential { eps, d, potential } => {
                params.insert("eps".into(), eps.to_json());
                params.insert("d".into(), json!(d));
                params.insert("potential".into(), json!(potential.name()));
            }
            SolutionConcept::OneRoundWalk { d, weighted } => {
                params.insert("d".into(), json!(d));
                params.insert("weighted".into(), json!(weighted));
            }
            SolutionConcept::MaxSocialPoa { n } | SolutionConcept::FairSharingPos { n } => {
                params.insert("n".into(), json!(n));
            }
        }
        (json!(self.name()), Json::Object(params))
    }

    pub fn from_json(name: &str, params: &Json) -> Result<Self> {
        let get = |key: &str| params.get(key);
        let eps = match get("eps") {
            Some(v) => Num::from_json(v)?,
            None => Num::int(0),
        };
        let usize_param = |key: &str, default: Option<usize>| -> Result<usize> {
            match get(key) {
                Some(v) => v
                    .as_u64()
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::Parse(format!("parameter `{key}` must be a non-negative integer"))),
                None => default.ok_or_else(|| Error::Parse(format!("missing parameter `{key}`"))),
            }
        };
        let concept = match name {
            "eps-poa-unweighted" => SolutionConcept::EpsPoaUnweighted { eps, d: usize_param("d", Some(1))? },
            "eps-poa-weighted" => SolutionConcept::EpsPoaWeighted { eps, d: usize_param("d", Some(1))? },
            "eps-pos-potential" => {
                let potential = match get("potential").and_then(Json::as_str) {
                    Some(p) => PotentialTag::parse(p)?,
                    None => return Err(Error::Parse("missing parameter `potential`".into())),
                };
                let d = usize_param("d", Some(potential.degree()))?;
                SolutionConcept::EpsPosViaPotential { eps, d, potential }
            }
            "one-round-walk" => SolutionConcept::OneRoundWalk {
                d: usize_param("d", Some(1))?,
                weighted: get("weighted").and_then(Json::as_bool).unwrap_or(false),
            },
            "max-social-poa" => SolutionConcept::MaxSocialPoa { n: usize_param("n", None)? },
            "fair-sharing-pos" => SolutionConcept::FairSharingPos { n: usize_param("n", None)? },
            other => return Err(Error::Unknown { kind: "concept", name: other.to_string() }),
        };
        concept.validate()?;
        Ok(concept)
    }
}

/// Dual multipliers.
#[derive(Clone, Debug, PartialEq)]
pub enum Duals {
    /// One `y` shared by all players (scaled by the weight in weighted
    /// concepts) and, for potential-based concepts, the multiplier `z`.
    Uniform { y: Num, z: Option<Num> },
    /// Per-player multipliers for the max social function: the values for
    /// players `1..n-1` and those of the player attaining the maximum.
    Max { x: Num, y: Num, z: Num, x_n: Num, y_n: Num, z_n: Num },
}

impl Duals {
    pub fn uniform(y: Num) -> Self {
        Duals::Uniform { y, z: None }
    }

    pub fn pair(y: Num, z: Num) -> Self {
        Duals::Uniform { y, z: Some(z) }
    }

    pub fn values(&self) -> Vec<(&'static str, &Num)> {
        match self {
            Duals::Uniform { y, z } => {
                let mut v = vec![("y", y)];
                if let Some(z) = z {
                    v.push(("z", z));
                }
                v
            }
            Duals::Max { x, y, z, x_n, y_n, z_n } => {
                vec![("x", x), ("y", y), ("z", z), ("x_n", x_n), ("y_n", y_n), ("z_n", z_n)]
            }
        }
    }

    pub fn to_json(&self) -> Json {
        Json::Object(self.values().into_iter().map(|(k, v)| (k.to_string(), v.to_json())).collect())
    }

    pub fn from_json(raw: &Json) -> Result<Self> {
        let field = |key: &str| -> Result<Option<Num>> { raw.get(key).map(Num::from_json).transpose() };
        let need = |key: &str| -> Result<Num> {
            field(key)?.ok_or_else(|| Error::Parse(format!("missing dual value `{key}`")))
        };
        if raw.get("x_n").is_some() || raw.get("x").is_some() {
            Ok(Duals::Max {
                x: need("x")?,
                y: need("y")?,
                z: need("z")?,
                x_n: need("x_n")?,
                y_n: need("y_n")?,
                z_n: need("z_n")?,
            })
        } else {
            Ok(Duals::Uniform { y: need("y")?, z: field("z")? })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub concept: SolutionConcept,
    pub duals: Duals,
    pub gamma: Num,
}

impl DualCertificate {
    pub fn new(concept: SolutionConcept, duals: Duals, gamma: Num) -> Self {
        Self { concept, duals, gamma }
    }

    pub fn is_exact(&self) -> bool {
        self.gamma.is_exact() && self.concept.eps().is_exact() && self.duals.values().iter().all(|(_, v)| v.is_exact())
    }

    pub fn to_json(&self) -> Json {
        let (concept, params) = self.concept.to_json();
        json!({
            "concept": concept,
            "params": params,
            "duals": self.duals.to_json(),
            "gamma": self.gamma.to_json(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Json = serde_json::from_str(text)?;
        Self::from_value(&raw)
    }

    pub fn from_value(raw: &Json) -> Result<Self> {
        let name = raw
            .get("concept")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::Parse("certificate needs a `concept` string".into()))?;
        let params = raw.get("params").cloned().unwrap_or_else(|| json!({}));
        let concept = SolutionConcept::from_json(name, &params)?;
        let duals = Duals::from_json(raw.get("duals").ok_or_else(|| Error::Parse("missing `duals`".into()))?)?;
        let gamma = Num::from_json(raw.get("gamma").ok_or_else(|| Error::Parse("missing `gamma`".into()))?)?;
        let cert = Self { concept, duals, gamma };
        cert.check_shape()?;
        Ok(cert)
    }

    /// Checks that the duals have the shape the concept expects.
    pub fn check_shape(&self) -> Result<()> {
        self.concept.validate()?;
        let mismatch = |msg: &str| Err(Error::CertificateMismatch(format!("{}: {msg}", self.concept.name())));
        match (&self.concept, &self.duals) {
            (SolutionConcept::MaxSocialPoa { .. }, Duals::Max { .. }) => Ok(()),
            (SolutionConcept::MaxSocialPoa { .. }, _) => mismatch("needs x, y, z, x_n, y_n, z_n"),
            (_, Duals::Max { .. }) => mismatch("takes uniform duals y (and z)"),
            (SolutionConcept::EpsPosViaPotential { .. } | SolutionConcept::FairSharingPos { .. }, Duals::Uniform { z: None, .. }) => {
                mismatch("needs both y and z")
            }
            (SolutionConcept::EpsPosViaPotential { potential: PotentialTag::EpsAffineWeighted, .. }, Duals::Uniform { y, .. })
                if y.to_f64() != 0.0 =>
            {
                mismatch("the weighted ε-potential family is reduced for y = 0")
            }
            _ => Ok(()),
        }
    }

    /// Sign constraints of the dual program that the values violate.
    pub fn sign_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut nonneg = |name: &str, v: &Num| {
            if v.is_negative() {
                out.push(format!("{name} = {v} must be non-negative"));
            }
        };
        match (&self.duals, &self.concept) {
            (Duals::Uniform { y, z }, _) => {
                nonneg("y", y);
                if let Some(z) = z {
                    nonneg("z", z);
                }
            }
            (Duals::Max { x, y, z, x_n, y_n, z_n }, SolutionConcept::MaxSocialPoa { n }) => {
                nonneg("x", x);
                nonneg("y", y);
                nonneg("z", z);
                nonneg("x_n", x_n);
                nonneg("z_n", z_n);
                let total = match (y.as_rational(), y_n.as_rational()) {
                    (Some(y), Some(yn)) => int(*n as i64 - 1) * y + yn >= int(-1),
                    _ => (*n as f64 - 1.0) * y.to_f64() + y_n.to_f64() >= -1.0 - 1e-9,
                };
                if !total {
                    out.push(format!("(n-1) y + y_n = {} must be at least -1", (*n as f64 - 1.0) * y.to_f64() + y_n.to_f64()));
                }
            }
            (Duals::Max { .. }, _) => out.push("per-player duals on a uniform concept".into()),
        }
        out
    }

    /// For the max social function the bound is the dual objective
    /// `(n-1) z + z_n`; `None` for the other concepts, where γ is itself a
    /// dual variable.
    pub fn dual_objective(&self) -> Option<Num> {
        match (&self.concept, &self.duals) {
            (SolutionConcept::MaxSocialPoa { n }, Duals::Max { z, z_n, .. }) => Some(match (z, z_n) {
                (Num::Exact(z), Num::Exact(zn)) => Num::Exact(int(*n as i64 - 1) * z + zn),
                _ => Num::Approx((*n as f64 - 1.0) * z.to_f64() + z_n.to_f64()),
            }),
            _ => None,
        }
    }
}

/// Where a family must be non-negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// All integers `K >= k_min`, `O >= o_min`.
    Integers { k_min: u64, o_min: u64 },
    /// The closed non-negative quadrant.
    Reals,
    /// Integers in `[0, k_max] x [0, o_max]`.
    Box { k_max: u64, o_max: u64 },
}

/// `a p(K) + b O/(K+1) + c H_K + d H_O + e p(O)` with `p(x) = [x >= 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicForm<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
}

impl<T: Scalar> HarmonicForm<T> {
    pub fn eval(&self, k: u64, o: u64) -> T {
        let p = |x: u64| if x >= 1 { T::one() } else { T::zero() };
        let h = |x: u64| T::from_rational(&harmonic(x));
        self.a.clone() * p(k)
            + self.b.clone() * T::from_i64(o as i64) / T::from_i64(k as i64 + 1)
            + self.c.clone() * h(k)
            + self.d.clone() * h(o)
            + self.e.clone() * p(o)
    }
}

impl<T: Scalar> fmt::Display for HarmonicForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [
            (&self.a, "p(K)"),
            (&self.b, "O/(K+1)"),
            (&self.c, "H_K"),
            (&self.d, "H_O"),
            (&self.e, "p(O)"),
        ];
        let shown: Vec<String> = parts
            .iter()
            .filter(|(c, _)| **c != T::zero())
            .map(|(c, name)| format!("({c}) {name}"))
            .collect();
        if shown.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", shown.join(" + "))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyBody<T> {
    Poly(BiPoly<T>),
    Harmonic(HarmonicForm<T>),
}

impl<T: Scalar> FamilyBody<T> {
    pub fn eval(&self, k: u64, o: u64) -> T {
        match self {
            FamilyBody::Poly(p) => p.eval(&T::from_i64(k as i64), &T::from_i64(o as i64)),
            FamilyBody::Harmonic(h) => h.eval(k, o),
        }
    }
}

impl<T: Scalar> fmt::Display for FamilyBody<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyBody::Poly(p) => write!(f, "{p}"),
            FamilyBody::Harmonic(h) => write!(f, "{h}"),
        }
    }
}

/// "`body(K, O) >= 0` for every `(K, O)` in `domain`".
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintFamily<T> {
    pub label: String,
    pub body: FamilyBody<T>,
    pub domain: Domain,
    /// A reduction step the family relies on without re-deriving it.
    pub assumption: Option<String>,
}

impl<T: Scalar> ConstraintFamily<T> {
    fn poly(label: impl Into<String>, g: BiPoly<T>, domain: Domain) -> Self {
        Self { label: label.into(), body: FamilyBody::Poly(g), domain, assumption: None }
    }

    fn assuming(mut self, note: &str) -> Self {
        self.assumption = Some(note.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySet {
    Exact(Vec<ConstraintFamily<BigRational>>),
    Float(Vec<ConstraintFamily<f64>>),
}

impl FamilySet {
    pub fn len(&self) -> usize {
        match self {
            FamilySet::Exact(v) => v.len(),
            FamilySet::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(label, body, domain)` rendered as text.
    pub fn describe(&self) -> Vec<(String, String, Domain)> {
        match self {
            FamilySet::Exact(v) => v.iter().map(|f| (f.label.clone(), f.body.to_string(), f.domain)).collect(),
            FamilySet::Float(v) => v.iter().map(|f| (f.label.clone(), f.body.to_string(), f.domain)).collect(),
        }
    }
}

pub const WORST_ORDER: &str = "worst-case ordering: every player of O on a resource enters after its players of K";

/// Reduces a certificate to the inequality families whose validity implies
/// dual feasibility. Exact when every value is rational.
pub fn dual_family(cert: &DualCertificate) -> Result<FamilySet> {
    cert.check_shape()?;
    if cert.is_exact() {
        Ok(FamilySet::Exact(build_families(cert)?))
    } else {
        Ok(FamilySet::Float(build_families(cert)?))
    }
}

/// `sum_{j=1}^{K} j^d` as a polynomial in `K`.
fn prefix_power_sum<T: Scalar>(d: usize) -> BiPoly<T> {
    let k = BiPoly::<T>::k();
    let k1 = k.clone() + BiPoly::constant(T::one());
    match d {
        1 => (k * k1).scale(&T::from_ratio(1, 2)),
        2 => (k.clone() * k1 * (k.scale(&T::from_i64(2)) + BiPoly::constant(T::one()))).scale(&T::from_ratio(1, 6)),
        3 => (k * k1).pow(2).scale(&T::from_ratio(1, 4)),
        _ => unreachable!("validated degree"),
    }
}

fn build_families<T: Scalar>(cert: &DualCertificate) -> Result<Vec<ConstraintFamily<T>>> {
    type P<T> = BiPoly<T>;
    let k = P::<T>::k();
    let o = P::<T>::o();
    let one = || P::<T>::constant(T::one());
    let gamma: T = cert.gamma.to_scalar()?;
    let eps: T = cert.concept.eps().to_scalar()?;
    let integers = Domain::Integers { k_min: 0, o_min: 0 };

    let (y, z) = match &cert.duals {
        Duals::Uniform { y, z } => (
            y.to_scalar::<T>()?,
            z.as_ref().map(|z| z.to_scalar::<T>()).transpose()?.unwrap_or_else(T::zero),
        ),
        Duals::Max { .. } => (T::zero(), T::zero()),
    };

    let families = match &cert.concept {
        SolutionConcept::EpsPoaUnweighted { d, .. } => {
            let d = *d as u32;
            let e1 = T::one() + eps;
            let g = k.pow(d + 1).scale(&(y.clone() - T::one()))
                - (o.clone() * (k + one()).pow(d)).scale(&(e1 * y))
                + o.pow(d + 1).scale(&gamma);
            vec![ConstraintFamily::poly("ε-equilibrium deviation", g, integers)]
        }
        SolutionConcept::EpsPoaWeighted { .. } => {
            let e1 = T::one() + eps;
            let g = k.pow(2).scale(&(y.clone() - T::one())) - (k * o.clone()).scale(&(e1.clone() * y.clone()))
                + o.pow(2).scale(&(gamma - e1 * y));
            vec![ConstraintFamily::poly("weighted ε-equilibrium deviation", g, Domain::Reals)
                .assuming("sum of squared weights of the players of O on a resource is at most O^2")]
        }
        SolutionConcept::EpsPosViaPotential { potential, .. } => match potential {
            PotentialTag::EpsAffineUnweighted => {
                let e1 = T::one() + eps.clone();
                let lin_k = (y.clone() * (T::one() - eps.clone()) - z.clone() * eps.clone()) / e1.clone();
                let lin_o = (y.clone() * (T::one() - eps) + z.clone()) / e1;
                let g = k.pow(2).scale(&(y.clone() + z.clone() - T::one())) + k.scale(&lin_k)
                    - (k * o.clone()).scale(&z)
                    - o.pow(2).scale(&y)
                    - o.scale(&lin_o)
                    + o.pow(2).scale(&gamma);
                vec![ConstraintFamily::poly("ε-potential global minimum", g, integers)]
            }
            PotentialTag::EpsAffineWeighted => {
                let cc = (T::one() - eps.clone()) / (T::one() + eps);
                let g = k.pow(2).scale(&(z.clone() - T::one())) + o.pow(2).scale(&(gamma - z * (T::one() + cc)));
                vec![ConstraintFamily::poly("weighted ε-potential global minimum", g, Domain::Reals)
                    .assuming("with y = 0 the potential rows reduce to per-resource terms in K^2 and O^2")]
            }
            PotentialTag::Quadratic => {
                let six_phi = |x: &P<T>| x.clone() * (x.clone() + one()) * (x.scale(&T::from_i64(2)) + one());
                let g = (six_phi(&k) - six_phi(&o)).scale(&y) + (k.pow(3) - o.clone() * (k.clone() + one()).pow(2)).scale(&z)
                    + o.pow(3).scale(&gamma)
                    - k.pow(3);
                vec![ConstraintFamily::poly("potential global minimum", g, integers)]
            }
            PotentialTag::Cubic => {
                let four_phi = |x: &P<T>| (x.clone() * (x.clone() + one())).pow(2);
                let g = (four_phi(&k) - four_phi(&o)).scale(&y) + (k.pow(4) - o.clone() * (k.clone() + one()).pow(3)).scale(&z)
                    + o.pow(4).scale(&gamma)
                    - k.pow(4);
                vec![ConstraintFamily::poly("potential global minimum", g, integers)]
            }
        },
        SolutionConcept::OneRoundWalk { d, weighted: false } => {
            let d = *d as u32;
            let g = (prefix_power_sum::<T>(d as usize) - o.clone() * (k.clone() + one()).pow(d)).scale(&y)
                + o.pow(d + 1).scale(&gamma)
                - k.pow(d + 1);
            vec![ConstraintFamily::poly(WORST_ORDER, g, integers)]
        }
        SolutionConcept::OneRoundWalk { weighted: true, .. } => {
            let g = k.pow(2).scale(&(y.clone() / T::from_i64(2) - T::one())) - (k * o.clone()).scale(&y)
                + o.pow(2).scale(&(gamma - y));
            vec![ConstraintFamily::poly(WORST_ORDER, g, Domain::Reals)
                .assuming("y_i = c w_i, with the weighted prefix sums bounded by K^2/2 and the squared weights of O by O^2")]
        }
        SolutionConcept::MaxSocialPoa { .. } => {
            let Duals::Max { x, y, z, x_n, y_n, z_n } = &cert.duals else { unreachable!("checked shape") };
            let [x, y, z, xn, yn, zn]: [T; 6] = [
                x.to_scalar()?,
                y.to_scalar()?,
                z.to_scalar()?,
                x_n.to_scalar()?,
                y_n.to_scalar()?,
                z_n.to_scalar()?,
            ];
            let k1 = k.clone() + one();
            // x (K+1) - z O, the contribution of one player of O
            let enter = |xv: &T, zv: &T| k1.scale(xv) - o.scale(zv);
            let quad_k = k.pow(2).scale(&(x.clone() + y.clone()));
            let shared = (k.clone() - one()) * k.scale(&(x.clone() + y.clone())) + k.scale(&(xn.clone() + yn));
            vec![
                ConstraintFamily::poly(
                    "case 1: resource outside both strategies of the max player",
                    quad_k.clone() - (k.clone() * o.clone()).scale(&x) - o.scale(&x) + o.pow(2).scale(&z),
                    Domain::Integers { k_min: 0, o_min: 0 },
                ),
                ConstraintFamily::poly(
                    "case 2: resource only in the optimum strategy of the max player",
                    quad_k - (o.clone() - one()) * enter(&x, &z) - enter(&xn, &zn),
                    Domain::Integers { k_min: 0, o_min: 1 },
                ),
                ConstraintFamily::poly(
                    "case 3: resource only in the equilibrium strategy of the max player",
                    shared.clone() - o.clone() * enter(&x, &z),
                    Domain::Integers { k_min: 1, o_min: 0 },
                ),
                ConstraintFamily::poly(
                    "case 4: resource in both strategies of the max player",
                    shared - (o.clone() - one()) * enter(&x, &z) - enter(&xn, &zn),
                    Domain::Integers { k_min: 1, o_min: 1 },
                ),
            ]
        }
        SolutionConcept::FairSharingPos { n } => {
            let n = *n as u64;
            let zero = T::zero;
            let h_n = T::from_rational(&harmonic(n));
            vec![
                ConstraintFamily {
                    label: "fair sharing dual constraint".into(),
                    body: FamilyBody::Harmonic(HarmonicForm {
                        a: y.clone() - T::one(),
                        b: -y,
                        c: z.clone(),
                        d: -z,
                        e: gamma,
                    }),
                    domain: Domain::Box { k_max: n, o_max: n },
                    assumption: None,
                },
                ConstraintFamily {
                    label: "H_K >= p(K)".into(),
                    body: FamilyBody::Harmonic(HarmonicForm { a: -T::one(), b: zero(), c: T::one(), d: zero(), e: zero() }),
                    domain: Domain::Box { k_max: n.max(10), o_max: 0 },
                    assumption: None,
                },
                ConstraintFamily {
                    label: "H_n p(O) >= H_O".into(),
                    body: FamilyBody::Harmonic(HarmonicForm { a: zero(), b: zero(), c: zero(), d: -T::one(), e: h_n }),
                    domain: Domain::Box { k_max: 0, o_max: n },
                    assumption: None,
                },
            ]
        }
    };
    Ok(families)
}

/// A gallery entry: one certificate per upper-bound theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GalleryEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub uses_eps: bool,
    pub uses_n: bool,
}

pub const GALLERY: &[GalleryEntry] = &[
    GalleryEntry { id: "poa-un", summary: "ε-PoA, unweighted affine", uses_eps: true, uses_n: false },
    GalleryEntry { id: "poa-w", summary: "ε-PoA, weighted affine", uses_eps: true, uses_n: false },
    GalleryEntry { id: "pos-un", summary: "ε-PoS, unweighted affine", uses_eps: true, uses_n: false },
    GalleryEntry { id: "pos-w", summary: "ε-PoS, weighted affine", uses_eps: true, uses_n: false },
    GalleryEntry { id: "apx-un", summary: "one-round walk, unweighted affine", uses_eps: false, uses_n: false },
    GalleryEntry { id: "apx-w", summary: "one-round walk, weighted affine", uses_eps: false, uses_n: false },
    GalleryEntry { id: "pos-quadratic", summary: "PoS, quadratic latencies", uses_eps: false, uses_n: false },
    GalleryEntry { id: "pos-cubic", summary: "PoS, cubic latencies", uses_eps: false, uses_n: false },
    GalleryEntry { id: "apx-quadratic", summary: "one-round walk, quadratic latencies", uses_eps: false, uses_n: false },
    GalleryEntry { id: "apx-cubic", summary: "one-round walk, cubic latencies", uses_eps: false, uses_n: false },
    GalleryEntry { id: "max-sqrt-n", summary: "PoA for the max social function", uses_eps: false, uses_n: true },
    GalleryEntry { id: "fair-harmonic", summary: "PoS for fair cost sharing", uses_eps: false, uses_n: true },
];

/// `ψ(ε) = (1 + ε + sqrt(ε² + 6ε + 5)) / 2`.
pub fn psi(eps: &BigRational) -> Quad {
    let disc = eps * eps + int(6) * eps + int(5);
    Quad { a: (int(1) + eps) / int(2), b: rat(1, 2), d: disc }
}

/// `⌊ψ(ε)⌋`, computed exactly.
pub fn psi_floor(eps: &BigRational) -> i64 {
    floor_half_sum_sqrt(&(int(1) + eps), &(eps * eps + int(6) * eps + int(5)))
}

fn sqrt3() -> BigRational {
    int(3)
}

/// The certificate `id` at parameter `ε` (PoA/PoS entries) or `n`.
pub fn gallery_certificate(id: &str, eps: &BigRational, n: usize) -> Result<DualCertificate> {
    let e = Num::Exact(eps.clone());
    if eps.is_negative() {
        return Err(Error::ParameterOutOfRange(format!("ε must be non-negative, got {}", format_rational(eps))));
    }
    let pos_range = || -> Result<()> {
        if eps > &int(1) {
            return Err(Error::ParameterOutOfRange(format!(
                "ε-PoS certificates cover ε in [0, 1], got {}",
                format_rational(eps)
            )));
        }
        Ok(())
    };
    let need_n = || -> Result<()> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
        }
        Ok(())
    };
    let cert = match id {
        "poa-un" => {
            let z = int(psi_floor(eps));
            let den = int(2) * &z - eps;
            let y = (int(2) * &z + int(1)) / &den;
            let gamma = (int(1) + eps) * (&z * &z + int(3) * &z + int(1)) / &den;
            DualCertificate::new(SolutionConcept::EpsPoaUnweighted { eps: e, d: 1 }, Duals::uniform(Num::Exact(y)), Num::Exact(gamma))
        }
        "poa-w" => {
            let d = (int(1) + eps) * (int(5) + eps);
            let y = Quad { a: int(1), b: int(1) / (int(5) + eps), d: d.clone() };
            let p = psi(eps);
            let gamma = p.clone() * p;
            DualCertificate::new(SolutionConcept::EpsPoaWeighted { eps: e, d: 1 }, Duals::uniform(y.to_num()), gamma.to_num())
        }
        "pos-un" => {
            pos_range()?;
            let d = sqrt3();
            let q = |a: BigRational, b: BigRational| Quad { a, b, d: d.clone() };
            let den = q(eps.clone(), int(1));
            let y = q(int(2) * eps, int(1) + eps) / (den.clone() * Quad::rational(int(2), &d));
            let z = Quad::rational(int(1) - eps, &d) / den.clone();
            let gamma = q(int(1), int(1)) / den;
            DualCertificate::new(
                SolutionConcept::EpsPosViaPotential { eps: e, d: 1, potential: PotentialTag::EpsAffineUnweighted },
                Duals::pair(y.to_num(), z.to_num()),
                gamma.to_num(),
            )
        }
        "pos-w" => {
            pos_range()?;
            DualCertificate::new(
                SolutionConcept::EpsPosViaPotential { eps: e, d: 1, potential: PotentialTag::EpsAffineWeighted },
                Duals::pair(Num::int(0), Num::int(1)),
                Num::Exact(int(2) / (int(1) + eps)),
            )
        }
        "apx-un" => {
            let d = int(5);
            DualCertificate::new(
                SolutionConcept::OneRoundWalk { d: 1, weighted: false },
                Duals::uniform(Quad { a: int(1), b: int(1), d: d.clone() }.to_num()),
                Quad { a: int(2), b: int(1), d }.to_num(),
            )
        }
        "apx-w" => {
            let d = sqrt3();
            DualCertificate::new(
                SolutionConcept::OneRoundWalk { d: 1, weighted: true },
                Duals::uniform(Quad { a: int(2), b: rat(2, 3), d: d.clone() }.to_num()),
                Quad { a: int(4), b: int(2), d }.to_num(),
            )
        }
        "pos-quadratic" => DualCertificate::new(
            SolutionConcept::EpsPosViaPotential { eps: Num::int(0), d: 2, potential: PotentialTag::Quadratic },
            Duals::pair(Num::ratio(318, 1000), Num::ratio(454, 1000)),
            Num::ratio(2362, 1000),
        ),
        "pos-cubic" => DualCertificate::new(
            SolutionConcept::EpsPosViaPotential { eps: Num::int(0), d: 3, potential: PotentialTag::Cubic },
            Duals::pair(Num::ratio(1869, 2500), Num::ratio(829, 2500)),
            Num::ratio(3322, 1000),
        ),
        "apx-quadratic" => DualCertificate::new(
            SolutionConcept::OneRoundWalk { d: 2, weighted: false },
            Duals::uniform(Num::ratio(52944, 10000)),
            Num::ratio(375888, 10000),
        ),
        "apx-cubic" => DualCertificate::new(
            SolutionConcept::OneRoundWalk { d: 3, weighted: false },
            Duals::uniform(Num::ratio(369, 34)),
            Num::ratio(17929, 34),
        ),
        "max-sqrt-n" => {
            need_n()?;
            let d = int(n as i64);
            let inv = Quad { a: int(0), b: int(1) / &d, d: d.clone() };
            let z = inv.scale(&int(2));
            let z_n = Quad::sqrt(&d).scale(&int(2));
            let gamma = z.scale(&int(n as i64 - 1)) + z_n.clone();
            DualCertificate::new(
                SolutionConcept::MaxSocialPoa { n },
                Duals::Max {
                    x: inv.to_num(),
                    y: Num::int(0),
                    z: z.to_num(),
                    x_n: Num::int(1),
                    y_n: Num::int(-1),
                    z_n: z_n.to_num(),
                },
                gamma.to_num(),
            )
        }
        "fair-harmonic" => {
            need_n()?;
            DualCertificate::new(
                SolutionConcept::FairSharingPos { n },
                Duals::pair(Num::int(0), Num::int(1)),
                Num::Exact(harmonic(n as u64)),
            )
        }
        other => return Err(Error::Unknown { kind: "certificate", name: other.to_string() }),
    };
    Ok(cert)
}

/// Every gallery certificate at the given parameters, skipping entries whose
/// parameter range excludes them.
pub fn certificate_gallery(eps: &BigRational, n: usize) -> Vec<(&'static str, DualCertificate)> {
    GALLERY
        .iter()
        .filter_map(|entry| gallery_certificate(entry.id, eps, n).ok().map(|c| (entry.id, c)))
        .collect()
}

/// The originally published multipliers for the quadratic and cubic PoS bounds.
/// Both are infeasible for their own family; kept for comparison.
pub fn printed_certificate(id: &str) -> Option<DualCertificate> {
    let (d, potential, y, z, gamma) = match id {
        "pos-quadratic" => (2, PotentialTag::Quadratic, rat(318, 1000), rat(453, 1000), rat(2362, 1000)),
        "pos-cubic" => (3, PotentialTag::Cubic, rat(747, 1000), rat(331, 1000), rat(3322, 1000)),
        _ => return None,
    };
    Some(DualCertificate::new(
        SolutionConcept::EpsPosViaPotential { eps: Num::int(0), d, potential },
        Duals::pair(Num::Exact(y), Num::Exact(z)),
        Num::Exact(gamma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(set: FamilySet) -> Vec<ConstraintFamily<BigRational>> {
        match set {
            FamilySet::Exact(v) => v,
            FamilySet::Float(_) => panic!("expected exact families"),
        }
    }

    #[test]
    fn poa_un_at_zero_is_half_of_the_classic_family() {
        let cert = gallery_certificate("poa-un", &int(0), 0).unwrap();
        assert_eq!(cert.gamma, Num::ratio(5, 2));
        assert_eq!(cert.duals, Duals::uniform(Num::ratio(3, 2)));
        let fams = exact(dual_family(&cert).unwrap());
        let FamilyBody::Poly(g) = &fams[0].body else { panic!() };
        // 2 g = K² - 3 K O - 3 O + 5 O²
        assert_eq!(g.scale(&int(2)).to_string(), "K^2 - 3 K O + 5 O^2 - 3 O");
    }

    #[test]
    fn pos_un_at_one_collapses() {
        let cert = gallery_certificate("pos-un", &int(1), 0).unwrap();
        assert_eq!(cert.gamma, Num::int(1));
        assert_eq!(cert.duals, Duals::pair(Num::int(1), Num::int(0)));
        let fams = exact(dual_family(&cert).unwrap());
        let FamilyBody::Poly(g) = &fams[0].body else { panic!() };
        assert!(g.is_zero());
        assert!(gallery_certificate("pos-un", &int(2), 0).is_err());
    }

    #[test]
    fn pos_un_matches_its_closed_form_in_float() {
        let eps = rat(1, 2);
        let cert = gallery_certificate("pos-un", &eps, 0).unwrap();
        let s3 = 3f64.sqrt();
        assert!((cert.gamma.to_f64() - (1.0 + s3) / (0.5 + s3)).abs() < 1e-14);
        let Duals::Uniform { y, z: Some(z) } = &cert.duals else { panic!() };
        assert!((y.to_f64() - (1.0 + s3 * 1.5) / (2.0 * (0.5 + s3))).abs() < 1e-14);
        assert!((z.to_f64() - 0.5 / (0.5 + s3)).abs() < 1e-14);
    }

    #[test]
    fn poa_w_gamma_is_psi_squared() {
        let cert = gallery_certificate("poa-w", &int(0), 0).unwrap();
        assert!((cert.gamma.to_f64() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(!cert.is_exact());
        assert!(matches!(dual_family(&cert).unwrap(), FamilySet::Float(_)));
    }

    #[test]
    fn max_certificate_is_exact_for_squares() {
        let cert = gallery_certificate("max-sqrt-n", &int(0), 9).unwrap();
        assert!(cert.is_exact());
        assert_eq!(cert.gamma, Num::ratio(34, 3));
        assert_eq!(cert.dual_objective(), Some(Num::ratio(34, 3)));
        assert!(cert.sign_violations().is_empty());
        let fams = exact(dual_family(&cert).unwrap());
        assert_eq!(fams.len(), 4);
        assert_eq!(fams[3].domain, Domain::Integers { k_min: 1, o_min: 1 });
    }

    #[test]
    fn walk_prefix_sums() {
        let cert = gallery_certificate("apx-cubic", &int(0), 0).unwrap();
        let fams = exact(dual_family(&cert).unwrap());
        assert_eq!(fams[0].body.eval(4, 1), int(0));
        assert_eq!(fams[0].body.eval(5, 1), int(0));
        assert_eq!(fams[0].label, WORST_ORDER);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn json_round_trip_and_number_rules() {
        for (id, cert) in certificate_gallery(&rat(1, 4), 4) {
            let back = DualCertificate::from_json(&cert.to_json().to_string()).unwrap();
            if cert.is_exact() {
                assert_eq!(back, cert, "{id}");
            } else {
                assert!((back.gamma.to_f64() - cert.gamma.to_f64()).abs() < 1e-15, "{id}");
            }
        }
        assert_eq!(Num::from_json(&json!(0.318)).unwrap(), Num::ratio(318, 1000));
        assert_eq!(Num::from_json(&json!("369/34")).unwrap(), Num::ratio(369, 34));
        assert!(matches!(Num::from_json(&json!(3.23606797749979)).unwrap(), Num::Approx(_)));
    }

    #[test]
    fn shape_and_sign_checks() {
        let text = r#"{"concept":"eps-pos-potential","params":{"potential":"quadratic"},"duals":{"y":0.3},"gamma":3}"#;
        assert!(matches!(DualCertificate::from_json(text), Err(Error::CertificateMismatch(_))));
        let text = r#"{"concept":"eps-poa-unweighted","params":{"eps":0,"d":1},"duals":{"y":-1},"gamma":3}"#;
        let cert = DualCertificate::from_json(text).unwrap();
        assert_eq!(cert.sign_violations().len(), 1);
        let text = r#"{"concept":"warp","duals":{"y":1},"gamma":3}"#;
        assert!(matches!(DualCertificate::from_json(text), Err(Error::Unknown { .. })));
    }

    #[test]
    fn quad_division_rationalizes() {
        let d = int(3);
        let q = Quad { a: int(1), b: int(1), d: d.clone() } / Quad { a: int(1), b: int(1), d };
        assert_eq!(q.to_num(), Num::int(1));
    }

    #[test]
    fn division_folds_square_radicands() {
        let nine = int(9);
        let q = Quad { a: int(1), b: int(1), d: nine.clone() } / Quad { a: int(3), b: int(1), d: nine };
        assert_eq!(q.to_num(), Num::ratio(2, 3));
    }
}
