//! Numerical search for dual multipliers.
//!
//! Every searchable family is affine in `(y, z, γ)` for a fixed `(K, O)`, so
//! the search samples the families once per basis vector and then works on
//! dot products. Feasibility of a γ is decided by maximizing the worst
//! normalized sample over the free multipliers with nested golden-section
//! steps; γ itself is bisected. The float optimum is rounded to rationals and
//! handed to the exact verifier. A refuting witness is added to the samples
//! and the search is repeated.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value as Json};

use crate::certificate::{
    dual_family, DualCertificate, Duals, FamilyBody, FamilySet, Num, PotentialTag, SolutionConcept,
};
use crate::error::{Error, Result};
use crate::certificate::Domain;
use crate::verify::{verify_dual_certificate, Status, Verdict, VerifyOptions};

/// Ranges for the free multipliers and for γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBox {
    pub y: (f64, f64),
    pub z: (f64, f64),
    pub gamma: (f64, f64),
}

impl SearchBox {
    pub fn default_for(concept: &SolutionConcept) -> Self {
        match concept {
            SolutionConcept::OneRoundWalk { .. } => Self { y: (0.0, 40.0), z: (0.0, 0.0), gamma: (1.0, 2000.0) },
            _ => Self { y: (0.0, 10.0), z: (0.0, 10.0), gamma: (1.0, 200.0) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub bisection_steps: usize,
    pub golden_steps: usize,
    /// Exact verifications before giving up.
    pub verify_attempts: usize,
    pub verify_bound: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { bisection_steps: 48, golden_steps: 64, verify_attempts: 12, verify_bound: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub certificate: DualCertificate,
    pub verdict: Verdict,
    /// γ of the float optimum over the samples, a lower estimate.
    pub float_gamma: f64,
    /// Set when the budget ran out before a certificate was proven.
    pub unproven_below: bool,
    pub attempts: usize,
}

impl SearchOutcome {
    pub fn proven(&self) -> bool {
        self.verdict.status == Status::Proven
    }

    pub fn to_json(&self) -> Json {
        json!({
            "certificate": self.certificate.to_json(),
            "verdict": self.verdict.to_json(),
            "float_gamma": self.float_gamma,
            "unproven_below": self.unproven_below,
            "attempts": self.attempts,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Free {
    Y,
    Z,
    YZ,
}

fn free_vars(concept: &SolutionConcept) -> Result<Free> {
    match concept {
        SolutionConcept::EpsPoaUnweighted { .. }
        | SolutionConcept::EpsPoaWeighted { .. }
        | SolutionConcept::OneRoundWalk { .. } => Ok(Free::Y),
        SolutionConcept::EpsPosViaPotential { potential: PotentialTag::EpsAffineWeighted, .. } => Ok(Free::Z),
        SolutionConcept::EpsPosViaPotential { .. } => Ok(Free::YZ),
        other => Err(Error::ConceptMismatch(format!(
            "{} has per-player multipliers, search covers uniform ones only",
            other.name()
        ))),
    }
}

fn make_cert(concept: &SolutionConcept, free: Free, y: Num, z: Num, gamma: Num) -> DualCertificate {
    let duals = match free {
        Free::Y => Duals::uniform(y),
        Free::Z => Duals::pair(Num::int(0), z),
        Free::YZ => Duals::pair(y, z),
    };
    DualCertificate::new(concept.clone(), duals, gamma)
}

/// One sampled point: the family value is `c[0] + c[1] y + c[2] z + c[3] γ`,
/// already divided by the point's scale.
#[derive(Clone, Copy, Debug)]
struct Sample {
    c: [f64; 4],
}

struct Sampler {
    concept: SolutionConcept,
    free: Free,
    degree: i32,
    samples: Vec<Sample>,
}

const GRID: u64 = 40;
const RAY_RADII: [f64; 2] = [1e3, 1e8];
const RAY_STEPS: usize = 256;

impl Sampler {
    fn new(concept: &SolutionConcept) -> Result<Self> {
        concept.validate()?;
        let free = free_vars(concept)?;
        let mut s = Self { concept: concept.clone(), free, degree: concept.degree() as i32 + 1, samples: Vec::new() };
        let domains = s.families(0.0, 0.0, 0.0)?.into_iter().map(|(d, _)| d).collect::<Vec<_>>();
        let mut points = Vec::new();
        for domain in &domains {
            let (k_min, o_min) = match domain {
                Domain::Integers { k_min, o_min } => (*k_min, *o_min),
                _ => (0, 0),
            };
            for o in o_min..=GRID {
                for k in k_min..=GRID {
                    points.push((k as f64, o as f64));
                }
            }
            if *domain == Domain::Reals {
                for o in 0..=40 {
                    for k in 0..=40 {
                        points.push((k as f64 / 4.0, o as f64 / 4.0));
                    }
                }
            }
            for r in RAY_RADII {
                for i in 0..=RAY_STEPS {
                    let tau = i as f64 / RAY_STEPS as f64;
                    points.push((tau * r, (1.0 - tau) * r));
                }
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        points.dedup();
        for p in points {
            s.add_point(p.0, p.1)?;
        }
        Ok(s)
    }

    /// `(domain, evaluator)` for each family at the given multipliers.
    #[allow(clippy::type_complexity)]
    fn families(&self, y: f64, z: f64, gamma: f64) -> Result<Vec<(Domain, Box<dyn Fn(f64, f64) -> f64>)>> {
        let cert = make_cert(&self.concept, self.free, Num::Approx(y), Num::Approx(z), Num::Approx(gamma));
        let fams = match dual_family(&cert)? {
            FamilySet::Float(v) => v,
            FamilySet::Exact(_) => unreachable!("approximate multipliers give float families"),
        };
        Ok(fams
            .into_iter()
            .map(|f| {
                let eval: Box<dyn Fn(f64, f64) -> f64> = match f.body {
                    FamilyBody::Poly(p) => Box::new(move |k, o| p.eval(&k, &o)),
                    FamilyBody::Harmonic(h) => Box::new(move |k, o| h.eval(k as u64, o as u64)),
                };
                (f.domain, eval)
            })
            .collect())
    }

    fn add_point(&mut self, k: f64, o: f64) -> Result<()> {
        let basis = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)];
        let mut per_basis = Vec::with_capacity(4);
        for (y, z, g) in basis {
            per_basis.push(self.families(y, z, g)?);
        }
        let scale = (1.0 + k + o).powi(self.degree);
        for f in 0..per_basis[0].len() {
            let domain = per_basis[0][f].0;
            let inside = match domain {
                Domain::Integers { k_min, o_min } => k >= k_min as f64 && o >= o_min as f64,
                Domain::Reals => true,
                Domain::Box { k_max, o_max } => k <= k_max as f64 && o <= o_max as f64,
            };
            if !inside {
                continue;
            }
            let base = (per_basis[0][f].1)(k, o);
            let mut c = [base / scale, 0.0, 0.0, 0.0];
            for j in 1..4 {
                c[j] = ((per_basis[j][f].1)(k, o) - base) / scale;
            }
            if c.iter().any(|v| *v != 0.0) {
                self.samples.push(Sample { c });
            }
        }
        Ok(())
    }

    /// Adds a refuting point and, when it lies beyond the grid, a fan of
    /// nearby rays.
    fn add_witness(&mut self, k: f64, o: f64) -> Result<()> {
        self.add_point(k, o)?;
        if k + o > GRID as f64 {
            let tau = k / (k + o);
            for j in -64i32..=64 {
                let t = (tau + j as f64 / (64.0 * RAY_STEPS as f64)).clamp(0.0, 1.0);
                for r in [k + o, RAY_RADII[1]] {
                    self.add_point(t * r, (1.0 - t) * r)?;
                }
            }
        }
        Ok(())
    }

    fn margin(&self, y: f64, z: f64, gamma: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| s.c[0] + s.c[1] * y + s.c[2] * z + s.c[3] * gamma)
            .fold(f64::INFINITY, f64::min)
    }

    /// Best margin at `gamma` over the box, with the maximizing `(y, z)`.
    fn best(&self, gamma: f64, bx: &SearchBox, steps: usize) -> (f64, f64, f64) {
        match self.free {
            Free::Y => {
                let y = golden_max(|y| self.margin(y, 0.0, gamma), bx.y, steps);
                (self.margin(y, 0.0, gamma), y, 0.0)
            }
            Free::Z => {
                let z = golden_max(|z| self.margin(0.0, z, gamma), bx.z, steps);
                (self.margin(0.0, z, gamma), 0.0, z)
            }
            Free::YZ => {
                let inner = |z: f64| golden_max(|y| self.margin(y, z, gamma), bx.y, steps);
                let z = golden_max(|z| self.margin(inner(z), z, gamma), bx.z, steps);
                let y = inner(z);
                (self.margin(y, z, gamma), y, z)
            }
        }
    }
}

/// Maximizer of a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, (mut a, mut b): (f64, f64), steps: usize) -> f64 {
    if b <= a {
        return a;
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..steps {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / 2.0
}

const ROUND_DEN: i64 = 1_000_000_000;

fn round_rational(x: f64) -> BigRational {
    BigRational::new(((x * ROUND_DEN as f64).round() as i64).into(), ROUND_DEN.into())
}

fn round_up_rational(x: f64) -> BigRational {
    BigRational::new(((x * ROUND_DEN as f64).ceil() as i64).into(), ROUND_DEN.into())
}

/// Minimizes γ over the multipliers in `bx` and returns the best certificate
/// the exact verifier accepts within `budget`.
pub fn search_dual(concept: &SolutionConcept, bx: &SearchBox, budget: &SearchBudget) -> Result<SearchOutcome> {
    let mut sampler = Sampler::new(concept)?;
    let opts = VerifyOptions { bound: budget.verify_bound, ..VerifyOptions::default() };
    let mut last: Option<(DualCertificate, Verdict, f64)> = None;
    let mut bump = 0.0;
    for attempt in 1..=budget.verify_attempts {
        let (mut lo, mut hi) = bx.gamma;
        if sampler.best(hi, bx, budget.golden_steps).0 < 0.0 {
            return Err(Error::ParameterOutOfRange(format!(
                "no multipliers in the box reach γ = {hi}"
            )));
        }
        for _ in 0..budget.bisection_steps {
            let mid = (lo + hi) / 2.0;
            if sampler.best(mid, bx, budget.golden_steps).0 >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (_, y, z) = sampler.best(hi, bx, budget.golden_steps);
        let gamma = round_up_rational(hi + bump);
        let cert = make_cert(
            concept,
            sampler.free,
            Num::Exact(round_rational(y)),
            Num::Exact(round_rational(z)),
            Num::Exact(gamma),
        );
        let verdict = verify_dual_certificate(&cert, &opts)?;
        match verdict.status {
            Status::Proven => {
                return Ok(SearchOutcome { certificate: cert, verdict, float_gamma: hi, unproven_below: false, attempts: attempt })
            }
            Status::Refuted | Status::Unproven => {
                if let Some(w) = verdict.witness().filter(|w| w.k.is_finite() && w.o.is_finite()) {
                    sampler.add_witness(w.k, w.o)?;
                }
                bump = bump * 4.0 + 1e-9 * hi.max(1.0);
            }
        }
        last = Some((cert, verdict, hi));
    }
    let (certificate, verdict, float_gamma) = last.expect("at least one attempt");
    Ok(SearchOutcome { certificate, verdict, float_gamma, unproven_below: true, attempts: budget.verify_attempts })
}

/// `γ` of the outcome as a float.
pub fn outcome_gamma(out: &SearchOutcome) -> f64 {
    out.certificate.gamma.as_rational().and_then(|r| r.to_f64()).unwrap_or_else(|| out.certificate.gamma.to_f64())
}
