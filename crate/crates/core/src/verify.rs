//! Deciding `g(K, O) >= 0` over a family's domain.
//!
//! Integer families are swept exhaustively over `[k_min, B] x [o_min, B]`.
//! The remaining region `K + O > B` is handled in polar form: writing
//! `r = K + O` and `τ = K / r`, `g = Σ_j r^j h_j(τ)`. The top part `h_D` is
//! shown non-negative on `[0, 1]`, then on each τ-interval the lower bounds
//! of the `h_j` are combined into a bound valid for every `r > B`.
//!
//! Real families have degree at most two and are decided by copositivity of
//! the quadratic part plus a scan of the KKT candidates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::certificate::{dual_family, ConstraintFamily, DualCertificate, Domain, FamilyBody, FamilySet, Num};
use crate::error::Result;
use crate::poly::{eval_univariate, interval_lower_bound, BiPoly};
use crate::scalar::{rat, Scalar};

pub const DEFAULT_SWEEP_BOUND: u64 = 2000;
const MAX_TIGHT: usize = 64;
const NEG_TOL: f64 = 1e-9;
const TIGHT_TOL: f64 = 1e-6;
const MAX_NODES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Proven,
    Refuted,
    Unproven,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Proven => "proven",
            Status::Refuted => "refuted",
            Status::Unproven => "unproven",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Side of the exhaustive integer sweep.
    pub bound: u64,
    /// Bisection depth for the tail proof.
    pub max_depth: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { bound: DEFAULT_SWEEP_BOUND, max_depth: 48 }
    }
}

/// A point where the family is negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub k: f64,
    pub o: f64,
    pub value: f64,
}

impl Witness {
    pub fn pair(&self) -> Option<(u64, u64)> {
        let whole = |v: f64| v >= 0.0 && v.fract() == 0.0 && v < 9e15;
        (whole(self.k) && whole(self.o)).then_some((self.k as u64, self.o as u64))
    }

    pub fn to_json(self) -> Json {
        match self.pair() {
            Some((k, o)) => json!([k, o]),
            None => json!([self.k, self.o]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyVerdict {
    pub label: String,
    pub body: String,
    pub domain: Domain,
    pub assumption: Option<String>,
    pub status: Status,
    /// Tight integer pairs found, capped at 64 in sweep order.
    pub tight: Vec<(u64, u64)>,
    pub tight_count: usize,
    /// Slopes `K/O` of directions along which the top part vanishes.
    pub tight_rays: Vec<f64>,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl FamilyVerdict {
    fn new<T: Scalar>(fam: &ConstraintFamily<T>) -> Self {
        Self {
            label: fam.label.clone(),
            body: fam.body.to_string(),
            domain: fam.domain,
            assumption: fam.assumption.clone(),
            status: Status::Proven,
            tight: Vec::new(),
            tight_count: 0,
            tight_rays: Vec::new(),
            witness: None,
            note: None,
        }
    }

    fn refute(&mut self, w: Witness) {
        self.status = Status::Refuted;
        self.witness = Some(w);
    }

    fn inconclusive(&mut self, note: String) {
        self.status = Status::Unproven;
        self.note = Some(note);
    }

    pub fn to_json(&self) -> Json {
        let domain = match self.domain {
            Domain::Integers { k_min, o_min } => json!({"integers": {"k_min": k_min, "o_min": o_min}}),
            Domain::Reals => json!("reals"),
            Domain::Box { k_max, o_max } => json!({"box": {"k_max": k_max, "o_max": o_max}}),
        };
        json!({
            "label": self.label,
            "family": self.body,
            "domain": domain,
            "assumption": self.assumption,
            "status": self.status.as_str(),
            "tight": self.tight.iter().map(|(k, o)| json!([k, o])).collect::<Vec<_>>(),
            "tight_count": self.tight_count,
            "tight_rays": self.tight_rays.iter().map(|s| ray_json(*s)).collect::<Vec<_>>(),
            "witness": self.witness.map(Witness::to_json),
            "note": self.note,
        })
    }
}

fn ray_json(slope: f64) -> Json {
    if slope.is_finite() {
        json!(slope)
    } else {
        json!("inf")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub gamma: Num,
    pub families: Vec<FamilyVerdict>,
    pub notes: Vec<String>,
}

impl Verdict {
    /// Union of tight pairs over all families, sorted.
    pub fn tight(&self) -> Vec<(u64, u64)> {
        let mut all: Vec<_> = self.families.iter().flat_map(|f| f.tight.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn tight_rays(&self) -> Vec<f64> {
        self.families.iter().flat_map(|f| f.tight_rays.iter().copied()).collect()
    }

    pub fn witness(&self) -> Option<Witness> {
        self.families.iter().find_map(|f| f.witness)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "status": self.status.as_str(),
            "gamma": self.gamma.to_json(),
            "tight": self.tight().iter().map(|(k, o)| json!([k, o])).collect::<Vec<_>>(),
            "tight_rays": self.tight_rays().iter().map(|s| ray_json(*s)).collect::<Vec<_>>(),
            "witness": self.witness().map(Witness::to_json),
            "families": self.families.iter().map(FamilyVerdict::to_json).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// Checks a dual certificate: sign constraints, the dual objective where it
/// is not γ itself, and every inequality family.
pub fn verify_dual_certificate(cert: &DualCertificate, opts: &VerifyOptions) -> Result<Verdict> {
    let families = dual_family(cert)?;
    let mut notes = cert.sign_violations();
    let mut refuted = !notes.is_empty();
    if let Some(objective) = cert.dual_objective() {
        let below = match (objective.as_rational(), cert.gamma.as_rational()) {
            (Some(obj), Some(g)) => g < obj,
            _ => cert.gamma.to_f64() < objective.to_f64() - NEG_TOL * objective.to_f64().abs().max(1.0),
        };
        if below {
            notes.push(format!("γ = {} is below the dual objective {}", cert.gamma, objective));
            refuted = true;
        }
    }
    let verdicts = match &families {
        FamilySet::Exact(v) => v.par_iter().map(|f| verify_family(f, opts)).collect::<Vec<_>>(),
        FamilySet::Float(v) => v.par_iter().map(|f| verify_family(f, opts)).collect::<Vec<_>>(),
    };
    let status = if refuted || verdicts.iter().any(|v| v.status == Status::Refuted) {
        Status::Refuted
    } else if verdicts.iter().any(|v| v.status == Status::Unproven) {
        Status::Unproven
    } else {
        Status::Proven
    };
    Ok(Verdict { status, gamma: cert.gamma.clone(), families: verdicts, notes })
}

/// Decides one family.
pub fn verify_family<T: Scalar>(fam: &ConstraintFamily<T>, opts: &VerifyOptions) -> FamilyVerdict {
    let mut out = FamilyVerdict::new(fam);
    match (&fam.body, fam.domain) {
        (body, Domain::Box { k_max, o_max }) => check_box(body, k_max, o_max, &mut out),
        (FamilyBody::Poly(g), Domain::Integers { k_min, o_min }) => {
            check_integer_family(g, k_min, o_min, opts, &mut out)
        }
        (FamilyBody::Poly(g), Domain::Reals) => check_real_family(g, &mut out),
        (FamilyBody::Harmonic(_), _) => {
            out.inconclusive("harmonic families are decided on bounded boxes only".into())
        }
    }
    out
}

fn float_tol<T: Scalar>(scale: f64) -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::from_rational(&BigRational::from_float(NEG_TOL * scale.max(1.0)).expect("finite"))
    }
}

fn check_box<T: Scalar>(body: &FamilyBody<T>, k_max: u64, o_max: u64, out: &mut FamilyVerdict) {
    let mut worst: Option<Witness> = None;
    for o in 0..=o_max {
        for k in 0..=k_max {
            let v = body.eval(k, o);
            let mag = match body {
                FamilyBody::Poly(p) => p.magnitude(k as f64, o as f64),
                FamilyBody::Harmonic(_) => 1.0 + (k + o) as f64,
            };
            let (neg, tight) = classify(&v, mag);
            if neg && worst.is_none_or(|w| v.to_f64() < w.value) {
                worst = Some(Witness { k: k as f64, o: o as f64, value: v.to_f64() });
            }
            if tight {
                out.tight_count += 1;
                if out.tight.len() < MAX_TIGHT {
                    out.tight.push((k, o));
                }
            }
        }
    }
    if let Some(w) = worst {
        out.refute(w);
    }
}

/// `(negative, tight)` for a value whose terms have total magnitude `mag`.
fn classify<T: Scalar>(v: &T, mag: f64) -> (bool, bool) {
    if T::EXACT {
        (*v < T::zero(), v.is_zero_tol())
    } else {
        let x = v.to_f64();
        let scale = mag.max(1.0);
        (x < -NEG_TOL * scale, x.abs() <= TIGHT_TOL * scale && x >= -NEG_TOL * scale)
    }
}

// ---------------------------------------------------------------------------
// integer sweep

#[derive(Clone, Debug, Default)]
struct RowScan {
    worst: Option<(u64, f64, Ordering)>,
    tight: Vec<u64>,
    tight_count: usize,
}

/// Sort key of a negative value: exact integers compare exactly.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
enum Ordering {
    Int(BigInt),
    Float(f64),
}

fn merge_worst(best: &mut Option<(u64, u64, f64, Ordering)>, k: u64, o: u64, value: f64, key: Ordering) {
    let better = match best {
        None => true,
        Some((bk, _, _, bkey)) => key < *bkey || (key == *bkey && k > *bk),
    };
    if better {
        *best = Some((k, o, value, key));
    }
}

/// Integer coefficients `L·c_ab` of an exact family, `L > 0`.
fn integer_coefficients(g: &BiPoly<BigRational>) -> (Vec<(usize, usize, BigInt)>, BigInt) {
    let lcm = g.terms().fold(BigInt::from(1), |acc, (_, _, c)| acc.lcm(c.denom()));
    let coeffs = g
        .terms()
        .map(|(a, b, c)| (a, b, (c * BigRational::from_integer(lcm.clone())).to_integer()))
        .collect();
    (coeffs, lcm)
}

fn row_exact(coeffs: &[(usize, usize, BigInt)], small: &[(usize, usize, i128)], lcm: &BigInt, o: u64, k_min: u64, bound: u64) -> RowScan {
    let mut scan = RowScan::default();
    let mut record = |k: u64, sign: std::cmp::Ordering, key: BigInt| match sign {
        std::cmp::Ordering::Less => {
            let value = BigRational::new(key.clone(), lcm.clone());
            let better = scan.worst.as_ref().is_none_or(|(bk, _, bkey)| {
                Ordering::Int(key.clone()) < *bkey || (Ordering::Int(key.clone()) == *bkey && k > *bk)
            });
            if better {
                scan.worst = Some((k, crate::scalar::rational_to_f64(&value), Ordering::Int(key)));
            }
        }
        std::cmp::Ordering::Equal => {
            scan.tight_count += 1;
            if scan.tight.len() < MAX_TIGHT {
                scan.tight.push(k);
            }
        }
        std::cmp::Ordering::Greater => {}
    };
    // coefficients of K^a for this O
    let row_small: Option<[i128; 5]> = (|| {
        let mut row = [0i128; 5];
        for &(a, b, c) in small {
            let ob = (o as i128).checked_pow(b as u32)?;
            row[a] = row[a].checked_add(c.checked_mul(ob)?)?;
        }
        Some(row)
    })();
    let eval_small = |row: &[i128; 5], k: u64| -> Option<i128> {
        let k = k as i128;
        row.iter().rev().try_fold(0i128, |acc, c| acc.checked_mul(k)?.checked_add(*c))
    };
    let big_row = || {
        let mut row = vec![BigInt::zero(); 5];
        for (a, b, c) in coeffs {
            row[*a] += c * BigInt::from(o).pow(*b as u32);
        }
        row
    };
    let eval_big = |row: &[BigInt], k: u64| -> BigInt {
        let k = BigInt::from(k);
        row.iter().rev().fold(BigInt::zero(), |acc, c| acc * &k + c)
    };
    let mut fallback: Option<Vec<BigInt>> = None;
    for k in k_min..=bound {
        let small_value = row_small.as_ref().and_then(|row| eval_small(row, k));
        match small_value {
            Some(v) => {
                if v <= 0 {
                    record(k, v.cmp(&0), BigInt::from(v));
                }
            }
            None => {
                let row = fallback.get_or_insert_with(big_row);
                let v = eval_big(row, k);
                if !v.is_positive() {
                    let sign = v.sign();
                    let ord = if sign == num_bigint::Sign::Minus { std::cmp::Ordering::Less } else { std::cmp::Ordering::Equal };
                    record(k, ord, v);
                }
            }
        }
    }
    scan
}

fn row_float(g: &BiPoly<f64>, o: u64, k_min: u64, bound: u64) -> RowScan {
    let mut scan = RowScan::default();
    let mut row = [0f64; 5];
    let mut mag_row = [0f64; 5];
    for (a, b, c) in g.terms() {
        let ob = (o as f64).powi(b as i32);
        row[a] += c * ob;
        mag_row[a] += f64::abs(*c) * ob;
    }
    for k in k_min..=bound {
        let kf = k as f64;
        let v = row.iter().rev().fold(0.0, |acc, c| acc * kf + c);
        let mag = mag_row.iter().rev().fold(0.0, |acc, c| acc * kf + c);
        let (neg, tight) = classify(&v, mag);
        if neg {
            let better = scan.worst.as_ref().is_none_or(|(bk, _, bkey)| {
                Ordering::Float(v) < *bkey || (Ordering::Float(v) == *bkey && k > *bk)
            });
            if better {
                scan.worst = Some((k, v, Ordering::Float(v)));
            }
        } else if tight {
            scan.tight_count += 1;
            if scan.tight.len() < MAX_TIGHT {
                scan.tight.push(k);
            }
        }
    }
    scan
}

fn sweep<T: Scalar>(g: &BiPoly<T>, k_min: u64, o_min: u64, bound: u64, out: &mut FamilyVerdict) {
    let rows: Vec<RowScan> = if T::EXACT {
        let exact = g.map(|c| c.to_rational().expect("exact mode"));
        let (coeffs, lcm) = integer_coefficients(&exact);
        let small: Vec<(usize, usize, i128)> =
            coeffs.iter().filter_map(|(a, b, c)| c.to_i128().map(|c| (*a, *b, c))).collect();
        let small = if small.len() == coeffs.len() { small } else { Vec::new() };
        let all_small = small.len() == coeffs.len();
        (o_min..=bound.max(o_min))
            .into_par_iter()
            .map(|o| {
                if all_small {
                    row_exact(&coeffs, &small, &lcm, o, k_min, bound)
                } else {
                    row_exact(&coeffs, &[(0, 0, i128::MAX)], &lcm, o, k_min, bound)
                }
            })
            .collect()
    } else {
        let float = g.map(|c| c.to_f64());
        (o_min..=bound.max(o_min)).into_par_iter().map(|o| row_float(&float, o, k_min, bound)).collect()
    };
    let mut worst: Option<(u64, u64, f64, Ordering)> = None;
    for (idx, row) in rows.into_iter().enumerate() {
        let o = o_min + idx as u64;
        if let Some((k, value, key)) = row.worst {
            merge_worst(&mut worst, k, o, value, key);
        }
        out.tight_count += row.tight_count;
        for k in row.tight {
            if out.tight.len() < MAX_TIGHT {
                out.tight.push((k, o));
            }
        }
    }
    out.tight.sort_unstable();
    if let Some((k, o, value, _)) = worst {
        out.refute(Witness { k: k as f64, o: o as f64, value });
    }
}

// ---------------------------------------------------------------------------
// univariate bounds on sub-intervals of [0, 1]

fn binom(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Coefficients of `p(at + s)` in `s`.
fn taylor<T: Scalar>(c: &[T], at: &T) -> Vec<T> {
    (0..c.len())
        .map(|m| {
            (m..c.len()).fold(T::zero(), |acc, k| acc + c[k].clone() * T::from_i64(binom(k, m)) * at.powi((k - m) as u32))
        })
        .collect()
}

/// Coefficients of `p(at - t)` in `t`.
fn taylor_left<T: Scalar>(c: &[T], at: &T) -> Vec<T> {
    taylor(c, at)
        .into_iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { v } else { -v })
        .collect()
}

/// `e_0 + Σ min(0, e_k w^k)`, a lower bound of `Σ e_k s^k` on `[0, w]`.
fn expansion_bound<T: Scalar>(e: &[T], w: &T) -> T {
    e.iter().enumerate().skip(1).fold(e[0].clone(), |acc, (k, c)| {
        let term = c.clone() * w.powi(k as u32);
        if term < T::zero() {
            acc + term
        } else {
            acc
        }
    })
}

/// Best of the three available lower bounds of `p` on `[lo, hi]`.
fn lower_bound<T: Scalar>(c: &[T], lo: &T, hi: &T) -> T {
    let w = hi.clone() - lo.clone();
    let candidates = [
        interval_lower_bound(c, lo, hi),
        expansion_bound(&taylor(c, lo), &w),
        expansion_bound(&taylor_left(c, hi), &w),
    ];
    candidates.into_iter().fold(None::<T>, |best, v| match best {
        Some(b) if b >= v => Some(b),
        _ => Some(v),
    })
    .expect("three candidates")
}

/// Whether `Σ e_k s^k >= -slack` on `[0, w]`, allowing a zero of any order at `s = 0`.
fn vanishing_nonneg<T: Scalar>(e: &[T], w: &T, slack: &T) -> bool {
    let Some(m) = e.iter().position(|c| c.abs() > *slack) else { return true };
    if e[m] < T::zero() {
        return false;
    }
    let small: T = e[..m].iter().fold(T::zero(), |acc, c| acc - c.abs() * T::one());
    let lead = e.iter().enumerate().skip(m + 1).fold(e[m].clone(), |acc, (k, c)| {
        let term = c.clone() * w.powi((k - m) as u32);
        if term < T::zero() {
            acc + term
        } else {
            acc
        }
    });
    lead >= T::zero() && small >= -(slack.clone() * T::from_i64(e.len() as i64))
}

fn nonneg_on<T: Scalar>(c: &[T], lo: &T, hi: &T, slack: &T) -> bool {
    if lower_bound(c, lo, hi) >= -slack.clone() {
        return true;
    }
    let w = hi.clone() - lo.clone();
    vanishing_nonneg(&taylor(c, lo), &w, slack) || vanishing_nonneg(&taylor_left(c, hi), &w, slack)
}

fn eval_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Minimizer of `p` on `[lo, hi]` by sampling and golden-section refinement.
fn argmin_f64(c: &[f64], lo: f64, hi: f64) -> f64 {
    let samples = 64;
    let step = (hi - lo) / samples as f64;
    let best = (0..=samples)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| eval_f64(c, *a).total_cmp(&eval_f64(c, *b)))
        .unwrap_or(lo);
    golden(|x| eval_f64(c, x), (best - step).max(lo), (best + step).min(hi))
}

pub(crate) fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if f1 <= f2 {
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

/// Small-denominator rationals near `x`, from its continued fraction.
fn convergents(x: f64, max_den: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a.saturating_mul(h1).saturating_add(h0), a.saturating_mul(k1).saturating_add(k0));
        if k2 > max_den || k2 <= 0 {
            break;
        }
        out.push(rat(h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    out
}

/// Split point for `[lo, hi]`: an exact rational zero of `p` inside the
/// interval when one is nearby, otherwise the midpoint.
fn split_point<T: Scalar>(c: &[T], lo: &T, hi: &T) -> T {
    let mid = (lo.clone() + hi.clone()) / T::from_i64(2);
    if T::EXACT {
        let cf: Vec<f64> = c.iter().map(Scalar::to_f64).collect();
        let x = argmin_f64(&cf, lo.to_f64(), hi.to_f64());
        for r in convergents(x, 1_000_000).into_iter().rev() {
            let t = T::from_rational(&r);
            if t > *lo && t < *hi && eval_univariate(c, &t).is_zero_tol() {
                return t;
            }
        }
    }
    mid
}

enum TailOutcome {
    Proven,
    /// The top part is negative near this τ.
    Negative(f64),
    Stuck(f64, f64),
}

/// Proves `h >= 0` on `[0, 1]`.
fn top_nonneg<T: Scalar>(h: &[T], slack: &T, max_depth: usize) -> TailOutcome {
    let mut stack = vec![(T::zero(), T::one(), 0usize)];
    let mut nodes = 0;
    while let Some((lo, hi, depth)) = stack.pop() {
        nodes += 1;
        if nonneg_on(h, &lo, &hi, slack) {
            continue;
        }
        let mid = split_point(h, &lo, &hi);
        for t in [&lo, &mid, &hi] {
            if eval_univariate(h, t) < -slack.clone() {
                return TailOutcome::Negative(t.to_f64());
            }
        }
        if depth >= max_depth || nodes > MAX_NODES {
            let hf: Vec<f64> = h.iter().map(Scalar::to_f64).collect();
            let x = argmin_f64(&hf, lo.to_f64(), hi.to_f64());
            if eval_f64(&hf, x) < -slack.to_f64() {
                return TailOutcome::Negative(x);
            }
            return TailOutcome::Stuck(lo.to_f64(), hi.to_f64());
        }
        stack.push((mid.clone(), hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    TailOutcome::Proven
}

/// Proves `Σ_j r^j h_j(τ) >= 0` for all `r > bound`, `τ ∈ [0, 1]`, given
/// `h_D >= 0` on `[0, 1]`. Returns the τ-intervals it could not certify.
fn tail_nonneg<T: Scalar>(h: &[Vec<T>], bound: u64, slack: &T, max_depth: usize) -> Vec<(f64, f64)> {
    let d = h.len() - 1;
    let b = T::from_i64(bound as i64);
    let mut stack = vec![(T::zero(), T::one(), 0usize)];
    let mut nodes = 0;
    let mut stuck = Vec::new();
    while let Some((lo, hi, depth)) = stack.pop() {
        nodes += 1;
        let lbs: Vec<T> = h.iter().map(|c| lower_bound(c, &lo, &hi)).collect();
        let top = if lbs[d] > T::zero() { lbs[d].clone() } else { T::zero() };
        let mut cond = top * b.clone() + lbs[d - 1].clone();
        for (j, lb) in lbs.iter().enumerate().take(d.saturating_sub(1)) {
            if *lb < T::zero() {
                cond = cond + lb.clone() / b.powi((d - 1 - j) as u32);
            }
        }
        if cond >= -slack.clone() {
            continue;
        }
        if depth >= max_depth || nodes > MAX_NODES {
            stuck.push((lo.to_f64(), hi.to_f64()));
            if stuck.len() >= MAX_TIGHT || nodes > MAX_NODES {
                break;
            }
            continue;
        }
        let mid = (lo.clone() + hi.clone()) / T::from_i64(2);
        stack.push((mid.clone(), hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    stuck
}

/// Looks for a negative value along direction `τ` beyond the sweep.
fn ray_witness<T: Scalar>(g: &BiPoly<T>, tau: f64, k_min: u64, o_min: u64, bound: u64) -> Option<Witness> {
    let mut r = (bound + 1) as f64;
    while r < 1e15 {
        let k = ((tau * r).round() as u64).max(k_min);
        let o = ((r as u64).saturating_sub(k)).max(o_min);
        let v = g.eval(&T::from_i64(k as i64), &T::from_i64(o as i64));
        let (neg, _) = classify(&v, g.magnitude(k as f64, o as f64));
        if neg {
            return Some(Witness { k: k as f64, o: o as f64, value: v.to_f64() });
        }
        r *= 2.0;
    }
    None
}

/// Newton steps on `h'` from a golden-section estimate, kept only while they
/// stay in `[lo, hi]` and do not increase `|h|`.
fn polish_minimum(h: &[f64], mut tau: f64, lo: f64, hi: f64) -> f64 {
    let d1: Vec<f64> = h.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let d2: Vec<f64> = d1.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let noise: f64 = h.iter().map(|c| f64::abs(*c)).sum();
    for _ in 0..20 {
        let curvature = eval_f64(&d2, tau);
        if curvature.abs() < 1e-300 {
            break;
        }
        let next = tau - eval_f64(&d1, tau) / curvature;
        if !(lo..=hi).contains(&next) || eval_f64(h, next).abs() > eval_f64(h, tau).abs() + 1e-14 * noise {
            break;
        }
        tau = next;
    }
    tau
}

/// Directions `K/O` along which `h` vanishes on `[0, 1]`.
fn zero_rays(h: &[f64]) -> Vec<f64> {
    let scale: f64 = h.iter().map(|c| f64::abs(*c)).sum::<f64>().max(1.0);
    let n = 4000;
    let vals: Vec<f64> = (0..=n).map(|i| eval_f64(h, i as f64 / n as f64)).collect();
    let mut out: Vec<f64> = Vec::new();
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n { f64::INFINITY } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right {
            let lo = (i as f64 - 1.0).max(0.0) / n as f64;
            let hi = (i as f64 + 1.0).min(n as f64) / n as f64;
            let tau = polish_minimum(h, golden(|x| eval_f64(h, x), lo, hi), lo, hi);
            if eval_f64(h, tau).abs() <= NEG_TOL * scale {
                let slope = if tau >= 1.0 - 1e-15 { f64::INFINITY } else { tau / (1.0 - tau) };
                if !out.iter().any(|s| (s - slope).abs() <= 1e-6 * slope.abs().max(1.0) || (s.is_infinite() && slope.is_infinite())) {
                    out.push(slope);
                }
            }
        }
    }
    out
}

fn check_integer_family<T: Scalar>(g: &BiPoly<T>, k_min: u64, o_min: u64, opts: &VerifyOptions, out: &mut FamilyVerdict) {
    let bound = opts.bound.max(k_min).max(o_min);
    sweep(g, k_min, o_min, bound, out);
    if out.status == Status::Refuted {
        return;
    }
    let d = g.degree();
    if g.is_zero() || d == 0 {
        return;
    }
    let h: Vec<Vec<T>> = (0..=d).map(|j| g.polar_part(j)).collect();
    let total: f64 = g.terms().map(|(_, _, c)| c.to_f64().abs()).sum();
    let slack: T = float_tol(total);
    match top_nonneg(&h[d], &slack, opts.max_depth) {
        TailOutcome::Proven => {}
        TailOutcome::Negative(tau) => {
            match ray_witness(g, tau, k_min, o_min, bound) {
                Some(w) => out.refute(w),
                None => out.inconclusive(format!("top-degree part is negative near K/(K+O) = {tau:.6}")),
            }
            return;
        }
        TailOutcome::Stuck(lo, hi) => {
            out.inconclusive(format!("could not certify the top-degree part on K/(K+O) in [{lo:.6}, {hi:.6}]"));
            return;
        }
    }
    out.tight_rays = zero_rays(&h[d].iter().map(Scalar::to_f64).collect::<Vec<_>>());
    let scale: f64 = h
        .iter()
        .enumerate()
        .map(|(j, c)| c.iter().map(|v| v.to_f64().abs()).sum::<f64>() * (bound as f64).powi(j as i32 - d as i32 + 1))
        .sum();
    let stuck = tail_nonneg(&h, bound, &float_tol::<T>(scale), opts.max_depth);
    let Some(&(lo, hi)) = stuck.first() else { return };
    let probes = stuck
        .iter()
        .map(|(a, b)| (a + b) / 2.0)
        .chain(out.tight_rays.iter().map(|s| if s.is_finite() { s / (1.0 + s) } else { 1.0 }));
    for tau in probes {
        if let Some(w) = ray_witness(g, tau, k_min, o_min, bound) {
            out.refute(w);
            return;
        }
    }
    out.inconclusive(format!("tail beyond K + O = {bound} not certified for K/(K+O) in [{lo:.6}, {hi:.6}]"));
}

// ---------------------------------------------------------------------------
// real domain

fn check_real_family<T: Scalar>(g: &BiPoly<T>, out: &mut FamilyVerdict) {
    if g.degree() > 2 {
        out.inconclusive(format!("real-domain families of degree {} are not handled", g.degree()));
        return;
    }
    let c = |a, b| g.coeff(a, b).clone();
    let two = T::from_i64(2);
    let (q11, q22, q12) = (c(2, 0), c(0, 2), c(1, 1) / two.clone());
    let (l1, l2, c0) = (c(1, 0), c(0, 1), c(0, 0));
    let scale: f64 = g.terms().map(|(_, _, v)| v.to_f64().abs()).sum::<f64>().max(1.0);
    let tol: T = float_tol(scale);
    let tol2: T = float_tol(scale * scale);
    let zero = T::zero();
    let neg = |v: &T| *v < -tol.clone();
    let witness_at = |k: T, o: T| Witness { k: k.to_f64(), o: o.to_f64(), value: g.eval(&k, &o).to_f64() };
    let push_to_negative = |dir: (T, T)| -> Witness {
        let mut t = T::one();
        for _ in 0..200 {
            let (k, o) = (dir.0.clone() * t.clone(), dir.1.clone() * t.clone());
            if neg(&g.eval(&k, &o)) {
                return witness_at(k, o);
            }
            t = t * two.clone();
        }
        witness_at(dir.0, dir.1)
    };

    // copositivity of the quadratic part
    if neg(&q11) {
        out.refute(push_to_negative((T::one(), zero.clone())));
        return;
    }
    if neg(&q22) {
        out.refute(push_to_negative((zero.clone(), T::one())));
        return;
    }
    let disc = q12.clone() * q12.clone() - q11.clone() * q22.clone();
    if neg(&q12) && disc > tol2 {
        // Q < 0 inside the quadrant, along (√q22, √q11) scaled into rationals
        let dir = (T::from_rational(&BigRational::from_float(q22.to_f64().sqrt()).expect("finite")),
                   T::from_rational(&BigRational::from_float(q11.to_f64().sqrt()).expect("finite")));
        out.refute(push_to_negative(dir));
        return;
    }

    // zero rays of Q: the linear part must not decrease along them
    let mut rays: Vec<(T, T)> = Vec::new();
    if q11.abs() <= tol {
        rays.push((T::one(), zero.clone()));
    }
    if q22.abs() <= tol {
        rays.push((zero.clone(), T::one()));
    }
    let singular = disc.abs() <= tol2;
    if q11 > tol && q12 < zero && singular {
        rays.push((-q12.clone() / q11.clone(), T::one()));
    }
    for (dk, dob) in &rays {
        let slope = l1.clone() * dk.clone() + l2.clone() * dob.clone();
        if neg(&slope) {
            out.refute(push_to_negative((dk.clone(), dob.clone())));
            return;
        }
        if slope.abs() <= tol {
            out.tight_rays.push(if dob.is_zero_tol() { f64::INFINITY } else { (dk.clone() / dob.clone()).to_f64() });
        }
    }

    // KKT candidates
    let mut candidates: Vec<(T, T)> = vec![(zero.clone(), zero.clone())];
    if q11 > tol {
        let k = -l1.clone() / (two.clone() * q11.clone());
        if k > zero {
            candidates.push((k, zero.clone()));
        }
    }
    if q22 > tol {
        let o = -l2.clone() / (two.clone() * q22.clone());
        if o > zero {
            candidates.push((zero.clone(), o));
        }
    }
    let det = q11.clone() * q22.clone() - q12.clone() * q12.clone();
    if !singular {
        let k = (q12.clone() * l2.clone() - q22.clone() * l1.clone()) / (two.clone() * det.clone());
        let o = (q12.clone() * l1.clone() - q11.clone() * l2.clone()) / (two.clone() * det);
        if k > zero && o > zero {
            candidates.push((k, o));
        }
    }
    let mut line_min: Option<T> = None;
    if q11 > tol && q12 < zero && singular {
        let s = -q12.clone() / q11.clone();
        let beta = l1.clone() * s + l2.clone();
        if beta.abs() <= tol {
            line_min = Some(c0.clone() - l1.clone() * l1.clone() / (T::from_i64(4) * q11.clone()));
        }
    }
    let mut worst: Option<Witness> = None;
    for (k, o) in candidates {
        let v = g.eval(&k, &o);
        if neg(&v) && worst.is_none_or(|w| v.to_f64() < w.value) {
            worst = Some(witness_at(k.clone(), o.clone()));
        }
        if v.abs() <= tol {
            let (kf, of) = (k.to_f64(), o.to_f64());
            if kf.fract() == 0.0 && of.fract() == 0.0 {
                out.tight.push((kf as u64, of as u64));
                out.tight_count += 1;
            }
        }
    }
    if let Some(w) = worst {
        out.refute(w);
        return;
    }
    if let Some(v) = line_min {
        if neg(&v) {
            out.inconclusive(format!("infimum {} approached along the zero ray of the quadratic part", v.to_f64()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{gallery_certificate, Duals, SolutionConcept};
    use crate::scalar::int;

    type P = BiPoly<BigRational>;

    fn opts(bound: u64) -> VerifyOptions {
        VerifyOptions { bound, ..Default::default() }
    }

    fn family(g: P, domain: Domain) -> ConstraintFamily<BigRational> {
        ConstraintFamily { label: "test".into(), body: FamilyBody::Poly(g), domain, assumption: None }
    }

    fn eq1(gamma: BigRational) -> P {
        P::k().pow(2) - (P::k() * P::o() + P::o()).scale(&int(3)) + P::o().pow(2).scale(&gamma)
    }

    #[test]
    fn eq1_is_proven_with_its_tight_pairs() {
        let v = verify_family(&family(eq1(int(5)), Domain::Integers { k_min: 0, o_min: 0 }), &opts(200));
        assert_eq!(v.status, Status::Proven, "{v:?}");
        assert_eq!(v.tight, vec![(0, 0), (1, 1), (2, 1)]);
    }

    #[test]
    fn lowered_gamma_is_refuted_at_two_one() {
        let v = verify_family(&family(eq1(rat(24, 5)), Domain::Integers { k_min: 0, o_min: 0 }), &opts(50));
        assert_eq!(v.status, Status::Refuted);
        assert_eq!(v.witness.unwrap().pair(), Some((2, 1)));
    }

    #[test]
    fn negative_top_form_is_refuted_beyond_the_sweep() {
        // K² - 3 K O + 2 O² + 1000 is positive for small K and O
        let g = P::k().pow(2) - (P::k() * P::o()).scale(&int(3)) + P::o().pow(2).scale(&int(2)) + P::constant(int(10000));
        let v = verify_family(&family(g.clone(), Domain::Integers { k_min: 0, o_min: 0 }), &opts(20));
        assert_eq!(v.status, Status::Refuted, "{v:?}");
        let (k, o) = v.witness.unwrap().pair().unwrap();
        assert!(g.eval(&int(k as i64), &int(o as i64)) < int(0));
    }

    #[test]
    fn double_root_of_the_top_form_is_certified_exactly() {
        // (K - 2 O)² + K: zero ray at slope 2 with a positive linear part
        let g = (P::k() - P::o().scale(&int(2))).pow(2) + P::k();
        let v = verify_family(&family(g, Domain::Integers { k_min: 0, o_min: 0 }), &opts(30));
        assert_eq!(v.status, Status::Proven, "{v:?}");
        assert_eq!(v.tight_rays.len(), 1);
        assert!((v.tight_rays[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn tail_failure_along_a_tight_ray_is_refuted() {
        // (K - 2 O)² - K + 100 stays positive up to r ≈ 100 only
        let g = (P::k() - P::o().scale(&int(2))).pow(2) - P::k() + P::constant(int(100));
        let v = verify_family(&family(g, Domain::Integers { k_min: 0, o_min: 0 }), &opts(30));
        assert_eq!(v.status, Status::Refuted, "{v:?}");
    }

    #[test]
    fn real_families() {
        // K² - 2 K O + O² is copositive with the zero ray K = O
        let g = (P::k() - P::o()).pow(2);
        let v = verify_family(&family(g, Domain::Reals), &opts(0));
        assert_eq!(v.status, Status::Proven);
        assert_eq!(v.tight_rays, vec![1.0]);
        // K² - 3 K O + O² is not
        let g = P::k().pow(2) - (P::k() * P::o()).scale(&int(3)) + P::o().pow(2);
        let v = verify_family(&family(g, Domain::Reals), &opts(0));
        assert_eq!(v.status, Status::Refuted);
        // (K - O)² - K decreases along the zero ray
        let g = (P::k() - P::o()).pow(2) - P::k();
        assert_eq!(verify_family(&family(g, Domain::Reals), &opts(0)).status, Status::Refuted);
        // K² - 2K + 1 has its minimum 0 at K = 1
        let g = (P::k() - P::constant(int(1))).pow(2) + P::o();
        let v = verify_family(&family(g, Domain::Reals), &opts(0));
        assert_eq!(v.status, Status::Proven);
        assert_eq!(v.tight, vec![(1, 0)]);
    }

    #[test]
    fn certificates_end_to_end() {
        let cert = gallery_certificate("apx-cubic", &int(0), 0).unwrap();
        let v = verify_dual_certificate(&cert, &opts(100)).unwrap();
        assert_eq!(v.status, Status::Proven);
        assert!(v.tight().contains(&(4, 1)));
        let cert = gallery_certificate("poa-w", &int(0), 0).unwrap();
        let v = verify_dual_certificate(&cert, &opts(100)).unwrap();
        assert_eq!(v.status, Status::Proven, "{:?}", v.families);
        let psi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(v.tight_rays().iter().any(|s| (s - psi).abs() < 1e-6), "{:?}", v.tight_rays());
    }

    #[test]
    fn sign_violation_refutes() {
        let cert = DualCertificate::new(
            SolutionConcept::EpsPoaUnweighted { eps: Num::int(0), d: 1 },
            Duals::uniform(Num::int(-1)),
            Num::int(100),
        );
        let v = verify_dual_certificate(&cert, &opts(10)).unwrap();
        assert_eq!(v.status, Status::Refuted);
        assert_eq!(v.notes.len(), 1);
    }

    #[test]
    fn verdict_json_shape() {
        let cert = gallery_certificate("poa-un", &int(0), 0).unwrap();
        let v = verify_dual_certificate(&cert, &opts(40)).unwrap();
        let j = v.to_json();
        assert_eq!(j["status"], "proven");
        assert_eq!(j["tight"], json!([[0, 0], [1, 1], [2, 1]]));
        assert!(j["witness"].is_null());
    }
}
