//! Lower-bound instances and their self-checks.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value as Json};

use crate::certificate::Quad;
use crate::dynamics::is_eps_pne;
use crate::error::{Error, Result};
use crate::format::{AnyGame, GameDoc, LatencyDoc, SharingDoc, Sidecar, Value};
use crate::game::{congestion, social_sum, Game, Profile};
use crate::metrics::ratio;
use crate::scalar::{format_rational, harmonic, int, rat, Scalar};

/// A generated game with the pair of profiles it is built around.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub generator: String,
    pub doc: GameDoc,
    pub k: Profile,
    pub o: Profile,
    pub eps: Value,
    pub claimed_ratio: Value,
    pub notes: Vec<String>,
}

impl Instance {
    pub fn game<T: Scalar>(&self) -> Result<Game<T>> {
        self.doc.to_game()
    }

    pub fn any_game(&self) -> Result<AnyGame> {
        self.doc.to_any()
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            generator: self.generator.clone(),
            k: self.k.indices().expect("generated profiles are complete"),
            o: self.o.indices().expect("generated profiles are complete"),
            eps: self.eps.clone(),
            claimed_ratio: self.claimed_ratio.clone(),
            notes: self.notes.clone(),
        }
    }

    /// `SUM(K) / SUM(O)` in the given number mode.
    pub fn realized_ratio<T: Scalar>(&self) -> Result<T> {
        let g = self.game::<T>()?;
        ratio(&social_sum(&g, &self.k), &social_sum(&g, &self.o))
    }

    /// Runs the generator's own claims: `K` is an ε-equilibrium and the
    /// realized ratio equals the claimed one.
    pub fn self_check(&self) -> Result<InstanceCheck> {
        match self.any_game()? {
            AnyGame::Exact(g) => self.check_in(&g),
            AnyGame::Float(g) => self.check_in(&g),
        }
    }

    fn check_in<T: Scalar>(&self, g: &Game<T>) -> Result<InstanceCheck> {
        let eps: T = self.eps.to_scalar()?;
        let eq = is_eps_pne(g, &self.k, &eps)?;
        let realized: T = ratio(&social_sum(g, &self.k), &social_sum(g, &self.o))?;
        let claimed: T = self.claimed_ratio.to_scalar()?;
        let matches = if T::EXACT {
            realized == claimed
        } else {
            (realized.to_f64() - claimed.to_f64()).abs() <= 1e-9 * claimed.to_f64().abs().max(1.0)
        };
        Ok(InstanceCheck {
            equilibrium: eq.holds,
            realized_ratio: realized.to_f64(),
            claimed_ratio: self.claimed_ratio.to_f64(),
            ratio_matches: matches,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceCheck {
    pub equilibrium: bool,
    pub realized_ratio: f64,
    pub claimed_ratio: f64,
    pub ratio_matches: bool,
}

impl InstanceCheck {
    pub fn passed(&self) -> bool {
        self.equilibrium && self.ratio_matches
    }

    pub fn to_json(&self) -> Json {
        json!({
            "equilibrium": self.equilibrium,
            "realized_ratio": self.realized_ratio,
            "claimed_ratio": self.claimed_ratio,
            "ratio_matches": self.ratio_matches,
        })
    }
}

fn linear(alpha: Value) -> LatencyDoc {
    LatencyDoc { coeffs: vec![Value::int(0), alpha] }
}

fn monomial(alpha: Value, d: usize) -> LatencyDoc {
    let mut coeffs = vec![Value::int(0); d + 1];
    coeffs[d] = alpha;
    LatencyDoc { coeffs }
}

fn quad_value(q: &Quad) -> Value {
    let root = q.d.to_integer().to_u64().expect("integer radicand");
    Value::surd(q.a.clone(), q.b.clone(), root)
}

/// The three-player instance with price of anarchy 5/2, padded with players
/// stuck on a free resource when `n > 3`.
pub fn gen_poa_unweighted_affine(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::ParameterOutOfRange(format!("the instance needs n >= 3, got {n}")));
    }
    let mut strategies = vec![vec![vec![0, 1], vec![2]], vec![vec![0], vec![1, 2]], vec![vec![1], vec![2]]];
    let mut latencies = vec![linear(Value::int(5)), linear(Value::int(2)), linear(Value::int(3))];
    let mut k = vec![0, 1, 1];
    let mut o = vec![1, 0, 0];
    if n > 3 {
        latencies.push(linear(Value::int(0)));
        for _ in 3..n {
            strategies.push(vec![vec![3]]);
            k.push(0);
            o.push(0);
        }
    }
    Ok(Instance {
        generator: "poa-unweighted-affine".into(),
        doc: GameDoc { weights: vec![Value::int(1); n], strategies, latencies, sharing: SharingDoc::Congestion },
        k: Profile::new(k),
        o: Profile::new(o),
        eps: Value::int(0),
        claimed_ratio: Value::Rational(rat(5, 2)),
        notes: Vec::new(),
    })
}

/// Three weighted players with price of anarchy `(3 + sqrt 5)/2`.
pub fn gen_poa_weighted_affine() -> Instance {
    let phi = Value::surd(rat(1, 2), rat(1, 2), 5);
    Instance {
        generator: "poa-weighted-affine".into(),
        doc: GameDoc {
            weights: vec![Value::int(1), phi.clone(), phi],
            strategies: vec![vec![vec![0], vec![1, 2]], vec![vec![1], vec![0, 2]], vec![vec![2], vec![1]]],
            latencies: vec![
                linear(Value::int(2)),
                linear(Value::surd(int(-1), int(1), 5)),
                linear(Value::surd(int(3), int(-1), 5)),
            ],
            sharing: SharingDoc::Congestion,
        },
        k: Profile::new(vec![1, 1, 1]),
        o: Profile::new(vec![0, 0, 0]),
        eps: Value::int(0),
        claimed_ratio: Value::surd(rat(3, 2), rat(1, 2), 5),
        notes: Vec::new(),
    }
}

/// `ε(t, y) = ((t-1) s + 2y + t² - t - 2) / (s + t + 2)` with `s = sqrt(t² + 4y)`.
pub fn eps_ty(t: u64, y: u64) -> Quad {
    let (ti, yi) = (int(t as i64), int(y as i64));
    let disc = &ti * &ti + int(4) * &yi;
    let num = Quad { a: int(2) * &yi + &ti * &ti - &ti - int(2), b: &ti - int(1), d: disc.clone() };
    let den = Quad { a: &ti + int(2), b: int(1), d: disc };
    num / den
}

/// `ψ = (t + sqrt(t² + 4y)) / 2`, the positive root of `ψ² = tψ + y`.
pub fn psi_ty(t: u64, y: u64) -> Quad {
    let ti = int(t as i64);
    Quad { a: &ti / int(2), b: rat(1, 2), d: &ti * &ti + int(4 * y as i64) }
}

/// The weighted instance with `t + 2` players whose `K` is an `ε(t, y)`-PNE
/// and where every resource has `K_e = ψ O_e`.
pub fn gen_eps_poa_weighted(t: u64, y: u64) -> Result<Instance> {
    if t == 0 || y == 0 || y > t + 1 {
        return Err(Error::ParameterOutOfRange(format!("need t >= 1 and 1 <= y <= t + 1, got t = {t}, y = {y}")));
    }
    let n = (t + 1) as usize;
    let psi = psi_ty(t, y);
    let last = quad_value(&(psi.clone() - Quad::rational(int(t as i64), &psi.d)));
    let mut weights = vec![Value::int(1); n];
    weights.push(last);
    // resources 0..n are e_1..e_{t+1}, n..2n are e'_1..e'_{t+1}
    let circ = |i: usize, j: usize| (i + j) % n;
    let mut strategies = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut equilibrium: Vec<usize> = (1..=t as usize).map(|j| circ(i, j)).collect();
        equilibrium.extend((1..=y as usize).map(|j| n + circ(i, j)));
        equilibrium.sort_unstable();
        strategies.push(vec![vec![i], equilibrium]);
    }
    strategies.push(vec![(n..2 * n).collect(), (0..n).collect()]);
    let mut latencies = vec![linear(Value::int(1)); n];
    latencies.extend(std::iter::repeat_n(linear(Value::Rational(rat(1, y as i64))), n));
    Ok(Instance {
        generator: "eps-family".into(),
        doc: GameDoc { weights, strategies, latencies, sharing: SharingDoc::Congestion },
        k: Profile::new(vec![1; n + 1]),
        o: Profile::new(vec![0; n + 1]),
        eps: quad_value(&eps_ty(t, y)),
        claimed_ratio: quad_value(&(psi.clone() * psi)),
        notes: vec![format!("t = {t}, y = {y}")],
    })
}

/// Resources beyond which [`PosLowerBound::instance`] refuses to build the game.
pub const MAX_LB_RESOURCES: usize = 2_000;

/// The two-group PoS lower-bound construction for quadratic or cubic latencies.
#[derive(Clone, Debug, PartialEq)]
pub struct PosLowerBound {
    pub d: usize,
    pub n1: u64,
    pub n2: u64,
    pub pad: BigRational,
    pub r: BigRational,
    pub r_prime: BigRational,
}

impl PosLowerBound {
    pub fn new(d: usize, n1: u64, n2: u64, pad: BigRational) -> Result<Self> {
        if !(2..=3).contains(&d) || n1 == 0 || n2 == 0 || pad <= int(0) {
            return Err(Error::ParameterOutOfRange(format!(
                "need d in {{2, 3}}, n1, n2 >= 1 and a positive pad, got d = {d}, n1 = {n1}, n2 = {n2}, pad = {}",
                format_rational(&pad)
            )));
        }
        let (a, b) = (BigRational::from_integer(n1.into()), BigRational::from_integer(n2.into()));
        let (r, r_prime) = if d == 2 {
            let s = &a + int(2) * &b;
            ((int(2) * &b * &b + (&a + int(1)) * &s) / int(2) + &pad, s / int(6))
        } else {
            let s = &a * &a + int(3) * &a * &b + int(3) * &b * &b;
            ((int(2) * &b * &b * &b + (&a + int(1)) * &s) / int(2) + &pad, s / int(14))
        };
        let out = Self { d, n1, n2, pad, r, r_prime };
        let failing = out.uniqueness_failures();
        if !failing.is_empty() {
            return Err(Error::UniquenessViolated(failing));
        }
        Ok(out)
    }

    /// Cost of a group-one player on its equilibrium strategy when `k` group-one
    /// players, itself included, are on theirs.
    pub fn cost_k(&self, k: u64) -> BigRational {
        let (c, e) = if self.d == 2 { (4, 3) } else { (8, 7) };
        let load = BigRational::from_integer((self.n2 + k).into());
        int((c * self.n1 - e * k - 1) as i64) * &self.r_prime + load.pow(self.d as i32)
    }

    /// Cost of a group-one player on its optimum strategy when `k` others are
    /// on their equilibrium strategies.
    pub fn cost_o(&self, k: u64) -> BigRational {
        let e = if self.d == 2 { 3 } else { 7 };
        &self.r + int((self.n1 + e * k) as i64 - 1) * &self.r_prime
    }

    /// Every `k` in `1..=n1` with `cost_O(k-1) <= cost_K(k)`.
    pub fn uniqueness_failures(&self) -> Vec<usize> {
        (1..=self.n1).filter(|&k| self.cost_o(k - 1) <= self.cost_k(k)).map(|k| k as usize).collect()
    }

    pub fn ratio(&self) -> BigRational {
        let n1 = BigRational::from_integer(self.n1.into());
        let n2 = BigRational::from_integer(self.n2.into());
        let pairs = &n1 * (&n1 - int(1)) * &self.r_prime;
        let e = self.d as i32 + 1;
        (&pairs + (&n1 + &n2).pow(e)) / (&self.r * &n1 + &pairs + n2.pow(e))
    }

    /// The game itself, for sizes small enough to build.
    pub fn instance(&self) -> Result<Instance> {
        let n1 = self.n1 as usize;
        let n2 = self.n2 as usize;
        let m = n1 + n1 * (n1 - 1) + 1;
        if m > MAX_LB_RESOURCES {
            return Err(Error::CapExceeded { size: m as u128, cap: MAX_LB_RESOURCES as u128 });
        }
        // r_i at i, r'_{ij} at n1 + i (n1 - 1) + rank of j among j != i, r'' last
        let pair = |i: usize, j: usize| n1 + i * (n1 - 1) + if j < i { j } else { j - 1 };
        let shared = m - 1;
        let mut strategies = Vec::with_capacity(n1 + n2);
        for i in 0..n1 {
            let mut eq: Vec<usize> = (0..n1).filter(|&j| j != i).map(|j| pair(i, j)).collect();
            eq.push(shared);
            let mut opt: Vec<usize> = (0..n1).filter(|&j| j != i).map(|j| pair(j, i)).collect();
            opt.push(i);
            opt.sort_unstable();
            strategies.push(vec![eq, opt]);
        }
        for _ in 0..n2 {
            strategies.push(vec![vec![shared]]);
        }
        let mut latencies = vec![monomial(Value::Rational(self.r.clone()), self.d); n1];
        latencies.extend(std::iter::repeat_n(monomial(Value::Rational(self.r_prime.clone()), self.d), n1 * (n1 - 1)));
        latencies.push(monomial(Value::int(1), self.d));
        let mut k = vec![0; n1 + n2];
        let mut o = vec![1; n1];
        o.extend(vec![0; n2]);
        k.truncate(n1 + n2);
        Ok(Instance {
            generator: "pos-poly-lb".into(),
            doc: GameDoc { weights: vec![Value::int(1); n1 + n2], strategies, latencies, sharing: SharingDoc::Congestion },
            k: Profile::new(k),
            o: Profile::new(o),
            eps: Value::int(0),
            claimed_ratio: Value::Rational(self.ratio()),
            notes: vec![format!("d = {}, n1 = {n1}, n2 = {n2}, pad = {}", self.d, format_rational(&self.pad))],
        })
    }
}

/// Default pad added to `r`.
pub fn default_pad() -> BigRational {
    rat(1, 1000)
}

pub fn gen_pos_poly_lb(d: usize, n1: u64, n2: u64, pad: BigRational) -> Result<PosLowerBound> {
    PosLowerBound::new(d, n1, n2, pad)
}

/// Fair cost sharing: player `i` owns a private resource of cost `1/i`, and
/// all may share one resource of cost `1 + 1/100`. Everyone private is the
/// only equilibrium; everyone sharing is optimal for `n >= 2`.
pub fn gen_fair_sharing_chain(n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
    }
    let shared_cost = rat(101, 100);
    let mut latencies: Vec<LatencyDoc> =
        (1..=n).map(|i| LatencyDoc { coeffs: vec![Value::Rational(rat(1, i as i64))] }).collect();
    latencies.push(LatencyDoc { coeffs: vec![Value::Rational(shared_cost.clone())] });
    let strategies = (0..n).map(|i| vec![vec![i], vec![n]]).collect();
    let (o, claimed) = if n == 1 {
        (vec![0], int(1))
    } else {
        (vec![1; n], harmonic(n as u64) / shared_cost)
    };
    Ok(Instance {
        generator: "fair-chain".into(),
        doc: GameDoc { weights: vec![Value::int(1); n], strategies, latencies, sharing: SharingDoc::Fair },
        k: Profile::new(vec![0; n]),
        o: Profile::new(o),
        eps: Value::int(0),
        claimed_ratio: Value::Rational(claimed),
        notes: Vec::new(),
    })
}

/// Names accepted by [`generate`].
pub const GENERATORS: &[&str] = &["poa-unweighted-affine", "poa-weighted-affine", "eps-family", "pos-poly-lb", "fair-chain"];

/// Parameters for [`generate`]; each generator reads the ones it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n: Option<usize>,
    pub t: u64,
    pub y: u64,
    pub d: usize,
    pub n1: u64,
    pub n2: u64,
    pub pad: BigRational,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { n: None, t: 1, y: 1, d: 2, n1: 2, n2: 1, pad: default_pad() }
    }
}

pub fn generate(name: &str, p: &GenParams) -> Result<Instance> {
    match name {
        "poa-unweighted-affine" => gen_poa_unweighted_affine(p.n.unwrap_or(3)),
        "poa-weighted-affine" => Ok(gen_poa_weighted_affine()),
        "eps-family" => gen_eps_poa_weighted(p.t, p.y),
        "pos-poly-lb" => gen_pos_poly_lb(p.d, p.n1, p.n2, p.pad.clone())?.instance(),
        "fair-chain" => gen_fair_sharing_chain(p.n.unwrap_or(4)),
        other => Err(Error::Unknown { kind: "generator", name: other.to_string() }),
    }
}

/// `K_e / O_e` on every resource used in `O`, and whether `K_e = 0` wherever
/// `O_e = 0`.
pub fn load_ratios<T: Scalar>(g: &Game<T>, k: &Profile, o: &Profile) -> (Vec<f64>, bool) {
    let kl = congestion(g, k);
    let ol = congestion(g, o);
    let mut ratios = Vec::new();
    let mut clean = true;
    for (a, b) in kl.iter().zip(&ol) {
        if b.is_zero_tol() {
            clean &= a.is_zero_tol();
        } else {
            ratios.push(a.to_f64() / b.to_f64());
        }
    }
    (ratios, clean)
}
