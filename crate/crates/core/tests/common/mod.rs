//! Random small games and the invariant checks shared by the property suite
//! and the acceptance runner.

#![allow(dead_code)]

use cgbounds::certificate::gallery_certificate;
use cgbounds::dynamics::{deviation_cost, is_eps_pne, potential, PotentialKind};
use cgbounds::game::player_cost;
use cgbounds::lp::solve_lp;
use cgbounds::metrics::{enumerate_profiles, exact_apx_one_round, exact_poa_pos, DEFAULT_PROFILE_CAP};
use cgbounds::primal::{build_walk_lp, strong_duality_check};
use cgbounds::scalar::{format_rational, harmonic, int, rat};
use cgbounds::{BigRational, Game, LatencySpec, Profile, Sharing, Social};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Q = BigRational;

pub const CASES: u32 = 1000;

/// Runs `test` on `cases` values drawn from `strategy` with a fixed seed.
pub fn run<S: Strategy>(
    seed: u64,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Plain description of a random game, kept so failures print readably.
#[derive(Clone, Debug)]
pub struct GameSpec {
    pub weights: Vec<Q>,
    pub strategies: Vec<Vec<Vec<usize>>>,
    /// Coefficients from the constant term up.
    pub latencies: Vec<Vec<i64>>,
    pub sharing: Sharing,
}

impl GameSpec {
    pub fn game(&self) -> Game<Q> {
        let lat = self
            .latencies
            .iter()
            .map(|c| LatencySpec::new(c.iter().map(|&v| int(v)).collect()).expect("latency"))
            .collect();
        Game::new(self.weights.clone(), self.strategies.clone(), lat, self.sharing).expect("valid game")
    }
}

fn subsets(m: usize) -> impl Strategy<Value = Vec<usize>> {
    (1usize..(1 << m)).prop_map(move |mask| (0..m).filter(|e| mask >> e & 1 == 1).collect())
}

fn player_sets(n: usize, m: usize, per_player: usize) -> impl Strategy<Value = Vec<Vec<Vec<usize>>>> {
    prop::collection::vec(prop::collection::vec(subsets(m), 1..=per_player), n)
}

/// Latency `coeffs[d] x^d + ...` with a positive leading coefficient.
fn polynomial(d: usize, monomial: bool) -> BoxedStrategy<Vec<i64>> {
    if monomial {
        (1i64..=4).prop_map(move |a| {
            let mut c = vec![0; d + 1];
            c[d] = a;
            c
        })
        .boxed()
    } else {
        (prop::collection::vec(0i64..=3, d), 1i64..=4)
            .prop_map(|(mut low, lead)| {
                low.push(lead);
                low
            })
            .boxed()
    }
}

/// Unweighted congestion games of degree `d` with `1..=max_n` players.
pub fn unweighted(d: usize, monomial: bool, max_n: usize, max_m: usize) -> impl Strategy<Value = GameSpec> {
    (1..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        (player_sets(n, m, 3), prop::collection::vec(polynomial(d, monomial), m)).prop_map(move |(strategies, latencies)| GameSpec {
            weights: vec![int(1); n],
            strategies,
            latencies,
            sharing: Sharing::Congestion,
        })
    })
}

/// Weighted games with linear latencies `a x` and weights `p/q`.
pub fn weighted_linear(max_n: usize, max_m: usize) -> impl Strategy<Value = GameSpec> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((1i64..=6, 1i64..=3).prop_map(|(p, q)| rat(p, q)), n),
            player_sets(n, m, 3),
            prop::collection::vec(polynomial(1, true), m),
        )
            .prop_map(|(weights, strategies, latencies)| GameSpec { weights, strategies, latencies, sharing: Sharing::Congestion })
    })
}

/// Fair cost-sharing games with `2..=max_n` players and integer costs.
pub fn fair(max_n: usize, max_m: usize) -> impl Strategy<Value = GameSpec> {
    (2..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (player_sets(n, m, 2), prop::collection::vec((1i64..=8).prop_map(|c| vec![c]), m)).prop_map(move |(strategies, latencies)| GameSpec {
            weights: vec![int(1); n],
            strategies,
            latencies,
            sharing: Sharing::FairCostSharing,
        })
    })
}

pub fn eps_grid() -> impl Strategy<Value = Q> {
    prop::sample::select(vec![int(0), rat(1, 4), rat(1, 2), int(1), int(2)])
}

fn profiles(g: &Game<Q>) -> Vec<Profile> {
    enumerate_profiles(g, DEFAULT_PROFILE_CAP).expect("small game").collect()
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

/// `Φ(S_{-i} ◇ t) - Φ(S) = c_i(S_{-i} ◇ t) - c_i(S)` for every profile and deviation.
pub fn potential_identity(gs: &GameSpec, kind: &PotentialKind) -> Result<(), TestCaseError> {
    let g = gs.game();
    for s in profiles(&g) {
        let base = potential(&g, &s, kind).expect("potential");
        for i in 0..g.players() {
            let own = player_cost(&g, &s, i).expect("cost");
            for t in 0..g.strategies(i).len() {
                let moved = potential(&g, &s.deviate(i, t), kind).expect("potential");
                let lhs = moved - base.clone();
                let rhs = deviation_cost(&g, &s, i, t) - own.clone();
                if lhs != rhs {
                    return fail(format!(
                        "profile {:?}, player {i} -> {t}: ΔΦ = {}, Δc = {}",
                        s.indices(),
                        format_rational(&lhs),
                        format_rational(&rhs)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Every local minimum of the weighted ε-potential is an ε-PNE.
pub fn local_min_is_eps_pne(gs: &GameSpec, eps: &Q) -> Result<(), TestCaseError> {
    let g = gs.game();
    let kind = PotentialKind::EpsAffineWeighted(eps.clone());
    for s in profiles(&g) {
        let phi = potential(&g, &s, &kind).expect("potential");
        let local_min = (0..g.players()).all(|i| {
            (0..g.strategies(i).len()).all(|t| potential(&g, &s.deviate(i, t), &kind).expect("potential") >= phi)
        });
        if local_min && !is_eps_pne(&g, &s, eps).expect("check").holds {
            return fail(format!("profile {:?} minimizes Φ locally but is not an ε-PNE", s.indices()));
        }
    }
    Ok(())
}

/// Exact PoA at ε stays below the unweighted certificate, and so does
/// `LP(K, O)` at the worst equilibrium and the optimum.
pub fn poa_weak_duality(gs: &GameSpec, eps: &Q) -> Result<(), TestCaseError> {
    let g = gs.game();
    let cert = gallery_certificate("poa-un", eps, g.players()).expect("certificate");
    let gamma = cert.gamma.as_rational().expect("rational γ").clone();
    let report = exact_poa_pos(&g, eps, Social::Sum, DEFAULT_PROFILE_CAP).expect("metrics");
    let poa = report.poa.clone().expect("equilibria exist");
    if poa > gamma {
        return fail(format!("PoA {} > γ {}", format_rational(&poa), format_rational(&gamma)));
    }
    let k = report.worst_equilibrium.as_ref().expect("worst").profile.clone();
    let o = report.optimum.profile.clone();
    match strong_duality_check(&g, &k, &o, &cert) {
        Ok(d) if !d.weak_duality => fail(format!("LP(K,O) = {:?} exceeds γ {}", d.primal, format_rational(&gamma))),
        Ok(_) | Err(cgbounds::Error::DegenerateOptimum) => Ok(()),
        Err(e) => fail(e.to_string()),
    }
}

/// `r <= 2 + sqrt 5`, decided exactly.
pub fn below_two_plus_sqrt5(r: &Q) -> bool {
    let shifted = r - int(2);
    !shifted.is_positive() || &shifted * &shifted <= int(5)
}

/// The worst one-round walk stays below `2 + sqrt 5`, and the walk LP at the
/// worst ordering does too.
pub fn apx_bound(gs: &GameSpec) -> Result<(), TestCaseError> {
    let g = gs.game();
    let report = exact_apx_one_round(&g, Social::Sum, DEFAULT_PROFILE_CAP, 8).expect("walks");
    let apx = report.apx.clone().expect("apx");
    if !below_two_plus_sqrt5(&apx) {
        return fail(format!("Apx {} > 2 + sqrt 5", format_rational(&apx)));
    }
    let cert = gallery_certificate("apx-un", &int(0), g.players()).expect("certificate");
    let ordering = report.apx_ordering.clone().expect("ordering");
    let k = report.apx_profile.clone().expect("profile");
    match build_walk_lp(&g, &k, &report.optimum.profile, &cert.concept, &ordering) {
        Ok(lp) => {
            if let Some(v) = solve_lp(&lp).value {
                if !below_two_plus_sqrt5(&v) {
                    return fail(format!("walk LP {} > 2 + sqrt 5", format_rational(&v)));
                }
            }
            Ok(())
        }
        Err(cgbounds::Error::DegenerateOptimum) => Ok(()),
        Err(e) => fail(e.to_string()),
    }
}

/// Exact PoS of a fair cost-sharing game is at most `H_n`.
pub fn fair_pos_bound(gs: &GameSpec) -> Result<(), TestCaseError> {
    let g = gs.game();
    let report = exact_poa_pos(&g, &int(0), Social::Sum, DEFAULT_PROFILE_CAP).expect("metrics");
    let pos = report.pos.clone().expect("fair games have equilibria");
    let h = harmonic(g.players() as u64);
    if pos > h {
        return fail(format!("PoS {} > H_n {}", format_rational(&pos), format_rational(&h)));
    }
    if pos.is_zero() {
        return fail("zero PoS".into());
    }
    Ok(())
}
