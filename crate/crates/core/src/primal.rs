//! `LP(K, O)`: the worst-case ratio a fixed pair of profiles can realize once
//! the latency coefficients are free, subject to the constraints of a
//! solution concept.

use serde_json::{json, Value as Json};

use crate::certificate::{DualCertificate, PotentialTag, SolutionConcept};
use crate::error::{Error, Result};
use crate::game::{congestion, usage_counts, Game, Profile, Sharing};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::report::number_json;
use crate::scalar::{harmonic, Scalar};

/// Builds `LP(K, O)` for `concept`. Walk concepts use the identity ordering.
pub fn build_primal_lp<T: Scalar>(
    g: &Game<T>,
    k: &Profile,
    o: &Profile,
    concept: &SolutionConcept,
) -> Result<LinearProgram<T>> {
    build_walk_lp(g, k, o, concept, &(0..g.players()).collect::<Vec<_>>())
}

/// Like [`build_primal_lp`], with the order in which players moved in the walk
/// that produced `K`.
pub fn build_walk_lp<T: Scalar>(
    g: &Game<T>,
    k: &Profile,
    o: &Profile,
    concept: &SolutionConcept,
    ordering: &[usize],
) -> Result<LinearProgram<T>> {
    concept.validate()?;
    let (k, o) = decided(g, k, o)?;
    check_compatible(g, concept)?;
    match concept {
        SolutionConcept::MaxSocialPoa { .. } => Ok(max_lp(g, &k, &o)),
        SolutionConcept::FairSharingPos { .. } => fair_lp(g, &k, &o),
        _ => congestion_lp(g, &k, &o, concept, ordering),
    }
}

fn decided<T: Scalar>(g: &Game<T>, k: &Profile, o: &Profile) -> Result<(Vec<usize>, Vec<usize>)> {
    g.check_profile(k)?;
    g.check_profile(o)?;
    let ks = match k.indices() {
        Some(v) => v,
        None => return Err(Error::UndecidedPlayer(k.choices.iter().position(Option::is_none).unwrap_or(0))),
    };
    if o.choices.iter().all(Option::is_none) {
        return Err(Error::DegenerateOptimum);
    }
    let os = match o.indices() {
        Some(v) => v,
        None => return Err(Error::UndecidedPlayer(o.choices.iter().position(Option::is_none).unwrap_or(0))),
    };
    Ok((ks, os))
}

fn check_compatible<T: Scalar>(g: &Game<T>, concept: &SolutionConcept) -> Result<()> {
    let mismatch = |msg: String| Err(Error::ConceptMismatch(msg));
    let fair = matches!(concept, SolutionConcept::FairSharingPos { .. });
    match (fair, g.sharing()) {
        (true, Sharing::Congestion) => return mismatch("fair-sharing concept on a congestion game".into()),
        (false, Sharing::FairCostSharing) => return mismatch(format!("{} on a fair cost-sharing game", concept.name())),
        _ => {}
    }
    if !concept.weighted() && !g.is_unweighted() {
        return mismatch(format!("{} needs unweighted players", concept.name()));
    }
    if let SolutionConcept::MaxSocialPoa { n } | SolutionConcept::FairSharingPos { n } = concept {
        if *n != g.players() {
            return mismatch(format!("concept is stated for n = {n}, game has {} players", g.players()));
        }
    }
    Ok(())
}

fn alpha_names(m: usize) -> Vec<String> {
    (1..=m).map(|e| format!("alpha_{e}")).collect()
}

fn loads_of<T: Scalar>(g: &Game<T>, choices: &[usize]) -> Vec<T> {
    congestion(g, &Profile::new(choices.to_vec()))
}

/// Adds the objective `Σ α_e K_e^{d+1}` and `Σ α_e O_e^{d+1} = 1`.
fn objective_and_norm<T: Scalar>(lp: &mut LinearProgram<T>, kl: &[T], ol: &[T], d: usize) -> Result<()> {
    let pow = |l: &T| l.powi(d as u32 + 1);
    lp.objective = kl.iter().map(pow).collect();
    let norm: Vec<T> = ol.iter().map(pow).collect();
    if norm.iter().all(Scalar::is_zero_tol) {
        return Err(Error::DegenerateOptimum);
    }
    lp.add("norm", norm, Relation::Eq, T::one());
    Ok(())
}

/// Per-resource coefficient of `α_e` in the potential at the given loads.
/// `sq` holds `Σ_{j on e} w_j²`, used by the weighted ε-potential only.
fn potential_coeffs<T: Scalar>(tag: PotentialTag, eps: &T, loads: &[T], sq: &[T]) -> Vec<T> {
    let one = T::one();
    let two = T::from_i64(2);
    let c = (one.clone() - eps.clone()) / (one.clone() + eps.clone());
    loads
        .iter()
        .zip(sq)
        .map(|(l, s)| match tag {
            PotentialTag::EpsAffineUnweighted => l.clone() * l.clone() + c.clone() * l.clone(),
            PotentialTag::EpsAffineWeighted => (l.clone() * l.clone() + c.clone() * s.clone()) / two.clone(),
            PotentialTag::Quadratic => {
                l.clone() * (l.clone() + one.clone()) * (two.clone() * l.clone() + one.clone()) / T::from_i64(6)
            }
            PotentialTag::Cubic => {
                let t = l.clone() * (l.clone() + one.clone());
                t.clone() * t / T::from_i64(4)
            }
        })
        .collect()
}

fn squared_weights<T: Scalar>(g: &Game<T>, choices: &[usize]) -> Vec<T> {
    let mut out = vec![T::zero(); g.resources()];
    for (i, &c) in choices.iter().enumerate() {
        let w = g.weight(i).clone();
        for &e in g.strategy(i, c) {
            out[e] = out[e].clone() + w.clone() * w.clone();
        }
    }
    out
}

fn congestion_lp<T: Scalar>(
    g: &Game<T>,
    k: &[usize],
    o: &[usize],
    concept: &SolutionConcept,
    ordering: &[usize],
) -> Result<LinearProgram<T>> {
    let m = g.resources();
    let d = concept.degree();
    let mut lp = LinearProgram::new(alpha_names(m), Sense::Maximize);
    let kl = loads_of(g, k);
    let ol = loads_of(g, o);
    objective_and_norm(&mut lp, &kl, &ol, d)?;
    let dp = |l: &T| l.powi(d as u32);
    match concept {
        SolutionConcept::EpsPoaUnweighted { eps, .. } | SolutionConcept::EpsPoaWeighted { eps, .. } => {
            let factor = T::one() + eps.to_scalar::<T>()?;
            for i in 0..g.players() {
                let (sk, so) = (g.strategy(i, k[i]), g.strategy(i, o[i]));
                let mut row = vec![T::zero(); m];
                for &e in sk {
                    row[e] = row[e].clone() + dp(&kl[e]);
                }
                for &e in so {
                    let load = if sk.contains(&e) { kl[e].clone() } else { kl[e].clone() + g.weight(i).clone() };
                    row[e] = row[e].clone() - factor.clone() * dp(&load);
                }
                lp.add(format!("eq_{}", i + 1), row, Relation::Le, T::zero());
            }
        }
        SolutionConcept::EpsPosViaPotential { eps, potential, .. } => {
            let eps = eps.to_scalar::<T>()?;
            let phi = |choices: &[usize]| {
                potential_coeffs(*potential, &eps, &loads_of(g, choices), &squared_weights(g, choices))
            };
            let phi_k = phi(k);
            let phi_o = phi(o);
            let row: Vec<T> = phi_k.iter().zip(&phi_o).map(|(a, b)| a.clone() - b.clone()).collect();
            lp.add("potential", row, Relation::Le, T::zero());
            let mut local = vec![T::zero(); m];
            for i in 0..g.players() {
                let mut dev = k.to_vec();
                dev[i] = o[i];
                for (e, v) in phi(&dev).into_iter().enumerate() {
                    local[e] = local[e].clone() + phi_k[e].clone() - v;
                }
            }
            lp.add("local_min", local, Relation::Le, T::zero());
        }
        SolutionConcept::OneRoundWalk { .. } => {
            crate::dynamics::check_permutation(ordering, g.players())?;
            let mut prefix = vec![T::zero(); m];
            for &i in ordering {
                let (sk, so) = (g.strategy(i, k[i]), g.strategy(i, o[i]));
                let w = g.weight(i).clone();
                let mut row = vec![T::zero(); m];
                for &e in sk {
                    row[e] = row[e].clone() + dp(&(prefix[e].clone() + w.clone()));
                }
                for &e in so {
                    row[e] = row[e].clone() - dp(&(prefix[e].clone() + w.clone()));
                }
                lp.add(format!("walk_{}", i + 1), row, Relation::Le, T::zero());
                for &e in sk {
                    prefix[e] = prefix[e].clone() + w.clone();
                }
            }
        }
        SolutionConcept::MaxSocialPoa { .. } | SolutionConcept::FairSharingPos { .. } => unreachable!("dispatched"),
    }
    Ok(lp)
}

/// The last player is taken to be the one with the highest cost in `K`.
fn max_lp<T: Scalar>(g: &Game<T>, k: &[usize], o: &[usize]) -> LinearProgram<T> {
    let m = g.resources();
    let n = g.players();
    let mut names = alpha_names(m);
    names.push("k".into());
    let mut lp = LinearProgram::new(names, Sense::Maximize);
    lp.objective[m] = T::one();
    let kl = loads_of(g, k);
    let ol = loads_of(g, o);
    let cost_row = |i: usize| {
        let mut row = vec![T::zero(); m + 1];
        for &e in g.strategy(i, k[i]) {
            row[e] = kl[e].clone();
        }
        row
    };
    for i in 0..n {
        let sk = g.strategy(i, k[i]);
        let mut row = cost_row(i);
        for &e in g.strategy(i, o[i]) {
            let load = if sk.contains(&e) { kl[e].clone() } else { kl[e].clone() + T::one() };
            row[e] = row[e].clone() - load;
        }
        lp.add(format!("eq_{}", i + 1), row, Relation::Le, T::zero());
    }
    for i in 0..n {
        let mut row = cost_row(i);
        row[m] = -T::one();
        let relation = if i + 1 == n { Relation::Eq } else { Relation::Le };
        lp.add(format!("cap_{}", i + 1), row, relation, T::zero());
    }
    for (i, &oi) in o.iter().enumerate() {
        let mut row = vec![T::zero(); m + 1];
        for &e in g.strategy(i, oi) {
            row[e] = ol[e].clone();
        }
        lp.add(format!("opt_{}", i + 1), row, Relation::Le, T::one());
    }
    lp
}

fn fair_lp<T: Scalar>(g: &Game<T>, k: &[usize], o: &[usize]) -> Result<LinearProgram<T>> {
    let m = g.resources();
    let names = (1..=m).map(|e| format!("c_{e}")).collect();
    let mut lp = LinearProgram::new(names, Sense::Maximize);
    let nk = usage_counts(g, &Profile::new(k.to_vec()));
    let no = usage_counts(g, &Profile::new(o.to_vec()));
    let used = |n: usize| if n > 0 { T::one() } else { T::zero() };
    lp.objective = nk.iter().map(|n| used(*n)).collect();
    let norm: Vec<T> = no.iter().map(|n| used(*n)).collect();
    if norm.iter().all(Scalar::is_zero_tol) {
        return Err(Error::DegenerateOptimum);
    }
    for i in 0..g.players() {
        let sk = g.strategy(i, k[i]);
        let mut row = vec![T::zero(); m];
        for &e in sk {
            row[e] = row[e].clone() + T::one() / T::from_i64(nk[e] as i64);
        }
        for &e in g.strategy(i, o[i]) {
            let share = if sk.contains(&e) { nk[e] } else { nk[e] + 1 };
            row[e] = row[e].clone() - T::one() / T::from_i64(share as i64);
        }
        lp.add(format!("eq_{}", i + 1), row, Relation::Le, T::zero());
    }
    let h = |n: usize| T::from_rational(&harmonic(n as u64));
    let row = nk.iter().zip(&no).map(|(a, b)| h(*a) - h(*b)).collect();
    lp.add("potential", row, Relation::Le, T::zero());
    lp.add("norm", norm, Relation::Eq, T::one());
    Ok(lp)
}

/// Outcome of comparing `LP(K, O)` with a certificate's γ.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport<T> {
    pub status: LpStatus,
    pub primal: Option<T>,
    pub gamma: f64,
    /// `primal <= γ` (up to tolerance when either side is a float).
    pub weak_duality: bool,
    /// `primal = γ`: the pair realizes the certified bound.
    pub tight: bool,
}

impl<T: Scalar> DualityReport<T> {
    pub fn to_json(&self) -> Json {
        json!({
            "lp_status": format!("{:?}", self.status).to_lowercase(),
            "primal": self.primal.as_ref().map(number_json),
            "gamma": self.gamma,
            "weak_duality": self.weak_duality,
            "tight": self.tight,
        })
    }
}

const DUALITY_TOL: f64 = 1e-6;

/// Solves `LP(K, O)` for the certificate's concept and compares with γ.
pub fn strong_duality_check<T: Scalar>(
    g: &Game<T>,
    k: &Profile,
    o: &Profile,
    cert: &DualCertificate,
) -> Result<DualityReport<T>> {
    let lp = build_primal_lp(g, k, o, &cert.concept)?;
    let sol = solve_lp(&lp);
    let gamma = cert.gamma.to_f64();
    let (weak, tight) = match (&sol.value, sol.status) {
        (Some(v), LpStatus::Optimal) => match (v.to_rational(), cert.gamma.as_rational()) {
            (Some(p), Some(gr)) => (&p <= gr, &p == gr),
            _ => {
                let p = v.to_f64();
                let tol = DUALITY_TOL * gamma.abs().max(1.0);
                (p <= gamma + tol, (p - gamma).abs() <= tol)
            }
        },
        (_, LpStatus::Infeasible) => (true, false),
        _ => (false, false),
    };
    Ok(DualityReport { status: sol.status, primal: sol.value, gamma, weak_duality: weak, tight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{gallery_certificate, Num};
    use crate::game::LatencySpec;
    use crate::scalar::{int, rat};
    use num_rational::BigRational;

    fn five_halves() -> (Game<BigRational>, Profile, Profile) {
        let lat = |a: i64| LatencySpec::monomial(int(a), 1).unwrap();
        let g = Game::unweighted(
            vec![vec![vec![0, 1], vec![2]], vec![vec![0], vec![1, 2]], vec![vec![1], vec![2]]],
            vec![lat(5), lat(2), lat(3)],
        )
        .unwrap();
        (g, Profile::new(vec![0, 1, 1]), Profile::new(vec![1, 0, 0]))
    }

    fn poa(eps: i64) -> SolutionConcept {
        SolutionConcept::EpsPoaUnweighted { eps: Num::int(eps), d: 1 }
    }

    #[test]
    fn five_halves_lp() {
        let (g, k, o) = five_halves();
        let lp = build_primal_lp(&g, &k, &o, &poa(0)).unwrap();
        assert_eq!(lp.len(), 3);
        assert_eq!(lp.rows_named("eq_").count(), 3);
        assert_eq!(lp.rows_named("norm").count(), 1);
        let sol = solve_lp(&lp);
        assert_eq!(sol.value, Some(rat(5, 2)));
        let cert = gallery_certificate("poa-un", &int(0), 0).unwrap();
        let report = strong_duality_check(&g, &k, &o, &cert).unwrap();
        assert!(report.weak_duality && report.tight);
    }

    #[test]
    fn equal_profiles_give_one() {
        let (g, k, _) = five_halves();
        for concept in [
            poa(0),
            SolutionConcept::OneRoundWalk { d: 1, weighted: false },
            SolutionConcept::EpsPosViaPotential { eps: Num::int(0), d: 1, potential: PotentialTag::EpsAffineUnweighted },
        ] {
            let sol = solve_lp(&build_primal_lp(&g, &k, &k, &concept).unwrap());
            assert_eq!(sol.value, Some(int(1)), "{concept:?}");
        }
    }

    #[test]
    fn fair_lp_at_equal_profiles() {
        let g = Game::new(
            vec![int(1), int(1)],
            vec![vec![vec![0], vec![1]], vec![vec![1], vec![2]]],
            vec![LatencySpec::constant(int(1)).unwrap(); 3],
            Sharing::FairCostSharing,
        )
        .unwrap();
        let p = Profile::new(vec![0, 1]);
        let concept = SolutionConcept::FairSharingPos { n: 2 };
        let sol = solve_lp(&build_primal_lp(&g, &p, &p, &concept).unwrap());
        assert_eq!(sol.value, Some(int(1)));
        assert!(matches!(build_primal_lp(&g, &p, &p, &poa(0)), Err(Error::ConceptMismatch(_))));
    }

    #[test]
    fn mismatches_and_degenerate_optimum() {
        let (g, k, _) = five_halves();
        assert!(matches!(
            build_primal_lp(&g, &k, &Profile::empty(3), &poa(0)),
            Err(Error::DegenerateOptimum)
        ));
        assert!(matches!(
            build_primal_lp(&g, &k, &k, &SolutionConcept::MaxSocialPoa { n: 4 }),
            Err(Error::ConceptMismatch(_))
        ));
        let weighted = Game::new(
            vec![int(1), int(2)],
            vec![vec![vec![0]], vec![vec![0]]],
            vec![LatencySpec::monomial(int(1), 1).unwrap()],
            Sharing::Congestion,
        )
        .unwrap();
        let p = Profile::new(vec![0, 0]);
        assert!(matches!(build_primal_lp(&weighted, &p, &p, &poa(0)), Err(Error::ConceptMismatch(_))));
        let concept = SolutionConcept::EpsPoaWeighted { eps: Num::int(0), d: 1 };
        assert!(build_primal_lp(&weighted, &p, &p, &concept).is_ok());
    }

    #[test]
    fn max_lp_is_bounded_by_the_certificate() {
        let (g, k, o) = five_halves();
        let lp = build_primal_lp(&g, &k, &o, &SolutionConcept::MaxSocialPoa { n: 3 }).unwrap();
        assert_eq!(lp.variables.last().map(String::as_str), Some("k"));
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        let bound = 4.0 * 3f64.sqrt();
        assert!(sol.value.unwrap().to_f64() <= bound);
    }

    #[test]
    fn text_export_lists_every_row() {
        let (g, k, o) = five_halves();
        let text = build_primal_lp(&g, &k, &o, &poa(0)).unwrap().to_text();
        assert!(text.starts_with("maximize:"));
        assert!(text.contains("norm: "));
        assert_eq!(text.lines().count(), 1 + 4 + 1);
    }
}
