//! Unilateral deviations, ε-equilibria, best responses, one-round walks and
//! the potential functions used to locate good equilibria.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{congestion, cost_on, usage_counts, Game, Profile, Sharing};
use crate::scalar::Scalar;

/// Cost player `i` would pay after switching to strategy `t` in `s`.
/// An undecided `i` is treated as entering the game with `t`.
pub fn deviation_cost<T: Scalar>(g: &Game<T>, s: &Profile, i: usize, t: usize) -> T {
    let mut loads = congestion(g, s);
    let mut counts = usage_counts(g, s);
    if let Some(k) = s.choice(i) {
        for &e in g.strategy(i, k) {
            loads[e] = loads[e].clone() - g.weight(i).clone();
            counts[e] -= 1;
        }
    }
    for &e in g.strategy(i, t) {
        loads[e] = loads[e].clone() + g.weight(i).clone();
        counts[e] += 1;
    }
    cost_on(g, i, t, &loads, &counts)
}

/// Costs of every strategy of player `i` against the others' current choices.
pub fn response_costs<T: Scalar>(g: &Game<T>, s: &Profile, i: usize) -> Vec<T> {
    (0..g.strategies(i).len()).map(|t| deviation_cost(g, s, i, t)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub player: usize,
    pub strategy: usize,
    /// `c_i(S) / c_i(S_{-i} ◇ t)`; infinite when the deviation is free.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsPneCheck {
    pub holds: bool,
    /// Deviation with the largest violation ratio when `holds` is false.
    pub witness: Option<Deviation>,
}

/// Checks `c_i(S) <= (1+eps) c_i(S_{-i} ◇ t)` for every player and strategy.
pub fn is_eps_pne<T: Scalar>(g: &Game<T>, s: &Profile, eps: &T) -> Result<EpsPneCheck> {
    g.check_profile(s)?;
    let factor = T::one() + eps.clone();
    let loads = congestion(g, s);
    let counts = usage_counts(g, s);
    let mut worst: Option<Deviation> = None;
    for i in 0..g.players() {
        let k = s.choice(i).ok_or(Error::UndecidedPlayer(i))?;
        let current = cost_on(g, i, k, &loads, &counts);
        for t in 0..g.strategies(i).len() {
            if t == k {
                continue;
            }
            let alternative = deviation_cost(g, s, i, t);
            if current.le_tol(&(factor.clone() * alternative.clone())) {
                continue;
            }
            let ratio = if alternative.is_zero_tol() {
                f64::INFINITY
            } else {
                current.to_f64() / alternative.to_f64()
            };
            if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
                worst = Some(Deviation { player: i, strategy: t, ratio });
            }
        }
    }
    Ok(EpsPneCheck { holds: worst.is_none(), witness: worst })
}

/// How to pick among equally good responses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

/// All strategies of `i` minimizing its cost against the others' choices
/// (ties resolved with the number mode's tolerance), in index order.
pub fn best_responses<T: Scalar>(g: &Game<T>, s: &Profile, i: usize) -> (Vec<usize>, T) {
    let costs = response_costs(g, s, i);
    let mut best = costs[0].clone();
    for c in &costs[1..] {
        if c.lt_tol(&best) {
            best = c.clone();
        }
    }
    let tied = (0..costs.len()).filter(|&t| costs[t].le_tol(&best)).collect();
    (tied, best)
}

pub fn best_response<T: Scalar>(g: &Game<T>, s: &Profile, i: usize, tie: TieBreak) -> usize {
    let (tied, _) = best_responses(g, s, i);
    match tie {
        TieBreak::LowestIndex => tied[0],
        TieBreak::HighestIndex => tied[tied.len() - 1],
    }
}

/// Partial profile of a walk together with its prefix loads `K_e(i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState<T> {
    pub profile: Profile,
    pub prefix_loads: Vec<T>,
    pub ordering: Vec<usize>,
    pub step: usize,
}

impl<T: Scalar> WalkState<T> {
    pub fn start(g: &Game<T>, ordering: Vec<usize>) -> Result<Self> {
        check_permutation(&ordering, g.players())?;
        Ok(Self {
            profile: Profile::empty(g.players()),
            prefix_loads: vec![T::zero(); g.resources()],
            ordering,
            step: 0,
        })
    }

    pub fn next_player(&self) -> Option<usize> {
        self.ordering.get(self.step).copied()
    }

    pub fn is_done(&self) -> bool {
        self.step == self.ordering.len()
    }

    /// Commits strategy `t` for the next player in the ordering.
    pub fn advance(&mut self, g: &Game<T>, t: usize) -> usize {
        let i = self.ordering[self.step];
        for &e in g.strategy(i, t) {
            self.prefix_loads[e] = self.prefix_loads[e].clone() + g.weight(i).clone();
        }
        self.profile.choices[i] = Some(t);
        self.step += 1;
        i
    }
}

pub(crate) fn check_permutation(ordering: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if ordering.len() != n
        || ordering.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
    {
        return Err(Error::InvalidProfile(format!(
            "ordering {ordering:?} is not a permutation of 0..{n}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkStep<T> {
    pub player: usize,
    pub strategy: usize,
    pub cost: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkTrace<T> {
    pub steps: Vec<WalkStep<T>>,
    pub profile: Profile,
}

impl<T: Scalar> WalkTrace<T> {
    pub fn ordering(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.player).collect()
    }

    /// `[{"player":..,"strategy":..,"cost":..}, ...]`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "player": s.player,
                        "strategy": s.strategy,
                        "cost": crate::report::number_json(&s.cost),
                    })
                })
                .collect(),
        )
    }
}

/// Sequential best responses from the empty profile in the given order.
pub fn one_round_walk<T: Scalar>(
    g: &Game<T>,
    ordering: &[usize],
    tie: TieBreak,
) -> Result<WalkTrace<T>> {
    let mut state = WalkState::start(g, ordering.to_vec())?;
    let mut steps = Vec::with_capacity(g.players());
    while let Some(i) = state.next_player() {
        let (tied, cost) = best_responses(g, &state.profile, i);
        let t = match tie {
            TieBreak::LowestIndex => tied[0],
            TieBreak::HighestIndex => tied[tied.len() - 1],
        };
        state.advance(g, t);
        steps.push(WalkStep { player: i, strategy: t, cost });
    }
    Ok(WalkTrace { steps, profile: state.profile })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsOutcome {
    pub profile: Profile,
    pub steps: usize,
}

/// Lets the lowest-index player with an improving deviation switch to a best
/// response until nobody can improve.
pub fn best_response_dynamics<T: Scalar>(
    g: &Game<T>,
    start: &Profile,
    max_steps: usize,
) -> Result<DynamicsOutcome> {
    g.check_profile(start)?;
    if !start.is_complete() {
        return Err(Error::InvalidProfile("dynamics need a complete profile".into()));
    }
    let mut s = start.clone();
    for step in 0..=max_steps {
        let mover = (0..g.players()).find_map(|i| {
            let current = s.choice(i).expect("complete");
            let costs = response_costs(g, &s, i);
            let (t, best) = costs
                .iter()
                .enumerate()
                .fold((current, costs[current].clone()), |(bt, bc), (t, c)| {
                    if c.lt_tol(&bc) {
                        (t, c.clone())
                    } else {
                        (bt, bc)
                    }
                });
            (best.lt_tol(&costs[current])).then_some((i, t))
        });
        match mover {
            None => return Ok(DynamicsOutcome { profile: s, steps: step }),
            Some(_) if step == max_steps => break,
            Some((i, t)) => s = s.deviate(i, t),
        }
    }
    Err(Error::NonConvergence(max_steps))
}

/// Potential functions.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// Rosenthal's `sum_e sum_{k=1}^{L_e} l_e(k)` (unweighted; `d` is informational).
    RosenthalExact(usize),
    /// `sum_e a_e (L^2 + (1-ε)/(1+ε) L) + 2 b_e/(1+ε) L` (unweighted, affine).
    EpsAffineUnweighted(BigRational),
    /// `1/2 sum_e a_e L^2 + 1/2 (1-ε)/(1+ε) sum_e sum_{i on e} a_e w_i^2` (linear).
    EpsAffineWeighted(BigRational),
    /// `sum_e a_e L(L+1)(2L+1)/6` for `a_e x^2`.
    QuadraticExact,
    /// `sum_e a_e (L(L+1))^2/4` for `a_e x^3`.
    CubicExact,
}

impl PotentialKind {
    /// The ε at which minimizers of this potential are guaranteed equilibria.
    pub fn eps(&self) -> BigRational {
        match self {
            PotentialKind::EpsAffineUnweighted(e) | PotentialKind::EpsAffineWeighted(e) => e.clone(),
            _ => crate::scalar::int(0),
        }
    }
}

fn integer_load<T: Scalar>(load: &T) -> usize {
    load.to_f64().round() as usize
}

pub fn potential<T: Scalar>(g: &Game<T>, s: &Profile, kind: &PotentialKind) -> Result<T> {
    g.check_profile(s)?;
    if g.sharing() != Sharing::Congestion {
        return Err(Error::IncompatiblePotential("potentials need congestion mode".into()));
    }
    let incompatible = |why: &str| Err(Error::IncompatiblePotential(why.into()));
    let loads = congestion(g, s);
    let needs_unweighted = !matches!(kind, PotentialKind::EpsAffineWeighted(_));
    if needs_unweighted && !g.is_unweighted() {
        return incompatible("this potential is defined for unweighted players");
    }
    let mut total = T::zero();
    match kind {
        PotentialKind::RosenthalExact(_) => {
            for (e, l) in loads.iter().enumerate() {
                for k in 1..=integer_load(l) {
                    total = total + g.latency(e).eval(&T::from_i64(k as i64));
                }
            }
        }
        PotentialKind::EpsAffineUnweighted(eps) => {
            if g.degree() > 1 {
                return incompatible("ε-potential needs affine latencies");
            }
            let eps = T::from_rational(eps);
            let one = T::one();
            let c = (one.clone() - eps.clone()) / (one.clone() + eps.clone());
            let two = T::from_i64(2);
            for (e, l) in loads.iter().enumerate() {
                let lat = g.latency(e);
                total = total
                    + lat.coeff(1) * (l.clone() * l.clone() + c.clone() * l.clone())
                    + two.clone() * lat.coeff(0) / (one.clone() + eps.clone()) * l.clone();
            }
        }
        PotentialKind::EpsAffineWeighted(eps) => {
            if g.latencies().iter().any(|l| !l.is_monomial_of(1)) {
                return incompatible("weighted ε-potential needs linear latencies a x");
            }
            let eps = T::from_rational(eps);
            let one = T::one();
            let c = (one.clone() - eps.clone()) / (one + eps);
            let half = T::from_ratio(1, 2);
            let mut squares = vec![T::zero(); g.resources()];
            for (i, k) in s.choices.iter().enumerate() {
                if let Some(k) = k {
                    for &e in g.strategy(i, *k) {
                        squares[e] = squares[e].clone() + g.weight(i).clone() * g.weight(i).clone();
                    }
                }
            }
            for (e, l) in loads.iter().enumerate() {
                let a = g.latency(e).coeff(1);
                total = total
                    + half.clone() * a.clone() * l.clone() * l.clone()
                    + half.clone() * c.clone() * a * squares[e].clone();
            }
        }
        PotentialKind::QuadraticExact | PotentialKind::CubicExact => {
            let d = if *kind == PotentialKind::QuadraticExact { 2 } else { 3 };
            if g.latencies().iter().any(|l| !l.is_monomial_of(d)) {
                return incompatible("closed-form potential needs monomial latencies a x^d");
            }
            for (e, l) in loads.iter().enumerate() {
                let a = g.latency(e).coeff(d);
                let one = T::one();
                let term = if d == 2 {
                    l.clone() * (l.clone() + one.clone()) * (T::from_i64(2) * l.clone() + one)
                        / T::from_i64(6)
                } else {
                    let p = l.clone() * (l.clone() + one);
                    p.clone() * p / T::from_i64(4)
                };
                total = total + a * term;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{player_cost, LatencySpec};
    use crate::scalar::{int, rat};

    fn lin(a: i64) -> LatencySpec<BigRational> {
        LatencySpec::monomial(int(a), 1).unwrap()
    }

    fn five_halves() -> Game<BigRational> {
        Game::unweighted(
            vec![
                vec![vec![0, 1], vec![2]],
                vec![vec![0], vec![1, 2]],
                vec![vec![1], vec![2]],
            ],
            vec![lin(5), lin(2), lin(3)],
        )
        .unwrap()
    }

    #[test]
    fn five_halves_equilibrium_deviations_are_cost_equal() {
        let g = five_halves();
        let k = Profile::new(vec![0, 1, 1]);
        let expected = [(9, 9), (10, 10), (6, 6)];
        for (i, (stay, go)) in expected.iter().enumerate() {
            assert_eq!(player_cost(&g, &k, i).unwrap(), int(*stay));
            let other = 1 - k.choice(i).unwrap();
            assert_eq!(deviation_cost(&g, &k, i, other), int(*go));
        }
        assert!(is_eps_pne(&g, &k, &int(0)).unwrap().holds);
    }

    #[test]
    fn five_halves_optimum_status_matches_brute_force() {
        let g = five_halves();
        let o = Profile::new(vec![1, 0, 0]);
        let mut brute = true;
        for i in 0..3 {
            let stay = player_cost(&g, &o, i).unwrap();
            for t in 0..2 {
                if stay > player_cost(&g, &o.deviate(i, t), i).unwrap() {
                    brute = false;
                }
            }
        }
        let check = is_eps_pne(&g, &o, &int(0)).unwrap();
        assert_eq!(check.holds, brute);
        if !check.holds {
            assert!(check.witness.unwrap().ratio > 1.0);
        }
    }

    #[test]
    fn single_player_best_strategy_is_an_equilibrium() {
        let g = Game::unweighted(vec![vec![vec![0], vec![1], vec![0, 1]]], vec![lin(3), lin(2)])
            .unwrap();
        let t = best_response(&g, &Profile::empty(1), 0, TieBreak::LowestIndex);
        assert_eq!(t, 1);
        assert!(is_eps_pne(&g, &Profile::new(vec![t]), &int(0)).unwrap().holds);
    }

    #[test]
    fn first_mover_in_five_halves_takes_e3() {
        let g = five_halves();
        let costs = response_costs(&g, &Profile::empty(3), 0);
        assert_eq!(costs, vec![int(7), int(3)]);
        assert_eq!(best_response(&g, &Profile::empty(3), 0, TieBreak::LowestIndex), 1);
    }

    #[test]
    fn ties_follow_the_rule() {
        let g = Game::unweighted(vec![vec![vec![0], vec![1]]], vec![lin(1), lin(1)]).unwrap();
        let s = Profile::empty(1);
        assert_eq!(best_response(&g, &s, 0, TieBreak::LowestIndex), 0);
        assert_eq!(best_response(&g, &s, 0, TieBreak::HighestIndex), 1);
    }

    #[test]
    fn identical_players_pile_onto_a_single_resource() {
        let g = Game::unweighted(vec![vec![vec![0]]; 4], vec![lin(1)]).unwrap();
        let trace = one_round_walk(&g, &[0, 1, 2, 3], TieBreak::LowestIndex).unwrap();
        assert_eq!(congestion(&g, &trace.profile), vec![int(4)]);
        let costs: Vec<_> = trace.steps.iter().map(|s| s.cost.clone()).collect();
        assert_eq!(costs, vec![int(1), int(2), int(3), int(4)]);
    }

    #[test]
    fn walk_rejects_bad_orderings() {
        let g = five_halves();
        assert!(one_round_walk(&g, &[0, 0, 1], TieBreak::LowestIndex).is_err());
        assert!(one_round_walk(&g, &[0, 1], TieBreak::LowestIndex).is_err());
    }

    #[test]
    fn walk_prefix_loads_track_congestion() {
        let g = five_halves();
        let mut state = WalkState::start(&g, vec![2, 0, 1]).unwrap();
        while let Some(i) = state.next_player() {
            let t = best_response(&g, &state.profile, i, TieBreak::LowestIndex);
            state.advance(&g, t);
            assert_eq!(state.prefix_loads, congestion(&g, &state.profile));
        }
        assert!(state.is_done());
    }

    #[test]
    fn dynamics_stop_at_equilibria() {
        let g = five_halves();
        let k = Profile::new(vec![0, 1, 1]);
        let out = best_response_dynamics(&g, &k, 10).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.profile, k);
        let from_o = best_response_dynamics(&g, &Profile::new(vec![1, 0, 0]), 100).unwrap();
        assert!(is_eps_pne(&g, &from_o.profile, &int(0)).unwrap().holds);
    }

    #[test]
    fn potentials_on_empty_profiles_vanish() {
        let g = five_halves();
        let s = Profile::empty(3);
        for kind in [
            PotentialKind::RosenthalExact(1),
            PotentialKind::EpsAffineUnweighted(rat(1, 2)),
            PotentialKind::EpsAffineWeighted(rat(1, 2)),
        ] {
            assert_eq!(potential(&g, &s, &kind).unwrap(), int(0));
        }
    }

    #[test]
    fn closed_form_potentials_match_rosenthal_sums() {
        for (d, kind, expected) in
            [(2, PotentialKind::QuadraticExact, 14), (3, PotentialKind::CubicExact, 36)]
        {
            let g = Game::unweighted(
                vec![vec![vec![0]]; 3],
                vec![LatencySpec::monomial(int(1), d).unwrap()],
            )
            .unwrap();
            let s = Profile::new(vec![0, 0, 0]);
            assert_eq!(potential(&g, &s, &kind).unwrap(), int(expected));
            assert_eq!(potential(&g, &s, &PotentialKind::RosenthalExact(d)).unwrap(), int(expected));
        }
    }

    #[test]
    fn weighted_potential_at_eps_one_drops_the_square_term() {
        let g = Game::new(
            vec![int(1), int(3)],
            vec![vec![vec![0]], vec![vec![0, 1]]],
            vec![lin(2), lin(5)],
            Sharing::Congestion,
        )
        .unwrap();
        let s = Profile::new(vec![0, 0]);
        // 1/2 (2 * 16 + 5 * 9)
        assert_eq!(
            potential(&g, &s, &PotentialKind::EpsAffineWeighted(int(1))).unwrap(),
            rat(77, 2)
        );
        assert!(potential(&g, &s, &PotentialKind::RosenthalExact(1)).is_err());
    }
}
