//! Weighted congestion games and fair cost-sharing games.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Highest latency degree handled anywhere in the crate.
pub const MAX_DEGREE: usize = 3;

/// Polynomial latency `sum_k coeffs[k] * x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatencySpec<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> LatencySpec<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidGame(format!(
                "latency has {} coefficients, degree is capped at {MAX_DEGREE}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| *c < T::zero()) {
            return Err(Error::InvalidGame("latency coefficients must be non-negative".into()));
        }
        Ok(Self { coeffs })
    }

    /// `alpha * x^d`.
    pub fn monomial(alpha: T, degree: usize) -> Result<Self> {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = alpha;
        Self::new(coeffs)
    }

    /// Constant resource cost (fair cost-sharing mode).
    pub fn constant(cost: T) -> Result<Self> {
        Self::new(vec![cost])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != T::zero()).unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// True when only the coefficient of `x^degree` may be non-zero.
    pub fn is_monomial_of(&self, degree: usize) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| k == degree || *c == T::zero())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sharing {
    #[default]
    Congestion,
    FairCostSharing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Social {
    #[default]
    Sum,
    Max,
}

/// A strategy: sorted, duplicate-free resource indices.
pub type Strategy = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Game<T> {
    weights: Vec<T>,
    strategies: Vec<Vec<Strategy>>,
    latencies: Vec<LatencySpec<T>>,
    sharing: Sharing,
}

impl<T: Scalar> Game<T> {
    pub fn new(
        weights: Vec<T>,
        strategies: Vec<Vec<Strategy>>,
        latencies: Vec<LatencySpec<T>>,
        sharing: Sharing,
    ) -> Result<Self> {
        if weights.len() != strategies.len() {
            return Err(Error::InvalidGame(format!(
                "{} weights for {} players",
                weights.len(),
                strategies.len()
            )));
        }
        if weights.iter().any(|w| *w <= T::zero()) {
            return Err(Error::InvalidGame("player weights must be positive".into()));
        }
        let m = latencies.len();
        let mut normalized = Vec::with_capacity(strategies.len());
        for (i, set) in strategies.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidGame(format!("player {i} has no strategy")));
            }
            let mut player = Vec::with_capacity(set.len());
            for mut s in set {
                if s.is_empty() {
                    return Err(Error::InvalidGame(format!("player {i} has an empty strategy")));
                }
                s.sort_unstable();
                if s.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidGame(format!(
                        "player {i} has a strategy with a repeated resource"
                    )));
                }
                if let Some(&e) = s.iter().find(|&&e| e >= m) {
                    return Err(Error::InvalidGame(format!(
                        "player {i} uses resource {e}, only {m} exist"
                    )));
                }
                player.push(s);
            }
            normalized.push(player);
        }
        if sharing == Sharing::FairCostSharing {
            if latencies.iter().any(|l| l.degree() > 0) {
                return Err(Error::InvalidGame(
                    "fair cost-sharing resources carry a single constant cost".into(),
                ));
            }
            if weights.iter().any(|w| *w != T::one()) {
                return Err(Error::InvalidGame("fair cost-sharing players are unweighted".into()));
            }
        }
        Ok(Self { weights, strategies: normalized, latencies, sharing })
    }

    pub fn unweighted(
        strategies: Vec<Vec<Strategy>>,
        latencies: Vec<LatencySpec<T>>,
    ) -> Result<Self> {
        let n = strategies.len();
        Self::new(vec![T::one(); n], strategies, latencies, Sharing::Congestion)
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn resources(&self) -> usize {
        self.latencies.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &T {
        &self.weights[i]
    }

    pub fn strategies(&self, i: usize) -> &[Strategy] {
        &self.strategies[i]
    }

    pub fn strategy(&self, i: usize, k: usize) -> &Strategy {
        &self.strategies[i][k]
    }

    pub fn latencies(&self) -> &[LatencySpec<T>] {
        &self.latencies
    }

    pub fn latency(&self, e: usize) -> &LatencySpec<T> {
        &self.latencies[e]
    }

    pub fn sharing(&self) -> Sharing {
        self.sharing
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|w| *w == T::one())
    }

    pub fn degree(&self) -> usize {
        self.latencies.iter().map(LatencySpec::degree).max().unwrap_or(0)
    }

    /// Number of full profiles, saturating.
    pub fn profile_count(&self) -> u128 {
        self.strategies
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    pub fn check_profile(&self, s: &Profile) -> Result<()> {
        if s.choices.len() != self.players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries for {} players",
                s.choices.len(),
                self.players()
            )));
        }
        for (i, c) in s.choices.iter().enumerate() {
            if let Some(k) = c {
                if *k >= self.strategies[i].len() {
                    return Err(Error::InvalidProfile(format!(
                        "player {i} has no strategy {k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One strategy index per player; `None` marks an undecided player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile {
    pub choices: Vec<Option<usize>>,
}

impl Profile {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices: choices.into_iter().map(Some).collect() }
    }

    /// The empty profile: nobody has chosen yet.
    pub fn empty(n: usize) -> Self {
        Self { choices: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn choice(&self, i: usize) -> Option<usize> {
        self.choices[i]
    }

    pub fn is_complete(&self) -> bool {
        self.choices.iter().all(Option::is_some)
    }

    /// `(S_{-i} ◇ t)`
    pub fn deviate(&self, i: usize, t: usize) -> Self {
        let mut next = self.clone();
        next.choices[i] = Some(t);
        next
    }

    /// Strategy indices of a complete profile.
    pub fn indices(&self) -> Option<Vec<usize>> {
        self.choices.iter().copied().collect()
    }
}

/// `L_e(S)`: total weight on each resource. Undecided players contribute nothing.
pub fn congestion<T: Scalar>(g: &Game<T>, s: &Profile) -> Vec<T> {
    let mut loads = vec![T::zero(); g.resources()];
    for (i, choice) in s.choices.iter().enumerate() {
        if let Some(k) = choice {
            for &e in g.strategy(i, *k) {
                loads[e] = loads[e].clone() + g.weight(i).clone();
            }
        }
    }
    loads
}

/// `n_e(S)`: number of players on each resource.
pub fn usage_counts<T: Scalar>(g: &Game<T>, s: &Profile) -> Vec<usize> {
    let mut counts = vec![0usize; g.resources()];
    for (i, choice) in s.choices.iter().enumerate() {
        if let Some(k) = choice {
            for &e in g.strategy(i, *k) {
                counts[e] += 1;
            }
        }
    }
    counts
}

/// Cost of player `i` on strategy `k` against precomputed loads and counts that
/// already include the player.
pub(crate) fn cost_on<T: Scalar>(
    g: &Game<T>,
    i: usize,
    k: usize,
    loads: &[T],
    counts: &[usize],
) -> T {
    let strategy = g.strategy(i, k);
    match g.sharing() {
        Sharing::Congestion => strategy
            .iter()
            .fold(T::zero(), |acc, &e| acc + g.latency(e).eval(&loads[e])),
        Sharing::FairCostSharing => strategy.iter().fold(T::zero(), |acc, &e| {
            acc + g.latency(e).coeff(0) / T::from_i64(counts[e] as i64)
        }),
    }
}

pub fn player_cost<T: Scalar>(g: &Game<T>, s: &Profile, i: usize) -> Result<T> {
    let k = s.choice(i).ok_or(Error::UndecidedPlayer(i))?;
    let loads = congestion(g, s);
    let counts = usage_counts(g, s);
    Ok(cost_on(g, i, k, &loads, &counts))
}

/// Costs of all decided players (`None` for undecided ones).
pub fn player_costs<T: Scalar>(g: &Game<T>, s: &Profile) -> Vec<Option<T>> {
    let loads = congestion(g, s);
    let counts = usage_counts(g, s);
    s.choices
        .iter()
        .enumerate()
        .map(|(i, c)| c.map(|k| cost_on(g, i, k, &loads, &counts)))
        .collect()
}

/// `SUM(S)`: weight-scaled sum `sum_i w_i c_i(S)` of the decided players' costs,
/// which is the plain sum of costs for unweighted games.
pub fn social_sum<T: Scalar>(g: &Game<T>, s: &Profile) -> T {
    player_costs(g, s)
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| g.weight(i).clone() * c))
        .fold(T::zero(), |acc, c| acc + c)
}

/// `SUM(S)` computed resource by resource: `sum_e L_e * l_e(L_e)` in congestion
/// mode and `sum_e c_e p_e(S)` in fair mode.
pub fn social_sum_by_resource<T: Scalar>(g: &Game<T>, s: &Profile) -> T {
    match g.sharing() {
        Sharing::Congestion => {
            let loads = congestion(g, s);
            loads.iter().enumerate().fold(T::zero(), |acc, (e, l)| {
                acc + l.clone() * g.latency(e).eval(l)
            })
        }
        Sharing::FairCostSharing => {
            let counts = usage_counts(g, s);
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .fold(T::zero(), |acc, (e, _)| acc + g.latency(e).coeff(0))
        }
    }
}

/// Maximum player cost; zero on the empty profile.
pub fn social_max<T: Scalar>(g: &Game<T>, s: &Profile) -> T {
    player_costs(g, s)
        .into_iter()
        .flatten()
        .fold(T::zero(), |acc, c| if c > acc { c } else { acc })
}

pub fn social<T: Scalar>(g: &Game<T>, s: &Profile, f: Social) -> T {
    match f {
        Social::Sum => social_sum(g, s),
        Social::Max => social_max(g, s),
    }
}

/// Replaces every affine latency `a x + b` by `a x` plus one private resource
/// `(b / w_i) x` per player that can reach the resource. Strategy `k` of
/// player `i` in the returned game is the image of strategy `k` in `g`, so the
/// same profile indexes both games and every player cost is unchanged.
pub fn normalize_affine<T: Scalar>(g: &Game<T>) -> Result<Game<T>> {
    if g.degree() > 1 {
        return Err(Error::NotAffine(g.degree()));
    }
    if g.sharing() != Sharing::Congestion {
        return Err(Error::InvalidGame("normalization applies to congestion games".into()));
    }
    let mut latencies: Vec<LatencySpec<T>> = g
        .latencies()
        .iter()
        .map(|l| LatencySpec::monomial(l.coeff(1), 1))
        .collect::<Result<_>>()?;
    // (resource, player) -> index of the added private resource
    let mut private = std::collections::BTreeMap::new();
    for e in 0..g.resources() {
        let beta = g.latency(e).coeff(0);
        if beta <= T::zero() {
            continue;
        }
        for i in 0..g.players() {
            if g.strategies(i).iter().any(|s| s.contains(&e)) {
                private.insert((e, i), latencies.len());
                latencies.push(LatencySpec::monomial(beta.clone() / g.weight(i).clone(), 1)?);
            }
        }
    }
    let strategies = (0..g.players())
        .map(|i| {
            g.strategies(i)
                .iter()
                .map(|s| {
                    let mut mapped = s.clone();
                    mapped.extend(s.iter().filter_map(|e| private.get(&(*e, i)).copied()));
                    mapped
                })
                .collect()
        })
        .collect();
    Game::new(g.weights().to_vec(), strategies, latencies, Sharing::Congestion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num_rational::BigRational;

    fn lin(a: i64) -> LatencySpec<BigRational> {
        LatencySpec::monomial(int(a), 1).unwrap()
    }

    fn five_halves() -> (Game<BigRational>, Profile, Profile) {
        let g = Game::unweighted(
            vec![
                vec![vec![0, 1], vec![2]],
                vec![vec![0], vec![1, 2]],
                vec![vec![1], vec![2]],
            ],
            vec![lin(5), lin(2), lin(3)],
        )
        .unwrap();
        (g, Profile::new(vec![0, 1, 1]), Profile::new(vec![1, 0, 0]))
    }

    #[test]
    fn loads_and_costs_of_the_five_halves_instance() {
        let (g, k, o) = five_halves();
        assert_eq!(congestion(&g, &k), vec![int(1), int(2), int(2)]);
        assert_eq!(player_cost(&g, &k, 0).unwrap(), int(9));
        assert_eq!(social_sum(&g, &k), int(25));
        assert_eq!(social_sum(&g, &o), int(10));
        assert_eq!(social_sum(&g, &k) / social_sum(&g, &o), rat(5, 2));
        assert_eq!(social_sum_by_resource(&g, &k), int(25));
        assert_eq!(social_max(&g, &k), int(10));
    }

    #[test]
    fn weighted_sum_matches_the_resource_decomposition() {
        let g = Game::new(
            vec![int(1), rat(3, 2)],
            vec![vec![vec![0, 1]], vec![vec![1]]],
            vec![lin(2), LatencySpec::monomial(int(3), 2).unwrap()],
            Sharing::Congestion,
        )
        .unwrap();
        let s = Profile::new(vec![0, 0]);
        // 2 * 1^2 + 3 * (5/2)^3
        assert_eq!(social_sum(&g, &s), rat(391, 8));
        assert_eq!(social_sum_by_resource(&g, &s), rat(391, 8));
    }

    #[test]
    fn empty_profile_costs_nothing() {
        let (g, _, _) = five_halves();
        let s = Profile::empty(3);
        assert!(congestion(&g, &s).iter().all(|l| *l == int(0)));
        assert_eq!(social_sum(&g, &s), int(0));
        assert!(matches!(player_cost(&g, &s, 1), Err(Error::UndecidedPlayer(1))));
    }

    #[test]
    fn solo_player_pays_the_latency() {
        let g = Game::unweighted(vec![vec![vec![0]]], vec![lin(1)]).unwrap();
        assert_eq!(player_cost(&g, &Profile::new(vec![0]), 0).unwrap(), int(1));
    }

    #[test]
    fn fair_sharing_splits_cost_equally() {
        let g = Game::new(
            vec![int(1); 3],
            vec![vec![vec![0]]; 3],
            vec![LatencySpec::constant(int(6)).unwrap()],
            Sharing::FairCostSharing,
        )
        .unwrap();
        let s = Profile::new(vec![0, 0, 0]);
        for i in 0..3 {
            assert_eq!(player_cost(&g, &s, i).unwrap(), int(2));
        }
        assert_eq!(social_sum(&g, &s), int(6));
        assert_eq!(social_sum_by_resource(&g, &s), int(6));
    }

    #[test]
    fn rejects_malformed_games() {
        assert!(Game::unweighted(vec![vec![vec![0, 0]]], vec![lin(1)]).is_err());
        assert!(Game::unweighted(vec![vec![vec![3]]], vec![lin(1)]).is_err());
        assert!(Game::unweighted(vec![vec![]], vec![lin(1)]).is_err());
        assert!(LatencySpec::new(vec![int(-1)]).is_err());
        assert!(LatencySpec::new(vec![int(0); 5]).is_err());
        assert!(Game::new(
            vec![int(1)],
            vec![vec![vec![0]]],
            vec![lin(1)],
            Sharing::FairCostSharing
        )
        .is_err());
    }

    #[test]
    fn normalize_single_affine_resource() {
        let g = Game::unweighted(
            vec![vec![vec![0]]],
            vec![LatencySpec::new(vec![int(3), int(2)]).unwrap()],
        )
        .unwrap();
        let h = normalize_affine(&g).unwrap();
        assert_eq!(h.resources(), 2);
        assert_eq!(h.latency(0).coeffs, vec![int(0), int(2)]);
        assert_eq!(h.latency(1).coeffs, vec![int(0), int(3)]);
        let s = Profile::new(vec![0]);
        assert_eq!(player_cost(&g, &s, 0).unwrap(), int(5));
        assert_eq!(player_cost(&h, &s, 0).unwrap(), int(5));
    }

    #[test]
    fn normalize_divides_offset_by_weight() {
        let g = Game::new(
            vec![int(1), int(2)],
            vec![vec![vec![0]], vec![vec![0]]],
            vec![LatencySpec::new(vec![int(4), int(1)]).unwrap()],
            Sharing::Congestion,
        )
        .unwrap();
        let h = normalize_affine(&g).unwrap();
        assert_eq!(h.latency(1).coeff(1), int(4));
        assert_eq!(h.latency(2).coeff(1), int(2));
        let s = Profile::new(vec![0, 0]);
        let loads = congestion(&h, &s);
        // each private resource adds exactly beta = 4
        assert_eq!(h.latency(1).eval(&loads[1]), int(4));
        assert_eq!(h.latency(2).eval(&loads[2]), int(4));
        for i in 0..2 {
            assert_eq!(player_cost(&g, &s, i).unwrap(), player_cost(&h, &s, i).unwrap());
        }
    }

    #[test]
    fn normalize_without_offsets_is_identity() {
        let (g, _, _) = five_halves();
        assert_eq!(normalize_affine(&g).unwrap(), g);
    }

    #[test]
    fn normalize_rejects_quadratic() {
        let g = Game::unweighted(
            vec![vec![vec![0]]],
            vec![LatencySpec::monomial(int(1), 2).unwrap()],
        )
        .unwrap();
        assert!(matches!(normalize_affine(&g), Err(Error::NotAffine(2))));
    }
}
