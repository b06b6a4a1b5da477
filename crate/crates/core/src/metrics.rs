//! Exhaustive ground truth on small games: profile enumeration, exact
//! PoA/PoS, the worst one-round walk and potential minimizers.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dynamics::{best_responses, is_eps_pne, potential, PotentialKind};
use crate::error::{Error, Result};
use crate::game::{social, Game, Profile, Social};
use crate::report::number_json;
use crate::scalar::Scalar;

pub const DEFAULT_PROFILE_CAP: u128 = 10_000_000;
pub const DEFAULT_WALK_CAP: usize = 8;
/// Equilibria beyond this many are counted but not stored.
pub const STORED_EQUILIBRIA: usize = 1000;

/// Every full profile in lexicographic order (player 0 most significant).
#[derive(Clone, Debug)]
pub struct ProfileIter {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for ProfileIter {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(Profile::new(current))
    }
}

fn check_cap<T: Scalar>(g: &Game<T>, cap: u128) -> Result<()> {
    let size = g.profile_count();
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(())
}

pub fn enumerate_profiles<T: Scalar>(g: &Game<T>, cap: u128) -> Result<ProfileIter> {
    check_cap(g, cap)?;
    let radices: Vec<usize> = (0..g.players()).map(|i| g.strategies(i).len()).collect();
    Ok(ProfileIter { next: Some(vec![0; radices.len()]), radices })
}

/// Profile with the given lexicographic rank.
fn profile_at(radices: &[usize], mut rank: u128) -> Profile {
    let mut choices = vec![0; radices.len()];
    for pos in (0..radices.len()).rev() {
        let r = radices[pos] as u128;
        choices[pos] = (rank % r) as usize;
        rank /= r;
    }
    Profile::new(choices)
}

/// Runs `visit` over all profiles in parallel chunks and merges the
/// per-chunk accumulators in rank order.
fn fold_profiles<T, A, F, M>(g: &Game<T>, cap: u128, init: A, visit: F, merge: M) -> Result<A>
where
    T: Scalar,
    A: Clone + Send + Sync,
    F: Fn(&mut A, Profile) + Sync,
    M: Fn(A, A) -> A + Sync,
{
    check_cap(g, cap)?;
    let total = g.profile_count();
    let radices: Vec<usize> = (0..g.players()).map(|i| g.strategies(i).len()).collect();
    const CHUNK: u128 = 4096;
    let chunks = total.div_ceil(CHUNK) as usize;
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init.clone();
            let start = c as u128 * CHUNK;
            let end = (start + CHUNK).min(total);
            let iter = ProfileIter { radices: radices.clone(), next: profile_at(&radices, start).indices() };
            for s in iter.take((end - start) as usize) {
                visit(&mut acc, s);
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().fold(init, merge))
}

/// `num / den`, with `0/0 = 1`.
pub fn ratio<T: Scalar>(num: &T, den: &T) -> Result<T> {
    if den.is_zero_tol() {
        if num.is_zero_tol() {
            return Ok(T::one());
        }
        return Err(Error::UndefinedRatio(num.to_f64()));
    }
    Ok(num.clone() / den.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extremum<T> {
    pub profile: Profile,
    pub value: T,
}

fn keep_min<T: Scalar>(slot: &mut Option<Extremum<T>>, cand: Extremum<T>) {
    if slot.as_ref().is_none_or(|cur| cand.value < cur.value) {
        *slot = Some(cand);
    }
}

fn keep_max<T: Scalar>(slot: &mut Option<Extremum<T>>, cand: Extremum<T>) {
    if slot.as_ref().is_none_or(|cur| cand.value > cur.value) {
        *slot = Some(cand);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<T> {
    pub social: Social,
    pub eps: T,
    pub optimum: Extremum<T>,
    pub equilibria: Vec<Profile>,
    pub equilibrium_count: u64,
    pub worst_equilibrium: Option<Extremum<T>>,
    pub best_equilibrium: Option<Extremum<T>>,
    pub poa: Option<T>,
    pub pos: Option<T>,
    pub apx: Option<T>,
    pub apx_ordering: Option<Vec<usize>>,
    pub apx_profile: Option<Profile>,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let num = |v: &Option<T>| v.as_ref().map_or(serde_json::Value::Null, number_json);
        let ext = |e: &Option<Extremum<T>>| match e {
            None => serde_json::Value::Null,
            Some(e) => serde_json::json!({
                "profile": e.profile.indices(),
                "value": number_json(&e.value),
            }),
        };
        serde_json::json!({
            "social": match self.social { Social::Sum => "sum", Social::Max => "max" },
            "eps": number_json(&self.eps),
            "optimum": ext(&Some(self.optimum.clone())),
            "equilibrium_count": self.equilibrium_count,
            "equilibria": self.equilibria.iter().map(Profile::indices).collect::<Vec<_>>(),
            "worst_equilibrium": ext(&self.worst_equilibrium),
            "best_equilibrium": ext(&self.best_equilibrium),
            "poa": num(&self.poa),
            "pos": num(&self.pos),
            "apx": num(&self.apx),
            "apx_ordering": self.apx_ordering,
            "apx_profile": self.apx_profile.as_ref().map(|p| p.indices()),
        })
    }

    pub const CSV_HEADER: &'static str = "social,eps,optimum,equilibria,poa,pos,apx";

    pub fn csv_row(&self) -> String {
        let f = |v: &Option<T>| v.as_ref().map_or(String::new(), |v| format!("{:.6}", v.to_f64()));
        format!(
            "{},{:.6},{:.6},{},{},{},{}",
            match self.social {
                Social::Sum => "sum",
                Social::Max => "max",
            },
            self.eps.to_f64(),
            self.optimum.value.to_f64(),
            self.equilibrium_count,
            f(&self.poa),
            f(&self.pos),
            f(&self.apx)
        )
    }
}

#[derive(Clone)]
struct PoaAcc<T> {
    optimum: Option<Extremum<T>>,
    worst: Option<Extremum<T>>,
    best: Option<Extremum<T>>,
    equilibria: Vec<Profile>,
    count: u64,
}

/// Social optimum over all profiles.
pub fn optimum<T: Scalar>(g: &Game<T>, f: Social, cap: u128) -> Result<Extremum<T>> {
    let best = fold_profiles(
        g,
        cap,
        None,
        |acc: &mut Option<Extremum<T>>, s| {
            let value = social(g, &s, f);
            keep_min(acc, Extremum { profile: s, value });
        },
        |mut a, b| {
            if let Some(b) = b {
                keep_min(&mut a, b);
            }
            a
        },
    )?;
    Ok(best.expect("games have at least one profile"))
}

pub fn exact_poa_pos<T: Scalar>(g: &Game<T>, eps: &T, f: Social, cap: u128) -> Result<MetricsReport<T>> {
    let init = PoaAcc { optimum: None, worst: None, best: None, equilibria: Vec::new(), count: 0 };
    let acc = fold_profiles(
        g,
        cap,
        init,
        |acc: &mut PoaAcc<T>, s| {
            let value = social(g, &s, f);
            keep_min(&mut acc.optimum, Extremum { profile: s.clone(), value: value.clone() });
            if is_eps_pne(g, &s, eps).map(|c| c.holds).unwrap_or(false) {
                acc.count += 1;
                if acc.equilibria.len() < STORED_EQUILIBRIA {
                    acc.equilibria.push(s.clone());
                }
                keep_max(&mut acc.worst, Extremum { profile: s.clone(), value: value.clone() });
                keep_min(&mut acc.best, Extremum { profile: s, value });
            }
        },
        |mut a, b| {
            for (slot, cand) in [(&mut a.optimum, b.optimum), (&mut a.best, b.best)] {
                if let Some(c) = cand {
                    keep_min(slot, c);
                }
            }
            if let Some(c) = b.worst {
                keep_max(&mut a.worst, c);
            }
            a.count += b.count;
            let room = STORED_EQUILIBRIA.saturating_sub(a.equilibria.len());
            a.equilibria.extend(b.equilibria.into_iter().take(room));
            a
        },
    )?;
    let optimum = acc.optimum.expect("games have at least one profile");
    let (worst, best) = match (acc.worst, acc.best) {
        (Some(w), Some(b)) => (w, b),
        _ => return Err(Error::EmptyEquilibriumSet),
    };
    let poa = ratio(&worst.value, &optimum.value)?;
    let pos = ratio(&best.value, &optimum.value)?;
    Ok(MetricsReport {
        social: f,
        eps: eps.clone(),
        optimum,
        equilibria: acc.equilibria,
        equilibrium_count: acc.count,
        worst_equilibrium: Some(worst),
        best_equilibrium: Some(best),
        poa: Some(poa),
        pos: Some(pos),
        apx: None,
        apx_ordering: None,
        apx_profile: None,
    })
}

/// Worst reachable final social value from a partial walk state, with the
/// move sequence realizing it.
struct WalkSearch<'a, T> {
    g: &'a Game<T>,
    social: Social,
    memo: HashMap<Profile, (T, Option<(usize, usize)>)>,
}

impl<T: Scalar> WalkSearch<'_, T> {
    fn worst(&mut self, state: &Profile) -> T {
        if let Some((v, _)) = self.memo.get(state) {
            return v.clone();
        }
        let mut best: Option<(T, (usize, usize))> = None;
        for i in (0..self.g.players()).filter(|&i| state.choice(i).is_none()) {
            let (tied, _) = best_responses(self.g, state, i);
            for t in tied {
                let v = self.worst(&state.deviate(i, t));
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, (i, t)));
                }
            }
        }
        let entry = match best {
            Some((v, mv)) => (v, Some(mv)),
            None => (social(self.g, state, self.social), None),
        };
        self.memo.insert(state.clone(), entry.clone());
        entry.0
    }
}

/// Exact worst-case one-round walk over every ordering and every tie resolution.
pub fn exact_apx_one_round<T: Scalar>(
    g: &Game<T>,
    f: Social,
    profile_cap: u128,
    walk_cap: usize,
) -> Result<MetricsReport<T>> {
    if g.players() > walk_cap {
        return Err(Error::CapExceeded { size: g.players() as u128, cap: walk_cap as u128 });
    }
    let optimum = optimum(g, f, profile_cap)?;
    let mut search = WalkSearch { g, social: f, memo: HashMap::new() };
    let start = Profile::empty(g.players());
    let worst = search.worst(&start);
    let mut ordering = Vec::with_capacity(g.players());
    let mut state = start;
    while let Some((_, Some((i, t)))) = search.memo.get(&state) {
        ordering.push(*i);
        state = state.deviate(*i, *t);
    }
    let apx = ratio(&worst, &optimum.value)?;
    Ok(MetricsReport {
        social: f,
        eps: T::zero(),
        optimum,
        equilibria: Vec::new(),
        equilibrium_count: 0,
        worst_equilibrium: None,
        best_equilibrium: None,
        poa: None,
        pos: None,
        apx: Some(apx),
        apx_ordering: Some(ordering),
        apx_profile: Some(state),
    })
}

/// Global minimizer of a potential (first in lexicographic order on ties).
pub fn potential_minimizer<T: Scalar>(g: &Game<T>, kind: &PotentialKind, cap: u128) -> Result<Extremum<T>> {
    // surface incompatibility errors before the parallel sweep
    potential(g, &Profile::new(vec![0; g.players()]), kind)?;
    let best = fold_profiles(
        g,
        cap,
        None,
        |acc: &mut Option<Extremum<T>>, s| {
            let value = potential(g, &s, kind).expect("kind checked above");
            keep_min(acc, Extremum { profile: s, value });
        },
        |mut a, b| {
            if let Some(b) = b {
                keep_min(&mut a, b);
            }
            a
        },
    )?;
    Ok(best.expect("games have at least one profile"))
}
