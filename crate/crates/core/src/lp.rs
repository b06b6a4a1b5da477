//! Dense linear programs over non-negative variables, solved by a two-phase
//! tableau simplex with Bland's pivoting rule. Exact over rationals; in
//! float mode pivots and signs are judged with the crate tolerance.

use std::fmt::Write as _;

use crate::scalar::{format_rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub name: String,
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `sense objective·x` subject to the rows, `x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    pub variables: Vec<String>,
    pub objective: Vec<T>,
    pub sense: Sense,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Objective value at the optimum.
    pub value: Option<T>,
    pub x: Vec<T>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(variables: Vec<String>, sense: Sense) -> Self {
        let objective = vec![T::zero(); variables.len()];
        Self { variables, objective, sense, constraints: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn add(&mut self, name: impl Into<String>, coeffs: Vec<T>, relation: Relation, rhs: T) {
        assert_eq!(coeffs.len(), self.variables.len(), "row width must match the variable count");
        self.constraints.push(Constraint { name: name.into(), coeffs, relation, rhs });
    }

    pub fn rows_named(&self, prefix: &str) -> impl Iterator<Item = &Constraint<T>> {
        let prefix = prefix.to_string();
        self.constraints.iter().filter(move |c| c.name.starts_with(&prefix))
    }

    /// Plain-text export: objective line, then one `name: terms rel rhs` row per constraint.
    pub fn to_text(&self) -> String {
        let num = |v: &T| match v.to_rational() {
            Some(r) => format_rational(&r),
            None => format!("{}", v.to_f64()),
        };
        let terms = |coeffs: &[T]| {
            let parts: Vec<String> = coeffs
                .iter()
                .zip(&self.variables)
                .filter(|(c, _)| !c.is_zero_tol())
                .map(|(c, v)| format!("{} {v}", num(c)))
                .collect();
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ")
            }
        };
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let _ = writeln!(out, "{sense}: {}", terms(&self.objective));
        for c in &self.constraints {
            let _ = writeln!(out, "{}: {} {} {}", c.name, terms(&c.coeffs), c.relation.symbol(), num(&c.rhs));
        }
        let _ = writeln!(out, "bounds: {} >= 0", self.variables.join(", "));
        out
    }

    /// Value of the objective at `x`.
    pub fn evaluate(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Whether `x` satisfies every row (and `x >= 0`).
    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.iter().all(|v| T::zero().le_tol(v))
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs.le_tol(&c.rhs),
                    Relation::Ge => c.rhs.le_tol(&lhs),
                    Relation::Eq => lhs.eq_tol(&c.rhs),
                }
            })
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    /// Columns that may not enter the basis.
    banned: Vec<bool>,
}

fn positive<T: Scalar>(v: &T) -> bool {
    T::zero().lt_tol(v)
}

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.banned.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c].clone();
            if f != T::zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Maximizes the current objective row. Returns false when unbounded.
    fn run(&mut self) -> bool {
        let rhs = self.width();
        loop {
            let entering = (0..rhs).find(|&j| !self.banned[j] && positive(&self.obj[j]));
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !positive(&row[c]) {
                    continue;
                }
                let theta = row[rhs].clone() / row[c].clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        theta.lt_tol(best) || (theta.eq_tol(best) && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, theta));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn set_objective(&mut self, costs: &[T]) {
        let rhs = self.width();
        let mut obj: Vec<T> = costs.to_vec();
        obj.push(T::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = costs[self.basis[i]].clone();
            if cb == T::zero() {
                continue;
            }
            for j in 0..=rhs {
                obj[j] = obj[j].clone() - cb.clone() * row[j].clone();
            }
        }
        self.obj = obj;
    }
}

pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    let n = lp.len();
    let m = lp.constraints.len();
    // Columns: originals, one slack/surplus per inequality, one artificial per
    // row that needs it, then the right-hand side.
    let mut normalized: Vec<(Vec<T>, Relation, T)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < T::zero() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v.clone()).collect(), flipped, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();
    let slacks = normalized.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = normalized.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + slacks + artificials;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, n + slacks);
    for (coeffs, rel, rhs) in normalized.drain(..) {
        let mut row = coeffs;
        row.resize(width + 1, T::zero());
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = T::one();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                row[a] = T::one();
                basis.push(a);
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                row[a] = T::one();
                basis.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: Vec::new(), basis, banned: vec![false; width] };

    let first_artificial = n + slacks;
    let phase1: Vec<T> =
        (0..width).map(|j| if j >= first_artificial { -T::one() } else { T::zero() }).collect();
    t.set_objective(&phase1);
    t.run();
    if !t.obj[width].is_zero_tol() {
        return LpSolution { status: LpStatus::Infeasible, value: None, x: Vec::new() };
    }
    // Drive zero-level artificials out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= first_artificial {
            match (0..first_artificial).find(|&j| !t.rows[i][j].is_zero_tol()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for j in first_artificial..width {
        t.banned[j] = true;
    }

    let mut costs: Vec<T> = lp
        .objective
        .iter()
        .map(|c| if lp.sense == Sense::Maximize { c.clone() } else { -c.clone() })
        .collect();
    costs.resize(width, T::zero());
    t.set_objective(&costs);
    if !t.run() {
        return LpSolution { status: LpStatus::Unbounded, value: None, x: Vec::new() };
    }
    let mut x = vec![T::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][width].clone();
        }
    }
    let value = lp.evaluate(&x);
    LpSolution { status: LpStatus::Optimal, value: Some(value), x }
}
