//! Dense bivariate polynomials `g(K, O)` of total degree at most four.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

pub const MAX_POLY_DEGREE: usize = 4;
const SIDE: usize = MAX_POLY_DEGREE + 1;

/// `sum c[a][b] K^a O^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> BiPoly<T> {
    pub fn zero() -> Self {
        Self { coeffs: vec![T::zero(); SIDE * SIDE] }
    }

    pub fn constant(c: T) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn term(c: T, a: usize, b: usize) -> Self {
        let mut p = Self::zero();
        p.set(a, b, c);
        p
    }

    pub fn k() -> Self {
        Self::term(T::one(), 1, 0)
    }

    pub fn o() -> Self {
        Self::term(T::one(), 0, 1)
    }

    pub fn coeff(&self, a: usize, b: usize) -> &T {
        &self.coeffs[a * SIDE + b]
    }

    pub fn set(&mut self, a: usize, b: usize, c: T) {
        assert!(a + b <= MAX_POLY_DEGREE, "term K^{a} O^{b} exceeds degree {MAX_POLY_DEGREE}");
        self.coeffs[a * SIDE + b] = c;
    }

    /// Non-zero terms as `(a, b, c)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != T::zero())
            .map(|(idx, c)| (idx / SIDE, idx % SIDE, c))
    }

    pub fn degree(&self) -> usize {
        self.terms().map(|(a, b, _)| a + b).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(T::one()), |acc, _| acc * self.clone())
    }

    pub fn eval(&self, k: &T, o: &T) -> T {
        let mut total = T::zero();
        for (a, b, c) in self.terms() {
            total = total + c.clone() * k.powi(a as u32) * o.powi(b as u32);
        }
        total
    }

    /// `sum |c| K^a O^b`, the magnitude the float tolerance is scaled by.
    pub fn magnitude(&self, k: f64, o: f64) -> f64 {
        self.terms()
            .map(|(a, b, c)| c.to_f64().abs() * k.powi(a as i32) * o.powi(b as i32))
            .sum()
    }

    /// Degree-`j` homogeneous part restricted to `K = τ, O = 1 - τ`, as
    /// coefficients of `1, τ, τ², ...`.
    pub fn polar_part(&self, j: usize) -> Vec<T> {
        let mut out = vec![T::zero(); j + 1];
        for a in 0..=j {
            let b = j - a;
            if a >= SIDE || b >= SIDE {
                continue;
            }
            let c = self.coeff(a, b).clone();
            if c == T::zero() {
                continue;
            }
            // c τ^a (1-τ)^b = c sum_i binom(b,i) (-1)^i τ^(a+i)
            let mut binom = 1i64;
            for i in 0..=b {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                out[a + i] = out[a + i].clone() + c.clone() * T::from_i64(sign * binom);
                binom = binom * (b - i) as i64 / (i as i64 + 1);
            }
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> BiPoly<U> {
        BiPoly { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<T: Scalar> Add for BiPoly<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { coeffs: self.coeffs.into_iter().zip(rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Scalar> Sub for BiPoly<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for BiPoly<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl<T: Scalar> Mul for BiPoly<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (a1, b1, c1) in self.terms() {
            for (a2, b2, c2) in rhs.terms() {
                let (a, b) = (a1 + a2, b1 + b2);
                let sum = out.coeff(a, b).clone() + c1.clone() * c2.clone();
                out.set(a, b, sum);
            }
        }
        out
    }
}

/// Evaluates `sum c_k x^k`.
pub fn eval_univariate<T: Scalar>(coeffs: &[T], x: &T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
}

/// Lower bound of `sum c_k τ^k` over `τ ∈ [lo, hi] ⊆ [0, 1]`.
pub fn interval_lower_bound<T: Scalar>(coeffs: &[T], lo: &T, hi: &T) -> T {
    coeffs.iter().enumerate().fold(T::zero(), |acc, (k, c)| {
        let at = if *c >= T::zero() { lo } else { hi };
        acc + c.clone() * at.powi(k as u32)
    })
}

impl<T: Scalar> std::fmt::Display for BiPoly<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by_key(|(a, b, _)| (std::cmp::Reverse(a + b), std::cmp::Reverse(*a)));
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (a, b, c)) in terms.into_iter().enumerate() {
            let negative = *c < T::zero();
            let mag = c.abs();
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = match (a, b) {
                (0, 0) => String::new(),
                _ => {
                    let part = |v: &str, e: usize| match e {
                        0 => String::new(),
                        1 => v.to_string(),
                        _ => format!("{v}^{e}"),
                    };
                    [part("K", a), part("O", b)].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ")
                }
            };
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == T::one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag} {mono}")?;
            }
        }
        Ok(())
    }
}
