//! Sparse polynomials in two variables (exact rational coefficients) and in
//! four variables (double coefficients).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// A polynomial `Σ c_{ab} x1^a x2^b` with rational coefficients.
///
/// Evaluation in floating point uses a cached rounding of each coefficient;
/// interval evaluation uses an enclosure of each coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    terms: Vec<(u32, u32, BigRational)>,
    approx: Vec<(u32, u32, f64)>,
    enclosures: Vec<(u32, u32, Interval)>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Poly2 {
    pub fn new(terms: impl IntoIterator<Item = (u32, u32, BigRational)>) -> Self {
        let mut map: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for (a, b, c) in terms {
            *map.entry((a, b)).or_insert_with(BigRational::zero) += c;
        }
        let terms: Vec<_> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((a, b), c)| (a, b, c))
            .collect();
        let approx = terms
            .iter()
            .map(|(a, b, c)| (*a, *b, c.to_f64().unwrap_or(f64::NAN)))
            .collect();
        let enclosures = terms
            .iter()
            .map(|(a, b, c)| (*a, *b, Interval::enclose_rational(c)))
            .collect();
        Self { terms, approx, enclosures }
    }

    /// Builds from double coefficients, each taken as the exact rational it
    /// represents.
    pub fn from_f64_terms(terms: &[(u32, u32, f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for &(a, b, c) in terms {
            let q = BigRational::from_f64(c)
                .ok_or_else(|| Error::InvalidInput(format!("non-finite coefficient {c}")))?;
            out.push((a, b, q));
        }
        Ok(Self::new(out))
    }

    pub fn zero() -> Self {
        Self::new([])
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new([(0, 0, c)])
    }

    pub fn terms(&self) -> &[(u32, u32, BigRational)] {
        &self.terms
    }

    pub fn approx_terms(&self) -> &[(u32, u32, f64)] {
        &self.approx
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, b, _)| a + b).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.approx
            .iter()
            .map(|&(a, b, c)| c * x1.powi(a as i32) * x2.powi(b as i32))
            .sum()
    }

    /// Enclosure of the range over a box, evaluated monomial by monomial.
    pub fn eval_interval(&self, x1: Interval, x2: Interval) -> Interval {
        let mut acc = Interval::point(0.0);
        for &(a, b, c) in &self.enclosures {
            acc = acc + c * x1.powi(a) * x2.powi(b);
        }
        acc
    }

    pub fn eval_rational(&self, x1: &BigRational, x2: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (a, b, c) in &self.terms {
            acc += c * pow(x1, *a) * pow(x2, *b);
        }
        acc
    }

    /// Partial derivative in `x1` (`var = 0`) or `x2` (`var = 1`).
    pub fn derivative(&self, var: usize) -> Poly2 {
        Poly2::new(self.terms.iter().filter_map(|(a, b, c)| {
            let e = if var == 0 { *a } else { *b };
            if e == 0 {
                return None;
            }
            let c = c * BigRational::from_integer(BigInt::from(e));
            Some(if var == 0 { (a - 1, *b, c) } else { (*a, b - 1, c) })
        }))
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        Poly2::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.scale(&rational(-1, 1)))
    }

    pub fn scale(&self, s: &BigRational) -> Poly2 {
        Poly2::new(self.terms.iter().map(|(a, b, c)| (*a, *b, c * s)))
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a1, b1, c1) in &self.terms {
            for (a2, b2, c2) in &other.terms {
                out.push((a1 + a2, b1 + b2, c1 * c2));
            }
        }
        Poly2::new(out)
    }
}

fn pow(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// A polynomial in `(x1, x2, y1, y2)` with double coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly4 {
    terms: Vec<([u32; 4], f64)>,
}

impl Poly4 {
    pub fn new(terms: impl IntoIterator<Item = ([u32; 4], f64)>) -> Self {
        let mut map: BTreeMap<[u32; 4], f64> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert(0.0) += c;
        }
        Self { terms: map.into_iter().filter(|(_, c)| *c != 0.0).collect() }
    }

    /// The coordinate function with index `i` in `(x1, x2, y1, y2)` order.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::new([(e, 1.0)])
    }

    pub fn constant(c: f64) -> Self {
        Self::new([([0; 4], c)])
    }

    pub fn terms(&self) -> &[([u32; 4], f64)] {
        &self.terms
    }

    pub fn eval(&self, p: &[f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * (0..4).map(|i| p[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Poly4 {
        Poly4::new(self.terms.iter().filter_map(|(e, c)| {
            if e[var] == 0 {
                return None;
            }
            let mut f = *e;
            f[var] -= 1;
            Some((f, c * e[var] as f64))
        }))
    }

    pub fn add(&self, other: &Poly4) -> Poly4 {
        Poly4::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn sub(&self, other: &Poly4) -> Poly4 {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly4 {
        Poly4::new(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    pub fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = Vec::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.push((std::array::from_fn(|i| e1[i] + e2[i]), c1 * c2));
            }
        }
        Poly4::new(out)
    }

    pub fn pow(&self, n: u32) -> Poly4 {
        (0..n).fold(Poly4::constant(1.0), |acc, _| acc.mul(self))
    }
}
