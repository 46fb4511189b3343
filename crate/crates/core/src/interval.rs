//! Closed intervals with outward rounding.
//!
//! Each operation computes the round-to-nearest result and then steps one ulp
//! outward, which encloses the exact result of the operation on the endpoint
//! values.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x == 0.0 {
        // next_down(0) is a subnormal; keep exact zeros exact when they come
        // from exact operands, callers only reach here with exact zero products.
        -f64::from_bits(1)
    } else {
        x.next_down()
    }
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        x.next_up()
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Smallest interval with f64 endpoints containing `q`.
    pub fn enclose_rational(q: &BigRational) -> Self {
        let x = q.to_f64().unwrap_or(f64::NAN);
        match BigRational::from_f64(x) {
            Some(back) if &back == q => Self::point(x),
            Some(back) if &back < q => Self::new(x, x.next_up()),
            Some(_) => Self::new(x.next_down(), x),
            None => Self::new(f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// `self^n` with the tight even-power rule when the interval straddles 0.
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::point(1.0),
            1 => self,
            _ => {
                if n % 2 == 0 && self.contains_zero() {
                    let m = power_up(self.mag(), n);
                    Interval::new(0.0, m)
                } else if n % 2 == 0 && self.hi < 0.0 {
                    Interval::new(power_down(-self.hi, n), power_up(-self.lo, n))
                } else if n % 2 == 0 {
                    Interval::new(power_down(self.lo, n), power_up(self.hi, n))
                } else {
                    // Odd powers are monotone.
                    let lo = if self.lo >= 0.0 {
                        power_down(self.lo, n)
                    } else {
                        -power_up(-self.lo, n)
                    };
                    let hi = if self.hi >= 0.0 {
                        power_up(self.hi, n)
                    } else {
                        -power_down(-self.hi, n)
                    };
                    Interval::new(lo, hi)
                }
            }
        }
    }
}

/// Upper bound of `x^n` for `x ≥ 0` by repeated rounded-up products.
fn power_up(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_up(acc, x);
    }
    acc
}

fn power_down(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_down(acc, x).max(0.0);
    }
    acc
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        0.0
    } else {
        up(p)
    }
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        0.0
    } else {
        down(p)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        let lo = self.lo + o.lo;
        let hi = self.hi + o.hi;
        Interval::new(exact_or(lo, down, self.lo, o.lo), exact_or(hi, up, self.hi, o.hi))
    }
}

/// Sums with an exact zero operand are exact; everything else is widened.
fn exact_or(s: f64, widen: fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        s
    } else {
        widen(s)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        self + (-o)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let cands = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = cands.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, s: f64) -> Interval {
        self * Interval::point(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn exact(x: f64) -> BigRational {
        BigRational::from_f64(x).unwrap()
    }

    fn encloses(iv: &Interval, q: &BigRational) -> bool {
        exact(iv.lo) <= *q && *q <= exact(iv.hi)
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let iv = Interval::enclose_rational(&third);
        assert!(encloses(&iv, &third));
        assert_eq!(iv.hi.next_down(), iv.lo);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(Interval::enclose_rational(&half), Interval::point(0.5));
    }

    #[test]
    fn even_power_of_straddling_interval_starts_at_zero() {
        let iv = Interval::new(-0.5, 0.25).powi(2);
        assert_eq!(iv.lo, 0.0);
        assert!(iv.hi >= 0.25);
        let iv = Interval::new(-2.0, -1.0).powi(2);
        assert!(iv.lo <= 1.0 && iv.hi >= 4.0 && iv.lo > 0.9);
    }

    proptest! {
        #[test]
        fn operations_enclose_exact_results(
            a in -1e3f64..1e3, w1 in 0.0f64..1.0,
            b in -1e3f64..1e3, w2 in 0.0f64..1.0,
            s in 0.0f64..1.0, t in 0.0f64..1.0,
            n in 0u32..7,
        ) {
            let x = Interval::new(a, a + w1);
            let y = Interval::new(b, b + w2);
            let px = exact(a) + (exact(a + w1) - exact(a)) * exact(s);
            let py = exact(b) + (exact(b + w2) - exact(b)) * exact(t);
            prop_assert!(encloses(&(x + y), &(&px + &py)));
            prop_assert!(encloses(&(x - y), &(&px - &py)));
            prop_assert!(encloses(&(x * y), &(&px * &py)));
            let mut pow = BigRational::from_integer(BigInt::from(1));
            for _ in 0..n {
                pow *= &px;
            }
            prop_assert!(encloses(&x.powi(n), &pow));
        }
    }
}
