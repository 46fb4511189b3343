//! Closed-form data for the ellipsoid `|z1|²/r1² + |z2|²/r2² = 1` and its
//! quotients by `g_{p,1}`.
//!
//! Upstairs values refer to S³-side orbits, downstairs values to `L(p,1)`.
//! Both are stored under explicit names; nothing else in the crate divides by
//! `p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cz::{iterate_index, PathKind};
use crate::error::{Error, Result};
use crate::geometry::PhasePoint;

/// Largest denominator searched for a rationality witness of `r2²/r1²`.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipsoidOrbit {
    /// `z2 = 0`.
    P1,
    /// `z1 = 0`.
    P2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub orbit: EllipsoidOrbit,
    pub radius: f64,
    pub period_upstairs: f64,
    pub period_downstairs: f64,
    /// Transverse rotation number of the simple upstairs orbit in the disk class.
    pub rotation_disk: f64,
    /// `μ_CZ` of the simple upstairs orbit in the disk class, equal to that of
    /// the `p`-th iterate of the simple downstairs orbit.
    pub mu_upstairs: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidData {
    pub r1: f64,
    pub r2: f64,
    pub p: i64,
    /// `r2²/r1²`.
    pub ratio: f64,
    /// The integer with `r2²/r1² ∈ (k−1, k)`.
    pub k: Option<i64>,
    pub p1: OrbitRecord,
    pub p2: OrbitRecord,
    pub mu_p1_p: Option<i64>,
    pub mu_p2_p: Option<i64>,
    /// `μ(P₁ᵖ)` in the `Z_p`-equivariant class `2p − 1`.
    pub mu_p1_equivariant: i64,
    /// Downstairs rational self-linking of `P₁` and `P₂`.
    pub self_linking_downstairs: f64,
    /// `(num, den)` with `|r2²/r1² − num/den| ≤ 1e-12·max(1, r2²/r1²)`.
    pub rational_witness: Option<(i64, i64)>,
    pub warnings: Vec<String>,
}

impl EllipsoidData {
    /// Point of `orbit` after Reeb time `t` from `(r1, 0)` or `(0, r2)`.
    pub fn orbit_point(&self, orbit: EllipsoidOrbit, t: f64) -> PhasePoint {
        match orbit {
            EllipsoidOrbit::P1 => {
                let r = self.r1;
                PhasePoint::from_z(Complex64::from_polar(r, -2.0 * t / (r * r)), Complex64::new(0.0, 0.0))
            }
            EllipsoidOrbit::P2 => {
                let r = self.r2;
                PhasePoint::from_z(Complex64::new(0.0, 0.0), Complex64::from_polar(r, -2.0 * t / (r * r)))
            }
        }
    }

    /// `n` points uniformly spaced over one upstairs period.
    pub fn sample(&self, orbit: EllipsoidOrbit, n: usize) -> Vec<PhasePoint> {
        let period = match orbit {
            EllipsoidOrbit::P1 => self.p1.period_upstairs,
            EllipsoidOrbit::P2 => self.p2.period_upstairs,
        };
        (0..n).map(|i| self.orbit_point(orbit, period * i as f64 / n as f64)).collect()
    }
}

/// Best rational approximation with denominator at most `max_den` by
/// continued fractions.
pub fn rational_witness(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a.checked_mul(h1)?.checked_add(h0)?, a.checked_mul(k1)?.checked_add(k0)?);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = y - a as f64;
        if frac == 0.0 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

pub fn oracle(r1: f64, r2: f64, p: i64) -> Result<EllipsoidData> {
    if !(r1 > 0.0 && r1.is_finite() && r2.is_finite()) || r1 > r2 {
        return Err(Error::InvalidInput(format!("need 0 < r1 ≤ r2, got ({r1}, {r2})")));
    }
    if p < 2 {
        return Err(Error::InvalidInput(format!("p must be ≥ 2, got {p}")));
    }
    let ratio = r2 * r2 / (r1 * r1);
    let mut warnings = Vec::new();
    let witness = rational_witness(ratio, MAX_DENOMINATOR, 1e-12 * ratio.max(1.0));
    if let Some((n, d)) = witness {
        warnings.push(format!("r2²/r1² = {ratio} is within rounding of {n}/{d}: the ellipsoid is degenerate"));
    }
    let record = |orbit, r: f64, other: f64| {
        let rho = 1.0 + r * r / (other * other);
        OrbitRecord {
            orbit,
            radius: r,
            period_upstairs: PI * r * r,
            period_downstairs: PI * r * r / p as f64,
            rotation_disk: rho,
            mu_upstairs: iterate_index(rho, PathKind::Elliptic, 1).ok(),
        }
    };
    let p1 = record(EllipsoidOrbit::P1, r1, r2);
    let p2 = record(EllipsoidOrbit::P2, r2, r1);
    let k = ((ratio - ratio.round()).abs() > 1e-12).then(|| ratio.ceil() as i64);
    Ok(EllipsoidData {
        r1,
        r2,
        p,
        ratio,
        k,
        mu_p1_p: p1.mu_upstairs,
        mu_p2_p: k.map(|k| 2 * k + 1),
        mu_p1_equivariant: 2 * p - 1,
        self_linking_downstairs: -1.0 / p as f64,
        p1,
        p2,
        rational_witness: witness,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_root_two() {
        let d = oracle(1.0, 2f64.powf(0.25), 3).unwrap();
        assert!((d.p1.period_upstairs - PI).abs() < 1e-15);
        assert!((d.p2.period_upstairs - PI * 2f64.sqrt()).abs() < 1e-14);
        assert!((d.p1.period_downstairs - PI / 3.0).abs() < 1e-15);
        assert_eq!(d.k, Some(2));
        assert_eq!(d.mu_p1_p, Some(3));
        assert_eq!(d.mu_p2_p, Some(5));
        assert_eq!(d.p2.mu_upstairs, Some(5));
        assert!((d.p1.rotation_disk - (1.0 + 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn six_digit_radius_is_not_flagged() {
        let d = oracle(1.0, 1.189207, 3).unwrap();
        assert_eq!(d.mu_p1_p, Some(3));
        assert!(d.rational_witness.is_none());
    }

    #[test]
    fn resonant_sphere_warns() {
        let d = oracle(1.0, 1.0, 4).unwrap();
        assert_eq!(d.rational_witness, Some((1, 1)));
        assert_eq!(d.warnings.len(), 1);
        assert_eq!(d.k, None);
        let d = oracle(2.0, 3.0, 2).unwrap();
        assert_eq!(d.rational_witness, Some((9, 4)));
        assert_eq!(d.k, Some(3));
    }

    #[test]
    fn invalid_inputs() {
        assert!(oracle(2.0, 1.0, 3).is_err());
        assert!(oracle(1.0, 2.0, 1).is_err());
        assert!(oracle(0.0, 2.0, 3).is_err());
    }

    #[test]
    fn k_matches_index_law() {
        for r2 in [1.1, 1.5, 1.9, 2.3, 3.7] {
            let d = oracle(1.0, r2, 2).unwrap();
            assert_eq!(d.mu_p2_p, d.p2.mu_upstairs);
        }
    }

    #[test]
    fn orbit_samples_lie_on_the_ellipsoid() {
        let d = oracle(1.0, 1.3, 5).unwrap();
        for q in d.sample(EllipsoidOrbit::P2, 50) {
            assert!((q.z2().norm() - 1.3).abs() < 1e-15 && q.z1().norm() == 0.0);
        }
        let end = d.orbit_point(EllipsoidOrbit::P1, d.p1.period_upstairs);
        assert!(end.dist(d.orbit_point(EllipsoidOrbit::P1, 0.0)) < 1e-14);
    }
}
