use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::winding::angle_increment;
use super::SymplecticPath;
use crate::error::{Error, Result};

const FAN: usize = 720;
const EPSILON: f64 = 1e-9;
const FLAG_WINDOW: f64 = 1e-6;

/// `J = [Δ_min, Δ_max]` over all directions, and the transverse rotation
/// number, all in turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationData {
    pub j_min: f64,
    pub j_max: f64,
    pub rotation_number: f64,
}

impl RotationData {
    pub fn length(&self) -> f64 {
        self.j_max - self.j_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricIndex {
    pub rotation: RotationData,
    pub index: i64,
    /// An integer lies within `1e-6` of an endpoint of `J`.
    pub flagged: bool,
}

fn delta(path: &SymplecticPath, alpha: f64) -> Result<f64> {
    let v = Vector2::new(alpha.cos(), alpha.sin());
    angle_increment(path.matrices.iter().map(|m| {
        let w = m * v;
        Complex64::new(w[0], w[1])
    }))
}

/// Golden-section search for an extremum of `Δ` on `[a, b]`; `sign = 1`
/// minimizes, `-1` maximizes.
fn refine(path: &SymplecticPath, a: f64, b: f64, sign: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (sign * delta(path, c)?, sign * delta(path, d)?);
    for _ in 0..60 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = sign * delta(path, c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = sign * delta(path, d)?;
        }
    }
    Ok(sign * fc.min(fd))
}

/// `[Δ_min, Δ_max]` from a fan of directions with golden refinement of both
/// extremes. `Δ(v) = Δ(−v)`, so directions cover `[0, π)`.
pub(crate) fn rotation_interval(path: &SymplecticPath) -> Result<(f64, f64)> {
    let step = PI / FAN as f64;
    let values: Vec<f64> = (0..FAN).map(|j| delta(path, j as f64 * step)).collect::<Result<_>>()?;
    let (mut imin, mut imax) = (0, 0);
    for (j, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = j;
        }
        if v > values[imax] {
            imax = j;
        }
    }
    let around = |j: usize| (j as f64 * step - step, j as f64 * step + step);
    let (a, b) = around(imin);
    let lo = refine(path, a, b, 1.0)?.min(values[imin]);
    let (a, b) = around(imax);
    let hi = refine(path, a, b, -1.0)?.max(values[imax]);
    Ok((lo, hi))
}

fn eigenvalues(m: &Matrix2<f64>) -> [Complex64; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

/// Rotation number from the end matrix and the interval `J` it lies in.
///
/// For elliptic ends the fractional part is read off the rotation angle of
/// `φ(1)`, and `J` (length < ½) selects the integer part; for hyperbolic ends
/// it is `Δ` of an eigenvector, an integer or half-integer.
fn exact_rotation(path: &SymplecticPath, j_min: f64, j_max: f64) -> Result<f64> {
    let m = path.end();
    let tr = m.trace();
    if tr.abs() < 2.0 {
        let theta = (tr / 2.0).acos();
        let alpha = if m[(1, 0)] > 0.0 { theta / TAU } else { 1.0 - theta / TAU };
        let mid = 0.5 * (j_min + j_max);
        return Ok(alpha + (mid - alpha).round());
    }
    let lambda = eigenvalues(&m)[0].re;
    let (a, b) = (m[(0, 0)] - lambda, m[(0, 1)]);
    let v = if a.abs() + b.abs() > 1e-300 {
        Vector2::new(-b, a)
    } else {
        Vector2::new(m[(1, 1)] - lambda, -m[(1, 0)])
    };
    let d = delta(path, v[1].atan2(v[0]))?;
    Ok(if lambda > 0.0 { d.round() } else { (d - 0.5).round() + 0.5 })
}

/// `μ_CZ` from the rotation interval: `2k` if an integer `k` lies in
/// `J − ε`, else `2k − 1` for `J ⊂ (k−1, k)`.
pub fn geometric_index(path: &SymplecticPath) -> Result<GeometricIndex> {
    let end = path.end();
    let gap = eigenvalues(&end).iter().map(|l| (l - 1.0).norm()).fold(f64::INFINITY, f64::min);
    if gap < 1e-6 {
        return Err(Error::Degenerate(format!("φ(1) has an eigenvalue within {gap:e} of 1")));
    }
    let (j_min, j_max) = rotation_interval(path)?;
    let (a, b) = (j_min - EPSILON, j_max - EPSILON);
    let k_in = b.floor();
    let index = if k_in > a { 2 * k_in as i64 } else { 2 * b.ceil() as i64 - 1 };
    let near = |x: f64| (x - x.round()).abs() < FLAG_WINDOW;
    let rotation_number = exact_rotation(path, j_min, j_max)?;
    Ok(GeometricIndex {
        rotation: RotationData { j_min, j_max, rotation_number },
        index,
        flagged: near(j_min) || near(j_max),
    })
}

/// `ρ(Pⁿ)/n` for the `n`-fold iterate of a one-period path.
pub fn rotation_number(path: &SymplecticPath, n_periods: usize) -> Result<f64> {
    let iterated;
    let p = if n_periods == 1 {
        path
    } else {
        iterated = path.iterate(n_periods)?;
        &iterated
    };
    let (lo, hi) = rotation_interval(p)?;
    Ok(exact_rotation(p, lo, hi)? / n_periods as f64)
}
