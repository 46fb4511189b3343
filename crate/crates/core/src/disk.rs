//! Spanning disks of closed orbits and the trivialization class `β_disk`
//! they induce on `ξ`.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{normalize_in_xi, Frame, PeriodicOrbit};
use crate::geometry::{symplectic_form, PhasePoint, TangentVector};
use crate::hamiltonian::HamiltonianModel;

type DiskMap = dyn Fn(Complex64) -> PhasePoint + Send + Sync;

/// A map `u: D → S_E` from the closed unit disk, with the grid used to
/// sample it.
#[derive(Clone)]
pub struct SpanningDisk {
    pub label: String,
    map: Arc<DiskMap>,
    pub radial: usize,
    pub angular: usize,
}

impl fmt::Debug for SpanningDisk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpanningDisk")
            .field("label", &self.label)
            .field("radial", &self.radial)
            .field("angular", &self.angular)
            .finish()
    }
}

/// `√(1 − |z|²)`, exactly 0 when `|z| = 1` up to rounding.
fn cap(z: Complex64) -> f64 {
    let s = 1.0 - z.norm_sqr();
    if s < 4.0 * f64::EPSILON {
        0.0
    } else {
        s.sqrt()
    }
}

impl SpanningDisk {
    pub fn new(
        label: impl Into<String>,
        map: impl Fn(Complex64) -> PhasePoint + Send + Sync + 'static,
        radial: usize,
        angular: usize,
    ) -> Result<Self> {
        if radial < 8 || angular < 16 {
            return Err(Error::InvalidInput(format!("disk grid {radial}×{angular} too coarse")));
        }
        let disk = Self { label: label.into(), map: Arc::new(map), radial, angular };
        disk.check_immersed()?;
        Ok(disk)
    }

    /// `z ↦ (r1 z, r2 √(1 − |z|²))`, bounded by the `z1`-circle.
    pub fn ellipsoid_p1(r1: f64, r2: f64, radial: usize, angular: usize) -> Result<Self> {
        Self::new(
            "ellipsoid-p1",
            move |z: Complex64| {
                let w = cap(z);
                PhasePoint::from_z(z * r1, Complex64::new(r2 * w, 0.0))
            },
            radial,
            angular,
        )
    }

    /// `z ↦ (r1 √(1 − |z|²), r2 z)`, bounded by the `z2`-circle.
    pub fn ellipsoid_p2(r1: f64, r2: f64, radial: usize, angular: usize) -> Result<Self> {
        Self::new(
            "ellipsoid-p2",
            move |z: Complex64| {
                let w = cap(z);
                PhasePoint::from_z(Complex64::new(r1 * w, 0.0), z * r2)
            },
            radial,
            angular,
        )
    }

    pub fn point(&self, z: Complex64) -> PhasePoint {
        (self.map)(z)
    }

    pub fn boundary(&self, theta: f64) -> PhasePoint {
        self.point(Complex64::from_polar(1.0, theta))
    }

    /// Boundary samples on the angular grid, closed (last = first).
    pub fn boundary_curve(&self) -> Vec<PhasePoint> {
        (0..=self.angular).map(|j| self.boundary(TAU * (j % self.angular) as f64 / self.angular as f64)).collect()
    }

    /// Rank-2 Jacobian at every interior grid point.
    pub fn check_immersed(&self) -> Result<()> {
        let h = 1e-6;
        for i in 1..self.radial {
            let r = i as f64 / self.radial as f64;
            for j in 0..self.angular {
                let z = Complex64::from_polar(r, TAU * j as f64 / self.angular as f64);
                let dx = (self.point(z + h) - self.point(z - h)) * (0.5 / h);
                let i_h = Complex64::new(0.0, h);
                let dy = (self.point(z + i_h) - self.point(z - i_h)) * (0.5 / h);
                let gram = dx.dot(dx) * dy.dot(dy) - dx.dot(dy).powi(2);
                if !(gram > 1e-10 * dx.dot(dx) * dy.dot(dy)) {
                    return Err(Error::Degenerate(format!("disk not immersed at z = {z}")));
                }
            }
        }
        Ok(())
    }

    /// Boundary angle closest to `p` and the distance attained.
    pub fn locate(&self, p: PhasePoint) -> (f64, f64) {
        let n = self.angular;
        let step = TAU / n as f64;
        let (mut best_j, mut best) = (0, f64::INFINITY);
        for j in 0..n {
            let d = self.boundary(j as f64 * step).dist(p);
            if d < best {
                best = d;
                best_j = j;
            }
        }
        let f = |t: f64| self.boundary(t).dist(p);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best_j as f64 * step - step, best_j as f64 * step + step);
        let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..70 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = f(d);
            }
        }
        let (theta, dist) = if fc < fd { (c, fc) } else { (d, fd) };
        if dist < best {
            (theta.rem_euclid(TAU), dist)
        } else {
            (best_j as f64 * step, best)
        }
    }

    /// `max_k min_θ |u(e^{iθ}) − curve_k|`.
    pub fn boundary_mismatch(&self, curve: impl IntoIterator<Item = PhasePoint>) -> f64 {
        curve.into_iter().map(|p| self.locate(p).1).fold(0.0, f64::max)
    }
}

/// `β_disk`: a frame of `ξ` at the centre transported along radial spokes,
/// re-projected onto `ξ` and renormalized at each step.
#[derive(Debug, Clone)]
pub struct DiskFrame {
    model: HamiltonianModel,
    disk: SpanningDisk,
    centre: (TangentVector, TangentVector),
}

impl DiskFrame {
    pub fn new(model: &HamiltonianModel, disk: &SpanningDisk) -> Result<Self> {
        let c = disk.point(Complex64::new(0.0, 0.0));
        let basis: Vec<TangentVector> = (0..4).map(TangentVector::basis).collect();
        let mut best = (0, 1, 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                if let Ok((a, b)) = normalize_in_xi(model, c, basis[i], basis[j]) {
                    let cond = a.norm() * b.norm();
                    if best.2 == 0.0 || cond < best.2 {
                        best = (i, j, cond);
                    }
                } else if let Ok((a, b)) = normalize_in_xi(model, c, basis[j], basis[i]) {
                    let cond = a.norm() * b.norm();
                    if best.2 == 0.0 || cond < best.2 {
                        best = (j, i, cond);
                    }
                }
            }
        }
        if best.2 == 0.0 {
            return Err(Error::DegenerateFrame { condition: f64::INFINITY });
        }
        let centre = normalize_in_xi(model, c, basis[best.0], basis[best.1])?;
        Ok(Self { model: model.clone(), disk: disk.clone(), centre })
    }

    pub fn disk(&self) -> &SpanningDisk {
        &self.disk
    }

    /// Frame at the boundary point `u(e^{iθ})`.
    pub fn at_angle(&self, theta: f64) -> Result<(TangentVector, TangentVector)> {
        let (mut e1, mut e2) = self.centre;
        for k in 1..=self.disk.radial {
            let r = k as f64 / self.disk.radial as f64;
            let q = self.disk.point(Complex64::from_polar(r, theta));
            (e1, e2) = normalize_in_xi(&self.model, q, e1, e2)?;
        }
        Ok((e1, e2))
    }

    pub fn check_spans(&self, orbit: &PeriodicOrbit) -> Result<()> {
        let mismatch = self.disk.boundary_mismatch(orbit.points());
        if mismatch > 1e-6 {
            return Err(Error::DiskNotSpanning { mismatch });
        }
        Ok(())
    }
}

impl Frame for DiskFrame {
    fn label(&self) -> String {
        format!("beta-disk:{}", self.disk.label)
    }

    fn raw(&self, _model: &HamiltonianModel, p: PhasePoint) -> Result<(TangentVector, TangentVector)> {
        let (theta, dist) = self.disk.locate(p);
        if dist > 1e-6 {
            return Err(Error::DiskNotSpanning { mismatch: dist });
        }
        let (e1, e2) = self.at_angle(theta)?;
        debug_assert!(symplectic_form(e1, e2) > 0.0);
        Ok((e1, e2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::liouville;

    #[test]
    fn ellipsoid_disks_lie_on_the_level_set() {
        let (r1, r2) = (1.0, 2f64.powf(0.25));
        let m = HamiltonianModel::ellipsoid(r1, r2).unwrap();
        for disk in [SpanningDisk::ellipsoid_p1(r1, r2, 64, 128).unwrap(), SpanningDisk::ellipsoid_p2(r1, r2, 64, 128).unwrap()] {
            for k in 0..50 {
                let z = Complex64::from_polar(k as f64 / 50.0, 0.37 * k as f64);
                assert!((m.value(disk.point(z)) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_lookup() {
        let disk = SpanningDisk::ellipsoid_p1(1.0, 1.5, 32, 64).unwrap();
        let (theta, d) = disk.locate(disk.boundary(2.0));
        assert!((theta - 2.0).abs() < 1e-7 && d < 1e-12);
        let (_, d) = disk.locate(PhasePoint::new(0.0, 1.5, 0.0, 0.0));
        assert!(d > 1.0);
    }

    #[test]
    fn transported_frame_spans_xi() {
        let m = HamiltonianModel::ellipsoid(1.0, 1.3).unwrap();
        let disk = SpanningDisk::ellipsoid_p1(1.0, 1.3, 64, 128).unwrap();
        let frame = DiskFrame::new(&m, &disk).unwrap();
        for k in 0..12 {
            let theta = TAU * k as f64 / 12.0;
            let p = disk.boundary(theta);
            let (e1, e2) = frame.at_angle(theta).unwrap();
            assert!((symplectic_form(e1, e2) - 1.0).abs() < 1e-12);
            for e in [e1, e2] {
                assert!(liouville(p, e).abs() < 1e-12);
                assert!(m.gradient(p).dot(e).abs() < 1e-12);
            }
        }
        // Continuity across θ = 0.
        let (a, _) = frame.at_angle(1e-9).unwrap();
        let (b, _) = frame.at_angle(TAU - 1e-9).unwrap();
        assert!((a - b).norm() < 1e-6);
    }

    #[test]
    fn degenerate_disk_rejected() {
        let err = SpanningDisk::new("flat", |z: Complex64| PhasePoint::new(z.re, 0.0, 0.0, 0.0), 8, 16).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
