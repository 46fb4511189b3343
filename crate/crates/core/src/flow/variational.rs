use nalgebra::{Matrix2, Vector4};

use super::{integrate_variational, PeriodicOrbit, TimeParam};
use crate::cz::SymplecticPath;
use crate::error::{Error, Result};
use crate::geometry::{liouville, liouville_covector, liouville_field, symplectic_form, xi_frame_unchecked, PhasePoint, TangentVector};
use crate::hamiltonian::HamiltonianModel;

/// A section of symplectic frames of `ξ = ker λ₀ ∩ T S_E` along an orbit.
pub trait Frame: Sync {
    fn label(&self) -> String;
    /// Two vectors spanning `ξ` at `p` with `ω₀(e1, e2) > 0`; any scale.
    fn raw(&self, model: &HamiltonianModel, p: PhasePoint) -> Result<(TangentVector, TangentVector)>;
}

/// `β_global`: the frame `f1 = (−z̄2, z̄1)`, `f2 = −i f1` of the round
/// sphere, pushed onto `T S_E` along the Liouville field.
#[derive(Debug, Clone, Copy, Default)]
pub struct GlobalFrame;

impl Frame for GlobalFrame {
    fn label(&self) -> String {
        "beta-global".into()
    }

    fn raw(&self, model: &HamiltonianModel, p: PhasePoint) -> Result<(TangentVector, TangentVector)> {
        let (f1, f2) = xi_frame_unchecked(p);
        let grad = model.gradient(p);
        let y = liouville_field(p);
        let dy = grad.dot(y);
        if dy.abs() < 1e-12 {
            return Err(Error::NotStarshaped { value: dy });
        }
        let push = |v: TangentVector| v - y * (grad.dot(v) / dy);
        Ok((push(f1), push(f2)))
    }
}

/// Orthogonal projection onto `ξ_p = (span{a_λ, ∇H})^⊥` followed by
/// rescaling to `ω₀(e1, e2) = 1`.
pub(crate) fn normalize_in_xi(
    model: &HamiltonianModel,
    p: PhasePoint,
    e1: TangentVector,
    e2: TangentVector,
) -> Result<(TangentVector, TangentVector)> {
    let a = liouville_covector(p);
    let g = model.gradient(p);
    let an = a * (1.0 / a.norm());
    let g_perp = g - an * an.dot(g);
    let gn = g_perp * (1.0 / g_perp.norm());
    let proj = |v: TangentVector| v - an * an.dot(v) - gn * gn.dot(v);
    let (e1, e2) = (proj(e1), proj(e2));
    let w = symplectic_form(e1, e2);
    let condition = e1.norm() * e2.norm() / w;
    if !(condition > 0.0 && condition < 1e6) {
        return Err(Error::DegenerateFrame { condition: condition.abs().max(1e6) });
    }
    let s = 1.0 / w.sqrt();
    Ok((e1 * s, e2 * s))
}

/// The linearized Reeb flow along `orbit` restricted to `ξ`, written in
/// `frame`, sampled uniformly in Reeb time and rescaled so one period is 1.
pub fn variational_path(
    model: &HamiltonianModel,
    orbit: &PeriodicOrbit,
    frame: &dyn Frame,
    n_periods: usize,
    samples_per_period: usize,
) -> Result<SymplecticPath> {
    if n_periods == 0 || samples_per_period < 8 {
        return Err(Error::InvalidInput("need n_periods ≥ 1 and ≥ 8 samples per period".into()));
    }
    let action = orbit.reeb_action;
    let total = n_periods * samples_per_period;
    let times: Vec<f64> = (0..=total).map(|i| action * i as f64 / samples_per_period as f64).collect();
    let p0 = orbit.initial_point();
    let samples = integrate_variational(model, p0, TimeParam::Reeb, &times, 1e-12)?;
    let (raw1, raw2) = frame.raw(model, p0)?;
    let (e1, e2) = normalize_in_xi(model, p0, raw1, raw2)?;
    let (e1v, e2v) = (e1.to_vector4(), e2.to_vector4());
    let mut matrices = Vec::with_capacity(samples.len());
    for s in &samples {
        let reeb = model.reeb_field(s.p)?;
        let pi = |v: Vector4<f64>| {
            let v = TangentVector::from_vector4(&v);
            v - reeb * liouville(s.p, v)
        };
        let (v1, v2) = (pi(s.phi * e1v), pi(s.phi * e2v));
        let (r1, r2) = frame.raw(model, s.p)?;
        let (f1, f2) = normalize_in_xi(model, s.p, r1, r2)?;
        let coords = |v: TangentVector| (symplectic_form(v, f2), symplectic_form(f1, v));
        let (a1, b1) = coords(v1);
        let (a2, b2) = coords(v2);
        matrices.push(Matrix2::new(a1, a2, b1, b2));
    }
    let grid: Vec<f64> = (0..=total).map(|i| i as f64 / samples_per_period as f64).collect();
    SymplecticPath::new(grid, matrices, frame.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{find_periodic_orbit, ScanParams, SymmetrySpec};

    #[test]
    fn global_frame_path_is_symplectic() {
        let m = HamiltonianModel::henon_heiles();
        let orbit = find_periodic_orbit(&m, 0.1, SymmetrySpec::Rotational, &ScanParams::default()).unwrap();
        let path = variational_path(&m, &orbit, &GlobalFrame, 2, 256).unwrap();
        assert_eq!(path.matrices[0], Matrix2::identity());
        for phi in &path.matrices {
            assert!((phi.determinant() - 1.0).abs() < 1e-6);
        }
        assert_eq!(*path.times.last().unwrap(), 2.0);
    }

    #[test]
    fn global_frame_lies_in_xi() {
        let m = HamiltonianModel::henon_heiles();
        let p = PhasePoint::new(0.1, -0.2, 0.3, 0.25);
        let (f1, f2) = GlobalFrame.raw(&m, p).unwrap();
        for f in [f1, f2] {
            assert!(liouville(p, f).abs() < 1e-15);
            assert!(m.gradient(p).dot(f).abs() < 1e-14);
        }
        assert!(symplectic_form(f1, f2) > 0.0);
    }
}
