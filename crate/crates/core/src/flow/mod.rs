//! Trajectories of Hamiltonian and Reeb flows, their linearizations, and
//! periodic orbits.

mod orbit;
mod variational;

pub use orbit::{
    check_zp_symmetry, find_periodic_orbit, projection_is_simple, OrbitResiduals, PeriodicOrbit, ScanParams,
    reversibility_residual, SymmetryAction, SymmetrySpec, SymmetryTag,
};
pub(crate) use variational::normalize_in_xi;
pub use variational::{variational_path, Frame, GlobalFrame};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, TangentVector};
use crate::hamiltonian::{HamiltonianModel, STARSHAPED_THRESHOLD};
use crate::ode::{self, DenseStep, OdeSystem, Options};

/// Time parametrization of the flow on a level set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeParam {
    #[default]
    Hamiltonian,
    /// The Reeb flow of `λ₀`, i.e. `X_H / λ₀(X_H)`.
    Reeb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub param: TimeParam,
    /// Pull each accepted state back onto the initial level set.
    pub project_energy: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-12, param: TimeParam::Hamiltonian, project_energy: false }
    }
}

/// Accepted integrator states with the dense-output interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    /// Order of the continuous extension between accepted steps.
    pub interpolant_order: u32,
    pub initial_energy: f64,
    pub max_energy_drift: f64,
    /// `100 · tol · t_final · max(1, |H(p0)|)`.
    pub drift_bound: f64,
    steps: Vec<DenseStep>,
}

impl Trajectory {
    pub fn sample(&self, t: f64) -> PhasePoint {
        let i = self.steps.partition_point(|s| s.t1() < t).min(self.steps.len().saturating_sub(1));
        match self.steps.get(i) {
            Some(step) => {
                let y = step.eval(t);
                PhasePoint::new(y[0], y[1], y[2], y[3])
            }
            None => self.states[0],
        }
    }

    pub fn end(&self) -> PhasePoint {
        *self.states.last().unwrap()
    }
}

pub(crate) struct FlowSystem<'m> {
    pub model: &'m HamiltonianModel,
    pub param: TimeParam,
    pub energy: f64,
    /// Also integrate the Reeb action `∫ λ₀(X) dt` as a fifth component.
    pub with_action: bool,
    /// Also integrate the 4×4 linearization (row-major) after the state.
    pub with_variational: bool,
}

impl FlowSystem<'_> {
    fn field(&self, p: PhasePoint) -> (TangentVector, f64) {
        let xh = self.model.hamiltonian_field(p);
        let g = crate::geometry::liouville(p, xh);
        match self.param {
            TimeParam::Hamiltonian => (xh, g),
            TimeParam::Reeb => {
                let g = if g.abs() < STARSHAPED_THRESHOLD { f64::NAN } else { g };
                (xh * (1.0 / g), 1.0)
            }
        }
    }

    fn jacobian(&self, p: PhasePoint) -> Matrix4<f64> {
        match self.param {
            TimeParam::Hamiltonian => self.model.hamiltonian_jacobian(p),
            TimeParam::Reeb => self.model.reeb_jacobian(p).unwrap_or_else(|_| Matrix4::from_element(f64::NAN)),
        }
    }

    fn action_index(&self) -> usize {
        if self.with_variational {
            20
        } else {
            4
        }
    }
}

impl OdeSystem for FlowSystem<'_> {
    fn dim(&self) -> usize {
        4 + if self.with_variational { 16 } else { 0 } + usize::from(self.with_action)
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = PhasePoint::new(y[0], y[1], y[2], y[3]);
        let (x, action_rate) = self.field(p);
        dy[..4].copy_from_slice(&x.0);
        if self.with_variational {
            let a = self.jacobian(p);
            for i in 0..4 {
                for j in 0..4 {
                    let mut s = 0.0;
                    for k in 0..4 {
                        s += a[(i, k)] * y[4 + 4 * k + j];
                    }
                    dy[4 + 4 * i + j] = s;
                }
            }
        }
        if self.with_action {
            dy[self.action_index()] = action_rate;
        }
    }

    fn project(&self, y: &mut [f64]) {
        let mut p = PhasePoint::new(y[0], y[1], y[2], y[3]);
        for _ in 0..3 {
            let (h, g) = self.model.evaluate(p);
            let g2 = g.dot(g);
            if g2 == 0.0 || (h - self.energy).abs() < 1e-15 * self.energy.abs().max(1.0) {
                break;
            }
            p = p + g * (-(h - self.energy) / g2);
        }
        y[..4].copy_from_slice(&p.to_array());
    }
}

pub(crate) fn flow_options(tol: f64) -> Options {
    Options { rtol: tol, atol: tol, ..Options::default() }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-4).contains(&tol) {
        return Err(Error::InvalidInput(format!("tolerance {tol:e} outside [1e-14, 1e-4]")));
    }
    Ok(())
}

/// Integrates the Hamiltonian flow from `p0` for time `t_final`.
pub fn integrate(model: &HamiltonianModel, p0: PhasePoint, t_final: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(model, p0, t_final, &FlowOptions { tol, ..FlowOptions::default() })
}

pub fn integrate_with(model: &HamiltonianModel, p0: PhasePoint, t_final: f64, opts: &FlowOptions) -> Result<Trajectory> {
    check_tol(opts.tol)?;
    let energy = model.value(p0);
    let sys = FlowSystem { model, param: opts.param, energy, with_action: false, with_variational: false };
    let ode_opts = Options { dense: true, project: opts.project_energy, ..flow_options(opts.tol) };
    let sol = ode::integrate(&sys, 0.0, &p0.to_array(), t_final, &ode_opts)?;
    let states: Vec<PhasePoint> = sol.ys.iter().map(|y| PhasePoint::new(y[0], y[1], y[2], y[3])).collect();
    let max_energy_drift = states.iter().map(|p| (model.value(*p) - energy).abs()).fold(0.0, f64::max);
    Ok(Trajectory {
        times: sol.ts,
        states,
        interpolant_order: 4,
        initial_energy: energy,
        max_energy_drift,
        drift_bound: 100.0 * opts.tol * t_final.abs() * energy.abs().max(1.0),
        steps: sol.steps,
    })
}

/// State, linearization `Φ(t)` and accumulated action at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct VariationalSample {
    pub t: f64,
    pub p: PhasePoint,
    pub phi: Matrix4<f64>,
    pub action: f64,
}

/// Integrates state, linearization and action together and samples them at
/// `times` (increasing, starting at 0).
pub(crate) fn integrate_variational(
    model: &HamiltonianModel,
    p0: PhasePoint,
    param: TimeParam,
    times: &[f64],
    tol: f64,
) -> Result<Vec<VariationalSample>> {
    let energy = model.value(p0);
    let sys = FlowSystem { model, param, energy, with_action: true, with_variational: true };
    let mut y0 = vec![0.0; 21];
    y0[..4].copy_from_slice(&p0.to_array());
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0;
    }
    let t_end = *times.last().unwrap_or(&0.0);
    let opts = Options { dense: true, ..flow_options(tol) };
    let sol = ode::integrate(&sys, 0.0, &y0, t_end, &opts)?;
    Ok(times
        .iter()
        .map(|&t| {
            let y = if t == 0.0 { y0.clone() } else { sol.sample(t).unwrap_or_else(|| y0.clone()) };
            VariationalSample {
                t,
                p: PhasePoint::new(y[0], y[1], y[2], y[3]),
                phi: Matrix4::from_row_slice(&y[4..20]),
                action: y[20],
            }
        })
        .collect())
}

/// Endpoint state, linearization and action at a single time, integrated
/// without interpolation.
pub(crate) fn flow_map(
    model: &HamiltonianModel,
    p0: PhasePoint,
    t: f64,
    tol: f64,
) -> Result<(PhasePoint, Matrix4<f64>, f64)> {
    let energy = model.value(p0);
    let sys = FlowSystem { model, param: TimeParam::Hamiltonian, energy, with_action: true, with_variational: true };
    let mut y0 = vec![0.0; 21];
    y0[..4].copy_from_slice(&p0.to_array());
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0;
    }
    let sol = ode::integrate(&sys, 0.0, &y0, t, &flow_options(tol))?;
    let y = sol.last().1;
    Ok((PhasePoint::new(y[0], y[1], y[2], y[3]), Matrix4::from_row_slice(&y[4..20]), y[20]))
}
