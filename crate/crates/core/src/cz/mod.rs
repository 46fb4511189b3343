//! Conley–Zehnder indices of paths in `Sp(2)`.
//!
//! Two independent engines are provided: [`geometric_index`] reads the index
//! off the interval of total rotation angles, [`spectral_index`] off the
//! windings of eigenvectors of `L_S = −J₀ d/dt − S(t)`. Class changes and
//! iterate laws are exact integer arithmetic.

mod appendix;
mod geometric;
mod spectral;
mod winding;

pub use appendix::{appendix_frame, equivariance_residual, z_tilde};
pub use geometric::{geometric_index, rotation_number, GeometricIndex, RotationData};
pub use spectral::{path_to_symmetric_potential, spectral_index, SpectralResult, SymmetricPotential};
pub use winding::{angle_increment, winding, FrameSection};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::disk::{DiskFrame, SpanningDisk};
use crate::error::{Error, Result};
use crate::flow::{variational_path, PeriodicOrbit};
use crate::hamiltonian::HamiltonianModel;
use crate::ode::{self, OdeSystem, Options};

/// `J₀`, the counterclockwise quarter turn.
pub fn j0() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// A sampled path of symplectic 2×2 matrices starting at the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPath {
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix2<f64>>,
    /// Trivialization the matrices are written in.
    pub frame: String,
}

impl SymplecticPath {
    pub fn new(times: Vec<f64>, mut matrices: Vec<Matrix2<f64>>, frame: impl Into<String>) -> Result<Self> {
        if times.len() != matrices.len() || times.len() < 2 {
            return Err(Error::InvalidInput("path needs matching times and matrices, at least 2".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] != 0.0 {
            return Err(Error::InvalidInput("path times must start at 0 and increase".into()));
        }
        if (matrices[0] - Matrix2::identity()).amax() > 1e-8 {
            return Err(Error::InvalidInput("path must start at the identity".into()));
        }
        matrices[0] = Matrix2::identity();
        // `ad − bc` cancels to O(ε‖φ‖²), so large hyperbolic matrices are
        // measured relative to that.
        let defect = matrices
            .iter()
            .map(|m| (m.determinant() - 1.0).abs() / m.norm_squared().max(1.0))
            .fold(0.0, f64::max);
        if defect >= 1e-6 {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(Self { times, matrices, frame: frame.into() })
    }

    /// Samples `f` at `i/samples_per_unit` on `[0, duration]`.
    pub fn from_fn(f: impl Fn(f64) -> Matrix2<f64>, duration: f64, samples: usize) -> Result<Self> {
        let times: Vec<f64> = (0..=samples).map(|i| duration * i as f64 / samples as f64).collect();
        let matrices = times.iter().map(|&t| f(t)).collect();
        Self::new(times, matrices, "explicit")
    }

    /// `t ↦` rotation by `2πθt` on `[0, 1]`.
    pub fn rotation(theta: f64, samples: usize) -> Self {
        Self::from_fn(|t| rotation_matrix(std::f64::consts::TAU * theta * t), 1.0, samples).unwrap()
    }

    /// Solves `φ' = J₀ S(t) φ`, `φ(0) = I` on `[0, 1]`.
    pub fn from_potential(s: impl Fn(f64) -> Matrix2<f64> + Sync, samples: usize) -> Result<Self> {
        struct Linear<F>(F);
        impl<F: Fn(f64) -> Matrix2<f64>> OdeSystem for Linear<F> {
            fn dim(&self) -> usize {
                4
            }
            fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
                let phi = Matrix2::new(y[0], y[1], y[2], y[3]);
                let d = j0() * (self.0)(t) * phi;
                dy.copy_from_slice(&[d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]]);
            }
        }
        let sys = Linear(s);
        let opts = Options { dense: true, ..Options::with_tol(1e-13) };
        let sol = ode::integrate(&sys, 0.0, &[1.0, 0.0, 0.0, 1.0], 1.0, &opts)?;
        let times: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
        let matrices = times
            .iter()
            .map(|&t| {
                let y = if t == 0.0 { vec![1.0, 0.0, 0.0, 1.0] } else { sol.sample(t).unwrap() };
                Matrix2::new(y[0], y[1], y[2], y[3])
            })
            .collect();
        Self::new(times, matrices, "explicit")
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn end(&self) -> Matrix2<f64> {
        *self.matrices.last().unwrap()
    }

    /// The `n`-fold concatenation `φ(t + k) = φ(t) φ(1)^k`, time rescaled to
    /// keep one period of length `duration()`.
    pub fn iterate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("iterate count must be ≥ 1".into()));
        }
        let d = self.duration();
        let end = self.end();
        let mut times = Vec::with_capacity(n * (self.times.len() - 1) + 1);
        let mut matrices = Vec::with_capacity(times.capacity());
        let mut power = Matrix2::identity();
        for k in 0..n {
            let skip = usize::from(k > 0);
            for (t, m) in self.times.iter().zip(&self.matrices).skip(skip) {
                times.push(t + k as f64 * d);
                matrices.push(m * power);
            }
            power = end * power;
        }
        Self::new(times, matrices, self.frame.clone())
    }
}

pub fn rotation_matrix(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Homotopy class of trivializations, as an integer offset from a named base
/// class. `wind(β, β'') = wind(β, β') + wind(β', β'')`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivializationClass {
    pub base: String,
    pub offset: i64,
    pub label: String,
}

impl TrivializationClass {
    pub fn base(label: impl Into<String>) -> Self {
        let label = label.into();
        Self { base: label.clone(), offset: 0, label }
    }

    /// The class `w` turns away from `self`.
    pub fn shifted(&self, w: i64, label: impl Into<String>) -> Self {
        Self { base: self.base.clone(), offset: self.offset + w, label: label.into() }
    }

    /// `wind(self, other)`, defined when both share a base.
    pub fn wind_to(&self, other: &Self) -> Result<i64> {
        if self.base != other.base {
            return Err(Error::InvalidInput(format!("classes over different bases {} and {}", self.base, other.base)));
        }
        Ok(other.offset - self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Elliptic,
    Hyperbolic,
}

/// Index of the `n`-th iterate from the rotation number of the simple orbit.
pub fn iterate_index(rotation: f64, kind: PathKind, n: i64) -> Result<i64> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("iterate must be ≥ 1, got {n}")));
    }
    let nr = n as f64 * rotation;
    match kind {
        PathKind::Hyperbolic => {
            let twice = 2.0 * rotation;
            if (twice - twice.round()).abs() > 1e-9 {
                return Err(Error::Degenerate(format!("hyperbolic rotation number {rotation} is not a half-integer")));
            }
            Ok(n * twice.round() as i64)
        }
        PathKind::Elliptic => {
            if (nr - nr.round()).abs() < 1e-9 {
                return Err(Error::Degenerate(format!("{n}·ρ = {nr} is an integer")));
            }
            Ok(2 * nr.floor() as i64 + 1)
        }
    }
}

/// `μ(P, β) = μ(P, β') + 2·wind(β', β)`.
pub fn shift_class(index: i64, w: i64) -> i64 {
    index + 2 * w
}

/// Index of the `n`-th iterate of `orbit` in the class induced by `disk`.
pub fn disk_class_index(
    model: &HamiltonianModel,
    orbit: &PeriodicOrbit,
    disk: &SpanningDisk,
    n: usize,
    samples_per_period: usize,
) -> Result<i64> {
    let frame = DiskFrame::new(model, disk)?;
    frame.check_spans(orbit)?;
    let path = variational_path(model, orbit, &frame, n, samples_per_period)?;
    Ok(geometric_index(&path)?.index)
}
