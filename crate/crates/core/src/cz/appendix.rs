use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// The sections `Z̃(t) = −e^{−2πi(p−1)t}` and `Z̃₁(t) = −e^{−2πit}` along
/// the `z1`-circle, in the identification `a + ib ≡ a∂x2 + b∂y2`, sampled at
/// `t = i/samples`, `i = 0, …, samples`.
pub fn appendix_frame(p: i64, samples: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("p must be ≥ 2, got {p}")));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let t = |i: usize| i as f64 / samples as f64;
    let z = (0..=samples).map(|i| z_tilde(p, t(i))).collect();
    let z1 = (0..=samples).map(|i| -Complex64::from_polar(1.0, -TAU * t(i))).collect();
    Ok((z, z1))
}

pub fn z_tilde(p: i64, t: f64) -> Complex64 {
    -Complex64::from_polar(1.0, -TAU * (p - 1) as f64 * t)
}

/// `max_t |Z̃(t + 1/p) − e^{2πi/p} Z̃(t)|` over `samples` points.
pub fn equivariance_residual(p: i64, samples: usize) -> f64 {
    let rot = Complex64::from_polar(1.0, TAU / p as f64);
    (0..samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            (z_tilde(p, t + 1.0 / p as f64) - rot * z_tilde(p, t)).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cz::winding::winding;

    #[test]
    fn relative_winding_is_two_minus_p() {
        for p in 2..=8 {
            let (z, z1) = appendix_frame(p, 64 * p as usize).unwrap();
            assert_eq!(winding(&z, &z1).unwrap(), 2 - p);
        }
    }

    #[test]
    fn equivariance() {
        for p in 2..=8 {
            assert!(equivariance_residual(p, 1000) < 1e-12);
        }
    }

    #[test]
    fn winding_against_constant_frame() {
        let (z, _) = appendix_frame(2, 128).unwrap();
        let one = vec![Complex64::new(1.0, 0.0); z.len()];
        assert_eq!(winding(&z, &one).unwrap(), -1);
    }
}
