//! Strict convexity of mechanical energy surfaces `|y|²/2 + V(x) = E`.
//!
//! The surface is strictly convex exactly when
//!
//! ```text
//! G_E = 2(E−V)(V₁₁V₂₂ − V₁₂²) + V₁₁V₂² + V₂₂V₁² − 2V₁V₂V₁₂
//! ```
//!
//! is positive on the Hill region `B_E`. This module evaluates `G_E`, traces
//! `B_E` and certifies positivity with interval arithmetic.

mod certify;
mod hill;

pub use certify::{certify_positive, certify_region, spot_check, CertStatus, Certificate, CertifiedCell, SpotCheck};
pub use hill::{hill_region, HillRegion};

use num_rational::BigRational;
use num_traits::FromPrimitive;

use crate::error::{Error, Result};
use crate::hamiltonian::PolynomialPotential;
use crate::poly::{rational, Poly2};

/// `G_E(x)` from the potential's stored derivatives.
pub fn g_e(potential: &PolynomialPotential, energy: f64, x1: f64, x2: f64) -> f64 {
    let j = potential.jet(x1, x2);
    2.0 * (energy - j.v) * (j.v11 * j.v22 - j.v12 * j.v12) + j.v11 * j.v2 * j.v2 + j.v22 * j.v1 * j.v1
        - 2.0 * j.v1 * j.v2 * j.v12
}

/// `G_E` expanded into a single polynomial in `(x1, x2)`; the energy is taken
/// as the exact rational value of the double.
pub fn g_e_polynomial(potential: &PolynomialPotential, energy: f64) -> Result<Poly2> {
    let e = BigRational::from_f64(energy)
        .ok_or_else(|| Error::InvalidInput(format!("energy must be finite, got {energy}")))?;
    let [v1, v2, v11, v12, v22] = potential.derivative_polys();
    let det = v11.mul(v22).sub(&v12.mul(v12));
    let e_minus_v = Poly2::constant(e).sub(potential.poly());
    let first = e_minus_v.mul(&det).scale(&rational(2, 1));
    let rest = v11
        .mul(&v2.mul(v2))
        .add(&v22.mul(&v1.mul(v1)))
        .sub(&v1.mul(v2).mul(v12).scale(&rational(2, 1)));
    Ok(first.add(&rest))
}

/// Minimum of `G_E` over the nodes of an `n × n` grid that lie in the Hill
/// region, with the node where it is attained.
pub fn scan_min(region: &HillRegion, potential: &PolynomialPotential, n: usize) -> Option<(f64, [f64; 2])> {
    let [x0, x1, y0, y1] = region.bbox;
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..n {
        for j in 0..n {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
            let y = y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64;
            if !region.contains(potential, x, y) {
                continue;
            }
            let g = g_e(potential, region.energy, x, y);
            if best.is_none_or(|(b, _)| g < b) {
                best = Some((g, [x, y]));
            }
        }
    }
    best
}
