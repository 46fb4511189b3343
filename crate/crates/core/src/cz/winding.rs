use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};

/// Nonvanishing section of a trivial plane bundle along a loop, written as
/// complex coordinates `a + ib` on a uniform grid whose last sample closes
/// the loop.
pub type FrameSection = [Complex64];

/// Sum of the angle increments of a sampled curve in `C ∖ {0}`, in turns.
pub fn angle_increment(curve: impl IntoIterator<Item = Complex64>) -> Result<f64> {
    let mut it = curve.into_iter();
    let Some(mut prev) = it.next() else { return Ok(0.0) };
    let mut total = 0.0;
    for z in it {
        if z == Complex64::new(0.0, 0.0) || !z.is_finite() {
            return Err(Error::Sampling("curve passes through 0".into()));
        }
        let d = (z * prev.conj()).arg();
        if d.abs() >= FRAC_PI_2 {
            return Err(Error::Sampling(format!("angular step {d:.3} rad exceeds π/2")));
        }
        total += d;
        prev = z;
    }
    Ok(total / TAU)
}

/// Winding of `section` relative to `reference`: the total angle of
/// `section / reference` divided by `2π`.
pub fn winding(section: &FrameSection, reference: &FrameSection) -> Result<i64> {
    if section.len() != reference.len() || section.len() < 2 {
        return Err(Error::InvalidInput("sections must share a grid of at least 2 samples".into()));
    }
    let turns = angle_increment(section.iter().zip(reference).map(|(s, r)| s / r))?;
    let k = turns.round();
    if (turns - k).abs() > 1e-6 {
        return Err(Error::Sampling(format!("sections do not close up (total {turns} turns)")));
    }
    Ok(k as i64)
}
