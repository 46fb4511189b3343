use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{g_e, g_e_polynomial, hill_region, HillRegion};
use crate::error::{Error, Result};
use crate::hamiltonian::PolynomialPotential;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertStatus {
    ProvenPositive,
    Counterexample { point: [f64; 2], g_e: f64, v: f64 },
    Inconclusive,
}

/// A box on which `G_E` was certified positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedCell {
    pub x1: Interval,
    pub x2: Interval,
    pub enclosure: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub energy: f64,
    pub status: CertStatus,
    /// Minimum of the certified lower bounds over accepted cells.
    pub lower_bound: f64,
    pub accepted_cells: usize,
    pub discarded_cells: usize,
    pub unresolved_cells: usize,
    pub max_depth: u32,
    pub max_depth_reached: u32,
    pub bbox: [f64; 4],
    #[serde(skip)]
    pub cells: Vec<CertifiedCell>,
}

enum Verdict {
    Discard,
    Accept(CertifiedCell),
    Split,
    Unresolved,
    Counterexample([f64; 2], f64, f64),
}

/// Quadtree branch and bound over the Hill-region bounding box.
///
/// A cell is discarded when the enclosure of `V` lies above `E`, accepted
/// when the enclosure of `G_E` is positive, and split otherwise. Levels are
/// processed in order and each level in parallel with an order-preserving
/// collect, so the certificate does not depend on scheduling.
pub fn certify_positive(potential: &PolynomialPotential, energy: f64, max_depth: u32) -> Result<Certificate> {
    let region = hill_region(potential, energy, 128)?;
    certify_region(potential, &region, max_depth)
}

pub fn certify_region(potential: &PolynomialPotential, region: &HillRegion, max_depth: u32) -> Result<Certificate> {
    if max_depth > 30 {
        return Err(Error::InvalidInput(format!("depth {max_depth} exceeds 30")));
    }
    let energy = region.energy;
    let g_poly = g_e_polynomial(potential, energy)?;
    let v_poly = potential.poly();
    let e_iv = Interval::point(energy);
    let [a, b, c, d] = region.bbox;
    let root = (Interval::new(a, b), Interval::new(c, d));

    let classify = |depth: u32, bx: (Interval, Interval)| -> Verdict {
        let v = v_poly.eval_interval(bx.0, bx.1);
        if v.lo > e_iv.hi {
            return Verdict::Discard;
        }
        let g = g_poly.eval_interval(bx.0, bx.1);
        if g.lo > 0.0 {
            return Verdict::Accept(CertifiedCell { x1: bx.0, x2: bx.1, enclosure: g });
        }
        let (cx, cy) = (bx.0.mid(), bx.1.mid());
        let gc = g_e(potential, energy, cx, cy);
        if gc <= 0.0 && region.contains(potential, cx, cy) {
            return Verdict::Counterexample([cx, cy], gc, potential.value(cx, cy));
        }
        if depth >= max_depth {
            Verdict::Unresolved
        } else {
            Verdict::Split
        }
    };

    let mut cert = Certificate {
        energy,
        status: CertStatus::ProvenPositive,
        lower_bound: f64::INFINITY,
        accepted_cells: 0,
        discarded_cells: 0,
        unresolved_cells: 0,
        max_depth,
        max_depth_reached: 0,
        bbox: region.bbox,
        cells: Vec::new(),
    };
    let mut level = vec![root];
    let mut depth = 0;
    while !level.is_empty() {
        cert.max_depth_reached = depth;
        let verdicts: Vec<Verdict> = level.par_iter().map(|&bx| classify(depth, bx)).collect();
        let mut next = Vec::new();
        for (bx, verdict) in level.iter().zip(verdicts) {
            match verdict {
                Verdict::Discard => cert.discarded_cells += 1,
                Verdict::Accept(cell) => {
                    cert.lower_bound = cert.lower_bound.min(cell.enclosure.lo);
                    cert.accepted_cells += 1;
                    cert.cells.push(cell);
                }
                Verdict::Unresolved => cert.unresolved_cells += 1,
                Verdict::Counterexample(point, g, v) => {
                    cert.status = CertStatus::Counterexample { point, g_e: g, v };
                    return Ok(cert);
                }
                Verdict::Split => next.extend(split(*bx)),
            }
        }
        level = next;
        depth += 1;
    }
    if cert.unresolved_cells > 0 {
        cert.status = CertStatus::Inconclusive;
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub seed: u64,
    pub points: usize,
    /// Points whose floating-point `G_E` falls outside their cell's enclosure.
    pub violations: usize,
}

/// Evaluates `G_E` at uniform random points of uniformly chosen accepted
/// cells.
pub fn spot_check(cert: &Certificate, potential: &PolynomialPotential, points: usize, seed: u64) -> SpotCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    if cert.cells.is_empty() {
        return SpotCheck { seed, points: 0, violations };
    }
    for _ in 0..points {
        let c = cert.cells[rng.gen_range(0..cert.cells.len())];
        let x = c.x1.lo + rng.gen::<f64>() * c.x1.width();
        let y = c.x2.lo + rng.gen::<f64>() * c.x2.width();
        if !c.enclosure.contains(g_e(potential, cert.energy, x, y)) {
            violations += 1;
        }
    }
    SpotCheck { seed, points, violations }
}

fn split((x, y): (Interval, Interval)) -> [(Interval, Interval); 4] {
    let (xm, ym) = (x.mid(), y.mid());
    let (xl, xr) = (Interval::new(x.lo, xm), Interval::new(xm, x.hi));
    let (yl, yr) = (Interval::new(y.lo, ym), Interval::new(ym, y.hi));
    [(xl, yl), (xr, yl), (xl, yr), (xr, yr)]
}
