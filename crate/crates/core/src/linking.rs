//! Linking numbers of closed curves on S³ and self-linking numbers of
//! transverse unknots.
//!
//! Curves are projected stereographically from a pole away from both of
//! them, and the Gauss integral is evaluated on the projected polygons. The
//! sign is that of the orientation of S³ given by `λ₀ ∧ dλ₀`: with it, two
//! Hopf fibers traversed along the Reeb flow link `+1` ([`HOPF_LINK`]).

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::disk::{DiskFrame, SpanningDisk};
use crate::error::{Error, Result};
use crate::flow::Frame;
use crate::geometry::{liouville, PhasePoint, Stereographic, TangentVector};
use crate::hamiltonian::HamiltonianModel;

/// Linking number of the Hopf fibers through `(1, 0)` and `(0, 1)`, both
/// oriented by the Reeb flow of the round sphere.
pub const HOPF_LINK: i64 = 1;

/// Default cap on segment pairs per evaluation.
pub const MAX_PAIRS: usize = 1 << 14;

const MIN_SEPARATION: f64 = 1e-3;
const SNAP: f64 = 0.1;

/// A closed polygon on the unit sphere S³; the last sample connects back to
/// the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 4]>", into = "Vec<[f64; 4]>")]
pub struct ClosedCurve {
    points: Vec<PhasePoint>,
}

impl ClosedCurve {
    pub fn new(mut points: Vec<PhasePoint>) -> Result<Self> {
        if points.len() > 1 && points[0].dist(*points.last().unwrap()) < 1e-12 {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::InvalidInput(format!("closed curve needs ≥ 3 distinct samples, got {}", points.len())));
        }
        for p in &points {
            let r = p.norm();
            if (r - 1.0).abs() > 1e-8 {
                return Err(Error::NotOnSphere { radius: r });
            }
        }
        let n = points.len();
        let chord = (0..n).map(|i| points[i].dist(points[(i + 1) % n])).fold(0.0, f64::max);
        if chord >= 0.1 {
            return Err(Error::Sampling(format!("chord length {chord:.3} ≥ 0.1")));
        }
        Ok(Self { points })
    }

    /// Samples `f` at `t = i/samples`, `i = 0, …, samples − 1`.
    pub fn from_fn(f: impl Fn(f64) -> PhasePoint, samples: usize) -> Result<Self> {
        Self::new((0..samples).map(|i| f(i as f64 / samples as f64)).collect())
    }

    /// The Hopf fiber `t ↦ e^{−2πit} p` through a point of S³, oriented by the
    /// Reeb flow.
    pub fn hopf_fiber(p: PhasePoint, samples: usize) -> Result<Self> {
        let (z1, z2) = (p.z1(), p.z2());
        Self::from_fn(
            |t| {
                let u = num_complex::Complex64::from_polar(1.0, -2.0 * PI * t);
                PhasePoint::from_z(u * z1, u * z2)
            },
            samples,
        )
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Central-difference tangent at sample `i`, per unit sample index.
    pub fn tangent(&self, i: usize) -> TangentVector {
        let n = self.points.len();
        (self.points[(i + 1) % n] - self.points[(i + n - 1) % n]) * 0.5
    }

    /// Smallest vertex-to-vertex distance to another curve.
    pub fn distance_to(&self, other: &ClosedCurve) -> f64 {
        self.points
            .par_iter()
            .map(|p| other.points.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<[f64; 4]>> for ClosedCurve {
    type Error = Error;

    fn try_from(v: Vec<[f64; 4]>) -> Result<Self> {
        Self::new(v.into_iter().map(PhasePoint::from).collect())
    }
}

impl From<ClosedCurve> for Vec<[f64; 4]> {
    fn from(c: ClosedCurve) -> Self {
        c.points.into_iter().map(PhasePoint::to_array).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Midpoint rule on segment pairs.
    Midpoint,
    /// Exact solid angle of each pair of straight segments.
    Polygon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOptions {
    pub quadrature: Quadrature,
    pub max_pairs: usize,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self { quadrature: Quadrature::Polygon, max_pairs: MAX_PAIRS }
    }
}

/// One resolution level: segments used on each curve and the integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkLevel {
    pub segments_a: usize,
    pub segments_b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub link: i64,
    pub value: f64,
    pub min_distance: f64,
    pub pole: [f64; 4],
    pub levels: Vec<LinkLevel>,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Solid angle subtended by segment `p1p2` seen along segment `p3p4`.
fn segment_pair(p1: &Vector3<f64>, p2: &Vector3<f64>, p3: &Vector3<f64>, p4: &Vector3<f64>) -> f64 {
    let (r13, r14, r23, r24) = (p3 - p1, p4 - p1, p3 - p2, p4 - p2);
    let unit = |v: Vector3<f64>| {
        let n = v.norm();
        if n > 0.0 {
            v / n
        } else {
            v
        }
    };
    let n1 = unit(r13.cross(&r14));
    let n2 = unit(r14.cross(&r24));
    let n3 = unit(r24.cross(&r23));
    let n4 = unit(r23.cross(&r13));
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(n1.dot(&n2)) + asin(n2.dot(&n3)) + asin(n3.dot(&n4)) + asin(n4.dot(&n1));
    let s = (p4 - p3).cross(&(p2 - p1)).dot(&r13);
    omega * s.signum()
}

/// `(1/4π) ∮∮ (a − b)·(da × db)/|a − b|³` over two closed polygons in R³.
pub fn gauss_integral(a: &[Vector3<f64>], b: &[Vector3<f64>], quadrature: Quadrature) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let rows: Vec<f64> = (0..na)
        .into_par_iter()
        .map(|i| {
            let (a0, a1) = (&a[i], &a[(i + 1) % na]);
            let row: Vec<f64> = (0..nb)
                .map(|j| {
                    let (b0, b1) = (&b[j], &b[(j + 1) % nb]);
                    match quadrature {
                        Quadrature::Polygon => segment_pair(a0, a1, b0, b1),
                        Quadrature::Midpoint => {
                            let r = 0.5 * (a0 + a1) - 0.5 * (b0 + b1);
                            r.dot(&(a1 - a0).cross(&(b1 - b0))) / r.norm().powi(3)
                        }
                    }
                })
                .collect();
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&rows) / (4.0 * PI)
}

fn subsample(points: &[Vector3<f64>], m: usize) -> Vec<Vector3<f64>> {
    let n = points.len();
    if m >= n {
        return points.to_vec();
    }
    (0..m).map(|i| points[i * n / m]).collect()
}

/// Linking number of two disjoint closed curves on S³.
pub fn gauss_link(a: &ClosedCurve, b: &ClosedCurve) -> Result<i64> {
    Ok(gauss_link_report(a, b, &LinkOptions::default())?.link)
}

/// [`gauss_link`] with the resolution history. Both curves are refined by
/// doubling from 16 segments until two consecutive levels round to the same
/// integer, within the pair budget.
pub fn gauss_link_report(a: &ClosedCurve, b: &ClosedCurve, opts: &LinkOptions) -> Result<LinkReport> {
    link_with_guard(a, b, opts, MIN_SEPARATION)
}

fn link_with_guard(a: &ClosedCurve, b: &ClosedCurve, opts: &LinkOptions, guard: f64) -> Result<LinkReport> {
    let min_distance = a.distance_to(b);
    if min_distance <= guard {
        return Err(Error::CurvesTooClose { distance: min_distance });
    }
    let all: Vec<PhasePoint> = a.points.iter().chain(&b.points).copied().collect();
    let proj = Stereographic::avoiding(&all)?;
    let sign = proj.orientation_sign();
    let project = |c: &ClosedCurve| c.points.iter().map(|p| proj.project(*p)).collect::<Result<Vec<_>>>();
    let (pa, pb) = (project(a)?, project(b)?);
    let mut levels: Vec<LinkLevel> = Vec::new();
    let mut m = 16;
    loop {
        let (sa, sb) = (subsample(&pa, m), subsample(&pb, m));
        if !levels.is_empty() && sa.len() * sb.len() > opts.max_pairs {
            break;
        }
        let value = sign * gauss_integral(&sa, &sb, opts.quadrature);
        let level = LinkLevel { segments_a: sa.len(), segments_b: sb.len(), value };
        let full = sa.len() == pa.len() && sb.len() == pb.len();
        let stable = levels.last().is_some_and(|prev| {
            prev.value.round() == value.round() && (value - value.round()).abs() <= SNAP
        });
        levels.push(level);
        if stable || full {
            break;
        }
        m *= 2;
    }
    let last = *levels.last().unwrap();
    let value = last.value;
    let snapped = (value - value.round()).abs() <= SNAP;
    let agrees = levels.len() < 2 || levels[levels.len() - 2].value.round() == value.round();
    let full = last.segments_a == pa.len() && last.segments_b == pb.len();
    if !snapped || !(agrees || full) {
        return Err(Error::NonInteger { value });
    }
    Ok(LinkReport {
        link: value.round() as i64,
        value,
        min_distance,
        pole: proj.pole().to_array(),
        levels,
    })
}

/// Pushes `k` off along `section` by the geodesic exponential of S³:
/// `x ↦ cos ε · x + sin ε · v/|v|`, with `v` the tangential part of the
/// section.
pub fn xi_pushoff(k: &ClosedCurve, section: &[TangentVector], eps: f64) -> Result<ClosedCurve> {
    if !(1e-4..=1e-2).contains(&eps) {
        return Err(Error::InvalidInput(format!("pushoff distance {eps:e} outside [1e-4, 1e-2]")));
    }
    if section.len() != k.len() {
        return Err(Error::InvalidInput(format!("section has {} vectors for {} samples", section.len(), k.len())));
    }
    let points = k
        .points
        .iter()
        .zip(section)
        .map(|(x, s)| {
            let xv = x.as_vector();
            let v = *s - xv * s.dot(xv);
            let n = v.norm();
            if n < 1e-12 {
                return Err(Error::Degenerate(format!("section vanishes at {x:?}")));
            }
            let q = xv * eps.cos() + v * (eps.sin() / n);
            Ok(PhasePoint::from(q.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let pushed = ClosedCurve::new(points)?;
    let d = pushed.distance_to(k);
    if d < 0.5 * eps {
        return Err(Error::CurvesTooClose { distance: d });
    }
    Ok(pushed)
}

/// The first vector of the disk-class frame of `ξ` along `k`.
pub fn disk_section(k: &ClosedCurve, disk: &SpanningDisk) -> Result<Vec<TangentVector>> {
    let sphere = HamiltonianModel::ellipsoid(1.0, 1.0)?;
    let frame = DiskFrame::new(&sphere, disk)?;
    k.points.iter().map(|p| frame.raw(&sphere, *p).map(|(e1, _)| e1)).collect()
}

/// `sl(K, u) = lk(K, K_ε)` for the pushoff along the disk-class section.
pub fn self_linking(k: &ClosedCurve, disk: &SpanningDisk, eps: f64) -> Result<i64> {
    Ok(self_linking_report(k, disk, eps)?.link)
}

pub fn self_linking_report(k: &ClosedCurve, disk: &SpanningDisk, eps: f64) -> Result<LinkReport> {
    for i in 0..k.len() {
        let t = k.tangent(i);
        let value = liouville(k.points[i], t) / t.norm();
        if value.abs() <= 1e-6 {
            return Err(Error::NotTransverse { value });
        }
    }
    let section = disk_section(k, disk)?;
    let pushed = xi_pushoff(k, &section, eps)?;
    // The pair is only ε apart; the polygon rule stays exact for the ribbon
    // they bound, so the separation guard is scaled down with ε.
    link_with_guard(&pushed, k, &LinkOptions::default(), 0.25 * eps)
}
