use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{flow_map, flow_options, FlowSystem, TimeParam};
use crate::error::{Error, Result};
use crate::geometry::{deck_action, hat_action, PhasePoint, TangentVector};
use crate::hamiltonian::{HamiltonianModel, ModelKind};
use crate::ode::{self, Event, Options};

/// Group action used to test `Z_p`-symmetry of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryAction {
    /// `g_{p,1}`.
    Deck,
    /// `ĝ_{3,1}`; only defined for `p = 3`.
    Hat,
}

impl SymmetryAction {
    fn apply(self, p: i64, pt: PhasePoint) -> Option<PhasePoint> {
        match self {
            SymmetryAction::Deck => deck_action(p, 1, 1, pt).ok(),
            SymmetryAction::Hat => (p == 3).then(|| hat_action(1, pt)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryTag {
    None,
    #[serde(rename = "zp")]
    ZP { p: i64, action: SymmetryAction },
    Reversible,
}

/// How `find_periodic_orbit` sets up the shooting problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetrySpec {
    /// Gauss–Newton on `(x0, T)` from a seed point.
    None { seed: PhasePoint, period_guess: Option<f64> },
    /// Mechanical models with a `Z_3`-invariant potential: start on the
    /// `x2`-axis with momentum `(y1, 0)`, `y1 ≥ 0`, and require a
    /// perpendicular hit on the mirror ray `60°` further on. Closes after six
    /// such segments.
    Rotational,
    /// Mechanical models even in `x1`: start on `Fix(R) = {x1 = 0, y2 = 0}`
    /// and require `y2 = 0` at the next crossing of `x1 = 0`.
    Reversible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParams {
    /// Range of the section coordinate `x2`; defaults to the whole chord of
    /// the Hill region on the `x2`-axis.
    pub window: Option<[f64; 2]>,
    pub samples: usize,
    pub tol: f64,
    pub max_newton: usize,
    /// Number of uniformly spaced samples stored per period.
    pub orbit_samples: usize,
    /// Give up on a section return after this Hamiltonian time.
    pub t_max: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self { window: None, samples: 64, tol: 1e-12, max_newton: 40, orbit_samples: 2048, t_max: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitResiduals {
    pub closure: f64,
    pub energy: f64,
    /// Phase residual of the recorded symmetry, if any.
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub model: String,
    #[serde(rename = "E")]
    pub energy: f64,
    pub period_hamiltonian: f64,
    pub reeb_action: f64,
    /// `[t, x1, x2, y1, y2]`, uniform in `t`, first and last rows one period
    /// apart.
    pub samples: Vec<[f64; 5]>,
    pub residuals: OrbitResiduals,
    pub symmetry: SymmetryTag,
}

impl PeriodicOrbit {
    pub fn initial_point(&self) -> PhasePoint {
        let s = self.samples[0];
        PhasePoint::new(s[1], s[2], s[3], s[4])
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        self.samples.iter().map(|s| PhasePoint::new(s[1], s[2], s[3], s[4]))
    }

    /// State at any time, by periodic 6-point Lagrange interpolation of the
    /// samples.
    pub fn state_at(&self, t: f64) -> PhasePoint {
        let m = self.samples.len() - 1;
        let h = self.period_hamiltonian / m as f64;
        let u = (t / h).rem_euclid(m as f64);
        let i0 = u.floor() as i64;
        let frac = u - i0 as f64;
        let mut acc = [0.0; 4];
        for j in -2..=3i64 {
            let mut w = 1.0;
            for k in -2..=3i64 {
                if k != j {
                    w *= (frac - k as f64) / (j - k) as f64;
                }
            }
            let s = self.samples[(i0 + j).rem_euclid(m as i64) as usize];
            for c in 0..4 {
                acc[c] += w * s[c + 1];
            }
        }
        PhasePoint::from(acc)
    }
}

/// `min_s max_t |action(x(t)) − x(t + s)|` over shifts near `kT/p`,
/// `k = 1, …, p−1`.
pub fn check_zp_symmetry(orbit: &PeriodicOrbit, action: SymmetryAction, p: i64) -> f64 {
    if p < 2 {
        return f64::INFINITY;
    }
    let m = orbit.samples.len() - 1;
    let images: Option<Vec<PhasePoint>> = orbit.points().take(m).map(|x| action.apply(p, x)).collect();
    let Some(images) = images else { return f64::INFINITY };
    let period = orbit.period_hamiltonian;
    let h = period / m as f64;
    let objective = |s: f64| {
        images
            .iter()
            .enumerate()
            .map(|(i, img)| img.dist(orbit.state_at(i as f64 * h + s)))
            .fold(0.0, f64::max)
    };
    (1..p)
        .map(|k| {
            let centre = period * k as f64 / p as f64;
            minimize_shift(&objective, centre - 0.05 * period, centre + 0.05 * period, 40)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `min_c max_t |R(x(t)) − x(c − t)|` for `R(x1, x2, y1, y2) = (−x1, x2, y1, −y2)`.
pub fn reversibility_residual(orbit: &PeriodicOrbit) -> f64 {
    let m = orbit.samples.len() - 1;
    let period = orbit.period_hamiltonian;
    let h = period / m as f64;
    let images: Vec<PhasePoint> = orbit.points().take(m).map(|x| PhasePoint::new(-x.x1, x.x2, x.y1, -x.y2)).collect();
    let objective = |c: f64| {
        images
            .iter()
            .enumerate()
            .map(|(i, img)| img.dist(orbit.state_at(c - i as f64 * h)))
            .fold(0.0, f64::max)
    };
    minimize_shift(&objective, 0.0, period, 200)
}

/// Coarse grid then golden-section refinement around the best node.
fn minimize_shift(f: &dyn Fn(f64) -> f64, a: f64, b: f64, coarse: usize) -> f64 {
    let step = (b - a) / coarse as f64;
    let (mut best_s, mut best) = (a, f64::INFINITY);
    for i in 0..=coarse {
        let s = a + i as f64 * step;
        let v = f(s);
        if v < best {
            best = v;
            best_s = s;
        }
    }
    let (mut lo, mut hi) = (best_s - step, best_s + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
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
    best.min(fc).min(fd)
}

/// Whether the `(x1, x2)` projection of the samples is a simple closed
/// polygon.
pub fn projection_is_simple(orbit: &PeriodicOrbit) -> bool {
    let pts: Vec<[f64; 2]> = orbit.samples[..orbit.samples.len() - 1].iter().map(|s| [s[1], s[2]]).collect();
    let n = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    (0..n).into_par_iter().all(|i| {
        let (a, b) = seg(i);
        (i + 2..n).all(|j| {
            if i == 0 && j == n - 1 {
                return true;
            }
            let (c, d) = seg(j);
            !segments_cross(a, b, c, d)
        })
    })
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && (d1 != 0.0 || d2 != 0.0 || d3 != 0.0 || d4 != 0.0)
}

/// Finds a periodic orbit on `H = E` by a scan over a symmetry section followed
/// by Newton's method, or by Gauss–Newton from a seed.
pub fn find_periodic_orbit(
    model: &HamiltonianModel,
    energy: f64,
    symmetry: SymmetrySpec,
    scan: &ScanParams,
) -> Result<PeriodicOrbit> {
    if !(1e-14..=1e-4).contains(&scan.tol) {
        return Err(Error::InvalidInput(format!("tolerance {:e} outside [1e-14, 1e-4]", scan.tol)));
    }
    if scan.orbit_samples < 16 {
        return Err(Error::InvalidInput("at least 16 orbit samples required".into()));
    }
    if let ModelKind::Mechanical(v) = &model.kind {
        if energy <= v.value(0.0, 0.0) {
            return Err(Error::InvalidInput(format!("energy {energy} below the potential minimum")));
        }
    }
    match symmetry {
        SymmetrySpec::None { seed, period_guess } => {
            let (x0, period) = gauss_newton(model, energy, seed, period_guess, scan)?;
            assemble(model, energy, x0, period, scan)
        }
        SymmetrySpec::Rotational | SymmetrySpec::Reversible => {
            let section = Section::new(model, energy, symmetry)?;
            section.solve(scan)
        }
    }
}

fn assemble(model: &HamiltonianModel, energy: f64, x0: PhasePoint, period: f64, scan: &ScanParams) -> Result<PeriodicOrbit> {
    let sys = FlowSystem { model, param: TimeParam::Hamiltonian, energy, with_action: true, with_variational: false };
    let mut y0 = x0.to_array().to_vec();
    y0.push(0.0);
    let opts = Options { dense: true, ..flow_options(scan.tol) };
    let sol = ode::integrate(&sys, 0.0, &y0, period, &opts)?;
    let (_, end) = sol.last();
    let m = scan.orbit_samples;
    let mut samples = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let t = period * i as f64 / m as f64;
        let y = if i == 0 { y0.clone() } else if i == m { end.to_vec() } else { sol.sample(t).unwrap() };
        samples.push([t, y[0], y[1], y[2], y[3]]);
    }
    let closure = PhasePoint::new(end[0], end[1], end[2], end[3]).dist(x0);
    let mut orbit = PeriodicOrbit {
        model: model.name.clone(),
        energy,
        period_hamiltonian: period,
        reeb_action: end[4],
        samples,
        residuals: OrbitResiduals { closure, energy: (model.value(x0) - energy).abs(), phase: None },
        symmetry: SymmetryTag::None,
    };
    if matches!(model.kind, ModelKind::Mechanical(_)) {
        let zp = check_zp_symmetry(&orbit, SymmetryAction::Hat, 3);
        if zp < 1e-6 {
            orbit.symmetry = SymmetryTag::ZP { p: 3, action: SymmetryAction::Hat };
            orbit.residuals.phase = Some(zp);
        } else {
            let rev = reversibility_residual(&orbit);
            if rev < 1e-6 {
                orbit.symmetry = SymmetryTag::Reversible;
                orbit.residuals.phase = Some(rev);
            }
        }
    }
    if !(closure < 1e-8) {
        return Err(Error::NoConvergence { iterations: 0, residual: closure, trace: vec![closure] });
    }
    if !(orbit.reeb_action > 0.0) {
        return Err(Error::NotStarshaped { value: orbit.reeb_action });
    }
    Ok(orbit)
}

struct Section<'m> {
    model: &'m HamiltonianModel,
    energy: f64,
    rotational: bool,
}

/// One section return: the residual and, when requested, its derivative in
/// the section coordinate.
struct Shot {
    residual: f64,
    derivative: f64,
    tau: f64,
}

impl<'m> Section<'m> {
    fn new(model: &'m HamiltonianModel, energy: f64, symmetry: SymmetrySpec) -> Result<Self> {
        if !matches!(model.kind, ModelKind::Mechanical(_)) {
            return Err(Error::InvalidInput("symmetric sections need a mechanical model".into()));
        }
        Ok(Self { model, energy, rotational: matches!(symmetry, SymmetrySpec::Rotational) })
    }

    fn potential(&self) -> &crate::hamiltonian::PolynomialPotential {
        self.model.potential().unwrap()
    }

    /// Chord of `{V(0, x2) < E}` through the origin.
    fn default_window(&self) -> [f64; 2] {
        let v = self.potential();
        let edge = |dir: f64| {
            let mut hi = 0.0;
            let step = 1e-3;
            while v.value(0.0, dir * (hi + step)) < self.energy && hi < 1e3 {
                hi += step;
            }
            let (mut a, mut b) = (hi, hi + step);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if v.value(0.0, dir * m) < self.energy {
                    a = m;
                } else {
                    b = m;
                }
            }
            dir * a
        };
        [edge(-1.0), edge(1.0)]
    }

    fn start(&self, s: f64) -> Option<(PhasePoint, TangentVector)> {
        let v = self.potential();
        let kinetic = 2.0 * (self.energy - v.value(0.0, s));
        if kinetic <= 0.0 {
            return None;
        }
        let y1 = kinetic.sqrt();
        let v2 = v.gradient(0.0, s)[1];
        Some((PhasePoint::new(0.0, s, y1, 0.0), TangentVector([0.0, 1.0, -v2 / y1, 0.0])))
    }

    /// Unit vector along the target ray and its left normal.
    fn target(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        if self.rotational {
            let theta = if s > 0.0 { 30f64.to_radians() } else { -30f64.to_radians() };
            let (sn, cs) = theta.sin_cos();
            ([cs, sn], [-sn, cs])
        } else {
            ([0.0, 1.0], [-1.0, 0.0])
        }
    }

    fn shoot(&self, s: f64, scan: &ScanParams, with_derivative: bool) -> Option<Shot> {
        if s == 0.0 && self.rotational {
            return None;
        }
        let (x0, dx0) = self.start(s)?;
        let (u, n) = self.target(s);
        let g0 = n[0] * x0.x1 + n[1] * x0.x2;
        // The reversible section starts on the target line; leave it first.
        let direction: i8 = if self.rotational { if g0 > 0.0 { -1 } else { 1 } } else { -1 };
        let sys = FlowSystem {
            model: self.model,
            param: TimeParam::Hamiltonian,
            energy: self.energy,
            with_action: false,
            with_variational: with_derivative,
        };
        let mut y0 = x0.to_array().to_vec();
        if with_derivative {
            y0.extend((0..16).map(|k| if k % 5 == 0 { 1.0 } else { 0.0 }));
        }
        let g = move |_t: f64, y: &[f64]| n[0] * y[0] + n[1] * y[1];
        let event = Event { g: &g, direction, t_min: 1e-6 };
        let (_, hit) = ode::integrate_to_event(&sys, 0.0, &y0, scan.t_max, &flow_options(scan.tol), &event).ok()?;
        let hit = hit?;
        let y = &hit.y;
        if u[0] * y[0] + u[1] * y[1] <= 0.0 {
            return None;
        }
        let residual = u[0] * y[2] + u[1] * y[3];
        let mut derivative = f64::NAN;
        if with_derivative {
            let phi = nalgebra::Matrix4::from_row_slice(&y[4..20]);
            let w = phi * dx0.to_vector4();
            let f = self.model.hamiltonian_field(PhasePoint::new(y[0], y[1], y[2], y[3]));
            let dtau = -(n[0] * w[0] + n[1] * w[1]) / (n[0] * f.0[0] + n[1] * f.0[1]);
            derivative = u[0] * (w[2] + f.0[2] * dtau) + u[1] * (w[3] + f.0[3] * dtau);
        }
        Some(Shot { residual, derivative, tau: hit.t })
    }

    fn solve(&self, scan: &ScanParams) -> Result<PeriodicOrbit> {
        let [a, b] = scan.window.unwrap_or_else(|| self.default_window());
        if !(a < b) || scan.samples < 2 {
            return Err(Error::InvalidInput(format!("empty scan window [{a}, {b}]")));
        }
        let n = scan.samples;
        let nodes: Vec<f64> = (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect();
        let values: Vec<Option<f64>> =
            nodes.par_iter().map(|&s| self.shoot(s, scan, false).map(|shot| shot.residual)).collect();
        let brackets: Vec<(f64, f64)> = (0..n - 1)
            .filter_map(|i| match (values[i], values[i + 1]) {
                (Some(r0), Some(r1)) if r0 * r1 <= 0.0 && nodes[i] * nodes[i + 1] > 0.0 => Some((nodes[i], nodes[i + 1])),
                _ => None,
            })
            .collect();
        if brackets.is_empty() {
            return Err(Error::NotFound(format!("no sign change of the section residual on [{a}, {b}]")));
        }
        let results: Vec<Result<PeriodicOrbit>> = brackets
            .par_iter()
            .map(|&(lo, hi)| {
                let (s, shot) = self.newton(lo, hi, scan)?;
                let (x0, _) = self.start(s).unwrap();
                let period = shot.tau * if self.rotational { 6.0 } else { 2.0 };
                assemble(self.model, self.energy, x0, period, scan)
            })
            .collect();
        let mut best: Option<PeriodicOrbit> = None;
        let mut last_err = None;
        // Residuals below 1e-10 are integrator noise and count as ties.
        let key = |o: &PeriodicOrbit| (o.residuals.closure.max(1e-10), o.period_hamiltonian);
        for r in results {
            match r {
                Ok(o) => {
                    if best.as_ref().is_none_or(|b| key(&o).partial_cmp(&key(b)) == Some(std::cmp::Ordering::Less)) {
                        best = Some(o);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| last_err.unwrap())
    }

    /// Newton's method safeguarded by the bracket `[lo, hi]`.
    fn newton(&self, mut lo: f64, mut hi: f64, scan: &ScanParams) -> Result<(f64, Shot)> {
        let fail = |trace: Vec<f64>| Error::NoConvergence {
            iterations: trace.len(),
            residual: trace.last().copied().unwrap_or(f64::NAN),
            trace,
        };
        let mut r_lo = self.shoot(lo, scan, false).ok_or_else(|| fail(vec![]))?.residual;
        let mut s = 0.5 * (lo + hi);
        let mut trace = Vec::new();
        for _ in 0..scan.max_newton {
            let shot = self.shoot(s, scan, true).ok_or_else(|| fail(trace.clone()))?;
            trace.push(shot.residual.abs());
            if shot.residual.abs() < 1e-13 || hi - lo < 1e-15 * s.abs().max(1.0) {
                return Ok((s, shot));
            }
            if shot.residual * r_lo <= 0.0 {
                hi = s;
            } else {
                lo = s;
                r_lo = shot.residual;
            }
            let newton = s - shot.residual / shot.derivative;
            s = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        let shot = self.shoot(s, scan, false).ok_or_else(|| fail(trace.clone()))?;
        if shot.residual.abs() < 1e-11 {
            return Ok((s, shot));
        }
        Err(fail(trace))
    }
}

fn project_to_level(model: &HamiltonianModel, energy: f64, mut p: PhasePoint) -> PhasePoint {
    for _ in 0..50 {
        let (h, g) = model.evaluate(p);
        let g2 = g.dot(g);
        if g2 == 0.0 || (h - energy).abs() < 1e-15 * energy.abs().max(1.0) {
            break;
        }
        p = p + g * (-(h - energy) / g2);
    }
    p
}

fn first_return(model: &HamiltonianModel, energy: f64, seed: PhasePoint, scan: &ScanParams) -> Result<f64> {
    let f = model.hamiltonian_field(seed);
    let sys = FlowSystem { model, param: TimeParam::Hamiltonian, energy, with_action: false, with_variational: false };
    let g = move |_t: f64, y: &[f64]| {
        (0..4).map(|i| (y[i] - seed.to_array()[i]) * f.0[i]).sum::<f64>()
    };
    let event = Event { g: &g, direction: 1, t_min: 1e-3 };
    let (_, hit) = ode::integrate_to_event(&sys, 0.0, &seed.to_array(), scan.t_max, &flow_options(scan.tol), &event)?;
    hit.map(|h| h.t).ok_or_else(|| Error::NotFound(format!("no return to the seed section before t = {}", scan.t_max)))
}

fn gauss_newton(
    model: &HamiltonianModel,
    energy: f64,
    seed: PhasePoint,
    period_guess: Option<f64>,
    scan: &ScanParams,
) -> Result<(PhasePoint, f64)> {
    let seed = project_to_level(model, energy, seed);
    let f_seed = model.hamiltonian_field(seed);
    let mut period = match period_guess {
        Some(t) if t > 0.0 => t,
        _ => first_return(model, energy, seed, scan)?,
    };
    let mut x0 = seed;
    let mut trace = Vec::new();
    for _ in 0..scan.max_newton {
        let (x_t, phi, _) = flow_map(model, x0, period, scan.tol)?;
        let (h, grad) = model.evaluate(x0);
        let f_end = model.hamiltonian_field(x_t);
        let mut r = DVector::zeros(6);
        for i in 0..4 {
            r[i] = x_t.to_array()[i] - x0.to_array()[i];
        }
        r[4] = h - energy;
        r[5] = (0..4).map(|i| (x0.to_array()[i] - seed.to_array()[i]) * f_seed.0[i]).sum();
        let norm = r.norm();
        trace.push(norm);
        if norm < 1e-12 {
            return Ok((x0, period));
        }
        let mut jac = DMatrix::zeros(6, 5);
        for i in 0..4 {
            for j in 0..4 {
                jac[(i, j)] = phi[(i, j)] - if i == j { 1.0 } else { 0.0 };
            }
            jac[(i, 4)] = f_end.0[i];
            jac[(4, i)] = grad.0[i];
            jac[(5, i)] = f_seed.0[i];
        }
        let step = jac
            .svd(true, true)
            .solve(&r, 1e-12)
            .map_err(|_| Error::NoConvergence { iterations: trace.len(), residual: norm, trace: trace.clone() })?;
        let a = x0.to_array();
        x0 = PhasePoint::new(a[0] - step[0], a[1] - step[1], a[2] - step[2], a[3] - step[3]);
        period -= step[4];
        if step.norm() < 1e-15 * (1.0 + period) {
            break;
        }
        if !(period > 0.0) {
            return Err(Error::NoConvergence { iterations: trace.len(), residual: norm, trace });
        }
    }
    let (x_t, _, _) = flow_map(model, x0, period, scan.tol)?;
    let closure = x_t.dist(x0);
    if closure < 1e-10 {
        return Ok((x0, period));
    }
    trace.push(closure);
    Err(Error::NoConvergence { iterations: trace.len(), residual: closure, trace })
}
