//! Dormand–Prince 5(4) integrator with FSAL, dense output, a terminal event
//! and optional projection after each accepted step.

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
    /// Invoked on each accepted state when [`Options::project`] is set.
    fn project(&self, _y: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    pub project: bool,
    /// Keep the dense-output polynomial of every step.
    pub dense: bool,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
            project: false,
            dense: false,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rc: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rc;
        for i in 0..out.len() {
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.rc[0].len()];
        self.eval_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub steps: Vec<DenseStep>,
    pub rejected: usize,
}

impl Solution {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.ts.last().unwrap(), self.ys.last().unwrap())
    }

    /// Dense-output evaluation; requires [`Options::dense`].
    pub fn sample(&self, t: f64) -> Option<Vec<f64>> {
        if self.steps.is_empty() {
            return None;
        }
        let i = self.steps.partition_point(|s| s.t1() < t).min(self.steps.len() - 1);
        Some(self.steps[i].eval(t))
    }
}

/// A scalar switching function; the integration stops at its first zero with
/// the requested crossing direction after `t_min`.
pub struct Event<'a> {
    pub g: &'a dyn Fn(f64, &[f64]) -> f64,
    /// `+1` for increasing crossings, `-1` for decreasing, `0` for either.
    pub direction: i8,
    pub t_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub t: f64,
    pub y: Vec<f64>,
}

struct Stepper<'s, S: OdeSystem> {
    sys: &'s S,
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'s, S: OdeSystem> Stepper<'s, S> {
    fn new(sys: &'s S) -> Self {
        let n = sys.dim();
        Self { sys, n, k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    /// One step from `(t, y)` with `k[0] = f(t, y)` already set; writes the
    /// 5th-order solution to `y1` and returns the weighted error estimate.
    fn step(&mut self, t: f64, y: &[f64], h: f64, y1: &mut [f64], opts: &Options) -> f64 {
        let n = self.n;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.sys.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.sys.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.sys.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.sys.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.sys.rhs(t + h, tmp, k6);
        for i in 0..n {
            y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        self.sys.rhs(t + h, y1, k7);
        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        (err / n as f64).sqrt()
    }

    fn dense(&self, t: f64, y: &[f64], y1: &[f64], h: f64) -> DenseStep {
        let n = self.n;
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let mut rc: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
        for i in 0..n {
            let ydiff = y1[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            rc[0][i] = y[i];
            rc[1][i] = ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - h * k7[i] - bspl;
            rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        DenseStep { t0: t, h, rc }
    }
}

fn initial_step<S: OdeSystem>(sys: &S, t: f64, y: &[f64], f0: &[f64], dir: f64, opts: &Options) -> f64 {
    let n = y.len();
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let rms = |v: &dyn Fn(usize) -> f64| ((0..n).map(|i| (v(i) / sc[i]).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(&|i| y[i]);
    let d1 = rms(&|i| f0[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t + dir * h0, &y1, &mut f1);
    let d2 = rms(&|i| f1[i] - f0[i]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(opts.h_max)
}

/// Integrates from `t0` to `t1` (either direction), recording every accepted
/// step.
pub fn integrate<S: OdeSystem>(sys: &S, t0: f64, y0: &[f64], t1: f64, opts: &Options) -> Result<Solution> {
    Ok(run(sys, t0, y0, t1, opts, None)?.0)
}

/// Integrates until the event fires or `t_max` is reached.
pub fn integrate_to_event<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_max: f64,
    opts: &Options,
    event: &Event,
) -> Result<(Solution, Option<EventHit>)> {
    run(sys, t0, y0, t_max, opts, Some(event))
}

fn run<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Options,
    event: Option<&Event>,
) -> Result<(Solution, Option<EventHit>)> {
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::InvalidInput(format!("state has length {}, system expects {n}", y0.len())));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    let mut sol = Solution { ts: vec![t0], ys: vec![y0.to_vec()], ..Default::default() };
    if t_end == t0 {
        return Ok((sol, None));
    }
    let dir = (t_end - t0).signum();
    let mut st = Stepper::new(sys);
    let mut t = t0;
    let mut y = y0.to_vec();
    if opts.project {
        sys.project(&mut y);
        sol.ys[0] = y.clone();
    }
    let mut y1 = vec![0.0; n];
    sys.rhs(t, &y, &mut st.k[0]);
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(sys, t, &y, &st.k[0], dir, opts)).abs();
    let mut g_prev = event.map(|e| (e.g)(t, &y));
    let mut reject_streak = false;

    for _ in 0..opts.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let min_h = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < min_h {
            return Err(Error::StepSizeUnderflow { t, state: y });
        }
        h = h.min(opts.h_max);
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let err = st.step(t, &y, dir * hs, &mut y1, opts);
        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h = hs * if reject_streak { fac.min(0.5) } else { fac };
            reject_streak = true;
            sol.rejected += 1;
            continue;
        }
        reject_streak = false;
        let t_new = if last { t_end } else { t + dir * hs };
        let dense = if opts.dense || event.is_some() { Some(st.dense(t, &y, &y1, dir * hs)) } else { None };

        if let (Some(ev), Some(gp)) = (event, g_prev) {
            let g_new = (ev.g)(t_new, &y1);
            if let Some(hit) = locate_event(&mut st, ev, t, &y, gp, t_new, g_new, dense.as_ref().unwrap(), opts) {
                sol.ts.push(hit.t);
                sol.ys.push(hit.y.clone());
                if opts.dense {
                    let d = dense.unwrap();
                    sol.steps.push(d);
                }
                return Ok((sol, Some(hit)));
            }
            g_prev = Some(g_new);
        }

        if opts.project {
            sys.project(&mut y1);
        }
        std::mem::swap(&mut y, &mut y1);
        t = t_new;
        if opts.project {
            sys.rhs(t, &y, &mut st.k[0]);
        } else {
            st.k.swap(0, 6);
        }
        sol.ts.push(t);
        sol.ys.push(y.clone());
        if opts.dense {
            sol.steps.push(dense.unwrap());
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = hs * fac;
        if last {
            break;
        }
    }
    if (t_end - t) * dir > 0.0 {
        return Err(Error::StepSizeUnderflow { t, state: y });
    }
    Ok((sol, None))
}

#[allow(clippy::too_many_arguments)]
fn locate_event<S: OdeSystem>(
    st: &mut Stepper<S>,
    ev: &Event,
    t0: f64,
    y0: &[f64],
    g0: f64,
    t1: f64,
    g1: f64,
    dense: &DenseStep,
    opts: &Options,
) -> Option<EventHit> {
    let crosses = match ev.direction {
        1 => g0 < 0.0 && g1 >= 0.0,
        -1 => g0 > 0.0 && g1 <= 0.0,
        _ => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
    };
    if !crosses || t1 < ev.t_min {
        return None;
    }
    let n = y0.len();
    let mut buf = vec![0.0; n];
    let mut g_dense = |t: f64| {
        dense.eval_into(t, &mut buf);
        (ev.g)(t, &buf)
    };
    // Bracketing on the interpolant.
    let (mut a, mut b, mut ga) = (t0, t1, g0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g_dense(m);
        if (gm < 0.0) == (ga < 0.0) && gm != 0.0 {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let mut t_star = 0.5 * (a + b);
    if t_star < ev.t_min {
        return None;
    }
    // Secant polish against genuine single steps from the step start, which
    // carry the full integrator accuracy rather than the interpolant's.
    let mut y_star = vec![0.0; n];
    let eval_step = |st: &mut Stepper<S>, t: f64, out: &mut [f64]| -> f64 {
        if t == t0 {
            out.copy_from_slice(y0);
        } else {
            st.sys.rhs(t0, y0, &mut st.k[0]);
            st.step(t0, y0, t - t0, out, opts);
        }
        (ev.g)(t, out)
    };
    let width = (t1 - t0).abs();
    let mut ta = t_star;
    let mut fa = eval_step(st, ta, &mut y_star);
    let mut tb = t_star + 1e-7 * width.max(1e-12) * (t1 - t0).signum();
    let mut tmp = vec![0.0; n];
    let mut fb = eval_step(st, tb, &mut tmp);
    for _ in 0..8 {
        if fa == 0.0 || fb == fa {
            break;
        }
        let tn = tb - fb * (tb - ta) / (fb - fa);
        if !tn.is_finite() || (tn - t_star).abs() > width {
            break;
        }
        ta = tb;
        fa = fb;
        tb = tn;
        fb = eval_step(st, tb, &mut tmp);
        if (tb - ta).abs() <= 4.0 * f64::EPSILON * tb.abs().max(1.0) {
            break;
        }
    }
    if fb.abs() <= fa.abs() {
        t_star = tb;
        y_star = tmp;
    } else {
        t_star = ta;
        eval_step(st, ta, &mut y_star);
    }
    Some(EventHit { t: t_star, y: y_star })
}
