use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PolynomialPotential;

/// Largest search box half-width for the initial ray march.
const MAX_HALF_WIDTH: f64 = 1e3;
/// The box may grow to this multiple of its initial size before the region
/// is declared unbounded.
const MAX_GROWTH: usize = 8;
/// Residual `|V − E|` accepted for boundary vertices.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// The component of `{V ≤ E}` containing the origin, with its traced
/// boundary loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillRegion {
    pub energy: f64,
    pub loops: Vec<Vec<[f64; 2]>>,
    /// `[x1_min, x1_max, x2_min, x2_max]` of the boundary, padded by two grid cells.
    pub bbox: [f64; 4],
    pub resolution: usize,
}

impl HillRegion {
    /// `V(x) ≤ E` and `x` inside the traced boundary (even-odd rule over all
    /// loops).
    pub fn contains(&self, potential: &PolynomialPotential, x1: f64, x2: f64) -> bool {
        if potential.value(x1, x2) > self.energy {
            return false;
        }
        let mut inside = false;
        for lp in &self.loops {
            inside ^= point_in_polygon(lp, x1, x2);
        }
        inside
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.loops.iter().flatten()
    }
}

fn point_in_polygon(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let [xi, yi] = poly[i];
        let [xj, yj] = poly[(i + n - 1) % n];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
    }
    inside
}

/// Traces the boundary of the Hill region on a `resolution × resolution`
/// grid, refining every vertex onto `V = E` and inserting degenerate critical
/// points of `V` that lie on the level set.
pub fn hill_region(potential: &PolynomialPotential, energy: f64, resolution: usize) -> Result<HillRegion> {
    if resolution < 32 {
        return Err(Error::InvalidInput(format!("resolution must be at least 32, got {resolution}")));
    }
    let v0 = potential.value(0.0, 0.0);
    if !(energy > v0) {
        return Err(Error::InvalidInput(format!("energy {energy} must exceed V(0) = {v0}")));
    }
    let mut half = initial_half_width(potential, energy);
    let mut n = resolution;
    let mut refinements = 0;
    loop {
        let grid = Grid::new(half, n);
        match grid.flood(potential, energy) {
            Fill::Bounded(mask) => return Ok(trace(potential, energy, &grid, &mask)),
            // Grow the box at fixed spacing, so a leak through a narrow
            // channel cannot disappear on a coarser grid.
            Fill::Leaked if n < MAX_GROWTH * resolution => {
                half *= 2.0;
                n *= 2;
            }
            Fill::Leaked => return Err(Error::UnboundedRegion { energy }),
            Fill::NoSeed if refinements < 20 => {
                half /= 4.0;
                refinements += 1;
            }
            Fill::NoSeed => {
                return Err(Error::InvalidInput(format!("energy {energy} too close to V(0) = {v0}")))
            }
        }
    }
}

enum Fill {
    Bounded(Vec<bool>),
    Leaked,
    NoSeed,
}

fn initial_half_width(potential: &PolynomialPotential, energy: f64) -> f64 {
    let mut r_max: f64 = 0.0;
    for k in 0..64 {
        let th = std::f64::consts::TAU * k as f64 / 64.0;
        let (c, s) = (th.cos(), th.sin());
        // March outward until V reaches E or stops increasing (a saddle on
        // the ray); the flood fill grows the box if this underestimates.
        let mut r = 1e-3;
        let mut v = potential.value(r * c, r * s);
        while r < MAX_HALF_WIDTH && v < energy {
            let v_next = potential.value(1.1 * r * c, 1.1 * r * s);
            r *= 1.1;
            if v_next < v {
                break;
            }
            v = v_next;
        }
        r_max = r_max.max(r);
    }
    (1.25 * r_max).min(MAX_HALF_WIDTH)
}

struct Grid {
    origin: f64,
    h: f64,
    n: usize,
}

impl Grid {
    /// Nodes at `origin + (i + ½)h`, so that no node sits on the axes.
    fn new(half: f64, n: usize) -> Self {
        let h = 2.0 * half / n as f64;
        Self { origin: -half, h, n }
    }

    fn x(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.h
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// 4-connected fill of `{V < E}` from a node next to the origin.
    fn flood(&self, potential: &PolynomialPotential, energy: f64) -> Fill {
        let n = self.n;
        let below: Vec<bool> = (0..n * n)
            .map(|k| potential.value(self.x(k / n), self.x(k % n)) < energy)
            .collect();
        let c = n / 2;
        let Some(start) = [(c, c), (c - 1, c), (c, c - 1), (c - 1, c - 1)]
            .into_iter()
            .find(|&(i, j)| below[self.idx(i, j)])
        else {
            return Fill::NoSeed;
        };
        let mut mask = vec![false; n * n];
        let mut queue = VecDeque::from([start]);
        mask[self.idx(start.0, start.1)] = true;
        while let Some((i, j)) = queue.pop_front() {
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                return Fill::Leaked;
            }
            for (a, b) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                let k = self.idx(a, b);
                if below[k] && !mask[k] {
                    mask[k] = true;
                    queue.push_back((a, b));
                }
            }
        }
        Fill::Bounded(mask)
    }
}

/// Grid edge between node `(i, j)` and its right (`horizontal`) or upper
/// neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Edge {
    i: usize,
    j: usize,
    horizontal: bool,
}

fn trace(potential: &PolynomialPotential, energy: f64, grid: &Grid, mask: &[bool]) -> HillRegion {
    let n = grid.n;
    let inside = |i: usize, j: usize| mask[grid.idx(i, j)];
    let mut next: HashMap<Edge, Edge> = HashMap::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            // Corners counter-clockwise and the edge leaving each corner.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let edges = [
                Edge { i, j, horizontal: true },
                Edge { i: i + 1, j, horizontal: false },
                Edge { i, j: j + 1, horizontal: true },
                Edge { i, j, horizontal: false },
            ];
            let ins: [bool; 4] = corners.map(|(a, b)| inside(a, b));
            // Each maximal run of inside corners yields one segment from its
            // exit edge to its entry edge; diagonal pairs stay separate, in
            // line with the 4-connected fill.
            for k in 0..4 {
                if ins[k] && !ins[(k + 1) % 4] {
                    let mut s = k;
                    while ins[(s + 3) % 4] {
                        s = (s + 3) % 4;
                    }
                    next.insert(edges[k], edges[(s + 3) % 4]);
                }
            }
        }
    }

    let mut loops = Vec::new();
    let mut keys: Vec<Edge> = next.keys().copied().collect();
    keys.sort_by_key(|e| (e.i, e.j, e.horizontal));
    let mut used: HashMap<Edge, bool> = HashMap::new();
    for start in keys {
        if used.contains_key(&start) {
            continue;
        }
        let mut lp = Vec::new();
        let mut e = start;
        loop {
            used.insert(e, true);
            if let Some(p) = edge_point(potential, energy, grid, e) {
                lp.push(p);
            }
            e = next[&e];
            if e == start {
                break;
            }
        }
        insert_critical_points(potential, energy, grid.h, &mut lp);
        if lp.len() >= 3 {
            loops.push(lp);
        }
    }

    let mut bbox = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in loops.iter().flatten() {
        bbox[0] = bbox[0].min(p[0]);
        bbox[1] = bbox[1].max(p[0]);
        bbox[2] = bbox[2].min(p[1]);
        bbox[3] = bbox[3].max(p[1]);
    }
    let pad = 2.0 * grid.h;
    bbox = [bbox[0] - pad, bbox[1] + pad, bbox[2] - pad, bbox[3] + pad];
    HillRegion { energy, loops, bbox, resolution: n }
}

fn edge_point(potential: &PolynomialPotential, energy: f64, grid: &Grid, e: Edge) -> Option<[f64; 2]> {
    let (i2, j2) = if e.horizontal { (e.i + 1, e.j) } else { (e.i, e.j + 1) };
    let a = [grid.x(e.i), grid.x(e.j)];
    let b = [grid.x(i2), grid.x(j2)];
    let fa = potential.value(a[0], a[1]) - energy;
    let fb = potential.value(b[0], b[1]) - energy;
    let s = if (fa < 0.0) != (fb < 0.0) { fa / (fa - fb) } else { 0.5 };
    let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    refine_onto_level(potential, energy, p, grid.h)
}

/// Newton iteration along `∇V` onto `V = E`, with steps capped at `h`.
fn refine_onto_level(potential: &PolynomialPotential, energy: f64, mut p: [f64; 2], h: f64) -> Option<[f64; 2]> {
    for _ in 0..50 {
        let f = potential.value(p[0], p[1]) - energy;
        if f.abs() < 1e-14 * energy.abs().max(1.0) {
            break;
        }
        let g = potential.gradient(p[0], p[1]);
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 < 1e-28 {
            break;
        }
        let mut step = [f * g[0] / g2, f * g[1] / g2];
        let len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if len > h {
            step = [step[0] * h / len, step[1] * h / len];
        }
        p = [p[0] - step[0], p[1] - step[1]];
    }
    ((potential.value(p[0], p[1]) - energy).abs() < BOUNDARY_TOL).then_some(p)
}

/// Critical points of `V` lying on the level set (saddles at threshold
/// energies) are missed by the grid; locate them by Newton on `∇V = 0` from
/// loop vertices of locally minimal `|∇V|` and splice them into the loop.
fn insert_critical_points(potential: &PolynomialPotential, energy: f64, h: f64, lp: &mut Vec<[f64; 2]>) {
    let n = lp.len();
    if n < 3 {
        return;
    }
    let gnorm: Vec<f64> = lp
        .iter()
        .map(|p| {
            let g = potential.gradient(p[0], p[1]);
            g[0].hypot(g[1])
        })
        .collect();
    let hess_scale = lp.iter().map(|p| potential.hessian(p[0], p[1]).norm()).fold(0.0, f64::max);
    let mut found: Vec<[f64; 2]> = Vec::new();
    for k in 0..n {
        let (prev, next) = (gnorm[(k + n - 1) % n], gnorm[(k + 1) % n]);
        if !(gnorm[k] <= prev && gnorm[k] <= next && gnorm[k] < 4.0 * h * hess_scale.max(1.0)) {
            continue;
        }
        let Some(c) = newton_critical(potential, lp[k]) else { continue };
        let dist = (c[0] - lp[k][0]).hypot(c[1] - lp[k][1]);
        let on_level = (potential.value(c[0], c[1]) - energy).abs() < 1e-10 * energy.abs().max(1.0);
        let dup = found.iter().any(|f| (f[0] - c[0]).hypot(f[1] - c[1]) < 1e-9);
        if dist < 3.0 * h && on_level && !dup {
            found.push(c);
        }
    }
    for c in found {
        let m = lp.len();
        let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        let best = (0..m)
            .min_by(|&a, &b| {
                let cost = |k: usize| d(lp[k], c) + d(c, lp[(k + 1) % m]) - d(lp[k], lp[(k + 1) % m]);
                cost(a).total_cmp(&cost(b))
            })
            .unwrap();
        lp.insert(best + 1, c);
    }
}

fn newton_critical(potential: &PolynomialPotential, mut p: [f64; 2]) -> Option<[f64; 2]> {
    for _ in 0..50 {
        let g = potential.gradient(p[0], p[1]);
        if g[0].hypot(g[1]) < 1e-14 {
            return Some(p);
        }
        let hm = potential.hessian(p[0], p[1]);
        let step = hm.lu().solve(&nalgebra::Vector2::new(g[0], g[1]))?;
        p = [p[0] - step[0], p[1] - step[1]];
    }
    let g = potential.gradient(p[0], p[1]);
    (g[0].hypot(g[1]) < 1e-12).then_some(p)
}
