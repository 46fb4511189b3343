use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::winding::angle_increment;
use super::{j0, SymplecticPath};
use crate::error::{Error, Result};

const ZERO: f64 = 1e-12;
const MAX_WINDING_CHECK: i64 = 5;

/// `S(t)` sampled at `t_i = i/M`, `i = 0, …, M−1`, on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPotential {
    pub samples: Vec<Matrix2<f64>>,
    /// `max ‖S − Sᵀ‖` before symmetrization.
    pub symmetry_defect: f64,
}

impl SymmetricPotential {
    pub fn from_fn(s: impl Fn(f64) -> Matrix2<f64>, m: usize) -> Self {
        let samples: Vec<Matrix2<f64>> = (0..m).map(|i| s(i as f64 / m as f64)).collect();
        let symmetry_defect = samples.iter().map(|s| (s - s.transpose()).amax()).fold(0.0, f64::max);
        Self { samples: samples.iter().map(|s| 0.5 * (s + s.transpose())).collect(), symmetry_defect }
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }
}

/// `S = −J₀ φ' φ⁻¹` with `φ'` by fourth-order central differences, time
/// rescaled so the whole path has length 1. Beyond the ends the path is
/// continued periodically: `φ(t + 1) = φ(t) φ(1)`.
pub fn path_to_symmetric_potential(path: &SymplecticPath) -> Result<SymmetricPotential> {
    let m = path.matrices.len() - 1;
    if m < 256 {
        return Err(Error::Sampling(format!("{m} intervals; at least 256 required")));
    }
    let h = path.duration() / m as f64;
    if path.times.iter().enumerate().any(|(i, t)| (t - i as f64 * h).abs() > 1e-9 * path.duration()) {
        return Err(Error::Sampling("path grid must be uniform".into()));
    }
    let end = path.end();
    let end_inv = end.try_inverse().ok_or_else(|| Error::NotSymplectic { defect: f64::INFINITY })?;
    let phi = |i: i64| -> Matrix2<f64> {
        if i < 0 {
            path.matrices[(m as i64 + i) as usize] * end_inv
        } else if i as usize > m {
            path.matrices[i as usize - m] * end
        } else {
            path.matrices[i as usize]
        }
    };
    let dt = 1.0 / m as f64;
    let j0 = j0();
    let raw: Vec<Matrix2<f64>> = (0..m as i64)
        .map(|i| {
            let d = (phi(i - 2) - 8.0 * phi(i - 1) + 8.0 * phi(i + 1) - phi(i + 2)) / (12.0 * dt);
            -j0 * d * phi(i).try_inverse().unwrap_or_else(|| Matrix2::from_element(f64::NAN))
        })
        .collect();
    let defect = raw.iter().map(|s| (s - s.transpose()).amax()).fold(0.0, f64::max);
    if !(defect < 1e-4) {
        return Err(Error::NotSymplectic { defect });
    }
    Ok(SymmetricPotential { samples: raw.iter().map(|s| 0.5 * (s + s.transpose())).collect(), symmetry_defect: defect })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Sorted eigenvalues inside the computed window.
    pub eigenvalues: Vec<f64>,
    pub windings: Vec<i64>,
    pub eta_negative: f64,
    pub eta_nonnegative: f64,
    pub wind_negative: i64,
    pub wind_nonnegative: i64,
    /// Grid size `N`; the Galerkin space has `N − 1` complex modes.
    pub n: usize,
    pub monotone: bool,
    /// Every winding `|k| ≤ 5` is carried by exactly two eigenvalues.
    pub two_per_winding: bool,
}

/// Fourier coefficients `f̂_j = (1/M) Σ f(t_i) e^{−2πi j t_i}` for `|j| ≤ jmax`,
/// zero beyond the Nyquist limit of the samples.
fn fourier(values: &[Complex64], jmax: i64) -> Vec<Complex64> {
    let m = values.len() as i64;
    let nyquist = (m - 1) / 2;
    let twiddle: Vec<Complex64> = (0..m).map(|r| Complex64::from_polar(1.0, -TAU * r as f64 / m as f64)).collect();
    (-jmax..=jmax)
        .map(|j| {
            if j.abs() > nyquist {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in values.iter().enumerate() {
                acc += v * twiddle[(j * i as i64).rem_euclid(m) as usize];
            }
            acc / m as f64
        })
        .collect()
}

/// Real symmetric matrix of `L_S` on loops `z(t) = Σ_{|k| ≤ K} c_k e^{2πikt}`
/// in the basis `(Re c_k, Im c_k)`, identifying `J₀` with `i`.
///
/// `S z = α z + β z̄` with `α = (a + c)/2`, `β = (a − c)/2 + ib` for
/// `S = [[a, b], [b, c]]`.
fn galerkin_matrix(s: &SymmetricPotential, k: i64) -> DMatrix<f64> {
    let alpha: Vec<Complex64> =
        s.samples.iter().map(|m| Complex64::new(0.5 * (m[(0, 0)] + m[(1, 1)]), 0.0)).collect();
    let beta: Vec<Complex64> =
        s.samples.iter().map(|m| Complex64::new(0.5 * (m[(0, 0)] - m[(1, 1)]), m[(0, 1)])).collect();
    let a_hat = fourier(&alpha, 2 * k);
    let b_hat = fourier(&beta, 2 * k);
    let coef = |c: &[Complex64], j: i64| c[(j + 2 * k) as usize];
    let dim = 2 * (2 * k + 1) as usize;
    let mut l = DMatrix::zeros(dim, dim);
    for m in -k..=k {
        for (part, u) in [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))] {
            let col = 2 * (m + k) as usize + part;
            for kk in -k..=k {
                let mut out = -coef(&a_hat, kk - m) * u - coef(&b_hat, kk + m) * u.conj();
                if kk == m {
                    out += TAU * kk as f64 * u;
                }
                let row = 2 * (kk + k) as usize;
                l[(row, col)] = out.re;
                l[(row + 1, col)] = out.im;
            }
        }
    }
    0.5 * (&l + l.transpose())
}

/// Conley–Zehnder index as `wind(η^{<0}) + wind(η^{≥0})` from a Fourier–
/// Galerkin discretization of `L_S` with `N − 1` modes.
pub fn spectral_index(s: &SymmetricPotential, n: usize) -> Result<(SpectralResult, i64)> {
    if n < 256 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!("N must be a power of two ≥ 256, got {n}")));
    }
    if s.samples.is_empty() {
        return Err(Error::InvalidInput("empty potential".into()));
    }
    let k = (n / 2 - 1) as i64;
    let l = galerkin_matrix(s, k);
    let reach = TAU * (MAX_WINDING_CHECK + 1) as f64 + s.max_norm();
    let pairs = window_eigenpairs(l, -reach, reach);
    let grid = 2 * (2 * k as usize + 1);
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut windings = Vec::with_capacity(pairs.len());
    for (lambda, v) in &pairs {
        eigenvalues.push(*lambda);
        windings.push(loop_winding(v, k, grid)?);
    }
    let neg = eigenvalues.iter().rposition(|&e| e < -ZERO);
    let nonneg = eigenvalues.iter().position(|&e| e >= -ZERO);
    let (Some(i_neg), Some(i_non)) = (neg, nonneg) else {
        return Err(Error::Resolution("no eigenvalues on one side of 0 in the window".into()));
    };
    let monotone = windings.windows(2).all(|w| w[0] <= w[1]);
    let two_per_winding =
        (-MAX_WINDING_CHECK..=MAX_WINDING_CHECK).all(|w| windings.iter().filter(|&&x| x == w).count() == 2);
    let result = SpectralResult {
        eta_negative: eigenvalues[i_neg],
        eta_nonnegative: eigenvalues[i_non],
        wind_negative: windings[i_neg],
        wind_nonnegative: windings[i_non],
        eigenvalues,
        windings,
        n,
        monotone,
        two_per_winding,
    };
    let index = result.wind_negative + result.wind_nonnegative;
    Ok((result, index))
}

fn loop_winding(v: &DVector<f64>, k: i64, grid: usize) -> Result<i64> {
    let coeffs: Vec<Complex64> = (0..(2 * k + 1) as usize).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect();
    let values: Vec<Complex64> = (0..=grid)
        .map(|g| {
            let t = g as f64 / grid as f64;
            let mut z = Complex64::new(0.0, 0.0);
            let step = Complex64::from_polar(1.0, TAU * t);
            let mut e = Complex64::from_polar(1.0, -TAU * k as f64 * t);
            for c in &coeffs {
                z += c * e;
                e *= step;
            }
            z
        })
        .collect();
    let max = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min < 1e-8 * max {
        return Err(Error::Resolution(format!("eigenvector passes within {:e} of 0; increase N", min / max)));
    }
    let turns = angle_increment(values)?;
    Ok(turns.round() as i64)
}

/// Eigenpairs with eigenvalue in `[lo, hi]`, sorted: Householder
/// tridiagonalization, Sturm bisection and inverse iteration on the
/// tridiagonal, then back-transformation.
fn window_eigenpairs(m: DMatrix<f64>, lo: f64, hi: f64) -> Vec<(f64, DVector<f64>)> {
    let (q, diag, off) = nalgebra::linalg::SymmetricTridiagonal::new(m).unpack();
    let tri = Tridiagonal { d: diag.as_slice().to_vec(), e: off.as_slice().to_vec() };
    let values = tri.eigenvalues_in(lo, hi);
    let scale = tri.norm();
    let mut vectors: Vec<DVector<f64>> = Vec::with_capacity(values.len());
    for (i, &lambda) in values.iter().enumerate() {
        let mut cluster_start = i;
        while cluster_start > 0 && lambda - values[cluster_start - 1] < 1e-3 * scale.max(1.0) {
            cluster_start -= 1;
        }
        let y = tri.inverse_iteration(lambda, i, &vectors[cluster_start..i]);
        vectors.push(y);
    }
    values.into_iter().zip(vectors).map(|(l, y)| (l, &q * y)).collect()
}

struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    fn norm(&self) -> f64 {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                self.d[i].abs()
                    + if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.e[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * self.norm().max(1.0);
        let mut q = self.d[0] - x;
        let mut count = usize::from(q < 0.0);
        for i in 1..self.d.len() {
            if q == 0.0 {
                q = tiny;
            }
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            count += usize::from(q < 0.0);
        }
        count
    }

    fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (c_lo, c_hi) = (self.count_below(lo), self.count_below(hi));
        let tol = 4.0 * f64::EPSILON * self.norm().max(1.0);
        (c_lo..c_hi)
            .map(|j| {
                // The (j+1)-th smallest eigenvalue lies in [lo, hi).
                let (mut a, mut b) = (lo, hi);
                while b - a > tol {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.count_below(mid) > j {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Inverse iteration with partial pivoting, orthogonalized against the
    /// already computed vectors of the same cluster.
    fn inverse_iteration(&self, lambda: f64, seed: usize, cluster: &[DVector<f64>]) -> DVector<f64> {
        let n = self.d.len();
        let scale = self.norm().max(1.0);
        let lu = TriLu::new(&self.d, &self.e, lambda, scale);
        // Deterministic, well-spread start vector.
        let mut x = DVector::from_fn(n, |i, _| {
            let u = ((i as u64 + 1).wrapping_mul(2654435761).wrapping_add(seed as u64 * 40503) % 1000) as f64;
            u / 1000.0 - 0.5
        });
        for _ in 0..4 {
            for c in cluster {
                let proj = c.dot(&x);
                x -= c * proj;
            }
            x.normalize_mut();
            x = lu.solve(&x);
        }
        for c in cluster {
            let proj = c.dot(&x);
            x -= c * proj;
        }
        x.normalize()
    }
}

/// LU factorization of `T − λI` with row interchanges; `U` has two
/// superdiagonals.
struct TriLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swap: Vec<bool>,
}

impl TriLu {
    fn new(d: &[f64], e: &[f64], lambda: f64, scale: f64) -> Self {
        let n = d.len();
        let tiny = f64::EPSILON * scale;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swap = vec![false; n];
        // Current row i holds (a, b, c) in columns i, i+1, i+2.
        let mut a = d[0] - lambda;
        let mut b = if n > 1 { e[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a.abs() < tiny { tiny } else { a };
                break;
            }
            // Next row: (sub, diag, sup) in columns i, i+1, i+2.
            let (sub, dia, sup) = (e[i], d[i + 1] - lambda, if i + 2 < n { e[i + 1] } else { 0.0 });
            if sub.abs() > a.abs() {
                swap[i] = true;
                let m = a / sub;
                l[i] = m;
                u0[i] = sub;
                u1[i] = dia;
                u2[i] = sup;
                a = b - m * dia;
                b = c - m * sup;
            } else {
                let pivot = if a.abs() < tiny { tiny } else { a };
                let m = sub / pivot;
                l[i] = m;
                u0[i] = pivot;
                u1[i] = b;
                u2[i] = c;
                a = dia - m * b;
                b = sup - m * c;
            }
            c = 0.0;
        }
        Self { u0, u1, u2, l, swap }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let n = rhs.len();
        let mut y = rhs.clone();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                y.swap_rows(i, i + 1);
            }
            y[i + 1] -= self.l[i] * y[i];
        }
        let mut x = DVector::zeros(n);
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cz::geometric_index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_rotation_spectrum() {
        let theta = 0.7;
        let s = SymmetricPotential::from_fn(|_| Matrix2::identity() * TAU * theta, 64);
        let (r, index) = spectral_index(&s, 256).unwrap();
        assert_eq!(index, 1);
        assert_eq!((r.wind_negative, r.wind_nonnegative), (0, 1));
        for (lambda, w) in r.eigenvalues.iter().zip(&r.windings) {
            assert!((lambda - TAU * (*w as f64 - theta)).abs() < 1e-9);
        }
        assert!(r.monotone && r.two_per_winding);
    }

    #[test]
    fn full_turn_constant_potential() {
        // η = 0 has winding 1 and counts as η^{≥0}; η^{<0} = −2π has winding 0.
        let s = SymmetricPotential::from_fn(|_| Matrix2::identity() * TAU, 64);
        let (r, index) = spectral_index(&s, 256).unwrap();
        assert_eq!(r.wind_nonnegative, 1);
        assert!(r.eta_nonnegative.abs() < 1e-9);
        assert_eq!(r.wind_negative, 0);
        assert_eq!(index, 1);
    }

    #[test]
    fn potential_of_rotation_path() {
        let s = path_to_symmetric_potential(&SymplecticPath::rotation(0.7, 512)).unwrap();
        for m in &s.samples {
            assert!((m - Matrix2::identity() * TAU * 0.7).amax() < 1e-6);
        }
    }

    #[test]
    fn potential_of_hyperbolic_path() {
        let p = SymplecticPath::from_fn(|t| Matrix2::new(t.exp(), 0.0, 0.0, (-t).exp()), 1.0, 512).unwrap();
        let s = path_to_symmetric_potential(&p).unwrap();
        assert!(s.symmetry_defect < 1e-6);
        // φ' φ⁻¹ = diag(1, −1), so S = −J₀ diag(1, −1) = [[0, −1], [−1, 0]].
        for m in &s.samples {
            assert!((m - Matrix2::new(0.0, -1.0, -1.0, 0.0)).amax() < 1e-6);
        }
    }

    #[test]
    fn tridiagonal_window_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 60;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let m = &a + a.transpose();
        let full = m.clone().symmetric_eigen();
        let mut want: Vec<f64> = full.eigenvalues.iter().copied().filter(|x: &f64| x.abs() < 2.0).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = window_eigenpairs(m.clone(), -2.0, 2.0);
        assert_eq!(got.len(), want.len());
        for ((l, v), w) in got.iter().zip(&want) {
            assert!((l - w).abs() < 1e-10);
            assert!((&m * v - v * *l).norm() < 1e-8);
        }
    }

    #[test]
    fn random_paths_agree_with_geometric_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 6 {
            let c: Vec<f64> = (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s_fn = move |t: f64| {
                let mut m = Matrix2::new(TAU * 2.0 * c[0], 4.0 * c[1], 4.0 * c[1], TAU * 2.0 * c[2]);
                for j in 1..=3 {
                    let (sn, cs) = (TAU * j as f64 * t).sin_cos();
                    let b = 3 + 6 * (j - 1);
                    let a = Matrix2::new(c[b], c[b + 1], c[b + 1], c[b + 2]) * cs;
                    let bb = Matrix2::new(c[b + 3], c[b + 4], c[b + 4], c[b + 5]) * sn;
                    m += (a + bb) * 3.0;
                }
                m
            };
            let path = SymplecticPath::from_potential(s_fn.clone(), 1024).unwrap();
            let Ok(g) = geometric_index(&path) else { continue };
            if g.flagged || (2.0 - path.end().trace()).abs() < 1e-3 {
                continue;
            }
            let s = SymmetricPotential::from_fn(s_fn, 512);
            let (r, index) = spectral_index(&s, 512).unwrap();
            assert_eq!(index, g.index);
            assert!(r.monotone && r.two_per_winding);
            checked += 1;
        }
    }
}
