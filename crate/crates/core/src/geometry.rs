//! Symplectic and contact structure of R⁴ ≅ C² and of the unit sphere S³.
//!
//! Coordinates are ordered `(x1, x2, y1, y2)` everywhere. Two complex views are
//! used: the Hermitian pairing `z1 = x1 + i y1, z2 = x2 + i y2` (in which the
//! lens-space deck maps act diagonally) and the Lagrangian pairing
//! `w1 = x1 + i x2, w2 = y1 + i y2` (in which the Hénon–Heiles rotation acts).
//!
//! With `ω₀ = Σ dy_i ∧ dx_i` the compatible complex structure on C² is
//! multiplication by `-i`, so positively oriented frames of `ξ_std` have the
//! form `(f, -i f)`.

use std::f64::consts::TAU;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R⁴, serialized as `[x1, x2, y1, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct PhasePoint {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl From<[f64; 4]> for PhasePoint {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<PhasePoint> for [f64; 4] {
    fn from(p: PhasePoint) -> Self {
        p.to_array()
    }
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { x1: 0.0, x2: 0.0, y1: 0.0, y2: 0.0 };

    pub const fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self { x1, x2, y1, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_z(z1: Complex64, z2: Complex64) -> Self {
        Self::new(z1.re, z2.re, z1.im, z2.im)
    }

    pub fn from_w(w1: Complex64, w2: Complex64) -> Self {
        Self::new(w1.re, w1.im, w2.re, w2.im)
    }

    pub fn z1(self) -> Complex64 {
        Complex64::new(self.x1, self.y1)
    }

    pub fn z2(self) -> Complex64 {
        Complex64::new(self.x2, self.y2)
    }

    pub fn w1(self) -> Complex64 {
        Complex64::new(self.x1, self.x2)
    }

    pub fn w2(self) -> Complex64 {
        Complex64::new(self.y1, self.y2)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.y1 * self.y1 + self.y2 * self.y2
    }

    pub fn dist(self, other: PhasePoint) -> f64 {
        (self - other).norm()
    }

    /// Position vector of the point as a tangent vector at the origin.
    pub fn as_vector(self) -> TangentVector {
        TangentVector(self.to_array())
    }

    pub fn normalized(self) -> PhasePoint {
        let n = self.norm();
        PhasePoint::from((self.as_vector() * (1.0 / n)).0)
    }
}

impl Add<TangentVector> for PhasePoint {
    type Output = PhasePoint;
    fn add(self, v: TangentVector) -> PhasePoint {
        PhasePoint::new(self.x1 + v.0[0], self.x2 + v.0[1], self.y1 + v.0[2], self.y2 + v.0[3])
    }
}

impl Sub for PhasePoint {
    type Output = TangentVector;
    fn sub(self, other: PhasePoint) -> TangentVector {
        TangentVector([
            self.x1 - other.x1,
            self.x2 - other.x2,
            self.y1 - other.y1,
            self.y2 - other.y2,
        ])
    }
}

/// A free vector with components in the `(∂x1, ∂x2, ∂y1, ∂y2)` basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector(pub [f64; 4]);

impl TangentVector {
    pub const ZERO: TangentVector = TangentVector([0.0; 4]);

    /// Coordinate basis vector; `0..4` map to `∂x1, ∂x2, ∂y1, ∂y2`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        TangentVector(v)
    }

    pub fn from_z(z1: Complex64, z2: Complex64) -> Self {
        TangentVector([z1.re, z2.re, z1.im, z2.im])
    }

    pub fn z1(self) -> Complex64 {
        Complex64::new(self.0[0], self.0[2])
    }

    pub fn z2(self) -> Complex64 {
        Complex64::new(self.0[1], self.0[3])
    }

    pub fn dot(self, other: TangentVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Multiplication by a complex scalar in the Hermitian (z) view.
    pub fn mul_complex(self, c: Complex64) -> TangentVector {
        TangentVector::from_z(c * self.z1(), c * self.z2())
    }

    pub fn to_vector4(self) -> Vector4<f64> {
        Vector4::from(self.0)
    }

    pub fn from_vector4(v: &Vector4<f64>) -> Self {
        TangentVector([v[0], v[1], v[2], v[3]])
    }
}

impl Index<usize> for TangentVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for TangentVector {
    type Output = TangentVector;
    fn add(self, o: TangentVector) -> TangentVector {
        TangentVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for TangentVector {
    type Output = TangentVector;
    fn sub(self, o: TangentVector) -> TangentVector {
        TangentVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul<f64> for TangentVector {
    type Output = TangentVector;
    fn mul(self, s: f64) -> TangentVector {
        TangentVector(self.0.map(|a| a * s))
    }
}

impl Neg for TangentVector {
    type Output = TangentVector;
    fn neg(self) -> TangentVector {
        self * -1.0
    }
}

/// A positively oriented pair of vectors spanning `ξ_std` at a point of S³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    pub base: PhasePoint,
    pub f1: TangentVector,
    pub f2: TangentVector,
}

/// `ω₀(u, v)` for `ω₀ = Σ dy_i ∧ dx_i`.
pub fn symplectic_form(u: TangentVector, v: TangentVector) -> f64 {
    let (u, v) = (u.0, v.0);
    (u[2] * v[0] - u[0] * v[2]) + (u[3] * v[1] - u[1] * v[3])
}

/// `λ₀ = ½ Σ (y_i dx_i − x_i dy_i)` evaluated at `p` on `v`.
pub fn liouville(p: PhasePoint, v: TangentVector) -> f64 {
    0.5 * (p.y1 * v.0[0] + p.y2 * v.0[1] - p.x1 * v.0[2] - p.x2 * v.0[3])
}

/// The vector `a` with `λ₀(v) = ⟨a, v⟩`.
pub fn liouville_covector(p: PhasePoint) -> TangentVector {
    TangentVector([0.5 * p.y1, 0.5 * p.y2, -0.5 * p.x1, -0.5 * p.x2])
}

/// The Liouville vector field `Y = ½ (x ∂x + y ∂y)`, with `ι_Y ω₀ = λ₀`.
pub fn liouville_field(p: PhasePoint) -> TangentVector {
    p.as_vector() * 0.5
}

/// `g_{p,q}ⁿ(pt)` with `g_{p,q}(z1, z2) = (e^{2πi/p} z1, e^{2πiq/p} z2)`.
pub fn deck_action(p_order: i64, q_twist: i64, n: i64, pt: PhasePoint) -> Result<PhasePoint> {
    if p_order < 1 {
        return Err(Error::InvalidInput(format!("deck group order must be ≥ 1, got {p_order}")));
    }
    if num_integer::gcd(p_order, q_twist) != 1 {
        return Err(Error::InvalidInput(format!(
            "deck action needs coprime (p, q), got ({p_order}, {q_twist})"
        )));
    }
    let k1 = n.rem_euclid(p_order);
    let k2 = (n * q_twist).rem_euclid(p_order);
    let r1 = unit_root(k1, p_order);
    let r2 = unit_root(k2, p_order);
    Ok(PhasePoint::from_z(r1 * pt.z1(), r2 * pt.z2()))
}

/// Pushforward of a tangent vector under `g_{p,q}ⁿ` (the map is linear).
pub fn deck_action_vector(p_order: i64, q_twist: i64, n: i64, v: TangentVector) -> Result<TangentVector> {
    let image = deck_action(p_order, q_twist, n, PhasePoint::from(v.0))?;
    Ok(image.as_vector())
}

/// `ĝ_{3,1}ⁿ(pt)`: rotation by `2π/3` in both Lagrangian planes `w1`, `w2`.
pub fn hat_action(n: i64, pt: PhasePoint) -> PhasePoint {
    let r = unit_root(n.rem_euclid(3), 3);
    PhasePoint::from_w(r * pt.w1(), r * pt.w2())
}

fn unit_root(k: i64, n: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * k as f64 / n as f64)
}

/// The orthogonal map `ψ = (1/√2)(x1−y2, −x1−y2, x2+y1, x2−y1)` conjugating
/// `ĝ_{3,1}` to `g_{3,2}`.
pub fn psi(pt: PhasePoint) -> PhasePoint {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PhasePoint::new(
        s * (pt.x1 - pt.y2),
        s * (-pt.x1 - pt.y2),
        s * (pt.x2 + pt.y1),
        s * (pt.x2 - pt.y1),
    )
}

/// Matrix of `ψ` in the `(x1, x2, y1, y2)` basis.
pub fn psi_matrix() -> Matrix4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        s, 0.0, 0.0, -s, //
        -s, 0.0, 0.0, -s, //
        0.0, s, s, 0.0, //
        0.0, s, -s, 0.0,
    )
}

/// The unnormalized frame `f1 = (−z̄2, z̄1)`, `f2 = −i f1` at any nonzero point.
///
/// Both vectors annihilate `λ₀` and are tangent to the round sphere through
/// `p`; `ω₀(f1, f2) = |p|²`.
pub fn xi_frame_unchecked(p: PhasePoint) -> (TangentVector, TangentVector) {
    let f1 = TangentVector::from_z(-p.z2().conj(), p.z1().conj());
    let f2 = f1.mul_complex(Complex64::new(0.0, -1.0));
    (f1, f2)
}

/// Global trivialization of `ξ_std` over S³.
pub fn global_xi_frame(p: PhasePoint) -> Result<FramePair> {
    let r = p.norm();
    if (r - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere { radius: r });
    }
    let (f1, f2) = xi_frame_unchecked(p);
    Ok(FramePair { base: p, f1, f2 })
}

/// Stereographic projection of S³ to R³ after rotating a chosen pole to
/// `(0, 0, 0, 1)`.
#[derive(Debug, Clone)]
pub struct Stereographic {
    pole: PhasePoint,
    rotation: Matrix4<f64>,
}

impl Stereographic {
    pub fn new(pole: PhasePoint) -> Result<Self> {
        let r = pole.norm();
        if (r - 1.0).abs() > 1e-9 {
            return Err(Error::NotOnSphere { radius: r });
        }
        let p = Vector4::from(pole.to_array());
        let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
        let v = p - e4;
        let rotation = if v.norm() < 1e-15 {
            Matrix4::identity()
        } else {
            // Householder reflection sends pole to e4; the extra reflection
            // x1 ↦ −x1 fixes e4 and restores det = +1.
            let h = Matrix4::identity() - (v * v.transpose()) * (2.0 / v.norm_squared());
            let mut d = Matrix4::identity();
            d[(0, 0)] = -1.0;
            d * h
        };
        Ok(Self { pole, rotation })
    }

    pub fn pole(&self) -> PhasePoint {
        self.pole
    }

    pub fn project(&self, p: PhasePoint) -> Result<Vector3<f64>> {
        let d = p.dist(self.pole);
        if d <= 1e-6 {
            return Err(Error::TooCloseToPole { distance: d });
        }
        let q = self.rotation * Vector4::from(p.to_array());
        let s = 1.0 - q[3];
        Ok(Vector3::new(q[0] / s, q[1] / s, q[2] / s))
    }

    pub fn lift(&self, y: Vector3<f64>) -> PhasePoint {
        let r2 = y.norm_squared();
        let q = Vector4::new(2.0 * y[0], 2.0 * y[1], 2.0 * y[2], r2 - 1.0) / (r2 + 1.0);
        let p = self.rotation.transpose() * q;
        PhasePoint::new(p[0], p[1], p[2], p[3])
    }

    /// Differential of the projection at `p` applied to `v`.
    pub fn push_vector(&self, p: PhasePoint, v: TangentVector) -> Vector3<f64> {
        let q = self.rotation * Vector4::from(p.to_array());
        let dq = self.rotation * v.to_vector4();
        let s = 1.0 - q[3];
        Vector3::new(
            dq[0] / s + q[0] * dq[3] / (s * s),
            dq[1] / s + q[1] * dq[3] / (s * s),
            dq[2] / s + q[2] * dq[3] / (s * s),
        )
    }

    /// `+1` when the projection carries the orientation of S³ given by
    /// `λ₀ ∧ dλ₀` to the standard orientation of R³, `-1` otherwise.
    pub fn orientation_sign(&self) -> f64 {
        // Any point away from the pole works: the projection is a
        // diffeomorphism of the connected set S³ \ {pole}.
        let p = self.lift(Vector3::new(0.3, -0.2, 0.1));
        let (f1, f2) = xi_frame_unchecked(p);
        // Reeb field of λ₀ on the unit sphere: X = J∇|p|² with λ₀(X) = 1.
        let reeb = TangentVector([2.0 * p.y1, 2.0 * p.y2, -2.0 * p.x1, -2.0 * p.x2]);
        let a = self.push_vector(p, reeb);
        let b = self.push_vector(p, f1);
        let c = self.push_vector(p, f2);
        a.dot(&b.cross(&c)).signum()
    }

    /// Pole on S³ maximizing the minimum distance to the given samples,
    /// chosen from a fixed candidate set.
    pub fn avoiding(samples: &[PhasePoint]) -> Result<Self> {
        let mut best = (PhasePoint::new(0.0, 0.0, 0.0, 1.0), f64::NEG_INFINITY);
        for c in pole_candidates() {
            let d = samples.iter().map(|s| s.dist(c)).fold(f64::INFINITY, f64::min);
            if d > best.1 + 1e-12 {
                best = (c, d);
            }
        }
        Self::new(best.0)
    }
}

fn pole_candidates() -> Vec<PhasePoint> {
    // Hopf-coordinate lattice: (cos η e^{iα}, sin η e^{iβ}).
    let mut out = Vec::new();
    for i in 0..7 {
        let eta = (i as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / 7.0;
        for j in 0..12 {
            for k in 0..12 {
                let a = TAU * (j as f64 + 0.25) / 12.0;
                let b = TAU * (k as f64 + 0.75) / 12.0;
                out.push(PhasePoint::from_z(
                    Complex64::from_polar(eta.cos(), a),
                    Complex64::from_polar(eta.sin(), b),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng) -> PhasePoint {
        PhasePoint::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    }

    fn random_sphere_point(rng: &mut impl Rng) -> PhasePoint {
        loop {
            let p = random_point(rng);
            if p.norm() > 0.1 {
                return p.normalized();
            }
        }
    }

    #[test]
    fn symplectic_form_basis_values() {
        let dx1 = TangentVector::basis(0);
        let dx2 = TangentVector::basis(1);
        let dy1 = TangentVector::basis(2);
        assert_eq!(symplectic_form(dy1, dx1), 1.0);
        assert_eq!(symplectic_form(dx1, dy1), -1.0);
        assert_eq!(symplectic_form(dx1, dx2), 0.0);
        let v = TangentVector([0.3, -1.2, 2.0, 0.7]);
        assert_eq!(symplectic_form(v, v), 0.0);
    }

    #[test]
    fn liouville_examples() {
        assert_eq!(liouville(PhasePoint::new(1.0, 0.0, 0.0, 0.0), TangentVector::basis(2)), -0.5);
        assert_eq!(liouville(PhasePoint::ORIGIN, TangentVector([1.0, 2.0, 3.0, 4.0])), 0.0);
        assert_eq!(liouville(PhasePoint::new(0.0, 1.0, 0.0, 0.0), TangentVector::basis(1)), 0.0);
    }

    #[test]
    fn complex_views_round_trip() {
        let p = PhasePoint::new(0.1, -0.2, 0.3, -0.4);
        assert_eq!(PhasePoint::from_z(p.z1(), p.z2()), p);
        assert_eq!(PhasePoint::from_w(p.w1(), p.w2()), p);
    }

    #[test]
    fn deck_action_examples() {
        let p = PhasePoint::new(0.3, -0.1, 0.5, 0.2);
        let g = deck_action(2, 1, 1, p).unwrap();
        assert_abs_diff_eq!((g.as_vector() + p.as_vector()).norm(), 0.0, epsilon = 1e-15);

        let g = deck_action(4, 1, 1, PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g.dist(PhasePoint::new(0.0, 0.0, 1.0, 0.0)), 0.0, epsilon = 1e-15);

        for (pp, q) in [(3, 1), (3, 2), (5, 2), (7, 3)] {
            let back = deck_action(pp, q, pp, p).unwrap();
            assert!(back.dist(p) < 1e-12);
        }
        assert!(deck_action(4, 2, 1, p).is_err());
        assert!(deck_action(0, 1, 1, p).is_err());
    }

    #[test]
    fn deck_and_hat_preserve_liouville() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = random_sphere_point(&mut rng);
            let v = random_point(&mut rng).as_vector();
            let n = rng.gen_range(-5..6);
            let gp = deck_action(5, 2, n, p).unwrap();
            let gv = deck_action_vector(5, 2, n, v).unwrap();
            assert!((liouville(gp, gv) - liouville(p, v)).abs() < 1e-12);
            assert!((gp.z1().norm() - p.z1().norm()).abs() < 1e-12);
            let hp = hat_action(n, p);
            let hv = hat_action(n, PhasePoint::from(v.0)).as_vector();
            assert!((liouville(hp, hv) - liouville(p, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_action_examples() {
        let h = hat_action(1, PhasePoint::new(1.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(h.x1, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.x2, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        let p = PhasePoint::new(0.3, -0.1, 0.5, 0.2);
        assert!(hat_action(3, p).dist(p) < 1e-12);
        assert!(hat_action(1, hat_action(1, hat_action(1, p))).dist(p) < 1e-12);
    }

    #[test]
    fn psi_is_orthogonal_and_conjugates_the_actions() {
        let m = psi_matrix();
        assert!((m.transpose() * m - Matrix4::identity()).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = random_point(&mut rng);
            let v = random_point(&mut rng).as_vector();
            assert!((psi(p).norm() - p.norm()).abs() < 1e-14);
            let lhs = psi(hat_action(1, p));
            let rhs = deck_action(3, 2, 1, psi(p)).unwrap();
            assert!(lhs.dist(rhs) < 1e-12);
            let dv = psi(PhasePoint::from(v.0)).as_vector();
            assert!((liouville(psi(p), dv) - liouville(p, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn global_frame_examples() {
        let f = global_xi_frame(PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(f.f1, TangentVector([0.0, 1.0, 0.0, 0.0]));
        // f2 = −i·f1, i.e. −∂y2.
        assert_eq!(f.f2, TangentVector([0.0, 0.0, 0.0, -1.0]));
        assert!(global_xi_frame(PhasePoint::new(2.0, 0.0, 0.0, 0.0)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = random_sphere_point(&mut rng);
            let f = global_xi_frame(p).unwrap();
            assert!(liouville(p, f.f1).abs() < 1e-12);
            assert!(liouville(p, f.f2).abs() < 1e-12);
            assert!(p.as_vector().dot(f.f1).abs() < 1e-12);
            assert!((f.f1.norm() - 1.0).abs() < 1e-12);
            assert!(symplectic_form(f.f1, f.f2) > 0.0);
        }
    }

    #[test]
    fn stereographic_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pole = random_sphere_point(&mut rng);
        let st = Stereographic::new(pole).unwrap();
        let anti = PhasePoint::from((pole.as_vector() * -1.0).0);
        assert!(st.project(anti).unwrap().norm() < 1e-12);
        assert!(st.project(pole).is_err());
        for _ in 0..200 {
            let p = random_sphere_point(&mut rng);
            let y = st.project(p).unwrap();
            assert!(st.lift(y).dist(p) < 1e-10);
            // Equator: orthogonal to the pole.
            let e = (p.as_vector() - pole.as_vector() * p.as_vector().dot(pole.as_vector())).0;
            let e = PhasePoint::from(e).normalized();
            assert!((st.project(e).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        assert!(st.orientation_sign().abs() == 1.0);
    }

    #[test]
    fn rotation_has_unit_determinant() {
        let st = Stereographic::new(PhasePoint::new(0.5, 0.5, 0.5, 0.5)).unwrap();
        assert!((st.rotation.determinant() - 1.0).abs() < 1e-12);
        let st = Stereographic::new(PhasePoint::new(0.0, 0.0, 0.0, -1.0)).unwrap();
        assert!((st.rotation.determinant() - 1.0).abs() < 1e-12);
    }
}
