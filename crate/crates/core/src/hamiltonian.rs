//! Hamiltonian models on R⁴ with exact derivatives, and their Hamiltonian and
//! Reeb vector fields.
//!
//! Sign conventions follow `ι_{X_H} ω₀ = −dH` with `ω₀ = Σ dy_i ∧ dx_i`, so
//! `ẋ_i = ∂H/∂y_i` and `ẏ_i = −∂H/∂x_i`. On a starshaped level set the Reeb
//! field of `λ₀` is `X_H / λ₀(X_H)`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{liouville, PhasePoint, TangentVector};
use crate::poly::{rational, Poly2, Poly4};

/// Threshold on `|λ₀(X_H)|` below which a point is not starshaped.
pub const STARSHAPED_THRESHOLD: f64 = 1e-8;

/// A potential `V(x1, x2)` with its first and second derivatives precomputed
/// symbolically.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    v: Poly2,
    v1: Poly2,
    v2: Poly2,
    v11: Poly2,
    v12: Poly2,
    v22: Poly2,
}

/// Values of `V` and its derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJet {
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v11: f64,
    pub v12: f64,
    pub v22: f64,
}

impl PolynomialPotential {
    pub fn new(v: Poly2) -> Self {
        let v1 = v.derivative(0);
        let v2 = v.derivative(1);
        let v11 = v1.derivative(0);
        let v12 = v1.derivative(1);
        let v22 = v2.derivative(1);
        Self { v, v1, v2, v11, v12, v22 }
    }

    /// `V = (x1² + x2²)/2 + x1² x2 − x2³/3`.
    pub fn henon_heiles() -> Self {
        Self::new(Poly2::new([
            (2, 0, rational(1, 2)),
            (0, 2, rational(1, 2)),
            (2, 1, rational(1, 1)),
            (0, 3, rational(-1, 3)),
        ]))
    }

    /// `V = (x1² + x2²)/2`.
    pub fn harmonic() -> Self {
        Self::new(Poly2::new([(2, 0, rational(1, 2)), (0, 2, rational(1, 2))]))
    }

    /// Terms `[a, b, c]` meaning `c·x1^a·x2^b`.
    pub fn from_terms(terms: &[[f64; 3]]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let (a, b) = (exponent(t[0])?, exponent(t[1])?);
            out.push((a, b, t[2]));
        }
        Ok(Self::new(Poly2::from_f64_terms(&out)?))
    }

    pub fn to_terms(&self) -> Vec<[f64; 3]> {
        self.v.approx_terms().iter().map(|&(a, b, c)| [a as f64, b as f64, c]).collect()
    }

    pub fn poly(&self) -> &Poly2 {
        &self.v
    }

    /// `[V_{x1}, V_{x2}, V_{x1x1}, V_{x1x2}, V_{x2x2}]` as exact polynomials.
    pub fn derivative_polys(&self) -> [&Poly2; 5] {
        [&self.v1, &self.v2, &self.v11, &self.v12, &self.v22]
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        self.v.eval(x1, x2)
    }

    pub fn gradient(&self, x1: f64, x2: f64) -> [f64; 2] {
        [self.v1.eval(x1, x2), self.v2.eval(x1, x2)]
    }

    pub fn hessian(&self, x1: f64, x2: f64) -> Matrix2<f64> {
        let h12 = self.v12.eval(x1, x2);
        Matrix2::new(self.v11.eval(x1, x2), h12, h12, self.v22.eval(x1, x2))
    }

    pub fn jet(&self, x1: f64, x2: f64) -> PotentialJet {
        PotentialJet {
            v: self.v.eval(x1, x2),
            v1: self.v1.eval(x1, x2),
            v2: self.v2.eval(x1, x2),
            v11: self.v11.eval(x1, x2),
            v12: self.v12.eval(x1, x2),
            v22: self.v22.eval(x1, x2),
        }
    }
}

fn exponent(x: f64) -> Result<u32> {
    if x >= 0.0 && x.fract() == 0.0 && x <= 64.0 {
        Ok(x as u32)
    } else {
        Err(Error::InvalidInput(format!("exponent must be a small non-negative integer, got {x}")))
    }
}

/// A general polynomial Hamiltonian with symbolic gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialHamiltonian {
    h: Poly4,
    grad: [Poly4; 4],
    hess: [[Poly4; 4]; 4],
}

impl PolynomialHamiltonian {
    pub fn new(h: Poly4) -> Self {
        let grad: [Poly4; 4] = std::array::from_fn(|i| h.derivative(i));
        let hess = std::array::from_fn(|i| std::array::from_fn(|j| grad[i].derivative(j)));
        Self { h, grad, hess }
    }

    pub fn poly(&self) -> &Poly4 {
        &self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `H = (y1² + y2²)/2 + V(x1, x2)`.
    Mechanical(PolynomialPotential),
    /// `H = (x1² + y1²)/r1² + (x2² + y2²)/r2²`.
    Ellipsoid { r1: f64, r2: f64 },
    Polynomial(PolynomialHamiltonian),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub name: String,
    pub kind: ModelKind,
}

/// JSON model definition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDefinition {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    /// Polynomial terms `[a, b, c, d, coefficient]` for `x1^a x2^b y1^c y2^d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<[f64; 5]>>,
}

impl HamiltonianModel {
    pub fn mechanical(name: impl Into<String>, potential: PolynomialPotential) -> Self {
        Self { name: name.into(), kind: ModelKind::Mechanical(potential) }
    }

    pub fn henon_heiles() -> Self {
        Self::mechanical("henon-heiles", PolynomialPotential::henon_heiles())
    }

    pub fn harmonic() -> Self {
        Self::mechanical("harmonic", PolynomialPotential::harmonic())
    }

    pub fn ellipsoid(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::InvalidInput(format!("ellipsoid radii must be positive, got ({r1}, {r2})")));
        }
        Ok(Self { name: "ellipsoid".into(), kind: ModelKind::Ellipsoid { r1, r2 } })
    }

    /// The `g_{4,1}`-invariant decoupled model
    /// `(x2²+y2²)/2 + (x1²+y1²)/2 + 2(x1²+y1²)(y1x1 − x1y1) − 4(x1⁶ − 3x1⁴y1² − 3x1²y1⁴ + y1⁶)`,
    /// assembled term by term; the cubic product cancels identically.
    pub fn decoupled_z4() -> Self {
        let x1 = Poly4::var(0);
        let x2 = Poly4::var(1);
        let y1 = Poly4::var(2);
        let y2 = Poly4::var(3);
        let r1sq = x1.pow(2).add(&y1.pow(2));
        let quad = x2.pow(2).add(&y2.pow(2)).scale(0.5).add(&r1sq.scale(0.5));
        let cross = r1sq.mul(&y1.mul(&x1).sub(&x1.mul(&y1))).scale(2.0);
        let sextic = x1
            .pow(6)
            .sub(&x1.pow(4).mul(&y1.pow(2)).scale(3.0))
            .sub(&x1.pow(2).mul(&y1.pow(4)).scale(3.0))
            .add(&y1.pow(6))
            .scale(-4.0);
        let h = quad.add(&cross).add(&sextic);
        Self { name: "decoupled-z4".into(), kind: ModelKind::Polynomial(PolynomialHamiltonian::new(h)) }
    }

    /// Built-in models: `henon-heiles`, `decoupled-z4`, `ellipsoid` (radii
    /// `1` and `2^{1/4}`), `harmonic`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "henon-heiles" => Ok(Self::henon_heiles()),
            "decoupled-z4" => Ok(Self::decoupled_z4()),
            "ellipsoid" => Self::ellipsoid(1.0, 2f64.powf(0.25)),
            "harmonic" => Ok(Self::harmonic()),
            other => Err(Error::InvalidInput(format!("unknown built-in model '{other}'"))),
        }
    }

    pub fn from_definition(def: &ModelDefinition) -> Result<Self> {
        let name = def.name.clone().unwrap_or_else(|| def.kind.clone());
        match def.kind.as_str() {
            "mechanical" => {
                let terms = def
                    .potential
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("mechanical model needs 'potential'".into()))?;
                Ok(Self::mechanical(name, PolynomialPotential::from_terms(terms)?))
            }
            "ellipsoid" => {
                let (r1, r2) = def
                    .r1
                    .zip(def.r2)
                    .ok_or_else(|| Error::InvalidInput("ellipsoid model needs 'r1' and 'r2'".into()))?;
                let mut m = Self::ellipsoid(r1, r2)?;
                m.name = name;
                Ok(m)
            }
            "polynomial" => {
                let terms = def
                    .terms
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("polynomial model needs 'terms'".into()))?;
                let mut out = Vec::with_capacity(terms.len());
                for t in terms {
                    let e = [exponent(t[0])?, exponent(t[1])?, exponent(t[2])?, exponent(t[3])?];
                    out.push((e, t[4]));
                }
                Ok(Self {
                    name,
                    kind: ModelKind::Polynomial(PolynomialHamiltonian::new(Poly4::new(out))),
                })
            }
            other => Err(Error::InvalidInput(format!(
                "model kind must be mechanical, ellipsoid or polynomial, got '{other}'"
            ))),
        }
    }

    pub fn potential(&self) -> Option<&PolynomialPotential> {
        match &self.kind {
            ModelKind::Mechanical(v) => Some(v),
            _ => None,
        }
    }

    pub fn value(&self, p: PhasePoint) -> f64 {
        match &self.kind {
            ModelKind::Mechanical(v) => 0.5 * (p.y1 * p.y1 + p.y2 * p.y2) + v.value(p.x1, p.x2),
            ModelKind::Ellipsoid { r1, r2 } => {
                (p.x1 * p.x1 + p.y1 * p.y1) / (r1 * r1) + (p.x2 * p.x2 + p.y2 * p.y2) / (r2 * r2)
            }
            ModelKind::Polynomial(h) => h.h.eval(&p.to_array()),
        }
    }

    pub fn gradient(&self, p: PhasePoint) -> TangentVector {
        match &self.kind {
            ModelKind::Mechanical(v) => {
                let g = v.gradient(p.x1, p.x2);
                TangentVector([g[0], g[1], p.y1, p.y2])
            }
            ModelKind::Ellipsoid { r1, r2 } => {
                let (a, b) = (2.0 / (r1 * r1), 2.0 / (r2 * r2));
                TangentVector([a * p.x1, b * p.x2, a * p.y1, b * p.y2])
            }
            ModelKind::Polynomial(h) => {
                let x = p.to_array();
                TangentVector(std::array::from_fn(|i| h.grad[i].eval(&x)))
            }
        }
    }

    /// `(H(p), ∇H(p))`.
    pub fn evaluate(&self, p: PhasePoint) -> (f64, TangentVector) {
        (self.value(p), self.gradient(p))
    }

    pub fn hessian(&self, p: PhasePoint) -> Matrix4<f64> {
        match &self.kind {
            ModelKind::Mechanical(v) => {
                let h = v.hessian(p.x1, p.x2);
                let mut m = Matrix4::zeros();
                m.fixed_view_mut::<2, 2>(0, 0).copy_from(&h);
                m[(2, 2)] = 1.0;
                m[(3, 3)] = 1.0;
                m
            }
            ModelKind::Ellipsoid { r1, r2 } => {
                let (a, b) = (2.0 / (r1 * r1), 2.0 / (r2 * r2));
                Matrix4::from_diagonal(&Vector4::new(a, b, a, b))
            }
            ModelKind::Polynomial(h) => {
                let x = p.to_array();
                Matrix4::from_fn(|i, j| h.hess[i][j].eval(&x))
            }
        }
    }

    pub fn hamiltonian_field(&self, p: PhasePoint) -> TangentVector {
        symplectic_gradient(self.gradient(p))
    }

    /// Jacobian of `X_H` at `p`.
    pub fn hamiltonian_jacobian(&self, p: PhasePoint) -> Matrix4<f64> {
        j_matrix() * self.hessian(p)
    }

    /// `λ₀(X_H)(p) = ½ ⟨p, ∇H(p)⟩`.
    pub fn liouville_of_field(&self, p: PhasePoint) -> f64 {
        liouville(p, self.hamiltonian_field(p))
    }

    /// Reeb field of `λ₀` restricted to the level set through `p`.
    pub fn reeb_field(&self, p: PhasePoint) -> Result<TangentVector> {
        let xh = self.hamiltonian_field(p);
        let g = liouville(p, xh);
        if g.abs() < STARSHAPED_THRESHOLD {
            return Err(Error::NotStarshaped { value: g });
        }
        Ok(xh * (1.0 / g))
    }

    /// Jacobian of `p ↦ X_H(p) / λ₀(X_H)(p)`.
    pub fn reeb_jacobian(&self, p: PhasePoint) -> Result<Matrix4<f64>> {
        let grad = self.gradient(p).to_vector4();
        let hess = self.hessian(p);
        let xh = j_matrix() * grad;
        let pv = Vector4::from(p.to_array());
        let g = 0.5 * pv.dot(&grad);
        if g.abs() < STARSHAPED_THRESHOLD {
            return Err(Error::NotStarshaped { value: g });
        }
        let grad_g = 0.5 * (grad + hess * pv);
        Ok(j_matrix() * hess / g - xh * grad_g.transpose() / (g * g))
    }
}

/// The matrix taking `∇H` to `X_H`.
pub fn j_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

pub fn symplectic_gradient(grad: TangentVector) -> TangentVector {
    let g = grad.0;
    TangentVector([g[2], g[3], -g[0], -g[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{deck_action, hat_action, symplectic_form};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng, scale: f64) -> PhasePoint {
        PhasePoint::from(std::array::from_fn::<f64, 4, _>(|_| rng.gen_range(-scale..scale)))
    }

    fn models() -> Vec<HamiltonianModel> {
        vec![
            HamiltonianModel::henon_heiles(),
            HamiltonianModel::decoupled_z4(),
            HamiltonianModel::ellipsoid(1.0, 1.3).unwrap(),
            HamiltonianModel::harmonic(),
        ]
    }

    #[test]
    fn henon_heiles_triangle_vertices() {
        let m = HamiltonianModel::henon_heiles();
        let s = 3f64.sqrt() / 2.0;
        for p in [(0.0, 1.0), (s, -0.5), (-s, -0.5)] {
            let (h, _) = m.evaluate(PhasePoint::new(p.0, p.1, 0.0, 0.0));
            assert!((h - 1.0 / 6.0).abs() < 1e-12);
        }
        let (_, g) = m.evaluate(PhasePoint::ORIGIN);
        assert_eq!(g, TangentVector::ZERO);
    }

    #[test]
    fn henon_heiles_hessian_closed_forms() {
        let v = PolynomialPotential::henon_heiles();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (x1, x2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let j = v.jet(x1, x2);
            assert_eq!(j.v11, 1.0 + 2.0 * x2);
            assert_eq!(j.v22, 1.0 - 2.0 * x2);
            assert_eq!(j.v12, 2.0 * x1);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in models() {
            for _ in 0..200 {
                let p = random_point(&mut rng, 0.8);
                let g = m.gradient(p);
                let hess = m.hessian(p);
                for i in 0..4 {
                    let h = 1e-5;
                    let e = TangentVector::basis(i) * h;
                    let fd = (m.value(p + e) - m.value(p + e * -1.0)) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "{} {i}", m.name);
                    let gp = m.gradient(p + e).to_vector4();
                    let gm = m.gradient(p + e * -1.0).to_vector4();
                    let col = (gp - gm) / (2.0 * h);
                    assert!((col - hess.column(i)).norm() <= 1e-6 * (1.0 + hess.norm()));
                }
            }
        }
    }

    #[test]
    fn hamiltonian_field_conventions() {
        let m = HamiltonianModel::henon_heiles();
        let p = PhasePoint::new(0.1, -0.2, 0.3, 0.4);
        let g = m.potential().unwrap().gradient(0.1, -0.2);
        assert_eq!(m.hamiltonian_field(p), TangentVector([0.3, 0.4, -g[0], -g[1]]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in models() {
            for _ in 0..200 {
                let p = random_point(&mut rng, 0.8);
                let x = m.hamiltonian_field(p);
                assert!(m.gradient(p).dot(x).abs() < 1e-12 * (1.0 + x.norm().powi(2)));
                // ι_X ω₀ = −dH
                let v = random_point(&mut rng, 1.0).as_vector();
                let lhs = symplectic_form(x, v);
                assert!((lhs + m.gradient(p).dot(v)).abs() < 1e-12 * (1.0 + x.norm() * v.norm()));
            }
        }
    }

    #[test]
    fn ellipsoid_circle_speed() {
        let r1 = 0.8;
        let m = HamiltonianModel::ellipsoid(r1, 1.5).unwrap();
        let x = m.hamiltonian_field(PhasePoint::new(r1, 0.0, 0.0, 0.0));
        // z1 = r1 e^{−2it/r1²}: velocity −(2i/r1) at z1 = r1.
        assert!((x.norm() - 2.0 / r1).abs() < 1e-15);
        assert!((x.z1().im + 2.0 / r1).abs() < 1e-15);
        let r = m.reeb_field(PhasePoint::new(r1, 0.0, 0.0, 0.0)).unwrap();
        assert!((r - x).norm() < 1e-15);
    }

    #[test]
    fn reeb_field_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in models() {
            for _ in 0..200 {
                let p = random_point(&mut rng, 0.3);
                if let Ok(r) = m.reeb_field(p) {
                    assert!((liouville(p, r) - 1.0).abs() < 1e-12);
                }
            }
        }
        let m = HamiltonianModel::henon_heiles();
        assert!(matches!(m.reeb_field(PhasePoint::ORIGIN), Err(Error::NotStarshaped { .. })));
    }

    #[test]
    fn reeb_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in models() {
            for _ in 0..50 {
                let p = random_point(&mut rng, 0.3);
                if m.liouville_of_field(p).abs() < 1e-2 {
                    continue;
                }
                let jac = m.reeb_jacobian(p).unwrap();
                for i in 0..4 {
                    let h = 1e-6;
                    let e = TangentVector::basis(i) * h;
                    let fd = (m.reeb_field(p + e).unwrap() - m.reeb_field(p + e * -1.0).unwrap()) * (0.5 / h);
                    let col = jac.column(i);
                    let err = (fd.to_vector4() - col).norm();
                    assert!(err < 1e-5 * (1.0 + col.norm()), "{} err {err}", m.name);
                }
            }
        }
    }

    #[test]
    fn symmetries_of_the_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let hh = HamiltonianModel::henon_heiles();
        let z4 = HamiltonianModel::decoupled_z4();
        for _ in 0..10_000 {
            let p = random_point(&mut rng, 1.0);
            assert!((hh.value(hat_action(1, p)) - hh.value(p)).abs() < 1e-12);
            let g = deck_action(4, 1, 1, p).unwrap();
            assert!((z4.value(g) - z4.value(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_model_has_no_cubic_terms() {
        let HamiltonianModel { kind: ModelKind::Polynomial(h), .. } = HamiltonianModel::decoupled_z4() else {
            unreachable!()
        };
        assert!(h.poly().terms().iter().all(|(e, _)| e.iter().sum::<u32>() != 4));
        assert_eq!(h.poly().terms().len(), 4 + 4);
    }

    #[test]
    fn model_definitions() {
        let def: ModelDefinition = serde_json::from_str(
            r#"{"kind":"mechanical","potential":[[2,0,0.5],[0,2,0.5],[2,1,1.0],[0,3,-0.3333333333333333]]}"#,
        )
        .unwrap();
        let m = HamiltonianModel::from_definition(&def).unwrap();
        let p = PhasePoint::new(0.1, 0.2, 0.3, 0.4);
        assert!((m.value(p) - HamiltonianModel::henon_heiles().value(p)).abs() < 1e-15);
        let def: ModelDefinition = serde_json::from_str(r#"{"kind":"ellipsoid","r1":1,"r2":2}"#).unwrap();
        assert!(HamiltonianModel::from_definition(&def).is_ok());
        assert!(serde_json::from_str::<ModelDefinition>(r#"{"kind":"ellipsoid","bogus":1}"#).is_err());
        let def: ModelDefinition = serde_json::from_str(r#"{"kind":"ellipsoid","r1":1}"#).unwrap();
        assert!(HamiltonianModel::from_definition(&def).is_err());
        assert!(HamiltonianModel::builtin("nope").is_err());
    }
}
