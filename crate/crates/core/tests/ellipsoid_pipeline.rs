//! Numerical pipeline on the ellipsoid `|z1|²/r1² + |z2|²/r2² = 1` against the
//! closed-form values.

use num_complex::Complex64;
use reeb_core::cz::{
    disk_class_index, geometric_index, rotation_number, shift_class, z_tilde, SymplecticPath,
};
use reeb_core::disk::{DiskFrame, SpanningDisk};
use reeb_core::flow::{find_periodic_orbit, variational_path, Frame, GlobalFrame, PeriodicOrbit, ScanParams, SymmetrySpec};
use reeb_core::{HamiltonianModel, PhasePoint, Result, TangentVector};
use std::f64::consts::{PI, TAU};

const R1: f64 = 1.0;

fn r2() -> f64 {
    2f64.powf(0.25)
}

fn model() -> HamiltonianModel {
    HamiltonianModel::ellipsoid(R1, r2()).unwrap()
}

fn p1(m: &HamiltonianModel) -> PeriodicOrbit {
    let seed = PhasePoint::new(0.98, 0.01, 0.02, -0.01);
    find_periodic_orbit(m, 1.0, SymmetrySpec::None { seed, period_guess: None }, &ScanParams::default()).unwrap()
}

fn p2(m: &HamiltonianModel) -> PeriodicOrbit {
    let seed = PhasePoint::new(0.01, r2() - 0.02, 0.0, 0.01);
    find_periodic_orbit(m, 1.0, SymmetrySpec::None { seed, period_guess: None }, &ScanParams::default()).unwrap()
}

#[test]
fn reeb_periods() {
    let m = model();
    assert!((p1(&m).reeb_action - PI).abs() < 1e-6 * PI);
    assert!((p2(&m).reeb_action - PI * 2f64.sqrt()).abs() < 1e-6 * PI * 2f64.sqrt());
}

#[test]
fn disk_frame_monodromy_is_the_closed_form_rotation() {
    let m = model();
    let orbit = p1(&m);
    let disk = SpanningDisk::ellipsoid_p1(R1, r2(), 64, 128).unwrap();
    let frame = DiskFrame::new(&m, &disk).unwrap();
    let path = variational_path(&m, &orbit, &frame, 1, 256).unwrap();
    let rho = 1.0 + R1 * R1 / (r2() * r2());
    // The transported frame is symplectic but not orthonormal at the orbit, so
    // φ(1) is conjugate to the rotation rather than equal to it.
    let end = path.end();
    assert!((end.trace() - 2.0 * (TAU * rho).cos()).abs() < 1e-6);
    assert!((end.determinant() - 1.0).abs() < 1e-8);
    assert!((rotation_number(&path, 1).unwrap() - rho).abs() < 1e-6);
}

#[test]
fn disk_class_indices() {
    let m = model();
    let d1 = SpanningDisk::ellipsoid_p1(R1, r2(), 64, 128).unwrap();
    let d2 = SpanningDisk::ellipsoid_p2(R1, r2(), 64, 128).unwrap();
    assert_eq!(disk_class_index(&m, &p1(&m), &d1, 1, 256).unwrap(), 3);
    assert_eq!(disk_class_index(&m, &p2(&m), &d2, 1, 256).unwrap(), 5);
}

#[test]
fn wrong_disk_is_rejected() {
    let m = model();
    let d2 = SpanningDisk::ellipsoid_p2(R1, r2(), 64, 128).unwrap();
    assert!(disk_class_index(&m, &p1(&m), &d2, 1, 256).is_err());
}

#[test]
fn global_and_disk_classes_differ_by_whole_turns() {
    let m = model();
    let orbit = p1(&m);
    let disk = SpanningDisk::ellipsoid_p1(R1, r2(), 64, 128).unwrap();
    let frame = DiskFrame::new(&m, &disk).unwrap();
    let a = geometric_index(&variational_path(&m, &orbit, &frame, 1, 256).unwrap()).unwrap();
    let b = geometric_index(&variational_path(&m, &orbit, &GlobalFrame, 1, 256).unwrap()).unwrap();
    assert_eq!((a.index - b.index).rem_euclid(2), 0);
    let w = a.rotation.rotation_number - b.rotation.rotation_number;
    assert!((w - w.round()).abs() < 1e-6);
}

/// The section `Z̃` (or `Z̃₁` for `p = 1`) along the `z1`-circle, in the
/// identification `a + ib ≡ a∂x2 + b∂y2`. The orbit here runs clockwise, so the
/// sections are conjugated to keep their winding relative to the orbit.
struct AppendixFrame {
    p: i64,
}

impl Frame for AppendixFrame {
    fn label(&self) -> String {
        format!("appendix-b:{}", self.p)
    }

    fn raw(&self, _model: &HamiltonianModel, p: PhasePoint) -> Result<(TangentVector, TangentVector)> {
        let t = (-p.z1().arg() / TAU).rem_euclid(1.0);
        let c = if self.p == 1 { -Complex64::from_polar(1.0, -TAU * t) } else { z_tilde(self.p, t) }.conj();
        let f1 = TangentVector::from_z(Complex64::new(0.0, 0.0), c);
        Ok((f1, f1.mul_complex(-Complex64::i())))
    }
}

#[test]
fn appendix_class_index() {
    let m = model();
    let orbit = p1(&m);
    let path = |p| variational_path(&m, &orbit, &AppendixFrame { p }, 1, 256).unwrap();
    assert_eq!(geometric_index(&path(1)).unwrap().index, 3);
    for p in 2..=5 {
        let mu = geometric_index(&path(p)).unwrap().index;
        assert_eq!(mu, 2 * p - 1);
        assert_eq!(shift_class(3, -(2 - p)), mu);
    }
}

#[test]
fn iterates_follow_the_rotation_number() {
    let m = model();
    let orbit = p1(&m);
    let disk = SpanningDisk::ellipsoid_p1(R1, r2(), 64, 128).unwrap();
    let frame = DiskFrame::new(&m, &disk).unwrap();
    let one: SymplecticPath = variational_path(&m, &orbit, &frame, 1, 256).unwrap();
    let rho = rotation_number(&one, 1).unwrap();
    for n in 2..=3 {
        let direct = variational_path(&m, &orbit, &frame, n, 256).unwrap();
        let mu = geometric_index(&direct).unwrap().index;
        assert_eq!(mu, 2 * (n as f64 * rho).floor() as i64 + 1);
    }
}
