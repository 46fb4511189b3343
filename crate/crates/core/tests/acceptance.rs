//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p reeb-core --test acceptance`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use reeb_core::convexity::{certify_positive, g_e, hill_region, spot_check, CertStatus};
use reeb_core::cz::{
    appendix_frame, disk_class_index, equivariance_residual, geometric_index, iterate_index, rotation_number,
    spectral_index, winding, PathKind, SymmetricPotential, SymplecticPath,
};
use reeb_core::disk::SpanningDisk;
use reeb_core::ellipsoid::oracle;
use reeb_core::flow::{
    check_zp_symmetry, find_periodic_orbit, projection_is_simple, ScanParams, SymmetryAction, SymmetrySpec,
};
use reeb_core::geometry::{deck_action, hat_action, liouville, psi, psi_matrix};
use reeb_core::linking::{gauss_link, gauss_link_report, self_linking, ClosedCurve, LinkOptions, HOPF_LINK};
use reeb_core::{HamiltonianModel, PhasePoint, PolynomialPotential};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Smooth symmetric loop with random Fourier coefficients up to mode 3.
fn random_potential(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> Matrix2<f64> + Clone + Sync {
    let c: Vec<f64> = (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect();
    move |t: f64| {
        let mut m = Matrix2::new(TAU * 2.0 * c[0], 4.0 * c[1], 4.0 * c[1], TAU * 2.0 * c[2]);
        for j in 1..=3 {
            let (sn, cs) = (TAU * j as f64 * t).sin_cos();
            let b = 3 + 6 * (j - 1);
            let a = Matrix2::new(c[b], c[b + 1], c[b + 1], c[b + 2]) * cs;
            let bb = Matrix2::new(c[b + 3], c[b + 4], c[b + 4], c[b + 5]) * sn;
            m += (a + bb) * 3.0;
        }
        m
    }
}

fn convexity_certificates() -> Check {
    let v = PolynomialPotential::henon_heiles();
    let mut worst = Duration::ZERO;
    for energy in [0.01, 0.05, 0.10, 0.15] {
        let start = Instant::now();
        let cert = certify_positive(&v, energy, 16).map_err(|e| e.to_string())?;
        let dt = start.elapsed();
        worst = worst.max(dt);
        ensure(cert.status == CertStatus::ProvenPositive, format!("E = {energy}: {:?}", cert.status))?;
        ensure(dt < Duration::from_secs(60), format!("E = {energy} took {dt:?}"))?;
    }
    Ok(format!("slowest {worst:.2?}"))
}

fn g_e_identity() -> Check {
    let v = PolynomialPotential::henon_heiles();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let (x1, x2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let energy = rng.gen_range(0.0..1.0 / 6.0);
        let vv = v.value(x1, x2);
        let r2 = x1 * x1 + x2 * x2;
        let (a, b) = (2.0 * (energy - vv) * (1.0 - 4.0 * r2), (1.0 - 6.0 * vv) * r2);
        let residual = (g_e(&v, energy, x1, x2) - (a + b)).abs();
        // Relative to the size of the summands, which is the scale of the
        // cancellation.
        worst = worst.max(residual / (a.abs() + b.abs()).max(f64::MIN_POSITIVE));
    }
    ensure(worst < 1e-9, format!("relative residual {worst:e}"))?;
    Ok(format!("max relative residual {worst:.1e}"))
}

fn triangle_vertices() -> Check {
    let v = PolynomialPotential::henon_heiles();
    let s3 = 3f64.sqrt() / 2.0;
    let vertices = [[0.0, 1.0], [s3, -0.5], [-s3, -0.5]];
    for [x, y] in vertices {
        let err = (v.value(x, y) - 1.0 / 6.0).abs();
        ensure(err < 1e-12, format!("V({x}, {y}) off by {err:e}"))?;
    }
    let region = hill_region(&v, 1.0 / 6.0, 256).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for [a, b] in vertices {
        let d = region
            .loops
            .iter()
            .flatten()
            .map(|[x, y]| ((x - a).powi(2) + (y - b).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    ensure(worst < 1e-6, format!("boundary misses a vertex by {worst:e}"))?;
    Ok(format!("boundary-to-vertex {worst:.1e}"))
}

fn ellipsoid_round_trip() -> Check {
    let (r1, r2, p) = (1.0, 2f64.powf(0.25), 3);
    let data = oracle(r1, r2, p).map_err(|e| e.to_string())?;
    let model = HamiltonianModel::ellipsoid(r1, r2).map_err(|e| e.to_string())?;
    let shoot = |seed: PhasePoint| {
        find_periodic_orbit(&model, 1.0, SymmetrySpec::None { seed, period_guess: None }, &ScanParams::default())
            .map_err(|e| e.to_string())
    };
    let o1 = shoot(PhasePoint::new(0.98, 0.01, 0.02, -0.01))?;
    let o2 = shoot(PhasePoint::new(0.01, r2 - 0.02, 0.0, 0.01))?;
    let e1 = (o1.reeb_action / PI - 1.0).abs();
    let e2 = (o2.reeb_action / (PI * 2f64.sqrt()) - 1.0).abs();
    ensure(e1 < 1e-6 && e2 < 1e-6, format!("period errors {e1:e}, {e2:e}"))?;
    let d1 = SpanningDisk::ellipsoid_p1(r1, r2, 64, 128).map_err(|e| e.to_string())?;
    let d2 = SpanningDisk::ellipsoid_p2(r1, r2, 64, 128).map_err(|e| e.to_string())?;
    // P₁ᵖ downstairs lifts to the simple orbit upstairs.
    let mu1 = disk_class_index(&model, &o1, &d1, 1, 256).map_err(|e| e.to_string())?;
    let mu2 = disk_class_index(&model, &o2, &d2, 1, 256).map_err(|e| e.to_string())?;
    ensure((mu1, mu2) == (3, 5), format!("indices ({mu1}, {mu2})"))?;
    ensure(data.mu_p1_p == Some(3) && data.mu_p2_p == Some(5), format!("oracle {:?} {:?}", data.mu_p1_p, data.mu_p2_p))?;
    Ok(format!("period errors {e1:.1e}, {e2:.1e}; μ = {mu1}, {mu2}"))
}

fn cross_engine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut skipped) = (0, 0);
    while checked < 100 {
        let s_fn = random_potential(&mut rng);
        let path = SymplecticPath::from_potential(s_fn.clone(), 1024).map_err(|e| e.to_string())?;
        let Ok(g) = geometric_index(&path) else {
            skipped += 1;
            continue;
        };
        if g.flagged {
            skipped += 1;
            continue;
        }
        let s = SymmetricPotential::from_fn(s_fn, 512);
        let (r, mu) = spectral_index(&s, 512).map_err(|e| e.to_string())?;
        ensure(mu == g.index, format!("path {checked}: spectral {mu}, geometric {}", g.index))?;
        ensure(r.two_per_winding, format!("path {checked}: two-per-winding fails"))?;
        checked += 1;
    }
    Ok(format!("100 paths agree ({skipped} degenerate or near-integer skipped)"))
}

fn iterate_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 50 {
        let path = SymplecticPath::from_potential(random_potential(&mut rng), 512).map_err(|e| e.to_string())?;
        if path.end().trace().abs() >= 2.0 - 1e-3 {
            continue;
        }
        let rho = rotation_number(&path, 1).map_err(|e| e.to_string())?;
        for n in 1..=5 {
            let nr = n as f64 * rho;
            if (nr - nr.round()).abs() < 1e-6 {
                continue;
            }
            let it = path.iterate(n).map_err(|e| e.to_string())?;
            let g = geometric_index(&it).map_err(|e| e.to_string())?;
            let law = iterate_index(rho, PathKind::Elliptic, n as i64).map_err(|e| e.to_string())?;
            ensure(g.index == law, format!("ρ = {rho}, n = {n}: {} vs {law}", g.index))?;
            let per = rotation_number(&path, n).map_err(|e| e.to_string())?;
            worst = worst.max((per - rho).abs()).max((g.rotation.rotation_number - nr).abs());
        }
        checked += 1;
    }
    ensure(worst < 1e-8, format!("rotation relation off by {worst:e}"))?;
    Ok(format!("50 elliptic paths, rotation error {worst:.1e}"))
}

fn appendix_frames() -> Check {
    let mut worst: f64 = 0.0;
    for p in 2..=8 {
        let (z, z1) = appendix_frame(p, 64 * p as usize).map_err(|e| e.to_string())?;
        let w = winding(&z, &z1).map_err(|e| e.to_string())?;
        ensure(w == 2 - p, format!("p = {p}: winding {w}"))?;
        worst = worst.max(equivariance_residual(p, 1000));
    }
    ensure(worst < 1e-12, format!("equivariance residual {worst:e}"))?;
    Ok(format!("windings 2−p for p = 2..8, equivariance {worst:.1e}"))
}

fn psi_conjugacy() -> Check {
    let m = psi_matrix();
    let ortho = (m.transpose() * m - Matrix4::identity()).norm();
    ensure(ortho < 1e-12, format!("ψᵀψ − I = {ortho:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut point = || PhasePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let (mut lambda, mut conj) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (p, v) = (point(), point());
        let dv = psi(v).as_vector();
        lambda = lambda.max((liouville(psi(p), dv) - liouville(p, v.as_vector())).abs());
        let rhs = deck_action(3, 2, 1, psi(p)).map_err(|e| e.to_string())?;
        conj = conj.max(psi(hat_action(1, p)).dist(rhs));
    }
    ensure(lambda < 1e-12 && conj < 1e-12, format!("λ₀ {lambda:e}, conjugacy {conj:e}"))?;
    Ok(format!("orthogonality {ortho:.1e}, λ₀ {lambda:.1e}, conjugacy {conj:.1e}"))
}

fn henon_heiles_orbit() -> Check {
    let model = HamiltonianModel::henon_heiles();
    let start = Instant::now();
    let orbit = find_periodic_orbit(&model, 0.10, SymmetrySpec::Rotational, &ScanParams::default())
        .map_err(|e| e.to_string())?;
    let dt = start.elapsed();
    let closure = orbit.residuals.closure;
    let phase = check_zp_symmetry(&orbit, SymmetryAction::Hat, 3);
    ensure(closure < 1e-8, format!("closure {closure:e}"))?;
    ensure(phase < 1e-6, format!("phase {phase:e}"))?;
    ensure(projection_is_simple(&orbit), "projection self-intersects")?;
    ensure(dt < Duration::from_secs(120), format!("took {dt:?}"))?;
    Ok(format!("closure {closure:.1e}, phase {phase:.1e}, T = {:.6}, {dt:.2?}", orbit.period_hamiltonian))
}

fn linking_numbers() -> Check {
    let fiber = |z1: Complex64, z2: Complex64, n| ClosedCurve::hopf_fiber(PhasePoint::from_z(z1, z2), n);
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mut values = Vec::new();
    for n in [200, 400, 800, 1600] {
        let a = fiber(one, zero, n).map_err(|e| e.to_string())?;
        let b = fiber(zero, one, n).map_err(|e| e.to_string())?;
        let r = gauss_link_report(&a, &b, &LinkOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.link == HOPF_LINK, format!("n = {n}: link {}", r.link))?;
        ensure(gauss_link(&a.reversed(), &b).map_err(|e| e.to_string())? == -HOPF_LINK, "reversal does not flip sign")?;
        values.push(r.value);
    }
    let k = fiber(one, zero, 1000).map_err(|e| e.to_string())?;
    for (radial, angular) in [(64, 128), (40, 96)] {
        let disk = SpanningDisk::ellipsoid_p1(1.0, 1.0, radial, angular).map_err(|e| e.to_string())?;
        for eps in [1e-3, 5e-3] {
            let sl = self_linking(&k, &disk, eps).map_err(|e| e.to_string())?;
            ensure(sl == -1, format!("sl = {sl} at ε = {eps}, grid {radial}×{angular}"))?;
        }
    }
    let spread = values.iter().map(|v| (v - HOPF_LINK as f64).abs()).fold(0.0, f64::max);
    Ok(format!("Hopf link {HOPF_LINK} (max deviation {spread:.1e}), sl = −1"))
}

fn interval_soundness() -> Check {
    let v = PolynomialPotential::henon_heiles();
    let cert = certify_positive(&v, 0.1, 16).map_err(|e| e.to_string())?;
    let check = spot_check(&cert, &v, 1000, 11);
    ensure(check.points == 1000, format!("{} points checked", check.points))?;
    ensure(check.violations == 0, format!("{} enclosure violations", check.violations))?;
    Ok(format!("{} points, 0 violations", check.points))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("convexity certification", convexity_certificates),
        ("G_E identity", g_e_identity),
        ("triangle vertices", triangle_vertices),
        ("ellipsoid round trip", ellipsoid_round_trip),
        ("cross-engine index agreement", cross_engine),
        ("iterate laws", iterate_laws),
        ("appendix frames", appendix_frames),
        ("ψ-conjugacy", psi_conjugacy),
        ("Hénon–Heiles rotational orbit", henon_heiles_orbit),
        ("linking", linking_numbers),
        ("interval soundness", interval_soundness),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let dt = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{dt:.1?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{dt:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
