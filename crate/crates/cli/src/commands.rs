use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::PathBuf;

use reeb_core::convexity::{certify_positive, hill_region, scan_min, spot_check, CertStatus, Certificate, SpotCheck};
use reeb_core::cz::{geometric_index, path_to_symmetric_potential, spectral_index, SpectralResult};
use reeb_core::disk::{DiskFrame, SpanningDisk};
use reeb_core::ellipsoid::oracle as ellipsoid_oracle;
use reeb_core::flow::{
    find_periodic_orbit, variational_path, Frame, GlobalFrame, PeriodicOrbit, ScanParams, SymmetrySpec,
};
use reeb_core::hamiltonian::ModelKind;
use reeb_core::linking::{gauss_link_report, self_linking_report, ClosedCurve, LinkOptions, HOPF_LINK};
use reeb_core::{HamiltonianModel, PhasePoint, PolynomialPotential};

use crate::config::{check_tol, load_model, pick, Format, RunConfig};
use crate::{CliError, Global, OrbitArgs, Output};

pub struct Context {
    pub global: Global,
    pub config: RunConfig,
}

impl Context {
    fn model(&self) -> Result<HamiltonianModel, CliError> {
        load_model(&pick(self.global.model.clone(), &self.config.model, "henon-heiles".to_string()))
    }

    fn energy(&self, model: &HamiltonianModel) -> Result<f64, CliError> {
        let default = matches!(model.kind, ModelKind::Ellipsoid { .. }).then_some(1.0);
        self.global
            .energy
            .or(self.config.energy)
            .or(default)
            .ok_or_else(|| CliError::Usage(format!("--energy is required for model '{}'", model.name)))
    }

    fn tol(&self, default: f64) -> Result<f64, CliError> {
        check_tol(pick(self.global.tol, &self.config.tol, default))
    }

    fn format(&self, default: Format) -> Format {
        pick(self.global.format, &self.config.format, default)
    }

    fn json_only(&self) -> Result<(), CliError> {
        match self.format(Format::Json) {
            Format::Json => Ok(()),
            Format::Csv => Err(CliError::Usage("this subcommand emits JSON only".into())),
        }
    }
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn potential(model: &HamiltonianModel) -> Result<&PolynomialPotential, CliError> {
    model
        .potential()
        .ok_or_else(|| CliError::Usage(format!("model '{}' is not mechanical", model.name)))
}

pub fn hill(ctx: &Context, resolution: Option<usize>) -> Result<Output, CliError> {
    let model = ctx.model()?;
    let v = potential(&model)?;
    let energy = ctx.energy(&model)?;
    let region = hill_region(v, energy, pick(resolution, &ctx.config.resolution, 256))?;
    let body = match ctx.format(Format::Csv) {
        Format::Json => json(&region),
        Format::Csv => {
            let mut s = String::from("x1,x2,loop\n");
            for (id, lp) in region.loops.iter().enumerate() {
                for [x, y] in lp {
                    writeln!(s, "{x},{y},{id}").unwrap();
                }
            }
            s
        }
    };
    Ok(Output { body, success: true })
}

#[derive(Serialize)]
struct ConvexityReport<'a> {
    #[serde(flatten)]
    certificate: &'a Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    spot_check: Option<SpotCheck>,
}

#[derive(Serialize)]
struct ScanReport {
    model: String,
    energy: f64,
    grid: usize,
    min_g_e: Option<f64>,
    argmin: Option<[f64; 2]>,
    positive: bool,
}

pub fn convexity(
    ctx: &Context,
    certify: Option<bool>,
    grid: Option<usize>,
    spot: Option<usize>,
) -> Result<Output, CliError> {
    ctx.json_only()?;
    let model = ctx.model()?;
    let v = potential(&model)?;
    let energy = ctx.energy(&model)?;
    if pick(certify, &ctx.config.certify, false) {
        let depth = pick(ctx.global.depth, &ctx.config.depth, 16);
        let cert = certify_positive(v, energy, depth)?;
        let points = pick(spot, &ctx.config.spot_check, 0);
        let seed = pick(ctx.global.seed, &ctx.config.seed, 0);
        let check = (points > 0).then(|| spot_check(&cert, v, points, seed));
        let success = cert.status == CertStatus::ProvenPositive && check.is_none_or(|c| c.violations == 0);
        let body = json(&ConvexityReport { certificate: &cert, spot_check: check });
        return Ok(Output { body, success });
    }
    let n = pick(grid, &ctx.config.grid, 200);
    let region = hill_region(v, energy, 256)?;
    let min = scan_min(&region, v, n);
    let positive = min.is_some_and(|(g, _)| g > 0.0);
    let report = ScanReport {
        model: model.name.clone(),
        energy,
        grid: n,
        min_g_e: min.map(|m| m.0),
        argmin: min.map(|m| m.1),
        positive,
    };
    Ok(Output { body: json(&report), success: positive })
}

fn fixed<const N: usize>(flag: &str, v: &[f64]) -> Result<[f64; N], CliError> {
    v.try_into().map_err(|_| CliError::Usage(format!("{flag} takes {N} comma-separated values, got {}", v.len())))
}

fn symmetry_spec(ctx: &Context, model: &HamiltonianModel, args: &OrbitArgs) -> Result<SymmetrySpec, CliError> {
    let default = match model.kind {
        ModelKind::Mechanical(_) => "rotational",
        _ => "none",
    };
    let name = pick(args.symmetry.clone(), &ctx.config.symmetry, default.to_string());
    match name.as_str() {
        "rotational" => Ok(SymmetrySpec::Rotational),
        "reversible" => Ok(SymmetrySpec::Reversible),
        "none" => {
            let seed = args
                .seed_point
                .as_deref()
                .map(|v| fixed::<4>("--seed-point", v))
                .transpose()?
                .or(ctx.config.seed_point)
                .or(match model.kind {
                    ModelKind::Ellipsoid { r1, .. } => Some([r1, 0.0, 0.0, 0.0]),
                    _ => None,
                })
                .ok_or_else(|| CliError::Usage("--symmetry none needs --seed-point".into()))?;
            let period_guess = args.period_guess.or(ctx.config.period_guess);
            Ok(SymmetrySpec::None { seed: PhasePoint::from(seed), period_guess })
        }
        other => Err(CliError::Usage(format!("unknown symmetry '{other}'"))),
    }
}

fn find_orbit(ctx: &Context, model: &HamiltonianModel, args: &OrbitArgs) -> Result<PeriodicOrbit, CliError> {
    let energy = ctx.energy(model)?;
    let spec = symmetry_spec(ctx, model, args)?;
    let defaults = ScanParams::default();
    let window = args.window.as_deref().map(|w| fixed::<2>("--window", w)).transpose()?.or(ctx.config.window);
    let scan = ScanParams {
        window,
        tol: ctx.tol(defaults.tol)?,
        orbit_samples: pick(args.orbit_samples, &ctx.config.orbit_samples, defaults.orbit_samples),
        ..defaults
    };
    Ok(find_periodic_orbit(model, energy, spec, &scan)?)
}

pub fn orbit(ctx: &Context, args: &OrbitArgs) -> Result<Output, CliError> {
    let model = ctx.model()?;
    let orbit = find_orbit(ctx, &model, args)?;
    let body = match ctx.format(Format::Json) {
        Format::Json => json(&orbit),
        Format::Csv => {
            let mut s = String::from("t,x1,x2\n");
            for r in &orbit.samples {
                writeln!(s, "{},{},{}", r[0], r[1], r[2]).unwrap();
            }
            s
        }
    };
    Ok(Output { body, success: true })
}

#[derive(Serialize)]
struct CzReport {
    index: i64,
    /// Per period of the simple orbit.
    rotation_number: Option<f64>,
    #[serde(rename = "J")]
    j: Option<[f64; 2]>,
    engine: String,
    #[serde(rename = "N")]
    n: Option<usize>,
    frame: String,
    iterate: usize,
    reeb_action: f64,
    flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralResult>,
}

fn disk_frame(model: &HamiltonianModel, orbit: &PeriodicOrbit) -> Result<DiskFrame, CliError> {
    let ModelKind::Ellipsoid { r1, r2 } = model.kind else {
        return Err(CliError::Usage("--frame disk needs the ellipsoid model".into()));
    };
    let mut last = None;
    for disk in [SpanningDisk::ellipsoid_p1(r1, r2, 64, 128)?, SpanningDisk::ellipsoid_p2(r1, r2, 64, 128)?] {
        let frame = DiskFrame::new(model, &disk)?;
        match frame.check_spans(orbit) {
            Ok(()) => return Ok(frame),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap().into())
}

#[allow(clippy::too_many_arguments)]
pub fn cz(
    ctx: &Context,
    args: &OrbitArgs,
    orbit_file: Option<PathBuf>,
    frame: Option<String>,
    iterate: Option<usize>,
    engine: Option<String>,
    path_samples: Option<usize>,
) -> Result<Output, CliError> {
    ctx.json_only()?;
    let model = ctx.model()?;
    let orbit = match orbit_file.or(ctx.config.orbit_file.clone()) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<PeriodicOrbit>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => find_orbit(ctx, &model, args)?,
    };
    let n = pick(iterate, &ctx.config.iterate, 1);
    let samples = pick(path_samples, &ctx.config.path_samples, 512);
    let engine = pick(engine, &ctx.config.engine, "geometric".to_string());
    let frame_name = pick(frame, &ctx.config.frame, "global".to_string());
    let disk;
    let frame: &dyn Frame = match frame_name.as_str() {
        "global" => &GlobalFrame,
        "disk" => {
            disk = disk_frame(&model, &orbit)?;
            &disk
        }
        other => return Err(CliError::Usage(format!("unknown frame '{other}'"))),
    };
    let path = variational_path(&model, &orbit, frame, n, samples)?;
    let mut flags = Vec::new();
    let (mut index, mut rotation, mut j, mut big_n, mut spectral) = (None, None, None, None, None);
    if matches!(engine.as_str(), "geometric" | "both") {
        let g = geometric_index(&path)?;
        if g.flagged {
            flags.push("near-integer-endpoint".to_string());
        }
        index = Some(g.index);
        rotation = Some(g.rotation.rotation_number / n as f64);
        j = Some([g.rotation.j_min, g.rotation.j_max]);
    }
    if matches!(engine.as_str(), "spectral" | "both") {
        if !samples.is_power_of_two() || samples < 256 {
            return Err(CliError::Usage(format!("spectral engine needs --path-samples a power of two ≥ 256, got {samples}")));
        }
        let s = path_to_symmetric_potential(&path)?;
        let (result, mu) = spectral_index(&s, samples)?;
        if !result.two_per_winding {
            flags.push("two-per-winding-violated".to_string());
        }
        if index.is_some_and(|g| g != mu) {
            flags.push("engines-disagree".to_string());
        }
        index.get_or_insert(mu);
        big_n = Some(samples);
        spectral = Some(result);
    }
    let Some(index) = index else {
        return Err(CliError::Usage(format!("unknown engine '{engine}'")));
    };
    let success = !flags.iter().any(|f| f == "engines-disagree");
    let report = CzReport {
        index,
        rotation_number: rotation,
        j,
        engine,
        n: big_n,
        frame: path.frame.clone(),
        iterate: n,
        reeb_action: orbit.reeb_action,
        flags,
        spectral,
    };
    Ok(Output { body: json(&report), success })
}

fn read_curve(path: &PathBuf) -> Result<ClosedCurve, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let raw: Vec<[f64; 4]> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    ClosedCurve::try_from(raw).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn with_fields(report: &impl Serialize, extra: &[(&str, Value)]) -> String {
    let mut v = serde_json::to_value(report).expect("serializable output");
    if let Value::Object(map) = &mut v {
        for (k, x) in extra {
            map.insert((*k).to_string(), x.clone());
        }
    }
    json(&v)
}

pub fn linking(ctx: &Context, a: Option<PathBuf>, b: Option<PathBuf>) -> Result<Output, CliError> {
    ctx.json_only()?;
    let (a, b) = (a.or(ctx.config.a.clone()), b.or(ctx.config.b.clone()));
    let (ca, cb) = match (a, b) {
        (Some(a), Some(b)) => (read_curve(&a)?, read_curve(&b)?),
        (None, None) => {
            let fiber = |p| ClosedCurve::hopf_fiber(p, 400);
            (fiber(PhasePoint::new(1.0, 0.0, 0.0, 0.0))?, fiber(PhasePoint::new(0.0, 1.0, 0.0, 0.0))?)
        }
        _ => return Err(CliError::Usage("give both --a and --b, or neither for the Hopf pair".into())),
    };
    let report = gauss_link_report(&ca, &cb, &LinkOptions::default())?;
    Ok(Output { body: with_fields(&report, &[("hopf_calibration", HOPF_LINK.into())]), success: true })
}

pub fn sl(
    ctx: &Context,
    curve: Option<PathBuf>,
    disk: Option<String>,
    eps: Option<f64>,
    radial: Option<usize>,
    angular: Option<usize>,
) -> Result<Output, CliError> {
    ctx.json_only()?;
    let k = match curve.or(ctx.config.curve.clone()) {
        Some(path) => read_curve(&path)?,
        None => ClosedCurve::hopf_fiber(PhasePoint::new(1.0, 0.0, 0.0, 0.0), 1000)?,
    };
    let radial = pick(radial, &ctx.config.radial, 64);
    let angular = pick(angular, &ctx.config.angular, 128);
    let disk = match pick(disk, &ctx.config.disk, "p1".to_string()).as_str() {
        "p1" => SpanningDisk::ellipsoid_p1(1.0, 1.0, radial, angular)?,
        "p2" => SpanningDisk::ellipsoid_p2(1.0, 1.0, radial, angular)?,
        other => return Err(CliError::Usage(format!("unknown disk '{other}'"))),
    };
    let eps = pick(eps, &ctx.config.eps, 1e-3);
    let report = self_linking_report(&k, &disk, eps)?;
    let extra = [("self_linking", report.link.into()), ("eps", eps.into()), ("disk", disk.label.clone().into())];
    Ok(Output { body: with_fields(&report, &extra), success: true })
}

pub fn oracle(ctx: &Context, r1: Option<f64>, r2: Option<f64>, p: Option<i64>) -> Result<Output, CliError> {
    ctx.json_only()?;
    let data = ellipsoid_oracle(
        pick(r1, &ctx.config.r1, 1.0),
        pick(r2, &ctx.config.r2, 2f64.powf(0.25)),
        pick(p, &ctx.config.p, 3),
    )?;
    Ok(Output { body: json(&data), success: true })
}
