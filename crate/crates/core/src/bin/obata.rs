//! Command-line front end: reproducible verification runs with
//! machine-readable reports.  Exit code 0 means every check passed at its
//! configured tolerance, 1 is a verification failure (the first failing
//! check is named), 2 is a configuration error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::ExitCode;

use obata_core::flow::{
    boundary_circuit, boundary_flow, normalized_gradient_flow, warped_gradient_flow,
    warped_zero_crossing, FlowDirection, FlowOptions, TerminalEvent,
};
use obata_core::geometry::{
    boundary_identity_residuals, make_model_domain, model_boundary_spectrum, negative_ball_model,
    numeric_second_fundamental, robin_residual, transnormal_residual, DomainSide, ObataFunction,
    RobinParameter,
};
use obata_core::jets::{self, BoundaryData, ExactModel, ReferenceMetric};
use obata_core::ode::{phi_radial_solve, warped_model_build, BaseGeometry, WarpedModel};
use obata_core::report::{csv_document, Check, Report};
use obata_core::spectral::{
    eigen_boundary_identity, first_eigenvalue_scan, reilly_identity_check, smallest_eigenvalue,
    RadialBc, RadialProfile, SturmLiouvilleProblem,
};
use obata_core::verify::{self, Profile};

#[derive(Parser)]
#[command(
    name = "obata",
    about = "Numerical verification toolkit for the Obata equation with Robin/Neumann boundary conditions",
    version
)]
struct Cli {
    /// Write the report (JSON, or CSV for sweeps) to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Optional flat key=value configuration file supplying defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reduced radial eigenproblem on a geodesic cap.
    Eigen(EigenArgs),
    /// Integrate a model gradient flow and check its hit times and laws.
    Flow(FlowArgs),
    /// Verify the boundary oracles of a model domain (normals, curvature,
    /// Robin and transnormal identities).
    Boundary(BoundaryArgs),
    /// Solve the radial boundary-graph equation for the a < 0 models.
    Phi(PhiArgs),
    /// Run the boundary jet recursion and the gluing criterion.
    Jet(JetArgs),
    /// Check Reilly's integral identity on a radial profile.
    Reilly(ReillyArgs),
    /// Run the complete verification battery.
    VerifyAll(VerifyArgs),
    /// Cross-product parameter sweeps with CSV output.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BcArg {
    Robin,
    Dirichlet,
    Neumann,
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long)]
    n: usize,
    /// Angle θ in radians (the Robin coefficient a = cot θ is derived).
    #[arg(long, conflicts_with = "a")]
    theta: Option<f64>,
    /// Robin coefficient a (mutually exclusive with --theta).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, value_enum, default_value = "robin")]
    bc: BcArg,
    /// Cap radius; defaults to π/2 − θ for Robin and π/2 otherwise.
    #[arg(long)]
    radius: Option<f64>,
    /// Restrict to one angular degree instead of scanning.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 3)]
    ell_max: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlowCase {
    /// Spherical-cap complement: boundary start reaches the maximum at π/2 − θ.
    Cap,
    /// a < 0 ball: boundary distance to the maximum is 3π/2 − θ.
    Ball,
    /// a < 0 warped product: boundary-to-boundary time is 2π − 2θ.
    Warped,
    /// n = 2 boundary circle survey (length 2πk sin θ).
    Circuit,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, value_enum)]
    case: FlowCase,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, conflicts_with = "a")]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 8.0)]
    t_max: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the integrated trace as CSV (t, y₁…y_{n+1}, f).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, conflicts_with = "a")]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
}

#[derive(Args)]
struct PhiArgs {
    #[arg(long, conflicts_with = "a")]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    rho_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    /// Write the profile as CSV (rho, phi, residual).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JetModel {
    CapComplement,
    CapCore,
    Hemisphere,
}

#[derive(Args)]
struct JetArgs {
    #[arg(long, value_enum, default_value = "cap-complement")]
    model: JetModel,
    #[arg(long, default_value_t = FRAC_PI_2 / 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Write the computed jet as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Cos,
    One,
    R2,
}

#[derive(Args)]
struct ReillyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    radius: f64,
    #[arg(long, value_enum, default_value = "cos")]
    profile: ProfileArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    profile: VerifyProfile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyProfile {
    Quick,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Eigen,
    Flow,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    command: SweepKind,
    /// Comma-separated dimensions, e.g. 2,3,4,5 (an empty string is an
    /// empty grid).
    #[arg(long, default_value = "2,3,4,5", value_delimiter = ',', num_args = 0..)]
    n: Vec<String>,
    /// Comma-separated angles in radians (an empty string is an empty grid).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    theta: Vec<String>,
    #[arg(long, value_enum, default_value = "robin")]
    bc: BcArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of seeded starts per cell for flow sweeps.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
}

/// Flat key=value file; unknown keys are rejected per command.
fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {} is not key=value", lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolves the (θ, a) pair from the mutually exclusive inputs; the
/// coupling a = cot θ is derived and echoed in the report.
fn resolve_angle(
    theta: Option<f64>,
    a: Option<f64>,
    config: &BTreeMap<String, String>,
) -> Result<RobinParameter, String> {
    let theta = theta.or_else(|| config.get("theta").and_then(|v| v.parse().ok()));
    let a = a.or_else(|| config.get("a").and_then(|v| v.parse().ok()));
    match (theta, a) {
        (Some(_), Some(_)) => Err("theta and a are mutually exclusive".into()),
        (Some(t), None) => RobinParameter::from_theta(t).map_err(|e| e.to_string()),
        (None, Some(a)) => RobinParameter::from_coefficient(a).map_err(|e| e.to_string()),
        (None, None) => Err("one of --theta or --a is required".into()),
    }
}

fn allowed_config_keys(map: &BTreeMap<String, String>, allowed: &[&str]) -> Result<(), String> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!("unknown config key `{key}`"));
        }
    }
    Ok(())
}

fn emit(report: &Report, output: Option<&PathBuf>) -> Result<(), String> {
    let body = report.to_json_string();
    match output {
        Some(path) => std::fs::write(path, body).map_err(|e| e.to_string())?,
        None => println!("{body}"),
    }
    Ok(())
}

fn run_eigen(args: &EigenArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["theta", "a", "radius", "ell", "ell_max"])?;
    let mut report = Report::new("eigen");
    report.parameter("n", args.n);
    let (bc, radius, robin_a) = match args.bc {
        BcArg::Robin => {
            let rp = resolve_angle(args.theta, args.a, config)?;
            if !(rp.theta > 0.0 && rp.theta < FRAC_PI_2) {
                return Err(format!(
                    "the Robin cap solver needs theta in (0, pi/2); got {}",
                    rp.theta
                ));
            }
            report.parameter("theta", rp.theta);
            report.parameter("a", rp.a);
            let radius = args.radius.unwrap_or(FRAC_PI_2 - rp.theta);
            (RadialBc::Robin(rp.a), radius, Some(rp.a))
        }
        BcArg::Dirichlet => (RadialBc::Dirichlet, args.radius.unwrap_or(FRAC_PI_2), None),
        BcArg::Neumann => (RadialBc::Neumann, args.radius.unwrap_or(FRAC_PI_2), None),
    };
    report.parameter("radius", radius);
    report.parameter("bc", format!("{:?}", args.bc).to_lowercase());

    let result = match args.ell {
        Some(ell) => {
            let problem =
                SturmLiouvilleProblem::new(args.n, radius, ell, bc).map_err(|e| e.to_string())?;
            smallest_eigenvalue(&problem).map_err(|e| e.to_string())?
        }
        None => {
            first_eigenvalue_scan(args.n, radius, bc, args.ell_max).map_err(|e| e.to_string())?
        }
    };
    report.parameter("ell", result.ell);
    report.push(Check::matches("xi1", result.xi, args.n as f64, 1e-6));
    report.push(Check::residual("bc_residual", result.bc_residual, 1e-8));
    report.push(Check::residual("ode_residual", result.ode_residual, 1e-7));
    if let Some(a) = robin_a {
        if (result.xi - args.n as f64).abs() <= 1e-6 {
            let defect = eigen_boundary_identity(&result, a, args.n, radius, bc)
                .map_err(|e| e.to_string())?;
            report.push(Check::residual("eigen_boundary_identity", defect, 1e-6));
        }
    }
    Ok(report)
}

fn run_flow(args: &FlowArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["theta", "a", "dt", "t_max", "seed"])?;
    let rp = resolve_angle(args.theta, args.a, config)?;
    let mut report = Report::new("flow");
    report.seed = Some(args.seed);
    report.parameter("n", args.n);
    report.parameter("theta", rp.theta);
    report.parameter("a", rp.a);
    report.parameter("dt", args.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let mut trace_csv: Option<String> = None;
    match args.case {
        FlowCase::Cap => {
            if rp.a <= 0.0 {
                return Err("the cap case needs theta in (0, pi/2)".into());
            }
            let domain = make_model_domain(args.n, args.n - 1, rp.theta, DomainSide::Complement)
                .map_err(|e| e.to_string())?;
            let f = ObataFunction::height(args.n, 1.0);
            let start = domain.sample_boundary(&mut rng);
            let opts = FlowOptions::new(args.dt, args.t_max, FlowDirection::Forward);
            let trace = normalized_gradient_flow(&f, &start, Some(&domain), opts)
                .map_err(|e| e.to_string())?;
            report.push(Check::holds(
                "terminal_event_interior_max",
                trace.terminal_event == TerminalEvent::InteriorMax,
            ));
            report.push(Check::matches(
                "hit_time",
                trace.terminal_time,
                FRAC_PI_2 - rp.theta,
                1e-6,
            ));
            report.push(Check::residual(
                "conservation_defect",
                trace.defects.conservation,
                1e-10,
            ));
            report.push(Check::residual(
                "geodesic_defect",
                trace.defects.geodesic,
                1e-6,
            ));
            report.parameter("trace_summary", trace.summary_json());
            trace_csv = Some(trace.to_csv());
        }
        FlowCase::Ball => {
            if rp.a >= 0.0 {
                return Err("the ball case needs theta in (pi/2, pi), i.e. a < 0".into());
            }
            let (domain, f, _) =
                negative_ball_model(args.n, rp.theta, 1.0).map_err(|e| e.to_string())?;
            let start = domain.sample_boundary(&mut rng);
            let opts = FlowOptions::new(args.dt, args.t_max, FlowDirection::Forward);
            let trace = normalized_gradient_flow(&f, &start, Some(&domain), opts)
                .map_err(|e| e.to_string())?;
            report.push(Check::matches(
                "boundary_distance",
                trace.terminal_time,
                1.5 * PI - rp.theta,
                1e-6,
            ));
            report.push(Check::residual(
                "conservation_defect",
                trace.defects.conservation,
                1e-10,
            ));
            report.parameter("trace_summary", trace.summary_json());
            trace_csv = Some(trace.to_csv());
        }
        FlowCase::Warped => {
            if rp.a >= 0.0 {
                return Err("the warped case needs theta in (pi/2, pi), i.e. a < 0".into());
            }
            let model = warped_model_build(
                rp.a,
                BaseGeometry::FlatDisk,
                WarpedModel::standard_interval(rp.a),
                1.0,
            )
            .map_err(|e| e.to_string())?;
            report.push(Check::residual(
                "robin_residual_top",
                model.robin_residual_top(),
                1e-10,
            ));
            report.push(Check::residual(
                "robin_residual_bottom",
                model.robin_residual_bottom(),
                1e-10,
            ));
            let opts = FlowOptions::new(args.dt, args.t_max.max(2.0 * PI), FlowDirection::Forward);
            let trace = warped_gradient_flow(&model, &[0.0], model.s_min, opts)
                .map_err(|e| e.to_string())?;
            report.push(Check::matches(
                "crossing_time",
                trace.terminal_time,
                2.0 * PI - 2.0 * rp.theta,
                1e-6,
            ));
            let back = warped_gradient_flow(
                &model,
                &[0.0],
                0.5 * model.s_max,
                FlowOptions::new(args.dt, args.t_max.max(2.0 * PI), FlowDirection::Backward),
            )
            .map_err(|e| e.to_string())?;
            let crossing = warped_zero_crossing(&back);
            report.push(Check::holds(
                "zero_crossing_before_boundary",
                crossing.map_or(false, |t| t < back.terminal_time - 1e-9),
            ));
            report.parameter("trace_summary", trace.summary_json());
            trace_csv = Some(trace.to_csv());
        }
        FlowCase::Circuit => {
            if args.n != 2 {
                return Err("boundary circuits are the n = 2 signature check".into());
            }
            let domain = make_model_domain(2, 0, rp.theta, DomainSide::Complement)
                .map_err(|e| e.to_string())?;
            let f = ObataFunction::height(2, 1.0);
            let survey = boundary_circuit(&domain, &f, 20_000).map_err(|e| e.to_string())?;
            report.parameter("maxima_count", survey.maxima_count);
            report.push(Check::matches(
                "length_2pik_sin_theta",
                survey.length,
                2.0 * PI * survey.maxima_count as f64 * rp.theta.sin(),
                1e-6,
            ));
            report.push(Check::matches(
                "period",
                survey.period,
                2.0 * PI * rp.theta.sin(),
                1e-6,
            ));
        }
    }
    if let (Some(path), Some(csv)) = (&args.trace, trace_csv) {
        std::fs::write(path, csv).map_err(|e| e.to_string())?;
    }
    Ok(report)
}

fn run_boundary(args: &BoundaryArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["theta", "a", "samples", "seed", "step"])?;
    let rp = resolve_angle(args.theta, args.a, config)?;
    if rp.a <= 0.0 {
        return Err("boundary oracles target the a > 0 models; need theta in (0, pi/2)".into());
    }
    let domain = make_model_domain(args.n, args.m, rp.theta, DomainSide::Complement)
        .map_err(|e| e.to_string())?;
    let f = ObataFunction::height(args.n, 1.0);
    let mut report = Report::new("boundary");
    report.seed = Some(args.seed);
    report.parameter("n", args.n);
    report.parameter("m", args.m);
    report.parameter("theta", rp.theta);
    report.parameter("a", rp.a);
    report.parameter("samples", args.samples);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let expected = model_boundary_spectrum(args.n, args.m, rp.a).map_err(|e| e.to_string())?;
    let mut worst_robin = 0.0f64;
    let mut worst_trans = 0.0f64;
    let mut spectra_ok = true;
    for _ in 0..args.samples {
        let p = domain.sample_boundary(&mut rng);
        worst_robin = worst_robin.max(
            robin_residual(&domain, &f, rp.a, &p)
                .map_err(|e| e.to_string())?
                .abs(),
        );
        worst_trans = worst_trans.max(
            transnormal_residual(&domain, &f, rp.a, &p)
                .map_err(|e| e.to_string())?
                .abs(),
        );
        let got = numeric_second_fundamental(&domain, &p, args.step).map_err(|e| e.to_string())?;
        spectra_ok &= got.agrees_with(&expected, 1e-4);
    }
    report.push(Check::residual("robin_residual_max", worst_robin, 1e-10));
    report.push(Check::residual(
        "transnormal_residual_max",
        worst_trans,
        1e-10,
    ));
    report.push(Check::holds("shape_operator_matches_model", spectra_ok));
    for _ in 0..3 {
        let p = domain.sample_boundary(&mut rng);
        let (r1, r2) =
            boundary_identity_residuals(&domain, &f, rp.a, &p).map_err(|e| e.to_string())?;
        report.push(Check::residual("identity_r1", r1, 1e-4));
        report.push(Check::residual("identity_r2", r2, 1e-4));
    }
    if args.m < args.n - 1 {
        let mut start = domain.sample_boundary(&mut rng);
        for _ in 0..64 {
            let g = obata_core::geometry::boundary_gradient(&domain, &f, &start)
                .map_err(|e| e.to_string())?;
            if g.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.3 {
                break;
            }
            start = domain.sample_boundary(&mut rng);
        }
        let result = boundary_flow(&domain, &f, rp.a, &start, 1e-3).map_err(|e| e.to_string())?;
        report.push(Check::residual(
            "boundary_flow_fit",
            result.fit_residual,
            1e-6,
        ));
        report.push(Check::matches(
            "focal_value",
            result.trace.samples.last().unwrap().f_value,
            rp.theta.sin(),
            1e-9,
        ));
    }
    Ok(report)
}

fn run_phi(args: &PhiArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["theta", "a", "rho_max", "h"])?;
    let rp = resolve_angle(args.theta, args.a, config)?;
    if rp.a >= 0.0 {
        return Err("the graph equation needs a < 0 (theta in (pi/2, pi))".into());
    }
    let mut report = Report::new("phi");
    report.parameter("theta", rp.theta);
    report.parameter("a", rp.a);
    report.parameter("h", args.h);
    let profile = phi_radial_solve(rp.a, BaseGeometry::FlatDisk, args.rho_max, args.h)
        .map_err(|e| e.to_string())?;
    report.push(Check::matches(
        "plateau_value",
        profile.rho_samples.last().unwrap().1,
        PI - rp.theta,
        1e-8,
    ));
    report.push(Check::residual(
        "graph_residual_interior",
        profile.max_interior_residual(),
        1e-6,
    ));
    report.push(Check::holds("monotone", profile.is_monotone()));
    let plus =
        obata_core::ode::phi_radial_solve_perturbed(rp.a, BaseGeometry::FlatDisk, 2.0, 1e-3, 1e-6)
            .map_err(|e| e.to_string())?;
    let minus =
        obata_core::ode::phi_radial_solve_perturbed(rp.a, BaseGeometry::FlatDisk, 2.0, 1e-3, -1e-6)
            .map_err(|e| e.to_string())?;
    report.push(Check::residual(
        "twin_solve_distance",
        plus.sup_distance(&minus),
        1e-5,
    ));
    if let Some(path) = &args.csv {
        let mut rows: Vec<Vec<String>> = Vec::new();
        let residuals = profile.graph_residuals();
        for (i, (r, p)) in profile.rho_samples.iter().enumerate() {
            // interior samples carry their pointwise residual
            let res = if i >= 2 && i < profile.rho_samples.len() - 2 {
                format!("{:.6e}", residuals[i - 2].1)
            } else {
                String::new()
            };
            rows.push(vec![format!("{r:.12e}"), format!("{p:.12e}"), res]);
        }
        let doc = csv_document(
            &[format!("a={}", rp.a), format!("h={}", args.h)],
            &["rho", "phi", "residual"],
            &rows,
        );
        std::fs::write(path, doc).map_err(|e| e.to_string())?;
    }
    Ok(report)
}

fn run_jet(args: &JetArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["theta", "l", "k"])?;
    let model = match args.model {
        JetModel::CapComplement => ExactModel::CapComplement,
        JetModel::CapCore => ExactModel::CapCore,
        JetModel::Hemisphere => ExactModel::Hemisphere,
    };
    if model != ExactModel::Hemisphere && !(args.theta > 0.0 && args.theta < FRAC_PI_2) {
        return Err("jet models need theta in (0, pi/2)".into());
    }
    let mut report = Report::new("jet");
    report.parameter("theta", args.theta);
    report.parameter("l", args.l);
    report.parameter("k", args.k);

    let err = jets::jet_vs_exact(model, args.theta, args.l, args.k).map_err(|e| e.to_string())?;
    report.push(Check::residual("jet_vs_exact_float", err, 1e-12));
    let rational_ok =
        jets::jet_vs_exact_symbolic(model, (1, 1), args.k).map_err(|e| e.to_string())?;
    report.push(Check::holds("jet_vs_exact_rational", rational_ok));

    let reference = ReferenceMetric::RoundSphere { dim: 2 };
    // the hemisphere collar sits at the equator, i.e. the θ → 0 limit
    let (s_theta, c_theta) = if model == ExactModel::Hemisphere {
        (0.0, 1.0)
    } else {
        (args.theta.sin(), args.theta.cos())
    };
    let data = BoundaryData::Homogeneous(jets::model_data(
        model, &s_theta, &c_theta, &args.l, args.k, reference,
    ));
    let jet = jets::jet_extend(&data, args.k).map_err(|e| e.to_string())?;
    let constraint = jets::jet_constraint_residual(&jet);
    report.push(Check::residual(
        "constraint_residual_max",
        constraint.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        1e-10,
    ));
    let partner = match model {
        ExactModel::CapComplement => ExactModel::CapCore,
        ExactModel::CapCore => ExactModel::CapComplement,
        ExactModel::Hemisphere => ExactModel::Hemisphere,
    };
    let pdata = if partner == ExactModel::Hemisphere {
        // the equator partner carries the opposite Neumann datum
        let mut d = jets::model_data(partner, &0.0, &1.0, &args.l, args.k, reference);
        d.f1 = -d.f1;
        BoundaryData::Homogeneous(d)
    } else {
        BoundaryData::Homogeneous(jets::model_data(
            partner, &s_theta, &c_theta, &args.l, args.k, reference,
        ))
    };
    let pjet = jets::jet_extend(&pdata, args.k).map_err(|e| e.to_string())?;
    report.push(Check::holds(
        "jets_match_partner",
        jets::jets_match(&jet, &pjet, args.k, 1e-12).map_err(|e| e.to_string())?,
    ));
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&jet.to_json()).unwrap())
            .map_err(|e| e.to_string())?;
    }
    Ok(report)
}

fn run_reilly(args: &ReillyArgs, config: &BTreeMap<String, String>) -> Result<Report, String> {
    allowed_config_keys(config, &["radius"])?;
    if !(args.radius > 0.0 && args.radius < PI) {
        return Err(format!("cap radius {} must lie in (0, pi)", args.radius));
    }
    let profile = match args.profile {
        ProfileArg::Cos => RadialProfile::cos_r(),
        ProfileArg::One => RadialProfile::constant_one(),
        ProfileArg::R2 => RadialProfile::r_squared(),
    };
    let (lhs, rhs, defect) = reilly_identity_check(args.n, args.radius, &profile);
    let mut report = Report::new("reilly");
    report.parameter("n", args.n);
    report.parameter("radius", args.radius);
    report.parameter("lhs", lhs);
    report.parameter("rhs", rhs);
    report.push(Check::residual("reilly_defect", defect, 1e-6));
    Ok(report)
}

fn run_verify(args: &VerifyArgs) -> Result<Report, String> {
    let profile = match args.profile {
        VerifyProfile::Quick => Profile::Quick,
        VerifyProfile::Full => Profile::Full,
    };
    let mut report = Report::new("verify-all");
    report.parameter(
        "profile",
        match profile {
            Profile::Quick => "quick",
            Profile::Full => "full",
        },
    );
    for criterion in verify::run_acceptance(profile) {
        let pass = criterion.pass();
        println!(
            "[{}] criterion {:2}: {}",
            if pass { "PASS" } else { "FAIL" },
            criterion.index,
            criterion.name
        );
        for c in criterion.checks {
            report.push(Check {
                name: format!("c{}:{}", criterion.index, c.name),
                ..c
            });
        }
    }
    Ok(report)
}

fn parse_grid<T: std::str::FromStr>(raw: &[String], what: &str) -> Result<Vec<T>, String> {
    raw.iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse {what} value `{s}`"))
        })
        .collect()
}

fn run_sweep(args: &SweepArgs, output: Option<&PathBuf>) -> Result<bool, String> {
    let ns: Vec<usize> = parse_grid(&args.n, "n")?;
    let thetas: Vec<f64> = parse_grid(&args.theta, "theta")?;
    let comments = vec![
        format!("seed={}", args.seed),
        format!("bc={}", format!("{:?}", args.bc).to_lowercase()),
    ];
    let mut pass = true;
    let doc = match args.command {
        SweepKind::Eigen => {
            let header = [
                "n",
                "theta",
                "R",
                "ell",
                "bc",
                "xi",
                "bc_residual",
                "ode_residual",
            ];
            let mut rows = Vec::new();
            for &n in &ns {
                for &theta in &thetas {
                    let (bc, radius, bc_name) = match args.bc {
                        BcArg::Robin => {
                            let rp =
                                RobinParameter::from_theta(theta).map_err(|e| e.to_string())?;
                            if rp.a <= 0.0 {
                                return Err("eigen sweeps need theta in (0, pi/2)".into());
                            }
                            (RadialBc::Robin(rp.a), FRAC_PI_2 - theta, "robin")
                        }
                        BcArg::Dirichlet => (RadialBc::Dirichlet, FRAC_PI_2, "dirichlet"),
                        BcArg::Neumann => (RadialBc::Neumann, FRAC_PI_2, "neumann"),
                    };
                    let result =
                        first_eigenvalue_scan(n, radius, bc, 3).map_err(|e| e.to_string())?;
                    pass &= (result.xi - n as f64).abs() <= 1e-6;
                    rows.push(vec![
                        n.to_string(),
                        format!("{theta:.12}"),
                        format!("{radius:.12}"),
                        result.ell.to_string(),
                        bc_name.to_string(),
                        format!("{:.12}", result.xi),
                        format!("{:.3e}", result.bc_residual),
                        format!("{:.3e}", result.ode_residual),
                    ]);
                }
            }
            csv_document(&comments, &header, &rows)
        }
        SweepKind::Flow => {
            let header = [
                "index",
                "n",
                "m",
                "theta",
                "f_start",
                "terminal_event",
                "terminal_time",
                "conservation_defect",
                "geodesic_defect",
            ];
            let mut rows = Vec::new();
            for &n in &ns {
                for &theta in &thetas {
                    if args.m >= n {
                        return Err(format!("m = {} needs m <= n-1 = {}", args.m, n - 1));
                    }
                    let domain = make_model_domain(n, args.m, theta, DomainSide::Complement)
                        .map_err(|e| e.to_string())?;
                    let f = ObataFunction::height(n, 1.0);
                    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                    let mut index = 0usize;
                    while index < args.samples {
                        let p = random_sphere_point(n, &mut rng);
                        if !domain.contains(&p).map_err(|e| e.to_string())? {
                            continue;
                        }
                        let fv = f.value(&p);
                        if fv < 0.05 {
                            continue;
                        }
                        let opts = FlowOptions::new(1e-3, 8.0, FlowDirection::Forward);
                        let trace = normalized_gradient_flow(&f, &p, Some(&domain), opts)
                            .map_err(|e| e.to_string())?;
                        pass &= trace.terminal_event == TerminalEvent::InteriorMax;
                        rows.push(vec![
                            index.to_string(),
                            n.to_string(),
                            args.m.to_string(),
                            format!("{theta:.12}"),
                            format!("{fv:.12}"),
                            match trace.terminal_event {
                                TerminalEvent::InteriorMax => "interior_max",
                                TerminalEvent::InteriorMin => "interior_min",
                                TerminalEvent::BoundaryHit => "boundary_hit",
                                TerminalEvent::TimeExhausted => "time_exhausted",
                            }
                            .to_string(),
                            format!("{:.12}", trace.terminal_time),
                            format!("{:.3e}", trace.defects.conservation),
                            format!("{:.3e}", trace.defects.geodesic),
                        ]);
                        index += 1;
                    }
                }
            }
            csv_document(&comments, &header, &rows)
        }
    };
    match output {
        Some(path) => std::fs::write(path, doc).map_err(|e| e.to_string())?,
        None => print!("{doc}"),
    }
    Ok(pass)
}

fn random_sphere_point<R: rand::Rng>(n: usize, rng: &mut R) -> obata_core::geometry::SpherePoint {
    loop {
        let v: Vec<f64> = (0..=n)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0f64);
                let u2: f64 = rng.gen_range(0.0..1.0f64);
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            })
            .collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-6 {
            return obata_core::geometry::SpherePoint::project(v).unwrap();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match read_config(path) {
            Ok(map) => map,
            Err(e) => {
                eprintln!("configuration error: {e}");
                return ExitCode::from(2);
            }
        },
        None => BTreeMap::new(),
    };

    let report = match &cli.command {
        Command::Eigen(args) => run_eigen(args, &config),
        Command::Flow(args) => run_flow(args, &config),
        Command::Boundary(args) => run_boundary(args, &config),
        Command::Phi(args) => run_phi(args, &config),
        Command::Jet(args) => run_jet(args, &config),
        Command::Reilly(args) => run_reilly(args, &config),
        Command::VerifyAll(args) => run_verify(args),
        Command::Sweep(args) => {
            return match run_sweep(args, cli.output.as_ref()) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => {
                    eprintln!("verification failure: a sweep cell missed its contract");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("configuration error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };

    match report {
        Ok(report) => {
            if emit(&report, cli.output.as_ref()).is_err() {
                eprintln!("configuration error: cannot write the report");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                let first = report
                    .first_failure()
                    .expect("failing report has a failure");
                eprintln!(
                    "verification failure: {} (value {:.6e}, tolerance {:.1e})",
                    first.name, first.value, first.tolerance
                );
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
    }
}
