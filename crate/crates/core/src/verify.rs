//! The verification batteries: each criterion of the toolkit's acceptance
//! contract as a reproducible check list with pinned tolerances.
//!
//! `run_acceptance(Profile::Full)` executes the complete grid; `Quick`
//! covers every criterion on a reduced grid for fast iteration.  The CLI
//! `verify-all` command and the acceptance test target both run these.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use crate::flow::{
    boundary_circuit, boundary_flow, first_hit_classification, normalized_gradient_flow,
    warped_gradient_flow, warped_zero_crossing, FlowDirection, FlowOptions, TerminalEvent,
};
use crate::geometry::{
    boundary_gradient, make_model_domain, model_boundary_spectrum, negative_ball_model,
    numeric_second_fundamental, robin_residual, transnormal_residual, DomainSide, ObataFunction,
    SpherePoint,
};
use crate::jets::{
    self, homogeneous_recursion, jet_constraint_residual, jet_extend, jets_match, BoundaryData,
    ExactModel, ExactScalar, GridData, GridPhi, HomogeneousData, PeriodicGrid, ReferenceMetric,
    ScalarField, TensorField,
};
use crate::ode::{
    curvature_ode_residual, metric_ode_residual, metric_warp, neumann_curvature_flow,
    phi_radial_solve, phi_radial_solve_perturbed, warped_model_build, BaseGeometry,
    CurvatureFamily, CurvatureInput, WarpedModel,
};
use crate::report::Check;
use crate::spectral::{
    eigen_boundary_identity, first_eigenvalue_scan, reilly_identity_check, RadialBc, RadialProfile,
};

/// Tolerance table of the acceptance contract.
pub mod tol {
    /// Eigenvalue agreement ξ₁ = n.
    pub const EIGEN: f64 = 1e-6;
    /// Flow hit times against closed-form distances.
    pub const HIT_TIME: f64 = 1e-6;
    /// Conservation law |∇f|² + f² − L² along flows.
    pub const CONSERVATION: f64 = 1e-10;
    /// Boundary transnormal law |∇̄f|² + (1+a²)f² − L².
    pub const TRANSNORMAL: f64 = 1e-10;
    /// Finite-difference shape operator vs closed-form spectrum.
    pub const CURVATURE: f64 = 1e-4;
    /// Closed-form curvature family vs its ODE.
    pub const CURVATURE_ODE: f64 = 1e-9;
    /// Monotonicity slack of λ·cos in the Neumann mechanism.
    pub const NEUMANN_MONOTONE: f64 = 1e-10;
    /// Graph-equation residual of φ profiles.
    pub const PHI_RESIDUAL: f64 = 1e-6;
    /// Plateau value agreement π − θ.
    pub const PHI_PLATEAU: f64 = 1e-8;
    /// Twin-solve uniqueness agreement.
    pub const PHI_TWIN: f64 = 1e-5;
    /// Float jet recursion vs analytic collar expansion.
    pub const JET_FLOAT: f64 = 1e-12;
    /// Compatibility-constraint residual of consistent jets.
    pub const JET_CONSTRAINT: f64 = 1e-10;
    /// Reilly identity relative defect.
    pub const REILLY: f64 = 1e-6;
    /// Geodesic defect of gradient flow traces at dt = 1e-3.
    pub const GEODESIC: f64 = 1e-6;
    /// Boundary-length fingerprint 2πk sin θ.
    pub const LENGTH: f64 = 1e-6;
}

/// Grid size of the verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Reduced grid, a few seconds.
    Quick,
    /// Full acceptance grid.
    Full,
}

/// One acceptance criterion with its check rows.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: usize,
    pub name: String,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn theta_grid(profile: Profile) -> Vec<f64> {
    match profile {
        Profile::Quick => vec![FRAC_PI_4],
        Profile::Full => vec![FRAC_PI_6, FRAC_PI_4, FRAC_PI_3],
    }
}

fn obtuse_grid(profile: Profile) -> Vec<f64> {
    match profile {
        Profile::Quick => vec![3.0 * PI / 4.0],
        Profile::Full => vec![2.0 * PI / 3.0, 3.0 * PI / 4.0, 5.0 * PI / 6.0],
    }
}

fn dim_grid(profile: Profile) -> Vec<usize> {
    match profile {
        Profile::Quick => vec![2, 3],
        Profile::Full => vec![2, 3, 4, 5],
    }
}

/// Criterion 1: Robin eigenvalue rigidity ξ₁ = n on the model caps.
pub fn eigen_rigidity(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let ell_max = match profile {
        Profile::Quick => 2,
        Profile::Full => 3,
    };
    for &n in &dim_grid(profile) {
        for &theta in &theta_grid(profile) {
            let a = 1.0 / theta.tan();
            let r = FRAC_PI_2 - theta;
            match first_eigenvalue_scan(n, r, RadialBc::Robin(a), ell_max) {
                Ok(result) => {
                    checks.push(Check::matches(
                        format!("xi1(n={n}, theta={theta:.4})"),
                        result.xi,
                        n as f64,
                        tol::EIGEN,
                    ));
                    checks.push(Check::residual(
                        format!("ode_residual(n={n}, theta={theta:.4})"),
                        result.ode_residual,
                        1e-7,
                    ));
                    if let Ok(defect) =
                        eigen_boundary_identity(&result, a, n, r, RadialBc::Robin(a))
                    {
                        checks.push(Check::residual(
                            format!("boundary_identity(n={n}, theta={theta:.4})"),
                            defect,
                            1e-6,
                        ));
                    }
                }
                Err(e) => checks.push(Check::holds(format!("xi1(n={n}) [{e}]"), false)),
            }
            // neighborhood of the equality case: the Robin eigenvalue is
            // strictly monotone in a, so perturbing a moves ξ₁ off n
            let solve = |aa: f64| {
                crate::spectral::smallest_eigenvalue(
                    &crate::spectral::SturmLiouvilleProblem::new(n, r, 0, RadialBc::Robin(aa))
                        .unwrap(),
                )
                .map(|res| res.xi)
            };
            match (solve(a), solve(a + 0.1), solve(a - 0.1)) {
                (Ok(base), Ok(up), Ok(down)) => checks.push(Check::holds(
                    format!("xi1_monotone_in_a(n={n}, theta={theta:.4})"),
                    up > base + 1e-4 && down < base - 1e-4,
                )),
                _ => checks.push(Check::holds(
                    format!("xi1_monotone_in_a(n={n}, theta={theta:.4})"),
                    false,
                )),
            }
        }
    }
    CriterionResult {
        index: 1,
        name: "Robin eigenvalue rigidity xi1 = n on model caps".into(),
        checks,
    }
}

/// Criterion 2: Dirichlet and Neumann hemisphere eigenvalues equal n; the
/// Neumann minimizer sits at angular degree 1.
pub fn hemisphere_eigenvalues(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    for &n in &dim_grid(profile) {
        match first_eigenvalue_scan(n, FRAC_PI_2, RadialBc::Dirichlet, 2) {
            Ok(result) => {
                checks.push(Check::matches(
                    format!("dirichlet_xi(n={n})"),
                    result.xi,
                    n as f64,
                    tol::EIGEN,
                ));
                checks.push(Check::residual(
                    format!("dirichlet_ode_residual(n={n})"),
                    result.ode_residual,
                    1e-7,
                ));
            }
            Err(e) => checks.push(Check::holds(format!("dirichlet_xi(n={n}) [{e}]"), false)),
        }
        match first_eigenvalue_scan(n, FRAC_PI_2, RadialBc::Neumann, 2) {
            Ok(result) => {
                checks.push(Check::matches(
                    format!("neumann_xi(n={n})"),
                    result.xi,
                    n as f64,
                    tol::EIGEN,
                ));
                checks.push(Check::holds(
                    format!("neumann_minimizer_ell_1(n={n})"),
                    result.ell == 1,
                ));
                checks.push(Check::residual(
                    format!("neumann_ode_residual(n={n})"),
                    result.ode_residual,
                    1e-7,
                ));
            }
            Err(e) => checks.push(Check::holds(format!("neumann_xi(n={n}) [{e}]"), false)),
        }
    }
    CriterionResult {
        index: 2,
        name: "Dirichlet and Neumann hemisphere eigenvalues".into(),
        checks,
    }
}

/// Criterion 3: flow hit times — cap π/2−θ, a<0 ball 3π/2−θ, warped
/// product 2π−2θ.
pub fn flow_hit_times(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let n = 3;
    for &theta in &theta_grid(profile) {
        let domain = make_model_domain(n, n - 1, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(n, 1.0);
        let start = domain.sample_boundary(&mut rng);
        let opts = FlowOptions::new(1e-3, 4.0, FlowDirection::Forward);
        match normalized_gradient_flow(&f, &start, Some(&domain), opts) {
            Ok(trace) => {
                checks.push(Check::holds(
                    format!("cap_event(theta={theta:.4})"),
                    trace.terminal_event == TerminalEvent::InteriorMax,
                ));
                checks.push(Check::matches(
                    format!("cap_hit_time(theta={theta:.4})"),
                    trace.terminal_time,
                    FRAC_PI_2 - theta,
                    tol::HIT_TIME,
                ));
            }
            Err(e) => checks.push(Check::holds(format!("cap_flow [{e}]"), false)),
        }
    }
    for &theta in &obtuse_grid(profile) {
        let (domain, f, _a) = negative_ball_model(n, theta, 1.0).unwrap();
        let start = domain.sample_boundary(&mut rng);
        let opts = FlowOptions::new(1e-3, 6.0, FlowDirection::Forward);
        match normalized_gradient_flow(&f, &start, Some(&domain), opts) {
            Ok(trace) => {
                checks.push(Check::matches(
                    format!("ball_boundary_distance(theta={theta:.4})"),
                    trace.terminal_time,
                    1.5 * PI - theta,
                    tol::HIT_TIME,
                ));
            }
            Err(e) => checks.push(Check::holds(format!("ball_flow [{e}]"), false)),
        }
        let a = 1.0 / theta.tan();
        let model = warped_model_build(
            a,
            BaseGeometry::FlatDisk,
            WarpedModel::standard_interval(a),
            1.0,
        )
        .unwrap();
        let opts = FlowOptions::new(1e-3, 10.0, FlowDirection::Forward);
        match warped_gradient_flow(&model, &[0.0], model.s_min, opts) {
            Ok(trace) => checks.push(Check::matches(
                format!("warped_crossing_time(theta={theta:.4})"),
                trace.terminal_time,
                2.0 * PI - 2.0 * theta,
                tol::HIT_TIME,
            )),
            Err(e) => checks.push(Check::holds(format!("warped_flow [{e}]"), false)),
        }
    }
    CriterionResult {
        index: 3,
        name: "Flow hit times (cap, negative ball, warped product)".into(),
        checks,
    }
}

/// Criterion 4: conservation law along flows and transnormal law on
/// boundary samples, plus the Lemma-type first-hit and zero-crossing
/// order properties.
pub fn conservation_laws(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2027);
    let starts = match profile {
        Profile::Quick => 20,
        Profile::Full => 100,
    };

    // interior flows from random starts on S^3
    let n = 3;
    let f = ObataFunction::height(n, 1.0);
    let mut worst_cons = 0.0f64;
    let mut worst_geo = 0.0f64;
    let mut drawn = 0;
    while drawn < starts {
        let p = random_point(n, &mut rng);
        let g = f.gradient(&p);
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.1 {
            continue;
        }
        drawn += 1;
        let opts = FlowOptions::new(1e-3, 1.0, FlowDirection::Forward);
        let trace = normalized_gradient_flow(&f, &p, None, opts).unwrap();
        worst_cons = worst_cons.max(trace.defects.conservation);
        worst_geo = worst_geo.max(trace.defects.geodesic);
    }
    checks.push(Check::residual(
        format!("conservation_defect({starts} flows)"),
        worst_cons,
        tol::CONSERVATION,
    ));
    checks.push(Check::residual(
        format!("geodesic_defect({starts} flows)"),
        worst_geo,
        tol::GEODESIC,
    ));

    // transnormal law on boundary samples over the domain grid
    let mut worst_trans = 0.0f64;
    for &nn in &[2usize, 3, 4] {
        for m in 0..nn {
            for &theta in &theta_grid(profile) {
                let domain = make_model_domain(nn, m, theta, DomainSide::Complement).unwrap();
                let ff = ObataFunction::height(nn, 1.0);
                let a = 1.0 / theta.tan();
                for _ in 0..starts {
                    let p = domain.sample_boundary(&mut rng);
                    let r = transnormal_residual(&domain, &ff, a, &p).unwrap();
                    worst_trans = worst_trans.max(r.abs());
                }
            }
        }
    }
    checks.push(Check::residual(
        "transnormal_defect(boundary grid)",
        worst_trans,
        tol::TRANSNORMAL,
    ));

    // first-hit contract over the whole a > 0 domain grid: forward flow
    // from f > 0 starts never reports a boundary hit (and symmetric for
    // f < 0), with `starts` random starts per domain
    for &nn in &[2usize, 3, 4] {
        for m in 0..nn {
            for &theta in &theta_grid(profile) {
                let domain = make_model_domain(nn, m, theta, DomainSide::Complement).unwrap();
                let ff = ObataFunction::height(nn, 1.0);
                let a = 1.0 / theta.tan();
                let mut hits_ok = true;
                let mut drawn = 0;
                while drawn < starts {
                    let p = random_point(nn, &mut rng);
                    if !domain.contains(&p).unwrap() || ff.value(&p).abs() < 0.05 {
                        continue;
                    }
                    drawn += 1;
                    let event = first_hit_classification(&ff, a, &domain, &p).unwrap();
                    let expect = if ff.value(&p) > 0.0 {
                        TerminalEvent::InteriorMax
                    } else {
                        TerminalEvent::InteriorMin
                    };
                    hits_ok &= event == expect;
                }
                checks.push(Check::holds(
                    format!("first_hit(n={nn}, m={m}, theta={theta:.4}, {starts} starts)"),
                    hits_ok,
                ));
            }
        }
    }

    // zero-level crossing precedes any boundary for backward warped flows
    let theta_o = 2.0 * PI / 3.0;
    let aw = 1.0 / theta_o.tan();
    let model = warped_model_build(
        aw,
        BaseGeometry::FlatDisk,
        WarpedModel::standard_interval(aw),
        1.0,
    )
    .unwrap();
    let mut crossing_ok = true;
    for k in 1..=starts {
        let s0 = model.s_max * k as f64 / (starts + 1) as f64;
        let opts = FlowOptions::new(1e-3, 10.0, FlowDirection::Backward);
        let trace = warped_gradient_flow(&model, &[0.0], s0, opts).unwrap();
        match warped_zero_crossing(&trace) {
            Some(t) => crossing_ok &= t < trace.terminal_time - 1e-9,
            None => crossing_ok = false,
        }
    }
    checks.push(Check::holds(
        format!("zero_crossing_before_boundary({starts} starts)"),
        crossing_ok,
    ));

    CriterionResult {
        index: 4,
        name: "Conservation and transnormal laws along flows".into(),
        checks,
    }
}

fn random_point<R: rand::Rng>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..=n)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0f64);
                let u2: f64 = rng.gen_range(0.0..1.0f64);
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            })
            .collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-6 {
            return SpherePoint::project(v).unwrap();
        }
    }
}

/// Criterion 5: principal-curvature structure of the model boundaries and
/// the closed-form curvature family against its ODE.
pub fn curvature_structure(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3001);
    let samples = match profile {
        Profile::Quick => 25,
        Profile::Full => 100,
    };
    for &n in &[2usize, 3, 4] {
        for m in 0..n {
            for &theta in &theta_grid(profile) {
                let domain = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
                let a = 1.0 / theta.tan();
                let expected = model_boundary_spectrum(n, m, a).unwrap();
                let mut all_match = true;
                for _ in 0..samples {
                    let p = domain.sample_boundary(&mut rng);
                    match numeric_second_fundamental(&domain, &p, 1e-4) {
                        Ok(got) => all_match &= got.agrees_with(&expected, tol::CURVATURE),
                        Err(_) => all_match = false,
                    }
                }
                checks.push(Check::holds(
                    format!("shape_operator(n={n}, m={m}, theta={theta:.4}, {samples} samples)"),
                    all_match,
                ));
            }
        }
    }
    // closed-form family vs its ODE
    for &a in &[0.5f64, 1.0, 2.0] {
        let omega = (1.0 + a * a).sqrt();
        let grid: Vec<f64> = (1..95)
            .map(|k| k as f64 / 100.0 * FRAC_PI_2 / omega)
            .collect();
        for mu in [0.0, 0.4 * a, -0.7 * a] {
            let fam = CurvatureFamily::mobius(a, mu);
            let r = curvature_ode_residual(CurvatureInput::Family(&fam), a, &grid).unwrap();
            checks.push(Check::residual(
                format!("curvature_ode(a={a}, mu={mu:.2})"),
                r,
                tol::CURVATURE_ODE,
            ));
        }
        let fam = CurvatureFamily::constant(a);
        let r = curvature_ode_residual(CurvatureInput::Family(&fam), a, &grid).unwrap();
        checks.push(Check::residual(
            format!("curvature_ode_constant(a={a})"),
            r,
            0.0,
        ));
    }
    CriterionResult {
        index: 5,
        name: "Principal-curvature structure of model boundaries".into(),
        checks,
    }
}

/// Criterion 6: the non-vanishing Neumann mechanism — λ·cos nondecreasing
/// for every initial value; only λ₀ = 0 stays bounded.
pub fn neumann_mechanism(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let grid: Vec<i64> = match profile {
        Profile::Quick => (-3..=3).collect(),
        Profile::Full => (-10..=10).collect(),
    };
    let s_end = FRAC_PI_2 - 1e-3;
    for &l in &[2.0f64.sqrt(), 2.0] {
        let mut monotone = true;
        let mut bounded_only_zero = true;
        for &lam0 in &grid {
            let lam0 = lam0 as f64;
            let fwd = neumann_curvature_flow(l, lam0, s_end).unwrap();
            let bwd = neumann_curvature_flow(l, lam0, -s_end).unwrap();
            monotone &= fwd.nondecreasing() && bwd.nondecreasing();
            let bounded = fwd.stayed_bounded() && bwd.stayed_bounded();
            bounded_only_zero &= bounded == (lam0 == 0.0);
        }
        checks.push(Check::holds(
            format!("lambda_cos_nondecreasing(L={l:.4})"),
            monotone,
        ));
        checks.push(Check::holds(
            format!("only_zero_bounded(L={l:.4})"),
            bounded_only_zero,
        ));
    }
    CriterionResult {
        index: 6,
        name: "Neumann curvature mechanism (monotone, only 0 bounded)".into(),
        checks,
    }
}

/// Criterion 7: the radial graph-equation solver.
pub fn phi_solver(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let h = match profile {
        Profile::Quick => 2e-4,
        Profile::Full => 1e-4,
    };
    for &theta in &obtuse_grid(profile) {
        let a = 1.0 / theta.tan();
        match phi_radial_solve(a, BaseGeometry::FlatDisk, 3.0, h) {
            Ok(profile_) => {
                checks.push(Check::residual(
                    format!("phi_graph_residual(theta={theta:.4})"),
                    profile_.max_interior_residual(),
                    tol::PHI_RESIDUAL,
                ));
                checks.push(Check::matches(
                    format!("phi_plateau(theta={theta:.4})"),
                    profile_.rho_samples.last().unwrap().1,
                    PI - theta,
                    tol::PHI_PLATEAU,
                ));
                checks.push(Check::holds(
                    format!("phi_monotone(theta={theta:.4})"),
                    profile_.is_monotone(),
                ));
            }
            Err(e) => checks.push(Check::holds(format!("phi_solve [{e}]"), false)),
        }
        let plus = phi_radial_solve_perturbed(a, BaseGeometry::FlatDisk, 2.0, 1e-3, 1e-6);
        let minus = phi_radial_solve_perturbed(a, BaseGeometry::FlatDisk, 2.0, 1e-3, -1e-6);
        match (plus, minus) {
            (Ok(p), Ok(m)) => checks.push(Check::residual(
                format!("phi_twin_solve(theta={theta:.4})"),
                p.sup_distance(&m),
                tol::PHI_TWIN,
            )),
            _ => checks.push(Check::holds("phi_twin_solve", false)),
        }
    }
    CriterionResult {
        index: 7,
        name: "Radial graph-equation solver (residual, plateau, uniqueness)".into(),
        checks,
    }
}

/// Criterion 8: the jet recursion against analytic collar expansions, the
/// compatibility constraint, and the gluing criterion.
pub fn jet_recursion(_profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let k = 8;
    for model in [
        ExactModel::CapComplement,
        ExactModel::CapCore,
        ExactModel::Hemisphere,
    ] {
        let err = jets::jet_vs_exact(model, FRAC_PI_4, 1.0, k).unwrap();
        checks.push(Check::residual(
            format!("jet_vs_exact_float({model:?})"),
            err,
            tol::JET_FLOAT,
        ));
        let exact_ok = jets::jet_vs_exact_symbolic(model, (1, 1), k).unwrap();
        checks.push(Check::holds(
            format!("jet_vs_exact_rational({model:?})"),
            exact_ok,
        ));
    }

    // gluing: cap and core match to order K; a θ-mismatched pair fails
    let theta = FRAC_PI_4;
    let data = |model: ExactModel, th: f64| {
        BoundaryData::Homogeneous(jets::model_data(
            model,
            &th.sin(),
            &th.cos(),
            &1.0,
            k,
            ReferenceMetric::RoundSphere { dim: 2 },
        ))
    };
    let cap = jet_extend(&data(ExactModel::CapComplement, theta), k).unwrap();
    let core = jet_extend(&data(ExactModel::CapCore, theta), k).unwrap();
    checks.push(Check::holds(
        "jets_match(cap, core)",
        jets_match(&cap, &core, k, 1e-12).unwrap(),
    ));
    let other = jet_extend(&data(ExactModel::CapCore, 0.9), k).unwrap();
    checks.push(Check::holds(
        "jets_match rejects theta mismatch",
        !jets_match(&cap, &other, 0, 1e-10).unwrap(),
    ));

    // constraint residuals: homogeneous and grid-on-constants both vanish
    let res = jet_constraint_residual(&cap);
    let worst = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::residual(
        "constraint_residual(homogeneous)",
        worst,
        tol::JET_CONSTRAINT,
    ));
    let grid = PeriodicGrid::new(vec![6, 6], vec![0.2, 0.25]).unwrap();
    let gd = GridData {
        g0: TensorField::scaled_identity(&grid, theta.cos().powi(2)),
        f0: ScalarField::constant(&grid, theta.sin()),
        f1: ScalarField::constant(&grid, theta.cos()),
        phi: GridPhi::identity(k),
        grid,
    };
    let gj = jet_extend(&BoundaryData::Grid(gd), k).unwrap();
    let res = jet_constraint_residual(&gj);
    let worst = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::residual(
        "constraint_residual(grid constants)",
        worst,
        tol::JET_CONSTRAINT,
    ));

    // conserved-quantity shadow through order K-1
    let hd: HomogeneousData<f64> = jets::model_data(
        ExactModel::CapComplement,
        &theta.sin(),
        &theta.cos(),
        &2.0,
        k,
        ReferenceMetric::RoundSphere { dim: 2 },
    );
    let jet = homogeneous_recursion(&hd.g0, &hd.f0, &hd.f1, &hd.phi.derivs, k).unwrap();
    let shadow = jets::conservation_shadow(&jet.f, &2.0, k - 1);
    let worst = shadow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::residual("conservation_shadow", worst, 1e-12));

    // exact backend shadow is identically zero
    let ed: HomogeneousData<ExactScalar> = jets::model_data(
        ExactModel::CapComplement,
        &ExactScalar::sin_theta(),
        &ExactScalar::cos_theta(),
        &ExactScalar::one(),
        k,
        ReferenceMetric::RoundSphere { dim: 2 },
    );
    let ejet = homogeneous_recursion(&ed.g0, &ed.f0, &ed.f1, &ed.phi.derivs, k).unwrap();
    let eshadow = jets::conservation_shadow(&ejet.f, &ExactScalar::one(), k - 1);
    checks.push(Check::holds(
        "conservation_shadow(exact)",
        eshadow.iter().all(|v| v.is_zero()),
    ));

    CriterionResult {
        index: 8,
        name: "Boundary jet recursion and gluing criterion".into(),
        checks,
    }
}

/// Criterion 9: Reilly's identity on radial profiles.
pub fn reilly_identity(profile: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    let ns: Vec<usize> = match profile {
        Profile::Quick => vec![3],
        Profile::Full => vec![2, 3, 4],
    };
    for &n in &ns {
        for &r_cap in &[FRAC_PI_4, FRAC_PI_2] {
            for (tag, prof) in [
                ("cos", RadialProfile::cos_r()),
                ("r2", RadialProfile::r_squared()),
            ] {
                let (_, _, defect) = reilly_identity_check(n, r_cap, &prof);
                checks.push(Check::residual(
                    format!("reilly({tag}, n={n}, R={r_cap:.4})"),
                    defect,
                    tol::REILLY,
                ));
            }
        }
    }
    CriterionResult {
        index: 9,
        name: "Reilly identity quadrature".into(),
        checks,
    }
}

/// Criterion 10: quantitative fingerprints of the rigidity classifications
/// (boundary lengths, warp factors, Robin end-point identities).
pub fn rigidity_fingerprints(grid: Profile) -> CriterionResult {
    let mut checks = Vec::new();
    for &theta in &theta_grid(grid) {
        let domain = make_model_domain(2, 0, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(2, 1.0);
        let report = boundary_circuit(&domain, &f, 20_000).unwrap();
        checks.push(Check::matches(
            format!("boundary_length_2pik_sin(theta={theta:.4})"),
            report.length,
            2.0 * PI * report.maxima_count as f64 * theta.sin(),
            tol::LENGTH,
        ));
        checks.push(Check::holds(
            format!("boundary_maxima_count(theta={theta:.4})"),
            report.maxima_count == 1,
        ));

        // warp factor solves its ODE and collapses at the smooth point
        let ts: Vec<f64> = (0..40)
            .map(|j| j as f64 / 40.0 * (FRAC_PI_2 - theta) * 0.95)
            .collect();
        let r = metric_ode_residual(theta, &ts).unwrap();
        checks.push(Check::residual(
            format!("metric_ode_residual(theta={theta:.4})"),
            r,
            1e-10,
        ));
        let w = metric_warp(theta, FRAC_PI_2 - theta).unwrap();
        checks.push(Check::residual(
            format!("warp_collapse(theta={theta:.4})"),
            w,
            1e-28,
        ));
    }
    // boundary flow law on a torus boundary: focal value L sin θ and the
    // sine fit of f along the flow
    let theta = FRAC_PI_4;
    let domain = make_model_domain(3, 1, theta, DomainSide::Complement).unwrap();
    let f = ObataFunction::height(3, 1.0);
    let a = 1.0 / theta.tan();
    let mut rng = ChaCha8Rng::seed_from_u64(4001);
    let mut start = domain.sample_boundary(&mut rng);
    while boundary_gradient(&domain, &f, &start)
        .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
        .unwrap_or(0.0)
        < 0.3
    {
        start = domain.sample_boundary(&mut rng);
    }
    let result = boundary_flow(&domain, &f, a, &start, 1e-3).unwrap();
    checks.push(Check::residual(
        "boundary_flow_fit(T^1 in S^3)",
        result.fit_residual,
        1e-6,
    ));
    checks.push(Check::matches(
        "boundary_focal_value",
        result.trace.samples.last().unwrap().f_value,
        theta.sin(),
        1e-9,
    ));
    // matched Robin residuals on both sides of the same boundary
    let core = make_model_domain(3, 1, theta, DomainSide::Core).unwrap();
    let p = domain.sample_boundary(&mut rng);
    checks.push(Check::residual(
        "robin_residual(complement)",
        robin_residual(&domain, &f, a, &p).unwrap(),
        1e-10,
    ));
    checks.push(Check::residual(
        "robin_residual(core)",
        robin_residual(&core, &f, -a, &p).unwrap(),
        1e-10,
    ));
    CriterionResult {
        index: 10,
        name: "Rigidity fingerprints (lengths, warps, Robin pairings)".into(),
        checks,
    }
}

/// Runs the complete battery.
pub fn run_acceptance(profile: Profile) -> Vec<CriterionResult> {
    vec![
        eigen_rigidity(profile),
        hemisphere_eigenvalues(profile),
        flow_hit_times(profile),
        conservation_laws(profile),
        curvature_structure(profile),
        neumann_mechanism(profile),
        phi_solver(profile),
        jet_recursion(profile),
        reilly_identity(profile),
        rigidity_fingerprints(profile),
    ]
}
