//! Scalar ODE kernels: the flow-value and metric (warp) equations, the two
//! principal-curvature equations (Robin and non-vanishing Neumann), the
//! radial reduction of the boundary-graph equation, and the warped-product
//! model built from it.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Value of f along a unit-speed normalized gradient flow line:
/// the solution L·sin(α + t) of f″ + f = 0 with f(0) = L sin α.
pub fn flow_value(alpha: f64, t: f64, l: f64) -> f64 {
    l * (alpha + t).sin()
}

/// Exact solution w(t) = cos²(α+t)/cos²α of the metric ODE
/// ½ f′(t) w′(t) + f(t) w(t) = 0 with w(0) = 1 and f(t) = L sin(α+t).
///
/// The conformal factor multiplies the initial cross-section metric; it
/// collapses to 0 at t = π/2 − α, the smooth-point limit.
pub fn metric_warp(alpha: f64, t: f64) -> Result<f64> {
    let ca = alpha.cos();
    if ca.abs() < 1e-12 {
        return Err(CoreError::InvalidParameter {
            name: "alpha",
            reason: "cos(alpha) vanishes; the warp is undefined at the poles".into(),
        });
    }
    let c = (alpha + t).cos();
    Ok(c * c / (ca * ca))
}

/// One classical RK4 step for a scalar ODE y' = f(t, y).
pub(crate) fn rk4_step<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, h: f64) -> f64 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Sampled warp profile w(t) with w(0) = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpProfile {
    /// Initial phase: f(0) = L sin α on the base cross-section.
    pub alpha: f64,
    pub samples: Vec<(f64, f64)>,
}

impl WarpProfile {
    /// Samples the closed form on [0, t_end].
    pub fn closed_form(alpha: f64, t_end: f64, dt: f64) -> Result<Self> {
        let steps = (t_end / dt).round() as usize;
        let samples = (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                metric_warp(alpha, t).map(|w| (t, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, samples })
    }

    /// Integrates the metric ODE w′ = −2 tan(α+t)·w numerically (RK4).
    pub fn integrated(alpha: f64, t_end: f64, dt: f64) -> Result<Self> {
        metric_warp(alpha, 0.0)?;
        let field = |t: f64, w: f64| -2.0 * (alpha + t).tan() * w;
        let steps = (t_end / dt).round() as usize;
        let mut samples = Vec::with_capacity(steps + 1);
        let mut w = 1.0;
        samples.push((0.0, w));
        for k in 0..steps {
            let t = k as f64 * dt;
            w = rk4_step(&field, t, w, dt);
            samples.push((t + dt, w));
        }
        Ok(Self { alpha, samples })
    }
}

impl WarpProfile {
    /// CSV rows (t, w, residual) with the pointwise metric-ODE residual
    /// ½f′w′ + f·w from centered differences on the sample grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w,residual\n");
        let n = self.samples.len();
        for (i, &(t, w)) in self.samples.iter().enumerate() {
            let res = if i > 0 && i + 1 < n {
                let (t0, w0) = self.samples[i - 1];
                let (t2, w2) = self.samples[i + 1];
                let wp = (w2 - w0) / (t2 - t0);
                format!(
                    "{:.6e}",
                    0.5 * (self.alpha + t).cos() * wp + (self.alpha + t).sin() * w
                )
            } else {
                String::new()
            };
            out.push_str(&format!("{t:.12e},{w:.12e},{res}\n"));
        }
        out
    }
}

/// Pointwise residual of the metric ODE ½f′w′ + f·w for the closed-form
/// warp, with w′ from Richardson-extrapolated centered differences.
/// f is normalized to L = 1 (the residual is linear in L).
pub fn metric_ode_residual(alpha: f64, ts: &[f64]) -> Result<f64> {
    let h = 1e-3;
    let mut worst = 0.0f64;
    for &t in ts {
        let d = |step: f64| -> Result<f64> {
            Ok((metric_warp(alpha, t + step)? - metric_warp(alpha, t - step)?) / (2.0 * step))
        };
        let wp = (4.0 * d(h / 2.0)? - d(h)?) / 3.0;
        let f = (alpha + t).sin();
        let fp = (alpha + t).cos();
        let w = metric_warp(alpha, t)?;
        worst = worst.max((0.5 * fp * wp + f * w).abs());
    }
    Ok(worst)
}

/// Which solution family of the boundary principal-curvature ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureBranch {
    /// λ(s) ≡ −a.
    ConstantMinusA,
    /// λ(s) = (aμ cos(√(1+a²)s) + 1) / (a − μ cos(√(1+a²)s)).
    Mobius,
}

/// One-parameter family of solutions of the principal-curvature ODE along a
/// boundary gradient geodesic, scaled so f(s) = sin(√(1+a²)s).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureFamily {
    pub a: f64,
    pub mu: f64,
    pub branch: CurvatureBranch,
}

impl CurvatureFamily {
    pub fn constant(a: f64) -> Self {
        Self {
            a,
            mu: 0.0,
            branch: CurvatureBranch::ConstantMinusA,
        }
    }

    pub fn mobius(a: f64, mu: f64) -> Self {
        Self {
            a,
            mu,
            branch: CurvatureBranch::Mobius,
        }
    }

    /// Frequency √(1+a²) of the reduced arc-length parameter.
    pub fn omega(&self) -> f64 {
        (1.0 + self.a * self.a).sqrt()
    }

    /// Focal endpoint s = π/(2√(1+a²)) of the admissible interval.
    pub fn focal_s(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.omega()
    }
}

/// Evaluates the closed-form curvature family, erroring when the Mobius
/// denominator a − μ cos(√(1+a²)s) drops below 1e-10 anywhere on [0, s]
/// (the mechanism that excludes over-large |μ|).
pub fn curvature_closed_form(family: &CurvatureFamily, s: f64) -> Result<f64> {
    match family.branch {
        CurvatureBranch::ConstantMinusA => Ok(-family.a),
        CurvatureBranch::Mobius => {
            let omega = family.omega();
            // cos(omega u) is monotone on [0, pi/omega]; check both endpoints
            // and the interior minimum of the denominator.
            let denom_at = |u: f64| family.a - family.mu * (omega * u).cos();
            let mut min_d = denom_at(0.0).abs().min(denom_at(s).abs());
            if family.mu != 0.0 {
                // denominator vanishes where cos = a/mu
                let ratio = family.a / family.mu;
                if ratio.abs() <= 1.0 {
                    let u_zero = ratio.acos() / omega;
                    if u_zero >= 0.0 && u_zero <= s {
                        min_d = 0.0;
                    }
                }
            }
            if min_d < 1e-10 {
                return Err(CoreError::SingularFamily { s, value: min_d });
            }
            let c = (omega * s).cos();
            Ok((family.a * family.mu * c + 1.0) / (family.a - family.mu * c))
        }
    }
}

/// Analytic derivative λ′(s) of the closed-form family.
pub fn curvature_derivative(family: &CurvatureFamily, s: f64) -> f64 {
    match family.branch {
        CurvatureBranch::ConstantMinusA => 0.0,
        CurvatureBranch::Mobius => {
            let omega = family.omega();
            let c = (omega * s).cos();
            let d = family.a - family.mu * c;
            -omega * (omega * s).sin() * family.mu * (1.0 + family.a * family.a) / (d * d)
        }
    }
}

/// Input to the curvature ODE residual: a closed-form family (analytic
/// derivative) or numeric (s, λ) samples (centered differences).
pub enum CurvatureInput<'a> {
    Family(&'a CurvatureFamily),
    Samples(&'a [(f64, f64)]),
}

/// Max pointwise residual of the principal-curvature ODE
/// √(1+a²) cos(√(1+a²)s) λ′(s) + f(s)(λ(s)+a)(aλ(s)−1) = 0,
/// with f(s) = sin(√(1+a²)s) (amplitude normalized to L = √(1+a²)).
pub fn curvature_ode_residual(input: CurvatureInput<'_>, a: f64, grid: &[f64]) -> Result<f64> {
    let omega = (1.0 + a * a).sqrt();
    let focal = std::f64::consts::FRAC_PI_2 / omega;
    let check_s = |s: f64| -> Result<()> {
        if s > focal - 1e-9 {
            return Err(CoreError::InvalidParameter {
                name: "grid",
                reason: format!("s = {s} touches the focal endpoint {focal}"),
            });
        }
        Ok(())
    };
    let residual = |s: f64, lam: f64, dlam: f64| {
        omega * (omega * s).cos() * dlam + (omega * s).sin() * (lam + a) * (a * lam - 1.0)
    };
    let mut worst = 0.0f64;
    match input {
        CurvatureInput::Family(fam) => {
            for &s in grid {
                check_s(s)?;
                let lam = curvature_closed_form(fam, s)?;
                let dlam = curvature_derivative(fam, s);
                worst = worst.max(residual(s, lam, dlam).abs());
            }
        }
        CurvatureInput::Samples(samples) => {
            if samples.len() < 3 {
                return Err(CoreError::TooFewSamples {
                    need: 3,
                    got: samples.len(),
                });
            }
            for w in samples.windows(3) {
                let (s0, l0) = w[0];
                let (s1, l1) = w[1];
                let (s2, l2) = w[2];
                check_s(s1)?;
                let dlam = (l2 - l0) / (s2 - s0);
                worst = worst.max(residual(s1, l1, dlam).abs());
            }
        }
    }
    Ok(worst)
}

/// Result of integrating the non-vanishing-Neumann curvature ODE
/// √(L²−1) cos(s) λ′ − √(L²−1) sin(s) λ = λ² from s = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannFlowReport {
    pub l: f64,
    pub lambda0: f64,
    /// (s, λ(s)) samples up to s_end or blow-up.
    pub samples: Vec<(f64, f64)>,
    /// The monotone quantity √(L²−1)·λ(s)·cos(s) at each sample.
    pub lambda_cos: Vec<f64>,
    /// Largest decrease of λcos along increasing s (0 when monotone).
    pub max_monotonicity_violation: f64,
    /// s at which |λ| exceeded the 1e6 blow-up threshold, if it did.
    pub blow_up_s: Option<f64>,
}

impl NeumannFlowReport {
    /// Whether √(L²−1)·λ·cos is nondecreasing within 1e-10.
    pub fn nondecreasing(&self) -> bool {
        self.max_monotonicity_violation <= 1e-10
    }

    pub fn stayed_bounded(&self) -> bool {
        self.blow_up_s.is_none()
    }
}

impl NeumannFlowReport {
    /// CSV rows (s, lambda, residual) where the residual column carries
    /// the decrease of the monotone quantity √(L²−1)·λ·cos between
    /// consecutive samples (zero when the law holds).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,lambda,residual\n");
        for (i, &(s, lam)) in self.samples.iter().enumerate() {
            let res = if i > 0 {
                format!(
                    "{:.6e}",
                    (self.lambda_cos[i - 1] - self.lambda_cos[i]).max(0.0)
                )
            } else {
                String::new()
            };
            out.push_str(&format!("{s:.12e},{lam:.12e},{res}\n"));
        }
        out
    }
}

/// Blow-up threshold for the Neumann curvature flow; the argument only
/// needs "unbounded", not the blow-up rate.
pub const NEUMANN_BLOW_UP: f64 = 1e6;

/// Integrates the Neumann curvature ODE from λ(0) = λ0 towards s_end
/// (either sign), reporting the λcos sequence and its monotonicity.
pub fn neumann_curvature_flow(l: f64, lambda0: f64, s_end: f64) -> Result<NeumannFlowReport> {
    if l <= 1.0 {
        return Err(CoreError::InvalidParameter {
            name: "l",
            reason: format!("L = {l} must exceed 1"),
        });
    }
    if s_end.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(CoreError::InvalidParameter {
            name: "s_end",
            reason: format!("|s_end| = {} must be < pi/2", s_end.abs()),
        });
    }
    let k = (l * l - 1.0).sqrt();
    let field = |s: f64, lam: f64| (lam * lam + k * s.sin() * lam) / (k * s.cos());
    let dt = 1e-4f64.copysign(s_end);
    let steps = (s_end / dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut lam = lambda0;
    let mut blow_up_s = None;
    samples.push((0.0, lam));
    for i in 0..steps {
        let s = i as f64 * dt;
        lam = rk4_step(&field, s, lam, dt);
        let s_next = (i + 1) as f64 * dt;
        if !lam.is_finite() || lam.abs() > NEUMANN_BLOW_UP {
            blow_up_s = Some(s_next);
            break;
        }
        samples.push((s_next, lam));
    }
    // order by increasing s so the monotone law reads left to right
    if s_end < 0.0 {
        samples.reverse();
    }
    let lambda_cos: Vec<f64> = samples.iter().map(|&(s, lam)| k * lam * s.cos()).collect();
    let max_violation = lambda_cos
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0f64, f64::max);
    Ok(NeumannFlowReport {
        l,
        lambda0,
        samples,
        lambda_cos,
        max_monotonicity_violation: max_violation,
        blow_up_s,
    })
}

/// Rotationally symmetric base geometry for the radial graph solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseGeometry {
    FlatDisk,
    RoundCap,
}

/// Radial solution φ(ρ) of the boundary-graph equation
/// cos φ / √(1 + cos⁻²φ |∇̃φ|²) + a sin φ = 0, with ρ the arc-length
/// distance from the outer boundary (φ(0) = 0), rising monotonically to the
/// plateau value π − θ where tan φ = −1/a.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiProfile {
    pub a: f64,
    pub base: BaseGeometry,
    pub rho_samples: Vec<(f64, f64)>,
    /// Arc length at which the profile reaches the plateau, if within range.
    pub plateau_rho: Option<f64>,
    /// Plateau value π − θ.
    pub plateau_value: f64,
}

fn phi_angle_from_a(a: f64) -> f64 {
    // θ = arccot(a) in (π/2, π) for a < 0
    let t = (1.0 / a).atan();
    if t > 0.0 {
        t
    } else {
        t + std::f64::consts::PI
    }
}

/// Radicand cos²φ/(a² sin²φ) − 1 of the gradient-explicit first-order form.
fn phi_radicand(a: f64, phi: f64) -> f64 {
    let c = phi.cos();
    let s = phi.sin();
    c * c / (a * a * s * s) - 1.0
}

/// dρ/dφ-form slope dφ/dρ = cos φ · √(radicand), positive inward.
fn phi_slope(a: f64, phi: f64) -> Result<f64> {
    let r = phi_radicand(a, phi);
    if r < -1e-12 {
        return Err(CoreError::SolverState { phi, radicand: r });
    }
    Ok(phi.cos() * r.max(0.0).sqrt())
}

/// Solves the radial graph equation on [0, rho_max] with grid step h.
///
/// The boundary start φ ~ √(2ρ/|a|) is integrated in the ψ = φ² variable,
/// the mid range in φ itself, and near the plateau the solver switches to
/// the local model φ′ ∝ √(π−θ−φ) (variable u = √(π−θ−φ)) with an
/// event-based stop, avoiding step-size collapse at the degenerate end.
pub fn phi_radial_solve(a: f64, base: BaseGeometry, rho_max: f64, h: f64) -> Result<PhiProfile> {
    phi_radial_solve_perturbed(a, base, rho_max, h, 0.0)
}

/// Same solver with the hand-off value scaled by (1 + delta); used by the
/// twin-solve uniqueness check.
pub fn phi_radial_solve_perturbed(
    a: f64,
    base: BaseGeometry,
    rho_max: f64,
    h: f64,
    delta: f64,
) -> Result<PhiProfile> {
    if a >= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "a",
            reason: format!("a = {a} must be negative"),
        });
    }
    if !(rho_max > 0.0) || !(h > 0.0 && h <= 0.1) {
        return Err(CoreError::InvalidParameter {
            name: "h",
            reason: "need rho_max > 0 and 0 < h <= 0.1".into(),
        });
    }
    let theta = phi_angle_from_a(a);
    let beta = std::f64::consts::PI - theta; // plateau value, in (0, pi/2)
    let abs_a = a.abs();

    // Local-model switch thresholds.
    let phi_lo = (0.1f64).min(0.25 * beta);
    let u_switch = (1e-2f64).min(0.25 * beta.sqrt());

    // radicand/(beta-phi) stays positive up to the plateau; its limit there
    let rad_slope = 2.0 * beta.cos() / (a * a * beta.sin().powi(3));
    let substeps = 4usize;
    let hs = h / substeps as f64;

    let n_grid = (rho_max / h).round() as usize;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n_grid + 1);
    samples.push((0.0, 0.0));

    // Phase tracking: 0 = psi variable, 1 = phi variable, 2 = u variable.
    let mut phase = 0usize;
    let mut psi = 0.0f64; // phi^2
    let mut phi = 0.0f64;
    let mut u = 0.0f64; // sqrt(beta - phi)
    let mut plateau_rho: Option<f64> = None;

    let g_field = |_rho: f64, psi: f64| -> f64 {
        // d(phi^2)/drho = 2 phi F(phi), analytic limit 2/|a| at 0
        let phi = psi.max(0.0).sqrt();
        if phi < 1e-9 {
            return 2.0 / abs_a;
        }
        let c = phi.cos();
        let s = phi.sin();
        let inner = (c * c - a * a * s * s).max(0.0).sqrt();
        2.0 * (phi / s) * c * inner / abs_a
    };
    let u_field = |_rho: f64, u: f64| -> f64 {
        // du/drho = -F(beta - u^2)/(2u), smooth through u = 0
        let phi = beta - u * u;
        let q = if u.abs() < 1e-5 {
            rad_slope
        } else {
            phi_radicand(a, phi) / (u * u)
        };
        -0.5 * phi.cos() * q.max(0.0).sqrt()
    };

    for k in 0..n_grid {
        let rho0 = k as f64 * h;
        if plateau_rho.is_some() {
            samples.push((rho0 + h, beta));
            continue;
        }
        for j in 0..substeps {
            let rho = rho0 + j as f64 * hs;
            match phase {
                0 => {
                    psi = rk4_step(&g_field, rho, psi, hs);
                    phi = psi.max(0.0).sqrt();
                    if phi >= phi_lo {
                        phase = 1;
                        if delta != 0.0 {
                            phi *= 1.0 + delta;
                        }
                    }
                }
                1 => {
                    let field = |_r: f64, p: f64| phi_slope(a, p.min(beta)).unwrap_or(0.0);
                    // surface inconsistent states before stepping
                    phi_slope(a, phi)?;
                    phi = rk4_step(&field, rho, phi, hs);
                    if beta - phi <= u_switch * u_switch {
                        phase = 2;
                        u = (beta - phi).max(0.0).sqrt();
                    }
                }
                _ => {
                    let u_next = rk4_step(&u_field, rho, u, hs);
                    if u_next <= 0.0 {
                        // event stop: linear crossing inside this substep
                        let du = -u_field(rho, u);
                        let frac = if du > 0.0 { (u / du).min(hs) } else { 0.0 };
                        plateau_rho = Some(rho + frac);
                        phi = beta;
                        break;
                    }
                    u = u_next;
                    phi = beta - u * u;
                }
            }
        }
        samples.push((rho0 + h, phi.min(beta)));
    }

    Ok(PhiProfile {
        a,
        base,
        rho_samples: samples,
        plateau_rho,
        plateau_value: beta,
    })
}

/// Fourth-order centered derivative on a uniform grid,
/// (f₋₂ − 8f₋₁ + 8f₁ − f₂)/(12h).
fn centered_derivative(values: &[(f64, f64)], i: usize) -> f64 {
    let h = values[i + 1].0 - values[i].0;
    (values[i - 2].1 - 8.0 * values[i - 1].1 + 8.0 * values[i + 1].1 - values[i + 2].1) / (12.0 * h)
}

impl PhiProfile {
    /// Residual of the displayed graph equation at each interior sample,
    /// with |∇̃φ| from centered differences.
    pub fn graph_residuals(&self) -> Vec<(f64, f64)> {
        let a = self.a;
        let n = self.rho_samples.len();
        let mut out = Vec::new();
        for i in 2..n.saturating_sub(2) {
            let (r1, p1) = self.rho_samples[i];
            let w = centered_derivative(&self.rho_samples, i);
            let c = p1.cos();
            let res = c / (1.0 + w * w / (c * c)).sqrt() + a * p1.sin();
            out.push((r1, res));
        }
        out
    }

    /// Max graph-equation residual on the smooth interior window
    /// φ ∈ [0.25·(π−θ), 0.95·(π−θ)], away from the √ρ boundary layer and
    /// the plateau joint where centered differences degrade.
    pub fn max_interior_residual(&self) -> f64 {
        let lo = 0.25 * self.plateau_value;
        let hi = 0.95 * self.plateau_value;
        self.graph_residuals()
            .iter()
            .zip(self.rho_samples.iter().skip(2))
            .filter(|(_, (_, p))| *p >= lo && *p <= hi)
            .map(|((_, r), _)| r.abs())
            .fold(0.0, f64::max)
    }

    /// Whether φ is nondecreasing along the grid.
    pub fn is_monotone(&self) -> bool {
        self.rho_samples
            .windows(2)
            .all(|w| w[1].1 >= w[0].1 - 1e-14)
    }

    /// Sup-norm distance to another profile on the shared grid prefix.
    pub fn sup_distance(&self, other: &PhiProfile) -> f64 {
        self.rho_samples
            .iter()
            .zip(&other.rho_samples)
            .map(|((_, p), (_, q))| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Max residual of the two-solution cross identity
/// ∇̃(φ₊−φ₋)·∇̃(φ₊+φ₋) = B(φ₊) − B(φ₋) with
/// B(φ) = cos⁴φ (1/(a² sin²φ) − 1/cos²φ), gradients by centered
/// differences; samples with φ near 0 or the plateau are excluded.
pub fn lemma45_identity_residual(plus: &PhiProfile, minus: &PhiProfile) -> Result<f64> {
    if (plus.a - minus.a).abs() > 1e-14 {
        return Err(CoreError::InvalidParameter {
            name: "minus",
            reason: "profiles must share the Robin coefficient".into(),
        });
    }
    let n = plus.rho_samples.len().min(minus.rho_samples.len());
    if n < 3 {
        return Err(CoreError::TooFewSamples { need: 3, got: n });
    }
    for i in 0..n {
        if (plus.rho_samples[i].0 - minus.rho_samples[i].0).abs() > 1e-12 {
            return Err(CoreError::InvalidParameter {
                name: "minus",
                reason: "profiles must share the rho grid".into(),
            });
        }
    }
    let a = plus.a;
    let beta = plus.plateau_value;
    let b = |phi: f64| {
        let c = phi.cos();
        let s = phi.sin();
        c.powi(4) / (a * a * s * s) - c * c
    };
    let lo = 0.35 * beta;
    let hi = 0.92 * beta;
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let pp = plus.rho_samples[i].1;
        let pm = minus.rho_samples[i].1;
        if pp.min(pm) < lo || pp.max(pm) > hi {
            continue;
        }
        let dp = centered_derivative(&plus.rho_samples, i);
        let dm = centered_derivative(&minus.rho_samples, i);
        let lhs = (dp - dm) * (dp + dm);
        let rhs = b(pp) - b(pm);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// The warped-product model M₀ × [s₋, s₊] with metric ds² + cos²s·g̃₀ and
/// f = L sin s, validated to satisfy the Robin condition at both ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpedModel {
    pub a: f64,
    pub base: BaseGeometry,
    pub s_min: f64,
    pub s_max: f64,
    pub l: f64,
}

/// Builds the warped model, checking the Robin residual ∂f/∂ν + a·f at both
/// interval ends (outward normals ∓∂_s); residual above 1e-10 is an error
/// that reports the offending end.
pub fn warped_model_build(
    a: f64,
    base: BaseGeometry,
    s_interval: (f64, f64),
    l: f64,
) -> Result<WarpedModel> {
    if a >= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "a",
            reason: format!("a = {a} must be negative"),
        });
    }
    let (s_min, s_max) = s_interval;
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(s_min < s_max && s_min > -half_pi && s_max < half_pi) {
        return Err(CoreError::InvalidParameter {
            name: "s_interval",
            reason: format!("interval [{s_min}, {s_max}] must be ordered inside (-pi/2, pi/2)"),
        });
    }
    let model = WarpedModel {
        a,
        base,
        s_min,
        s_max,
        l,
    };
    for (s, res) in [
        (s_max, model.robin_residual_top()),
        (s_min, model.robin_residual_bottom()),
    ] {
        if res.abs() > 1e-10 {
            return Err(CoreError::RobinEndpoint { s, residual: res });
        }
    }
    Ok(model)
}

impl WarpedModel {
    /// The Robin-consistent symmetric interval [θ−π, π−θ] for a = cot θ < 0.
    pub fn standard_interval(a: f64) -> (f64, f64) {
        let theta = phi_angle_from_a(a);
        (theta - std::f64::consts::PI, std::f64::consts::PI - theta)
    }

    pub fn f(&self, s: f64) -> f64 {
        self.l * s.sin()
    }

    /// d f / d s = |∇f| component along ∂_s.
    pub fn f_prime(&self, s: f64) -> f64 {
        self.l * s.cos()
    }

    /// Warp factor cos s multiplying the cross-section metric g̃₀.
    pub fn warp(&self, s: f64) -> f64 {
        s.cos()
    }

    /// ∂f/∂ν + a·f at the s₊ end (ν = +∂_s).
    pub fn robin_residual_top(&self) -> f64 {
        self.l * self.s_max.cos() + self.a * self.l * self.s_max.sin()
    }

    /// ∂f/∂ν + a·f at the s₋ end (ν = −∂_s).
    pub fn robin_residual_bottom(&self) -> f64 {
        -self.l * self.s_min.cos() + self.a * self.l * self.s_min.sin()
    }

    pub fn contains_s(&self, s: f64) -> bool {
        s >= self.s_min - 1e-12 && s <= self.s_max + 1e-12
    }

    /// Positive outside the interval, zero on its ends.
    pub fn outward_residual(&self, s: f64) -> f64 {
        (s - self.s_max).max(self.s_min - s)
    }
}
