//! Radial eigenvalue problems on geodesic caps of the round sphere.
//!
//! Separation of variables on the cap of radius R reduces the Laplacian
//! eigenproblem Δf + ξf = 0 to the radial operator
//!
//! ```text
//! u″ + (n−1) cot(r) u′ + (ξ − k / sin²r) u = 0,    k = ℓ(ℓ + n − 2),
//! ```
//!
//! with a regular singular point at r = 0 where the bounded solution
//! behaves like r^ℓ.  The solver shoots from r = ε with a three-term
//! Frobenius start, scans the boundary-condition residual for a sign
//! change, then refines by bisection and secant steps.  The module also
//! verifies the integral identities (Reilly's formula on radial profiles
//! and the Robin eigenfunction boundary identity) used by the ξ₁ ≥ n
//! rigidity chain.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Boundary condition of the radial problem at r = R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialBc {
    /// u(R) = 0.
    Dirichlet,
    /// u′(R) = 0.
    Neumann,
    /// u′(R) + a·u(R) = 0.
    Robin(f64),
}

impl RadialBc {
    fn residual(&self, u: f64, du: f64) -> f64 {
        match self {
            RadialBc::Dirichlet => u,
            RadialBc::Neumann => du,
            RadialBc::Robin(a) => du + a * u,
        }
    }
}

/// The reduced radial eigenproblem on a geodesic cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem {
    /// Dimension n ≥ 2 of the cap.
    pub n: usize,
    /// Cap radius R ∈ (0, π).
    pub r: f64,
    /// Angular degree ℓ ≥ 0 (cross-section eigenvalue k = ℓ(ℓ+n−2)).
    pub ell: usize,
    pub bc: RadialBc,
}

impl SturmLiouvilleProblem {
    pub fn new(n: usize, r: f64, ell: usize, bc: RadialBc) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::InvalidParameter {
                name: "n",
                reason: format!("n = {n} must be >= 2"),
            });
        }
        if !(r > 0.0 && r < std::f64::consts::PI) {
            return Err(CoreError::InvalidParameter {
                name: "r",
                reason: format!("cap radius {r} must lie in (0, pi)"),
            });
        }
        if let RadialBc::Robin(a) = bc {
            if a == 0.0 || !a.is_finite() {
                return Err(CoreError::InvalidParameter {
                    name: "bc",
                    reason: "Robin coefficient must be nonzero".into(),
                });
            }
        }
        Ok(Self { n, r, ell, bc })
    }

    /// Cross-section eigenvalue k = ℓ(ℓ + n − 2).
    pub fn angular_eigenvalue(&self) -> f64 {
        (self.ell * (self.ell + self.n - 2)) as f64
    }
}

/// Computed smallest eigenvalue with its eigenfunction samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub xi: f64,
    pub ell: usize,
    /// (r, u) samples with max |u| normalized to 1.
    pub u_samples: Vec<(f64, f64)>,
    /// u′ at the same grid (same normalization).
    pub du_samples: Vec<f64>,
    pub bc_residual: f64,
    pub ode_residual: f64,
}

/// Shooting start offset; the Frobenius series removes the coordinate
/// singularity at r = 0.
const SHOOT_EPS: f64 = 1e-6;
/// Default number of RK4 steps across [ε, R].
const SHOOT_STEPS: usize = 4096;
/// Hard ceiling for the bracket extension.
const BRACKET_CEILING: f64 = 1e6;

/// Three-term Frobenius coefficients: u = r^ℓ (1 + c₂ r² + c₄ r⁴).
fn frobenius_coefficients(n: usize, ell: usize, k: f64, xi: f64) -> (f64, f64) {
    let nf = n as f64;
    let lf = ell as f64;
    let c2 = ((nf - 1.0) * lf / 3.0 + k / 3.0 - xi) / (4.0 * lf + 2.0 * nf);
    let c4 = ((nf - 1.0) * ((lf + 2.0) * c2 / 3.0 + lf / 45.0) - xi * c2
        + k * (c2 / 3.0 + 1.0 / 15.0))
        / (8.0 * lf + 4.0 * nf + 8.0);
    (c2, c4)
}

/// Integrates the radial ODE from the Frobenius start at ε to R; returns
/// (u(R), u′(R)) and optionally the full sample arrays.
fn shoot(
    problem: &SturmLiouvilleProblem,
    xi: f64,
    steps: usize,
    store: bool,
) -> (f64, f64, Vec<(f64, f64)>, Vec<f64>) {
    let n = problem.n as f64;
    let k = problem.angular_eigenvalue();
    let ell = problem.ell as f64;
    let (c2, c4) = frobenius_coefficients(problem.n, problem.ell, k, xi);
    let eps = SHOOT_EPS;
    let series = 1.0 + c2 * eps * eps + c4 * eps.powi(4);
    let dseries = 2.0 * c2 * eps + 4.0 * c4 * eps.powi(3);
    let (mut u, mut v) = if problem.ell == 0 {
        (series, dseries)
    } else {
        let p = eps.powi(problem.ell as i32);
        (p * series, ell * p / eps * series + p * dseries)
    };
    let rhs = |r: f64, u: f64, v: f64| -> f64 {
        let cot = r.cos() / r.sin();
        -(n - 1.0) * cot * v - (xi - k / (r.sin() * r.sin())) * u
    };
    let h = (problem.r - eps) / steps as f64;
    let mut us = Vec::new();
    let mut dus = Vec::new();
    if store {
        us.reserve(steps + 1);
        dus.reserve(steps + 1);
        us.push((eps, u));
        dus.push(v);
    }
    let rk4 = |r: f64, u: f64, v: f64, h: f64| -> (f64, f64) {
        let k1u = v;
        let k1v = rhs(r, u, v);
        let k2u = v + 0.5 * h * k1v;
        let k2v = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let k3u = v + 0.5 * h * k2v;
        let k3v = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let k4u = v + h * k3v;
        let k4v = rhs(r + h, u + h * k3u, v + h * k3v);
        (
            u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    };
    let mut r = eps;
    for step in 0..steps {
        let r_end = eps + (step + 1) as f64 * h;
        // near the regular singular point the cot(r) coefficient varies on
        // the scale of r itself; graded substeps keep the stages accurate
        if r < 0.1 && h > 0.1 * r {
            while r < r_end - 1e-15 * r_end {
                let s = (0.1 * r).min(r_end - r);
                let (nu, nv) = rk4(r, u, v, s);
                u = nu;
                v = nv;
                r += s;
            }
            r = r_end;
        } else {
            let (nu, nv) = rk4(r, u, v, h);
            u = nu;
            v = nv;
            r = r_end;
        }
        if store {
            us.push((r, u));
            dus.push(v);
        }
    }
    (u, v, us, dus)
}

fn bc_residual_at(problem: &SturmLiouvilleProblem, xi: f64, steps: usize) -> f64 {
    let (u, v, _, _) = shoot(problem, xi, steps, false);
    problem.bc.residual(u, v)
}

/// Smallest eigenvalue of the radial problem by shooting and root finding.
///
/// The residual is scanned on [0.1, 4n+4k] (extended geometrically up to
/// 1e6 when no sign change appears in the nominal bracket, which happens
/// for high angular degrees on small caps), bisected, then polished by
/// secant steps to 1e-10.  For the Neumann condition the constant mode at
/// ξ = 0 lies outside the scan, so the first root found is the first
/// nonconstant mode.
pub fn smallest_eigenvalue(problem: &SturmLiouvilleProblem) -> Result<EigenResult> {
    smallest_eigenvalue_with_steps(problem, SHOOT_STEPS)
}

/// Same solver with an explicit shooting step count (convergence guards).
pub fn smallest_eigenvalue_with_steps(
    problem: &SturmLiouvilleProblem,
    steps: usize,
) -> Result<EigenResult> {
    let k = problem.angular_eigenvalue();
    let lo = 0.1;
    let mut hi = 4.0 * problem.n as f64 + 4.0 * k;
    // consecutive radial eigenvalues are separated by roughly 2√ξ·π/R, so
    // the scan can stride a small fraction of that without skipping roots
    let scan_step =
        |xi: f64| -> f64 { (0.1 * xi.sqrt() * std::f64::consts::PI / problem.r).max(0.25) };

    // find the first sign change of the boundary residual
    let bracket: (f64, f64);
    let mut prev_xi = lo;
    let mut prev_res = bc_residual_at(problem, lo, steps);
    'search: loop {
        let mut xi = prev_xi + scan_step(prev_xi);
        while xi <= hi {
            let res = bc_residual_at(problem, xi, steps);
            if prev_res == 0.0 {
                bracket = (prev_xi, prev_xi);
                break 'search;
            }
            if res == 0.0 || res.signum() != prev_res.signum() {
                bracket = (prev_xi, xi);
                break 'search;
            }
            prev_xi = xi;
            prev_res = res;
            xi += scan_step(xi);
        }
        if hi >= BRACKET_CEILING {
            return Err(CoreError::BracketFailure {
                lo,
                hi,
                sign: prev_res.signum(),
            });
        }
        hi = (2.0 * hi).min(BRACKET_CEILING);
    }

    let (mut a, mut b) = bracket;
    let mut fa = bc_residual_at(problem, a, steps);
    // bisection down to a tight interval
    if b > a {
        for _ in 0..40 {
            let mid = 0.5 * (a + b);
            let fm = bc_residual_at(problem, mid, steps);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if b - a < 1e-8 {
                break;
            }
        }
    }
    // secant polish to 1e-10
    let mut x0 = a;
    let mut x1 = b.max(a + 1e-12);
    let mut f0 = bc_residual_at(problem, x0, steps);
    let mut f1 = bc_residual_at(problem, x1, steps);
    for _ in 0..60 {
        if (x1 - x0).abs() < 1e-10 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let x2 = x2.clamp(a - 1.0, b + 1.0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = bc_residual_at(problem, x1, steps);
    }
    let xi = x1;

    // dense solve for the eigenfunction, normalized to max |u| = 1
    let (_, _, mut us, mut dus) = shoot(problem, xi, steps, true);
    let scale = us
        .iter()
        .map(|(_, u)| u.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    us.iter_mut().for_each(|(_, u)| *u /= scale);
    dus.iter_mut().for_each(|v| *v /= scale);
    let (u_end, v_end) = (us.last().unwrap().1, *dus.last().unwrap());
    let bc_residual = problem.bc.residual(u_end, v_end).abs();

    // ODE residual with u″ from fourth-order centered differences of the
    // stored u′ (the second-order stencil leaves an h² floor above the
    // 1e-7 target for the larger n on wide caps)
    let n = problem.n as f64;
    let mut ode_residual = 0.0f64;
    for i in 2..us.len() - 2 {
        let h = us[i + 1].0 - us[i].0;
        let upp = (dus[i - 2] - 8.0 * dus[i - 1] + 8.0 * dus[i + 1] - dus[i + 2]) / (12.0 * h);
        let (r, u) = us[i];
        let res = upp + (n - 1.0) * r.cos() / r.sin() * dus[i] + (xi - k / (r.sin() * r.sin())) * u;
        ode_residual = ode_residual.max(res.abs());
    }

    Ok(EigenResult {
        xi,
        ell: problem.ell,
        u_samples: us,
        du_samples: dus,
        bc_residual,
        ode_residual,
    })
}

/// Minimum of `smallest_eigenvalue` over angular degrees ℓ = 0..=ell_max.
pub fn first_eigenvalue_scan(
    n: usize,
    r: f64,
    bc: RadialBc,
    ell_max: usize,
) -> Result<EigenResult> {
    if ell_max < 1 {
        return Err(CoreError::InvalidParameter {
            name: "ell_max",
            reason: "ell_max must be >= 1".into(),
        });
    }
    let mut best: Option<EigenResult> = None;
    for ell in 0..=ell_max {
        let problem = SturmLiouvilleProblem::new(n, r, ell, bc)?;
        let result = smallest_eigenvalue(&problem)?;
        if best.as_ref().map_or(true, |b| result.xi < b.xi) {
            best = Some(result);
        }
    }
    Ok(best.unwrap())
}

/// A twice-differentiable radial profile f(r) with explicit derivatives.
pub struct RadialProfile {
    pub f: Box<dyn Fn(f64) -> f64>,
    pub df: Box<dyn Fn(f64) -> f64>,
    pub d2f: Box<dyn Fn(f64) -> f64>,
}

impl RadialProfile {
    pub fn cos_r() -> Self {
        Self {
            f: Box::new(f64::cos),
            df: Box::new(|r| -r.sin()),
            d2f: Box::new(|r| -r.cos()),
        }
    }

    pub fn constant_one() -> Self {
        Self {
            f: Box::new(|_| 1.0),
            df: Box::new(|_| 0.0),
            d2f: Box::new(|_| 0.0),
        }
    }

    pub fn r_squared() -> Self {
        Self {
            f: Box::new(|r| r * r),
            df: Box::new(|r| 2.0 * r),
            d2f: Box::new(|_| 2.0),
        }
    }
}

/// Adaptive Simpson quadrature.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let whole = simpson(f, a, b);
    recurse(f, a, b, whole, tol, 30)
}

/// Both sides of Reilly's identity for a radial profile on the cap of
/// radius R (unit cross-section volume; it cancels in the defect):
///
/// * lhs = ∫₀^R [(Δf)² − |∇²f|² − (n−1)|∇f|²] sin^{n−1}r dr,
/// * rhs = (n−1) cot(R) sin^{n−1}(R) f′(R)²,
///
/// with Δf = f″ + (n−1)cot(r)f′ and |∇²f|² = f″² + (n−1)(cot(r)f′)².
/// The defect is |lhs − rhs| relative to the larger side, floored at one.
pub fn reilly_identity_check(n: usize, r_cap: f64, profile: &RadialProfile) -> (f64, f64, f64) {
    let nf = n as f64;
    let integrand = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let fp = (profile.df)(r);
        let fpp = (profile.d2f)(r);
        let cot_fp = r.cos() * fp / r.sin();
        let lap = fpp + (nf - 1.0) * cot_fp;
        let hess2 = fpp * fpp + (nf - 1.0) * cot_fp * cot_fp;
        (lap * lap - hess2 - (nf - 1.0) * fp * fp) * r.sin().powi(n as i32 - 1)
    };
    let lhs = adaptive_simpson(&integrand, 0.0, r_cap, 1e-9);
    let rhs =
        (nf - 1.0) * r_cap.cos() * r_cap.sin().powi(n as i32 - 2) * (profile.df)(r_cap).powi(2);
    let denom = lhs.abs().max(rhs.abs()).max(1.0);
    (lhs, rhs, (lhs - rhs).abs() / denom)
}

/// Residual of the Robin eigenfunction boundary identity
/// ∫_M (n f² − |∇f|²) dV = a ∮_{∂M} f² dA for a mode f = u(r)Y_ℓ, with the
/// angular factor normalized out.  Requires a Robin result with ξ within
/// 1e-6 of n.
pub fn eigen_boundary_identity(
    result: &EigenResult,
    a: f64,
    n: usize,
    r_cap: f64,
    bc: RadialBc,
) -> Result<f64> {
    match bc {
        RadialBc::Robin(ar) if (ar - a).abs() <= 1e-12 => {}
        _ => {
            return Err(CoreError::InvalidParameter {
                name: "bc",
                reason: "identity requires the Robin boundary condition".into(),
            })
        }
    }
    let nf = n as f64;
    if (result.xi - nf).abs() > 1e-6 {
        return Err(CoreError::InvalidParameter {
            name: "result",
            reason: format!("eigenvalue {} is not within 1e-6 of n = {n}", result.xi),
        });
    }
    let k = (result.ell * (result.ell + n - 2)) as f64;
    // composite Simpson over the stored grid
    let us = &result.u_samples;
    let dus = &result.du_samples;
    let value = |i: usize| -> f64 {
        let (r, u) = us[i];
        let du = dus[i];
        let weight = r.sin().powi(n as i32 - 1);
        (nf * u * u - du * du - k * u * u / (r.sin() * r.sin())) * weight
    };
    let m = us.len() - 1;
    let h = (us[m].0 - us[0].0) / m as f64;
    let mut integral = 0.0;
    let mut i = 0;
    while i + 2 <= m {
        integral += h / 3.0 * (value(i) + 4.0 * value(i + 1) + value(i + 2));
        i += 2;
    }
    if i < m {
        integral += 0.5 * h * (value(i) + value(i + 1));
    }
    let u_end = us[m].1;
    let boundary = a * u_end * u_end * r_cap.sin().powi(n as i32 - 1);
    Ok((integral - boundary).abs() / boundary.abs().max(1.0))
}

/// Margins of the curvature hypotheses on the model cap of radius
/// R = π/2 − θ with a = cot θ: the second fundamental form h = tan θ · ḡ
/// against h ≥ −2a ḡ, and the mean curvature (n−1)tan θ against (n−1)/a.
pub fn robin_cap_hypothesis_margins(n: usize, theta: f64) -> (f64, f64) {
    let a = 1.0 / theta.tan();
    let h = theta.tan();
    let mean = (n as f64 - 1.0) * h;
    (h + 2.0 * a, mean - (n as f64 - 1.0) / a)
}
