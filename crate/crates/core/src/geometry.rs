//! Model domains on the round sphere and their geometric oracles.
//!
//! The model regions live in the unit sphere Sⁿ ⊂ ℝⁿ⁺¹.  For an angle
//! θ ∈ (0, π/2) and an index 0 ≤ m ≤ n−1 the region D^m(θ) is
//!
//! * `{ y₁ ≥ cos θ }`                          if m = 0,
//! * `{ y_{m+2}² + … + y_{n+1}² ≤ sin²θ }`      if 1 ≤ m ≤ n−2,
//! * `{ y_{n+1} ≤ sin θ }`                      if m = n−1,
//!
//! with boundary T^m(θ), a round sphere (m ∈ {0, n−1}) or a generalized
//! Clifford torus S^m(cos θ) × S^{n−1−m}(sin θ).  The canonical solution of
//! the Obata equation ∇²f + f g = 0 is the linear height f = L·y_{n+1}; on
//! the boundary it satisfies the Robin condition ∂f/∂ν + a f = 0 with
//! a = cot θ on the complement side and a = −cot θ on the core side.
//!
//! All oracles work in canonical coordinates and conjugate by an optional
//! rotation fixing the y_{n+1}-axis, so f = L·y_{n+1} stays canonical.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Absolute tolerance for unit-norm and algebraic identities checked on input.
pub const UNIT_TOL: f64 = 1e-12;
/// Absolute tolerance on the defining residual for boundary membership.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Target tolerance of the finite-difference curvature oracles.
pub const CURVATURE_TOL: f64 = 1e-4;
/// Default finite-difference step (Richardson-extrapolated with ratio 2).
pub const FD_STEP: f64 = 1e-4;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point on the unit sphere Sⁿ ⊂ ℝⁿ⁺¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    y: Vec<f64>,
}

impl SpherePoint {
    /// Wraps ambient coordinates, requiring | |y| − 1 | ≤ 1e-12.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        let r = norm(&y);
        if (r - 1.0).abs() > UNIT_TOL {
            return Err(CoreError::InvalidParameter {
                name: "y",
                reason: format!("norm {r} is not 1 within {UNIT_TOL:e}"),
            });
        }
        Ok(Self { y })
    }

    /// Normalizes arbitrary nonzero coordinates onto the sphere.
    pub fn project(mut y: Vec<f64>) -> Result<Self> {
        let r = norm(&y);
        if r < 1e-14 {
            return Err(CoreError::InvalidParameter {
                name: "y",
                reason: "cannot project the zero vector".into(),
            });
        }
        y.iter_mut().for_each(|v| *v /= r);
        Ok(Self { y })
    }

    pub fn coords(&self) -> &[f64] {
        &self.y
    }

    /// Ambient dimension n+1.
    pub fn ambient_dim(&self) -> usize {
        self.y.len()
    }

    /// Geodesic distance on the sphere.
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        dot(&self.y, &other.y).clamp(-1.0, 1.0).acos()
    }
}

/// The linear solution f(y) = ⟨c, y⟩ of the Obata equation on the sphere,
/// with amplitude L = |c|.  Its intrinsic gradient at y is c − ⟨c, y⟩y and
/// |∇f|² + f² = L² holds identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObataFunction {
    c: Vec<f64>,
}

impl ObataFunction {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if norm(&c) < 1e-14 {
            return Err(CoreError::InvalidParameter {
                name: "c",
                reason: "coefficient vector must be nonzero".into(),
            });
        }
        Ok(Self { c })
    }

    /// The canonical height function L·y_{n+1} on Sⁿ.
    pub fn height(n: usize, l: f64) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = l;
        Self { c }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Amplitude L = |c|.
    pub fn amplitude(&self) -> f64 {
        norm(&self.c)
    }

    pub fn value(&self, p: &SpherePoint) -> f64 {
        dot(&self.c, p.coords())
    }

    /// Intrinsic (sphere-tangential) gradient c − ⟨c, y⟩y.
    pub fn gradient(&self, p: &SpherePoint) -> Vec<f64> {
        let f = self.value(p);
        self.c
            .iter()
            .zip(p.coords())
            .map(|(ci, yi)| ci - f * yi)
            .collect()
    }

    /// The two critical points ±c/L.
    pub fn poles(&self) -> (SpherePoint, SpherePoint) {
        let l = self.amplitude();
        let top: Vec<f64> = self.c.iter().map(|v| v / l).collect();
        let bottom: Vec<f64> = top.iter().map(|v| -v).collect();
        (SpherePoint { y: top }, SpherePoint { y: bottom })
    }
}

/// Robin coefficient a together with its angle θ, coupled by a = cot θ.
/// a > 0 corresponds to θ ∈ (0, π/2) and a < 0 to θ ∈ (π/2, π).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RobinParameter {
    pub a: f64,
    pub theta: f64,
}

impl RobinParameter {
    pub fn from_theta(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI)
            || (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-14
        {
            return Err(CoreError::InvalidParameter {
                name: "theta",
                reason: format!("theta = {theta} must lie in (0, pi/2) or (pi/2, pi)"),
            });
        }
        Ok(Self {
            a: 1.0 / theta.tan(),
            theta,
        })
    }

    pub fn from_coefficient(a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "a",
                reason: "Robin coefficient must be nonzero and finite".into(),
            });
        }
        // acot with range (0, pi)
        let theta = (1.0 / a).atan();
        let theta = if theta > 0.0 {
            theta
        } else {
            theta + std::f64::consts::PI
        };
        Ok(Self { a, theta })
    }

    /// |a − cot θ|, which the constructors keep below 1e-12.
    pub fn coupling_residual(&self) -> f64 {
        (self.a - 1.0 / self.theta.tan()).abs()
    }
}

/// Which side of T^m(θ) a model domain occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSide {
    /// M₂ = D^m(θ).
    Core,
    /// M₁ = Sⁿ ∖ D^m(θ).
    Complement,
}

impl DomainSide {
    pub fn flipped(self) -> Self {
        match self {
            DomainSide::Core => DomainSide::Complement,
            DomainSide::Complement => DomainSide::Core,
        }
    }

    /// Robin coefficient paired with this side for the model solution:
    /// +cot θ on the complement, −cot θ on the core.
    pub fn matched_robin(self, theta: f64) -> f64 {
        match self {
            DomainSide::Complement => 1.0 / theta.tan(),
            DomainSide::Core => -1.0 / theta.tan(),
        }
    }
}

/// One of the closed model regions D^m(θ) / Sⁿ∖D^m(θ), optionally rotated
/// about the y_{n+1}-axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDomain {
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub side: DomainSide,
    /// Rows of an orthogonal (n+1)×(n+1) matrix fixing the y_{n+1}-axis;
    /// `None` means the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
}

/// Construction contract for the model regions.
///
/// Requires 2 ≤ n, 0 ≤ m ≤ n−1 and θ ∈ (0, π/2); the membership test
/// implements the three-case definition above.
pub fn make_model_domain(n: usize, m: usize, theta: f64, side: DomainSide) -> Result<ModelDomain> {
    if n < 2 {
        return Err(CoreError::InvalidParameter {
            name: "n",
            reason: format!("ambient sphere dimension n = {n} must be >= 2"),
        });
    }
    if m > n - 1 {
        return Err(CoreError::InvalidParameter {
            name: "m",
            reason: format!("torus index m = {m} must satisfy 0 <= m <= n-1 = {}", n - 1),
        });
    }
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(CoreError::InvalidParameter {
            name: "theta",
            reason: format!("theta = {theta} must lie in (0, pi/2)"),
        });
    }
    Ok(ModelDomain {
        n,
        m,
        theta,
        side,
        rotation: None,
    })
}

/// The closed upper hemisphere { y_{n+1} ≥ 0 } (the θ → 0 limit of the cap),
/// used by the Neumann-condition models and the equator gluing data.
pub fn hemisphere(n: usize) -> ModelDomain {
    ModelDomain {
        n,
        m: n - 1,
        theta: 0.0,
        side: DomainSide::Complement,
        rotation: None,
    }
}

/// The a < 0 model ball of radius 3π/2 − θ with θ ∈ (π/2, π).
///
/// Realized as the core region D^{n−1}(π−θ) together with f = −L·y_{n+1},
/// so that f = −L sin θ on the boundary, the interior maximum f = L sits at
/// the south pole at distance 3π/2 − θ from the boundary, and
/// ∂f/∂ν + (cot θ) f = 0 holds with cot θ < 0.
pub fn negative_ball_model(
    n: usize,
    theta: f64,
    l: f64,
) -> Result<(ModelDomain, ObataFunction, f64)> {
    if !(theta > std::f64::consts::FRAC_PI_2 && theta < std::f64::consts::PI) {
        return Err(CoreError::InvalidParameter {
            name: "theta",
            reason: format!("theta = {theta} must lie in (pi/2, pi) for the a < 0 ball"),
        });
    }
    let domain = make_model_domain(n, n - 1, std::f64::consts::PI - theta, DomainSide::Core)?;
    let mut c = vec![0.0; n + 1];
    c[n] = -l;
    Ok((domain, ObataFunction { c }, 1.0 / theta.tan()))
}

impl ModelDomain {
    /// Ambient dimension n+1.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    fn check_dim(&self, p: &SpherePoint) -> Result<()> {
        if p.ambient_dim() != self.ambient_dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: p.ambient_dim(),
            });
        }
        Ok(())
    }

    /// Rotates ambient coordinates into the canonical frame (Qᵀ y).
    fn to_canonical(&self, y: &[f64]) -> Vec<f64> {
        match &self.rotation {
            None => y.to_vec(),
            Some(q) => {
                let d = y.len();
                (0..d)
                    .map(|i| (0..d).map(|j| q[j][i] * y[j]).sum())
                    .collect()
            }
        }
    }

    /// Rotates canonical coordinates back to ambient (Q y).
    fn from_canonical(&self, y: &[f64]) -> Vec<f64> {
        match &self.rotation {
            None => y.to_vec(),
            Some(q) => {
                let d = y.len();
                (0..d)
                    .map(|i| (0..d).map(|j| q[i][j] * y[j]).sum())
                    .collect()
            }
        }
    }

    /// Installs a rotation, validating orthogonality and that it fixes the
    /// y_{n+1}-axis to within 1e-10.
    pub fn with_rotation(mut self, q: Vec<Vec<f64>>) -> Result<Self> {
        let d = self.ambient_dim();
        if q.len() != d || q.iter().any(|row| row.len() != d) {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                got: q.len(),
            });
        }
        for i in 0..d {
            for j in 0..d {
                let g: f64 = (0..d).map(|k| q[k][i] * q[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).abs() > 1e-10 {
                    return Err(CoreError::InvalidParameter {
                        name: "rotation",
                        reason: format!("matrix is not orthogonal at ({i},{j}): {g}"),
                    });
                }
            }
        }
        let axis_fixed = (q[d - 1][d - 1] - 1.0).abs() <= 1e-10
            && (0..d - 1).all(|i| q[i][d - 1].abs() <= 1e-10 && q[d - 1][i].abs() <= 1e-10);
        if !axis_fixed {
            return Err(CoreError::InvalidParameter {
                name: "rotation",
                reason: "matrix must fix the y_{n+1}-axis".into(),
            });
        }
        self.rotation = Some(q);
        Ok(self)
    }

    /// Defining residual in canonical coordinates, negative inside D^m(θ).
    fn core_residual(&self, yc: &[f64]) -> f64 {
        let n = self.n;
        if self.m == 0 {
            self.theta.cos() - yc[0]
        } else if self.m == n - 1 {
            yc[n] - self.theta.sin()
        } else {
            let tail: f64 = yc[self.m + 1..].iter().map(|v| v * v).sum();
            tail - self.theta.sin().powi(2)
        }
    }

    /// Signed residual that is ≤ 0 inside this domain and = 0 on T^m(θ).
    pub fn defining_residual(&self, p: &SpherePoint) -> f64 {
        let yc = self.to_canonical(p.coords());
        let r = self.core_residual(&yc);
        match self.side {
            DomainSide::Core => r,
            DomainSide::Complement => -r,
        }
    }

    /// Closed-set membership: defining residual ≤ boundary tolerance.
    pub fn contains(&self, p: &SpherePoint) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.defining_residual(p) <= BOUNDARY_TOL)
    }

    /// Whether |defining residual| ≤ 1e-10.
    pub fn on_boundary(&self, p: &SpherePoint) -> bool {
        self.defining_residual(p).abs() <= BOUNDARY_TOL
    }

    fn require_boundary(&self, p: &SpherePoint) -> Result<()> {
        self.check_dim(p)?;
        let r = self.defining_residual(p).abs();
        if r > BOUNDARY_TOL {
            return Err(CoreError::NotOnBoundary {
                residual: r,
                tolerance: BOUNDARY_TOL,
            });
        }
        Ok(())
    }

    /// Outward unit normal ν at a boundary point: tangent to the sphere,
    /// orthogonal to T^m(θ), with the domain's defining residual increasing
    /// along it.  Flipping the side flips the sign.
    pub fn outward_normal(&self, p: &SpherePoint) -> Result<Vec<f64>> {
        self.require_boundary(p)?;
        let yc = self.to_canonical(p.coords());
        let n = self.n;
        // ambient gradient of the core residual
        let mut grad = vec![0.0; n + 1];
        if self.m == 0 {
            grad[0] = -1.0;
        } else if self.m == n - 1 {
            grad[n] = 1.0;
        } else {
            for i in self.m + 1..=n {
                grad[i] = 2.0 * yc[i];
            }
        }
        // project onto the sphere tangent space
        let g_dot_y = dot(&grad, &yc);
        for i in 0..=n {
            grad[i] -= g_dot_y * yc[i];
        }
        let gn = norm(&grad);
        if gn < 1e-13 {
            return Err(CoreError::InvalidParameter {
                name: "p",
                reason: "degenerate normal direction at this boundary point".into(),
            });
        }
        let sign = match self.side {
            DomainSide::Core => 1.0,
            DomainSide::Complement => -1.0,
        };
        let nu: Vec<f64> = grad.iter().map(|v| sign * v / gn).collect();
        Ok(self.from_canonical(&nu))
    }

    /// Block decomposition of T^m(θ): index range and radius of the factor
    /// spheres S^m(cos θ) and S^{n−1−m}(sin θ) in canonical coordinates.
    fn blocks(&self) -> [(std::ops::Range<usize>, f64); 2] {
        let n = self.n;
        [
            (0..self.m + 1, self.theta.cos()),
            (self.m + 1..n + 1, self.theta.sin()),
        ]
    }

    /// Draws a uniform random boundary sample (Gaussian per factor sphere).
    ///
    /// Length-one factors are pinned to their positive pole so that the
    /// sample lies on the single sheet selected by the defining equalities.
    pub fn sample_boundary<R: Rng>(&self, rng: &mut R) -> SpherePoint {
        let mut yc = vec![0.0; self.n + 1];
        for (range, radius) in self.blocks() {
            let len = range.len();
            if len == 1 {
                yc[range.start] = radius;
            } else {
                let mut v: Vec<f64> = (0..len)
                    .map(|_| {
                        // Box-Muller standard normal
                        let u1: f64 = rng.gen_range(1e-12..1.0f64);
                        let u2: f64 = rng.gen_range(0.0..1.0f64);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                let vn = norm(&v);
                v.iter_mut().for_each(|x| *x *= radius / vn);
                yc[range.clone()].copy_from_slice(&v);
            }
        }
        SpherePoint {
            y: self.from_canonical(&yc),
        }
    }

    /// Orthonormal basis of the tangent space of T^m(θ) at p (ambient
    /// representation, canonical frame rotated back).
    pub fn boundary_tangent_basis(&self, p: &SpherePoint) -> Result<Vec<Vec<f64>>> {
        self.require_boundary(p)?;
        let yc = self.to_canonical(p.coords());
        let dim = self.n + 1;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.n - 1);
        for (range, radius) in self.blocks() {
            let len = range.len();
            if len == 1 || radius < 1e-13 {
                continue;
            }
            let block: Vec<f64> = yc[range.clone()].to_vec();
            // Gram-Schmidt within the block against the block center.
            let mut local: Vec<Vec<f64>> = Vec::new();
            for k in 0..len {
                let mut v = vec![0.0; len];
                v[k] = 1.0;
                let vb = dot(&v, &block) / (radius * radius);
                for i in 0..len {
                    v[i] -= vb * block[i];
                }
                for u in &local {
                    let c = dot(&v, u);
                    for i in 0..len {
                        v[i] -= c * u[i];
                    }
                }
                let vn = norm(&v);
                if vn > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= vn);
                    local.push(v);
                }
                if local.len() == len - 1 {
                    break;
                }
            }
            for v in local {
                let mut amb = vec![0.0; dim];
                amb[range.clone()].copy_from_slice(&v);
                basis.push(amb);
            }
        }
        debug_assert_eq!(basis.len(), self.n - 1);
        Ok(basis.iter().map(|v| self.from_canonical(v)).collect())
    }

    /// Exact exponential map of the boundary T^m(θ): each factor sphere
    /// moves along its great circle, so the result stays on the torus to
    /// rounding precision.  `x` is a boundary-tangent vector; returns the
    /// geodesic point at parameter t.
    pub fn boundary_exp(&self, p: &SpherePoint, x: &[f64], t: f64) -> Result<SpherePoint> {
        self.require_boundary(p)?;
        if x.len() != self.ambient_dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        let yc = self.to_canonical(p.coords());
        let xc = self.to_canonical(x);
        let mut out = vec![0.0; self.n + 1];
        for (range, radius) in self.blocks() {
            let len = range.len();
            let block: Vec<f64> = yc[range.clone()].to_vec();
            let xb: Vec<f64> = xc[range.clone()].to_vec();
            let speed = norm(&xb);
            if len == 1 || speed * t.abs() < 1e-300 || radius < 1e-13 {
                out[range.clone()].copy_from_slice(&block);
                continue;
            }
            let phase = speed * t / radius;
            let (s, c) = phase.sin_cos();
            for (k, i) in range.clone().enumerate() {
                out[i] = block[k] * c + xb[k] / speed * radius * s;
            }
        }
        Ok(SpherePoint {
            y: self.from_canonical(&out),
        })
    }
}

/// Residual of the Robin condition ∂f/∂ν + a·f at a boundary point,
/// computed with the exact tangential gradient of f.
pub fn robin_residual(
    domain: &ModelDomain,
    f: &ObataFunction,
    a: f64,
    p: &SpherePoint,
) -> Result<f64> {
    let nu = domain.outward_normal(p)?;
    let grad = f.gradient(p);
    Ok(dot(&grad, &nu) + a * f.value(p))
}

/// Residual of the boundary transnormal identity
/// |∇̄f|² + (1+a²) f² − L² at a boundary point.
pub fn transnormal_residual(
    domain: &ModelDomain,
    f: &ObataFunction,
    a: f64,
    p: &SpherePoint,
) -> Result<f64> {
    let nu = domain.outward_normal(p)?;
    let grad = f.gradient(p);
    let gn = dot(&grad, &nu);
    let tang: Vec<f64> = grad.iter().zip(&nu).map(|(g, v)| g - gn * v).collect();
    let fval = f.value(p);
    let l = f.amplitude();
    Ok(dot(&tang, &tang) + (1.0 + a * a) * fval * fval - l * l)
}

/// Boundary-tangential gradient ∇̄f at a boundary point.
pub fn boundary_gradient(
    domain: &ModelDomain,
    f: &ObataFunction,
    p: &SpherePoint,
) -> Result<Vec<f64>> {
    let nu = domain.outward_normal(p)?;
    let grad = f.gradient(p);
    let gn = dot(&grad, &nu);
    Ok(grad.iter().zip(&nu).map(|(g, v)| g - gn * v).collect())
}

/// Principal curvature spectrum of a boundary with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalSpectrum {
    /// (value, multiplicity) pairs sorted by value; multiplicities sum to n−1.
    pub entries: Vec<(f64, usize)>,
}

impl SecondFundamentalSpectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Entrywise agreement: same multiplicities, values within tol.
    pub fn agrees_with(&self, other: &SecondFundamentalSpectrum, tol: f64) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.1 == b.1 && (a.0 - b.0).abs() <= tol)
    }
}

/// Closed-form principal curvatures of T^m(θ) with respect to the outward
/// normal of the complement side and a = cot θ > 0:
/// −a with multiplicity n−1−m and 1/a with multiplicity m.
pub fn model_boundary_spectrum(n: usize, m: usize, a: f64) -> Result<SecondFundamentalSpectrum> {
    if a <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "a",
            reason: format!("a = {a} must be positive"),
        });
    }
    if n < 2 || m > n - 1 {
        return Err(CoreError::InvalidParameter {
            name: "m",
            reason: format!("need n >= 2 and m <= n-1, got n = {n}, m = {m}"),
        });
    }
    let mut entries = Vec::new();
    if n - 1 - m > 0 {
        entries.push((-a, n - 1 - m));
    }
    if m > 0 {
        entries.push((1.0 / a, m));
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(SecondFundamentalSpectrum { entries })
}

/// Clusters sorted eigenvalues with absolute tolerance `tol`; adjacent gaps
/// between `tol` and `10·tol` are ambiguous and raise a diagnostic error.
fn cluster_eigenvalues(mut vals: Vec<f64>, tol: f64) -> Result<SecondFundamentalSpectrum> {
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut entries: Vec<(f64, usize)> = Vec::new();
    let mut cluster: Vec<f64> = vec![vals[0]];
    for w in vals.windows(2) {
        let gap = w[1] - w[0];
        if gap <= tol {
            cluster.push(w[1]);
        } else if gap < 10.0 * tol {
            return Err(CoreError::ClusterAmbiguity { gap, tol });
        } else {
            let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
            entries.push((mean, cluster.len()));
            cluster = vec![w[1]];
        }
    }
    let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
    entries.push((mean, cluster.len()));
    Ok(SecondFundamentalSpectrum { entries })
}

/// Finite-difference shape operator ⟨∇_{e_i}ν, e_j⟩ of the domain boundary
/// at p, in an orthonormal tangent frame of T^m(θ), Richardson-extrapolated
/// over steps h and h/2 and clustered with tolerance 1e-4.
pub fn numeric_second_fundamental(
    domain: &ModelDomain,
    p: &SpherePoint,
    step: f64,
) -> Result<SecondFundamentalSpectrum> {
    if !(1e-6..=1e-2).contains(&step) {
        return Err(CoreError::InvalidParameter {
            name: "step",
            reason: format!("step = {step} must lie in [1e-6, 1e-2]"),
        });
    }
    let shape = shape_operator(domain, p, step)?;
    let eigen = shape.symmetric_eigen();
    cluster_eigenvalues(eigen.eigenvalues.iter().copied().collect(), CURVATURE_TOL)
}

/// Richardson-extrapolated shape operator matrix in the tangent frame.
fn shape_operator(domain: &ModelDomain, p: &SpherePoint, step: f64) -> Result<DMatrix<f64>> {
    let basis = domain.boundary_tangent_basis(p)?;
    let d = basis.len();
    let at = |h: f64| -> Result<DMatrix<f64>> {
        let mut s = DMatrix::zeros(d, d);
        for (i, e) in basis.iter().enumerate() {
            let plus = domain.outward_normal(&domain.boundary_exp(p, e, h)?)?;
            let minus = domain.outward_normal(&domain.boundary_exp(p, e, -h)?)?;
            let deriv: Vec<f64> = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            for (j, ej) in basis.iter().enumerate() {
                s[(i, j)] = dot(&deriv, ej);
            }
        }
        Ok(s)
    };
    let coarse = at(step)?;
    let fine = at(step / 2.0)?;
    let mut s = (fine * 4.0 - coarse) / 3.0;
    // symmetrize; the true operator is self-adjoint
    let st = s.transpose();
    s = (s + st) * 0.5;
    Ok(s)
}

/// Finite-difference boundary Hessian f_{;ij} in the same frame, via second
/// differences along exact boundary geodesics and polarization.
fn boundary_hessian(
    domain: &ModelDomain,
    f: &ObataFunction,
    p: &SpherePoint,
    basis: &[Vec<f64>],
    step: f64,
) -> Result<DMatrix<f64>> {
    let d = basis.len();
    let f0 = f.value(p);
    let second = |x: &[f64], h: f64| -> Result<f64> {
        let plus = f.value(&domain.boundary_exp(p, x, h)?);
        let minus = f.value(&domain.boundary_exp(p, x, -h)?);
        Ok((plus - 2.0 * f0 + minus) / (h * h))
    };
    let second_r = |x: &[f64]| -> Result<f64> {
        let coarse = second(x, step)?;
        let fine = second(x, step / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    };
    let mut diag = vec![0.0; d];
    for (i, e) in basis.iter().enumerate() {
        diag[i] = second_r(e)?;
    }
    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = diag[i];
        for j in i + 1..d {
            let sum: Vec<f64> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + b).collect();
            let hij = (second_r(&sum)? - diag[i] - diag[j]) / 2.0;
            h[(i, j)] = hij;
            h[(j, i)] = hij;
        }
    }
    Ok(h)
}

/// Residual of the boundary restriction identity
/// ∇̄²f + h·(∂f/∂ν) + f·ḡ = 0 (operator norm in an orthonormal frame),
/// with the normal derivative computed exactly and the boundary Hessian
/// and shape operator by finite differences.  Holds for every linear
/// solution, whatever boundary condition it satisfies; for the Robin
/// models ∂f/∂ν = −a·f and for the non-vanishing Neumann models on the
/// equator ∂f/∂ν = 1.
pub fn boundary_hessian_identity_residual(
    domain: &ModelDomain,
    f: &ObataFunction,
    p: &SpherePoint,
) -> Result<f64> {
    let basis = domain.boundary_tangent_basis(p)?;
    let d = basis.len();
    let nu = domain.outward_normal(p)?;
    let f_nu = dot(&f.gradient(p), &nu);
    let shape = shape_operator(domain, p, FD_STEP)?;
    let hess = boundary_hessian(domain, f, p, &basis, FD_STEP)?;
    let fval = f.value(p);
    let mut t = hess;
    for i in 0..d {
        for j in 0..d {
            t[(i, j)] += f_nu * shape[(i, j)];
        }
        t[(i, i)] += fval;
    }
    let sym = (&t + t.transpose()) * 0.5;
    Ok(sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// Residuals of the two boundary identities coupling the Hessian, the shape
/// operator and the Robin data of the model solution:
/// r1 = |h(∇̄f, ·) + a ∇̄f| and r2 = ‖∇̄²f − a f h + f ḡ‖ (operator norm),
/// both from finite-difference boundary calculus.
pub fn boundary_identity_residuals(
    domain: &ModelDomain,
    f: &ObataFunction,
    a: f64,
    p: &SpherePoint,
) -> Result<(f64, f64)> {
    // the identities are stated for the canonical height function
    let l = f.amplitude();
    let c = f.coefficients();
    let axis_ok = c[..c.len() - 1].iter().all(|v| v.abs() <= 1e-10 * l)
        && (c[c.len() - 1].abs() - l).abs() <= 1e-10 * l;
    if !axis_ok {
        return Err(CoreError::InvalidParameter {
            name: "f",
            reason: "expected f = ±L·y_{n+1} up to the domain's axis rotation".into(),
        });
    }
    let basis = domain.boundary_tangent_basis(p)?;
    let d = basis.len();
    let shape = shape_operator(domain, p, FD_STEP)?;
    let hess = boundary_hessian(domain, f, p, &basis, FD_STEP)?;
    let grad = boundary_gradient(domain, f, p)?;
    let w = DVector::from_iterator(d, basis.iter().map(|e| dot(&grad, e)));
    let r1 = (&shape * &w + &w * a).norm();
    let fval = f.value(p);
    let mut t = hess.clone();
    for i in 0..d {
        for j in 0..d {
            t[(i, j)] += -a * fval * shape[(i, j)];
        }
        t[(i, i)] += fval;
    }
    let sym = (&t + t.transpose()) * 0.5;
    let r2 = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    fn pt(v: Vec<f64>) -> SpherePoint {
        SpherePoint::new(v).unwrap()
    }

    #[test]
    fn domain_case_split_matches_definitions() {
        // (n=3, m=2, theta=pi/4, core) is {y4 <= sin(pi/4)}
        let d = make_model_domain(3, 2, FRAC_PI_4, DomainSide::Core).unwrap();
        let inside = pt(vec![1.0, 0.0, 0.0, 0.0]);
        let outside = pt(vec![0.0, 0.0, 0.0, 1.0]);
        assert!(d.contains(&inside).unwrap());
        assert!(!d.contains(&outside).unwrap());

        // (n=2, m=0, theta=pi/3, core) is {y1 >= cos(pi/3)}
        let d = make_model_domain(2, 0, FRAC_PI_3, DomainSide::Core).unwrap();
        assert!(d.contains(&pt(vec![1.0, 0.0, 0.0])).unwrap());
        assert!(!d.contains(&pt(vec![0.0, 1.0, 0.0])).unwrap());

        // (n=3, m=1, theta=pi/4, core) contains (1,0,0,0): tail sum 0 <= sin^2
        let d = make_model_domain(3, 1, FRAC_PI_4, DomainSide::Core).unwrap();
        assert!(d.contains(&pt(vec![1.0, 0.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn contains_poles_and_equator_cases() {
        for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let n = 3;
            // north pole in S^n \ D^{n-1}(theta)
            let cap = make_model_domain(n, n - 1, theta, DomainSide::Complement).unwrap();
            let north = pt(vec![0.0, 0.0, 0.0, 1.0]);
            assert!(cap.contains(&north).unwrap());
            // equator point in D^{n-1}(theta)
            let core = make_model_domain(n, n - 1, theta, DomainSide::Core).unwrap();
            assert!(core.contains(&pt(vec![1.0, 0.0, 0.0, 0.0])).unwrap());
            // boundary points belong to both closed sides
            let b = pt(vec![theta.cos(), 0.0, 0.0, theta.sin()]);
            assert!(cap.contains(&b).unwrap());
            assert!(core.contains(&b).unwrap());
        }
    }

    #[test]
    fn contains_checks_dimension() {
        let d = make_model_domain(3, 1, FRAC_PI_4, DomainSide::Core).unwrap();
        let p = pt(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            d.contains(&p),
            Err(CoreError::DimensionMismatch {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn outward_normal_matches_derived_example() {
        // domain {y3 <= sin(theta)} in S^2 (m = n-1 core side): moving along nu
        // leaves the domain, nu = (-sin, 0, cos) at p = (cos, 0, sin).
        let theta = FRAC_PI_3;
        let d = make_model_domain(2, 1, theta, DomainSide::Core).unwrap();
        let p = pt(vec![theta.cos(), 0.0, theta.sin()]);
        let nu = d.outward_normal(&p).unwrap();
        assert_abs_diff_eq!(nu[0], -theta.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(nu[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nu[2], theta.cos(), epsilon = 1e-12);

        // flipping the side flips the sign
        let cap = make_model_domain(2, 1, theta, DomainSide::Complement).unwrap();
        let nu2 = cap.outward_normal(&p).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(nu2[i], -nu[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn outward_normal_points_out_by_finite_difference() {
        // independent membership-decrease oracle on every case split
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 4] {
            for m in 0..n {
                for side in [DomainSide::Core, DomainSide::Complement] {
                    let d = make_model_domain(n, m, FRAC_PI_4, side).unwrap();
                    let p = d.sample_boundary(&mut rng);
                    let nu = d.outward_normal(&p).unwrap();
                    let eps = 1e-5;
                    let stepped: Vec<f64> = p
                        .coords()
                        .iter()
                        .zip(&nu)
                        .map(|(y, v)| y + eps * v)
                        .collect();
                    let q = SpherePoint::project(stepped).unwrap();
                    assert!(
                        d.defining_residual(&q) > 0.0,
                        "normal does not exit domain n={n} m={m} side={side:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn normal_requires_boundary_point() {
        let d = make_model_domain(2, 1, FRAC_PI_4, DomainSide::Core).unwrap();
        let p = pt(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            d.outward_normal(&p),
            Err(CoreError::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn robin_residual_vanishes_for_matched_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 4] {
            for m in 0..n {
                for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
                    let f = ObataFunction::height(n, 1.0);
                    for side in [DomainSide::Complement, DomainSide::Core] {
                        let d = make_model_domain(n, m, theta, side).unwrap();
                        let a = side.matched_robin(theta);
                        for _ in 0..20 {
                            let p = d.sample_boundary(&mut rng);
                            let r = robin_residual(&d, &f, a, &p).unwrap();
                            assert!(
                                r.abs() <= 1e-10,
                                "robin residual {r} n={n} m={m} side={side:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn robin_residual_is_linear_in_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = FRAC_PI_4;
        let d = make_model_domain(3, 1, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(3, 1.0);
        let a = theta.tan().recip();
        let p = d.sample_boundary(&mut rng);
        let r = robin_residual(&d, &f, a + 1.0, &p).unwrap();
        assert_abs_diff_eq!(r, f.value(&p), epsilon = 1e-10);
        assert!(f.value(&p).abs() > 1e-3);
    }

    #[test]
    fn transnormal_identity_and_focal_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 3, 4] {
            for m in 0..n {
                for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
                    let d = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
                    let f = ObataFunction::height(n, 2.5);
                    let a = 1.0 / theta.tan();
                    for _ in 0..20 {
                        let p = d.sample_boundary(&mut rng);
                        let r = transnormal_residual(&d, &f, a, &p).unwrap();
                        assert!(r.abs() <= 1e-10, "transnormal residual {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn focal_value_forced_by_transnormal_identity() {
        // on T^{n-1}(theta) the boundary gradient vanishes identically,
        // so f = L/sqrt(1+a^2) = L sin(theta) there
        let theta = FRAC_PI_4;
        let n = 3;
        let d = make_model_domain(n, n - 1, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(n, 2.0);
        let a = 1.0 / theta.tan();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = d.sample_boundary(&mut rng);
        let g = boundary_gradient(&d, &f, &p).unwrap();
        assert!(norm(&g) <= 1e-10);
        let focal = f.amplitude() / (1.0 + a * a).sqrt();
        assert_abs_diff_eq!(f.value(&p).abs(), focal, epsilon = 1e-12);
    }

    #[test]
    fn model_spectrum_cases() {
        // cap boundary: single curvature 1/a of multiplicity n-1
        let s = model_boundary_spectrum(4, 3, 2.0).unwrap();
        assert_eq!(s.entries, vec![(0.5, 3)]);
        // m = 0: single curvature -a
        let s = model_boundary_spectrum(4, 0, 2.0).unwrap();
        assert_eq!(s.entries, vec![(-2.0, 3)]);
        // mixed multiplicities
        let s = model_boundary_spectrum(4, 1, 1.0).unwrap();
        assert_eq!(s.entries, vec![(-1.0, 2), (1.0, 1)]);
        assert_eq!(s.total_multiplicity(), 3);
        assert!(model_boundary_spectrum(4, 1, -1.0).is_err());
    }

    #[test]
    fn numeric_shape_operator_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [2usize, 3, 4] {
            for m in 0..n {
                for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
                    let d = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
                    let a = 1.0 / theta.tan();
                    let expected = model_boundary_spectrum(n, m, a).unwrap();
                    for _ in 0..5 {
                        let p = d.sample_boundary(&mut rng);
                        let got = numeric_second_fundamental(&d, &p, FD_STEP).unwrap();
                        assert!(
                            got.agrees_with(&expected, CURVATURE_TOL),
                            "n={n} m={m} theta={theta}: {got:?} vs {expected:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eigenvalue_clustering_rules() {
        // gaps <= tol merge, gaps >= 10 tol split, in-between is ambiguous
        let merged = cluster_eigenvalues(vec![1.0, 1.00005, 2.0], 1e-4).unwrap();
        assert_eq!(merged.entries.len(), 2);
        assert_eq!(merged.entries[0].1, 2);
        let split = cluster_eigenvalues(vec![1.0, 1.01, 2.0], 1e-4).unwrap();
        assert_eq!(split.entries.len(), 3);
        assert!(matches!(
            cluster_eigenvalues(vec![1.0, 1.0005, 2.0], 1e-4),
            Err(CoreError::ClusterAmbiguity { .. })
        ));
    }

    #[test]
    fn clifford_torus_spectrum_in_s3() {
        // T^1(pi/4) in S^3 with a = 1: curvatures {-1, +1}, multiplicity 1 each
        let d = make_model_domain(3, 1, FRAC_PI_4, DomainSide::Complement).unwrap();
        let h = 0.5f64.sqrt();
        let p = pt(vec![h, 0.0, h, 0.0]);
        let got = numeric_second_fundamental(&d, &p, FD_STEP).unwrap();
        let expected = model_boundary_spectrum(3, 1, 1.0).unwrap();
        assert!(got.agrees_with(&expected, CURVATURE_TOL));
    }

    #[test]
    fn equator_limit_is_totally_geodesic() {
        // hemisphere boundary: all principal curvatures ~ 0 (single cluster)
        let d = hemisphere(3);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let p = d.sample_boundary(&mut rng);
        let got = numeric_second_fundamental(&d, &p, FD_STEP).unwrap();
        assert_eq!(got.entries.len(), 1);
        assert_eq!(got.entries[0].1, 2);
        assert!(got.entries[0].0.abs() <= CURVATURE_TOL);
    }

    #[test]
    fn boundary_identities_hold_on_tori() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (n, m, theta) in [
            (3usize, 1usize, FRAC_PI_4),
            (4, 2, FRAC_PI_3),
            (4, 1, FRAC_PI_4),
        ] {
            let d = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
            let f = ObataFunction::height(n, 1.0);
            let a = 1.0 / theta.tan();
            for _ in 0..3 {
                let p = d.sample_boundary(&mut rng);
                let (r1, r2) = boundary_identity_residuals(&d, &f, a, &p).unwrap();
                assert!(r1 <= CURVATURE_TOL, "r1 = {r1}");
                assert!(r2 <= CURVATURE_TOL, "r2 = {r2}");
            }
        }
    }

    #[test]
    fn boundary_identity_r1_detects_wrong_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let theta = FRAC_PI_4;
        let d = make_model_domain(3, 1, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(3, 1.0);
        let a = 1.0 / theta.tan();
        // pick a sample where the boundary gradient is not tiny
        let mut p = d.sample_boundary(&mut rng);
        loop {
            let g = boundary_gradient(&d, &f, &p).unwrap();
            if norm(&g) > 0.3 {
                break;
            }
            p = d.sample_boundary(&mut rng);
        }
        let (r1, _) = boundary_identity_residuals(&d, &f, -a, &p).unwrap();
        let g = boundary_gradient(&d, &f, &p).unwrap();
        assert_abs_diff_eq!(r1, 2.0 * a.abs() * norm(&g), epsilon = 1e-3);
    }

    #[test]
    fn cap_boundary_identity_is_exact_in_r1() {
        // on T^{n-1}(theta) the restriction of f is constant, so r1 = 0
        let theta = FRAC_PI_3;
        let d = make_model_domain(3, 2, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(3, 1.0);
        let a = 1.0 / theta.tan();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = d.sample_boundary(&mut rng);
        let (r1, r2) = boundary_identity_residuals(&d, &f, a, &p).unwrap();
        assert!(r1 <= 1e-10, "gradient of a constant must vanish, r1 = {r1}");
        assert!(r2 <= CURVATURE_TOL);
    }

    #[test]
    fn restriction_identity_for_neumann_and_robin_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        // tilted non-vanishing-Neumann solution on the equator: the
        // restriction identity reduces to the boundary Hessian law with
        // ∂f/∂ν = 1 and a totally geodesic boundary
        let d = hemisphere(3);
        let f = ObataFunction::new(vec![0.6, -0.3, 0.2, -1.0]).unwrap();
        for _ in 0..10 {
            let p = d.sample_boundary(&mut rng);
            let r = boundary_hessian_identity_residual(&d, &f, &p).unwrap();
            assert!(r <= CURVATURE_TOL, "equator residual {r}");
        }
        // cross-check against the Robin model, where ∂f/∂ν = −a·f
        let theta = FRAC_PI_4;
        let d = make_model_domain(4, 2, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(4, 1.0);
        for _ in 0..5 {
            let p = d.sample_boundary(&mut rng);
            let r = boundary_hessian_identity_residual(&d, &f, &p).unwrap();
            assert!(r <= CURVATURE_TOL, "torus residual {r}");
        }
    }

    #[test]
    fn rotation_preserves_oracles() {
        let theta = FRAC_PI_4;
        let n = 3;
        // rotation in the (y1, y2)-plane fixes the y4 axis
        let alpha = 0.7f64;
        let mut q = vec![vec![0.0; n + 1]; n + 1];
        q[0][0] = alpha.cos();
        q[0][1] = -alpha.sin();
        q[1][0] = alpha.sin();
        q[1][1] = alpha.cos();
        q[2][2] = 1.0;
        q[3][3] = 1.0;
        let d = make_model_domain(n, 1, theta, DomainSide::Complement)
            .unwrap()
            .with_rotation(q)
            .unwrap();
        let f = ObataFunction::height(n, 1.0);
        let a = 1.0 / theta.tan();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = d.sample_boundary(&mut rng);
            assert!(d.on_boundary(&p));
            assert!(robin_residual(&d, &f, a, &p).unwrap().abs() <= 1e-10);
            let got = numeric_second_fundamental(&d, &p, FD_STEP).unwrap();
            let expected = model_boundary_spectrum(n, 1, a).unwrap();
            assert!(got.agrees_with(&expected, CURVATURE_TOL));
        }
    }

    #[test]
    fn rotation_must_fix_axis() {
        let n = 2;
        let mut q = vec![vec![0.0; n + 1]; n + 1];
        // rotation moving the y3 axis
        q[0][0] = 1.0;
        q[1][2] = 1.0;
        q[2][1] = -1.0;
        let d = make_model_domain(n, 0, FRAC_PI_4, DomainSide::Core).unwrap();
        assert!(d.with_rotation(q).is_err());
    }

    #[test]
    fn negative_ball_robin_pairing() {
        // theta in (pi/2, pi): residual of df/dnu + (cot theta) f vanishes
        let theta = 3.0 * PI / 4.0;
        let (d, f, a) = negative_ball_model(3, theta, 1.0).unwrap();
        assert!(a < 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = d.sample_boundary(&mut rng);
            assert_abs_diff_eq!(f.value(&p), -theta.sin(), epsilon = 1e-12);
            assert!(robin_residual(&d, &f, a, &p).unwrap().abs() <= 1e-10);
        }
        // interior maximum at the south pole, distance 3pi/2 - theta from boundary
        let south = pt(vec![0.0, 0.0, 0.0, -1.0]);
        assert!(d.contains(&south).unwrap());
        assert_abs_diff_eq!(f.value(&south), 1.0, epsilon = 1e-15);
        let p = d.sample_boundary(&mut rng);
        assert_abs_diff_eq!(
            p.geodesic_distance(&south),
            1.5 * PI - theta,
            epsilon = 1e-12
        );
    }

    #[test]
    fn robin_parameter_coupling() {
        let r = RobinParameter::from_theta(FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(r.a, 1.0, epsilon = 1e-12);
        assert!(r.coupling_residual() <= 1e-12);
        let r = RobinParameter::from_coefficient(-1.0).unwrap();
        assert_abs_diff_eq!(r.theta, 3.0 * PI / 4.0, epsilon = 1e-12);
        assert!(RobinParameter::from_theta(std::f64::consts::FRAC_PI_2).is_err());
        assert!(RobinParameter::from_coefficient(0.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(make_model_domain(1, 0, FRAC_PI_4, DomainSide::Core).is_err());
        assert!(make_model_domain(3, 3, FRAC_PI_4, DomainSide::Core).is_err());
        assert!(make_model_domain(3, 1, 2.0, DomainSide::Core).is_err());
        assert!(make_model_domain(3, 1, 0.0, DomainSide::Core).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let d = make_model_domain(3, 1, FRAC_PI_4, DomainSide::Complement).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"side\":\"complement\""));
        let back: ModelDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(back.m, 1);
        let f = ObataFunction::height(2, 1.5);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "{\"c\":[0.0,0.0,1.5]}");
    }
}
