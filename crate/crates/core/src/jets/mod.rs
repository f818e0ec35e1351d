//! Boundary Taylor jets of Obata-type data and the smooth-gluing criterion.
//!
//! In a geodesic collar ∂M × [0, ε) the metric is dr² + ḡ(r) with
//! ḡ(r) = Σ r^k ḡ_k and f = Σ r^k f̄_k.  Given (ḡ₀, f̄₀, f̄₁) and φ, every
//! higher coefficient is determined: group (i) is the scalar ODE
//! f″ + φ(f) = 0 in the normal direction, group (ii) solves for ḡ_{k+1},
//! and group (iii) is an overdetermined compatibility constraint that is
//! measured, not assumed.  Two jets glue smoothly exactly when their
//! coefficients agree with alternating signs, which encodes the opposite
//! orientations of the two collars (r_B = −r_A).
//!
//! Two backends cover the two term classes: `homogeneous` keeps all
//! coefficients proportional to a fixed reference metric with constant
//! scalars (every model geometry), and `grid` samples fields on a flat
//! periodic torus to exercise the spatial-derivative terms.  Homogeneous
//! data that are rational in sin θ, cos θ run over exact rational
//! arithmetic as well.

pub mod exact;
pub mod grid;
pub mod scalar;

use serde::{Deserialize, Serialize};

pub use exact::ExactScalar;
pub use grid::{GridData, GridJet, GridPhi, PeriodicGrid, ScalarField, TensorField};
pub use scalar::{
    conservation_shadow, homogeneous_recursion, phi_compose, series_inverse, series_mul,
    HomogeneousJet, JetScalar,
};

use crate::error::{CoreError, Result};

/// Fixed reference metric of the homogeneous backend; every tensor
/// coefficient is a scalar multiple of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMetric {
    /// Unit round metric on S^{n−1}.
    RoundSphere { dim: usize },
    /// Flat torus with identity reference.
    FlatTorus { dim: usize },
}

/// φ and its derivatives at f̄₀, as scalar values.
#[derive(Debug, Clone)]
pub struct PhiJet<S> {
    /// `derivs[m]` = φ^{(m)}(f̄₀).
    pub derivs: Vec<S>,
}

impl<S: JetScalar> PhiJet<S> {
    /// The Obata case φ(f) = f.
    pub fn identity(f0: &S, order: usize) -> Self {
        let mut derivs = vec![S::zero(); order + 1];
        derivs[0] = f0.clone();
        if order >= 1 {
            derivs[1] = S::one();
        }
        Self { derivs }
    }

    /// Degenerate affine case φ ≡ 0 (f″ = 0).
    pub fn zero(order: usize) -> Self {
        Self {
            derivs: vec![S::zero(); order + 1],
        }
    }
}

/// Homogeneous boundary data: ḡ₀ = g0 · reference, constant scalars.
#[derive(Debug, Clone)]
pub struct HomogeneousData<S> {
    pub reference: ReferenceMetric,
    pub g0: S,
    pub f0: S,
    pub f1: S,
    pub phi: PhiJet<S>,
}

/// Boundary data in any backend.
pub enum BoundaryData {
    Homogeneous(HomogeneousData<f64>),
    Exact(HomogeneousData<ExactScalar>),
    Grid(GridData),
}

/// A computed boundary jet, truncated at order K.
pub enum BoundaryJet {
    Homogeneous {
        reference: ReferenceMetric,
        k_order: usize,
        jet: HomogeneousJet<f64>,
    },
    Exact {
        reference: ReferenceMetric,
        k_order: usize,
        jet: HomogeneousJet<ExactScalar>,
    },
    Grid {
        k_order: usize,
        jet: GridJet,
    },
}

impl BoundaryJet {
    pub fn k_order(&self) -> usize {
        match self {
            BoundaryJet::Homogeneous { k_order, .. }
            | BoundaryJet::Exact { k_order, .. }
            | BoundaryJet::Grid { k_order, .. } => *k_order,
        }
    }

    /// JSON form {backend, K, g_coeffs, f_coeffs}; exact coefficients
    /// print as rational pairs in sin θ, cos θ.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            BoundaryJet::Homogeneous {
                reference,
                k_order,
                jet,
            } => serde_json::json!({
                "backend": "homogeneous",
                "reference": reference,
                "K": k_order,
                "g_coeffs": jet.g,
                "f_coeffs": jet.f,
            }),
            BoundaryJet::Exact {
                reference,
                k_order,
                jet,
            } => serde_json::json!({
                "backend": "exact",
                "reference": reference,
                "K": k_order,
                "g_coeffs": jet.g.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "f_coeffs": jet.f.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            }),
            BoundaryJet::Grid { k_order, jet } => serde_json::json!({
                "backend": "grid",
                "shape": jet.grid.shape,
                "K": k_order,
                "g_coeffs": jet.g.iter().map(|t| t.values.clone()).collect::<Vec<_>>(),
                "f_coeffs": jet.f.iter().map(|s| s.values.clone()).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Extends boundary data to its order-K jet: scalars f̄ up to K+1, metric
/// coefficients up to K, inverse-metric and composition series up to K.
pub fn jet_extend(data: &BoundaryData, k_order: usize) -> Result<BoundaryJet> {
    if k_order < 1 {
        return Err(CoreError::InvalidParameter {
            name: "k_order",
            reason: "jet order must be at least 1".into(),
        });
    }
    match data {
        BoundaryData::Homogeneous(d) => {
            if d.phi.derivs.len() < k_order + 1 {
                return Err(CoreError::JetData(
                    "phi derivative handles up to order K required".into(),
                ));
            }
            if !(d.g0 > 0.0) {
                return Err(CoreError::JetData("ḡ₀ must be positive definite".into()));
            }
            let jet = homogeneous_recursion(&d.g0, &d.f0, &d.f1, &d.phi.derivs, k_order)?;
            Ok(BoundaryJet::Homogeneous {
                reference: d.reference,
                k_order,
                jet,
            })
        }
        BoundaryData::Exact(d) => {
            if d.phi.derivs.len() < k_order + 1 {
                return Err(CoreError::JetData(
                    "phi derivative handles up to order K required".into(),
                ));
            }
            let jet = homogeneous_recursion(&d.g0, &d.f0, &d.f1, &d.phi.derivs, k_order)?;
            Ok(BoundaryJet::Exact {
                reference: d.reference,
                k_order,
                jet,
            })
        }
        BoundaryData::Grid(d) => {
            let jet = grid::grid_recursion(d, k_order)?;
            Ok(BoundaryJet::Grid { k_order, jet })
        }
    }
}

/// Per-order residuals of the group-(iii) compatibility constraint.  The
/// homogeneous backends return exact zeros (all spatial derivatives
/// vanish); the grid backend measures the contracted identity.
pub fn jet_constraint_residual(jet: &BoundaryJet) -> Vec<f64> {
    match jet {
        BoundaryJet::Homogeneous { k_order, .. } | BoundaryJet::Exact { k_order, .. } => {
            vec![0.0; *k_order]
        }
        BoundaryJet::Grid { jet, .. } => grid::grid_constraint_residuals(jet),
    }
}

/// Smooth-gluing criterion: jets match when [ḡ_k^B] = (−1)^k [ḡ_k^A] and
/// f̄_k^B = (−1)^k f̄_k^A for all k ≤ K; the alternating sign implements
/// the opposite inward normals of the two collars.  Exact jets compare
/// algebraically (tol is ignored).
pub fn jets_match(a: &BoundaryJet, b: &BoundaryJet, k_order: usize, tol: f64) -> Result<bool> {
    if a.k_order() < k_order || b.k_order() < k_order {
        return Err(CoreError::JetMismatch(format!(
            "jets of orders {} and {} cannot be compared to order {k_order}",
            a.k_order(),
            b.k_order()
        )));
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    match (a, b) {
        (
            BoundaryJet::Homogeneous {
                reference: ra,
                jet: ja,
                ..
            },
            BoundaryJet::Homogeneous {
                reference: rb,
                jet: jb,
                ..
            },
        ) => {
            if ra != rb {
                return Err(CoreError::JetMismatch(
                    "jets live over different reference metrics".into(),
                ));
            }
            let mut ok = true;
            for k in 0..=k_order {
                ok &= (jb.g[k] - sign(k) * ja.g[k]).abs() <= tol;
                ok &= (jb.f[k] - sign(k) * ja.f[k]).abs() <= tol;
            }
            Ok(ok)
        }
        (
            BoundaryJet::Exact {
                reference: ra,
                jet: ja,
                ..
            },
            BoundaryJet::Exact {
                reference: rb,
                jet: jb,
                ..
            },
        ) => {
            if ra != rb {
                return Err(CoreError::JetMismatch(
                    "jets live over different reference metrics".into(),
                ));
            }
            let mut ok = true;
            for k in 0..=k_order {
                let sgn = ExactScalar::from_ratio(if k % 2 == 0 { 1 } else { -1 }, 1);
                ok &= jb.g[k] == ja.g[k].mul(&sgn);
                ok &= jb.f[k] == ja.f[k].mul(&sgn);
            }
            Ok(ok)
        }
        (BoundaryJet::Grid { jet: ja, .. }, BoundaryJet::Grid { jet: jb, .. }) => {
            if ja.grid != jb.grid {
                return Err(CoreError::JetMismatch(
                    "jets live over different grids".into(),
                ));
            }
            let mut ok = true;
            for k in 0..=k_order {
                let worst_g = ja.g[k]
                    .values
                    .iter()
                    .zip(&jb.g[k].values)
                    .map(|(x, y)| (y - sign(k) * x).abs())
                    .fold(0.0f64, f64::max);
                let worst_f = ja.f[k]
                    .values
                    .iter()
                    .zip(&jb.f[k].values)
                    .map(|(x, y)| (y - sign(k) * x).abs())
                    .fold(0.0f64, f64::max);
                ok &= worst_g <= tol && worst_f <= tol;
            }
            Ok(ok)
        }
        _ => Err(CoreError::JetMismatch(
            "jets come from different backends".into(),
        )),
    }
}

/// Model geometries with closed-form collar expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactModel {
    /// Cap side Sⁿ∖D^{n−1}(θ): ḡ(r) = cos²(θ+r)·ref, f = L sin(θ+r).
    CapComplement,
    /// Core side D^{n−1}(θ): ḡ(r) = cos²(θ−r)·ref, f = L sin(θ−r).
    CapCore,
    /// θ = 0 equator collar: ḡ(r) = cos²r·ref, f = L sin r.
    Hemisphere,
}

impl ExactModel {
    fn inward_sign(self) -> i64 {
        match self {
            ExactModel::CapComplement | ExactModel::Hemisphere => 1,
            ExactModel::CapCore => -1,
        }
    }
}

/// Taylor coefficients of cos²(θ + σr) = ½ + ½cos(2θ + 2σr) via the
/// derivative cycle of the cosine.
pub fn model_metric_coefficients<S: JetScalar>(s: &S, c: &S, sigma: i64, k_max: usize) -> Vec<S> {
    let half = S::from_ratio(1, 2);
    // A_k = d^k/dr^k cos(2θ+2σr)|0,  B_k the same for sin
    let mut a = c.mul(c).sub(&s.mul(s));
    let mut b = S::from_ratio(2, 1).mul(&s.mul(c));
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(half.add(&half.mul(&a)));
    let mut factorial: i64 = 1;
    for k in 1..=k_max {
        let a_next = b.mul(&S::from_ratio(-2 * sigma, 1));
        let b_next = a.mul(&S::from_ratio(2 * sigma, 1));
        a = a_next;
        b = b_next;
        factorial *= k as i64;
        out.push(half.mul(&a).mul(&S::from_ratio(1, factorial)));
    }
    out
}

/// Taylor coefficients of L sin(θ + σr).
pub fn model_f_coefficients<S: JetScalar>(s: &S, c: &S, sigma: i64, l: &S, k_max: usize) -> Vec<S> {
    let mut sv = s.clone();
    let mut cv = c.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(l.mul(&sv));
    let mut factorial: i64 = 1;
    for k in 1..=k_max {
        let s_next = cv.mul(&S::from_ratio(sigma, 1));
        let c_next = sv.mul(&S::from_ratio(-sigma, 1));
        sv = s_next;
        cv = c_next;
        factorial *= k as i64;
        out.push(l.mul(&sv).mul(&S::from_ratio(1, factorial)));
    }
    out
}

/// Boundary data of a model geometry for a generic scalar backend.
pub fn model_data<S: JetScalar>(
    model: ExactModel,
    s: &S,
    c: &S,
    l: &S,
    k_order: usize,
    reference: ReferenceMetric,
) -> HomogeneousData<S> {
    let sigma = S::from_ratio(model.inward_sign(), 1);
    let f0 = l.mul(s);
    let f1 = l.mul(c).mul(&sigma);
    let g0 = c.mul(c);
    let phi = PhiJet::identity(&f0, k_order);
    HomogeneousData {
        reference,
        g0,
        f0,
        f1,
        phi,
    }
}

/// Compares the floating-point jet recursion against the closed-form
/// collar expansion of a model geometry; returns the max relative
/// coefficient error over ḡ₀..ḡ_K and f̄₀..f̄_{K+1}.
pub fn jet_vs_exact(model: ExactModel, theta: f64, l: f64, k_order: usize) -> Result<f64> {
    if k_order > 12 {
        return Err(CoreError::InvalidParameter {
            name: "k_order",
            reason: "closed-form comparison supports K <= 12".into(),
        });
    }
    let theta = if model == ExactModel::Hemisphere {
        0.0
    } else {
        theta
    };
    let (s, c) = (theta.sin(), theta.cos());
    let reference = ReferenceMetric::RoundSphere { dim: 2 };
    let data = model_data(model, &s, &c, &l, k_order, reference);
    let jet = homogeneous_recursion(&data.g0, &data.f0, &data.f1, &data.phi.derivs, k_order)?;
    let sigma = model.inward_sign();
    let g_exact = model_metric_coefficients(&s, &c, sigma, k_order);
    let f_exact = model_f_coefficients(&s, &c, sigma, &l, k_order + 1);
    let mut worst = 0.0f64;
    for k in 0..=k_order {
        worst = worst.max((jet.g[k] - g_exact[k]).abs() / g_exact[k].abs().max(1.0));
        worst = worst.max((jet.f[k] - f_exact[k]).abs() / f_exact[k].abs().max(1.0));
    }
    worst = worst.max((jet.f[k_order + 1] - f_exact[k_order + 1]).abs());
    Ok(worst)
}

/// Exact-backend form of the model comparison: the recursion output must
/// equal the symbolic collar expansion identically (θ symbolic, L
/// rational).
pub fn jet_vs_exact_symbolic(model: ExactModel, l: (i64, i64), k_order: usize) -> Result<bool> {
    let (s, c) = if model == ExactModel::Hemisphere {
        (ExactScalar::zero(), ExactScalar::one())
    } else {
        (ExactScalar::sin_theta(), ExactScalar::cos_theta())
    };
    let l = ExactScalar::from_ratio(l.0, l.1);
    let reference = ReferenceMetric::RoundSphere { dim: 2 };
    let data = model_data(model, &s, &c, &l, k_order, reference);
    let jet = homogeneous_recursion(&data.g0, &data.f0, &data.f1, &data.phi.derivs, k_order)?;
    let sigma = model.inward_sign();
    let g_exact = model_metric_coefficients(&s, &c, sigma, k_order);
    let f_exact = model_f_coefficients(&s, &c, sigma, &l, k_order + 1);
    let mut ok = true;
    for k in 0..=k_order {
        ok &= jet.g[k] == g_exact[k];
        ok &= jet.f[k] == f_exact[k];
    }
    ok &= jet.f[k_order + 1] == f_exact[k_order + 1];
    Ok(ok)
}
