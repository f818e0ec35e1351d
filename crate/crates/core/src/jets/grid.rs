//! Periodic-grid jet backend for flat-torus boundary data.
//!
//! Fields are sampled on a uniform periodic grid; spatial derivatives use
//! centered periodic differences, so the derivative terms of the jet
//! recursion (the Hessian of f̄_k and the Christoffel contraction
//! G_i · Λ(ḡ_j) · ∂f̄) are exercised, unlike the homogeneous backend where
//! they vanish identically.  The pointwise scalar arithmetic reuses the
//! same `JetScalar` operations as the homogeneous recursion so that
//! constant fields reproduce it bit for bit.

use super::scalar::{phi_compose, JetScalar};
use crate::error::{CoreError, Result};

/// Uniform periodic grid with `shape[axis]` samples and spacing
/// `spacing[axis]` along each boundary coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() != spacing.len() {
            return Err(CoreError::InvalidParameter {
                name: "shape",
                reason: "shape and spacing must be nonempty and equal length".into(),
            });
        }
        if shape.iter().any(|&s| s < 4) || spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(CoreError::InvalidParameter {
                name: "shape",
                reason: "need at least 4 samples per axis and positive spacing".into(),
            });
        }
        Ok(Self { shape, spacing })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn points(&self) -> usize {
        self.shape.iter().product()
    }

    /// Flat index of the point shifted by `offset` along `axis` (periodic).
    fn shifted(&self, mut idx: usize, axis: usize, offset: isize) -> usize {
        // decompose into coordinates (row-major, last axis fastest)
        let mut coords = vec![0usize; self.dim()];
        for ax in (0..self.dim()).rev() {
            coords[ax] = idx % self.shape[ax];
            idx /= self.shape[ax];
        }
        let n = self.shape[axis] as isize;
        coords[axis] = ((coords[axis] as isize + offset).rem_euclid(n)) as usize;
        let mut flat = 0usize;
        for ax in 0..self.dim() {
            flat = flat * self.shape[ax] + coords[ax];
        }
        flat
    }
}

/// Scalar samples over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &PeriodicGrid, v: f64) -> Self {
        Self {
            values: vec![v; grid.points()],
        }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.points());
        let d = grid.dim();
        let mut coords = vec![0usize; d];
        for _ in 0..grid.points() {
            let xs: Vec<f64> = (0..d)
                .map(|ax| coords[ax] as f64 * grid.spacing[ax])
                .collect();
            values.push(f(&xs));
            // odometer increment, last axis fastest
            for ax in (0..d).rev() {
                coords[ax] += 1;
                if coords[ax] < grid.shape[ax] {
                    break;
                }
                coords[ax] = 0;
            }
        }
        Self { values }
    }

    fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Centered periodic derivative along `axis`.
    fn derivative(&self, grid: &PeriodicGrid, axis: usize) -> ScalarField {
        let h = grid.spacing[axis];
        let values = (0..self.values.len())
            .map(|i| {
                let plus = self.values[grid.shifted(i, axis, 1)];
                let minus = self.values[grid.shifted(i, axis, -1)];
                (plus - minus) / (2.0 * h)
            })
            .collect();
        ScalarField { values }
    }

    /// Centered second derivative ∂α∂β.
    fn second_derivative(&self, grid: &PeriodicGrid, a: usize, b: usize) -> ScalarField {
        let values = if a == b {
            let h2 = grid.spacing[a] * grid.spacing[a];
            (0..self.values.len())
                .map(|i| {
                    let plus = self.values[grid.shifted(i, a, 1)];
                    let minus = self.values[grid.shifted(i, a, -1)];
                    (plus - 2.0 * self.values[i] + minus) / h2
                })
                .collect()
        } else {
            let h4 = 4.0 * grid.spacing[a] * grid.spacing[b];
            (0..self.values.len())
                .map(|i| {
                    let pp = self.values[grid.shifted(grid.shifted(i, a, 1), b, 1)];
                    let pm = self.values[grid.shifted(grid.shifted(i, a, 1), b, -1)];
                    let mp = self.values[grid.shifted(grid.shifted(i, a, -1), b, 1)];
                    let mm = self.values[grid.shifted(grid.shifted(i, a, -1), b, -1)];
                    (pp - pm - mp + mm) / h4
                })
                .collect()
        };
        ScalarField { values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Symmetric 2-tensor samples, stored as d×d entries per point.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl TensorField {
    pub fn from_matrix(grid: &PeriodicGrid, entries: &[Vec<f64>]) -> Self {
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.points() * d * d);
        for _ in 0..grid.points() {
            for row in entries {
                values.extend_from_slice(row);
            }
        }
        Self { dim: d, values }
    }

    /// Diagonal tensor with the given scalar field on every diagonal entry.
    pub fn diagonal_from(grid: &PeriodicGrid, scalar: &ScalarField) -> Self {
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.points() * d * d);
        for p in 0..grid.points() {
            for a in 0..d {
                for b in 0..d {
                    values.push(if a == b { scalar.values[p] } else { 0.0 });
                }
            }
        }
        Self { dim: d, values }
    }

    /// Constant multiple of the identity (the flat reference metric).
    pub fn scaled_identity(grid: &PeriodicGrid, scale: f64) -> Self {
        let d = grid.dim();
        let mut entries = vec![vec![0.0; d]; d];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = scale;
        }
        Self::from_matrix(grid, &entries)
    }

    fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            dim: grid.dim(),
            values: vec![0.0; grid.points() * grid.dim() * grid.dim()],
        }
    }

    #[inline]
    pub fn entry(&self, point: usize, a: usize, b: usize) -> f64 {
        self.values[(point * self.dim + a) * self.dim + b]
    }

    #[inline]
    fn entry_mut(&mut self, point: usize, a: usize, b: usize) -> &mut f64 {
        &mut self.values[(point * self.dim + a) * self.dim + b]
    }

    /// Entrywise derivative field ∂axis g_{ab}.
    fn component(&self, grid: &PeriodicGrid, a: usize, b: usize) -> ScalarField {
        let values = (0..grid.points()).map(|p| self.entry(p, a, b)).collect();
        ScalarField { values }
    }

    /// Pointwise matrix product.
    fn mat_mul(&self, other: &TensorField) -> TensorField {
        let d = self.dim;
        let points = self.values.len() / (d * d);
        let mut out = TensorField {
            dim: d,
            values: vec![0.0; self.values.len()],
        };
        for p in 0..points {
            for a in 0..d {
                for b in 0..d {
                    let mut acc = 0.0f64;
                    for g in 0..d {
                        acc = acc.add(&self.entry(p, a, g).mul(&other.entry(p, g, b)));
                    }
                    *out.entry_mut(p, a, b) = acc;
                }
            }
        }
        out
    }

    fn neg(&self) -> TensorField {
        TensorField {
            dim: self.dim,
            values: self.values.iter().map(|v| JetScalar::neg(v)).collect(),
        }
    }

    fn add_assign(&mut self, other: &TensorField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = a.add(b);
        }
    }

    /// Pointwise inverse by Gauss-Jordan elimination; errors when a sample
    /// is not positive definite (non-positive pivot under symmetric
    /// elimination).
    fn inverse(&self) -> Result<TensorField> {
        let d = self.dim;
        let points = self.values.len() / (d * d);
        let mut out = TensorField {
            dim: d,
            values: vec![0.0; self.values.len()],
        };
        for p in 0..points {
            let mut m = vec![vec![0.0f64; d]; d];
            let mut inv = vec![vec![0.0f64; d]; d];
            for a in 0..d {
                for b in 0..d {
                    m[a][b] = self.entry(p, a, b);
                }
                inv[a][a] = 1.0;
            }
            for col in 0..d {
                let pivot = m[col][col];
                if !(pivot > 0.0) {
                    return Err(CoreError::JetData(format!(
                        "metric sample {p} is not positive definite (pivot {pivot})"
                    )));
                }
                for b in 0..d {
                    m[col][b] = m[col][b].div(&pivot);
                    inv[col][b] = inv[col][b].div(&pivot);
                }
                for row in 0..d {
                    if row == col {
                        continue;
                    }
                    let factor = m[row][col];
                    if factor == 0.0 {
                        continue;
                    }
                    for b in 0..d {
                        m[row][b] = m[row][b].sub(&factor.mul(&m[col][b]));
                        inv[row][b] = inv[row][b].sub(&factor.mul(&inv[col][b]));
                    }
                }
            }
            for a in 0..d {
                for b in 0..d {
                    *out.entry_mut(p, a, b) = inv[a][b];
                }
            }
        }
        Ok(out)
    }

    pub fn sup_distance(&self, other: &TensorField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// φ and its derivatives as evaluation handles (order m handle returns
/// φ^{(m)} at the given argument).
pub struct GridPhi {
    pub derivs: Vec<Box<dyn Fn(f64) -> f64>>,
}

impl GridPhi {
    /// φ(f) = f: handles (f, 1, 0, 0, …).
    pub fn identity(order: usize) -> Self {
        let mut derivs: Vec<Box<dyn Fn(f64) -> f64>> = vec![Box::new(|x| x), Box::new(|_| 1.0)];
        for _ in 2..=order {
            derivs.push(Box::new(|_| 0.0));
        }
        Self { derivs }
    }
}

/// Boundary data sampled on a periodic grid.
pub struct GridData {
    pub grid: PeriodicGrid,
    pub g0: TensorField,
    pub f0: ScalarField,
    pub f1: ScalarField,
    pub phi: GridPhi,
}

/// Grid-backend jet: per-order tensor and scalar fields.
#[derive(Debug, Clone)]
pub struct GridJet {
    pub grid: PeriodicGrid,
    pub g: Vec<TensorField>,
    pub f: Vec<ScalarField>,
    pub ginv: Vec<TensorField>,
    pub fcomp: Vec<ScalarField>,
}

/// Λ_{abδ}(g) = ∂_a g_{bδ} + ∂_b g_{aδ} − ∂_δ g_{ab}, assembled from the
/// precomputed entrywise derivative table dg[axis][(a,b)].
fn lambda(dg: &[Vec<ScalarField>], d: usize, p: usize, a: usize, b: usize, delta: usize) -> f64 {
    let e = |axis: usize, i: usize, j: usize| dg[axis][i * d + j].values[p];
    e(a, b, delta).add(&e(b, a, delta)).sub(&e(delta, a, b))
}

/// Grid form of the jet recursion; mirrors the homogeneous recursion term
/// by term, adding the Hessian and Christoffel-contraction terms that
/// vanish for constant fields.
pub fn grid_recursion(data: &GridData, k_order: usize) -> Result<GridJet> {
    let grid = &data.grid;
    let d = grid.dim();
    let points = grid.points();
    if data.phi.derivs.len() < k_order + 1 {
        return Err(CoreError::JetData(format!(
            "phi handles up to order {k_order} required, got {}",
            data.phi.derivs.len()
        )));
    }
    for (p, v) in data.f1.values.iter().enumerate() {
        if *v == 0.0 {
            return Err(CoreError::JetData(format!(
                "the Neumann datum vanishes at sample {p}"
            )));
        }
    }
    // positive definiteness is checked by the pointwise inversion
    let g0inv = data.g0.inverse()?;

    let mut g: Vec<TensorField> = vec![data.g0.clone()];
    let mut f: Vec<ScalarField> = vec![data.f0.clone(), data.f1.clone()];
    for _ in 2..=k_order + 1 {
        f.push(ScalarField::zeros(grid));
    }
    for _ in 1..=k_order {
        g.push(TensorField::zeros(grid));
    }

    let phi_at = |p: usize, up_to: usize| -> Vec<f64> {
        (0..=up_to)
            .map(|m| (data.phi.derivs[m])(data.f0.values[p]))
            .collect()
    };

    for k in 0..k_order {
        // composition and scalar ODE, pointwise, mirroring the
        // homogeneous scalar sequence
        let mut fcomp_k: Vec<ScalarField> = (0..=k).map(|_| ScalarField::zeros(grid)).collect();
        for p in 0..points {
            let derivs = phi_at(p, k);
            let f_point: Vec<f64> = f.iter().map(|fk| fk.values[p]).collect();
            let comp = phi_compose(&derivs, &f_point, k);
            for (i, c) in comp.into_iter().enumerate() {
                fcomp_k[i].values[p] = c;
            }
        }
        let denom = ((k + 2) * (k + 1)) as i64;
        let ratio = f64::from_ratio(-1, denom);
        for p in 0..points {
            f[k + 2].values[p] = fcomp_k[k].values[p].mul(&ratio);
        }

        // derivative tables for this order
        let hess: Vec<ScalarField> = {
            let mut h = Vec::with_capacity(d * d);
            for a in 0..d {
                for b in 0..d {
                    h.push(f[k].second_derivative(grid, a, b));
                }
            }
            h
        };
        let df: Vec<Vec<ScalarField>> = (0..=k)
            .map(|ord| (0..d).map(|ax| f[ord].derivative(grid, ax)).collect())
            .collect();
        let dg: Vec<Vec<Vec<ScalarField>>> = (0..=k)
            .map(|ord| {
                (0..d)
                    .map(|ax| {
                        let mut per_axis = Vec::with_capacity(d * d);
                        for a in 0..d {
                            for b in 0..d {
                                per_axis.push(g[ord].component(grid, a, b).derivative(grid, ax));
                            }
                        }
                        per_axis
                    })
                    .collect()
            })
            .collect();

        let scale = f64::from_ratio(-2, (k + 1) as i64);
        let ginv_envelope = series_ginv(&g, &g0inv, k);
        let mut g_next = TensorField::zeros(grid);
        for p in 0..points {
            for alpha in 0..d {
                for beta in 0..d {
                    // ∂α∂β f̄_k
                    let mut bracket = hess[alpha * d + beta].values[p];
                    // ½ Σ_j j(k+2−j) f̄_{k+2−j} [ḡ_j]_{αβ}
                    for j in 1..=k {
                        let s = (j * (k + 2 - j)) as i64;
                        let term = f[k + 2 - j].values[p].mul(&f64::from_ratio(s, 2));
                        bracket = bracket.add(&term.mul(&g[j].entry(p, alpha, beta)));
                    }
                    // Σ_i F_i [ḡ_{k−i}]_{αβ}
                    for i in 0..=k {
                        bracket =
                            bracket.add(&fcomp_k[i].values[p].mul(&g[k - i].entry(p, alpha, beta)));
                    }
                    // −½ Σ_{i,j} G_i^{δγ} Λ_{αβγ}(ḡ_j) ∂_δ f̄_{k−i−j}
                    let mut contraction = 0.0f64;
                    for i in 0..=k {
                        for j in 0..=k - i {
                            let ford = k - i - j;
                            for delta in 0..d {
                                for gamma in 0..d {
                                    let lam = lambda(&dg[j], d, p, alpha, beta, gamma);
                                    if lam == 0.0 {
                                        continue;
                                    }
                                    let gi = ginv_envelope[i].entry(p, delta, gamma);
                                    contraction = contraction
                                        .add(&gi.mul(&lam).mul(&df[ford][delta].values[p]));
                                }
                            }
                        }
                    }
                    bracket = bracket.sub(&contraction.mul(&0.5));

                    *g_next.entry_mut(p, alpha, beta) = bracket.mul(&scale).div(&data.f1.values[p]);
                }
            }
        }
        g[k + 1] = g_next;
    }

    // final composition and inverse-metric series
    let mut fcomp: Vec<ScalarField> = (0..=k_order).map(|_| ScalarField::zeros(grid)).collect();
    for p in 0..points {
        let derivs = phi_at(p, k_order);
        let f_point: Vec<f64> = f.iter().map(|fk| fk.values[p]).collect();
        let comp = phi_compose(&derivs, &f_point, k_order);
        for (i, c) in comp.into_iter().enumerate() {
            fcomp[i].values[p] = c;
        }
    }
    let ginv = series_ginv(&g, &g0inv, k_order);

    Ok(GridJet {
        grid: grid.clone(),
        g,
        f,
        ginv,
        fcomp,
    })
}

/// Inverse-metric series G_k = −G₀ · Σ_{i=1}^{k} ḡ_i G_{k−i}.
fn series_ginv(g: &[TensorField], g0inv: &TensorField, k_max: usize) -> Vec<TensorField> {
    let mut ginv = vec![g0inv.clone()];
    for k in 1..=k_max {
        let mut sum = TensorField {
            dim: g0inv.dim,
            values: vec![0.0; g0inv.values.len()],
        };
        for i in 1..=k {
            sum.add_assign(&g[i].mat_mul(&ginv[k - i]));
        }
        ginv.push(g0inv.mat_mul(&sum).neg());
    }
    ginv
}

/// Per-order sup-norm residuals of the mixed-direction constraint
/// (k+1)∂_α f̄_{k+1} = ½ Σ_{i,j} (i+1)[ḡ_{i+1}]_{αδ} G_j^{βδ} ∂_β f̄_{k−i−j}.
pub fn grid_constraint_residuals(jet: &GridJet) -> Vec<f64> {
    let grid = &jet.grid;
    let d = grid.dim();
    let points = grid.points();
    let k_order = jet.g.len() - 1;
    let mut out = Vec::new();
    let df: Vec<Vec<ScalarField>> = jet
        .f
        .iter()
        .map(|fk| (0..d).map(|ax| fk.derivative(grid, ax)).collect())
        .collect();
    for k in 0..k_order {
        let mut worst = 0.0f64;
        for p in 0..points {
            for alpha in 0..d {
                let lead = df[k + 1][alpha].values[p].mul(&((k + 1) as f64));
                let mut sum = 0.0f64;
                for i in 0..=k {
                    for j in 0..=k - i {
                        let ford = k - i - j;
                        for delta in 0..d {
                            for beta in 0..d {
                                let t = jet.g[i + 1]
                                    .entry(p, alpha, delta)
                                    .mul(&jet.ginv[j].entry(p, beta, delta))
                                    .mul(&df[ford][beta].values[p]);
                                sum = sum.add(&t.mul(&((i + 1) as f64)));
                            }
                        }
                    }
                }
                worst = worst.max((lead - 0.5 * sum).abs());
            }
        }
        out.push(worst);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shift_wraps() {
        let grid = PeriodicGrid::new(vec![4, 6], vec![0.1, 0.1]).unwrap();
        // last axis fastest: point (0,0) is 0; shifting axis 1 by -1 wraps to (0,5)
        assert_eq!(grid.shifted(0, 1, -1), 5);
        assert_eq!(grid.shifted(0, 0, -1), 18);
        assert_eq!(grid.shifted(5, 1, 1), 0);
    }

    #[test]
    fn derivative_of_trig_field() {
        let n = 128;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let grid = PeriodicGrid::new(vec![n], vec![h]).unwrap();
        let f = ScalarField::from_fn(&grid, |x| x[0].sin());
        let df = f.derivative(&grid, 0);
        for (i, v) in df.values.iter().enumerate() {
            let x = i as f64 * h;
            // centered-difference truncation is h²/6 ≈ 4e-4 here
            assert!((v - x.cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn tensor_inverse_round_trip() {
        let grid = PeriodicGrid::new(vec![4, 4], vec![0.25, 0.25]).unwrap();
        let g = TensorField::from_matrix(&grid, &[vec![2.0, 0.3], vec![0.3, 1.5]]);
        let inv = g.inverse().unwrap();
        let id = g.mat_mul(&inv);
        for p in 0..16 {
            for a in 0..2 {
                for b in 0..2 {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((id.entry(p, a, b) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn non_positive_metric_rejected() {
        let grid = PeriodicGrid::new(vec![4], vec![0.25]).unwrap();
        let g = TensorField::scaled_identity(&grid, -1.0);
        assert!(g.inverse().is_err());
    }

    /// Exact spatially varying collar data: the boundary circle at
    /// colatitude ρ₀ on the unit sphere with the tilted height function
    /// f = sin τ·y₁ + cos τ·y₃, in the non-uniform chart x = u + 0.3 sin u.
    /// The collar solution is closed-form: ḡ(u, r) = sin²(ρ₀−r)σ′(u)²du²
    /// and f̄(u, r) = sin τ sin(ρ₀−r)cos σ(u) + cos τ cos(ρ₀−r), with all
    /// derivative terms of the recursion (Hessian and Christoffel
    /// contraction) active.
    fn sphere_collar_data(n: usize, k_ord: usize) -> (GridData, f64, f64) {
        let rho0 = 1.0f64;
        let tau = 0.3f64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let grid = PeriodicGrid::new(vec![n], vec![h]).unwrap();
        let sigma = |u: f64| u + 0.3 * u.sin();
        let dsigma = |u: f64| 1.0 + 0.3 * u.cos();
        let f_r = sphere_collar_f(rho0, tau);
        let w_r = sphere_collar_w(rho0);
        let data = GridData {
            g0: TensorField::diagonal_from(
                &grid,
                &ScalarField::from_fn(&grid, |u| w_r(0) * dsigma(u[0]).powi(2)),
            ),
            f0: ScalarField::from_fn(&grid, |u| f_r(sigma(u[0]), 0)),
            f1: ScalarField::from_fn(&grid, |u| f_r(sigma(u[0]), 1)),
            phi: GridPhi::identity(k_ord),
            grid,
        };
        (data, rho0, tau)
    }

    fn sphere_collar_f(rho0: f64, tau: f64) -> impl Fn(f64, usize) -> f64 {
        move |x: f64, k: usize| {
            let (mut s, mut c) = (rho0.sin(), rho0.cos());
            let mut fact = 1.0;
            for j in 1..=k {
                let (s2, c2) = (-c, s);
                s = s2;
                c = c2;
                fact *= j as f64;
            }
            (tau.sin() * x.cos() * s + tau.cos() * c) / fact
        }
    }

    fn sphere_collar_w(rho0: f64) -> impl Fn(usize) -> f64 {
        move |k: usize| {
            let (mut a, mut b) = ((2.0 * rho0).cos(), (2.0 * rho0).sin());
            let mut fact = 1.0;
            for j in 1..=k {
                let (a2, b2) = (2.0 * b, -2.0 * a);
                a = a2;
                b = b2;
                fact *= j as f64;
            }
            if k == 0 {
                (1.0 - a) / 2.0
            } else {
                -a / (2.0 * fact)
            }
        }
    }

    #[test]
    fn varying_grid_data_converges_to_exact_collar_solution() {
        let k_ord = 4usize;
        let mut g_errors = Vec::new();
        let mut constraint_sup = Vec::new();
        for n in [128usize, 256] {
            let (data, rho0, tau) = sphere_collar_data(n, k_ord);
            let jet = grid_recursion(&data, k_ord).unwrap();
            let h = 2.0 * std::f64::consts::PI / n as f64;
            let sigma = |u: f64| u + 0.3 * u.sin();
            let dsigma = |u: f64| 1.0 + 0.3 * u.cos();
            let f_r = sphere_collar_f(rho0, tau);
            let w_r = sphere_collar_w(rho0);
            let mut worst_g = 0.0f64;
            for ord in 1..=k_ord {
                for p in 0..n {
                    let u = p as f64 * h;
                    // the scalar coefficients carry no finite differences
                    assert!(
                        (jet.f[ord].values[p] - f_r(sigma(u), ord)).abs() <= 1e-14,
                        "f[{ord}] at {p}"
                    );
                    let eg = w_r(ord) * dsigma(u).powi(2);
                    worst_g = worst_g.max((jet.g[ord].entry(p, 0, 0) - eg).abs());
                }
            }
            g_errors.push(worst_g);
            let res = grid_constraint_residuals(&jet);
            constraint_sup.push(res.iter().fold(0.0f64, |m, v| m.max(*v)));
        }
        // second-order convergence of the metric coefficients and of the
        // compatibility-constraint residual on genuine solution data
        assert!(g_errors[0] <= 1e-3, "coarse error {:?}", g_errors);
        assert!(g_errors[1] <= g_errors[0] / 3.0, "{:?}", g_errors);
        assert!(constraint_sup[0] <= 1e-4, "{:?}", constraint_sup);
        assert!(
            constraint_sup[1] <= constraint_sup[0] / 3.0,
            "{:?}",
            constraint_sup
        );
    }

    #[test]
    fn vanishing_neumann_sample_rejected() {
        let grid = PeriodicGrid::new(vec![8], vec![0.1]).unwrap();
        let data = GridData {
            g0: TensorField::scaled_identity(&grid, 1.0),
            f0: ScalarField::constant(&grid, 0.0),
            f1: {
                let mut f = ScalarField::constant(&grid, 1.0);
                f.values[3] = 0.0;
                f
            },
            phi: GridPhi::identity(4),
            grid,
        };
        assert!(grid_recursion(&data, 4).is_err());
    }
}
