//! Scalar abstraction shared by the floating-point and exact jet backends,
//! plus the homogeneous (constant-coefficient) form of the jet recursion.

use super::exact::ExactScalar;
use crate::error::{CoreError, Result};

/// Field operations the jet recursion needs.  The f64 and exact backends
/// run the same recursion code through this trait, so the two stay in
/// step term by term.
pub trait JetScalar: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl JetScalar for ExactScalar {
    fn zero() -> Self {
        ExactScalar::zero()
    }
    fn one() -> Self {
        ExactScalar::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::from_ratio(num, den)
    }
    fn add(&self, o: &Self) -> Self {
        ExactScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ExactScalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ExactScalar::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        ExactScalar::div(self, o)
    }
    fn neg(&self) -> Self {
        ExactScalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        ExactScalar::is_zero(self)
    }
}

/// Truncated product of two power series (orders 0..=k_max).
pub fn series_mul<S: JetScalar>(a: &[S], b: &[S], k_max: usize) -> Vec<S> {
    let mut out = vec![S::zero(); k_max + 1];
    for (i, ai) in a.iter().enumerate().take(k_max + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > k_max {
                break;
            }
            out[i + j] = out[i + j].add(&ai.mul(bj));
        }
    }
    out
}

/// Coefficients of 1/w(r) given w with invertible constant term.
pub fn series_inverse<S: JetScalar>(w: &[S], k_max: usize) -> Vec<S> {
    let u0 = S::one().div(&w[0]);
    let mut u = vec![S::zero(); k_max + 1];
    u[0] = u0.clone();
    for k in 1..=k_max {
        let mut sum = S::zero();
        for i in 1..=k {
            if i < w.len() {
                sum = sum.add(&w[i].mul(&u[k - i]));
            }
        }
        u[k] = u0.mul(&sum).neg();
    }
    u
}

/// Composition coefficients F_k of φ(f(r)) from the derivative values
/// φ, φ′, φ″, … at f̄₀ and the series f(r) = f̄₀ + δ(r).
///
/// F_k = Σ_m φ^{(m)}(f̄₀)/m! · [δ^m]_k with δ = Σ_{j≥1} f̄_j r^j.
pub fn phi_compose<S: JetScalar>(phi_derivs: &[S], f: &[S], k_max: usize) -> Vec<S> {
    let mut delta = vec![S::zero(); k_max + 1];
    for j in 1..=k_max {
        if j < f.len() {
            delta[j] = f[j].clone();
        }
    }
    let mut out = vec![S::zero(); k_max + 1];
    out[0] = phi_derivs[0].clone();
    let mut power = vec![S::zero(); k_max + 1];
    power[0] = S::one();
    let mut factorial: i64 = 1;
    for m in 1..=k_max {
        power = series_mul(&power, &delta, k_max);
        factorial *= m as i64;
        if m >= phi_derivs.len() || phi_derivs[m].is_zero() {
            continue;
        }
        let coef = phi_derivs[m].mul(&S::from_ratio(1, factorial));
        for k in m..=k_max {
            if power[k].is_zero() {
                continue;
            }
            out[k] = out[k].add(&coef.mul(&power[k]));
        }
    }
    out
}

/// Output of the homogeneous jet recursion: the scalar coefficients
/// multiplying the fixed reference tensor (metric and inverse) and the
/// boundary scalars.
#[derive(Debug, Clone)]
pub struct HomogeneousJet<S> {
    /// ḡ_k coefficients, orders 0..=K.
    pub g: Vec<S>,
    /// f̄_k coefficients, orders 0..=K+1.
    pub f: Vec<S>,
    /// Inverse-metric coefficients G_k, orders 0..=K.
    pub ginv: Vec<S>,
    /// Composition coefficients F_k of φ(f), orders 0..=K.
    pub fcomp: Vec<S>,
}

/// Homogeneous form of the boundary jet recursion: all spatial-derivative
/// terms vanish, leaving
///
/// * f̄_{k+2} = −F_k / ((k+2)(k+1))     (the scalar ODE f″ + φ(f) = 0),
/// * ḡ_{k+1} = −2/((k+1)·f̄₁) · [ ½ Σ_{j=1}^k j(k+2−j) f̄_{k+2−j} ḡ_j
///                                + Σ_{i=0}^k F_i ḡ_{k−i} ].
pub fn homogeneous_recursion<S: JetScalar>(
    g0: &S,
    f0: &S,
    f1: &S,
    phi_derivs: &[S],
    k_order: usize,
) -> Result<HomogeneousJet<S>> {
    if f1.is_zero() {
        return Err(CoreError::JetData(
            "the Neumann datum f̄₁ must be nonvanishing".into(),
        ));
    }
    if g0.is_zero() {
        return Err(CoreError::JetData("ḡ₀ must be positive definite".into()));
    }
    let mut g = vec![S::zero(); k_order + 1];
    let mut f = vec![S::zero(); k_order + 2];
    g[0] = g0.clone();
    f[0] = f0.clone();
    f[1] = f1.clone();

    for k in 0..k_order {
        // F_0..F_k from the f-coefficients known so far (orders <= k+1)
        let fcomp = phi_compose(phi_derivs, &f, k);
        // scalar ODE: (k+2)(k+1) f_{k+2} = -F_k
        let denom = ((k + 2) * (k + 1)) as i64;
        f[k + 2] = fcomp[k].mul(&S::from_ratio(-1, denom));

        // bracket of the metric recursion
        let mut bracket = S::zero();
        for j in 1..=k {
            let scale = (j * (k + 2 - j)) as i64;
            let term = f[k + 2 - j].mul(&S::from_ratio(scale, 2));
            bracket = bracket.add(&term.mul(&g[j]));
        }
        for i in 0..=k {
            bracket = bracket.add(&fcomp[i].mul(&g[k - i]));
        }
        g[k + 1] = bracket.mul(&S::from_ratio(-2, (k + 1) as i64)).div(f1);
    }

    let fcomp = phi_compose(phi_derivs, &f, k_order);
    let ginv = series_inverse(&g, k_order);
    Ok(HomogeneousJet { g, f, ginv, fcomp })
}

/// Taylor coefficients of (f′)² + f² − L²; for model data these vanish
/// through order K−1 (the conserved-quantity shadow of the flow law).
pub fn conservation_shadow<S: JetScalar>(f: &[S], l: &S, k_max: usize) -> Vec<S> {
    let fp: Vec<S> = (0..f.len().saturating_sub(1))
        .map(|k| f[k + 1].mul(&S::from_ratio((k + 1) as i64, 1)))
        .collect();
    let mut out = series_mul(&fp, &fp, k_max);
    let f2 = series_mul(f, f, k_max);
    for k in 0..=k_max {
        out[k] = out[k].add(&f2[k]);
    }
    out[0] = out[0].sub(&l.mul(l));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_identity_f64(f0: f64, k: usize) -> Vec<f64> {
        let mut d = vec![0.0; k + 1];
        d[0] = f0;
        if k >= 1 {
            d[1] = 1.0;
        }
        d
    }

    #[test]
    fn series_inverse_of_geometric() {
        // 1/(1 - r) = 1 + r + r² + ...
        let w = vec![1.0, -1.0];
        let u = series_inverse(&w, 5);
        assert_eq!(u, vec![1.0; 6]);
    }

    #[test]
    fn phi_compose_identity_reproduces_f() {
        let f = vec![0.3, 1.7, -0.2, 0.05];
        let derivs = phi_identity_f64(f[0], 3);
        let comp = phi_compose(&derivs, &f, 3);
        assert_eq!(comp, f);
    }

    #[test]
    fn phi_compose_quadratic() {
        // φ(x) = x² around f0 = 2: derivatives (4, 4, 2)
        let f = vec![2.0, 1.0, 0.5];
        let derivs = vec![4.0, 4.0, 2.0];
        let comp = phi_compose(&derivs, &f, 2);
        // (2 + r + r²/2)² = 4 + 4r + 3r² + ...
        assert_eq!(comp, vec![4.0, 4.0, 3.0]);
    }

    #[test]
    fn degenerate_phi_gives_affine_f() {
        // φ ≡ 0 with f0 = 0, f1 = 1: f_k = 0 for k >= 2, metric constant
        let jet = homogeneous_recursion(&1.0, &0.0, &1.0, &[0.0], 6).unwrap();
        assert!(jet.f[2..].iter().all(|v| *v == 0.0));
        assert!(jet.g[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_vanishing_neumann_datum() {
        assert!(homogeneous_recursion(&1.0, &0.5, &0.0, &[0.5, 1.0], 4).is_err());
    }

    #[test]
    fn conservation_shadow_for_circle_series() {
        // f = sin(r): (f′)² + f² = 1 identically
        let f = vec![0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0];
        let shadow = conservation_shadow(&f, &1.0, 3);
        for (k, v) in shadow.iter().enumerate() {
            assert!(v.abs() < 1e-15, "order {k}: {v}");
        }
    }
}
