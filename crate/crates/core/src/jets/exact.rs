//! Exact scalar arithmetic for boundary jets whose data are rational in
//! sin θ and cos θ.
//!
//! Scalars live in the field `Q(c)[s] / (s² − (1 − c²))` with s = sin θ and
//! c = cos θ kept symbolic: every element has the canonical form
//! A(c) + B(c)·s with A, B rational functions of c.  Addition and
//! multiplication follow the quadratic relation s² = 1 − c²; inversion
//! multiplies by the conjugate A − B·s.  All coefficient arithmetic uses
//! arbitrary-precision rationals, so jet recursions over this type are
//! exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// Dense polynomial over ℚ in the variable c = cos θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Poly {
    /// Coefficients, lowest degree first; no trailing zeros.
    coeffs: Vec<BigRational>,
}

impl Poly {
    fn trim(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub(crate) fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub(crate) fn constant(c: BigRational) -> Self {
        Poly::trim(vec![c])
    }

    pub(crate) fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    /// The monomial c.
    fn x() -> Self {
        Poly {
            coeffs: vec![BigRational::zero(), BigRational::one()],
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::trim(out)
    }

    fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Poly::trim(out)
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::trim(out)
    }

    fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Euclidean division; panics on zero divisor (internal use only).
    fn divrem(&self, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = div.degree();
        let lead = div.coeffs[dd].clone();
        if rem.len() <= dd {
            return (Poly::zero(), Poly::trim(rem));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c.clone();
            for j in 0..=dd {
                let t = &c * &div.coeffs[j];
                rem[i - dd + j] -= t;
            }
        }
        (Poly::trim(quot), Poly::trim(rem))
    }

    fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        // make monic for a canonical representative
        let lead = a.coeffs[a.degree()].clone();
        Poly {
            coeffs: a.coeffs.iter().map(|c| c / &lead).collect(),
        }
    }
}

/// Reduced rational function in c.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFunc {
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let g = Poly::gcd(&num, &den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        // normalize: monic denominator
        let lead = den.coeffs[den.degree()].clone();
        let num = Poly {
            coeffs: num.coeffs.iter().map(|c| c / &lead).collect(),
        };
        let den = Poly {
            coeffs: den.coeffs.iter().map(|c| c / &lead).collect(),
        };
        RatFunc { num, den }
    }

    fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    fn one() -> Self {
        RatFunc {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    fn sub(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn inv(&self) -> RatFunc {
        assert!(!self.is_zero(), "inverse of zero rational function");
        RatFunc::new(self.den.clone(), self.num.clone())
    }
}

/// An element A(c) + B(c)·s of the quadratic extension, with s² = 1 − c².
#[derive(Debug, Clone, PartialEq)]
pub struct ExactScalar {
    a: RatFunc,
    b: RatFunc,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar {
            a: RatFunc::zero(),
            b: RatFunc::zero(),
        }
    }

    pub fn one() -> Self {
        ExactScalar {
            a: RatFunc::one(),
            b: RatFunc::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar {
            a: RatFunc::from_poly(Poly::constant(BigRational::new(
                BigInt::from(num),
                BigInt::from(den),
            ))),
            b: RatFunc::zero(),
        }
    }

    /// The symbol s = sin θ.
    pub fn sin_theta() -> Self {
        ExactScalar {
            a: RatFunc::zero(),
            b: RatFunc::one(),
        }
    }

    /// The symbol c = cos θ.
    pub fn cos_theta() -> Self {
        ExactScalar {
            a: RatFunc::from_poly(Poly::x()),
            b: RatFunc::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        ExactScalar {
            a: self.a.add(&o.a),
            b: self.b.add(&o.b),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ExactScalar {
            a: self.a.sub(&o.a),
            b: self.b.sub(&o.b),
        }
    }

    pub fn neg(&self) -> Self {
        ExactScalar {
            a: self.a.neg(),
            b: self.b.neg(),
        }
    }

    fn s_squared() -> RatFunc {
        // 1 - c^2
        RatFunc::from_poly(Poly::one().sub(&Poly::x().mul(&Poly::x())))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let s2 = Self::s_squared();
        ExactScalar {
            a: self.a.mul(&o.a).add(&self.b.mul(&o.b).mul(&s2)),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.a)),
        }
    }

    pub fn inv(&self) -> Self {
        // (A + Bs)^{-1} = (A - Bs) / (A² − B²(1 − c²)); the norm form is
        // nonzero for nonzero elements since 1 − c² is not a square in ℚ(c)
        assert!(!self.is_zero(), "inverse of zero");
        let s2 = Self::s_squared();
        let norm = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(&s2));
        let inv_norm = norm.inv();
        ExactScalar {
            a: self.a.mul(&inv_norm),
            b: self.b.neg().mul(&inv_norm),
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    /// Numeric evaluation at a concrete angle (for cross-backend checks).
    pub fn evaluate(&self, theta: f64) -> f64 {
        let c = theta.cos();
        let s = theta.sin();
        let eval_poly = |p: &Poly| -> f64 {
            p.coeffs.iter().rev().fold(0.0, |acc, q| {
                let v = rational_to_f64(q);
                acc * c + v
            })
        };
        let eval_rf = |r: &RatFunc| -> f64 {
            eval_poly(&r.num)
                / if r.den.is_zero() {
                    1.0
                } else {
                    eval_poly(&r.den)
                }
        };
        eval_rf(&self.a) + s * eval_rf(&self.b)
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    let num = q.numer();
    let den = q.denom();
    // exact for the moderate sizes arising in jets; falls back to string
    // parsing only for very large terms
    let nf = num.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = den.to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}

fn fmt_poly(p: &Poly, sym: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, c) in p.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !first {
            write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
        } else if c.is_negative() {
            write!(f, "-")?;
        }
        let abs = c.abs();
        if i == 0 {
            write!(f, "{abs}")?;
        } else if abs.is_one() {
            write!(f, "{sym}^{i}")?;
        } else {
            write!(f, "{abs}*{sym}^{i}")?;
        }
        first = false;
    }
    Ok(())
}

impl fmt::Display for ExactScalar {
    /// Prints in the rational-pair form (p/q)·cos^j [+ sin·(…)].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |rf: &RatFunc, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if rf.den == Poly::one() {
                fmt_poly(&rf.num, "cos", f)
            } else {
                write!(f, "(")?;
                fmt_poly(&rf.num, "cos", f)?;
                write!(f, ")/(")?;
                fmt_poly(&rf.den, "cos", f)?;
                write!(f, ")")
            }
        };
        if self.b.is_zero() {
            return show(&self.a, f);
        }
        if self.a.is_zero() {
            write!(f, "sin*(")?;
            show(&self.b, f)?;
            return write!(f, ")");
        }
        show(&self.a, f)?;
        write!(f, " + sin*(")?;
        show(&self.b, f)?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_relation() {
        let s = ExactScalar::sin_theta();
        let c = ExactScalar::cos_theta();
        let sum = s.mul(&s).add(&c.mul(&c));
        assert_eq!(sum, ExactScalar::one());
    }

    #[test]
    fn inverse_round_trip() {
        // (2c + 3s) * (2c + 3s)^{-1} = 1
        let x = ExactScalar::cos_theta()
            .mul(&ExactScalar::from_ratio(2, 1))
            .add(&ExactScalar::sin_theta().mul(&ExactScalar::from_ratio(3, 1)));
        assert_eq!(x.mul(&x.inv()), ExactScalar::one());
        // 1/cos² appears in inverse-metric coefficients
        let c2 = ExactScalar::cos_theta().mul(&ExactScalar::cos_theta());
        assert_eq!(c2.mul(&c2.inv()), ExactScalar::one());
    }

    #[test]
    fn evaluation_matches_floating_point() {
        let theta = 0.83f64;
        let x = ExactScalar::cos_theta()
            .mul(&ExactScalar::sin_theta())
            .sub(&ExactScalar::from_ratio(1, 3));
        let expected = theta.cos() * theta.sin() - 1.0 / 3.0;
        assert!((x.evaluate(theta) - expected).abs() < 1e-15);
        let inv = x.inv();
        assert!((inv.evaluate(theta) - 1.0 / expected).abs() < 1e-12);
    }

    #[test]
    fn display_rational_pairs() {
        let x = ExactScalar::from_ratio(-2, 1)
            .mul(&ExactScalar::sin_theta())
            .mul(&ExactScalar::cos_theta());
        assert_eq!(format!("{x}"), "sin*(-2*cos^1)");
        let y = ExactScalar::cos_theta().mul(&ExactScalar::cos_theta().inv());
        assert_eq!(format!("{y}"), "1");
    }

    #[test]
    fn gcd_reduction_keeps_forms_small() {
        // (c^2 - 1)/(c - 1) reduces to c + 1
        let num = Poly::x().mul(&Poly::x()).sub(&Poly::one());
        let den = Poly::x().sub(&Poly::one());
        let r = RatFunc::new(num, den);
        assert_eq!(r.den, Poly::one());
        assert_eq!(r.num.degree(), 1);
    }
}
