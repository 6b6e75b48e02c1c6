//! Dense real polynomials in ascending-power form.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree ignoring trailing zero coefficients; `None` for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * j as f64)
            .collect();
        Self { coeffs }
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
        Self { coeffs }
    }

    /// `∫_a^b p(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// `c · p`.
    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&x| c * x).collect() }
    }

    /// `t ↦ p(λ t)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut power = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| {
                let out = c * power;
                power *= lambda;
                out
            })
            .collect();
        Self { coeffs }
    }

    /// `t ↦ p(α t + β)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        let linear = Self::new(vec![beta, alpha]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| acc.mul(&linear).add(&Self::constant(c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|j| self.coeffs.get(j).copied().unwrap_or(0.0) + other.coeffs.get(j).copied().unwrap_or(0.0))
            .collect();
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    /// Points in the open interval `(a, b)` where `p` changes sign, ascending.
    ///
    /// Roots of even multiplicity are not reported. Sign changes lie between
    /// consecutive critical points, so the search recurses on `p'` and then
    /// bisects each monotone bracket to full precision.
    pub fn sign_changes(&self, a: f64, b: f64) -> Vec<f64> {
        let Some(deg) = self.degree() else { return Vec::new() };
        if deg == 0 || !(a < b) {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if r > a && r < b { vec![r] } else { Vec::new() };
        }
        let mut fences = vec![a];
        fences.extend(self.derivative().sign_changes(a, b));
        fences.push(b);
        let mut roots = Vec::new();
        for w in fences.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (mut flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0) {
                // a zero at a fence is a sign change only if the sign differs
                // on both sides; handled by the neighbouring brackets
                if flo == 0.0 && lo > a {
                    let left = self.eval(lo - (lo - a).min(1e-9 * (1.0 + lo.abs())));
                    let right = self.eval(lo + (hi - lo).min(1e-9 * (1.0 + lo.abs())));
                    if (left > 0.0) != (right > 0.0) && roots.last() != Some(&lo) {
                        roots.push(lo);
                    }
                }
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = self.eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            if r > a && r < b {
                roots.push(r);
            }
        }
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> Polynomial {
        Polynomial::new(vec![1.0, 0.0, -3.0, 2.0])
    }

    #[test]
    fn horner_and_calculus() {
        let p = bump();
        assert!((p.eval(0.6) - 0.352).abs() < 1e-15);
        assert_eq!(p.derivative().coeffs(), &[0.0, -6.0, 6.0]);
        assert!((p.integral(0.0, 1.0) - 0.5).abs() < 1e-16);
        assert!((p.mul(&p).integral(0.0, 1.0) - 13.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn dilation_rescales_coefficients() {
        let p = bump().dilate(2.0);
        assert_eq!(p.coeffs(), &[1.0, 0.0, -12.0, 16.0]);
        assert!((p.eval(0.3) - bump().eval(0.6)).abs() < 1e-15);
    }

    #[test]
    fn affine_composition() {
        let p = bump().compose_affine(0.5, -0.25);
        for t in [0.0, 0.3, 1.7] {
            assert!((p.eval(t) - bump().eval(0.5 * t - 0.25)).abs() < 1e-15);
        }
    }

    #[test]
    fn sign_changes_of_cubic() {
        // (t - 0.2)(t - 0.5)(t - 0.9)
        let p = Polynomial::new(vec![-0.09, 0.73, -1.6, 1.0]);
        let r = p.sign_changes(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-14);
        }
        // double root at 0.5 is not a sign change
        let q = Polynomial::new(vec![0.25, -1.0, 1.0]);
        assert!(q.sign_changes(0.0, 1.0).is_empty());
        assert!(Polynomial::zero().sign_changes(0.0, 1.0).is_empty());
    }
}
