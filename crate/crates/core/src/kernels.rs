//! Compactly supported piecewise-polynomial kernels and the special
//! functions `χ`, `ρ` and `ρ₁`.
//!
//! A kernel is *good* when it is C¹ on `[0, ∞)` (including the junction with
//! the zero extension at its support bound), integrable, and has
//! `∫₀^∞ t |f'(t)| dt < ∞`. Compactly supported piecewise polynomials always
//! satisfy the last two conditions, so goodness reduces to C¹ continuity at
//! the knots.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Relative tolerance for C¹ continuity at a knot.
pub const C1_TOLERANCE: f64 = 1e-14;

/// Anything that can be evaluated on `(0, ∞)` as a kernel or transformed
/// kernel.
pub trait KernelLike {
    fn value(&self, x: f64) -> f64;

    /// Points in `[lo, hi]` where the function or its first two derivatives
    /// jump, ascending. When more than `limit` exist the ones closest to
    /// `hi` are kept.
    fn breakpoints(&self, lo: f64, hi: f64, limit: usize) -> Vec<f64>;

    /// Exact reciprocal tail: the function equals `coeff / x` for every
    /// `x ≥ from` (`coeff = 0` for compact support).
    fn reciprocal_tail(&self) -> Option<ReciprocalTail>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalTail {
    pub from: f64,
    pub coeff: f64,
}

impl<T: KernelLike + ?Sized> KernelLike for &T {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn breakpoints(&self, lo: f64, hi: f64, limit: usize) -> Vec<f64> {
        (**self).breakpoints(lo, hi, limit)
    }
    fn reciprocal_tail(&self) -> Option<ReciprocalTail> {
        (**self).reciprocal_tail()
    }
}

/// The parameter-free special functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpecialFunction {
    /// indicator of `(0, 1]`
    Chi,
    /// fractional part `x − ⌊x⌋`
    Rho,
    /// `ρ(1/x)`
    Rho1,
}

#[inline]
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

impl SpecialFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            SpecialFunction::Chi => {
                if x > 0.0 && x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SpecialFunction::Rho => frac(x),
            SpecialFunction::Rho1 => {
                if x > 0.0 {
                    frac(1.0 / x)
                } else {
                    0.0
                }
            }
        }
    }
}

impl KernelLike for SpecialFunction {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn breakpoints(&self, lo: f64, hi: f64, limit: usize) -> Vec<f64> {
        if !(lo <= hi) || limit == 0 {
            return Vec::new();
        }
        match self {
            SpecialFunction::Chi => {
                if lo <= 1.0 && 1.0 <= hi {
                    vec![1.0]
                } else {
                    Vec::new()
                }
            }
            SpecialFunction::Rho => {
                let first = lo.max(0.0).ceil();
                let last = hi.floor();
                if !(first <= last) {
                    return Vec::new();
                }
                let first = first.max(last - (limit as f64 - 1.0));
                let count = (last - first) as usize + 1;
                (0..count).map(|k| first + k as f64).collect()
            }
            SpecialFunction::Rho1 => {
                // kinks of ρ(1/x) at x = 1/n
                if hi <= 0.0 {
                    return Vec::new();
                }
                let n_min = (1.0 / hi).ceil().max(1.0);
                let n_max = if lo > 0.0 { (1.0 / lo).floor() } else { f64::INFINITY };
                if !(n_min <= n_max) {
                    return Vec::new();
                }
                let n_max = n_max.min(n_min + (limit as f64 - 1.0));
                let mut pts: Vec<f64> = (n_min as u64..=n_max as u64).map(|n| 1.0 / n as f64).collect();
                pts.reverse();
                pts
            }
        }
    }

    fn reciprocal_tail(&self) -> Option<ReciprocalTail> {
        match self {
            SpecialFunction::Chi => Some(ReciprocalTail { from: 1.0, coeff: 0.0 }),
            SpecialFunction::Rho => None,
            SpecialFunction::Rho1 => Some(ReciprocalTail { from: 1.0, coeff: 1.0 }),
        }
    }
}

/// One polynomial piece on `(from, to]` (the first piece also owns `0`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    /// ascending powers of the global variable `t`
    #[cfg_attr(feature = "serde", serde(rename = "coeffs"))]
    pub poly: Polynomial,
}

/// A compactly supported piecewise polynomial on `[0, A]`, zero beyond `A`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PiecewiseKernel {
    name: String,
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct C1Defect {
    pub knot: f64,
    pub value_jump: f64,
    pub slope_jump: f64,
}

/// Outcome of [`PiecewiseKernel::validate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelValidationReport {
    pub is_good: bool,
    pub c1_defects: Vec<C1Defect>,
    /// `ν₁(f') = ∫ t |f'(t)| dt`
    pub nu1_fprime: f64,
    /// sampled `sup t |f(t)|` on a log grid
    pub sup_tf: f64,
    /// `t |f(t)|` at ten times the support bound (zero for compact support)
    pub tail_tf: f64,
    pub notes: String,
}

impl PiecewiseKernel {
    /// Builds a kernel from contiguous pieces starting at 0.
    pub fn new(name: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Schema("kernel has no pieces".into()));
        }
        if pieces[0].from != 0.0 {
            return Err(Error::Schema(format!("first piece starts at {} instead of 0", pieces[0].from)));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.from.is_finite() && p.to.is_finite() && p.from < p.to) {
                return Err(Error::Schema(format!("piece {i} has empty or invalid interval [{}, {}]", p.from, p.to)));
            }
            if p.poly.coeffs().iter().any(|c| !c.is_finite()) {
                return Err(Error::Schema(format!("piece {i} has non-finite coefficients")));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[1].from < w[0].to {
                return Err(Error::Schema(format!(
                    "pieces {i} and {} overlap: [{}, {}] and [{}, {}]",
                    i + 1,
                    w[0].from,
                    w[0].to,
                    w[1].from,
                    w[1].to
                )));
            }
            if w[1].from > w[0].to {
                return Err(Error::Schema(format!("gap between {} and {}", w[0].to, w[1].from)));
            }
        }
        Ok(Self { name: name.into(), pieces })
    }

    fn from_parts(name: impl Into<String>, parts: Vec<(f64, f64, Vec<f64>)>) -> Self {
        let pieces = parts
            .into_iter()
            .map(|(from, to, c)| Piece { from, to, poly: Polynomial::new(c) })
            .collect();
        Self::new(name, pieces).expect("built-in kernel is well formed")
    }

    /// The reference good kernel `(1−t)²(1+2t)` on `[0, 1]`, with Mellin
    /// transform `6 / (s(s+2)(s+3))`.
    pub fn bump() -> Self {
        Self::from_parts("bump", vec![(0.0, 1.0, vec![1.0, 0.0, -3.0, 2.0])])
    }

    /// `t²(1−t)²` on `[0, 1]`: a good kernel with `f(0) = 0`.
    pub fn flat_bump() -> Self {
        Self::from_parts("flat-bump", vec![(0.0, 1.0, vec![0.0, 0.0, 1.0, -2.0, 1.0])])
    }

    /// `χ` as a piecewise constant (not a good kernel).
    pub fn chi() -> Self {
        Self::from_parts("chi", vec![(0.0, 1.0, vec![1.0])])
    }

    /// `max(0, 1 − |t − 1|)`: continuous but not C¹.
    pub fn hat() -> Self {
        Self::from_parts("hat", vec![(0.0, 1.0, vec![0.0, 1.0]), (1.0, 2.0, vec![2.0, -1.0])])
    }

    pub fn zero() -> Self {
        Self::from_parts("zero", vec![(0.0, 1.0, vec![])])
    }

    /// Looks up a built-in kernel by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "bump" => Some(Self::bump()),
            "flat-bump" => Some(Self::flat_bump()),
            "chi" => Some(Self::chi()),
            "hat" => Some(Self::hat()),
            "zero" => Some(Self::zero()),
            _ => None,
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 5] = ["bump", "flat-bump", "chi", "hat", "zero"];

    /// Piecewise cubic Hermite interpolant through `(knot, value, slope)`
    /// triples; C¹ by construction. `knots[0]` must be 0. Use value and
    /// slope 0 at the last knot for a good kernel.
    pub fn hermite(name: impl Into<String>, knots: &[f64], values: &[f64], slopes: &[f64]) -> Result<Self> {
        if knots.len() < 2 || values.len() != knots.len() || slopes.len() != knots.len() {
            return Err(Error::Schema("Hermite data needs ≥ 2 knots and matching values/slopes".into()));
        }
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        for i in 0..knots.len() - 1 {
            let (a, b) = (knots[i], knots[i + 1]);
            let h = b - a;
            let (y0, y1, m0, m1) = (values[i], values[i + 1], slopes[i] * h, slopes[i + 1] * h);
            // local cubic in s = (t − a)/h
            let local = Polynomial::new(vec![
                y0,
                m0,
                -3.0 * y0 - 2.0 * m0 + 3.0 * y1 - m1,
                2.0 * y0 + m0 - 2.0 * y1 + m1,
            ]);
            pieces.push(Piece { from: a, to: b, poly: local.compose_affine(1.0 / h, -a / h) });
        }
        Self::new(name, pieces)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `A` such that `f ≡ 0` on `(A, ∞)`.
    pub fn support_bound(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.to)
    }

    /// All knots `0 = k₀ < … < A`.
    pub fn knots(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().map(|p| p.from).collect();
        out.push(self.support_bound());
        out
    }

    /// Index of the piece owning `x ∈ [0, A]`.
    #[inline]
    pub fn piece_index(&self, x: f64) -> Option<usize> {
        if x < 0.0 || x > self.support_bound() {
            return None;
        }
        Some(self.pieces.partition_point(|p| p.to < x))
    }

    /// `f(x)` for `x ≥ 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeArgument(x));
        }
        Ok(self.value_at(x))
    }

    /// `f(x)`, zero outside `[0, A]`.
    #[inline]
    pub fn value_at(&self, x: f64) -> f64 {
        match self.piece_index(x) {
            Some(i) => self.pieces[i].poly.eval(x),
            None => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.poly.is_zero())
    }

    fn map_pieces(&self, name: String, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { from: p.from, to: p.to, poly: f(&p.poly) })
            .collect();
        Self { name, pieces }
    }

    /// `f'` on the same knots. Fails unless the kernel is C¹.
    pub fn derivative(&self) -> Result<Self> {
        let defects = self.c1_defects();
        if let Some(d) = defects.first() {
            return Err(Error::NotC1(format!(
                "{}: jump at t = {} (value {:e}, slope {:e})",
                self.name, d.knot, d.value_jump, d.slope_jump
            )));
        }
        Ok(self.piecewise_derivative())
    }

    /// Piecewise derivative without the C¹ check (distributional parts at
    /// knots are dropped).
    pub fn piecewise_derivative(&self) -> Self {
        self.map_pieces(format!("{}'", self.name), Polynomial::derivative)
    }

    /// `∫₀^∞ f`.
    pub fn total_integral(&self) -> f64 {
        self.pieces.iter().map(|p| p.poly.integral(p.from, p.to)).sum()
    }

    /// `‖f‖₂²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.pieces.iter().map(|p| p.poly.mul(&p.poly).integral(p.from, p.to)).sum()
    }

    /// `ν_σ(F) = ∫₀^∞ t^σ |F(t)| dt`, exact per sign-constant sub-interval.
    pub fn nu_sigma(&self, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("ν_σ needs σ ≥ 0, got {sigma}")));
        }
        let mut total = 0.0;
        for piece in &self.pieces {
            let mut cuts = vec![piece.from];
            cuts.extend(piece.poly.sign_changes(piece.from, piece.to));
            cuts.push(piece.to);
            for w in cuts.windows(2) {
                total += weighted_moment(&piece.poly, sigma, w[0], w[1]).abs();
            }
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::NonFinite(format!("ν_{sigma}({})", self.name)))
        }
    }

    /// `K_λ f (x) = f(λx)`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveLambda(lambda));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { from: p.from / lambda, to: p.to / lambda, poly: p.poly.dilate(lambda) })
            .collect();
        Ok(Self { name: format!("K_{lambda} {}", self.name), pieces })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_pieces(format!("{c}·{}", self.name), |p| p.scale(c))
    }

    /// Pointwise sum on the union of both knot sets.
    pub fn add(&self, other: &Self) -> Self {
        let mut knots = self.knots();
        knots.extend(other.knots());
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let piece_on = |k: &Self, mid: f64| -> Polynomial {
            match k.piece_index(mid) {
                Some(i) => k.pieces[i].poly.clone(),
                None => Polynomial::zero(),
            }
        };
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                Piece { from: w[0], to: w[1], poly: piece_on(self, mid).add(&piece_on(other, mid)) }
            })
            .collect();
        Self { name: format!("{} + {}", self.name, other.name), pieces }
    }

    /// `V f = f − 2 K₂ f`, which annihilates `∫ f` and multiplies the
    /// Mellin transform by `1 − 2^{1−s}`.
    pub fn v_transform(&self) -> Self {
        let halved = self.dilate(2.0).expect("2 > 0").scale(-2.0);
        self.add(&halved).with_name(format!("V {}", self.name))
    }

    fn c1_defects(&self) -> Vec<C1Defect> {
        let mut defects = Vec::new();
        let zero = Polynomial::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let next = self.pieces.get(i + 1).map_or(&zero, |q| &q.poly);
            let k = p.to;
            let scale = |q: &Polynomial| -> f64 {
                q.coeffs().iter().enumerate().map(|(j, c)| c.abs() * k.abs().powi(j as i32)).sum::<f64>()
            };
            let (dp, dn) = (p.poly.derivative(), next.derivative());
            let value_jump = (p.poly.eval(k) - next.eval(k)).abs();
            let slope_jump = (dp.eval(k) - dn.eval(k)).abs();
            let value_tol = C1_TOLERANCE * (1.0 + scale(&p.poly) + scale(next));
            let slope_tol = C1_TOLERANCE * (1.0 + scale(&dp) + scale(&dn));
            if value_jump > value_tol || slope_jump > slope_tol {
                defects.push(C1Defect { knot: k, value_jump, slope_jump });
            }
        }
        defects
    }

    /// Checks the good-kernel conditions. Knot 0 needs no check: only the
    /// one-sided derivative exists there.
    pub fn validate(&self) -> KernelValidationReport {
        let c1_defects = self.c1_defects();
        let nu1_fprime = self.piecewise_derivative().nu_sigma(1.0).unwrap_or(f64::INFINITY);
        let a = self.support_bound();
        let sup_tf = (0..=400)
            .map(|i| a * 10f64.powf(-3.0 + 4.0 * i as f64 / 400.0))
            .map(|t| t * self.value_at(t).abs())
            .fold(0.0, f64::max);
        let tail_tf = 10.0 * a * self.value_at(10.0 * a).abs();
        let is_good = c1_defects.is_empty() && nu1_fprime.is_finite();
        let mut notes = String::new();
        if is_good {
            notes.push_str("C¹ at every knot; compact support gives t·f(t) = 0 beyond A");
        } else {
            for d in &c1_defects {
                notes.push_str(&format!(
                    "C¹ defect at t = {}: value jump {:e}, slope jump {:e}; ",
                    d.knot, d.value_jump, d.slope_jump
                ));
            }
            if !nu1_fprime.is_finite() {
                notes.push_str("ν₁(f') is not finite");
            }
        }
        KernelValidationReport {
            is_good,
            c1_defects,
            nu1_fprime,
            sup_tf,
            tail_tf,
            notes: notes.trim_end_matches("; ").to_string(),
        }
    }

    pub fn is_good(&self) -> bool {
        self.c1_defects().is_empty()
    }
}

/// `∫_a^b t^σ p(t) dt` in closed form.
pub(crate) fn weighted_moment(p: &Polynomial, sigma: f64, a: f64, b: f64) -> f64 {
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let e = sigma + j as f64 + 1.0;
            let lower = if a == 0.0 { 0.0 } else { a.powf(e) };
            c * (b.powf(e) - lower) / e
        })
        .sum()
}

impl KernelLike for PiecewiseKernel {
    fn value(&self, x: f64) -> f64 {
        self.value_at(x)
    }

    fn breakpoints(&self, lo: f64, hi: f64, limit: usize) -> Vec<f64> {
        let mut pts: Vec<f64> = self.knots().into_iter().filter(|&k| k >= lo && k <= hi).collect();
        if pts.len() > limit {
            pts.drain(..pts.len() - limit);
        }
        pts
    }

    fn reciprocal_tail(&self) -> Option<ReciprocalTail> {
        Some(ReciprocalTail { from: self.support_bound(), coeff: 0.0 })
    }
}
