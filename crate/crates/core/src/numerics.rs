//! Deterministic quadrature and series summation.
//!
//! Everything here is a pure function of its inputs: the same integrand,
//! interval, breakpoints and [`QuadratureConfig`] give bit-identical results.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Values that can be integrated: real or complex.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Tolerances and budgets for every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of panel bisections. Panels created by registered
    /// breakpoints are not counted.
    pub max_subdivisions: usize,
    /// Default start of an analytic tail when a [`Tail`] carries no cutoff.
    pub tail_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cutoff: 100.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_subdivisions >= 1
            && self.tail_cutoff > 0.0
            && self.tail_cutoff.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid quadrature config {self:?}")))
        }
    }

    /// Error target for a result of size `value`.
    #[inline]
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }

    /// Same config with both tolerances tightened to at most `tol`.
    pub fn tightened(&self, tol: f64) -> Self {
        Self {
            abs_tol: self.abs_tol.min(tol),
            rel_tol: self.rel_tol.min(tol),
            ..*self
        }
    }
}

/// Outcome of an integral or series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl<V: Scalar> IntegrationResult<V> {
    /// Turns an unconverged result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                value: self.value.magnitude(),
                error_estimate: self.error_estimate,
            })
        }
    }

    fn map<W>(self, f: impl FnOnce(V) -> W) -> IntegrationResult<W> {
        IntegrationResult {
            value: f(self.value),
            error_estimate: self.error_estimate,
            subdivisions_used: self.subdivisions_used,
            converged: self.converged,
        }
    }
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; the
// odd-indexed nodes are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    /// insertion order, breaks heap ties deterministically
    seq: usize,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn gauss_kronrod<V: Scalar>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let error = (kronrod - gauss).magnitude();
    (kronrod, error)
}

fn sorted_breaks(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p.is_finite() && p > a && p < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(a);
    out.extend(pts);
    out.push(b);
    out
}

/// Integrates `f` over `[a, b]` by adaptive Gauss–Kronrod (7/15) refinement.
///
/// Non-convergence is not an error here: the result carries
/// `converged = false` (see [`IntegrationResult::require_converged`]).
pub fn integrate_finite<V: Scalar>(
    f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    integrate_with_breakpoints(f, a, b, &[], cfg)
}

/// Like [`integrate_finite`], but the interval is first split at every
/// breakpoint strictly inside `(a, b)`. Register the points where the
/// integrand or its low derivatives jump.
pub fn integrate_with_breakpoints<V: Scalar>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    cfg.validate()?;

    let knots = sorted_breaks(a, b, breakpoints);
    let mut heap = BinaryHeap::with_capacity(knots.len() + 2 * cfg.max_subdivisions);
    let mut done: Vec<Panel<V>> = Vec::new();
    let mut seq = 0usize;
    let mut total_err = 0.0;
    let mut total = V::default();
    for w in knots.windows(2) {
        let (value, error) = gauss_kronrod(&mut f, w[0], w[1]);
        total = total + value;
        total_err += error;
        heap.push(Panel { a: w[0], b: w[1], value, error, seq });
        seq += 1;
    }

    let mut subdivisions = 0;
    loop {
        if total_err <= cfg.target(total.magnitude()) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // panel too narrow to split further in double precision
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 64.0 * f64::EPSILON * mid.abs() {
            done.push(worst);
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            heap.push(worst);
            break;
        }
        subdivisions += 1;
        let (left, el) = gauss_kronrod(&mut f, worst.a, mid);
        let (right, er) = gauss_kronrod(&mut f, mid, worst.b);
        total = total - worst.value + left + right;
        total_err += el + er - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: left, error: el, seq });
        heap.push(Panel { a: mid, b: worst.b, value: right, error: er, seq: seq + 1 });
        seq += 2;
    }

    // Re-sum in interval order so the result does not depend on the running
    // update history.
    done.extend(heap.into_vec());
    done.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = V::default();
    let mut error = 0.0;
    for p in &done {
        value = value + p.value;
        error += p.error;
    }
    let converged = error <= cfg.target(value.magnitude());
    Ok(IntegrationResult { value, error_estimate: error, subdivisions_used: subdivisions, converged })
}

/// Analytic tail `c / x^{1+δ}` valid for `x ≥ cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail<V> {
    pub coeff: V,
    pub excess: f64,
    pub cutoff: Option<f64>,
}

impl<V: Scalar> Tail<V> {
    /// Tail `c / x²`.
    pub fn inverse_square(coeff: V, cutoff: Option<f64>) -> Self {
        Self { coeff, excess: 1.0, cutoff }
    }

    /// `∫_T^∞ c x^{-1-δ} dx = c / (δ T^δ)`.
    pub fn integral_from(&self, t: f64) -> V {
        self.coeff * (1.0 / (self.excess * t.powf(self.excess)))
    }
}

/// Integrates `f` over `[a, ∞)`.
///
/// With a tail descriptor the integral is split at the cutoff `T` (default
/// `cfg.tail_cutoff`, clamped to `≥ a`): quadrature on `[a, T]` plus the
/// closed-form tail. Without one, `x = a + u/(1−u)` maps the half-line onto
/// `[0, 1)`.
pub fn integrate_semi_infinite<V: Scalar>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    tail: Option<Tail<V>>,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidInterval { a, b: f64::INFINITY });
    }
    cfg.validate()?;
    match tail {
        Some(tail) => {
            if !(tail.excess > 0.0) || !tail.excess.is_finite() {
                return Err(Error::InvalidTail(format!("decay excess δ = {} must be > 0", tail.excess)));
            }
            let cut = tail.cutoff.unwrap_or(cfg.tail_cutoff).max(a);
            if !(cut > 0.0) {
                return Err(Error::InvalidTail(format!("cutoff {cut} must be > 0")));
            }
            let tail_value = tail.integral_from(cut);
            if cut > a {
                let head = integrate_with_breakpoints(f, a, cut, breakpoints, cfg)?;
                Ok(head.map(|v| v + tail_value))
            } else {
                Ok(IntegrationResult { value: tail_value, error_estimate: 0.0, subdivisions_used: 0, converged: true })
            }
        }
        None => {
            let mapped: Vec<f64> = breakpoints
                .iter()
                .filter(|&&x| x > a && x.is_finite())
                .map(|&x| (x - a) / (1.0 + (x - a)))
                .collect();
            integrate_with_breakpoints(
                |u| {
                    let w = 1.0 - u;
                    f(a + u / w) * (1.0 / (w * w))
                },
                0.0,
                1.0,
                &mapped,
                cfg,
            )
        }
    }
}

/// Sums `Σ_{n≥1} (−1)^{n−1} a_n` with the Cohen–Rodriguez Villegas–Zagier
/// acceleration (a Chebyshev-weighted Euler transform).
///
/// The term magnitudes must be nonincreasing; this is checked on the first
/// 32 terms. The error estimate is the change between the last two
/// transform orders.
pub fn sum_alternating<V: Scalar>(
    mut a_n: impl FnMut(u64) -> V,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    cfg.validate()?;
    const STEP: usize = 8;
    // (3 + √8)^n overflows f64 past n ≈ 400
    const MAX_TERMS: usize = 320;

    let mut terms: Vec<V> = (1..=32).map(&mut a_n).collect();
    for (k, w) in terms.windows(2).enumerate() {
        let (m0, m1) = (w[0].magnitude(), w[1].magnitude());
        if !m0.is_finite() || !m1.is_finite() || m1 > m0 * (1.0 + 1e-12) {
            return Err(Error::InvalidSeries(format!(
                "|a_{}| = {m1} exceeds |a_{}| = {m0}",
                k + 2,
                k + 1
            )));
        }
    }

    let mut previous: Option<V> = None;
    let mut n = 16;
    let mut rounds = 0;
    loop {
        while terms.len() < n {
            terms.push(a_n(terms.len() as u64 + 1));
        }
        let value = cvz(&terms[..n]);
        rounds += 1;
        if let Some(prev) = previous {
            let err = (value - prev).magnitude();
            if err <= cfg.target(value.magnitude()) || n + STEP > MAX_TERMS {
                return Ok(IntegrationResult {
                    value,
                    error_estimate: err,
                    subdivisions_used: rounds,
                    converged: err <= cfg.target(value.magnitude()),
                });
            }
        }
        previous = Some(value);
        n += STEP;
    }
}

fn cvz<V: Scalar>(terms: &[V]) -> V {
    let n = terms.len();
    let nf = n as f64;
    let mut d = (3.0 + 8.0f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = V::default();
    for (k, &term) in terms.iter().enumerate() {
        let kf = k as f64;
        c = b - c;
        s = s + term * c;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s * (1.0 / d)
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Trigamma `ψ₁(x) = Σ_{k≥0} (x+k)^{-2}` for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut z = x;
    while z < 12.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    // asymptotic series with Bernoulli numbers B₂..B₁₂
    let w = 1.0 / (z * z);
    let series = w
        * (1.0 / 6.0
            + w * (-1.0 / 30.0 + w * (1.0 / 42.0 + w * (-1.0 / 30.0 + w * (5.0 / 66.0 + w * (-691.0 / 2730.0))))));
    acc + (1.0 + series) / z + 0.5 * w
}
