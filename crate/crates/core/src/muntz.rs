//! The Müntz operator `P` and the multiplicative convolution `T_F`.
//!
//! `Pf` is evaluated two ways:
//!
//! * direct series `Σ_{n ≤ A/x} f(nx) − (1/x)∫f`, exact up to rounding for
//!   a kernel supported on `[0, A]`;
//! * convolution `∫₀^A ρ(t/x) f'(t) dt`, by quadrature with a breakpoint at
//!   every kink `t = nx` of the sawtooth.
//!
//! The module also carries the `L²` inner products between dilations of
//! `ρ₁` and of `Pf` that the Gram systems in [`crate::approx`] are built from.

use alloc::vec::Vec;

#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernels::{KernelLike, PiecewiseKernel, ReciprocalTail, SpecialFunction};
use crate::numerics::{integrate_with_breakpoints, trigamma, CompensatedSum, QuadratureConfig};

/// Above this many terms the direct series switches to compensated
/// summation.
pub const COMPENSATED_THRESHOLD: u64 = 1_000_000;

/// Most kink breakpoints registered for one integral; beyond that the
/// adaptive refinement takes over.
pub const BREAKPOINT_LIMIT: usize = 1000;

/// Most kinks of `ρ(t/x)` the convolution path will register.
const CONVOLUTION_PANEL_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MuntzMethod {
    DirectSeries,
    Convolution,
}

/// `Pf` for one kernel, with `∫f` and `A` cached.
#[derive(Debug, Clone)]
pub struct MuntzEvaluator {
    kernel: PiecewiseKernel,
    derivative: Option<PiecewiseKernel>,
    total_integral: f64,
    support_bound: f64,
    method: MuntzMethod,
    cfg: QuadratureConfig,
}

impl MuntzEvaluator {
    pub fn new(kernel: PiecewiseKernel) -> Self {
        let derivative = kernel.derivative().ok();
        Self {
            total_integral: kernel.total_integral(),
            support_bound: kernel.support_bound(),
            derivative,
            kernel,
            method: MuntzMethod::DirectSeries,
            cfg: QuadratureConfig::default(),
        }
    }

    /// Selects the evaluation route used by [`KernelLike::value`].
    pub fn with_method(mut self, method: MuntzMethod, cfg: QuadratureConfig) -> Result<Self> {
        if method == MuntzMethod::Convolution && self.derivative.is_none() {
            return Err(Error::NotC1(self.kernel.name().into()));
        }
        self.method = method;
        self.cfg = cfg;
        Ok(self)
    }

    pub fn kernel(&self) -> &PiecewiseKernel {
        &self.kernel
    }

    pub fn total_integral(&self) -> f64 {
        self.total_integral
    }

    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    pub fn method(&self) -> MuntzMethod {
        self.method
    }

    /// `f'`, when the kernel is C¹.
    pub fn derivative(&self) -> Option<&PiecewiseKernel> {
        self.derivative.as_ref()
    }

    fn require_derivative(&self) -> Result<&PiecewiseKernel> {
        self.derivative
            .as_ref()
            .ok_or_else(|| Error::NotC1(self.kernel.name().into()))
    }

    /// `Pf(x)` by the direct series; `x` must be positive.
    pub fn direct(&self, x: f64) -> f64 {
        let pieces = self.kernel.pieces();
        let a = self.support_bound;
        let terms = (a / x).floor();
        let mut idx = 0;
        let mut next = |n: u64| -> Option<f64> {
            let t = n as f64 * x;
            if t > a {
                return None;
            }
            while pieces[idx].to < t {
                idx += 1;
            }
            Some(pieces[idx].poly.eval(t))
        };
        let sum = if terms > COMPENSATED_THRESHOLD as f64 {
            let mut acc = CompensatedSum::default();
            let mut n = 1;
            while let Some(v) = next(n) {
                acc.add(v);
                n += 1;
            }
            acc.value()
        } else {
            let mut acc = 0.0;
            let mut n = 1;
            while let Some(v) = next(n) {
                acc += v;
                n += 1;
            }
            acc
        };
        sum - self.total_integral / x
    }

    /// `Pf(x) = ∫₀^A ρ(t/x) f'(t) dt` by quadrature.
    pub fn convolution(&self, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        check_positive(x)?;
        let fp = self.require_derivative()?;
        apply_t(fp, &SpecialFunction::Rho1, x, cfg)
    }

    /// `⟨K_a Pf, K_b Pf⟩ = ∫₀^∞ Pf(ax) Pf(bx) dx` for `a, b > 0`.
    ///
    /// Beyond `A/min(a, b)` the integrand is exactly `I²/(ab x²)`.
    pub fn dilation_inner(&self, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
        check_positive(a)?;
        check_positive(b)?;
        let i = self.total_integral;
        let cut = self.support_bound / a.min(b);
        let mut breaks = self.dilated_breaks(a, cut);
        breaks.extend(self.dilated_breaks(b, cut));
        let head = integrate_with_breakpoints(|x| self.direct(a * x) * self.direct(b * x), 0.0, cut, &breaks, cfg)?
            .require_converged()?;
        Ok(head.value + i * i / (a * b * cut))
    }

    /// `⟨f, K_a Pf⟩ = ∫₀^A f(x) Pf(ax) dx`.
    pub fn target_inner(&self, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
        check_positive(a)?;
        let cut = self.support_bound;
        let mut breaks = self.dilated_breaks(a, cut);
        breaks.extend(self.kernel.knots());
        let r = integrate_with_breakpoints(
            |x| self.kernel.value_at(x) * self.direct(a * x),
            0.0,
            cut,
            &breaks,
            cfg,
        )?
        .require_converged()?;
        Ok(r.value)
    }

    /// `‖Pf‖₂²`.
    pub fn l2_norm_sq(&self, cfg: &QuadratureConfig) -> Result<f64> {
        self.dilation_inner(1.0, 1.0, cfg)
    }

    /// Kinks of `x ↦ Pf(λx)` in `(0, hi]`.
    pub(crate) fn dilated_breaks(&self, lambda: f64, hi: f64) -> Vec<f64> {
        self.breakpoints(0.0, lambda * hi, BREAKPOINT_LIMIT)
            .into_iter()
            .map(|p| p / lambda)
            .collect()
    }
}

impl KernelLike for MuntzEvaluator {
    fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.method {
            MuntzMethod::DirectSeries => self.direct(x),
            MuntzMethod::Convolution => self.convolution(x, &self.cfg).unwrap_or(f64::NAN),
        }
    }

    /// `Pf` has derivative jumps at `κ/n` for every knot `κ > 0`.
    fn breakpoints(&self, lo: f64, hi: f64, limit: usize) -> Vec<f64> {
        if !(hi > 0.0) || limit == 0 {
            return Vec::new();
        }
        let mut pts = Vec::new();
        for kappa in self.kernel.knots().into_iter().filter(|&k| k > 0.0) {
            let n_min = (kappa / hi).ceil().max(1.0);
            let n_max = if lo > 0.0 { (kappa / lo).floor() } else { f64::INFINITY };
            let n_max = n_max.min(n_min + limit as f64);
            let mut n = n_min;
            while n <= n_max {
                let p = kappa / n;
                if p >= lo && p <= hi {
                    pts.push(p);
                }
                n += 1.0;
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.len() > limit {
            pts.drain(..pts.len() - limit);
        }
        pts
    }

    fn reciprocal_tail(&self) -> Option<ReciprocalTail> {
        Some(ReciprocalTail { from: self.support_bound, coeff: -self.total_integral })
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveX(x))
    }
}

/// `Pf(x)` by the direct series.
pub fn muntz_direct(k: &PiecewiseKernel, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(MuntzEvaluator::new(k.clone()).direct(x))
}

/// `Pf(x)` by convolution of `f'` with `ρ₁`.
pub fn muntz_convolution(k: &PiecewiseKernel, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_positive(x)?;
    let fp = k.derivative()?;
    apply_t(&fp, &SpecialFunction::Rho1, x, cfg)
}

/// `T_F G(x) = ∫₀^∞ G(x/t) F(t) dt` for a compactly supported piecewise
/// polynomial `F`.
pub fn apply_t(f: &PiecewiseKernel, g: &impl KernelLike, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_positive(x)?;
    let nu = f.nu_sigma(0.5)?;
    if !nu.is_finite() {
        return Err(Error::NonFinite("ν_{1/2}(F)".into()));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let a = f.support_bound();
    // a kink of G at κ sits at t = x/κ
    let mut breaks: Vec<f64> = g
        .breakpoints(x / a, f64::INFINITY, CONVOLUTION_PANEL_LIMIT)
        .into_iter()
        .filter(|&k| k > 0.0)
        .map(|k| x / k)
        .collect();
    breaks.extend(f.knots());
    let r = integrate_with_breakpoints(
        |t| if t > 0.0 { g.value(x / t) * f.value_at(t) } else { 0.0 },
        0.0,
        a,
        &breaks,
        cfg,
    )?
    .require_converged()?;
    Ok(r.value)
}

/// Both sides of `‖Pf‖₂ ≤ ν_{1/2}(f') ‖ρ₁‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormBoundReport {
    pub pf_norm: f64,
    pub nu_half_fprime: f64,
    pub rho1_norm: f64,
    pub bound: f64,
    /// `bound − pf_norm`
    pub slack: f64,
    pub holds: bool,
}

pub fn operator_norm_bound_check(k: &PiecewiseKernel, cfg: &QuadratureConfig) -> Result<NormBoundReport> {
    let eval = MuntzEvaluator::new(k.clone());
    let fp = eval.require_derivative()?;
    let nu_half_fprime = fp.nu_sigma(0.5)?;
    let pf_norm = eval.l2_norm_sq(cfg)?.max(0.0).sqrt();
    let rho1_norm = rho1_dilation_inner(1, 1, cfg)?.sqrt();
    let bound = nu_half_fprime * rho1_norm;
    let slack = bound - pf_norm;
    Ok(NormBoundReport {
        pf_norm,
        nu_half_fprime,
        rho1_norm,
        bound,
        slack,
        holds: slack >= -cfg.target(bound),
    })
}

/// `L(ε) = ∫_ε^∞ Σ_n |f(nx)| dx/x` against `R(ε) = (1/ε)∫_ε^∞ |f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BurnolReport {
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn burnol_bound_check(k: &PiecewiseKernel, epsilon: f64, cfg: &QuadratureConfig) -> Result<BurnolReport> {
    check_positive(epsilon)?;
    let a = k.support_bound();
    // sign changes of f are kinks of |f|
    let mut kinks = k.knots();
    for p in k.pieces() {
        kinks.extend(p.poly.sign_changes(p.from, p.to));
    }
    let mut rhs = 0.0;
    for p in k.pieces() {
        let lo = p.from.max(epsilon);
        if lo >= p.to {
            continue;
        }
        let mut cuts = alloc::vec![lo];
        cuts.extend(p.poly.sign_changes(lo, p.to));
        cuts.push(p.to);
        rhs += cuts.windows(2).map(|w| p.poly.integral(w[0], w[1]).abs()).sum::<f64>();
    }
    rhs /= epsilon;
    if epsilon >= a {
        return Ok(BurnolReport { epsilon, lhs: 0.0, rhs, holds: true });
    }
    let n_max = (a / epsilon).floor() as usize;
    let mut breaks = Vec::new();
    for n in 1..=n_max.min(BREAKPOINT_LIMIT * 10) {
        breaks.extend(kinks.iter().filter(|&&c| c > 0.0).map(|&c| c / n as f64));
    }
    let r = integrate_with_breakpoints(
        |x| {
            let mut s = 0.0;
            let mut n = 1.0;
            while n * x <= a {
                s += k.value_at(n * x).abs();
                n += 1.0;
            }
            s / x
        },
        epsilon,
        a,
        &breaks,
        cfg,
    )?
    .require_converged()?;
    Ok(BurnolReport { epsilon, lhs: r.value, rhs, holds: r.value <= rhs + r.error_estimate })
}

/// Limit of `Pf(x)` as `x → 0⁺` against `−f(0)/2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginLimitReport {
    /// `(x, Pf(x))` at `x = 2^{-j}`, `j = 4..=20`
    pub samples: Vec<(f64, f64)>,
    pub limit: f64,
    pub expected: f64,
    pub deviation: f64,
    /// spread of the last Richardson estimates
    pub spread: f64,
    pub holds: bool,
}

/// Tolerance on `|limit + f(0)/2|`.
pub const ORIGIN_LIMIT_TOLERANCE: f64 = 1e-4;

pub fn origin_limit_check(k: &PiecewiseKernel, _cfg: &QuadratureConfig) -> Result<OriginLimitReport> {
    if !k.is_good() {
        return Err(Error::NotGoodKernel(k.name().into()));
    }
    let eval = MuntzEvaluator::new(k.clone());
    let samples: Vec<(f64, f64)> = (4..=20)
        .map(|j| {
            let x = 0.5f64.powi(j);
            (x, eval.direct(x))
        })
        .collect();
    // Pf(x) = −f(0)/2 − x f'(0)/12 + O(x²): one Richardson step removes the
    // linear term
    let richardson: Vec<f64> = samples.windows(2).map(|w| 2.0 * w[1].1 - w[0].1).collect();
    let limit = *richardson.last().expect("16 estimates");
    let spread = richardson[richardson.len() - 4..]
        .iter()
        .map(|r| (r - limit).abs())
        .fold(0.0, f64::max);
    if !(spread <= ORIGIN_LIMIT_TOLERANCE) {
        return Err(Error::NonConvergence { value: limit, error_estimate: spread });
    }
    let expected = -0.5 * k.value_at(0.0);
    let deviation = (limit - expected).abs();
    Ok(OriginLimitReport { samples, limit, expected, deviation, spread, holds: deviation <= ORIGIN_LIMIT_TOLERANCE })
}

/// A positive rational `num/den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ratio {
    num: u64,
    den: u64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(alloc::format!("ratio {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl core::fmt::Display for Ratio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `∫₀^∞ p(u) u^{-2} du` for `p` periodic with period `L` and
/// `p(u) = O(u²)` at 0: fold the half-line onto one period,
/// `∫₀^L p(v) [v^{-2} + L^{-2} ψ₁(1 + v/L)] dv`.
fn periodic_inverse_square(
    p: impl Fn(f64) -> f64,
    period: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let l2 = period * period;
    let r = integrate_with_breakpoints(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            p(v) * (1.0 / (v * v) + trigamma(1.0 + v / period) / l2)
        },
        0.0,
        period,
        breaks,
        cfg,
    )?
    .require_converged()?;
    Ok(r.value)
}

fn multiples(step: f64, upto: f64) -> impl Iterator<Item = f64> {
    let count = (upto / step).round() as u64;
    (1..count).map(move |k| k as f64 * step)
}

/// `⟨K_a ρ₁, K_b ρ₁⟩ = ∫₀^∞ ρ(1/(at)) ρ(1/(bt)) dt` for positive integers.
///
/// With `u = 1/t` the integrand is `ρ(u/a)ρ(u/b)/u²`, whose numerator has
/// period `lcm(a, b)`; the half-line is folded onto one period.
pub fn rho1_dilation_inner(a: u64, b: u64, cfg: &QuadratureConfig) -> Result<f64> {
    if a == 0 || b == 0 {
        return Err(Error::NonPositiveX(0.0));
    }
    let g = gcd(a, b);
    let (ar, br) = (a / g, b / g);
    let period = (ar * br) as f64;
    let (af, bf) = (ar as f64, br as f64);
    let mut breaks: Vec<f64> = multiples(af, period).collect();
    breaks.extend(multiples(bf, period));
    let p = |v: f64| {
        let x = v / af;
        let y = v / bf;
        (x - x.floor()) * (y - y.floor())
    };
    Ok(periodic_inverse_square(p, period, &breaks, cfg)? / g as f64)
}

/// `⟨χ, K_a ρ₁⟩ = ∫₀¹ ρ(1/(ax)) dx` for a positive integer `a`.
///
/// Equals `(ln a)/a + (1/a)∫₀¹ w ψ₁(1+w) dw`; the remaining integral is
/// done by quadrature.
pub fn chi_rho1_inner(a: u64, cfg: &QuadratureConfig) -> Result<f64> {
    if a == 0 {
        return Err(Error::NonPositiveX(0.0));
    }
    let r = integrate_with_breakpoints(|w| w * trigamma(1.0 + w), 0.0, 1.0, &[], cfg)?.require_converged()?;
    let af = a as f64;
    Ok((af.ln() + r.value) / af)
}

/// What an autocorrelation is taken of.
#[derive(Debug, Clone, Copy)]
pub enum Autocorrelated<'a> {
    Rho1,
    Muntz(&'a MuntzEvaluator),
}

/// `A(x) = ∫₀^∞ g(t) g(xt) dt` at a rational point.
pub fn autocorrelation(g: Autocorrelated<'_>, x: Ratio, cfg: &QuadratureConfig) -> Result<f64> {
    // A(p/q) = q ⟨K_p g, K_q g⟩
    let q = x.den() as f64;
    match g {
        Autocorrelated::Rho1 => Ok(q * rho1_dilation_inner(x.num(), x.den(), cfg)?),
        Autocorrelated::Muntz(eval) => Ok(q * eval.dilation_inner(x.num() as f64, x.den() as f64, cfg)?),
    }
}

/// Cut-off for the direct `ρ₁` autocorrelation at irrational points.
const RHO1_DIRECT_CUTOFF: f64 = 20_000.0;

/// `A(x)` at an arbitrary real `x > 0`.
///
/// For `g = ρ₁` this integrates `ρ(u)ρ(u/x)/u²` up to a fixed cut-off and
/// uses the equidistributed mean `1/4` beyond it, which is only right for
/// irrational `x`; prefer [`autocorrelation`] at rational points.
pub fn autocorrelation_real(g: Autocorrelated<'_>, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_positive(x)?;
    match g {
        Autocorrelated::Muntz(eval) => eval.dilation_inner(1.0, x, cfg),
        Autocorrelated::Rho1 => {
            let cut = RHO1_DIRECT_CUTOFF;
            let mut breaks: Vec<f64> = multiples(1.0, cut).collect();
            breaks.extend(multiples(x, cut));
            let head = integrate_with_breakpoints(
                |u| {
                    if u <= 0.0 {
                        return 0.0;
                    }
                    let y = u / x;
                    (u - u.floor()) * (y - y.floor()) / (u * u)
                },
                0.0,
                cut,
                &breaks,
                &QuadratureConfig { max_subdivisions: cfg.max_subdivisions.max(breaks.len()), ..*cfg },
            )?
            .require_converged()?;
            Ok(head.value + 0.25 / cut)
        }
    }
}

/// `A(x)` on a list of ratios.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AutocorrelationTable {
    pub ratios: Vec<Ratio>,
    pub values: Vec<f64>,
}

pub fn autocorrelation_table(
    g: Autocorrelated<'_>,
    ratios: &[Ratio],
    cfg: &QuadratureConfig,
) -> Result<AutocorrelationTable> {
    let values = ratios
        .iter()
        .map(|&r| autocorrelation(g, r, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(AutocorrelationTable { ratios: ratios.to_vec(), values })
}
