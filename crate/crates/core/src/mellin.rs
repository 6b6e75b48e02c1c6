//! Mellin transforms in the critical strip, `ζ`, and the Müntz formula.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernels::{KernelLike, PiecewiseKernel};
use crate::muntz::MuntzEvaluator;
use crate::numerics::{integrate_with_breakpoints, sum_alternating, QuadratureConfig};

/// `s = σ + it`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub const fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    /// Errors unless `0 < σ < 1`.
    pub fn require_strip(self) -> Result<Self> {
        if self.sigma > 0.0 && self.sigma < 1.0 && self.t.is_finite() {
            Ok(self)
        } else {
            Err(Error::OutOfStrip(format!("s = {} + {}i needs 0 < σ < 1", self.sigma, self.t)))
        }
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self { sigma: z.re, t: z.im }
    }
}

impl core::fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}{:+}i", self.sigma, self.t)
    }
}

/// `x^z` for `x ≥ 0`, with `0^z = 0` when `ℜz > 0`.
fn real_pow(x: f64, z: Complex64) -> Complex64 {
    if x == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (z * x.ln()).exp()
    }
}

/// `f̂(s) = ∫₀^∞ t^{s−1} f(t) dt` in closed form, piece by piece.
pub fn mellin_exact(k: &PiecewiseKernel, s: ComplexPoint) -> Result<Complex64> {
    let s = s.to_complex();
    let mut total = Complex64::new(0.0, 0.0);
    for piece in k.pieces() {
        let (a, b) = (piece.from, piece.to);
        for (j, &c) in piece.poly.coeffs().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let z = s + j as f64;
            if a == 0.0 && z.re <= 0.0 {
                return Err(Error::PoleHit { power: j });
            }
            total += if z == Complex64::new(0.0, 0.0) {
                Complex64::new(c * (b / a).ln(), 0.0)
            } else {
                (real_pow(b, z) - real_pow(a, z)) * c / z
            };
        }
    }
    Ok(total)
}

/// The functions whose Mellin transforms are taken by quadrature.
#[derive(Debug, Clone, Copy)]
pub enum MellinSubject<'a> {
    /// `ρ₁(x) = ρ(1/x)`
    Rho1,
    /// `Pf` of a good kernel
    Muntz(&'a MuntzEvaluator),
}

/// Cut-off in `u = 1/x` for the `ρ₁` transform.
const RHO1_CUTOFF: f64 = 64.0;

/// `∫₀^∞ x^{s−1} g(x) dx` by quadrature.
pub fn mellin_quadrature(g: MellinSubject<'_>, s: ComplexPoint, cfg: &QuadratureConfig) -> Result<Complex64> {
    s.require_strip()?;
    match g {
        MellinSubject::Rho1 => mellin_rho1(s.to_complex(), cfg),
        MellinSubject::Muntz(eval) => mellin_pf(eval, s.to_complex(), cfg),
    }
}

/// `∫₁^∞ x^{s−2} dx + ∫₁^∞ u^{−s−1} ρ(u) du`; the second integral is done
/// on `[1, U]` and closed with Euler–Maclaurin beyond `U`.
fn mellin_rho1(s: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let u_max = RHO1_CUTOFF;
    let breaks: Vec<f64> = (2..u_max as u64).map(|k| k as f64).collect();
    let head = integrate_with_breakpoints(
        |u: f64| real_pow(u, -s - 1.0) * (u - u.floor()),
        1.0,
        u_max,
        &breaks,
        cfg,
    )?
    .require_converged()?;
    let g0 = real_pow(u_max, -s - 1.0);
    let g2 = (s + 1.0) * (s + 2.0) * real_pow(u_max, -s - 3.0);
    let g4 = (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * real_pow(u_max, -s - 5.0);
    let tail = real_pow(u_max, -s) / (2.0 * s) - g0 / 12.0 + g2 / 720.0 - g4 / 30240.0;
    Ok(one / (one - s) + head.value + tail)
}

/// Lower end of the `Pf` quadrature, relative to `A`; the remainder below it
/// is `O(x₀^{2+σ})`.
const PF_INNER_CUTOFF: f64 = 1e-5;

/// `Pf = c₀ + c₁x + O(x²)` near 0 with `c₀ = −f(0)/2`, `c₁ = −f'(0)/12`;
/// the affine part is integrated exactly on `[0, A]`, the remainder by
/// quadrature on `[x₀, A]`, and `Pf = −I/x` exactly beyond `A`.
fn mellin_pf(eval: &MuntzEvaluator, s: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let k = eval.kernel();
    let fp = eval.derivative().ok_or_else(|| Error::NotGoodKernel(k.name().into()))?;
    let a = eval.support_bound();
    let i = eval.total_integral();
    let one = Complex64::new(1.0, 0.0);
    if a == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c0 = -0.5 * k.value_at(0.0);
    let c1 = -fp.value_at(0.0) / 12.0;
    let x0 = PF_INNER_CUTOFF * a;
    let breaks = eval.breakpoints(x0, a, crate::muntz::BREAKPOINT_LIMIT);
    let head = integrate_with_breakpoints(
        |x: f64| real_pow(x, s - 1.0) * (eval.direct(x) - c0 - c1 * x),
        x0,
        a,
        &breaks,
        cfg,
    )?
    .require_converged()?;
    let affine = real_pow(a, s) * c0 / s + real_pow(a, s + 1.0) * c1 / (s + 1.0);
    let tail = -real_pow(a, s - 1.0) * i / (one - s);
    Ok(head.value + affine + tail)
}

/// `ζ(s) = η(s)/(1 − 2^{1−s})` with the alternating series for `η`
/// accelerated; valid for `σ > 0`.
pub fn zeta(s: ComplexPoint, cfg: &QuadratureConfig) -> Result<Complex64> {
    let z = s.to_complex();
    if !(s.sigma > 0.0) {
        return Err(Error::OutOfStrip(format!("ζ needs σ > 0, got {}", s.sigma)));
    }
    if z == Complex64::new(1.0, 0.0) {
        return Err(Error::PoleAtOne);
    }
    let factor = Complex64::new(1.0, 0.0) - real_pow(2.0, 1.0 - z);
    if factor.norm() < 1e-12 {
        return Err(Error::InvalidArgument(format!("1 − 2^(1−s) vanishes at s = {s}")));
    }
    let eta = sum_alternating(|n| real_pow(n as f64, -z), cfg)?;
    if !eta.converged {
        return Err(Error::NonConvergence { value: eta.value.norm(), error_estimate: eta.error_estimate });
    }
    Ok(eta.value / factor)
}

/// `|ζ(s)/(−s) − ∫₀^∞ x^{s−1} ρ₁(x) dx|`.
pub fn verify_proto_muntz(s: ComplexPoint, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(proto_sides(s, cfg)?.residual())
}

/// Both sides of a Mellin identity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FormulaSides {
    pub s: ComplexPoint,
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl FormulaSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn proto_sides(s: ComplexPoint, cfg: &QuadratureConfig) -> Result<FormulaSides> {
    s.require_strip()?;
    let lhs = zeta(s, cfg)? / -s.to_complex();
    let rhs = mellin_quadrature(MellinSubject::Rho1, s, cfg)?;
    Ok(FormulaSides { s, lhs, rhs })
}

/// `ζ(s) f̂(s)` against `(Pf)^(s)`.
///
/// For `χ`, where `Pχ = −ρ₁`, this is the proto-Müntz check.
pub fn muntz_sides(k: &PiecewiseKernel, s: ComplexPoint, cfg: &QuadratureConfig) -> Result<FormulaSides> {
    s.require_strip()?;
    if k.pieces() == PiecewiseKernel::chi().pieces() {
        let p = proto_sides(s, cfg)?;
        return Ok(FormulaSides { s, lhs: -p.lhs, rhs: -p.rhs });
    }
    if !k.is_good() {
        return Err(Error::NotGoodKernel(k.name().into()));
    }
    let lhs = zeta(s, cfg)? * mellin_exact(k, s)?;
    let eval = MuntzEvaluator::new(k.clone());
    let rhs = mellin_quadrature(MellinSubject::Muntz(&eval), s, cfg)?;
    Ok(FormulaSides { s, lhs, rhs })
}

pub fn verify_muntz_formula(k: &PiecewiseKernel, s: ComplexPoint, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(muntz_sides(k, s, cfg)?.residual())
}

/// `|(Vf)^(s) − (1 − 2^{1−s}) f̂(s)|`, both sides in closed form.
pub fn v_factor_check(k: &PiecewiseKernel, s: ComplexPoint) -> Result<f64> {
    let z = s.to_complex();
    let factor = Complex64::new(1.0, 0.0) - real_pow(2.0, 1.0 - z);
    Ok((mellin_exact(&k.v_transform(), s)? - factor * mellin_exact(k, s)?).norm())
}

/// A grid dip of `|f̂|` that looks like a zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroCandidate {
    pub t_lo: f64,
    pub t_hi: f64,
    /// refined location of the minimum
    pub t: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroScanReport {
    pub line_sigma: f64,
    pub t_range: [f64; 2],
    pub grid_step: f64,
    pub min_modulus: f64,
    pub min_location: ComplexPoint,
    pub candidate_zeros: Vec<ZeroCandidate>,
    pub notes: Vec<String>,
}

/// A refined dip counts as a zero below this fraction of its bracket.
pub const ZERO_DIP_RATIO: f64 = 1e-6;

/// Scans `|f̂(σ + it)|` on a grid; dips are refined by golden-section search
/// and kept when they are deep and the phase turns across them.
///
/// This is evidence, not a proof that `f̂` has no zeros on the line.
pub fn scan_zeros(k: &PiecewiseKernel, sigma: f64, t_range: [f64; 2], grid_step: f64) -> Result<ZeroScanReport> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::OutOfStrip(format!("zero scans need 1/2 < σ < 1, got {sigma}")));
    }
    let [t_min, t_max] = t_range;
    if !(t_min <= t_max) || !(grid_step > 0.0) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad scan range [{t_min}, {t_max}] with step {grid_step}"
        )));
    }
    let value = |t: f64| mellin_exact(k, ComplexPoint::new(sigma, t));
    let count = ((t_max - t_min) / grid_step).floor() as usize + 1;
    let ts: Vec<f64> = (0..count).map(|i| t_min + i as f64 * grid_step).collect();
    let vals = ts.iter().map(|&t| value(t)).collect::<Result<Vec<_>>>()?;
    let mods: Vec<f64> = vals.iter().map(|v| v.norm()).collect();

    let mut notes = alloc::vec![String::from(
        "heuristic grid scan: absence of candidates is evidence, not a proof of zero-freeness"
    )];
    let (mut min_modulus, mut min_t) = (f64::INFINITY, t_min);
    for (&t, &m) in ts.iter().zip(&mods) {
        if m < min_modulus {
            min_modulus = m;
            min_t = t;
        }
    }
    if k.is_zero() {
        notes.push(String::from("degenerate input: the zero kernel has f̂ ≡ 0"));
    }

    let mut candidate_zeros = Vec::new();
    for i in 1..count.saturating_sub(1) {
        if !(mods[i] <= mods[i - 1] && mods[i] <= mods[i + 1]) || k.is_zero() {
            continue;
        }
        let (lo, hi) = (ts[i - 1], ts[i + 1]);
        let (t_ref, m_ref) = golden_min(|t| value(t).map(|v| v.norm()).unwrap_or(f64::INFINITY), lo, hi);
        let (t_best, m_best) = if m_ref < mods[i] { (t_ref, m_ref) } else { (ts[i], mods[i]) };
        if m_best < min_modulus {
            min_modulus = m_best;
            min_t = t_best;
        }
        let bracket = mods[i - 1].max(mods[i + 1]);
        let turn = (vals[i + 1] / vals[i - 1]).arg().abs();
        if m_best <= ZERO_DIP_RATIO * bracket && turn > core::f64::consts::FRAC_PI_2 {
            candidate_zeros.push(ZeroCandidate { t_lo: lo, t_hi: hi, t: t_best, modulus: m_best });
        }
    }
    Ok(ZeroScanReport {
        line_sigma: sigma,
        t_range,
        grid_step,
        min_modulus,
        min_location: ComplexPoint::new(sigma, min_t),
        candidate_zeros,
        notes,
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_finite;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_transform_examples() {
        let f = PiecewiseKernel::bump();
        let half = mellin_exact(&f, ComplexPoint::new(0.5, 0.0)).unwrap();
        assert!((half - c(48.0 / 35.0, 0.0)).norm() < 1e-15);
        let s = ComplexPoint::new(0.3, 4.0);
        let chi = mellin_exact(&PiecewiseKernel::chi(), s).unwrap();
        assert!((chi - c(1.0, 0.0) / s.to_complex()).norm() < 1e-15);
        assert!(matches!(mellin_exact(&f, ComplexPoint::new(0.0, 0.0)), Err(Error::PoleHit { power: 0 })));
    }

    #[test]
    fn exact_matches_quadrature() {
        let f = PiecewiseKernel::bump();
        let s = c(0.75, 5.0);
        let q = integrate_finite(|t: f64| real_pow(t, s - 1.0) * f.value_at(t), 0.0, 1.0, &cfg()).unwrap();
        let e = mellin_exact(&f, s.into()).unwrap();
        assert!((q.value - e).norm() < 1e-10);
    }

    #[test]
    fn zeta_values() {
        let two = zeta(ComplexPoint::new(2.0, 0.0), &cfg()).unwrap();
        assert!((two.re - core::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
        let half = zeta(ComplexPoint::new(0.5, 0.0), &cfg()).unwrap();
        assert!((half.re + 1.460_354_508_809_586_8).abs() < 1e-8 && half.im == 0.0);
        let zero = zeta(ComplexPoint::new(0.5, 14.134_725), &cfg()).unwrap();
        assert!(zero.norm() < 1e-5);
        assert_eq!(zeta(ComplexPoint::new(1.0, 0.0), &cfg()), Err(Error::PoleAtOne));
        let s = ComplexPoint::new(0.3, 7.0);
        let conj = zeta(ComplexPoint::new(0.3, -7.0), &cfg()).unwrap();
        assert!((zeta(s, &cfg()).unwrap().conj() - conj).norm() < 1e-14);
    }

    /// Euler–Maclaurin with `N = 40` and Bernoulli terms through `B₂₀`.
    fn em_zeta(s: Complex64) -> Complex64 {
        const B: [f64; 10] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
            -3617.0 / 510.0,
            43867.0 / 798.0,
            -174611.0 / 330.0,
        ];
        let n = 40.0;
        let mut acc: Complex64 = (1..40).map(|k| real_pow(k as f64, -s)).sum();
        acc += real_pow(n, 1.0 - s) / (s - 1.0) + real_pow(n, -s) * 0.5;
        // rising product s(s+1)…(s+2k−2) / (2k)!
        let mut rising = s;
        let mut fact = 2.0;
        for (k, b) in B.iter().enumerate() {
            let m = 2 * k + 1;
            acc += rising * real_pow(n, -s - m as f64) * (*b / fact);
            rising *= (s + m as f64) * (s + m as f64 + 1.0);
            fact *= ((m + 2) * (m + 3)) as f64;
        }
        acc
    }

    #[test]
    fn zeta_against_euler_maclaurin() {
        for (sig, t) in [(0.5, 0.0), (0.55, 2.5), (0.75, 10.0), (0.95, 20.0), (0.3, -7.0), (2.0, 1.0)] {
            let s = ComplexPoint::new(sig, t);
            let got = zeta(s, &cfg()).unwrap();
            let want = em_zeta(s.to_complex());
            assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "{s}: {got} vs {want}");
        }
        assert!((em_zeta(c(0.5, 0.0)).re + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!(em_zeta(c(0.5, 14.134_725_141_734_693)).norm() < 1e-12);
    }

    #[test]
    fn proto_muntz_examples() {
        for (s, tol) in [((0.5, 0.0), 1e-6), ((0.75, 10.0), 1e-5), ((0.6, 0.0), 1e-6)] {
            let r = verify_proto_muntz(ComplexPoint::new(s.0, s.1), &cfg()).unwrap();
            assert!(r <= tol, "s = {s:?}: {r}");
        }
        let v = mellin_quadrature(MellinSubject::Rho1, ComplexPoint::new(0.5, 0.0), &cfg()).unwrap();
        assert!((v.re - 2.920_709_017_619_173_6).abs() < 1e-8);
    }

    #[test]
    fn muntz_formula_examples() {
        let f = PiecewiseKernel::bump();
        let sides = muntz_sides(&f, ComplexPoint::new(0.5, 0.0), &cfg()).unwrap();
        assert!(sides.residual() <= 1e-6);
        assert!((sides.lhs.re + 1.460_354_508_809_586_8 * 48.0 / 35.0).abs() < 1e-8);
        assert!(verify_muntz_formula(&f, ComplexPoint::new(0.7, 3.0), &cfg()).unwrap() <= 1e-5);
        let chi = verify_muntz_formula(&PiecewiseKernel::chi(), ComplexPoint::new(0.6, 2.0), &cfg()).unwrap();
        assert!(chi <= 1e-6);
        assert!(matches!(
            verify_muntz_formula(&PiecewiseKernel::hat(), ComplexPoint::new(0.6, 0.0), &cfg()),
            Err(Error::NotGoodKernel(_))
        ));
    }

    #[test]
    fn v_factor() {
        let f = PiecewiseKernel::bump();
        let s = ComplexPoint::new(0.5, 0.0);
        let factor = c(1.0, 0.0) - real_pow(2.0, c(0.5, 0.0));
        assert!((factor.re + 0.414_213_562_373_095).abs() < 1e-14);
        assert!(v_factor_check(&f, s).unwrap() <= 1e-12);
        assert!(v_factor_check(&f, ComplexPoint::new(0.9, 7.0)).unwrap() <= 1e-12);
    }

    #[test]
    fn dilation_law() {
        let f = PiecewiseKernel::bump();
        let s = ComplexPoint::new(0.65, -3.0);
        let lhs = mellin_exact(&f.dilate(2.5).unwrap(), s).unwrap();
        let rhs = real_pow(2.5, -s.to_complex()) * mellin_exact(&f, s).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn scan_bump_is_zero_free() {
        let r = scan_zeros(&PiecewiseKernel::bump(), 0.75, [-50.0, 50.0], 0.1).unwrap();
        assert!(r.candidate_zeros.is_empty() && r.min_modulus > 0.0);
        assert!(r.notes[0].contains("heuristic"));
        assert!(scan_zeros(&PiecewiseKernel::bump(), 0.4, [-1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn scan_finds_planted_zero() {
        // ĝ(s) = f̂(s)(1 − 2^{3/4 − s}) vanishes at s = 3/4
        let f = PiecewiseKernel::bump();
        let g = f.add(&f.dilate(2.0).unwrap().scale(-(2f64.powf(0.75))));
        let r = scan_zeros(&g, 0.75, [-4.0, 4.0], 0.1).unwrap();
        assert_eq!(r.candidate_zeros.len(), 1);
        assert!(r.candidate_zeros[0].t.abs() < 1e-6);
    }

    #[test]
    fn scan_zero_kernel() {
        let r = scan_zeros(&PiecewiseKernel::zero(), 0.75, [-1.0, 1.0], 0.5).unwrap();
        assert_eq!(r.min_modulus, 0.0);
        assert!(r.candidate_zeros.is_empty() && r.notes.len() == 2);
    }
}
