//! Gram systems for `span{K_a g : 1 ≤ a ≤ N}` and the distance from the
//! target.
//!
//! Two families are supported: `g = ρ₁` with target `χ`, and `g = Pf` with
//! target `f` for a good kernel `f`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // libm-backed methods under no_std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernels::PiecewiseKernel;
use crate::linalg::{dot, pseudo_solve, SymMatrix};
use crate::muntz::{chi_rho1_inner, gcd, rho1_dilation_inner, MuntzEvaluator};
use crate::numerics::{integrate_with_breakpoints, trigamma, QuadratureConfig};

/// Default relative eigenvalue cut-off of the pseudo-inverse.
pub const DEFAULT_TRUNCATION: f64 = 1e-12;

/// Squared distances in `[−CLAMP, 0)` are rounding and become 0.
pub const CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    /// `g = ρ₁`, target `χ`
    Classic,
    /// `g = Pf`, target `f`
    General,
}

/// The generator of a family together with what it needs to evaluate.
#[derive(Debug, Clone, Copy)]
pub enum GramSource<'a> {
    Classic,
    General(&'a MuntzEvaluator),
}

impl GramSource<'_> {
    pub fn family(&self) -> Family {
        match self {
            GramSource::Classic => Family::Classic,
            GramSource::General(_) => Family::General,
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            GramSource::General(eval) if !eval.kernel().is_good() => {
                Err(Error::NotGoodKernel(eval.kernel().name().into()))
            }
            _ => Ok(()),
        }
    }

    /// `‖target‖₂²`
    pub fn target_norm_sq(&self) -> f64 {
        match self {
            GramSource::Classic => 1.0,
            GramSource::General(eval) => eval.kernel().l2_norm_sq(),
        }
    }
}

/// One independent quadrature of a Gram build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramTask {
    /// `⟨K_p g, K_q g⟩` for coprime `p ≤ q`
    Pair { p: u64, q: u64 },
    /// `⟨target, K_a g⟩`
    Cross { a: u64 },
}

impl core::fmt::Display for GramTask {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GramTask::Pair { p, q } => write!(f, "⟨K_{p} g, K_{q} g⟩"),
            GramTask::Cross { a } => write!(f, "⟨target, K_{a} g⟩"),
        }
    }
}

/// Evaluates one task; failures name the entry.
pub fn evaluate_task(source: GramSource<'_>, task: GramTask, cfg: &QuadratureConfig) -> Result<f64> {
    let r = match (source, task) {
        (GramSource::Classic, GramTask::Pair { p, q }) => rho1_dilation_inner(p, q, cfg),
        (GramSource::Classic, GramTask::Cross { a }) => chi_rho1_inner(a, cfg),
        (GramSource::General(e), GramTask::Pair { p, q }) => e.dilation_inner(p as f64, q as f64, cfg),
        (GramSource::General(e), GramTask::Cross { a }) => e.target_inner(a as f64, cfg),
    };
    r.map_err(|cause| Error::GramEntry { entry: format!("{task}"), cause: Box::new(cause) })
}

/// The distinct quadratures behind an `N × N` Gram system.
///
/// `⟨K_a g, K_b g⟩ = ⟨K_p g, K_q g⟩ / gcd(a, b)` with `(p, q)` the reduced
/// pair, so one value serves every entry on the same ratio `a/b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPlan {
    n: usize,
    tasks: Vec<GramTask>,
}

impl GramPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let mut tasks = Vec::new();
        for q in 1..=n as u64 {
            for p in 1..=q {
                if gcd(p, q) == 1 {
                    tasks.push(GramTask::Pair { p, q });
                }
            }
        }
        tasks.extend((1..=n as u64).map(|a| GramTask::Cross { a }));
        Ok(Self { n, tasks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tasks(&self) -> &[GramTask] {
        &self.tasks
    }

    /// Builds the system from task values given in [`Self::tasks`] order.
    pub fn assemble(&self, source: GramSource<'_>, values: &[f64]) -> Result<GramSystem> {
        if values.len() != self.tasks.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} task values, got {}",
                self.tasks.len(),
                values.len()
            )));
        }
        let n = self.n;
        // reduced pair (p, q), p ≤ q, lives at row q, column p
        let mut reduced = SymMatrix::zeros(n);
        let mut cross = Vec::with_capacity(n);
        for (task, &v) in self.tasks.iter().zip(values) {
            match *task {
                GramTask::Pair { p, q } => reduced.set(p as usize - 1, q as usize - 1, v),
                GramTask::Cross { .. } => cross.push(v),
            }
        }
        let gram = SymMatrix::from_fn(n, |i, j| {
            let (a, b) = (i as u64 + 1, j as u64 + 1);
            let g = gcd(a, b);
            reduced.get((a / g) as usize - 1, (b / g) as usize - 1) / g as f64
        });
        Ok(GramSystem { n, family: source.family(), gram, cross, target_norm_sq: source.target_norm_sq() })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramSystem {
    pub n: usize,
    pub family: Family,
    /// `G[a][b] = ⟨K_a g, K_b g⟩`, zero-based
    pub gram: SymMatrix,
    /// `b[a] = ⟨target, K_a g⟩`
    pub cross: Vec<f64>,
    pub target_norm_sq: f64,
}

impl GramSystem {
    /// The system for the first `k` dilations.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            n: k,
            family: self.family,
            gram: self.gram.leading(k),
            cross: self.cross[..k].to_vec(),
            target_norm_sq: self.target_norm_sq,
        }
    }

    /// `‖target − Σ c_a K_a g‖₂²` expanded through the Gram matrix.
    pub fn residual_norm_sq(&self, c: &[f64]) -> f64 {
        self.gram.quadratic_form(c) - 2.0 * dot(c, &self.cross) + self.target_norm_sq
    }
}

/// Sequential Gram build; see [`GramPlan`] to spread the tasks over threads.
pub fn build_gram(source: GramSource<'_>, n: usize, cfg: &QuadratureConfig) -> Result<GramSystem> {
    source.check()?;
    let plan = GramPlan::new(n)?;
    let values = plan
        .tasks()
        .iter()
        .map(|&t| evaluate_task(source, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    plan.assemble(source, &values)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Distance {
    pub d_sq: f64,
    pub coefficients: Vec<f64>,
    pub effective_rank: usize,
    pub min_eigenvalue: f64,
    /// `λ_max/λ_min`, infinite when `λ_min ≤ 0`
    pub condition_number: f64,
}

/// `d² = ‖target‖² − bᵀG⁺b` with the truncated spectral pseudo-inverse.
pub fn distance(sys: &GramSystem, truncation_threshold: f64) -> Result<Distance> {
    let s = pseudo_solve(&sys.gram, &sys.cross, truncation_threshold);
    if s.rank == 0 {
        return Err(Error::DegenerateSystem(format!(
            "no eigenvalue of the {n}×{n} Gram matrix exceeds {truncation_threshold}·λ_max",
            n = sys.n
        )));
    }
    let mut d_sq = sys.target_norm_sq - dot(&sys.cross, &s.x);
    if (-CLAMP..0.0).contains(&d_sq) {
        d_sq = 0.0;
    }
    let condition_number =
        if s.min_eigenvalue > 0.0 { s.max_eigenvalue / s.min_eigenvalue } else { f64::INFINITY };
    Ok(Distance {
        d_sq,
        coefficients: s.x,
        effective_rank: s.rank,
        min_eigenvalue: s.min_eigenvalue,
        condition_number,
    })
}

/// Which `N` a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepGrid {
    /// `1, 2, 4, …` and `N_max` itself
    Doubling,
    /// every `N` from 1 to `N_max`
    Dense,
}

impl SweepGrid {
    pub fn values(self, n_max: usize) -> Vec<usize> {
        match self {
            SweepGrid::Dense => (1..=n_max).collect(),
            SweepGrid::Doubling => {
                let mut v: Vec<usize> = core::iter::successors(Some(1usize), |&n| n.checked_mul(2))
                    .take_while(|&n| n <= n_max)
                    .collect();
                if v.last() != Some(&n_max) && n_max > 0 {
                    v.push(n_max);
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceReport {
    pub family: Family,
    pub n_values: Vec<usize>,
    pub d_sq: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub effective_rank: Vec<usize>,
    pub min_eigenvalue: Vec<f64>,
    pub condition_number: Vec<f64>,
    pub truncation_threshold: f64,
    /// consecutive `(N, N')` with `d²(N') > d²(N) + 1e−10`
    pub monotonicity_violations: Vec<(usize, usize)>,
    /// indices with `d² < 0` after clamping
    pub negative_entries: Vec<usize>,
}

impl DistanceReport {
    pub fn healthy(&self) -> bool {
        self.monotonicity_violations.is_empty() && self.negative_entries.is_empty()
    }
}

/// Distances on every `N` of the grid from one Gram system of size `N_max`.
pub fn distance_sweep_from(sys: &GramSystem, grid: SweepGrid, truncation_threshold: f64) -> Result<DistanceReport> {
    let n_values = grid.values(sys.n);
    let mut report = DistanceReport {
        family: sys.family,
        n_values: n_values.clone(),
        d_sq: Vec::new(),
        coefficients: Vec::new(),
        effective_rank: Vec::new(),
        min_eigenvalue: Vec::new(),
        condition_number: Vec::new(),
        truncation_threshold,
        monotonicity_violations: Vec::new(),
        negative_entries: Vec::new(),
    };
    for (i, &n) in n_values.iter().enumerate() {
        let d = distance(&sys.leading(n), truncation_threshold)?;
        if d.d_sq < 0.0 {
            report.negative_entries.push(i);
        }
        if let Some(&prev) = report.d_sq.last() {
            if d.d_sq > prev + CLAMP {
                report.monotonicity_violations.push((n_values[i - 1], n));
            }
        }
        report.d_sq.push(d.d_sq);
        report.coefficients.push(d.coefficients);
        report.effective_rank.push(d.effective_rank);
        report.min_eigenvalue.push(d.min_eigenvalue);
        report.condition_number.push(d.condition_number);
    }
    Ok(report)
}

pub fn distance_sweep(
    source: GramSource<'_>,
    n_max: usize,
    grid: SweepGrid,
    truncation_threshold: f64,
    cfg: &QuadratureConfig,
) -> Result<DistanceReport> {
    let sys = build_gram(source, n_max, cfg)?;
    distance_sweep_from(&sys, grid, truncation_threshold)
}

/// `‖target − Σ c_a K_a g‖₂²` by direct quadrature of the residual,
/// independent of the Gram entries.
pub fn residual_norm_sq_direct(source: GramSource<'_>, c: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if c.is_empty() {
        return Ok(source.target_norm_sq());
    }
    let weight: f64 = c.iter().enumerate().map(|(i, ci)| ci / (i + 1) as f64).sum();
    match source {
        GramSource::Classic => classic_residual(c, weight, cfg),
        GramSource::General(eval) => {
            // beyond A the residual is I·Σ c_a/a / x
            let a_sup = eval.support_bound();
            let i = eval.total_integral();
            let mut breaks = eval.kernel().knots();
            for a in 1..=c.len() {
                breaks.extend(eval.dilated_breaks(a as f64, a_sup));
            }
            let head = integrate_with_breakpoints(
                |x| {
                    let approx: f64 = c.iter().enumerate().map(|(j, cj)| cj * eval.direct((j + 1) as f64 * x)).sum();
                    let r = eval.kernel().value_at(x) - approx;
                    r * r
                },
                0.0,
                a_sup,
                &breaks,
                &QuadratureConfig { max_subdivisions: cfg.max_subdivisions.max(4 * breaks.len()), ..*cfg },
            )?
            .require_converged()?;
            Ok(head.value + i * i * weight * weight / a_sup)
        }
    }
}

/// Most panels the folded classic residual will register.
const CLASSIC_PANEL_LIMIT: u64 = 2_000_000;

/// With `u = 1/x` the residual on `(0, 1]` is `p(u)/u²`,
/// `p(u) = (1 − Σ c_a ρ(u/a))²`, periodic with period `L = lcm(1..N)`;
/// `∫₁^∞ p(u)u^{-2} du` folds to `L^{-2}∫₀^L p(1+v) ψ₁((1+v)/L) dv`.
/// On `x > 1` the residual is `−(Σ c_a/a)/x`.
fn classic_residual(c: &[f64], weight: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let n = c.len() as u64;
    let period = (1..=n).fold(1u64, |l, a| l / gcd(l, a) * a);
    let panels: u64 = (1..=n).map(|a| period / a).sum();
    if panels > CLASSIC_PANEL_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "direct re-verification needs {panels} panels for N = {n}"
        )));
    }
    let lf = period as f64;
    let mut breaks = Vec::with_capacity(panels as usize);
    for a in 1..=n {
        // kinks of ρ((1+v)/a) at v = ka − 1
        breaks.extend((1..=period / a).map(|k| (k * a) as f64 - 1.0).filter(|&v| v > 0.0 && v < lf));
    }
    let p = |u: f64| {
        let s: f64 = c
            .iter()
            .enumerate()
            .map(|(j, cj)| {
                let y = u / (j + 1) as f64;
                cj * (y - y.floor())
            })
            .sum();
        (1.0 - s) * (1.0 - s)
    };
    let r = integrate_with_breakpoints(
        |v| p(1.0 + v) * trigamma((1.0 + v) / lf),
        0.0,
        lf,
        &breaks,
        &QuadratureConfig { max_subdivisions: cfg.max_subdivisions.max(4 * breaks.len()), ..*cfg },
    )?
    .require_converged()?;
    Ok(r.value / (lf * lf) + weight * weight)
}

/// Both sides of `‖Σ c_a K_a Pf − f‖₂ ≤ ν_{1/2}(f') ‖Σ c_a K_a ρ₁ + χ‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransportReport {
    /// `‖H − f‖₂`
    pub lhs: f64,
    /// `‖h + χ‖₂`
    pub h_plus_chi: f64,
    pub nu_half_fprime: f64,
    /// `ν_{1/2}(f') ‖h + χ‖₂`
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `h = Σ c_a K_a ρ₁` is mapped by `T_{f'}` to `H = Σ c_a K_a Pf`, and
/// `T_{f'}χ = −f`.
pub fn necessity_transport_check(k: &PiecewiseKernel, c: &[f64], cfg: &QuadratureConfig) -> Result<TransportReport> {
    if !k.is_good() {
        return Err(Error::NotGoodKernel(k.name().into()));
    }
    let nu_half_fprime = k.derivative()?.nu_sigma(0.5)?;
    let (lhs_sq, hchi_sq) = if c.is_empty() {
        (k.l2_norm_sq(), 1.0)
    } else {
        let eval = MuntzEvaluator::new(k.clone());
        let general = build_gram(GramSource::General(&eval), c.len(), cfg)?;
        let classic = build_gram(GramSource::Classic, c.len(), cfg)?;
        // ‖h + χ‖² = cᵀGc + 2cᵀb + 1
        let hchi = classic.gram.quadratic_form(c) + 2.0 * dot(c, &classic.cross) + 1.0;
        (general.residual_norm_sq(c), hchi)
    };
    let lhs = lhs_sq.max(0.0).sqrt();
    let h_plus_chi = hchi_sq.max(0.0).sqrt();
    let rhs = nu_half_fprime * h_plus_chi;
    let slack = rhs - lhs;
    Ok(TransportReport { lhs, h_plus_chi, nu_half_fprime, rhs, slack, holds: slack >= -cfg.target(rhs) })
}
