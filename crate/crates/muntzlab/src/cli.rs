//! The `muntzlab` command line.

use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use muntzlab_core::approx::{distance_sweep_from, DistanceReport, GramSource, SweepGrid, DEFAULT_TRUNCATION};
use muntzlab_core::mellin::{muntz_sides, scan_zeros, ZeroScanReport};
use muntzlab_core::muntz::{autocorrelation, muntz_convolution, Autocorrelated, MuntzEvaluator, Ratio};
use muntzlab_core::{ComplexPoint, Error, KernelValidationReport, PiecewiseKernel, QuadratureConfig};
use serde::Serialize;

use crate::config::{load_run_config, ConfigError, Format, QuadratureOverrides, RunConfig};
use crate::kernel_io::{require_good, resolve_kernel, LoadError};
use crate::output::{fmt_f64, open_output, sibling_json, write_json, Table};
use crate::parallel::{build_gram_parallel, par_map, with_threads};

pub const EXIT_OK: u8 = 0;
pub const EXIT_THRESHOLD: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "muntzlab", version, about = "Müntz operator, Mellin/zeta identities and Nyman-Beurling distances")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Built-in name (bump, flat-bump, chi, hat, zero), an expression such
    /// as "bump - 2*bump@2", or a kernel JSON file
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// Residual threshold for `verify`; quadrature tolerance for the rest
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, env = "MUNTZLAB_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_subdivisions: Option<usize>,
    #[arg(long, global = true)]
    pub tail_cutoff: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validation report, integral, L² norm and ν-norms of a kernel
    KernelInfo,
    /// Pf on a grid by the direct series and by convolution
    MuntzEval(MuntzEvalArgs),
    /// Residuals of ζ(s)f̂(s) = (Pf)^(s) on a grid (proto form for chi)
    Verify(VerifyArgs),
    /// Distance sweep for the classic or general dilation family
    NbDistance(NbDistanceArgs),
    /// Heuristic scan of |f̂| along a vertical line
    ScanZeros(ScanZerosArgs),
    /// Autocorrelation A(x) = ∫ g(t)g(xt)dt at rational points
    Autocorr(AutocorrArgs),
}

#[derive(Debug, Args)]
pub struct MuntzEvalArgs {
    /// Comma-separated evaluation points
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Logarithmic grid "lo,hi,n"
    #[arg(long)]
    pub log_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.55,0.65,0.75,0.85,0.95")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,2.5,5,10,20")]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Classic,
    General,
}

#[derive(Debug, Args)]
pub struct NbDistanceArgs {
    #[arg(long, value_enum, default_value = "classic")]
    pub family: FamilyArg,
    /// Largest number of dilations
    #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
    pub n_max: u32,
    /// Relative eigenvalue cut-off of the pseudo-inverse
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    pub threshold: f64,
    /// Every N up to N_max instead of powers of two
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Args)]
pub struct ScanZerosArgs {
    #[arg(long, default_value_t = 0.75)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -50.0)]
    pub t_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 50.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AutocorrTarget {
    Rho1,
    Pf,
}

#[derive(Debug, Args)]
pub struct AutocorrArgs {
    #[arg(long, value_enum, default_value = "rho1")]
    pub of: AutocorrTarget,
    /// Comma-separated ratios such as "1/2,2/3,3"
    #[arg(long, value_delimiter = ',')]
    pub ratios: Vec<String>,
    /// Without --ratios: every reduced p/q with q ≤ max-den and p/q ≤ max-ratio
    #[arg(long, default_value_t = 6)]
    pub max_den: u64,
    #[arg(long, default_value_t = 1.0)]
    pub max_ratio: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn numerical(e: &Error) -> bool {
    match e {
        Error::DegenerateSystem(_) | Error::NonConvergence { .. } => true,
        Error::GramEntry { cause, .. } => numerical(cause),
        _ => false,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if numerical(e) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

/// Flags merged over the optional config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub kernel: Option<String>,
    pub tol: Option<f64>,
    pub cfg: QuadratureConfig,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Settings {
    pub fn resolve(common: &CommonArgs, tol_is_quadrature: bool) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(p) => load_run_config(p)?,
            None => RunConfig::default(),
        };
        let mut flags = QuadratureOverrides {
            abs_tol: common.abs_tol,
            rel_tol: common.rel_tol,
            max_subdivisions: common.max_subdivisions,
            tail_cutoff: common.tail_cutoff,
        };
        if tol_is_quadrature {
            if let Some(t) = common.tol {
                flags.abs_tol = flags.abs_tol.or(Some(t));
                flags.rel_tol = flags.rel_tol.or(Some(t));
            }
        }
        let cfg = file.quadrature.merged(&flags).apply(QuadratureConfig::default());
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            kernel: common.kernel.clone().or(file.kernel),
            tol: common.tol,
            cfg,
            format: common.format.or(file.output.format),
            out: common.out.clone().or(file.output.path),
            threads: common.threads.map(usize::from).or(file.threads),
        })
    }

    fn kernel(&self) -> Result<PiecewiseKernel, CliError> {
        Ok(resolve_kernel(self.kernel.as_deref().unwrap_or("bump"))?)
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Parses, runs and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let tol_is_quadrature = !matches!(cli.command, Command::Verify(_));
    let result = Settings::resolve(&cli.common, tol_is_quadrature).and_then(|s| {
        if s.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        let threads = s.threads;
        with_threads(threads, || dispatch(&cli.command, &s))
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, s: &Settings) -> Result<u8, CliError> {
    match command {
        Command::KernelInfo => kernel_info(s),
        Command::MuntzEval(a) => muntz_eval(a, s),
        Command::Verify(a) => verify(a, s),
        Command::NbDistance(a) => nb_distance(a, s),
        Command::ScanZeros(a) => scan(a, s),
        Command::Autocorr(a) => autocorr(a, s),
    }
}

fn emit(s: &Settings, default: Format, table: &Table, json: &impl Serialize) -> Result<(), CliError> {
    let w = open_output(s.out.as_deref())?;
    match s.format_or(default) {
        Format::Csv => table.write_csv(w)?,
        Format::Json => write_json(json, w)?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct KernelInfo<'a> {
    kernel: &'a PiecewiseKernel,
    support_bound: f64,
    integral: f64,
    l2_sq: f64,
    nu1_fprime: Option<f64>,
    nu_half_fprime: Option<f64>,
    report: KernelValidationReport,
}

fn kernel_info(s: &Settings) -> Result<u8, CliError> {
    let k = s.kernel()?;
    let report = k.validate();
    let fp = k.derivative().ok();
    let info = KernelInfo {
        kernel: &k,
        support_bound: k.support_bound(),
        integral: k.total_integral(),
        l2_sq: k.l2_norm_sq(),
        nu1_fprime: fp.as_ref().and_then(|d| d.nu_sigma(1.0).ok()),
        nu_half_fprime: fp.as_ref().and_then(|d| d.nu_sigma(0.5).ok()),
        report,
    };
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), fmt_f64);
    let mut t = Table::new(["key", "value"]);
    let knots: Vec<String> = info.report.c1_defects.iter().map(|d| d.knot.to_string()).collect();
    for (key, value) in [
        ("name", k.name().to_string()),
        ("is_good", info.report.is_good.to_string()),
        ("support_bound", fmt_f64(info.support_bound)),
        ("integral", fmt_f64(info.integral)),
        ("l2_sq", fmt_f64(info.l2_sq)),
        ("nu1_fprime", opt(info.nu1_fprime)),
        ("nu_half_fprime", opt(info.nu_half_fprime)),
        ("c1_defect_knots", knots.join(";")),
        ("notes", info.report.notes.clone()),
    ] {
        t.push(vec![key.into(), value]);
    }
    emit(s, Format::Csv, &t, &info)?;
    Ok(EXIT_OK)
}

fn parse_log_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--log-grid expects \"lo,hi,n\" with 0 < lo ≤ hi, got {spec:?}"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let (lo, hi, n): (f64, f64, usize) =
        (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?);
    if !(lo > 0.0 && hi >= lo) {
        return Err(bad());
    }
    Ok(match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect(),
    })
}

#[derive(Debug, Serialize)]
struct MuntzRow {
    x: f64,
    pf_direct: f64,
    pf_convolution: Option<f64>,
    abs_diff: Option<f64>,
    status: String,
}

fn muntz_eval(a: &MuntzEvalArgs, s: &Settings) -> Result<u8, CliError> {
    let k = s.kernel()?;
    let mut xs = a.x.clone();
    if let Some(g) = &a.log_grid {
        xs.extend(parse_log_grid(g)?);
    }
    if let Some(bad) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(CliError::Usage(format!("grid points must be positive, got {bad}")));
    }
    let eval = MuntzEvaluator::new(k.clone());
    let rows: Vec<MuntzRow> = par_map(&xs, |&x| {
        let direct = eval.direct(x);
        let (conv, status) = match muntz_convolution(&k, x, &s.cfg) {
            Ok(c) => (Some(c), "ok".to_string()),
            Err(Error::NotC1(_)) => (None, "n/a: kernel is not C¹".to_string()),
            Err(Error::NonConvergence { .. }) => (None, "non_convergence".to_string()),
            Err(e) => (None, format!("error: {e}")),
        };
        MuntzRow { x, pf_direct: direct, pf_convolution: conv, abs_diff: conv.map(|c| (c - direct).abs()), status }
    });
    let mut t = Table::new(["x", "pf_direct", "pf_convolution", "abs_diff", "status"]);
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), fmt_f64);
    for r in &rows {
        t.push(vec![fmt_f64(r.x), fmt_f64(r.pf_direct), opt(r.pf_convolution), opt(r.abs_diff), r.status.clone()]);
    }
    emit(s, Format::Csv, &t, &rows)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    sigma: f64,
    t: f64,
    lhs_abs: f64,
    rhs_abs: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    kernel: String,
    proto_mode: bool,
    tol: f64,
    max_residual: f64,
    passed: bool,
    rows: Vec<VerifyRow>,
}

/// Default residual threshold of `verify`.
pub const VERIFY_TOL: f64 = 1e-4;

fn verify(a: &VerifyArgs, s: &Settings) -> Result<u8, CliError> {
    let k = s.kernel()?;
    let proto_mode = k.pieces() == PiecewiseKernel::chi().pieces();
    if !proto_mode {
        require_good(&k)?;
    }
    let tol = s.tol.unwrap_or(VERIFY_TOL);
    let points: Vec<ComplexPoint> =
        a.sigma.iter().flat_map(|&sg| a.t.iter().map(move |&t| ComplexPoint::new(sg, t))).collect();
    for p in &points {
        p.require_strip()?;
    }
    let rows = par_map(&points, |&p| muntz_sides(&k, p, &s.cfg))
        .into_iter()
        .map(|r| {
            r.map(|sides| VerifyRow {
                sigma: sides.s.sigma,
                t: sides.s.t,
                lhs_abs: sides.lhs.norm(),
                rhs_abs: sides.rhs.norm(),
                residual: sides.residual(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let passed = max_residual <= tol;
    let mut t = Table::new(["sigma", "t", "lhs_abs", "rhs_abs", "residual"]);
    for r in &rows {
        t.push(vec![fmt_f64(r.sigma), fmt_f64(r.t), fmt_f64(r.lhs_abs), fmt_f64(r.rhs_abs), fmt_f64(r.residual)]);
    }
    let report = VerifyReport { kernel: k.name().into(), proto_mode, tol, max_residual, passed, rows };
    emit(s, Format::Csv, &t, &report)?;
    eprintln!(
        "{} max residual {max_residual:.3e} over {} points (tol {tol:e}): {}",
        if proto_mode { "proto-Müntz" } else { "Müntz formula" },
        report.rows.len(),
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(if passed { EXIT_OK } else { EXIT_THRESHOLD })
}

fn distance_table(r: &DistanceReport) -> Table {
    let mut t = Table::new(["N", "d_sq", "effective_rank"]);
    for i in 0..r.n_values.len() {
        t.push(vec![r.n_values[i].to_string(), fmt_f64(r.d_sq[i]), r.effective_rank[i].to_string()]);
    }
    t
}

fn nb_distance(a: &NbDistanceArgs, s: &Settings) -> Result<u8, CliError> {
    let n = a.n_max as usize;
    let grid = if a.dense { SweepGrid::Dense } else { SweepGrid::Doubling };
    let sys = match a.family {
        FamilyArg::Classic => build_gram_parallel(GramSource::Classic, n, &s.cfg)?,
        FamilyArg::General => {
            let k = s.kernel()?;
            require_good(&k)?;
            let eval = MuntzEvaluator::new(k);
            build_gram_parallel(GramSource::General(&eval), n, &s.cfg)?
        }
    };
    let report = distance_sweep_from(&sys, grid, a.threshold)?;
    let table = distance_table(&report);
    emit(s, Format::Csv, &table, &report)?;
    if let (Some(path), Format::Csv) = (&s.out, s.format_or(Format::Csv)) {
        write_json(&report, open_output(Some(&sibling_json(path)))?)?;
    }
    if report.healthy() {
        eprintln!("monotonicity: ok over {} values of N", report.n_values.len());
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "monotonicity: numerical-health failure; increases at {:?}, negative d² at N = {:?}",
            report.monotonicity_violations,
            report.negative_entries.iter().map(|&i| report.n_values[i]).collect::<Vec<_>>()
        );
        Ok(EXIT_NUMERICAL)
    }
}

fn scan(a: &ScanZerosArgs, s: &Settings) -> Result<u8, CliError> {
    let k = s.kernel()?;
    let report: ZeroScanReport = scan_zeros(&k, a.sigma, [a.t_min, a.t_max], a.step)?;
    let mut t = Table::new(["t_lo", "t_hi", "t", "modulus"]);
    for c in &report.candidate_zeros {
        t.push(vec![fmt_f64(c.t_lo), fmt_f64(c.t_hi), fmt_f64(c.t), fmt_f64(c.modulus)]);
    }
    emit(s, Format::Json, &t, &report)?;
    eprintln!(
        "{} candidate zero(s); min |f̂| = {:.3e} at t = {} ({})",
        report.candidate_zeros.len(),
        report.min_modulus,
        report.min_location.t,
        report.notes[0]
    );
    Ok(EXIT_OK)
}

fn parse_ratio(text: &str) -> Result<Ratio, CliError> {
    let bad = || CliError::Usage(format!("bad ratio {text:?}; expected p/q or an integer"));
    let (p, q) = match text.trim().split_once('/') {
        Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
        None => (text.trim().parse().map_err(|_| bad())?, 1),
    };
    Ratio::new(p, q).map_err(|_| bad())
}

/// Reduced `p/q` with `q ≤ max_den` and `0 < p/q ≤ max_ratio`, ascending.
pub fn farey_ratios(max_den: u64, max_ratio: f64) -> Vec<Ratio> {
    let mut out = Vec::new();
    for q in 1..=max_den {
        let p_max = (max_ratio * q as f64).floor() as u64;
        for p in 1..=p_max {
            if muntzlab_core::muntz::gcd(p, q) == 1 {
                out.push(Ratio::new(p, q).expect("positive"));
            }
        }
    }
    out.sort_by(|a, b| (a.num() * b.den()).cmp(&(b.num() * a.den())));
    out
}

#[derive(Debug, Serialize)]
struct AutocorrRow {
    ratio: String,
    num: u64,
    den: u64,
    value: f64,
}

fn autocorr(a: &AutocorrArgs, s: &Settings) -> Result<u8, CliError> {
    let ratios = if a.ratios.is_empty() {
        if a.max_den == 0 || !(a.max_ratio > 0.0) {
            return Err(CliError::Usage("--max-den and --max-ratio must be positive".into()));
        }
        farey_ratios(a.max_den, a.max_ratio)
    } else {
        a.ratios.iter().map(|r| parse_ratio(r)).collect::<Result<_, _>>()?
    };
    let eval;
    let g = match a.of {
        AutocorrTarget::Rho1 => Autocorrelated::Rho1,
        AutocorrTarget::Pf => {
            let k = s.kernel()?;
            require_good(&k)?;
            eval = MuntzEvaluator::new(k);
            Autocorrelated::Muntz(&eval)
        }
    };
    let rows = par_map(&ratios, |&r| {
        autocorrelation(g, r, &s.cfg).map(|value| AutocorrRow { ratio: r.to_string(), num: r.num(), den: r.den(), value })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(["ratio", "num", "den", "value"]);
    for r in &rows {
        t.push(vec![r.ratio.clone(), r.num.to_string(), r.den.to_string(), fmt_f64(r.value)]);
    }
    emit(s, Format::Csv, &t, &rows)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn log_grid_endpoints() {
        let g = parse_log_grid("1e-3,1e3,7").unwrap();
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[6] - 1e3).abs() < 1e-9 && (g[3] - 1.0).abs() < 1e-12);
        assert!(parse_log_grid("0,1,3").is_err());
        assert!(parse_log_grid("1,2").is_err());
    }

    #[test]
    fn farey_sequence() {
        let r: Vec<String> = farey_ratios(3, 1.0).iter().map(|r| r.to_string()).collect();
        assert_eq!(r, ["1/3", "1/2", "2/3", "1"]);
        assert_eq!(parse_ratio("4/6").unwrap(), Ratio::new(2, 3).unwrap());
        assert!(parse_ratio("0/1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(Error::DegenerateSystem("x".into())).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::Core(Error::OutOfStrip("x".into())).exit_code(), EXIT_USAGE);
        let wrapped = Error::GramEntry {
            entry: "e".into(),
            cause: Box::new(Error::NonConvergence { value: 0.0, error_estimate: 1.0 }),
        };
        assert_eq!(CliError::Core(wrapped).exit_code(), EXIT_NUMERICAL);
    }
}
