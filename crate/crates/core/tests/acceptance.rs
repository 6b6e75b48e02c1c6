//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use muntzlab_core::approx::{
    build_gram, distance, distance_sweep_from, necessity_transport_check, residual_norm_sq_direct, GramSource,
    SweepGrid, DEFAULT_TRUNCATION,
};
use muntzlab_core::kernels::frac;
use muntzlab_core::mellin::{scan_zeros, v_factor_check, verify_muntz_formula, verify_proto_muntz};
use muntzlab_core::muntz::{
    burnol_bound_check, muntz_convolution, muntz_direct, operator_norm_bound_check, origin_limit_check,
    MuntzEvaluator,
};
use muntzlab_core::{ComplexPoint, PiecewiseKernel, QuadratureConfig};
use rand::RngExt;

type Outcome = Result<(bool, String), muntzlab_core::Error>;
type Criterion = (&'static str, fn() -> Outcome);

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn identity_p_chi() -> Outcome {
    let mut rng = common::rng(1);
    let chi = PiecewiseKernel::chi();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.random_range(0.0..10.0);
        if x == 0.0 {
            continue;
        }
        worst = worst.max((muntz_direct(&chi, x)? + frac(1.0 / x)).abs());
    }
    Ok((worst <= 1e-12, format!("max |Pχ + ρ₁| over 1000 points = {worst:.3e}")))
}

fn dual_representation() -> Outcome {
    let f = PiecewiseKernel::bump();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
        let d = muntz_direct(&f, x)?;
        let c = muntz_convolution(&f, x, &cfg())?;
        worst = worst.max((d - c).abs());
    }
    Ok((worst <= 1e-6, format!("max |direct − convolution| on 200 log points = {worst:.3e}")))
}

const SIGMAS: [f64; 5] = [0.55, 0.65, 0.75, 0.85, 0.95];
const TS: [f64; 5] = [0.0, 2.5, 5.0, 10.0, 20.0];

fn muntz_formula() -> Outcome {
    let f = PiecewiseKernel::bump();
    let mut worst = 0.0f64;
    for &sigma in &SIGMAS {
        for &t in &TS {
            worst = worst.max(verify_muntz_formula(&f, ComplexPoint::new(sigma, t), &cfg())?);
        }
    }
    Ok((worst <= 1e-5, format!("max residual on 5×5 grid = {worst:.3e}")))
}

fn proto_muntz() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in [ComplexPoint::new(0.5, 0.0), ComplexPoint::new(0.6, 0.0), ComplexPoint::new(0.75, 10.0)] {
        let r = verify_proto_muntz(s, &cfg())?;
        ok &= r <= 1e-5;
        parts.push(format!("s = {s}: {r:.3e}"));
    }
    Ok((ok, parts.join(", ")))
}

fn norm_bound() -> Outcome {
    let mut rng = common::rng(5);
    let mut kernels = vec![PiecewiseKernel::bump()];
    for i in 0..5 {
        kernels.push(common::random_good_kernel(&mut rng, &format!("random-{i}")));
    }
    let mut ok = true;
    let mut slacks = Vec::new();
    for k in &kernels {
        let r = operator_norm_bound_check(k, &cfg())?;
        ok &= r.holds;
        slacks.push(format!("{:.4}", r.slack));
    }
    let nu = PiecewiseKernel::bump().derivative()?.nu_sigma(0.5)?;
    let nu_err = (nu - 24.0 / 35.0).abs();
    ok &= nu_err <= 1e-12;
    Ok((ok, format!("slacks [{}], |ν_1/2(f') − 24/35| = {nu_err:.1e}", slacks.join(", "))))
}

fn burnol() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [PiecewiseKernel::bump(), PiecewiseKernel::chi()] {
        for eps in [0.1, 0.25, 0.5, 1.0] {
            let r = burnol_bound_check(&k, eps, &cfg())?;
            ok &= r.holds;
            parts.push(format!("{} ε={eps}: {:.4} ≤ {:.4}", k.name(), r.lhs, r.rhs));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn origin_limit() -> Outcome {
    let r = origin_limit_check(&PiecewiseKernel::bump(), &cfg())?;
    let ok = (r.limit + 0.5).abs() <= 1e-4;
    Ok((ok, format!("limit = {:.8}, expected −0.5", r.limit)))
}

fn v_operator() -> Outcome {
    let f = PiecewiseKernel::bump();
    let v = f.v_transform();
    let integral = v.total_integral();
    let mut max_p = 0.0f64;
    for i in 0..100 {
        let x = 1.0 + 1e-9 + 0.2 * i as f64;
        max_p = max_p.max(muntz_direct(&v, x)?.abs());
    }
    let mut rng = common::rng(8);
    let mut max_factor = 0.0f64;
    for _ in 0..10 {
        let s = ComplexPoint::new(rng.random_range(0.01..0.99), rng.random_range(-30.0..30.0));
        max_factor = max_factor.max(v_factor_check(&f, s)?);
    }
    let ok = integral == 0.0 && max_p == 0.0 && max_factor <= 1e-12;
    Ok((ok, format!("∫Vf = {integral:e}, max |P(Vf)(x>1)| = {max_p:e}, max factor residual = {max_factor:.3e}")))
}

fn distances() -> Outcome {
    let classic = build_gram(GramSource::Classic, 16, &cfg())?;
    let cr = distance_sweep_from(&classic, SweepGrid::Doubling, DEFAULT_TRUNCATION)?;
    let classic_ok = cr.d_sq.windows(2).all(|w| w[1] < w[0]) && cr.d_sq.iter().all(|&d| d > 0.0 && d < 1.0);

    let eval = MuntzEvaluator::new(PiecewiseKernel::bump());
    let general = build_gram(GramSource::General(&eval), 16, &cfg())?;
    let gr = distance_sweep_from(&general, SweepGrid::Doubling, DEFAULT_TRUNCATION)?;
    let general_ok = gr.healthy();

    let c8 = distance(&classic.leading(8), DEFAULT_TRUNCATION)?;
    let direct_c = residual_norm_sq_direct(GramSource::Classic, &c8.coefficients, &cfg())?;
    let g8 = distance(&general.leading(8), DEFAULT_TRUNCATION)?;
    let direct_g = residual_norm_sq_direct(GramSource::General(&eval), &g8.coefficients, &cfg())?;
    let (dc, dg) = ((direct_c - c8.d_sq).abs(), (direct_g - g8.d_sq).abs());
    let ok = classic_ok && general_ok && dc <= 1e-6 && dg <= 1e-6;
    let fmt = |v: &[f64]| v.iter().map(|d| format!("{d:.6e}")).collect::<Vec<_>>().join(", ");
    Ok((
        ok,
        format!(
            "classic d² [{}]; general d² [{}]; re-verification of d²_8: classic {dc:.1e}, general {dg:.1e}",
            fmt(&cr.d_sq),
            fmt(&gr.d_sq)
        ),
    ))
}

fn transport() -> Outcome {
    let f = PiecewiseKernel::bump();
    let zero = necessity_transport_check(&f, &[], &cfg())?;
    let mut ok = zero.holds && (zero.lhs - (13.0f64 / 35.0).sqrt()).abs() < 1e-12;
    let mut parts = vec![format!("h = 0: {:.4} ≤ {:.4}", zero.lhs, zero.rhs)];
    let classic = build_gram(GramSource::Classic, 8, &cfg())?;
    for n in [2, 4, 8] {
        let d = distance(&classic.leading(n), DEFAULT_TRUNCATION)?;
        let h: Vec<f64> = d.coefficients.iter().map(|c| -c).collect();
        let r = necessity_transport_check(&f, &h, &cfg())?;
        ok &= r.holds;
        parts.push(format!("N = {n}: {:.4} ≤ {:.4}", r.lhs, r.rhs));
    }
    Ok((ok, parts.join("; ")))
}

fn zero_scan() -> Outcome {
    let f = PiecewiseKernel::bump();
    let clean = scan_zeros(&f, 0.75, [-50.0, 50.0], 0.1)?;
    let planted_kernel = f.add(&f.dilate(2.0)?.scale(-(2f64.powf(0.75))));
    let planted = scan_zeros(&planted_kernel, 0.75, [-4.0, 4.0], 0.1)?;
    let ok = clean.candidate_zeros.is_empty()
        && clean.min_modulus > 0.0
        && planted.candidate_zeros.len() == 1
        && planted.candidate_zeros[0].t.abs() < 1e-6;
    Ok((
        ok,
        format!(
            "bump: {} candidates (min |f̂| = {:.3e}); planted zero at s = 0.75: {} candidate(s)",
            clean.candidate_zeros.len(),
            clean.min_modulus,
            planted.candidate_zeros.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("identity Pχ = −ρ₁", identity_p_chi),
        ("dual representation of Pf", dual_representation),
        ("Müntz formula", muntz_formula),
        ("proto-Müntz formula", proto_muntz),
        ("operator norm bound (p = 2)", norm_bound),
        ("Burnol bound", burnol),
        ("origin limit", origin_limit),
        ("V-operator mechanics", v_operator),
        ("distance machinery", distances),
        ("necessity transport inequality", transport),
        ("zero scan", zero_scan),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {:>2} {name}: {detail} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
