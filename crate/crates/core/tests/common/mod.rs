use muntzlab_core::PiecewiseKernel;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random C¹ cubic Hermite kernel on `[0, A]`, vanishing to first order at `A`.
pub fn random_good_kernel(rng: &mut impl RngExt, name: &str) -> PiecewiseKernel {
    let a: f64 = rng.random_range(0.5..3.0);
    let interior = rng.random_range(1..4usize);
    // jittered uniform knots keep pieces wide, so monomial coefficients stay tame
    let h = a / (interior + 1) as f64;
    let mut knots: Vec<f64> = (1..=interior).map(|i| h * (i as f64 + rng.random_range(-0.2..0.2))).collect();
    knots.insert(0, 0.0);
    knots.push(a);
    let n = knots.len();
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut slopes: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    values[n - 1] = 0.0;
    slopes[n - 1] = 0.0;
    PiecewiseKernel::hermite(name, &knots, &values, &slopes).expect("valid Hermite data")
}
