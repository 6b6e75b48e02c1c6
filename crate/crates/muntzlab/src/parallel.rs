//! Thread-pool fan-out with order-preserving collection.

use muntzlab_core::approx::{evaluate_task, GramPlan, GramSource, GramSystem};
use muntzlab_core::{QuadratureConfig, Result};
use rayon::prelude::*;

/// Runs `f` on a pool of `threads` workers (rayon's default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// [`muntzlab_core::approx::build_gram`] with the entries computed
/// concurrently; the result does not depend on scheduling.
pub fn build_gram_parallel(source: GramSource<'_>, n: usize, cfg: &QuadratureConfig) -> Result<GramSystem> {
    let plan = GramPlan::new(n)?;
    if let GramSource::General(eval) = source {
        if !eval.kernel().is_good() {
            return Err(muntzlab_core::Error::NotGoodKernel(eval.kernel().name().into()));
        }
    }
    let values = plan
        .tasks()
        .par_iter()
        .map(|&t| evaluate_task(source, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    plan.assemble(source, &values)
}

/// Order-preserving parallel map.
pub fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use muntzlab_core::approx::build_gram;

    #[test]
    fn parallel_gram_is_bitwise_sequential() {
        let cfg = QuadratureConfig::default();
        let seq = build_gram(GramSource::Classic, 6, &cfg).unwrap();
        for threads in [1, 3] {
            let par = with_threads(Some(threads), || build_gram_parallel(GramSource::Classic, 6, &cfg)).unwrap();
            assert_eq!(par, seq);
        }
    }
}
