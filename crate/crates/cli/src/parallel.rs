//! Rayon-backed chunk evaluator. Mode solves are independent pure
//! functions; the order-preserving parallel map plus the fixed-order
//! reduction in the core keep outputs bit-identical across worker counts.

use rayon::prelude::*;
use semirad::modes::ModeEntry;
use semirad::operator1d::{NormEstimate, OperatorTemplate};

pub fn build_pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

pub fn chunk_eval(
    pool: &rayon::ThreadPool,
) -> impl Fn(&OperatorTemplate, &[ModeEntry]) -> Vec<semirad::Result<NormEstimate>> + '_ {
    move |template, jobs| {
        pool.install(|| {
            jobs.par_iter()
                .map(|entry| template.mode_norm(entry.nu))
                .collect()
        })
    }
}
