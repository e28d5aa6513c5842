//! Experiment orchestration, lemma verification and report export.

mod experiment;
mod report;
mod verify;

pub use experiment::{
    pair_misidentification_rate, run_experiment, ExperimentRecord, ExperimentSpec, GridSpec,
    InstanceSource, LearnerKind, OptimizerKind, ResolvedInstance,
};
pub use report::{export_csv, export_json, format_sig, write_csv};
pub use verify::{
    query_trials, verify_lemma, HiddenShape, Lemma, QueryTrial, VerificationReport, VerifyParams,
};

/// Thread cap from `BUPP_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("BUPP_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&t: &usize| t > 0)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> crate::Result<R> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| crate::error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}
