//! Deterministic trial fan-out: trial i always runs with
//! `derive_seed(base_seed, i)`, trials execute on a bounded worker pool,
//! and results are merged in seed-index order so execution order never
//! shows in the outputs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use engram_core::rng::{derive_seed, SeedStream};

use crate::error::{HarnessError, Result};
use crate::WORKERS_ENV;

/// Worker count: env override, else available parallelism, capped by the
/// trial count.
pub fn worker_count(trials: usize) -> Result<usize> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => v.parse::<usize>().map_err(|_| {
            HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer"))
        })?,
        Err(_) => std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1),
    };
    if n == 0 {
        return Err(HarnessError::Config(format!("{WORKERS_ENV} must be >= 1")));
    }
    Ok(n.min(trials.max(1)))
}

/// Seeds for trials `0..trials`, in trial order.
pub fn trial_seeds(base_seed: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|i| derive_seed(base_seed, i)).collect()
}

/// Run `f(trial_index, rng)` for each trial; the returned vector is in
/// trial-index order regardless of scheduling.
pub fn run_trials<T, F>(base_seed: u64, trials: usize, workers: usize, f: F) -> Result<Vec<(u64, T)>>
where
    T: Send,
    F: Fn(usize, SeedStream) -> Result<T> + Sync,
{
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(u64, T)>>> =
        Mutex::new((0..trials).map(|_| None).collect());
    let first_err: Mutex<Option<HarnessError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= trials || first_err.lock().unwrap().is_some() {
                    return;
                }
                let seed = derive_seed(base_seed, i as u64);
                match f(i, SeedStream::new(seed)) {
                    Ok(v) => {
                        results.lock().unwrap()[i] = Some((seed, v));
                    }
                    Err(e) => {
                        let mut slot = first_err.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }
    let collected: Vec<(u64, T)> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("all trials completed"))
        .collect();
    Ok(collected)
}
