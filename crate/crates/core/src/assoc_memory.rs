//! Sparse Hopfield-style associative memory.
//!
//! Patterns are stored by the outer-product rule `J_ij = (1/N) Σ_μ S_i S_j`
//! (zero diagonal) applied literally to the pattern values of the declared
//! coding — ±1 in bipolar mode, 0/1 in binary mode, where the weights
//! become scaled co-activation counters — and recalled by thresholded
//! dynamics in the same coding. Consolidation is modeled as quantile
//! pruning of weak couplings; capacity is measured by a
//! doubling-then-bisection search over the pattern count. Sparse binary
//! coding is the regime where capacity grows faster than linearly in the
//! unit count; sparse bipolar coding does not share that advantage because
//! the mostly-(-1) background dominates the weights.

use crate::error::{CoreError, Result};
use crate::num::Real;
use crate::pattern::{Coding, Pattern, PatternSet};
use crate::rng::SeedStream;
use crate::weights::WeightMatrix;

/// How the firing threshold is chosen at recall time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T: Real> {
    /// Explicit value, applied uniformly.
    Fixed(T),
    /// Coding-aware crosstalk-compensating threshold.
    ///
    /// Bipolar memories use `-(M-2) (1 - 2a)^2` with `a` the stored coding
    /// level and `M` the stored pattern count. With `c = 1 - 2a`, the
    /// interference on unit `i` concentrates at the discrete levels
    /// `c^2 * X`, where `X` is the sum over the other patterns of their bit
    /// at `i` (levels spaced `2 c^2`). This value is the midpoint of the
    /// correctness windows of the two most probable levels, `X = -(M-1)`
    /// and `X = -(M-3)`, so both classify correctly; a mean-cancelling
    /// threshold `-(M-1) c^3` instead falls between levels at small `M` and
    /// misclassifies off-units at the second level. Reduces to 0 for dense
    /// (`a = 0.5`) coding.
    ///
    /// Binary memories use an activity-relative threshold, recomputed each
    /// sweep: a unit fires when its field reaches
    /// [`BINARY_AUTO_THRESHOLD_RATIO`] times `(A - 1) / N`, where `A` is
    /// the active count of the current state. A unit belonging to the cued
    /// pattern sees a field of about `(A - 1) / N` from the cue's own
    /// co-activation counters regardless of how complete the cue is, while
    /// a unit outside it only sees incidental overlaps, so a fixed fraction
    /// of the current activity separates the two at any cue size. A static
    /// threshold cannot do this: tuned for full cues it blocks completion
    /// from partial ones, and tuned for partial cues it lets one borderline
    /// unit recruit an overlapping stored pattern wholesale.
    Auto,
}

/// Fraction of the current active count used by the binary-mode automatic
/// threshold: a unit fires when its field is at least this fraction of
/// `(A - 1) / N`. Values in (0.5, 1) trade completion reach (lower) against
/// spurious-recruitment robustness (higher).
pub const BINARY_AUTO_THRESHOLD_RATIO: f64 = 0.7;

/// Update order for the recall dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    Synchronous,
    SequentialRandom,
}

#[derive(Debug, Clone)]
pub struct RecallConfig<T: Real> {
    pub max_iterations: usize,
    pub update_mode: UpdateMode,
    pub threshold: Threshold<T>,
}

impl<T: Real> Default for RecallConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            update_mode: UpdateMode::Synchronous,
            threshold: Threshold::Auto,
        }
    }
}

/// Outcome of one recall run.
#[derive(Debug, Clone)]
pub struct RecallResult {
    pub state: Pattern,
    pub iterations: usize,
    pub converged: bool,
}

/// Hopfield-style memory built from a stored pattern set.
#[derive(Debug, Clone)]
pub struct AssocMemory<T: Real> {
    j: WeightMatrix<T>,
    n: usize,
    stored_count: usize,
    /// Mean coding level of the stored patterns (fraction of active units).
    coding_level: f64,
    /// Coding the patterns were stored in; recall runs in the same coding.
    coding: Coding,
}

impl<T: Real> AssocMemory<T> {
    /// Store a pattern set via the outer-product rule, applied to the
    /// literal pattern values of its coding: ±1 products in bipolar mode,
    /// 0/1 products (co-activation counts) in binary mode.
    pub fn store_patterns(ps: &PatternSet) -> Result<Self> {
        if ps.is_empty() {
            return Err(CoreError::InvalidInput("empty pattern set".into()));
        }
        let n = ps.n();
        let inv_n = T::from_usize(n).unwrap().recip();
        let mut j = WeightMatrix::zeros(n, false);
        match ps.coding() {
            Coding::Bipolar => {
                for p in ps.iter() {
                    let bits = p.bits();
                    for i in 0..n {
                        let si = T::from_i8(bits[i]).unwrap();
                        let row = &mut j.values_mut()[i * n..(i + 1) * n];
                        for (jj, &bj) in bits.iter().enumerate() {
                            if jj != i {
                                row[jj] = row[jj] + inv_n * si * T::from_i8(bj).unwrap();
                            }
                        }
                    }
                }
            }
            Coding::Binary => {
                // Only co-active pairs contribute, so iterate active units.
                for p in ps.iter() {
                    let act = p.active_indices();
                    for &i in &act {
                        let row = &mut j.values_mut()[i * n..(i + 1) * n];
                        for &jj in &act {
                            if jj != i {
                                row[jj] = row[jj] + inv_n;
                            }
                        }
                    }
                }
            }
        }
        let coding_level =
            ps.iter().map(|p| p.sparsity()).sum::<f64>() / ps.len() as f64;
        Ok(Self {
            j,
            n,
            stored_count: ps.len(),
            coding_level,
            coding: ps.coding(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stored_count(&self) -> usize {
        self.stored_count
    }

    pub fn coding_level(&self) -> f64 {
        self.coding_level
    }

    pub fn weights(&self) -> &WeightMatrix<T> {
        &self.j
    }

    pub fn coding(&self) -> Coding {
        self.coding
    }

    /// Threshold for the coming sweep; the binary automatic threshold
    /// depends on the current state's activity.
    fn resolve_threshold(&self, t: Threshold<T>, state: &Pattern) -> T {
        match t {
            Threshold::Fixed(v) => v,
            Threshold::Auto => match self.coding {
                Coding::Bipolar => {
                    let c = 1.0 - 2.0 * self.coding_level;
                    let m = self.stored_count as f64 - 2.0;
                    T::from_f64_lit(-(m * c * c))
                }
                Coding::Binary => {
                    let active = state.active_count().saturating_sub(1) as f64;
                    T::from_f64_lit(
                        BINARY_AUTO_THRESHOLD_RATIO * active / self.n as f64,
                    )
                }
            },
        }
    }

    fn local_field(&self, s: &Pattern, i: usize) -> T {
        let row = self.j.row(i);
        let mut h = T::zero();
        match self.coding {
            Coding::Bipolar => {
                for (j, &b) in s.bits().iter().enumerate() {
                    if b == 1 {
                        h = h + row[j];
                    } else {
                        h = h - row[j];
                    }
                }
            }
            Coding::Binary => {
                for (j, &b) in s.bits().iter().enumerate() {
                    if b == 1 {
                        h = h + row[j];
                    }
                }
            }
        }
        h
    }

    /// Thresholded sign dynamics until a fixed point or the iteration cap.
    ///
    /// A unit with pre-activation exactly at the threshold keeps its previous
    /// state, which makes synchronous updates deterministic.
    pub fn recall(&self, cue: &Pattern, cfg: &RecallConfig<T>, rng: &mut SeedStream) -> Result<RecallResult> {
        if cue.n() != self.n {
            return Err(CoreError::DimensionMismatch(format!(
                "cue {} vs memory {}",
                cue.n(),
                self.n
            )));
        }
        let mut state = match self.coding {
            Coding::Bipolar => cue.to_bipolar(),
            Coding::Binary => cue.to_binary(),
        };
        let off: i8 = match self.coding {
            Coding::Bipolar => -1,
            Coding::Binary => 0,
        };
        let mut iterations = 0;
        let mut converged = false;

        for _ in 0..cfg.max_iterations {
            iterations += 1;
            let mut changed = false;
            // The automatic binary threshold tracks the activity of the
            // state entering the sweep (held fixed within it, including for
            // sequential updates).
            let theta = self.resolve_threshold(cfg.threshold, &state);
            match cfg.update_mode {
                UpdateMode::Synchronous => {
                    let mut next = state.clone();
                    // In binary coding only active units contribute, so the
                    // sweep runs over the active set instead of every bit.
                    let act: Option<Vec<usize>> = match self.coding {
                        Coding::Binary => Some(state.active_indices()),
                        Coding::Bipolar => None,
                    };
                    for i in 0..self.n {
                        let pre = match &act {
                            Some(act) => {
                                let row = self.j.row(i);
                                let mut h = T::zero();
                                for &jj in act {
                                    h = h + row[jj];
                                }
                                h - theta
                            }
                            None => self.local_field(&state, i) - theta,
                        };
                        if pre > T::zero() && state.get(i) != 1 {
                            next.set(i, 1);
                            changed = true;
                        } else if pre < T::zero() && state.get(i) != off {
                            next.set(i, off);
                            changed = true;
                        }
                    }
                    state = next;
                }
                UpdateMode::SequentialRandom => {
                    let mut order: Vec<usize> = (0..self.n).collect();
                    rng.shuffle(&mut order);
                    for i in order {
                        let pre = self.local_field(&state, i) - theta;
                        if pre > T::zero() && state.get(i) != 1 {
                            state.set(i, 1);
                            changed = true;
                        } else if pre < T::zero() && state.get(i) != off {
                            state.set(i, off);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }

        Ok(RecallResult {
            state,
            iterations,
            converged,
        })
    }

    /// Hopfield energy `-1/2 s^T J s` of a state in the memory's coding.
    pub fn energy(&self, s: &Pattern) -> Result<T> {
        if s.n() != self.n {
            return Err(CoreError::DimensionMismatch("state vs memory".into()));
        }
        let mut e = T::zero();
        for i in 0..self.n {
            let si = T::from_i8(s.get(i)).unwrap();
            e = e + si * self.local_field(s, i);
        }
        Ok(-e / T::from_f64_lit(2.0))
    }

    /// Zero all couplings whose magnitude falls below the given quantile of
    /// the nonzero |J| distribution. Ties at the cutoff are retained.
    /// Returns the pruned memory and the retained-edge fraction.
    pub fn consolidate_prune(&self, weight_quantile: f64) -> Result<(Self, f64)> {
        if !(0.0 < weight_quantile && weight_quantile < 1.0) {
            return Err(CoreError::InvalidInput(
                "quantile must be in (0,1)".into(),
            ));
        }
        let mut mags: Vec<T> = Vec::new();
        for i in 0..self.n {
            for jj in 0..self.n {
                let v = self.j.get(i, jj);
                if i != jj && v != T::zero() {
                    mags.push(v.abs());
                }
            }
        }
        if mags.is_empty() {
            return Ok((self.clone(), 1.0));
        }
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = ((weight_quantile * mags.len() as f64).floor() as usize)
            .min(mags.len() - 1);
        let cutoff = mags[idx];

        let mut pruned = self.clone();
        let total = mags.len();
        let mut retained = 0usize;
        for i in 0..self.n {
            for jj in 0..self.n {
                if i == jj {
                    continue;
                }
                let v = pruned.j.get(i, jj);
                if v == T::zero() {
                    continue;
                }
                if v.abs() < cutoff {
                    pruned.j.set(i, jj, T::zero())?;
                } else {
                    retained += 1;
                }
            }
        }
        Ok((pruned, retained as f64 / total as f64))
    }
}

/// Keep `round(fraction * active_count)` active units of `p`, chosen at
/// random; the rest are switched off (`-1` in bipolar mode, `0` in binary).
pub fn partial_cue(rng: &mut SeedStream, p: &Pattern, fraction: f64) -> Result<Pattern> {
    if !(0.0 < fraction && fraction <= 1.0) {
        return Err(CoreError::InvalidInput(
            "fraction must be in (0,1]".into(),
        ));
    }
    let active = p.active_indices();
    let keep = (fraction * active.len() as f64).round() as usize;
    if keep == 0 {
        return Err(CoreError::InvalidInput(format!(
            "fraction {fraction} keeps zero of {} active units",
            active.len()
        )));
    }
    if keep == active.len() {
        return Ok(p.clone());
    }
    let off = match p.coding() {
        Coding::Binary => 0i8,
        Coding::Bipolar => -1i8,
    };
    let mut out = p.clone();
    let mut order = active;
    rng.shuffle(&mut order);
    for &i in &order[keep..] {
        out.set(i, off);
    }
    Ok(out)
}

/// Result of a capacity search at one `(N, a)` point.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub m_max: usize,
    /// `(M, max bit-error rate over patterns and trials)` for every probed M.
    pub error_curve: Vec<(usize, f64)>,
}

/// Capacity search parameters.
#[derive(Debug, Clone)]
pub struct CapacityConfig {
    /// A stored pattern counts as recalled when its bit-error rate from an
    /// exact cue stays at or below this.
    pub max_bit_error_rate: f64,
    pub trials_per_m: usize,
    pub max_iterations: usize,
    /// Upper bound for the doubling phase, as a multiple of N.
    pub m_ceiling_factor: usize,
    /// Coding the stored patterns use. Sparse levels only show their
    /// capacity advantage in binary coding (see the module docs).
    pub coding: Coding,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            max_bit_error_rate: 0.01,
            trials_per_m: 5,
            max_iterations: 10,
            m_ceiling_factor: 4,
            coding: Coding::Bipolar,
        }
    }
}

fn capacity_trial_ok<T: Real>(
    rng: &mut SeedStream,
    n: usize,
    a: f64,
    m: usize,
    cfg: &CapacityConfig,
) -> Result<f64> {
    let mut ps = PatternSet::new(n, cfg.coding);
    for t in 0..m {
        let mut prng = rng.split(t as u64);
        ps.push(crate::pattern::random_sparse_pattern(
            &mut prng,
            n,
            a,
            cfg.coding,
        )?)?;
    }
    let mem = AssocMemory::<T>::store_patterns(&ps)?;
    let rcfg = RecallConfig {
        max_iterations: cfg.max_iterations,
        update_mode: UpdateMode::Synchronous,
        threshold: Threshold::Auto,
    };
    let mut worst = 0.0f64;
    let mut dyn_rng = rng.split(u64::MAX);
    for p in ps.iter() {
        let r = mem.recall(p, &rcfg, &mut dyn_rng)?;
        let errs = crate::pattern::hamming_distance(&r.state, p)? as f64 / n as f64;
        worst = worst.max(errs);
    }
    Ok(worst)
}

/// Largest M such that every stored pattern is recalled from an exact cue
/// within the bit-error criterion, over all seeded trials. Doubling then
/// bisection; O(log M) probes.
pub fn measure_capacity<T: Real>(
    rng: &SeedStream,
    n: usize,
    a: f64,
    cfg: &CapacityConfig,
) -> Result<CapacityResult> {
    if n < 32 {
        return Err(CoreError::InvalidInput("need N >= 32".into()));
    }
    let mut curve = Vec::new();
    let probe = |m: usize, curve: &mut Vec<(usize, f64)>| -> Result<bool> {
        let mut worst = 0.0f64;
        for trial in 0..cfg.trials_per_m {
            let mut trng = rng.split((m as u64) << 16 | trial as u64);
            worst = worst.max(capacity_trial_ok::<T>(&mut trng, n, a, m, cfg)?);
        }
        curve.push((m, worst));
        Ok(worst <= cfg.max_bit_error_rate)
    };

    let ceiling = n * cfg.m_ceiling_factor;
    let mut lo = 1usize; // M = 1 is always recallable
    if !probe(1, &mut curve)? {
        return Ok(CapacityResult {
            m_max: 0,
            error_curve: curve,
        });
    }
    let mut hi = 2usize;
    while hi <= ceiling && probe(hi, &mut curve)? {
        lo = hi;
        hi *= 2;
    }
    if hi > ceiling {
        hi = ceiling + 1;
    }
    // Invariant: lo passes, hi fails (or exceeds the ceiling).
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if probe(mid, &mut curve)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    curve.sort_by_key(|&(m, _)| m);
    curve.dedup_by_key(|&mut (m, _)| m);
    Ok(CapacityResult {
        m_max: lo,
        error_curve: curve,
    })
}
