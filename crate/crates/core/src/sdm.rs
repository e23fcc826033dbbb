//! Sparse distributed memory over random hard locations.
//!
//! Addresses live in `{0,1}^n`. A query activates every hard location within
//! a Hamming radius; writes increment/decrement saturating counters in the
//! activated rows; reads sum counters column-wise and threshold at zero.
//! A Top-K / L2-normalized competitive layer covers the continual-learning
//! variant.

use crate::error::{CoreError, Result};
use crate::pattern::{hamming_distance, Coding, Pattern};
use crate::rng::SeedStream;

/// Construction parameters for a store.
#[derive(Debug, Clone)]
pub struct SdmConfig {
    pub n: usize,
    /// Number of hard locations.
    pub h: usize,
    /// Activation Hamming radius.
    pub radius: usize,
    /// Saturation bound for counters.
    pub counter_limit: i32,
}

impl SdmConfig {
    /// Radius giving an expected activation fraction near `p_target`
    /// (binomial tail of Bin(n, 1/2) via normal approximation).
    /// Default target: 0.5% of the hard locations.
    pub fn radius_for_activation(n: usize, p_target: f64) -> usize {
        // Inverse normal CDF via bisection on erf; desk-scale accuracy.
        let mean = n as f64 / 2.0;
        let sd = (n as f64 / 4.0).sqrt();
        let z = inverse_normal_cdf(p_target);
        ((mean + z * sd).floor().max(0.0)) as usize
    }

    pub fn with_default_radius(n: usize, h: usize) -> Self {
        Self {
            n,
            h,
            radius: Self::radius_for_activation(n, 0.005),
            counter_limit: 127,
        }
    }
}

fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(0.0 < p && p < 1.0);
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

// Abramowitz-Stegun 7.1.26, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let y = 1.0
        - (((((1.061_405_429 * t - 1.453_152_027) * t) + 1.421_413_741) * t
            - 0.284_496_736)
            * t
            + 0.254_829_592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Read result plus degeneracy metadata.
#[derive(Debug, Clone)]
pub struct ReadResult {
    pub data: Pattern,
    /// Number of hard locations that contributed.
    pub activated: usize,
    /// True when every column sum was exactly zero.
    pub all_ties: bool,
}

#[derive(Debug, Clone)]
pub struct IterativeReadResult {
    pub data: Pattern,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a period-2 oscillation was detected; holds the other state.
    pub oscillating_with: Option<Pattern>,
}

/// Outcome of a write: which locations were touched.
#[derive(Debug, Clone)]
pub struct WriteReceipt {
    pub activated: usize,
}

/// Hard-location store. Addresses are fixed at construction; only the
/// counters change.
#[derive(Debug, Clone)]
pub struct SdmStore {
    n: usize,
    radius: usize,
    counter_limit: i32,
    seed: u64,
    addresses: Vec<Pattern>,
    /// H x n, row-major.
    counters: Vec<i32>,
}

impl SdmStore {
    /// Sample `h` hard locations uniformly over `{0,1}^n`.
    pub fn new(rng: &mut SeedStream, cfg: &SdmConfig) -> Result<Self> {
        if cfg.n == 0 || cfg.h == 0 {
            return Err(CoreError::InvalidInput("need n >= 1 and h >= 1".into()));
        }
        if cfg.counter_limit <= 0 {
            return Err(CoreError::InvalidInput(
                "counter_limit must be positive".into(),
            ));
        }
        let seed = rng.seed();
        let addresses = (0..cfg.h)
            .map(|_| {
                let bits = (0..cfg.n)
                    .map(|_| (rng.next_u64() & 1) as i8)
                    .collect::<Vec<_>>();
                Pattern::new(bits, Coding::Binary)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: cfg.n,
            radius: cfg.radius,
            counter_limit: cfg.counter_limit,
            seed,
            addresses,
            counters: vec![0; cfg.h * cfg.n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.addresses.len()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn counter_limit(&self) -> i32 {
        self.counter_limit
    }

    pub fn counters_row(&self, h: usize) -> &[i32] {
        &self.counters[h * self.n..(h + 1) * self.n]
    }

    pub fn address(&self, h: usize) -> &Pattern {
        &self.addresses[h]
    }

    /// Indices of hard locations within the Hamming radius of `addr`.
    /// An empty set is a legal outcome.
    pub fn activate(&self, addr: &Pattern) -> Result<Vec<usize>> {
        if addr.n() != self.n {
            return Err(CoreError::DimensionMismatch(format!(
                "address {} vs store {}",
                addr.n(),
                self.n
            )));
        }
        let addr = addr.to_binary();
        let mut out = Vec::new();
        for (i, a) in self.addresses.iter().enumerate() {
            if hamming_distance(a, &addr)? <= self.radius {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Increment counters for 1-bits, decrement for 0-bits, in every
    /// activated location. Saturates at the counter limit. Returns how many
    /// locations were written; zero means the write landed nowhere.
    pub fn write(&mut self, addr: &Pattern, data: &Pattern) -> Result<WriteReceipt> {
        if data.n() != self.n {
            return Err(CoreError::DimensionMismatch("data vs store".into()));
        }
        let active = self.activate(addr)?;
        let data = data.to_binary();
        let limit = self.counter_limit;
        for &h in &active {
            let row = &mut self.counters[h * self.n..(h + 1) * self.n];
            for (c, &b) in row.iter_mut().zip(data.bits()) {
                let delta = if b == 1 { 1 } else { -1 };
                *c = (*c + delta).clamp(-limit, limit);
            }
        }
        Ok(WriteReceipt {
            activated: active.len(),
        })
    }

    /// Column sums over activated locations, thresholded at zero.
    /// Sum > 0 gives bit 1, sum < 0 gives 0, an exact tie gives 0.
    ///
    /// Errors when no location activates; a degenerate all-tie read (for
    /// example from an empty store) is flagged in the result instead.
    pub fn read(&self, addr: &Pattern) -> Result<ReadResult> {
        let active = self.activate(addr)?;
        if active.is_empty() {
            return Err(CoreError::EmptyActivation);
        }
        let mut sums = vec![0i64; self.n];
        for &h in &active {
            for (s, &c) in sums.iter_mut().zip(self.counters_row(h)) {
                *s += c as i64;
            }
        }
        let bits: Vec<i8> = sums.iter().map(|&s| (s > 0) as i8).collect();
        Ok(ReadResult {
            data: Pattern::new(bits, Coding::Binary)?,
            activated: active.len(),
            all_ties: sums.iter().all(|&s| s == 0),
        })
    }

    /// Autoassociative iterative read: feed the read output back as the
    /// address until a fixed point, a period-2 oscillation, or the cap.
    pub fn read_iterative(
        &self,
        cue: &Pattern,
        max_iters: usize,
    ) -> Result<IterativeReadResult> {
        let mut prev = cue.to_binary();
        let mut before_prev: Option<Pattern> = None;
        for it in 0..max_iters {
            let r = self.read(&prev)?;
            if r.data == prev {
                return Ok(IterativeReadResult {
                    data: r.data,
                    iterations: it,
                    converged: true,
                    oscillating_with: None,
                });
            }
            if before_prev.as_ref() == Some(&r.data) {
                return Ok(IterativeReadResult {
                    data: r.data,
                    iterations: it + 1,
                    converged: false,
                    oscillating_with: Some(prev),
                });
            }
            before_prev = Some(std::mem::replace(&mut prev, r.data));
        }
        Ok(IterativeReadResult {
            data: prev,
            iterations: max_iters,
            converged: false,
            oscillating_with: None,
        })
    }

    /// Binary snapshot: header (n, H, r, counter_limit, seed), address block
    /// (one byte per bit), counter block (little-endian i32). Round-trips
    /// bit-exactly.
    pub fn save<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        for v in [
            self.n as u64,
            self.h() as u64,
            self.radius as u64,
            self.counter_limit as u64,
            self.seed,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for a in &self.addresses {
            let bytes: Vec<u8> = a.bits().iter().map(|&b| b as u8).collect();
            w.write_all(&bytes)?;
        }
        for &c in &self.counters {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: std::io::Read>(r: &mut R) -> Result<Self> {
        let mut u64buf = [0u8; 8];
        let mut head = [0u64; 5];
        for v in head.iter_mut() {
            r.read_exact(&mut u64buf)?;
            *v = u64::from_le_bytes(u64buf);
        }
        let (n, h, radius, counter_limit, seed) = (
            head[0] as usize,
            head[1] as usize,
            head[2] as usize,
            head[3] as i32,
            head[4],
        );
        let mut addresses = Vec::with_capacity(h);
        let mut row = vec![0u8; n];
        for _ in 0..h {
            r.read_exact(&mut row)?;
            addresses.push(Pattern::new(
                row.iter().map(|&b| b as i8).collect(),
                Coding::Binary,
            )?);
        }
        let mut counters = vec![0i32; h * n];
        let mut i32buf = [0u8; 4];
        for c in counters.iter_mut() {
            r.read_exact(&mut i32buf)?;
            *c = i32::from_le_bytes(i32buf);
        }
        Ok(Self {
            n,
            radius,
            counter_limit,
            seed,
            addresses,
            counters,
        })
    }
}

/// Competitive linear layer with Top-K masking and unit-norm rows.
#[derive(Debug, Clone)]
pub struct TopKLayer {
    /// m x n, row-major; every row unit Euclidean norm.
    weights: Vec<f64>,
    m: usize,
    n: usize,
    k: usize,
}

impl TopKLayer {
    pub fn new(rng: &mut SeedStream, m: usize, n: usize, k: usize) -> Result<Self> {
        if !(1 <= k && k <= m) {
            return Err(CoreError::InvalidInput("need 1 <= k <= m".into()));
        }
        let mut weights = vec![0.0; m * n];
        for row in weights.chunks_mut(n) {
            for w in row.iter_mut() {
                *w = rng.normal();
            }
            normalize(row);
        }
        Ok(Self { weights, m, n, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// `y = Wx` with all but the k largest entries zeroed. Ties at the k-th
    /// value are broken toward the lowest index.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(CoreError::DimensionMismatch("input vs layer".into()));
        }
        let y: Vec<f64> = (0..self.m)
            .map(|i| self.row(i).iter().zip(x).map(|(w, xi)| w * xi).sum())
            .collect();
        let winners = top_k_indices(&y, self.k);
        let mut out = vec![0.0; self.m];
        for i in winners {
            out[i] = y[i];
        }
        Ok(out)
    }

    /// Indices of the k winning units for input `x`.
    pub fn winners(&self, x: &[f64]) -> Result<Vec<usize>> {
        let y: Vec<f64> = (0..self.m)
            .map(|i| self.row(i).iter().zip(x).map(|(w, xi)| w * xi).sum())
            .collect();
        if x.len() != self.n {
            return Err(CoreError::DimensionMismatch("input vs layer".into()));
        }
        Ok(top_k_indices(&y, self.k))
    }

    /// Projection of `x` onto the winner rows: `Σ (w_i . x) w_i`.
    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        let winners = self.winners(x)?;
        let mut out = vec![0.0; self.n];
        for i in winners {
            let score: f64 = self.row(i).iter().zip(x).map(|(w, v)| w * v).sum();
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += score * w;
            }
        }
        Ok(out)
    }

    /// Move winner rows toward the (unit-norm) input, then re-normalize.
    pub fn hebbian_update(&mut self, x: &[f64], lr: f64) -> Result<()> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CoreError::InvalidInput("zero-vector input".into()));
        }
        if (norm - 1.0).abs() > 1e-6 {
            return Err(CoreError::InvalidInput(format!(
                "input must be unit norm, got |x| = {norm}"
            )));
        }
        let winners = self.winners(x)?;
        for i in winners {
            let row = &mut self.weights[i * self.n..(i + 1) * self.n];
            for (w, &xi) in row.iter_mut().zip(x) {
                *w += lr * (xi - *w);
            }
            normalize(row);
        }
        Ok(())
    }
}

fn normalize(row: &mut [f64]) {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for w in row.iter_mut() {
            *w /= norm;
        }
    }
}

/// Indices of the k largest values; ties broken toward the lowest index.
fn top_k_indices(y: &[f64], k: usize) -> Vec<usize> {
    let mut ix: Vec<usize> = (0..y.len()).collect();
    ix.sort_by(|&a, &b| {
        y[b].partial_cmp(&y[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    ix.truncate(k);
    ix
}

#[cfg(test)]
mod tests {
    use super::*;
    

    fn store(seed: u64, n: usize, h: usize, radius: usize) -> SdmStore {
        let mut rng = SeedStream::new(seed);
        SdmStore::new(
            &mut rng,
            &SdmConfig {
                n,
                h,
                radius,
                counter_limit: 127,
            },
        )
        .unwrap()
    }

    fn random_bits(rng: &mut SeedStream, n: usize) -> Pattern {
        Pattern::new(
            (0..n).map(|_| (rng.next_u64() & 1) as i8).collect(),
            Coding::Binary,
        )
        .unwrap()
    }

    #[test]
    fn activate_full_radius_hits_everything() {
        let s = store(1, 16, 50, 16);
        let mut rng = SeedStream::new(2);
        let addr = random_bits(&mut rng, 16);
        assert_eq!(s.activate(&addr).unwrap().len(), 50);
    }

    #[test]
    fn activate_radius_zero_exact_match() {
        let s = store(1, 16, 50, 0);
        let addr = s.address(7).clone();
        let hits = s.activate(&addr).unwrap();
        // The exact address always activates; duplicates are possible but
        // unlikely at this scale.
        assert!(hits.contains(&7));
        for h in hits {
            assert_eq!(hamming_distance(s.address(h), &addr).unwrap(), 0);
        }
    }

    #[test]
    fn activate_matches_brute_force() {
        let s = store(4, 16, 200, 5);
        let mut rng = SeedStream::new(5);
        let addr = random_bits(&mut rng, 16);
        let fast = s.activate(&addr).unwrap();
        let brute: Vec<usize> = (0..200)
            .filter(|&i| hamming_distance(s.address(i), &addr).unwrap() <= 5)
            .collect();
        assert_eq!(fast, brute);
    }

    #[test]
    fn write_changes_counters_by_one() {
        let mut s = store(9, 32, 100, 14);
        let mut rng = SeedStream::new(10);
        let addr = random_bits(&mut rng, 32);
        let data = random_bits(&mut rng, 32);
        let active = s.activate(&addr).unwrap();
        let receipt = s.write(&addr, &data).unwrap();
        assert_eq!(receipt.activated, active.len());
        for &h in &active {
            for (j, &c) in s.counters_row(h).iter().enumerate() {
                let expect = if data.get(j) == 1 { 1 } else { -1 };
                assert_eq!(c, expect);
            }
        }
    }

    #[test]
    fn double_write_and_complement_cancel() {
        let mut s = store(9, 32, 100, 14);
        let mut rng = SeedStream::new(11);
        let addr = random_bits(&mut rng, 32);
        let data = random_bits(&mut rng, 32);
        s.write(&addr, &data).unwrap();
        s.write(&addr, &data).unwrap();
        for &h in &s.activate(&addr).unwrap() {
            for (j, &c) in s.counters_row(h).iter().enumerate() {
                assert_eq!(c.abs(), 2, "bit {j}");
            }
        }
        s.write(&addr, &data.complement()).unwrap();
        s.write(&addr, &data.complement()).unwrap();
        for &h in &s.activate(&addr).unwrap() {
            assert!(s.counters_row(h).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn write_order_independent() {
        let mut rng = SeedStream::new(21);
        let pairs: Vec<(Pattern, Pattern)> = (0..6)
            .map(|_| (random_bits(&mut rng, 24), random_bits(&mut rng, 24)))
            .collect();
        let mut a = store(2, 24, 80, 10);
        let mut b = store(2, 24, 80, 10);
        for (addr, data) in &pairs {
            a.write(addr, data).unwrap();
        }
        for (addr, data) in pairs.iter().rev() {
            b.write(addr, data).unwrap();
        }
        assert_eq!(a.counters, b.counters);
    }

    #[test]
    fn saturation_never_wraps() {
        let mut s = store(3, 16, 40, 16); // radius n: all locations active
        let mut rng = SeedStream::new(30);
        let addr = random_bits(&mut rng, 16);
        let data = random_bits(&mut rng, 16);
        for _ in 0..(10 * 127) {
            s.write(&addr, &data).unwrap();
        }
        for h in 0..s.h() {
            for &c in s.counters_row(h) {
                assert_eq!(c.abs(), 127);
            }
        }
    }

    #[test]
    fn single_pair_round_trip() {
        let mut s = store(7, 32, 500, 12);
        let mut rng = SeedStream::new(40);
        let addr = random_bits(&mut rng, 32);
        let data = random_bits(&mut rng, 32);
        assert!(s.write(&addr, &data).unwrap().activated >= 1);
        let r = s.read(&addr).unwrap();
        assert_eq!(r.data, data);
        assert!(!r.all_ties);
    }

    #[test]
    fn empty_store_read_is_degenerate() {
        let s = store(7, 16, 50, 16);
        let mut rng = SeedStream::new(41);
        let r = s.read(&random_bits(&mut rng, 16)).unwrap();
        assert!(r.all_ties);
        assert_eq!(r.data.active_count(), 0);
    }

    #[test]
    fn no_activation_read_errors() {
        let s = store(7, 64, 4, 0);
        let mut rng = SeedStream::new(42);
        let addr = random_bits(&mut rng, 64);
        // Radius 0 with 4 random locations: almost surely nothing activates.
        if s.activate(&addr).unwrap().is_empty() {
            assert!(matches!(s.read(&addr), Err(CoreError::EmptyActivation)));
        }
    }

    #[test]
    fn corrupted_cue_reads_closer_than_random_address() {
        // 20 random pairs; reading at a corrupted stored address must land
        // nearer the payload than reading at a fresh random address does.
        let n = 256;
        let cfg = SdmConfig::with_default_radius(n, 1000);
        let root = SeedStream::new(50);
        let mut ok = 0;
        let trials = 50;
        for t in 0..trials {
            let mut rng = root.split(t);
            let mut s = SdmStore::new(&mut rng.split(0), &cfg).unwrap();
            let pairs: Vec<(Pattern, Pattern)> = (0..20)
                .map(|_| (random_bits(&mut rng, n), random_bits(&mut rng, n)))
                .collect();
            for (a, d) in &pairs {
                s.write(a, d).unwrap();
            }
            let (a0, d0) = &pairs[0];
            let corrupted = a0.with_flipped(&mut rng, n / 10);
            let near = match s.read(&corrupted) {
                Ok(r) => hamming_distance(&r.data, d0).unwrap(),
                Err(_) => n,
            };
            let far_addr = random_bits(&mut rng, n);
            let far = match s.read(&far_addr) {
                Ok(r) => hamming_distance(&r.data, d0).unwrap(),
                Err(_) => n,
            };
            if near < far {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.8 * trials as f64, "only {ok}/{trials}");
    }

    #[test]
    fn iterative_read_fixed_point_at_stored_pattern() {
        let n = 128;
        let cfg = SdmConfig::with_default_radius(n, 800);
        let mut rng = SeedStream::new(60);
        let mut s = SdmStore::new(&mut rng.split(0), &cfg).unwrap();
        let p = random_bits(&mut rng, n);
        s.write(&p, &p).unwrap();
        let r = s.read_iterative(&p, 10).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
        assert_eq!(r.data, p);
    }

    #[test]
    fn iterative_read_converges_within_critical_distance() {
        let n = 128;
        let cfg = SdmConfig::with_default_radius(n, 800);
        let mut rng = SeedStream::new(61);
        let mut s = SdmStore::new(&mut rng.split(0), &cfg).unwrap();
        let pats: Vec<Pattern> = (0..5).map(|_| random_bits(&mut rng, n)).collect();
        for p in &pats {
            s.write(p, p).unwrap();
        }
        let cue = pats[0].with_flipped(&mut rng, n / 10);
        let r = s.read_iterative(&cue, 20).unwrap();
        assert!(r.converged);
        assert_eq!(r.data, pats[0]);
    }

    #[test]
    fn far_cue_never_silent_success() {
        let n = 128;
        let cfg = SdmConfig::with_default_radius(n, 800);
        let mut rng = SeedStream::new(62);
        let mut s = SdmStore::new(&mut rng.split(0), &cfg).unwrap();
        let pats: Vec<Pattern> = (0..5).map(|_| random_bits(&mut rng, n)).collect();
        for p in &pats {
            s.write(p, p).unwrap();
        }
        let cue = random_bits(&mut rng, n); // ~n/2 from everything
        let r = s.read_iterative(&cue, 20).unwrap();
        // Either flagged non-converged, or whatever it settled on is far
        // from every stored pattern — never a quiet wrong "success".
        if r.converged {
            let min_d = pats
                .iter()
                .map(|p| hamming_distance(&r.data, p).unwrap())
                .min()
                .unwrap();
            assert!(min_d > n / 8, "converged onto a stored pattern from noise");
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let mut s = store(77, 48, 60, 20);
        let mut rng = SeedStream::new(70);
        for _ in 0..5 {
            let a = random_bits(&mut rng, 48);
            let d = random_bits(&mut rng, 48);
            s.write(&a, &d).unwrap();
        }
        let mut buf = Vec::new();
        s.save(&mut buf).unwrap();
        let loaded = SdmStore::load(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.counters, s.counters);
        assert_eq!(loaded.n, s.n);
        assert_eq!(loaded.radius, s.radius);
        assert_eq!(loaded.counter_limit, s.counter_limit);
        assert_eq!(loaded.seed, s.seed);
        for i in 0..s.h() {
            assert_eq!(loaded.address(i), s.address(i));
        }
        let mut buf2 = Vec::new();
        loaded.save(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn topk_forward_limits() {
        let mut rng = SeedStream::new(80);
        let l = TopKLayer::new(&mut rng, 6, 8, 6).unwrap();
        let x: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
        // k == m: plain linear map.
        let y = l.forward(&x).unwrap();
        for i in 0..6 {
            let direct: f64 = l.row(i).iter().zip(&x).map(|(w, v)| w * v).sum();
            assert_eq!(y[i], direct);
        }
        // k == 1: single nonzero at the argmax.
        let l1 = TopKLayer::new(&mut rng, 6, 8, 1).unwrap();
        let y1 = l1.forward(&x).unwrap();
        assert_eq!(y1.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn topk_matches_sort_oracle() {
        let mut rng = SeedStream::new(81);
        let l = TopKLayer::new(&mut rng, 32, 16, 5).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..16).map(|_| rng.normal()).collect();
            let y = l.forward(&x).unwrap();
            let mut scored: Vec<(f64, usize)> = (0..32)
                .map(|i| {
                    let s: f64 = l.row(i).iter().zip(&x).map(|(w, v)| w * v).sum();
                    (s, i)
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let expect: std::collections::BTreeSet<usize> =
                scored[..5].iter().map(|&(_, i)| i).collect();
            let got: std::collections::BTreeSet<usize> = (0..32)
                .filter(|&i| y[i] != 0.0)
                .collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn topk_update_keeps_unit_rows_and_fixed_points() {
        let mut rng = SeedStream::new(82);
        let mut l = TopKLayer::new(&mut rng, 8, 12, 2).unwrap();
        for _ in 0..1000 {
            let mut x: Vec<f64> = (0..12).map(|_| rng.normal()).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v /= norm;
            }
            l.hebbian_update(&x, 0.1).unwrap();
            for i in 0..8 {
                let n: f64 = l.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-9);
            }
        }
        // Updating with an existing row leaves it unchanged.
        let row0: Vec<f64> = l.row(0).to_vec();
        l.hebbian_update(&row0, 0.3).unwrap();
        for (a, b) in l.row(0).iter().zip(&row0) {
            assert!((a - b).abs() < 1e-12);
        }
        // Zero input rejected.
        assert!(l.hebbian_update(&vec![0.0; 12], 0.1).is_err());
    }

    #[test]
    fn topk_clusters_specialize_disjointly() {
        let mut rng = SeedStream::new(83);
        let mut l = TopKLayer::new(&mut rng, 8, 10, 2).unwrap();
        let mk_cluster = |rng: &mut SeedStream, center: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = center
                .iter()
                .map(|&c| c + 0.05 * rng.normal())
                .collect();
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= n);
            x
        };
        let mut c1 = vec![0.0; 10];
        c1[0] = 1.0;
        let mut c2 = vec![0.0; 10];
        c2[7] = -1.0;
        for _ in 0..500 {
            let x1 = mk_cluster(&mut rng, &c1);
            l.hebbian_update(&x1, 0.05).unwrap();
            let x2 = mk_cluster(&mut rng, &c2);
            l.hebbian_update(&x2, 0.05).unwrap();
        }
        let w1: std::collections::BTreeSet<usize> =
            l.winners(&mk_cluster(&mut rng, &c1)).unwrap().into_iter().collect();
        let w2: std::collections::BTreeSet<usize> =
            l.winners(&mk_cluster(&mut rng, &c2)).unwrap().into_iter().collect();
        assert!(w1.is_disjoint(&w2), "{w1:?} vs {w2:?}");
    }

    #[test]
    fn topk_retains_first_task_better_than_full_k() {
        // Train on cluster A, then cluster B, with the same budget. Sparse
        // winner sets leave A's specialists untouched during B; with k = m
        // every row chases B and A's reconstruction degrades.
        let n = 10;
        let err_after = |k: usize| -> f64 {
            let mut rng = SeedStream::new(84);
            let mut l = TopKLayer::new(&mut rng, 8, n, k).unwrap();
            let unit = |mut x: Vec<f64>| {
                let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= s);
                x
            };
            let sample = |rng: &mut SeedStream, axis: usize, sign: f64| {
                let mut x = vec![0.0; n];
                x[axis] = sign;
                for v in x.iter_mut() {
                    *v += 0.05 * rng.normal();
                }
                unit(x)
            };
            for _ in 0..400 {
                let x = sample(&mut rng, 0, 1.0);
                l.hebbian_update(&x, 0.05).unwrap();
            }
            for _ in 0..400 {
                let x = sample(&mut rng, 7, -1.0);
                l.hebbian_update(&x, 0.05).unwrap();
            }
            let mut err = 0.0;
            for _ in 0..100 {
                let x = sample(&mut rng, 0, 1.0);
                let r = l.reconstruct(&x).unwrap();
                err += x
                    .iter()
                    .zip(&r)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            err / 100.0
        };
        let sparse = err_after(2);
        let full = err_after(8);
        assert!(sparse < full, "sparse {sparse} vs full {full}");
    }

    #[test]
    fn read_error_rate_monotone_in_load() {
        // Statistical: more stored pairs, more read errors.
        let n = 64;
        let cfg = SdmConfig::with_default_radius(n, 300);
        let root = SeedStream::new(90);
        let mut rates = Vec::new();
        for &m in &[2usize, 20, 120] {
            let mut total_err = 0usize;
            let mut total_bits = 0usize;
            for t in 0..10u64 {
                let mut rng = root.split((m as u64) << 8 | t);
                let mut s = SdmStore::new(&mut rng.split(0), &cfg).unwrap();
                let pairs: Vec<(Pattern, Pattern)> = (0..m)
                    .map(|_| (random_bits(&mut rng, n), random_bits(&mut rng, n)))
                    .collect();
                for (a, d) in &pairs {
                    s.write(a, d).unwrap();
                }
                for (a, d) in pairs.iter().take(2) {
                    if let Ok(r) = s.read(a) {
                        total_err += hamming_distance(&r.data, d).unwrap();
                        total_bits += n;
                    }
                }
            }
            rates.push(total_err as f64 / total_bits.max(1) as f64);
        }
        assert!(rates[0] <= rates[1] + 0.02 && rates[1] <= rates[2] + 0.02, "{rates:?}");
    }
}
