//! Leaky integrate-and-fire network with spike-timing-dependent plasticity.
//!
//! Excitatory synapses follow pair-based Hebbian STDP; the inhibitory
//! population is split into a Hebbian and an anti-Hebbian half, both plastic
//! on their projections to excitatory cells. Nearest-neighbor spike pairing,
//! additive updates, hard weight bounds, 1-step conduction delay.
//!
//! The assembly experiment repeatedly stimulates disjoint groups of
//! excitatory neurons and reports modularity, per-neuron stimulus
//! selectivity, cued recall, and resting-state statistics.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::rng::SeedStream;

/// Leaky integrate-and-fire parameters (shared within a population).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LifParams {
    pub v_rest: f64,
    pub v_thresh: f64,
    pub v_reset: f64,
    /// Membrane time constant, ms.
    pub tau_m: f64,
    /// Absolute refractory period, ms.
    pub t_ref: f64,
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_reset <= self.v_rest && self.v_rest < self.v_thresh) {
            return Err(CoreError::Config(
                "need v_reset <= v_rest < v_thresh".into(),
            ));
        }
        if self.tau_m <= 0.0 || self.t_ref < 0.0 {
            return Err(CoreError::Config("bad time constants".into()));
        }
        Ok(())
    }

    /// Closed-form inter-spike interval under constant drive `i_drive`
    /// (added to the membrane equation in mV/ms), ignoring noise.
    pub fn isi_for_constant_current(&self, i_drive: f64) -> Option<f64> {
        // dv/dt = (v_rest - v)/tau + i_drive; asymptote v_inf = v_rest + tau*i_drive.
        let v_inf = self.v_rest + self.tau_m * i_drive;
        if v_inf <= self.v_thresh {
            return None;
        }
        let t = self.tau_m
            * ((v_inf - self.v_reset) / (v_inf - self.v_thresh)).ln();
        Some(t + self.t_ref)
    }
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            v_rest: -65.0,
            v_thresh: -50.0,
            v_reset: -65.0,
            tau_m: 20.0,
            t_ref: 2.0,
        }
    }
}

/// Sign pattern of a pair-based STDP kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarity {
    Hebbian,
    AntiHebbian,
}

/// Exponential pair-based STDP kernel with hard weight bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StdpRule {
    pub a_plus: f64,
    pub a_minus: f64,
    /// Decay constants, ms.
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub polarity: Polarity,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for StdpRule {
    /// Desk-scale defaults: slight depression dominance for stability.
    fn default() -> Self {
        Self {
            a_plus: 0.01,
            a_minus: 0.012,
            tau_plus: 20.0,
            tau_minus: 20.0,
            polarity: Polarity::Hebbian,
            w_min: 0.0,
            w_max: 1.0,
        }
    }
}

impl StdpRule {
    pub fn validate(&self) -> Result<()> {
        if self.tau_plus <= 0.0 || self.tau_minus <= 0.0 {
            return Err(CoreError::Config("tau must be positive".into()));
        }
        if self.w_min > self.w_max {
            return Err(CoreError::Config("w_min > w_max".into()));
        }
        Ok(())
    }
}

/// Weight change for a spike pair with `dt_spike = t_post - t_pre` (ms).
///
/// Hebbian: potentiation when the presynaptic spike leads (`dt > 0`),
/// depression when it lags. Exactly coincident spikes change nothing.
/// Anti-Hebbian flips both signs.
pub fn stdp_delta(rule: &StdpRule, dt_spike: f64) -> f64 {
    let hebbian = if dt_spike > 0.0 {
        rule.a_plus * (-dt_spike / rule.tau_plus).exp()
    } else if dt_spike < 0.0 {
        -rule.a_minus * (dt_spike / rule.tau_minus).exp()
    } else {
        0.0
    };
    match rule.polarity {
        Polarity::Hebbian => hebbian,
        Polarity::AntiHebbian => -hebbian,
    }
}

/// Calcium-threshold plasticity: no change below the depression threshold,
/// depression between the thresholds, potentiation above the upper one.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CalciumRule {
    pub theta_ltd: f64,
    pub theta_ltp: f64,
    pub rate_ltd: f64,
    pub rate_ltp: f64,
    /// Calcium added per pre / post spike.
    pub ca_pre: f64,
    pub ca_post: f64,
    /// Calcium decay constant, ms.
    pub tau_ca: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl CalciumRule {
    pub fn validate(&self) -> Result<()> {
        if self.theta_ltd >= self.theta_ltp {
            return Err(CoreError::Config(
                "need theta_ltd < theta_ltp".into(),
            ));
        }
        Ok(())
    }
}

/// Piecewise weight drift for one synapse over `dt` ms at calcium level `ca`.
pub fn calcium_update(rule: &CalciumRule, ca: f64, w: f64, dt: f64) -> Result<f64> {
    rule.validate()?;
    if ca < 0.0 {
        return Err(CoreError::InvalidInput("calcium must be >= 0".into()));
    }
    let w = if ca >= rule.theta_ltp {
        w + rule.rate_ltp * dt
    } else if ca >= rule.theta_ltd {
        w - rule.rate_ltd * dt
    } else {
        w
    };
    Ok(w.clamp(rule.w_min, rule.w_max))
}

/// Plasticity assignment for a synapse class.
#[derive(Debug, Clone, Copy)]
pub enum SynapsePlasticity {
    Static,
    Stdp(StdpRule),
}

/// Network dimensions and wiring.
#[derive(Debug, Clone, Serialize)]
pub struct NetConfig {
    pub n_exc: usize,
    /// Inhibitory population; split evenly into a Hebbian and an
    /// anti-Hebbian half (plastic onto excitatory cells).
    pub n_inh: usize,
    pub lif: LifParams,
    /// Connection probability for every projection.
    pub p_conn: f64,
    /// Initial / static weight scales (voltage jumps, mV).
    pub w_ee_init: f64,
    pub w_ee_max: f64,
    pub w_ei: f64,
    pub w_ie_init: f64,
    pub w_ie_max: f64,
    pub w_ii: f64,
    /// Std-dev of the per-step Gaussian noise current, mV/ms.
    pub noise_std: f64,
    /// Constant background drive, mV/ms.
    pub background_drive: f64,
    pub exc_stdp: StdpRule,
    pub inh_hebbian_stdp: StdpRule,
    pub inh_anti_stdp: StdpRule,
    /// Disable plasticity on the anti-Hebbian inhibitory half (ablation).
    pub ablate_anti_hebbian: bool,
    /// Simulation step, ms; must be <= 1.
    pub dt: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        // Assembly-formation tuning (logged in every report): a tall,
        // narrow potentiation lobe inside a depression-dominant integral
        // (a_plus*tau_plus < a_minus*tau_minus). Near-synchronous spikes
        // from the pulsed co-stimulation bind a group; uncorrelated
        // pairings net-depress, keeping between-group weights low.
        let exc_stdp = StdpRule {
            a_plus: 0.03,
            tau_plus: 5.0,
            w_max: 1.0,
            ..StdpRule::default()
        };
        let inh_hebbian_stdp = StdpRule {
            w_max: 1.5,
            ..StdpRule::default()
        };
        let inh_anti_stdp = StdpRule {
            polarity: Polarity::AntiHebbian,
            ..inh_hebbian_stdp
        };
        Self {
            n_exc: 200,
            n_inh: 50,
            lif: LifParams::default(),
            p_conn: 0.2,
            w_ee_init: 0.1,
            w_ee_max: 0.5,
            w_ei: 0.3,
            w_ie_init: 0.4,
            w_ie_max: 1.5,
            w_ii: 0.3,
            noise_std: 2.2,
            background_drive: 0.0,
            exc_stdp,
            inh_hebbian_stdp,
            inh_anti_stdp,
            ablate_anti_hebbian: false,
            dt: 0.1,
        }
    }
}

/// One spike: (neuron index, time in ms).
pub type Spike = (usize, f64);

/// Dense sparse-masked weight matrix: `w[pre][post]`, zero where unconnected.
struct Projection {
    n_post: usize,
    w: Vec<f64>,
    connected: Vec<bool>,
}

impl Projection {
    fn random(rng: &mut SeedStream, n_pre: usize, n_post: usize, p: f64, w0: f64) -> Self {
        let mut w = vec![0.0; n_pre * n_post];
        let mut connected = vec![false; n_pre * n_post];
        for i in 0..n_pre * n_post {
            if rng.uniform() < p {
                connected[i] = true;
                w[i] = w0 * (0.5 + rng.uniform());
            }
        }
        Self {
            n_post,
            w,
            connected,
        }
    }

    #[inline]
    fn idx(&self, pre: usize, post: usize) -> usize {
        pre * self.n_post + post
    }
}

/// The network. Indices `0..n_exc` are excitatory; `n_exc..` inhibitory,
/// with the first half of the inhibitory range Hebbian and the second half
/// anti-Hebbian.
pub struct SpikingNet {
    pub cfg: NetConfig,
    // Membrane state.
    v: Vec<f64>,
    refrac: Vec<f64>,
    last_spike: Vec<f64>,
    spiked_last_step: Vec<bool>,
    time_ms: f64,
    rng: SeedStream,
    // Projections.
    ee: Projection,
    ei: Projection,
    ie: Projection,
    ii: Projection,
    total_spikes: u64,
}

impl SpikingNet {
    pub fn new(mut rng: SeedStream, cfg: NetConfig) -> Result<Self> {
        cfg.lif.validate()?;
        cfg.exc_stdp.validate()?;
        cfg.inh_hebbian_stdp.validate()?;
        cfg.inh_anti_stdp.validate()?;
        if !(cfg.dt > 0.0 && cfg.dt <= 1.0) {
            return Err(CoreError::Config("need 0 < dt <= 1 ms".into()));
        }
        let (ne, ni) = (cfg.n_exc, cfg.n_inh);
        let n = ne + ni;
        let ee = Projection::random(&mut rng, ne, ne, cfg.p_conn, cfg.w_ee_init);
        let ei = Projection::random(&mut rng, ne, ni, cfg.p_conn, cfg.w_ei);
        let ie = Projection::random(&mut rng, ni, ne, cfg.p_conn, cfg.w_ie_init);
        let ii = Projection::random(&mut rng, ni, ni, cfg.p_conn, cfg.w_ii);
        Ok(Self {
            v: vec![cfg.lif.v_rest; n],
            refrac: vec![0.0; n],
            last_spike: vec![f64::NEG_INFINITY; n],
            spiked_last_step: vec![false; n],
            time_ms: 0.0,
            rng,
            cfg,
            ee,
            ei,
            ie,
            ii,
            total_spikes: 0,
        })
    }

    pub fn n_total(&self) -> usize {
        self.cfg.n_exc + self.cfg.n_inh
    }

    pub fn time_ms(&self) -> f64 {
        self.time_ms
    }

    pub fn membrane(&self, i: usize) -> f64 {
        self.v[i]
    }

    pub fn ee_weight(&self, pre: usize, post: usize) -> f64 {
        self.ee.w[self.ee.idx(pre, post)]
    }

    pub fn ee_connected(&self, pre: usize, post: usize) -> bool {
        self.ee.connected[self.ee.idx(pre, post)]
    }

    /// Force a direct connection (testing protocols).
    pub fn connect_ee(&mut self, pre: usize, post: usize, w: f64) {
        let i = self.ee.idx(pre, post);
        self.ee.connected[i] = true;
        self.ee.w[i] = w;
    }

    fn inh_rule(&self, inh_index: usize) -> Option<StdpRule> {
        let half = self.cfg.n_inh / 2;
        if inh_index < half {
            Some(self.cfg.inh_hebbian_stdp)
        } else if self.cfg.ablate_anti_hebbian {
            None
        } else {
            Some(self.cfg.inh_anti_stdp)
        }
    }

    /// Advance one step. `i_ext[i]` is an extra drive in mV/ms per neuron
    /// (may be shorter than the population; missing entries are zero).
    /// Returns the spikes emitted this step.
    pub fn step(&mut self, i_ext: &[f64]) -> Result<Vec<Spike>> {
        let dt = self.cfg.dt;
        let n = self.n_total();
        let ne = self.cfg.n_exc;
        let lif = self.cfg.lif;
        let noise_scale = self.cfg.noise_std * dt.sqrt();

        // Synaptic voltage jumps from spikes of the previous step
        // (1-step conduction delay).
        let mut syn = vec![0.0; n];
        for pre in 0..n {
            if !self.spiked_last_step[pre] {
                continue;
            }
            if pre < ne {
                for post in 0..ne {
                    let i = self.ee.idx(pre, post);
                    if self.ee.connected[i] {
                        syn[post] += self.ee.w[i];
                    }
                }
                for post in 0..self.cfg.n_inh {
                    let i = self.ei.idx(pre, post);
                    if self.ei.connected[i] {
                        syn[ne + post] += self.ei.w[i];
                    }
                }
            } else {
                let ipre = pre - ne;
                for post in 0..ne {
                    let i = self.ie.idx(ipre, post);
                    if self.ie.connected[i] {
                        syn[post] -= self.ie.w[i];
                    }
                }
                for post in 0..self.cfg.n_inh {
                    let i = self.ii.idx(ipre, post);
                    if self.ii.connected[i] {
                        syn[ne + post] -= self.ii.w[i];
                    }
                }
            }
        }

        let mut spikes = Vec::new();
        let t_now = self.time_ms + dt;
        for i in 0..n {
            if self.refrac[i] > 0.0 {
                self.refrac[i] -= dt;
                self.spiked_last_step[i] = false;
                continue;
            }
            let drive = self.cfg.background_drive
                + i_ext.get(i).copied().unwrap_or(0.0);
            let noise = noise_scale * self.rng.normal();
            let dv = (lif.v_rest - self.v[i]) / lif.tau_m * dt + drive * dt + noise;
            self.v[i] += dv + syn[i];
            if self.v[i] >= lif.v_thresh {
                spikes.push((i, t_now));
                self.v[i] = lif.v_reset;
                self.refrac[i] = lif.t_ref;
                self.spiked_last_step[i] = true;
            } else {
                self.spiked_last_step[i] = false;
            }
        }
        self.total_spikes += spikes.len() as u64;

        // Nearest-neighbor STDP on this step's spikes.
        for &(s, t_s) in &spikes {
            if s < ne {
                // s as presynaptic excitatory: pair with each post's last spike.
                for post in 0..ne {
                    let i = self.ee.idx(s, post);
                    if !self.ee.connected[i] || post == s {
                        continue;
                    }
                    let t_post = self.last_spike[post];
                    if t_post.is_finite() {
                        let d = stdp_delta(&self.cfg.exc_stdp, t_post - t_s);
                        self.ee.w[i] = (self.ee.w[i] + d)
                            .clamp(self.cfg.exc_stdp.w_min, self.cfg.exc_stdp.w_max);
                    }
                }
                // s as postsynaptic target of e->e.
                for pre in 0..ne {
                    let i = self.ee.idx(pre, s);
                    if !self.ee.connected[i] || pre == s {
                        continue;
                    }
                    let t_pre = self.last_spike[pre];
                    if t_pre.is_finite() {
                        let d = stdp_delta(&self.cfg.exc_stdp, t_s - t_pre);
                        self.ee.w[i] = (self.ee.w[i] + d)
                            .clamp(self.cfg.exc_stdp.w_min, self.cfg.exc_stdp.w_max);
                    }
                }
                // s as postsynaptic target of i->e (plastic inhibition).
                for ipre in 0..self.cfg.n_inh {
                    let i = self.ie.idx(ipre, s);
                    if !self.ie.connected[i] {
                        continue;
                    }
                    if let Some(rule) = self.inh_rule(ipre) {
                        let t_pre = self.last_spike[ne + ipre];
                        if t_pre.is_finite() {
                            let d = stdp_delta(&rule, t_s - t_pre);
                            self.ie.w[i] =
                                (self.ie.w[i] + d).clamp(rule.w_min, rule.w_max);
                        }
                    }
                }
            } else {
                // Inhibitory spike: presynaptic side of i->e plasticity.
                let ipre = s - ne;
                if let Some(rule) = self.inh_rule(ipre) {
                    for post in 0..ne {
                        let i = self.ie.idx(ipre, post);
                        if !self.ie.connected[i] {
                            continue;
                        }
                        let t_post = self.last_spike[post];
                        if t_post.is_finite() {
                            let d = stdp_delta(&rule, t_post - t_s);
                            self.ie.w[i] =
                                (self.ie.w[i] + d).clamp(rule.w_min, rule.w_max);
                        }
                    }
                }
            }
        }
        for &(s, t_s) in &spikes {
            self.last_spike[s] = t_s;
        }
        self.time_ms = t_now;

        // Dale's law audit is structural: excitatory rows only ever add,
        // inhibitory rows only ever subtract, and all plastic weights are
        // clamped non-negative above.
        Ok(spikes)
    }

    /// Mean within- and between-assembly excitatory weight over existing
    /// connections.
    pub fn assembly_weight_means(&self, assemblies: &[Vec<usize>]) -> (f64, f64) {
        let member_of = |i: usize| assemblies.iter().position(|a| a.contains(&i));
        let (mut win_sum, mut win_n, mut btw_sum, mut btw_n) = (0.0, 0usize, 0.0, 0usize);
        for pre in 0..self.cfg.n_exc {
            for post in 0..self.cfg.n_exc {
                let i = self.ee.idx(pre, post);
                if !self.ee.connected[i] || pre == post {
                    continue;
                }
                match (member_of(pre), member_of(post)) {
                    (Some(a), Some(b)) if a == b => {
                        win_sum += self.ee.w[i];
                        win_n += 1;
                    }
                    (Some(_), Some(_)) => {
                        btw_sum += self.ee.w[i];
                        btw_n += 1;
                    }
                    _ => {}
                }
            }
        }
        if win_n == 0 || btw_n == 0 {
            return (f64::NAN, f64::NAN);
        }
        (win_sum / win_n as f64, btw_sum / btw_n as f64)
    }

    /// Mean within- over mean between-assembly excitatory weight.
    pub fn modularity(&self, assemblies: &[Vec<usize>]) -> f64 {
        let (win, btw) = self.assembly_weight_means(assemblies);
        if btw == 0.0 {
            return f64::NAN;
        }
        win / btw
    }

    /// Minimum / maximum over all plastic weights, for bound audits.
    pub fn plastic_weight_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &c) in self.ee.connected.iter().enumerate() {
            if c {
                lo = lo.min(self.ee.w[i]);
                hi = hi.max(self.ee.w[i]);
            }
        }
        for (i, &c) in self.ie.connected.iter().enumerate() {
            if c {
                lo = lo.min(self.ie.w[i]);
                hi = hi.max(self.ie.w[i]);
            }
        }
        (lo, hi)
    }
}

/// Assembly experiment schedule and analysis thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct AssemblyConfig {
    pub net: NetConfig,
    pub n_assemblies: usize,
    /// Total training time, ms.
    pub train_ms: f64,
    /// Stimulus-on window per presentation, ms.
    pub stim_ms: f64,
    /// Gap between presentations, ms.
    pub gap_ms: f64,
    /// Extra drive to stimulated neurons, mV/ms.
    pub stim_current: f64,
    /// The stimulus is delivered as periodic pulses so that assembly
    /// members spike within a few ms of each other (the potentiation lobe
    /// of the pair kernel), rather than as a constant current which only
    /// correlates rates.
    pub stim_pulse_period_ms: f64,
    pub stim_pulse_width_ms: f64,
    /// Resting-state observation window after training, ms.
    pub rest_ms: f64,
    /// Recall probe: cue this fraction of assembly 0.
    pub cue_fraction: f64,
    pub cue_ms: f64,
    pub cue_current: f64,
    /// A neuron counts as reactivated when it spikes at least this often
    /// during the cue window.
    pub reactivation_min_spikes: usize,
    /// Mean rate above this (Hz) raises an instability error.
    pub instability_rate_hz: f64,
    /// Bin width for pairwise spike-count correlation, ms.
    pub corr_bin_ms: f64,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            net: NetConfig::default(),
            n_assemblies: 2,
            train_ms: 60_000.0,
            stim_ms: 150.0,
            gap_ms: 100.0,
            stim_current: 2.5,
            stim_pulse_period_ms: 30.0,
            stim_pulse_width_ms: 6.0,
            rest_ms: 10_000.0,
            cue_fraction: 0.5,
            cue_ms: 100.0,
            cue_current: 1.2,
            reactivation_min_spikes: 2,
            instability_rate_hz: 500.0,
            corr_bin_ms: 100.0,
        }
    }
}

/// Quantitative summary of one assembly run.
#[derive(Debug, Clone, Serialize)]
pub struct AssemblyReport {
    pub seed: u64,
    pub modularity_initial: f64,
    pub modularity_final: f64,
    /// `(time_ms, modularity)` sampled during training.
    pub modularity_series: Vec<(f64, f64)>,
    /// Mean per-neuron preferred-vs-other selectivity index in [-1, 1].
    pub selectivity_mean: f64,
    /// Fraction of the cued assembly reactivated by the partial cue.
    pub recall_cued_fraction: f64,
    /// Fraction of the other assemblies reactivated by the same cue.
    pub recall_other_fraction: f64,
    /// Mean within- / between-assembly excitatory weights after training.
    pub mean_within_w: f64,
    pub mean_between_w: f64,
    /// Mean rates during the cue window, Hz: cued subset, uncued remainder
    /// of the cued assembly, all other assemblies.
    pub cue_rate_cued_hz: f64,
    pub cue_rate_uncued_hz: f64,
    pub cue_rate_other_hz: f64,
    /// Mean firing rate during training, Hz.
    pub train_rate_hz: f64,
    /// Resting-state statistics after training.
    pub rest_rate_hz: f64,
    pub rest_mean_pairwise_correlation: f64,
    pub rest_isi_cv_mean: f64,
    pub config: AssemblyConfig,
}

/// Spike raster as CSV rows `(neuron_id, time_ms)`.
pub fn raster_to_csv(spikes: &[Spike]) -> String {
    let mut out = String::from("neuron_id,time_ms\n");
    for &(i, t) in spikes {
        out.push_str(&format!("{i},{t}\n"));
    }
    out
}

fn assembly_members(n_exc: usize, k: usize) -> Vec<Vec<usize>> {
    let size = n_exc / k;
    (0..k).map(|a| (a * size..(a + 1) * size).collect()).collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Mean pairwise Pearson correlation of binned spike counts over a sample
/// of neuron pairs.
fn mean_pairwise_correlation(
    spikes: &[Spike],
    n_neurons: usize,
    t0: f64,
    t1: f64,
    bin_ms: f64,
    rng: &mut SeedStream,
) -> f64 {
    let bins = ((t1 - t0) / bin_ms).floor() as usize;
    if bins < 4 {
        return f64::NAN;
    }
    let mut counts = vec![vec![0.0f64; bins]; n_neurons];
    for &(i, t) in spikes {
        if t >= t0 && t < t0 + bins as f64 * bin_ms {
            counts[i][((t - t0) / bin_ms) as usize] += 1.0;
        }
    }
    let corr = |a: &[f64], b: &[f64]| -> Option<f64> {
        let ma = mean(a);
        let mb = mean(b);
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            va += (x - ma).powi(2);
            vb += (y - mb).powi(2);
        }
        if va == 0.0 || vb == 0.0 {
            None
        } else {
            Some(num / (va * vb).sqrt())
        }
    };
    let mut vals = Vec::new();
    for _ in 0..2000 {
        let i = rng.below(n_neurons);
        let j = rng.below(n_neurons);
        if i == j {
            continue;
        }
        if let Some(c) = corr(&counts[i], &counts[j]) {
            vals.push(c);
        }
    }
    mean(&vals)
}

/// Mean coefficient of variation of inter-spike intervals across neurons
/// with at least 3 spikes in the window.
fn mean_isi_cv(spikes: &[Spike], n_neurons: usize, t0: f64, t1: f64) -> f64 {
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); n_neurons];
    for &(i, t) in spikes {
        if t >= t0 && t <= t1 {
            per[i].push(t);
        }
    }
    let mut cvs = Vec::new();
    for times in per {
        if times.len() < 3 {
            continue;
        }
        let isis: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let m = mean(&isis);
        if m <= 0.0 {
            continue;
        }
        let var = isis.iter().map(|x| (x - m).powi(2)).sum::<f64>() / isis.len() as f64;
        cvs.push(var.sqrt() / m);
    }
    mean(&cvs)
}

/// Run the full training / probe / recall / rest protocol.
pub fn run_assembly_experiment(rng: &SeedStream, cfg: &AssemblyConfig) -> Result<AssemblyReport> {
    if cfg.n_assemblies < 2 {
        return Err(CoreError::Config("need >= 2 stimulus groups".into()));
    }
    let seed = rng.seed();
    let mut net = SpikingNet::new(rng.split(0), cfg.net.clone())?;
    let ne = cfg.net.n_exc;
    let n_total = ne + cfg.net.n_inh;
    let assemblies = assembly_members(ne, cfg.n_assemblies);
    let dt = cfg.net.dt;
    let modularity_initial = net.modularity(&assemblies);

    // --- Training: alternate stimulus presentations. ---
    let cycle_ms = cfg.stim_ms + cfg.gap_ms;
    let steps = (cfg.train_ms / dt).round() as usize;
    let mut train_spikes = 0u64;
    let mut i_ext = vec![0.0; n_total];
    let mut modularity_series = Vec::new();
    let sample_every = (steps / 20).max(1);
    for step in 0..steps {
        let t = step as f64 * dt;
        let phase = t % cycle_ms;
        let presentation = (t / cycle_ms).floor() as usize;
        for v in i_ext.iter_mut() {
            *v = 0.0;
        }
        if phase < cfg.stim_ms && phase % cfg.stim_pulse_period_ms < cfg.stim_pulse_width_ms {
            let a = presentation % cfg.n_assemblies;
            for &i in &assemblies[a] {
                i_ext[i] = cfg.stim_current;
            }
        }
        let spikes = net.step(&i_ext)?;
        train_spikes += spikes.len() as u64;
        if step % sample_every == 0 {
            modularity_series.push((t, net.modularity(&assemblies)));
        }
    }
    let train_rate_hz =
        train_spikes as f64 / n_total as f64 / (cfg.train_ms / 1000.0);
    if train_rate_hz > cfg.instability_rate_hz {
        return Err(CoreError::Instability(format!(
            "mean training rate {train_rate_hz:.1} Hz; config: {:?}",
            cfg
        )));
    }
    let modularity_final = net.modularity(&assemblies);
    modularity_series.push((cfg.train_ms, modularity_final));
    let (mean_within_w, mean_between_w) = net.assembly_weight_means(&assemblies);

    // --- Selectivity probe: stimulate each assembly, record exc rates. ---
    let probe_ms = 500.0;
    let probe_steps = (probe_ms / dt).round() as usize;
    let mut rates = vec![vec![0.0f64; ne]; cfg.n_assemblies];
    for (a, members) in assemblies.iter().enumerate() {
        for v in i_ext.iter_mut() {
            *v = 0.0;
        }
        for &i in members {
            i_ext[i] = cfg.stim_current;
        }
        for _ in 0..probe_steps {
            for &(i, _) in &net.step(&i_ext)? {
                if i < ne {
                    rates[a][i] += 1.0;
                }
            }
        }
        // Let activity die down between probes.
        let quiet = vec![0.0; n_total];
        for _ in 0..(200.0 / dt) as usize {
            net.step(&quiet)?;
        }
    }
    let mut sel_vals = Vec::new();
    for (a, members) in assemblies.iter().enumerate() {
        for &i in members {
            let pref = rates[a][i];
            let other: f64 = (0..cfg.n_assemblies)
                .filter(|&b| b != a)
                .map(|b| rates[b][i])
                .sum::<f64>()
                / (cfg.n_assemblies - 1) as f64;
            if pref + other > 0.0 {
                sel_vals.push((pref - other) / (pref + other));
            }
        }
    }
    let selectivity_mean = mean(&sel_vals);

    // --- Cued recall: stimulate part of assembly 0. ---
    let cued = &assemblies[0];
    let cue_count = ((cfg.cue_fraction * cued.len() as f64).round() as usize).max(1);
    for v in i_ext.iter_mut() {
        *v = 0.0;
    }
    for &i in cued.iter().take(cue_count) {
        i_ext[i] = cfg.cue_current;
    }
    let cue_steps = (cfg.cue_ms / dt).round() as usize;
    let mut cue_spike_counts = vec![0usize; ne];
    for _ in 0..cue_steps {
        for &(i, _) in &net.step(&i_ext)? {
            if i < ne {
                cue_spike_counts[i] += 1;
            }
        }
    }
    let reactivated = |members: &[usize]| -> f64 {
        let hit = members
            .iter()
            .filter(|&&i| cue_spike_counts[i] >= cfg.reactivation_min_spikes)
            .count();
        hit as f64 / members.len() as f64
    };
    // Count reactivation only over the uncued part of assembly 0.
    let uncued_part: Vec<usize> = cued.iter().skip(cue_count).copied().collect();
    let recall_cued_fraction = if uncued_part.is_empty() {
        1.0
    } else {
        reactivated(&uncued_part)
    };
    let others: Vec<usize> = assemblies[1..].iter().flatten().copied().collect();
    let recall_other_fraction = reactivated(&others);
    let window_rate = |members: &[usize]| -> f64 {
        let total: usize = members.iter().map(|&i| cue_spike_counts[i]).sum();
        total as f64 / members.len().max(1) as f64 / (cfg.cue_ms / 1000.0)
    };
    let cued_part: Vec<usize> = cued.iter().take(cue_count).copied().collect();
    let cue_rate_cued_hz = window_rate(&cued_part);
    let cue_rate_uncued_hz = window_rate(&uncued_part);
    let cue_rate_other_hz = window_rate(&others);

    // --- Resting state. ---
    let quiet = vec![0.0; n_total];
    let rest_steps = (cfg.rest_ms / dt).round() as usize;
    let mut rest_spikes: Vec<Spike> = Vec::new();
    let t_rest0 = net.time_ms();
    for _ in 0..rest_steps {
        rest_spikes.extend(net.step(&quiet)?);
    }
    let t_rest1 = net.time_ms();
    let rest_rate_hz =
        rest_spikes.len() as f64 / n_total as f64 / (cfg.rest_ms / 1000.0);
    let mut stat_rng = rng.split(99);
    let rest_mean_pairwise_correlation = mean_pairwise_correlation(
        &rest_spikes,
        n_total,
        t_rest0,
        t_rest1,
        cfg.corr_bin_ms,
        &mut stat_rng,
    );
    let rest_isi_cv_mean = mean_isi_cv(&rest_spikes, n_total, t_rest0, t_rest1);

    Ok(AssemblyReport {
        seed,
        modularity_initial,
        modularity_final,
        modularity_series,
        selectivity_mean,
        recall_cued_fraction,
        recall_other_fraction,
        mean_within_w,
        mean_between_w,
        cue_rate_cued_hz,
        cue_rate_uncued_hz,
        cue_rate_other_hz,
        train_rate_hz,
        rest_rate_hz,
        rest_mean_pairwise_correlation,
        rest_isi_cv_mean,
        config: cfg.clone(),
    })
}
