//! Stochastic gating of a binarized task network.
//!
//! A task identifier is encoded by a small two-layer network into one
//! real-valued hidden gate weight per neuron; a sigmoid turns those into
//! open probabilities, and Bernoulli sampling yields a binary gate vector
//! selecting a sparse subnetwork for the task. Ungated neurons contribute
//! nothing to the forward pass and receive exactly zero gradient, which is
//! what protects previously learned tasks.
//!
//! Task layers carry binarized weights: the forward pass uses the sign of a
//! real-valued shadow weight, gradients pass straight through to the shadow,
//! and a metaplasticity factor `1 / (1 + |m w|)` shrinks updates to shadows
//! that have grown large.

use crate::error::{CoreError, Result};
use crate::regularizers::sigmoid;
use crate::rng::SeedStream;

/// Elementwise logistic gate probabilities, clamped away from 0 and 1.
pub fn gate_probabilities(w_h: &[f64]) -> Vec<f64> {
    w_h.iter()
        .map(|&z| sigmoid(z).clamp(1e-12, 1.0 - 1e-12))
        .collect()
}

/// Independent Bernoulli draw per gate.
pub fn sample_gates(rng: &mut SeedStream, p: &[f64]) -> Vec<u8> {
    p.iter().map(|&pi| rng.bernoulli(pi) as u8).collect()
}

/// Deterministic evaluation mask: open where `p >= 0.5`.
pub fn expected_mask(p: &[f64]) -> Vec<u8> {
    p.iter().map(|&pi| (pi >= 0.5) as u8).collect()
}

/// Jaccard overlap of two binary masks.
pub fn mask_overlap(a: &[u8], b: &[u8]) -> f64 {
    let inter = a.iter().zip(b).filter(|(&x, &y)| x == 1 && y == 1).count();
    let union = a.iter().zip(b).filter(|(&x, &y)| x == 1 || y == 1).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Per-hidden-neuron gate weights plus the latest sampled mask.
#[derive(Debug, Clone)]
pub struct GateLayer {
    pub w_h: Vec<f64>,
    pub last_sample: Vec<u8>,
}

impl GateLayer {
    pub fn probabilities(&self) -> Vec<f64> {
        gate_probabilities(&self.w_h)
    }

    pub fn sample(&mut self, rng: &mut SeedStream) -> &[u8] {
        self.last_sample = sample_gates(rng, &self.probabilities());
        &self.last_sample
    }
}

/// Frozen two-layer encoder from a task one-hot to per-neuron gate weights.
#[derive(Debug, Clone)]
pub struct TaskEncoder {
    n_tasks: usize,
    latent: usize,
    width: usize,
    w1: Vec<f64>, // latent x n_tasks
    b1: Vec<f64>,
    w2: Vec<f64>, // width x latent
    b2: Vec<f64>,
    gain: f64,
}

impl TaskEncoder {
    /// Random initialization; `gate_bias` shifts all outputs so that the
    /// resulting open probabilities can be made sparse.
    pub fn init(
        rng: &mut SeedStream,
        n_tasks: usize,
        latent: usize,
        width: usize,
        gate_bias: f64,
        gate_gain: f64,
    ) -> Self {
        let draw = |rng: &mut SeedStream, n: usize, scale: f64| -> Vec<f64> {
            (0..n).map(|_| scale * rng.normal()).collect()
        };
        Self {
            n_tasks,
            latent,
            width,
            w1: draw(rng, latent * n_tasks, 1.0),
            b1: draw(rng, latent, 0.1),
            w2: draw(rng, width * latent, 1.0),
            b2: vec![gate_bias; width],
            gain: gate_gain,
        }
    }

    /// Latent features for a task one-hot.
    pub fn latent_features(&self, task: usize) -> Vec<f64> {
        assert!(task < self.n_tasks);
        (0..self.latent)
            .map(|i| (self.w1[i * self.n_tasks + task] + self.b1[i]).tanh())
            .collect()
    }

    /// Gate weights `W_h` for a task.
    pub fn gate_weights(&self, task: usize) -> Vec<f64> {
        let z = self.latent_features(task);
        (0..self.width)
            .map(|j| {
                let row = &self.w2[j * self.latent..(j + 1) * self.latent];
                self.gain
                    * (row.iter().zip(&z).map(|(w, zi)| w * zi).sum::<f64>()
                        / (self.latent as f64).sqrt())
                    + self.b2[j]
            })
            .collect()
    }
}

/// One classification task: rows of features with integer labels.
#[derive(Debug, Clone)]
pub struct Task {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<usize>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<usize>,
}

/// Ordered list of tasks with identical input dimension.
#[derive(Debug, Clone)]
pub struct TaskSuite {
    pub tasks: Vec<Task>,
    pub n_in: usize,
    pub n_classes: usize,
}

impl TaskSuite {
    pub fn new(tasks: Vec<Task>, n_classes: usize) -> Result<Self> {
        if tasks.len() < 2 {
            return Err(CoreError::InvalidInput("need >= 2 tasks".into()));
        }
        let n_in = tasks[0].train_x[0].len();
        for t in &tasks {
            for x in t.train_x.iter().chain(&t.test_x) {
                if x.len() != n_in {
                    return Err(CoreError::DimensionMismatch(
                        "tasks must share input dimension".into(),
                    ));
                }
            }
        }
        Ok(Self {
            tasks,
            n_in,
            n_classes,
        })
    }
}

/// Two-class Gaussian blobs separated along a chosen axis.
pub fn gaussian_blob_task(
    rng: &mut SeedStream,
    dim: usize,
    axis: usize,
    separation: f64,
    noise: f64,
    n_train: usize,
    n_test: usize,
) -> Task {
    let mut gen = |n: usize| -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let label = i % 2;
            let sign = if label == 0 { 1.0 } else { -1.0 };
            let mut x: Vec<f64> = (0..dim).map(|_| noise * rng.normal()).collect();
            x[axis] += sign * separation;
            xs.push(x);
            ys.push(label);
        }
        (xs, ys)
    };
    let (train_x, train_y) = gen(n_train);
    let (test_x, test_y) = gen(n_test);
    Task {
        train_x,
        train_y,
        test_x,
        test_y,
    }
}

/// 5x3 glyphs for a tiny two-class digit problem (0 vs 1), optionally with
/// a fixed random pixel permutation to create a second task.
pub fn tiny_digit_task(
    rng: &mut SeedStream,
    permute: bool,
    noise: f64,
    n_train: usize,
    n_test: usize,
) -> Task {
    const ZERO: [f64; 15] = [
        1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0,
    ];
    const ONE: [f64; 15] = [
        0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0,
    ];
    let perm: Vec<usize> = if permute {
        let mut p: Vec<usize> = (0..15).collect();
        rng.shuffle(&mut p);
        p
    } else {
        (0..15).collect()
    };
    let gen = |n: usize, rng: &mut SeedStream| {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let label = i % 2;
            let glyph = if label == 0 { &ZERO } else { &ONE };
            let x: Vec<f64> = perm
                .iter()
                .map(|&j| (glyph[j] + noise * rng.normal()).clamp(0.0, 1.0) * 2.0 - 1.0)
                .collect();
            xs.push(x);
            ys.push(label);
        }
        (xs, ys)
    };
    let (train_x, train_y) = gen(n_train, rng);
    let (test_x, test_y) = gen(n_test, rng);
    Task {
        train_x,
        train_y,
        test_x,
        test_y,
    }
}

#[derive(Debug, Clone)]
pub struct GatedNetConfig {
    pub hidden: usize,
    pub latent: usize,
    /// Shift on the encoder's gate-weight outputs; negative values give
    /// sparse gates.
    pub gate_bias: f64,
    /// Gain on the encoder's gate-weight outputs, applied before the bias.
    /// Large values sharpen the open probabilities toward 0 or 1, making
    /// each task's subnetwork nearly deterministic and protecting it from
    /// being sampled (and overwritten) while other tasks train.
    pub gate_gain: f64,
    /// Metaplasticity slope `m` in `1 / (1 + |m w|)`.
    pub meta_m: f64,
    pub learning_rate: f64,
    pub steps_per_task: usize,
    /// All gates forced open (the ungated control).
    pub gates_forced_open: bool,
}

impl Default for GatedNetConfig {
    fn default() -> Self {
        Self {
            hidden: 96,
            latent: 16,
            gate_bias: -2.0,
            gate_gain: 8.0,
            meta_m: 2.0,
            learning_rate: 0.05,
            steps_per_task: 600,
            gates_forced_open: false,
        }
    }
}

/// Binarized two-layer classifier behind a per-task gate.
#[derive(Debug, Clone)]
pub struct GatedBinaryNet {
    pub cfg: GatedNetConfig,
    pub encoder: TaskEncoder,
    n_in: usize,
    n_out: usize,
    /// Shadow weights; forward uses their sign.
    w1: Vec<f64>, // hidden x n_in
    b1: Vec<f64>,
    /// Output layer carries no bias: every output parameter is tied to a
    /// hidden neuron, so closing a gate protects the full readout path of
    /// the tasks that used it.
    w2: Vec<f64>, // n_out x hidden
}

impl GatedBinaryNet {
    pub fn init(
        rng: &mut SeedStream,
        n_in: usize,
        n_out: usize,
        n_tasks: usize,
        cfg: GatedNetConfig,
    ) -> Self {
        let h = cfg.hidden;
        let encoder = TaskEncoder::init(
            rng,
            n_tasks,
            cfg.latent,
            h,
            cfg.gate_bias,
            cfg.gate_gain,
        );
        let draw = |rng: &mut SeedStream, n: usize| -> Vec<f64> {
            (0..n).map(|_| 0.1 * rng.normal()).collect()
        };
        Self {
            encoder,
            n_in,
            n_out,
            w1: draw(rng, h * n_in),
            b1: vec![0.0; h],
            w2: draw(rng, n_out * h),
            cfg,
        }
    }

    pub fn shadow_weights(&self) -> (&[f64], &[f64]) {
        (&self.w1, &self.w2)
    }

    pub fn hidden_biases(&self) -> &[f64] {
        &self.b1
    }

    /// Gate mask for a task: per-step Bernoulli sample, or the deterministic
    /// expected mask when `rng` is `None` (evaluation mode).
    pub fn task_mask(&self, task: usize, rng: Option<&mut SeedStream>) -> Vec<u8> {
        if self.cfg.gates_forced_open {
            return vec![1; self.cfg.hidden];
        }
        let p = gate_probabilities(&self.encoder.gate_weights(task));
        match rng {
            Some(r) => sample_gates(r, &p),
            None => expected_mask(&p),
        }
    }

    /// Forward pass under a fixed mask. Returns (hidden activations, logits).
    pub fn forward(&self, x: &[f64], mask: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.n_in {
            return Err(CoreError::DimensionMismatch("input vs net".into()));
        }
        let h_dim = self.cfg.hidden;
        let s_in = (self.n_in as f64).sqrt();
        let mut h = vec![0.0; h_dim];
        for j in 0..h_dim {
            if mask[j] == 0 {
                continue; // ungated neurons contribute exactly 0
            }
            let row = &self.w1[j * self.n_in..(j + 1) * self.n_in];
            let pre: f64 = row.iter().zip(x).map(|(w, xi)| w.signum() * xi).sum::<f64>() / s_in
                + self.b1[j];
            h[j] = pre.tanh();
        }
        let s_h = (h_dim as f64).sqrt();
        let logits: Vec<f64> = (0..self.n_out)
            .map(|k| {
                let row = &self.w2[k * h_dim..(k + 1) * h_dim];
                row.iter().zip(&h).map(|(w, hj)| w.signum() * hj).sum::<f64>() / s_h
            })
            .collect();
        Ok((h, logits))
    }

    fn metaplastic(&self, w: f64) -> f64 {
        1.0 / (1.0 + (self.cfg.meta_m * w).abs())
    }

    /// One SGD step on a single sample; straight-through gradients into the
    /// shadow weights, scaled by the metaplasticity factor.
    pub fn train_step(&mut self, x: &[f64], y: usize, mask: &[u8]) -> Result<f64> {
        let (h, logits) = self.forward(x, mask)?;
        // Softmax cross-entropy.
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let loss = -(exps[y] / z).ln();
        if !loss.is_finite() {
            return Err(CoreError::Training {
                epoch: 0,
                detail: "non-finite loss".into(),
            });
        }
        let delta_out: Vec<f64> = (0..self.n_out)
            .map(|k| exps[k] / z - (k == y) as usize as f64)
            .collect();

        let h_dim = self.cfg.hidden;
        let s_in = (self.n_in as f64).sqrt();
        let s_h = (h_dim as f64).sqrt();
        let lr = self.cfg.learning_rate;

        // Hidden deltas; zero for masked neurons.
        let mut delta_h = vec![0.0; h_dim];
        for j in 0..h_dim {
            if mask[j] == 0 {
                continue;
            }
            let mut g = 0.0;
            for k in 0..self.n_out {
                g += self.w2[k * h_dim + j].signum() * delta_out[k] / s_h;
            }
            delta_h[j] = g * (1.0 - h[j] * h[j]);
        }

        // Output layer.
        for k in 0..self.n_out {
            for j in 0..h_dim {
                let g = delta_out[k] * h[j] / s_h;
                let f = self.metaplastic(self.w2[k * h_dim + j]);
                self.w2[k * h_dim + j] -= lr * f * g;
            }
        }
        // Hidden layer.
        for j in 0..h_dim {
            if delta_h[j] == 0.0 {
                continue;
            }
            for (i, &xi) in x.iter().enumerate() {
                let g = delta_h[j] * xi / s_in;
                let f = self.metaplastic(self.w1[j * self.n_in + i]);
                self.w1[j * self.n_in + i] -= lr * f * g;
            }
            self.b1[j] -= lr * delta_h[j];
        }
        Ok(loss)
    }

    /// Classification accuracy on a task's test split under its evaluation
    /// mask.
    pub fn evaluate(&self, task_index: usize, task: &Task) -> Result<f64> {
        let mask = self.task_mask(task_index, None);
        let mut correct = 0usize;
        for (x, &y) in task.test_x.iter().zip(&task.test_y) {
            let (_, logits) = self.forward(x, &mask)?;
            let pred = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            correct += (pred == y) as usize;
        }
        Ok(correct as f64 / task.test_y.len() as f64)
    }
}

/// Accuracy matrix `a[i][j]`: accuracy on task j after finishing task i.
#[derive(Debug, Clone)]
pub struct ContinualResult {
    pub accuracy: Vec<Vec<f64>>,
    /// Evaluation mask per task, after all training.
    pub masks: Vec<Vec<u8>>,
}

impl ContinualResult {
    /// `a[after][eval] / a[eval][eval]` — how much of a task survived later
    /// training.
    pub fn retention(&self, eval_task: usize, after_task: usize) -> f64 {
        let base = self.accuracy[eval_task][eval_task];
        if base == 0.0 {
            0.0
        } else {
            self.accuracy[after_task][eval_task] / base
        }
    }

    /// CSV rows `(after_task, eval_task, accuracy)`.
    pub fn to_csv(&self, seed: u64, gated: bool) -> String {
        let mut out = String::from("after_task,eval_task,accuracy,seed,gated_flag\n");
        for (i, row) in self.accuracy.iter().enumerate() {
            for (j, acc) in row.iter().enumerate() {
                out.push_str(&format!("{i},{j},{acc},{seed},{}\n", gated as u8));
            }
        }
        out
    }
}

/// Train tasks strictly in order, filling the accuracy matrix.
pub fn train_continual(
    net: &mut GatedBinaryNet,
    suite: &TaskSuite,
    rng: &mut SeedStream,
) -> Result<ContinualResult> {
    let t = suite.tasks.len();
    let mut accuracy = vec![vec![0.0; t]; t];
    for (ti, task) in suite.tasks.iter().enumerate() {
        let n = task.train_x.len();
        for step in 0..net.cfg.steps_per_task {
            let idx = rng.below(n);
            let mask = net.task_mask(ti, Some(rng));
            net.train_step(&task.train_x[idx], task.train_y[idx], &mask)?;
            let _ = step;
        }
        for (tj, other) in suite.tasks.iter().enumerate() {
            accuracy[ti][tj] = net.evaluate(tj, other)?;
        }
    }
    let masks = (0..t).map(|ti| net.task_mask(ti, None)).collect();
    Ok(ContinualResult { accuracy, masks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_hand_values() {
        assert_eq!(gate_probabilities(&[0.0]), vec![0.5]);
        let p = gate_probabilities(&[3.0f64.ln()]);
        assert!((p[0] - 0.75).abs() < 1e-12);
        let p = gate_probabilities(&[1e6]);
        assert!(p[0] <= 1.0 - 1e-12 && p[0] > 0.999);
    }

    #[test]
    fn sample_gates_extremes_and_mean() {
        let mut rng = SeedStream::new(1);
        assert_eq!(sample_gates(&mut rng, &[0.0; 8]), vec![0; 8]);
        assert_eq!(sample_gates(&mut rng, &[1.0; 8]), vec![1; 8]);
        let p = vec![0.3; 10_000];
        let s = sample_gates(&mut rng, &p);
        let mean = s.iter().map(|&b| b as f64).sum::<f64>() / 10_000.0;
        assert!((mean - 0.3).abs() < 0.015, "mean {mean}");
    }

    #[test]
    fn sample_gates_deterministic() {
        let p = vec![0.5; 64];
        let a = sample_gates(&mut SeedStream::new(7), &p);
        let b = sample_gates(&mut SeedStream::new(7), &p);
        assert_eq!(a, b);
    }

    fn small_net(seed: u64, forced_open: bool) -> GatedBinaryNet {
        let cfg = GatedNetConfig {
            hidden: 16,
            latent: 4,
            gates_forced_open: forced_open,
            ..GatedNetConfig::default()
        };
        GatedBinaryNet::init(&mut SeedStream::new(seed), 6, 2, 2, cfg)
    }

    #[test]
    fn all_open_mask_equals_ungated_net() {
        let net = small_net(3, false);
        let x = vec![0.5, -0.2, 0.1, 0.9, -0.7, 0.3];
        let (_, gated) = net.forward(&x, &vec![1; 16]).unwrap();
        let control = small_net(3, true);
        let mask = control.task_mask(0, None);
        let (_, open) = control.forward(&x, &mask).unwrap();
        assert_eq!(gated, open);
    }

    #[test]
    fn all_closed_mask_is_bias_only() {
        let net = small_net(4, false);
        let x = vec![1.0; 6];
        let (h, logits) = net.forward(&x, &vec![0; 16]).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
        // With all hidden activations zero the logits vanish entirely.
        assert!(logits.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masked_neuron_weights_do_not_affect_output() {
        let mut net = small_net(5, false);
        let x = vec![0.3, -0.4, 0.8, 0.1, -0.9, 0.2];
        let mut mask = vec![1u8; 16];
        mask[3] = 0;
        let (_, before) = net.forward(&x, &mask).unwrap();
        // Perturb incoming shadow weights of the masked neuron.
        for i in 0..6 {
            net.w1[3 * 6 + i] += 17.0;
        }
        let (_, after) = net.forward(&x, &mask).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn zero_gradient_for_ungated_parameters() {
        let mut net = small_net(6, false);
        let x = vec![0.3, -0.4, 0.8, 0.1, -0.9, 0.2];
        let mut mask = vec![1u8; 16];
        mask[2] = 0;
        mask[9] = 0;
        let w1_before = net.w1.clone();
        let w2_before = net.w2.clone();
        let b1_before = net.b1.clone();
        net.train_step(&x, 1, &mask).unwrap();
        for j in [2usize, 9] {
            for i in 0..6 {
                assert_eq!(net.w1[j * 6 + i], w1_before[j * 6 + i]);
            }
            assert_eq!(net.b1[j], b1_before[j]);
            for k in 0..2 {
                assert_eq!(net.w2[k * 16 + j], w2_before[k * 16 + j]);
            }
        }
        // Gated neurons did change.
        assert_ne!(net.w1, w1_before);
    }

    #[test]
    fn mask_overlap_behaviour() {
        assert_eq!(mask_overlap(&[1, 1, 0], &[1, 1, 0]), 1.0);
        assert_eq!(mask_overlap(&[1, 0, 0], &[0, 1, 0]), 0.0);
        assert!((mask_overlap(&[1, 1, 0, 0], &[1, 0, 1, 0]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_tasks_share_masks_more_than_distinct_tasks() {
        let net = small_net(8, false);
        let m0 = net.task_mask(0, None);
        let m0b = net.task_mask(0, None);
        let m1 = net.task_mask(1, None);
        assert_eq!(mask_overlap(&m0, &m0b), 1.0);
        assert!(mask_overlap(&m0, &m1) < 1.0);
    }

    #[test]
    fn continual_training_is_deterministic() {
        let run = || {
            let rng = SeedStream::new(42);
            let t0 = gaussian_blob_task(&mut rng.split(1), 6, 0, 2.0, 0.5, 100, 50);
            let t1 = gaussian_blob_task(&mut rng.split(2), 6, 3, 2.0, 0.5, 100, 50);
            let suite = TaskSuite::new(vec![t0, t1], 2).unwrap();
            let cfg = GatedNetConfig {
                hidden: 32,
                latent: 8,
                steps_per_task: 200,
                ..GatedNetConfig::default()
            };
            let mut net = GatedBinaryNet::init(&mut rng.split(3), 6, 2, 2, cfg);
            train_continual(&mut net, &suite, &mut rng.split(4)).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.accuracy, b.accuracy);
        assert_eq!(a.masks, b.masks);
    }

    #[test]
    fn single_task_beats_majority_baseline() {
        let rng = SeedStream::new(50);
        let t0 = gaussian_blob_task(&mut rng.split(1), 8, 0, 2.0, 0.5, 200, 100);
        let t1 = gaussian_blob_task(&mut rng.split(2), 8, 4, 2.0, 0.5, 200, 100);
        let suite = TaskSuite::new(vec![t0, t1], 2).unwrap();
        let cfg = GatedNetConfig {
            hidden: 64,
            latent: 8,
            steps_per_task: 400,
            ..GatedNetConfig::default()
        };
        let mut net = GatedBinaryNet::init(&mut rng.split(3), 8, 2, 2, cfg);
        let r = train_continual(&mut net, &suite, &mut rng.split(4)).unwrap();
        assert!(r.accuracy[0][0] > 0.6, "a00 = {}", r.accuracy[0][0]);
    }

    #[test]
    fn tiny_digit_tasks_have_right_shape() {
        let mut rng = SeedStream::new(60);
        let plain = tiny_digit_task(&mut rng, false, 0.1, 40, 20);
        let perm = tiny_digit_task(&mut rng, true, 0.1, 40, 20);
        assert_eq!(plain.train_x[0].len(), 15);
        assert_eq!(perm.train_x[0].len(), 15);
        assert_eq!(plain.train_y.len(), 40);
    }
}
