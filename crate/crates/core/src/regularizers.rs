//! Sparsity penalties with analytic gradients, and a minimal sparse
//! autoencoder trained with them.
//!
//! Penalties: exact and relaxed L0, L1 (with subgradient), and the
//! Bernoulli-KL activation penalty. Natural logarithms throughout.

use crate::error::{CoreError, Result};
use crate::num::Real;
use crate::rng::SeedStream;

/// Which penalty a regularized objective composes with its base loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L0Exact,
    L0Relaxed,
    L1,
    Kl,
}

/// `total = base_loss + lambda * penalty`, composed exactly.
pub fn regularized_total<T: Real>(base_loss: T, penalty: T, lambda: T) -> T {
    base_loss + lambda * penalty
}

/// Number of exactly nonzero entries. The indicator is literal; callers
/// wanting a tolerance use [`l0_norm_thresholded`].
pub fn l0_norm<T: Real>(theta: &[T]) -> usize {
    theta.iter().filter(|&&t| t != T::zero()).count()
}

/// Number of entries with `|theta_i| > tau`.
pub fn l0_norm_thresholded<T: Real>(theta: &[T], tau: T) -> usize {
    theta.iter().filter(|&&t| t.abs() > tau).count()
}

/// Stretched-logistic gate distribution: per-gate parameter `psi_j` sets
/// the location of a logistic variable stretched over
/// `[zeta_low, zeta_high]` with `zeta_low < 0 < zeta_high`, so that a gate
/// has positive probability of being exactly closed.
///
/// `P(d_j <= 0 | psi_j) = sigmoid((l - psi_j) / beta)` with
/// `l = -zeta_low / (zeta_high - zeta_low)` mapped back through the stretch;
/// concretely we use `P(open) = sigmoid(psi_j - beta * ln(-zeta_low / zeta_high))`.
#[derive(Debug, Clone)]
pub struct GateDistribution<T: Real> {
    pub psi: Vec<T>,
    pub zeta_low: T,
    pub zeta_high: T,
    /// Temperature of the logistic.
    pub beta: T,
}

impl<T: Real> GateDistribution<T> {
    pub fn new(psi: Vec<T>, zeta_low: T, zeta_high: T, beta: T) -> Result<Self> {
        if !(zeta_low < T::zero() && T::zero() < zeta_high) {
            return Err(CoreError::InvalidInput(
                "need zeta_low < 0 < zeta_high".into(),
            ));
        }
        if beta <= T::zero() {
            return Err(CoreError::InvalidInput("beta must be positive".into()));
        }
        Ok(Self {
            psi,
            zeta_low,
            zeta_high,
            beta,
        })
    }

    /// Shift applied to `psi` by the stretch: `beta * ln(-zeta_low / zeta_high)`.
    fn stretch_shift(&self) -> T {
        self.beta * (-self.zeta_low / self.zeta_high).ln()
    }

    /// Probability that gate `j` is open, `1 - P(d_j <= 0 | psi_j)`.
    pub fn open_probability(&self, j: usize) -> T {
        sigmoid((self.psi[j] - self.stretch_shift()) / self.beta)
    }
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        (T::one() + (-x).exp()).recip()
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Relaxed L0 loss: `Σ_j (1 - P(d_j <= 0 | psi))`, the expected number of
/// open gates. Differentiable in `psi`.
pub fn l0_relaxed_loss<T: Real>(g: &GateDistribution<T>) -> T {
    (0..g.psi.len()).map(|j| g.open_probability(j)).sum()
}

/// Analytic gradient of [`l0_relaxed_loss`] with respect to `psi`.
pub fn l0_relaxed_grad<T: Real>(g: &GateDistribution<T>) -> Vec<T> {
    (0..g.psi.len())
        .map(|j| {
            let p = g.open_probability(j);
            p * (T::one() - p) / g.beta
        })
        .collect()
}

/// `Σ |w_i|`.
pub fn l1_penalty<T: Real>(w: &[T]) -> T {
    w.iter().map(|x| x.abs()).sum()
}

/// Subgradient of the L1 norm: `sign(w_i)`, zero at exact zeros.
pub fn l1_subgradient<T: Real>(w: &[T]) -> Vec<T> {
    w.iter()
        .map(|&x| {
            if x > T::zero() {
                T::one()
            } else if x < T::zero() {
                -T::one()
            } else {
                T::zero()
            }
        })
        .collect()
}

/// `loss + alpha * ||w||_1`.
pub fn l1_objective<T: Real>(loss: T, w: &[T], alpha: T) -> T {
    loss + alpha * l1_penalty(w)
}

/// KL divergence between Bernoulli(rho) and Bernoulli(rho_hat), natural log.
///
/// Both arguments must lie strictly inside (0,1); the boundary is a log
/// singularity and callers clamp activations before calling.
pub fn kl_bernoulli<T: Real>(rho: T, rho_hat: T) -> Result<T> {
    for (name, v) in [("rho", rho), ("rho_hat", rho_hat)] {
        if !(T::zero() < v && v < T::one()) {
            return Err(CoreError::InvalidInput(format!(
                "{name} must be strictly inside (0,1), got {v}"
            )));
        }
    }
    Ok(rho * (rho / rho_hat).ln()
        + (T::one() - rho) * ((T::one() - rho) / (T::one() - rho_hat)).ln())
}

/// Partial derivative of [`kl_bernoulli`] with respect to `rho_hat`:
/// `-rho/rho_hat + (1-rho)/(1-rho_hat)`.
pub fn kl_bernoulli_grad_rho_hat<T: Real>(rho: T, rho_hat: T) -> Result<T> {
    kl_bernoulli(rho, rho_hat)?; // shared domain check
    Ok(-rho / rho_hat + (T::one() - rho) / (T::one() - rho_hat))
}

/// Clamp an activation into the KL-safe open interval.
pub fn clamp_activation<T: Real>(x: T) -> T {
    let eps = T::from_f64_lit(1e-6);
    x.max(eps).min(T::one() - eps)
}

/// Single-hidden-layer sigmoid autoencoder with a KL activation penalty.
///
/// Full-batch plain gradient descent; `rho_hat_j` is the batch-mean
/// activation of hidden unit j.
#[derive(Debug, Clone)]
pub struct SparseAutoencoder<T: Real> {
    pub n_visible: usize,
    pub n_hidden: usize,
    /// Encoder weights, `n_hidden x n_visible`, row-major.
    pub w_enc: Vec<T>,
    pub b_enc: Vec<T>,
    /// Decoder weights, `n_visible x n_hidden`, row-major.
    pub w_dec: Vec<T>,
    pub b_dec: Vec<T>,
    pub rho: T,
    pub beta: T,
}

#[derive(Debug, Clone)]
pub struct TrainConfig<T: Real> {
    pub learning_rate: T,
    pub epochs: usize,
    /// Record history every k-th epoch (the final epoch always recorded).
    pub record_stride: usize,
}

/// One history row per recorded epoch.
#[derive(Debug, Clone)]
pub struct TrainRecord<T: Real> {
    pub epoch: usize,
    pub recon_loss: T,
    pub penalty: T,
    pub mean_activation: T,
}

#[derive(Debug, Clone)]
pub struct TrainHistory<T: Real> {
    pub records: Vec<TrainRecord<T>>,
}

impl<T: Real> TrainHistory<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,recon_loss,penalty,mean_activation\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.epoch, r.recon_loss, r.penalty, r.mean_activation
            ));
        }
        out
    }
}

/// Gradients of the full sparse objective for the current batch.
struct AeGrads<T: Real> {
    w_enc: Vec<T>,
    b_enc: Vec<T>,
    w_dec: Vec<T>,
    b_dec: Vec<T>,
}

impl<T: Real> SparseAutoencoder<T> {
    /// Small random initialization, symmetric-break scale `0.1`.
    pub fn init(rng: &mut SeedStream, n_visible: usize, n_hidden: usize, rho: T, beta: T) -> Result<Self> {
        if !(T::zero() < rho && rho < T::one()) {
            return Err(CoreError::InvalidInput("rho must be in (0,1)".into()));
        }
        if beta < T::zero() {
            return Err(CoreError::InvalidInput("beta must be >= 0".into()));
        }
        let scale = T::from_f64_lit(0.1);
        let mut draw = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| T::from_f64_lit(rng.normal()) * scale)
                .collect()
        };
        Ok(Self {
            n_visible,
            n_hidden,
            w_enc: draw(n_hidden * n_visible),
            b_enc: vec![T::zero(); n_hidden],
            w_dec: draw(n_visible * n_hidden),
            b_dec: vec![T::zero(); n_visible],
            rho,
            beta,
        })
    }

    /// Hidden activations for one sample.
    pub fn encode(&self, x: &[T]) -> Vec<T> {
        (0..self.n_hidden)
            .map(|j| {
                let row = &self.w_enc[j * self.n_visible..(j + 1) * self.n_visible];
                let z: T = row.iter().zip(x).map(|(&w, &xi)| w * xi).sum();
                sigmoid(z + self.b_enc[j])
            })
            .collect()
    }

    /// Reconstruction for one hidden vector.
    pub fn decode(&self, h: &[T]) -> Vec<T> {
        (0..self.n_visible)
            .map(|i| {
                let row = &self.w_dec[i * self.n_hidden..(i + 1) * self.n_hidden];
                let z: T = row.iter().zip(h).map(|(&w, &hj)| w * hj).sum();
                sigmoid(z + self.b_dec[i])
            })
            .collect()
    }

    pub fn reconstruct(&self, x: &[T]) -> Vec<T> {
        self.decode(&self.encode(x))
    }

    /// Full objective on a batch: mean squared reconstruction error plus
    /// `beta * Σ_j KL(rho || rho_hat_j)`.
    pub fn objective(&self, data: &[Vec<T>]) -> Result<(T, T, T)> {
        let (recon, penalty, mean_act, _) = self.forward_stats(data)?;
        Ok((recon + self.beta * penalty, recon, mean_act))
    }

    fn forward_stats(&self, data: &[Vec<T>]) -> Result<(T, T, T, Vec<T>)> {
        if data.is_empty() {
            return Err(CoreError::InvalidInput("empty batch".into()));
        }
        let m = T::from_usize(data.len()).unwrap();
        let mut rho_hat = vec![T::zero(); self.n_hidden];
        let mut recon = T::zero();
        for x in data {
            let h = self.encode(x);
            for (a, &hj) in rho_hat.iter_mut().zip(&h) {
                *a = *a + hj;
            }
            let y = self.decode(&h);
            let se: T = y
                .iter()
                .zip(x)
                .map(|(&yi, &xi)| (yi - xi) * (yi - xi))
                .sum();
            recon = recon + se;
        }
        for a in rho_hat.iter_mut() {
            *a = clamp_activation(*a / m);
        }
        let two = T::from_f64_lit(2.0);
        recon = recon / (two * m);
        let mut penalty = T::zero();
        for &r in &rho_hat {
            penalty = penalty + kl_bernoulli(self.rho, r)?;
        }
        let mean_act = rho_hat.iter().copied().sum::<T>() / T::from_usize(self.n_hidden).unwrap();
        Ok((recon, penalty, mean_act, rho_hat))
    }

    /// Analytic full-batch gradient of the sparse objective.
    fn gradients(&self, data: &[Vec<T>]) -> Result<AeGrads<T>> {
        let m = T::from_usize(data.len()).unwrap();
        let (_, _, _, rho_hat) = self.forward_stats(data)?;

        // Per-unit KL term folded into the hidden delta; constant across
        // samples because rho_hat is a batch mean.
        let kl_term: Vec<T> = rho_hat
            .iter()
            .map(|&r| self.beta * kl_bernoulli_grad_rho_hat(self.rho, r).unwrap() / m)
            .collect();

        let mut g = AeGrads {
            w_enc: vec![T::zero(); self.w_enc.len()],
            b_enc: vec![T::zero(); self.b_enc.len()],
            w_dec: vec![T::zero(); self.w_dec.len()],
            b_dec: vec![T::zero(); self.b_dec.len()],
        };

        for x in data {
            let h = self.encode(x);
            let y = self.decode(&h);
            // Output delta: (y - x)/m * sigma'(z_out).
            let delta_out: Vec<T> = y
                .iter()
                .zip(x)
                .map(|(&yi, &xi)| (yi - xi) / m * yi * (T::one() - yi))
                .collect();
            // Hidden delta: backprop through decoder plus the KL term.
            let mut delta_h = vec![T::zero(); self.n_hidden];
            for i in 0..self.n_visible {
                let row = &self.w_dec[i * self.n_hidden..(i + 1) * self.n_hidden];
                for j in 0..self.n_hidden {
                    delta_h[j] = delta_h[j] + row[j] * delta_out[i];
                }
            }
            for j in 0..self.n_hidden {
                delta_h[j] = (delta_h[j] + kl_term[j]) * h[j] * (T::one() - h[j]);
            }
            // Accumulate.
            for i in 0..self.n_visible {
                let grow = &mut g.w_dec[i * self.n_hidden..(i + 1) * self.n_hidden];
                for j in 0..self.n_hidden {
                    grow[j] = grow[j] + delta_out[i] * h[j];
                }
                g.b_dec[i] = g.b_dec[i] + delta_out[i];
            }
            for j in 0..self.n_hidden {
                let grow = &mut g.w_enc[j * self.n_visible..(j + 1) * self.n_visible];
                for (gi, &xi) in grow.iter_mut().zip(x) {
                    *gi = *gi + delta_h[j] * xi;
                }
                g.b_enc[j] = g.b_enc[j] + delta_h[j];
            }
        }
        Ok(g)
    }

    /// Flattened parameter vector, for gradient checking.
    pub fn params_flat(&self) -> Vec<T> {
        let mut p = self.w_enc.clone();
        p.extend_from_slice(&self.b_enc);
        p.extend_from_slice(&self.w_dec);
        p.extend_from_slice(&self.b_dec);
        p
    }

    /// Overwrite parameters from a flattened vector.
    pub fn set_params_flat(&mut self, p: &[T]) {
        let (a, b, c) = (
            self.w_enc.len(),
            self.b_enc.len(),
            self.w_dec.len(),
        );
        self.w_enc.copy_from_slice(&p[..a]);
        self.b_enc.copy_from_slice(&p[a..a + b]);
        self.w_dec.copy_from_slice(&p[a + b..a + b + c]);
        self.b_dec.copy_from_slice(&p[a + b + c..]);
    }

    /// Analytic gradient in the same flattened order.
    pub fn grad_flat(&self, data: &[Vec<T>]) -> Result<Vec<T>> {
        let g = self.gradients(data)?;
        let mut out = g.w_enc;
        out.extend_from_slice(&g.b_enc);
        out.extend_from_slice(&g.w_dec);
        out.extend_from_slice(&g.b_dec);
        Ok(out)
    }

    /// Full-batch gradient descent. Errors out on a non-finite loss.
    pub fn train(
        &mut self,
        data: &[Vec<T>],
        cfg: &TrainConfig<T>,
    ) -> Result<TrainHistory<T>> {
        let mut records = Vec::new();
        for epoch in 0..cfg.epochs {
            let g = self.gradients(data)?;
            let lr = cfg.learning_rate;
            for (w, gw) in self.w_enc.iter_mut().zip(&g.w_enc) {
                *w = *w - lr * *gw;
            }
            for (w, gw) in self.b_enc.iter_mut().zip(&g.b_enc) {
                *w = *w - lr * *gw;
            }
            for (w, gw) in self.w_dec.iter_mut().zip(&g.w_dec) {
                *w = *w - lr * *gw;
            }
            for (w, gw) in self.b_dec.iter_mut().zip(&g.b_dec) {
                *w = *w - lr * *gw;
            }
            let record = (epoch + 1) % cfg.record_stride.max(1) == 0 || epoch + 1 == cfg.epochs;
            if record {
                let (total, recon, mean_act) = self.objective(data)?;
                if !total.is_finite() {
                    return Err(CoreError::Training {
                        epoch,
                        detail: "non-finite loss".into(),
                    });
                }
                records.push(TrainRecord {
                    epoch: epoch + 1,
                    recon_loss: recon,
                    penalty: (total - recon) / if self.beta == T::zero() { T::one() } else { self.beta },
                    mean_activation: mean_act,
                });
            }
        }
        Ok(TrainHistory { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Central-difference gradient of a scalar function of a vector.
    pub fn finite_diff<F: FnMut(&[f64]) -> f64>(x: &[f64], mut f: F, h: f64) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    #[test]
    fn l0_norm_cases() {
        assert_eq!(l0_norm(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(l0_norm(&[1.0, -2.0, 0.0, 3.0]), 3);
        // Hard-threshold construction.
        let mut rng = SeedStream::new(8);
        let v: Vec<f64> = (0..100).map(|_| rng.normal()).collect();
        let tau = 0.5;
        let kept: Vec<f64> = v.iter().map(|&x| if x.abs() > tau { x } else { 0.0 }).collect();
        assert_eq!(l0_norm(&kept), l0_norm_thresholded(&v, tau));
    }

    #[test]
    fn l0_relaxed_extremes() {
        let g = GateDistribution::new(vec![-60.0; 5], -0.1, 1.1, 0.5).unwrap();
        assert!(l0_relaxed_loss(&g) < 1e-10);
        let g = GateDistribution::new(vec![60.0; 10], -0.1, 1.1, 0.5).unwrap();
        assert_relative_eq!(l0_relaxed_loss(&g), 10.0, max_relative = 1e-10);
    }

    #[test]
    fn l0_relaxed_gradient_matches_finite_diff() {
        let mut rng = SeedStream::new(12);
        let psi: Vec<f64> = (0..20).map(|_| 2.0 * rng.normal()).collect();
        let mk = |p: &[f64]| GateDistribution::new(p.to_vec(), -0.1, 1.1, 0.66).unwrap();
        let analytic = l0_relaxed_grad(&mk(&psi));
        let numeric = finite_diff(&psi, |p| l0_relaxed_loss(&mk(p)), 1e-5);
        for (a, n) in analytic.iter().zip(&numeric) {
            let denom = a.abs().max(n.abs()).max(1e-8);
            assert!((a - n).abs() / denom < 1e-5, "{a} vs {n}");
        }
    }

    #[test]
    fn l0_relaxed_monotone_in_open_probability() {
        let mut psi = vec![0.0; 4];
        let base = l0_relaxed_loss(&GateDistribution::new(psi.clone(), -0.1, 1.1, 0.5).unwrap());
        psi[2] = 1.0;
        let up = l0_relaxed_loss(&GateDistribution::new(psi, -0.1, 1.1, 0.5).unwrap());
        assert!(up > base);
    }

    #[test]
    fn l1_hand_values() {
        assert_eq!(l1_penalty(&[0.5, -0.5]), 1.0);
        assert_eq!(l1_penalty::<f64>(&[0.0, 0.0]), 0.0);
        assert_eq!(l1_subgradient::<f64>(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(l1_subgradient(&[2.0, -3.0, 0.0]), vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn l1_gradient_away_from_kinks() {
        let mut rng = SeedStream::new(44);
        let w: Vec<f64> = (0..30)
            .map(|_| {
                let x = rng.normal();
                x.signum() * (x.abs() + 1e-2)
            })
            .collect();
        let analytic = l1_subgradient(&w);
        let numeric = finite_diff(&w, |v| l1_penalty(v), 1e-5);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-5, "{a} vs {n}");
        }
    }

    #[test]
    fn l1_norm_axioms() {
        let mut rng = SeedStream::new(9);
        for _ in 0..200 {
            let x: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            let y: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            assert!(l1_penalty(&s) <= l1_penalty(&x) + l1_penalty(&y) + 1e-12);
            let c = rng.normal();
            let cx: Vec<f64> = x.iter().map(|a| c * a).collect();
            assert_relative_eq!(
                l1_penalty(&cx),
                c.abs() * l1_penalty(&x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn l1_objective_compositions() {
        assert_eq!(l1_objective(3.0, &[1.0, -2.0], 0.0), 3.0);
        assert_eq!(l1_objective(1.0, &[1.0, 1.0], 0.5), 2.0);
    }

    #[test]
    fn l1_gradient_descent_reaches_soft_threshold() {
        // minimize (w - c)^2 + alpha |w|  ->  sign(c) max(|c| - alpha/2, 0)
        for &(c, alpha) in &[(1.0f64, 0.5f64), (-0.8, 0.4), (0.1, 0.5), (2.0, 1.0)] {
            let mut w = 0.0f64;
            let lr = 0.01;
            for _ in 0..20_000 {
                let grad = 2.0 * (w - c) + alpha * w.signum();
                w -= lr * grad;
            }
            let expect = c.signum() * (c.abs() - alpha / 2.0).max(0.0);
            assert!((w - expect).abs() < 5e-3, "c={c} alpha={alpha}: {w} vs {expect}");
        }
    }

    #[test]
    fn kl_hand_values() {
        assert_eq!(kl_bernoulli(0.05, 0.05).unwrap(), 0.0);
        let v = kl_bernoulli(0.5, 0.25).unwrap();
        let expect = 0.5 * 2.0f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        assert_relative_eq!(expect, 0.143841, max_relative = 1e-5);
    }

    #[test]
    fn kl_rejects_boundary() {
        assert!(kl_bernoulli(0.0, 0.5).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
    }

    #[test]
    fn kl_nonnegative_zero_only_at_match() {
        let mut rng = SeedStream::new(13);
        for _ in 0..500 {
            let rho = 0.01 + 0.98 * rng.uniform();
            let rho_hat = 0.01 + 0.98 * rng.uniform();
            let v = kl_bernoulli(rho, rho_hat).unwrap();
            assert!(v >= 0.0);
            if (rho - rho_hat).abs() > 1e-3 {
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn kl_derivative_zero_at_minimum() {
        assert_relative_eq!(
            kl_bernoulli_grad_rho_hat(0.3, 0.3).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        let numeric = finite_diff(&[0.3], |v| kl_bernoulli(0.3, v[0]).unwrap(), 1e-6);
        assert!(numeric[0].abs() < 1e-6);
    }

    #[test]
    fn kl_monotone_away_from_target() {
        let rho = 0.2;
        let mut prev = kl_bernoulli(rho, 0.2).unwrap();
        for r in [0.3, 0.4, 0.6, 0.8] {
            let v = kl_bernoulli(rho, r).unwrap();
            assert!(v > prev);
            prev = v;
        }
        prev = kl_bernoulli(rho, 0.2).unwrap();
        for r in [0.1, 0.05, 0.02] {
            let v = kl_bernoulli(rho, r).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_rescales_penalty_exactly() {
        let base = 1.7;
        let r = 0.9;
        let (l1, l2) = (0.3, 1.1);
        let t1 = regularized_total(base, r, l1);
        let t2 = regularized_total(base, r, l2);
        assert_relative_eq!(t2 - t1, (l2 - l1) * r, max_relative = 1e-12);
    }

    #[test]
    fn autoencoder_gradient_matches_finite_diff() {
        // 3 hidden units, tiny batch, full objective.
        let mut rng = SeedStream::new(31);
        let ae = SparseAutoencoder::init(&mut rng, 4, 3, 0.1, 0.7).unwrap();
        let data: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.uniform()).collect())
            .collect();
        let analytic = ae.grad_flat(&data).unwrap();
        let p0 = ae.params_flat();
        let numeric = finite_diff(&p0, |p| {
            let mut m = ae.clone();
            m.set_params_flat(p);
            m.objective(&data).unwrap().0
        }, 1e-5);
        for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let denom = a.abs().max(n.abs()).max(1e-6);
            assert!((a - n).abs() / denom < 1e-4, "param {i}: {a} vs {n}");
        }
        let _ = p0;
    }

    #[test]
    fn autoencoder_beta_zero_ignores_sparsity() {
        let mut rng = SeedStream::new(70);
        let mut ae = SparseAutoencoder::init(&mut rng, 8, 6, 0.05, 0.0).unwrap();
        let data: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..8).map(|_| rng.uniform()).collect())
            .collect();
        let cfg = TrainConfig {
            learning_rate: 0.5,
            epochs: 300,
            record_stride: 100,
        };
        let hist = ae.train(&data, &cfg).unwrap();
        let last = hist.records.last().unwrap();
        // Unconstrained mean activation sits far above rho = 0.05.
        assert!(last.mean_activation > 0.2, "{}", last.mean_activation);
    }

    #[test]
    fn history_csv_header() {
        let h = TrainHistory::<f64> {
            records: vec![TrainRecord {
                epoch: 1,
                recon_loss: 0.5,
                penalty: 0.1,
                mean_activation: 0.2,
            }],
        };
        assert!(h.to_csv().starts_with("epoch,recon_loss,penalty,mean_activation\n"));
    }
}
