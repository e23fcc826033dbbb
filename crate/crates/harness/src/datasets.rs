//! Synthetic image patches for the sparse-coding experiments: 8x8 patches
//! built from a small family of oriented structures (bars, edges,
//! gradients) plus pixel noise, values in [0, 1]. Low-dimensional latent
//! structure makes a sparse hidden code genuinely better than the
//! all-mean baseline.

use engram_core::rng::SeedStream;

pub const PATCH_SIDE: usize = 8;
pub const PATCH_DIM: usize = PATCH_SIDE * PATCH_SIDE;

fn bar_h(row: usize) -> Vec<f64> {
    let mut p = vec![0.0; PATCH_DIM];
    for c in 0..PATCH_SIDE {
        p[row * PATCH_SIDE + c] = 1.0;
    }
    p
}

fn bar_v(col: usize) -> Vec<f64> {
    let mut p = vec![0.0; PATCH_DIM];
    for r in 0..PATCH_SIDE {
        p[r * PATCH_SIDE + col] = 1.0;
    }
    p
}

fn edge_h(split: usize) -> Vec<f64> {
    let mut p = vec![0.0; PATCH_DIM];
    for r in split..PATCH_SIDE {
        for c in 0..PATCH_SIDE {
            p[r * PATCH_SIDE + c] = 1.0;
        }
    }
    p
}

fn edge_v(split: usize) -> Vec<f64> {
    let mut p = vec![0.0; PATCH_DIM];
    for r in 0..PATCH_SIDE {
        for c in split..PATCH_SIDE {
            p[r * PATCH_SIDE + c] = 1.0;
        }
    }
    p
}

/// One random patch: a randomly placed oriented structure at a random
/// intensity over a dim background, plus Gaussian pixel noise.
pub fn random_patch(rng: &mut SeedStream) -> Vec<f64> {
    let proto = match rng.below(4) {
        0 => bar_h(rng.below(PATCH_SIDE)),
        1 => bar_v(rng.below(PATCH_SIDE)),
        2 => edge_h(1 + rng.below(PATCH_SIDE - 1)),
        _ => edge_v(1 + rng.below(PATCH_SIDE - 1)),
    };
    let intensity = 0.5 + 0.4 * rng.uniform();
    let background = 0.1;
    proto
        .into_iter()
        .map(|v| {
            let x = background + intensity * v + 0.05 * rng.normal();
            x.clamp(0.0, 1.0)
        })
        .collect()
}

pub fn synthetic_patches(rng: &mut SeedStream, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| random_patch(rng)).collect()
}

/// Mean squared error of predicting every patch with the dataset mean,
/// matching the autoencoder's reconstruction-loss convention
/// (0.5 * mean over samples of the summed squared pixel error).
pub fn all_mean_baseline(data: &[Vec<f64>]) -> f64 {
    let dim = data[0].len();
    let m = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for x in data {
        for (mi, xi) in mean.iter_mut().zip(x) {
            *mi += xi / m;
        }
    }
    let mut total = 0.0;
    for x in data {
        for (mi, xi) in mean.iter().zip(x) {
            total += (xi - mi) * (xi - mi);
        }
    }
    0.5 * total / m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patches_are_in_unit_range_and_deterministic() {
        let a = synthetic_patches(&mut SeedStream::new(5), 50);
        let b = synthetic_patches(&mut SeedStream::new(5), 50);
        assert_eq!(a, b);
        for p in &a {
            assert_eq!(p.len(), PATCH_DIM);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn baseline_is_total_variance() {
        // Two opposite constant patches: mean is flat 0.5, each pixel
        // contributes 0.25 squared error.
        let data = vec![vec![0.0; 4], vec![1.0; 4]];
        let b = all_mean_baseline(&data);
        assert!((b - 0.5 * 4.0 * 0.25).abs() < 1e-12);
    }
}
