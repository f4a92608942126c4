//! Synthetic Gaussian-cluster classification data.
//!
//! Generation order, all from one ChaCha20 stream seeded by `seed`:
//!
//! 1. class centers: `D` distinct vertices of `{−h, +h}^M`, sampled without
//!    replacement;
//! 2. per class a factor `A_j` with entries uniform on `[−1, 1)`;
//! 3. samples class by class, `x = c_j + A_jᵀ z` with `z` standard normal, so
//!    the class covariance is `A_jᵀ A_j`;
//! 4. label noise: with probability `label_noise` the label is replaced by a
//!    uniformly drawn class (possibly the same one);
//! 5. a uniform shuffle of the samples;
//! 6. one uniform permutation of the feature columns shared by all samples.
//!
//! Class sizes are `⌈N/D⌉` for the first `N mod D` classes and `⌊N/D⌋` for the
//! rest.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::seq::SliceRandom;
use rand::seq::index;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;
use crate::varinf::VIDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub label_noise: f64,
    pub cube_half_width: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(samples: usize, features: usize, classes: usize, seed: u64) -> Self {
        Self {
            samples,
            features,
            classes,
            label_noise: 0.03,
            cube_half_width: 1.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features == 0 {
            return Err(Error::InvalidInput("need at least one feature".into()));
        }
        if self.classes < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two classes, got {}",
                self.classes
            )));
        }
        if self.features < usize::BITS as usize && self.classes > 1usize << self.features {
            return Err(Error::InvalidInput(format!(
                "{} classes need more distinct hypercube vertices than 2^{} provides",
                self.classes, self.features
            )));
        }
        if self.samples < self.classes {
            return Err(Error::InvalidInput("need at least one sample per class".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::InvalidInput(format!(
                "label noise must lie in [0, 1], got {}",
                self.label_noise
            )));
        }
        if !(self.cube_half_width > 0.0) || !self.cube_half_width.is_finite() {
            return Err(Error::InvalidInput("cube half-width must be positive".into()));
        }
        Ok(())
    }
}

/// A generated dataset with the latent quantities used to build it.
///
/// Per-sample vectors follow the final (shuffled) sample order. `centers`
/// and `factors` are in the original feature order; column `k` of the
/// dataset holds original feature `feature_permutation[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub dataset: VIDataset,
    pub centers: Vec<Vec<f64>>,
    pub factors: Vec<Matrix>,
    pub feature_permutation: Vec<usize>,
    pub clean_labels: Vec<usize>,
    pub noise_applied: Vec<bool>,
}

/// Class sizes `⌈N/D⌉` (first `N mod D`) and `⌊N/D⌋` (rest).
pub fn partition_sizes(samples: usize, classes: usize) -> Vec<usize> {
    let (base, extra) = (samples / classes, samples % classes);
    (0..classes).map(|j| base + usize::from(j < extra)).collect()
}

fn vertex_centers<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Vec<Vec<f64>> {
    let (m, h) = (cfg.features, cfg.cube_half_width);
    let vertex = |bits: &dyn Fn(usize) -> bool| (0..m).map(|k| if bits(k) { h } else { -h }).collect::<Vec<f64>>();
    if m < 48 {
        index::sample(rng, 1usize << m, cfg.classes)
            .into_iter()
            .map(|code| vertex(&|k| (code >> k) & 1 == 1))
            .collect()
    } else {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(cfg.classes);
        while centers.len() < cfg.classes {
            let bits: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
            let c = vertex(&|k| bits[k]);
            if !centers.contains(&c) {
                centers.push(c);
            }
        }
        centers
    }
}

pub fn generate(cfg: &GenConfig) -> Result<GeneratedData> {
    cfg.validate()?;
    let (n, m, d) = (cfg.samples, cfg.features, cfg.classes);
    let mut rng = rng_from_seed(cfg.seed);

    let centers = vertex_centers(cfg, &mut rng);
    let factors: Vec<Matrix> = (0..d)
        .map(|_| Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0)))
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut clean_labels = Vec::with_capacity(n);
    for (j, size) in partition_sizes(n, d).into_iter().enumerate() {
        for _ in 0..size {
            let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let x: Vec<f64> = (0..m)
                .map(|col| centers[j][col] + (0..m).map(|r| factors[j][(r, col)] * z[r]).sum::<f64>())
                .collect();
            rows.push(x);
            clean_labels.push(j);
        }
    }

    let mut labels = clean_labels.clone();
    let mut noise_applied = vec![false; n];
    for i in 0..n {
        if rng.gen_bool(cfg.label_noise) {
            noise_applied[i] = true;
            labels[i] = rng.gen_range(0..d);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut feature_permutation: Vec<usize> = (0..m).collect();
    feature_permutation.shuffle(&mut rng);

    let design = Matrix::from_fn(n, m, |i, k| rows[order[i]][feature_permutation[k]]);
    let dataset = VIDataset::new(design, order.iter().map(|&i| labels[i]).collect(), d)?;
    Ok(GeneratedData {
        dataset,
        centers,
        factors,
        feature_permutation,
        clean_labels: order.iter().map(|&i| clean_labels[i]).collect(),
        noise_applied: order.iter().map(|&i| noise_applied[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_seven_into_three() {
        assert_eq!(partition_sizes(7, 3), vec![3, 2, 2]);
        assert_eq!(partition_sizes(9, 3), vec![3, 3, 3]);
    }

    #[test]
    fn same_seed_same_data() {
        let mut cfg = GenConfig::new(50, 4, 3, 17);
        cfg.label_noise = 0.0;
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        cfg.seed = 18;
        assert_ne!(
            generate(&cfg).unwrap().dataset,
            generate(&GenConfig {
                seed: 17,
                ..cfg.clone()
            })
            .unwrap()
            .dataset
        );
    }

    #[test]
    fn centers_are_distinct_vertices() {
        let g = generate(&GenConfig::new(40, 2, 4, 3)).unwrap();
        for (a, c) in g.centers.iter().enumerate() {
            assert!(c.iter().all(|v| v.abs() == 1.5));
            assert!(g.centers[a + 1..].iter().all(|o| o != c));
        }
    }

    #[test]
    fn clean_class_counts_match_partition() {
        let g = generate(&GenConfig::new(200, 5, 3, 1)).unwrap();
        let mut counts = vec![0; 3];
        g.clean_labels.iter().for_each(|&l| counts[l] += 1);
        assert_eq!(counts, partition_sizes(200, 3));
        let mut perm = g.feature_permutation.clone();
        perm.sort_unstable();
        assert_eq!(perm, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_too_many_classes() {
        assert!(generate(&GenConfig::new(10, 2, 5, 0)).is_err());
        assert!(generate(&GenConfig::new(2, 2, 3, 0)).is_err());
    }
}
