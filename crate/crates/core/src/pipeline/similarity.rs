//! How closely a synthesized set resembles the challenging set.

use serde::{Deserialize, Serialize};

use crate::envset::EnvironmentSet;

pub const DENSITY_BINS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingStats {
    pub mean: f64,
    pub median: f64,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub synthesized_count: usize,
    pub challenging_count: usize,
    /// Nearest-neighbor Hamming distance from each synthesized grid to the
    /// challenging set. `None` when either set is empty.
    pub nearest_hamming: Option<HammingStats>,
    pub synthesized_density: Vec<f64>,
    pub challenging_density: Vec<f64>,
    pub density_l1: f64,
}

/// Normalized occupancy-density histogram over [0, 1]; all zeros for an
/// empty set.
pub fn density_histogram(set: &EnvironmentSet) -> Vec<f64> {
    let mut h = vec![0.0; DENSITY_BINS];
    for g in set.grids() {
        let bin = ((g.density() * DENSITY_BINS as f64) as usize).min(DENSITY_BINS - 1);
        h[bin] += 1.0;
    }
    if !set.is_empty() {
        let n = set.len() as f64;
        h.iter_mut().for_each(|v| *v /= n);
    }
    h
}

pub fn similarity(synthesized: &EnvironmentSet, challenging: &EnvironmentSet) -> SimilarityReport {
    let nearest: Vec<usize> = if challenging.is_empty() {
        Vec::new()
    } else {
        synthesized
            .grids()
            .map(|s| challenging.grids().map(|c| s.hamming(c)).min().expect("non-empty"))
            .collect()
    };
    let nearest_hamming = (!nearest.is_empty()).then(|| {
        let mut sorted = nearest.clone();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        };
        HammingStats {
            mean: sorted.iter().sum::<usize>() as f64 / n as f64,
            median,
            max: sorted[n - 1],
        }
    });
    let sd = density_histogram(synthesized);
    let cd = density_histogram(challenging);
    let density_l1 = sd.iter().zip(&cd).map(|(a, b)| (a - b).abs()).sum();
    SimilarityReport {
        synthesized_count: synthesized.len(),
        challenging_count: challenging.len(),
        nearest_hamming,
        synthesized_density: sd,
        challenging_density: cd,
        density_l1,
    }
}
