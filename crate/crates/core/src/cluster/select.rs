use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::pca::PcaModel;
use crate::envset::{EnvEntry, EnvironmentSet, Provenance, SetKind};
use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;
use crate::rng::SeededRng;
use crate::sim::nav::is_navigable_grid;

/// Reconstructions are binarized at this value (data lives in {0, 1}).
pub const RECONSTRUCTION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// PCA components.
    pub k: usize,
    /// Clusters.
    pub m: usize,
    /// Samples per cluster.
    pub n: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { k: 100, m: 20, n: 5 }
    }
}

/// Cluster `envs` in PCA space and pick `n` members from each of `m`
/// clusters. Each pick is the binarized PCA reconstruction of the member, or
/// the member's own grid if the reconstruction is not navigable.
pub fn select_representatives(
    envs: &EnvironmentSet,
    pca: &PcaModel,
    m: usize,
    n: usize,
    rng: &mut SeededRng,
) -> Result<EnvironmentSet> {
    let codes: Vec<Vec<f64>> = envs
        .grids()
        .map(|g| pca.transform(&g.to_f64()))
        .collect::<Result<_>>()?;
    if codes.is_empty() {
        return Err(Error::contract("no environments to select from"));
    }
    let km = kmeans(&codes, m, rng)?;
    let mut out = EnvironmentSet::new(SetKind::Synthesized);
    for cluster in 0..m {
        let members: Vec<usize> = (0..codes.len()).filter(|&i| km.assignments[i] == cluster).collect();
        let picks: Vec<usize> = if members.len() >= n {
            let mut pool = members.clone();
            for i in 0..n {
                let j = i + rng.below(pool.len() - i);
                pool.swap(i, j);
            }
            pool.truncate(n);
            pool
        } else {
            (0..n).map(|_| members[rng.below(members.len())]).collect()
        };
        for pick in picks {
            let fallbacks = std::iter::once(pick).chain(members.iter().copied().filter(|&i| i != pick));
            let mut chosen = None;
            for idx in fallbacks {
                let recon = pca.reconstruct(&codes[idx])?;
                let grid = OccupancyGrid::from_scores(&recon, RECONSTRUCTION_THRESHOLD)?;
                if is_navigable_grid(&grid) {
                    chosen = Some((idx, grid, true));
                    break;
                }
                let original = &envs.entries[idx].grid;
                if is_navigable_grid(original) {
                    chosen = Some((idx, original.clone(), false));
                    break;
                }
            }
            let (idx, grid, reconstructed) = chosen.ok_or_else(|| {
                Error::Value(format!("cluster {cluster} has no navigable member"))
            })?;
            let i = out.len();
            let src = &envs.entries[idx];
            out.entries.push(EnvEntry {
                id: format!("pca-{i:04}"),
                grid,
                c_bar: src.c_bar,
                provenance: Provenance::Representative {
                    source_id: src.id.clone(),
                    source_index: idx,
                    cluster,
                    reconstructed,
                },
            });
        }
    }
    Ok(out)
}
