//! Uniform sampling with replacement from a source set.

use crate::envset::{EnvEntry, EnvironmentSet, Provenance, SetKind};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub fn sample_uniform(envs: &EnvironmentSet, count: usize, rng: &mut SeededRng) -> Result<EnvironmentSet> {
    if envs.is_empty() && count > 0 {
        return Err(Error::contract("cannot sample from an empty set"));
    }
    let entries = (0..count)
        .map(|i| {
            let j = rng.below(envs.len());
            let src = &envs.entries[j];
            EnvEntry {
                id: format!("rs-{i:04}"),
                grid: src.grid.clone(),
                c_bar: src.c_bar,
                provenance: Provenance::Sampled {
                    source_id: src.id.clone(),
                    source_index: j,
                },
            }
        })
        .collect();
    Ok(EnvironmentSet {
        kind: SetKind::Synthesized,
        entries,
    })
}

/// Source indices recorded in a sampled set.
pub fn source_indices(set: &EnvironmentSet) -> Vec<usize> {
    set.entries
        .iter()
        .filter_map(|e| match e.provenance {
            Provenance::Sampled { source_index, .. } => Some(source_index),
            _ => None,
        })
        .collect()
}
