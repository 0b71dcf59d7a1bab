//! Lloyd's algorithm with k-means++ seeding.

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step, in order.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(points: &[Vec<f64>], m: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.below(points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < m {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.below(points.len())
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Give every empty cluster the point farthest from its centroid in the
/// currently largest cluster.
fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let m = centroids.len();
    loop {
        let mut sizes = vec![0usize; m];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let largest = (0..m).max_by_key(|&j| (sizes[j], std::cmp::Reverse(j))).expect("m > 0");
        let far = (0..points.len())
            .filter(|&i| assignments[i] == largest)
            .max_by(|&a, &b| {
                sq_dist(&points[a], &centroids[largest])
                    .total_cmp(&sq_dist(&points[b], &centroids[largest]))
                    .then(b.cmp(&a))
            })
            .expect("largest cluster is non-empty");
        assignments[far] = empty;
        centroids[empty] = points[far].clone();
    }
}

fn means(points: &[Vec<f64>], assignments: &[usize], m: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; m];
    let mut counts = vec![0usize; m];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

pub fn inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

pub fn kmeans(points: &[Vec<f64>], m: usize, rng: &mut SeededRng) -> Result<KmeansResult> {
    if m == 0 {
        return Err(Error::contract("k-means needs at least one cluster"));
    }
    if m > points.len() {
        return Err(Error::contract(format!(
            "{m} clusters requested for {} points",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Shape("k-means points must share a length".into()));
    }

    let mut centroids = seed_plus_plus(points, m, rng);
    let mut assignments = assign(points, &centroids);
    repair_empty(points, &mut centroids, &mut assignments);
    let mut history = vec![inertia(points, &centroids, &assignments)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        centroids = means(points, &assignments, m);
        let mut next = assign(points, &centroids);
        repair_empty(points, &mut centroids, &mut next);
        let j = inertia(points, &centroids, &next);
        let prev = *history.last().expect("non-empty");
        debug_assert!(
            j <= prev + 1e-9 * prev.abs().max(1.0),
            "inertia rose from {prev} to {j}"
        );
        history.push(j);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let centroids = means(points, &assignments, m);
    let inertia = inertia(points, &centroids, &assignments);
    Ok(KmeansResult {
        centroids,
        assignments,
        inertia,
        inertia_history: history,
        iterations,
    })
}
