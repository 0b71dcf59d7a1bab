//! Principal component analysis by symmetric eigen-decomposition.
//!
//! With fewer samples than dimensions the decomposition runs on the `n×n`
//! Gram matrix of the centered data and maps eigenvectors back (`v = Xᵀu/‖Xᵀu‖`);
//! otherwise on the `d×d` covariance. Components are re-orthonormalized with
//! two passes of modified Gram-Schmidt, and components with numerically zero
//! variance are completed to an orthonormal set.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::error::{Error, Result};

const MAGIC: &str = "ENVSYNTH-PCA";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` rows of length `dim`, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Per-component sample variance, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Total sample variance of the training data.
    pub total_variance: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn pca_fit(data: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = data.len();
    if n < 2 {
        return Err(Error::contract("PCA needs at least two vectors"));
    }
    let dim = data[0].len();
    if dim == 0 || data.iter().any(|v| v.len() != dim) {
        return Err(Error::Shape("PCA input vectors must share a positive length".into()));
    }
    if k == 0 || k > (n - 1).min(dim) {
        return Err(Error::contract(format!(
            "k = {k} components requested; must be in 1..={} for {n} vectors of length {dim}",
            (n - 1).min(dim)
        )));
    }
    let mut mean = vec![0.0; dim];
    for v in data {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, dim, |i, j| data[i][j] - mean[j]);
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;

    // (eigenvalue, direction in data space) pairs, largest first.
    let mut pairs: Vec<(f64, Vec<f64>)> = if n <= dim {
        let gram = &centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        order
            .into_iter()
            .take(k)
            .map(|i| {
                let u = eig.eigenvectors.column(i);
                let v = centered.transpose() * u;
                (eig.eigenvalues[i].max(0.0) / denom, v.iter().copied().collect())
            })
            .collect()
    } else {
        let cov = centered.transpose() * &centered / denom;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        order
            .into_iter()
            .take(k)
            .map(|i| {
                (
                    eig.eigenvalues[i].max(0.0),
                    eig.eigenvectors.column(i).iter().copied().collect(),
                )
            })
            .collect()
    };

    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let tiny = lambda_max * 1e-12 + f64::MIN_POSITIVE;
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for (lambda, v) in pairs.drain(..) {
        let vec = if lambda > tiny { orthonormalize(v, &components) } else { None };
        let vec = match vec {
            Some(v) => v,
            None => complete_basis(&components, dim),
        };
        components.push(vec);
        explained.push(if lambda > tiny { lambda } else { 0.0 });
    }
    for c in components.iter_mut() {
        let idx = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .expect("non-empty");
        if c[idx] < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    // Keep the reported spectrum monotone after clamping.
    for i in 1..explained.len() {
        if explained[i] > explained[i - 1] {
            explained[i] = explained[i - 1];
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        total_variance,
    })
}

/// Two passes of modified Gram-Schmidt against `basis`; `None` if `v`
/// collapses.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let start = norm(&v);
    if !(start > 0.0) {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
    let n = norm(&v);
    if n <= start * 1e-8 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        if let Some(v) = orthonormalize(e, basis) {
            return v;
        }
    }
    unreachable!("fewer than dim components always leave room")
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Shape(format!(
                "vector of length {} for a {}-dimensional model",
                v.len(),
                self.dim()
            )));
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }

    pub fn reconstruct(&self, code: &[f64]) -> Result<Vec<f64>> {
        if code.len() != self.k() {
            return Err(Error::Shape(format!(
                "code of length {} for a model with {} components",
                code.len(),
                self.k()
            )));
        }
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(code) {
            out.iter_mut().zip(c).for_each(|(o, x)| *o += w * x);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Meta {
            dim: usize,
            k: usize,
            total_variance: f64,
        }
        let meta = Meta {
            dim: self.dim(),
            k: self.k(),
            total_variance: self.total_variance,
        };
        let mut tensors: Vec<&[f64]> = vec![&self.mean, &self.explained_variance];
        tensors.extend(self.components.iter().map(|c| c.as_slice()));
        checkpoint::write(path, MAGIC, VERSION, &meta, &tensors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Meta {
            dim: usize,
            k: usize,
            total_variance: f64,
        }
        let (meta, mut tensors): (Meta, Vec<Vec<f64>>) = checkpoint::read(path, MAGIC, VERSION)?;
        let bad = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 3,
            message: m.to_string(),
        };
        if tensors.len() != meta.k + 2 {
            return Err(bad("tensor count does not match k"));
        }
        let components = tensors.split_off(2);
        let explained_variance = tensors.pop().expect("len checked");
        let mean = tensors.pop().expect("len checked");
        if mean.len() != meta.dim
            || explained_variance.len() != meta.k
            || components.iter().any(|c| c.len() != meta.dim)
        {
            return Err(bad("tensor shapes do not match the header"));
        }
        Ok(Self {
            mean,
            components,
            explained_variance,
            total_variance: meta.total_variance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = SeededRng::new(seed);
        (0..n).map(|_| (0..dim).map(|_| r.normal()).collect()).collect()
    }

    fn max_row_orthonormality_error(m: &PcaModel) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.k() {
            for j in 0..m.k() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&m.components[i], &m.components[j]) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn full_rank_reconstruction_is_exact() {
        let data = random(10, 900, 1);
        let m = pca_fit(&data, 9).unwrap();
        assert!(max_row_orthonormality_error(&m) < 1e-8);
        for v in &data {
            let r = m.reconstruct(&m.transform(v).unwrap()).unwrap();
            let err = r.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "err {err}");
        }
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn collinear_data_has_one_component() {
        let mut r = SeededRng::new(2);
        let dir: Vec<f64> = (0..900).map(|_| r.normal()).collect();
        let offset: Vec<f64> = (0..900).map(|_| r.normal()).collect();
        let data: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let t = r.normal();
                dir.iter().zip(&offset).map(|(d, o)| o + t * d).collect()
            })
            .collect();
        let m = pca_fit(&data, 1).unwrap();
        assert!(m.explained_variance[0] >= (1.0 - 1e-10) * m.total_variance);
    }

    #[test]
    fn covariance_route_matches_gram_route() {
        // 12 samples in 6 dims takes the covariance route.
        let data = random(12, 6, 3);
        let m = pca_fit(&data, 5).unwrap();
        assert!(max_row_orthonormality_error(&m) < 1e-10);
        // The same data padded to 20 dims with zeros, sampled fewer times than
        // dims, uses the Gram route; variances agree.
        let padded: Vec<Vec<f64>> = data
            .iter()
            .map(|v| v.iter().copied().chain(std::iter::repeat_n(0.0, 14)).collect())
            .collect();
        let g = pca_fit(&padded, 5).unwrap();
        for (a, b) in m.explained_variance.iter().zip(&g.explained_variance) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_identities() {
        let data = random(30, 50, 4);
        let m = pca_fit(&data, 10).unwrap();
        assert!(m.transform(&m.mean).unwrap().iter().all(|c| c.abs() < 1e-12));
        let code: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let back = m.transform(&m.reconstruct(&code).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&code) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(m.transform(&[0.0; 3]).is_err());
        assert!(m.reconstruct(&[0.0; 3]).is_err());
    }

    #[test]
    fn sign_convention() {
        let m = pca_fit(&random(15, 20, 5), 4).unwrap();
        for c in &m.components {
            let big = c.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
            assert!(big > 0.0);
        }
    }

    #[test]
    fn k_bounds() {
        let data = random(5, 900, 6);
        assert!(pca_fit(&data, 5).is_err());
        assert!(pca_fit(&data, 0).is_err());
        assert!(pca_fit(&data[..1], 1).is_err());
    }

    #[test]
    fn duplicate_rows_are_handled() {
        let mut data = random(3, 40, 7);
        data.extend(data.clone());
        let m = pca_fit(&data, 5).unwrap();
        assert!(max_row_orthonormality_error(&m) < 1e-8);
        assert_eq!(m.explained_variance[3], 0.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = pca_fit(&random(8, 30, 8), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pca.ckpt");
        m.save(&p).unwrap();
        assert_eq!(PcaModel::load(&p).unwrap(), m);
    }
}
