//! Representative selection by PCA and K-means.

pub mod kmeans;
pub mod pca;
pub mod select;

pub use kmeans::{kmeans, KmeansResult};
pub use pca::{pca_fit, PcaModel};
pub use select::{select_representatives, ClusterConfig};
