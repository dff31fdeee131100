//! Bregman divergences, exact dual-direction Bregman Kd-trees, and
//! primal/dual Bregman-Hausdorff and Chernoff-Bregman-Hausdorff
//! computations between finite point sets.
//!
//! The supported divergences (squared Euclidean, Kullback-Leibler,
//! generalized KL, Itakura-Saito) all decompose coordinate-wise, which is
//! what makes the Kd-tree pruning rule exact and cheap. See the module
//! docs for the individual pieces:
//!
//! * [`divergence`] -- generators, divergences, entropies, Legendre
//!   conjugates
//! * [`data`] -- point clouds, CSV IO, validation, simplex sampling
//! * [`kdtree`] -- the nearest-neighbour index with shell early termination
//! * [`hausdorff`] -- the one-sided Hausdorff divergences, three backends
//! * [`chernoff`] -- Chernoff points and the symmetric Chernoff distance

pub mod chernoff;
pub mod data;
pub mod divergence;
pub mod error;
pub mod hausdorff;
pub mod kdtree;

pub use chernoff::{chernoff_hausdorff, chernoff_point, chernoff_set, ChernoffConfig};
pub use data::{load_points, sample_simplex, save_points, PointCloud, Validation};
pub use divergence::{divergence, ExtendedReal, Generator};
pub use error::{Error, Result};
pub use hausdorff::{
    hausdorff, hausdorff_both_directions, hausdorff_par, Backend, HausdorffResult, Variant,
};
pub use kdtree::{box_min_divergence, BregmanKdTree, Direction};
