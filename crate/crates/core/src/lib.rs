//! Decision trees and random forests on the hyperboloid model of hyperbolic
//! space, with a Euclidean CART baseline and an evaluation harness.

pub mod data;
pub mod error;
pub mod eval;
pub mod forest;
pub mod geometry;
pub mod model;
pub mod rng;
pub mod tree;

pub use data::{Dataset, PointMatrix, Targets, Task};
pub use error::{Error, Result};
pub use forest::{fit_forest, fit_forest_with_jobs, ForestConfig, ForestModel};
pub use geometry::{GeometryKind, ManifoldSpec, Strictness};
pub use model::{AnyModel, Predictor};
pub use tree::{fit, TreeConfig, TreeModel};
