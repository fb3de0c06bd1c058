//! Dense graph limits at desk scale.
//!
//! Exact homomorphism densities of small patterns in finite graphs and in
//! step graphons, W-random graph samplers (simple, bipartite and directed),
//! the cut norm of step kernels, and finite-sample diagnostics for
//! exchangeable random graphs (prefix laws, the isomorphism-invariance
//! criterion, the product criterion for extreme laws, reverse-martingale
//! traces).
//!
//! Every exact quantity is a [`Rational`]; every random draw comes from a
//! seeded [`rng::StreamRng`].

pub mod bipartite;
pub mod canon;
pub mod cut;
pub mod density;
pub mod directed;
pub mod error;
pub mod exchangeable;
pub mod graph;
pub mod graphon;
pub mod io;
pub mod rational;
pub mod rng;
pub mod stats;

pub use bipartite::{BipartiteGraph, BipartiteKernel};
pub use canon::{canonicalize, enumerate_unlabelled, GraphEnumeration, UnlabelledGraph};
pub use density::{DensityEstimate, DensityVector};
pub use directed::{DirectedGraph, DirectedKernelQuadruplePlusP, DirectedKernelQuintuple};
pub use error::{Error, Result};
pub use graph::LabelledGraph;
pub use graphon::{BlockMap, GeneralGraphon, StepGraphon};
pub use rational::Rational;
