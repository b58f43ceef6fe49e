//! Exact causal explanations for the decisions of small feed-forward ReLU
//! networks.
//!
//! Inside one linear region (identified by its [`ActivationSignature`]) a ReLU
//! network is a single affine map, so the set of inputs that share a decision
//! is a convex polytope. This crate builds that polytope around a query point,
//! strips redundant half-spaces with a sequence of small LPs, and searches
//! neighbouring regions in Hamming order for counterfactual classes.
//!
//! * [`model`]: networks, the forward pass and activation signatures.
//! * [`lp`]: a dense two-phase simplex solver for the small LPs involved.
//! * [`geometry`]: H-representations, redundancy removal, vertex enumeration.
//! * [`marching`]: Hamming-ring search for a counterfactual region.
//! * [`explain`]: the "why" and "why not" explanations.
//! * [`render`]: text renderings of explanations.
//! * [`oracle`]: brute-force full decomposition used to check the above.

pub mod error;
pub mod explain;
pub mod fixtures;
pub mod geometry;
pub mod lp;
pub mod marching;
pub mod model;
pub mod oracle;
pub mod render;

pub use error::{Error, Result};
pub use explain::{explain_why, explain_why_not, WhyExplanation, WhyNotExplanation, WhyNotOutcome};
pub use geometry::{AffineMap, LinearConstraint, Polytope, Provenance, VRepresentation};
pub use marching::{MarchBudget, MarchOutcome};
pub use model::{ActivationSignature, Network, OutputActivation, Prediction};
