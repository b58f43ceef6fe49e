//! "Why" and "why not" explanations.
//!
//! A why-explanation is the irredundant H-representation of the set of
//! inputs that share both the query's linear region and its class. A
//! why-not explanation either shows that the alternative class also wins
//! somewhere in the same region (and names the logit comparison that decided
//! it), or finds the nearest region in Hamming distance where it wins and
//! reports the neuron constraints that differ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    self, enumerate_vertices, remove_redundant, LinearConstraint, Polytope, Provenance, VRepresentation, DEFAULT_VERTEX_DIM_CAP,
};
use crate::lp::MarginOutcome;
use crate::marching::{march_to_counterfactual, MarchBudget, MarchOutcome};
use crate::model::{ActivationSignature, Network};

#[derive(Debug, Clone, Copy)]
pub struct WhyOptions {
    pub vrep: bool,
    pub vertex_dim_cap: usize,
}

impl Default for WhyOptions {
    fn default() -> Self {
        Self { vrep: false, vertex_dim_cap: DEFAULT_VERTEX_DIM_CAP }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhyNotOptions {
    pub budget: MarchBudget,
    pub vrep: bool,
    pub vertex_dim_cap: Option<usize>,
}

/// V-representations of a region and of a subset of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVrep {
    pub region: VRepresentation,
    pub output: VRepresentation,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhyExplanation {
    pub input: Vec<f64>,
    pub class_index: usize,
    pub class_name: Option<String>,
    pub logits: Vec<f64>,
    pub signature: ActivationSignature,
    /// Some hidden pre-activation at the input is exactly zero.
    pub boundary: bool,
    pub inside_bounds: bool,
    /// Rows of the output polytope before redundancy removal, box included.
    pub constraint_count: usize,
    /// The irredundant rows, box faces omitted.
    pub minimal_constraints: Vec<LinearConstraint>,
    pub removed_count: usize,
    pub lp_calls: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vrep: Option<RegionVrep>,
    /// Region with the class-dominance rows, before reduction.
    #[serde(skip)]
    pub output_polytope: Polytope,
    /// Reduced polytope, retained box rows included.
    #[serde(skip)]
    pub reduced_polytope: Polytope,
}

/// Explains the class chosen at `x`.
pub fn explain_why(net: &Network, x: &[f64], want_vrep: bool) -> Result<WhyExplanation> {
    explain_why_with(net, x, &WhyOptions { vrep: want_vrep, ..WhyOptions::default() })
}

pub fn explain_why_with(net: &Network, x: &[f64], opts: &WhyOptions) -> Result<WhyExplanation> {
    let pred = net.forward(x)?;
    let geo = geometry::region_geometry(net, &pred.signature, pred.class_index)?;
    let reduction = remove_redundant(&geo.output)?;
    let vrep = if opts.vrep {
        Some(RegionVrep {
            region: enumerate_vertices(&geo.region, opts.vertex_dim_cap)?,
            output: enumerate_vertices(&reduction.polytope, opts.vertex_dim_cap)?,
        })
    } else {
        None
    };
    Ok(WhyExplanation {
        input: x.to_vec(),
        class_index: pred.class_index,
        class_name: net.class_name(pred.class_index).map(str::to_string),
        logits: pred.logits,
        signature: pred.signature,
        boundary: pred.boundary,
        inside_bounds: pred.inside_bounds,
        constraint_count: geo.output.len(),
        minimal_constraints: reduction.polytope.non_box_constraints().cloned().collect(),
        removed_count: reduction.removed.len(),
        lp_calls: reduction.lp_calls,
        vrep,
        output_polytope: geo.output,
        reduced_polytope: reduction.polytope,
    })
}

/// One flipped neuron: its row in the query's region and in the target region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintPair {
    /// Flat neuron index.
    pub position: usize,
    pub origin_side: LinearConstraint,
    pub target_side: LinearConstraint,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WhyNotOutcome {
    /// The counterfactual class wins somewhere inside the query's own region;
    /// the logit comparison `delta_constraint` is what rules it out at `x`.
    SameRegion {
        delta_constraint: LinearConstraint,
        /// A point of the region where the counterfactual class wins.
        witness: Vec<f64>,
    },
    DifferentRegion {
        distance: usize,
        differing_constraints: Vec<ConstraintPair>,
        witness: Vec<f64>,
        target_signature: ActivationSignature,
        examined: u64,
    },
    ClassUnreachable {
        examined: u64,
    },
}

/// V-representations for the query's region and the region where the
/// counterfactual class wins (the same region for `SameRegion`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhyNotVrep {
    pub origin: VRepresentation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<VRepresentation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhyNotExplanation {
    pub input: Vec<f64>,
    pub class_index: usize,
    pub class_name: Option<String>,
    pub counterfactual_class: usize,
    pub counterfactual_name: Option<String>,
    pub signature: ActivationSignature,
    pub outcome: WhyNotOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vrep: Option<WhyNotVrep>,
}

impl WhyNotExplanation {
    pub fn is_unreachable(&self) -> bool {
        matches!(self.outcome, WhyNotOutcome::ClassUnreachable { .. })
    }
}

/// Explains why `x` is not classified `counterfactual`.
pub fn explain_why_not(net: &Network, x: &[f64], counterfactual: usize, opts: &WhyNotOptions) -> Result<WhyNotExplanation> {
    let pred = net.forward(x)?;
    net.check_class(counterfactual)?;
    if counterfactual == pred.class_index {
        return Err(Error::FactualClass(counterfactual));
    }
    let cap = opts.vertex_dim_cap.unwrap_or(DEFAULT_VERTEX_DIM_CAP);
    let geo = geometry::region_geometry(net, &pred.signature, counterfactual)?;

    let (outcome, target_region) = match geo.output.open_feasibility()? {
        MarginOutcome::Feasible { margin, witness } if margin > crate::lp::STRICT_MARGIN => {
            // Dominance row "class beats counterfactual" from the same logits map.
            let (gc, vc) = geo.logits_map.row(pred.class_index);
            let (gk, vk) = geo.logits_map.row(counterfactual);
            let a = gk.iter().zip(&gc).map(|(k, c)| k - c).collect();
            let delta = LinearConstraint::new(a, vc - vk, true, Provenance::OutputPair { winner: pred.class_index, loser: counterfactual });
            (WhyNotOutcome::SameRegion { delta_constraint: delta, witness }, Some(geo.region.clone()))
        }
        _ => match march_to_counterfactual(net, &pred.signature, counterfactual, &opts.budget)? {
            MarchOutcome::Found(found) => {
                let differing_constraints = pred
                    .signature
                    .differing_positions(&found.signature)
                    .into_iter()
                    .map(|pos| ConstraintPair {
                        position: pos,
                        origin_side: geo.region.constraints()[pos].clone(),
                        target_side: found.region.constraints()[pos].clone(),
                    })
                    .collect();
                let outcome = WhyNotOutcome::DifferentRegion {
                    distance: found.distance,
                    differing_constraints,
                    witness: found.witness,
                    target_signature: found.signature,
                    examined: found.examined,
                };
                (outcome, Some(found.region))
            }
            MarchOutcome::Exhausted { examined } => (WhyNotOutcome::ClassUnreachable { examined }, None),
        },
    };

    let vrep = if opts.vrep {
        Some(WhyNotVrep {
            origin: enumerate_vertices(&geo.region, cap)?,
            target: target_region.as_ref().map(|r| enumerate_vertices(r, cap)).transpose()?,
        })
    } else {
        None
    };

    Ok(WhyNotExplanation {
        input: x.to_vec(),
        class_index: pred.class_index,
        class_name: net.class_name(pred.class_index).map(str::to_string),
        counterfactual_class: counterfactual,
        counterfactual_name: net.class_name(counterfactual).map(str::to_string),
        signature: pred.signature,
        outcome,
        vrep,
    })
}
