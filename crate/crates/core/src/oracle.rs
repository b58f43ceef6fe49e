//! Brute-force references: every signature, every region. Test and CLI use
//! only; the explanation path never calls into here.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{class_dominance_constraints, region_hrep, Polytope};
use crate::lp::MarginOutcome;
use crate::model::{ActivationSignature, Network};

/// Hard cap on hidden neurons for exhaustive enumeration (2^16 LPs).
pub const MAX_ORACLE_NEURONS: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct DecomposedRegion {
    pub signature: ActivationSignature,
    #[serde(skip)]
    pub polytope: Polytope,
    pub feasible: bool,
    /// Interior point when `feasible`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Every signature, ordered by flat bit value.
    pub regions: Vec<DecomposedRegion>,
    pub examined: u64,
}

impl Decomposition {
    pub fn feasible(&self) -> impl Iterator<Item = &DecomposedRegion> + '_ {
        self.regions.iter().filter(|r| r.feasible)
    }

    pub fn feasible_count(&self) -> usize {
        self.feasible().count()
    }
}

fn check_cap(net: &Network) -> Result<usize> {
    let n = net.total_hidden_neurons();
    if n > MAX_ORACLE_NEURONS {
        return Err(Error::DecompositionCap { neurons: n, cap: MAX_ORACLE_NEURONS });
    }
    Ok(n)
}

fn signature_from_index(widths: &[usize], n: usize, index: u64) -> ActivationSignature {
    let bits = (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect();
    ActivationSignature::new(widths.to_vec(), bits).expect("widths sum to n")
}

/// Open-feasibility of all `2^n` activation patterns inside the box.
pub fn full_decompose(net: &Network) -> Result<Decomposition> {
    let n = check_cap(net)?;
    let widths = net.hidden_widths();
    let total: u64 = 1 << n;
    let regions = (0..total)
        .into_par_iter()
        .map(|index| {
            let signature = signature_from_index(&widths, n, index);
            let polytope = region_hrep(net, &signature)?;
            let (feasible, witness) = match polytope.open_feasibility()? {
                open @ MarginOutcome::Feasible { .. } if open.is_open() => (true, open.witness().map(<[f64]>::to_vec)),
                _ => (false, None),
            };
            Ok(DecomposedRegion { signature, polytope, feasible, witness })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition { regions, examined: total })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleWhyNot {
    Reachable { min_distance: usize, minimizers: BTreeSet<ActivationSignature> },
    Unreachable,
}

/// Minimal Hamming distance from the signature at `x` to any feasible
/// region where `class` wins on an open set, by checking all of them.
pub fn oracle_why_not(net: &Network, x: &[f64], class: usize) -> Result<OracleWhyNot> {
    let decomposition = full_decompose(net)?;
    oracle_why_not_with(net, &decomposition, x, class)
}

/// [`oracle_why_not`] over a precomputed decomposition.
pub fn oracle_why_not_with(net: &Network, decomposition: &Decomposition, x: &[f64], class: usize) -> Result<OracleWhyNot> {
    check_cap(net)?;
    net.check_class(class)?;
    let origin = net.forward(x)?.signature;
    let winners = decomposition
        .regions
        .par_iter()
        .filter(|r| r.feasible)
        .map(|r| {
            let subset = r.polytope.extended(class_dominance_constraints(net, &r.signature, class)?);
            Ok(subset.open_feasibility()?.is_open().then(|| r.signature.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(min_distance) = winners.iter().flatten().map(|s| s.hamming(&origin)).min() else {
        return Ok(OracleWhyNot::Unreachable);
    };
    let minimizers = winners.into_iter().flatten().filter(|s| s.hamming(&origin) == min_distance).collect();
    Ok(OracleWhyNot::Reachable { min_distance, minimizers })
}
