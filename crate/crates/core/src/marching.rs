//! Outward search over activation signatures in Hamming-distance order.
//!
//! Flipping a bit in an early layer changes the hyperplanes of every later
//! layer, so each candidate region is rebuilt from its own effective maps
//! rather than reusing the origin's rows.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, Polytope};
use crate::lp::{MarginOutcome, STRICT_MARGIN};
use crate::model::{ActivationSignature, Network};

pub const DEFAULT_MAX_SIGNATURES: u64 = 1_000_000;

/// Limits on how far a march may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarchBudget {
    /// Candidate signatures examined before giving up.
    pub max_signatures: u64,
    /// Largest Hamming distance scanned; `None` means every bit.
    pub max_distance: Option<usize>,
    /// Check each ring's candidates on the rayon pool. The answer is the
    /// same as the sequential scan.
    pub parallel: bool,
}

impl Default for MarchBudget {
    fn default() -> Self {
        Self { max_signatures: DEFAULT_MAX_SIGNATURES, max_distance: None, parallel: false }
    }
}

/// A region where the counterfactual class wins on an open set.
#[derive(Debug, Clone)]
pub struct CounterfactualRegion {
    pub signature: ActivationSignature,
    /// The candidate region's H-representation (without dominance rows).
    pub region: Polytope,
    /// Interior point of the region where the class wins.
    pub witness: Vec<f64>,
    pub distance: usize,
    /// Candidates examined, including this one.
    pub examined: u64,
}

#[derive(Debug, Clone)]
pub enum MarchOutcome {
    Found(CounterfactualRegion),
    Exhausted { examined: u64 },
}

/// All signatures exactly `d` flips from `s`, in lexicographic order of the
/// flipped index sets.
pub fn neighbors_at_distance(s: &ActivationSignature, d: usize) -> Result<Vec<ActivationSignature>> {
    if d == 0 || d > s.len() {
        return Err(Error::DistanceOutOfRange { distance: d, max: s.len() });
    }
    Ok((0..s.len()).combinations(d).map(|flips| s.flipped(&flips)).collect())
}

/// Checks whether `class` wins on an open subset of region `s`. Returns the
/// region and a witness when it does.
pub fn counterfactual_in_region(net: &Network, s: &ActivationSignature, class: usize) -> Result<Option<(Polytope, Vec<f64>)>> {
    let geo = geometry::region_geometry(net, s, class)?;
    let open = geo.output.open_feasibility()?;
    match open {
        MarginOutcome::Feasible { margin, witness } if margin > STRICT_MARGIN => Ok(Some((geo.region, witness))),
        _ => Ok(None),
    }
}

/// Scans rings `d = 1, 2, …` around `origin` and returns the first
/// signature (lexicographically first flip set at the smallest `d`) whose
/// region contains an open set classified `class`.
///
/// The origin itself is not examined; callers check it first.
pub fn march_to_counterfactual(net: &Network, origin: &ActivationSignature, class: usize, budget: &MarchBudget) -> Result<MarchOutcome> {
    net.check_class(class)?;
    origin.matches_network(net)?;
    let n = origin.len();
    let max_distance = budget.max_distance.unwrap_or(n).min(n);
    let mut examined: u64 = 0;

    for d in 1..=max_distance {
        let remaining = budget.max_signatures.saturating_sub(examined);
        if remaining == 0 {
            break;
        }
        let mut ring = neighbors_at_distance(origin, d)?;
        let truncated = (ring.len() as u64) > remaining;
        ring.truncate(remaining.min(ring.len() as u64) as usize);

        let check = |s: &ActivationSignature| counterfactual_in_region(net, s, class);
        let hit = if budget.parallel {
            let results: Vec<_> = ring.par_iter().map(check).collect();
            first_hit(results)?
        } else {
            let mut found = None;
            for (i, s) in ring.iter().enumerate() {
                if let Some(r) = check(s)? {
                    found = Some((i, r));
                    break;
                }
            }
            found
        };

        match hit {
            Some((i, (region, witness))) => {
                return Ok(MarchOutcome::Found(CounterfactualRegion {
                    signature: ring.swap_remove(i),
                    region,
                    witness,
                    distance: d,
                    examined: examined + i as u64 + 1,
                }));
            }
            None => examined += ring.len() as u64,
        }
        if truncated {
            break;
        }
    }
    Ok(MarchOutcome::Exhausted { examined })
}

/// Lowest-index hit in candidate order, regardless of completion order.
fn first_hit<T>(results: Vec<Result<Option<T>>>) -> Result<Option<(usize, T)>> {
    for (i, r) in results.into_iter().enumerate() {
        if let Some(v) = r? {
            return Ok(Some((i, v)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(bits: &[u8]) -> ActivationSignature {
        ActivationSignature::from_flat(&[bits.len()], bits).unwrap()
    }

    #[test]
    fn rings() {
        assert_eq!(neighbors_at_distance(&sig(&[1, 0]), 1).unwrap(), vec![sig(&[0, 0]), sig(&[1, 1])]);
        assert_eq!(neighbors_at_distance(&sig(&[1, 0]), 2).unwrap(), vec![sig(&[0, 1])]);
        let ten = sig(&[0; 10]);
        let ring = neighbors_at_distance(&ten, 3).unwrap();
        assert_eq!(ring.len(), 120);
        assert_eq!(ring.iter().collect::<std::collections::HashSet<_>>().len(), 120);
        assert!(neighbors_at_distance(&ten, 0).is_err());
        assert!(neighbors_at_distance(&ten, 11).is_err());
    }

    #[test]
    fn toy_march() {
        let net = Network::toy_a();
        let out = march_to_counterfactual(&net, &sig(&[1, 0]), 1, &MarchBudget::default()).unwrap();
        let MarchOutcome::Found(found) = out else { panic!("expected a region") };
        assert_eq!(found.signature, sig(&[1, 1]));
        assert_eq!(found.distance, 1);
        assert_eq!(found.examined, 2);
        let w = &found.witness;
        assert!(w[1] > w[0] && w[0] > 0.0);
        let p = net.forward(w).unwrap();
        assert_eq!((p.class_index, p.signature), (1, found.signature));
    }

    #[test]
    fn budget_exhaustion() {
        let net = Network::toy_a();
        let budget = MarchBudget { max_signatures: 1, ..MarchBudget::default() };
        let out = march_to_counterfactual(&net, &sig(&[1, 0]), 1, &budget).unwrap();
        assert!(matches!(out, MarchOutcome::Exhausted { examined: 1 }));
        assert!(matches!(march_to_counterfactual(&net, &sig(&[1, 0]), 5, &MarchBudget::default()), Err(Error::InvalidClass { .. })));
    }

    #[test]
    fn parallel_scan_agrees() {
        let net = Network::random(&[2, 5, 5, 3], 17).unwrap();
        let origin = net.forward(&[0.2, 0.7]).unwrap();
        for class in 0..3 {
            let seq = march_to_counterfactual(&net, &origin.signature, class, &MarchBudget::default()).unwrap();
            let par =
                march_to_counterfactual(&net, &origin.signature, class, &MarchBudget { parallel: true, ..Default::default() }).unwrap();
            match (seq, par) {
                (MarchOutcome::Found(a), MarchOutcome::Found(b)) => {
                    assert_eq!(a.signature, b.signature);
                    assert_eq!(a.examined, b.examined);
                    assert_eq!(a.witness, b.witness);
                }
                (MarchOutcome::Exhausted { examined: a }, MarchOutcome::Exhausted { examined: b }) => assert_eq!(a, b),
                other => panic!("mismatch {other:?}"),
            }
        }
    }
}
