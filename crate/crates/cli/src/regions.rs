//! Polygons of the linear regions around a point of a 2-D model.

use polyexplain_core::geometry::{class_dominance_constraints, enumerate_vertices, region_hrep, DEFAULT_VERTEX_DIM_CAP};
use polyexplain_core::marching::neighbors_at_distance;
use polyexplain_core::{ActivationSignature, Error, Network, Result};
use serde::Serialize;

pub const DEFAULT_MAX_REGIONS: usize = 64;
pub const DEFAULT_REGION_BUDGET: u64 = 100_000;

/// The part of a region where one class wins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPiece {
    pub class_index: usize,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPolygon {
    pub signature: ActivationSignature,
    pub distance: usize,
    /// Counterclockwise.
    pub vertices: Vec<[f64; 2]>,
    /// Class at the region's most interior point.
    pub class_index: usize,
    pub pieces: Vec<ClassPiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMap {
    pub regions: Vec<RegionPolygon>,
    pub examined: u64,
    /// Every signature was checked, so `regions` is the whole decomposition.
    pub complete: bool,
}

/// Open regions in Hamming order from the one containing `center`, up to
/// `max_regions` polygons or `budget` examined signatures.
pub fn regions_around(net: &Network, center: &[f64], max_regions: usize, budget: u64) -> Result<RegionMap> {
    if net.input_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: net.input_dim() });
    }
    let origin = net.forward(center)?.signature;
    let n = origin.len();
    let mut regions = Vec::new();
    let mut examined = 0u64;
    let mut complete = true;

    'rings: for d in 0..=n {
        let ring = if d == 0 { vec![origin.clone()] } else { neighbors_at_distance(&origin, d)? };
        for s in ring {
            if regions.len() >= max_regions || examined >= budget {
                complete = false;
                break 'rings;
            }
            examined += 1;
            if let Some(r) = polygon(net, &s, d)? {
                regions.push(r);
            }
        }
    }
    Ok(RegionMap { regions, examined, complete })
}

fn polygon(net: &Network, s: &ActivationSignature, distance: usize) -> Result<Option<RegionPolygon>> {
    let region = region_hrep(net, s)?;
    let open = region.open_feasibility()?;
    let Some(witness) = open.is_open().then(|| open.witness()).flatten() else {
        return Ok(None);
    };
    let class_index = net.forward(witness)?.class_index;
    let vertices = enumerate_vertices(&region, DEFAULT_VERTEX_DIM_CAP)?.polygon_ccw();
    let mut pieces = Vec::new();
    for class in 0..net.num_classes() {
        let piece = region.extended(class_dominance_constraints(net, s, class)?);
        if piece.open_feasibility()?.is_open() {
            pieces.push(ClassPiece { class_index: class, vertices: enumerate_vertices(&piece, DEFAULT_VERTEX_DIM_CAP)?.polygon_ccw() });
        }
    }
    Ok(Some(RegionPolygon { signature: s.clone(), distance, vertices, class_index, pieces }))
}
