//! Region polytopes in H- and V-representation.
//!
//! Under a fixed activation signature every pre-activation is an affine
//! function of the input, so the region, its class-dominance subset and the
//! logits all come from the masked layer composition built by
//! [`effective_preactivation_maps`].

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome, LpProblem, MarginOutcome, FEASIBILITY_TOL};
use crate::model::{ActivationSignature, Bounds, Network};

/// A removed constraint's certifying LP value must not exceed `b + REDUNDANCY_TOL`.
pub const REDUNDANCY_TOL: f64 = 1e-9;
/// Vertices closer than this (max-norm) are merged.
pub const DEDUPE_TOL: f64 = 1e-7;
pub const DEFAULT_VERTEX_DIM_CAP: usize = 6;

const ZERO_ROW_TOL: f64 = 1e-12;
const VERTEX_CHECK_TOL: f64 = 1e-8;
const SAMPLE_MARGIN: f64 = 1e-9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Clears negative zeros so serialized coefficients read `0.0`.
fn tidy(v: f64) -> f64 {
    v + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Active,
    Inactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Where a half-space came from. Layer, neuron and dimension indices are
/// zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Neuron { layer: usize, index: usize, orientation: Orientation },
    OutputPair { winner: usize, loser: usize },
    DomainBox { dim: usize, side: Side },
}

impl Provenance {
    pub fn is_box(&self) -> bool {
        matches!(self, Self::DomainBox { .. })
    }
}

/// `a·x <= b`, or `a·x < b` when `strict`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraint {
    pub a: Vec<f64>,
    pub b: f64,
    pub strict: bool,
    pub provenance: Provenance,
}

impl LinearConstraint {
    pub fn new(a: Vec<f64>, b: f64, strict: bool, provenance: Provenance) -> Self {
        Self { a: a.into_iter().map(tidy).collect(), b: tidy(b), strict, provenance }
    }

    /// `b - a·x`; positive strictly inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - dot(&self.a, x)
    }

    pub fn is_zero_row(&self) -> bool {
        self.a.iter().all(|v| v.abs() <= ZERO_ROW_TOL)
    }

    /// Satisfied in the constraint's own sense: strictly for strict rows.
    pub fn holds_at(&self, x: &[f64]) -> bool {
        let s = self.slack(x);
        if self.strict {
            s > 0.0
        } else {
            s >= 0.0
        }
    }

    fn normalized(&self) -> Option<(Vec<f64>, f64)> {
        if self.is_zero_row() {
            return None;
        }
        let n = norm(&self.a);
        Some((self.a.iter().map(|v| v / n).collect(), self.b / n))
    }

    fn from_neuron(row: &[f64], offset: f64, layer: usize, index: usize, active: bool) -> Self {
        if active {
            // row·x + offset > 0
            let a = row.iter().map(|v| -v).collect();
            Self::new(a, offset, true, Provenance::Neuron { layer, index, orientation: Orientation::Active })
        } else {
            Self::new(row.to_vec(), -offset, false, Provenance::Neuron { layer, index, orientation: Orientation::Inactive })
        }
    }
}

/// The `2·dim` faces of a box: lower then upper face per dimension.
pub fn box_constraints(domain: &[Bounds]) -> Vec<LinearConstraint> {
    let dim = domain.len();
    let mut out = Vec::with_capacity(2 * dim);
    for (j, b) in domain.iter().enumerate() {
        let mut a = vec![0.0; dim];
        a[j] = -1.0;
        out.push(LinearConstraint::new(a.clone(), -b.lo, false, Provenance::DomainBox { dim: j, side: Side::Lower }));
        a[j] = 1.0;
        out.push(LinearConstraint::new(a, b.hi, false, Provenance::DomainBox { dim: j, side: Side::Upper }));
    }
    out
}

/// An intersection of half-spaces, always taken inside its domain box.
///
/// Constraint order: neuron rows (layer-major), output pairs by loser
/// class, then box rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<LinearConstraint>,
    domain: Vec<Bounds>,
    signature: Option<ActivationSignature>,
}

impl Polytope {
    pub fn new(domain: Vec<Bounds>, constraints: Vec<LinearConstraint>) -> Result<Self> {
        let dim = domain.len();
        if let Some(c) = constraints.iter().find(|c| c.a.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.a.len() });
        }
        Ok(Self { dim, constraints, domain, signature: None })
    }

    /// Like [`Polytope::new`] with the box faces appended as explicit rows.
    pub fn with_box_rows(domain: Vec<Bounds>, mut constraints: Vec<LinearConstraint>) -> Result<Self> {
        constraints.extend(box_constraints(&domain));
        Self::new(domain, constraints)
    }

    pub fn with_signature(mut self, signature: ActivationSignature) -> Self {
        self.signature = Some(signature);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn domain(&self) -> &[Bounds] {
        &self.domain
    }

    pub fn signature(&self) -> Option<&ActivationSignature> {
        self.signature.as_ref()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn non_box_constraints(&self) -> impl Iterator<Item = &LinearConstraint> + '_ {
        self.constraints.iter().filter(|c| !c.provenance.is_box())
    }

    /// Inserts `extra` ahead of the box rows.
    pub fn extended(&self, extra: impl IntoIterator<Item = LinearConstraint>) -> Self {
        let split = self.constraints.iter().position(|c| c.provenance.is_box()).unwrap_or(self.constraints.len());
        let mut constraints = self.constraints[..split].to_vec();
        constraints.extend(extra);
        constraints.extend_from_slice(&self.constraints[split..]);
        Self { constraints, ..self.clone() }
    }

    /// Closed membership with tolerance `tol` (box included).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.domain.iter().zip(x).all(|(b, v)| b.lo - tol <= *v && *v <= b.hi + tol) && self.constraints.iter().all(|c| c.slack(x) >= -tol)
    }

    /// Largest uniform slack over unit-normalised rows and box faces, i.e.
    /// the radius of the biggest ball that fits. Zero rows are settled
    /// arithmetically and never reach the LP.
    pub fn open_feasibility(&self) -> Result<MarginOutcome> {
        let mut rows = Vec::with_capacity(self.constraints.len());
        let mut rhs = Vec::with_capacity(self.constraints.len());
        let mut zero_cap = f64::INFINITY;
        for c in self.constraints.iter().filter(|c| !c.provenance.is_box()) {
            match c.normalized() {
                Some((a, b)) => {
                    rows.push(a);
                    rhs.push(b);
                }
                None => {
                    if c.b < -FEASIBILITY_TOL {
                        return Ok(MarginOutcome::Infeasible);
                    }
                    zero_cap = zero_cap.min(c.b.max(0.0));
                }
            }
        }
        Ok(match lp::interior_margin(&rows, &rhs, &self.domain)? {
            MarginOutcome::Feasible { margin, witness } => MarginOutcome::Feasible { margin: margin.min(zero_cap), witness },
            MarginOutcome::Infeasible => MarginOutcome::Infeasible,
        })
    }
}

/// `x ↦ matrix·x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x) + &self.offset).iter().copied().collect()
    }

    pub fn row(&self, i: usize) -> (Vec<f64>, f64) {
        (self.matrix.row(i).iter().copied().collect(), self.offset[i])
    }

    pub fn outputs(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Per-layer pre-activations as affine functions of the input under `s`,
/// output layer last (the logits map).
pub fn effective_preactivation_maps(net: &Network, s: &ActivationSignature) -> Result<Vec<AffineMap>> {
    s.matches_network(net)?;
    let layers = net.layers();
    let mut maps: Vec<AffineMap> = Vec::with_capacity(layers.len());
    maps.push(AffineMap { matrix: layers[0].weights().clone(), offset: layers[0].bias().clone() });
    for (k, layer) in layers.iter().enumerate().skip(1) {
        let prev = &maps[k - 1];
        let mask = s.layer(k - 1);
        let mut masked_m = prev.matrix.clone();
        let mut masked_v = prev.offset.clone();
        for (i, &on) in mask.iter().enumerate() {
            if !on {
                masked_m.row_mut(i).fill(0.0);
                masked_v[i] = 0.0;
            }
        }
        maps.push(AffineMap { matrix: layer.weights() * masked_m, offset: layer.weights() * masked_v + layer.bias() });
    }
    Ok(maps)
}

fn neuron_constraints(maps: &[AffineMap], s: &ActivationSignature) -> Vec<LinearConstraint> {
    let mut out = Vec::with_capacity(s.len());
    for (layer, bits) in s.layers().enumerate() {
        let map = &maps[layer];
        for (index, &on) in bits.iter().enumerate() {
            let (row, offset) = map.row(index);
            out.push(LinearConstraint::from_neuron(&row, offset, layer, index, on));
        }
    }
    out
}

fn dominance_from_map(output: &AffineMap, class: usize) -> Vec<LinearConstraint> {
    let (gc, vc) = output.row(class);
    (0..output.outputs())
        .filter(|&j| j != class)
        .map(|j| {
            let (gj, vj) = output.row(j);
            let a = gj.iter().zip(&gc).map(|(x, y)| x - y).collect();
            LinearConstraint::new(a, vc - vj, true, Provenance::OutputPair { winner: class, loser: j })
        })
        .collect()
}

/// H-representation of the linear region with signature `s`: one row per
/// hidden neuron, then the box faces.
pub fn region_hrep(net: &Network, s: &ActivationSignature) -> Result<Polytope> {
    let maps = effective_preactivation_maps(net, s)?;
    region_from_maps(net, s, &maps)
}

fn region_from_maps(net: &Network, s: &ActivationSignature, maps: &[AffineMap]) -> Result<Polytope> {
    Ok(Polytope::with_box_rows(net.input_bounds().to_vec(), neuron_constraints(maps, s))?.with_signature(s.clone()))
}

/// Strict rows `logit_c > logit_j` for every `j != class`, in the region `s`.
pub fn class_dominance_constraints(net: &Network, s: &ActivationSignature, class: usize) -> Result<Vec<LinearConstraint>> {
    net.check_class(class)?;
    let maps = effective_preactivation_maps(net, s)?;
    Ok(dominance_from_map(maps.last().expect("output map"), class))
}

/// Region `s` intersected with the dominance rows of `class`.
pub fn output_polytope(net: &Network, s: &ActivationSignature, class: usize) -> Result<Polytope> {
    net.check_class(class)?;
    let maps = effective_preactivation_maps(net, s)?;
    let region = region_from_maps(net, s, &maps)?;
    Ok(region.extended(dominance_from_map(maps.last().expect("output map"), class)))
}

/// Region polytope, its class subset and the logits map, built from one
/// set of effective maps.
#[derive(Debug, Clone)]
pub struct RegionGeometry {
    pub region: Polytope,
    pub output: Polytope,
    pub logits_map: AffineMap,
}

pub fn region_geometry(net: &Network, s: &ActivationSignature, class: usize) -> Result<RegionGeometry> {
    net.check_class(class)?;
    let mut maps = effective_preactivation_maps(net, s)?;
    let region = region_from_maps(net, s, &maps)?;
    let logits_map = maps.pop().expect("output map");
    let output = region.extended(dominance_from_map(&logits_map, class));
    Ok(RegionGeometry { region, output, logits_map })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemovedConstraint {
    pub constraint: LinearConstraint,
    /// Maximum of `a·x` over the constraints retained at the time.
    pub certificate: f64,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub polytope: Polytope,
    pub removed: Vec<RemovedConstraint>,
    pub lp_calls: usize,
    /// The retained system became infeasible mid-scan; `polytope` is the
    /// input unchanged.
    pub infeasible: bool,
}

/// Drops every constraint implied by the others, scanning in order.
///
/// For each row one LP maximises `a·x` over the rows still retained (minus
/// the row itself) inside the box; the row goes when the optimum is at most
/// `b + REDUNDANCY_TOL`. Box rows are examined with their own face pushed
/// out by one box width, so a kept box row marks a face that really bounds
/// the region.
pub fn remove_redundant(p: &Polytope) -> Result<Reduction> {
    let m = p.constraints.len();
    let mut retained = vec![true; m];
    let mut removed = Vec::new();
    let mut lp_calls = 0;

    for i in 0..m {
        let target = &p.constraints[i];
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut zero_row_violated = false;
        for (j, c) in p.constraints.iter().enumerate() {
            if j == i || !retained[j] || c.provenance.is_box() {
                continue;
            }
            if c.is_zero_row() {
                zero_row_violated |= c.b < -FEASIBILITY_TOL;
                continue;
            }
            rows.push(c.a.clone());
            rhs.push(c.b);
        }
        let mut bounds = p.domain.clone();
        if let Provenance::DomainBox { dim, side } = target.provenance {
            let w = bounds[dim].width();
            match side {
                Side::Lower => bounds[dim].lo -= w,
                Side::Upper => bounds[dim].hi += w,
            }
        }
        let problem = LpProblem { objective: target.a.clone(), rows, rhs, bounds };
        lp_calls += 1;
        let outcome = lp::solve(&problem)?;
        if zero_row_violated {
            return Ok(Reduction { polytope: p.clone(), removed: Vec::new(), lp_calls, infeasible: true });
        }
        match outcome {
            LpOutcome::Optimal { value, .. } => {
                if value <= target.b + REDUNDANCY_TOL {
                    retained[i] = false;
                    removed.push(RemovedConstraint { constraint: target.clone(), certificate: value });
                }
            }
            LpOutcome::Infeasible => {
                return Ok(Reduction { polytope: p.clone(), removed: Vec::new(), lp_calls, infeasible: true });
            }
            LpOutcome::Unbounded => return Err(Error::Lp("redundancy program reported unbounded".into())),
        }
    }

    let constraints = p.constraints.iter().zip(&retained).filter(|(_, k)| **k).map(|(c, _)| c.clone()).collect();
    Ok(Reduction { polytope: Polytope { constraints, ..p.clone() }, removed, lp_calls, infeasible: false })
}

/// Extreme points of a bounded polytope plus per-dimension ranges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VRepresentation {
    pub vertices: Vec<Vec<f64>>,
    /// `[min, max]` of each coordinate over the vertices.
    pub ranges: Vec<[f64; 2]>,
}

impl VRepresentation {
    pub fn new(mut vertices: Vec<Vec<f64>>) -> Self {
        vertices.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        let dim = vertices.first().map(Vec::len).unwrap_or(0);
        let ranges = (0..dim)
            .map(|j| vertices.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v[j]), hi.max(v[j])]))
            .collect();
        Self { vertices, ranges }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices of a 2-D polytope in counterclockwise order, starting from
    /// the lowest-angle vertex around the centroid.
    pub fn polygon_ccw(&self) -> Vec<[f64; 2]> {
        let pts: Vec<[f64; 2]> = self.vertices.iter().filter(|v| v.len() == 2).map(|v| [v[0], v[1]]).collect();
        if pts.is_empty() {
            return pts;
        }
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        let mut keyed: Vec<(f64, [f64; 2])> = pts.into_iter().map(|p| ((p[1] - cy).atan2(p[0] - cx), p)).collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        keyed.into_iter().map(|(_, p)| p).collect()
    }
}

/// Vertex enumeration by brute force over `dim`-subsets of the constraint
/// hyperplanes (box faces included). Exponential in `dim`, hence the cap.
pub fn enumerate_vertices(p: &Polytope, dim_cap: usize) -> Result<VRepresentation> {
    let dim = p.dim;
    if dim > dim_cap {
        return Err(Error::VertexCap { dim, cap: dim_cap });
    }
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in p.non_box_constraints() {
        match c.normalized() {
            Some(r) => rows.push(r),
            None if c.b < -FEASIBILITY_TOL => return Ok(VRepresentation::new(Vec::new())),
            None => {}
        }
    }
    rows.extend(box_constraints(&p.domain).into_iter().map(|c| (c.a, c.b)));

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for subset in (0..rows.len()).combinations(dim) {
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[subset[i]].0[j]);
        let v = DVector::from_fn(dim, |i, _| rows[subset[i]].1);
        let lu = m.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = lu.solve(&v) else { continue };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if rows.iter().any(|(a, b)| dot(a, &x) > b + VERTEX_CHECK_TOL) {
            continue;
        }
        if vertices.iter().any(|u| u.iter().zip(&x).all(|(a, b)| (a - b).abs() <= DEDUPE_TOL)) {
            continue;
        }
        vertices.push(x.into_iter().map(tidy).collect());
    }
    Ok(VRepresentation::new(vertices))
}

/// Hit-and-run samples from the interior of `p`, starting at `start`.
///
/// Each sample keeps a normalised slack of at least `1e-9` on every row and
/// box face, so forward evaluation cannot land on a region boundary. `start`
/// must already satisfy that, e.g. an open-feasibility witness.
pub fn sample_interior<R: Rng>(p: &Polytope, start: &[f64], count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows: Vec<(Vec<f64>, f64)> = p.constraints.iter().filter_map(LinearConstraint::normalized).collect();
    rows.extend(box_constraints(&p.domain).into_iter().map(|c| (c.a, c.b)));
    let dim = p.dim;
    let mut x = start.to_vec();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 20 {
        attempts += 1;
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let un = norm(&u);
        if un < 1e-6 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|v| v / un).collect();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, b) in &rows {
            let s = b - dot(a, &x) - SAMPLE_MARGIN;
            let d = dot(a, &u);
            if d > 1e-15 {
                hi = hi.min(s / d);
            } else if d < -1e-15 {
                lo = lo.max(s / d);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || hi - lo <= 1e-15 {
            continue;
        }
        let t = rng.random_range(lo..hi);
        let next: Vec<f64> = x.iter().zip(&u).map(|(xi, ui)| xi + t * ui).collect();
        if rows.iter().all(|(a, b)| b - dot(a, &next) >= SAMPLE_MARGIN * 0.5) {
            x = next;
            out.push(x.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActivationSignature, Network};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(bits: &[u8]) -> ActivationSignature {
        ActivationSignature::from_flat(&[bits.len()], bits).unwrap()
    }

    fn boxed(dim: usize, lo: f64, hi: f64) -> Vec<Bounds> {
        vec![Bounds { lo, hi }; dim]
    }

    fn c(a: &[f64], b: f64) -> LinearConstraint {
        LinearConstraint::new(a.to_vec(), b, false, Provenance::OutputPair { winner: 0, loser: 1 })
    }

    #[test]
    fn toy_output_maps() {
        let net = Network::toy_a();
        let maps = effective_preactivation_maps(&net, &sig(&[1, 0])).unwrap();
        assert_eq!(maps.len(), 2);
        assert_eq!(maps[1].matrix, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(maps[1].offset, DVector::zeros(2));
        let maps = effective_preactivation_maps(&net, &sig(&[1, 1])).unwrap();
        assert_eq!(maps[1].matrix, DMatrix::identity(2, 2));
        assert!(effective_preactivation_maps(&net, &sig(&[1, 1, 0])).is_err());
    }

    #[test]
    fn output_map_reproduces_forward() {
        let net = Network::random(&[3, 5, 4, 3], 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = net.forward(&x).unwrap();
            let maps = effective_preactivation_maps(&net, &p.signature).unwrap();
            for (g, w) in maps.last().unwrap().apply(&x).iter().zip(&p.logits) {
                assert!((g - w).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn toy_region_rows() {
        let net = Network::toy_a();
        let p = region_hrep(&net, &sig(&[1, 0])).unwrap();
        assert_eq!(p.len(), 2 + 4);
        let c0 = &p.constraints()[0];
        assert_eq!((c0.a.as_slice(), c0.b, c0.strict), (&[-1.0, 0.0][..], 0.0, true));
        let c1 = &p.constraints()[1];
        assert_eq!((c1.a.as_slice(), c1.b, c1.strict), (&[0.0, 1.0][..], 0.0, false));
        assert!(p.constraints()[2..].iter().all(|c| c.provenance.is_box()));

        let p = region_hrep(&net, &sig(&[0, 0])).unwrap();
        assert_eq!(p.constraints()[0].a, vec![1.0, 0.0]);
        assert_eq!(p.constraints()[1].a, vec![0.0, 1.0]);
        assert!(p.constraints()[..2].iter().all(|c| !c.strict && c.b == 0.0));
    }

    #[test]
    fn toy_dominance_rows() {
        let net = Network::toy_a();
        let d = class_dominance_constraints(&net, &sig(&[1, 0]), 0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].a.as_slice(), d[0].b, d[0].strict), (&[-1.0, 0.0][..], 0.0, true));
        let d = class_dominance_constraints(&net, &sig(&[1, 1]), 1).unwrap();
        assert_eq!((d[0].a.as_slice(), d[0].b), (&[1.0, -1.0][..], 0.0));
        assert!(matches!(class_dominance_constraints(&net, &sig(&[1, 1]), 2), Err(Error::InvalidClass { .. })));
    }

    #[test]
    fn dominance_holds_at_defining_point() {
        let net = Network::random(&[2, 6, 4], 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let p = net.forward(&x).unwrap();
            let d = class_dominance_constraints(&net, &p.signature, p.class_index).unwrap();
            assert_eq!(d.len(), 3);
            assert!(d.iter().all(|c| c.slack(&x) > 0.0));
            let out = output_polytope(&net, &p.signature, p.class_index).unwrap();
            assert_eq!(out.len(), 6 + 3 + 4);
        }
    }

    #[test]
    fn redundancy_examples() {
        let p = Polytope::new(boxed(1, -10.0, 10.0), vec![c(&[1.0], 1.0), c(&[1.0], 2.0)]).unwrap();
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.polytope.constraints().len(), 1);
        assert_eq!(r.polytope.constraints()[0].b, 1.0);
        assert_eq!(r.lp_calls, 2);

        let p = Polytope::new(boxed(2, -10.0, 10.0), vec![c(&[1.0, 0.0], 1.0), c(&[0.0, 1.0], 1.0), c(&[1.0, 1.0], 5.0)]).unwrap();
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.removed.len(), 1);
        assert_eq!(r.removed[0].constraint.b, 5.0);
        assert!(r.removed[0].certificate <= 5.0 + REDUNDANCY_TOL);
    }

    #[test]
    fn redundancy_flags_infeasible_input() {
        let p = Polytope::new(boxed(1, -10.0, 10.0), vec![c(&[1.0], 0.0), c(&[-1.0], -1.0), c(&[1.0], 5.0)]).unwrap();
        let r = remove_redundant(&p).unwrap();
        assert!(r.infeasible);
        assert_eq!(r.polytope, p);
    }

    #[test]
    fn box_rows_go_when_implied() {
        // x1 <= 1 makes the upper box face x1 <= 2 redundant.
        let p = Polytope::with_box_rows(boxed(2, -2.0, 2.0), vec![c(&[1.0, 0.0], 1.0)]).unwrap();
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.lp_calls, 5);
        assert_eq!(r.removed.len(), 1);
        assert_eq!(r.removed[0].constraint.provenance, Provenance::DomainBox { dim: 0, side: Side::Upper });
    }

    #[test]
    fn zero_rows_never_reach_the_solver() {
        let zero = c(&[0.0, 0.0], 1.0);
        let p = Polytope::new(boxed(2, -1.0, 1.0), vec![zero.clone(), c(&[1.0, 0.0], 0.5)]).unwrap();
        let r = remove_redundant(&p).unwrap();
        assert_eq!(r.removed.len(), 1);
        assert!(r.removed[0].constraint.is_zero_row());
        assert!(p.open_feasibility().unwrap().is_open());
        let bad = Polytope::new(boxed(2, -1.0, 1.0), vec![c(&[0.0, 0.0], -1.0)]).unwrap();
        assert_eq!(bad.open_feasibility().unwrap(), MarginOutcome::Infeasible);
    }

    #[test]
    fn unit_box_vertices() {
        let p = Polytope::with_box_rows(boxed(2, 0.0, 1.0), vec![]).unwrap();
        let v = enumerate_vertices(&p, DEFAULT_VERTEX_DIM_CAP).unwrap();
        assert_eq!(v.vertices, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(v.ranges, vec![[0.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(enumerate_vertices(&p, 1), Err(Error::VertexCap { dim: 2, cap: 1 })));
    }

    #[test]
    fn toy_output_vertices() {
        let net = Network::toy_a();
        let p = output_polytope(&net, &sig(&[1, 0]), 0).unwrap();
        let v = enumerate_vertices(&p, DEFAULT_VERTEX_DIM_CAP).unwrap();
        assert_eq!(v.vertices, vec![vec![0.0, -2.0], vec![0.0, 0.0], vec![2.0, -2.0], vec![2.0, 0.0]]);
        let ccw = v.polygon_ccw();
        assert_eq!(ccw.len(), 4);
        let area: f64 = (0..4)
            .map(|i| {
                let (p, q) = (ccw[i], ccw[(i + 1) % 4]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
            / 2.0;
        assert!((area - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_points_share_the_signature() {
        let net = Network::random(&[2, 6, 6, 3], 4).unwrap();
        let x = [0.4, -0.3];
        let s = net.forward(&x).unwrap().signature;
        let region = region_hrep(&net, &s).unwrap();
        let open = region.open_feasibility().unwrap();
        assert!(open.is_open());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts = sample_interior(&region, open.witness().unwrap(), 1000, &mut rng);
        assert_eq!(pts.len(), 1000);
        for pt in &pts {
            assert_eq!(net.forward(pt).unwrap().signature, s);
        }
    }
}
