//! Seeded networks shared by tests, the acceptance suite and the CLI.

use nalgebra::{DMatrix, DVector};

use crate::model::{Bounds, Layer, Network, OutputActivation};

/// `(input_dim, hidden widths, classes)` of the twenty suite networks.
pub const SUITE_SHAPES: [(usize, &[usize], usize); 20] = [
    (2, &[4], 2),
    (2, &[6], 3),
    (2, &[8], 2),
    (2, &[4, 4], 3),
    (2, &[5, 5], 2),
    (2, &[6, 6], 3),
    (2, &[4, 4, 4], 2),
    (2, &[3, 4, 3], 3),
    (3, &[5], 2),
    (3, &[6, 4], 3),
    (3, &[4, 4, 4], 2),
    (3, &[8], 4),
    (3, &[7, 7], 2),
    (3, &[8, 6], 3),
    (4, &[6], 3),
    (4, &[5, 5], 2),
    (4, &[4, 4, 4], 3),
    (4, &[8], 2),
    (4, &[6, 6], 4),
    (4, &[8, 8], 2),
];

/// The suite network at `index`, seeded by its position.
pub fn suite_network(index: usize) -> Network {
    let (input, hidden, classes) = SUITE_SHAPES[index];
    let mut widths = vec![input];
    widths.extend_from_slice(hidden);
    widths.push(classes);
    Network::random(&widths, 1000 + index as u64).expect("suite shapes are valid")
}

pub fn suite() -> Vec<Network> {
    (0..SUITE_SHAPES.len()).map(suite_network).collect()
}

/// A 2-6-6-2 network whose second class can never win: both output rows
/// ignore the hidden layer and class 0 carries the larger bias.
pub fn unreachable_class_network() -> Network {
    let base = Network::random(&[2, 6, 6, 2], 404).expect("valid widths");
    let mut layers: Vec<Layer> = base.hidden_layers().to_vec();
    layers.push(Layer::new(DMatrix::zeros(2, 6), DVector::from_vec(vec![1.0, 0.0])).expect("output layer"));
    Network::new(layers, OutputActivation::Identity, base.input_bounds().to_vec(), None).expect("valid network")
}

/// Three classes whose logits are x1, x2 and -(x1 + x2) over a single
/// linear region of `[-2, 2]^2`.
pub fn shared_region_network() -> Network {
    let l1 = Layer::new(DMatrix::identity(2, 2), DVector::from_vec(vec![3.0, 3.0])).expect("layer");
    let l2 = Layer::new(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, -1.0]), DVector::from_vec(vec![-3.0, -3.0, 6.0]))
        .expect("layer");
    let bounds = vec![Bounds { lo: -2.0, hi: 2.0 }; 2];
    Network::new(vec![l1, l2], OutputActivation::Softmax, bounds, Some(vec!["left".into(), "right".into(), "low".into()]))
        .expect("valid network")
}
