//! Feed-forward ReLU networks, their forward pass and activation signatures.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Post-map applied to the final layer. Both variants preserve the argmax of
/// the logits, so decisions are always taken on the pre-activation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Softmax,
}

impl OutputActivation {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "identity" => Ok(Self::Identity),
            "softmax" => Ok(Self::Softmax),
            other => Err(Error::UnsupportedActivation(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Softmax => "softmax",
        }
    }

    pub fn apply(self, logits: &[f64]) -> Vec<f64> {
        match self {
            Self::Identity => logits.to_vec(),
            Self::Softmax => softmax(logits),
        }
    }
}

/// Closed interval `[lo, hi]` bounding one input coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!("non-finite bound [{lo}, {hi}]")));
        }
        if lo >= hi {
            return Err(Error::Domain(format!("lower bound {lo} is not below upper bound {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl Serialize for Bounds {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: DMatrix<f64>,
    bias: DVector<f64>,
}

impl Layer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::Shape(format!("weights have {} rows but bias has {} entries", weights.nrows(), bias.len())));
        }
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Shape("layer with zero width".into()));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite weight or bias".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn input_width(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.nrows()
    }
}

/// A validated feed-forward network: ReLU on every hidden layer, an
/// argmax-preserving activation on the output layer, and a bounded input box.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    output_activation: OutputActivation,
    input_bounds: Vec<Bounds>,
    class_names: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    layers: Vec<LayerFile>,
    output_activation: String,
    input_bounds: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
}

impl Network {
    pub fn new(
        layers: Vec<Layer>,
        output_activation: OutputActivation,
        input_bounds: Vec<Bounds>,
        class_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::Shape(format!("need at least one hidden layer and an output layer, got {} layer(s)", layers.len())));
        }
        let input_dim = layers[0].input_width();
        if input_bounds.len() != input_dim {
            return Err(Error::Shape(format!(
                "input_bounds has {} entries but the first layer takes {} inputs",
                input_bounds.len(),
                input_dim
            )));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].input_width() != pair[0].output_width() {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    k + 1,
                    pair[0].output_width(),
                    k + 2,
                    pair[1].input_width()
                )));
            }
        }
        let num_classes = layers.last().map(Layer::output_width).unwrap_or(0);
        if let Some(names) = &class_names {
            if names.len() != num_classes {
                return Err(Error::Shape(format!("{} class names for {} output classes", names.len(), num_classes)));
            }
        }
        Ok(Self { layers, output_activation, input_bounds, class_names })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut layers = Vec::with_capacity(file.layers.len());
        for (k, layer) in file.layers.into_iter().enumerate() {
            let rows = layer.weights.len();
            let cols = layer.weights.first().map(Vec::len).unwrap_or(0);
            if layer.weights.iter().any(|r| r.len() != cols) {
                return Err(Error::Shape(format!("layer {} has ragged weight rows", k + 1)));
            }
            let weights = DMatrix::from_row_iterator(rows, cols, layer.weights.into_iter().flatten());
            layers.push(Layer::new(weights, DVector::from_vec(layer.bias))?);
        }
        let activation = OutputActivation::parse(&file.output_activation)?;
        let bounds = file.input_bounds.into_iter().map(|(lo, hi)| Bounds::new(lo, hi)).collect::<Result<Vec<_>>>()?;
        Self::new(layers, activation, bounds, file.class_names)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    bias: l.bias.iter().copied().collect(),
                })
                .collect(),
            output_activation: self.output_activation.as_str().to_string(),
            input_bounds: self.input_bounds.iter().map(|b| (b.lo, b.hi)).collect(),
            class_names: self.class_names.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn hidden_layers(&self) -> &[Layer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &Layer {
        self.layers.last().expect("validated network has layers")
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn input_bounds(&self) -> &[Bounds] {
        &self.input_bounds
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn class_name(&self, class: usize) -> Option<&str> {
        self.class_names.as_ref().and_then(|n| n.get(class)).map(String::as_str)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn num_classes(&self) -> usize {
        self.output_layer().output_width()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.hidden_layers().iter().map(Layer::output_width).collect()
    }

    /// All widths, input first and classes last.
    pub fn layer_widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(Layer::output_width)).collect()
    }

    pub fn total_hidden_neurons(&self) -> usize {
        self.hidden_widths().iter().sum()
    }

    pub fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.num_classes() {
            return Err(Error::InvalidClass { class, num_classes: self.num_classes() });
        }
        Ok(())
    }

    pub fn inside_bounds(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.input_bounds).all(|(v, b)| b.contains(*v))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let mut act = DVector::from_column_slice(x);
        let mut bits = Vec::with_capacity(self.total_hidden_neurons());
        let mut boundary = false;
        for layer in self.hidden_layers() {
            let mut pre = &layer.weights * &act + &layer.bias;
            for v in pre.iter_mut() {
                boundary |= *v == 0.0;
                let on = *v > 0.0;
                bits.push(on);
                if !on {
                    *v = 0.0;
                }
            }
            act = pre;
        }
        let out = self.output_layer();
        let logits: Vec<f64> = (&out.weights * &act + &out.bias).iter().copied().collect();
        let class_index = argmax_class(&logits)?;
        Ok(Prediction {
            class_index,
            logits,
            signature: ActivationSignature { widths: self.hidden_widths(), bits },
            boundary,
            inside_bounds: self.inside_bounds(x),
        })
    }

    /// The canonical two-input toy network: identity hidden and output
    /// weights, zero biases, box `[-2, 2]^2`. Its four regions are the
    /// coordinate quadrants.
    pub fn toy_a() -> Self {
        let eye = DMatrix::<f64>::identity(2, 2);
        let zero = DVector::<f64>::zeros(2);
        let layers = vec![Layer::new(eye.clone(), zero.clone()).expect("toy layer"), Layer::new(eye, zero).expect("toy layer")];
        let bounds = vec![Bounds { lo: -2.0, hi: 2.0 }; 2];
        Self::new(layers, OutputActivation::Identity, bounds, None).expect("toy network")
    }

    /// Deterministic random network. `widths` lists the input dimension, the
    /// hidden widths and the number of classes, e.g. `[2, 8, 2]`. Weights are
    /// uniform in `[-1, 1)`, biases in `[-0.5, 0.5)`, inputs bounded by
    /// `[-2, 2]`.
    pub fn random(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::Shape(format!("need input, at least one hidden and an output width, got {widths:?}")));
        }
        if widths.contains(&0) {
            return Err(Error::Shape("zero layer width".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = widths
            .windows(2)
            .map(|w| {
                let weights = DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-1.0..1.0));
                let bias = DVector::from_fn(w[1], |_, _| rng.random_range(-0.5..0.5));
                Layer::new(weights, bias)
            })
            .collect::<Result<Vec<_>>>()?;
        let bounds = vec![Bounds { lo: -2.0, hi: 2.0 }; widths[0]];
        Self::new(layers, OutputActivation::Identity, bounds, None)
    }
}

/// Result of one forward pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// Final-layer values before the output activation.
    pub logits: Vec<f64>,
    pub class_index: usize,
    pub signature: ActivationSignature,
    /// Some hidden pre-activation was exactly zero.
    pub boundary: bool,
    pub inside_bounds: bool,
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_class(logits: &[f64]) -> Result<usize> {
    let (first, rest) = logits.split_first().ok_or(Error::EmptyLogits)?;
    let mut best = (0, *first);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.1 {
            best = (i + 1, v);
        }
    }
    Ok(best.0)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Stacked per-layer ReLU on/off pattern identifying one linear region.
///
/// The flat view concatenates layers in order, neurons in index order within
/// each layer. Ordering compares the flat bits lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationSignature {
    widths: Vec<usize>,
    bits: Vec<bool>,
}

impl ActivationSignature {
    pub fn new(widths: Vec<usize>, bits: Vec<bool>) -> Result<Self> {
        let total: usize = widths.iter().sum();
        if total != bits.len() {
            return Err(Error::Shape(format!("signature has {} bits but layer widths sum to {}", bits.len(), total)));
        }
        Ok(Self { widths, bits })
    }

    pub fn from_layers(layers: &[Vec<bool>]) -> Self {
        Self { widths: layers.iter().map(Vec::len).collect(), bits: layers.iter().flatten().copied().collect() }
    }

    /// Builds a signature from 0/1 values laid out against `widths`.
    pub fn from_flat(widths: &[usize], bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::Parse("signature bits must be 0 or 1".into()));
        }
        Self::new(widths.to_vec(), bits.iter().map(|b| *b == 1).collect())
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn layer(&self, layer: usize) -> &[bool] {
        let start: usize = self.widths[..layer].iter().sum();
        &self.bits[start..start + self.widths[layer]]
    }

    pub fn layers(&self) -> impl Iterator<Item = &[bool]> + '_ {
        (0..self.widths.len()).map(move |k| self.layer(k))
    }

    /// Maps a flat index to `(layer, neuron)`.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let mut offset = flat;
        for (layer, &w) in self.widths.iter().enumerate() {
            if offset < w {
                return (layer, offset);
            }
            offset -= w;
        }
        panic!("flat index {flat} out of range for {} bits", self.bits.len());
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    /// Flat positions where `self` and `other` differ, ascending.
    pub fn differing_positions(&self, other: &Self) -> Vec<usize> {
        self.bits.iter().zip(&other.bits).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect()
    }

    pub fn flipped(&self, positions: &[usize]) -> Self {
        let mut bits = self.bits.clone();
        for &p in positions {
            bits[p] = !bits[p];
        }
        Self { widths: self.widths.clone(), bits }
    }

    pub fn matches_network(&self, net: &Network) -> Result<()> {
        if self.widths != net.hidden_widths() {
            return Err(Error::Shape(format!(
                "signature layer widths {:?} do not match network hidden widths {:?}",
                self.widths,
                net.hidden_widths()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ActivationSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, layer) in self.layers().enumerate() {
            if k > 0 {
                f.write_str("|")?;
            }
            for &b in layer {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl Serialize for ActivationSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.bits.iter().map(|&b| u8::from(b)))
    }
}
