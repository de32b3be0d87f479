//! Feed-forward sigmoid network trained by per-sample SGD on squared error.
//!
//! Coverage goals are one-hot vectors, so inputs are stored and propagated
//! sparsely: only non-zero input entries touch the first weight matrix.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dut::{DutSpec, StimulusVector};
use crate::error::{Error, Result};
use crate::stimulus::Prng;

pub const DEFAULT_LEARNING_RATE: f64 = 0.5;
pub const DEFAULT_EPOCHS: usize = 300;

/// Hidden width used when none is configured: `max(8, ceil((n_in + n_out) / 2))`.
pub fn default_hidden(n_in: usize, n_out: usize) -> usize {
    8.max((n_in + n_out).div_ceil(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub init_seed: u64,
}

impl NetworkConfig {
    pub fn new(layer_sizes: Vec<usize>, init_seed: u64) -> Self {
        NetworkConfig {
            layer_sizes,
            activation: Activation::Sigmoid,
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DEFAULT_EPOCHS,
            init_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive: {:?}",
                self.layer_sizes
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} is not a non-negative real",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// `y += alpha · x`
#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// The first layer stores weights input-major (`inputs × outputs`) so a sparse
/// one-hot input touches one contiguous fan-out slice. Dense layers are
/// row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    input_major: bool,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    /// Contiguous slice of `stride` weights starting at lane `k`.
    fn lane(&self, k: usize) -> &[f64] {
        let n = self.lane_len();
        &self.weights[k * n..(k + 1) * n]
    }

    fn lane_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.lane_len();
        &mut self.weights[k * n..(k + 1) * n]
    }

    fn lane_len(&self) -> usize {
        if self.input_major {
            self.outputs
        } else {
            self.inputs
        }
    }

    /// Index of weight (output `i`, input `j`).
    fn at(&self, i: usize, j: usize) -> usize {
        if self.input_major {
            j * self.outputs + i
        } else {
            i * self.inputs + j
        }
    }

    fn row_major(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.weights.len());
        for i in 0..self.outputs {
            w.extend((0..self.inputs).map(|j| self.weights[self.at(i, j)]));
        }
        w
    }
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Non-zero entries of a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    len: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn from_dense(v: &[f64]) -> Self {
        SparseVec {
            len: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, &x)| (i, x))
                .collect(),
        }
    }

    pub fn one_hot(len: usize, index: usize) -> Self {
        SparseVec {
            len,
            entries: vec![(index, 1.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        for &(i, x) in &self.entries {
            v[i] = x;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub feature: SparseVec,
    pub target: Vec<f64>,
    /// Iteration of the transaction the pair was harvested from.
    pub source_iteration: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    n_in: usize,
    n_out: usize,
    pairs: Vec<TrainingPair>,
}

impl TrainingSet {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        TrainingSet {
            n_in,
            n_out,
            pairs: Vec::new(),
        }
    }

    pub fn push(&mut self, feature: SparseVec, target: Vec<f64>, source_iteration: u64) -> Result<()> {
        if feature.len() != self.n_in {
            return Err(Error::Dimension {
                expected: self.n_in,
                actual: feature.len(),
            });
        }
        if target.len() != self.n_out {
            return Err(Error::Dimension {
                expected: self.n_out,
                actual: target.len(),
            });
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        if !feature.entries.iter().all(|(_, x)| in_unit(x)) || !target.iter().all(in_unit) {
            return Err(Error::Precondition("training values must lie in [0, 1]".into()));
        }
        self.pairs.push(TrainingPair {
            feature,
            target,
            source_iteration,
        });
        Ok(())
    }

    pub fn push_dense(&mut self, feature: &[f64], target: &[f64], source_iteration: u64) -> Result<()> {
        self.push(SparseVec::from_dense(feature), target.to_vec(), source_iteration)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[TrainingPair] {
        &self.pairs
    }

    pub fn feature_len(&self) -> usize {
        self.n_in
    }

    pub fn target_len(&self) -> usize {
        self.n_out
    }
}

/// Per-sample scratch space reused across SGD steps.
#[derive(Debug, Default)]
struct Workspace {
    /// Output activation of every layer.
    acts: Vec<Vec<f64>>,
    /// dL/dz of every layer.
    deltas: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
    config: NetworkConfig,
    /// Continuation of the init-seed stream; drives epoch shuffles.
    rng: Prng,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.config == other.config
    }
}

impl Network {
    /// Glorot-uniform weights, zero biases. Draw order: layers in sequence,
    /// each weight matrix row-major.
    pub fn init(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = Prng::new(config.init_seed);
        let layers = config
            .layer_sizes
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (inputs, outputs) = (w[0], w[1]);
                let r = (6.0 / (inputs + outputs) as f64).sqrt();
                let mut layer = Layer {
                    inputs,
                    outputs,
                    input_major: l == 0,
                    weights: vec![0.0; inputs * outputs],
                    biases: vec![0.0; outputs],
                };
                for i in 0..outputs {
                    for j in 0..inputs {
                        let k = layer.at(i, j);
                        layer.weights[k] = (2.0 * rng.next_f64() - 1.0) * r;
                    }
                }
                layer
            })
            .collect();
        Ok(Network {
            layers,
            config: config.clone(),
            rng,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut NetworkConfig {
        &mut self.config
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Weights of one layer, row-major `outputs × inputs`.
    pub fn weights(&self, layer: usize) -> Vec<f64> {
        self.layers[layer].row_major()
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.layers[layer].biases
    }

    /// Overwrites one layer's parameters (weights row-major); shapes must
    /// match.
    pub fn set_layer(&mut self, layer: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<()> {
        let l = self
            .layers
            .get_mut(layer)
            .ok_or_else(|| Error::Precondition(format!("no layer {layer}")))?;
        if weights.len() != l.weights.len() || biases.len() != l.biases.len() {
            return Err(Error::Dimension {
                expected: l.weights.len() + l.biases.len(),
                actual: weights.len() + biases.len(),
            });
        }
        for (k, w) in weights.into_iter().enumerate() {
            let idx = l.at(k / l.inputs, k % l.inputs);
            l.weights[idx] = w;
        }
        l.biases = biases;
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|x| x.is_finite()))
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_len() {
            return Err(Error::Dimension {
                expected: self.input_len(),
                actual: len,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_sparse(&SparseVec::from_dense(x))
    }

    pub fn forward_sparse(&self, x: &SparseVec) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let mut ws = Workspace::default();
        self.propagate(x, &mut ws);
        Ok(ws.acts.pop().unwrap())
    }

    fn propagate(&self, x: &SparseVec, ws: &mut Workspace) {
        ws.acts.resize_with(self.layers.len(), Vec::new);
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = ws.acts.split_at_mut(l);
            let out = &mut rest[0];
            out.clear();
            out.extend_from_slice(&layer.biases);
            if l == 0 {
                for &(j, v) in &x.entries {
                    axpy(out, v, layer.lane(j));
                }
            } else if layer.input_major {
                for (j, &a) in prev[l - 1].iter().enumerate() {
                    axpy(out, a, layer.lane(j));
                }
            } else {
                let input = &prev[l - 1];
                for (i, o) in out.iter_mut().enumerate() {
                    *o += dot(layer.lane(i), input);
                }
            }
            for o in out.iter_mut() {
                *o = sigmoid(*o);
            }
        }
    }

    /// Forward pass plus deltas; returns the sample loss
    /// `(1/n_out) Σ (y − t)²`.
    fn backprop(&self, x: &SparseVec, target: &[f64], ws: &mut Workspace) -> f64 {
        self.propagate(x, ws);
        let n = self.layers.len();
        ws.deltas.resize_with(n, Vec::new);
        let y = &ws.acts[n - 1];
        let scale = 2.0 / y.len() as f64;
        let mut loss = 0.0;
        let last = &mut ws.deltas[n - 1];
        last.clear();
        for (&yi, &ti) in y.iter().zip(target) {
            let e = yi - ti;
            loss += e * e;
            last.push(scale * e * yi * (1.0 - yi));
        }
        for l in (0..n - 1).rev() {
            let next = &self.layers[l + 1];
            let (head, tail) = ws.deltas.split_at_mut(l + 1);
            let d = &mut head[l];
            let upstream = &tail[0];
            d.clear();
            if next.input_major {
                d.extend((0..next.inputs).map(|j| dot(next.lane(j), upstream)));
            } else {
                d.resize(next.inputs, 0.0);
                for (i, &di) in upstream.iter().enumerate() {
                    axpy(d, di, next.lane(i));
                }
            }
            for (dj, &a) in d.iter_mut().zip(&ws.acts[l]) {
                *dj *= a * (1.0 - a);
            }
        }
        loss / y.len() as f64
    }

    /// One SGD update on a single pair; returns its loss. Each layer's
    /// upstream deltas are accumulated from the old weights in the same pass
    /// that updates them.
    fn sgd_sample(&mut self, x: &SparseVec, target: &[f64], ws: &mut Workspace, lr: f64) -> f64 {
        self.propagate(x, ws);
        let n = self.layers.len();
        ws.deltas.resize_with(n, Vec::new);
        let y = &ws.acts[n - 1];
        let scale = 2.0 / y.len() as f64;
        let mut loss = 0.0;
        let last = &mut ws.deltas[n - 1];
        last.clear();
        for (&yi, &ti) in y.iter().zip(target) {
            let e = yi - ti;
            loss += e * e;
            last.push(scale * e * yi * (1.0 - yi));
        }
        for l in (0..n).rev() {
            let (head, tail) = ws.deltas.split_at_mut(l);
            let delta = &tail[0];
            let layer = &mut self.layers[l];
            for (b, d) in layer.biases.iter_mut().zip(delta) {
                *b -= lr * d;
            }
            if l == 0 {
                for &(j, v) in &x.entries {
                    axpy(layer.lane_mut(j), -lr * v, delta);
                }
                continue;
            }
            let input = &ws.acts[l - 1];
            let d = &mut head[l - 1];
            d.clear();
            if layer.input_major {
                for (j, &a) in input.iter().enumerate() {
                    let lane = layer.lane_mut(j);
                    d.push(dot(lane, delta));
                    axpy(lane, -lr * a, delta);
                }
            } else {
                d.resize(layer.inputs, 0.0);
                for (i, &di) in delta.iter().enumerate() {
                    let step = -lr * di;
                    for ((dj, w), &a) in d.iter_mut().zip(layer.lane_mut(i)).zip(input) {
                        *dj += di * *w;
                        *w += step * a;
                    }
                }
            }
            for (dj, &a) in d.iter_mut().zip(input) {
                *dj *= a * (1.0 - a);
            }
        }
        loss / y.len() as f64
    }

    /// Runs `config.epochs` epochs of shuffled per-sample SGD and returns the
    /// mean per-sample loss seen during each epoch.
    pub fn train(&mut self, set: &TrainingSet) -> Result<Vec<f64>> {
        if set.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        self.check_input(set.feature_len())?;
        if set.target_len() != self.output_len() {
            return Err(Error::Dimension {
                expected: self.output_len(),
                actual: set.target_len(),
            });
        }
        let lr = self.config.learning_rate;
        let mut order: Vec<usize> = (0..set.len()).collect();
        let mut ws = Workspace::default();
        let mut history = Vec::with_capacity(self.config.epochs);
        // Summed in set order so the epoch loss does not depend on the shuffle.
        let mut losses = vec![0.0; set.len()];
        for _ in 0..self.config.epochs {
            self.rng.shuffle(&mut order);
            for &k in &order {
                let pair = &set.pairs[k];
                losses[k] = self.sgd_sample(&pair.feature, &pair.target, &mut ws, lr);
            }
            history.push(losses.iter().sum::<f64>() / set.len() as f64);
        }
        Ok(history)
    }

    /// Mean sample loss over a set, without updating anything.
    pub fn mse(&self, set: &TrainingSet) -> Result<f64> {
        if set.is_empty() {
            return Ok(0.0);
        }
        self.check_input(set.feature_len())?;
        let mut ws = Workspace::default();
        let total: f64 = set
            .pairs
            .iter()
            .map(|p| self.backprop(&p.feature, &p.target, &mut ws))
            .sum();
        Ok(total / set.len() as f64)
    }

    /// Parameter `p` of layer `l`, weights first then biases.
    fn param_mut(&mut self, l: usize, p: usize) -> &mut f64 {
        let layer = &mut self.layers[l];
        let n_w = layer.weights.len();
        if p < n_w {
            let idx = layer.at(p / layer.inputs, p % layer.inputs);
            &mut layer.weights[idx]
        } else {
            &mut layer.biases[p - n_w]
        }
    }

    fn loss(&self, x: &SparseVec, target: &[f64]) -> f64 {
        let mut ws = Workspace::default();
        self.propagate(x, &mut ws);
        let y = ws.acts.last().unwrap();
        y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
    }

    /// Backprop gradient of the sample loss, flattened in the order
    /// layer → weights (row-major) → biases.
    pub fn gradient(&self, x: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        if target.len() != self.output_len() {
            return Err(Error::Dimension {
                expected: self.output_len(),
                actual: target.len(),
            });
        }
        let xs = SparseVec::from_dense(x);
        let mut ws = Workspace::default();
        self.backprop(&xs, target, &mut ws);
        let mut grad = Vec::with_capacity(self.parameter_count());
        for (l, layer) in self.layers.iter().enumerate() {
            let input: &[f64] = if l == 0 { x } else { &ws.acts[l - 1] };
            for &d in &ws.deltas[l] {
                grad.extend(input.iter().map(|a| d * a));
            }
            grad.extend_from_slice(&ws.deltas[l]);
            debug_assert_eq!(layer.biases.len(), ws.deltas[l].len());
        }
        Ok(grad)
    }

    /// Largest relative disagreement `|g − fd| / max(|g| + |fd|, 1e-6)`
    /// between [`Network::gradient`] and a central finite difference with
    /// step `1e-5`. Below the floor the difference quotient is dominated by
    /// rounding (about `ε·L/h`), so tiny gradients are compared absolutely.
    pub fn gradient_check(&self, x: &[f64], target: &[f64]) -> Result<f64> {
        const H: f64 = 1e-5;
        const FLOOR: f64 = 1e-6;
        let analytic = self.gradient(x, target)?;
        let xs = SparseVec::from_dense(x);
        let mut probe = self.clone();
        let mut worst = 0.0f64;
        let mut k = 0;
        for l in 0..self.layers.len() {
            let n_w = self.layers[l].weights.len();
            let n_b = self.layers[l].biases.len();
            for p in 0..n_w + n_b {
                let original = *probe.param_mut(l, p);
                *probe.param_mut(l, p) = original + H;
                let plus = probe.loss(&xs, target);
                *probe.param_mut(l, p) = original - H;
                let minus = probe.loss(&xs, target);
                *probe.param_mut(l, p) = original;
                let numeric = (plus - minus) / (2.0 * H);
                let g = analytic[k];
                let err = (g - numeric).abs() / (g.abs() + numeric.abs()).max(FLOOR);
                worst = worst.max(err);
                k += 1;
            }
        }
        Ok(worst)
    }
}

/// Thresholds the network output at 0.5 (ties go to 1) and slices the bits
/// into input ports, MSB first.
pub fn predict_stimulus(net: &Network, target: &[f64], spec: &DutSpec) -> Result<StimulusVector> {
    if net.output_len() != spec.input_bits() {
        return Err(Error::Dimension {
            expected: spec.input_bits(),
            actual: net.output_len(),
        });
    }
    let y = net.forward(target)?;
    bits_to_stimulus(&y, spec)
}

pub fn predict_stimulus_sparse(net: &Network, target: &SparseVec, spec: &DutSpec) -> Result<StimulusVector> {
    if net.output_len() != spec.input_bits() {
        return Err(Error::Dimension {
            expected: spec.input_bits(),
            actual: net.output_len(),
        });
    }
    let y = net.forward_sparse(target)?;
    bits_to_stimulus(&y, spec)
}

pub fn bits_to_stimulus(y: &[f64], spec: &DutSpec) -> Result<StimulusVector> {
    let bits: Vec<bool> = y.iter().map(|&v| v >= 0.5).collect();
    spec.decode_bits(&bits)
}

/// On-disk model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    /// Per layer, one row of input weights per output unit.
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub init_seed: u64,
}

impl ModelFile {
    pub fn from_network(net: &Network) -> Self {
        ModelFile {
            layer_sizes: net.config.layer_sizes.clone(),
            activation: net.config.activation,
            weights: net
                .layers
                .iter()
                .map(|l| l.row_major().chunks(l.inputs).map(<[f64]>::to_vec).collect())
                .collect(),
            biases: net.layers.iter().map(|l| l.biases.clone()).collect(),
            init_seed: net.config.init_seed,
        }
    }

    /// Rebuilds a network; learning rate and epochs take their defaults.
    pub fn into_network(self) -> Result<Network> {
        let config = NetworkConfig::new(self.layer_sizes.clone(), self.init_seed);
        let mut net = Network::init(&config)?;
        if self.weights.len() != net.layers.len() || self.biases.len() != net.layers.len() {
            return Err(Error::Structural("layer count disagrees with layer_sizes".into()));
        }
        for (l, (rows, biases)) in self.weights.into_iter().zip(self.biases).enumerate() {
            let inputs = net.layers[l].inputs;
            if rows.iter().any(|r| r.len() != inputs) {
                return Err(Error::Structural(format!("layer {l} has a row of the wrong width")));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            net.set_layer(l, flat, biases)?;
        }
        if !net.all_finite() {
            return Err(Error::Structural("model contains non-finite parameters".into()));
        }
        Ok(net)
    }

    pub fn save(net: &Network, path: &Path) -> Result<()> {
        let json = serde_json::to_string(&Self::from_network(net))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Network> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str::<ModelFile>(&text)?.into_network()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::{Comparator, Dut};
    use proptest::prelude::*;

    fn xor_set() -> TrainingSet {
        let mut set = TrainingSet::new(2, 1);
        for (x, t) in [([0., 0.], 0.), ([0., 1.], 1.), ([1., 0.], 1.), ([1., 1.], 0.)] {
            set.push_dense(&x, &[t], 0).unwrap();
        }
        set
    }

    #[test]
    fn init_counts_zero_biases_and_bounds() {
        let net = Network::init(&NetworkConfig::new(vec![2, 2, 1], 11)).unwrap();
        assert_eq!(net.weights(0).len() + net.weights(1).len(), 6);
        assert_eq!(net.biases(0).len() + net.biases(1).len(), 3);
        assert!(net.biases(0).iter().chain(net.biases(1)).all(|&b| b == 0.0));
        let net = Network::init(&NetworkConfig::new(vec![7, 5, 3], 3)).unwrap();
        for (l, (fi, fo)) in [(7usize, 5usize), (5, 3)].into_iter().enumerate() {
            let r = (6.0 / (fi + fo) as f64).sqrt();
            assert!(net.weights(l).iter().all(|w| w.abs() <= r));
        }
        let again = Network::init(&NetworkConfig::new(vec![7, 5, 3], 3)).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(Network::init(&NetworkConfig::new(vec![3], 0)).is_err());
        assert!(Network::init(&NetworkConfig::new(vec![3, 0, 1], 0)).is_err());
    }

    #[test]
    fn forward_basics() {
        let mut net = Network::init(&NetworkConfig::new(vec![3, 4, 2], 1)).unwrap();
        net.set_layer(0, vec![0.0; 12], vec![0.0; 4]).unwrap();
        net.set_layer(1, vec![0.0; 8], vec![0.0; 2]).unwrap();
        assert_eq!(net.forward(&[0.3, -2.0, 9.0]).unwrap(), vec![0.5, 0.5]);

        let mut single = Network::init(&NetworkConfig::new(vec![1, 1], 1)).unwrap();
        single.set_layer(0, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(single.forward(&[0.0]).unwrap(), vec![0.5]);
        assert!(matches!(
            single.forward(&[0.0, 1.0]),
            Err(Error::Dimension { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn xor_learns() {
        let mut config = NetworkConfig::new(vec![2, 4, 1], 1);
        config.learning_rate = 0.5;
        config.epochs = 5000;
        let set = xor_set();
        let mut net = Network::init(&config).unwrap();
        let before = net.mse(&set).unwrap();
        let history = net.train(&set).unwrap();
        assert_eq!(history.len(), 5000);
        let after = net.mse(&set).unwrap();
        assert!(after < 0.05, "final mse {after}");
        assert!(after <= before);
    }

    #[test]
    fn single_step_reduces_loss() {
        let mut config = NetworkConfig::new(vec![3, 2], 5);
        config.learning_rate = 1e-3;
        config.epochs = 1;
        let mut set = TrainingSet::new(3, 2);
        set.push_dense(&[0.2, 0.9, 0.4], &[1.0, 0.0], 0).unwrap();
        let mut net = Network::init(&config).unwrap();
        let before = net.mse(&set).unwrap();
        net.train(&set).unwrap();
        assert!(net.mse(&set).unwrap() < before);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let mut config = NetworkConfig::new(vec![2, 4, 1], 9);
        config.learning_rate = 0.0;
        config.epochs = 20;
        let mut net = Network::init(&config).unwrap();
        let original = net.clone();
        let history = net.train(&xor_set()).unwrap();
        assert_eq!(net, original);
        assert!(history.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn training_errors() {
        let mut net = Network::init(&NetworkConfig::new(vec![2, 1], 0)).unwrap();
        assert!(matches!(net.train(&TrainingSet::new(2, 1)), Err(Error::Config(_))));
        let mut wrong = TrainingSet::new(3, 1);
        wrong.push_dense(&[0., 0., 1.], &[1.], 0).unwrap();
        assert!(matches!(net.train(&wrong), Err(Error::Dimension { .. })));
        let mut set = TrainingSet::new(2, 1);
        assert!(set.push_dense(&[0.0], &[1.0], 0).is_err());
        assert!(set.push_dense(&[0.0, 2.0], &[1.0], 0).is_err());
    }

    #[test]
    fn gradient_check_small_random_net() {
        let net = Network::init(&NetworkConfig::new(vec![3, 4, 2], 77)).unwrap();
        let err = net.gradient_check(&[0.3, 0.8, 0.1], &[1.0, 0.0]).unwrap();
        assert!(err < 1e-4, "{err}");
        let again = net
            .gradient_check(&[0.3 * 1.0, 0.8 * 1.0, 0.1 * 1.0], &[1.0, 0.0])
            .unwrap();
        assert_eq!(err, again);
    }

    #[test]
    fn gradient_check_zero_net() {
        let mut net = Network::init(&NetworkConfig::new(vec![3, 4, 2], 1)).unwrap();
        net.set_layer(0, vec![0.0; 12], vec![0.0; 4]).unwrap();
        net.set_layer(1, vec![0.0; 8], vec![0.0; 2]).unwrap();
        let err = net.gradient_check(&[0.5, 0.25, 1.0], &[0.0, 1.0]).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn threshold_rule() {
        let spec = DutSpec::new(
            "t",
            vec![crate::dut::PortSpec::input("x", 3)],
            vec![crate::dut::PortSpec::output("y", 1)],
        )
        .unwrap();
        assert_eq!(bits_to_stimulus(&[0.7, 0.2, 0.5], &spec).unwrap().0, vec![5]);
        assert_eq!(bits_to_stimulus(&[0.1, 0.49, 0.0], &spec).unwrap().0, vec![0]);
    }

    #[test]
    fn predict_checks_dimensions() {
        let dut = Comparator::new(2).unwrap();
        let net = Network::init(&NetworkConfig::new(vec![16, 8, 3], 0)).unwrap();
        assert!(predict_stimulus(&net, &[0.0; 16], dut.spec()).is_err());
        let net = Network::init(&NetworkConfig::new(vec![16, 8, 4], 0)).unwrap();
        assert!(predict_stimulus(&net, &[0.0; 15], dut.spec()).is_err());
        assert!(predict_stimulus(&net, &[0.0; 16], dut.spec()).is_ok());
    }

    #[test]
    fn model_file_round_trip() {
        let mut net = Network::init(&NetworkConfig::new(vec![4, 3, 2], 21)).unwrap();
        let mut set = TrainingSet::new(4, 2);
        set.push_dense(&[1., 0., 0., 1.], &[0., 1.], 0).unwrap();
        net.config_mut().epochs = 3;
        net.train(&set).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        ModelFile::save(&net, &path).unwrap();
        let loaded = ModelFile::load(&path).unwrap();
        for l in 0..2 {
            assert_eq!(loaded.weights(l), net.weights(l));
            assert_eq!(loaded.biases(l), net.biases(l));
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["activation"], "sigmoid");
        assert_eq!(v["weights"][0].as_array().unwrap().len(), 3);
        assert_eq!(v["weights"][0][0].as_array().unwrap().len(), 4);
        std::fs::write(&path, text.replace("\"init_seed\"", "\"bogus\":1,\"init_seed\"")).unwrap();
        assert!(ModelFile::load(&path).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn forward_stays_finite_and_open(
            seed in any::<u64>(),
            scale in -100.0f64..100.0,
            x in prop::collection::vec(-100.0f64..100.0, 3),
        ) {
            let mut net = Network::init(&NetworkConfig::new(vec![3, 5, 2], seed)).unwrap();
            let w0: Vec<f64> = net.weights(0).iter().map(|w| (w * scale).clamp(-100.0, 100.0)).collect();
            let b0 = vec![scale; 5];
            net.set_layer(0, w0, b0).unwrap();
            let y = net.forward(&x).unwrap();
            prop_assert!(y.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= 1.0));
        }

        #[test]
        fn training_is_deterministic(seed in any::<u64>()) {
            let mut config = NetworkConfig::new(vec![2, 3, 1], seed);
            config.epochs = 10;
            let mut a = Network::init(&config).unwrap();
            let mut b = Network::init(&config).unwrap();
            let ha = a.train(&xor_set()).unwrap();
            let hb = b.train(&xor_set()).unwrap();
            prop_assert_eq!(ha, hb);
            prop_assert_eq!(a, b);
        }
    }
}
