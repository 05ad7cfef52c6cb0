//! Small dense networks with hand-rolled backpropagation.
//!
//! Hidden layers use tanh, the output layer is linear, and everything is
//! f64 so analytic gradients can be validated against central finite
//! differences at tight tolerances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fully-connected layer, weights row-major `rows x cols` (out x in).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Multi-layer perceptron: tanh between layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Per-layer activations recorded during a forward pass, consumed by
/// [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (post-activation of the previous one).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    preacts: Vec<Vec<f64>>,
}

/// Gradient accumulator shaped like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Grads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (dw, db) in &mut self.layers {
            dw.iter_mut().for_each(|v| *v *= factor);
            db.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn add(&mut self, other: &Grads) {
        for ((dw, db), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            dw.iter_mut().zip(ow).for_each(|(a, b)| *a += b);
            db.iter_mut().zip(ob).for_each(|(a, b)| *a += b);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|(w, b)| w.iter().chain(b).all(|v| v.is_finite()))
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 bounded away from 0.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl Mlp {
    /// Build a network with the given layer sizes (input first). Weights use
    /// an orthogonalized Gaussian init; the final layer is scaled by
    /// `final_scale` so a policy head can start near-uniform.
    pub fn new(sizes: &[usize], seed: u64, final_scale: f64) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (idx, pair) in sizes.windows(2).enumerate() {
            let (cols, rows) = (pair[0], pair[1]);
            let last = idx == sizes.len() - 2;
            let gain = if last { final_scale } else { 2f64.sqrt() };
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rows);
            for _ in 0..rows {
                let mut v: Vec<f64> = (0..cols).map(|_| gaussian(&mut rng)).collect();
                if basis.len() < cols {
                    for u in &basis {
                        let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v);
            }
            let w = basis
                .into_iter()
                .flat_map(|row| row.into_iter().map(|x| x * gain))
                .collect();
            layers.push(Layer {
                rows,
                cols,
                w,
                b: vec![0.0; rows],
            });
        }
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.cols)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &[f64]) -> (Vec<f64>, ForwardCache) {
        debug_assert_eq!(x.len(), self.input_len());
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut activ = x.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut z = layer.b.clone();
            for (zr, row) in z.iter_mut().zip(layer.w.chunks(layer.cols)) {
                *zr += row.iter().zip(&activ).map(|(w, a)| w * a).sum::<f64>();
            }
            inputs.push(std::mem::take(&mut activ));
            preacts.push(z.clone());
            let last = idx == self.layers.len() - 1;
            activ = if last {
                z
            } else {
                z.into_iter().map(f64::tanh).collect()
            };
        }
        (activ, ForwardCache { inputs, preacts })
    }

    /// Accumulate parameter gradients for one sample given dLoss/dOutput.
    pub fn backward(&self, cache: &ForwardCache, dout: &[f64], grads: &mut Grads) {
        debug_assert_eq!(dout.len(), self.output_len());
        let mut delta = dout.to_vec();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let last = idx == self.layers.len() - 1;
            if !last {
                // Through tanh: d/dz tanh(z) = 1 - tanh(z)^2.
                for (d, &z) in delta.iter_mut().zip(&cache.preacts[idx]) {
                    let t = z.tanh();
                    *d *= 1.0 - t * t;
                }
            }
            let input = &cache.inputs[idx];
            let (dw, db) = &mut grads.layers[idx];
            for ((dbr, row), &d) in db
                .iter_mut()
                .zip(dw.chunks_mut(layer.cols))
                .zip(&delta)
            {
                *dbr += d;
                for (slot, &a) in row.iter_mut().zip(input) {
                    *slot += d * a;
                }
            }
            if idx > 0 {
                let mut prev = vec![0.0; layer.cols];
                for (row, &d) in layer.w.chunks(layer.cols).zip(&delta) {
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                delta = prev;
            }
        }
    }

    /// Plain SGD update: `p -= lr * g`.
    pub fn sgd_step(&mut self, grads: &Grads, lr: f64) {
        for (layer, (dw, db)) in self.layers.iter_mut().zip(&grads.layers) {
            layer.w.iter_mut().zip(dw).for_each(|(p, g)| *p -= lr * g);
            layer.b.iter_mut().zip(db).for_each(|(p, g)| *p -= lr * g);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter view in a fixed order (per layer: weights then biases).
    pub fn get_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut pos = 0;
        for l in &mut self.layers {
            let wlen = l.w.len();
            l.w.copy_from_slice(&flat[pos..pos + wlen]);
            pos += wlen;
            let blen = l.b.len();
            l.b.copy_from_slice(&flat[pos..pos + blen]);
            pos += blen;
        }
    }

    /// Flat gradient view matching [`Mlp::get_params`] ordering.
    pub fn flatten_grads(grads: &Grads) -> Vec<f64> {
        let mut out = Vec::new();
        for (dw, db) in &grads.layers {
            out.extend_from_slice(dw);
            out.extend_from_slice(db);
        }
        out
    }
}
