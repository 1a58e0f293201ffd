use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lstm::LstmCache;
use super::qlstm::QlstmCache;
use super::{CellState, LstmCellParams, ModelKind, QlstmCellParams, StackConfig};
use crate::error::{Error, Result};
use crate::linear::Linear;
use crate::params::{join, zeros_like, Params};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active, masks drawn from the supplied seed.
    Train,
    /// Deterministic; the seed is ignored.
    Eval,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellParams<T> {
    Classical(LstmCellParams<T>),
    Quantum(QlstmCellParams<T>),
}

impl<T: Scalar> CellParams<T> {
    fn hidden(&self) -> usize {
        match self {
            CellParams::Classical(p) => p.hidden(),
            CellParams::Quantum(p) => p.hidden(),
        }
    }
}

impl<T: Scalar> Params<T> for CellParams<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        match self {
            CellParams::Classical(p) => p.visit(prefix, out),
            CellParams::Quantum(p) => p.visit(prefix, out),
        }
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        match self {
            CellParams::Classical(p) => p.visit_mut(prefix, out),
            CellParams::Quantum(p) => p.visit_mut(prefix, out),
        }
    }
}

/// All learnable tensors of a stack. Also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct StackParams<T> {
    pub layers: Vec<CellParams<T>>,
    pub output: Linear<T>,
}

impl<T: Scalar> Params<T> for StackParams<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        for (l, layer) in self.layers.iter().enumerate() {
            layer.visit(&join(prefix, &format!("layer{l}")), out);
        }
        self.output.visit(&join(prefix, "output"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            layer.visit_mut(&join(prefix, &format!("layer{l}")), out);
        }
        self.output.visit_mut(&join(prefix, "output"), out);
    }
}

enum StepCache<T> {
    Classical(LstmCache<T>),
    Quantum(QlstmCache<T>),
}

pub(crate) struct StackCache<T> {
    steps: Vec<Vec<StepCache<T>>>,
    masks: Vec<Option<Vec<T>>>,
    readout_in: Vec<T>,
}

/// A configured forecasting stack with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct StackModel<T> {
    config: StackConfig,
    pub params: StackParams<T>,
}

impl<T: Scalar> StackModel<T> {
    /// Every parameter zero: the prediction is the read-out bias (zero).
    pub fn zeros(config: StackConfig) -> Result<Self> {
        config.validate()?;
        let layers = (0..config.n_layers)
            .map(|l| {
                let input = if l == 0 { config.n_features } else { config.hidden };
                match config.model_kind {
                    ModelKind::Classical => {
                        CellParams::Classical(LstmCellParams::zeros(input, config.hidden))
                    }
                    ModelKind::Quantum(q) => {
                        CellParams::Quantum(QlstmCellParams::zeros(input, config.hidden, q))
                    }
                }
            })
            .collect();
        Ok(Self {
            config,
            params: StackParams {
                layers,
                output: Linear::zeros(config.readout_width(), 1),
            },
        })
    }

    /// Seeded random initialization.
    pub fn init(config: StackConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(config.n_layers);
        for l in 0..config.n_layers {
            let input = if l == 0 { config.n_features } else { config.hidden };
            layers.push(match config.model_kind {
                ModelKind::Classical => {
                    CellParams::Classical(LstmCellParams::init_uniform(input, config.hidden, &mut rng))
                }
                ModelKind::Quantum(q) => {
                    CellParams::Quantum(QlstmCellParams::init(input, config.hidden, q, &mut rng))
                }
            });
        }
        let width = config.readout_width();
        let output = Linear::init_uniform(width, 1, 1.0 / (width as f64).sqrt(), &mut rng);
        Ok(Self {
            config,
            params: StackParams { layers, output },
        })
    }

    pub fn config(&self) -> &StackConfig {
        &self.config
    }

    pub fn zero_grad(&self) -> StackParams<T> {
        zeros_like(&self.params)
    }

    fn draw_mask(&self, rng: &mut ChaCha8Rng, len: usize) -> Vec<T> {
        let p = self.config.dropout;
        let keep = T::lit(1.0 / (1.0 - p));
        (0..len)
            .map(|_| {
                if rng.random::<f64>() < p {
                    T::zero()
                } else {
                    keep
                }
            })
            .collect()
    }

    fn check_window(&self, window: &[T]) -> Result<()> {
        let expected = self.config.window * self.config.n_features;
        if window.len() != expected {
            return Err(Error::Data(format!(
                "window holds {} values, expected {} timesteps x {} features",
                window.len(),
                self.config.window,
                self.config.n_features
            )));
        }
        if window.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("window contains non-finite values".into()));
        }
        Ok(())
    }

    /// Prediction for one `[window x n_features]` row-major window.
    pub fn predict(&self, window: &[T], mode: Mode, seed: u64) -> Result<T> {
        Ok(self.forward_cached(window, mode, seed)?.0)
    }

    pub(crate) fn forward_cached(
        &self,
        window: &[T],
        mode: Mode,
        seed: u64,
    ) -> Result<(T, StackCache<T>)> {
        self.check_window(window)?;
        let w = self.config.window;
        let f = self.config.n_features;
        let dropout_on = mode == Mode::Train && self.config.dropout > 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut seq: Vec<Vec<T>> = window.chunks_exact(f).map(<[T]>::to_vec).collect();
        let mut steps = Vec::with_capacity(self.params.layers.len());
        let mut masks = Vec::with_capacity(self.params.layers.len());
        for layer in &self.params.layers {
            let hidden = layer.hidden();
            let mut state = CellState::zeros(hidden);
            let mut out = Vec::with_capacity(w);
            let mut caches = Vec::with_capacity(w);
            for x in &seq {
                let y = match layer {
                    CellParams::Classical(p) => {
                        let (next, cache) = p.forward(x, &state);
                        state = next;
                        caches.push(StepCache::Classical(cache));
                        state.h.clone()
                    }
                    CellParams::Quantum(p) => {
                        let (next, y, cache) = p.forward(x, &state)?;
                        state = next;
                        caches.push(StepCache::Quantum(cache));
                        y
                    }
                };
                out.push(y);
            }
            let mask = dropout_on.then(|| self.draw_mask(&mut rng, w * hidden));
            if let Some(m) = &mask {
                for (t, y) in out.iter_mut().enumerate() {
                    for (v, &k) in y.iter_mut().zip(&m[t * hidden..(t + 1) * hidden]) {
                        *v *= k;
                    }
                }
            }
            steps.push(caches);
            masks.push(mask);
            seq = out;
        }
        let readout_in = seq.pop().expect("window has at least one step");
        let pred = self.params.output.forward(&readout_in)[0];
        Ok((
            pred,
            StackCache {
                steps,
                masks,
                readout_in,
            },
        ))
    }

    /// Accumulates `dpred * d(pred)/d(params)` into `grad`.
    pub(crate) fn backward(
        &self,
        cache: &StackCache<T>,
        dpred: T,
        grad: &mut StackParams<T>,
    ) -> Result<()> {
        let w = self.config.window;
        let mut d_readout = vec![T::zero(); cache.readout_in.len()];
        self.params
            .output
            .backward(&cache.readout_in, &[dpred], &mut grad.output, Some(&mut d_readout));

        let n_layers = self.params.layers.len();
        if n_layers == 0 {
            return Ok(());
        }
        // gradient on each layer's (pre-dropout) emitted sequence
        let top_hidden = self.params.layers[n_layers - 1].hidden();
        let mut dys = vec![vec![T::zero(); top_hidden]; w];
        dys[w - 1] = d_readout;
        for l in (0..n_layers).rev() {
            let layer = &self.params.layers[l];
            let hidden = layer.hidden();
            if let Some(mask) = &cache.masks[l] {
                for (t, dy) in dys.iter_mut().enumerate() {
                    for (d, &k) in dy.iter_mut().zip(&mask[t * hidden..(t + 1) * hidden]) {
                        *d *= k;
                    }
                }
            }
            let mut dh = vec![T::zero(); hidden];
            let mut dc = vec![T::zero(); hidden];
            let mut dx_seq = Vec::with_capacity(w);
            for t in (0..w).rev() {
                let (dv, dc_prev) = match (layer, &mut grad.layers[l], &cache.steps[l][t]) {
                    (CellParams::Classical(p), CellParams::Classical(g), StepCache::Classical(c)) => {
                        let mut dv = vec![T::zero(); hidden + p.input_size()];
                        let dh_total: Vec<T> =
                            dh.iter().zip(&dys[t]).map(|(&a, &b)| a + b).collect();
                        let dc_prev = p.backward(c, &dh_total, &dc, g, &mut dv);
                        (dv, dc_prev)
                    }
                    (CellParams::Quantum(p), CellParams::Quantum(g), StepCache::Quantum(c)) => {
                        let mut dv = vec![T::zero(); hidden + p.input_size()];
                        let dc_prev = p.backward(c, &dys[t], &dh, &dc, g, &mut dv)?;
                        (dv, dc_prev)
                    }
                    _ => unreachable!("gradient layout mirrors the parameters"),
                };
                dh = dv[..hidden].to_vec();
                dc = dc_prev;
                dx_seq.push(dv[hidden..].to_vec());
            }
            dx_seq.reverse();
            dys = dx_seq;
        }
        Ok(())
    }
}

/// Runs the whole stack on one window and returns the scalar forecast.
pub fn stack_forward<T: Scalar>(
    window: &[T],
    model: &StackModel<T>,
    mode: Mode,
    rng_seed: u64,
) -> Result<T> {
    model.predict(window, mode, rng_seed)
}
