use rand::Rng;

use super::{CellState, ProjectionMode, QuantumConfig, VqcMode};
use crate::error::{Error, Result};
use crate::linear::Linear;
use crate::params::{join, Params};
use crate::scalar::{sigmoid, Scalar};
use crate::vqc::{vqc_forward, vqc_gradient, VqcParams, VqcShape};

/// Gate circuits in storage order.
pub const GATE_NAMES: [&str; 4] = ["forget", "input", "update", "output"];

fn fan_in_bound(fan_in: usize) -> f64 {
    1.0 / (fan_in.max(1) as f64).sqrt()
}

/// `u -> tanh(proj_out(VQC(proj_in(u))))`, used for the extra circuits of
/// the six-circuit cell.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumBlock<T> {
    pub proj_in: Linear<T>,
    pub vqc: VqcParams<T>,
    pub proj_out: Linear<T>,
}

pub(crate) struct BlockCache<T> {
    u: Vec<T>,
    u_proj: Vec<T>,
    q: Vec<T>,
    out: Vec<T>,
}

impl<T: Scalar> QuantumBlock<T> {
    pub fn zeros(dim: usize, shape: VqcShape) -> Self {
        Self {
            proj_in: Linear::zeros(dim, shape.n_qubits),
            vqc: VqcParams::zeros(shape),
            proj_out: Linear::zeros(shape.n_qubits, dim),
        }
    }

    pub fn init<R: Rng + ?Sized>(dim: usize, shape: VqcShape, rng: &mut R) -> Self {
        let proj_in = Linear::init_uniform(dim, shape.n_qubits, fan_in_bound(dim), rng);
        let vqc = VqcParams::init_uniform(shape, rng);
        let proj_out = Linear::init_uniform(shape.n_qubits, dim, fan_in_bound(shape.n_qubits), rng);
        Self {
            proj_in,
            vqc,
            proj_out,
        }
    }

    pub(crate) fn forward(&self, u: &[T]) -> Result<(Vec<T>, BlockCache<T>)> {
        let u_proj = self.proj_in.forward(u);
        let q = vqc_forward(&u_proj, &self.vqc)?;
        let out: Vec<T> = self
            .proj_out
            .forward(&q)
            .into_iter()
            .map(|a| a.tanh())
            .collect();
        let cache = BlockCache {
            u: u.to_vec(),
            u_proj,
            q,
            out: out.clone(),
        };
        Ok((out, cache))
    }

    pub(crate) fn backward(
        &self,
        cache: &BlockCache<T>,
        dout: &[T],
        grad: &mut Self,
        du: &mut [T],
    ) -> Result<()> {
        let da: Vec<T> = dout
            .iter()
            .zip(&cache.out)
            .map(|(&d, &y)| d * (T::one() - y * y))
            .collect();
        let mut dq = vec![T::zero(); cache.q.len()];
        self.proj_out
            .backward(&cache.q, &da, &mut grad.proj_out, Some(&mut dq));
        let jac = vqc_gradient(&cache.u_proj, &self.vqc)?;
        let mut du_proj = vec![T::zero(); cache.u_proj.len()];
        jac.backprop(&dq, grad.vqc.angles_mut(), &mut du_proj);
        self.proj_in
            .backward(&cache.u, &du_proj, &mut grad.proj_in, Some(du));
        Ok(())
    }
}

impl<T: Scalar> Params<T> for QuantumBlock<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        self.proj_in.visit(&join(prefix, "proj_in"), out);
        out.push((join(prefix, "vqc.angles"), self.vqc.angles()));
        self.proj_out.visit(&join(prefix, "proj_out"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        self.proj_in.visit_mut(&join(prefix, "proj_in"), out);
        out.push((join(prefix, "vqc.angles"), self.vqc.angles_mut()));
        self.proj_out.visit_mut(&join(prefix, "proj_out"), out);
    }
}

/// QLSTM cell: a shared classical projection of `v = [h_prev, x]` onto the
/// qubits, one variational circuit per LSTM gate, and a linear map from the
/// measured expectations back to the hidden size.
#[derive(Clone, Debug, PartialEq)]
pub struct QlstmCellParams<T> {
    input_size: usize,
    hidden: usize,
    config: QuantumConfig,
    pub input_proj: Linear<T>,
    /// forget, input, update, output
    pub gate_vqcs: Vec<VqcParams<T>>,
    /// One map per gate, or a single shared one.
    pub out_proj: Vec<Linear<T>>,
    pub hidden_block: Option<QuantumBlock<T>>,
    pub output_block: Option<QuantumBlock<T>>,
}

pub(crate) struct QlstmCache<T> {
    v: Vec<T>,
    v_proj: Vec<T>,
    q: Vec<Vec<T>>,
    gates: [Vec<T>; 4],
    c_prev: Vec<T>,
    tanh_c: Vec<T>,
    hidden: Option<BlockCache<T>>,
    output: Option<BlockCache<T>>,
}

impl<T: Scalar> QlstmCellParams<T> {
    pub fn zeros(input_size: usize, hidden: usize, config: QuantumConfig) -> Self {
        let n_q = config.shape.n_qubits;
        let n_out = match config.projection {
            ProjectionMode::PerGate => 4,
            ProjectionMode::Shared => 1,
        };
        let six = config.mode == VqcMode::Six;
        Self {
            input_size,
            hidden,
            config,
            input_proj: Linear::zeros(hidden + input_size, n_q),
            gate_vqcs: vec![VqcParams::zeros(config.shape); 4],
            out_proj: vec![Linear::zeros(n_q, hidden); n_out],
            hidden_block: six.then(|| QuantumBlock::zeros(hidden, config.shape)),
            output_block: six.then(|| QuantumBlock::zeros(hidden, config.shape)),
        }
    }

    /// Projections uniform in `+-1/sqrt(fan_in)`, angles uniform in `+-pi/100`.
    pub fn init<R: Rng + ?Sized>(
        input_size: usize,
        hidden: usize,
        config: QuantumConfig,
        rng: &mut R,
    ) -> Self {
        let n_q = config.shape.n_qubits;
        let mut p = Self::zeros(input_size, hidden, config);
        let fan = hidden + input_size;
        p.input_proj = Linear::init_uniform(fan, n_q, fan_in_bound(fan), rng);
        for vqc in &mut p.gate_vqcs {
            *vqc = VqcParams::init_uniform(config.shape, rng);
        }
        for proj in &mut p.out_proj {
            *proj = Linear::init_uniform(n_q, hidden, fan_in_bound(n_q), rng);
        }
        if config.mode == VqcMode::Six {
            p.hidden_block = Some(QuantumBlock::init(hidden, config.shape, rng));
            p.output_block = Some(QuantumBlock::init(hidden, config.shape, rng));
        }
        p
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn config(&self) -> &QuantumConfig {
        &self.config
    }

    fn out_proj_for(&self, gate: usize) -> usize {
        if self.out_proj.len() == 1 {
            0
        } else {
            gate
        }
    }

    pub(crate) fn check_dims(&self, x: &[T], state: &CellState<T>) -> Result<()> {
        if x.len() != self.input_size || state.h.len() != self.hidden || state.c.len() != self.hidden
        {
            return Err(Error::Config(format!(
                "QLSTM cell expects input {} and hidden {}, got input {}, h {}, c {}",
                self.input_size,
                self.hidden,
                x.len(),
                state.h.len(),
                state.c.len()
            )));
        }
        Ok(())
    }

    /// Returns the next state and the vector the cell emits upward.
    pub(crate) fn forward(
        &self,
        x: &[T],
        state: &CellState<T>,
    ) -> Result<(CellState<T>, Vec<T>, QlstmCache<T>)> {
        let v: Vec<T> = state.h.iter().chain(x).copied().collect();
        let v_proj = self.input_proj.forward(&v);
        let mut q = Vec::with_capacity(4);
        let mut pre = Vec::with_capacity(4);
        for (g, vqc) in self.gate_vqcs.iter().enumerate() {
            let measured = vqc_forward(&v_proj, vqc)?;
            pre.push(self.out_proj[self.out_proj_for(g)].forward(&measured));
            q.push(measured);
        }
        let act = |a: &Vec<T>, tanh: bool| -> Vec<T> {
            a.iter()
                .map(|&z| if tanh { z.tanh() } else { sigmoid(z) })
                .collect()
        };
        let gates = [
            act(&pre[0], false),
            act(&pre[1], false),
            act(&pre[2], true),
            act(&pre[3], false),
        ];
        let [f, i, g, o] = &gates;
        let c: Vec<T> = (0..self.hidden)
            .map(|j| f[j] * state.c[j] + i[j] * g[j])
            .collect();
        let tanh_c: Vec<T> = c.iter().map(|z| z.tanh()).collect();
        let gated: Vec<T> = o.iter().zip(&tanh_c).map(|(&o, &t)| o * t).collect();

        let (h, hidden_cache) = match &self.hidden_block {
            Some(block) => {
                let (h, cache) = block.forward(&gated)?;
                (h, Some(cache))
            }
            None => (gated, None),
        };
        let (y, output_cache) = match &self.output_block {
            Some(block) => {
                let (y, cache) = block.forward(&h)?;
                (y, Some(cache))
            }
            None => (h.clone(), None),
        };
        let cache = QlstmCache {
            v,
            v_proj,
            q,
            gates,
            c_prev: state.c.clone(),
            tanh_c,
            hidden: hidden_cache,
            output: output_cache,
        };
        Ok((CellState { h, c }, y, cache))
    }

    /// Backpropagates through one step given the gradient on the emitted
    /// vector (`dy`) and on the recurrent state (`dh`, `dc`). Adds `dL/dv`
    /// into `dv` and returns `dL/dc_prev`.
    pub(crate) fn backward(
        &self,
        cache: &QlstmCache<T>,
        dy: &[T],
        dh: &[T],
        dc: &[T],
        grad: &mut Self,
        dv: &mut [T],
    ) -> Result<Vec<T>> {
        let one = T::one();
        let n = self.hidden;

        let mut dh_total = dh.to_vec();
        match (&self.output_block, &cache.output) {
            (Some(block), Some(bc)) => {
                let g = grad.output_block.as_mut().expect("gradient mirrors params");
                block.backward(bc, dy, g, &mut dh_total)?;
            }
            _ => {
                for (a, &b) in dh_total.iter_mut().zip(dy) {
                    *a += b;
                }
            }
        }
        // gradient on o * tanh(c)
        let d_gated = match (&self.hidden_block, &cache.hidden) {
            (Some(block), Some(hc)) => {
                let g = grad.hidden_block.as_mut().expect("gradient mirrors params");
                let mut du = vec![T::zero(); n];
                block.backward(hc, &dh_total, g, &mut du)?;
                du
            }
            _ => dh_total,
        };

        let [f, i, g, o] = &cache.gates;
        let mut da = vec![vec![T::zero(); n]; 4];
        let mut dc_prev = vec![T::zero(); n];
        for j in 0..n {
            let t = cache.tanh_c[j];
            let dc_total = dc[j] + d_gated[j] * o[j] * (one - t * t);
            da[0][j] = dc_total * cache.c_prev[j] * f[j] * (one - f[j]);
            da[1][j] = dc_total * g[j] * i[j] * (one - i[j]);
            da[2][j] = dc_total * i[j] * (one - g[j] * g[j]);
            da[3][j] = d_gated[j] * t * o[j] * (one - o[j]);
            dc_prev[j] = dc_total * f[j];
        }

        let n_q = cache.v_proj.len();
        let mut dv_proj = vec![T::zero(); n_q];
        for gate in 0..4 {
            let k = self.out_proj_for(gate);
            let mut dq = vec![T::zero(); n_q];
            self.out_proj[k].backward(&cache.q[gate], &da[gate], &mut grad.out_proj[k], Some(&mut dq));
            let jac = vqc_gradient(&cache.v_proj, &self.gate_vqcs[gate])?;
            jac.backprop(&dq, grad.gate_vqcs[gate].angles_mut(), &mut dv_proj);
        }
        self.input_proj
            .backward(&cache.v, &dv_proj, &mut grad.input_proj, Some(dv));
        Ok(dc_prev)
    }
}

impl<T: Scalar> Params<T> for QlstmCellParams<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        self.input_proj.visit(&join(prefix, "input_proj"), out);
        for (name, vqc) in GATE_NAMES.iter().zip(&self.gate_vqcs) {
            out.push((join(prefix, &format!("vqc.{name}.angles")), vqc.angles()));
        }
        let shared = self.out_proj.len() == 1;
        for (k, proj) in self.out_proj.iter().enumerate() {
            let name = if shared { "shared" } else { GATE_NAMES[k] };
            proj.visit(&join(prefix, &format!("out_proj.{name}")), out);
        }
        if let Some(b) = &self.hidden_block {
            b.visit(&join(prefix, "hidden_block"), out);
        }
        if let Some(b) = &self.output_block {
            b.visit(&join(prefix, "output_block"), out);
        }
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        self.input_proj.visit_mut(&join(prefix, "input_proj"), out);
        for (name, vqc) in GATE_NAMES.iter().zip(&mut self.gate_vqcs) {
            out.push((join(prefix, &format!("vqc.{name}.angles")), vqc.angles_mut()));
        }
        let shared = self.out_proj.len() == 1;
        for (k, proj) in self.out_proj.iter_mut().enumerate() {
            let name = if shared { "shared" } else { GATE_NAMES[k] };
            proj.visit_mut(&join(prefix, &format!("out_proj.{name}")), out);
        }
        if let Some(b) = &mut self.hidden_block {
            b.visit_mut(&join(prefix, "hidden_block"), out);
        }
        if let Some(b) = &mut self.output_block {
            b.visit_mut(&join(prefix, "output_block"), out);
        }
    }
}

/// One QLSTM timestep; returns the recurrent state.
pub fn qlstm_cell_step<T: Scalar>(
    x: &[T],
    state: &CellState<T>,
    params: &QlstmCellParams<T>,
) -> Result<CellState<T>> {
    params.check_dims(x, state)?;
    Ok(params.forward(x, state)?.0)
}

/// One QLSTM timestep; returns the recurrent state and the emitted vector
/// (equal to `h` unless the cell has an output circuit).
pub fn qlstm_cell_output<T: Scalar>(
    x: &[T],
    state: &CellState<T>,
    params: &QlstmCellParams<T>,
) -> Result<(CellState<T>, Vec<T>)> {
    params.check_dims(x, state)?;
    let (s, y, _) = params.forward(x, state)?;
    Ok((s, y))
}
