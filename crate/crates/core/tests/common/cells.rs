//! Straight-line recurrent cells on plain arrays.

use super::dense::{self, Shape};

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `W x + b` for a row-major `[out x in]` matrix.
pub fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(b.len());
    for r in 0..b.len() {
        let mut acc = b[r];
        for c in 0..x.len() {
            acc += w[r * x.len() + c] * x[c];
        }
        y.push(acc);
    }
    y
}

/// Weights and biases of the forget, input, candidate and output gates.
pub struct LstmRaw {
    pub w: [Vec<f64>; 4],
    pub b: [Vec<f64>; 4],
}

/// v = [h; x], f = s(W_f v + b_f), i = s(W_i v + b_i), C = tanh(W_C v + b_C),
/// o = s(W_o v + b_o), c' = f c + i C, h' = o tanh(c').
pub fn lstm_step(p: &LstmRaw, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut v = h.to_vec();
    v.extend_from_slice(x);
    let hidden = h.len();
    let mut h_next = vec![0.0; hidden];
    let mut c_next = vec![0.0; hidden];
    for j in 0..hidden {
        let mut pre = [0.0; 4];
        for (g, pre_g) in pre.iter_mut().enumerate() {
            let mut acc = p.b[g][j];
            for k in 0..v.len() {
                acc += p.w[g][j * v.len() + k] * v[k];
            }
            *pre_g = acc;
        }
        let f = sigmoid(pre[0]);
        let i = sigmoid(pre[1]);
        let cand = pre[2].tanh();
        let o = sigmoid(pre[3]);
        c_next[j] = f * c[j] + i * cand;
        h_next[j] = o * c_next[j].tanh();
    }
    (h_next, c_next)
}

/// `u -> tanh(W_out VQC(W_in u + b_in) + b_out)`.
pub struct BlockRaw {
    pub w_in: Vec<f64>,
    pub b_in: Vec<f64>,
    pub angles: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl BlockRaw {
    pub fn eval(&self, u: &[f64], shape: Shape) -> Vec<f64> {
        let q = dense::vqc(&affine(&self.w_in, &self.b_in, u), &self.angles, shape);
        affine(&self.w_out, &self.b_out, &q).into_iter().map(f64::tanh).collect()
    }
}

pub struct QlstmRaw {
    pub shape: Shape,
    pub w_in: Vec<f64>,
    pub b_in: Vec<f64>,
    /// Gate circuits in forget, input, candidate, output order.
    pub angles: [Vec<f64>; 4],
    /// Four per-gate projections, or a single shared one.
    pub w_out: Vec<Vec<f64>>,
    pub b_out: Vec<Vec<f64>>,
    pub hidden_block: Option<BlockRaw>,
    pub output_block: Option<BlockRaw>,
}

/// Returns `(h', c', emitted)`.
pub fn qlstm_step(p: &QlstmRaw, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = h.to_vec();
    v.extend_from_slice(x);
    let v_proj = affine(&p.w_in, &p.b_in, &v);
    let mut pre: Vec<Vec<f64>> = Vec::new();
    for g in 0..4 {
        let m = dense::vqc(&v_proj, &p.angles[g], p.shape);
        let k = if p.w_out.len() == 1 { 0 } else { g };
        pre.push(affine(&p.w_out[k], &p.b_out[k], &m));
    }
    let hidden = h.len();
    let mut c_next = vec![0.0; hidden];
    let mut gated = vec![0.0; hidden];
    for j in 0..hidden {
        let f = sigmoid(pre[0][j]);
        let i = sigmoid(pre[1][j]);
        let cand = pre[2][j].tanh();
        let o = sigmoid(pre[3][j]);
        c_next[j] = f * c[j] + i * cand;
        gated[j] = o * c_next[j].tanh();
    }
    let h_next = match &p.hidden_block {
        Some(b) => b.eval(&gated, p.shape),
        None => gated,
    };
    let emitted = match &p.output_block {
        Some(b) => b.eval(&h_next, p.shape),
        None => h_next.clone(),
    };
    (h_next, c_next, emitted)
}
