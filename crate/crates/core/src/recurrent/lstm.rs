use rand::Rng;

use super::CellState;
use crate::error::{Error, Result};
use crate::linear::Linear;
use crate::params::{join, Params};
use crate::scalar::{sigmoid, Scalar};

/// Classical LSTM cell. Every gate is an affine map of `v = [h_prev, x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCellParams<T> {
    input_size: usize,
    hidden: usize,
    pub forget: Linear<T>,
    pub input: Linear<T>,
    pub update: Linear<T>,
    pub output: Linear<T>,
}

pub(crate) struct LstmCache<T> {
    v: Vec<T>,
    f: Vec<T>,
    i: Vec<T>,
    g: Vec<T>,
    o: Vec<T>,
    c_prev: Vec<T>,
    tanh_c: Vec<T>,
}

impl<T: Scalar> LstmCellParams<T> {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        let lin = || Linear::zeros(hidden + input_size, hidden);
        Self {
            input_size,
            hidden,
            forget: lin(),
            input: lin(),
            update: lin(),
            output: lin(),
        }
    }

    /// Uniform `[-1/sqrt(hidden), 1/sqrt(hidden)]` initialization.
    pub fn init_uniform<R: Rng + ?Sized>(input_size: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut lin = || Linear::init_uniform(hidden + input_size, hidden, bound, rng);
        let forget = lin();
        let input = lin();
        let update = lin();
        let output = lin();
        Self {
            input_size,
            hidden,
            forget,
            input,
            update,
            output,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub(crate) fn check_dims(&self, x: &[T], state: &CellState<T>) -> Result<()> {
        if x.len() != self.input_size || state.h.len() != self.hidden || state.c.len() != self.hidden
        {
            return Err(Error::Config(format!(
                "LSTM cell expects input {} and hidden {}, got input {}, h {}, c {}",
                self.input_size,
                self.hidden,
                x.len(),
                state.h.len(),
                state.c.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn forward(&self, x: &[T], state: &CellState<T>) -> (CellState<T>, LstmCache<T>) {
        let v: Vec<T> = state.h.iter().chain(x).copied().collect();
        let f: Vec<T> = self.forget.forward(&v).into_iter().map(sigmoid).collect();
        let i: Vec<T> = self.input.forward(&v).into_iter().map(sigmoid).collect();
        let g: Vec<T> = self.update.forward(&v).into_iter().map(|a| a.tanh()).collect();
        let o: Vec<T> = self.output.forward(&v).into_iter().map(sigmoid).collect();
        let c: Vec<T> = (0..self.hidden)
            .map(|j| f[j] * state.c[j] + i[j] * g[j])
            .collect();
        let tanh_c: Vec<T> = c.iter().map(|x| x.tanh()).collect();
        let h = o.iter().zip(&tanh_c).map(|(&o, &t)| o * t).collect();
        let cache = LstmCache {
            v,
            f,
            i,
            g,
            o,
            c_prev: state.c.clone(),
            tanh_c,
        };
        (CellState { h, c }, cache)
    }

    /// Backpropagates `dh`, `dc` through one step. Adds `dL/dv` into `dv`
    /// (length `hidden + input`) and returns `dL/dc_prev`.
    pub(crate) fn backward(
        &self,
        cache: &LstmCache<T>,
        dh: &[T],
        dc: &[T],
        grad: &mut Self,
        dv: &mut [T],
    ) -> Vec<T> {
        let one = T::one();
        let n = self.hidden;
        let mut da_f = vec![T::zero(); n];
        let mut da_i = vec![T::zero(); n];
        let mut da_g = vec![T::zero(); n];
        let mut da_o = vec![T::zero(); n];
        let mut dc_prev = vec![T::zero(); n];
        for j in 0..n {
            let (f, i, g, o, t) = (cache.f[j], cache.i[j], cache.g[j], cache.o[j], cache.tanh_c[j]);
            let dc_total = dc[j] + dh[j] * o * (one - t * t);
            da_o[j] = dh[j] * t * o * (one - o);
            da_f[j] = dc_total * cache.c_prev[j] * f * (one - f);
            da_i[j] = dc_total * g * i * (one - i);
            da_g[j] = dc_total * i * (one - g * g);
            dc_prev[j] = dc_total * f;
        }
        self.forget
            .backward(&cache.v, &da_f, &mut grad.forget, Some(&mut *dv));
        self.input
            .backward(&cache.v, &da_i, &mut grad.input, Some(&mut *dv));
        self.update
            .backward(&cache.v, &da_g, &mut grad.update, Some(&mut *dv));
        self.output
            .backward(&cache.v, &da_o, &mut grad.output, Some(&mut *dv));
        dc_prev
    }
}

impl<T: Scalar> Params<T> for LstmCellParams<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        self.forget.visit(&join(prefix, "forget"), out);
        self.input.visit(&join(prefix, "input"), out);
        self.update.visit(&join(prefix, "update"), out);
        self.output.visit(&join(prefix, "output"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        self.forget.visit_mut(&join(prefix, "forget"), out);
        self.input.visit_mut(&join(prefix, "input"), out);
        self.update.visit_mut(&join(prefix, "update"), out);
        self.output.visit_mut(&join(prefix, "output"), out);
    }
}

/// One LSTM timestep.
pub fn lstm_cell_step<T: Scalar>(
    x: &[T],
    state: &CellState<T>,
    params: &LstmCellParams<T>,
) -> Result<CellState<T>> {
    params.check_dims(x, state)?;
    Ok(params.forward(x, state).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_cell_outputs_zero() {
        let p = LstmCellParams::<f64>::zeros(3, 2);
        let (s, cache) = p.forward(&[0.4, -1.0, 2.0], &CellState::zeros(2));
        assert_eq!(s.h, vec![0.0, 0.0]);
        assert_eq!(s.c, vec![0.0, 0.0]);
        assert_eq!(cache.f, vec![0.5, 0.5]);
        assert_eq!(cache.i, vec![0.5, 0.5]);
        assert_eq!(cache.o, vec![0.5, 0.5]);
        assert_eq!(cache.g, vec![0.0, 0.0]);
    }

    #[test]
    fn saturated_forget_keeps_memory() {
        let mut p = LstmCellParams::<f64>::zeros(1, 2);
        p.forget.bias = vec![50.0; 2];
        p.input.bias = vec![-50.0; 2];
        let state = CellState {
            h: vec![0.1, -0.2],
            c: vec![0.7, -1.3],
        };
        let (next, cache) = p.forward(&[0.5], &state);
        for f in &cache.f {
            assert_abs_diff_eq!(*f, 1.0, epsilon = 1e-12);
        }
        for (a, b) in next.c.iter().zip(&state.c) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = LstmCellParams::<f64>::zeros(2, 2);
        let err = lstm_cell_step(&[1.0], &CellState::zeros(2), &p).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
