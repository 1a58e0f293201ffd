use rand::Rng;

use crate::params::{join, Params};
use crate::scalar::Scalar;

/// Affine map `y = W x + b` with `W` stored row-major `[out x in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    in_dim: usize,
    out_dim: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![T::zero(); in_dim * out_dim],
            bias: vec![T::zero(); out_dim],
        }
    }

    /// Weights and biases uniform in `[-bound, bound]`.
    pub fn init_uniform<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        bound: f64,
        rng: &mut R,
    ) -> Self {
        let mut draw = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| T::lit(rng.random_range(-bound..=bound)))
                .collect()
        };
        let weight = draw(in_dim * out_dim);
        let bias = draw(out_dim);
        Self {
            in_dim,
            out_dim,
            weight,
            bias,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.in_dim);
        if self.in_dim == 0 {
            return self.bias.clone();
        }
        self.weight
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi))
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and, when given, adds
    /// `W^T dy` into `dx`.
    pub fn backward(&self, x: &[T], dy: &[T], grad: &mut Linear<T>, dx: Option<&mut [T]>) {
        for (o, &g) in dy.iter().enumerate() {
            grad.bias[o] += g;
            if g == T::zero() {
                continue;
            }
            let row = &mut grad.weight[o * self.in_dim..(o + 1) * self.in_dim];
            for (w, &xi) in row.iter_mut().zip(x) {
                *w += g * xi;
            }
        }
        if let Some(dx) = dx {
            for (o, &g) in dy.iter().enumerate() {
                if g == T::zero() {
                    continue;
                }
                let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                for (d, &w) in dx.iter_mut().zip(row) {
                    *d += g * w;
                }
            }
        }
    }
}

impl<T: Scalar> Params<T> for Linear<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>) {
        out.push((join(prefix, "weight"), &self.weight));
        out.push((join(prefix, "bias"), &self.bias));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>) {
        out.push((join(prefix, "weight"), &mut self.weight));
        out.push((join(prefix, "bias"), &mut self.bias));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_and_backward() {
        let mut l = Linear::<f64>::zeros(2, 2);
        l.weight = vec![1.0, 2.0, 3.0, 4.0];
        l.bias = vec![0.5, -0.5];
        assert_eq!(l.forward(&[1.0, 1.0]), vec![3.5, 6.5]);
        let mut g = Linear::zeros(2, 2);
        let mut dx = vec![0.0; 2];
        l.backward(&[1.0, 2.0], &[1.0, -1.0], &mut g, Some(&mut dx));
        assert_eq!(g.weight, vec![1.0, 2.0, -1.0, -2.0]);
        assert_eq!(g.bias, vec![1.0, -1.0]);
        assert_eq!(dx, vec![-2.0, -2.0]);
    }

    #[test]
    fn zero_input_dim_gives_bias() {
        let mut l = Linear::<f64>::zeros(0, 3);
        l.bias = vec![1.0, 2.0, 3.0];
        assert_eq!(l.forward(&[]), vec![1.0, 2.0, 3.0]);
    }
}
