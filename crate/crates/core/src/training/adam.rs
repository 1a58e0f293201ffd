use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Scalar;

struct Moments<T> {
    m: Vec<T>,
    v: Vec<T>,
}

/// Bias-corrected Adam. Moments are keyed by tensor name, so the update does
/// not depend on the order parameters are registered in.
pub struct AdamState<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    t: u64,
    moments: BTreeMap<String, Moments<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(lr: f64) -> Self {
        Self {
            lr: T::lit(lr),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            t: 0,
            moments: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// First and second moment of a tensor, once it has been updated.
    pub fn moments(&self, name: &str) -> Option<(&[T], &[T])> {
        self.moments.get(name).map(|m| (m.m.as_slice(), m.v.as_slice()))
    }

    /// Applies one update. Nothing is modified if any gradient is non-finite
    /// or does not match its parameter.
    pub fn step<P: Params<T> + ?Sized>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let grads: BTreeMap<String, &[T]> = grads.named_tensors().into_iter().collect();
        let mut targets = params.named_tensors_mut();
        for (name, theta) in &targets {
            let g = grads
                .get(name)
                .ok_or_else(|| Error::Training(format!("no gradient for parameter '{name}'")))?;
            if g.len() != theta.len() {
                return Err(Error::Training(format!(
                    "gradient for '{name}' has {} entries, parameter has {}",
                    g.len(),
                    theta.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite gradient for parameter '{name}'"
                )));
            }
        }

        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let one = T::one();
        let bc1 = one - self.beta1.powi(t);
        let bc2 = one - self.beta2.powi(t);
        for (name, theta) in targets.iter_mut() {
            let g = grads[name.as_str()];
            let mom = self.moments.entry(name.clone()).or_insert_with(|| Moments {
                m: vec![T::zero(); g.len()],
                v: vec![T::zero(); g.len()],
            });
            for k in 0..g.len() {
                mom.m[k] = self.beta1 * mom.m[k] + (one - self.beta1) * g[k];
                mom.v[k] = self.beta2 * mom.v[k] + (one - self.beta2) * g[k] * g[k];
                let m_hat = mom.m[k] / bc1;
                let v_hat = mom.v[k] / bc2;
                theta[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// One Adam update of `params` with `grads`.
pub fn adam_step<T: Scalar, P: Params<T> + ?Sized>(
    params: &mut P,
    grads: &P,
    state: &mut AdamState<T>,
) -> Result<()> {
    state.step(params, grads)
}
