//! Named parameter tensors.
//!
//! Every learnable container exposes its flat tensors under stable dotted
//! names. The optimizer, the checkpoint writer and the gradient checker work
//! exclusively through these names.

/// A container of learnable tensors.
pub trait Params<T> {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a [T])>);
    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut [T])>);

    fn named_tensors(&self) -> Vec<(String, &[T])> {
        let mut out = Vec::new();
        self.visit("", &mut out);
        out
    }

    fn named_tensors_mut(&mut self) -> Vec<(String, &mut [T])> {
        let mut out = Vec::new();
        self.visit_mut("", &mut out);
        out
    }

    fn n_params(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// A copy of `params` with every tensor entry set to zero.
pub fn zeros_like<T: crate::Scalar, P: Params<T> + Clone>(params: &P) -> P {
    let mut z = params.clone();
    for (_, t) in z.named_tensors_mut() {
        t.fill(T::zero());
    }
    z
}

/// `acc += scale * other`, tensor by tensor. Both containers must share a layout.
pub fn axpy<T: crate::Scalar, P: Params<T>>(acc: &mut P, scale: T, other: &P) {
    let src = other.named_tensors();
    for ((_, dst), (_, src)) in acc.named_tensors_mut().into_iter().zip(src) {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d += scale * s;
        }
    }
}
