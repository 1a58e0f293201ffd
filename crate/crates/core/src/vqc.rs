//! Variational quantum circuit used inside every QLSTM gate.
//!
//! Layout, for `n` qubits:
//!
//! 1. encoding: per qubit `H`, `RY(atan x_i)`, `RZ(atan x_i^2)`
//! 2. `n_qlayers` repetitions of an entangling CNOT sublayer followed by
//!    `n_vrotations` rotations per qubit cycling `RX -> RY -> RZ`
//! 3. exact `<Z_i>` on every qubit
//!
//! Gradients use the parameter-shift rule on every rotation, including the
//! encoding rotations, so that gradients can flow back into the features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::statevec::{GateOp, StateVector};

pub const MAX_VQC_QUBITS: usize = 8;
pub const MAX_QLAYERS: usize = 4;

/// CNOT wiring of the entangling sublayer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangle {
    /// Every offset `r = 1..n`: `CNOT(i, (i + r) mod n)`, `n(n-1)` gates per layer.
    #[default]
    Staircase,
    /// Offset 1 only: `CNOT(i, (i + 1) mod n)`.
    Ring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqcShape {
    pub n_qubits: usize,
    pub n_qlayers: usize,
    pub n_vrotations: usize,
    #[serde(default)]
    pub entangle: Entangle,
}

impl VqcShape {
    pub fn new(n_qubits: usize, n_qlayers: usize, n_vrotations: usize) -> Result<Self> {
        let shape = Self {
            n_qubits,
            n_qlayers,
            n_vrotations,
            entangle: Entangle::Staircase,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn with_entangle(mut self, entangle: Entangle) -> Self {
        self.entangle = entangle;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_VQC_QUBITS).contains(&self.n_qubits) {
            return Err(Error::Config(format!(
                "n_qubits must be within 1..={MAX_VQC_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if !(1..=MAX_QLAYERS).contains(&self.n_qlayers) {
            return Err(Error::Config(format!(
                "n_qlayers must be within 1..={MAX_QLAYERS}, got {}",
                self.n_qlayers
            )));
        }
        if self.n_vrotations == 0 {
            return Err(Error::Config("n_vrotations must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of learnable ansatz angles.
    pub fn n_params(&self) -> usize {
        self.n_qlayers * self.n_qubits * self.n_vrotations
    }
}

/// Learnable ansatz angles, laid out `[layer][qubit][rotation]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VqcParams<T> {
    shape: VqcShape,
    angles: Vec<T>,
}

impl<T: Scalar> VqcParams<T> {
    pub fn zeros(shape: VqcShape) -> Self {
        Self {
            shape,
            angles: vec![T::zero(); shape.n_params()],
        }
    }

    pub fn from_angles(shape: VqcShape, angles: Vec<T>) -> Result<Self> {
        shape.validate()?;
        if angles.len() != shape.n_params() {
            return Err(Error::Config(format!(
                "expected {} ansatz angles for {:?}, got {}",
                shape.n_params(),
                shape,
                angles.len()
            )));
        }
        if let Some(k) = angles.iter().position(|a| !a.is_finite()) {
            return Err(Error::Config(format!("ansatz angle {k} is not finite")));
        }
        Ok(Self { shape, angles })
    }

    /// Angles drawn uniformly from `[-pi/100, pi/100]`.
    pub fn init_uniform<R: Rng + ?Sized>(shape: VqcShape, rng: &mut R) -> Self {
        let bound = std::f64::consts::PI / 100.0;
        let angles = (0..shape.n_params())
            .map(|_| T::lit(rng.random_range(-bound..=bound)))
            .collect();
        Self { shape, angles }
    }

    pub fn shape(&self) -> &VqcShape {
        &self.shape
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [T] {
        &mut self.angles
    }

    pub fn index(&self, layer: usize, qubit: usize, rotation: usize) -> usize {
        (layer * self.shape.n_qubits + qubit) * self.shape.n_vrotations + rotation
    }

    pub fn angle(&self, layer: usize, qubit: usize, rotation: usize) -> T {
        self.angles[self.index(layer, qubit, rotation)]
    }
}

/// Encoding rotation angles for one feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingAngles<T> {
    pub ry: Vec<T>,
    pub rz: Vec<T>,
}

pub fn encode_features<T: Scalar>(features: &[T]) -> Result<EncodingAngles<T>> {
    if let Some(i) = features.iter().position(|x| !x.is_finite()) {
        return Err(Error::Data(format!("feature {i} is not finite")));
    }
    Ok(EncodingAngles {
        ry: features.iter().map(|x| x.atan()).collect(),
        rz: features.iter().map(|x| (*x * *x).atan()).collect(),
    })
}

fn encoding_ops<T: Scalar>(angles: &EncodingAngles<T>, ops: &mut Vec<GateOp<T>>) {
    for (q, (&ry, &rz)) in angles.ry.iter().zip(&angles.rz).enumerate() {
        ops.push(GateOp::H(q));
        ops.push(GateOp::Ry(q, ry));
        ops.push(GateOp::Rz(q, rz));
    }
}

pub fn prepare_state<T: Scalar>(angles: &EncodingAngles<T>) -> Result<StateVector<T>> {
    if angles.ry.len() != angles.rz.len() {
        return Err(Error::Config(format!(
            "ry has {} angles but rz has {}",
            angles.ry.len(),
            angles.rz.len()
        )));
    }
    let mut state = StateVector::zero_state(angles.ry.len())?;
    let mut ops = Vec::with_capacity(3 * angles.ry.len());
    encoding_ops(angles, &mut ops);
    state.apply_all(&ops)?;
    Ok(state)
}

/// `(control, target)` pairs of one entangling sublayer, in application order.
pub fn entangling_pairs(n_qubits: usize, entangle: Entangle) -> Vec<(usize, usize)> {
    let max_offset = match entangle {
        Entangle::Staircase => n_qubits.saturating_sub(1),
        Entangle::Ring => usize::from(n_qubits > 1),
    };
    let mut pairs = Vec::new();
    for r in 1..=max_offset {
        for i in 0..n_qubits {
            pairs.push((i, (i + r) % n_qubits));
        }
    }
    pairs
}

fn ansatz_ops<T: Scalar>(params: &VqcParams<T>, ops: &mut Vec<GateOp<T>>) {
    let shape = params.shape;
    let pairs = entangling_pairs(shape.n_qubits, shape.entangle);
    for layer in 0..shape.n_qlayers {
        ops.extend(
            pairs
                .iter()
                .map(|&(control, target)| GateOp::Cnot { control, target }),
        );
        for q in 0..shape.n_qubits {
            for r in 0..shape.n_vrotations {
                ops.push(GateOp::rotation(r, q, params.angle(layer, q, r)));
            }
        }
    }
}

pub fn apply_ansatz<T: Scalar>(
    mut state: StateVector<T>,
    params: &VqcParams<T>,
) -> Result<StateVector<T>> {
    if state.n_qubits() != params.shape.n_qubits {
        return Err(Error::Config(format!(
            "state has {} qubits but the ansatz expects {}",
            state.n_qubits(),
            params.shape.n_qubits
        )));
    }
    let mut ops = Vec::new();
    ansatz_ops(params, &mut ops);
    state.apply_all(&ops)?;
    Ok(state)
}

/// Full gate list for one evaluation. Encoding rotations come first
/// (`RY`/`RZ` of qubit `q` at `3q + 1` / `3q + 2`), followed by the ansatz.
struct Circuit<T> {
    ops: Vec<GateOp<T>>,
    /// Op index of every ansatz angle, in `VqcParams` order.
    param_ops: Vec<usize>,
}

impl<T: Scalar> Circuit<T> {
    fn build(features: &[T], params: &VqcParams<T>) -> Result<Self> {
        let n = params.shape.n_qubits;
        if features.len() != n {
            return Err(Error::Config(format!(
                "circuit has {n} qubits but received {} features",
                features.len()
            )));
        }
        let angles = encode_features(features)?;
        let mut ops = Vec::with_capacity(3 * n + params.shape.n_qlayers * n * n);
        encoding_ops(&angles, &mut ops);
        ansatz_ops(params, &mut ops);
        let mut param_ops = vec![0; params.angles.len()];
        let mut k = 0;
        for (idx, op) in ops.iter().enumerate().skip(3 * n) {
            if op.angle().is_some() {
                param_ops[k] = idx;
                k += 1;
            }
        }
        debug_assert_eq!(k, param_ops.len());
        Ok(Self { ops, param_ops })
    }

    fn run(&self, n_qubits: usize) -> Result<StateVector<T>> {
        let mut state = StateVector::zero_state(n_qubits)?;
        state.apply_all(&self.ops)?;
        Ok(state)
    }
}

pub fn vqc_forward<T: Scalar>(features: &[T], params: &VqcParams<T>) -> Result<Vec<T>> {
    let circuit = Circuit::build(features, params)?;
    Ok(circuit.run(params.shape.n_qubits)?.expectation_z_all())
}

/// Outputs of one circuit evaluation together with their Jacobians.
#[derive(Clone, Debug, PartialEq)]
pub struct VqcGradient<T> {
    pub outputs: Vec<T>,
    /// `[n_qubits x n_params]`, row = measured qubit.
    pub d_params: Vec<T>,
    /// `[n_qubits x n_qubits]`, row = measured qubit, column = feature.
    pub d_features: Vec<T>,
    n_qubits: usize,
    n_params: usize,
}

impl<T: Scalar> VqcGradient<T> {
    pub fn d_param(&self, output: usize, param: usize) -> T {
        self.d_params[output * self.n_params + param]
    }

    pub fn d_feature(&self, output: usize, feature: usize) -> T {
        self.d_features[output * self.n_qubits + feature]
    }

    /// Accumulates `J_params^T * upstream` into `params_grad` and
    /// `J_features^T * upstream` into `features_grad`.
    pub fn backprop(&self, upstream: &[T], params_grad: &mut [T], features_grad: &mut [T]) {
        for (o, &g) in upstream.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let prow = &self.d_params[o * self.n_params..(o + 1) * self.n_params];
            for (acc, &d) in params_grad.iter_mut().zip(prow) {
                *acc += g * d;
            }
            let frow = &self.d_features[o * self.n_qubits..(o + 1) * self.n_qubits];
            for (acc, &d) in features_grad.iter_mut().zip(frow) {
                *acc += g * d;
            }
        }
    }
}

/// Parameter-shift derivatives of every `<Z_i>` with respect to the ansatz
/// angles and, through the arctan encodings, the input features.
pub fn vqc_gradient<T: Scalar>(features: &[T], params: &VqcParams<T>) -> Result<VqcGradient<T>> {
    let n = params.shape.n_qubits;
    let circuit = Circuit::build(features, params)?;
    let ops = &circuit.ops;

    // States just before every op; shifted runs restart from these.
    let mut prefixes = Vec::with_capacity(ops.len());
    let mut state = StateVector::zero_state(n)?;
    for op in ops {
        prefixes.push(state.clone());
        state.apply(op)?;
    }
    let outputs = state.expectation_z_all();

    let shift = T::FRAC_PI_2();
    let half = T::lit(0.5);
    let shifted_derivative = |k: usize| -> Vec<T> {
        let theta = ops[k].angle().expect("rotation gate");
        let run = |angle: T| {
            let mut s = prefixes[k].clone();
            s.apply_unchecked(&ops[k].with_angle(angle));
            for op in &ops[k + 1..] {
                s.apply_unchecked(op);
            }
            s.expectation_z_all()
        };
        let plus = run(theta + shift);
        let minus = run(theta - shift);
        plus.iter().zip(&minus).map(|(p, m)| (*p - *m) * half).collect()
    };

    let n_params = circuit.param_ops.len();
    let mut d_params = vec![T::zero(); n * n_params];
    for (p, &k) in circuit.param_ops.iter().enumerate() {
        for (o, d) in shifted_derivative(k).into_iter().enumerate() {
            d_params[o * n_params + p] = d;
        }
    }

    let mut d_features = vec![T::zero(); n * n];
    for (j, &x) in features.iter().enumerate() {
        let d_ry = shifted_derivative(3 * j + 1);
        let d_rz = shifted_derivative(3 * j + 2);
        let x2 = x * x;
        let dry_dx = T::one() / (T::one() + x2);
        let drz_dx = (x + x) / (T::one() + x2 * x2);
        for o in 0..n {
            d_features[o * n + j] = d_ry[o] * dry_dx + d_rz[o] * drz_dx;
        }
    }

    Ok(VqcGradient {
        outputs,
        d_params,
        d_features,
        n_qubits: n,
        n_params,
    })
}
