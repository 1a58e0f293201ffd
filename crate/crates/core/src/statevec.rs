//! Dense statevector simulator.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Gates are
//! applied in place over strided amplitude pairs; no `2^n x 2^n` matrix is
//! ever built here.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    RX,
    RY,
    RZ,
    CNOT,
}

/// One gate of the supported set. Rotation angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp<T> {
    H(usize),
    Rx(usize, T),
    Ry(usize, T),
    Rz(usize, T),
    Cnot { control: usize, target: usize },
}

impl<T: Scalar> GateOp<T> {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::H(_) => GateKind::H,
            GateOp::Rx(..) => GateKind::RX,
            GateOp::Ry(..) => GateKind::RY,
            GateOp::Rz(..) => GateKind::RZ,
            GateOp::Cnot { .. } => GateKind::CNOT,
        }
    }

    pub fn angle(&self) -> Option<T> {
        match *self {
            GateOp::Rx(_, a) | GateOp::Ry(_, a) | GateOp::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    /// Same gate with its rotation angle replaced; non-rotations are returned unchanged.
    pub fn with_angle(self, angle: T) -> Self {
        match self {
            GateOp::Rx(q, _) => GateOp::Rx(q, angle),
            GateOp::Ry(q, _) => GateOp::Ry(q, angle),
            GateOp::Rz(q, _) => GateOp::Rz(q, angle),
            other => other,
        }
    }

    /// Rotation about `axis` (`0 = X`, `1 = Y`, `2 = Z`).
    pub fn rotation(axis: usize, qubit: usize, angle: T) -> Self {
        match axis % 3 {
            0 => GateOp::Rx(qubit, angle),
            1 => GateOp::Ry(qubit, angle),
            _ => GateOp::Rz(qubit, angle),
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match *self {
            GateOp::H(q) | GateOp::Rx(q, _) | GateOp::Ry(q, _) | GateOp::Rz(q, _) => vec![q],
            GateOp::Cnot { control, target } => vec![control, target],
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.targets() {
            if q >= n_qubits {
                return Err(Error::Index(format!(
                    "gate {:?} targets qubit {q} but the register has {n_qubits} qubits",
                    self.kind()
                )));
            }
        }
        if let GateOp::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::Index(format!(
                    "CNOT control and target are both qubit {control}"
                )));
            }
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::Config(format!(
                    "{:?} angle is not finite",
                    self.kind()
                )));
            }
        }
        Ok(())
    }
}

/// `2^n` complex amplitudes of an n-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "n_qubits must be within 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

impl<T: Scalar> StateVector<T> {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index>`; bit `q` of `index` is qubit `q`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Index(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes, checking the length and the norm (to within 1e-6).
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::Config(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Consumes the state and returns it transformed by `gate`.
    pub fn apply_gate(mut self, gate: &GateOp<T>) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    pub fn apply_all<'a, I>(&mut self, gates: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a GateOp<T>>,
    {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &GateOp<T>) {
        let half = T::lit(0.5);
        match *gate {
            GateOp::H(q) => {
                let s = T::FRAC_1_SQRT_2();
                self.for_each_pair(q, |a0, a1| ((a0 + a1) * s, (a0 - a1) * s));
            }
            GateOp::Rx(q, theta) => {
                let (sin, cos) = (theta * half).sin_cos();
                // -i sin
                let mis = Complex::new(T::zero(), -sin);
                self.for_each_pair(q, |a0, a1| (a0 * cos + a1 * mis, a0 * mis + a1 * cos));
            }
            GateOp::Ry(q, theta) => {
                let (sin, cos) = (theta * half).sin_cos();
                self.for_each_pair(q, |a0, a1| (a0 * cos - a1 * sin, a0 * sin + a1 * cos));
            }
            GateOp::Rz(q, theta) => {
                let (sin, cos) = (theta * half).sin_cos();
                let p0 = Complex::new(cos, -sin);
                let p1 = Complex::new(cos, sin);
                self.for_each_pair(q, |a0, a1| (a0 * p0, a1 * p1));
            }
            GateOp::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amplitudes.swap(i, i | tbit);
                    }
                }
            }
        }
    }

    fn for_each_pair<F>(&mut self, qubit: usize, f: F)
    where
        F: Fn(Complex<T>, Complex<T>) -> (Complex<T>, Complex<T>),
    {
        let stride = 1usize << qubit;
        let dim = self.amplitudes.len();
        let mut block = 0;
        while block < dim {
            for i in block..block + stride {
                let j = i + stride;
                let (b0, b1) = f(self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = b0;
                self.amplitudes[j] = b1;
            }
            block += 2 * stride;
        }
    }

    /// Exact `<Z>` of one qubit.
    pub fn expectation_z(&self, qubit: usize) -> Result<T> {
        if qubit >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(self.expectation_z_unchecked(qubit))
    }

    fn expectation_z_unchecked(&self, qubit: usize) -> T {
        let bit = 1usize << qubit;
        let mut acc = T::zero();
        for (b, a) in self.amplitudes.iter().enumerate() {
            if b & bit == 0 {
                acc += a.norm_sqr();
            } else {
                acc -= a.norm_sqr();
            }
        }
        acc
    }

    /// `<Z_i>` for every qubit, in qubit order.
    pub fn expectation_z_all(&self) -> Vec<T> {
        (0..self.n_qubits)
            .map(|q| self.expectation_z_unchecked(q))
            .collect()
    }
}
