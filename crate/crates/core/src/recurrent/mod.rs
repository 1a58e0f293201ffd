//! Classical LSTM and quantum QLSTM cells and the two-layer forecasting stack.

mod lstm;
mod qlstm;
mod stack;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vqc::{VqcShape, MAX_VQC_QUBITS};

pub use lstm::{lstm_cell_step, LstmCellParams};
pub use qlstm::{qlstm_cell_output, qlstm_cell_step, QlstmCellParams, QuantumBlock, GATE_NAMES};
pub use stack::{stack_forward, CellParams, Mode, StackModel, StackParams};


/// Recurrent state carried between timesteps.
#[derive(Clone, Debug, PartialEq)]
pub struct CellState<T> {
    pub h: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> CellState<T> {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![T::zero(); hidden],
            c: vec![T::zero(); hidden],
        }
    }
}

/// Number of variational circuits per QLSTM cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VqcMode {
    /// forget/input/update/output circuits, classical `h = o * tanh(c)`.
    #[default]
    Four,
    /// Adds a circuit on the hidden path and one on the cell output.
    Six,
}

/// How measured qubit expectations are lifted back to the hidden size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    #[default]
    PerGate,
    Shared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub shape: VqcShape,
    #[serde(default)]
    pub mode: VqcMode,
    #[serde(default)]
    pub projection: ProjectionMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelKind {
    Classical,
    Quantum(QuantumConfig),
}

impl ModelKind {
    pub fn is_quantum(&self) -> bool {
        matches!(self, ModelKind::Quantum(_))
    }
}

/// Architecture of a forecasting stack: `n_layers` recurrent layers, each
/// followed by dropout, then a linear read-out of the last timestep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub n_layers: usize,
    pub n_features: usize,
    pub hidden: usize,
    pub window: usize,
    pub dropout: f64,
    pub model_kind: ModelKind,
}

pub const MAX_LAYERS: usize = 2;

impl StackConfig {
    pub fn classical(n_features: usize, hidden: usize, window: usize) -> Self {
        Self {
            n_layers: 2,
            n_features,
            hidden,
            window,
            dropout: 0.2,
            model_kind: ModelKind::Classical,
        }
    }

    pub fn quantum(n_features: usize, hidden: usize, window: usize, shape: VqcShape) -> Self {
        Self {
            model_kind: ModelKind::Quantum(QuantumConfig {
                shape,
                mode: VqcMode::Four,
                projection: ProjectionMode::PerGate,
            }),
            ..Self::classical(n_features, hidden, window)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers > MAX_LAYERS {
            return Err(Error::Config(format!(
                "at most {MAX_LAYERS} recurrent layers are supported, got {}",
                self.n_layers
            )));
        }
        if self.n_features == 0 || self.hidden == 0 || self.window == 0 {
            return Err(Error::Config(
                "n_features, hidden and window must all be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        if let ModelKind::Quantum(q) = &self.model_kind {
            q.shape.validate()?;
            if q.shape.n_qubits < 2 {
                return Err(Error::Config(format!(
                    "QLSTM circuits need 2..={MAX_VQC_QUBITS} qubits, got {}",
                    q.shape.n_qubits
                )));
            }
        }
        Ok(())
    }

    /// Width of the vector fed to the read-out layer.
    pub fn readout_width(&self) -> usize {
        if self.n_layers == 0 {
            self.n_features
        } else {
            self.hidden
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let shape = VqcShape::new(2, 1, 3).unwrap();
        assert!(StackConfig::quantum(3, 4, 8, shape).validate().is_ok());
        let mut c = StackConfig::classical(3, 4, 8);
        c.dropout = 1.0;
        assert!(c.validate().is_err());
        c.dropout = 0.2;
        c.n_layers = 3;
        assert!(c.validate().is_err());
        let one = VqcShape::new(1, 1, 3).unwrap();
        assert!(StackConfig::quantum(3, 4, 8, one).validate().is_err());
    }

    #[test]
    fn config_serde_roundtrip() {
        let shape = VqcShape::new(3, 2, 3).unwrap();
        let c = StackConfig::quantum(5, 6, 8, shape);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<StackConfig>(&s).unwrap(), c);
    }
}
