//! Hybrid quantum-classical solar forecasting toolkit.
//!
//! The numerical core ([`statevec`], [`vqc`], [`recurrent`], [`training`]) is
//! generic over the floating-point type through [`Scalar`]; the data pipeline
//! and the statistics work in `f64`.

pub mod checkpoint;
pub mod datapipe;
pub mod error;
pub mod evalstats;
pub mod linear;
pub mod params;
pub mod recurrent;
pub mod rng;
pub mod scalar;
pub mod statevec;
pub mod training;
pub mod vqc;

pub use error::{Error, Result};
pub use params::Params;
pub use scalar::Scalar;

pub type StateVector = statevec::StateVector<f64>;
pub type StateVectorF32 = statevec::StateVector<f32>;
pub type GateOp = statevec::GateOp<f64>;
pub type VqcParams = vqc::VqcParams<f64>;
pub type LstmCellParams = recurrent::LstmCellParams<f64>;
pub type QlstmCellParams = recurrent::QlstmCellParams<f64>;
pub type CellState = recurrent::CellState<f64>;
pub type Model = recurrent::StackModel<f64>;
pub type ModelF32 = recurrent::StackModel<f32>;
