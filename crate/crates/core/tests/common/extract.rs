//! Converts library values into the plain arrays the oracles work on.

use qsf_core::recurrent::{LstmCellParams, QlstmCellParams, QuantumBlock};
use qsf_core::statevec::GateOp;
use qsf_core::vqc::{Entangle, VqcShape};

use super::cells::{BlockRaw, LstmRaw, QlstmRaw};
use super::dense::{self, Shape};

pub fn gate_matrix(g: &GateOp<f64>, n: usize) -> dense::Mat {
    match *g {
        GateOp::H(q) => dense::embed(&dense::h(), q, n),
        GateOp::Rx(q, t) => dense::embed(&dense::rx(t), q, n),
        GateOp::Ry(q, t) => dense::embed(&dense::ry(t), q, n),
        GateOp::Rz(q, t) => dense::embed(&dense::rz(t), q, n),
        GateOp::Cnot { control, target } => dense::cnot(control, target, n),
    }
}

pub fn shape(s: &VqcShape) -> Shape {
    Shape {
        n: s.n_qubits,
        layers: s.n_qlayers,
        rotations: s.n_vrotations,
        ring: s.entangle == Entangle::Ring,
    }
}

pub fn lstm_raw(p: &LstmCellParams<f64>) -> LstmRaw {
    let gates = [&p.forget, &p.input, &p.update, &p.output];
    LstmRaw {
        w: gates.map(|g| g.weight.clone()),
        b: gates.map(|g| g.bias.clone()),
    }
}

fn block_raw(b: &QuantumBlock<f64>) -> BlockRaw {
    BlockRaw {
        w_in: b.proj_in.weight.clone(),
        b_in: b.proj_in.bias.clone(),
        angles: b.vqc.angles().to_vec(),
        w_out: b.proj_out.weight.clone(),
        b_out: b.proj_out.bias.clone(),
    }
}

pub fn qlstm_raw(p: &QlstmCellParams<f64>) -> QlstmRaw {
    QlstmRaw {
        shape: shape(&p.config().shape),
        w_in: p.input_proj.weight.clone(),
        b_in: p.input_proj.bias.clone(),
        angles: [0, 1, 2, 3].map(|g| p.gate_vqcs[g].angles().to_vec()),
        w_out: p.out_proj.iter().map(|l| l.weight.clone()).collect(),
        b_out: p.out_proj.iter().map(|l| l.bias.clone()).collect(),
        hidden_block: p.hidden_block.as_ref().map(block_raw),
        output_block: p.output_block.as_ref().map(block_raw),
    }
}
