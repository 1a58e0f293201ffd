//! Seeded random inputs and small datasets.

use qsf_core::datapipe::{fit_scaler, make_windows, synth_solar, transform, SynthConfig, WindowedDataset};
use qsf_core::statevec::GateOp;
use qsf_core::vqc::{Entangle, VqcParams, VqcShape};
use qsf_core::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::Shape;
use super::extract;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Overwrites every parameter with a uniform draw from `(-scale, scale)`.
pub fn randomize<P: Params<f64>>(p: &mut P, r: &mut ChaCha8Rng, scale: f64) {
    for (_, t) in p.named_tensors_mut() {
        for v in t.iter_mut() {
            *v = r.random_range(-scale..scale);
        }
    }
}

pub fn random_gate(r: &mut impl Rng, n: usize) -> GateOp<f64> {
    let q = r.random_range(0..n);
    let t = r.random_range(-6.0..6.0);
    match r.random_range(0..5) {
        0 => GateOp::H(q),
        1 => GateOp::Rx(q, t),
        2 => GateOp::Ry(q, t),
        3 => GateOp::Rz(q, t),
        _ if n > 1 => {
            let target = (q + r.random_range(1..n)) % n;
            GateOp::Cnot { control: q, target }
        }
        _ => GateOp::H(q),
    }
}

/// Random features, angles and shape with up to `max_qubits` qubits and
/// `max_layers` layers; ring wiring with probability 0.3.
pub fn random_vqc(r: &mut impl Rng, max_qubits: usize, max_layers: usize) -> (Vec<f64>, VqcParams<f64>, Shape) {
    let n = r.random_range(1..=max_qubits);
    let layers = r.random_range(1..=max_layers);
    let rotations = r.random_range(1..=4);
    let mut shape = VqcShape::new(n, layers, rotations).unwrap();
    if r.random_bool(0.3) {
        shape = shape.with_entangle(Entangle::Ring);
    }
    let angles: Vec<f64> = (0..shape.n_params()).map(|_| r.random_range(-3.2..3.2)).collect();
    let features: Vec<f64> = (0..n).map(|_| r.random_range(-2.5..2.5)).collect();
    let params = VqcParams::from_angles(shape, angles).unwrap();
    (features, params, extract::shape(&shape))
}

/// Scaled windows over one synthetic day at 30-minute resolution, with
/// power, irradiance and temperature as features.
pub fn tiny_dataset(window: usize) -> WindowedDataset {
    let frame = synth_solar(&SynthConfig {
        days: 1,
        step_minutes: 30,
        ..Default::default()
    })
    .unwrap()
    .select(&["power_mw", "dhi", "temperature"])
    .unwrap();
    let scaler = fit_scaler(&frame);
    make_windows(&transform(&frame, &scaler).unwrap(), window, "power_mw")
        .unwrap()
        .with_scaler(scaler)
}
