//! Central finite differences.

pub fn central(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `|a - n| / max(|a|, |n|)`. Pairs where both magnitudes are below
/// `zero_floor` are treated as zero gradients and contribute 0.
pub fn rel_err(analytic: f64, numeric: f64, zero_floor: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < zero_floor {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}
