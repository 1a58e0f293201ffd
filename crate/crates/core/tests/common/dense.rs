//! Dense matrix simulator: every gate becomes a full 2^n x 2^n unitary built
//! from Kronecker products, qubit 0 being the least-significant index bit.

use num_complex::Complex;

pub type C = Complex<f64>;

#[derive(Clone, Debug)]
pub struct Mat {
    pub dim: usize,
    pub data: Vec<C>,
}

impl Mat {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            data[k * dim + k] = C::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn from2(m: [[C; 2]; 2]) -> Self {
        Self {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim + c]
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let dim = self.dim * other.dim;
        let mut data = vec![C::new(0.0, 0.0); dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.at(r1, c1);
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        data[(r1 * other.dim + r2) * dim + c1 * other.dim + c2] = a * other.at(r2, c2);
                    }
                }
            }
        }
        Mat { dim, data }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.at(r, c) * v[c]).sum())
            .collect()
    }
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn h() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from2([[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
}

pub fn rx(t: f64) -> Mat {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    Mat::from2([[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
}

pub fn ry(t: f64) -> Mat {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    Mat::from2([[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
}

pub fn rz(t: f64) -> Mat {
    Mat::from2([
        [C::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
        [c(0.0, 0.0), C::from_polar(1.0, t / 2.0)],
    ])
}

pub fn rotation(axis: usize, t: f64) -> Mat {
    match axis % 3 {
        0 => rx(t),
        1 => ry(t),
        _ => rz(t),
    }
}

/// `I ⊗ .. ⊗ g ⊗ .. ⊗ I` with `g` on `qubit`; the leftmost factor is the
/// highest qubit.
pub fn embed(g: &Mat, qubit: usize, n: usize) -> Mat {
    let id = Mat::identity(2);
    let mut m = Mat::identity(1);
    for k in (0..n).rev() {
        m = m.kron(if k == qubit { g } else { &id });
    }
    m
}

/// `|0><0|_control ⊗ I + |1><1|_control ⊗ X_target`.
pub fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let p0 = Mat::from2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
    let p1 = Mat::from2([[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    let x = Mat::from2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    let id = Mat::identity(2);
    let term = |on_control: &Mat, on_target: &Mat| {
        let mut m = Mat::identity(1);
        for k in (0..n).rev() {
            let f = if k == control {
                on_control
            } else if k == target {
                on_target
            } else {
                &id
            };
            m = m.kron(f);
        }
        m
    };
    term(&p0, &id).add(&term(&p1, &x))
}

pub fn zero_state(n: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    v
}

pub fn expect_z(v: &[C], qubit: usize) -> f64 {
    v.iter()
        .enumerate()
        .map(|(b, a)| if b >> qubit & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// Shape of a circuit for [`vqc`].
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub n: usize,
    pub layers: usize,
    pub rotations: usize,
    pub ring: bool,
}

/// H, RY(atan x), RZ(atan x^2) per qubit, then per layer CNOT(i, i+r mod n)
/// for every offset r and qubit i, then RX/RY/RZ cycling rotations per qubit.
/// Angles are indexed `[layer][qubit][rotation]`.
pub fn vqc(features: &[f64], angles: &[f64], s: Shape) -> Vec<f64> {
    let n = s.n;
    let mut v = zero_state(n);
    for (q, &x) in features.iter().enumerate() {
        v = embed(&h(), q, n).apply(&v);
        v = embed(&ry(x.atan()), q, n).apply(&v);
        v = embed(&rz((x * x).atan()), q, n).apply(&v);
    }
    let max_offset = if s.ring { usize::from(n > 1) } else { n - 1 };
    for l in 0..s.layers {
        for r in 1..=max_offset {
            for i in 0..n {
                v = cnot(i, (i + r) % n, n).apply(&v);
            }
        }
        for q in 0..n {
            for k in 0..s.rotations {
                let t = angles[(l * n + q) * s.rotations + k];
                v = embed(&rotation(k, t), q, n).apply(&v);
            }
        }
    }
    (0..n).map(|q| expect_z(&v, q)).collect()
}
