//! Scalar arc recursions for the two endpoint walks.
//!
//! These never touch the block density operator; they exist so the
//! superoperator engine can be checked against the classical persistent
//! random walk (`p = 1`) and the unitary quantum walk (`p = 0`).

use crate::coin::Coin;
use crate::distribution::{Distribution, MASS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, ZERO};

/// Initial arc weights at the origin for the persistent walk:
/// `left = ψ₀(0, −1)`, `right = ψ₀(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcWeights {
    pub left: f64,
    pub right: f64,
}

impl ArcWeights {
    /// The persistent-walk state matched to a density block:
    /// `(⟨−|ρ₀|−⟩, ⟨+|ρ₀|+⟩)`.
    pub fn matched(coin: &Coin, rho0: &Mat2) -> Self {
        let form = |u: [C64; 2]| -> f64 {
            let mut acc = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    acc += u[i] * rho0.0[i][j] * u[j].conj();
                }
            }
            acc.re
        };
        ArcWeights {
            left: form(coin.bra_minus()),
            right: form(coin.bra_plus()),
        }
    }
}

/// Initial arc amplitudes at the origin for the quantum walk:
/// `left = ψ₀(1, 0)` (chirality L), `right = ψ₀(−1, 0)` (chirality R).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcAmplitudes {
    pub left: C64,
    pub right: C64,
}

impl ArcAmplitudes {
    pub fn new(left: C64, right: C64) -> Self {
        ArcAmplitudes { left, right }
    }

    /// `|ψ₀⟩⟨ψ₀|`.
    pub fn density(&self) -> Mat2 {
        let v = [self.left, self.right];
        let mut m = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }
}

/// Persistent random walk on arcs:
///
/// ```text
/// ψ'(x, x−1) = s ψ(x+1, x) + (1−s) ψ(x−1, x)
/// ψ'(x, x+1) = (1−s) ψ(x+1, x) + s ψ(x−1, x)
/// ```
///
/// with `s = stay_prob`, and `μ(x) = ψ(x, x−1) + ψ(x, x+1)`.
pub fn persistent_rw_reference(
    stay_prob: f64,
    t: usize,
    initial: ArcWeights,
) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&stay_prob) {
        return Err(Error::InvalidParameter(format!(
            "stay probability {stay_prob} outside [0, 1]"
        )));
    }
    let flip = 1.0 - stay_prob;
    // index x + span, with one guard cell on each side
    let span = t as i64 + 1;
    let width = (2 * span + 1) as usize;
    let idx = |x: i64| (x + span) as usize;
    // left[x] = ψ(x, x−1), right[x] = ψ(x, x+1)
    let mut left = vec![0.0; width];
    let mut right = vec![0.0; width];
    left[idx(0)] = initial.left;
    right[idx(0)] = initial.right;
    for _ in 0..t {
        let mut nl = vec![0.0; width];
        let mut nr = vec![0.0; width];
        for x in -(span - 1)..=(span - 1) {
            let from_right = left[idx(x + 1)]; // ψ(x+1, x)
            let from_left = right[idx(x - 1)]; // ψ(x−1, x)
            nl[idx(x)] = stay_prob * from_right + flip * from_left;
            nr[idx(x)] = flip * from_right + stay_prob * from_left;
        }
        left = nl;
        right = nr;
    }
    let probs = (0..=t)
        .map(|j| {
            let x = 2 * j as i64 - t as i64;
            left[idx(x)] + right[idx(x)]
        })
        .collect();
    Distribution::new(t, probs)
}

/// Quantum walk on arcs:
///
/// ```text
/// ψ'(x+1, x) = a ψ(x+2, x+1) + b ψ(x, x+1)
/// ψ'(x−1, x) = c ψ(x, x−1) + d ψ(x−2, x−1)
/// ```
///
/// and `μ(x) = |ψ(x+1, x)|² + |ψ(x−1, x)|²`.
pub fn pure_qw_reference(coin: &Coin, t: usize, initial: ArcAmplitudes) -> Result<Distribution> {
    let norm0 = initial.left.norm_sqr() + initial.right.norm_sqr();
    if (norm0 - 1.0).abs() > MASS_TOL {
        return Err(Error::NormDrift {
            step: 0,
            drift: (norm0 - 1.0).abs(),
        });
    }
    let span = t as i64 + 1;
    let width = (2 * span + 1) as usize;
    let idx = |x: i64| (x + span) as usize;
    // into_left[x] = ψ(x+1, x), into_right[x] = ψ(x−1, x)
    let mut into_left = vec![ZERO; width];
    let mut into_right = vec![ZERO; width];
    into_left[idx(0)] = initial.left;
    into_right[idx(0)] = initial.right;
    for step in 1..=t {
        let mut nl = vec![ZERO; width];
        let mut nr = vec![ZERO; width];
        for x in -(span - 1)..=(span - 1) {
            // ψ(x+2, x+1) = into_left[x+1], ψ(x, x+1) = into_right[x+1]
            nl[idx(x)] = coin.a * into_left[idx(x + 1)] + coin.b * into_right[idx(x + 1)];
            // ψ(x, x−1) = into_left[x−1], ψ(x−2, x−1) = into_right[x−1]
            nr[idx(x)] = coin.c * into_left[idx(x - 1)] + coin.d * into_right[idx(x - 1)];
        }
        into_left = nl;
        into_right = nr;
        let norm: f64 = into_left
            .iter()
            .chain(&into_right)
            .map(|z| z.norm_sqr())
            .sum();
        if (norm - 1.0).abs() > MASS_TOL {
            return Err(Error::NormDrift {
                step,
                drift: (norm - 1.0).abs(),
            });
        }
    }
    let probs = (0..=t)
        .map(|j| {
            let x = 2 * j as i64 - t as i64;
            into_left[idx(x)].norm_sqr() + into_right[idx(x)].norm_sqr()
        })
        .collect();
    Distribution::new(t, probs)
}
