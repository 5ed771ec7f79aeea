//! Fourier-space generator of the vectorized channel.
//!
//! Vectorizing `ρ(x, y)` as `Σ_{ij} ρ_ij(x, y) |ij⟩` in the basis
//! `(LL, LR, RL, RR)` (index `2i + j`) and transforming `x → k`, `y → l`
//! turns one step of `L_p` into multiplication by the 4×4 matrix
//!
//! ```text
//! Ĥ_p(k, l) = e^{−i(k+l)} P⊗P̄ + e^{i(k+l)} Q⊗Q̄
//!           + q (e^{−i(k−l)} P⊗Q̄ + e^{i(k−l)} Q⊗P̄).
//! ```
//!
//! The characteristic function of `X_t` is the diagonal `k + l = ξ` of the
//! transformed `ρ_t`, traced over chirality and averaged over `k`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::coin::{Coin, WalkParams};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::linalg::{kron, Mat4, C64, ZERO};

pub const DEFAULT_NK: usize = 256;

/// The four Kronecker pieces of `Ĥ_p`; phase-independent, so built once.
#[derive(Clone, Copy, Debug)]
pub struct KronPieces {
    pub pp: Mat4,
    pub qq: Mat4,
    pub pq: Mat4,
    pub qp: Mat4,
}

impl KronPieces {
    pub fn new(coin: &Coin) -> Self {
        let (p, q) = coin.projectors();
        let (pc, qc) = (p.conj(), q.conj());
        KronPieces {
            pp: kron(&p, &pc),
            qq: kron(&q, &qc),
            pq: kron(&p, &qc),
            qp: kron(&q, &pc),
        }
    }

    pub fn assemble(&self, q: f64, k: f64, l: f64) -> Mat4 {
        let e = |phase: f64| C64::from_polar(1.0, phase);
        self.pp.scale(e(-(k + l)))
            + self.qq.scale(e(k + l))
            + (self.pq.scale(e(-(k - l))) + self.qp.scale(e(k - l))).scale(C64::new(q, 0.0))
    }
}

/// `Ĥ_p(k, l)`.
pub fn hat_h(params: &WalkParams, k: f64, l: f64) -> Mat4 {
    KronPieces::new(&params.coin).assemble(params.q(), k, l)
}

/// `ρ⃗₀ = (|LL⟩ + |RR⟩)/2`, the transform of `δ₀ I₂/2`.
pub fn mixed_initial() -> [C64; 4] {
    let h = C64::new(0.5, 0.0);
    [h, ZERO, ZERO, h]
}

/// `E[e^{iξX_t}]` by the `n_k`-node periodic trapezoid of
/// `(⟨LL| + ⟨RR|) Ĥ_p^t(ξ−k, k) ρ⃗₀`.
///
/// The integrand is a trigonometric polynomial of degree `t` in `k`, so the
/// rule is exact up to rounding once `n_k > 2t`.
pub fn char_fn(params: &WalkParams, t: usize, xi: f64, n_k: usize) -> Result<C64> {
    char_fn_from(params, t, xi, n_k, mixed_initial())
}

/// [`char_fn`] for a constant-in-`k` initial vector `ρ⃗₀` (a state supported
/// at the origin).
pub fn char_fn_from(
    params: &WalkParams,
    t: usize,
    xi: f64,
    n_k: usize,
    rho0: [C64; 4],
) -> Result<C64> {
    if n_k < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_k = {n_k}: need at least two quadrature nodes"
        )));
    }
    let pieces = KronPieces::new(&params.coin);
    let q = params.q();
    let sum: C64 = (0..n_k)
        .into_par_iter()
        .map(|j| {
            let k = TAU * j as f64 / n_k as f64;
            let h = pieces.assemble(q, xi - k, k);
            let mut v = rho0;
            for _ in 0..t {
                v = h.mul_vec(&v);
            }
            v[0] + v[3]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(sum / n_k as f64)
}

/// `Σ_x μ(x) e^{iξx}`.
pub fn char_fn_of(dist: &Distribution, xi: f64) -> C64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, p) in dist.iter() {
        let (s, c) = (xi * x as f64).sin_cos();
        re += p * c;
        im += p * s;
    }
    C64::new(re, im)
}

/// `Σ_x μ(x) e^{iξx/scale}`, the characteristic function of `X/scale`.
pub fn char_fn_scaled(dist: &Distribution, xi: f64, scale: f64) -> C64 {
    char_fn_of(dist, xi / scale)
}

/// `count` evenly spaced points on `[start, stop]` (both ends included).
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::evolution::evolve;

    fn params(p: f64) -> WalkParams {
        WalkParams::new(Coin::hadamard(), p).unwrap()
    }

    #[test]
    fn unitary_at_p_zero() {
        let coin = Coin::from_stay_prob(0.3, 0.4, 1.1).unwrap();
        let wp = WalkParams::new(coin, 0.0).unwrap();
        for (k, l) in [(0.0, 0.0), (0.3, -1.2), (2.0, 5.0)] {
            assert!(hat_h(&wp, k, l).unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn interference_blocks_vanish_at_p_one() {
        let wp = params(1.0);
        let pieces = KronPieces::new(&wp.coin);
        let h = hat_h(&wp, 0.4, 0.9);
        let e = |ph: f64| C64::from_polar(1.0, ph);
        let expect = pieces.pp.scale(e(-1.3)) + pieces.qq.scale(e(1.3));
        assert!((h - expect).max_abs() < 1e-15);
    }

    #[test]
    fn phases_drop_out_at_origin() {
        let wp = params(0.3);
        let pc = KronPieces::new(&wp.coin);
        let expect = pc.pp + pc.qq + (pc.pq + pc.qp).scale(C64::new(0.7, 0.0));
        assert!((hat_h(&wp, 0.0, 0.0) - expect).max_abs() < 1e-15);
    }

    #[test]
    fn one_step_is_cosine() {
        for p in [0.0, 0.5, 1.0] {
            for xi in [0.3, 1.0, 2.5] {
                let v = char_fn(&params(p), 1, xi, 16).unwrap();
                assert!((v - C64::new(xi.cos(), 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_at_zero() {
        let v = char_fn(&params(0.4), 17, 0.0, DEFAULT_NK).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn agrees_with_exact_distribution() {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let wp = params(p);
            let mu = evolve(&wp, 12).unwrap();
            for xi in [0.1, -1.0, FRAC_PI_2] {
                let a = char_fn(&wp, 12, xi, DEFAULT_NK).unwrap();
                assert!((a - char_fn_of(&mu, xi)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn direct_sum_basics() {
        let mu = Distribution::from_points(1, &[(-1, 0.5), (1, 0.5)]).unwrap();
        let v = char_fn_of(&mu, 0.8);
        assert!((v.re - 0.8f64.cos()).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert_eq!(char_fn_of(&Distribution::delta_origin(), 3.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_single_node() {
        assert!(char_fn(&params(0.5), 3, 1.0, 1).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
