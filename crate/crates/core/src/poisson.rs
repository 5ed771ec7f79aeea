//! Ballistic regime `p = γ/s`: the `s → ∞` characteristic function of
//! `X_s/s`.
//!
//! With `cos θ(k) = |a| cos k`, `α = |a| sin k / sin θ`, `β = (1 − α²)/2` and
//! `Δ = √(β²γ² − α²ξ²)` (principal branch), the limit is
//!
//! ```text
//! ∫ e^{−βγ} (cosh Δ + βγ sinh Δ / Δ) dk/2π,
//! ```
//!
//! which is `∫ cos(ξα) dk/2π` at `γ = 0` and tends to 1 as `γ → ∞`. The rate
//! is called `gamma` throughout (some texts write it `λ`).

use std::f64::consts::TAU;

use serde::Serialize;

use crate::coin::{Coin, WalkParams};
use crate::distribution::Distribution;
use crate::engine::{EngineOptions, EngineRegistry};
use crate::error::{Error, Result};
use crate::fourier::char_fn_scaled;
use crate::linalg::{eigenvalues, Mat, Mat2, C64};

pub const DEFAULT_NK: usize = 1024;
pub const IMAG_TOL: f64 = 1e-10;
pub const REDUCED_EIG_TOL: f64 = 1e-12;

/// Coins this close to a permutation or the identity are rejected.
const DEGENERACY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dispersion {
    pub k: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn checked_abs_a(coin: &Coin) -> Result<f64> {
    let abs_a = coin.abs_a();
    if abs_a <= DEGENERACY_MARGIN || abs_a >= 1.0 - DEGENERACY_MARGIN {
        return Err(Error::DegenerateCoin { abs_a });
    }
    Ok(abs_a)
}

fn dispersion_at(abs_a: f64, k: f64) -> Dispersion {
    let theta = (abs_a * k.cos()).acos();
    let alpha = abs_a * k.sin() / theta.sin();
    Dispersion {
        k,
        theta,
        alpha,
        beta: 0.5 * (1.0 - alpha * alpha),
    }
}

pub fn dispersion(coin: &Coin, k: f64) -> Result<Dispersion> {
    Ok(dispersion_at(checked_abs_a(coin)?, k))
}

/// `(k_j, θ, α, β)` on `n` uniform nodes of `[0, 2π)`.
pub fn dispersion_table(coin: &Coin, n: usize) -> Result<Vec<Dispersion>> {
    let abs_a = checked_abs_a(coin)?;
    Ok((0..n)
        .map(|j| dispersion_at(abs_a, TAU * j as f64 / n as f64))
        .collect())
}

/// `sinh z / z`, continued to 1 at the origin.
fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-6 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

fn delta(d: &Dispersion, gamma: f64, xi: f64) -> C64 {
    let bg = d.beta * gamma;
    C64::new(bg * bg - d.alpha * d.alpha * xi * xi, 0.0).sqrt()
}

/// Integrand `e^{−βγ}(cosh Δ + βγ sinh Δ/Δ)` at one `k`.
pub fn integrand(d: &Dispersion, gamma: f64, xi: f64) -> C64 {
    let bg = d.beta * gamma;
    let dl = delta(d, gamma, xi);
    (-bg).exp() * (dl.cosh() + bg * sinhc(dl))
}

/// The two-branch form with weights `1 ± Δ/(βγ)`; kept for comparison.
/// Requires `γ > 0`.
pub fn integrand_swapped_weights(d: &Dispersion, gamma: f64, xi: f64) -> C64 {
    let bg = d.beta * gamma;
    let dl = delta(d, gamma, xi);
    0.5 * (dl - bg).exp() * (1.0 + dl / bg) + 0.5 * (-bg - dl).exp() * (1.0 - dl / bg)
}

fn check_nodes(n_k: usize) -> Result<()> {
    if n_k < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_k = {n_k}: need at least two quadrature nodes"
        )));
    }
    Ok(())
}

fn trapezoid(coin: &Coin, n_k: usize, f: impl Fn(&Dispersion) -> C64) -> Result<C64> {
    check_nodes(n_k)?;
    let abs_a = checked_abs_a(coin)?;
    let sum: C64 = (0..n_k)
        .map(|j| f(&dispersion_at(abs_a, TAU * j as f64 / n_k as f64)))
        .sum();
    Ok(sum / n_k as f64)
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidual { value: z.im });
    }
    Ok(z.re)
}

/// Limiting `E[e^{iξX_s/s}]` under `p = γ/s`.
pub fn prop3_char_fn(coin: &Coin, gamma: f64, xi: f64, n_k: usize) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be finite and ≥ 0")));
    }
    real_part(trapezoid(coin, n_k, |d| integrand(d, gamma, xi))?)
}

/// [`prop3_char_fn`] with the weights `1 ± Δ/(βγ)` instead of
/// `1 ± βγ/Δ`. Diverges as `γ → 0`.
pub fn prop3_char_fn_swapped_weights(coin: &Coin, gamma: f64, xi: f64, n_k: usize) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be finite and > 0")));
    }
    real_part(trapezoid(coin, n_k, |d| integrand_swapped_weights(d, gamma, xi))?)
}

/// `½∫(e^{iξα} + e^{−iξα}) dk/2π`, the unitary ballistic limit.
pub fn qw_limit_char_fn(coin: &Coin, xi: f64, n_k: usize) -> Result<f64> {
    real_part(trapezoid(coin, n_k, |d| C64::new((xi * d.alpha).cos(), 0.0))?)
}

/// `M = [[−iαξ − βγ, βγ], [βγ, iαξ − βγ]]`, whose eigenvalues are the
/// first-order splittings `−βγ ± Δ`.
pub fn reduced_matrix(d: &Dispersion, gamma: f64, xi: f64) -> Mat2 {
    let bg = C64::new(d.beta * gamma, 0.0);
    let ax = C64::new(0.0, d.alpha * xi);
    Mat([[-ax - bg, bg], [bg, ax - bg]])
}

/// Largest distance between the eigenvalues of [`reduced_matrix`] and
/// `−βγ ± Δ`, matched greedily.
pub fn reduced_eigen_deviation(d: &Dispersion, gamma: f64, xi: f64) -> Result<f64> {
    let ev = eigenvalues(&reduced_matrix(d, gamma, xi))?;
    let bg = d.beta * gamma;
    let dl = delta(d, gamma, xi);
    let (plus, minus) = (C64::new(-bg, 0.0) + dl, C64::new(-bg, 0.0) - dl);
    let direct = (ev[0] - plus).norm().max((ev[1] - minus).norm());
    let swapped = (ev[0] - minus).norm().max((ev[1] - plus).norm());
    Ok(direct.min(swapped))
}

pub fn check_reduced_eigenvalues(coin: &Coin, k: f64, gamma: f64, xi: f64) -> Result<f64> {
    let d = dispersion(coin, k)?;
    let dev = reduced_eigen_deviation(&d, gamma, xi)?;
    let scale = 1.0f64.max(d.beta * gamma).max((d.alpha * xi).abs());
    if dev > REDUCED_EIG_TOL * scale {
        return Err(Error::LemmaViolation(format!(
            "reduced 2×2 spectrum off by {dev:.3e} at k = {k}, γ = {gamma}, ξ = {xi}"
        )));
    }
    Ok(dev)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComparisonRow {
    pub xi: f64,
    pub sim: C64,
    pub formula: f64,
    pub abs_diff: f64,
}

/// `Σ μ_s(x) e^{iξx/s}` against the limit formula on a `ξ` grid.
pub fn compare_distribution(
    coin: &Coin,
    gamma: f64,
    dist: &Distribution,
    xi_grid: &[f64],
    n_k: usize,
) -> Result<Vec<ComparisonRow>> {
    let s = dist.t().max(1) as f64;
    xi_grid
        .iter()
        .map(|&xi| {
            let sim = char_fn_scaled(dist, xi, s);
            let formula = prop3_char_fn(coin, gamma, xi, n_k)?;
            Ok(ComparisonRow {
                xi,
                sim,
                formula,
                abs_diff: (sim - C64::new(formula, 0.0)).norm(),
            })
        })
        .collect()
}

pub fn sup_diff(rows: &[ComparisonRow]) -> f64 {
    rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct SimComparison {
    pub s: usize,
    pub p: f64,
    pub engine: &'static str,
    pub dist: Distribution,
    pub rows: Vec<ComparisonRow>,
    pub sup_diff: f64,
}

/// For each `s`, simulates `p = γ/s` with the named engine and compares the
/// characteristic function of `X_s/s` with the limit.
pub fn compare_sim(
    coin: &Coin,
    gamma: f64,
    s_list: &[usize],
    xi_grid: &[f64],
    registry: &EngineRegistry,
    engine: &str,
    opts: &EngineOptions,
    n_k: usize,
) -> Result<Vec<SimComparison>> {
    s_list
        .iter()
        .map(|&s| {
            if s == 0 || gamma > s as f64 {
                return Err(Error::InvalidParameter(format!(
                    "p = gamma/s = {gamma}/{s} is not a probability"
                )));
            }
            let p = gamma / s as f64;
            let params = WalkParams::new(*coin, p)?;
            let out = registry.run(engine, &params, s, opts)?;
            let rows = compare_distribution(coin, gamma, &out.dist, xi_grid, n_k)?;
            Ok(SimComparison {
                s,
                p,
                engine: out.engine,
                sup_diff: sup_diff(&rows),
                dist: out.dist,
                rows,
            })
        })
        .collect()
}

/// Central bump of a ballistic profile.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Protrusion {
    /// Smoothing window, in parity sites.
    pub window: usize,
    /// Position and height of the smoothed maximum over `|x| ≤ s/10`.
    pub peak_x: i64,
    pub peak: f64,
    /// Smoothed minimum over `s/10 < |x| ≤ s/4`.
    pub trough: f64,
    /// Peak strictly inside the central band and above the trough.
    pub present: bool,
}

/// Moving average of `μ` over `2w + 1` parity sites, then the central
/// maximum against the flanking minimum.
pub fn protrusion(dist: &Distribution) -> Protrusion {
    let s = dist.t() as f64;
    let probs = dist.probs();
    let n = probs.len();
    let w = (dist.t() / 200).max(1);
    let smooth: Vec<f64> = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(w);
            let hi = (j + w).min(n - 1);
            probs[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let (inner, outer) = (s / 10.0, s / 4.0);
    let mut peak = (0i64, f64::NEG_INFINITY);
    let mut trough = f64::INFINITY;
    for (j, &v) in smooth.iter().enumerate() {
        let x = dist.position(j);
        let ax = x.abs() as f64;
        if ax <= inner && v > peak.1 {
            peak = (x, v);
        } else if ax > inner && ax <= outer {
            trough = trough.min(v);
        }
    }
    let interior = (peak.0.abs() as f64) < inner - 2.0 * w as f64;
    Protrusion {
        window: w,
        peak_x: peak.0,
        peak: peak.1,
        trough,
        present: interior && peak.1 > trough,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    use super::*;

    #[test]
    fn dispersion_special_points() {
        let h = Coin::hadamard();
        let d = dispersion(&h, FRAC_PI_2).unwrap();
        assert!((d.theta - FRAC_PI_2).abs() < 1e-15);
        assert!((d.alpha - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((d.beta - 0.25).abs() < 1e-15);
        let d = dispersion(&h, 0.0).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert_eq!(d.beta, 0.5);
        let d = dispersion(&h, FRAC_PI_4).unwrap();
        assert!((d.theta - FRAC_PI_3).abs() < 1e-15);
        assert!((d.alpha - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_coins_rejected() {
        assert!(matches!(
            dispersion(&Coin::identity(), 0.3),
            Err(Error::DegenerateCoin { .. })
        ));
    }

    #[test]
    fn unit_at_origin() {
        for gamma in [0.0, 0.3, 1.0, 20.0] {
            let v = prop3_char_fn(&Coin::hadamard(), gamma, 0.0, 256).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_zero_is_quantum_limit() {
        let h = Coin::hadamard();
        for xi in [-3.0, 0.5, 7.0] {
            let a = prop3_char_fn(&h, 0.0, xi, 512).unwrap();
            let b = qw_limit_char_fn(&h, xi, 512).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn large_rate_is_nearly_degenerate() {
        let h = Coin::hadamard();
        for xi in [-2.0, -1.0, 0.5, 2.0] {
            assert!((prop3_char_fn(&h, 100.0, xi, 512).unwrap() - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn swapped_weights_differ() {
        let h = Coin::hadamard();
        let a = prop3_char_fn(&h, 1.0, 3.0, 512).unwrap();
        let b = prop3_char_fn_swapped_weights(&h, 1.0, 3.0, 512).unwrap();
        assert!((a - 0.187_382_142_462_928_7).abs() < 1e-9);
        assert!((b + 3.140_353_625_501_516_5).abs() < 1e-9);
    }

    #[test]
    fn reduced_spectrum() {
        let h = Coin::hadamard();
        for (k, gamma, xi) in [(0.4, 1.0, 2.0), (1.3, 0.5, 0.1), (2.2, 3.0, 10.0)] {
            check_reduced_eigenvalues(&h, k, gamma, xi).unwrap();
        }
    }

    #[test]
    fn protrusion_on_synthetic_profile() {
        let t = 400usize;
        let points: Vec<(i64, f64)> = (0..=t)
            .map(|j| {
                let x = 2 * j as i64 - t as i64;
                let xf = x as f64 / t as f64;
                (x, 1.0 + 4.0 * xf * xf + 3.0 * (-(xf * 40.0).powi(2)).exp())
            })
            .collect();
        let total: f64 = points.iter().map(|p| p.1).sum();
        let points: Vec<_> = points.iter().map(|&(x, p)| (x, p / total)).collect();
        let pr = protrusion(&Distribution::from_points(t, &points).unwrap());
        assert!(pr.present, "{pr:?}");
        assert_eq!(pr.peak_x, 0);
    }
}
