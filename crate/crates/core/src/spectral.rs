//! Spectrum of the unperturbed generator `T = Ĥ_p(−k, k)` and the
//! second-order splitting of its eigenvalue 1 under `ξ → εξ`.

use serde::Serialize;

use crate::coin::WalkParams;
use crate::error::{Error, Result};
use crate::fourier::{hat_h, KronPieces};
use crate::linalg::{eigenvalues, Mat4, C64, ONE, ZERO};

/// Below this distance between 1 and the next eigenvalue of `T`, the
/// perturbative coefficient is not meaningful.
pub const MIN_GAP: f64 = 1e-6;

/// `T = P⊗P̄ + Q⊗Q̄ + q(e^{2ik} P⊗Q̄ + e^{−2ik} Q⊗P̄)`.
pub fn t0(params: &WalkParams, k: f64) -> Mat4 {
    let pc = KronPieces::new(&params.coin);
    let q = C64::new(params.q(), 0.0);
    pc.pp + pc.qq + (pc.pq.scale(C64::from_polar(1.0, 2.0 * k)) + pc.qp.scale(C64::from_polar(1.0, -2.0 * k))).scale(q)
}

/// `D = diag(−1, −1, 1, 1)`: the sign of the shift carried by the left
/// chirality index.
pub fn d_matrix() -> Mat4 {
    let m = C64::new(-1.0, 0.0);
    Mat4::from_diag([m, m, ONE, ONE])
}

/// First-order piece `T⁽¹⁾ = iξ D T`.
pub fn t1(params: &WalkParams, k: f64, xi: f64) -> Mat4 {
    (d_matrix() * t0(params, k)).scale(C64::new(0.0, xi))
}

/// Second-order piece `T⁽²⁾ = −ξ² T / 2`.
pub fn t2(params: &WalkParams, k: f64, xi: f64) -> Mat4 {
    t0(params, k).scale(C64::new(-0.5 * xi * xi, 0.0))
}

pub fn eig4(m: &Mat4) -> Result<[C64; 4]> {
    eigenvalues(m)
}

fn sorted_by_distance_to_one(ev: &[C64; 4]) -> [C64; 4] {
    let mut s = *ev;
    s.sort_by(|a, b| (a - ONE).norm().total_cmp(&(b - ONE).norm()));
    s
}

/// Spectral facts about `T` at one `k`.
#[derive(Clone, Debug, Serialize)]
pub struct Unperturbed {
    pub k: f64,
    pub p: f64,
    /// Sorted by distance to 1.
    pub eigenvalues: [C64; 4],
    /// `‖T e − e‖_∞` for `e = [1, 0, 0, 1]ᵀ`.
    pub eigvec_residual: f64,
    /// Distance from 1 to the second-closest eigenvalue.
    pub gap: f64,
    /// Largest modulus among the three eigenvalues other than 1.
    pub max_other_modulus: f64,
    /// Largest `| |λ| − 1 |` over all four.
    pub max_unimodular_deviation: f64,
}

pub fn analyze_unperturbed(params: &WalkParams, k: f64) -> Result<Unperturbed> {
    let t = t0(params, k);
    let ev = sorted_by_distance_to_one(&eig4(&t)?);
    let e = [ONE, ZERO, ZERO, ONE];
    let te = t.mul_vec(&e);
    let eigvec_residual = te
        .iter()
        .zip(&e)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(Unperturbed {
        k,
        p: params.p(),
        eigenvalues: ev,
        eigvec_residual,
        gap: (ev[1] - ONE).norm(),
        max_other_modulus: ev[1..].iter().map(|z| z.norm()).fold(0.0, f64::max),
        max_unimodular_deviation: ev.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
    })
}

/// Checks the unperturbed spectrum: for `p > 0`, 1 is a simple eigenvalue
/// with eigenvector `[1, 0, 0, 1]ᵀ` and the rest lie inside the unit disc;
/// for `p = 0` all four eigenvalues are unimodular.
pub fn check_unperturbed(params: &WalkParams, k: f64) -> Result<Unperturbed> {
    let u = analyze_unperturbed(params, k)?;
    if u.eigvec_residual > 1e-12 {
        return Err(Error::LemmaViolation(format!(
            "k = {k}: [1,0,0,1] is not fixed by T (residual {:.3e})",
            u.eigvec_residual
        )));
    }
    let nearest = (u.eigenvalues[0] - ONE).norm();
    if nearest > 1e-10 {
        return Err(Error::LemmaViolation(format!(
            "k = {k}: 1 is not an eigenvalue (nearest {})",
            u.eigenvalues[0]
        )));
    }
    if params.p() == 0.0 {
        if u.max_unimodular_deviation > 1e-10 {
            return Err(Error::LemmaViolation(format!(
                "k = {k}, p = 0: eigenvalue off the unit circle by {:.3e}",
                u.max_unimodular_deviation
            )));
        }
    } else {
        if u.gap <= 1e-8 {
            return Err(Error::LemmaViolation(format!(
                "k = {k}: eigenvalue 1 is not simple (next eigenvalue {} at distance {:.3e})",
                u.eigenvalues[1], u.gap
            )));
        }
        if u.max_other_modulus >= 1.0 {
            return Err(Error::LemmaViolation(format!(
                "k = {k}: eigenvalue of modulus {} on or outside the unit circle",
                u.max_other_modulus
            )));
        }
    }
    Ok(u)
}

/// `(r/2)(1 + q² − 2q cos 2l)/(1 − q²) ξ²` with `r = |a|²/|b|²`.
pub fn predicted_coeff(params: &WalkParams, l: f64, xi: f64) -> Result<f64> {
    let r = params.coin.limit_ratio()?;
    let q = params.q();
    if params.p() <= 0.0 {
        return Err(Error::EndpointRegime { q });
    }
    Ok(0.5 * r * (1.0 + q * q - 2.0 * q * (2.0 * l).cos()) / (1.0 - q * q) * xi * xi)
}

/// The `l` at which the prediction for a given `k` is evaluated.
pub fn shifted_l(params: &WalkParams, k: f64) -> f64 {
    k + params.coin.sigma() - params.coin.delta() / 2.0
}

/// The eigenvalue of `T(ε) = Ĥ_p(εξ − k, k)` nearest 1.
pub fn perturbed_eigenvalue(params: &WalkParams, k: f64, xi: f64, eps: f64) -> Result<C64> {
    let ev = sorted_by_distance_to_one(&eig4(&hat_h(params, eps * xi - k, k))?);
    let (d0, d1) = ((ev[0] - ONE).norm(), (ev[1] - ONE).norm());
    if (d1 - d0).abs() <= 1e-12 {
        return Err(Error::EigenvalueAmbiguity {
            first: d0,
            second: d1,
        });
    }
    Ok(ev[0])
}

/// `(1 − Re λ(ε))/ε²`. Carries an `O(ε)` bias from the cubic term.
pub fn measured_coeff_one_sided(params: &WalkParams, k: f64, xi: f64, eps: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let lam = perturbed_eigenvalue(params, k, xi, eps)?;
    Ok((1.0 - lam.re) / (eps * eps))
}

/// `(2 − Re λ(ε) − Re λ(−ε))/(2ε²)`; odd orders cancel, leaving `O(ε²)`.
///
/// At `ξ = 0`, `T(ε) = T` has the eigenvalue 1 exactly and the coefficient
/// is returned as 0 without rounding noise.
pub fn measured_coeff(params: &WalkParams, k: f64, xi: f64, eps: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let plus = perturbed_eigenvalue(params, k, xi, eps)?;
    let minus = perturbed_eigenvalue(params, k, xi, -eps)?;
    Ok((2.0 - plus.re - minus.re) / (2.0 * eps * eps))
}

/// `ε_n = 10⁻² · 2⁻ⁿ`, `n = 0..len`.
pub fn eps_ladder(len: usize) -> Vec<f64> {
    (0..len).map(|n| 1e-2 * 0.5f64.powi(n as i32)).collect()
}

/// `λ(ε)` along the ladder, following the branch that starts nearest 1.
pub fn track_eigenvalue(params: &WalkParams, k: f64, xi: f64, ladder: &[f64]) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(ladder.len());
    let mut prev: Option<C64> = None;
    for &eps in ladder {
        let ev = eig4(&hat_h(params, eps * xi - k, k))?;
        let next = match prev {
            None => perturbed_eigenvalue(params, k, xi, eps)?,
            Some(p) => *ev
                .iter()
                .min_by(|a, b| (*a - p).norm().total_cmp(&(*b - p).norm()))
                .expect("four eigenvalues"),
        };
        out.push(next);
        prev = Some(next);
    }
    Ok(out)
}

/// Least-squares slope and RMS residual of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

pub const DEFAULT_EPS: f64 = 1e-4;
pub const DEFAULT_LADDER_LEN: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub k: f64,
    pub l: f64,
    pub xi: f64,
    pub p: f64,
    pub eps: f64,
    pub unperturbed: Unperturbed,
    pub ladder: Vec<f64>,
    pub samples: Vec<C64>,
    pub measured: f64,
    pub measured_one_sided: f64,
    pub predicted: f64,
    pub rel_err: f64,
    pub richardson_order: f64,
    pub richardson_residual: f64,
    /// Set when the gap of `T` is below [`MIN_GAP`]; the numbers are then
    /// reported but not meaningful.
    pub skipped: bool,
}

pub fn perturbation_report(
    params: &WalkParams,
    k: f64,
    xi: f64,
    eps: f64,
    ladder_len: usize,
) -> Result<PerturbationReport> {
    let unperturbed = analyze_unperturbed(params, k)?;
    let l = shifted_l(params, k);
    let predicted = predicted_coeff(params, l, xi)?;
    let ladder = eps_ladder(ladder_len);
    let skipped = unperturbed.gap < MIN_GAP;
    let (measured, measured_one_sided, samples, order, fit_rms) = if xi == 0.0 {
        (0.0, 0.0, vec![ONE; ladder.len()], f64::NAN, f64::NAN)
    } else {
        let samples = track_eigenvalue(params, k, xi, &ladder)?;
        let resid: Vec<f64> = samples
            .iter()
            .zip(&ladder)
            .map(|(lam, e)| (lam - C64::new(1.0 - e * e * predicted, 0.0)).norm())
            .collect();
        let (order, rms) = loglog_fit(&ladder, &resid);
        (
            measured_coeff(params, k, xi, eps)?,
            measured_coeff_one_sided(params, k, xi, eps)?,
            samples,
            order,
            rms,
        )
    };
    let rel_err = if predicted == 0.0 {
        measured.abs()
    } else {
        (measured - predicted).abs() / predicted.abs()
    };
    Ok(PerturbationReport {
        k,
        l,
        xi,
        p: params.p(),
        eps,
        unperturbed,
        ladder,
        samples,
        measured,
        measured_one_sided,
        predicted,
        rel_err,
        richardson_order: order,
        richardson_residual: fit_rms,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::coin::Coin;

    fn hadamard(p: f64) -> WalkParams {
        WalkParams::new(Coin::hadamard(), p).unwrap()
    }

    #[test]
    fn t0_is_hat_h_on_antidiagonal() {
        let wp = WalkParams::new(Coin::from_stay_prob(0.3, 0.4, 1.1).unwrap(), 0.35).unwrap();
        for k in [0.0, 0.7, 2.9] {
            assert!((t0(&wp, k) - hat_h(&wp, -k, k)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn expansion_pieces_match_to_second_order() {
        let wp = hadamard(0.4);
        let (k, xi, eps) = (0.7, 1.3, 1e-3);
        let approx = t0(&wp, k) + t1(&wp, k, xi).scale(C64::new(eps, 0.0))
            + t2(&wp, k, xi).scale(C64::new(eps * eps, 0.0));
        assert!((hat_h(&wp, eps * xi - k, k) - approx).max_abs() < 1e-8);
    }

    #[test]
    fn fixed_vector_on_sampled_k() {
        for k in [0.1, 1.0, 2.0] {
            let u = check_unperturbed(&hadamard(0.5), k).unwrap();
            assert!(u.max_other_modulus < 1.0);
        }
        let u = check_unperturbed(&hadamard(0.0), 0.4).unwrap();
        assert!(u.max_unimodular_deviation < 1e-10);
    }

    #[test]
    fn predicted_worked_value() {
        let v = predicted_coeff(&hadamard(0.5), FRAC_PI_4, 1.0).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(predicted_coeff(&hadamard(0.5), 0.3, 0.0).unwrap(), 0.0);
        let a = predicted_coeff(&hadamard(0.5), 0.0, 1.0).unwrap();
        let b = predicted_coeff(&hadamard(0.5), PI, 1.0).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn predicted_rejects_pure_quantum_and_degenerate() {
        assert!(predicted_coeff(&hadamard(0.0), 0.2, 1.0).is_err());
        let id = WalkParams::new(Coin::identity(), 0.5).unwrap();
        assert!(matches!(
            predicted_coeff(&id, 0.2, 1.0),
            Err(Error::DegenerateCoin { .. })
        ));
    }

    #[test]
    fn null_perturbation_at_zero_xi() {
        let wp = hadamard(0.5);
        for eps in eps_ladder(4) {
            assert_eq!(measured_coeff(&wp, 0.7, 0.0, eps).unwrap(), 0.0);
            let lam = perturbed_eigenvalue(&wp, 0.7, 0.0, eps).unwrap();
            assert!((lam - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn hadamard_coefficient_converges() {
        let wp = hadamard(0.5);
        let r = perturbation_report(&wp, 0.7, 1.0, DEFAULT_EPS, DEFAULT_LADDER_LEN).unwrap();
        assert!((r.l - (0.7 - FRAC_PI_2)).abs() < 1e-15);
        assert!(r.rel_err < 1e-4, "{r:?}");
        assert!(r.richardson_order > 2.9, "{r:?}");
    }

    #[test]
    fn loglog_slope_of_cube() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        let (s, rms) = loglog_fit(&x, &y);
        assert!((s - 3.0).abs() < 1e-12 && rms < 1e-12);
    }
}
