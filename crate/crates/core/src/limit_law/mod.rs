//! The diffusive limit law: `X_t/√t ⇒ σZ` with `σ²` arcsine-distributed on
//! `(A, B) = (r(1−q)/(1+q), r(1+q)/(1−q))`, `r = |a|²/|b|²`.
//!
//! Everything is computed in the angle `l`, where
//! `σ²(l) = r(1 + q² − 2q cos 2l)/(1 − q²)` with `l` uniform on the circle
//! has law `ν`. The trapezoid rule in `l` is spectrally accurate and never
//! sees the inverse-square-root endpoints of `ν(du)`.

pub mod normal;
pub mod quadrature;
mod step;

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, TAU};

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::coin::WalkParams;
use crate::error::{Error, Result};

pub use step::{ks_distance, ks_samples, StepDensity};

pub const DEFAULT_NL: usize = 512;
pub const KRONROD_TOL: f64 = 1e-9;
pub const DISAGREEMENT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcsineMixture {
    q: f64,
    r: f64,
    a: f64,
    b: f64,
    n_l: usize,
}

/// `(r(1−q)/(1+q), r(1+q)/(1−q))`.
pub fn support(q: f64, r: f64) -> Result<(f64, f64)> {
    let m = ArcsineMixture::new(q, r)?;
    Ok(m.support())
}

impl ArcsineMixture {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::EndpointRegime { q });
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance ratio {r} must be positive and finite"
            )));
        }
        Ok(ArcsineMixture {
            q,
            r,
            a: r * (1.0 - q) / (1.0 + q),
            b: r * (1.0 + q) / (1.0 - q),
            n_l: DEFAULT_NL,
        })
    }

    pub fn from_params(params: &WalkParams) -> Result<Self> {
        let r = params.coin.limit_ratio()?;
        Self::new(params.q(), r)
    }

    pub fn with_nodes(mut self, n_l: usize) -> Result<Self> {
        if n_l < 2 {
            return Err(Error::InvalidParameter(format!("n_l = {n_l}: need at least two nodes")));
        }
        self.n_l = n_l;
        Ok(self)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Mean of `ν`, the limiting `Var(X_t/√t)`.
    pub fn mean_variance(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn sigma_sq(&self, l: f64) -> f64 {
        let q = self.q;
        self.r * (1.0 + q * q - 2.0 * q * (2.0 * l).cos()) / (1.0 - q * q)
    }

    /// `1/(π√((u−A)(B−u)))` on `(A, B)`, zero outside, `+∞` at the endpoints.
    pub fn nu_density(&self, u: f64) -> f64 {
        if u < self.a || u > self.b {
            0.0
        } else if u == self.a || u == self.b {
            f64::INFINITY
        } else {
            1.0 / (PI * ((u - self.a) * (self.b - u)).sqrt())
        }
    }

    /// `u(θ) = A + (B − A) sin²θ`, which carries `ν(du)` to `(2/π) dθ` on
    /// `[0, π/2]`.
    fn u_of(&self, theta: f64) -> f64 {
        self.a + (self.b - self.a) * theta.sin().powi(2)
    }

    /// `∫ g(u) ν(du)` by adaptive Gauss-Kronrod on the `θ` form, with the
    /// Jacobian `du/dθ` formed from [`Self::nu_density`] itself.
    pub fn nu_expect_kronrod(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let w = self.b - self.a;
        let q = quadrature::integrate(
            |theta| {
                let u = self.u_of(theta);
                let jac = 2.0 * w * theta.sin() * theta.cos();
                if jac == 0.0 {
                    // the density's pole cancels the vanishing Jacobian
                    return g(u) * FRAC_2_PI;
                }
                g(u) * self.nu_density(u) * jac
            },
            0.0,
            FRAC_PI_2,
            KRONROD_TOL,
        )?;
        Ok(q.value)
    }

    /// `∫ g(σ²(l)) dl/2π` by the periodic trapezoid.
    pub fn l_average(&self, g: impl Fn(f64) -> f64) -> f64 {
        let n = self.n_l;
        (0..n)
            .map(|j| g(self.sigma_sq(TAU * j as f64 / n as f64)))
            .sum::<f64>()
            / n as f64
    }

    /// Mixed-normal density `f_*(x) = ∫ φ(x; σ²(l)) dl/2π`.
    pub fn f_star(&self, x: f64) -> f64 {
        self.l_average(|v| normal::pdf(x, v))
    }

    /// `f_*` by the `u`-form and Gauss-Kronrod.
    pub fn f_star_kronrod(&self, x: f64) -> Result<f64> {
        self.nu_expect_kronrod(|u| normal::pdf(x, u))
    }

    /// `f_*` with the two quadrature routes cross-checked.
    pub fn f_star_checked(&self, x: f64) -> Result<f64> {
        let trapezoid = self.f_star(x);
        let kronrod = self.f_star_kronrod(x)?;
        if (trapezoid - kronrod).abs() > DISAGREEMENT_TOL {
            return Err(Error::QuadratureDisagreement {
                x,
                trapezoid,
                kronrod,
            });
        }
        Ok(trapezoid)
    }

    /// `F_*(x) = ∫ Φ(x/σ(l)) dl/2π`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.l_average(|v| normal::cdf(x / v.sqrt()))
    }

    /// `∫ e^{−σ²(l)ξ²/2} dl/2π`.
    pub fn char_fn(&self, xi: f64) -> f64 {
        self.l_average(|v| (-0.5 * v * xi * xi).exp())
    }

    /// One draw of `σ(l) Z` with `l` uniform and `Z` standard normal.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let l = TAU * rng.random::<f64>();
        let z: f64 = rng.sample(StandardNormal);
        self.sigma_sq(l).sqrt() * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::coin::Coin;

    fn half() -> ArcsineMixture {
        ArcsineMixture::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn support_of_half() {
        let (a, b) = half().support();
        assert!((a - 1.0 / 3.0).abs() < 1e-15 && (b - 3.0).abs() < 1e-15);
        assert!((half().mean_variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!((half().sigma_sq(0.0) - a).abs() < 1e-15);
        assert!((half().sigma_sq(FRAC_PI_2) - b).abs() < 1e-14);
    }

    #[test]
    fn support_collapses_as_q_vanishes() {
        let (a, b) = support(1e-9, 2.0).unwrap();
        assert!((a - 2.0).abs() < 1e-8 && (b - 2.0).abs() < 1e-8);
    }

    #[test]
    fn endpoint_regimes_rejected() {
        assert!(matches!(support(0.0, 1.0), Err(Error::EndpointRegime { .. })));
        assert!(matches!(support(1.0, 1.0), Err(Error::EndpointRegime { .. })));
        let id = WalkParams::new(Coin::identity(), 0.5).unwrap();
        assert!(matches!(
            ArcsineMixture::from_params(&id),
            Err(Error::DegenerateCoin { .. })
        ));
    }

    #[test]
    fn nu_density_values() {
        let m = half();
        let mid = m.nu_density(5.0 / 3.0);
        assert!((mid - 3.0 / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(m.nu_density(0.2), 0.0);
        assert_eq!(m.nu_density(3.5), 0.0);
        assert!(m.nu_density(3.0).is_infinite());
        assert!((m.nu_expect_kronrod(|_| 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((m.nu_expect_kronrod(|u| u).unwrap() - 5.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn dual_quadrature_agrees() {
        let m = half();
        for x in [0.0, 0.5, 1.7, 4.0] {
            m.f_star_checked(x).unwrap();
        }
    }

    #[test]
    fn cdf_symmetry() {
        let m = ArcsineMixture::new(0.3, 0.7).unwrap();
        assert!((m.cdf(0.0) - 0.5).abs() < 1e-12);
        for x in [0.2, 1.0, 3.0] {
            assert!((m.cdf(x) + m.cdf(-x) - 1.0).abs() < 1e-10);
            assert!((m.f_star(x) - m.f_star(-x)).abs() < 1e-12);
        }
        assert!(m.cdf(-50.0) < 1e-12 && m.cdf(50.0) > 1.0 - 1e-12);
    }

    #[test]
    fn sampler_is_centered() {
        let m = half();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = m.sample(&mut rng, 20_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 4.0 * sd / n.sqrt());
    }
}
