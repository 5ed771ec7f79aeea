use crate::distribution::Distribution;
use crate::error::{Error, Result};

use super::ArcsineMixture;

/// Piecewise-constant density of `X_t/√t`: height `(√t/2) μ_t(x)` on
/// `((x−1)/√t, (x+1)/√t]` for every parity site `x`.
///
/// Neighbouring parity sites are two apart, so the plateaus tile
/// `(−(t+1)/√t, (t+1)/√t]` without overlap. `t = 0` uses scale 1.
#[derive(Clone, Debug)]
pub struct StepDensity {
    t: usize,
    scale: f64,
    /// `(x, μ(x))` in increasing `x`.
    sites: Vec<(i64, f64)>,
}

impl StepDensity {
    pub fn new(dist: &Distribution) -> Self {
        let t = dist.t();
        StepDensity {
            t,
            scale: if t == 0 { 1.0 } else { (t as f64).sqrt() },
            sites: dist.iter().collect(),
        }
    }

    /// From raw `(x, μ(x))` pairs; odd-parity mass is an error.
    pub fn from_points(t: usize, points: &[(i64, f64)]) -> Result<Self> {
        for &(x, p) in points {
            if (x + t as i64).rem_euclid(2) != 0 && p != 0.0 {
                return Err(Error::ParityViolation { x, t });
            }
        }
        Ok(Self::new(&Distribution::from_points(t, points)?))
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn height(&self, prob: f64) -> f64 {
        0.5 * self.scale * prob
    }

    /// `(x/√t, f_t)` at each plateau center.
    pub fn plateaus(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sites
            .iter()
            .map(|&(x, p)| (x as f64 / self.scale, self.height(p)))
    }

    pub fn value(&self, y: f64) -> f64 {
        let ys = y * self.scale;
        self.sites
            .iter()
            .find(|&&(x, _)| (x as f64) - 1.0 < ys && ys <= (x as f64) + 1.0)
            .map_or(0.0, |&(_, p)| self.height(p))
    }

    pub fn integral(&self) -> f64 {
        self.sites.iter().map(|&(_, p)| self.height(p) * 2.0 / self.scale).sum()
    }

    /// `(b, F_t(b))` at every plateau edge, left to right.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.sites.len() + 1);
        let mut acc = 0.0;
        if let Some(&(x0, _)) = self.sites.first() {
            out.push(((x0 as f64 - 1.0) / self.scale, 0.0));
        }
        for &(x, p) in &self.sites {
            acc += p;
            out.push(((x as f64 + 1.0) / self.scale, acc));
        }
        out
    }
}

/// `sup |F_t − F_*|` over the plateau edges of the step density.
pub fn ks_distance(dist: &Distribution, mixture: &ArcsineMixture) -> f64 {
    StepDensity::new(dist)
        .breakpoints()
        .iter()
        .map(|&(b, ft)| (ft - mixture.cdf(b)).abs())
        .fold(0.0, f64::max)
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_samples(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_unit_plateau() {
        let s = StepDensity::new(&Distribution::delta_origin());
        assert_eq!(s.scale(), 1.0);
        assert_eq!(s.value(0.0), 0.5);
        assert_eq!(s.value(1.0), 0.5);
        assert_eq!(s.value(-1.0), 0.0);
        assert!((s.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plateaus_tile_without_overlap() {
        let mu = Distribution::from_points(4, &[(-4, 0.1), (-2, 0.2), (0, 0.3), (2, 0.25), (4, 0.15)]).unwrap();
        let s = StepDensity::new(&mu);
        assert!((s.integral() - 1.0).abs() < 1e-12);
        assert_eq!(s.value(0.0), 0.3);
        assert_eq!(s.value(2.5 / 2.0), 0.25);
        assert_eq!(s.value(2.6), 0.0);
        let bp = s.breakpoints();
        assert_eq!(bp.first().unwrap().0, -2.5);
        assert!((bp.last().unwrap().1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_parity_rejected() {
        assert!(matches!(
            StepDensity::from_points(2, &[(1, 0.5), (0, 0.5)]),
            Err(Error::ParityViolation { x: 1, t: 2 })
        ));
    }

    #[test]
    fn binned_limit_has_small_ks() {
        let m = ArcsineMixture::new(0.5, 1.0).unwrap();
        let t = 400usize;
        let s = (t as f64).sqrt();
        let points: Vec<(i64, f64)> = (0..=t)
            .map(|j| {
                let x = 2 * j as i64 - t as i64;
                let lo = if j == 0 { f64::NEG_INFINITY } else { (x as f64 - 1.0) / s };
                let hi = if j == t { f64::INFINITY } else { (x as f64 + 1.0) / s };
                (x, m.cdf(hi) - m.cdf(lo))
            })
            .collect();
        let mu = Distribution::from_points(t, &points).unwrap();
        assert!(ks_distance(&mu, &m) < 1e-12);
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_samples(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
    }
}
