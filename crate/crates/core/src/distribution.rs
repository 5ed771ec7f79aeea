use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass drift tolerated on a finding-probability vector.
pub const MASS_TOL: f64 = 1e-10;

/// Finding probabilities `μ_t(x)` on the parity sublattice.
///
/// Only sites with `x ≡ t (mod 2)` are stored: `probs[j]` is the mass at
/// `x = −t + 2j`, `j = 0..=t`. Every other site carries exactly zero mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    t: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates length, finiteness, sign (down to −1e-12 roundoff) and total mass.
    pub fn new(t: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != t + 1 {
            return Err(Error::InvalidParameter(format!(
                "distribution at t = {t} needs {} parity sites, got {}",
                t + 1,
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|p| !p.is_finite() || **p < -1e-12) {
            return Err(Error::InvalidParameter(format!("invalid probability {bad}")));
        }
        let dist = Distribution { t, probs };
        let drift = (dist.total() - 1.0).abs();
        if drift > MASS_TOL {
            return Err(Error::TraceDrift { step: t, drift });
        }
        Ok(dist)
    }

    /// From `(x, prob)` pairs, e.g. a CSV read back from disk. Odd-parity
    /// mass above 1e-15 is rejected; missing parity sites are zero.
    pub fn from_points(t: usize, points: &[(i64, f64)]) -> Result<Self> {
        let mut probs = vec![0.0; t + 1];
        for &(x, p) in points {
            let offset = x + t as i64;
            if x.abs() > t as i64 || offset.rem_euclid(2) != 0 {
                if p.abs() > 1e-15 {
                    return Err(Error::ParityViolation { x, t });
                }
                continue;
            }
            probs[(offset / 2) as usize] += p;
        }
        Self::new(t, probs)
    }

    pub fn delta_origin() -> Self {
        Distribution {
            t: 0,
            probs: vec![1.0],
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Parity-site probabilities, leftmost first.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn position(&self, j: usize) -> i64 {
        2 * j as i64 - self.t as i64
    }

    pub fn prob(&self, x: i64) -> f64 {
        let offset = x + self.t as i64;
        if x.abs() > self.t as i64 || offset.rem_euclid(2) != 0 {
            return 0.0;
        }
        self.probs[(offset / 2) as usize]
    }

    /// `(x, μ(x))` over the parity sites.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(j, &p)| (self.position(j), p))
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        neumaier_sum(self.iter().map(|(x, p)| x as f64 * p))
    }

    /// Second central moment.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        neumaier_sum(self.iter().map(|(x, p)| (x as f64 - m).powi(2) * p))
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        let t = self.t.max(other.t) as i64;
        (-t..=t)
            .map(|x| (self.prob(x) - other.prob(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_lookup() {
        let d = Distribution::new(2, vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.prob(-2), 0.25);
        assert_eq!(d.prob(0), 0.5);
        assert_eq!(d.prob(1), 0.0);
        assert_eq!(d.prob(5), 0.0);
        assert!((d.variance() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_drift_and_length() {
        assert!(matches!(
            Distribution::new(1, vec![0.5, 0.6]),
            Err(Error::TraceDrift { .. })
        ));
        assert!(Distribution::new(1, vec![1.0]).is_err());
    }

    #[test]
    fn from_points_checks_parity() {
        let d = Distribution::from_points(1, &[(-1, 0.5), (1, 0.5), (0, 0.0)]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.5]);
        assert!(matches!(
            Distribution::from_points(1, &[(-1, 0.5), (0, 0.5)]),
            Err(Error::ParityViolation { x: 0, t: 1 })
        ));
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((neumaier_sum(v) - 4e-16).abs() < 1e-30);
    }
}
