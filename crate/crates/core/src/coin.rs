//! The 2×2 quantum coin and the scalars derived from it.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Mat2, C64, ZERO};

/// Tolerance on every unitarity residual of an accepted coin.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A validated unitary coin `C = [[a, b], [c, d]]`.
///
/// Two different quantities are both written `r` in the literature on this
/// walk; here they are `stay_prob = |a|²` (probability the persistent walker
/// keeps its direction) and `var_ratio = |a|²/|b|²` (scale of the limiting
/// variance).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coin {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    stay_prob: f64,
    var_ratio: f64,
    sigma: f64,
    delta: f64,
}

fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl Coin {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let entries = [a, b, c, d];
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("coin entries must be finite".into()));
        }
        let m = Mat([[a, b], [c, d]]);
        let residual = m
            .unitarity_residual()
            .max((a.norm_sqr() - d.norm_sqr()).abs())
            .max((b.norm_sqr() - c.norm_sqr()).abs());
        if residual > UNITARITY_TOL {
            return Err(Error::NonUnitary { residual });
        }
        let stay_prob = a.norm_sqr();
        let var_ratio = stay_prob / b.norm_sqr();
        let sigma = if a == ZERO { 0.0 } else { canonical_angle(a.arg()) };
        let delta = canonical_angle((a * d - b * c).arg());
        Ok(Coin {
            a,
            b,
            c,
            d,
            stay_prob,
            var_ratio,
            sigma,
            delta,
        })
    }

    /// `a = b = c = −d = 1/√2`.
    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(h, h, h, -h).expect("Hadamard coin is unitary")
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new(one, ZERO, ZERO, one).expect("identity coin is unitary")
    }

    /// Real-parameter family `[[√s e^{iφ}, √(1−s)], [√(1−s) e^{iχ}, −√s e^{i(χ−φ)}]]`.
    pub fn from_stay_prob(stay_prob: f64, phi: f64, chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&stay_prob) {
            return Err(Error::InvalidParameter(format!(
                "stay probability {stay_prob} outside [0, 1]"
            )));
        }
        let ra = stay_prob.sqrt();
        let rb = (1.0 - stay_prob).sqrt();
        Self::new(
            C64::from_polar(ra, phi),
            C64::new(rb, 0.0),
            C64::from_polar(rb, chi),
            -C64::from_polar(ra, chi - phi),
        )
    }

    /// Eight reals: re/im of a, b, c, d in that order.
    pub fn from_reals(v: [f64; 8]) -> Result<Self> {
        Self::new(
            C64::new(v[0], v[1]),
            C64::new(v[2], v[3]),
            C64::new(v[4], v[5]),
            C64::new(v[6], v[7]),
        )
    }

    pub fn matrix(&self) -> Mat2 {
        Mat([[self.a, self.b], [self.c, self.d]])
    }

    /// `|a|²`.
    pub fn stay_prob(&self) -> f64 {
        self.stay_prob
    }

    /// `|a|²/|b|²`; infinite for `b = 0`.
    pub fn var_ratio(&self) -> f64 {
        self.var_ratio
    }

    /// Phase of `a`, in `[0, 2π)`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Phase of `det C = ad − bc`, in `[0, 2π)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn abs_a(&self) -> f64 {
        self.a.norm()
    }

    /// `|a| ∈ {0, 1}` up to the unitarity tolerance.
    pub fn is_degenerate(&self) -> bool {
        self.stay_prob <= UNITARITY_TOL || self.stay_prob >= 1.0 - UNITARITY_TOL
    }

    /// The variance ratio, rejecting degenerate coins.
    pub fn limit_ratio(&self) -> Result<f64> {
        if self.is_degenerate() {
            Err(Error::DegenerateCoin { abs_a: self.abs_a() })
        } else {
            Ok(self.var_ratio)
        }
    }

    /// `(P, Q)` with `P = [[a, b], [0, 0]]`, `Q = [[0, 0], [c, d]]`.
    pub fn projectors(&self) -> (Mat2, Mat2) {
        (
            Mat([[self.a, self.b], [ZERO, ZERO]]),
            Mat([[ZERO, ZERO], [self.c, self.d]]),
        )
    }

    /// Row vector of `⟨−|`, i.e. `(a, b)`; `P = |L⟩⟨−|`.
    pub fn bra_minus(&self) -> [C64; 2] {
        [self.a, self.b]
    }

    /// Row vector of `⟨+|`, i.e. `(c, d)`; `Q = |R⟩⟨+|`.
    pub fn bra_plus(&self) -> [C64; 2] {
        [self.c, self.d]
    }

    pub fn to_reals(&self) -> [f64; 8] {
        [
            self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re, self.d.im,
        ]
    }
}

impl fmt::Display for Coin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_reals();
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]
        )
    }
}

/// Accepts `hadamard`, `identity`, or eight comma-separated reals.
impl FromStr for Coin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hadamard" => return Ok(Coin::hadamard()),
            "identity" => return Ok(Coin::identity()),
            _ => {}
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("coin '{s}': {e}")))?;
        let reals: [f64; 8] = parts.try_into().map_err(|v: Vec<f64>| {
            Error::InvalidParameter(format!("coin needs 8 reals, got {}", v.len()))
        })?;
        Coin::from_reals(reals)
    }
}

/// Coin plus decoherence probability `p`; the interference strength is `q = 1 − p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub coin: Coin,
    p: f64,
}

impl WalkParams {
    pub fn new(coin: Coin, p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        Ok(WalkParams { coin, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}
