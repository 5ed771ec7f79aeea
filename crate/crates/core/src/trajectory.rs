//! Pure-state unraveling of `L_p`.
//!
//! Each trajectory starts from `δ₀ ⊗ |L⟩` or `δ₀ ⊗ |R⟩` with equal
//! probability (an exact unraveling of `ρ₀ = I₂/2`) and at every step draws
//! the random-walk channel with probability `p`, the quantum-walk step
//! otherwise. The random-walk channel has Kraus pair
//! `(Aψ)(x) = Pψ(x+1)`, `(Bψ)(x) = Qψ(x−1)`; the quantum-walk step is
//! `A + B`. Averaging `|ψ_t⟩⟨ψ_t|` over trajectories reproduces `ρ_t`.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{Coin, WalkParams};
use crate::distribution::{Distribution, MASS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

const STARVATION: f64 = 1e-14;

/// Trajectories per reduction chunk. Fixed so the reduction tree, and hence
/// every bit of the estimate, does not depend on the worker count.
const CHUNK: usize = 64;

/// Pure walker state on the parity window `x ∈ {−t, …, t}`.
///
/// Chirality `L` of site `j` (position `−t + 2j`) lives at `left[j]`;
/// chirality `R` lives at `right[j + offset]`. A quantum-walk step mixes the
/// pair `(left[j], right[j + offset])` in place with the coin and then
/// decrements `offset`, which realises both shifts without moving data.
#[derive(Clone, Debug)]
pub struct PureState {
    t: usize,
    offset: usize,
    left: Vec<C64>,
    right: Vec<C64>,
}

impl PureState {
    /// `δ₀ ⊗ (l, r)` with room for `horizon` steps.
    pub fn at_origin(l: C64, r: C64, horizon: usize) -> Self {
        let mut s = PureState {
            t: 0,
            offset: horizon,
            left: vec![ZERO; horizon + 1],
            right: vec![ZERO; 2 * horizon + 1],
        };
        s.left[0] = l;
        s.right[horizon] = r;
        s
    }

    fn reset(&mut self, l: C64, r: C64) {
        let horizon = self.left.len() - 1;
        self.left.fill(ZERO);
        self.right.fill(ZERO);
        self.t = 0;
        self.offset = horizon;
        self.left[0] = l;
        self.right[horizon] = r;
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.left.len() - 1
    }

    /// `(ψ_L(x), ψ_R(x))`; zero off the parity window.
    pub fn amplitude(&self, x: i64) -> [C64; 2] {
        let t = self.t as i64;
        let off = x + t;
        if x.abs() > t || off.rem_euclid(2) != 0 {
            return [ZERO; 2];
        }
        let j = (off / 2) as usize;
        [self.left[j], self.right[j + self.offset]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.window().map(|(l, r)| l.norm_sqr() + r.norm_sqr()).sum()
    }

    fn window(&self) -> impl Iterator<Item = (&C64, &C64)> {
        let n = self.t + 1;
        self.left[..n]
            .iter()
            .zip(&self.right[self.offset..self.offset + n])
    }

    /// `‖ψ(x)‖²` over the parity sites.
    pub fn weights(&self) -> Vec<f64> {
        self.window()
            .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
            .collect()
    }

    fn ensure_room(&self) {
        assert!(
            self.t < self.horizon(),
            "pure state horizon {} exhausted",
            self.horizon()
        );
    }

    fn qw_step_unchecked(&mut self, coin: &Coin) {
        self.ensure_room();
        let n = self.t + 1;
        let (a, b, c, d) = (coin.a, coin.b, coin.c, coin.d);
        let right = &mut self.right[self.offset..self.offset + n];
        for (l, r) in self.left[..n].iter_mut().zip(right) {
            let (lv, rv) = (*l, *r);
            *l = a * lv + b * rv;
            *r = c * lv + d * rv;
        }
        self.offset -= 1;
        self.t += 1;
    }

    /// `ψ'(x) = Pψ(x+1) + Qψ(x−1)`.
    pub fn qw_step(&mut self, coin: &Coin) -> Result<()> {
        let before = self.norm_sqr();
        self.qw_step_unchecked(coin);
        let drift = (self.norm_sqr() - before).abs();
        if drift > MASS_TOL {
            return Err(Error::NormDrift {
                step: self.t,
                drift,
            });
        }
        Ok(())
    }

    /// Branch weights `(‖Aψ‖², ‖Bψ‖²)` of the random-walk channel.
    pub fn branch_weights(&self, coin: &Coin) -> (f64, f64) {
        self.window().fold((0.0, 0.0), |(na, nb), (l, r)| {
            (
                na + (coin.a * l + coin.b * r).norm_sqr(),
                nb + (coin.c * l + coin.d * r).norm_sqr(),
            )
        })
    }

    /// Random-walk channel, unraveled: returns `Aψ/‖Aψ‖` with probability
    /// `‖Aψ‖²/(‖Aψ‖² + ‖Bψ‖²)`, else `Bψ/‖Bψ‖`.
    pub fn rw_step<R: Rng + ?Sized>(&mut self, coin: &Coin, rng: &mut R) -> Result<()> {
        self.ensure_room();
        let (na, nb) = self.branch_weights(coin);
        if na < STARVATION && nb < STARVATION {
            return Err(Error::BranchStarved {
                step: self.t + 1,
                norm_a: na,
                norm_b: nb,
            });
        }
        let u: f64 = rng.random();
        let take_a = u * (na + nb) < na;
        let n = self.t + 1;
        let (a, b, c, d) = (coin.a, coin.b, coin.c, coin.d);
        let right = &mut self.right[self.offset..self.offset + n];
        if take_a {
            let scale = 1.0 / na.sqrt();
            for (l, r) in self.left[..n].iter_mut().zip(right) {
                *l = (a * *l + b * *r) * scale;
                *r = ZERO;
            }
        } else {
            let scale = 1.0 / nb.sqrt();
            for (l, r) in self.left[..n].iter_mut().zip(right) {
                *r = (c * *l + d * *r) * scale;
                *l = ZERO;
            }
        }
        self.offset -= 1;
        self.t += 1;
        Ok(())
    }
}

/// One trajectory of `t` steps; returns `‖ψ_t(x)‖²` on the parity sites.
pub fn run_trajectory<R: Rng + ?Sized>(
    params: &WalkParams,
    t: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut state = PureState::at_origin(ZERO, ZERO, t);
    run_into(params, t, rng, &mut state)
}

fn run_into<R: Rng + ?Sized>(
    params: &WalkParams,
    t: usize,
    rng: &mut R,
    state: &mut PureState,
) -> Result<Vec<f64>> {
    run_cached(params, t, rng, state, None)
}

/// Quantum-walk-only prefixes from `δ₀ ⊗ |L⟩` and `δ₀ ⊗ |R⟩`.
///
/// Until its first random-walk step a trajectory is a deterministic
/// function of its initial chirality, so that stretch is computed once and
/// copied. The copied state is the one the direct loop would have produced,
/// bit for bit.
struct QwPrefix {
    /// Window of step `τ` starts at `τ(τ+1)/2`.
    windows: [Vec<(C64, C64)>; 2],
}

/// Prefix caches larger than this are not built.
const PREFIX_CACHE_BYTES: usize = 256 << 20;

impl QwPrefix {
    fn fits(t: usize) -> bool {
        (t + 1)
            .checked_mul(t + 2)
            .and_then(|n| n.checked_mul(std::mem::size_of::<(C64, C64)>()))
            .is_some_and(|bytes| bytes <= PREFIX_CACHE_BYTES)
    }

    fn build(coin: &Coin, t: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        let mut windows = [Vec::new(), Vec::new()];
        for (w, (l, r)) in windows.iter_mut().zip([(one, ZERO), (ZERO, one)]) {
            w.reserve((t + 1) * (t + 2) / 2);
            let mut state = PureState::at_origin(l, r, t);
            loop {
                w.extend(state.window().map(|(l, r)| (*l, *r)));
                if state.t() == t {
                    break;
                }
                state.qw_step_unchecked(coin);
            }
        }
        QwPrefix { windows }
    }

    fn restore(&self, state: &mut PureState, chirality: usize, tau: usize) {
        let horizon = state.horizon();
        state.left.fill(ZERO);
        state.right.fill(ZERO);
        state.t = tau;
        state.offset = horizon - tau;
        let start = tau * (tau + 1) / 2;
        let src = &self.windows[chirality][start..start + tau + 1];
        for (j, &(l, r)) in src.iter().enumerate() {
            state.left[j] = l;
            state.right[state.offset + j] = r;
        }
    }
}

fn run_cached<R: Rng + ?Sized>(
    params: &WalkParams,
    t: usize,
    rng: &mut R,
    state: &mut PureState,
    prefix: Option<&QwPrefix>,
) -> Result<Vec<f64>> {
    let one = C64::new(1.0, 0.0);
    let chirality = if rng.random_bool(0.5) { 0 } else { 1 };
    let p = params.p();
    let mut done = 0;
    match prefix {
        Some(cache) => {
            let mut tau = t;
            for step in 0..t {
                let u: f64 = rng.random();
                if u < p {
                    tau = step;
                    break;
                }
            }
            cache.restore(state, chirality, tau);
            done = tau;
            if tau < t {
                state.rw_step(&params.coin, rng)?;
                done += 1;
            }
        }
        None if chirality == 0 => state.reset(one, ZERO),
        None => state.reset(ZERO, one),
    }
    for _ in done..t {
        let u: f64 = rng.random();
        if u < p {
            state.rw_step(&params.coin, rng)?;
        } else {
            state.qw_step_unchecked(&params.coin);
        }
    }
    let weights = state.weights();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::NormDrift {
            step: t,
            drift: (total - 1.0).abs(),
        });
    }
    Ok(weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub t: usize,
}

impl McConfig {
    pub fn new(n_traj: usize, seed: u64, t: usize) -> Result<Self> {
        if n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
        }
        Ok(McConfig { n_traj, seed, t })
    }
}

/// The RNG stream of trajectory `index`: the master seed with the index as
/// the ChaCha stream id.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running mean and sum of squared deviations, position-wise.
#[derive(Clone, Debug)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let (na, nb) = (a.count as f64, b.count as f64);
        let n = na + nb;
        let mut out = Moments::new(a.mean.len());
        out.count = a.count + b.count;
        for k in 0..a.mean.len() {
            let delta = b.mean[k] - a.mean[k];
            out.mean[k] = a.mean[k] + delta * nb / n;
            out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * na * nb / n;
        }
        out
    }
}

fn pairwise_merge(mut parts: Vec<Moments>) -> Moments {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Moments::merge(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}

/// Monte-Carlo estimate of `μ_t` with position-wise standard errors.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub dist: Distribution,
    /// Sample standard deviation over `√n_traj`, aligned with `dist.probs()`.
    pub stderr: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
}

/// Mean of Rao-Blackwellized trajectory weight vectors.
///
/// Trajectory `i` always uses [`trajectory_rng`]`(seed, i)` and the chunked
/// reduction is merged pairwise in index order, so the output is
/// bit-identical for any rayon pool size.
pub fn mc_distribution(params: &WalkParams, cfg: &McConfig) -> Result<McEstimate> {
    let use_prefix = params.p() < 1.0 && cfg.n_traj >= CHUNK && QwPrefix::fits(cfg.t);
    mc_distribution_with(params, cfg, use_prefix)
}

fn mc_distribution_with(
    params: &WalkParams,
    cfg: &McConfig,
    use_prefix: bool,
) -> Result<McEstimate> {
    let t = cfg.t;
    let prefix = use_prefix.then(|| QwPrefix::build(&params.coin, t));
    let chunks: Vec<(usize, usize)> = (0..cfg.n_traj)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK).min(cfg.n_traj)))
        .collect();
    let parts = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut moments = Moments::new(t + 1);
            let mut state = PureState::at_origin(ZERO, ZERO, t);
            for i in start..end {
                let mut rng = trajectory_rng(cfg.seed, i as u64);
                let w = run_cached(params, t, &mut rng, &mut state, prefix.as_ref())?;
                moments.push(&w);
            }
            Ok(moments)
        })
        .collect::<Result<Vec<_>>>()?;
    let moments = pairwise_merge(parts);
    let n = moments.count as f64;
    let stderr = if moments.count > 1 {
        moments
            .m2
            .iter()
            .map(|s| (s.max(0.0) / (n - 1.0)).sqrt() / n.sqrt())
            .collect()
    } else {
        vec![0.0; t + 1]
    };
    let dist = Distribution::new(t, moments.mean)?;
    Ok(McEstimate {
        dist,
        stderr,
        n_traj: cfg.n_traj,
        seed: cfg.seed,
    })
}
