use rayon::prelude::*;

use crate::coin::Coin;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Mat2, C64, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;

/// Block density operator `ρ_t(x, y) ∈ M₂(ℂ)` on the parity square.
///
/// Rows and columns run over `x, y ∈ {−t, −t+2, …, t}`; block `(i, j)` holds
/// `ρ(−t + 2i, −t + 2j)`. Blocks with `x − y` odd are never allocated.
/// Chirality order inside a block is `(L, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    t: usize,
    blocks: Vec<Mat2>,
}

/// Coefficients of the bilinear form `⟨u|ρ|v⟩ = Σ u_i ρ_ij conj(v_j)`.
#[derive(Clone, Copy)]
struct Form([[C64; 2]; 2]);

impl Form {
    fn new(u: [C64; 2], v: [C64; 2]) -> Self {
        let mut w = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                w[i][j] = u[i] * v[j].conj();
            }
        }
        Form(w)
    }

    #[inline(always)]
    fn apply(&self, rho: &Mat2) -> C64 {
        let w = &self.0;
        let r = &rho.0;
        w[0][0] * r[0][0] + w[0][1] * r[0][1] + w[1][0] * r[1][0] + w[1][1] * r[1][1]
    }
}

/// The four sandwiches of the step, reduced to scalars through
/// `P = |L⟩⟨−|` and `Q = |R⟩⟨+|`.
struct StepForms {
    mm: Form,
    pp: Form,
    mp: Form,
    pm: Form,
}

impl StepForms {
    fn new(coin: &Coin) -> Self {
        let (m, p) = (coin.bra_minus(), coin.bra_plus());
        StepForms {
            mm: Form::new(m, m),
            pp: Form::new(p, p),
            mp: Form::new(m, p),
            pm: Form::new(p, m),
        }
    }
}

impl DensityGrid {
    /// `ρ₀(0, 0) = I₂/2`.
    pub fn initial() -> Self {
        Self::at_origin(Mat2::identity().scale(C64::new(0.5, 0.0)))
    }

    pub fn at_origin(rho0: Mat2) -> Self {
        DensityGrid {
            t: 0,
            blocks: vec![rho0],
        }
    }

    /// `ρ(x, y) = |ψ(x)⟩⟨ψ(y)|` for amplitudes on the parity sites of step `t`.
    pub fn from_pure(t: usize, amplitudes: &[[C64; 2]]) -> Result<Self> {
        let n = t + 1;
        if amplitudes.len() != n {
            return Err(Error::InvalidParameter(format!(
                "pure state at t = {t} needs {n} sites, got {}",
                amplitudes.len()
            )));
        }
        let mut blocks = vec![Mat2::zeros(); n * n];
        for (i, u) in amplitudes.iter().enumerate() {
            for (j, v) in amplitudes.iter().enumerate() {
                let b = &mut blocks[i * n + j].0;
                for k in 0..2 {
                    for l in 0..2 {
                        b[k][l] = u[k] * v[l].conj();
                    }
                }
            }
        }
        Ok(DensityGrid { t, blocks })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn side(&self) -> usize {
        self.t + 1
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &Mat2 {
        &self.blocks[i * self.side() + j]
    }

    /// Block at lattice coordinates; zero off the parity square.
    pub fn at(&self, x: i64, y: i64) -> Mat2 {
        let t = self.t as i64;
        let (ox, oy) = (x + t, y + t);
        if x.abs() > t || y.abs() > t || ox.rem_euclid(2) != 0 || oy.rem_euclid(2) != 0 {
            return Mat2::zeros();
        }
        *self.block((ox / 2) as usize, (oy / 2) as usize)
    }

    pub fn blocks(&self) -> &[Mat2] {
        &self.blocks
    }

    /// One step of `(L ρ)(x,y) = Pρ(x+1,y+1)P* + Qρ(x−1,y−1)Q*
    /// + w·[Pρ(x+1,y−1)Q* + Qρ(x−1,y+1)P*]` with interference weight `w`.
    fn step(&self, coin: &Coin, interference: f64) -> DensityGrid {
        let mut out = DensityGrid {
            t: 0,
            blocks: Vec::new(),
        };
        self.step_into(coin, interference, &mut out);
        out
    }

    /// [`Self::step`] writing into `out`, whose allocation is reused.
    /// Every block of `out` is overwritten.
    pub(crate) fn step_into(&self, coin: &Coin, interference: f64, out: &mut DensityGrid) {
        let forms = StepForms::new(coin);
        let n = self.side();
        let m = n + 1;
        let w = C64::new(interference, 0.0);
        let with_interference = interference != 0.0;
        let old = &self.blocks;
        out.t = self.t + 1;
        out.blocks.resize(m * m, Mat2::zeros());
        out.blocks.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            // New site i reads old row i via x+1 and old row i−1 via x−1.
            let upper = (i < n).then(|| &old[i * n..(i + 1) * n]);
            let lower = (i >= 1).then(|| &old[(i - 1) * n..i * n]);
            for (j, block) in row.iter_mut().enumerate() {
                let (mut ll, mut lr, mut rl, mut rr) = (ZERO, ZERO, ZERO, ZERO);
                if let Some(up) = upper {
                    if j < n {
                        ll = forms.mm.apply(&up[j]);
                    }
                    if with_interference && j >= 1 {
                        lr = w * forms.mp.apply(&up[j - 1]);
                    }
                }
                if let Some(lo) = lower {
                    if j >= 1 {
                        rr = forms.pp.apply(&lo[j - 1]);
                    }
                    if with_interference && j < n {
                        rl = w * forms.pm.apply(&lo[j]);
                    }
                }
                *block = Mat([[ll, lr], [rl, rr]]);
            }
        });
    }

    /// `Σ_x tr ρ(x, x)`, real part.
    pub fn trace(&self) -> f64 {
        crate::distribution::neumaier_sum(
            (0..self.side()).map(|i| self.block(i, i).trace().re),
        )
    }

    /// `max |ρ(x,y) − ρ(y,x)*|` entrywise.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.side();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (*self.block(i, j) - self.block(j, i).adjoint()).max_abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue over the diagonal blocks (each Hermitianized).
    pub fn min_diagonal_eigenvalue(&self) -> f64 {
        (0..self.side())
            .map(|i| {
                let b = self.block(i, i).0;
                let (a, d) = (b[0][0].re, b[1][1].re);
                let off = (b[0][1] + b[1][0].conj()) * 0.5;
                0.5 * (a + d) - (0.25 * (a - d).powi(2) + off.norm_sqr()).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Trace, Hermitian symmetry and diagonal positivity at the stated tolerances.
    pub fn check_invariants(&self) -> Result<()> {
        let drift = (self.trace() - 1.0).abs();
        if drift > TRACE_TOL {
            return Err(Error::TraceDrift {
                step: self.t,
                drift,
            });
        }
        let herm = self.hermitian_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvariantViolation {
                what: "Hermitian symmetry",
                step: self.t,
                value: herm,
            });
        }
        let min_eig = self.min_diagonal_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::InvariantViolation {
                what: "diagonal positivity",
                step: self.t,
                value: min_eig,
            });
        }
        Ok(())
    }
}

/// `L^RW`: decoherent (persistent random walk) step.
pub fn apply_rw(grid: &DensityGrid, coin: &Coin) -> DensityGrid {
    grid.step(coin, 0.0)
}

/// `L^QW`: unitary quantum-walk step.
pub fn apply_qw(grid: &DensityGrid, coin: &Coin) -> DensityGrid {
    grid.step(coin, 1.0)
}

/// `L_p = p L^RW + (1−p) L^QW`, evaluated in the direct form where only the
/// interference terms carry the weight `q = 1 − p`.
pub fn apply_interpolated(grid: &DensityGrid, coin: &Coin, p: f64) -> DensityGrid {
    grid.step(coin, 1.0 - p)
}

/// `μ(x) = tr ρ(x, x)`.
pub fn marginal(grid: &DensityGrid) -> Result<Distribution> {
    let probs = (0..grid.side()).map(|i| grid.block(i, i).trace().re).collect();
    Distribution::new(grid.t(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn initial_grid_is_half_identity() {
        let g = DensityGrid::initial();
        assert_eq!(g.t(), 0);
        assert!((g.trace() - 1.0).abs() < 1e-15);
        g.check_invariants().unwrap();
        assert_eq!(marginal(&g).unwrap().probs(), &[1.0]);
    }

    #[test]
    fn first_step_splits_mass_for_any_mode() {
        let coin = Coin::from_stay_prob(0.3, 0.2, 0.9).unwrap();
        for p in [0.0, 0.4, 1.0] {
            let g = apply_interpolated(&DensityGrid::initial(), &coin, p);
            let mu = marginal(&g).unwrap();
            assert!((mu.prob(-1) - 0.5).abs() < 1e-15);
            assert!((mu.prob(1) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_coin_never_mixes() {
        let coin = Coin::identity();
        let mut g = DensityGrid::initial();
        for t in 1..=6 {
            g = apply_rw(&g, &coin);
            let mu = marginal(&g).unwrap();
            assert!((mu.prob(-(t as i64)) - 0.5).abs() < 1e-15);
            assert!((mu.prob(t as i64) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn lookup_by_coordinates() {
        let g = apply_qw(&DensityGrid::initial(), &Coin::hadamard());
        assert_eq!(g.at(0, 0), Mat2::zeros());
        assert_eq!(g.at(-1, 1), *g.block(0, 1));
        assert_eq!(g.at(3, 1), Mat2::zeros());
    }

    #[test]
    fn pure_grid_rejects_wrong_length() {
        assert!(DensityGrid::from_pure(2, &[[ONE, ZERO]]).is_err());
    }
}
