//! Exact evolution of the block density operator under `L_p`.

mod grid;
mod oracles;

pub use grid::{
    apply_interpolated, apply_qw, apply_rw, marginal, DensityGrid, HERMITIAN_TOL, PSD_TOL,
    TRACE_TOL,
};
pub use oracles::{persistent_rw_reference, pure_qw_reference, ArcAmplitudes, ArcWeights};

use crate::coin::WalkParams;
use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Default ceiling on exact-mode step counts (O(t²) memory, O(t³) work).
pub const DEFAULT_EXACT_CAP: usize = 512;

/// `t` applications of `L_p` starting from `initial`.
///
/// Trace drift is checked after every step so a failure names the step;
/// `observe` sees each intermediate grid (including the initial one).
pub fn evolve_grid(
    params: &WalkParams,
    initial: DensityGrid,
    t: usize,
    mut observe: impl FnMut(&DensityGrid) -> Result<()>,
) -> Result<DensityGrid> {
    let mut grid = initial;
    let mut spare = DensityGrid::at_origin(crate::linalg::Mat2::zeros());
    observe(&grid)?;
    for _ in 0..t {
        grid.step_into(&params.coin, params.q(), &mut spare);
        std::mem::swap(&mut grid, &mut spare);
        let drift = (grid.trace() - 1.0).abs();
        if drift > TRACE_TOL {
            return Err(Error::TraceDrift {
                step: grid.t(),
                drift,
            });
        }
        observe(&grid)?;
    }
    Ok(grid)
}

/// `μ_t` from `ρ₀ = δ₀ I₂/2`.
pub fn evolve(params: &WalkParams, t: usize) -> Result<Distribution> {
    let grid = evolve_grid(params, DensityGrid::initial(), t, |_| Ok(()))?;
    marginal(&grid)
}
