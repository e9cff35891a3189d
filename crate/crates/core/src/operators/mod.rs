//! Grid realizations of the directional operators: multipliers `T_v`, cone
//! projections `W_v`, wedge multipliers, the inner/outer splitting, the eta
//! decomposition, and the outer convolution kernel. Maximal and square
//! function operators live in the submodules.

pub mod maximal;
pub mod square;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::direction::{pow2, Direction, SigmaIndex};
use crate::error::GridError;
use crate::fft::{fft_forward, fft_inverse};
use crate::grid::{GridFunction, TorusGrid};
use crate::multiplier::{apply_symbol_to_spectrum, sample_symbol};
use crate::symbols::{eta_family, kappa_sigma_ell, lp_bump, nsw_omega_v, HmProfile, LpBumpKind};

pub use maximal::{directional_maximal, maximal_over_directions, strong_maximal, MaximalPieces};
pub use square::{cww_square_function, wedge_square_function};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn dot(xi: &[f64], v: &Direction) -> f64 {
    let mut acc = 0.0;
    for k in 0..v.dimension() {
        acc += xi[k] * v[k];
    }
    acc
}

/// One wedge factor of a composite wedge multiplier.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WedgeFactor {
    pub sigma: SigmaIndex,
    pub ell: i64,
}

/// Serializable description of every linear operator the experiments use.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Identity,
    /// `T_v` with symbol `m(xi . v)`.
    Directional { direction: Direction, profile: HmProfile },
    /// `W_v`, the smooth cone projection.
    NswCone { direction: Direction },
    /// `Id - W_v`.
    NswComplement { direction: Direction },
    /// One wedge multiplier `K_{sigma, ell}`.
    Wedge { sigma: SigmaIndex, ell: i64 },
    /// Product of wedge multipliers over a nonempty pair set.
    CompositeWedge { factors: Vec<WedgeFactor> },
    /// `T_v W_v`.
    Inner { direction: Direction, profile: HmProfile },
    /// `T_v (Id - W_v)`.
    Outer { direction: Direction, profile: HmProfile },
    /// The eta multiplier `N_v^axis`.
    Eta { direction: Direction, axis: usize },
    /// `T_v (Id - W_v) N_v^axis`, the outer piece after the eta split.
    OuterEta {
        direction: Direction,
        profile: HmProfile,
        axis: usize,
    },
}

impl OperatorSpec {
    pub fn validate(&self, grid: TorusGrid) -> Result<(), GridError> {
        let n = grid.dimension();
        let check_dir = |d: &Direction| {
            if d.dimension() != n {
                Err(GridError::DirectionDimension {
                    dir: d.dimension(),
                    grid: n,
                })
            } else {
                Ok(())
            }
        };
        match self {
            OperatorSpec::Identity => Ok(()),
            OperatorSpec::Directional { direction, .. }
            | OperatorSpec::NswCone { direction }
            | OperatorSpec::NswComplement { direction }
            | OperatorSpec::Inner { direction, .. }
            | OperatorSpec::Outer { direction, .. } => check_dir(direction),
            OperatorSpec::Wedge { sigma, .. } => {
                if sigma.second() >= n {
                    return Err(GridError::BadOperator(format!(
                        "wedge pair {sigma} out of range for n = {n}"
                    )));
                }
                Ok(())
            }
            OperatorSpec::CompositeWedge { factors } => {
                if factors.is_empty() {
                    return Err(GridError::BadOperator(
                        "composite wedge needs a nonempty pair set".into(),
                    ));
                }
                for f in factors {
                    if f.sigma.second() >= n {
                        return Err(GridError::BadOperator(format!(
                            "wedge pair {} out of range for n = {n}",
                            f.sigma
                        )));
                    }
                }
                Ok(())
            }
            OperatorSpec::Eta { direction, axis } => {
                check_dir(direction)?;
                if *axis >= n {
                    return Err(GridError::BadOperator(format!(
                        "eta axis {axis} out of range for n = {n}"
                    )));
                }
                Ok(())
            }
            OperatorSpec::OuterEta {
                direction, axis, ..
            } => {
                check_dir(direction)?;
                if *axis >= n {
                    return Err(GridError::BadOperator(format!(
                        "eta axis {axis} out of range for n = {n}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The symbol at one nonzero lattice frequency.
    pub fn symbol_at(&self, xi: &[f64]) -> Complex64 {
        match self {
            OperatorSpec::Identity => Complex64::new(1.0, 0.0),
            OperatorSpec::Directional { direction, profile } => profile.eval(dot(xi, direction)),
            OperatorSpec::NswCone { direction } => {
                Complex64::new(nsw_omega_v(xi, direction), 0.0)
            }
            OperatorSpec::NswComplement { direction } => {
                Complex64::new(1.0 - nsw_omega_v(xi, direction), 0.0)
            }
            OperatorSpec::Wedge { sigma, ell } => {
                Complex64::new(kappa_sigma_ell(xi, *sigma, *ell), 0.0)
            }
            OperatorSpec::CompositeWedge { factors } => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= kappa_sigma_ell(xi, f.sigma, f.ell);
                    if acc == 0.0 {
                        break;
                    }
                }
                Complex64::new(acc, 0.0)
            }
            OperatorSpec::Inner { direction, profile } => {
                profile.eval(dot(xi, direction)) * nsw_omega_v(xi, direction)
            }
            OperatorSpec::Outer { direction, profile } => {
                profile.eval(dot(xi, direction)) * (1.0 - nsw_omega_v(xi, direction))
            }
            OperatorSpec::Eta { direction, axis } => {
                Complex64::new(eta_family(xi, direction)[*axis], 0.0)
            }
            OperatorSpec::OuterEta {
                direction,
                profile,
                axis,
            } => {
                let eta = eta_family(xi, direction)[*axis];
                if eta == 0.0 {
                    ZERO
                } else {
                    profile.eval(dot(xi, direction)) * (1.0 - nsw_omega_v(xi, direction)) * eta
                }
            }
        }
    }

    /// The value used at the origin: directional symbols have none, so they
    /// get zero; only the identity passes DC through.
    pub fn dc_value(&self) -> Complex64 {
        match self {
            OperatorSpec::Identity => Complex64::new(1.0, 0.0),
            _ => ZERO,
        }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction, GridError> {
        self.validate(f.grid)?;
        let spectrum = fft_forward(f)?;
        self.apply_to_spectrum(&spectrum)
    }

    /// Apply under an already-computed spectrum (shared forward transform).
    pub fn apply_to_spectrum(&self, spectrum: &GridFunction) -> Result<GridFunction, GridError> {
        apply_symbol_to_spectrum(spectrum, self.dc_value(), |xi| self.symbol_at(xi))
    }
}

/// `T_v f`: the directional multiplier with profile `m`.
pub fn directional_multiplier(
    f: &GridFunction,
    v: &Direction,
    profile: HmProfile,
) -> Result<GridFunction, GridError> {
    OperatorSpec::Directional {
        direction: v.clone(),
        profile,
    }
    .apply(f)
}

/// `W_v f`: the smooth cone projection around the singular hyperplane.
pub fn nsw_projection(f: &GridFunction, v: &Direction) -> Result<GridFunction, GridError> {
    OperatorSpec::NswCone {
        direction: v.clone(),
    }
    .apply(f)
}

/// `(Id - W_v) f`, computed as `f - W_v f` so the complement is exact.
pub fn complement_nsw(f: &GridFunction, v: &Direction) -> Result<GridFunction, GridError> {
    let w = nsw_projection(f, v)?;
    let values = f
        .values
        .iter()
        .zip(&w.values)
        .map(|(a, b)| a - b)
        .collect();
    GridFunction::new(f.grid, f.side, values)
}

/// `K_{sigma, ell} f`.
pub fn wedge_projection(
    f: &GridFunction,
    sigma: SigmaIndex,
    ell: i64,
) -> Result<GridFunction, GridError> {
    OperatorSpec::Wedge { sigma, ell }.apply(f)
}

/// `K_{U, l} f` for a nonempty pair set, with the cell supplying one level
/// per pair. Commuting multipliers, so composition order is irrelevant.
pub fn composite_wedge(
    f: &GridFunction,
    u: &[SigmaIndex],
    cell: &crate::direction::CellIndex,
) -> Result<GridFunction, GridError> {
    let factors: Vec<WedgeFactor> = u
        .iter()
        .map(|s| WedgeFactor {
            sigma: *s,
            ell: cell.get(*s),
        })
        .collect();
    OperatorSpec::CompositeWedge { factors }.apply(f)
}

/// `T_v W_v f`, the inner (singular) part.
pub fn inner_part(
    f: &GridFunction,
    v: &Direction,
    profile: HmProfile,
) -> Result<GridFunction, GridError> {
    OperatorSpec::Inner {
        direction: v.clone(),
        profile,
    }
    .apply(f)
}

/// `T_v (Id - W_v) f`, the outer part. Inner plus outer reconstructs `T_v f`
/// up to one rounding of the symbol product.
pub fn outer_part(
    f: &GridFunction,
    v: &Direction,
    profile: HmProfile,
) -> Result<GridFunction, GridError> {
    OperatorSpec::Outer {
        direction: v.clone(),
        profile,
    }
    .apply(f)
}

/// `N_v^axis f`: the eta multiplier.
pub fn eta_multiplier(
    f: &GridFunction,
    v: &Direction,
    axis: usize,
) -> Result<GridFunction, GridError> {
    OperatorSpec::Eta {
        direction: v.clone(),
        axis,
    }
    .apply(f)
}

/// The outer kernel at Littlewood-Paley scale `t`:
/// the inverse transform of `m(xi . v) (1 - omega_v) eta_v^axis q(2^-t xi_axis)`,
/// normalized so `values[x] = sum_xi sym(xi) exp(2 pi i xi . x)`. With that
/// normalization the operator acts by the cell-averaged convolution
/// `(K * f)(x) = M^-n sum_y K(x - y) f(y)`.
pub fn outer_kernel(
    v: &Direction,
    axis: usize,
    t: i64,
    grid: TorusGrid,
    profile: HmProfile,
) -> Result<GridFunction, GridError> {
    if v.dimension() != grid.dimension() {
        return Err(GridError::DirectionDimension {
            dir: v.dimension(),
            grid: grid.dimension(),
        });
    }
    if axis >= grid.dimension() {
        return Err(GridError::BadOperator(format!(
            "kernel axis {axis} out of range"
        )));
    }
    let scale = pow2(-t);
    let sym = sample_symbol(grid, ZERO, |xi| {
        let q = lp_bump(scale * xi[axis], LpBumpKind::Q);
        if q == 0.0 {
            return ZERO;
        }
        let eta = eta_family(xi, v)[axis];
        if eta == 0.0 {
            return ZERO;
        }
        profile.eval(dot(xi, v)) * ((1.0 - nsw_omega_v(xi, v)) * eta * q)
    })?;
    let hat = GridFunction::new(grid, crate::grid::Side::Frequency, sym.values)?;
    let mut kernel = fft_inverse(&hat)?;
    let amp = (grid.len() as f64).sqrt();
    for k in kernel.values.iter_mut() {
        *k *= amp;
    }
    Ok(kernel)
}
