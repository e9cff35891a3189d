//! Sampled frequency symbols and Fourier multiplier application, including
//! the coordinate-wise Littlewood-Paley projections.

use num_complex::Complex64;

use crate::error::GridError;
use crate::fft::{fft_forward, fft_inverse};
use crate::grid::{GridFunction, Side, TorusGrid};
use crate::symbols::{lp_bump, LpBumpKind};

/// A frequency symbol sampled on the lattice. The origin is special: every
/// directional symbol in this crate is homogeneous of degree zero and has
/// no limit there, so the value used at `xi = 0` is recorded explicitly.
#[derive(Clone, Debug)]
pub struct SymbolField {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
    pub dc_value: Complex64,
}

/// Sample a pointwise symbol over the nonzero lattice, storing `dc` at the
/// origin. Rejects non-finite samples with the offending frequency.
pub fn sample_symbol(
    grid: TorusGrid,
    dc: Complex64,
    symbol: impl Fn(&[f64]) -> Complex64,
) -> Result<SymbolField, GridError> {
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut bad: Option<Vec<i64>> = None;
    grid.for_each_freq(|linear, xi| {
        if bad.is_some() {
            return;
        }
        let v = if linear == 0 {
            dc
        } else {
            symbol(xi)
        };
        if !v.re.is_finite() || !v.im.is_finite() {
            bad = Some(xi.iter().map(|x| *x as i64).collect());
            return;
        }
        values[linear] = v;
    });
    if let Some(xi) = bad {
        return Err(GridError::NonFiniteSymbol(xi));
    }
    Ok(SymbolField {
        grid,
        values,
        dc_value: dc,
    })
}

/// Sup-norm of the sampled symbol.
pub fn symbol_sup(sym: &SymbolField) -> f64 {
    sym.values.iter().fold(0.0f64, |a, v| a.max(v.norm()))
}

/// Apply a sampled multiplier to a physical-side function.
pub fn apply_multiplier(sym: &SymbolField, f: &GridFunction) -> Result<GridFunction, GridError> {
    if sym.grid != f.grid {
        return Err(GridError::GridMismatch(sym.grid, f.grid));
    }
    f.expect_side(Side::Physical)?;
    let mut hat = fft_forward(f)?;
    for (h, s) in hat.values.iter_mut().zip(&sym.values) {
        *h *= s;
    }
    fft_inverse(&hat)
}

/// Multiply a frequency-side field by a pointwise symbol (with `dc` at the
/// origin) and return the physical-side result. This is the shared fast
/// path when one spectrum feeds many multipliers.
pub fn apply_symbol_to_spectrum(
    spectrum: &GridFunction,
    dc: Complex64,
    symbol: impl Fn(&[f64]) -> Complex64,
) -> Result<GridFunction, GridError> {
    spectrum.expect_side(Side::Frequency)?;
    let grid = spectrum.grid;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    grid.for_each_freq(|linear, xi| {
        let s = if linear == 0 { dc } else { symbol(xi) };
        values[linear] = spectrum.values[linear] * s;
    });
    let hat = GridFunction::new(grid, Side::Frequency, values)?;
    fft_inverse(&hat)
}

/// Coordinate-wise Littlewood-Paley projection: the multiplier with symbol
/// `p(2^-t xi_axis)`.
pub fn lp_projection(f: &GridFunction, axis: usize, t: i64) -> Result<GridFunction, GridError> {
    let grid = f.grid;
    if axis >= grid.dimension() {
        return Err(GridError::BadOperator(format!(
            "lp projection axis {axis} out of range for n = {}",
            grid.dimension()
        )));
    }
    let scale = crate::direction::pow2(-t);
    let sym = sample_symbol(grid, Complex64::new(0.0, 0.0), |xi| {
        Complex64::new(lp_bump(scale * xi[axis], LpBumpKind::P), 0.0)
    })?;
    apply_multiplier(&sym, f)
}

/// Frequency-side Littlewood-Paley band with the same symbol, for reuse
/// under an already-computed spectrum.
pub fn lp_band_spectrum(
    spectrum: &GridFunction,
    axis: usize,
    t: i64,
) -> Result<GridFunction, GridError> {
    spectrum.expect_side(Side::Frequency)?;
    let grid = spectrum.grid;
    let scale = crate::direction::pow2(-t);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    grid.for_each_freq(|linear, xi| {
        let w = lp_bump(scale * xi[axis], LpBumpKind::P);
        if w != 0.0 {
            values[linear] = spectrum.values[linear] * w;
        }
    });
    GridFunction::new(grid, Side::Frequency, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm, rel_l2_error};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_f(grid: TorusGrid, seed: u64) -> GridFunction {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::new(grid, Side::Physical, values).unwrap()
    }

    #[test]
    fn constant_symbols() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = random_f(g, 3);
        let one = sample_symbol(g, Complex64::new(1.0, 0.0), |_| Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(one.dc_value, Complex64::new(1.0, 0.0));
        let back = apply_multiplier(&one, &f).unwrap();
        assert!(rel_l2_error(&back, &f) < 1e-12);

        let zero = sample_symbol(g, Complex64::new(0.0, 0.0), |_| Complex64::new(0.0, 0.0)).unwrap();
        let out = apply_multiplier(&zero, &f).unwrap();
        assert!(norm(&out, 2.0) < 1e-14);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = TorusGrid::new(2, 8).unwrap();
        let err = sample_symbol(g, Complex64::new(0.0, 0.0), |xi| {
            Complex64::new(1.0 / (xi[0] - 1.0), 0.0)
        });
        match err {
            Err(GridError::NonFiniteSymbol(xi)) => assert_eq!(xi[0], 1),
            other => panic!("expected NonFiniteSymbol, got {other:?}"),
        }
    }

    #[test]
    fn composition_commutes_and_contracts() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 11);
        let a = sample_symbol(g, Complex64::new(0.0, 0.0), |xi| {
            Complex64::new(0.0, -(xi[0] + 0.3 * xi[1]).signum())
        })
        .unwrap();
        let b = sample_symbol(g, Complex64::new(1.0, 0.0), |xi| {
            Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 100.0).exp(), 0.0)
        })
        .unwrap();
        let ab = apply_multiplier(&a, &apply_multiplier(&b, &f).unwrap()).unwrap();
        let ba = apply_multiplier(&b, &apply_multiplier(&a, &f).unwrap()).unwrap();
        assert!(rel_l2_error(&ab, &ba) < 1e-12);

        let product = sample_symbol(g, Complex64::new(0.0, 0.0), |xi| {
            let s1 = Complex64::new(0.0, -(xi[0] + 0.3 * xi[1]).signum());
            let s2 = Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1]) / 100.0).exp(), 0.0);
            s1 * s2
        })
        .unwrap();
        let once = apply_multiplier(&product, &f).unwrap();
        assert!(rel_l2_error(&ab, &once) < 1e-12);

        assert!(norm(&ab, 2.0) <= norm(&f, 2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn lp_projection_bands() {
        let g = TorusGrid::new(2, 32).unwrap();
        // A wave with xi_0 = 2^t passes band t with weight p(1) = 1.
        let w = GridFunction::pure_wave(g, &[4, 3]);
        let band = lp_projection(&w, 0, 2).unwrap();
        assert!(rel_l2_error(&band, &w) < 1e-10);
        let off = lp_projection(&w, 0, 4).unwrap();
        assert!(norm(&off, 2.0) < 1e-12);

        // Content on the xi_axis = 0 plane is annihilated by every band.
        let plane = GridFunction::pure_wave(g, &[0, 5]);
        for t in g.lp_scales() {
            assert!(norm(&lp_projection(&plane, 0, t).unwrap(), 2.0) < 1e-12);
        }
    }

    #[test]
    fn lp_bands_reconstruct_off_plane_content() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 17);
        let axis = 1;
        let mut acc = GridFunction::zeros(g, Side::Physical);
        for t in g.lp_scales() {
            let band = lp_projection(&f, axis, t).unwrap();
            for (a, b) in acc.values.iter_mut().zip(&band.values) {
                *a += b;
            }
        }
        // Reference: f minus its xi_axis = 0 plane.
        let hat = fft_forward(&f).unwrap();
        let mut plane_removed = hat.clone();
        g.for_each_freq(|linear, xi| {
            if xi[axis] == 0.0 {
                plane_removed.values[linear] = Complex64::new(0.0, 0.0);
            }
        });
        let reference = fft_inverse(&plane_removed).unwrap();
        assert!(rel_l2_error(&acc, &reference) < 1e-10);
    }

    #[test]
    fn lp_square_function_bounded() {
        let g = TorusGrid::new(2, 64).unwrap();
        let f = random_f(g, 23);
        let mut sq = vec![0.0f64; g.len()];
        for t in g.lp_scales() {
            let band = lp_projection(&f, 0, t).unwrap();
            for (s, v) in sq.iter_mut().zip(&band.values) {
                *s += v.norm_sqr();
            }
        }
        let gf = GridFunction::new(
            g,
            Side::Physical,
            sq.iter().map(|s| Complex64::new(s.sqrt(), 0.0)).collect(),
        )
        .unwrap();
        assert!(norm(&gf, 2.0) <= 3f64.sqrt() * norm(&f, 2.0));
    }
}
