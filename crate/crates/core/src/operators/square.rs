//! Square functions: the wedge square function over a lattice of cells and
//! the Chang-Wilson-Wolff style square function that runs a family of
//! operators under every Littlewood-Paley band.

use num_complex::Complex64;

use crate::direction::SigmaIndex;
use crate::error::GridError;
use crate::fft::fft_forward;
use crate::grid::{GridFunction, Side};
use crate::multiplier::lp_band_spectrum;
use crate::operators::OperatorSpec;
use crate::parallel;
use crate::symbols::kappa_sigma_ell;

/// `(sum over cells |K_{U,l} f|^2)^{1/2}` with each pair's level ranging
/// over `ell_range`. The sum over cells is taken in lexicographic order.
pub fn wedge_square_function(
    f: &GridFunction,
    u: &[SigmaIndex],
    ell_range: std::ops::RangeInclusive<i64>,
) -> Result<GridFunction, GridError> {
    if u.is_empty() {
        return Err(GridError::BadOperator(
            "wedge square function needs a nonempty pair set".into(),
        ));
    }
    let n = f.grid.dimension();
    for s in u {
        if s.second() >= n {
            return Err(GridError::BadOperator(format!(
                "wedge pair {s} out of range for n = {n}"
            )));
        }
    }
    let spectrum = fft_forward(f)?;
    let levels: Vec<i64> = ell_range.collect();
    let mut acc = vec![0.0f64; f.grid.len()];
    let mut tuple = vec![0usize; u.len()];
    loop {
        let piece = crate::multiplier::apply_symbol_to_spectrum(
            &spectrum,
            Complex64::new(0.0, 0.0),
            |xi| {
                let mut prod = 1.0;
                for (s, li) in u.iter().zip(&tuple) {
                    prod *= kappa_sigma_ell(xi, *s, levels[*li]);
                    if prod == 0.0 {
                        break;
                    }
                }
                Complex64::new(prod, 0.0)
            },
        )?;
        for (a, p) in acc.iter_mut().zip(&piece.values) {
            *a += p.norm_sqr();
        }
        // advance the level tuple
        let mut carry = true;
        for slot in tuple.iter_mut().rev() {
            *slot += 1;
            if *slot < levels.len() {
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry {
            break;
        }
    }
    Ok(GridFunction {
        grid: f.grid,
        side: Side::Physical,
        values: acc
            .into_iter()
            .map(|a| Complex64::new(a.sqrt(), 0.0))
            .collect(),
    })
}

/// Largest number of cells whose widened wedge supports can share one
/// frequency, measured by a direct lattice scan. Bounds the square function
/// constant by its square root.
pub fn wedge_overlap_count(
    f: &GridFunction,
    u: &[SigmaIndex],
    ell_range: std::ops::RangeInclusive<i64>,
) -> usize {
    let grid = f.grid;
    let levels: Vec<i64> = ell_range.collect();
    let mut worst = 0usize;
    grid.for_each_freq(|linear, xi| {
        if linear == 0 {
            return;
        }
        let mut count = 1usize;
        for s in u {
            let hits = levels
                .iter()
                .filter(|l| kappa_sigma_ell(xi, *s, **l) > 0.0)
                .count();
            count *= hits;
        }
        worst = worst.max(count);
    });
    worst
}

/// `(sum_t sup_tau |R_tau P_t f|^2)^{1/2}`: for each Littlewood-Paley band
/// of the given axis, apply every operator, take the pointwise sup of
/// moduli, and combine the bands in quadrature.
pub fn cww_square_function(
    f: &GridFunction,
    operators: &[OperatorSpec],
    axis: usize,
) -> Result<GridFunction, GridError> {
    if operators.is_empty() {
        return Err(GridError::BadOperator(
            "cww square function needs at least one operator".into(),
        ));
    }
    for op in operators {
        op.validate(f.grid)?;
    }
    if axis >= f.grid.dimension() {
        return Err(GridError::BadOperator(format!(
            "axis {axis} out of range for n = {}",
            f.grid.dimension()
        )));
    }
    let spectrum = fft_forward(f)?;
    let mut acc = vec![0.0f64; f.grid.len()];
    for t in f.grid.lp_scales() {
        let band = lp_band_spectrum(&spectrum, axis, t)?;
        let sup = parallel::max_fields(operators.len(), f.grid.len(), |i| {
            let out = operators[i]
                .apply_to_spectrum(&band)
                .expect("validated operator applies");
            out.values.iter().map(|v| v.norm()).collect()
        });
        for (a, s) in acc.iter_mut().zip(&sup) {
            *a += s * s;
        }
    }
    Ok(GridFunction {
        grid: f.grid,
        side: Side::Physical,
        values: acc
            .into_iter()
            .map(|a| Complex64::new(a.sqrt(), 0.0))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::Direction;
    use crate::grid::{norm, rel_l2_error, TorusGrid};
    use crate::multiplier::lp_projection;
    use crate::symbols::HmProfile;
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
    fn wedge_square_function_bounds() {
        let g = TorusGrid::new(2, 64).unwrap();
        let u = [SigmaIndex::new(0, 1).unwrap()];
        let f = random_f(g, 1);
        let sq = wedge_square_function(&f, &u, -2..=6).unwrap();
        let overlap = wedge_overlap_count(&f, &u, -2..=6);
        assert!(overlap >= 1);
        let c = (overlap as f64).sqrt();
        assert!(
            norm(&sq, 2.0) <= c * norm(&f, 2.0) * (1.0 + 1e-10),
            "||g_U f|| = {} vs {} * ||f||",
            norm(&sq, 2.0),
            c
        );

        let zero = GridFunction::zeros(g, Side::Physical);
        assert_eq!(norm(&wedge_square_function(&zero, &u, 0..=3).unwrap(), 2.0), 0.0);
        assert!(wedge_square_function(&f, &[], 0..=3).is_err());
    }

    #[test]
    fn wedge_square_function_single_wave() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u = [SigmaIndex::new(0, 1).unwrap()];
        // ratio 3/4: inside the narrow wedge at ell = 0, and in at most a
        // bounded number of widened wedges overall.
        let wave = GridFunction::pure_wave(g, &[-3, 4]);
        let sq = wedge_square_function(&wave, &u, -4..=8).unwrap();
        let overlap = wedge_overlap_count(&wave, &u, -4..=8);
        // the wave is hit with total weight between 1 and the overlap count
        let r = norm(&sq, 2.0) / norm(&wave, 2.0);
        assert!(r >= 1.0 - 1e-10 && r <= (overlap as f64).sqrt() + 1e-10, "r = {r}");
    }

    #[test]
    fn cww_square_function_identity_case() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 2);
        let sq = cww_square_function(&f, &[OperatorSpec::Identity], 0).unwrap();
        let mut acc = vec![0.0f64; g.len()];
        for t in g.lp_scales() {
            let band = lp_projection(&f, 0, t).unwrap();
            for (a, b) in acc.iter_mut().zip(&band.values) {
                *a += b.norm_sqr();
            }
        }
        let direct = GridFunction {
            grid: g,
            side: Side::Physical,
            values: acc
                .into_iter()
                .map(|a| Complex64::new(a.sqrt(), 0.0))
                .collect(),
        };
        assert!(rel_l2_error(&sq, &direct) < 1e-12);
    }

    #[test]
    fn cww_square_function_monotone_in_operator_list() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 3);
        let v1 = Direction::from_ray(&[1.0, 0.5]).unwrap();
        let v2 = Direction::from_ray(&[1.0, 0.25]).unwrap();
        let one = [OperatorSpec::Directional {
            direction: v1.clone(),
            profile: HmProfile::HilbertSign,
        }];
        let two = [
            OperatorSpec::Directional {
                direction: v1,
                profile: HmProfile::HilbertSign,
            },
            OperatorSpec::Directional {
                direction: v2,
                profile: HmProfile::HilbertSign,
            },
        ];
        let a = cww_square_function(&f, &one, 1).unwrap();
        let b = cww_square_function(&f, &two, 1).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(x.re <= y.re + 1e-12);
        }
    }
}
