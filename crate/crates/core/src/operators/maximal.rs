//! Maximal operators: the pointwise supremum of directional multiplier
//! pieces over a direction set, the strong maximal function, and the
//! directional segment-average maximal function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::direction::{Direction, DirectionSet};
use crate::error::GridError;
use crate::fft::fft_forward;
use crate::grid::{GridFunction, Side, TorusGrid};
use crate::operators::OperatorSpec;
use crate::parallel;
use crate::symbols::HmProfile;

/// Which piece of the splitting the supremum ranges over.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalPieces {
    /// `sup_v |T_v f|`
    Full,
    /// `sup_v |T_v W_v f|`
    Inner,
    /// `sup_v |T_v (Id - W_v) f|`
    Outer,
    /// `sup_v |W_v f|`
    Nsw,
}

impl MaximalPieces {
    pub fn spec(self, v: &Direction, profile: HmProfile) -> OperatorSpec {
        let direction = v.clone();
        match self {
            MaximalPieces::Full => OperatorSpec::Directional { direction, profile },
            MaximalPieces::Inner => OperatorSpec::Inner { direction, profile },
            MaximalPieces::Outer => OperatorSpec::Outer { direction, profile },
            MaximalPieces::Nsw => OperatorSpec::NswCone { direction },
        }
    }
}

fn real_field(grid: TorusGrid, values: Vec<f64>) -> GridFunction {
    GridFunction {
        grid,
        side: Side::Physical,
        values: values
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    }
}

/// `sup_{v in O} |piece_v f|` pointwise. One forward transform is shared;
/// per-direction applications run in parallel and meet in an elementwise
/// max, which is order-independent.
pub fn maximal_over_directions(
    f: &GridFunction,
    set: &DirectionSet,
    pieces: MaximalPieces,
    profile: HmProfile,
) -> Result<GridFunction, GridError> {
    if set.dimension() != f.grid.dimension() {
        return Err(GridError::DirectionDimension {
            dir: set.dimension(),
            grid: f.grid.dimension(),
        });
    }
    let spectrum = fft_forward(f)?;
    let fields = parallel::max_fields(set.len(), f.grid.len(), |i| {
        let spec = pieces.spec(set.get(i), profile);
        let out = spec
            .apply_to_spectrum(&spectrum)
            .expect("validated direction applies");
        out.values.iter().map(|v| v.norm()).collect()
    });
    Ok(real_field(f.grid, fields))
}

/// Centered window sums of dyadic side along one axis, grown by doubling:
/// a window of side `2L` is two adjacent windows of side `L`.
fn double_window(data: &[f64], grid: TorusGrid, axis: usize, size: usize) -> Vec<f64> {
    let n = grid.dimension();
    let m = grid.points_per_axis();
    let stride = m.pow((n - 1 - axis) as u32);
    let block = stride * m;
    let (back, fwd) = if size == 1 { (1, 0) } else { (size / 2, size / 2) };
    let mut out = vec![0.0f64; data.len()];
    for base_block in (0..data.len()).step_by(block) {
        for off in 0..stride {
            let base = base_block + off;
            for k in 0..m {
                let kb = (k + m - back % m) % m;
                let kf = (k + fwd) % m;
                out[base + k * stride] = data[base + kb * stride] + data[base + kf * stride];
            }
        }
    }
    out
}

/// Strong maximal function: the sup over centered axis-parallel rectangles
/// with dyadic side lengths (in grid cells, periodic wrap) of the average
/// of `|f|`. Exact by dyadic window aggregation.
pub fn strong_maximal(f: &GridFunction) -> Result<GridFunction, GridError> {
    f.expect_side(Side::Physical)?;
    let grid = f.grid;
    let abs: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    let mut best = vec![0.0f64; abs.len()];

    fn recurse(grid: TorusGrid, axis: usize, sums: Vec<f64>, count: usize, best: &mut [f64]) {
        let n = grid.dimension();
        if axis == n {
            let inv = 1.0 / count as f64;
            for (b, s) in best.iter_mut().zip(&sums) {
                let avg = s * inv;
                if avg > *b {
                    *b = avg;
                }
            }
            return;
        }
        recurse(grid, axis + 1, sums.clone(), count, best);
        let mut cur = sums;
        let mut size = 1usize;
        while size < grid.points_per_axis() {
            cur = double_window(&cur, grid, axis, size);
            size *= 2;
            recurse(grid, axis + 1, cur.clone(), count * size, best);
        }
    }

    recurse(grid, 0, abs, 1, &mut best);
    Ok(real_field(grid, best))
}

/// Trapezoid average of the interpolated field along the segment
/// `{x + t v : |t| <= s}`, for every grid point x at once.
pub fn segment_average_field(
    abs: &[f64],
    grid: TorusGrid,
    v: &Direction,
    s: f64,
) -> Vec<f64> {
    let n = grid.dimension();
    let m = grid.points_per_axis();
    let cell = 1.0 / m as f64;
    let h0 = (s / 16.0).min(cell);
    let panels = ((2.0 * s) / h0).ceil() as usize;
    let h = 2.0 * s / panels as f64;

    // Node offsets in cell units.
    let offsets: Vec<[f64; 4]> = (0..=panels)
        .map(|i| {
            let t = -s + i as f64 * h;
            let mut o = [0.0f64; 4];
            for a in 0..n {
                o[a] = t * v[a] * m as f64;
            }
            o
        })
        .collect();

    let mut out = vec![0.0f64; abs.len()];
    let chunk = m.pow((n - 1) as u32).max(1);
    parallel::for_each_chunk(&mut out, chunk, |chunk_idx, slice| {
        let base = chunk_idx * chunk;
        for (j, o) in slice.iter_mut().enumerate() {
            let linear = base + j;
            // cell coordinates of x
            let mut xc = [0.0f64; 4];
            let mut rem = linear;
            for a in (0..n).rev() {
                xc[a] = (rem % m) as f64;
                rem /= m;
            }
            let mut acc = 0.0;
            for (i, off) in offsets.iter().enumerate() {
                let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
                acc += w * interp(abs, grid, &xc, off);
            }
            *o = acc / panels as f64;
        }
    });
    out
}

/// Multilinear periodic interpolation of a real field at cell coordinates
/// `x + off`.
#[inline]
fn interp(abs: &[f64], grid: TorusGrid, xc: &[f64; 4], off: &[f64; 4]) -> f64 {
    let n = grid.dimension();
    let m = grid.points_per_axis();
    let mi = m as i64;
    let mut i0 = [0i64; 4];
    let mut frac = [0.0f64; 4];
    for a in 0..n {
        let p = xc[a] + off[a];
        let fl = p.floor();
        i0[a] = (fl as i64).rem_euclid(mi);
        frac[a] = p - fl;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << n) {
        let mut weight = 1.0;
        let mut linear = 0usize;
        for a in 0..n {
            let up = (corner >> a) & 1 == 1;
            let idx = if up { (i0[a] + 1) % mi } else { i0[a] } as usize;
            weight *= if up { frac[a] } else { 1.0 - frac[a] };
            linear = linear * m + idx;
        }
        if weight != 0.0 {
            acc += weight * abs[linear];
        }
    }
    acc
}

fn validate_radii(grid: TorusGrid, radii: &[f64]) -> Result<(), GridError> {
    if radii.is_empty() {
        return Err(GridError::BadOperator("radii list is empty".into()));
    }
    let cell = 1.0 / grid.points_per_axis() as f64;
    for r in radii {
        let k = -r.log2();
        let dyadic = (k - k.round()).abs() < 1e-12;
        if !dyadic || *r < cell * (1.0 - 1e-12) || *r > 0.25 + 1e-12 {
            return Err(GridError::BadOperator(format!(
                "radius {r} must be a dyadic value in [1/M, 1/4]"
            )));
        }
    }
    Ok(())
}

/// Directional maximal function: sup over directions and dyadic radii of
/// segment averages (trapezoid quadrature on the multilinear interpolant),
/// including the zero-radius limit `|f|` itself.
pub fn directional_maximal(
    f: &GridFunction,
    omega: &DirectionSet,
    radii: &[f64],
) -> Result<GridFunction, GridError> {
    f.expect_side(Side::Physical)?;
    if omega.dimension() != f.grid.dimension() {
        return Err(GridError::DirectionDimension {
            dir: omega.dimension(),
            grid: f.grid.dimension(),
        });
    }
    validate_radii(f.grid, radii)?;
    let grid = f.grid;
    let abs: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();

    let jobs = omega.len() * radii.len();
    let abs_ref = &abs;
    let mut best = parallel::max_fields(jobs, grid.len(), |job| {
        let v = omega.get(job / radii.len());
        let s = radii[job % radii.len()];
        segment_average_field(abs_ref, grid, v, s)
    });
    for (b, a) in best.iter_mut().zip(&abs) {
        if *a > *b {
            *b = *a;
        }
    }
    Ok(real_field(grid, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::generate_planar_lacunary;
    use crate::grid::norm;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn dir(ray: &[f64]) -> Direction {
        Direction::from_ray(ray).unwrap()
    }

    fn random_f(grid: TorusGrid, seed: u64) -> GridFunction {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::new(grid, Side::Physical, values).unwrap()
    }

    #[test]
    fn maximal_singleton_and_monotonicity() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 1);
        let set = generate_planar_lacunary(1, 4).unwrap();
        let single = set.prefix(1);

        let t_single =
            maximal_over_directions(&f, &single, MaximalPieces::Full, HmProfile::HilbertSign)
                .unwrap();
        let direct =
            crate::operators::directional_multiplier(&f, single.get(0), HmProfile::HilbertSign)
                .unwrap();
        for (a, b) in t_single.values.iter().zip(&direct.values) {
            assert_abs_diff_eq!(a.re, b.norm(), epsilon = 1e-12);
        }

        let t_two = maximal_over_directions(&f, &set.prefix(2), MaximalPieces::Full, HmProfile::HilbertSign)
            .unwrap();
        let t_four = maximal_over_directions(&f, &set, MaximalPieces::Full, HmProfile::HilbertSign)
            .unwrap();
        for (a, b) in t_two.values.iter().zip(&t_four.values) {
            assert!(a.re <= b.re + 1e-12);
        }
    }

    #[test]
    fn maximal_triangle_inequality_of_pieces() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_f(g, 2);
        let set = generate_planar_lacunary(1, 4).unwrap();
        let full =
            maximal_over_directions(&f, &set, MaximalPieces::Full, HmProfile::HilbertSign).unwrap();
        let inner =
            maximal_over_directions(&f, &set, MaximalPieces::Inner, HmProfile::HilbertSign).unwrap();
        let outer =
            maximal_over_directions(&f, &set, MaximalPieces::Outer, HmProfile::HilbertSign).unwrap();
        for i in 0..g.len() {
            assert!(full.values[i].re <= inner.values[i].re + outer.values[i].re + 1e-10);
        }
    }

    #[test]
    fn maximal_is_positively_homogeneous() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = random_f(g, 3);
        let scaled = GridFunction::new(
            g,
            Side::Physical,
            f.values.iter().map(|v| v * 2.5).collect(),
        )
        .unwrap();
        let set = generate_planar_lacunary(1, 3).unwrap();
        let a = maximal_over_directions(&f, &set, MaximalPieces::Nsw, HmProfile::HilbertSign).unwrap();
        let b = maximal_over_directions(&scaled, &set, MaximalPieces::Nsw, HmProfile::HilbertSign)
            .unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_abs_diff_eq!(y.re, 2.5 * x.re, epsilon = 1e-10);
        }
    }

    #[test]
    fn strong_maximal_on_constants_and_indicators() {
        let g = TorusGrid::new(2, 16).unwrap();
        let c = GridFunction::constant(g, Side::Physical, Complex64::new(-2.0, 0.0));
        let m = strong_maximal(&c).unwrap();
        for v in &m.values {
            assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-12);
        }

        // Indicator of a dyadic rectangle: points inside see average 1 from
        // the cell-size window.
        let mut ind = GridFunction::zeros(g, Side::Physical);
        for i in 0..4 {
            for j in 0..8 {
                ind.values[i * 16 + j] = Complex64::new(1.0, 0.0);
            }
        }
        let m = strong_maximal(&ind).unwrap();
        assert_abs_diff_eq!(m.values[2 * 16 + 3].re, 1.0, epsilon = 1e-12);
        // Everywhere dominated by the global average from the full window.
        let global = 32.0 / 256.0;
        for v in &m.values {
            assert!(v.re >= global - 1e-12);
        }
    }

    #[test]
    fn strong_maximal_matches_brute_force_on_delta() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut f = GridFunction::zeros(g, Side::Physical);
        f.values[0] = Complex64::new(1.0, 0.0);
        let fast = strong_maximal(&f).unwrap();

        // Independent oracle: enumerate every centered dyadic window.
        let m = 16i64;
        let sizes = [1i64, 2, 4, 8, 16];
        for x0 in 0..m {
            for x1 in 0..m {
                let mut best = 0.0f64;
                for s0 in sizes {
                    for s1 in sizes {
                        let (b0, f0) = if s0 == 1 { (0, 0) } else { (s0 / 2, s0 / 2 - 1) };
                        let (b1, f1) = if s1 == 1 { (0, 0) } else { (s1 / 2, s1 / 2 - 1) };
                        let mut sum = 0.0;
                        for d0 in -b0..=f0 {
                            for d1 in -b1..=f1 {
                                let y0 = (x0 + d0).rem_euclid(m);
                                let y1 = (x1 + d1).rem_euclid(m);
                                if y0 == 0 && y1 == 0 {
                                    sum += 1.0;
                                }
                            }
                        }
                        best = best.max(sum / (s0 * s1) as f64);
                    }
                }
                let got = fast.values[(x0 * m + x1) as usize].re;
                assert_abs_diff_eq!(got, best, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn directional_maximal_basics() {
        let g = TorusGrid::new(2, 32).unwrap();
        let ones = GridFunction::constant(g, Side::Physical, Complex64::new(1.0, 0.0));
        let set = generate_planar_lacunary(1, 3).unwrap();
        let m = directional_maximal(&ones, &set, &[0.25, 0.125]).unwrap();
        for v in &m.values {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        }

        let f = random_f(g, 4);
        let m = directional_maximal(&f, &set, &[0.25]).unwrap();
        for (a, b) in m.values.iter().zip(&f.values) {
            assert!(a.re >= b.norm() - 1e-12);
        }

        assert!(directional_maximal(&f, &set, &[]).is_err());
        assert!(directional_maximal(&f, &set, &[0.3]).is_err());
        assert!(directional_maximal(&f, &set, &[0.5]).is_err());
    }

    #[test]
    fn directional_maximal_spike_average_matches_quadrature() {
        let g = TorusGrid::new(2, 32).unwrap();
        let m = 32usize;
        let mut f = GridFunction::zeros(g, Side::Physical);
        let spike = (5usize, 9usize);
        f.values[spike.0 * m + spike.1] = Complex64::new(1.0, 0.0);

        let v = dir(&[1.0, 1e-4]);
        let s = 0.25;
        let abs = f.abs_field();
        let field = segment_average_field(&abs, g, &v, s);

        // Independent quadrature along the line through x = spike - d e_1.
        let d = 3usize;
        let x = ((spike.0 - d) * m + spike.1) as usize;
        let h = (s / 16.0).min(1.0 / m as f64);
        let panels = ((2.0 * s) / h).ceil() as usize;
        let hh = 2.0 * s / panels as f64;
        let mut acc = 0.0;
        for i in 0..=panels {
            let t = -s + i as f64 * hh;
            let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
            // interpolated spike: tent of width one cell around the spike
            let pos0 = (spike.0 as f64 - d as f64) + t * v[0] * m as f64;
            let pos1 = spike.1 as f64 + t * v[1] * m as f64;
            let w0 = (1.0 - (pos0 - spike.0 as f64).abs()).max(0.0);
            let w1 = (1.0 - (pos1 - spike.1 as f64).abs()).max(0.0);
            acc += w * w0 * w1;
        }
        let expect = acc / panels as f64;
        assert_abs_diff_eq!(field[x], expect, epsilon = 1e-12);
        assert!(expect > 0.0);
    }
}
