//! Unitary multi-dimensional FFT on [`TorusGrid`] fields, built from
//! one-dimensional rustfft plans applied axis by axis. The unitary
//! normalization makes Plancherel exact, so norm comparisons are
//! side-agnostic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::GridError;
use crate::grid::{GridFunction, Side, TorusGrid};

type Plan = Arc<dyn Fft<f64>>;

fn plans(m: usize) -> (Plan, Plan) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        })
        .clone()
}

fn transform_axes(values: &mut [Complex64], grid: TorusGrid, forward: bool) {
    let n = grid.dimension();
    let m = grid.points_per_axis();
    let (fwd, inv) = plans(m);
    let plan = if forward { fwd } else { inv };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let block = stride * m;
        let lines = values.len() / m;
        for l in 0..lines {
            let base = (l / stride) * block + (l % stride);
            for k in 0..m {
                line[k] = values[base + k * stride];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for k in 0..m {
                values[base + k * stride] = line[k];
            }
        }
    }
    let scale = (grid.len() as f64).sqrt().recip();
    for v in values.iter_mut() {
        *v *= scale;
    }
}

/// Physical-side field to its unitary spectrum.
pub fn fft_forward(f: &GridFunction) -> Result<GridFunction, GridError> {
    f.expect_side(Side::Physical)?;
    let mut values = f.values.clone();
    transform_axes(&mut values, f.grid, true);
    GridFunction::new(f.grid, Side::Frequency, values)
}

/// Unitary spectrum back to the physical side.
pub fn fft_inverse(f: &GridFunction) -> Result<GridFunction, GridError> {
    f.expect_side(Side::Frequency)?;
    let mut values = f.values.clone();
    transform_axes(&mut values, f.grid, false);
    GridFunction::new(f.grid, Side::Physical, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm, rel_l2_error};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn constant_maps_to_dc() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = GridFunction::constant(g, Side::Physical, Complex64::new(1.0, 0.0));
        let hat = fft_forward(&f).unwrap();
        // Unitary: the DC coefficient is M^{n/2}, all others vanish.
        assert_abs_diff_eq!(hat.values[0].re, 16.0, epsilon = 1e-10);
        for v in &hat.values[1..] {
            assert!(v.norm() < 1e-10);
        }
    }

    #[test]
    fn pure_wave_maps_to_delta() {
        let g = TorusGrid::new(3, 8).unwrap();
        let k = [2i64, -3, 1];
        let f = GridFunction::pure_wave(g, &k);
        let hat = fft_forward(&f).unwrap();
        let at = g.index_of(&k);
        for (i, v) in hat.values.iter().enumerate() {
            if i == at {
                assert_abs_diff_eq!(v.re, (g.len() as f64).sqrt(), epsilon = 1e-8);
            } else {
                assert!(v.norm() < 1e-8, "leak at {i}: {v}");
            }
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for (n, m) in [(2usize, 32usize), (3, 16), (4, 8)] {
            let g = TorusGrid::new(n, m).unwrap();
            let values: Vec<Complex64> = (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = GridFunction::new(g, Side::Physical, values).unwrap();
            let hat = fft_forward(&f).unwrap();
            assert_abs_diff_eq!(norm(&hat, 2.0), norm(&f, 2.0), epsilon = 1e-12);
            let back = fft_inverse(&hat).unwrap();
            assert!(rel_l2_error(&back, &f) < 1e-10);
        }
    }

    #[test]
    fn side_checked() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = GridFunction::zeros(g, Side::Frequency);
        assert!(fft_forward(&f).is_err());
    }
}
