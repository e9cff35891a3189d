//! The test-function battery: random band-limited fields and the
//! adversarial direction-adapted candidate built from modulated wave
//! packets interleaved between the singular hyperplanes.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::direction::DirectionSet;
use crate::error::ExperimentError;
use crate::fft::fft_inverse;
use crate::grid::{norm, GridFunction, Side, TorusGrid};

/// Random band-limited unit-norm field: independent complex Gaussian
/// coefficients on the lattice modes with `|xi|_inf <= band`, optionally
/// restricted off every coordinate hyperplane. Mean zero either way.
pub fn random_band_limited(
    grid: TorusGrid,
    band: usize,
    off_hyperplanes: bool,
    seed: u64,
) -> GridFunction {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hat = GridFunction::zeros(grid, Side::Frequency);
    let b = band as f64;
    grid.for_each_freq(|linear, xi| {
        if linear == 0 {
            return;
        }
        let sup = xi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if sup > b {
            return;
        }
        if off_hyperplanes && xi.iter().any(|x| *x == 0.0) {
            return;
        }
        // Box-Muller pairs keep the draw order independent of layout.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        hat.values[linear] = Complex64::new(r * u2.cos(), r * u2.sin());
    });
    let mut f = fft_inverse(&hat).expect("inverse of sampled spectrum");
    let l2 = norm(&f, 2.0);
    if l2 > 0.0 {
        for v in f.values.iter_mut() {
            *v /= l2;
        }
    }
    f.side = Side::Physical;
    f
}

/// Adversarial candidate for the maximal directional multiplier: one
/// coherent wave packet per gap between consecutive singular hyperplanes,
/// so each direction's symbol acts on every packet with a definite sign
/// and the supremum sees maximal partial sums of the packet series.
///
/// Planar sets get the full interleaved construction; in higher dimension
/// each direction contributes one packet just off its own hyperplane.
/// Unit L2 norm, deterministic for a fixed seed.
pub fn kakeya_test_function(
    set: &DirectionSet,
    grid: TorusGrid,
    seed: u64,
) -> Result<GridFunction, ExperimentError> {
    if set.dimension() != grid.dimension() {
        return Err(ExperimentError::Config(format!(
            "direction dimension {} does not match grid dimension {}",
            set.dimension(),
            grid.dimension()
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hat = GridFunction::zeros(grid, Side::Frequency);
    let m = grid.points_per_axis() as f64;
    let r_hi = m / 4.0;
    let r_lo = m / 8.0;

    if grid.dimension() == 2 {
        // Slopes of the singular rays, descending.
        let mut slopes: Vec<f64> = set.iter().map(|v| v[1] / v[0]).collect();
        slopes.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // Gap u sits between slope u and slope u+1 (log-middle third);
        // the final packet goes below the smallest slope.
        let mut bands: Vec<(f64, f64)> = Vec::with_capacity(slopes.len());
        for u in 0..slopes.len() {
            let (hi, lo) = if u + 1 < slopes.len() {
                (slopes[u], slopes[u + 1])
            } else {
                (slopes[u], slopes[u] / 4.0)
            };
            let ratio = hi / lo;
            let third = ratio.powf(1.0 / 3.0);
            bands.push((lo * third, lo * third * third));
        }

        let mut packets: Vec<Vec<usize>> = vec![Vec::new(); bands.len()];
        grid.for_each_freq(|linear, xi| {
            if linear == 0 || xi[1] <= 0.0 {
                return;
            }
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if r2 < r_lo * r_lo || r2 > r_hi * r_hi {
                return;
            }
            let rho = -xi[0] / xi[1];
            if rho <= 0.0 {
                return;
            }
            // log-spaced bands are sorted descending; linear scan is fine
            for (u, (blo, bhi)) in bands.iter().enumerate() {
                if rho > *blo && rho < *bhi {
                    packets[u].push(linear);
                    break;
                }
            }
        });

        for modes in packets.iter().filter(|p| !p.is_empty()) {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = Complex64::new(phase.cos(), phase.sin());
            let amp = 1.0 / (modes.len() as f64).sqrt();
            for linear in modes {
                hat.values[*linear] = c * amp;
            }
        }
    } else {
        // One packet per direction: the annulus mode on the positive side
        // closest to the hyperplane v-perp.
        for v in set.iter() {
            let mut best: Option<(f64, usize)> = None;
            grid.for_each_freq(|linear, xi| {
                if linear == 0 {
                    return;
                }
                let sup = xi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if sup < r_lo || sup > r_hi {
                    return;
                }
                let mut dot = 0.0;
                for a in 0..grid.dimension() {
                    dot += xi[a] * v[a];
                }
                if dot <= 0.0 {
                    return;
                }
                if best.map_or(true, |(d, _)| dot < d) {
                    best = Some((dot, linear));
                }
            });
            if let Some((_, linear)) = best {
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                hat.values[linear] += Complex64::new(phase.cos(), phase.sin());
            }
        }
    }

    let mut f = fft_inverse(&hat)?;
    let l2 = norm(&f, 2.0);
    if l2 == 0.0 {
        return Err(ExperimentError::Config(
            "adversarial packet construction produced the zero function".into(),
        ));
    }
    for v in f.values.iter_mut() {
        *v /= l2;
    }
    Ok(f)
}

/// Named battery members shared by the sweep experiments.
pub struct Battery {
    pub members: Vec<(String, GridFunction)>,
}

impl Battery {
    /// `random_count` random band-limited members plus two adversarial
    /// candidates adapted to the full direction set.
    pub fn build(
        grid: TorusGrid,
        set: &DirectionSet,
        random_count: usize,
        band: usize,
        seed: u64,
    ) -> Result<Battery, ExperimentError> {
        let mut members = Vec::new();
        for i in 0..random_count {
            members.push((
                format!("random_{i}"),
                random_band_limited(grid, band, true, seed.wrapping_add(i as u64)),
            ));
        }
        members.push((
            "packets_a".to_string(),
            kakeya_test_function(set, grid, seed ^ 0x9e3779b97f4a7c15)?,
        ));
        members.push((
            "packets_b".to_string(),
            kakeya_test_function(set, grid, seed ^ 0x7f4a7c159e3779b9)?,
        ));
        Ok(Battery { members })
    }
}
