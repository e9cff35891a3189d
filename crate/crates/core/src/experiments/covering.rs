//! Sampled verification that the singular cone of every direction is
//! covered by the wedges of its cell.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::direction::{cell_index, cone_membership, wedge_membership, Direction, SigmaIndex};
use crate::error::ExperimentError;
use crate::experiments::{fmt_f64, provenance, ExperimentReport};
use crate::parallel;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringConfig {
    /// Ambient dimensions to test.
    pub dimensions: Vec<usize>,
    /// Random directions per dimension.
    pub direction_samples: usize,
    /// Random cone points per direction.
    pub xi_samples: usize,
    pub seed: u64,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        CoveringConfig {
            dimensions: vec![2, 3, 4],
            direction_samples: 10_000,
            xi_samples: 1_000,
            seed: 1,
        }
    }
}

fn random_direction(rng: &mut ChaCha12Rng, n: usize) -> Direction {
    loop {
        let ray: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64)).collect();
        if ray.iter().all(|c| *c > 1e-4) {
            return Direction::from_ray(&ray).expect("positive ray");
        }
    }
}

/// Draw a point of the open cone of `v` by rejection from the cube.
fn random_cone_point(rng: &mut ChaCha12Rng, v: &Direction) -> Option<Vec<f64>> {
    let n = v.dimension();
    for _ in 0..10_000 {
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        if xi.iter().all(|x| *x == 0.0) {
            continue;
        }
        if cone_membership(&xi, v) {
            return Some(xi);
        }
    }
    None
}

/// Count cone points of one random direction that escape every wedge of
/// its cell. Zero is the expected answer.
fn violations_for_direction(seed: u64, n: usize, dir_index: usize, xi_samples: usize) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ ((n as u64) << 32));
    rng.set_stream(dir_index as u64 + 1);
    let v = random_direction(&mut rng, n);
    let cell = cell_index(&v);
    let entries = cell.entries();
    let mut violations = 0;
    for _ in 0..xi_samples {
        let Some(xi) = random_cone_point(&mut rng, &v) else {
            violations += 1;
            continue;
        };
        let covered = entries
            .iter()
            .any(|(sigma, ell)| wedge_membership(&xi, *sigma, *ell, false));
        if !covered {
            violations += 1;
            log::warn!("covering violation: v = {v:?}, xi = {xi:?}, cell = {cell:?}");
        }
    }
    violations
}

/// Scale-invariance spot check on the same sampled pair.
fn homogeneity_violations(seed: u64, n: usize) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcdef);
    let mut bad = 0;
    for _ in 0..200 {
        let v = random_direction(&mut rng, n);
        if let Some(xi) = random_cone_point(&mut rng, &v) {
            for t in [1e-6, 1.0, 1e6] {
                let scaled: Vec<f64> = xi.iter().map(|x| x * t).collect();
                if !cone_membership(&scaled, &v) {
                    bad += 1;
                }
                let cell = cell_index(&v);
                for (sigma, ell) in cell.entries() {
                    if wedge_membership(&xi, sigma, ell, false)
                        != wedge_membership(&scaled, sigma, ell, false)
                    {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}

pub fn verify_covering(cfg: &CoveringConfig) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport::new(
        provenance("verify-covering", cfg, cfg.seed),
        vec!["n", "directions", "xi_per_direction", "violations", "homogeneity_violations"],
    );
    for &n in &cfg.dimensions {
        if !(2..=4).contains(&n) {
            return Err(ExperimentError::Config(format!(
                "dimension {n} outside 2..=4"
            )));
        }
        let total = parallel::sum_counts(cfg.direction_samples, |i| {
            violations_for_direction(cfg.seed, n, i, cfg.xi_samples)
        });
        let homo = homogeneity_violations(cfg.seed, n);
        report.push_row(vec![
            n.to_string(),
            cfg.direction_samples.to_string(),
            cfg.xi_samples.to_string(),
            total.to_string(),
            homo.to_string(),
        ]);
        report.check(total == 0, format!("n={n}: {total} covering violations"));
        report.check(homo == 0, format!("n={n}: {homo} homogeneity violations"));
        report.set_summary(&format!("violations_n{n}"), serde_json::json!(total));
    }

    // Adversarial boundary: the wedge ratio exactly at its closed lower
    // endpoint stays covered.
    let mut boundary_bad = 0u64;
    for n in [2usize, 3, 4] {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0xb0bb1e);
        for _ in 0..100 {
            let v = random_direction(&mut rng, n);
            let cell = cell_index(&v);
            let sigma = SigmaIndex::all(n)[rng.gen_range(0..n * (n - 1) / 2)];
            let ell = cell.get(sigma);
            // xi supported on the sigma plane with the boundary ratio
            let mut xi = vec![0.0; n];
            xi[sigma.second()] = 1.0;
            xi[sigma.first()] = -crate::direction::pow2(-(ell + 1)) / n as f64;
            if !wedge_membership(&xi, sigma, ell, false) {
                boundary_bad += 1;
            }
        }
    }
    report.push_row(vec![
        "boundary".into(),
        "300".into(),
        "1".into(),
        boundary_bad.to_string(),
        fmt_f64(0.0),
    ]);
    report.check(
        boundary_bad == 0,
        format!("{boundary_bad} boundary ratios left their closed endpoint"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_covering_run_is_clean_and_deterministic() {
        let cfg = CoveringConfig {
            dimensions: vec![2, 3],
            direction_samples: 200,
            xi_samples: 50,
            seed: 7,
        };
        let a = verify_covering(&cfg).unwrap();
        assert!(a.passed, "{:?}", a.failures);
        let b = verify_covering(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn rejects_bad_dimension() {
        let cfg = CoveringConfig {
            dimensions: vec![5],
            direction_samples: 1,
            xi_samples: 1,
            seed: 1,
        };
        assert!(verify_covering(&cfg).is_err());
    }
}
