//! Empirical almost-orthogonality: the maximal-operator ratio of a nested
//! subset against its worst single-sector ratio plus the square-root-of-log
//! term. The measured quotient should stay stable across lacunarity orders
//! and subset sizes.

use serde::{Deserialize, Serialize};

use crate::direction::{partition_by_sector, DirectionSet, SigmaIndex};
use crate::error::ExperimentError;
use crate::experiments::norm_growth::battery_max_ratio;
use crate::experiments::test_functions::Battery;
use crate::experiments::{
    fmt_f64, interleave_by_sector, provenance, DirectionSpec, ExperimentReport, GridSpec,
};
use crate::symbols::HmProfile;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostOrthoConfig {
    pub grid: GridSpec,
    /// Families to sweep, typically one per lacunarity order.
    pub families: Vec<DirectionSpec>,
    pub profile: HmProfile,
    pub n_sweep: Vec<usize>,
    pub seed: u64,
    #[serde(default = "default_random_count")]
    pub random_count: usize,
    /// Allowed spread (max/min) of the stability quotient.
    #[serde(default = "default_stability")]
    pub stability_factor: f64,
}

fn default_random_count() -> usize {
    4
}

fn default_stability() -> f64 {
    2.0
}

/// Worst battery ratio over the sector pieces of the subset.
fn sector_ratio(
    grid: crate::grid::TorusGrid,
    subset: &DirectionSet,
    battery: &Battery,
    profile: HmProfile,
) -> Result<f64, ExperimentError> {
    let mut worst = 0.0f64;
    for sigma in SigmaIndex::all(subset.dimension()) {
        for (_, piece) in partition_by_sector(subset, sigma) {
            let r = battery_max_ratio(grid, &piece, battery, profile)?;
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

pub fn almost_orthogonality_check(
    cfg: &AlmostOrthoConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let grid = cfg.grid.build()?;
    if cfg.families.is_empty() || cfg.n_sweep.is_empty() {
        return Err(ExperimentError::Config(
            "need at least one family and one sweep size".into(),
        ));
    }
    let mut report = ExperimentReport::new(
        provenance("almost-ortho", cfg, cfg.seed),
        vec!["family", "n", "r", "s", "quotient"],
    );

    let mut quotients: Vec<f64> = Vec::new();
    for (fi, family) in cfg.families.iter().enumerate() {
        let set = interleave_by_sector(&family.build()?);
        let max_n = *cfg.n_sweep.iter().max().unwrap();
        if max_n > set.len() {
            return Err(ExperimentError::Config(format!(
                "family {fi} has {} directions, sweep needs {max_n}",
                set.len()
            )));
        }
        let battery = Battery::build(
            grid,
            &set,
            cfg.random_count,
            grid.points_per_axis() / 4,
            cfg.seed.wrapping_add(fi as u64),
        )?;
        for &n in &cfg.n_sweep {
            let subset = set.prefix(n);
            let r = battery_max_ratio(grid, &subset, &battery, cfg.profile)?;
            let s = sector_ratio(grid, &subset, &battery, cfg.profile)?;
            let quotient = r / (s + (n as f64).ln().sqrt());
            if !quotient.is_finite() {
                return Err(ExperimentError::NonFinite(format!(
                    "almost-orthogonality quotient at family {fi}, n = {n}"
                )));
            }
            report.push_row(vec![
                fi.to_string(),
                n.to_string(),
                fmt_f64(r),
                fmt_f64(s),
                fmt_f64(quotient),
            ]);
            if n == 1 {
                // r = s for a singleton, and both are contractions.
                report.check(
                    quotient <= 1.0 + 1e-10,
                    format!("singleton quotient {quotient} > 1"),
                );
            } else {
                quotients.push(quotient);
            }
        }
    }
    let hi = quotients.iter().cloned().fold(0.0f64, f64::max);
    let lo = quotients.iter().cloned().fold(f64::INFINITY, f64::min);
    report.set_summary("max_quotient", serde_json::json!(hi));
    report.set_summary("min_quotient", serde_json::json!(lo));
    report.set_summary("spread", serde_json::json!(hi / lo));
    report.check(
        hi / lo <= cfg.stability_factor,
        format!("quotient spread {:.3} exceeds {}", hi / lo, cfg.stability_factor),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_sectors_are_singletons() {
        let cfg = AlmostOrthoConfig {
            grid: GridSpec { n: 2, m: 64 },
            families: vec![DirectionSpec::Planar { order: 1, branching: 8, offset: 0 }],
            profile: HmProfile::HilbertSign,
            n_sweep: vec![1, 4, 8],
            seed: 31,
            random_count: 2,
            stability_factor: 2.0,
        };
        let rep = almost_orthogonality_check(&cfg).unwrap();
        assert!(rep.passed, "{:?}", rep.failures);
        // every sector ratio of an order-1 prefix is a single-direction
        // contraction
        for row in &rep.rows {
            let s: f64 = row[3].parse().unwrap();
            assert!(s <= 1.0 + 1e-10, "s = {s}");
        }
    }
}
