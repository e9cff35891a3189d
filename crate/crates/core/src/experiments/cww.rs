//! Comparison of the maximal outer piece against the square-function side
//! of the Chang-Wilson-Wolff reduction: the measured ratio should stay
//! bounded as the number of directions grows.

use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use crate::experiments::test_functions::Battery;
use crate::experiments::{
    fmt_f64, interleave_by_sector, provenance, DirectionSpec, ExperimentReport, GridSpec,
};
use crate::fft::fft_forward;
use crate::grid::{norm, GridFunction, Side};
use crate::operators::{cww_square_function, OperatorSpec};
use crate::parallel;
use crate::symbols::HmProfile;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CwwConfig {
    pub grid: GridSpec,
    pub directions: DirectionSpec,
    pub profile: HmProfile,
    /// Littlewood-Paley coordinate (0-based).
    pub axis: usize,
    pub n_sweep: Vec<usize>,
    pub seed: u64,
    #[serde(default = "default_random_count")]
    pub random_count: usize,
    /// Gate for the single-operator ratio.
    #[serde(default = "default_single_bound")]
    pub single_bound: f64,
    /// Allowed growth of the ratio over the sweep, relative to N = 1.
    #[serde(default = "default_growth_bound")]
    pub growth_bound: f64,
}

fn default_random_count() -> usize {
    4
}

fn default_single_bound() -> f64 {
    1.5
}

fn default_growth_bound() -> f64 {
    2.0
}

pub fn cww_comparison(cfg: &CwwConfig) -> Result<ExperimentReport, ExperimentError> {
    let grid = cfg.grid.build()?;
    let set = interleave_by_sector(&cfg.directions.build()?);
    if cfg.n_sweep.is_empty() {
        return Err(ExperimentError::Config("empty n_sweep".into()));
    }
    let max_n = *cfg.n_sweep.iter().max().unwrap();
    if max_n > set.len() {
        return Err(ExperimentError::Config(format!(
            "sweep needs {max_n} directions but the set has {}",
            set.len()
        )));
    }
    let battery = Battery::build(
        grid,
        &set,
        cfg.random_count,
        grid.points_per_axis() / 4,
        cfg.seed,
    )?;

    let mut report = ExperimentReport::new(
        provenance("cww", cfg, cfg.seed),
        vec!["n", "max_ratio", "witness"],
    );

    let mut base_ratio: Option<f64> = None;
    for &n in &cfg.n_sweep {
        let ops: Vec<OperatorSpec> = (0..n)
            .map(|i| OperatorSpec::OuterEta {
                direction: set.get(i).clone(),
                profile: cfg.profile,
                axis: cfg.axis,
            })
            .collect();
        let log_factor = ((n as f64) + 1.0).ln().sqrt();
        let mut worst = (0.0f64, String::new());
        for (name, f) in &battery.members {
            let spectrum = fft_forward(f)?;
            let sup = parallel::max_fields(ops.len(), grid.len(), |i| {
                ops[i]
                    .apply_to_spectrum(&spectrum)
                    .expect("validated operator")
                    .values
                    .iter()
                    .map(|v| v.norm())
                    .collect()
            });
            let sup_gf = GridFunction {
                grid,
                side: Side::Physical,
                values: sup
                    .into_iter()
                    .map(|r| num_complex::Complex64::new(r, 0.0))
                    .collect(),
            };
            let lhs = norm(&sup_gf, 2.0);
            let sq = cww_square_function(f, &ops, cfg.axis)?;
            let denom = norm(f, 2.0) + log_factor * norm(&sq, 2.0);
            let ratio = if denom == 0.0 { 0.0 } else { lhs / denom };
            if !ratio.is_finite() {
                return Err(ExperimentError::NonFinite(format!("cww ratio at n = {n}")));
            }
            if ratio > worst.0 {
                worst = (ratio, name.clone());
            }
        }
        report.push_row(vec![n.to_string(), fmt_f64(worst.0), worst.1]);
        if n == 1 {
            base_ratio = Some(worst.0);
            report.check(
                worst.0 <= cfg.single_bound,
                format!("single-operator ratio {} exceeds {}", worst.0, cfg.single_bound),
            );
        } else if let Some(base) = base_ratio {
            report.check(
                worst.0 <= cfg.growth_bound * base,
                format!(
                    "ratio {} at n = {n} exceeds {} x the single-operator ratio {}",
                    worst.0, cfg.growth_bound, base
                ),
            );
        }
    }

    // Convention row: the zero function has ratio zero.
    let zero = GridFunction::zeros(grid, Side::Physical);
    let denom = norm(&zero, 2.0);
    report.push_row(vec!["0".into(), fmt_f64(denom), "zero".into()]);
    report.check(denom == 0.0, "zero function produced a nonzero ratio".into());
    Ok(report)
}
