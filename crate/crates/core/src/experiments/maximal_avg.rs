//! Maximal segment averages: the lacunary family's ratio curve stays flat
//! as the direction count grows, while equispaced directions keep
//! improving their coverage of a needle-like test function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::direction::generate_equispaced;
use crate::error::ExperimentError;
use crate::experiments::{
    fmt_f64, interleave_by_sector, provenance, DirectionSpec, ExperimentReport, GridSpec,
};
use crate::grid::{norm, GridFunction, Side, TorusGrid};
use crate::operators::directional_maximal;
use crate::operators::maximal::segment_average_field;
use crate::parallel;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalAvgConfig {
    pub grid: GridSpec,
    /// The lacunary family swept by nested prefixes.
    pub lacunary: DirectionSpec,
    pub n_sweep: Vec<usize>,
    pub radii: Vec<f64>,
    pub seed: u64,
    /// Allowed max/min of the lacunary ratio curve.
    #[serde(default = "default_plateau")]
    pub plateau_factor: f64,
}

fn default_plateau() -> f64 {
    1.5
}

/// A needle-like test function: one grid cell at a generic offset,
/// normalized to unit L2 norm.
pub fn needle_function(grid: TorusGrid) -> GridFunction {
    let mut f = GridFunction::zeros(grid, Side::Physical);
    let m = grid.points_per_axis();
    // generic (non-symmetric) cell, away from the axes of the torus
    let mut linear = 0usize;
    for a in 0..grid.dimension() {
        let frac = if a == 0 { 0.37 } else { 0.41 + 0.07 * a as f64 };
        linear = linear * m + ((frac * m as f64) as usize % m);
    }
    let amp = (grid.len() as f64).sqrt();
    f.values[linear] = Complex64::new(amp, 0.0);
    f
}

pub fn maximal_average_boundedness(
    cfg: &MaximalAvgConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let grid = cfg.grid.build()?;
    if cfg.n_sweep.is_empty() || cfg.n_sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Config(
            "n_sweep must be nonempty and strictly increasing".into(),
        ));
    }
    let lacunary = interleave_by_sector(&cfg.lacunary.build()?);
    let max_n = *cfg.n_sweep.last().unwrap();
    if max_n > lacunary.len() {
        return Err(ExperimentError::Config(format!(
            "lacunary family has {} directions, sweep needs {max_n}",
            lacunary.len()
        )));
    }

    let f = needle_function(grid);
    let denom = norm(&f, 2.0);
    let abs = f.abs_field();

    let mut report = ExperimentReport::new(
        provenance("maximal-avg", cfg, cfg.seed),
        vec!["family", "n", "ratio"],
    );

    // Control: averaging a constant changes nothing.
    let ones = GridFunction::constant(grid, Side::Physical, Complex64::new(1.0, 0.0));
    let small = lacunary.prefix(cfg.n_sweep[0].min(lacunary.len()));
    let control = directional_maximal(&ones, &small, &cfg.radii)?;
    let control_ratio = norm(&control, 2.0) / norm(&ones, 2.0);
    report.push_row(vec!["constant_control".into(), small.len().to_string(), fmt_f64(control_ratio)]);
    report.check(
        (control_ratio - 1.0).abs() <= 1e-10,
        format!("constant control ratio {control_ratio} differs from 1"),
    );

    // Lacunary curve: running max over the prefix, one direction at a time.
    let mut running = abs.clone();
    let mut checkpoint = 0usize;
    let mut lac_curve: Vec<f64> = Vec::new();
    for i in 0..max_n {
        let dir_field = parallel::max_fields(cfg.radii.len(), grid.len(), |ri| {
            segment_average_field(&abs, grid, lacunary.get(i), cfg.radii[ri])
        });
        for (r, v) in running.iter_mut().zip(&dir_field) {
            if *v > *r {
                *r = *v;
            }
        }
        while checkpoint < cfg.n_sweep.len() && cfg.n_sweep[checkpoint] == i + 1 {
            let gf = GridFunction {
                grid,
                side: Side::Physical,
                values: running.iter().map(|r| Complex64::new(*r, 0.0)).collect(),
            };
            let ratio = norm(&gf, 2.0) / denom;
            lac_curve.push(ratio);
            report.push_row(vec![
                "lacunary".into(),
                cfg.n_sweep[checkpoint].to_string(),
                fmt_f64(ratio),
            ]);
            checkpoint += 1;
        }
    }
    let hi = lac_curve.iter().cloned().fold(0.0f64, f64::max);
    let lo = lac_curve.iter().cloned().fold(f64::INFINITY, f64::min);
    report.set_summary("lacunary_spread", serde_json::json!(hi / lo));
    report.check(
        hi / lo <= cfg.plateau_factor,
        format!(
            "lacunary curve spread {:.4} exceeds {}",
            hi / lo,
            cfg.plateau_factor
        ),
    );

    // Equispaced curve: a fresh family per size.
    let mut prev = 0.0f64;
    let mut strictly_increasing = true;
    for &n in &cfg.n_sweep {
        let eq = generate_equispaced(n)?;
        let field = directional_maximal(&f, &eq, &cfg.radii)?;
        let ratio = norm(&field, 2.0) / denom;
        if !ratio.is_finite() {
            return Err(ExperimentError::NonFinite(format!(
                "equispaced ratio at n = {n}"
            )));
        }
        report.push_row(vec!["equispaced".into(), n.to_string(), fmt_f64(ratio)]);
        if ratio <= prev {
            strictly_increasing = false;
            report.fail(format!(
                "equispaced curve not strictly increasing at n = {n}: {prev} -> {ratio}"
            ));
        }
        prev = ratio;
    }
    report.set_summary("equispaced_strictly_increasing", serde_json::json!(strictly_increasing));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_shapes() {
        let cfg = MaximalAvgConfig {
            grid: GridSpec { n: 2, m: 64 },
            lacunary: DirectionSpec::Planar { order: 2, branching: 4, offset: 0 },
            n_sweep: vec![4, 8, 16],
            radii: vec![0.0625, 0.25],
            seed: 3,
            plateau_factor: 1.5,
        };
        let rep = maximal_average_boundedness(&cfg).unwrap();
        // the lacunary plateau must hold even at this small scale
        let spread = rep.summary["lacunary_spread"].as_f64().unwrap();
        assert!(spread <= 1.5, "spread {spread}");
        // equispaced growth asserted by the harness itself when it holds;
        // at this tiny scale we only require the rows to exist
        assert!(rep.rows.iter().filter(|r| r[0] == "equispaced").count() == 3);
    }
}
