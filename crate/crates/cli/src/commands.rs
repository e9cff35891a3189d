//! Command implementations: config parsing, experiment dispatch, report
//! writing, and exit-code mapping.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use lacuna_core::direction::{cell_index, lacunarity_order, SigmaIndex};
use lacuna_core::error::ExperimentError;
use lacuna_core::experiments::almost_ortho::{almost_orthogonality_check, AlmostOrthoConfig};
use lacuna_core::experiments::covering::{verify_covering, CoveringConfig};
use lacuna_core::experiments::cww::{cww_comparison, CwwConfig};
use lacuna_core::experiments::inclusion_exclusion::{
    verify_inclusion_exclusion, InclusionExclusionConfig,
};
use lacuna_core::experiments::kernel_decay::{kernel_decay_report, KernelDecayConfig};
use lacuna_core::experiments::maximal_avg::{maximal_average_boundedness, MaximalAvgConfig};
use lacuna_core::experiments::norm_growth::{norm_growth_sweep, SweepConfig};
use lacuna_core::experiments::test_functions::random_band_limited;
use lacuna_core::experiments::{
    fmt_f64, parse_config, provenance, DirectionSpec, ExperimentReport, GridSpec,
};
use lacuna_core::grid::{
    norm, read_grid_function, write_grid_function, GridFunction, GridPrecision,
};
use lacuna_core::operators::OperatorSpec;
use lacuna_core::weights::{a2_constant, Weight};

use crate::Command;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(xe) = cause.downcast_ref::<ExperimentError>() {
            return match xe {
                ExperimentError::NonFinite(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

pub fn run(
    cmd: Command,
    config: &Option<PathBuf>,
    out: &Option<PathBuf>,
    seed: Option<u64>,
    force: bool,
) -> Result<bool> {
    let config_path = config
        .as_ref()
        .context("--config PATH is required")?
        .clone();
    let out_dir = out.as_ref().context("--out DIR is required")?.clone();
    let text = fs::read_to_string(&config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;

    let outcome = match cmd {
        Command::Dissect => dissect(&text, &out_dir, force)?,
        Command::GenDirections => gen_directions(&text, &out_dir, force)?,
        Command::VerifyCovering => {
            let mut cfg: CoveringConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&verify_covering(&cfg)?, &out_dir, force, &[])?
        }
        Command::VerifyIe => {
            let mut cfg: InclusionExclusionConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&verify_inclusion_exclusion(&cfg)?, &out_dir, force, &[])?
        }
        Command::Apply => apply(&text, &out_dir, seed, force)?,
        Command::SweepNorms => {
            let mut cfg: SweepConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&norm_growth_sweep(&cfg)?, &out_dir, force, &[])?
        }
        Command::KernelDecay => {
            let cfg: KernelDecayConfig = parse_config(&text)?;
            write_report(&kernel_decay_report(&cfg)?, &out_dir, force, &[])?
        }
        Command::Cww => {
            let mut cfg: CwwConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&cww_comparison(&cfg)?, &out_dir, force, &[])?
        }
        Command::AlmostOrtho => {
            let mut cfg: AlmostOrthoConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&almost_orthogonality_check(&cfg)?, &out_dir, force, &[])?
        }
        Command::MaximalAvg => {
            let mut cfg: MaximalAvgConfig = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write_report(&maximal_average_boundedness(&cfg)?, &out_dir, force, &[])?
        }
        Command::A2 => a2(&text, &out_dir, seed, force)?,
    };
    Ok(outcome)
}

/// Refuse to clobber any planned file unless --force was given, then write
/// the standard report pair plus any extra files.
fn write_report(
    report: &ExperimentReport,
    out_dir: &Path,
    force: bool,
    extra: &[(&str, Vec<u8>)],
) -> Result<bool> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let mut planned: Vec<(PathBuf, Vec<u8>)> = vec![
        (out_dir.join("report.csv"), report.to_csv().into_bytes()),
        (
            out_dir.join("summary.json"),
            report.summary_json().into_bytes(),
        ),
    ];
    for (name, bytes) in extra {
        planned.push((out_dir.join(name), bytes.clone()));
    }
    if !force {
        for (path, _) in &planned {
            if path.exists() {
                bail!(
                    "refusing to overwrite {}; pass --force to allow it",
                    path.display()
                );
            }
        }
    }
    for (path, bytes) in &planned {
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{}", report.one_line());
    Ok(report.passed)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DissectConfig {
    directions: DirectionSpec,
    #[serde(default)]
    max_order: Option<u32>,
}

fn dissect(text: &str, out_dir: &Path, force: bool) -> Result<bool> {
    let cfg: DissectConfig = parse_config(text)?;
    let set = cfg.directions.build()?;
    let mut report = ExperimentReport::new(
        provenance("dissect", &cfg, 0),
        vec!["direction", "sigma", "ell"],
    );
    for (i, v) in set.iter().enumerate() {
        let cell = cell_index(v);
        for sigma in SigmaIndex::all(set.dimension()) {
            report.push_row(vec![
                i.to_string(),
                format!("{}-{}", sigma.first(), sigma.second()),
                cell.get(sigma).to_string(),
            ]);
        }
    }
    report.set_summary("count", serde_json::json!(set.len()));
    report.set_summary("dimension", serde_json::json!(set.dimension()));
    if let Some(max_order) = cfg.max_order {
        let order = lacunarity_order(&set, max_order);
        report.set_summary("lacunarity_order", serde_json::json!(order));
        report.check(
            order.is_some(),
            format!("set does not certify at order <= {max_order}"),
        );
    }
    write_report(
        &report,
        out_dir,
        force,
        &[("directions.json", set.to_json().into_bytes())],
    )
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenDirectionsConfig {
    directions: DirectionSpec,
    #[serde(default)]
    declare_order: Option<u32>,
}

fn gen_directions(text: &str, out_dir: &Path, force: bool) -> Result<bool> {
    let cfg: GenDirectionsConfig = parse_config(text)?;
    let set = cfg.directions.build()?;
    let mut report = ExperimentReport::new(
        provenance("gen-directions", &cfg, 0),
        vec!["direction", "coords"],
    );
    for (i, v) in set.iter().enumerate() {
        let coords: Vec<String> = v.coords().iter().map(|c| fmt_f64(*c)).collect();
        report.push_row(vec![i.to_string(), coords.join(";")]);
    }
    report.set_summary("count", serde_json::json!(set.len()));
    if let Some(order) = cfg.declare_order {
        let verified = lacunarity_order(&set, order);
        report.set_summary("verified_order", serde_json::json!(verified));
        report.check(
            verified.is_some(),
            format!("declared order {order} not certified"),
        );
    }
    write_report(
        &report,
        out_dir,
        force,
        &[("directions.json", set.to_json().into_bytes())],
    )
}

fn default_true() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InputSpec {
    /// Read a grid function file (JSON header + raw values).
    File { path: String },
    RandomBandLimited {
        grid: GridSpec,
        band: usize,
        #[serde(default = "default_true")]
        off_hyperplanes: bool,
        seed: u64,
    },
    PureWave { grid: GridSpec, k: Vec<i64> },
}

fn default_output_name() -> String {
    "output.grid".into()
}

fn default_precision() -> GridPrecision {
    GridPrecision::Complex128
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApplyConfig {
    input: InputSpec,
    operator: OperatorSpec,
    #[serde(default = "default_output_name")]
    output_name: String,
    #[serde(default = "default_precision")]
    precision: GridPrecision,
}

fn apply(text: &str, out_dir: &Path, seed: Option<u64>, force: bool) -> Result<bool> {
    let mut cfg: ApplyConfig = parse_config(text)?;
    if let (Some(s), InputSpec::RandomBandLimited { seed: cfg_seed, .. }) =
        (seed, &mut cfg.input)
    {
        *cfg_seed = s;
    }
    let input: GridFunction = match &cfg.input {
        InputSpec::File { path } => {
            let file = fs::File::open(path).with_context(|| format!("opening {path}"))?;
            read_grid_function(std::io::BufReader::new(file)).map_err(ExperimentError::Grid)?
        }
        InputSpec::RandomBandLimited {
            grid,
            band,
            off_hyperplanes,
            seed,
        } => random_band_limited(grid.build()?, *band, *off_hyperplanes, *seed),
        InputSpec::PureWave { grid, k } => GridFunction::pure_wave(grid.build()?, k),
    };
    let output = cfg.operator.apply(&input).map_err(ExperimentError::Grid)?;

    let mut report =
        ExperimentReport::new(provenance("apply", &cfg, seed.unwrap_or(0)), vec!["quantity", "value"]);
    let out_l2 = norm(&output, 2.0);
    report.push_row(vec!["input_l2".into(), fmt_f64(norm(&input, 2.0))]);
    report.push_row(vec!["output_l2".into(), fmt_f64(out_l2)]);
    report.push_row(vec![
        "output_linf".into(),
        fmt_f64(norm(&output, f64::INFINITY)),
    ]);
    if !out_l2.is_finite() {
        return Err(ExperimentError::NonFinite("operator output".into()).into());
    }

    let mut bytes = Vec::new();
    write_grid_function(&mut bytes, &output, cfg.precision).map_err(ExperimentError::Grid)?;
    write_report(&report, out_dir, force, &[(&cfg.output_name.clone(), bytes)])
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct A2Config {
    directions: DirectionSpec,
    weight: Weight,
    samples: usize,
    radii: Vec<f64>,
    seed: u64,
}

fn a2(text: &str, out_dir: &Path, seed: Option<u64>, force: bool) -> Result<bool> {
    let mut cfg: A2Config = parse_config(text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let set = cfg.directions.build()?;
    let rep = a2_constant(&cfg.weight, &set, cfg.samples, &cfg.radii, cfg.seed)
        .map_err(ExperimentError::Weight)?;
    let mut report = ExperimentReport::new(
        provenance("a2", &cfg, cfg.seed),
        vec!["weight", "constant", "argmax_radius", "argmax_center", "argmax_direction"],
    );
    let center: Vec<String> = rep.argmax_center.iter().map(|c| fmt_f64(*c)).collect();
    let direction: Vec<String> = rep.argmax_direction.iter().map(|c| fmt_f64(*c)).collect();
    report.push_row(vec![
        cfg.weight.describe(),
        fmt_f64(rep.constant),
        fmt_f64(rep.argmax_radius),
        center.join(";"),
        direction.join(";"),
    ]);
    report.set_summary("constant", serde_json::json!(rep.constant));
    report.set_summary("samples", serde_json::json!(rep.samples));
    report.check(rep.constant >= 1.0, "A2 product fell below 1".into());
    write_report(&report, out_dir, force, &[])
}
