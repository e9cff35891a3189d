//! End-to-end reproducible experiments. Each experiment consumes a config,
//! runs deterministically for a fixed (config, seed, threads), and yields an
//! [`ExperimentReport`]: CSV rows with provenance, a JSON summary, and the
//! pass/fail verdict evaluated inside the harness.

pub mod almost_ortho;
pub mod covering;
pub mod cww;
pub mod inclusion_exclusion;
pub mod kernel_decay;
pub mod maximal_avg;
pub mod norm_growth;
pub mod pointwise;
pub mod test_functions;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::direction::{
    generate_equispaced, generate_planar_lacunary_offset, generate_product_lacunary,
    partition_by_sector,
    Direction, DirectionSet, SigmaIndex,
};
use crate::error::ExperimentError;
use crate::grid::TorusGrid;

/// Identification carried by every report row.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub experiment: String,
    pub config_digest: String,
    pub code_version: String,
    pub seed: u64,
    pub threads: usize,
}

pub fn code_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

pub fn thread_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// First 12 hex digits of the SHA-256 of the canonical config JSON.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let hash = Sha256::digest(&bytes);
    let mut out = String::new();
    for b in hash.iter().take(6) {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn provenance<T: Serialize>(experiment: &str, config: &T, seed: u64) -> Provenance {
    Provenance {
        experiment: experiment.to_string(),
        config_digest: config_digest(config),
        code_version: code_version(),
        seed,
        threads: thread_count(),
    }
}

/// Structured result of one experiment run.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl ExperimentReport {
    pub fn new(provenance: Provenance, columns: Vec<&'static str>) -> Self {
        ExperimentReport {
            provenance,
            columns,
            rows: Vec::new(),
            summary: serde_json::Map::new(),
            passed: true,
            failures: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_summary(&mut self, key: &str, value: serde_json::Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn fail(&mut self, reason: String) {
        self.passed = false;
        self.failures.push(reason);
    }

    /// Record a tolerance check: keeps the report honest about which gate
    /// failed and with what value.
    pub fn check(&mut self, ok: bool, reason: String) {
        if !ok {
            self.fail(reason);
        }
    }

    /// CSV with provenance columns leading every row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("experiment,config,version,seed,threads");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        let p = &self.provenance;
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}",
                p.experiment, p.config_digest, p.code_version, p.seed, p.threads
            ));
            for cell in row {
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }

    /// JSON summary: provenance, verdict, failures, and the measured
    /// quantities. Keys are sorted, so the output is byte-stable.
    pub fn summary_json(&self) -> String {
        let mut top = serde_json::Map::new();
        top.insert(
            "provenance".into(),
            serde_json::to_value(&self.provenance).expect("provenance"),
        );
        top.insert("passed".into(), serde_json::Value::Bool(self.passed));
        top.insert(
            "failures".into(),
            serde_json::Value::Array(
                self.failures
                    .iter()
                    .map(|f| serde_json::Value::String(f.clone()))
                    .collect(),
            ),
        );
        top.insert(
            "summary".into(),
            serde_json::Value::Object(self.summary.clone()),
        );
        serde_json::to_string_pretty(&serde_json::Value::Object(top)).expect("summary json")
    }

    pub fn one_line(&self) -> String {
        format!(
            "{}: {} ({} rows{})",
            self.provenance.experiment,
            if self.passed { "PASS" } else { "FAIL" },
            self.rows.len(),
            if self.failures.is_empty() {
                String::new()
            } else {
                format!("; {}", self.failures.join("; "))
            }
        )
    }
}

/// Shortest-roundtrip decimal text for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Parse and validate a JSON config, rejecting unknown fields.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T, ExperimentError> {
    serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<TorusGrid, ExperimentError> {
        Ok(TorusGrid::new(self.n, self.m)?)
    }
}

/// How an experiment names its direction set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionSpec {
    /// Planar nested-perturbation family of the given order and branching;
    /// `offset` shifts the anchor exponents into deeper sectors.
    Planar {
        order: u32,
        branching: u32,
        #[serde(default)]
        offset: u32,
    },
    /// Product-type family from exponent lists.
    Product {
        n: usize,
        exponent_lists: Vec<Vec<u32>>,
    },
    /// Equispaced planar control family.
    Equispaced { count: usize },
    /// Explicit list of unit coordinate vectors.
    Explicit { directions: Vec<Vec<f64>> },
}

impl DirectionSpec {
    pub fn build(&self) -> Result<DirectionSet, ExperimentError> {
        let set = match self {
            DirectionSpec::Planar {
                order,
                branching,
                offset,
            } => generate_planar_lacunary_offset(*order, *branching, *offset)?,
            DirectionSpec::Product { n, exponent_lists } => {
                generate_product_lacunary(*n, exponent_lists)?
            }
            DirectionSpec::Equispaced { count } => generate_equispaced(*count)?,
            DirectionSpec::Explicit { directions } => {
                let dirs = directions
                    .iter()
                    .map(|c| Direction::new(c.clone()))
                    .collect::<Result<Vec<_>, _>>()?;
                DirectionSet::new(dirs)?
            }
        };
        Ok(set)
    }
}

/// Reorder a planar set so nested prefixes spread across sectors before
/// descending into clusters: partition by the leading pair's sector,
/// interleave each group recursively, then merge round-robin. Nested
/// prefix subsets then sample the whole angular range at every size.
pub fn interleave_by_sector(set: &DirectionSet) -> DirectionSet {
    fn rec(dirs: Vec<Direction>, depth: usize) -> Vec<Direction> {
        if dirs.len() <= 1 || depth > 8 {
            return dirs;
        }
        let set = match DirectionSet::new(dirs.clone()) {
            Ok(s) => s,
            Err(_) => return dirs,
        };
        let sigma = SigmaIndex::all(set.dimension())[0];
        let groups = partition_by_sector(&set, sigma);
        if groups.len() <= 1 {
            return dirs;
        }
        let ordered: Vec<Vec<Direction>> = groups
            .into_values()
            .map(|g| rec(g.iter().cloned().collect(), depth + 1))
            .collect();
        let mut merged = Vec::with_capacity(dirs.len());
        let mut idx = 0usize;
        loop {
            let mut any = false;
            for g in &ordered {
                if idx < g.len() {
                    merged.push(g[idx].clone());
                    any = true;
                }
            }
            if !any {
                break;
            }
            idx += 1;
        }
        merged
    }
    let dirs = rec(set.iter().cloned().collect(), 0);
    DirectionSet::new(dirs).expect("reordering preserves validity")
}

/// Least-squares fit of `r ~ a + c * phi(N)` and its residual sum of
/// squares; `phi` is supplied by the model.
fn fit_two_param(ns: &[usize], rs: &[f64], phi: impl Fn(f64) -> f64) -> (f64, f64, f64) {
    let k = ns.len() as f64;
    let xs: Vec<f64> = ns.iter().map(|n| phi(*n as f64)).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = rs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(rs).map(|(x, y)| x * y).sum();
    let det = k * sxx - sx * sx;
    let (a, c) = if det.abs() < 1e-12 {
        (sy / k, 0.0)
    } else {
        ((sy * sxx - sx * sxy) / det, (k * sxy - sx * sy) / det)
    };
    let rss: f64 = xs
        .iter()
        .zip(rs)
        .map(|(x, y)| {
            let e = y - (a + c * x);
            e * e
        })
        .sum();
    (a, c, rss)
}

/// Residual comparison of the constant, sqrt-log, and log growth models.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub const_rss: f64,
    pub sqrtlog_a: f64,
    pub sqrtlog_c: f64,
    pub sqrtlog_rss: f64,
    pub log_a: f64,
    pub log_c: f64,
    pub log_rss: f64,
}

/// Fit `r(N)` against the three nested models using natural logarithms.
pub fn fit_growth_models(ns: &[usize], rs: &[f64]) -> GrowthFit {
    let mean = rs.iter().sum::<f64>() / rs.len() as f64;
    let const_rss = rs.iter().map(|r| (r - mean) * (r - mean)).sum();
    let (sa, sc, srss) = fit_two_param(ns, rs, |n| n.ln().sqrt());
    let (la, lc, lrss) = fit_two_param(ns, rs, |n| n.ln());
    GrowthFit {
        const_rss,
        sqrtlog_a: sa,
        sqrtlog_c: sc,
        sqrtlog_rss: srss,
        log_a: la,
        log_c: lc,
        log_rss: lrss,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_config_sensitive() {
        let a = GridSpec { n: 2, m: 64 };
        let b = GridSpec { n: 2, m: 128 };
        assert_eq!(config_digest(&a), config_digest(&a));
        assert_ne!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 12);
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let p = provenance("demo", &GridSpec { n: 2, m: 8 }, 42);
        let mut r = ExperimentReport::new(p, vec!["n", "value"]);
        r.push_row(vec!["1".into(), fmt_f64(0.125)]);
        r.set_summary("max", serde_json::json!(0.125));
        let csv1 = r.to_csv();
        let csv2 = r.to_csv();
        assert_eq!(csv1, csv2);
        assert!(csv1.starts_with("experiment,config,version,seed,threads,n,value\n"));
        assert!(r.summary_json().contains("\"passed\": true"));
        r.check(false, "demo gate".into());
        assert!(!r.passed);
        assert!(r.one_line().contains("FAIL"));
    }

    #[test]
    fn direction_specs_build() {
        assert_eq!(
            DirectionSpec::Planar { order: 1, branching: 4, offset: 0 }
                .build()
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            DirectionSpec::Equispaced { count: 5 }.build().unwrap().len(),
            5
        );
        let product = DirectionSpec::Product {
            n: 3,
            exponent_lists: vec![vec![1, 2], vec![4]],
        };
        assert_eq!(product.build().unwrap().len(), 2);
        assert!(DirectionSpec::Explicit {
            directions: vec![vec![0.6, 0.8], vec![0.6, 0.8]]
        }
        .build()
        .is_err());
    }

    #[test]
    fn interleave_spreads_sectors() {
        let set = generate_planar_lacunary_offset(2, 4, 0).unwrap();
        let spread = interleave_by_sector(&set);
        assert_eq!(spread.len(), set.len());
        // first four members hit four distinct outer sectors
        let sigma = SigmaIndex::all(2)[0];
        let mut sectors = std::collections::BTreeSet::new();
        for i in 0..4 {
            sectors.insert(crate::direction::sector_index(spread.get(i), sigma));
        }
        assert_eq!(sectors.len(), 4);
    }

    #[test]
    fn growth_fit_prefers_matching_model() {
        let ns: Vec<usize> = vec![2, 4, 8, 16, 32, 64, 128, 256];
        let rs: Vec<f64> = ns.iter().map(|n| 1.0 + 0.5 * (*n as f64).ln().sqrt()).collect();
        let fit = fit_growth_models(&ns, &rs);
        assert!(fit.sqrtlog_rss < 1e-20);
        assert!(fit.sqrtlog_rss < fit.const_rss);
        assert!(fit.sqrtlog_rss < fit.log_rss);
        assert!(fit.sqrtlog_c > 0.49 && fit.sqrtlog_c < 0.51);
    }

    #[test]
    fn config_parsing_rejects_unknown_fields() {
        let ok: Result<GridSpec, _> = parse_config(r#"{"n": 2, "m": 64}"#);
        assert!(ok.is_ok());
        let bad: Result<GridSpec, _> = parse_config(r#"{"n": 2, "m": 64, "extra": 1}"#);
        assert!(bad.is_err());
    }
}
