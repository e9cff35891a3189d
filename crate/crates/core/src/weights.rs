//! Directional Muckenhoupt weights: a catalog of periodic test weights,
//! sampled A2 constants along directional segments, and weighted norms.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::direction::DirectionSet;
use crate::error::WeightError;
use crate::grid::GridFunction;

/// Positive floor for the periodized power weights: keeps the weight
/// strictly positive at lattice points sitting on the singular hyperplane
/// while staying far below every quadrature scale used here.
pub const POWER_FLOOR: f64 = 1.0 / 4096.0;

/// Catalog of built-in periodic weights, addressable by name and
/// parameters from experiment configs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant { value: f64 },
    /// `base + amplitude * sin(2 pi x_axis)`, requires `base > |amplitude|`.
    Sinusoidal { axis: usize, base: f64, amplitude: f64 },
    /// `max(dist(x_axis, Z), floor)^exponent` with exponent in (-1/2, 1).
    Power { axis: usize, exponent: f64 },
    /// Pointwise product of factors.
    Product { factors: Vec<Weight> },
}

impl Weight {
    pub fn validate(&self, n: usize) -> Result<(), WeightError> {
        match self {
            Weight::Constant { value } => {
                if !value.is_finite() || *value <= 0.0 {
                    return Err(WeightError::BadParams(format!(
                        "constant weight must be positive, got {value}"
                    )));
                }
            }
            Weight::Sinusoidal { axis, base, amplitude } => {
                if *axis >= n {
                    return Err(WeightError::BadParams(format!("axis {axis} out of range")));
                }
                if !(base.is_finite() && amplitude.is_finite()) || *base <= amplitude.abs() {
                    return Err(WeightError::BadParams(
                        "sinusoidal weight needs base > |amplitude|".into(),
                    ));
                }
            }
            Weight::Power { axis, exponent } => {
                if *axis >= n {
                    return Err(WeightError::BadParams(format!("axis {axis} out of range")));
                }
                if !(*exponent > -0.5 && *exponent < 1.0) {
                    return Err(WeightError::BadParams(format!(
                        "power exponent must lie in (-1/2, 1), got {exponent}"
                    )));
                }
            }
            Weight::Product { factors } => {
                if factors.is_empty() {
                    return Err(WeightError::BadParams("empty weight product".into()));
                }
                for f in factors {
                    f.validate(n)?;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Sinusoidal { axis, base, amplitude } => {
                base + amplitude * (std::f64::consts::TAU * x[*axis]).sin()
            }
            Weight::Power { axis, exponent } => {
                let frac = x[*axis].rem_euclid(1.0);
                let d = frac.min(1.0 - frac).max(POWER_FLOOR);
                d.powf(*exponent)
            }
            Weight::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Weight::Constant { value } => format!("constant({value})"),
            Weight::Sinusoidal { axis, base, amplitude } => {
                format!("sinusoidal(axis={axis},{base}+{amplitude}sin)")
            }
            Weight::Power { axis, exponent } => format!("power(axis={axis},a={exponent})"),
            Weight::Product { factors } => {
                let inner: Vec<String> = factors.iter().map(|f| f.describe()).collect();
                format!("product({})", inner.join("*"))
            }
        }
    }
}

/// Result of a sampled A2 sup: a lower bound of the true constant together
/// with the witnessing segment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2Report {
    pub constant: f64,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
    pub argmax_direction: Vec<f64>,
    pub samples: usize,
}

/// Trapezoid quadrature panels per segment in [`a2_constant`].
const A2_NODES: usize = 64;

/// Sampled directional A2 constant: the running max over stratified random
/// centers, all dyadic radii in the list, and all directions of the product
/// `avg_I(w) * avg_I(1/w)` along segments `I(x, t, v)`. Always a lower
/// bound of the true sup; deterministic for a fixed seed.
pub fn a2_constant(
    w: &Weight,
    omega: &DirectionSet,
    samples: usize,
    radii: &[f64],
    seed: u64,
) -> Result<A2Report, WeightError> {
    let n = omega.dimension();
    w.validate(n)?;
    if samples == 0 {
        return Err(WeightError::BadParams("need at least one sample".into()));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && *r < 0.5)) {
        return Err(WeightError::BadParams(
            "radii must be nonempty and lie in (0, 1/2)".into(),
        ));
    }

    use rand::SeedableRng;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Stratified centers: jitter inside the cells of a coarse lattice.
    let strata = (samples as f64).powf(1.0 / n as f64).ceil() as usize;
    let mut centers = Vec::with_capacity(samples);
    'outer: for cell in 0..strata.pow(n as u32) {
        let mut x = vec![0.0f64; n];
        let mut rem = cell;
        for a in (0..n).rev() {
            let idx = rem % strata;
            rem /= strata;
            x[a] = (idx as f64 + rng.gen_range(0.0..1.0)) / strata as f64;
        }
        centers.push(x);
        if centers.len() == samples {
            break 'outer;
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut arg: Option<(Vec<f64>, f64, usize)> = None;
    for x in &centers {
        for t in radii {
            for (vi, v) in omega.iter().enumerate() {
                // Normalize by the first node so constant weights give the
                // product exactly 1 and dyadic rescalings cancel bitwise.
                let mut reference = 0.0;
                let mut sum_w = 0.0;
                let mut sum_inv = 0.0;
                let mut total = 0.0;
                for i in 0..=A2_NODES {
                    let s = -t + 2.0 * t * i as f64 / A2_NODES as f64;
                    let q = if i == 0 || i == A2_NODES { 0.5 } else { 1.0 };
                    let mut p = vec![0.0f64; n];
                    for a in 0..n {
                        p[a] = x[a] + s * v[a];
                    }
                    let value = w.eval(&p);
                    if !value.is_finite() || value <= 0.0 {
                        return Err(WeightError::BadValue(p, value));
                    }
                    if i == 0 {
                        reference = value;
                    }
                    let u = value / reference;
                    sum_w += q * u;
                    sum_inv += q / u;
                    total += q;
                }
                let product = (sum_w / total) * (sum_inv / total);
                if product > best {
                    best = product;
                    arg = Some((x.clone(), *t, vi));
                }
            }
        }
    }
    let (ax, at, avi) = arg.expect("at least one segment evaluated");
    // Cauchy-Schwarz bounds the true product below by 1.
    Ok(A2Report {
        constant: best.max(1.0),
        argmax_center: ax,
        argmax_radius: at,
        argmax_direction: omega.get(avi).coords().to_vec(),
        samples: centers.len(),
    })
}

/// Weighted discrete Lp norm `(M^-n sum |f(x)|^p w(x))^{1/p}`.
pub fn weighted_norm(f: &GridFunction, w: &Weight, p: f64) -> Result<f64, WeightError> {
    if p < 1.0 {
        return Err(WeightError::BadExponent(p));
    }
    w.validate(f.grid.dimension())?;
    let mut sum = 0.0;
    for linear in 0..f.grid.len() {
        let x = f.grid.coord_of(linear);
        let value = w.eval(&x[..f.grid.dimension()]);
        if !value.is_finite() || value <= 0.0 {
            return Err(WeightError::BadValue(
                x[..f.grid.dimension()].to_vec(),
                value,
            ));
        }
        sum += f.values[linear].norm().powf(p) * value;
    }
    Ok((sum / f.grid.len() as f64).powf(1.0 / p))
}
