//! Periodic sampling grids on the torus `[0,1)^n` and complex fields on
//! them, plus discrete Lp norms and raw import/export.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Which side of the transform a field lives on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Physical,
    Frequency,
}

/// An `n`-dimensional periodic grid with `M` points per axis, `M` a power
/// of two. Physical positions are `i / M`; the frequency lattice is
/// `{-M/2, ..., M/2 - 1}^n` in standard FFT storage order.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self, GridError> {
        if !(2..=4).contains(&n) {
            return Err(GridError::Dimension(n));
        }
        let max = match n {
            2 => 1024,
            3 => 128,
            _ => 32,
        };
        if !m.is_power_of_two() || m < 8 || m > max {
            return Err(GridError::Size { n, m, max });
        }
        Ok(TorusGrid { n, m })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn log2_m(&self) -> u32 {
        self.m.trailing_zeros()
    }

    /// Dyadic scales `t` for which the Littlewood-Paley band `p(2^-t xi_j)`
    /// meets the lattice: `0 ..= log2(M) - 1`.
    pub fn lp_scales(&self) -> std::ops::RangeInclusive<i64> {
        0..=(self.log2_m() as i64 - 1)
    }

    /// Signed frequency of one storage index along one axis.
    #[inline]
    pub fn freq_1d(&self, k: usize) -> i64 {
        if k < self.m / 2 {
            k as i64
        } else {
            k as i64 - self.m as i64
        }
    }

    /// Decode a linear storage index into the signed frequency vector.
    pub fn freq_of(&self, mut linear: usize) -> [i64; 4] {
        let mut out = [0i64; 4];
        for axis in (0..self.n).rev() {
            out[axis] = self.freq_1d(linear % self.m);
            linear /= self.m;
        }
        out
    }

    /// Decode a linear storage index into the physical position in `[0,1)^n`.
    pub fn coord_of(&self, mut linear: usize) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for axis in (0..self.n).rev() {
            out[axis] = (linear % self.m) as f64 / self.m as f64;
            linear /= self.m;
        }
        out
    }

    /// Signed position in `[-1/2, 1/2)^n` of a linear storage index.
    pub fn signed_coord_of(&self, mut linear: usize) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for axis in (0..self.n).rev() {
            let k = linear % self.m;
            let s = if k < self.m / 2 {
                k as i64
            } else {
                k as i64 - self.m as i64
            };
            out[axis] = s as f64 / self.m as f64;
            linear /= self.m;
        }
        out
    }

    /// Linear storage index of an integer multi-index (taken mod M).
    pub fn index_of(&self, idx: &[i64]) -> usize {
        let m = self.m as i64;
        let mut linear = 0usize;
        for axis in 0..self.n {
            let k = idx[axis].rem_euclid(m) as usize;
            linear = linear * self.m + k;
        }
        linear
    }

    /// Iterate `(linear, xi)` over the whole frequency lattice. The closure
    /// receives the signed frequency as floats, ready for symbol evaluation.
    pub fn for_each_freq(&self, mut f: impl FnMut(usize, &[f64])) {
        let n = self.n;
        let m = self.m;
        let mut idx = [0usize; 4];
        let mut xi = [0.0f64; 4];
        for axis in 0..n {
            xi[axis] = 0.0;
        }
        for linear in 0..self.len() {
            f(linear, &xi[..n]);
            // odometer increment, last axis fastest
            for axis in (0..n).rev() {
                idx[axis] += 1;
                if idx[axis] == m {
                    idx[axis] = 0;
                    xi[axis] = 0.0;
                } else {
                    xi[axis] = self.freq_1d(idx[axis]) as f64;
                    break;
                }
            }
        }
    }
}

/// A complex field sampled on a [`TorusGrid`], tagged with the side it
/// lives on. Immutable by convention once built.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: TorusGrid,
    pub side: Side,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, side: Side, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length(values.len(), grid.len()));
        }
        Ok(GridFunction { grid, side, values })
    }

    pub fn zeros(grid: TorusGrid, side: Side) -> Self {
        GridFunction {
            grid,
            side,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, side: Side, c: Complex64) -> Self {
        GridFunction {
            grid,
            side,
            values: vec![c; grid.len()],
        }
    }

    /// A pure wave `exp(2 pi i k.x)` on the physical side.
    pub fn pure_wave(grid: TorusGrid, k: &[i64]) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for linear in 0..grid.len() {
            let x = grid.coord_of(linear);
            let phase: f64 = (0..grid.dimension())
                .map(|a| k[a] as f64 * x[a])
                .sum::<f64>()
                * std::f64::consts::TAU;
            values.push(Complex64::new(phase.cos(), phase.sin()));
        }
        GridFunction {
            grid,
            side: Side::Physical,
            values,
        }
    }

    pub fn expect_side(&self, side: Side) -> Result<(), GridError> {
        if self.side != side {
            return Err(GridError::SideMismatch {
                expected: side,
                got: self.side,
            });
        }
        Ok(())
    }

    /// Pointwise modulus as a real vector.
    pub fn abs_field(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Discrete Lp norm with cell weight `M^-n`; `p = inf` gives the max norm.
/// Summation is in fixed storage order so results are reproducible.
/// Panics if `p < 1`.
pub fn norm(f: &GridFunction, p: f64) -> f64 {
    assert!(p >= 1.0, "Lp norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return f.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    }
    let weight = 1.0 / f.grid.len() as f64;
    if p == 2.0 {
        let sum: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
        (weight * sum).sqrt()
    } else {
        let sum: f64 = f.values.iter().map(|v| v.norm().powf(p)).sum();
        (weight * sum).powf(1.0 / p)
    }
}

/// Relative L2 distance `||a - b||_2 / ||b||_2` (or the absolute distance
/// when `b` vanishes).
pub fn rel_l2_error(a: &GridFunction, b: &GridFunction) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    let weight = 1.0 / a.grid.len() as f64;
    let num: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = b.values.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        (weight * num).sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    n: usize,
    m: usize,
    side: Side,
    dtype: String,
}

/// Numeric precision for grid file export.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPrecision {
    Complex64,
    Complex128,
}

/// Write a grid function as one JSON header line followed by raw
/// little-endian interleaved re/im values.
pub fn write_grid_function<W: Write>(
    mut w: W,
    f: &GridFunction,
    precision: GridPrecision,
) -> Result<(), GridError> {
    let header = GridHeader {
        n: f.grid.dimension(),
        m: f.grid.points_per_axis(),
        side: f.side,
        dtype: match precision {
            GridPrecision::Complex64 => "c64".into(),
            GridPrecision::Complex128 => "c128".into(),
        },
    };
    let mut line = serde_json::to_string(&header).expect("header serializes");
    line.push('\n');
    w.write_all(line.as_bytes())?;
    match precision {
        GridPrecision::Complex64 => {
            for v in &f.values {
                w.write_all(&(v.re as f32).to_le_bytes())?;
                w.write_all(&(v.im as f32).to_le_bytes())?;
            }
        }
        GridPrecision::Complex128 => {
            for v in &f.values {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Read a grid function written by [`write_grid_function`].
pub fn read_grid_function<R: Read>(mut r: R) -> Result<GridFunction, GridError> {
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let got = r.read(&mut byte)?;
        if got == 0 {
            return Err(GridError::BadHeader("missing newline".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        header_bytes.push(byte[0]);
        if header_bytes.len() > 4096 {
            return Err(GridError::BadHeader("header too long".into()));
        }
    }
    let header: GridHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| GridError::BadHeader(e.to_string()))?;
    let grid = TorusGrid::new(header.n, header.m)?;
    let mut values = Vec::with_capacity(grid.len());
    match header.dtype.as_str() {
        "c64" => {
            let mut buf = [0u8; 8];
            for _ in 0..grid.len() {
                r.read_exact(&mut buf)?;
                let re = f32::from_le_bytes(buf[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(buf[4..8].try_into().unwrap());
                values.push(Complex64::new(re as f64, im as f64));
            }
        }
        "c128" => {
            let mut buf = [0u8; 16];
            for _ in 0..grid.len() {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
                values.push(Complex64::new(re, im));
            }
        }
        other => return Err(GridError::BadHeader(format!("unknown dtype {other:?}"))),
    }
    GridFunction::new(grid, header.side, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(2, 64).is_ok());
        assert!(TorusGrid::new(2, 48).is_err());
        assert!(TorusGrid::new(2, 4).is_err());
        assert!(TorusGrid::new(2, 2048).is_err());
        assert!(TorusGrid::new(3, 256).is_err());
        assert!(TorusGrid::new(4, 32).is_ok());
        assert!(TorusGrid::new(4, 64).is_err());
        assert!(TorusGrid::new(5, 16).is_err());
    }

    #[test]
    fn freq_decode_round_trip() {
        let g = TorusGrid::new(3, 8).unwrap();
        for linear in 0..g.len() {
            let xi = g.freq_of(linear);
            assert_eq!(g.index_of(&xi), linear);
            for a in 0..3 {
                assert!((-4..4).contains(&xi[a]));
            }
        }
        let mut seen = 0;
        g.for_each_freq(|linear, xi| {
            let expect = g.freq_of(linear);
            for a in 0..3 {
                assert_eq!(xi[a] as i64, expect[a]);
            }
            seen += 1;
        });
        assert_eq!(seen, g.len());
    }

    #[test]
    fn norm_basics() {
        let g = TorusGrid::new(2, 8).unwrap();
        let c = GridFunction::constant(g, Side::Physical, Complex64::new(-3.0, 4.0));
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert_abs_diff_eq!(norm(&c, p), 5.0, epsilon = 1e-12);
        }
        let mut half = GridFunction::zeros(g, Side::Physical);
        for i in 0..g.len() / 2 {
            half.values[i] = Complex64::new(1.0, 0.0);
        }
        assert_abs_diff_eq!(norm(&half, 1.0), 0.5, epsilon = 1e-15);

        let scaled = GridFunction::new(
            g,
            Side::Physical,
            half.values.iter().map(|v| v * 3.0).collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(norm(&scaled, 2.0), 3.0 * norm(&half, 2.0), epsilon = 1e-14);
    }

    #[test]
    #[should_panic]
    fn norm_rejects_small_p() {
        let g = TorusGrid::new(2, 8).unwrap();
        let c = GridFunction::zeros(g, Side::Physical);
        norm(&c, 0.5);
    }

    #[test]
    fn file_round_trip() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = GridFunction::pure_wave(g, &[3, -2]);
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &f, GridPrecision::Complex128).unwrap();
        let back = read_grid_function(buf.as_slice()).unwrap();
        assert_eq!(back.side, Side::Physical);
        assert_eq!(back.values, f.values);

        let mut buf32 = Vec::new();
        write_grid_function(&mut buf32, &f, GridPrecision::Complex64).unwrap();
        let back32 = read_grid_function(buf32.as_slice()).unwrap();
        assert!(rel_l2_error(&back32, &f) < 1e-6);
    }
}
