//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("direction must have between 2 and {max} coordinates, got {got}")]
    Dimension { got: usize, max: usize },
    #[error("direction coordinates must be strictly positive and finite: {0:?}")]
    NonPositive(Vec<f64>),
    #[error("direction is not unit length (|norm - 1| = {0:.3e})")]
    NotUnit(f64),
    #[error("directions {0} and {1} are closer than the duplicate threshold")]
    Duplicate(usize, usize),
    #[error("direction set is empty")]
    Empty,
    #[error("ordered pair requires first < second < n, got ({0}, {1})")]
    BadSigma(usize, usize),
    #[error("generator parameters collide: {0}")]
    GeneratorCollision(String),
    #[error("generator parameters invalid: {0}")]
    GeneratorParams(String),
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimension must be 2..=4, got {0}")]
    Dimension(usize),
    #[error("grid size must be a power of two in [8, {max}] for n = {n}, got {m}")]
    Size { n: usize, m: usize, max: usize },
    #[error("grids do not match: ({0:?}) vs ({1:?})")]
    GridMismatch(crate::grid::TorusGrid, crate::grid::TorusGrid),
    #[error("expected a {expected:?}-side function, got {got:?}")]
    SideMismatch {
        expected: crate::grid::Side,
        got: crate::grid::Side,
    },
    #[error("symbol produced a non-finite value at xi = {0:?}")]
    NonFiniteSymbol(Vec<i64>),
    #[error("grid function length {0} does not match grid ({1} points)")]
    Length(usize, usize),
    #[error("direction lives in R^{dir} but the grid is {grid}-dimensional")]
    DirectionDimension { dir: usize, grid: usize },
    #[error("invalid operator parameters: {0}")]
    BadOperator(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed grid file header: {0}")]
    BadHeader(String),
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("weight parameters invalid: {0}")]
    BadParams(String),
    #[error("weight is non-positive or non-finite at x = {0:?} (value {1})")]
    BadValue(Vec<f64>, f64),
    #[error("requested Lp norm needs p >= 1, got {0}")]
    BadExponent(f64),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("config invalid: {0}")]
    Config(String),
    #[error("non-finite measurement in {0}")]
    NonFinite(String),
}
