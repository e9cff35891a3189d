//! Direction-set geometry: dyadic dissections of the sphere into sectors and
//! cells, lacunarity-order certification, generators of lacunary families,
//! and the cone / wedge membership predicates used by the frequency covering.
//!
//! All dissections are taken with respect to the standard coordinate basis
//! and the dyadic sequence `theta_l = 2^-l`. Directions live in the open
//! positive orthant, so coordinate ratios are positive and the limit sectors
//! on the coordinate hyperplanes never occur.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Unit-norm tolerance for [`Direction`].
pub const UNIT_TOL: f64 = 1e-12;

/// Two directions closer than this (in angle) count as duplicates; the gap
/// is far below any FFT grid resolution used here.
pub const DUPLICATE_ANGLE_TOL: f64 = 1e-10;

/// Ratios within this relative distance of a power of two snap onto it, so
/// dyadic boundary classification is stable under floating-point noise.
pub const DYADIC_SNAP_REL: f64 = 1e-14;

/// 2^e as an exact f64.
#[inline]
pub fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::powi(2.0, e as i32)
}

/// A unit vector in the open positive orthant of R^n, 2 <= n <= 4.
#[derive(Clone, PartialEq)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Validate an already-normalized coordinate vector.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() < 2 || coords.len() > MAX_DIM {
            return Err(GeometryError::Dimension {
                got: coords.len(),
                max: MAX_DIM,
            });
        }
        if coords.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(GeometryError::NonPositive(coords));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NotUnit((norm - 1.0).abs()));
        }
        Ok(Direction { coords })
    }

    /// Normalize a ray in the open positive orthant onto the sphere.
    pub fn from_ray(ray: &[f64]) -> Result<Self, GeometryError> {
        if ray.len() < 2 || ray.len() > MAX_DIM {
            return Err(GeometryError::Dimension {
                got: ray.len(),
                max: MAX_DIM,
            });
        }
        if ray.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(GeometryError::NonPositive(ray.to_vec()));
        }
        let norm = ray.iter().map(|c| c * c).sum::<f64>().sqrt();
        let coords = ray.iter().map(|c| c / norm).collect();
        Ok(Direction { coords })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Angle to another direction, by the chord length.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let chord: f64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        2.0 * (chord / 2.0).clamp(-1.0, 1.0).asin()
    }
}

impl std::ops::Index<usize> for Direction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Direction({:?})", self.coords)
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        Direction::new(coords).map_err(serde::de::Error::custom)
    }
}

/// An ordered coordinate pair `(first, second)` with `first < second`,
/// 0-based. `Sigma(n)` has `n (n-1) / 2` elements.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct SigmaIndex {
    first: usize,
    second: usize,
}

impl SigmaIndex {
    pub fn new(first: usize, second: usize) -> Result<Self, GeometryError> {
        if first >= second || second >= MAX_DIM {
            return Err(GeometryError::BadSigma(first, second));
        }
        Ok(SigmaIndex { first, second })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn second(&self) -> usize {
        self.second
    }

    /// All ordered pairs for ambient dimension `n`, lexicographic.
    pub fn all(n: usize) -> Vec<SigmaIndex> {
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for j in 0..n {
            for k in (j + 1)..n {
                out.push(SigmaIndex { first: j, second: k });
            }
        }
        out
    }
}

impl fmt::Debug for SigmaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

impl fmt::Display for SigmaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

impl TryFrom<(usize, usize)> for SigmaIndex {
    type Error = GeometryError;
    fn try_from(p: (usize, usize)) -> Result<Self, GeometryError> {
        SigmaIndex::new(p.0, p.1)
    }
}

impl From<SigmaIndex> for (usize, usize) {
    fn from(s: SigmaIndex) -> (usize, usize) {
        (s.first, s.second)
    }
}

/// The full cell label of a direction: one sector index per ordered pair,
/// stored in the order of [`SigmaIndex::all`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CellIndex {
    n: usize,
    ells: Vec<i64>,
}

impl CellIndex {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, sigma: SigmaIndex) -> i64 {
        let pos = SigmaIndex::all(self.n)
            .iter()
            .position(|s| *s == sigma)
            .expect("sigma outside the cell's dimension");
        self.ells[pos]
    }

    pub fn entries(&self) -> Vec<(SigmaIndex, i64)> {
        SigmaIndex::all(self.n)
            .into_iter()
            .zip(self.ells.iter().copied())
            .collect()
    }

    /// Signed sector exponent `l_kj` for an arbitrary (not necessarily
    /// ordered) pair: `l_(k,j)` when `k < j`, `-l_(j,k)` when `k > j`, and
    /// `0` on the diagonal.
    pub fn signed(&self, k: usize, j: usize) -> i64 {
        use std::cmp::Ordering::*;
        match k.cmp(&j) {
            Equal => 0,
            Less => self.get(SigmaIndex::new(k, j).expect("ordered")),
            Greater => -self.get(SigmaIndex::new(j, k).expect("ordered")),
        }
    }
}

/// Unique `l` with `2^-(l+1) < r <= 2^-l`, snapping near-dyadic ratios onto
/// the closed upper endpoint.
fn dyadic_band(r: f64) -> i64 {
    debug_assert!(r.is_finite() && r > 0.0, "dyadic band needs r > 0");
    let q = -r.log2();
    let near = q.round() as i64;
    if (r - pow2(-near)).abs() <= DYADIC_SNAP_REL * pow2(-near) {
        return near;
    }
    let mut ell = q.floor() as i64;
    // log2 rounding can misplace the floor by one near a boundary.
    while r > pow2(-ell) {
        ell -= 1;
    }
    while r <= pow2(-(ell + 1)) {
        ell += 1;
    }
    ell
}

/// Sector index of `v` for the pair `sigma`: the unique `l` with
/// `2^-(l+1) < v_second / v_first <= 2^-l`.
pub fn sector_index(v: &Direction, sigma: SigmaIndex) -> i64 {
    dyadic_band(v[sigma.second()] / v[sigma.first()])
}

/// The full cell label of `v` (one sector index per pair).
pub fn cell_index(v: &Direction) -> CellIndex {
    let n = v.dimension();
    let ells = SigmaIndex::all(n)
        .into_iter()
        .map(|s| sector_index(v, s))
        .collect();
    CellIndex { n, ells }
}

/// An ordered, duplicate-free list of directions with an optional declared
/// lacunarity order. Immutable after construction.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    dirs: Vec<Direction>,
    declared_order: Option<u32>,
}

impl DirectionSet {
    pub fn new(dirs: Vec<Direction>) -> Result<Self, GeometryError> {
        if dirs.is_empty() {
            return Err(GeometryError::Empty);
        }
        let n = dirs[0].dimension();
        for d in &dirs {
            if d.dimension() != n {
                return Err(GeometryError::Dimension {
                    got: d.dimension(),
                    max: n,
                });
            }
        }
        for i in 0..dirs.len() {
            for j in (i + 1)..dirs.len() {
                if dirs[i].angle_to(&dirs[j]) <= DUPLICATE_ANGLE_TOL {
                    return Err(GeometryError::Duplicate(i, j));
                }
            }
        }
        Ok(DirectionSet {
            dirs,
            declared_order: None,
        })
    }

    /// Attach a declared lacunarity order, verified by [`lacunarity_order`].
    pub fn with_declared_order(dirs: Vec<Direction>, order: u32) -> Result<Self, GeometryError> {
        let set = DirectionSet::new(dirs)?;
        match lacunarity_order(&set, order) {
            Some(_) => Ok(DirectionSet {
                declared_order: Some(order),
                ..set
            }),
            None => Err(GeometryError::GeneratorParams(format!(
                "set does not certify at lacunarity order <= {order}"
            ))),
        }
    }

    fn from_validated(dirs: Vec<Direction>) -> Self {
        DirectionSet {
            dirs,
            declared_order: None,
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dirs[0].dimension()
    }

    pub fn declared_order(&self) -> Option<u32> {
        self.declared_order
    }

    pub fn get(&self, i: usize) -> &Direction {
        &self.dirs[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Direction> {
        self.dirs.iter()
    }

    /// The first `count` directions as a new set.
    pub fn prefix(&self, count: usize) -> DirectionSet {
        DirectionSet::from_validated(self.dirs[..count.min(self.dirs.len())].to_vec())
    }

    /// Serialize as a plain JSON array of coordinate arrays.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.dirs).expect("directions serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let dirs: Vec<Direction> = serde_json::from_str(text)
            .map_err(|e| GeometryError::GeneratorParams(format!("bad direction JSON: {e}")))?;
        DirectionSet::new(dirs)
    }
}

/// Group a set by the sector index of one pair. Empty sectors are absent;
/// the groups partition the input.
pub fn partition_by_sector(
    set: &DirectionSet,
    sigma: SigmaIndex,
) -> BTreeMap<i64, DirectionSet> {
    let mut groups: BTreeMap<i64, Vec<Direction>> = BTreeMap::new();
    for d in set.iter() {
        groups
            .entry(sector_index(d, sigma))
            .or_default()
            .push(d.clone());
    }
    groups
        .into_iter()
        .map(|(l, dirs)| (l, DirectionSet::from_validated(dirs)))
        .collect()
}

// ---------------------------------------------------------------------------
// Lacunarity certification
// ---------------------------------------------------------------------------

/// Total refinement steps allowed while searching for a certificate.
const REFINE_FUEL: u32 = 100_000;

/// One corner must be this many dyadic levels nearer before the search
/// commits to it without branching.
const CORNER_DOMINANCE: f64 = 16.0;

/// Absolute classification noise allowed per pair, as a fraction of the
/// original ratio scale. Recentering subtracts dyadic corners exactly
/// (Sterbenz), so this bound holds at every refinement depth.
const NOISE_REL: f64 = 1e-14;

/// Smallest order `L <= max_order` at which the set certifies as lacunary
/// with respect to the standard-basis dyadic dissection, or `None`.
///
/// Order 0 means a singleton. For `L >= 1` every pair's every sector subset
/// must certify at order `<= L - 1`. A sector subset that refuses to split
/// (it occupies a single dyadic band for the pair) is re-dissected in the
/// coordinate recentered at a corner of that band; this realizes, inside the
/// fixed basis, the freedom the abstract definition gets from choosing a new
/// dissection per level, and is what certifies nested perturbation families.
/// Pairs whose ratio is constant on the subset carry no separation and are
/// skipped. The result is an upper-bound certificate: `Some(L)` guarantees a
/// lacunary structure of order `L`, while `None` only means no certificate
/// was found within `max_order` and the search fuel.
pub fn lacunarity_order(set: &DirectionSet, max_order: u32) -> Option<u32> {
    if set.len() == 1 {
        return Some(0);
    }
    let sigmas = SigmaIndex::all(set.dimension());
    let coords: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|s| {
            set.iter()
                .map(|v| v[s.second()] / v[s.first()])
                .collect()
        })
        .collect();
    let tols: Vec<f64> = coords
        .iter()
        .map(|c| c.iter().fold(0.0f64, |a, v| a.max(*v)) * NOISE_REL)
        .collect();
    let mut fuel = REFINE_FUEL;
    min_order(set.len(), &coords, &tols, max_order, &mut fuel)
}

/// Positions are implicit `0..count`; `coords[s]` holds the current (possibly
/// recentered) dissection coordinate of each member for pair `s`, and
/// `tols[s]` the absolute resolution below which values are indistinct.
fn min_order(
    count: usize,
    coords: &[Vec<f64>],
    tols: &[f64],
    budget: u32,
    fuel: &mut u32,
) -> Option<u32> {
    if count == 1 {
        return Some(0);
    }
    if budget == 0 {
        return None;
    }
    let mut worst = 0u32;
    for (s, values) in coords.iter().enumerate() {
        if is_constant(values, tols[s]) {
            continue;
        }
        let sub = split_order(s, values, tols[s], coords, tols, budget, fuel)?;
        worst = worst.max(sub);
        if worst + 1 > budget {
            return None;
        }
    }
    Some(worst + 1)
}

fn is_constant(values: &[f64], tol: f64) -> bool {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    hi - lo <= tol
}

/// Band of `v > 0` with an absolute snap window onto dyadic boundaries.
fn dyadic_band_tol(v: f64, tol: f64) -> i64 {
    let near = (-v.log2()).round() as i64;
    if (v - pow2(-near)).abs() <= tol {
        return near;
    }
    dyadic_band(v)
}

/// Order certified below one pair's dissection of the current subset: split
/// by dyadic band, recentering at a band corner (both corners when neither
/// dominates) until the subset separates, then recurse into the groups.
fn split_order(
    s: usize,
    values: &[f64],
    tol: f64,
    coords: &[Vec<f64>],
    tols: &[f64],
    budget: u32,
    fuel: &mut u32,
) -> Option<u32> {
    if *fuel == 0 {
        return None;
    }
    *fuel -= 1;

    // Group by band; values at the accumulation corner (zero within the
    // noise floor after recentering) form their own limit group.
    let mut groups: BTreeMap<Option<i64>, Vec<usize>> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        let key = if *v <= 4.0 * tol {
            None
        } else {
            Some(dyadic_band_tol(*v, tol))
        };
        groups.entry(key).or_default().push(i);
    }

    if groups.len() >= 2 {
        let mut worst = 0u32;
        for positions in groups.values() {
            let sub_coords: Vec<Vec<f64>> = coords
                .iter()
                .enumerate()
                .map(|(t, c)| {
                    positions
                        .iter()
                        .map(|&p| if t == s { values[p] } else { c[p] })
                        .collect()
                })
                .collect();
            let sub = min_order(positions.len(), &sub_coords, tols, budget - 1, fuel)?;
            worst = worst.max(sub);
        }
        return Some(worst);
    }

    // Single band (lo, hi]: recenter and retry. Values are above the noise
    // floor here, so at least one corner separates them eventually.
    let band = match groups.keys().next().copied().flatten() {
        Some(b) => b,
        None => return None, // everything at the corner: below resolution
    };
    let lo = pow2(-(band + 1));
    let hi = pow2(-band);
    let dmax_lo = values.iter().fold(0.0f64, |a, v| a.max(v - lo));
    let dmax_hi = values.iter().fold(0.0f64, |a, v| a.max(hi - v));
    let mut corners = Vec::with_capacity(2);
    if dmax_lo * CORNER_DOMINANCE <= dmax_hi {
        corners.push(lo);
    } else if dmax_hi * CORNER_DOMINANCE <= dmax_lo {
        corners.push(hi);
    } else {
        corners.push(if dmax_lo <= dmax_hi { lo } else { hi });
        corners.push(if dmax_lo <= dmax_hi { hi } else { lo });
    }

    let mut best: Option<u32> = None;
    for corner in corners {
        let recentered: Vec<f64> = values.iter().map(|v| (v - corner).abs()).collect();
        if is_constant(&recentered, tol) {
            continue;
        }
        if let Some(o) = split_order(s, &recentered, tol, coords, tols, budget, fuel) {
            best = Some(best.map_or(o, |b: u32| b.min(o)));
            if best == Some(0) {
                break;
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Perturbation gap (in dyadic levels) between nesting levels of
/// [`generate_planar_lacunary`].
const PLANAR_GAP: i64 = 4;

fn planar_ratios(order: u32, branching: u32, offset: u32) -> Vec<f64> {
    let anchors = (1 + offset as i64)..=(branching + offset) as i64;
    if order == 1 {
        return anchors.map(|m| pow2(-m)).collect();
    }
    let inner = planar_ratios(order - 1, branching, 0);
    let mut out = Vec::with_capacity(inner.len() * branching as usize);
    for l in anchors {
        let anchor = pow2(-l);
        for r in &inner {
            out.push(anchor * (1.0 + pow2(-PLANAR_GAP) * r));
        }
    }
    out
}

/// A planar direction family `(1, y) / |(1, y)|` of declared lacunarity
/// order `<= order`, with `branching^order` members built by nested dyadic
/// perturbation of the anchors `2^-l`.
pub fn generate_planar_lacunary(order: u32, branching: u32) -> Result<DirectionSet, GeometryError> {
    generate_planar_lacunary_offset(order, branching, 0)
}

/// Same family with the anchor exponents shifted to start at `1 + offset`;
/// used when an experiment needs directions in deep sectors.
pub fn generate_planar_lacunary_offset(
    order: u32,
    branching: u32,
    offset: u32,
) -> Result<DirectionSet, GeometryError> {
    if order < 1 || branching < 1 {
        return Err(GeometryError::GeneratorParams(
            "order and branching must both be >= 1".into(),
        ));
    }
    // Deepest perturbation scale; below ~2^-32 the members collide with the
    // duplicate threshold and the nested sectors lose their separation.
    let depth =
        order as i64 * branching as i64 + offset as i64 + PLANAR_GAP * (order as i64 - 1);
    if depth > 32 {
        return Err(GeometryError::GeneratorCollision(format!(
            "nested perturbations reach scale 2^-{depth}; members would collide"
        )));
    }
    let dirs = planar_ratios(order, branching, offset)
        .into_iter()
        .map(|y| Direction::from_ray(&[1.0, y]))
        .collect::<Result<Vec<_>, _>>()?;
    DirectionSet::with_declared_order(dirs, order)
}

/// Product-type family `(1, 2^-a_1, ..., 2^-a_{n-1})` over the Cartesian
/// product of the exponent lists (one list per coordinate `1..n`).
pub fn generate_product_lacunary(
    n: usize,
    exponent_lists: &[Vec<u32>],
) -> Result<DirectionSet, GeometryError> {
    if n < 2 || n > MAX_DIM {
        return Err(GeometryError::Dimension { got: n, max: MAX_DIM });
    }
    if exponent_lists.len() != n - 1 {
        return Err(GeometryError::GeneratorParams(format!(
            "need {} exponent lists for n = {n}, got {}",
            n - 1,
            exponent_lists.len()
        )));
    }
    if exponent_lists.iter().any(|l| l.is_empty()) {
        return Err(GeometryError::GeneratorParams(
            "exponent lists must be nonempty".into(),
        ));
    }
    if exponent_lists.iter().flatten().any(|e| *e < 1) {
        return Err(GeometryError::GeneratorParams(
            "exponents must be >= 1".into(),
        ));
    }
    let mut rays = vec![vec![1.0]];
    for list in exponent_lists {
        let mut next = Vec::with_capacity(rays.len() * list.len());
        for ray in &rays {
            for e in list {
                let mut r = ray.clone();
                r.push(pow2(-(*e as i64)));
                next.push(r);
            }
        }
        rays = next;
    }
    let dirs = rays
        .into_iter()
        .map(|r| Direction::from_ray(&r))
        .collect::<Result<Vec<_>, _>>()?;
    DirectionSet::new(dirs)
}

/// `count` directions equally spaced in angle across the open first
/// quadrant of the plane. Not lacunary; the control family for maximal
/// average sweeps.
pub fn generate_equispaced(count: usize) -> Result<DirectionSet, GeometryError> {
    if count == 0 {
        return Err(GeometryError::Empty);
    }
    let dirs = (0..count)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 * (k as f64 + 1.0) / (count as f64 + 1.0);
            Direction::from_ray(&[theta.cos(), theta.sin()])
        })
        .collect::<Result<Vec<_>, _>>()?;
    DirectionSet::new(dirs)
}

// ---------------------------------------------------------------------------
// Cone and wedge membership
// ---------------------------------------------------------------------------

/// Membership in the open cone `C_v = { |xi . v| < (1/n) max_k |xi_k v_k| }`.
/// Returns false for the zero vector.
pub fn cone_membership(xi: &[f64], v: &Direction) -> bool {
    let n = v.dimension();
    debug_assert_eq!(xi.len(), n);
    let mut dot = 0.0;
    let mut sup = 0.0f64;
    for k in 0..n {
        let p = xi[k] * v[k];
        dot += p;
        sup = sup.max(p.abs());
    }
    dot.abs() < sup / n as f64
}

/// Membership in the two-dimensional wedge for `sigma` at dyadic level
/// `ell`: the ratio `-xi_first / xi_second` must lie in
/// `[2^-(ell+1)/n, 2^-ell * n)`, with `n` replaced by `n + 1` when
/// `widened`. Points with `xi_second = 0` are outside every wedge.
pub fn wedge_membership(xi: &[f64], sigma: SigmaIndex, ell: i64, widened: bool) -> bool {
    let n = xi.len() as f64;
    let denom = xi[sigma.second()];
    if denom == 0.0 {
        return false;
    }
    let ratio = -xi[sigma.first()] / denom;
    let c = if widened { n + 1.0 } else { n };
    ratio >= pow2(-(ell + 1)) / c && ratio < pow2(-ell) * c
}
