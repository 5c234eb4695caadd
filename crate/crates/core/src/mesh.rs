//! Hash-keyed box meshing and the automatic mesh-dimension estimator.
//!
//! States are normalized, quantized to integer grid keys with
//! `round(s̄ / d)`, and stored in a hash table, so building a mesh of n
//! points is O(n). A sweep over box sizes produces a [`MeshCurve`], from
//! which two intentionally biased slopes bracket the underlying dimension:
//! the full-curve least-squares fit (errs low by including flat tails) and
//! the greatest consecutive slope (errs high).

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};

use smallvec::SmallVec;

use crate::trajectory::{RunningStats, StateVector};
use crate::{Error, Result};

/// Smallest box size the curve sweep will visit.
pub const MIN_BOX_SIZE: f64 = 1e-9;
/// Largest box size the curve sweep will visit; guarantees termination on
/// adversarial data, symmetric with [`MIN_BOX_SIZE`].
pub const MAX_BOX_SIZE: f64 = 1e9;

/// Integer grid key of one occupied box. Inline up to 6 coordinates, which
/// covers every built-in environment and generator.
pub type BoxKey = SmallVec<[i64; 6]>;

/// FNV-1a; the default SipHash is needlessly slow for short integer keys
/// hashed millions of times per training epoch.
#[derive(Default)]
pub struct FnvHasher(u64);

impl Hasher for FnvHasher {
    fn write(&mut self, bytes: &[u8]) {
        let mut h = if self.0 == 0 { 0xcbf2_9ce4_8422_2325 } else { self.0 };
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.0 = h;
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

type FnvBuild = BuildHasherDefault<FnvHasher>;

/// Occupied boxes of one fixed size, keyed by quantized normalized state.
#[derive(Debug, Clone)]
pub struct BoxMesh {
    box_size: f64,
    cells: HashMap<BoxKey, u32, FnvBuild>,
    total_points: usize,
}

impl BoxMesh {
    /// Number of occupied boxes (the mesh size m).
    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn box_size(&self) -> f64 {
        self.box_size
    }

    pub fn total_points(&self) -> usize {
        self.total_points
    }

    /// Occupancy count of one box, 0 if unoccupied.
    pub fn occupancy(&self, key: &[i64]) -> u32 {
        self.cells.get(key).copied().unwrap_or(0)
    }

    /// Keys in lexicographic order (hash iteration order is not stable).
    pub fn sorted_keys(&self) -> Vec<BoxKey> {
        let mut keys: Vec<BoxKey> = self.cells.keys().cloned().collect();
        keys.sort();
        keys
    }
}

/// Quantize one normalized point to its grid key.
///
/// `f64::round` rounds ties away from zero; that choice is load-bearing for
/// key stability and is pinned by tests. Saturating casts keep adversarial
/// magnitudes deterministic.
fn quantize(normed: &[f64], d: f64) -> BoxKey {
    normed.iter().map(|&x| (x / d).round() as i64).collect()
}

/// Build the mesh of `states` at box size `d` under `stats` normalization.
pub fn create_box_mesh(states: &[StateVector], d: f64, stats: &RunningStats) -> Result<BoxMesh> {
    if states.is_empty() {
        return Err(Error::EmptyStateSet);
    }
    if !(d > 0.0) {
        return Err(Error::InvalidBoxSize(d));
    }
    let mut cells: HashMap<BoxKey, u32, FnvBuild> =
        HashMap::with_capacity_and_hasher(states.len(), FnvBuild::default());
    for s in states {
        let normed = stats.normalize(s)?;
        *cells.entry(quantize(&normed, d)).or_insert(0) += 1;
    }
    Ok(BoxMesh {
        box_size: d,
        cells,
        total_points: states.len(),
    })
}

/// One sampled (box size, mesh size) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEntry {
    pub d: f64,
    pub m: usize,
}

/// Mesh sizes sampled over a geometric ladder of box sizes, ascending in d.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshCurve {
    pub entries: Vec<CurveEntry>,
    pub data_size: usize,
}

impl MeshCurve {
    /// log-log points (X = ln d, Y = -ln m) for slope fitting.
    fn log_points(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .map(|e| (e.d.ln(), -(e.m as f64).ln()))
            .collect()
    }
}

/// Pre-normalized points in a flat row-major buffer, so each box size in the
/// sweep costs one multiply-round pass.
struct NormalizedPoints {
    data: Vec<f64>,
    dim: usize,
    len: usize,
}

impl NormalizedPoints {
    fn build(states: &[StateVector], stats: &RunningStats) -> Result<Self> {
        let dim = stats.dim();
        let mut data = Vec::with_capacity(states.len() * dim);
        for s in states {
            data.extend_from_slice(&stats.normalize(s)?);
        }
        Ok(Self {
            data,
            dim,
            len: states.len(),
        })
    }

    /// Mesh size at box size d: number of distinct keys.
    fn mesh_size(&self, d: f64) -> usize {
        let mut seen: HashSet<BoxKey, FnvBuild> =
            HashSet::with_capacity_and_hasher(self.len, FnvBuild::default());
        for point in self.data.chunks_exact(self.dim.max(1)) {
            seen.insert(quantize(point, d));
        }
        seen.len()
    }
}

/// Sweep box sizes geometrically and record the mesh size at each scale.
///
/// Starting from `d0`, the box size shrinks by `scale_factor` until the mesh
/// holds at least ⌈4/5·n⌉ boxes (the long tail up to m = n adds nothing) or
/// d would drop below [`MIN_BOX_SIZE`]; it then grows from `d0` until the
/// mesh collapses to a single box or d exceeds [`MAX_BOX_SIZE`]. Each box
/// size is evaluated exactly once and entries are returned ascending in d.
pub fn mesh_curve(
    states: &[StateVector],
    scale_factor: f64,
    d0: f64,
    stats: &RunningStats,
) -> Result<MeshCurve> {
    if states.is_empty() {
        return Err(Error::EmptyStateSet);
    }
    if !(scale_factor > 1.0) {
        return Err(Error::InvalidScaleFactor(scale_factor));
    }
    if !(d0 > 0.0) {
        return Err(Error::InvalidBoxSize(d0));
    }

    let points = NormalizedPoints::build(states, stats)?;
    let n = states.len();
    let target = (4 * n).div_ceil(5);

    let m0 = points.mesh_size(d0);

    let mut shrink: Vec<CurveEntry> = Vec::new();
    let mut d = d0;
    let mut m = m0;
    while m < target {
        let next = d / scale_factor;
        if next < MIN_BOX_SIZE {
            break;
        }
        d = next;
        m = points.mesh_size(d);
        shrink.push(CurveEntry { d, m });
    }

    let mut entries: Vec<CurveEntry> = shrink.into_iter().rev().collect();
    entries.push(CurveEntry { d: d0, m: m0 });

    let mut d = d0;
    let mut m = m0;
    while m != 1 {
        d *= scale_factor;
        if d > MAX_BOX_SIZE {
            break;
        }
        m = points.mesh_size(d);
        entries.push(CurveEntry { d, m });
    }

    Ok(MeshCurve {
        entries,
        data_size: n,
    })
}

/// Least-squares slope over (x, y) pairs. Requires at least two distinct x.
fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    sxy / sxx
}

/// Lower mesh dimension: least-squares slope of -log m against log d over
/// the whole curve. Flat tails are deliberately included, so the result
/// lower-bounds a hand fit of the power-law region.
pub fn lower_mesh_dim(curve: &MeshCurve) -> Result<f64> {
    if curve.entries.len() < 2 {
        return Err(Error::DegenerateCurve);
    }
    Ok(least_squares_slope(&curve.log_points()))
}

/// Upper mesh dimension: greatest slope between entries `window` apart.
/// The paper's variant is `window = 1` (consecutive pairs).
pub fn upper_mesh_dim_windowed(curve: &MeshCurve, window: usize) -> Result<f64> {
    if curve.entries.len() < 2 {
        return Err(Error::DegenerateCurve);
    }
    let window = window.max(1).min(curve.entries.len() - 1);
    let pts = curve.log_points();
    let mut best = f64::NEG_INFINITY;
    for i in 0..pts.len() - window {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[i + window];
        best = best.max((y1 - y0) / (x1 - x0));
    }
    Ok(best)
}

/// Upper mesh dimension with the default single-pair window.
pub fn upper_mesh_dim(curve: &MeshCurve) -> Result<f64> {
    upper_mesh_dim_windowed(curve, 1)
}

/// Least-squares slope over the central entries of the curve, dropping
/// `trim` of the entries at each end (entries are geometric in d, so
/// trimming by count trims equally in log d). `trim = 0.2` keeps the middle
/// 60%. This is the reference fit the biased bounds are compared against.
pub fn central_fit_dim(curve: &MeshCurve, trim: f64) -> Result<f64> {
    if curve.entries.len() < 2 {
        return Err(Error::DegenerateCurve);
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::InvalidConfig(format!(
            "central fit trim must be in [0, 0.5), got {trim}"
        )));
    }
    let n = curve.entries.len();
    let cut = (n as f64 * trim).floor() as usize;
    let lo = cut.min(n.saturating_sub(2));
    let hi = (n - cut).max(lo + 2);
    let pts = curve.log_points();
    Ok(least_squares_slope(&pts[lo..hi]))
}

/// Lower/upper bracket of the mesh dimension for one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionEstimate {
    pub lower: f64,
    pub upper: f64,
}

/// Both mesh-dimension bounds of a curve.
pub fn estimate_dimensions(curve: &MeshCurve) -> Result<DimensionEstimate> {
    Ok(DimensionEstimate {
        lower: lower_mesh_dim(curve)?,
        upper: upper_mesh_dim(curve)?,
    })
}
