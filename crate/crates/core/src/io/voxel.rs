use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fitting::log::{reconstruct, ReconstructOptions};
use crate::fitting::LogModel;
use crate::knotmodel::{ArcTable, ResolvedKnot};
use crate::logcentric::{CartesianPoint, LogCentricPoint, LogFrame};
use crate::numeric::wrap_angle;
use crate::{Error, Result};

use super::model_json::to_json_string;
use super::write_atomic;

/// Label of voxels outside the log.
pub const LABEL_AIR: u32 = 0;
/// Label of clear wood.
pub const LABEL_WOOD: u32 = 1;

/// Cartesian occupancy grid. `labels` is stored x-fastest, then y, then z;
/// knot `i` of the model (in model order) carries label `2 + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: [f64; 3],
    pub voxel_size: f64,
    pub dims: [usize; 3],
    pub labels: Vec<u32>,
    pub knot_ids: Vec<u32>,
}

/// Describes the binary label file next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoxelSidecar {
    pub units: String,
    /// Center of voxel `(0, 0, 0)`.
    pub origin: [f64; 3],
    pub voxel_size: f64,
    pub dims: [usize; 3],
    pub order: String,
    pub encoding: String,
    pub air_label: u32,
    pub wood_label: u32,
    /// `knot_labels[i] = [label, knot id]`.
    pub knot_labels: Vec<[u32; 2]>,
}

struct KnotProbe {
    knot: ResolvedKnot,
    table: ArcTable,
    theta_mean: f64,
}

impl KnotProbe {
    /// Point-in-knot test on the cross-section of the knot at constant `rho`.
    fn contains(&self, q: &LogCentricPoint) -> bool {
        let p = &self.knot.params;
        if q.rho <= 0.0 || q.rho > p.rho_max {
            return false;
        }
        let r = self.knot.radius(self.table.at(&self.knot, q.rho));
        if r <= 0.0 {
            return false;
        }
        let slope = self.knot.axis_slope(q.rho);
        let half_l = p.gamma * r * (1.0 + slope * slope).sqrt();
        let ds = (wrap_angle(q.theta - self.theta_mean + std::f64::consts::PI) - std::f64::consts::PI) * q.rho - p.s0;
        let dl = q.l - self.knot.axis_l(q.rho);
        (ds / r).powi(2) + (dl / half_l).powi(2) <= 1.0
    }
}

/// Labels every voxel of a Cartesian grid covering the log as air, wood or
/// the knot it falls in. The surface is the model's full reconstruction.
pub fn voxelize_labels(model: &LogModel, voxel_size: f64) -> Result<VoxelGrid> {
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(Error::InvalidParameter(format!("voxel size must be positive, got {voxel_size}")));
    }
    let frame = LogFrame::new(&model.centerline)?;
    let h = reconstruct(model, &ReconstructOptions { knot_samples_axis: 4, knot_samples_angle: 4, ..Default::default() })?.heightmap;
    let g = h.grid;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for r in 0..g.n_l {
        for c in 0..g.n_theta {
            let p = frame.from_log_centric(&LogCentricPoint::new(g.theta(c), g.l(r), h.get(r, c)))?;
            for (k, v) in [p.x, p.y, p.z].into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
    }
    let dims = [0, 1, 2].map(|k| (((hi[k] - lo[k]) / voxel_size).ceil() as usize).max(1));
    let origin = [0, 1, 2].map(|k| lo[k] + 0.5 * voxel_size);
    let total = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .filter(|&v| v <= 1 << 31)
        .ok_or_else(|| Error::InvalidParameter(format!("voxel grid {dims:?} is too large; use a coarser voxel size")))?;

    let probes = model
        .knots
        .iter()
        .map(|k| {
            let knot = k.resolve()?;
            let table = knot.arc_table(knot.params.rho_max, 256);
            Ok(KnotProbe { knot, table, theta_mean: k.theta_mean })
        })
        .collect::<Result<Vec<_>>>()?;

    let plane = dims[0] * dims[1];
    let mut labels = vec![LABEL_AIR; total];
    labels.par_chunks_mut(plane).enumerate().for_each(|(iz, slab)| {
        for iy in 0..dims[1] {
            for ix in 0..dims[0] {
                let p = CartesianPoint::new(
                    origin[0] + ix as f64 * voxel_size,
                    origin[1] + iy as f64 * voxel_size,
                    origin[2] + iz as f64 * voxel_size,
                );
                let Ok(q) = frame.to_log_centric(&p) else { continue };
                if q.l < g.l_min || q.l > g.l_max || q.rho > h.sample_unchecked(q.theta, q.l) {
                    continue;
                }
                slab[iy * dims[0] + ix] = probes.iter().position(|k| k.contains(&q)).map_or(LABEL_WOOD, |i| 2 + i as u32);
            }
        }
    });
    Ok(VoxelGrid { origin, voxel_size, dims, labels, knot_ids: model.knots.iter().map(|k| k.id).collect() })
}

/// Run-length encoding as little-endian `(label: u32, run: u32)` pairs.
pub fn encode_rle(labels: &[u32]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut iter = labels.iter().copied().peekable();
    while let Some(v) = iter.next() {
        let mut run: u32 = 1;
        while run < u32::MAX && iter.peek() == Some(&v) {
            iter.next();
            run += 1;
        }
        out.extend_from_slice(&v.to_le_bytes());
        out.extend_from_slice(&run.to_le_bytes());
    }
    out
}

pub fn decode_rle(bytes: &[u8]) -> Result<Vec<u32>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse { offset: bytes.len() - bytes.len() % 8, message: "truncated run-length pair".into() });
    }
    let mut out = Vec::new();
    for pair in bytes.chunks_exact(8) {
        let v = u32::from_le_bytes(pair[..4].try_into().expect("4 bytes"));
        let run = u32::from_le_bytes(pair[4..].try_into().expect("4 bytes"));
        out.extend(std::iter::repeat_n(v, run as usize));
    }
    Ok(out)
}

/// Writes `<path>` (RLE labels) and `<path>.json` (sidecar).
pub fn write_voxel_labels(grid: &VoxelGrid, path: impl AsRef<Path>) -> Result<VoxelSidecar> {
    let path = path.as_ref();
    let sidecar = VoxelSidecar {
        units: "mm".into(),
        origin: grid.origin,
        voxel_size: grid.voxel_size,
        dims: grid.dims,
        order: "x-fastest".into(),
        encoding: "rle-u32le-pairs".into(),
        air_label: LABEL_AIR,
        wood_label: LABEL_WOOD,
        knot_labels: grid.knot_ids.iter().enumerate().map(|(i, id)| [2 + i as u32, *id]).collect(),
    };
    write_atomic(path, &encode_rle(&grid.labels))?;
    write_atomic(super::sidecar_path(path), to_json_string(&sidecar)?.as_bytes())?;
    Ok(sidecar)
}
