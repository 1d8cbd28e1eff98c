use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fitting::log::{reconstruct, ReconstructOptions};
use crate::fitting::{KnotRecord, LogModel};
use crate::logcentric::Heightmap;
use crate::synth::{GeneratedLog, OutputToggles};
use crate::Result;

use super::{
    heightmap_mesh, knot_shell_mesh, voxelize_labels, write_heightmap_csv, write_heightmap_png, write_json,
    write_knot_annotations_json, write_mesh_ply, write_point_cloud, write_voxel_labels, PlyFormat,
};

/// Details of the exported artifacts that the output toggles do not cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportSettings {
    /// Edge of a label voxel, mm.
    pub voxel_size: f64,
    pub mesh_caps: bool,
    pub binary_ply: bool,
    pub heightmap_csv: bool,
    pub knot_samples_axis: usize,
    pub knot_samples_angle: usize,
    /// Add the grain texture when rendering a model's surface.
    pub grain: bool,
}

impl Default for ExportSettings {
    fn default() -> Self {
        Self { voxel_size: 5.0, mesh_caps: true, binary_ply: true, heightmap_csv: true, knot_samples_axis: 32, knot_samples_angle: 24, grain: true }
    }
}

impl ExportSettings {
    fn ply(&self) -> PlyFormat {
        if self.binary_ply {
            PlyFormat::BinaryLittleEndian
        } else {
            PlyFormat::Ascii
        }
    }
}

/// Knot label document: one record per knot with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotLabels {
    pub log: String,
    pub knots: Vec<KnotRecord>,
}

fn write_heightmap_files(dir: &Path, name: &str, h: &Heightmap, s: &ExportSettings, out: &mut Vec<PathBuf>) -> Result<()> {
    let png = dir.join(format!("{name}.heightmap.png"));
    write_heightmap_png(h, &png)?;
    out.push(super::sidecar_path(&png));
    out.push(png);
    if s.heightmap_csv {
        let csv = dir.join(format!("{name}.heightmap.csv"));
        write_heightmap_csv(h, &csv)?;
        out.push(csv);
    }
    Ok(())
}

fn write_mesh_files(dir: &Path, name: &str, model: &LogModel, h: &Heightmap, s: &ExportSettings, out: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(format!("{name}.mesh.ply"));
    write_mesh_ply(&p, &heightmap_mesh(&model.centerline, h, s.mesh_caps)?, s.ply())?;
    out.push(p);
    for k in &model.knots {
        let shell = k.resolve()?.body_points(k.theta_mean, s.knot_samples_axis, s.knot_samples_angle)?;
        let p = dir.join(format!("{name}.knot{}.ply", k.id));
        write_mesh_ply(&p, &knot_shell_mesh(&model.centerline, &shell, s.knot_samples_angle)?, s.ply())?;
        out.push(p);
    }
    Ok(())
}

fn write_label_files(dir: &Path, name: &str, model: &LogModel, s: &ExportSettings, out: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(format!("{name}.knots.json"));
    write_json(&p, &KnotLabels { log: name.to_string(), knots: model.knots.clone() })?;
    out.push(p);
    let p = dir.join(format!("{name}.labels.rle"));
    write_voxel_labels(&voxelize_labels(model, s.voxel_size)?, &p)?;
    out.push(super::sidecar_path(&p));
    out.push(p);
    Ok(())
}

/// Writes the artifacts of one generated log into `dir`, named after `name`.
/// The point cloud is a noise-free synthetic scan drawn with `scan_seed`,
/// written with its knot annotations so it can be fitted again. Returns the
/// written paths.
pub fn export_generated(
    dir: &Path,
    name: &str,
    log: &GeneratedLog,
    toggles: &OutputToggles,
    point_density: f64,
    scan_seed: u64,
    s: &ExportSettings,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let p = dir.join(format!("{name}.model.json"));
    write_json(&p, &log.model)?;
    out.push(p);
    if toggles.heightmap {
        write_heightmap_files(dir, name, &log.heightmap, s, &mut out)?;
    }
    if toggles.point_cloud {
        let scan = log.annotated(name, point_density, scan_seed)?;
        let p = dir.join(format!("{name}.surface.ply"));
        write_point_cloud(&p, &scan.surface_points, s.ply())?;
        out.push(p);
        let p = dir.join(format!("{name}.annotations.json"));
        write_knot_annotations_json(&p, &scan.knots)?;
        out.push(p);
    }
    if toggles.mesh {
        write_mesh_files(dir, name, &log.model, &log.heightmap, s, &mut out)?;
    }
    if toggles.knot_labels {
        write_label_files(dir, name, &log.model, s, &mut out)?;
    }
    Ok(out)
}

/// Reconstruction artifacts of a model: heightmap rasters, the surface mesh
/// and one shell mesh per knot.
pub fn export_reconstruction(dir: &Path, name: &str, model: &LogModel, s: &ExportSettings) -> Result<Vec<PathBuf>> {
    let rec = reconstruct(model, &ReconstructOptions { grain: s.grain, ..Default::default() })?;
    let mut out = Vec::new();
    write_heightmap_files(dir, name, &rec.heightmap, s, &mut out)?;
    write_mesh_files(dir, name, model, &rec.heightmap, s, &mut out)?;
    Ok(out)
}
