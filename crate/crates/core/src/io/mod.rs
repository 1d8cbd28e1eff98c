//! File formats: point clouds, knot annotations, model and statistics JSON,
//! heightmap rasters, meshes, voxel labels and dataset manifests.
//!
//! Every writer goes through [`write_atomic`], so a reader never observes a
//! half-written file.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

mod annotations;
mod export;
mod manifest;
mod mesh;
mod model_json;
mod pointcloud;
mod raster;
mod voxel;

pub use annotations::{read_knot_annotations, write_knot_annotations_csv, write_knot_annotations_json};
pub use export::{export_generated, export_reconstruction, ExportSettings, KnotLabels};
pub use manifest::{sha256_hex, DatasetManifest, ManifestEntry, MANIFEST_SCHEMA};
pub use mesh::{heightmap_mesh, knot_shell_mesh, write_mesh_ply, Mesh};
pub use model_json::{from_json_str, read_log_model, read_statistics, to_json_string, write_json, Versioned};
pub use pointcloud::{read_point_cloud, write_point_cloud, PlyFormat, PointCloud};
pub use raster::{
    read_heightmap_csv, read_heightmap_png, sidecar_path, write_heightmap_csv, write_heightmap_png, HeightmapSidecar,
};
pub use voxel::{decode_rle, encode_rle, voxelize_labels, write_voxel_labels, VoxelGrid, VoxelSidecar};

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn extension(path: &Path) -> String {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase()).unwrap_or_default()
}
