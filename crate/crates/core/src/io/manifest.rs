use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fitting::AnnotatedLogData;
use crate::{Error, Result};

use super::model_json::{json_error, to_json_string};
use super::{read_bytes, read_knot_annotations, read_point_cloud, read_text, write_atomic};

pub const MANIFEST_SCHEMA: u32 = 1;

/// Lowercase hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One scanned log: its surface cloud and its knot annotations. Paths are
/// relative to the manifest unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub surface: PathBuf,
    pub knots: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    /// Must be `"mm"`.
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_note: Option<String>,
    pub logs: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA,
            units: "mm".into(),
            scale_note: Some("coordinates are scaled to the real size of the log in millimeters".into()),
            logs: Vec::new(),
            base_dir: base_dir.into(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Reads a manifest and checks units, file existence and any recorded
    /// checksums.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_text(path)?;
        let mut m: Self = serde_json::from_str(&text).map_err(|e| {
            if e.to_string().contains("unknown field") {
                Error::Schema(format!("{e}; manifest schema_version {MANIFEST_SCHEMA} does not define this field"))
            } else {
                json_error(&text, &e)
            }
        })?;
        if m.schema_version != MANIFEST_SCHEMA {
            return Err(Error::Schema(format!(
                "manifest schema_version {} is not supported (this reader expects {MANIFEST_SCHEMA})",
                m.schema_version
            )));
        }
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.units != "mm" {
            return Err(Error::Validation(format!("manifest units are '{}'; only mm is accepted", self.units)));
        }
        if self.logs.is_empty() {
            return Err(Error::EmptyInput("manifest logs"));
        }
        let mut ids = std::collections::HashSet::new();
        for e in &self.logs {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Validation(format!("duplicate log id '{}'", e.id)));
            }
            for (file, sum) in [(&e.surface, &e.surface_sha256), (&e.knots, &e.knots_sha256)] {
                let p = self.resolve(file);
                if !p.is_file() {
                    return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "listed in manifest but missing")));
                }
                if let Some(expected) = sum {
                    let actual = sha256_hex(&read_bytes(&p)?);
                    if !actual.eq_ignore_ascii_case(expected) {
                        return Err(Error::Validation(format!("checksum mismatch for {}: expected {expected}, found {actual}", p.display())));
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds a log, recording checksums of both files.
    pub fn push(&mut self, id: &str, surface: impl Into<PathBuf>, knots: impl Into<PathBuf>) -> Result<()> {
        let (surface, knots) = (surface.into(), knots.into());
        let surface_sha256 = Some(sha256_hex(&read_bytes(&self.resolve(&surface))?));
        let knots_sha256 = Some(sha256_hex(&read_bytes(&self.resolve(&knots))?));
        self.logs.push(ManifestEntry { id: id.into(), surface, knots, surface_sha256, knots_sha256 });
        Ok(())
    }

    /// Loads the data of one log; also returns the number of rejected surface rows.
    pub fn load_log(&self, entry: &ManifestEntry) -> Result<(AnnotatedLogData, usize)> {
        let cloud = read_point_cloud(self.resolve(&entry.surface))?;
        let knots = read_knot_annotations(self.resolve(&entry.knots))?;
        let data = AnnotatedLogData { id: entry.id.clone(), surface_points: cloud.points, knots };
        data.validate()?;
        Ok((data, cloud.rejected))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, to_json_string(self)?.as_bytes())
    }
}
