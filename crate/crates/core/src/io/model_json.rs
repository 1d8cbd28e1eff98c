use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::fitting::{LogModel, LOG_MODEL_SCHEMA};
use crate::stats::{ModelStatistics, STATISTICS_SCHEMA};
use crate::{Error, Result};

use super::{read_text, write_atomic};

/// A document with a `schema_version` field.
pub trait Versioned: Serialize + DeserializeOwned {
    const SCHEMA: u32;
    const KIND: &'static str;
}

impl Versioned for LogModel {
    const SCHEMA: u32 = LOG_MODEL_SCHEMA;
    const KIND: &'static str = "log model";
}

impl Versioned for ModelStatistics {
    const SCHEMA: u32 = STATISTICS_SCHEMA;
    const KIND: &'static str = "model statistics";
}

/// Byte offset of a serde_json error position inside `text`.
pub(crate) fn json_error(text: &str, e: &serde_json::Error) -> Error {
    let offset = if e.line() == 0 {
        0
    } else {
        let line_start: usize = text.split_inclusive('\n').take(e.line() - 1).map(str::len).sum();
        (line_start + e.column().saturating_sub(1)).min(text.len())
    };
    Error::Parse { offset, message: e.to_string() }
}

/// Pretty JSON with a trailing newline. Floats are written in their shortest
/// form that parses back to the same bits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

/// Parses a versioned document. Syntax errors carry the byte offset; a
/// version mismatch or an unknown field is a schema error naming the version
/// this reader understands.
pub fn from_json_str<T: Versioned>(text: &str) -> Result<T> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
    let version = raw
        .get("schema_version")
        .ok_or_else(|| Error::Schema(format!("{} has no schema_version (this reader expects {})", T::KIND, T::SCHEMA)))?;
    if version.as_u64() != Some(T::SCHEMA as u64) {
        return Err(Error::Schema(format!("{} schema_version {version} is not supported (this reader expects {})", T::KIND, T::SCHEMA)));
    }
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            Error::Schema(format!("{msg}; {} schema_version {} does not define this field", T::KIND, T::SCHEMA))
        } else {
            json_error(text, &e)
        }
    })
}

fn read_versioned<T: Versioned>(path: &Path) -> Result<T> {
    from_json_str(&read_text(path)?)
}

pub fn read_log_model(path: impl AsRef<Path>) -> Result<LogModel> {
    read_versioned(path.as_ref())
}

pub fn read_statistics(path: impl AsRef<Path>) -> Result<ModelStatistics> {
    read_versioned(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::log::cylinder_model;
    use crate::logcentric::GridSpec;

    fn model() -> LogModel {
        cylinder_model(120.0, 1000.0, GridSpec::new(64, 100, 0.0, 1000.0).unwrap()).unwrap()
    }

    #[test]
    fn empty_knot_model_round_trips() {
        let m = model();
        let back: LogModel = from_json_str(&to_json_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn statistics_round_trip() {
        let s = ModelStatistics::reference();
        let back: ModelStatistics = from_json_str(&to_json_string(&s).unwrap()).unwrap();
        assert_eq!(to_json_string(&back).unwrap(), to_json_string(&s).unwrap());
    }

    #[test]
    fn truncated_file_names_offset() {
        let text = to_json_string(&model()).unwrap();
        let cut = &text[..text.len() / 2];
        match from_json_str::<LogModel>(cut) {
            Err(Error::Parse { offset, .. }) => assert!(offset > 0 && offset <= cut.len(), "{offset}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_and_unknown_fields() {
        let mut v = serde_json::to_value(model()).unwrap();
        v["schema_version"] = 99.into();
        match from_json_str::<LogModel>(&v.to_string()) {
            Err(Error::Schema(m)) => assert!(m.contains("99") && m.contains("expects 1"), "{m}"),
            other => panic!("{other:?}"),
        }
        let mut v = serde_json::to_value(model()).unwrap();
        v["colour"] = "red".into();
        match from_json_str::<LogModel>(&v.to_string()) {
            Err(Error::Schema(m)) => assert!(m.contains("colour") && m.contains("schema_version 1"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
