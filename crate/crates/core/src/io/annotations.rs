use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fitting::AnnotatedKnot;
use crate::logcentric::CartesianPoint;
use crate::{Error, Result};

use super::{extension, read_bytes, write_atomic};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotGroup {
    knot_id: u32,
    #[serde(default)]
    cluster_id: Option<u32>,
    points: Vec<[f64; 3]>,
}

/// Reads knot annotations from JSON (a list of `{knot_id, cluster_id?, points}`
/// with points as `[x, y, z]` triples) or CSV (columns `knot_id`, optional
/// `cluster_id`, `x`, `y`, `z`). Groups keep the order in which their ids first
/// appear.
pub fn read_knot_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotatedKnot>> {
    let path = path.as_ref();
    let knots = match extension(path).as_str() {
        "json" => parse_json(&read_bytes(path)?)?,
        "csv" => parse_csv(&read_bytes(path)?)?,
        ext => {
            return Err(Error::InvalidParameter(format!(
                "unknown annotation extension '{ext}' on {} (expected json or csv)",
                path.display()
            )))
        }
    };
    if knots.is_empty() {
        return Err(Error::EmptyInput("knot annotations"));
    }
    Ok(knots)
}

fn parse_json(bytes: &[u8]) -> Result<Vec<AnnotatedKnot>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse { offset: e.valid_up_to(), message: "not UTF-8".into() })?;
    let groups: Vec<KnotGroup> = serde_json::from_str(text).map_err(|e| super::model_json::json_error(text, &e))?;
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        if seen.insert(g.knot_id, ()).is_some() {
            return Err(Error::Validation(format!("duplicate knot id {}", g.knot_id)));
        }
        if g.points.is_empty() {
            return Err(Error::Validation(format!("knot {} has no points", g.knot_id)));
        }
        out.push(AnnotatedKnot {
            knot_id: g.knot_id,
            cluster_id: g.cluster_id,
            points: g.points.iter().map(|p| CartesianPoint::new(p[0], p[1], p[2])).collect(),
        });
    }
    Ok(out)
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<AnnotatedKnot>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| Error::Parse { offset: 0, message: format!("CSV header: {e}") })?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need = |name: &str| col(name).ok_or_else(|| Error::Parse { offset: 0, message: format!("CSV header has no '{name}' column") });
    let (id_col, xs) = (need("knot_id")?, [need("x")?, need("y")?, need("z")?]);
    let cluster_col = col("cluster_id");

    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut out: Vec<AnnotatedKnot> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { offset: e.position().map_or(0, |p| p.byte() as usize), message: e.to_string() })?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let bad = |what: &str, s: &str| Error::Parse { offset, message: format!("bad {what} '{s}'") };
        let id_s = rec.get(id_col).unwrap_or("");
        let id: u32 = id_s.parse().map_err(|_| bad("knot_id", id_s))?;
        let cluster = match cluster_col.map(|c| rec.get(c).unwrap_or("")) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<u32>().map_err(|_| bad("cluster_id", s))?),
        };
        let mut v = [0.0; 3];
        for (k, &c) in xs.iter().enumerate() {
            let s = rec.get(c).unwrap_or("");
            v[k] = s.parse().map_err(|_| bad("coordinate", s))?;
        }
        let i = *index.entry(id).or_insert_with(|| {
            out.push(AnnotatedKnot { knot_id: id, cluster_id: cluster, points: Vec::new() });
            out.len() - 1
        });
        if out[i].cluster_id != cluster {
            return Err(Error::Validation(format!("knot {id} carries conflicting cluster ids")));
        }
        out[i].points.push(CartesianPoint::new(v[0], v[1], v[2]));
    }
    Ok(out)
}

pub fn write_knot_annotations_json(path: impl AsRef<Path>, knots: &[AnnotatedKnot]) -> Result<()> {
    let groups: Vec<KnotGroup> = knots
        .iter()
        .map(|k| KnotGroup { knot_id: k.knot_id, cluster_id: k.cluster_id, points: k.points.iter().map(|p| [p.x, p.y, p.z]).collect() })
        .collect();
    let text = serde_json::to_string(&groups).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    write_atomic(path, text.as_bytes())
}

pub fn write_knot_annotations_csv(path: impl AsRef<Path>, knots: &[AnnotatedKnot]) -> Result<()> {
    let mut s = String::from("knot_id,cluster_id,x,y,z\n");
    for k in knots {
        let c = k.cluster_id.map(|c| c.to_string()).unwrap_or_default();
        for p in &k.points {
            let _ = writeln!(s, "{},{},{},{},{}", k.knot_id, c, p.x, p.y, p.z);
        }
    }
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knots() -> Vec<AnnotatedKnot> {
        (0..2)
            .map(|k| AnnotatedKnot {
                knot_id: 10 + k,
                cluster_id: (k == 0).then_some(3),
                points: (0..100).map(|i| CartesianPoint::new(i as f64 * 0.1, k as f64, 1.0 / (i + 1) as f64)).collect(),
            })
            .collect()
    }

    #[test]
    fn json_and_csv_agree() {
        let dir = tempfile::tempdir().unwrap();
        let (j, c) = (dir.path().join("k.json"), dir.path().join("k.csv"));
        write_knot_annotations_json(&j, &knots()).unwrap();
        write_knot_annotations_csv(&c, &knots()).unwrap();
        let (a, b) = (read_knot_annotations(&j).unwrap(), read_knot_annotations(&c).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, knots());
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|k| k.points.len() == 100));
        assert_eq!(a[1].cluster_id, None);
    }

    #[test]
    fn missing_cluster_is_null() {
        let k = parse_json(br#"[{"knot_id": 1, "points": [[0,0,0]]}]"#).unwrap();
        assert_eq!(k[0].cluster_id, None);
    }

    #[test]
    fn rejects_duplicates_and_empty_groups() {
        assert!(matches!(parse_json(br#"[{"knot_id":1,"points":[[0,0,0]]},{"knot_id":1,"points":[[1,1,1]]}]"#), Err(Error::Validation(_))));
        assert!(matches!(parse_json(br#"[{"knot_id":1,"points":[]}]"#), Err(Error::Validation(_))));
        assert!(matches!(parse_csv(b"knot_id,cluster_id,x,y,z\n1,2,0,0,0\n1,3,0,0,0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse_json(br#"[{"knot_id":1,"points":[[0,0,0]"#), Err(Error::Parse { .. })));
    }
}
