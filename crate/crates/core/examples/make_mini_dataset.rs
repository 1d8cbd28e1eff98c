//! Writes the small synthetic dataset used by the pipeline tests.
//!
//! ```text
//! cargo run -p logsynth --release --example make_mini_dataset -- <out-dir>
//! ```

use std::path::PathBuf;

use logsynth::fitting::AnnotatedKnot;
use logsynth::io::{write_knot_annotations_csv, write_knot_annotations_json, write_point_cloud, DatasetManifest, PlyFormat};
use logsynth::synth::{generate_log, log_rng, sample_knot_points, sample_surface_points};
use logsynth::{GenerationConfig, ModelStatistics};

const LOGS: u64 = 3;
const LENGTH: f64 = 900.0;
const DENSITY: f64 = 0.02;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).ok_or("usage: make_mini_dataset <out-dir>")?);
    std::fs::create_dir_all(&out)?;
    let stats = ModelStatistics::reference();
    let cfg = GenerationConfig { seed: 2024, log_length: Some(LENGTH), end_margin: 150.0, ..Default::default() };
    let mut manifest = DatasetManifest::new(&out);
    for i in 0..LOGS {
        let log = generate_log(&stats, &cfg, i)?;
        let id = format!("log{i}");
        let mut rng = log_rng(cfg.seed ^ 0x5ca9, i);
        let surface = sample_surface_points(&log.model, &log.heightmap, DENSITY, &mut rng)?;
        let knots = (0..log.model.knots.len())
            .map(|k| {
                let rec = &log.model.knots[k];
                Ok(AnnotatedKnot { knot_id: rec.id, cluster_id: Some(rec.cluster as u32), points: sample_knot_points(&log.model, k, 20, 12)? })
            })
            .collect::<logsynth::Result<Vec<_>>>()?;
        let surface_name = format!("{id}.surface.ply");
        write_point_cloud(out.join(&surface_name), &surface, PlyFormat::BinaryLittleEndian)?;
        let knots_name = if i % 2 == 0 { format!("{id}.knots.json") } else { format!("{id}.knots.csv") };
        if i % 2 == 0 {
            write_knot_annotations_json(out.join(&knots_name), &knots)?;
        } else {
            write_knot_annotations_csv(out.join(&knots_name), &knots)?;
        }
        manifest.push(&id, surface_name, knots_name)?;
        println!("{id}: {} surface points, {} knots", surface.len(), knots.len());
    }
    manifest.write(out.join("manifest.json"))?;
    Ok(())
}
