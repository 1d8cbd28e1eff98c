use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use logsynth::fitting::log::{fit_log, summary_table};
use logsynth::io::{
    export_generated, export_reconstruction, from_json_str, read_log_model, read_statistics, write_atomic, write_json,
    DatasetManifest, ExportSettings,
};
use logsynth::{Error, FitConfig, GenerationConfig, LogFitReport, LogModel, ModelStatistics, Result};

/// Contents of the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub fit: FitConfig,
    pub generate: GenerationConfig,
    pub export: ExportSettings,
}

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<CliConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Schema(format!("config {}: {e}", p.display())))?
        }
        None => CliConfig::default(),
    };
    if let Some(s) = seed {
        cfg.generate.seed = s;
        cfg.fit.grain.seed = s;
    }
    cfg.generate.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Log ids become file names; anything outside `[A-Za-z0-9_.-]` is replaced.
fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' }).collect()
}

pub fn fit(cfg: &CliConfig, manifest: &Path, out: &Path) -> Result<()> {
    let manifest = DatasetManifest::load(manifest)?;
    create_dir(out)?;
    let results: Vec<Result<(String, LogFitReport)>> = manifest
        .logs
        .par_iter()
        .map(|entry| {
            let (data, rejected) = manifest.load_log(entry)?;
            if rejected > 0 {
                eprintln!("{}: {rejected} non-finite surface rows skipped", entry.id);
            }
            let (model, report) = fit_log(&data, &cfg.fit)?;
            let stem = file_stem(&entry.id);
            write_json(out.join(format!("{stem}.model.json")), &model)?;
            write_json(out.join(format!("{stem}.report.json")), &report)?;
            Ok((stem, report))
        })
        .collect();
    let mut reports = Vec::new();
    for r in results {
        reports.push(r?.1);
    }
    let mut text = summary_table(&reports);
    for r in &reports {
        text.push('\n');
        text.push_str(&r.table());
    }
    write_atomic(out.join("fit_report.txt"), text.as_bytes())?;
    write_json(out.join("fit_report.json"), &reports)?;
    print!("{}", summary_table(&reports));
    Ok(())
}

/// Model files named on the command line, with directories expanded to their
/// `*.model.json` entries in name order.
fn model_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".model.json")))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("log models"));
    }
    Ok(out)
}

pub fn stats(models: &[PathBuf], out: &Path) -> Result<()> {
    let models = model_paths(models)?.iter().map(read_log_model).collect::<Result<Vec<LogModel>>>()?;
    for m in &models {
        m.validate()?;
    }
    let stats = ModelStatistics::fit(&models)?;
    stats.validate()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_json(out, &stats)?;
    println!("statistics of {} logs written to {}", models.len(), out.display());
    Ok(())
}

pub fn generate(cfg: &CliConfig, stats_path: &Path, count: usize, out: &Path) -> Result<()> {
    let stats = read_statistics(stats_path)?;
    stats.validate()?;
    create_dir(out)?;
    let g = &cfg.generate;
    let names: Vec<String> = (0..count).map(|i| format!("log{i:04}")).collect();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let log = logsynth::synth::generate_log(&stats, g, i as u64)?;
            export_generated(out, &names[i], &log, &g.outputs, g.point_density, g.seed, &cfg.export)?;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    if g.outputs.point_cloud && count > 0 {
        let mut manifest = DatasetManifest::new(out);
        for n in &names {
            manifest.push(n, format!("{n}.surface.ply"), format!("{n}.annotations.json"))?;
        }
        manifest.write(out.join("manifest.json"))?;
    }
    println!("{count} logs written to {}", out.display());
    Ok(())
}

pub fn reconstruct(cfg: &CliConfig, model: &Path, out: &Path, grain: bool) -> Result<()> {
    let m = read_log_model(model)?;
    m.validate()?;
    create_dir(out)?;
    let name = model.file_name().and_then(|n| n.to_str()).unwrap_or("log");
    let name = name.strip_suffix(".model.json").or_else(|| name.strip_suffix(".json")).unwrap_or(name);
    let settings = ExportSettings { grain: grain && cfg.export.grain, ..cfg.export.clone() };
    let files = export_reconstruction(out, name, &m, &settings)?;
    println!("{} files written to {}", files.len(), out.display());
    Ok(())
}

/// Validates a log model or a statistics file, telling them apart by their
/// top-level keys.
pub fn validate(file: &Path) -> Result<()> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        offset: 0,
        message: format!("{}: {e}", file.display()),
    })?;
    let kind = if value.get("knot_params").is_some() {
        from_json_str::<ModelStatistics>(&text)?.validate()?;
        "model statistics"
    } else {
        from_json_str::<LogModel>(&text)?.validate()?;
        "log model"
    };
    println!("{}: valid {kind}", file.display());
    Ok(())
}
