//! Post-processing of an output directory.
//!
//! Experiment runs produce `summary.json` and, per face dimension `k`,
//! plot CSVs with columns `x,y,stderr`:
//! - `mean_k{k}.csv`: `x` = n or t, `y` = mean f_k / x, `stderr` = sd / (x √M)
//! - `variance_k{k}.csv`: `y` = sample variance, `stderr` = bootstrap 95% half-width / 1.96
//! - `ks_k{k}.csv`: `y` = self-normalized KS distance, `stderr` left empty
//!
//! Stabilization runs produce `tail_plot.csv` with `x` = r^(d-1) n,
//! `y` = ln P(R ≥ r) and `stderr` = delta-method error of `y`.

use std::path::Path;

use randpoly::experiments::run::cell_file_name;
use randpoly::experiments::{
    clt_report, read_cell_csv, summarize, variance_scaling, Bands, CellTable, ExperimentConfig, ModelKind,
    ReplicationTable, SummaryStats,
};
use serde::Serialize;
use serde_json::json;

use crate::io::{CliError, CliResult, Manifest, OutDir};
use crate::Common;

#[derive(Serialize)]
pub struct FaceSummary {
    pub k: usize,
    pub cells: Vec<SummaryStats>,
    /// Log-log fit of variance against the cell parameter; absent with
    /// fewer than three cells.
    pub variance_fit: Option<randpoly::experiments::stats::PowerLawFit>,
    pub clt: Option<randpoly::experiments::CltReport>,
}

#[derive(Serialize)]
pub struct SummaryDocument {
    pub body: String,
    pub d: usize,
    pub model: String,
    pub master_seed: String,
    pub faces: Vec<FaceSummary>,
}

pub fn summary_document(table: &ReplicationTable, k_list: &[usize], bands: &Bands) -> CliResult<SummaryDocument> {
    let mut faces = Vec::new();
    for &k in k_list {
        let cells = summarize(table, k)?;
        faces.push(FaceSummary {
            k,
            variance_fit: variance_scaling(&cells).ok(),
            clt: clt_report(table, k, bands.berry_esseen_ratio).ok(),
            cells,
        });
    }
    Ok(SummaryDocument {
        body: table.body_name().to_string(),
        d: table.d,
        model: table.model.name().to_string(),
        master_seed: format!("0x{:016x}", table.master_seed),
        faces,
    })
}

fn plot_csv(rows: impl IntoIterator<Item = (f64, f64, Option<f64>)>) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["x", "y", "stderr"]).map_err(err)?;
    for (x, y, s) in rows {
        w.write_record([x.to_string(), y.to_string(), s.map(|s| s.to_string()).unwrap_or_default()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Rebuilds the replication table of an experiment directory from its
/// manifest and cell CSVs.
pub fn load_table(dir: &Path) -> CliResult<(ExperimentConfig, ReplicationTable)> {
    let manifest = read_json(&dir.join("manifest.json"))?;
    let cfg: ExperimentConfig = serde_json::from_value(manifest["config"].clone())
        .map_err(|e| CliError::Config(format!("manifest config: {e}")))?;
    let model = match cfg.model.name() {
        "binomial" => ModelKind::Binomial,
        _ => ModelKind::Poisson,
    };
    let mut cells = Vec::new();
    for param in cfg.model.params() {
        let path = dir.join(cell_file_name(model, param));
        let file = std::fs::File::open(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let (d, records) = read_cell_csv(file)?;
        if d != cfg.d {
            return Err(CliError::Input(format!("{}: {d} f-columns, expected {}", path.display(), cfg.d)));
        }
        cells.push(CellTable {
            param,
            records,
            audited: 0,
        });
    }
    let table = ReplicationTable {
        d: cfg.d,
        body: cfg.body_model()?,
        model,
        master_seed: cfg.master_seed.0,
        cells,
    };
    Ok((cfg, table))
}

pub fn report(c: &Common, dir: &str) -> CliResult {
    let src = Path::new(dir);
    let manifest = read_json(&src.join("manifest.json"))?;
    let mut out = OutDir::create(c.out.as_deref().unwrap_or(dir))?;
    match manifest["command"].as_str() {
        Some("experiment") => report_experiment(src, &mut out)?,
        Some("stabilize") => report_tail(src, &manifest, &mut out)?,
        other => {
            return Err(CliError::Input(format!(
                "{dir}: nothing to report for command {}",
                other.unwrap_or("?")
            )))
        }
    }
    out.finish(Manifest {
        command: "report",
        config: None,
        inputs: vec![dir.to_string()],
        params: json!({}),
    })
}

fn report_experiment(src: &Path, out: &mut OutDir) -> CliResult {
    let (cfg, table) = load_table(src)?;
    let doc = summary_document(&table, &cfg.k_list, &cfg.bands)?;
    out.write_json("summary.json", &doc)?;
    for face in &doc.faces {
        let k = face.k;
        let mean = plot_csv(face.cells.iter().map(|s| {
            let se = (s.var / s.m_effective as f64).sqrt() / s.cell;
            (s.cell, s.mean / s.cell, Some(se))
        }))?;
        out.write(&format!("mean_k{k}.csv"), &mean)?;
        let var = plot_csv(
            face.cells
                .iter()
                .map(|s| (s.cell, s.var, Some((s.var_ci_hi - s.var_ci_lo) / (2.0 * 1.96)))),
        )?;
        out.write(&format!("variance_k{k}.csv"), &var)?;
        let ks = plot_csv(face.cells.iter().map(|s| (s.cell, s.ks, None)))?;
        out.write(&format!("ks_k{k}.csv"), &ks)?;
        println!("k = {k}:");
        for s in &face.cells {
            println!(
                "  {} = {}: mean {:.4}, var {:.4} [{:.4}, {:.4}], KS {:.4}",
                if cfg.model.name() == "binomial" { "n" } else { "t" },
                s.cell,
                s.mean,
                s.var,
                s.var_ci_lo,
                s.var_ci_hi,
                s.ks
            );
        }
        if let Some(fit) = &face.variance_fit {
            println!("  variance slope {:.4}", fit.slope);
        }
    }
    Ok(())
}

fn report_tail(src: &Path, manifest: &serde_json::Value, out: &mut OutDir) -> CliResult {
    let d = manifest["config"]["d"]
        .as_u64()
        .ok_or_else(|| CliError::Input("manifest lacks config.d".into()))? as i32;
    let path = src.join("tail.csv");
    let mut rd = csv::Reader::from_path(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Input(format!("{}: malformed row", path.display())))
        };
        let (r, n, p, se) = (num(0)?, num(1)?, num(2)?, num(3)?);
        if p > 0.0 {
            rows.push((r.powi(d - 1) * n, p.ln(), Some(se / p)));
        }
    }
    out.write("tail_plot.csv", &plot_csv(rows)?)?;
    let fit = read_json(&src.join("tail_fit.json"))?;
    out.write_json("summary.json", &json!({ "d": d, "fit": fit["fit"] }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_csv_layout() {
        let bytes = plot_csv([(1.0, 2.5, Some(0.1)), (2.0, 3.0, None)]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "x,y,stderr\n1,2.5,0.1\n2,3,\n");
    }
}
