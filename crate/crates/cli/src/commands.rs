use std::fmt::Write as _;

use randpoly::body::{ConvexBodyModel, DEFAULT_MC_SAMPLES};
use randpoly::combinatorics::classify_d_plus_2;
use randpoly::experiments::{run_experiment, write_cell_csv, ExperimentConfig, Model};
use randpoly::hull::{f_vector, f_vector_of_points, incremental_hull};
use randpoly::rng::{derive_seed, Stream};
use randpoly::stabilization::radius_tail_experiment;
use serde_json::json;

use crate::io::{read_points, tuple, CliError, CliResult, Manifest, OutDir};
use crate::report::summary_document;
use crate::resolve::resolve;
use crate::Common;

fn out_dir(c: &Common) -> CliResult<OutDir> {
    OutDir::create(c.out.as_deref().unwrap_or("out"))
}

/// First sample size of a binomial config.
fn single_n(cfg: &ExperimentConfig) -> CliResult<usize> {
    match &cfg.model {
        Model::Binomial { n_grid } if !n_grid.is_empty() => Ok(n_grid[0]),
        _ => Err(CliError::Config("this subcommand needs a sample size (--n)".into())),
    }
}

fn body_of(cfg: &ExperimentConfig) -> CliResult<ConvexBodyModel> {
    Ok(cfg.body_model()?)
}

pub fn hull(c: &Common, file: &str) -> CliResult {
    let (d, points) = read_points(file, c.dim)?;
    let h = incremental_hull(&points, d)?;
    let f = f_vector(&h);
    let mut out = out_dir(c)?;
    out.write("facets.txt", h.facet_dump().as_bytes())?;
    out.write_json("fvector.json", &json!({ "d": d, "f_vector": f.counts }))?;
    println!("f-vector: {}", tuple(&f.counts));
    out.finish(Manifest {
        command: "hull",
        config: None,
        inputs: vec![file.to_string()],
        params: json!({ "d": d, "points": points.len() }),
    })
}

pub fn fvector(c: &Common, file: Option<&str>) -> CliResult {
    let mut out = out_dir(c)?;
    match file {
        Some(file) => {
            let (d, points) = read_points(file, c.dim)?;
            let f = f_vector(&incremental_hull(&points, d)?);
            println!("f-vector: {}", tuple(&f.counts));
            out.write_json("fvector.json", &json!({ "d": d, "f_vector": f.counts }))?;
            out.finish(Manifest {
                command: "fvector",
                config: None,
                inputs: vec![file.to_string()],
                params: json!({ "d": d, "points": points.len() }),
            })
        }
        None => {
            let cfg = resolve(c)?;
            let body = body_of(&cfg)?;
            let Model::Binomial { n_grid } = &cfg.model else {
                return Err(CliError::Config("fvector samples need --n".into()));
            };
            let mut rows = Vec::new();
            // Cell c uses the stream of replication 0 of experiment cell c.
            for (cell, &n) in n_grid.iter().enumerate() {
                let mut rng = Stream::new(derive_seed(cfg.master_seed.0, cell as u64, 0));
                let coords = body.sample_flat(&mut rng, n);
                let f = f_vector_of_points(&coords, cfg.d)?;
                println!("n = {n}: {}", tuple(&f.counts));
                rows.push(json!({ "n": n, "f_vector": f.counts }));
            }
            out.write_json("fvector.json", &rows)?;
            out.finish(Manifest {
                command: "fvector",
                config: Some(cfg),
                inputs: Vec::new(),
                params: json!({}),
            })
        }
    }
}

pub fn classify(c: &Common, file: &str) -> CliResult {
    let (d, points) = read_points(file, c.dim)?;
    if points.len() != d + 2 {
        return Err(CliError::Input(format!(
            "{file}: classify needs exactly d + 2 = {} points, found {}",
            d + 2,
            points.len()
        )));
    }
    let class = classify_d_plus_2(&points)?;
    let hull_f = f_vector(&incremental_hull(&points, d)?);
    let formula = class.label.f_vector();
    println!("type: {}", class.label);
    println!("formula f-vector: {}", tuple(&formula));
    println!("hull f-vector: {}", tuple(&hull_f.counts));
    let mut out = out_dir(c)?;
    out.write_json(
        "classification.json",
        &json!({
            "type": class.label.to_string(),
            "apex": class.apex,
            "beyond": class.beyond,
            "formula_f_vector": formula,
            "hull_f_vector": hull_f.counts,
        }),
    )?;
    out.finish(Manifest {
        command: "classify",
        config: None,
        inputs: vec![file.to_string()],
        params: json!({ "d": d }),
    })
}

pub fn sample(c: &Common) -> CliResult {
    let cfg = resolve(c)?;
    let body = body_of(&cfg)?;
    let n = single_n(&cfg)?;
    let mut rng = Stream::new(derive_seed(cfg.master_seed.0, 0, 0));
    let pts = body.sample_points(&mut rng, n);
    let mut text = String::new();
    for p in &pts {
        let row: Vec<String> = p.coords.iter().map(f64::to_string).collect();
        let _ = writeln!(text, "{}", row.join(" "));
    }
    let mut out = out_dir(c)?;
    out.write("samples.txt", text.as_bytes())?;
    println!("wrote {n} samples to {}", out.path.join("samples.txt").display());
    out.finish(Manifest {
        command: "sample",
        config: Some(cfg),
        inputs: Vec::new(),
        params: json!({ "n": n }),
    })
}

/// Boundary point with outward normal `e_d`.
fn top_point(body: &ConvexBodyModel) -> Vec<f64> {
    match body {
        ConvexBodyModel::Ball { center, radius } => {
            let mut p = center.clone();
            *p.last_mut().expect("d >= 2") += radius;
            p
        }
        ConvexBodyModel::Ellipsoid { semi_axes } => {
            let mut p = vec![0.0; semi_axes.len()];
            *p.last_mut().expect("d >= 2") = *semi_axes.last().expect("d >= 2");
            p
        }
    }
}

pub fn cap(c: &Common, point: Option<&[f64]>, height: f64, samples: Option<usize>) -> CliResult {
    let cfg = resolve(c)?;
    let body = body_of(&cfg)?;
    let y = point.map(<[f64]>::to_vec).unwrap_or_else(|| top_point(&body));
    let samples = samples.unwrap_or(DEFAULT_MC_SAMPLES);
    let cap = body.cap(&y, height)?;
    let mut rng = Stream::new(derive_seed(cfg.master_seed.0, 0, 0));
    let area = body.cap_area(&cap, &mut rng, samples)?;
    println!("cap area: {} ± {}", area.value, area.stderr);
    let mut out = out_dir(c)?;
    out.write_json("cap.json", &json!({ "center": y, "height": height, "samples": samples, "area": area }))?;
    out.finish(Manifest {
        command: "cap",
        config: Some(cfg),
        inputs: Vec::new(),
        params: json!({ "point": y, "height": height, "samples": samples }),
    })
}

pub fn stabilize(c: &Common) -> CliResult {
    let cfg = resolve(c)?;
    let body = body_of(&cfg)?;
    let n = single_n(&cfg)?;
    let table = radius_tail_experiment(&body, n, None, cfg.replications, cfg.master_seed.0)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["r", "n", "survival", "stderr"]).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record([row.r.to_string(), n.to_string(), row.survival.to_string(), row.stderr.to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = out_dir(c)?;
    out.write("tail.csv", &bytes)?;
    out.write_json("tail_fit.json", &table)?;
    println!(
        "log-survival vs r^(d-1) n: slope {:.4}, r^2 {:.4} over {} points",
        table.fit.slope, table.fit.r_squared, table.fit.points
    );
    out.finish(Manifest {
        command: "stabilize",
        config: Some(cfg),
        inputs: Vec::new(),
        params: json!({ "n": n }),
    })
}

pub fn experiment(c: &Common) -> CliResult {
    let cfg = resolve(c)?;
    cfg.validate()?;
    let table = run_experiment(&cfg)?;
    let mut out = OutDir::create(&cfg.outputs.dir)?;
    if cfg.outputs.csv {
        for cell in 0..table.cells.len() {
            let mut buf = Vec::new();
            write_cell_csv(&table, cell, &mut buf)?;
            out.write(&table.csv_name(cell), &buf)?;
        }
    }
    for cell in &table.cells {
        let degenerate = cell.records.iter().filter(|r| r.degenerate).count();
        println!(
            "{} {} = {}: {} replications, {} degenerate, {} audited",
            table.model.name(),
            if cfg.model.name() == "binomial" { "n" } else { "t" },
            cell.param,
            cell.records.len(),
            degenerate,
            cell.audited
        );
    }
    if cfg.outputs.summary {
        let doc = summary_document(&table, &cfg.k_list, &cfg.bands)?;
        out.write_json("summary.json", &doc)?;
    }
    out.finish(Manifest {
        command: "experiment",
        config: Some(cfg),
        inputs: Vec::new(),
        params: json!({}),
    })
}
