use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBodyModel;
use crate::error::{Error, Result};
use crate::hull::{f_vector_of_points, facet_vertices, flat_face_counts};
use crate::rng::{derive_seed, Stream};
use crate::stabilization::incident_faces;

use super::config::{ExperimentConfig, Model};
use super::poisson::poisson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Binomial,
    Poisson,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Binomial => "binomial",
            ModelKind::Poisson => "poisson",
        }
    }

    fn symbol(self) -> char {
        match self {
            ModelKind::Binomial => 'n',
            ModelKind::Poisson => 't',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub seed: u64,
    /// Realized point count.
    pub n: usize,
    pub degenerate: bool,
    /// `None` for degenerate replications.
    pub f_vector: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTable {
    /// `n` or `t`.
    pub param: f64,
    pub records: Vec<ReplicationRecord>,
    /// Replications whose score identity was re-verified.
    pub audited: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationTable {
    pub d: usize,
    pub body: ConvexBodyModel,
    pub model: ModelKind,
    pub master_seed: u64,
    pub cells: Vec<CellTable>,
}

impl ReplicationTable {
    pub fn body_name(&self) -> &'static str {
        match self.body {
            ConvexBodyModel::Ball { .. } => "ball",
            ConvexBodyModel::Ellipsoid { .. } => "ellipsoid",
        }
    }

    /// File name of cell `c`'s CSV, e.g. `binomial_n250.csv`.
    pub fn csv_name(&self, c: usize) -> String {
        cell_file_name(self.model, self.cells[c].param)
    }
}

pub fn cell_file_name(model: ModelKind, param: f64) -> String {
    format!("{}_{}{}.csv", model.name(), model.symbol(), param)
}

/// Fraction of replications whose score identity is re-verified.
pub const AUDIT_RATE: f64 = 0.01;
const AUDIT_LANE: u64 = 0xa0d1_7000;

fn audit_selected(seed: u64) -> bool {
    Stream::new(derive_seed(seed, AUDIT_LANE, 0)).uniform() < AUDIT_RATE
}

/// Checks `Σ_v #{k-faces ∋ v} = (k+1) f_k` for every `k`, counting per
/// vertex star independently of the f-vector routine.
fn audit_scores(n: usize, d: usize, facets: &[usize], f: &[u64]) -> Result<()> {
    let mut star: Vec<Vec<&[usize]>> = vec![Vec::new(); n];
    for fv in facets.chunks(d) {
        for &v in fv {
            star[v].push(fv);
        }
    }
    let mut scratch = Vec::new();
    for k in 0..d {
        let total: u64 = (0..n)
            .filter(|&v| !star[v].is_empty())
            .map(|v| incident_faces(d, k, v, &star[v], &mut scratch))
            .sum();
        if total != (k as u64 + 1) * f[k] {
            return Err(Error::Invariant(format!(
                "score sum {total}/{} differs from f_{k} = {}",
                k + 1,
                f[k]
            )));
        }
    }
    Ok(())
}

/// Hull f-vector of `n` fresh samples; general-position failures mark the
/// replication degenerate.
fn replicate(body: &ConvexBodyModel, d: usize, n: usize, rng: &mut Stream, audit: bool) -> Result<Option<Vec<u64>>> {
    if n <= d + 1 {
        return Ok(None);
    }
    let coords = body.sample_flat(rng, n);
    let facets = match facet_vertices(&coords, n, d) {
        Ok(f) => f,
        Err(Error::GeneralPosition { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let f = match flat_face_counts(n, d, &facets) {
        Some(f) => f,
        None => f_vector_of_points(&coords, d)?.counts,
    };
    if audit {
        audit_scores(n, d, &facets, &f)?;
    }
    Ok(Some(f))
}

fn run_cells<F>(cfg: &ExperimentConfig, kind: ModelKind, params: &[f64], count: F) -> Result<ReplicationTable>
where
    F: Fn(f64, &mut Stream) -> usize + Sync,
{
    cfg.validate()?;
    let body = cfg.body_model()?;
    let d = cfg.d;
    let master = cfg.master_seed.0;
    let mut cells = Vec::with_capacity(params.len());
    for (c, &param) in params.iter().enumerate() {
        let out = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(master, c as u64, rep as u64);
                let mut rng = Stream::new(seed);
                let n = count(param, &mut rng);
                let audit = audit_selected(seed);
                let f = replicate(&body, d, n, &mut rng, audit)?;
                let record = ReplicationRecord {
                    rep,
                    seed,
                    n,
                    degenerate: f.is_none(),
                    f_vector: f,
                };
                let audited = audit && !record.degenerate;
                Ok((record, audited))
            })
            .collect::<Result<Vec<_>>>()?;
        let audited = out.iter().filter(|(_, a)| *a).count();
        cells.push(CellTable {
            param,
            records: out.into_iter().map(|(r, _)| r).collect(),
            audited,
        });
    }
    Ok(ReplicationTable {
        d,
        body,
        model: kind,
        master_seed: master,
        cells,
    })
}

/// Hulls of `n` i.i.d. boundary points for each `n` in the grid. Cell `c`
/// replication `i` uses the stream `derive_seed(master_seed, c, i)`.
pub fn run_binomial(cfg: &ExperimentConfig) -> Result<ReplicationTable> {
    let Model::Binomial { n_grid } = &cfg.model else {
        return Err(Error::Config("run_binomial needs a binomial model".into()));
    };
    let params: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    run_cells(cfg, ModelKind::Binomial, &params, |n, _| n as usize)
}

/// As [`run_binomial`], with the point count drawn as `N ~ Poisson(t)` from
/// the head of each replication's stream. `N ≤ d + 1` is flagged degenerate.
pub fn run_poisson(cfg: &ExperimentConfig) -> Result<ReplicationTable> {
    let Model::Poisson { t_grid } = &cfg.model else {
        return Err(Error::Config("run_poisson needs a poisson model".into()));
    };
    run_cells(cfg, ModelKind::Poisson, t_grid, |t, rng| poisson(t, rng) as usize)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReplicationTable> {
    match cfg.model {
        Model::Binomial { .. } => run_binomial(cfg),
        Model::Poisson { .. } => run_poisson(cfg),
    }
}

/// Replication CSV: `rep,seed,n,degenerate,f0,…,f{d-1}`; seeds as 16-digit
/// lowercase hex, `degenerate` as 0/1, f columns empty when degenerate.
pub fn write_cell_csv<W: Write>(table: &ReplicationTable, c: usize, out: W) -> Result<()> {
    let d = table.d;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["rep".to_string(), "seed".into(), "n".into(), "degenerate".into()];
    header.extend((0..d).map(|k| format!("f{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in &table.cells[c].records {
        let mut row = vec![
            r.rep.to_string(),
            format!("{:016x}", r.seed),
            r.n.to_string(),
            u8::from(r.degenerate).to_string(),
        ];
        match &r.f_vector {
            Some(f) => row.extend(f.iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), d)),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a replication CSV; returns `(d, records)`.
pub fn read_cell_csv<R: Read>(input: R) -> Result<(usize, Vec<ReplicationRecord>)> {
    let mut rd = csv::ReaderBuilder::new().from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    let d = header.len().saturating_sub(4);
    let expect: Vec<String> = ["rep", "seed", "n", "degenerate"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..d).map(|k| format!("f{k}")))
        .collect();
    if d < 2 || header.iter().ne(expect.iter().map(String::as_str)) {
        return Err(Error::Config(format!("unexpected replication CSV header {header:?}")));
    }
    let bad = |line: usize, what: &str| Error::Config(format!("replication CSV row {line}: bad {what}"));
    let mut records = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = line + 2;
        let rep = row[0].parse().map_err(|_| bad(line, "rep"))?;
        let seed = u64::from_str_radix(&row[1], 16).map_err(|_| bad(line, "seed"))?;
        let n = row[2].parse().map_err(|_| bad(line, "n"))?;
        let degenerate = match &row[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(line, "degenerate flag")),
        };
        let f_vector = if degenerate {
            None
        } else {
            Some(
                (0..d)
                    .map(|k| row[4 + k].parse::<u64>().map_err(|_| bad(line, "f-vector")))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        records.push(ReplicationRecord {
            rep,
            seed,
            n,
            degenerate,
            f_vector,
        });
    }
    Ok((d, records))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes one CSV per cell into `dir`; returns the paths in cell order.
pub fn write_tables(table: &ReplicationTable, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for c in 0..table.cells.len() {
        let path = dir.join(table.csv_name(c));
        let file = std::fs::File::create(&path)?;
        write_cell_csv(table, c, std::io::BufWriter::new(file))?;
        paths.push(path);
    }
    Ok(paths)
}
