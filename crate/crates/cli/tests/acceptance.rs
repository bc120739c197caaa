//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use randpoly::body::{pack_disjoint_caps, unit_sphere_area, ConvexBodyModel};
use randpoly::combinatorics::{classify_d_plus_2, random_configuration, type_f_count};
use randpoly::experiments::stats::{cell_values, ks_to_normal, self_normalize};
use randpoly::experiments::{
    clt_report, read_cell_csv, run_binomial, run_poisson, summarize, variance_scaling, BodyKind, BodySpec,
    CellTable, ExperimentConfig, Model, ModelKind, ReplicationTable, Seed,
};
use randpoly::geometry::{dot, Point};
use randpoly::hull::{brute_force_hull, dehn_sommerville_check, euler_check, f_vector, incremental_hull, FVector};
use randpoly::rng::{derive_seed, Stream};
use randpoly::stabilization::{radius_tail_experiment, scores};

const GRID: [usize; 4] = [250, 500, 1000, 2000];
const M: usize = 2000;
const SEED_VARIANCE: u64 = 0x5eed_0006;
const SEED_ELLIPSOID: u64 = 0x5eed_0007;
const SEED_TAIL: u64 = 0x5eed_0009;
const SEED_POISSON: u64 = 0x5eed_0010;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn body_spec(kind: BodyKind, semi_axes: Option<Vec<f64>>) -> BodySpec {
    BodySpec {
        kind,
        radius: None,
        center: None,
        semi_axes,
    }
}

fn config(body: BodySpec, d: usize, k: usize, model: Model, reps: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        body,
        d,
        k_list: vec![k],
        model,
        replications: reps,
        master_seed: Seed(seed),
        outputs: Default::default(),
        bands: Default::default(),
    }
}

fn structural(f: &[u64], d: usize) -> bool {
    let f = FVector::new(f.to_vec());
    euler_check(&f, d) && dehn_sommerville_check(&f, d)
}

/// Criterion 1; returns the outcome and whether every f-vector passed the
/// structural identities.
fn determinism_3d() -> (Outcome, bool) {
    let start = Instant::now();
    let mut bad = 0;
    let mut structural_ok = true;
    for body in [
        body_spec(BodyKind::Ball, None),
        body_spec(BodyKind::Ellipsoid, Some(vec![2.0, 1.0, 1.0])),
    ] {
        let cfg = config(body, 3, 2, Model::Binomial { n_grid: vec![10, 100, 1000] }, 50, 0x5eed_0001);
        let table = match run_binomial(&cfg) {
            Ok(t) => t,
            Err(e) => return (outcome(false, format!("run failed: {e}")), false),
        };
        for cell in &table.cells {
            let n = cell.param as u64;
            for r in &cell.records {
                match &r.f_vector {
                    Some(f) if f[..] == [n, 3 * n - 6, 2 * n - 4] => structural_ok &= structural(f, 3),
                    _ => bad += 1,
                }
            }
        }
    }
    let t = start.elapsed();
    (
        outcome(bad == 0 && t < Duration::from_secs(30), format!("300 hulls, {bad} mismatches, {t:.2?} (< 30 s)")),
        structural_ok,
    )
}

/// Criterion 2; also reports structural identities on the hulls built.
fn oracle_equivalence() -> (Outcome, bool) {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut errors = 0;
    let mut structural_ok = true;
    for d in 2..=6 {
        let body = ConvexBodyModel::unit_ball(d);
        for n in d + 1..=d + 6 {
            for i in 0..200 {
                let mut rng = Stream::new(derive_seed(0x5eed_0002, (d * 100 + n) as u64, i));
                let pts = body.sample_points(&mut rng, n);
                match (incremental_hull(&pts, d), brute_force_hull(&pts, d)) {
                    (Ok(a), Ok(b)) => {
                        if a.facet_set() != b.facet_set() {
                            mismatches += 1;
                        }
                        structural_ok &= structural(&f_vector(&a).counts, d);
                    }
                    _ => errors += 1,
                }
            }
        }
    }
    let t = start.elapsed();
    (
        outcome(
            mismatches == 0 && errors == 0 && t < Duration::from_secs(120),
            format!("6000 instances, {mismatches} mismatches, {errors} errors, {t:.2?} (< 2 min)"),
        ),
        structural_ok,
    )
}

fn structural_identities(prior_ok: bool) -> Outcome {
    let body = ConvexBodyModel::unit_ball(4);
    let mut bad = 0;
    for i in 0..1000 {
        let mut rng = Stream::new(derive_seed(0x5eed_0003, 0, i));
        let pts = body.sample_points(&mut rng, 100);
        match incremental_hull(&pts, 4) {
            Ok(h) if structural(&f_vector(&h).counts, 4) => {}
            _ => bad += 1,
        }
    }
    outcome(
        prior_ok && bad == 0,
        format!("criteria 1-2 hulls {}, 1000 d=4 n=100 hulls with {bad} failures", if prior_ok { "ok" } else { "FAILED" }),
    )
}

fn classifier() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    let mut order_bad = 0;
    for d in 4..=7 {
        for k in 1..d {
            if type_f_count(d, 1, k).unwrap() >= type_f_count(d, 2, k).unwrap() {
                order_bad += 1;
            }
        }
        for i in 0..100 {
            let mut rng = Stream::new(derive_seed(0x5eed_0004, d as u64, i));
            let pts = random_configuration(d, &mut rng);
            let ok = (|| {
                let c = classify_d_plus_2(&pts).ok()?;
                let hull_f = f_vector(&incremental_hull(&pts, d).ok()?);
                if hull_f.counts != c.label.f_vector() {
                    return None;
                }
                // Every choice of apex gives the same label.
                for apex in 0..d + 2 {
                    let mut perm: Vec<Point> = pts.clone();
                    perm.swap(apex, d + 1);
                    if classify_d_plus_2(&perm).ok()?.label != c.label {
                        return None;
                    }
                }
                Some(())
            })();
            if ok.is_none() {
                bad += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && order_bad == 0 && t < Duration::from_secs(60),
        format!("400 configurations, {bad} failures, T1<T2 violations {order_bad}, {t:.2?} (< 1 min)"),
    )
}

fn score_identity() -> Outcome {
    let start = Instant::now();
    let body = ConvexBodyModel::unit_ball(4);
    let mut bad = 0;
    for i in 0..1000u64 {
        let mut rng = Stream::new(derive_seed(0x5eed_0005, 0, i));
        let n = 6 + (i as usize % 195);
        let pts = body.sample_points(&mut rng, n);
        let Ok(h) = incremental_hull(&pts, 4) else {
            bad += 1;
            continue;
        };
        let f = f_vector(&h);
        for k in 0..4 {
            if !scores(&h, k).is_ok_and(|s| s.sums_to(f.counts[k])) {
                bad += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && t < Duration::from_secs(60),
        format!("1000 hulls x 4 face dimensions, {bad} failures, {t:.2?} (< 1 min)"),
    )
}

fn variance_order(sphere: &ReplicationTable) -> Outcome {
    let stats = match summarize(sphere, 3) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("summary failed: {e}")),
    };
    let fit = variance_scaling(&stats);
    let cis_ok = stats.iter().all(|s| s.var_ci_lo > 0.0);
    let cis: Vec<String> = stats
        .iter()
        .map(|s| format!("n={}: var {:.1} [{:.1}, {:.1}]", s.cell, s.var, s.var_ci_lo, s.var_ci_hi))
        .collect();
    match fit {
        Ok(fit) => outcome(
            (0.8..=1.2).contains(&fit.slope) && cis_ok,
            format!("slope {:.4} in [0.8, 1.2]; {}", fit.slope, cis.join("; ")),
        ),
        Err(e) => outcome(false, format!("fit failed: {e}")),
    }
}

fn mean_of(table: &ReplicationTable, c: usize) -> f64 {
    let v = cell_values(table, c, 3);
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_order(sphere: &ReplicationTable, ellipsoid: &ReplicationTable) -> Outcome {
    let s2000 = mean_of(sphere, 3) / 2000.0;
    let s1000 = mean_of(sphere, 2) / 1000.0;
    let e2000 = mean_of(ellipsoid, 0) / 2000.0;
    let body_gap = (s2000 - e2000).abs() / s2000;
    let n_gap = (s2000 - s1000).abs() / s2000;
    outcome(
        body_gap <= 0.10 && n_gap < 0.10,
        format!(
            "f3/n at 2000: sphere {s2000:.4}, ellipsoid {e2000:.4} (gap {:.2}% <= 10%); sphere n=1000 {s1000:.4} (gap {:.2}% < 10%)",
            100.0 * body_gap,
            100.0 * n_gap
        ),
    )
}

fn clt(sphere: &ReplicationTable) -> Outcome {
    let report = match clt_report(sphere, 3, 3.0) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("report failed: {e}")),
    };
    let ks250 = report.rows[0].ks;
    let ks2000 = report.rows[3].ks;
    let ks: Vec<String> = report.rows.iter().map(|r| format!("{:.4}", r.ks)).collect();
    outcome(
        ks2000 <= 0.05 && ks2000 < ks250 && report.ratio <= 3.0,
        format!(
            "KS by n [{}]; KS(2000) {ks2000:.4} <= 0.05 and < KS(250) {ks250:.4}; KS*sqrt(n) max/min {:.3} <= 3",
            ks.join(", "),
            report.ratio
        ),
    )
}

fn stabilization_tail() -> Outcome {
    let body = ConvexBodyModel::unit_ball(4);
    match radius_tail_experiment(&body, 1000, None, M, SEED_TAIL) {
        Ok(t) => outcome(
            t.fit.slope < 0.0 && t.fit.r_squared >= 0.9,
            format!("slope {:.5} < 0, r^2 {:.4} >= 0.9 over {} points", t.fit.slope, t.fit.r_squared, t.fit.points),
        ),
        Err(e) => outcome(false, format!("experiment failed: {e}")),
    }
}

fn poisson_model() -> Outcome {
    let cfg = config(
        body_spec(BodyKind::Ball, None),
        4,
        3,
        Model::Poisson { t_grid: GRID.iter().map(|&t| t as f64).collect() },
        M,
        SEED_POISSON,
    );
    let table = match run_poisson(&cfg) {
        Ok(t) => t,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let stats = match summarize(&table, 3) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("summary failed: {e}")),
    };
    let fit = match variance_scaling(&stats) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("fit failed: {e}")),
    };
    let ks = ks_to_normal(&self_normalize(&cell_values(&table, 3, 3))).unwrap_or(1.0);
    let degenerate: usize = stats.iter().map(|s| s.degenerate_count).sum();
    outcome(
        (0.8..=1.2).contains(&fit.slope) && ks <= 0.05,
        format!("slope {:.4} in [0.8, 1.2]; KS at t=2000 {ks:.4} <= 0.05; {degenerate} degenerate", fit.slope),
    )
}

/// `∫_0^θ sin^m φ dφ` by the reduction formula.
fn sin_power_integral(m: usize, theta: f64) -> f64 {
    match m {
        0 => theta,
        1 => 1.0 - theta.cos(),
        _ => {
            let m_f = m as f64;
            -theta.cos() * theta.sin().powi(m as i32 - 1) / m_f + (m_f - 1.0) / m_f * sin_power_integral(m - 2, theta)
        }
    }
}

fn cap_geometry() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // Ball caps against the closed-form reduction.
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let d = 2 + (i % 5) as usize;
        let mut rng = Stream::new(derive_seed(0x5eed_0011, 0, i));
        let radius = 0.5 + 0.25 * (i % 4) as f64;
        let center: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let u = rng.unit_vector(d);
        let y: Vec<f64> = center.iter().zip(&u).map(|(c, u)| c + radius * u).collect();
        let h = 2.0 * radius * (0.01 + 0.98 * rng.uniform());
        let body = ConvexBodyModel::ball(center, radius).unwrap();
        let area = body.cap_area(&body.cap(&y, h).unwrap(), &mut rng, 0).unwrap().value;
        let theta = (1.0 - h / radius).acos();
        let exact = unit_sphere_area(d - 2) * radius.powi(d as i32 - 1) * sin_power_integral(d - 2, theta);
        worst = worst.max((area - exact).abs() / exact);
    }
    pass &= worst <= 1e-9;
    notes.push(format!("ball caps max rel err {worst:.2e} <= 1e-9"));

    // Ellipsoid cap area against h^{(d-1)/2}.
    let e = ConvexBodyModel::ellipsoid(vec![1.5, 1.0, 1.0, 1.0]).unwrap();
    let mut rng = Stream::new(0x5eed_0012);
    let y = e.sample_surface(&mut rng).coords;
    let ratios: Vec<f64> = (2..=7)
        .map(|k| {
            let h = 0.5f64.powi(k);
            e.cap_area(&e.cap(&y, h).unwrap(), &mut rng, 1_000_000).unwrap().value / h.powf(1.5)
        })
        .collect();
    let spread = band(&ratios);
    pass &= spread <= 4.0;
    notes.push(format!("ellipsoid area/h^1.5 max/min {spread:.3} <= 4"));

    // Packings: disjointness audit and height scaling.
    let body = ConvexBodyModel::ellipsoid(vec![1.5, 1.0, 1.0]).unwrap();
    let d = 3;
    let mut scaled = Vec::new();
    let mut violations = 0;
    for (j, n) in [10usize, 100, 1000].into_iter().enumerate() {
        let mut rng = Stream::new(derive_seed(0x5eed_0013, j as u64, 0));
        let Ok(p) = pack_disjoint_caps(&body, n, &mut rng) else {
            return outcome(false, format!("packing failed at n = {n}"));
        };
        scaled.push(p.height * (n as f64).powf(2.0 / (d as f64 - 1.0)));
        let caps: Vec<(Vec<f64>, f64)> = p
            .centers
            .iter()
            .map(|c| {
                let cap = body.cap(c, p.height).unwrap();
                (cap.normal, cap.threshold)
            })
            .collect();
        let mut x = vec![0.0; d];
        for _ in 0..1_000_000 {
            body.sample_into(&mut rng, &mut x);
            let inside = caps.iter().filter(|(u, t)| dot(&x, u) >= *t).count();
            if inside > 1 {
                violations += 1;
            }
        }
    }
    let spread = band(&scaled);
    pass &= violations == 0 && spread <= 4.0;
    notes.push(format!("packing audit {violations} violations in 3x10^6 samples; h_n n^(2/(d-1)) max/min {spread:.3} <= 4"));
    outcome(pass, notes.join("; "))
}

fn band(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

const VARIANCE_CONFIG: &str = r#"{
    "body": {"kind": "ball"},
    "d": 4,
    "k_list": [3],
    "model": {"kind": "binomial", "n_grid": [250, 500, 1000, 2000]},
    "replications": 2000,
    "master_seed": "0x000000005eed0006",
    "outputs": {"summary": false}
}"#;

fn cli_run(dir: &Path, out: &str, threads: &str) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_randpoly"))
        .args(["experiment", "--config", "variance.json", "--out", out, "--threads", threads])
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn load_cli_table(dir: &Path) -> ReplicationTable {
    let cells = GRID
        .iter()
        .map(|&n| {
            let file = std::fs::File::open(dir.join(format!("binomial_n{n}.csv"))).expect("cell CSV");
            let (_, records) = read_cell_csv(file).expect("valid CSV");
            CellTable {
                param: n as f64,
                records,
                audited: 0,
            }
        })
        .collect();
    ReplicationTable {
        d: 4,
        body: ConvexBodyModel::unit_ball(4),
        model: ModelKind::Binomial,
        master_seed: SEED_VARIANCE,
        cells,
    }
}

fn thread_determinism(dir: &Path) -> Outcome {
    if let Err(e) = cli_run(dir, "threads8", "8") {
        return outcome(false, format!("--threads 8 run failed: {e}"));
    }
    let mut differing = Vec::new();
    for n in GRID {
        let name = format!("binomial_n{n}.csv");
        let a = std::fs::read(dir.join("threads1").join(&name)).unwrap_or_default();
        let b = std::fs::read(dir.join("threads8").join(&name)).unwrap_or_default();
        if a.is_empty() || a != b {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty(),
        format!("4 replication CSVs, differing: {:?}", differing),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // `cargo test` passes harness flags such as `--list`; only run on a plain
    // invocation or one naming this target.
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("{} criterion {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    let (c1, s1) = determinism_3d();
    report(1, "d=3 determinism", c1);
    let (c2, s2) = oracle_equivalence();
    report(2, "incremental vs brute-force hull", c2);
    report(3, "Euler and Dehn-Sommerville", structural_identities(s1 && s2));
    report(4, "type classifier", classifier());
    report(5, "score identity", score_identity());

    let dir = tempfile::tempdir().expect("temp dir");
    std::fs::write(dir.path().join("variance.json"), VARIANCE_CONFIG).expect("write config");
    let sphere = match cli_run(dir.path(), "threads1", "1") {
        Ok(()) => Some(load_cli_table(&dir.path().join("threads1"))),
        Err(e) => {
            println!("variance grid run failed: {e}");
            None
        }
    };
    let ellipsoid = run_binomial(&config(
        body_spec(BodyKind::Ellipsoid, Some(vec![1.5, 1.0, 1.0, 1.0])),
        4,
        3,
        Model::Binomial { n_grid: vec![2000] },
        M,
        SEED_ELLIPSOID,
    ));
    match &sphere {
        Some(s) => {
            report(6, "variance order n", variance_order(s));
            match &ellipsoid {
                Ok(e) => report(7, "mean order and body independence", mean_order(s, e)),
                Err(e) => report(7, "mean order and body independence", outcome(false, format!("ellipsoid run: {e}"))),
            }
            report(8, "central limit behaviour", clt(s));
        }
        None => {
            for (id, name) in [(6, "variance order n"), (7, "mean order and body independence"), (8, "central limit behaviour")] {
                report(id, name, outcome(false, "grid run unavailable".into()));
            }
        }
    }
    report(9, "stabilization tail", stabilization_tail());
    report(10, "Poisson model", poisson_model());
    report(11, "cap geometry", cap_geometry());
    report(12, "thread-count determinism", thread_determinism(dir.path()));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
