use randpoly::experiments::{BodyKind, BodySpec, ExperimentConfig, Model, Outputs, Seed};

use crate::io::{CliError, CliResult};
use crate::Common;

pub const DEFAULT_DIM: usize = 3;
pub const DEFAULT_N: usize = 100;
pub const DEFAULT_REPS: usize = 100;

/// Config file (if any) with flag overrides applied. Without a file the
/// defaults are the unit ball in d = 3, `n = 100`, 100 replications, seed 0
/// and `k = d - 1`.
pub fn resolve(c: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig {
            body: BodySpec::of_kind(BodyKind::Ball),
            d: DEFAULT_DIM,
            k_list: Vec::new(),
            model: Model::Binomial { n_grid: vec![DEFAULT_N] },
            replications: DEFAULT_REPS,
            master_seed: Seed(0),
            outputs: Outputs::default(),
            bands: Default::default(),
        },
    };
    if let Some(kind) = &c.body {
        let kind = BodyKind::parse(kind)?;
        if kind != cfg.body.kind {
            cfg.body = BodySpec::of_kind(kind);
        }
    }
    if let Some(d) = c.dim {
        cfg.d = d;
    }
    match (&c.n, &c.t) {
        (Some(_), Some(_)) => return Err(CliError::Config("--n and --t are mutually exclusive".into())),
        (Some(n), None) => cfg.model = Model::Binomial { n_grid: n.clone() },
        (None, Some(t)) => cfg.model = Model::Poisson { t_grid: t.clone() },
        (None, None) => {}
    }
    if let Some(m) = c.reps {
        cfg.replications = m;
    }
    if let Some(k) = &c.k {
        cfg.k_list = k.clone();
    }
    if cfg.k_list.is_empty() {
        cfg.k_list = vec![cfg.d.saturating_sub(1)];
    }
    if let Some(s) = &c.seed {
        cfg.master_seed = Seed::parse(s)?;
    }
    if let Some(out) = &c.out {
        cfg.outputs.dir = out.clone();
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = resolve(&Common::default()).unwrap();
        assert_eq!(cfg.d, 3);
        assert_eq!(cfg.k_list, vec![2]);
        cfg.validate().unwrap();

        let c = Common {
            body: Some("ellipsoid".into()),
            dim: Some(4),
            t: Some(vec![50.0, 100.0]),
            reps: Some(7),
            seed: Some("0xff".into()),
            out: Some("elsewhere".into()),
            ..Default::default()
        };
        let cfg = resolve(&c).unwrap();
        assert_eq!(cfg.body.kind, BodyKind::Ellipsoid);
        assert_eq!(cfg.model, Model::Poisson { t_grid: vec![50.0, 100.0] });
        assert_eq!((cfg.d, cfg.replications, cfg.master_seed), (4, 7, Seed(255)));
        assert_eq!(cfg.k_list, vec![3]);
        assert_eq!(cfg.outputs.dir, "elsewhere");
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        let base = ExperimentConfig {
            body: BodySpec {
                kind: BodyKind::Ellipsoid,
                radius: None,
                center: None,
                semi_axes: Some(vec![2.0, 1.0, 1.0]),
            },
            d: 3,
            k_list: vec![1],
            model: Model::Binomial { n_grid: vec![20] },
            replications: 10,
            master_seed: Seed(9),
            outputs: Outputs::default(),
            bands: Default::default(),
        };
        std::fs::write(&p, base.to_json()).unwrap();
        let c = Common {
            config: Some(p.to_str().unwrap().into()),
            body: Some("ellipsoid".into()),
            n: Some(vec![30, 40]),
            ..Default::default()
        };
        let cfg = resolve(&c).unwrap();
        assert_eq!(cfg.body, base.body);
        assert_eq!(cfg.model, Model::Binomial { n_grid: vec![30, 40] });
        assert_eq!(cfg.k_list, vec![1]);
    }

    #[test]
    fn bad_flags() {
        let c = Common {
            n: Some(vec![10]),
            t: Some(vec![10.0]),
            ..Default::default()
        };
        assert!(matches!(resolve(&c), Err(CliError::Config(_))));
        let c = Common {
            body: Some("cube".into()),
            ..Default::default()
        };
        assert!(matches!(resolve(&c), Err(CliError::Config(_))));
        let c = Common {
            seed: Some("zz".into()),
            ..Default::default()
        };
        assert!(matches!(resolve(&c), Err(CliError::Config(_))));
    }
}
