use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::body::ConvexBodyModel;
use crate::error::{Error, Result};

/// A 64-bit seed written as a `0x`-prefixed hex string; decimal integers and
/// bare hex strings are accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let hex = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
        if hex.is_empty() || hex.len() > 16 {
            return Err(Error::Config(format!("seed {s:?} is not a 64-bit hex value")));
        }
        u64::from_str_radix(hex, 16)
            .map(Seed)
            .map_err(|_| Error::Config(format!("seed {s:?} is not a 64-bit hex value")))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:016x}", self.0)
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct SeedVisitor;
        impl Visitor<'_> for SeedVisitor {
            type Value = Seed;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a hex string or a nonnegative integer")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Seed, E> {
                Ok(Seed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Seed, E> {
                u64::try_from(v).map(Seed).map_err(|_| E::custom("negative seed"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Seed, E> {
                Seed::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(SeedVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Ball,
    Ellipsoid,
}

impl BodyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(BodyKind::Ball),
            "ellipsoid" => Ok(BodyKind::Ellipsoid),
            _ => Err(Error::Config(format!("unknown body kind {s:?} (expected ball or ellipsoid)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BodyKind::Ball => "ball",
            BodyKind::Ellipsoid => "ellipsoid",
        }
    }
}

/// Body description. Balls default to radius 1 at the origin; ellipsoids
/// default to semi-axes `(1.5, 1, …, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub kind: BodyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<Vec<f64>>,
}

impl BodySpec {
    pub fn of_kind(kind: BodyKind) -> Self {
        BodySpec {
            kind,
            radius: None,
            center: None,
            semi_axes: None,
        }
    }

    pub fn build(&self, d: usize) -> Result<ConvexBodyModel> {
        let body = match self.kind {
            BodyKind::Ball => {
                if self.semi_axes.is_some() {
                    return Err(Error::Config("a ball takes radius and center, not semi_axes".into()));
                }
                ConvexBodyModel::Ball {
                    center: self.center.clone().unwrap_or_else(|| vec![0.0; d]),
                    radius: self.radius.unwrap_or(1.0),
                }
            }
            BodyKind::Ellipsoid => {
                if self.radius.is_some() || self.center.is_some() {
                    return Err(Error::Config(
                        "an ellipsoid takes semi_axes and is centered at the origin".into(),
                    ));
                }
                let default = || {
                    let mut a = vec![1.0; d];
                    a[0] = 1.5;
                    a
                };
                ConvexBodyModel::Ellipsoid {
                    semi_axes: self.semi_axes.clone().unwrap_or_else(default),
                }
            }
        };
        if body.dim() != d {
            return Err(Error::Config(format!(
                "body has dimension {} but d = {d}",
                body.dim()
            )));
        }
        body.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Model {
    Binomial { n_grid: Vec<usize> },
    Poisson { t_grid: Vec<f64> },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Binomial { .. } => "binomial",
            Model::Poisson { .. } => "poisson",
        }
    }

    /// Cell parameters (`n` or `t`) as reals.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Model::Binomial { n_grid } => n_grid.iter().map(|&n| n as f64).collect(),
            Model::Poisson { t_grid } => t_grid.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// One replication CSV per cell.
    #[serde(default = "yes")]
    pub csv: bool,
    /// `summary.json` with per-cell statistics.
    #[serde(default = "yes")]
    pub summary: bool,
}

fn default_dir() -> String {
    "out".into()
}

fn yes() -> bool {
    true
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: default_dir(),
            csv: true,
            summary: true,
        }
    }
}

/// Calibration bands for scaling checks. These are test thresholds, not
/// constants of the underlying limit theorems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bands {
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub ks_max: f64,
    pub berry_esseen_ratio: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            slope_lo: 0.8,
            slope_hi: 1.2,
            ks_max: 0.05,
            berry_esseen_ratio: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub body: BodySpec,
    pub d: usize,
    pub k_list: Vec<usize>,
    pub model: Model,
    pub replications: usize,
    pub master_seed: Seed,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub bands: Bands,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d < 2 {
            return Err(Error::Config(format!("d must be at least 2, got {d}")));
        }
        self.body.build(d)?;
        if self.k_list.is_empty() {
            return Err(Error::Config("k_list is empty".into()));
        }
        if let Some(k) = self.k_list.iter().find(|&&k| k >= d) {
            return Err(Error::Config(format!("face dimension {k} out of range 0..{d}")));
        }
        if self.replications < 2 {
            return Err(Error::Config(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        match &self.model {
            Model::Binomial { n_grid } => {
                if n_grid.is_empty() {
                    return Err(Error::Config("n_grid is empty".into()));
                }
                if let Some(n) = n_grid.iter().find(|&&n| n < d + 2) {
                    return Err(Error::Config(format!("n = {n} is below d + 2 = {}", d + 2)));
                }
            }
            Model::Poisson { t_grid } => {
                if t_grid.is_empty() {
                    return Err(Error::Config("t_grid is empty".into()));
                }
                if let Some(t) = t_grid.iter().find(|&&t| !(t.is_finite() && t > 1.0)) {
                    return Err(Error::Config(format!("t = {t} must be finite and above 1")));
                }
            }
        }
        Ok(())
    }

    pub fn body_model(&self) -> Result<ConvexBodyModel> {
        self.body.build(self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "body": {"kind": "ellipsoid", "semi_axes": [1.5, 1, 1, 1]},
        "d": 4,
        "k_list": [1, 3],
        "model": {"kind": "binomial", "n_grid": [250, 500]},
        "replications": 100,
        "master_seed": "0xdeadbeef"
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.master_seed, Seed(0xdead_beef));
        assert_eq!(cfg.outputs, Outputs::default());
        assert_eq!(cfg.bands, Bands::default());
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.to_json().contains("\"0x00000000deadbeef\""));
    }

    #[test]
    fn seed_forms() {
        assert_eq!(Seed::parse("ff").unwrap(), Seed(255));
        assert_eq!(Seed::parse("0xFFFFFFFFFFFFFFFF").unwrap(), Seed(u64::MAX));
        assert!(Seed::parse("0x1ffffffffffffffff").is_err());
        assert!(Seed::parse("xyz").is_err());
        let s: Seed = serde_json::from_str("42").unwrap();
        assert_eq!(s, Seed(42));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        cfg.k_list = vec![4];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        cfg.model = Model::Binomial { n_grid: vec![5] };
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        cfg.model = Model::Poisson { t_grid: vec![1.0] };
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        cfg.body.semi_axes = Some(vec![1.0, 1.0]);
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json(&SAMPLE.replace("\"d\"", "\"dim\"")).is_err());
    }

    #[test]
    fn body_defaults() {
        let b = BodySpec::of_kind(BodyKind::Ellipsoid).build(3).unwrap();
        assert_eq!(b, ConvexBodyModel::ellipsoid(vec![1.5, 1.0, 1.0]).unwrap());
        let b = BodySpec::of_kind(BodyKind::Ball).build(3).unwrap();
        assert_eq!(b, ConvexBodyModel::unit_ball(3));
    }
}
