//! TOML experiment configuration.
//!
//! ```toml
//! [geometry]
//! w = "l2"                 # short form, sized by run.dims
//! x = { type = "lp", p = 2, dim = 3 }   # or a full ball table
//!
//! [regularizer]
//! type = "euclidean"       # psi_r{r} | scaled_psi{r?} | entropy
//!                          # | group_for_linf{q,rows,cols} | vertex_hull_squared
//!                          # | schatten_psi_r{r,rows,cols}
//!
//! [adversary]
//! kind = "suite"           # sign_greedy | random_vertex | suite
//! seeds = 8
//! loss = { type = "linear" }
//!
//! [run]
//! kind = "regret"          # regret | sandwich
//! n_list = [256]
//! dims = [3]
//! seed = 0
//! b = 1.0
//!
//! [output]
//! path = "out.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::costs::LossForm;
use crate::error::{Error, Result};
use crate::geometry::{BallKind, BallSpec, GeometryPair};
use crate::regularizers::catalog::{pick_r, scaled_psi_for_lp_pair};
use crate::regularizers::Regularizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub regularizer: RegularizerConfig,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BallConfig {
    Short(String),
    Full(BallSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub w: BallConfig,
    pub x: BallConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularizerConfig {
    Euclidean,
    PsiR { r: f64 },
    /// Both balls must be ℓp; `r` defaults to the bound-minimizing choice.
    ScaledPsi {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
    },
    Entropy,
    GroupForLinf { q: f64, rows: usize, cols: usize },
    VertexHullSquared,
    SchattenPsiR { r: f64, rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryChoice {
    SignGreedy,
    RandomVertex,
    #[default]
    Suite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    #[serde(default)]
    pub kind: AdversaryChoice,
    /// Number of random-vertex streams.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub loss: LossForm,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig { kind: AdversaryChoice::Suite, seeds: default_seeds(), loss: LossForm::Linear }
    }
}

fn default_seeds() -> usize {
    8
}

fn default_b() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    #[default]
    Regret,
    Sandwich,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kind: RunKind,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Gradient budget in the step size.
    #[serde(default = "default_b")]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let run = &self.run;
        if run.n_list.is_empty() {
            return Err(Error::Config("run.n_list: must not be empty".into()));
        }
        if run.n_list.contains(&0) {
            return Err(Error::Config("run.n_list: horizons must be ≥ 1".into()));
        }
        if !(run.b > 0.0) || !run.b.is_finite() {
            return Err(Error::Config(format!("run.b: must be positive, got {}", run.b)));
        }
        if run.dims.contains(&0) {
            return Err(Error::Config("run.dims: dimensions must be ≥ 1".into()));
        }
        if self.adversary.kind != AdversaryChoice::SignGreedy && self.adversary.seeds == 0 {
            return Err(Error::Config("adversary.seeds: must be ≥ 1".into()));
        }
        for d in self.dims()? {
            self.pair(d)?;
        }
        Ok(())
    }

    fn fixed_dim(&self) -> Option<usize> {
        [&self.geometry.w, &self.geometry.x].into_iter().find_map(|b| match b {
            BallConfig::Full(s) => Some(s.dim()),
            BallConfig::Short(_) => None,
        })
    }

    /// Dimensions to sweep: `run.dims`, or the dimension of a full ball table.
    pub fn dims(&self) -> Result<Vec<usize>> {
        match (self.fixed_dim(), self.run.dims.is_empty()) {
            (Some(d), true) => Ok(vec![d]),
            (Some(d), false) if self.run.dims.iter().all(|&x| x == d) => Ok(self.run.dims.clone()),
            (Some(d), false) => Err(Error::Config(format!("run.dims: conflicts with fixed ball dimension {d}"))),
            (None, true) => Err(Error::Config("run.dims: required when balls use the short form".into())),
            (None, false) => Ok(self.run.dims.clone()),
        }
    }

    pub fn pair(&self, d: usize) -> Result<GeometryPair> {
        let ball = |b: &BallConfig, field: &str| -> Result<BallSpec> {
            let spec = match b {
                BallConfig::Short(s) => BallSpec::parse_short(s, d),
                BallConfig::Full(s) => Ok(s.clone()),
            };
            spec.and_then(|s| s.validate().map(|_| s)).map_err(|e| Error::Config(format!("geometry.{field}: {e}")))
        };
        GeometryPair::new(ball(&self.geometry.w, "w")?, ball(&self.geometry.x, "x")?)
            .map_err(|e| Error::Config(format!("geometry: {e}")))
    }

    /// The configured regularizer, bound to `W`.
    pub fn regularizer(&self, pair: &GeometryPair) -> Result<Regularizer> {
        let d = pair.dim();
        let field = |e: Error| Error::Config(format!("regularizer: {e}"));
        let reg = match &self.regularizer {
            RegularizerConfig::Euclidean => Regularizer::euclidean(d),
            RegularizerConfig::PsiR { r } => Regularizer::psi_r(*r, d).map_err(field)?,
            RegularizerConfig::ScaledPsi { r } => {
                let (p1, p2) = match (&pair.w_ball.kind, &pair.x_ball.kind) {
                    (BallKind::Lp { p: a, .. }, BallKind::Lp { p: b, .. }) => (a.as_f64(), b.as_f64()),
                    _ => return Err(Error::Config("regularizer: scaled_psi needs ℓp balls".into())),
                };
                let n = *self.run.n_list.iter().max().expect("validated");
                let r = match r {
                    Some(r) => *r,
                    None => pick_r(p1, p2, d, n).map_err(field)?,
                };
                scaled_psi_for_lp_pair(p1, p2, d, r).map_err(field)?
            }
            RegularizerConfig::Entropy => Regularizer::entropy(d),
            RegularizerConfig::GroupForLinf { q, rows, cols } => {
                if rows * cols != d {
                    return Err(Error::Config(format!("regularizer: rows·cols = {} but d = {d}", rows * cols)));
                }
                Regularizer::group_for_linf(*q, *rows, *cols).map_err(field)?
            }
            RegularizerConfig::VertexHullSquared => match &pair.w_ball.kind {
                BallKind::VertexHull { vertices } => {
                    Regularizer::vertex_hull_squared(vertices.clone(), pair.x_ball.clone()).map_err(field)?
                }
                _ => return Err(Error::Config("regularizer: vertex_hull_squared needs a vertex_hull W".into())),
            },
            RegularizerConfig::SchattenPsiR { r, rows, cols } => {
                Regularizer::schatten_psi_r(*r, *rows, *cols).map_err(field)?
            }
        };
        reg.bind(&pair.w_ball)
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let h = Sha256::digest(text.as_bytes());
        h.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[geometry]
w = "l2"
x = "l2"
[regularizer]
type = "euclidean"
[adversary]
kind = "sign_greedy"
[run]
n_list = [256]
dims = [2]
"#;

    #[test]
    fn parses_minimal() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.dims().unwrap(), vec![2]);
        assert_eq!(cfg.digest().len(), 16);
        let pair = cfg.pair(2).unwrap();
        assert!((cfg.regularizer(&pair).unwrap().sup().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let empty = MINIMAL.replace("[256]", "[]");
        assert!(matches!(ExperimentConfig::from_toml(&empty), Err(Error::Config(m)) if m.contains("n_list")));
        let unknown = MINIMAL.replace("dims = [2]", "dims = [2]\nfoo = 1");
        assert!(matches!(ExperimentConfig::from_toml(&unknown), Err(Error::Config(_))));
        let no_dims = MINIMAL.replace("dims = [2]", "");
        assert!(matches!(ExperimentConfig::from_toml(&no_dims), Err(Error::Config(m)) if m.contains("dims")));
    }

    #[test]
    fn full_ball_tables() {
        let text = MINIMAL.replace("w = \"l2\"", "w = { type = \"simplex\", dim = 2 }").replace("dims = [2]", "");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.dims().unwrap(), vec![2]);
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let b = ExperimentConfig::from_toml(&MINIMAL.replace("[256]", "[512]")).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), ExperimentConfig::from_toml(MINIMAL).unwrap().digest());
    }
}
