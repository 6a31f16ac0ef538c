use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cantorwave::geometry::{validate_ifs, Boundary, IfsSpec, ValidatedIfs};
use cantorwave::spde::{Drift, DriftSpec, NoisePlan};
use cantorwave::Error;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const OUT_ENV: &str = "CANTORWAVE_OUT";

/// Parsed TOML run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ifs: Option<IfsSection>,
    #[serde(default)]
    pub numerics: Numerics,
    pub drift: Option<Drift<f64>>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub task: TaskSection,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSection {
    pub ratios: Vec<f64>,
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_boundary() -> Boundary {
    Boundary::Dirichlet
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub level: usize,
    pub modes: Option<usize>,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub paths: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            level: 7,
            modes: None,
            dt: 1e-3,
            horizon: 1.0,
            seed: 0,
            paths: 1000,
        }
    }
}

/// Initial position or velocity: a constant function or a list of modal coefficients.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InitialField {
    Constant(f64),
    Coefficients(Vec<f64>),
}

impl Default for InitialField {
    fn default() -> Self {
        InitialField::Constant(0.0)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub u0: InitialField,
    pub u1: InitialField,
}

/// Subcommand-specific settings. Keys a command does not use are ignored by it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub t: Option<f64>,
    pub lambda: Option<f64>,
    pub grid: Option<usize>,
    pub sites: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub sample_every: Option<f64>,
    pub orders: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub pair_levels: Option<[usize; 2]>,
    pub pairs_per_level: Option<usize>,
    pub lag_powers: Option<[u32; 2]>,
    pub window: Option<[f64; 2]>,
    pub envelope_factor: Option<f64>,
    pub fit_modes: Option<[usize; 2]>,
    pub picard: Option<bool>,
    pub picard_tol: Option<f64>,
    pub picard_max_iter: Option<usize>,
    pub points: Option<usize>,
}

/// A config loaded from disk with its digest and resolved output directory.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub digest: String,
    pub out_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Loaded {
    pub fn from_path(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let (text, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (text, base)
            }
            None => (String::new(), PathBuf::from(".")),
        };
        Self::from_str(&text, &base, overrides)
    }

    pub fn from_str(text: &str, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let seed = overrides.seed.unwrap_or(config.numerics.seed);
        let out_dir = match (&overrides.out, &config.output, std::env::var_os(OUT_ENV)) {
            (Some(flag), _, _) => flag.clone(),
            (None, Some(rel), _) => base.join(rel),
            (None, None, Some(env)) => PathBuf::from(env),
            (None, None, None) => base.to_path_buf(),
        };
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hasher.update(format!("\nseed={seed}").as_bytes());
        let digest = hasher.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Ok(Self {
            config,
            digest,
            out_dir,
            seed,
        })
    }

    pub fn ifs(&self) -> Result<ValidatedIfs<f64>, CliError> {
        let s = self
            .config
            .ifs
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [ifs] section".into()))?;
        for (key, v) in [("ratios", &s.ratios), ("offsets", &s.offsets), ("weights", &s.weights)] {
            if v.len() != s.ratios.len() {
                return Err(CliError::Config(format!(
                    "ifs.{key}: expected {} entries to match ifs.ratios, found {}",
                    s.ratios.len(),
                    v.len()
                )));
            }
        }
        validate_ifs(IfsSpec::new(&s.ratios, &s.offsets, &s.weights, s.boundary)).map_err(|e| {
            let key = match e {
                Error::Weight(_) => "ifs.weights",
                Error::Overlap { .. } | Error::Coverage(_) => "ifs.offsets",
                Error::Contraction { .. } => "ifs.ratios",
                _ => "ifs",
            };
            CliError::Config(format!("{key}: {e}"))
        })
    }

    pub fn boundary(&self) -> Boundary {
        self.config.ifs.as_ref().map_or(Boundary::Dirichlet, |s| s.boundary)
    }

    pub fn plan(&self) -> Result<NoisePlan<f64>, CliError> {
        let n = &self.config.numerics;
        NoisePlan::new(self.seed, n.paths, n.dt, n.horizon)
            .map_err(|e| CliError::Config(format!("numerics.dt/horizon/paths: {e}")))
    }

    /// Defaults to additive noise `f = 1`.
    pub fn drift(&self) -> Result<DriftSpec<f64>, CliError> {
        let d = self.config.drift.clone().unwrap_or(Drift::Constant { value: 1.0 });
        DriftSpec::new(d).map_err(|e| CliError::Config(format!("drift: {e}")))
    }

    pub fn level(&self) -> Result<usize, CliError> {
        match self.config.numerics.level {
            0 => Err(CliError::Config("numerics.level: must be at least 1".into())),
            l => Ok(l),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANTOR: &str = r#"
[ifs]
ratios = [0.3333333333333333, 0.3333333333333333]
offsets = [0.0, 0.6666666666666666]
weights = [0.5, 0.5]
boundary = "neumann"
"#;

    fn load(text: &str) -> Result<Loaded, CliError> {
        Loaded::from_str(text, Path::new("/cfg"), &Overrides::default())
    }

    #[test]
    fn parses_defaults() {
        let l = load(CANTOR).unwrap();
        assert_eq!(l.config.numerics.level, 7);
        assert_eq!(l.ifs().unwrap().boundary, Boundary::Neumann);
        assert_eq!(l.digest.len(), 64);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = load(&format!("{CANTOR}\n[numerics]\nlevle = 3\n")).unwrap_err();
        assert!(e.to_string().contains("levle"), "{e}");
        assert!(load("[task]\nfoo = 1\n").is_err());
        assert!(load("[drift]\nkind = \"linear\"\nlambda = 1.0\nbound = 2.0\n").is_err());
    }

    #[test]
    fn weight_error_names_key() {
        let bad = CANTOR.replace("[0.5, 0.5]", "[0.5, 0.7]");
        let e = load(&bad).unwrap().ifs().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("ifs.weights"), "{e}");
        let short = CANTOR.replace("[0.5, 0.5]", "[1.0]");
        assert!(load(&short).unwrap().ifs().unwrap_err().to_string().contains("ifs.weights"));
    }

    #[test]
    fn output_is_relative_to_config() {
        let l = load(&format!("output = \"runs\"\n{CANTOR}")).unwrap();
        assert_eq!(l.out_dir, Path::new("/cfg/runs"));
        let o = Overrides {
            seed: Some(9),
            out: Some("/elsewhere".into()),
        };
        let l2 = Loaded::from_str(CANTOR, Path::new("/cfg"), &o).unwrap();
        assert_eq!(l2.out_dir, Path::new("/elsewhere"));
        assert_eq!(l2.seed, 9);
        assert_ne!(l2.digest, load(CANTOR).unwrap().digest);
    }

    #[test]
    fn initial_fields() {
        let l = load("[initial]\nu0 = 1.0\nu1 = [0.0, 2.0]\n").unwrap();
        assert_eq!(l.config.initial.u0, InitialField::Constant(1.0));
        assert_eq!(l.config.initial.u1, InitialField::Coefficients(vec![0.0, 2.0]));
    }
}
