//! Run configuration: command-line flags, optionally seeded from a JSON file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::Validation;

pub const DEFAULT_NF: usize = 256;
pub const DEFAULT_TRIALS: u64 = 64;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    FindAdmissible,
    Levi,
    Indices,
    Attach,
    JetBound,
    Family,
}

/// Points in kernel coordinates at which discs are attached.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// The origin only.
    Zero,
    /// The origin and `+-delta` along every kernel axis.
    Axes(f64),
    /// JSON array of coordinate vectors.
    File(PathBuf),
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "zero" {
            return Ok(Self::Zero);
        }
        if let Some(d) = s.strip_prefix("axes:") {
            let delta: f64 = d.parse().map_err(|_| format!("bad axes step {d:?}"))?;
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(format!("axes step must be positive, got {delta}"));
            }
            return Ok(Self::Axes(delta));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(p)));
        }
        Err(format!("grid must be zero, axes:<delta> or file:<path>, got {s:?}"))
    }
}

impl GridSpec {
    pub fn points(&self, kernel_dim: usize) -> anyhow::Result<Vec<Vec<f64>>> {
        match self {
            Self::Zero => Ok(vec![vec![0.0; kernel_dim]]),
            Self::Axes(delta) => Ok(sdisc::rhsolver::axes_grid(kernel_dim, *delta)),
            Self::File(path) => {
                let text = read(path)?;
                let points: Vec<Vec<f64>> = serde_json::from_str(&text)
                    .map_err(|e| Validation(format!("{}: {e}", path.display())))?;
                if let Some(bad) = points.iter().position(|p| p.len() != kernel_dim) {
                    bail!(Validation(format!(
                        "grid point {bad} has {} coordinates, the family has {kernel_dim}",
                        points[bad].len()
                    )));
                }
                Ok(points)
            }
        }
    }
}

/// JSON form of a run; every field mirrors a command-line option.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<PathBuf>,
    pub theta: Option<PathBuf>,
    pub nf: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|e| Validation(format!("{}: {e}", path.display())).into())
    }
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub command: Command,
    pub model: PathBuf,
    pub theta: Option<PathBuf>,
    pub nf: usize,
    pub trials: u64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
}

impl Settings {
    /// Flags take precedence over the config file.
    pub fn resolve(flags: RunConfig, file: RunConfig) -> anyhow::Result<Self> {
        let command = flags
            .command
            .or(file.command)
            .ok_or_else(|| Validation("no command given".into()))?;
        let model = flags
            .model
            .or(file.model)
            .ok_or_else(|| Validation("no model file given".into()))?;
        let grid = match flags.grid.or(file.grid) {
            Some(g) => g.parse().map_err(Validation)?,
            None => GridSpec::Zero,
        };
        let nf = flags.nf.or(file.nf).unwrap_or(DEFAULT_NF);
        if nf < 8 {
            bail!(Validation(format!("--nf must be at least 8, got {nf}")));
        }
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0) || !t.is_finite() {
                bail!(Validation(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(Self {
            command,
            model,
            theta: flags.theta.or(file.theta),
            nf,
            trials: flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tol,
            grid,
            out: flags.out.or(file.out),
        })
    }
}

pub fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Validation(format!("{e:#}")).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs_parse() {
        assert_eq!("zero".parse::<GridSpec>().unwrap(), GridSpec::Zero);
        assert_eq!("axes:0.01".parse::<GridSpec>().unwrap(), GridSpec::Axes(0.01));
        assert!("axes:-1".parse::<GridSpec>().is_err());
        assert!("ring:3".parse::<GridSpec>().is_err());
        assert_eq!(GridSpec::Axes(0.5).points(2).unwrap().len(), 5);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"command":"analyze","nff":3}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn flags_override_the_file() {
        let file: RunConfig = serde_json::from_str(r#"{"command":"jet-bound","model":"a.json","nf":32}"#).unwrap();
        let flags = RunConfig {
            nf: Some(64),
            ..Default::default()
        };
        let s = Settings::resolve(flags, file).unwrap();
        assert_eq!((s.command, s.nf, s.trials), (Command::JetBound, 64, DEFAULT_TRIALS));
    }
}
