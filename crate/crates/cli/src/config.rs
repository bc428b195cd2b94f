use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use moyal_core::{DampingSchedule64, PhaseGrid64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Settings shared by every subcommand. A config file may set any subset;
/// missing keys keep their defaults and unknown keys are an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub damping: Vec<f64>,
    pub extrapolation_order: usize,
    pub grid: PhaseGrid64,
    pub seed: u64,
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub provenance: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            damping: vec![0.4, 0.2, 0.1, 0.05],
            extrapolation_order: 2,
            grid: PhaseGrid64::default(),
            seed: 20240101,
            strict: false,
            out: None,
            provenance: None,
        }
    }
}

impl RunConfig {
    pub fn schedule(&self) -> CliResult<DampingSchedule64> {
        Ok(DampingSchedule64::new(self.damping.clone(), self.extrapolation_order)?)
    }

    /// Provenance goes next to the main output, or into the working
    /// directory when results only go to stdout.
    pub fn provenance_path(&self) -> PathBuf {
        match (&self.provenance, &self.out) {
            (Some(p), _) => p.clone(),
            (None, Some(out)) => out.with_extension("provenance.json"),
            (None, None) => PathBuf::from("moyal-provenance.json"),
        }
    }

    fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags accepted by every subcommand. Each one overrides the config file.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct CommonArgs {
    /// JSON file with any of the run settings
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Fock truncation dimension
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Damping strengths, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub damping: Option<Vec<f64>>,
    /// Extrapolation order for damped traces
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Square grid half-width
    #[arg(long, global = true)]
    pub grid_extent: Option<f64>,
    /// Samples per grid axis
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exit with status 2 on any numerical warning
    #[arg(long, global = true)]
    pub strict: bool,
    /// Main output file; stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write the provenance record
    #[arg(long, global = true)]
    pub provenance: Option<PathBuf>,
}

impl CommonArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(d) = self.dim {
            cfg.dim = d;
        }
        if let Some(d) = &self.damping {
            cfg.damping = d.clone();
        }
        if let Some(o) = self.order {
            cfg.extrapolation_order = o;
        }
        if self.grid_extent.is_some() || self.grid_points.is_some() {
            let g = cfg.grid;
            let extent = self.grid_extent;
            let n = self.grid_points;
            cfg.grid = PhaseGrid64::new(
                extent.map_or(g.q_min, |e| -e),
                extent.unwrap_or(g.q_max),
                extent.map_or(g.p_min, |e| -e),
                extent.unwrap_or(g.p_max),
                n.unwrap_or(g.nq),
                n.unwrap_or(g.np),
            )?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.strict |= self.strict;
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.provenance.is_some() {
            cfg.provenance = self.provenance.clone();
        }
        cfg.grid.validate()?;
        cfg.schedule()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.dim, 128);
        assert_eq!(c.grid, PhaseGrid64::square(6.0, 121).unwrap());
        assert_eq!(c.seed, 20240101);
        assert!(c.schedule().is_ok());
    }

    #[test]
    fn partial_file_keeps_defaults_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"dim": 32, "seed": 7}"#).unwrap();
        let args = CommonArgs {
            config: Some(p),
            dim: Some(48),
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.dim, 48);
        assert_eq!(c.seed, 7);
        assert_eq!(c.damping, vec![0.4, 0.2, 0.1, 0.05]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"dimension": 32}"#).unwrap();
        let args = CommonArgs {
            config: Some(p),
            ..Default::default()
        };
        assert!(matches!(args.resolve(), Err(CliError::Config(_))));
    }
}
