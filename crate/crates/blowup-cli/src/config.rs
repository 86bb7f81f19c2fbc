use std::path::PathBuf;

use blowup_core::domain::ModelDomain;
use blowup_core::params::ProblemParams;
use blowup_core::quad::QuadratureSpec;
use blowup_core::{Error, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One resolved run: defaults, overlaid by a JSON config file, overlaid by
/// command-line flags, validated before anything numeric happens.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    #[serde(rename = "D")]
    pub d: f64,
    /// Principal curvatures of the boundary graph; empty means k_i = 1 for
    /// all n-1 directions.
    pub curvatures: Vec<f64>,
    pub rho: f64,
    /// Concentration scales; empty means the 8-point geometric grid in
    /// [1e-3, 1e-2].
    pub deltas: Vec<f64>,
    pub mu: f64,
    pub quadrature: QuadratureSpec,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 6,
            d: 1.5,
            curvatures: Vec::new(),
            rho: 1.0,
            deltas: Vec::new(),
            mu: 1.0,
            quadrature: QuadratureSpec::default(),
            output_path: None,
            format: OutputFormat::Json,
        }
    }
}

pub fn default_deltas() -> Vec<f64> {
    (0..8).map(|i| 1e-3 * 10f64.powf(i as f64 / 7.0)).collect()
}

/// Flags shared by every subcommand. Precedence: flag > config file > default.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonOpts {
    /// JSON config file; any flag below overrides its entry.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<u32>,
    /// Offset ratio D > 1.
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Comma separated boundary curvatures (length n-1).
    #[arg(long, value_delimiter = ',')]
    pub curvatures: Option<Vec<f64>>,
    /// Patch radius of the model domain.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma separated concentration scales.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Linear-term weight in the energy.
    #[arg(long)]
    pub mu: Option<f64>,
    /// RNG seed for sampling and Monte Carlo.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Monte Carlo sample budget.
    #[arg(long)]
    pub mc_samples: Option<u64>,
    /// Write the CSV table (or the JSON report, per --format) to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Format of the --out file.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn resolve(opts: &CommonOpts) -> Result<Self> {
        let mut cfg = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Domain(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Error::Domain(format!("invalid config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(n) = opts.n {
            cfg.n = n;
        }
        if let Some(d) = opts.d {
            cfg.d = d;
        }
        if let Some(c) = &opts.curvatures {
            cfg.curvatures = c.clone();
        }
        if let Some(r) = opts.rho {
            cfg.rho = r;
        }
        if let Some(ds) = &opts.deltas {
            cfg.deltas = ds.clone();
        }
        if let Some(m) = opts.mu {
            cfg.mu = m;
        }
        if let Some(s) = opts.seed {
            cfg.quadrature.rng_seed = s;
        }
        if let Some(t) = opts.rel_tol {
            cfg.quadrature.rel_tol = t;
        }
        if let Some(m) = opts.mc_samples {
            cfg.quadrature.mc_samples = m;
        }
        if let Some(o) = &opts.out {
            cfg.output_path = Some(o.clone());
        }
        if let Some(f) = opts.format {
            cfg.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&mut self) -> Result<()> {
        ProblemParams::new(self.n, self.d)?;
        if self.curvatures.is_empty() {
            self.curvatures = vec![1.0; self.n as usize - 1];
        }
        if self.deltas.is_empty() {
            self.deltas = default_deltas();
        }
        if self.curvatures.len() != self.n as usize - 1 {
            return Err(Error::Domain(format!(
                "expected {} curvatures for n = {}, got {}",
                self.n - 1,
                self.n,
                self.curvatures.len()
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Domain(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if let Some(bad) = self.deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::Domain(format!("scales must be positive, got {bad}")));
        }
        let q = &self.quadrature;
        if !(q.rel_tol > 0.0) || !(q.abs_tol >= 0.0) || q.max_subdivisions == 0 || q.mc_samples == 0
        {
            return Err(Error::Domain(
                "quadrature spec needs rel_tol > 0, abs_tol >= 0 and nonzero budgets".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.d)
    }

    pub fn domain(&self) -> Result<ModelDomain> {
        ModelDomain::new(self.curvatures.clone(), self.rho)
    }
}
