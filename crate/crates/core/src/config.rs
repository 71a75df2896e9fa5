//! JSON run configuration shared by every subcommand.
//!
//! All keys are optional; absent keys take the defaults below. Unknown keys
//! are rejected so typos do not silently fall back to a default.
//!
//! | key | default |
//! |-----|---------|
//! | `kernel` | `{"kind": "bcm", "R": 1, "h": "one"}` |
//! | `rho0` | `{"kind": "gaussian", "mean": 0, "sd": 1}` |
//! | `sigma` | 0.5 |
//! | `T` | 1 |
//! | `dt` | 0.01 |
//! | `grid` | `{"L": 8, "M": 2048}` |
//! | `save_every` | 10 (PDE steps between snapshots for `solve-pde`) |
//! | `eps` | 0.1 (fixed cutoff for `solve-pde` and `verify-kernel`) |
//! | `N` | 256 |
//! | `N_list` | `[64, 128, 256, 512]` |
//! | `alpha`, `beta` | 0.25, 0.25 |
//! | `eps_scale` | 1 |
//! | `reps` | 200 |
//! | `lambda` | calibrated from the PDE |
//! | `pde_substeps` | derived from the CFL bound |
//! | `master_seed` | 0 |
//! | `pde` | `{"flux": "muscl", "convolution": "auto", "tol_boundary": 1e-6}` |
//! | `lln` | `{"h": {"kind": "uniform", "R": 1}, "rho0": Gaussian(0,1), "N_list": [64..4096], "reps": 2000, "alpha": 0.25, "delta": 0.1}` |
//! | `verify` | `{"samples": 100000, "safety": 1.05, "constant": null}` |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupling::CoupledConfig;
use crate::error::{Error, Result};
use crate::experiments::SweepConfig;
use crate::kernels::{KernelKind, KernelSpec, Profile};
use crate::pde::{Grid1D, InitialDensity, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub cells: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width: 8.0,
            cells: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlnConfig {
    pub h: KernelKind,
    pub rho0: InitialDensity,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl Default for LlnConfig {
    fn default() -> Self {
        LlnConfig {
            h: KernelKind::Uniform { radius: 1.0 },
            rho0: InitialDensity::default(),
            n_list: (6..=12).map(|k| 1 << k).collect(),
            reps: 2000,
            alpha: 0.25,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: usize,
    /// Multiplier on the sampled Lipschitz ratio when calibrating `C`.
    pub safety: f64,
    /// Fixed envelope constant; calibrated when absent.
    pub constant: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 100_000,
            safety: 1.05,
            constant: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelKind,
    pub rho0: InitialDensity,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    pub grid: GridConfig,
    pub save_every: usize,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub eps_scale: f64,
    pub reps: usize,
    pub lambda: Option<f64>,
    pub pde_substeps: Option<usize>,
    pub master_seed: u64,
    pub pde: SolveOptions,
    pub lln: LlnConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: KernelKind::Bcm {
                profile: Profile::One,
                radius: 1.0,
            },
            rho0: InitialDensity::default(),
            sigma: 0.5,
            t_end: 1.0,
            dt: 0.01,
            grid: GridConfig::default(),
            save_every: 10,
            eps: 0.1,
            n: 256,
            n_list: vec![64, 128, 256, 512],
            alpha: 0.25,
            beta: 0.25,
            eps_scale: 1.0,
            reps: 200,
            lambda: None,
            pde_substeps: None,
            master_seed: 0,
            pde: SolveOptions::default(),
            lln: LlnConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::config(
                if path == "." { "<root>".to_string() } else { path },
                format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        KernelSpec::new(self.kernel.clone()).map_err(|e| prefix("kernel", e))?;
        self.rho0.validate().map_err(|e| prefix("rho0", e))?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("sigma", "must be a non-negative number"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::config("T", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::config("dt", "must lie in (0, T]"));
        }
        self.grid().map_err(|e| prefix("grid", e))?;
        if self.save_every == 0 {
            return Err(Error::config("save_every", "must be at least 1"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::config("eps", "must be positive"));
        }
        self.coupled().validate()?;
        self.sweep().validate()?;
        let lln = &self.lln;
        KernelSpec::new(lln.h.clone()).map_err(|e| prefix("lln.h", e))?;
        lln.rho0.validate().map_err(|e| prefix("lln.rho0", e))?;
        if !(lln.alpha > 0.0 && lln.delta > 0.0 && lln.alpha + lln.delta < 0.5) {
            return Err(Error::config("lln.delta", "alpha and delta must be positive with alpha + delta < 1/2"));
        }
        if lln.reps == 0 || lln.n_list.iter().any(|&n| n < 2) {
            return Err(Error::config("lln.N_list", "need reps >= 1 and N >= 2"));
        }
        if self.verify.samples == 0 || !(self.verify.safety >= 1.0) {
            return Err(Error::config("verify", "need samples >= 1 and safety >= 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::symmetric(self.grid.half_width, self.grid.cells)
    }

    /// Coupled-run parameters at particle count `N`.
    pub fn coupled(&self) -> CoupledConfig {
        self.coupled_at(self.n)
    }

    pub fn coupled_at(&self, n: usize) -> CoupledConfig {
        CoupledConfig {
            n,
            alpha: self.alpha,
            beta: self.beta,
            eps_scale: self.eps_scale,
            sigma: self.sigma,
            t_end: self.t_end,
            dt: self.dt,
            kernel: self.kernel.clone(),
            rho0: self.rho0.clone(),
            domain_half_width: self.grid.half_width,
            cells: self.grid.cells,
            lambda: self.lambda,
            pde_substeps: self.pde_substeps,
            pde: self.pde,
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            n_list: self.n_list.clone(),
            reps: self.reps,
            master_seed: self.master_seed,
            base: self.coupled_at(self.n_list.first().copied().unwrap_or(self.n)),
        }
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Config { field: inner, message } => Error::config(format!("{field}.{inner}"), message),
        other => Error::config(field, other.to_string()),
    }
}
