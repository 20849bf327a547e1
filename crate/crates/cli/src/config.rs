use edgetail::crossover::{MuContourSpec, TailOptions};
use edgetail::deformed_airy::AiryConfig;
use edgetail::fredholm::DetOptions;
use edgetail::operator::KernelOptions;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything that influences numerical results, except per-command arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T0")]
    pub t0: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_nodes_per_segment: usize,
    pub kernel_abs_tol: f64,
    pub kernel_rel_tol: f64,
    pub det_tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub map_scale: Option<f64>,
    pub mu_delta: f64,
    pub mu_radius: f64,
    pub mu_truncation: f64,
    pub mu_rel_tol: f64,
    pub max_mu_nodes: usize,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    /// Results never depend on scheduling; `false` is rejected.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let airy = AiryConfig::default();
        let det = DetOptions::default();
        let tail = TailOptions::default();
        let kernel = KernelOptions::default();
        RunConfig {
            t0: airy.t0,
            abs_tol: airy.abs_tol,
            rel_tol: airy.rel_tol,
            max_nodes_per_segment: airy.max_nodes_per_segment,
            kernel_abs_tol: kernel.abs_tol,
            kernel_rel_tol: kernel.rel_tol,
            det_tol: det.det_tol,
            min_nodes: det.n_min,
            max_nodes: det.n_max,
            map_scale: det.scale,
            mu_delta: tail.contour.delta,
            mu_radius: tail.contour.radius,
            mu_truncation: tail.contour.truncation,
            mu_rel_tol: tail.mu_rel_tol,
            max_mu_nodes: tail.max_mu_nodes,
            format: None,
            out: None,
            jobs: None,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("bad config file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let positive = [
            ("T0", self.t0),
            ("abs_tol", self.abs_tol),
            ("kernel_abs_tol", self.kernel_abs_tol),
            ("det_tol", self.det_tol),
            ("mu_delta", self.mu_delta),
            ("mu_radius", self.mu_radius),
            ("mu_rel_tol", self.mu_rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(UsageError(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.rel_tol >= 0.0 && self.kernel_rel_tol >= 0.0) {
            return Err(UsageError("relative tolerances must be nonnegative".into()));
        }
        if self.jobs == Some(0) {
            return Err(UsageError("jobs must be at least 1".into()));
        }
        if !self.deterministic {
            return Err(UsageError("deterministic = false is not supported".into()));
        }
        Ok(())
    }

    pub fn airy(&self) -> AiryConfig {
        AiryConfig {
            t0: self.t0,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_nodes_per_segment: self.max_nodes_per_segment,
        }
    }

    pub fn kernel(&self) -> KernelOptions {
        KernelOptions { abs_tol: self.kernel_abs_tol, rel_tol: self.kernel_rel_tol, ..KernelOptions::default() }
    }

    pub fn det(&self) -> DetOptions {
        DetOptions { det_tol: self.det_tol, n_min: self.min_nodes, n_max: self.max_nodes, scale: self.map_scale }
    }

    pub fn tail(&self) -> TailOptions {
        TailOptions {
            contour: MuContourSpec { delta: self.mu_delta, radius: self.mu_radius, truncation: self.mu_truncation },
            det: self.det(),
            mu_rel_tol: self.mu_rel_tol,
            max_mu_nodes: self.max_mu_nodes,
        }
    }
}
