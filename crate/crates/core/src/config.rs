//! Numerical tolerances and size limits.

use serde::{Deserialize, Serialize};

pub const DIM_CAP_ENV: &str = "HAMFORGE_DIM_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub tol_herm: f64,
    pub tol_orth: f64,
    pub tol_eig: f64,
    pub tol_assemble: f64,
    pub tol_phase: f64,
    pub degeneracy_tol: f64,
    pub dim_cap: usize,
    pub delta_cap: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol_herm: 1e-10,
            tol_orth: 1e-10,
            tol_eig: 1e-9,
            tol_assemble: 1e-9,
            tol_phase: 1e-8,
            degeneracy_tol: 1e-8,
            dim_cap: 1 << 14,
            delta_cap: 1e12,
        }
    }
}

impl Config {
    /// Defaults, with `dim_cap` taken from `HAMFORGE_DIM_CAP` when it parses as an integer.
    pub fn from_env() -> Self {
        let mut cfg = Config::default();
        if let Ok(v) = std::env::var(DIM_CAP_ENV) {
            if let Ok(cap) = v.trim().parse::<usize>() {
                cfg.dim_cap = cap;
            }
        }
        cfg
    }
}
