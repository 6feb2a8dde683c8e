//! Flag parsing. Flags fill a [`RunConfig`]; a `--config` file is overlaid
//! on top key by key, so values in the file win.

use std::path::PathBuf;

use clap::Parser;
use serde_json::Value;

use dirac_stab::error::{Error, Result};

use crate::config::{Command, RunConfig, Suite};

#[derive(Debug, Parser)]
#[command(name = "dirac-stab", version, about = "Spectral stability lab for nonlinear Dirac solitary waves")]
pub struct Args {
    pub command: Command,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Comma-separated, increasing.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omegas: Option<Vec<f64>>,
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Keep `half_length` fixed instead of `c_l / sqrt(m^2 - omega^2)`.
    #[arg(long)]
    pub fixed_grid: bool,
    #[arg(long)]
    pub c_l: Option<f64>,
    #[arg(long)]
    pub tol_newton: Option<f64>,
    #[arg(long)]
    pub tol_eig: Option<f64>,
    #[arg(long)]
    pub rho_loc: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub tol_2omega: Option<f64>,
    #[arg(long)]
    pub matching_radius: Option<f64>,
    #[arg(long)]
    pub evans_rtol: Option<f64>,
    /// `re0,re1,im0,im1`.
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    pub contour: Option<Vec<f64>>,
    /// Skip the Evans verdicts in `sweep`.
    #[arg(long)]
    pub no_stability: bool,
    #[arg(long)]
    pub suite: Option<Suite>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, env = "DIRAC_STAB_THREADS")]
    pub threads: Option<usize>,
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Args {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig { command: self.command, ..RunConfig::default() };
        macro_rules! set {
            ($field:ident => $($target:tt)+) => {
                if let Some(v) = self.$field.clone() {
                    cfg.$($target)+ = v;
                }
            };
        }
        set!(m => m);
        set!(k => k);
        set!(omega => omega);
        set!(omegas => omegas);
        set!(half_length => grid.half_length);
        set!(points => grid.points);
        set!(c_l => grid.c_l);
        set!(tol_newton => tolerances.tol_newton);
        set!(tol_eig => tolerances.tol_eig);
        set!(rho_loc => tolerances.rho_loc);
        set!(delta0 => tolerances.delta0);
        set!(tol_2omega => tolerances.tol_2omega);
        set!(evans_rtol => tolerances.evans_rtol);
        set!(suite => suite);
        set!(out => output);
        set!(seed => seed);
        if self.matching_radius.is_some() {
            cfg.tolerances.matching_radius = self.matching_radius;
        }
        if let Some(c) = &self.contour {
            cfg.contour.re0 = c[0];
            cfg.contour.re1 = c[1];
            cfg.contour.im0 = c[2];
            cfg.contour.im1 = c[3];
        }
        if self.fixed_grid {
            cfg.grid.auto_rescale = false;
        }
        if self.no_stability {
            cfg.stability = false;
        }
        if self.sequential {
            cfg.sequential = true;
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::ConfigInvalid { path: "--config".into(), message: format!("{}: {e}", path.display()) })?;
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| Error::ConfigInvalid { path: "--config".into(), message: e.to_string() })?;
            let mut base = serde_json::to_value(&cfg).expect("config serializes");
            merge(&mut base, file);
            cfg = serde_json::from_value(base).map_err(|e| Error::ConfigInvalid { path: "--config".into(), message: e.to_string() })?;
        }
        Ok(cfg)
    }
}
