//! Run configuration: validation, hashing and JSON round trips.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dirac_stab::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Profile,
    Spectrum,
    Sweep,
    Evans,
    Verify,
    Derrick,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Evans => "evans",
            Command::Verify => "verify",
            Command::Derrick => "derrick",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Derrick,
    Hardy,
    Matexp,
    Carleman,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Derrick => "derrick",
            Suite::Hardy => "hardy",
            Suite::Matexp => "matexp",
            Suite::Carleman => "carleman",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Half length `L`; ignored when `auto_rescale` is set.
    pub half_length: f64,
    pub points: usize,
    /// Use `L = c_l / √(m² - ω²)` per frequency.
    pub auto_rescale: bool,
    pub c_l: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_length: 40.0, points: 512, auto_rescale: true, c_l: 40.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Newton residual target for profiles.
    pub tol_newton: f64,
    /// `Re λ` above which a point eigenvalue is unstable.
    pub tol_eig: f64,
    pub rho_loc: f64,
    /// Zero-cluster radius.
    pub delta0: f64,
    pub tol_2omega: f64,
    /// Fixed branch matching radius; adaptive when absent.
    pub matching_radius: Option<f64>,
    pub evans_rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_newton: 1e-12,
            tol_eig: 1e-6,
            rho_loc: 1e-6,
            delta0: 1e-4,
            tol_2omega: 1e-6,
            matching_radius: None,
            evans_rtol: 1e-10,
        }
    }
}

/// Right half-plane rectangle `[re0, re1] × [im0, im1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { re0: 1e-3, re1: 3.0, im0: -3.0, im1: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub m: f64,
    pub k: u32,
    /// Single frequency for `profile`, `spectrum`, `evans`.
    pub omega: f64,
    /// Frequencies for `sweep`.
    pub omegas: Vec<f64>,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub contour: ContourConfig,
    /// Evans stability verdicts during `sweep`.
    pub stability: bool,
    pub suite: Suite,
    pub output: PathBuf,
    pub seed: u64,
    pub sequential: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Profile,
            m: 1.0,
            k: 1,
            omega: 0.95,
            omegas: vec![0.9, 0.95, 0.99],
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            contour: ContourConfig::default(),
            stability: true,
            suite: Suite::Derrick,
            output: PathBuf::from("out"),
            seed: 7,
            sequential: false,
        }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { path: path.to_string(), message: message.into() }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        if self.k == 0 {
            return Err(invalid("k", "must be >= 1"));
        }
        let in_gap = |path: &str, w: f64| {
            if w.is_finite() && w.abs() < self.m {
                Ok(())
            } else {
                Err(invalid(path, format!("omega = {w} lies outside (-{m}, {m})", m = self.m)))
            }
        };
        if matches!(self.command, Command::Profile | Command::Spectrum | Command::Evans) {
            in_gap("omega", self.omega)?;
        }
        if self.command == Command::Sweep {
            if self.omegas.is_empty() {
                return Err(invalid("omegas", "sweep needs at least one frequency"));
            }
            for (i, &w) in self.omegas.iter().enumerate() {
                in_gap(&format!("omegas[{i}]"), w)?;
            }
            if self.omegas.windows(2).any(|p| p[1] <= p[0]) {
                return Err(invalid("omegas", "must be strictly increasing"));
            }
        }
        positive("grid.half_length", self.grid.half_length)?;
        positive("grid.c_l", self.grid.c_l)?;
        if self.grid.points < 4 || self.grid.points % 2 != 0 {
            return Err(invalid("grid.points", format!("must be even and >= 4, got {}", self.grid.points)));
        }
        let t = &self.tolerances;
        positive("tolerances.tol_newton", t.tol_newton)?;
        positive("tolerances.tol_eig", t.tol_eig)?;
        positive("tolerances.rho_loc", t.rho_loc)?;
        positive("tolerances.delta0", t.delta0)?;
        positive("tolerances.tol_2omega", t.tol_2omega)?;
        positive("tolerances.evans_rtol", t.evans_rtol)?;
        if let Some(r) = t.matching_radius {
            positive("tolerances.matching_radius", r)?;
        }
        let c = &self.contour;
        if !(c.re0 > 0.0 && c.re1 > c.re0 && c.im1 > c.im0) {
            return Err(invalid("contour", "need 0 < re0 < re1 and im0 < im1"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(&format!("line {}, column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(compact.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
