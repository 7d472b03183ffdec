//! Run configuration read from JSON.

use std::path::{Path, PathBuf};

use bbtherm::model::{HamiltonianJson, QubitSystem};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FreeSpinsUniform,
    FreeSpinsModulated,
    CustomHamiltonian,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::FreeSpinsUniform => "free_spins_uniform",
            Family::FreeSpinsModulated => "free_spins_modulated",
            Family::CustomHamiltonian => "custom_hamiltonian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LbaAnalytic,
    LbaNumeric,
    Qome,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::LbaAnalytic => "lba_analytic",
            Method::LbaNumeric => "lba_numeric",
            Method::Qome => "qome",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One `N` or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    One(usize),
    Many(Vec<usize>),
}

impl Default for Counts {
    fn default() -> Self {
        Counts::One(1)
    }
}

impl Counts {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Counts::One(n) => vec![*n],
            Counts::Many(v) => v.clone(),
        }
    }
}

/// `Γ_i = base + amplitude · sin((i − 1) · frequency)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldLaw {
    pub base: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Default for FieldLaw {
    fn default() -> Self {
        Self {
            base: 1.0,
            amplitude: 0.5,
            frequency: std::f64::consts::PI / std::f64::consts::SQRT_2,
        }
    }
}

impl FieldLaw {
    pub fn fields(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.base + self.amplitude * (i as f64 * self.frequency).sin())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute tolerance for energy and gap equality; relative default
    /// when absent.
    pub energy: Option<f64>,
    pub zero: f64,
    pub imag: f64,
    pub lanczos: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy: None,
            zero: 1e-10,
            imag: 1e-8,
            lanczos: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    /// Largest Liouvillian dimension `M²`.
    pub qome: usize,
    /// Largest product dimension for the numeric LBA path.
    pub numeric: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            qome: bbtherm::qome::DEFAULT_LIOUVILLIAN_CAP,
            numeric: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub field: Option<Vec<f64>>,
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKey {
    Beta,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    /// Uniform field `Γ`.
    #[serde(default)]
    pub field: Option<f64>,
    #[serde(default)]
    pub field_law: FieldLaw,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianJson>,
    #[serde(default)]
    pub n: Counts,
    pub beta: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub record_timing: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<Grid>,
}

fn default_gamma() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(value: f64, what: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!(
            "{what} must be positive and finite, got {value}"
        )))
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn counts(&self) -> Vec<usize> {
        self.n.values()
    }

    /// Qubits per system: 1 for spins, `log2(dim)` for a custom Hamiltonian.
    pub fn qubits_per_system(&self) -> usize {
        match (&self.family, &self.hamiltonian) {
            (Family::CustomHamiltonian, Some(h)) => h.dim.trailing_zeros() as usize,
            _ => 1,
        }
    }

    /// Fields of `n` spins; `field` overrides the uniform value or the law's
    /// base.
    pub fn fields(&self, n: usize, field: Option<f64>) -> Vec<f64> {
        match self.family {
            Family::FreeSpinsUniform => vec![field.or(self.field).unwrap_or(1.0); n],
            Family::FreeSpinsModulated => FieldLaw {
                base: field.unwrap_or(self.field_law.base),
                ..self.field_law
            }
            .fields(n),
            Family::CustomHamiltonian => Vec::new(),
        }
    }

    /// Field reported in output rows.
    pub fn reported_field(&self, field: Option<f64>) -> Option<f64> {
        match self.family {
            Family::FreeSpinsUniform => Some(field.or(self.field).unwrap_or(1.0)),
            Family::FreeSpinsModulated => Some(field.unwrap_or(self.field_law.base)),
            Family::CustomHamiltonian => None,
        }
    }

    pub fn custom_system(&self) -> Result<QubitSystem> {
        let h = self
            .hamiltonian
            .as_ref()
            .ok_or_else(|| config_err("custom_hamiltonian needs a 'hamiltonian' object"))?;
        QubitSystem::from_json(h, self.gamma).map_err(|e| config_err(e.to_string()))
    }

    /// Checks everything an `analyze` run needs.
    pub fn validate(&self) -> Result<()> {
        let beta = self.beta.ok_or_else(|| config_err("'beta' is required"))?;
        positive(beta, "beta")?;
        self.validate_common()?;
        if self.family != Family::CustomHamiltonian {
            self.check_fields(None)?;
        }
        Ok(())
    }

    /// Checks a sweep configuration and returns the grid.
    pub fn validate_sweep(&self) -> Result<(GridKey, Vec<f64>)> {
        self.validate_common()?;
        let grid = self
            .grid
            .as_ref()
            .ok_or_else(|| config_err("sweep needs a 'grid' object"))?;
        let (key, values) = match (&grid.beta, &grid.field) {
            (Some(b), None) => (GridKey::Beta, b.clone()),
            (None, Some(f)) => (GridKey::Field, f.clone()),
            _ => return Err(config_err("grid must set exactly one of 'beta' or 'field'")),
        };
        if values.is_empty() {
            return Err(config_err("grid is empty"));
        }
        match key {
            GridKey::Beta => {
                for &b in &values {
                    positive(b, "grid beta")?;
                }
                if self.family != Family::CustomHamiltonian {
                    self.check_fields(None)?;
                }
            }
            GridKey::Field => {
                let beta = self.beta.ok_or_else(|| config_err("'beta' is required"))?;
                positive(beta, "beta")?;
                if self.family == Family::CustomHamiltonian {
                    return Err(config_err("a field grid needs a free-spin family"));
                }
                for &f in &values {
                    positive(f, "grid field")?;
                    self.check_fields(Some(f))?;
                }
            }
        }
        Ok((key, values))
    }

    fn validate_common(&self) -> Result<()> {
        positive(self.gamma, "gamma")?;
        let counts = self.counts();
        if counts.is_empty() {
            return Err(config_err("'n' must list at least one system count"));
        }
        if counts.contains(&0) {
            return Err(config_err("system counts must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(config_err("'methods' must not be empty"));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(config_err("'methods' lists a method twice"));
        }
        if let Some(tol) = self.tolerances.energy {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(config_err(format!(
                    "energy tolerance must be nonnegative, got {tol}"
                )));
            }
        }
        positive(self.tolerances.zero, "zero tolerance")?;
        positive(self.tolerances.imag, "imaginary tolerance")?;
        positive(self.tolerances.lanczos, "Lanczos tolerance")?;
        match self.family {
            Family::CustomHamiltonian => {
                self.custom_system()?;
            }
            Family::FreeSpinsUniform | Family::FreeSpinsModulated => {
                if self.hamiltonian.is_some() {
                    return Err(config_err(
                        "'hamiltonian' is only valid for custom_hamiltonian",
                    ));
                }
            }
        }
        if self.methods.contains(&Method::Qome) {
            let k = self.qubits_per_system();
            for &n in &counts {
                let bits = 2 * n * k;
                let dim = if bits < usize::BITS as usize {
                    1usize << bits
                } else {
                    usize::MAX
                };
                if dim > self.caps.qome {
                    return Err(CliError::CapExceeded {
                        dim,
                        cap: self.caps.qome,
                        context: format!("qome with N={n}"),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_fields(&self, field: Option<f64>) -> Result<()> {
        if let (Family::FreeSpinsUniform, None, Some(f)) = (self.family, field, self.field) {
            positive(f, "field")?;
        }
        for n in self.counts() {
            for g in self.fields(n, field) {
                positive(g, "every field")?;
            }
        }
        Ok(())
    }
}
