//! Run configuration read from a TOML file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bogoliubov_core::observables::ObservableSpec;
use bogoliubov_core::scattering::{RadialGrid, RadialPotential};
use bogoliubov_core::Complex64;
use bogoliubov_fock::SuiteConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Everything a run needs. Every section has defaults, so an empty file is valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    /// Particle numbers `N` of the scattering, coefficient and limit stages.
    pub particles: Vec<u64>,
    /// Neumann ball radius in units of the box, `0 < ℓ < 1/2`.
    pub ell: f64,
    /// Sup-norm cutoff of the momentum lattice.
    pub cutoff: u32,
    pub grid: GridConfig,
    pub observables: Vec<ObservableConfig>,
    pub limit: LimitConfig,
    pub verify: SuiteConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::SoftSphere {
                height: 2.0,
                radius: 0.5,
            },
            particles: vec![1000],
            ell: 0.49,
            cutoff: 4,
            grid: GridConfig::default(),
            observables: Vec::new(),
            limit: LimitConfig::default(),
            verify: SuiteConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    SoftSphere { height: f64, radius: f64 },
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<RadialPotential, CliError> {
        let v = match self {
            Self::SoftSphere { height, radius } => RadialPotential::soft_sphere(*height, *radius),
            Self::Tabulated { radii, values } => RadialPotential::tabulated(radii.clone(), values.clone()),
        };
        v.map_err(|e| CliError::Config(format!("potential: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub inner: usize,
    pub outer: usize,
    pub tolerance: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = RadialGrid::default();
        Self {
            inner: g.inner,
            outer: g.outer,
            tolerance: g.tolerance,
        }
    }
}

impl From<GridConfig> for RadialGrid {
    fn from(g: GridConfig) -> Self {
        RadialGrid {
            inner: g.inner,
            outer: g.outer,
            tolerance: g.tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `o(x) = 2 cos(2π n0·x)`.
    Cos,
    /// Momentum-diagonal multiplier; `q₀Oφ₀ = 0`.
    MomentumDiagonal,
}

/// One Fourier coefficient `ô(n) = re + i·im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub n: [i32; 3],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub name: String,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub n0: Option<[i32; 3]>,
    /// Value `o(0)` of a momentum-diagonal multiplier.
    #[serde(default)]
    pub o_zero: Option<f64>,
    #[serde(default)]
    pub coefficients: Option<Vec<Coefficient>>,
    #[serde(default)]
    pub norm_bound: Option<f64>,
}

impl ObservableConfig {
    pub fn build(&self, path: &str) -> Result<ObservableSpec, CliError> {
        let err = |msg: String| CliError::Config(format!("{path}: {msg}"));
        match (self.preset, &self.coefficients) {
            (Some(_), Some(_)) => Err(err("give either `preset` or `coefficients`, not both".into())),
            (None, None) => Err(err("missing `preset` or `coefficients`".into())),
            (Some(Preset::Cos), None) => {
                let n0 = self.n0.ok_or_else(|| err("preset `cos` needs `n0`".into()))?;
                ObservableSpec::cos(n0).map_err(|e| err(e.to_string()))
            }
            (Some(Preset::MomentumDiagonal), None) => {
                let o_zero = self
                    .o_zero
                    .ok_or_else(|| err("preset `momentum_diagonal` needs `o_zero`".into()))?;
                let bound = self.norm_bound.unwrap_or(o_zero.abs());
                Ok(ObservableSpec::momentum_diagonal(o_zero, bound))
            }
            (None, Some(coeffs)) => {
                let list: Vec<([i32; 3], Complex64)> =
                    coeffs.iter().map(|c| (c.n, Complex64::new(c.re, c.im))).collect();
                ObservableSpec::from_multiplier(&list, self.norm_bound).map_err(|e| err(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitConfig {
    /// Observables forming the `k`-tuple; all observables when empty.
    pub select: Vec<String>,
    /// `λ` grid of the one-dimensional densities.
    pub lambda: LambdaGrid,
    /// Intervals per axis of gridded densities for `k = 2, 3`.
    pub grid_intervals: usize,
    /// Quadrature intervals of the characteristic-function inversion.
    pub s_intervals: usize,
    /// Mode `n` of the one-excitation state `a*_p Ω` (`k = 1` only).
    pub excited_mode: Option<[i32; 3]>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            select: Vec::new(),
            lambda: LambdaGrid {
                lo: -10.0,
                hi: 10.0,
                intervals: 2000,
            },
            grid_intervals: 64,
            s_intervals: 4096,
            excited_mode: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// `N` values of the `∫Vf − 8π a0` rate.
    pub scattering_particles: Vec<u64>,
    pub vf_slope_tolerance: f64,
    /// `N` values of the `max |η + τ − μ|` rate.
    pub rate_particles: Vec<u64>,
    pub rate_cutoff: u32,
    pub rate_slope_tolerance: f64,
    pub closed_form_tolerance: f64,
    pub shell_cutoff: u32,
    pub shell_particles: u64,
    pub max_shell_spread: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scattering_particles: vec![100, 1_000, 10_000, 100_000],
            vf_slope_tolerance: 0.15,
            rate_particles: vec![500, 1000, 2000, 4000],
            rate_cutoff: 4,
            rate_slope_tolerance: 0.2,
            closed_form_tolerance: 1e-6,
            shell_cutoff: 8,
            shell_particles: 1000,
            max_shell_spread: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the cross-field invariants every stage relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.potential.build()?;
        if !(self.ell > 0.0 && self.ell < 0.5) {
            return Err(CliError::Config(format!("ell: must lie in (0, 1/2), got {}", self.ell)));
        }
        if self.particles.is_empty() {
            return Err(CliError::Config("particles: at least one value is required".into()));
        }
        let all_n = self
            .particles
            .iter()
            .chain(&self.sweep.scattering_particles)
            .chain(&self.sweep.rate_particles)
            .chain(std::iter::once(&self.sweep.shell_particles));
        for &n in all_n {
            if !(n as f64 * self.ell > v.support_radius()) {
                return Err(CliError::Config(format!(
                    "particles: N·ell = {} must exceed the potential support radius {}",
                    n as f64 * self.ell,
                    v.support_radius()
                )));
            }
        }
        if self.cutoff == 0 || self.sweep.rate_cutoff == 0 || self.sweep.shell_cutoff == 0 {
            return Err(CliError::Config("cutoff: must be at least 1".into()));
        }
        let mut names = BTreeSet::new();
        for (i, o) in self.observables.iter().enumerate() {
            if !names.insert(o.name.as_str()) {
                return Err(CliError::Config(format!("observables[{i}].name: duplicate name '{}'", o.name)));
            }
            o.build(&format!("observables[{i}]"))?;
        }
        for (i, name) in self.limit.select.iter().enumerate() {
            if !names.contains(name.as_str()) {
                return Err(CliError::Config(format!("limit.select[{i}]: unknown observable '{name}'")));
            }
        }
        let l = self.limit.lambda;
        if !(l.lo < l.hi) || l.intervals < 2 || !l.intervals.is_multiple_of(2) {
            return Err(CliError::Config(
                "limit.lambda: need lo < hi and an even number of intervals >= 2".into(),
            ));
        }
        if self.limit.s_intervals < 2 || self.limit.grid_intervals < 2 {
            return Err(CliError::Config("limit: s_intervals and grid_intervals must be >= 2".into()));
        }
        if self.sweep.scattering_particles.len() < 3 || self.sweep.rate_particles.len() < 3 {
            return Err(CliError::Config(
                "sweep: rate fits need at least 3 particle numbers".into(),
            ));
        }
        self.verify
            .validate()
            .map_err(|e| CliError::Config(format!("verify: {e}")))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the output section.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
