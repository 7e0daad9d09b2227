//! Scenario files.
//!
//! A scenario is a TOML document with `[grid]`, `[task]` and `[output]`
//! sections plus whichever of `[state]`, `[generating]` and `[potential]` the
//! task reads. Unknown keys are rejected. [`Scenario::to_text`] prints the
//! canonical form; canonical text parses and prints back byte for byte.
//!
//! ```toml
//! [grid]
//! q_min = -10.0
//! q_max = 10.0
//! q_n = 256
//! p_min = -10.0
//! p_max = 10.0
//! p_n = 256
//! hbar = 1.0
//!
//! [state]
//! kind = "oscillator"
//! n = 0
//!
//! [task]
//! kind = "wigner-direct"
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "bin", "pgm", "ppm"]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phasewig_core::numgrid::{AxisSpec, PhaseGrid};
use phasewig_core::schrod::PolynomialPotential;
use phasewig_core::states::{
    gaussian_packet, oscillator_eigenstate, GaussianFactorState, OscillatorParams, Wavefunction,
};
use phasewig_core::symcalc::GeneratingFunction;
use phasewig_core::wigner::KetConvention;
use phasewig_core::{io, C64};

pub const OUTPUT_DIR_ENV: &str = "PHASEWIG_OUTPUT_DIR";

/// A scenario that failed to load or is inconsistent with its task.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generating: Option<GeneratingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
    pub task: TaskSection,
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub q_n: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_n: usize,
    pub hbar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSection {
    Oscillator {
        n: usize,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    Gaussian {
        q0: f64,
        p0: f64,
        sigma: f64,
    },
    /// `e^{-a q²} Σ c_k q^k`, normalised; `phi_im` defaults to zeros.
    GaussianFactor {
        a: f64,
        phi_re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        phi_im: Vec<f64>,
    },
    /// A field file in the binary format; relative to the scenario file.
    File {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratingSection {
    Preset(Preset),
    Expr(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `p*q/2`
    Canonical,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    /// `V(q) = Σ c_k q^k`, lowest order first.
    pub coefficients: Vec<f64>,
    #[serde(default = "one")]
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    WignerDirect,
    WignerTegmen,
    WignerCovariant,
    Spectrum,
    EquivalenceSweep,
    Verify,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::WignerDirect => "wigner-direct",
            TaskKind::WignerTegmen => "wigner-tegmen",
            TaskKind::WignerCovariant => "wigner-covariant",
            TaskKind::Spectrum => "spectrum",
            TaskKind::EquivalenceSweep => "equivalence-sweep",
            TaskKind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Doubled,
    Literal,
}

impl From<Convention> for KetConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Doubled => KetConvention::Doubled,
            Convention::Literal => KetConvention::Literal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKind,
    /// Number of eigenpairs for `spectrum` and `equivalence-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Generating functions swept by `equivalence-sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generating_list: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken_connection: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Bin,
    Pgm,
    Ppm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative to the scenario file unless absolute.
    pub dir: String,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Bin, Format::Pgm, Format::Ppm]
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| bad(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {}", path.display(), e.0)))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Checks that the sections a task reads are present and usable.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.phase_grid()?;
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(bad(format!("task `{}` requires the `{key}` section", self.task.kind.name())))
            }
        };
        match self.task.kind {
            TaskKind::WignerDirect => need(self.state.is_some(), "state")?,
            TaskKind::WignerTegmen => {
                need(self.state.is_some(), "state")?;
                if matches!(self.state, Some(StateSection::Gaussian { .. } | StateSection::File { .. })) {
                    return Err(bad("task `wigner-tegmen` needs state.kind = \"oscillator\" or \"gaussian-factor\""));
                }
            }
            TaskKind::WignerCovariant => {
                need(self.state.is_some(), "state")?;
                need(self.generating.is_some(), "generating")?;
            }
            TaskKind::Spectrum => need(self.potential.is_some(), "potential")?,
            TaskKind::EquivalenceSweep => {
                need(self.potential.is_some(), "potential")?;
                if self.task.generating_list.is_empty() {
                    return Err(bad("task `equivalence-sweep` requires a non-empty `task.generating_list`"));
                }
                for f in &self.task.generating_list {
                    GeneratingFunction::parse(f).map_err(|e| bad(format!("task.generating_list: {e}")))?;
                }
            }
            TaskKind::Verify => {
                if self.grid.q_n != self.grid.p_n {
                    return Err(bad("task `verify` needs grid.q_n = grid.p_n"));
                }
            }
        }
        if let Some(GeneratingSection::Expr(e)) = &self.generating {
            GeneratingFunction::parse(e).map_err(|err| bad(format!("generating.expr: {err}")))?;
        }
        if let Some(p) = &self.potential {
            PolynomialPotential::new(p.coefficients.clone()).map_err(|e| bad(format!("potential.coefficients: {e}")))?;
            if !(p.mass > 0.0) {
                return Err(bad("potential.mass must be positive"));
            }
        }
        if matches!(self.task.kind, TaskKind::Spectrum | TaskKind::EquivalenceSweep) && self.task.levels == Some(0) {
            return Err(bad("task.levels must be at least 1"));
        }
        Ok(())
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid, ConfigError> {
        let g = &self.grid;
        let q = AxisSpec::new(g.q_min, g.q_max, g.q_n).map_err(|e| bad(format!("grid: {e}")))?;
        let p = AxisSpec::new(g.p_min, g.p_max, g.p_n).map_err(|e| bad(format!("grid: {e}")))?;
        PhaseGrid::new(q, p, g.hbar).map_err(|e| bad(format!("grid: {e}")))
    }

    pub fn generating_function(&self) -> Option<GeneratingFunction> {
        match self.generating.as_ref()? {
            GeneratingSection::Preset(Preset::Canonical) => Some(GeneratingFunction::canonical()),
            GeneratingSection::Preset(Preset::Zero) => Some(GeneratingFunction::zero()),
            GeneratingSection::Expr(e) => GeneratingFunction::parse(e).ok(),
        }
    }

    pub fn potential(&self) -> Option<(PolynomialPotential, f64)> {
        let p = self.potential.as_ref()?;
        Some((PolynomialPotential::new(p.coefficients.clone()).ok()?, p.mass))
    }

    /// The output directory: `$PHASEWIG_OUTPUT_DIR` if set, otherwise
    /// `output.dir` resolved against `base`.
    pub fn output_dir(&self, base: &Path) -> PathBuf {
        if let Some(d) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            return PathBuf::from(d);
        }
        base.join(&self.output.dir)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

impl StateSection {
    pub fn label(&self) -> String {
        match self {
            StateSection::Oscillator { n, .. } => format!("oscillator n={n}"),
            StateSection::Gaussian { q0, p0, sigma } => format!("gaussian q0={q0} p0={p0} sigma={sigma}"),
            StateSection::GaussianFactor { a, phi_re, .. } => {
                format!("gaussian-factor a={a} degree={}", phi_re.len().saturating_sub(1))
            }
            StateSection::File { path } => format!("file {path}"),
        }
    }

    pub fn level(&self) -> Option<usize> {
        match self {
            StateSection::Oscillator { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn wavefunction(&self, grid: &PhaseGrid, base: &Path) -> phasewig_core::Result<Wavefunction> {
        match self {
            StateSection::Oscillator { n, mass, omega } => {
                oscillator_eigenstate(*n, OscillatorParams::new(*mass, *omega)?, grid)
            }
            StateSection::Gaussian { q0, p0, sigma } => gaussian_packet(*q0, *p0, *sigma, grid),
            StateSection::GaussianFactor { .. } => self.factor_state(grid.hbar)?.expect("factor").to_wavefunction(grid),
            StateSection::File { path } => {
                let field = io::read_binary(&base.join(path))?;
                if field.grid() != grid {
                    return Err(phasewig_core::Error::ShapeMismatch(
                        "state file grid differs from the scenario grid".into(),
                    ));
                }
                Wavefunction::from_samples(field, self.label())
            }
        }
    }

    /// The state in Gaussian-times-polynomial form, when it has one.
    pub fn factor_state(&self, hbar: f64) -> phasewig_core::Result<Option<GaussianFactorState>> {
        match self {
            StateSection::Oscillator { n, mass, omega } => {
                Ok(Some(GaussianFactorState::oscillator(*n, OscillatorParams::new(*mass, *omega)?, hbar)?))
            }
            StateSection::GaussianFactor { a, phi_re, phi_im } => {
                if !phi_im.is_empty() && phi_im.len() != phi_re.len() {
                    return Err(phasewig_core::Error::ShapeMismatch(
                        "state.phi_im must match state.phi_re in length".into(),
                    ));
                }
                let phi = phi_re
                    .iter()
                    .enumerate()
                    .map(|(k, &re)| C64::new(re, phi_im.get(k).copied().unwrap_or(0.0)))
                    .collect();
                Ok(Some(GaussianFactorState::new(*a, phi)?.normalized()))
            }
            _ => Ok(None),
        }
    }
}
