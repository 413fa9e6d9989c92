//! JSON experiment-file schema and its mapping onto the library types.
//!
//! The schema is strict: unknown keys are rejected so typos fail loudly
//! before any computation starts.

use anyhow::{bail, Context, Result};
use ionosc::dirac::Spinor;
use ionosc::linalg::{CMatrix, C64};
use ionosc::scenario::{
    EngineKind, ExperimentConfig, FlavorProjector, FockEngineSpec, MixingSpec, MomentumSpec,
    SchemeKind, SpinorMode,
};
use ionosc::theory::MixingMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scheme: SchemeName,
    /// Effective speed, kHz per momentum unit.
    #[serde(default = "default_speed")]
    pub c: f64,
    /// Target rest masses (kHz); mutually exclusive with `drives`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    /// Raw drive strengths (kHz); mutually exclusive with `masses`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drives: Option<Vec<f64>>,
    pub mixing: MixingFile,
    /// Starting flavor: "e", "mu" or "tau".
    pub alpha: String,
    #[serde(default)]
    pub spinor: SpinorFile,
    pub momentum: MomentumFile,
    #[serde(default)]
    pub engine: EngineFile,
    #[serde(default)]
    pub projector: ProjectorName,
    pub times: TimesFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputFile>,
}

fn default_speed() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    A,
    B,
    TwoGen,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingFile {
    Tribimaximal,
    Rotation2(f64),
    Custom(MatrixFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn build(&self) -> Result<MixingMatrix> {
        let dim = self.re.len();
        if self.re.iter().any(|row| row.len() != dim) {
            bail!("mixing matrix rows must all have length {dim}");
        }
        if let Some(im) = &self.im {
            if im.len() != dim || im.iter().any(|row| row.len() != dim) {
                bail!("imaginary part must match the real part's shape");
            }
        }
        let entries = CMatrix::from_fn(dim, dim, |i, j| {
            let re = self.re[i][j];
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            C64::new(re, im)
        });
        MixingMatrix::new(entries).context("custom mixing matrix rejected")
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinorFile {
    #[default]
    Symmetric,
    Exact,
    Custom(SpinorValues),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorValues {
    /// [re, im] of the upper component.
    pub upper: [f64; 2],
    /// [re, im] of the lower component.
    pub lower: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumFile {
    Eigenstate(f64),
    Gaussian(GaussianFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFile {
    pub p0: f64,
    pub sigma: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_half_width")]
    pub half_width_sigmas: f64,
}

fn default_points() -> usize {
    ionosc::dirac::DEFAULT_PACKET_POINTS
}

fn default_half_width() -> f64 {
    ionosc::dirac::DEFAULT_PACKET_HALF_WIDTH_SIGMAS
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineFile {
    #[default]
    Sector,
    Fock(FockFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockFile {
    #[serde(default = "default_n_cut")]
    pub n_cut: usize,
    pub delta: f64,
    #[serde(default = "default_auto_extend")]
    pub auto_extend: bool,
}

fn default_n_cut() -> usize {
    64
}

fn default_auto_extend() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorName {
    #[default]
    Component,
    EnergySplit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimesFile {
    Grid { t_max: f64, dt: f64 },
    List(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
}

pub fn parse_flavor(name: &str, generations: usize) -> Result<usize> {
    let index = match name {
        "e" => 0,
        "mu" => 1,
        "tau" => 2,
        other => bail!("unknown flavor {other:?}; use e, mu or tau"),
    };
    if index >= generations {
        bail!("flavor {name:?} needs {} generations", index + 1);
    }
    Ok(index)
}

impl ConfigFile {
    pub fn generations(&self) -> usize {
        match self.scheme {
            SchemeName::A | SchemeName::B => 3,
            SchemeName::TwoGen => 2,
        }
    }

    /// Map the file schema onto the library configuration.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let scheme = match self.scheme {
            SchemeName::A => SchemeKind::A,
            SchemeName::B => SchemeKind::B,
            SchemeName::TwoGen => SchemeKind::TwoGen,
        };
        let mixing = match &self.mixing {
            MixingFile::Tribimaximal => MixingSpec::Tribimaximal,
            MixingFile::Rotation2(theta) => MixingSpec::Rotation2(*theta),
            MixingFile::Custom(matrix) => MixingSpec::Custom(matrix.build()?),
        };
        let alpha = parse_flavor(&self.alpha, self.generations())?;
        let spinor = match &self.spinor {
            SpinorFile::Symmetric => SpinorMode::Symmetric,
            SpinorFile::Exact => SpinorMode::ExactPositive,
            SpinorFile::Custom(values) => SpinorMode::Custom(Spinor::new(
                C64::new(values.upper[0], values.upper[1]),
                C64::new(values.lower[0], values.lower[1]),
            )),
        };
        let momentum = match &self.momentum {
            MomentumFile::Eigenstate(p0) => MomentumSpec::Eigenstate(*p0),
            MomentumFile::Gaussian(g) => MomentumSpec::Gaussian {
                p0: g.p0,
                sigma: g.sigma,
                points: g.points,
                half_width_sigmas: g.half_width_sigmas,
            },
        };
        let engine = match &self.engine {
            EngineFile::Sector => EngineKind::Sector,
            EngineFile::Fock(f) => EngineKind::Fock(FockEngineSpec {
                n_cut: f.n_cut,
                delta: f.delta,
                auto_extend: f.auto_extend,
            }),
        };
        let projector = match self.projector {
            ProjectorName::Component => FlavorProjector::Component,
            ProjectorName::EnergySplit => FlavorProjector::EnergySplit,
        };
        let times = match &self.times {
            TimesFile::Grid { t_max, dt } => {
                if *dt <= 0.0 || *t_max < 0.0 {
                    bail!("time grid needs dt > 0 and t_max >= 0");
                }
                let steps = (t_max / dt).round() as usize;
                (0..=steps).map(|i| i as f64 * dt).collect()
            }
            TimesFile::List(list) => list.clone(),
        };
        Ok(ExperimentConfig {
            scheme,
            c: self.c,
            masses: self.masses.clone(),
            drives: self.drives.clone(),
            mixing,
            alpha,
            spinor,
            momentum,
            engine,
            projector,
            times,
        })
    }
}
