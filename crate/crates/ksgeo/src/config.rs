//! Optional TOML configuration. Each command reads its own table; a value
//! given on the command line always wins over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::formats::{self, Format};

pub const CONFIG_ENV: &str = "KSGEO_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DirectionArg {
    Infall,
    Outfall,
}

impl From<DirectionArg> for ksgeo_core::Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Infall => ksgeo_core::Direction::Infall,
            DirectionArg::Outfall => ksgeo_core::Direction::Outfall,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSection {
    pub mass: Option<f64>,
    pub spin: Option<f64>,
    pub energy: Option<f64>,
    pub angmom: Option<f64>,
    pub r0: Option<f64>,
    pub direction: Option<DirectionArg>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_tau: Option<f64>,
    pub terminal_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsCheckSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub n_max: Option<usize>,
    pub grid_points: Option<usize>,
    pub grid_halfwidth: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub quick: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub geodesic: GeodesicSection,
    #[serde(default)]
    pub ks_check: KsCheckSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub verify: VerifySection,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::bad_input(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = formats::read_to_string(path)?;
        Self::parse(&text)
            .map_err(|e| CliError::bad_input(format!("{}: {}", path.display(), e.message)))
    }

    /// Loads `path` if given (clap has already folded in the environment
    /// variable), otherwise the empty configuration.
    pub fn resolve(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }
}
