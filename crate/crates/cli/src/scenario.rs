//! Declarative scenario files (TOML).
//!
//! ```toml
//! [band]
//! n = 7
//! width_scale = 1.1
//! h_minus = 0.0
//! h_plus = 0.0
//!
//! [models]
//! construction = "capped"
//! kappa = 1.0
//! d = 0.4487989505128276
//! cap = "cone"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use muband_core::assembly::{
    capped_models, default_epsilon, AssembledPotential, BandPotential, CapFamily, CappedConstruction,
    PartitionedBandSpec, SegmentSpec,
};
use muband_core::bubble::{GridBand, PlanarGrid, Topology, WarpedBand};
use muband_core::model_spaces::{Interval, ModelSpace, DEFAULT_GRID};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub band: BandSection,
    pub models: Option<ModelsSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BandMode {
    #[default]
    Partitioned,
    #[serde(rename = "warped-1d")]
    Warped1d,
    #[serde(rename = "grid-2d")]
    Grid2d,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum WidthScale {
    Uniform(f64),
    PerSegment(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub n: usize,
    #[serde(default)]
    pub mode: BandMode,
    /// measured segment widths
    pub widths: Option<Vec<f64>>,
    /// alternative to `widths`: multiples of the model widths
    pub width_scale: Option<WidthScale>,
    /// per-segment scal lower bounds; default: the model scalar curvatures
    pub scal_lower: Option<Vec<f64>>,
    #[serde(default)]
    pub h_minus: f64,
    #[serde(default)]
    pub h_plus: f64,
    /// grid-2d: extent along the band
    pub length: Option<f64>,
    /// grid-2d: extent across the band
    pub height: Option<f64>,
    pub topology: Option<TopologyName>,
    pub potential: Option<PotentialSpec>,
    pub ambient: Option<AmbientSpec>,
    /// lower bound for scal used by the stability constant of a bubble
    pub scal_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    Cylinder,
    Rectangle,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// h(x) = c·(x0 − x) in band coordinates
    Linear { c: f64, x0: f64 },
    Constant { value: f64 },
    /// the glued potential of the [models] section
    Assembled,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmbientSpec {
    Flat,
    /// w = cos(√κ n t/2)^{2/n} on an interval centred at `shift`
    Spherical {
        kappa: f64,
        #[serde(default)]
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Capped,
    Explicit,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CapName {
    Cone,
    Hyperbolic,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelsSection {
    pub construction: Construction,
    pub kappa: Option<f64>,
    pub d: Option<f64>,
    pub cap: Option<CapName>,
    pub sigma: Option<f64>,
    #[serde(default)]
    pub segment: Vec<ModelSegment>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Spherical,
    Cone,
    Hyperbolic,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSegment {
    pub family: FamilyName,
    pub kappa: Option<f64>,
    pub sigma: Option<f64>,
    /// domain before reflection
    pub domain: [f64; 2],
    #[serde(default)]
    pub reflected: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// verification grid points per segment
    pub grid: Option<usize>,
    pub eps: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// warped-1d grid points
    pub points: Option<usize>,
    /// warped-1d collar nodes
    pub collar: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Table,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n: Vec<usize>,
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    /// absolute middle widths
    #[serde(default)]
    pub d: Vec<f64>,
    /// middle widths as fractions of 2π/(√κ n)
    #[serde(default)]
    pub d_fraction: Vec<f64>,
}

/// What the scenario asks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Verify,
    Bubble,
    Sweep,
}

fn parse_error(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

impl Scenario {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| parse_error(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| parse_error(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => parse_error(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn kind(&self) -> Kind {
        if self.sweep.is_some() {
            Kind::Sweep
        } else if self.band.mode == BandMode::Partitioned {
            Kind::Verify
        } else {
            Kind::Bubble
        }
    }

    pub fn grid(&self) -> usize {
        self.solver.grid.unwrap_or(DEFAULT_GRID)
    }

    pub fn construction(&self) -> CliResult<Option<CappedConstruction>> {
        let m = self.models.as_ref().ok_or_else(|| parse_error("missing [models] section"))?;
        if m.construction != Construction::Capped {
            return Ok(None);
        }
        if !m.segment.is_empty() {
            return Err(parse_error("[[models.segment]] is only valid with construction = \"explicit\""));
        }
        let kappa = m.kappa.ok_or_else(|| parse_error("models.kappa is required"))?;
        let d = m.d.ok_or_else(|| parse_error("models.d is required"))?;
        let family = match m.cap.ok_or_else(|| parse_error("models.cap is required"))? {
            CapName::Cone => {
                if m.sigma.is_some() {
                    return Err(parse_error("models.sigma only applies to hyperbolic caps"));
                }
                CapFamily::Cone
            }
            CapName::Hyperbolic => {
                CapFamily::Hyperbolic { sigma: m.sigma.ok_or_else(|| parse_error("models.sigma is required"))? }
            }
        };
        Ok(Some(capped_models(self.band.n, kappa, d, family, self.band.h_minus, self.band.h_plus)?))
    }

    pub fn models(&self) -> CliResult<Vec<ModelSpace>> {
        if let Some(c) = self.construction()? {
            return Ok(c.models);
        }
        let m = self.models.as_ref().ok_or_else(|| parse_error("missing [models] section"))?;
        if m.segment.is_empty() {
            return Err(parse_error("explicit construction needs [[models.segment]] entries"));
        }
        let n = self.band.n;
        m.segment
            .iter()
            .map(|s| {
                let [a, b] = s.domain;
                let ms = match s.family {
                    FamilyName::Spherical => ModelSpace::spherical(
                        n,
                        s.kappa.ok_or_else(|| parse_error("spherical segment needs kappa"))?,
                        a,
                        b,
                    )?,
                    FamilyName::Cone => ModelSpace::cone(n, a, b)?,
                    FamilyName::Hyperbolic => ModelSpace::hyperbolic(
                        n,
                        s.sigma.ok_or_else(|| parse_error("hyperbolic segment needs sigma"))?,
                        a,
                        b,
                    )?,
                };
                Ok(if s.reflected { ms.reflect() } else { ms })
            })
            .collect()
    }

    pub fn band_spec(&self, models: &[ModelSpace]) -> CliResult<PartitionedBandSpec> {
        let b = &self.band;
        let count = models.len();
        let widths: Vec<f64> = match (&b.widths, &b.width_scale) {
            (Some(_), Some(_)) => return Err(parse_error("give either band.widths or band.width_scale")),
            (Some(w), None) => w.clone(),
            (None, Some(WidthScale::Uniform(s))) => models.iter().map(|m| s * m.width_of()).collect(),
            (None, Some(WidthScale::PerSegment(s))) => {
                if s.len() != count {
                    return Err(parse_error(format!("{} width scales for {count} segments", s.len())));
                }
                models.iter().zip(s).map(|(m, s)| s * m.width_of()).collect()
            }
            (None, None) => return Err(parse_error("band.widths or band.width_scale is required")),
        };
        if widths.len() != count {
            return Err(parse_error(format!("{} widths for {count} model segments", widths.len())));
        }
        let scal: Vec<f64> = match &b.scal_lower {
            Some(s) if s.len() != count => {
                return Err(parse_error(format!("{} scal bounds for {count} segments", s.len())))
            }
            Some(s) => s.clone(),
            None => models.iter().map(|m| m.scalar_curvature()).collect(),
        };
        let segments =
            widths.into_iter().zip(scal).map(|(width, scal_lower)| SegmentSpec { width, scal_lower }).collect();
        Ok(PartitionedBandSpec::new(b.n, segments, b.h_minus, b.h_plus)?)
    }

    /// The glued potential with the configured or searched ε.
    pub fn assembled(&self) -> CliResult<AssembledPotential> {
        let models = self.models()?;
        let spec = self.band_spec(&models)?;
        Ok(match self.solver.eps {
            Some(eps) => muband_core::assembly::assemble(&spec, &models, eps)?,
            None => default_epsilon(&spec, &models)?.potential,
        })
    }

    pub fn grid_band(&self) -> CliResult<GridBand> {
        match self.band.mode {
            BandMode::Partitioned => Err(parse_error("band.mode must be warped-1d or grid-2d for a bubble run")),
            BandMode::Grid2d => Ok(GridBand::Grid2d(self.planar()?)),
            BandMode::Warped1d => Ok(GridBand::Warped1d(self.warped()?)),
        }
    }

    fn planar(&self) -> CliResult<PlanarGrid> {
        let b = &self.band;
        let nx = self.solver.nx.ok_or_else(|| parse_error("solver.nx is required"))?;
        let ny = self.solver.ny.ok_or_else(|| parse_error("solver.ny is required"))?;
        let length = b.length.ok_or_else(|| parse_error("band.length is required"))?;
        let height = b.height.ok_or_else(|| parse_error("band.height is required"))?;
        let delta = length / nx as f64;
        if ((height / ny as f64) - delta).abs() > 1e-12 * delta {
            return Err(parse_error(format!("cells must be square: {length}/{nx} vs {height}/{ny}")));
        }
        let topology = match b.topology.ok_or_else(|| parse_error("band.topology is required"))? {
            TopologyName::Cylinder => Topology::Cylinder,
            TopologyName::Rectangle => Topology::Rectangle,
        };
        let grid = match b.potential.as_ref().ok_or_else(|| parse_error("band.potential is required"))? {
            PotentialSpec::Linear { c, x0 } => {
                let (c, x0) = (*c, *x0);
                PlanarGrid::from_fn(nx, ny, delta, topology, move |x, _| c * (x0 - x))?
            }
            PotentialSpec::Constant { value } => {
                let v = *value;
                PlanarGrid::from_fn(nx, ny, delta, topology, move |_, _| v)?
            }
            PotentialSpec::Assembled => {
                let h = self.assembled()?;
                let scale = h.length() / length;
                PlanarGrid::from_fn(nx, ny, delta, topology, move |x, _| h.value(x * scale))?
            }
        };
        Ok(grid.with_boundary_curvature(b.h_minus, b.h_plus))
    }

    fn warped(&self) -> CliResult<WarpedBand> {
        let b = &self.band;
        let points = self.solver.points.ok_or_else(|| parse_error("solver.points is required"))?;
        let potential = b.potential.as_ref().ok_or_else(|| parse_error("band.potential is required"))?;
        let assembled = match potential {
            PotentialSpec::Assembled => Some(self.assembled()?),
            _ => None,
        };
        let length = match (&assembled, b.length) {
            (Some(h), None) => h.length(),
            (Some(_), Some(_)) => return Err(parse_error("band.length is fixed by the assembled potential")),
            (None, Some(l)) => l,
            (None, None) => return Err(parse_error("band.length is required")),
        };
        let ambient = b.ambient.as_ref().ok_or_else(|| parse_error("band.ambient is required"))?;
        let (lo, ambient_model) = match ambient {
            AmbientSpec::Flat => (0.0, None),
            AmbientSpec::Spherical { kappa, shift } => {
                let lo = shift - 0.5 * length;
                (lo, Some(ModelSpace::spherical(b.n, *kappa, lo, lo + length)?))
            }
        };
        let h: Box<dyn Fn(f64) -> (f64, f64) + Send + Sync> = match (potential, assembled) {
            (PotentialSpec::Linear { c, x0 }, _) => {
                let (c, x0) = (*c, *x0);
                Box::new(move |t| (c * (x0 - (t - lo)), -c))
            }
            (PotentialSpec::Constant { value }, _) => {
                let v = *value;
                Box::new(move |_| (v, 0.0))
            }
            (PotentialSpec::Assembled, Some(a)) => Box::new(move |t| a.eval(t - lo)),
            (PotentialSpec::Assembled, None) => unreachable!(),
        };
        let band = match ambient_model {
            Some(ms) => WarpedBand::from_model(&ms, points, h)?,
            None => WarpedBand::flat(b.n, Interval::new(lo, lo + length), points, h)?,
        };
        Ok(match self.solver.collar {
            Some(c) => band.with_collar(c)?,
            None => band,
        })
    }
}
