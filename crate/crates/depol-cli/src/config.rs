//! Experiment configuration: command-line flags merged over an optional JSON
//! config file, flags winning.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use depol::qstate::{canonical_state, StateLabel, StokesVector};
use depol::tomography::mub_inputs;

use crate::CliError;

/// Channel layout selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    SchemeI,
    SchemeII,
}

impl SchemeChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeChoice::SchemeI => "scheme_I",
            SchemeChoice::SchemeII => "scheme_II",
        }
    }

    pub fn channel(&self, angle_radians: f64) -> depol::optics::ChannelScheme {
        match self {
            SchemeChoice::SchemeI => depol::optics::ChannelScheme::scheme_i(angle_radians),
            SchemeChoice::SchemeII => depol::optics::ChannelScheme::scheme_ii(angle_radians),
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scheme_i" | "i" | "1" => Ok(SchemeChoice::SchemeI),
            "scheme_ii" | "ii" | "2" => Ok(SchemeChoice::SchemeII),
            other => Err(CliError::Usage(format!(
                "unknown scheme `{other}` (expected scheme_I or scheme_II)"
            ))),
        }
    }
}

/// A single angle, in degrees or as one of the symbolic special points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSpec {
    Degrees(f64),
    /// atan(1/√2) ≈ 35.264°: ellipsoid radii {2/3, 2/3, 1/3}.
    Magic1,
    /// atan(√2) ≈ 54.736°: the isotropic 1/3 sphere.
    Magic2,
}

impl AngleSpec {
    pub fn radians(&self) -> f64 {
        match self {
            AngleSpec::Degrees(d) => d.to_radians(),
            AngleSpec::Magic1 => (1.0 / 2f64.sqrt()).atan(),
            AngleSpec::Magic2 => 2f64.sqrt().atan(),
        }
    }

    pub fn degrees(&self) -> f64 {
        match self {
            AngleSpec::Degrees(d) => *d,
            _ => self.radians().to_degrees(),
        }
    }
}

impl FromStr for AngleSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let trimmed = s.trim();
        match trimmed.to_ascii_lowercase().as_str() {
            "magic1" => return Ok(AngleSpec::Magic1),
            "magic2" => return Ok(AngleSpec::Magic2),
            _ => {}
        }
        trimmed
            .parse::<f64>()
            .map(AngleSpec::Degrees)
            .map_err(|_| CliError::Usage(format!("cannot parse angle `{trimmed}`")))
    }
}

/// Inclusive sweep grid in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SweepGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepGrid {
    pub fn angles(&self) -> Result<Vec<f64>, CliError> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(CliError::Usage(format!("sweep step {} must be > 0", self.step)));
        }
        if self.stop < self.start {
            return Err(CliError::Usage(format!(
                "sweep stop {} is before start {}",
                self.stop, self.start
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

impl FromStr for SweepGrid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "sweep `{s}` must be start:stop:step in degrees"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("cannot parse sweep bound `{p}`")))
            })
            .collect::<Result<_, _>>()?;
        Ok(SweepGrid {
            start: nums[0],
            stop: nums[1],
            step: nums[2],
        })
    }
}

/// Execution modes of the commands that touch a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Theory,
    Unital3,
    Full4,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Theory => "theory",
            Mode::Unital3 => "unital3",
            Mode::Full4 => "full4",
        }
    }

    pub fn reconstruction(&self) -> Option<depol::tomography::ReconstructionMode> {
        match self {
            Mode::Theory => None,
            Mode::Unital3 => Some(depol::tomography::ReconstructionMode::Unital3),
            Mode::Full4 => Some(depol::tomography::ReconstructionMode::Full4),
        }
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "theory" => Ok(Mode::Theory),
            "unital3" => Ok(Mode::Unital3),
            "full4" => Ok(Mode::Full4),
            other => Err(CliError::Usage(format!(
                "unknown mode `{other}` (expected theory, unital3 or full4)"
            ))),
        }
    }
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!(
                "unknown format `{other}` (expected json or csv)"
            ))),
        }
    }
}

/// One entry of an input-state list: a label or a Stokes triple.
fn parse_input_item(item: &str) -> Result<StokesVector, CliError> {
    let trimmed = item.trim();
    match trimmed.to_ascii_lowercase().as_str() {
        "mub_a" => return Ok(mub_inputs()[0]),
        "mub_b" => return Ok(mub_inputs()[1]),
        "mub_c" => return Ok(mub_inputs()[2]),
        _ => {}
    }
    if let Ok(label) = trimmed.parse::<StateLabel>() {
        return Ok(canonical_state(label).density().to_stokes());
    }
    let parts: Vec<&str> = trimmed.split(',').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("cannot parse Stokes component `{p}`")))
            })
            .collect::<Result<_, _>>()?;
        return Ok(StokesVector::new(nums[0], nums[1], nums[2]));
    }
    Err(CliError::Usage(format!(
        "cannot parse input state `{trimmed}` (label or s1,s2,s3 triple)"
    )))
}

/// Input lists use `;` between items; a plain comma list is accepted when
/// every piece is a label, so `h,p,r` and `h;p;r` both work.
pub fn parse_inputs(s: &str) -> Result<Vec<StokesVector>, CliError> {
    let items: Vec<String> = if s.contains(';') {
        s.split(';').map(str::to_string).collect()
    } else {
        let chunks: Vec<&str> = s.split(',').collect();
        let all_labels = chunks.iter().all(|c| {
            let t = c.trim().to_ascii_lowercase();
            t.parse::<StateLabel>().is_ok() || t.starts_with("mub_")
        });
        if all_labels {
            chunks.iter().map(|c| c.to_string()).collect()
        } else {
            vec![s.to_string()]
        }
    };
    if items.is_empty() {
        return Err(CliError::Usage("empty input-state list".into()));
    }
    items.iter().map(|i| parse_input_item(i)).collect()
}

/// JSON mirror of the experiment configuration; every field optional, flags
/// override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scheme: Option<String>,
    pub angle_degrees: Option<AngleValue>,
    pub sweep: Option<SweepGrid>,
    pub inputs: Option<Vec<InputValue>>,
    pub exposure: Option<f64>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub output_path: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Degrees(f64),
    Symbolic(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Label(String),
    Triple([f64; 3]),
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
    }
}

/// Fully resolved experiment parameters for one command invocation.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scheme: Option<SchemeChoice>,
    pub angle: Option<AngleSpec>,
    pub sweep: Option<SweepGrid>,
    pub inputs: Option<Vec<StokesVector>>,
    pub exposure: f64,
    pub seed: Option<u64>,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub grid: (usize, usize),
}

pub const DEFAULT_EXPOSURE: f64 = 25_000.0;

impl Experiment {
    /// Merge flags over the optional config file.
    pub fn resolve(args: &crate::CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let scheme = match (&args.scheme, &file.scheme) {
            (Some(s), _) => Some(s.parse::<SchemeChoice>()?),
            (None, Some(s)) => Some(s.parse::<SchemeChoice>()?),
            (None, None) => None,
        };
        let angle = match (&args.angle, &file.angle_degrees) {
            (Some(a), _) => Some(a.parse::<AngleSpec>()?),
            (None, Some(AngleValue::Degrees(d))) => Some(AngleSpec::Degrees(*d)),
            (None, Some(AngleValue::Symbolic(s))) => Some(s.parse::<AngleSpec>()?),
            (None, None) => None,
        };
        let sweep = match (&args.sweep, &file.sweep) {
            (Some(s), _) => Some(s.parse::<SweepGrid>()?),
            (None, Some(g)) => Some(*g),
            (None, None) => None,
        };
        let inputs = match (&args.inputs, &file.inputs) {
            (Some(s), _) => Some(parse_inputs(s)?),
            (None, Some(list)) => Some(
                list.iter()
                    .map(|v| match v {
                        InputValue::Label(l) => parse_input_item(l),
                        InputValue::Triple(t) => Ok(StokesVector::new(t[0], t[1], t[2])),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            (None, None) => None,
        };
        let exposure = args.exposure.or(file.exposure).unwrap_or(DEFAULT_EXPOSURE);
        if exposure <= 0.0 {
            return Err(CliError::Usage(format!("exposure {exposure} must be > 0")));
        }
        let seed = args.seed.or(file.seed);
        let mode = match (&args.mode, &file.mode) {
            (Some(m), _) => m.parse::<Mode>()?,
            (None, Some(m)) => m.parse::<Mode>()?,
            (None, None) => Mode::Theory,
        };
        let out = args.out.clone().or(file.output_path);
        let format = match (&args.format, &file.format) {
            (Some(f), _) => Some(f.parse::<Format>()?),
            (None, Some(f)) => Some(f.parse::<Format>()?),
            (None, None) => None,
        };
        let grid = match &args.grid {
            Some(g) => parse_grid(g)?,
            None => (24, 48),
        };
        Ok(Experiment {
            scheme,
            angle,
            sweep,
            inputs,
            exposure,
            seed,
            mode,
            out,
            format,
            grid,
        })
    }

    pub fn require_scheme(&self) -> Result<SchemeChoice, CliError> {
        self.scheme
            .ok_or_else(|| CliError::Usage("--scheme is required".into()))
    }

    pub fn require_angle(&self) -> Result<AngleSpec, CliError> {
        self.angle
            .ok_or_else(|| CliError::Usage("--angle is required".into()))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Usage("--seed is required for stochastic modes".into())
        })
    }

    /// Format resolution: explicit flag, then output extension, then JSON.
    pub fn effective_format(&self) -> Format {
        if let Some(f) = self.format {
            return f;
        }
        if let Some(out) = &self.out {
            if let Some(ext) = out.extension().and_then(|e| e.to_str()) {
                if ext.eq_ignore_ascii_case("csv") {
                    return Format::Csv;
                }
            }
        }
        Format::Json
    }

    /// Default input states per mode when none are given.
    pub fn inputs_for_mode(&self) -> Result<Vec<StokesVector>, CliError> {
        if let Some(list) = &self.inputs {
            return Ok(list.clone());
        }
        let labels: &[StateLabel] = match self.mode {
            Mode::Unital3 => &[StateLabel::H, StateLabel::P, StateLabel::R],
            Mode::Full4 => &[StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::R],
            Mode::Theory => {
                return Err(CliError::Usage("theory mode takes no input states".into()))
            }
        };
        Ok(labels
            .iter()
            .map(|&l| canonical_state(l).density().to_stokes())
            .collect())
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("grid `{s}` must be LATxLON")));
    }
    let lat = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("bad grid latitude `{}`", parts[0])))?;
    let lon = parts[1]
        .trim()
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("bad grid longitude `{}`", parts[1])))?;
    if lat < 2 || lon < 3 {
        return Err(CliError::Usage("grid must be at least 2x3".into()));
    }
    Ok((lat, lon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_label_lists() {
        let v = parse_inputs("h,p,r").unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0].s1 - 1.0).abs() < 1e-12);

        let v = parse_inputs("mub_a;mub_b;mub_c").unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0].s3 + (2f64 / 3.0).sqrt()).abs() < 1e-12);

        let v = parse_inputs("h;0.5,0.5,0").unwrap();
        assert_eq!(v.len(), 2);
        assert!((v[1].s2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parse_angles() {
        assert_eq!("45".parse::<AngleSpec>().unwrap(), AngleSpec::Degrees(45.0));
        assert_eq!("magic2".parse::<AngleSpec>().unwrap(), AngleSpec::Magic2);
        assert!((AngleSpec::Magic2.radians() - 2f64.sqrt().atan()).abs() < 1e-15);
        assert!("up".parse::<AngleSpec>().is_err());
    }

    #[test]
    fn sweep_grid_inclusive() {
        let grid: SweepGrid = "0:90:2.5".parse().unwrap();
        let angles = grid.angles().unwrap();
        assert_eq!(angles.len(), 37);
        assert_eq!(angles[0], 0.0);
        assert_eq!(*angles.last().unwrap(), 90.0);
        assert!("0:90:0".parse::<SweepGrid>().unwrap().angles().is_err());
    }
}
