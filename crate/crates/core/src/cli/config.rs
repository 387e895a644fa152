//! Experiment configuration files.
//!
//! TOML with four sections. Parameter keys follow the usual LEACH parameter
//! names; every key is optional and defaults to the reference setup.
//!
//! ```toml
//! [field]
//! side = 100.0
//! n = 100
//! bs_preset = "center"      # center | corner | edge | far, or bs = [x, y]
//!
//! [radio]
//! E_elec = 50e-9            # 5e-9 for the low-power variant
//! eps_fs = 10e-12
//! eps_mp = 0.0013e-12
//! E_DA = 5e-9
//! # d_o = 70.0              # hard-code the crossover distance
//!
//! [protocol]
//! E_0 = 0.5
//! P_opt = 0.05
//! K = 4000
//! mode = "both"             # classic | adaptive | both
//! max_rounds = 50000
//! n_divisor_tracks_deaths = false
//! count_final_packet = true
//!
//! [experiment]
//! seed_count = 30           # or seeds = [1, 2, 3]
//! base_seed = 1
//! shared_topology = true
//! jobs = 1
//! out = "results"
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::election::ElectionMode;
use crate::engine::{ConfigIssue, SimConfig};
use crate::topology::Point;

pub const DEFAULT_SEED_COUNT: u64 = 30;
pub const DEFAULT_BASE_SEED: u64 = 1;
pub const DEFAULT_OUT_DIR: &str = "results";

/// Base-station placements used in the reference experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BsPreset {
    /// (50, 50), inside the field.
    Center,
    /// (120, 120)
    Corner,
    /// (40, 120)
    Edge,
    /// (140, 50)
    Far,
    Custom(Point),
}

impl BsPreset {
    pub const NAMED: [BsPreset; 4] = [BsPreset::Center, BsPreset::Corner, BsPreset::Edge, BsPreset::Far];

    pub fn position(&self) -> Point {
        match self {
            BsPreset::Center => Point::new(50.0, 50.0),
            BsPreset::Corner => Point::new(120.0, 120.0),
            BsPreset::Edge => Point::new(40.0, 120.0),
            BsPreset::Far => Point::new(140.0, 50.0),
            BsPreset::Custom(p) => *p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BsPreset::Center => "center",
            BsPreset::Corner => "corner",
            BsPreset::Edge => "edge",
            BsPreset::Far => "far",
            BsPreset::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for BsPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.position();
        write!(f, "{} ({}, {})", self.name(), p.x, p.y)
    }
}

impl FromStr for BsPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "center" => Ok(BsPreset::Center),
            "corner" => Ok(BsPreset::Corner),
            "edge" => Ok(BsPreset::Edge),
            "far" => Ok(BsPreset::Far),
            other => Err(format!(
                "unknown base-station preset `{other}` (expected center, corner, edge or far)"
            )),
        }
    }
}

/// Parse `X,Y`.
pub fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y but got `{s}`"))?;
    let x: f64 = x
        .trim()
        .parse()
        .map_err(|e| format!("bad x coordinate `{x}`: {e}"))?;
    let y: f64 = y
        .trim()
        .parse()
        .map_err(|e| format!("bad y coordinate `{y}`: {e}"))?;
    Ok(Point::new(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Classic,
    Adaptive,
    Both,
}

impl ModeSelection {
    pub fn modes(&self) -> Vec<ElectionMode> {
        match self {
            ModeSelection::Classic => vec![ElectionMode::Classic],
            ModeSelection::Adaptive => vec![ElectionMode::Adaptive],
            ModeSelection::Both => ElectionMode::ALL.to_vec(),
        }
    }
}

impl FromStr for ModeSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("both") {
            return Ok(ModeSelection::Both);
        }
        match s.parse::<ElectionMode>() {
            Ok(ElectionMode::Classic) => Ok(ModeSelection::Classic),
            Ok(ElectionMode::Adaptive) => Ok(ModeSelection::Adaptive),
            Err(_) => Err(format!("unknown mode `{s}` (expected classic, adaptive or both)")),
        }
    }
}

/// A complete, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Mode and seed in here are placeholders; each run overrides them.
    pub base: SimConfig,
    pub bs_preset: BsPreset,
    pub modes: ModeSelection,
    pub seeds: Vec<u64>,
    pub shared_topology: bool,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    /// The config for one (mode, seed) run.
    pub fn config_for(&self, mode: ElectionMode, seed: u64) -> SimConfig {
        SimConfig {
            mode,
            seed,
            ..self.base.clone()
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub field: RawField,
    #[serde(default)]
    pub radio: RawRadio,
    #[serde(default)]
    pub protocol: RawProtocol,
    #[serde(default)]
    pub experiment: RawExperiment,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawField {
    pub side: Option<f64>,
    pub n: Option<usize>,
    pub bs: Option<[f64; 2]>,
    pub bs_preset: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRadio {
    #[serde(rename = "E_elec", alias = "e_elec")]
    pub e_elec: Option<f64>,
    pub eps_fs: Option<f64>,
    pub eps_mp: Option<f64>,
    #[serde(rename = "E_DA", alias = "e_da")]
    pub e_da: Option<f64>,
    pub d_o: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProtocol {
    #[serde(rename = "E_0", alias = "e0")]
    pub e0: Option<f64>,
    #[serde(rename = "P_opt", alias = "popt")]
    pub popt: Option<f64>,
    #[serde(rename = "K", alias = "message_bits")]
    pub message_bits: Option<u64>,
    pub mode: Option<String>,
    pub max_rounds: Option<u64>,
    pub n_divisor_tracks_deaths: Option<bool>,
    pub count_final_packet: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExperiment {
    pub seeds: Option<Vec<u64>>,
    pub seed_count: Option<u64>,
    pub base_seed: Option<u64>,
    pub shared_topology: Option<bool>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub bs_preset: Option<String>,
    pub bs: Option<String>,
    pub seed_count: Option<u64>,
    pub base_seed: Option<u64>,
    pub mode: Option<String>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn parse_raw(text: &str) -> Result<RawConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

fn issue(field: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Merge file values, command-line overrides and defaults, then check every
/// invariant. All problems are reported at once.
pub fn build_spec(raw: RawConfig, ov: &Overrides) -> Result<ExperimentSpec, Vec<ConfigIssue>> {
    let mut issues = Vec::new();
    let mut base = SimConfig::default();

    if let Some(v) = raw.field.side {
        base.field.side = v;
    }
    if let Some(v) = raw.field.n {
        base.field.n = v;
    }
    if let Some(v) = raw.radio.e_elec {
        base.radio.e_elec = v;
    }
    if let Some(v) = raw.radio.eps_fs {
        base.radio.eps_fs = v;
    }
    if let Some(v) = raw.radio.eps_mp {
        base.radio.eps_mp = v;
    }
    if let Some(v) = raw.radio.e_da {
        base.radio.e_da = v;
    }
    base.radio.threshold_override = raw.radio.d_o;
    if let Some(v) = raw.protocol.e0 {
        base.e0 = v;
    }
    if let Some(v) = raw.protocol.popt {
        base.popt = v;
    }
    if let Some(v) = raw.protocol.message_bits {
        base.message_bits = v;
    }
    if let Some(v) = raw.protocol.max_rounds {
        base.max_rounds = v;
    }
    if let Some(v) = raw.protocol.n_divisor_tracks_deaths {
        base.n_divisor_tracks_deaths = v;
    }
    if let Some(v) = raw.protocol.count_final_packet {
        base.count_final_packet = v;
    }

    // Base station: --bs, --bs-preset, then the file's bs, then bs_preset.
    let bs_preset = if let Some(s) = &ov.bs {
        parse_point(s).map(BsPreset::Custom).map_err(|e| issue("--bs", e))
    } else if let Some(s) = &ov.bs_preset {
        s.parse::<BsPreset>().map_err(|e| issue("--bs-preset", e))
    } else if let Some([x, y]) = raw.field.bs {
        if raw.field.bs_preset.is_some() {
            Err(issue("field.bs", "give either bs or bs_preset, not both"))
        } else {
            Ok(BsPreset::Custom(Point::new(x, y)))
        }
    } else if let Some(s) = &raw.field.bs_preset {
        s.parse::<BsPreset>().map_err(|e| issue("field.bs_preset", e))
    } else {
        Ok(BsPreset::Center)
    };
    let bs_preset = bs_preset.unwrap_or_else(|e| {
        issues.push(e);
        BsPreset::Center
    });
    base.field.bs = bs_preset.position();

    let (mode_src, mode_key) = match (&ov.mode, &raw.protocol.mode) {
        (Some(m), _) => (Some(m.as_str()), "--mode"),
        (None, Some(m)) => (Some(m.as_str()), "protocol.mode"),
        (None, None) => (None, ""),
    };
    let modes = match mode_src {
        None => ModeSelection::Both,
        Some(s) => s.parse().unwrap_or_else(|e: String| {
            issues.push(issue(mode_key, e));
            ModeSelection::Both
        }),
    };

    let seeds = if ov.seed_count.is_some() || ov.base_seed.is_some() || raw.experiment.seeds.is_none() {
        let count = ov
            .seed_count
            .or(raw.experiment.seed_count)
            .unwrap_or(DEFAULT_SEED_COUNT);
        let base_seed = ov
            .base_seed
            .or(raw.experiment.base_seed)
            .unwrap_or(DEFAULT_BASE_SEED);
        (0..count).map(|i| base_seed.wrapping_add(i)).collect()
    } else {
        raw.experiment.seeds.clone().unwrap_or_default()
    };
    if seeds.is_empty() {
        let key = if ov.seed_count.is_some() {
            "--seeds"
        } else {
            "experiment.seeds"
        };
        issues.push(issue(key, "at least one seed is required"));
    }

    let jobs = ov.jobs.or(raw.experiment.jobs).unwrap_or(1);
    if jobs == 0 {
        issues.push(issue("--jobs", "must be >= 1"));
    }

    issues.extend(base.issues());
    if !issues.is_empty() {
        return Err(issues);
    }

    Ok(ExperimentSpec {
        base,
        bs_preset,
        modes,
        seeds,
        shared_topology: raw.experiment.shared_topology.unwrap_or(true),
        jobs,
        out_dir: ov
            .out
            .clone()
            .or(raw.experiment.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(text: &str, ov: &Overrides) -> Result<ExperimentSpec, Vec<ConfigIssue>> {
        build_spec(parse_raw(text).unwrap(), ov)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let spec = build("", &Overrides::default()).unwrap();
        assert_eq!(spec.base, SimConfig::default());
        assert_eq!(spec.bs_preset, BsPreset::Center);
        assert_eq!(spec.seeds, (1..=30).collect::<Vec<u64>>());
        assert_eq!(spec.modes, ModeSelection::Both);
        assert!(spec.shared_topology);
    }

    #[test]
    fn presets_match_reference_placements() {
        let want = [(50.0, 50.0), (120.0, 120.0), (40.0, 120.0), (140.0, 50.0)];
        for (preset, (x, y)) in BsPreset::NAMED.iter().zip(want) {
            assert_eq!(preset.position(), Point::new(x, y));
            assert_eq!(preset.name().parse::<BsPreset>().unwrap(), *preset);
        }
    }

    #[test]
    fn file_keys_are_applied() {
        let text = r#"
            [field]
            side = 200.0
            n = 50
            bs = [10.0, -5.0]
            [radio]
            E_elec = 5e-9
            d_o = 70.0
            [protocol]
            E_0 = 1.0
            P_opt = 0.1
            K = 2000
            mode = "adaptive"
            [experiment]
            seeds = [9, 4]
            out = "x"
        "#;
        let spec = build(text, &Overrides::default()).unwrap();
        assert_eq!(spec.base.field.side, 200.0);
        assert_eq!(spec.base.field.n, 50);
        assert_eq!(spec.base.field.bs, Point::new(10.0, -5.0));
        assert_eq!(spec.base.radio.e_elec, 5e-9);
        assert_eq!(spec.base.radio.distance_threshold(), 70.0);
        assert_eq!(spec.base.e0, 1.0);
        assert_eq!(spec.base.popt, 0.1);
        assert_eq!(spec.base.message_bits, 2000);
        assert_eq!(spec.modes, ModeSelection::Adaptive);
        assert_eq!(spec.seeds, [9, 4]);
        assert_eq!(spec.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides {
            bs: Some("1,2".into()),
            seed_count: Some(3),
            base_seed: Some(100),
            mode: Some("classic".into()),
            jobs: Some(4),
            ..Overrides::default()
        };
        let spec = build("[field]\nbs_preset = \"far\"\n[experiment]\nseeds = [1]", &ov).unwrap();
        assert_eq!(spec.base.field.bs, Point::new(1.0, 2.0));
        assert_eq!(spec.seeds, [100, 101, 102]);
        assert_eq!(spec.modes, ModeSelection::Classic);
        assert_eq!(spec.jobs, 4);
    }

    #[test]
    fn every_issue_is_reported() {
        let text = "[protocol]\nP_opt = 0.0\nE_0 = -0.5\n[experiment]\nseeds = []";
        let issues = build(text, &Overrides::default()).unwrap_err();
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields, ["experiment.seeds", "protocol.E_0", "protocol.P_opt"]);
    }

    #[test]
    fn bad_preset_and_mode() {
        let ov = Overrides {
            bs_preset: Some("moon".into()),
            mode: Some("fast".into()),
            ..Overrides::default()
        };
        let issues = build("", &ov).unwrap_err();
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields, ["--bs-preset", "--mode"]);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_raw("[radio]\neps_xx = 1.0").unwrap_err();
        assert!(err.contains("eps_xx"), "{err}");
    }
}
