//! Scenario configuration: strict JSON parsing, `--set` overrides and defaulting.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;

use nmdis_core::channels::{Channel, ChannelLabel, JcParams, NmadParams, RtnParams};
use nmdis_core::spectral::{characteristic_frequencies, SpectralSettings, Window};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, ConfigIssue, Result};

pub const OUT_DIR_ENV: &str = "NMDIS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";
pub const DEFAULT_SAMPLES: usize = 8192;
pub const MIN_SAMPLES: usize = 16;
/// Periods of the slowest characteristic frequency covered by the default t_max.
pub const DEFAULT_PERIODS: f64 = 20.0;
/// t_max used when no source oscillates.
pub const FALLBACK_T_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    DecoherenceRate,
    TdRtn,
    TdNmad,
    CoherenceComposite,
    CpScan,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::DecoherenceRate,
        ScenarioKind::TdRtn,
        ScenarioKind::TdNmad,
        ScenarioKind::CoherenceComposite,
        ScenarioKind::CpScan,
        ScenarioKind::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::DecoherenceRate => "decoherence_rate",
            ScenarioKind::TdRtn => "td_rtn",
            ScenarioKind::TdNmad => "td_nmad",
            ScenarioKind::CoherenceComposite => "coherence_composite",
            ScenarioKind::CpScan => "cp_scan",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::DecoherenceRate => "canonical decoherence rate of RTN dephasing, with pole markers",
            ScenarioKind::TdRtn => "trace distance of the JC pair under RTN, with spectrum and attribution",
            ScenarioKind::TdNmad => "trace distance of the JC pair under NMAD, with spectrum and attribution",
            ScenarioKind::CoherenceComposite => "l1 coherence of |+> under NMAD then RTN, with spectrum and attribution",
            ScenarioKind::CpScan => "Choi test of intermediate maps of one channel on the time grid",
            ScenarioKind::Custom => "chosen witness over an ordered list of channels",
        }
    }

    /// Parameter blocks that must be present.
    fn required_blocks(self) -> &'static [ChannelLabel] {
        match self {
            ScenarioKind::DecoherenceRate => &[ChannelLabel::Rtn],
            ScenarioKind::TdRtn => &[ChannelLabel::Rtn, ChannelLabel::Jc],
            ScenarioKind::TdNmad => &[ChannelLabel::Nmad, ChannelLabel::Jc],
            ScenarioKind::CoherenceComposite => &[ChannelLabel::Rtn, ChannelLabel::Nmad],
            ScenarioKind::CpScan | ScenarioKind::Custom => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    TraceDistance,
    Coherence,
    DecoherenceRate,
}

impl Witness {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "trace_distance" => Some(Witness::TraceDistance),
            "coherence" => Some(Witness::Coherence),
            "decoherence_rate" => Some(Witness::DecoherenceRate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub witness: Witness,
    /// Channels in the order they act.
    pub channels: Vec<ChannelLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: BTreeSet<Format>,
}

/// Fully defaulted and validated scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtn: Option<RtnParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmad: Option<NmadParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jc: Option<JcParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomConfig>,
    pub grid: GridConfig,
    pub spectral: SpectralSettings,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn channel_params(&self, label: ChannelLabel) -> Option<Channel> {
        match label {
            ChannelLabel::Rtn => self.rtn.map(Channel::Rtn),
            ChannelLabel::Nmad => self.nmad.map(Channel::Nmad),
            ChannelLabel::Jc => self.jc.map(Channel::Jc),
        }
    }

    /// Channels in acting order for this scenario.
    pub fn channels(&self) -> Vec<Channel> {
        let labels: Vec<ChannelLabel> = match self.scenario {
            ScenarioKind::DecoherenceRate => vec![ChannelLabel::Rtn],
            ScenarioKind::TdRtn => vec![ChannelLabel::Jc, ChannelLabel::Rtn],
            ScenarioKind::TdNmad => vec![ChannelLabel::Jc, ChannelLabel::Nmad],
            ScenarioKind::CoherenceComposite => vec![ChannelLabel::Nmad, ChannelLabel::Rtn],
            ScenarioKind::CpScan => self.channel.into_iter().collect(),
            ScenarioKind::Custom => self.custom.as_ref().map(|c| c.channels.clone()).unwrap_or_default(),
        };
        labels.into_iter().filter_map(|l| self.channel_params(l)).collect()
    }
}

/// A `key.path=value` override from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    /// Values that parse as JSON are taken as such, anything else as a string.
    pub fn parse(s: &str) -> std::result::Result<Self, ConfigIssue> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| ConfigIssue::new("--set", format!("expected key=value, got `{s}`")))?;
        let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) {
            return Err(ConfigIssue::new("--set", format!("empty key segment in `{key}`")));
        }
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        Ok(Self { path, value })
    }

    fn apply(&self, root: &mut Value) -> std::result::Result<(), ConfigIssue> {
        let dotted = self.path.join(".");
        let mut node = root;
        for (i, seg) in self.path.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| ConfigIssue::new(dotted.clone(), "cannot descend into a non-object value"))?;
            if i + 1 == self.path.len() {
                obj.insert(seg.clone(), self.value.clone());
                return Ok(());
            }
            node = obj.entry(seg.clone()).or_insert_with(|| Value::Object(Map::new()));
        }
        Ok(())
    }
}

/// Parse, override and validate a configuration document.
///
/// Every violation is collected; the error lists all of them.
pub fn validate_config(raw: &str, overrides: &[Override]) -> Result<ScenarioConfig> {
    let default_dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    validate_config_with_dir(raw, overrides, default_dir)
}

/// [`validate_config`] with an explicit fallback output directory.
pub fn validate_config_with_dir(raw: &str, overrides: &[Override], default_dir: PathBuf) -> Result<ScenarioConfig> {
    let mut value: Value = serde_json::from_str(raw).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut issues = Vec::new();
    for o in overrides {
        if let Err(issue) = o.apply(&mut value) {
            issues.push(issue);
        }
    }
    Validator { issues, default_dir }.run(&value)
}

struct Validator {
    issues: Vec<ConfigIssue>,
    default_dir: PathBuf,
}

impl Validator {
    fn issue(&mut self, field: impl Into<String>, msg: impl Into<String>) {
        self.issues.push(ConfigIssue::new(field, msg));
    }

    fn run(mut self, root: &Value) -> Result<ScenarioConfig> {
        let Some(obj) = root.as_object() else {
            return Err(CliError::Config(vec![ConfigIssue::new("", "top level must be an object")]));
        };
        self.unknown_keys(
            obj,
            "",
            &["scenario", "rtn", "nmad", "jc", "channel", "custom", "grid", "spectral", "output"],
        );

        let scenario = match obj.get("scenario") {
            None => {
                self.issue("scenario", "missing");
                None
            }
            Some(Value::String(s)) => {
                let k = ScenarioKind::parse(s);
                if k.is_none() {
                    let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.as_str()).collect();
                    self.issue("scenario", format!("unknown scenario `{s}` (expected one of {})", names.join(", ")));
                }
                k
            }
            Some(_) => {
                self.issue("scenario", "must be a string");
                None
            }
        };

        let rtn = self.object(obj, "rtn").and_then(|o| self.rtn(o));
        let nmad = self.object(obj, "nmad").and_then(|o| self.nmad(o));
        let jc = self.object(obj, "jc").and_then(|o| self.jc(o));
        let present = |l: ChannelLabel| match l {
            ChannelLabel::Rtn => obj.contains_key("rtn"),
            ChannelLabel::Nmad => obj.contains_key("nmad"),
            ChannelLabel::Jc => obj.contains_key("jc"),
        };

        let channel = match obj.get("channel") {
            None => None,
            Some(v) => self.label(v, "channel"),
        };
        let custom = self.object(obj, "custom").and_then(|o| self.custom(o));

        if let Some(kind) = scenario {
            for &l in kind.required_blocks() {
                if !present(l) {
                    self.issue(l.as_str(), format!("block required by scenario `{}`", kind.as_str()));
                }
            }
            match kind {
                ScenarioKind::CpScan => match channel {
                    None if !obj.contains_key("channel") => {
                        self.issue("channel", "required by scenario `cp_scan` (one of rtn, nmad, jc)")
                    }
                    Some(l) if !present(l) => {
                        self.issue(l.as_str(), format!("block required by channel = \"{}\"", l.as_str()))
                    }
                    _ => {}
                },
                ScenarioKind::Custom => {
                    if !obj.contains_key("custom") {
                        self.issue("custom", "block required by scenario `custom`");
                    }
                    if let Some(c) = &custom {
                        let missing: BTreeSet<ChannelLabel> =
                            c.channels.iter().copied().filter(|&l| !present(l)).collect();
                        for l in missing {
                            self.issue(l.as_str(), "block required by custom.channels");
                        }
                    }
                }
                _ => {}
            }
        }

        let spectral = match self.object(obj, "spectral") {
            Some(o) => self.spectral(o),
            None => SpectralSettings::default(),
        };
        let output = match self.object(obj, "output") {
            Some(o) => self.output(o),
            None => Some(OutputConfig {
                directory: self.default_dir.clone(),
                formats: [Format::Csv, Format::Json].into(),
            }),
        };
        let grid_obj = self.object(obj, "grid");
        let (t_max, n_samples) = match grid_obj {
            Some(o) => self.grid(o),
            None => (None, Some(DEFAULT_SAMPLES)),
        };

        if !self.issues.is_empty() {
            return Err(CliError::Config(self.issues));
        }
        let (Some(scenario), Some(output), Some(n_samples)) = (scenario, output, n_samples) else {
            unreachable!("missing values are always reported as issues");
        };

        let mut cfg = ScenarioConfig {
            scenario,
            rtn,
            nmad,
            jc,
            channel,
            custom,
            grid: GridConfig {
                t_max: t_max.unwrap_or(FALLBACK_T_MAX),
                n_samples,
            },
            spectral,
            output,
        };
        if t_max.is_none() {
            cfg.grid.t_max = default_t_max(&cfg.channels());
        }
        Ok(cfg)
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, prefix: &str, allowed: &[&str]) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(join(prefix, key), "unknown key");
            }
        }
    }

    fn object<'a>(&mut self, obj: &'a Map<String, Value>, key: &str) -> Option<&'a Map<String, Value>> {
        match obj.get(key) {
            None => None,
            Some(Value::Object(o)) => Some(o),
            Some(_) => {
                self.issue(key, "must be an object");
                None
            }
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str, required: bool) -> Option<f64> {
        match obj.get(key) {
            None => {
                if required {
                    self.issue(join(prefix, key), "missing");
                }
                None
            }
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.issue(join(prefix, key), "must be a finite number");
                    None
                }
            },
        }
    }

    fn boolean(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<bool> {
        match obj.get(key) {
            None => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => {
                self.issue(join(prefix, key), "must be true or false");
                None
            }
        }
    }

    fn integer(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<usize> {
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_u64() {
                Some(n) => Some(n as usize),
                None => {
                    self.issue(join(prefix, key), "must be a non-negative integer");
                    None
                }
            },
        }
    }

    fn label(&mut self, v: &Value, field: &str) -> Option<ChannelLabel> {
        match v.as_str() {
            Some("rtn") => Some(ChannelLabel::Rtn),
            Some("nmad") => Some(ChannelLabel::Nmad),
            Some("jc") => Some(ChannelLabel::Jc),
            _ => {
                self.issue(field, format!("must be one of \"rtn\", \"nmad\", \"jc\", got {v}"));
                None
            }
        }
    }

    fn param_error(&mut self, block: &str, e: nmdis_core::Error) {
        match e {
            nmdis_core::Error::InvalidParameter { name, reason } => self.issue(join(block, name), reason),
            other => self.issue(block, other.to_string()),
        }
    }

    fn rtn(&mut self, o: &Map<String, Value>) -> Option<RtnParams> {
        self.unknown_keys(o, "rtn", &["a", "gamma"]);
        let a = self.number(o, "rtn", "a", true);
        let gamma = self.number(o, "rtn", "gamma", true);
        let p = RtnParams { a: a?, gamma: gamma? };
        match p.validate() {
            Ok(()) => Some(p),
            Err(e) => {
                self.param_error("rtn", e);
                None
            }
        }
    }

    fn nmad(&mut self, o: &Map<String, Value>) -> Option<NmadParams> {
        self.unknown_keys(o, "nmad", &["lambda_width", "gamma_m", "omega_0", "omega_c"]);
        let lambda_width = self.number(o, "nmad", "lambda_width", true);
        let gamma_m = self.number(o, "nmad", "gamma_m", true);
        let omega_0 = self.number(o, "nmad", "omega_0", false).unwrap_or(0.0);
        let omega_c = self.number(o, "nmad", "omega_c", false).unwrap_or(0.0);
        let p = NmadParams {
            lambda_width: lambda_width?,
            gamma_m: gamma_m?,
            omega_0,
            omega_c,
        };
        match p.validate() {
            Ok(()) => Some(p),
            Err(e) => {
                self.param_error("nmad", e);
                None
            }
        }
    }

    fn jc(&mut self, o: &Map<String, Value>) -> Option<JcParams> {
        self.unknown_keys(o, "jc", &["omega"]);
        let omega = self.number(o, "jc", "omega", true)?;
        Some(JcParams { omega })
    }

    fn custom(&mut self, o: &Map<String, Value>) -> Option<CustomConfig> {
        self.unknown_keys(o, "custom", &["witness", "channels"]);
        let witness = match o.get("witness") {
            None => {
                self.issue("custom.witness", "missing");
                None
            }
            Some(v) => {
                let w = v.as_str().and_then(Witness::parse);
                if w.is_none() {
                    self.issue(
                        "custom.witness",
                        format!("must be one of \"trace_distance\", \"coherence\", \"decoherence_rate\", got {v}"),
                    );
                }
                w
            }
        };
        let channels = match o.get("channels") {
            None => {
                self.issue("custom.channels", "missing");
                None
            }
            Some(Value::Array(items)) if items.is_empty() => {
                self.issue("custom.channels", "must list at least one channel");
                None
            }
            Some(Value::Array(items)) => {
                let labels: Vec<Option<ChannelLabel>> = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| self.label(v, &format!("custom.channels[{i}]")))
                    .collect();
                labels.into_iter().collect::<Option<Vec<_>>>()
            }
            Some(_) => {
                self.issue("custom.channels", "must be an array");
                None
            }
        };
        if let (Some(Witness::DecoherenceRate), Some(ch)) = (witness, &channels) {
            if ch.as_slice() != [ChannelLabel::Rtn] {
                self.issue(
                    "custom.channels",
                    "witness `decoherence_rate` needs exactly one pure dephasing channel: [\"rtn\"]",
                );
            }
        }
        Some(CustomConfig {
            witness: witness?,
            channels: channels?,
        })
    }

    fn grid(&mut self, o: &Map<String, Value>) -> (Option<f64>, Option<usize>) {
        self.unknown_keys(o, "grid", &["t_max", "n_samples"]);
        let t_max = self.number(o, "grid", "t_max", false);
        if let Some(t) = t_max {
            if t <= 0.0 {
                self.issue("grid.t_max", format!("must be > 0, got {t}"));
            }
        }
        let n = match o.get("n_samples") {
            None => Some(DEFAULT_SAMPLES),
            Some(_) => self.integer(o, "grid", "n_samples"),
        };
        if let Some(n) = n {
            if n < MIN_SAMPLES {
                self.issue("grid.n_samples", format!("must be >= {MIN_SAMPLES}, got {n}"));
            }
        }
        (t_max, n)
    }

    fn spectral(&mut self, o: &Map<String, Value>) -> SpectralSettings {
        self.unknown_keys(
            o,
            "spectral",
            &[
                "window",
                "detrend",
                "rel_threshold",
                "min_separation_bins",
                "match_tol",
                "angular_display",
            ],
        );
        let mut s = SpectralSettings::default();
        match o.get("window").map(|v| v.as_str()) {
            None => {}
            Some(Some("none")) => s.window = Window::None,
            Some(Some("hann")) => s.window = Window::Hann,
            Some(_) => self.issue("spectral.window", "must be \"none\" or \"hann\""),
        }
        if let Some(b) = self.boolean(o, "spectral", "detrend") {
            s.detrend = b;
        }
        if let Some(b) = self.boolean(o, "spectral", "angular_display") {
            s.angular_display = b;
        }
        if let Some(x) = self.number(o, "spectral", "rel_threshold", false) {
            if x > 0.0 && x < 1.0 {
                s.rel_threshold = x;
            } else {
                self.issue("spectral.rel_threshold", format!("must lie in (0, 1), got {x}"));
            }
        }
        if let Some(x) = self.number(o, "spectral", "match_tol", false) {
            if x > 0.0 && x <= 0.5 {
                s.match_tol = x;
            } else {
                self.issue("spectral.match_tol", format!("must lie in (0, 0.5], got {x}"));
            }
        }
        if let Some(n) = self.integer(o, "spectral", "min_separation_bins") {
            if n >= 1 {
                s.min_separation_bins = n;
            } else {
                self.issue("spectral.min_separation_bins", "must be >= 1");
            }
        }
        s
    }

    fn output(&mut self, o: &Map<String, Value>) -> Option<OutputConfig> {
        self.unknown_keys(o, "output", &["directory", "formats"]);
        let directory = match o.get("directory") {
            None => Some(self.default_dir.clone()),
            Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(_) => {
                self.issue("output.directory", "must be a non-empty string");
                None
            }
        };
        let formats = match o.get("formats") {
            None => Some([Format::Csv, Format::Json].into()),
            Some(Value::Array(items)) => {
                let mut set = BTreeSet::new();
                let mut ok = true;
                for (i, v) in items.iter().enumerate() {
                    match v.as_str() {
                        Some("csv") => ok &= set.insert(Format::Csv),
                        Some("json") => ok &= set.insert(Format::Json),
                        _ => {
                            self.issue(format!("output.formats[{i}]"), "must be \"csv\" or \"json\"");
                            ok = false;
                        }
                    }
                }
                if set.is_empty() && ok {
                    self.issue("output.formats", "must list at least one format");
                    ok = false;
                } else if !ok && items.iter().all(|v| matches!(v.as_str(), Some("csv" | "json"))) {
                    self.issue("output.formats", "duplicate entries");
                }
                ok.then_some(set)
            }
            Some(_) => {
                self.issue("output.formats", "must be an array");
                None
            }
        };
        Some(OutputConfig {
            directory: directory?,
            formats: formats?,
        })
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// 20 periods of the slowest characteristic frequency among `channels`.
pub fn default_t_max(channels: &[Channel]) -> f64 {
    channels
        .iter()
        .flat_map(|c| characteristic_frequencies(c).characteristic_angular_frequencies)
        .map(|c| c.angular)
        .filter(|w| *w > 0.0)
        .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.min(w))))
        .map_or(FALLBACK_T_MAX, |w| DEFAULT_PERIODS * 2.0 * PI / w)
}
