//! Run configuration: flat `section.key = value` text or the equivalent JSON.
//!
//! ```text
//! # paper parameters
//! pulse.omega_max = 6.0
//! decay.gamma_a = 0.5
//! state.rho_mm = 0.7
//! protocol.settings = four_step
//! ```
//!
//! Missing keys fall back to the paper values (see [`RunConfig::default`]).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use stirap_tomo::random::random_block;
use stirap_tomo::{
    four_step_settings, DecayConfig, DensityMatrix, ProtocolSetting, PulseConfig, SignalMode, WidthConvention, C,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": {field}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Protocol {
    FourStep,
    /// (α, β) pairs.
    Settings(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pulse: PulseConfig<f64>,
    pub decay: DecayConfig<f64>,
    /// Block plus spectator weight, embedded in the four-level space.
    pub initial_state: DensityMatrix<f64>,
    pub protocol: Protocol,
    pub signal_mode: SignalMode,
    pub integrator_tol: f64,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pulse: PulseConfig::paper(),
            decay: DecayConfig::paper(0.0),
            initial_state: DensityMatrix::basis_state(stirap_tomo::Level::M),
            protocol: Protocol::FourStep,
            signal_mode: SignalMode::FinalPopulation,
            integrator_tol: 1e-9,
            output_path: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn settings(&self) -> Vec<ProtocolSetting<f64>> {
        match &self.protocol {
            Protocol::FourStep => four_step_settings(self.signal_mode),
            Protocol::Settings(pairs) => pairs
                .iter()
                .map(|&(alpha, beta)| ProtocolSetting { alpha, beta, signal_mode: self.signal_mode })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: source.clone(),
            line: None,
            field: None,
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&text, &source)
    }

    /// Parses either format; text starting with `{` is read as JSON.
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let entries =
            if text.trim_start().starts_with('{') { json_entries(text, source)? } else { flat_entries(text, source)? };
        build(entries, source)
    }
}

struct Entry {
    line: Option<usize>,
    value: String,
}

fn flat_entries(text: &str, source: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |field: Option<String>, message: String| ConfigError {
            source: source.to_string(),
            line: Some(i + 1),
            field,
            message,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(None, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(err(None, "missing key before `=`".into()));
        }
        if let Some(prev) = out.get(&key).and_then(|e: &Entry| e.line) {
            return Err(err(Some(key), format!("duplicate key (first set on line {prev})")));
        }
        out.insert(key, Entry { line: Some(i + 1), value: value.trim().to_string() });
    }
    Ok(out)
}

fn json_entries(text: &str, source: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        source: source.to_string(),
        line: Some(e.line()),
        field: None,
        message: format!("invalid JSON: {e}"),
    })?;
    let mut out = BTreeMap::new();
    flatten(&root, "", &mut out);
    Ok(out)
}

// Nested objects become dotted keys; arrays of (α, β) pairs become the text list form.
fn flatten(v: &Value, prefix: &str, out: &mut BTreeMap<String, Entry>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(child, &key, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), Entry { line: None, value: scalar_text(v) });
        }
    }
}

fn is_setting(v: &Value) -> bool {
    v.get("alpha").is_some() && v.get("beta").is_some()
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .map(|item| match item {
                Value::Array(pair) => pair.iter().map(scalar_text).collect::<Vec<_>>().join(":"),
                Value::Object(_) if is_setting(item) => {
                    format!("{}:{}", scalar_text(&item["alpha"]), scalar_text(&item["beta"]))
                }
                other => scalar_text(other),
            })
            .collect::<Vec<_>>()
            .join(", "),
        other => other.to_string(),
    }
}

const KEYS: &[&str] = &[
    "pulse.omega_max",
    "pulse.stokes_peak",
    "pulse.half_width",
    "pulse.width_convention",
    "pulse.delay_tau",
    "pulse.delta",
    "pulse.alpha",
    "pulse.beta",
    "decay.gamma_e",
    "decay.gamma_a",
    "state.rho_mm",
    "state.rho_nn",
    "state.rho_mn_re",
    "state.rho_mn_im",
    "state.spectator_weight",
    "state.random",
    "protocol.settings",
    "protocol.signal_mode",
    "run.integrator_tol",
    "run.output_path",
    "run.seed",
];

struct Reader<'a> {
    entries: BTreeMap<String, Entry>,
    source: &'a str,
}

impl Reader<'_> {
    fn error(&self, key: &str, message: String) -> ConfigError {
        ConfigError {
            source: self.source.to_string(),
            line: self.entries.get(key).and_then(|e| e.line),
            field: Some(key.to_string()),
            message,
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.text(key) {
            None => Ok(default),
            Some(s) => parse_real(s).ok_or_else(|| self.error(key, format!("expected a number, got `{s}`"))),
        }
    }

    fn opt_real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.text(key).map(|_| self.real(key, 0.0)).transpose()
    }
}

/// Accepts plain numbers and the constants `pi`, `pi/2`, `pi/4`, optionally negated.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    let v = match body {
        "pi" => std::f64::consts::PI,
        "pi/2" => std::f64::consts::FRAC_PI_2,
        "pi/4" => std::f64::consts::FRAC_PI_4,
        _ => return s.parse::<f64>().ok().filter(|x| x.is_finite()),
    };
    Some(sign * v)
}

fn build(entries: BTreeMap<String, Entry>, source: &str) -> Result<RunConfig, ConfigError> {
    let r = Reader { entries, source };
    if let Some(key) = r.entries.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(r.error(key, "unknown key".into()));
    }
    let d = RunConfig::default();

    let mut pulse = PulseConfig {
        omega_max: r.real("pulse.omega_max", d.pulse.omega_max)?,
        half_width: r.real("pulse.half_width", d.pulse.half_width)?,
        delay: r.real("pulse.delay_tau", d.pulse.delay)?,
        alpha: r.real("pulse.alpha", d.pulse.alpha)?,
        beta: r.real("pulse.beta", d.pulse.beta)?,
        delta: r.real("pulse.delta", d.pulse.delta)?,
        stokes_peak: r.opt_real("pulse.stokes_peak")?,
        width: d.pulse.width,
    };
    if let Some(s) = r.text("pulse.width_convention") {
        pulse.width = WidthConvention::parse(s).ok_or_else(|| {
            r.error("pulse.width_convention", format!("expected sigma, amplitude_1e or hwhm, got `{s}`"))
        })?;
    }
    pulse.validate().map_err(|e| r.error(pulse_field(&e.to_string()), e.to_string()))?;

    let decay = DecayConfig {
        gamma_e: r.real("decay.gamma_e", d.decay.gamma_e)?,
        gamma_a: r.real("decay.gamma_a", d.decay.gamma_a)?,
    };
    decay.validate().map_err(|e| {
        let key = if decay.gamma_e < 0.0 { "decay.gamma_e" } else { "decay.gamma_a" };
        r.error(key, e.to_string())
    })?;

    let seed = match r.text("run.seed") {
        None => d.seed,
        Some(s) => s.parse().map_err(|_| r.error("run.seed", format!("expected an unsigned integer, got `{s}`")))?,
    };

    let random = match r.text("state.random") {
        None => false,
        Some("true") => true,
        Some("false") => false,
        Some(s) => return Err(r.error("state.random", format!("expected true or false, got `{s}`"))),
    };
    let initial_state = if random {
        if let Some(key) = ["state.rho_mm", "state.rho_nn", "state.rho_mn_re", "state.rho_mn_im"]
            .into_iter()
            .find(|k| r.entries.contains_key(*k))
        {
            return Err(r.error(key, "cannot be combined with state.random = true".into()));
        }
        random_block(&mut ChaCha8Rng::seed_from_u64(seed))
    } else {
        let mm = r.real("state.rho_mm", 1.0)?;
        let nn = r.real("state.rho_nn", 0.0)?;
        let mn = C::new(r.real("state.rho_mn_re", 0.0)?, r.real("state.rho_mn_im", 0.0)?);
        let spectator = r.real("state.spectator_weight", 0.0)?;
        DensityMatrix::from_elements(mm, nn, mn, spectator).map_err(|e| ConfigError {
            source: source.to_string(),
            line: None,
            field: Some("state".into()),
            message: e.to_string(),
        })?
    };

    let protocol = match r.text("protocol.settings") {
        None | Some("four_step") => Protocol::FourStep,
        Some(list) => Protocol::Settings(parse_settings(list).map_err(|m| r.error("protocol.settings", m))?),
    };
    let signal_mode = match r.text("protocol.signal_mode") {
        None => d.signal_mode,
        Some(s) => SignalMode::parse(s)
            .ok_or_else(|| r.error("protocol.signal_mode", format!("expected final or fluorescence, got `{s}`")))?,
    };
    for (alpha, _) in match &protocol {
        Protocol::Settings(p) => p.as_slice(),
        Protocol::FourStep => &[],
    } {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(alpha) {
            return Err(r.error("protocol.settings", format!("alpha = {alpha} outside [0, pi/2]")));
        }
    }

    let integrator_tol = r.real("run.integrator_tol", d.integrator_tol)?;
    if integrator_tol <= 0.0 {
        return Err(r.error("run.integrator_tol", format!("must be positive, got {integrator_tol}")));
    }

    Ok(RunConfig {
        pulse,
        decay,
        initial_state,
        protocol,
        signal_mode,
        integrator_tol,
        output_path: r.text("run.output_path").map(PathBuf::from),
        seed,
    })
}

fn pulse_field(message: &str) -> &'static str {
    for (needle, key) in [
        ("omega_max", "pulse.omega_max"),
        ("half_width", "pulse.half_width"),
        ("alpha", "pulse.alpha"),
        ("stokes_peak", "pulse.stokes_peak"),
    ] {
        if message.contains(needle) {
            return key;
        }
    }
    "pulse"
}

fn parse_settings(list: &str) -> Result<Vec<(f64, f64)>, String> {
    let pairs: Vec<(f64, f64)> = list
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (a, b) = item.split_once(':').ok_or_else(|| format!("expected `alpha:beta`, got `{item}`"))?;
            let a = parse_real(a).ok_or_else(|| format!("bad alpha `{a}`"))?;
            let b = parse_real(b).ok_or_else(|| format!("bad beta `{b}`"))?;
            Ok((a, b))
        })
        .collect::<Result<_, String>>()?;
    if pairs.len() < 4 {
        return Err(format!("need at least 4 settings, got {}", pairs.len()));
    }
    Ok(pairs)
}
