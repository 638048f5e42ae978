//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bohr_chowla::beatty::BeattySequence;
use bohr_chowla::bohr::{BohrSet, ConvexRegion};
use bohr_chowla::correlator::{CorrelationSpec, Expectation, Factor};
use bohr_chowla::multfunc::{characters_mod, memory_budget, Family, MultiplicativeFunction};
use bohr_chowla::realfield::{ExactReal, NumberField};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Deserialize;

pub const EXPERIMENT_SCHEMA: &str = "bohr-chowla/experiment/1";

/// A config error tied to the key that caused it.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError { key: key.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

/// A field element, either as an expression (`"sqrt2 + 1/4"`) or as a coefficient
/// vector in the field basis.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Number {
    Scalar(Scalar),
    Coeffs(Vec<Scalar>),
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub multiquadratic: Option<Vec<u64>>,
    /// Path to a field definition file, relative to the config.
    pub definition: Option<PathBuf>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub x_max: u64,
    #[serde(default = "ten")]
    pub checkpoint_ratio: f64,
    pub threads: Option<usize>,
    /// Bytes; defaults to the environment value.
    pub memory_budget: Option<u64>,
    pub twist: Option<Number>,
    /// Accepted and ignored: nothing on the primary path is random.
    #[allow(dead_code)]
    pub seed: Option<u64>,
}

fn ten() -> f64 {
    10.0
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct FactorSection {
    pub function: String,
    pub alpha: Number,
    pub beta: Option<Number>,
    /// Value at non-positive arguments.
    pub extension: Option<f64>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSection {
    pub phase: Vec<Number>,
    /// One `[lo, hi]` pair per phase; half-open sides.
    #[serde(rename = "box")]
    pub sides: Vec<[Number; 2]>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_label() -> String {
    "B".into()
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ExpectSection {
    pub value: Option<f64>,
    pub value_im: Option<f64>,
    pub tolerance: Option<f64>,
    pub note: Option<String>,
    pub threshold: Option<f64>,
    pub slack: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct BohrSection {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_window")]
    pub limit: u64,
    /// Tolerance on `|log - natural|` for the indicator averages.
    #[serde(default = "default_averaging_tolerance")]
    pub averaging_tolerance: f64,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

fn default_window() -> u64 {
    100_000
}

fn default_averaging_tolerance() -> f64 {
    0.02
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub epsilon: Option<f64>,
    pub window: Option<i64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct KpointSection {
    pub r: Option<u64>,
    pub w: Option<Vec<Scalar>>,
    pub eta: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// `require` or `report-only`.
    pub policy: Option<String>,
    pub pairs: Option<Vec<[u64; 2]>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: String,
    #[serde(default)]
    pub field: FieldSection,
    pub run: RunSection,
    #[serde(default, rename = "factor")]
    pub factors: Vec<FactorSection>,
    pub restriction: Option<RestrictionSection>,
    #[serde(default)]
    pub expect: ExpectSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub bohr: BohrSection,
    #[serde(default)]
    pub partition: PartitionSection,
    #[serde(default)]
    pub kpoint: KpointSection,
    #[serde(default)]
    pub verify: VerifySection,
}

/// A parsed and checked experiment.
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub dir: PathBuf,
    pub field: Arc<NumberField>,
    pub factors: Vec<Factor>,
    pub twist: ExactReal,
    pub restriction: Option<BohrSet>,
    pub memory_budget: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("{}: {}", path.display(), e)))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &dir)
    }

    /// Parses config text; relative paths resolve against `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(toml_error)?;
        if raw.schema != EXPERIMENT_SCHEMA {
            return Err(ConfigError::new("schema", format!("expected \"{}\", found \"{}\"", EXPERIMENT_SCHEMA, raw.schema)));
        }
        let field = build_field(&raw.field, dir)?;
        let mut factors = Vec::new();
        for (i, fc) in raw.factors.iter().enumerate() {
            let key = |k: &str| format!("factor[{}].{}", i, k);
            let mut f = parse_function(&fc.function).map_err(|m| ConfigError::new(key("function"), m))?;
            if let Some(e) = fc.extension {
                f = f.with_extension(e);
            }
            let alpha = number(&field, &fc.alpha, &key("alpha"))?;
            let beta = match &fc.beta {
                Some(b) => number(&field, b, &key("beta"))?,
                None => ExactReal::zero(&field),
            };
            let seq = BeattySequence::new(alpha, beta).map_err(|e| ConfigError::new(key("alpha"), e))?;
            factors.push(Factor::new(f, seq));
        }
        let twist = match &raw.run.twist {
            Some(t) => number(&field, t, "run.twist")?,
            None => ExactReal::zero(&field),
        };
        let restriction = raw.restriction.as_ref().map(|r| build_restriction(&field, r)).transpose()?;
        if raw.run.x_max < 10 {
            return Err(ConfigError::new("run.x_max", "must be at least 10"));
        }
        if !(raw.run.checkpoint_ratio > 1.0) {
            return Err(ConfigError::new("run.checkpoint_ratio", "must exceed 1"));
        }
        if raw.run.threads == Some(0) {
            return Err(ConfigError::new("run.threads", "must be positive"));
        }
        let budget = raw.run.memory_budget.unwrap_or_else(memory_budget);
        let cfg = ExperimentConfig { raw, dir: dir.to_path_buf(), field, factors, twist, restriction, memory_budget: budget };
        cfg.check_budget()?;
        Ok(cfg)
    }

    /// Table sizes implied by `X_max · max α` must fit the memory budget.
    fn check_budget(&self) -> Result<()> {
        let x = self.raw.run.x_max as f64;
        for (i, fc) in self.factors.iter().enumerate() {
            let top = fc.seq.alpha().to_f64() * x + fc.seq.beta().to_f64() + 1.0;
            let bytes = match fc.f.family() {
                Family::Constant => 0.0,
                Family::Liouville => top / 8.0,
                _ => 8.0 * (top + 1.0),
            };
            if bytes > self.memory_budget as f64 {
                return Err(ConfigError::new(
                    "run.x_max",
                    format!(
                        "table for factor[{}] needs about {:.0} bytes, over the memory budget of {}",
                        i, bytes, self.memory_budget
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn require_factors(&self, n: Option<usize>) -> Result<()> {
        match n {
            Some(n) if self.factors.len() != n => {
                Err(ConfigError::new("factor", format!("expected {} factors, found {}", n, self.factors.len())))
            }
            None if self.factors.is_empty() => Err(ConfigError::new("factor", "at least one factor is required")),
            _ => Ok(()),
        }
    }

    pub fn spec(&self) -> bohr_chowla::Result<CorrelationSpec> {
        let mut spec = CorrelationSpec::new(self.factors.clone(), self.raw.run.x_max)?
            .with_twist(self.twist.clone())
            .with_ratio(self.raw.run.checkpoint_ratio);
        if let Some(b) = &self.restriction {
            spec = spec.with_restriction(b.clone());
        }
        Ok(spec)
    }

    /// The `[expect]` section as an expectation; a value takes precedence over a threshold.
    pub fn expectation(&self) -> Result<Expectation> {
        let e = &self.raw.expect;
        if let Some(v) = e.value {
            let tolerance = e.tolerance.ok_or_else(|| ConfigError::new("expect.tolerance", "required with expect.value"))?;
            return Ok(Expectation::Value {
                value: Complex64::new(v, e.value_im.unwrap_or(0.0)),
                tolerance,
                note: e.note.clone().unwrap_or_else(|| "value from config".into()),
            });
        }
        if let Some(t) = e.threshold {
            return Ok(Expectation::Small { threshold: t, slack: e.slack.unwrap_or(0.0) });
        }
        Ok(Expectation::Nothing)
    }

    pub fn output_path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.dir.join(p))
    }

    pub fn kpoint_w(&self) -> Result<Option<Vec<BigRational>>> {
        let Some(w) = &self.raw.kpoint.w else { return Ok(None) };
        w.iter()
            .enumerate()
            .map(|(i, s)| rational(s).map_err(|m| ConfigError::new(format!("kpoint.w[{}]", i), m)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn toml_error(e: toml::de::Error) -> ConfigError {
    let msg = e.message().to_string();
    // serde reports unknown keys as "unknown field `k`"; surface `k` as the key
    let key = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
        .map(str::to_string)
        .unwrap_or_else(|| "<syntax>".into());
    let line = e.span().map(|s| format!(" (byte {})", s.start)).unwrap_or_default();
    ConfigError::new(key, format!("{}{}", msg.trim(), line))
}

fn build_field(s: &FieldSection, dir: &Path) -> Result<Arc<NumberField>> {
    match (&s.multiquadratic, &s.definition) {
        (Some(_), Some(_)) => Err(ConfigError::new("field", "give either multiquadratic or definition, not both")),
        (Some(r), None) => NumberField::multiquadratic(r).map_err(|e| ConfigError::new("field.multiquadratic", e)),
        (None, Some(p)) => {
            let path = dir.join(p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ConfigError::new("field.definition", format!("{}: {}", path.display(), e)))?;
            NumberField::from_definition(&text).map_err(|e| ConfigError::new("field.definition", e))
        }
        (None, None) => Ok(NumberField::rationals()),
    }
}

fn scalar_text(s: &Scalar) -> String {
    match s {
        Scalar::Int(i) => i.to_string(),
        Scalar::Text(t) => t.clone(),
    }
}

fn rational(s: &Scalar) -> std::result::Result<BigRational, String> {
    let q = NumberField::rationals();
    ExactReal::parse(&q, &scalar_text(s))
        .ok()
        .and_then(|x| x.to_rational())
        .ok_or_else(|| format!("`{}` is not a rational number", scalar_text(s)))
}

pub fn number(field: &Arc<NumberField>, n: &Number, key: &str) -> Result<ExactReal> {
    match n {
        Number::Scalar(s) => ExactReal::parse(field, &scalar_text(s)).map_err(|e| ConfigError::new(key, e)),
        Number::Coeffs(cs) => {
            let coeffs = cs
                .iter()
                .enumerate()
                .map(|(i, c)| rational(c).map_err(|m| ConfigError::new(format!("{}[{}]", key, i), m)))
                .collect::<Result<Vec<_>>>()?;
            ExactReal::new(field, coeffs).map_err(|e| ConfigError::new(key, e))
        }
    }
}

fn build_restriction(field: &Arc<NumberField>, r: &RestrictionSection) -> Result<BohrSet> {
    if r.phase.len() != r.sides.len() {
        return Err(ConfigError::new(
            "restriction.box",
            format!("{} sides for {} phases", r.sides.len(), r.phase.len()),
        ));
    }
    let phase = r
        .phase
        .iter()
        .enumerate()
        .map(|(i, p)| number(field, p, &format!("restriction.phase[{}]", i)))
        .collect::<Result<Vec<_>>>()?;
    let sides = r
        .sides
        .iter()
        .enumerate()
        .map(|(i, [lo, hi])| {
            let k = format!("restriction.box[{}]", i);
            Ok((number(field, lo, &k)?, number(field, hi, &k)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let region = ConvexRegion::boxed(field, sides).map_err(|e| ConfigError::new("restriction.box", e))?;
    BohrSet::new(phase, region, r.label.clone()).map_err(|e| ConfigError::new("restriction", e))
}

/// `liouville`, `one`, `mobius`, `coprime:m`, `character:q:k` (the `k`-th real
/// character mod `q`).
pub fn parse_function(name: &str) -> std::result::Result<MultiplicativeFunction, String> {
    let parts: Vec<&str> = name.trim().split(':').collect();
    let int = |s: &str| s.parse::<u64>().map_err(|_| format!("`{}` is not a positive integer", s));
    match parts.as_slice() {
        ["liouville"] => Ok(MultiplicativeFunction::liouville()),
        ["one"] => Ok(MultiplicativeFunction::one()),
        ["mobius"] => Ok(MultiplicativeFunction::custom("mobius", false, |_, k| if k == 1 { -1.0 } else { 0.0 })),
        ["coprime", m] => {
            let m = int(m)?;
            if m == 0 {
                return Err("coprime modulus must be positive".into());
            }
            Ok(MultiplicativeFunction::coprime_to(m))
        }
        ["character", q, k] => {
            let (q, k) = (int(q)?, int(k)? as usize);
            let reals: Vec<Vec<i8>> =
                characters_mod(q).map_err(|e| e.to_string())?.iter().filter_map(|c| c.real_values()).collect();
            let values = reals
                .get(k)
                .cloned()
                .ok_or_else(|| format!("there are only {} real characters mod {}", reals.len(), q))?;
            MultiplicativeFunction::real_character(format!("chi{}_{}", q, k), values).map_err(|e| e.to_string())
        }
        _ => Err(format!("unknown function `{}`", name)),
    }
}
