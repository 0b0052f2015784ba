//! JSON experiment configuration and its validation.
//!
//! Validation walks the whole document and reports every problem it finds,
//! each tagged with a JSON path such as `$.channel.kraus[1]`.

use std::fmt;
use std::path::{Path, PathBuf};

use ergolab::free_shift::ReducedWord;
use ergolab::rotation::{RotationSystem, DEFAULT_DEGREE};
use ergolab::weighted::BesicovitchGenerator;
use ergolab::{KrausChannel, SquareMatrix, C64};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classify,
    Cesaro,
    TensorCheck,
    Rotation,
    FreeShift,
    Weighted,
    Subsequence,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Classify,
        Experiment::Cesaro,
        Experiment::TensorCheck,
        Experiment::Rotation,
        Experiment::FreeShift,
        Experiment::Weighted,
        Experiment::Subsequence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Cesaro => "cesaro",
            Experiment::TensorCheck => "tensor-check",
            Experiment::Rotation => "rotation",
            Experiment::FreeShift => "free-shift",
            Experiment::Weighted => "weighted",
            Experiment::Subsequence => "subsequence",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    fn default_n_max(self) -> usize {
        match self {
            Experiment::Rotation => 1000,
            Experiment::Weighted | Experiment::Subsequence => 10_000,
            _ => 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A channel together with the text or JSON it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct NamedChannel {
    pub label: String,
    pub channel: KrausChannel,
}

#[derive(Clone, Debug, Serialize)]
pub struct Observable {
    pub label: String,
    pub matrix: SquareMatrix,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    Generator(String),
    Explicit(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSequence {
    /// `k_m = step · m`, `m = 0, 1, …`.
    Step(usize),
    Explicit(Vec<usize>),
}

impl IndexSequence {
    pub fn materialize(&self, n: usize) -> Vec<usize> {
        match self {
            IndexSequence::Step(s) => (0..n).map(|m| s * m).collect(),
            IndexSequence::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    Classify {
        channel: NamedChannel,
    },
    Cesaro {
        channel: NamedChannel,
        observables: Vec<Observable>,
    },
    TensorCheck {
        first: NamedChannel,
        second: NamedChannel,
    },
    Rotation {
        alpha: String,
        degree: usize,
    },
    FreeShift {
        word: String,
        n_list: Vec<usize>,
        max_length: usize,
    },
    Weighted {
        channel: NamedChannel,
        observables: Vec<Observable>,
        weights: WeightSpec,
        generator: Option<String>,
    },
    Subsequence {
        channel: NamedChannel,
        observables: Vec<Observable>,
        k_seq: IndexSequence,
    },
}

/// A fully validated experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub system: SystemSpec,
    pub n_max: usize,
    pub tol: Option<f64>,
    pub format: Format,
    /// Not part of the configuration hash.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

/// One validation failure located by JSON path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn issues(&self) -> &[ConfigIssue] {
        &self.0
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KNOWN_KEYS: [&str; 16] = [
    "experiment",
    "channel",
    "second",
    "observables",
    "n_max",
    "tol",
    "alpha",
    "degree",
    "word",
    "n_list",
    "max_length",
    "weights",
    "generator",
    "k_seq",
    "format",
    "out",
];

/// Reads and validates a configuration file. Relative channel paths are
/// resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    let value = read_config_value(path)?;
    parse_config(&value, path.parent().unwrap_or(Path::new(".")))
}

pub fn read_config_value(path: &Path) -> Result<Value, ConfigErrors> {
    let mut errs = ConfigErrors::default();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            errs.push("$", format!("cannot read {}: {e}", path.display()));
            return Err(errs);
        }
    };
    serde_json::from_str(&text).map_err(|e| {
        errs.push("$", format!("malformed JSON: {e}"));
        errs
    })
}

pub fn parse_config(value: &Value, base_dir: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errs = ConfigErrors::default();
    let Some(obj) = value.as_object() else {
        errs.push("$", "configuration must be a JSON object");
        return Err(errs);
    };
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            errs.push(format!("$.{key}"), "unknown key");
        }
    }
    let experiment = match obj.get("experiment") {
        None => {
            errs.push("$.experiment", "missing");
            None
        }
        Some(Value::String(s)) => {
            let e = Experiment::from_name(s);
            if e.is_none() {
                errs.push("$.experiment", format!("unknown experiment kind {s:?}"));
            }
            e
        }
        Some(_) => {
            errs.push("$.experiment", "must be a string");
            None
        }
    };

    let n_max = match obj.get("n_max") {
        None => experiment.map(Experiment::default_n_max),
        Some(v) => match v.as_u64() {
            Some(n) if n >= 2 => Some(n as usize),
            Some(_) => {
                errs.push("$.n_max", "horizon ≥ 2 required");
                None
            }
            None => {
                errs.push("$.n_max", "must be a nonnegative integer");
                None
            }
        },
    };
    let tol = match obj.get("tol") {
        None => None,
        Some(v) => match v.as_f64() {
            Some(t) if t > 0.0 && t.is_finite() => Some(t),
            _ => {
                errs.push("$.tol", "tolerance must be a positive number");
                None
            }
        },
    };
    let format = match obj.get("format") {
        None => Format::Csv,
        Some(v) => match v.as_str().and_then(Format::from_name) {
            Some(f) => f,
            None => {
                errs.push("$.format", "must be \"csv\" or \"json\"");
                Format::Csv
            }
        },
    };
    let out_dir = match obj.get("out") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => {
            errs.push("$.out", "must be a string");
            PathBuf::from("out")
        }
    };

    let system = experiment.and_then(|e| parse_system(e, obj, base_dir, &mut errs));

    match (experiment, system, n_max) {
        (Some(experiment), Some(system), Some(n_max)) if errs.0.is_empty() => Ok(ExperimentConfig {
            experiment,
            system,
            n_max,
            tol,
            format,
            out_dir,
        }),
        _ => Err(errs),
    }
}

fn parse_system(
    e: Experiment,
    obj: &Map<String, Value>,
    base: &Path,
    errs: &mut ConfigErrors,
) -> Option<SystemSpec> {
    let channel = |key: &str, errs: &mut ConfigErrors| match obj.get(key) {
        Some(v) => parse_channel(v, &format!("$.{key}"), base, errs),
        None => {
            errs.push(format!("$.{key}"), "missing");
            None
        }
    };
    let observables = |dim: Option<usize>, errs: &mut ConfigErrors| {
        let dim = dim?;
        match obj.get("observables") {
            None => Some(matrix_units(dim)),
            Some(v) => parse_observables(v, dim, errs),
        }
    };
    match e {
        Experiment::Classify => Some(SystemSpec::Classify {
            channel: channel("channel", errs)?,
        }),
        Experiment::Cesaro => {
            let ch = channel("channel", errs);
            let obs = observables(ch.as_ref().map(|c| c.channel.dim()), errs);
            Some(SystemSpec::Cesaro {
                channel: ch?,
                observables: obs?,
            })
        }
        Experiment::TensorCheck => {
            let first = channel("channel", errs);
            let second = match obj.get("second") {
                Some(v) => parse_channel(v, "$.second", base, errs),
                None => first.clone(),
            };
            Some(SystemSpec::TensorCheck {
                first: first?,
                second: second?,
            })
        }
        Experiment::Rotation => {
            let alpha = match obj.get("alpha") {
                None => Some("golden".to_string()),
                Some(Value::String(s)) => Some(s.clone()),
                Some(Value::Number(n)) => Some(n.to_string()),
                Some(_) => {
                    errs.push("$.alpha", "must be \"golden\", \"sqrt2\" or a number");
                    None
                }
            };
            let degree = usize_field(obj, "degree", DEFAULT_DEGREE, 1, errs);
            if let (Some(a), Some(d)) = (&alpha, degree) {
                if let Err(err) = RotationSystem::from_name(a, d) {
                    errs.push("$.alpha", err.to_string());
                    return None;
                }
            }
            Some(SystemSpec::Rotation {
                alpha: alpha?,
                degree: degree?,
            })
        }
        Experiment::FreeShift => {
            let word = match obj.get("word") {
                None => Some("g0".to_string()),
                Some(Value::String(s)) => match ReducedWord::parse(s) {
                    Ok(_) => Some(s.clone()),
                    Err(err) => {
                        errs.push("$.word", err.to_string());
                        None
                    }
                },
                Some(_) => {
                    errs.push("$.word", "must be a string such as \"g0 g1^-1\"");
                    None
                }
            };
            let n_list = match obj.get("n_list") {
                None => Some(vec![4, 9, 16, 25]),
                Some(Value::Array(items)) if !items.is_empty() => {
                    let mut out = Vec::new();
                    for (k, v) in items.iter().enumerate() {
                        match v.as_u64() {
                            Some(n) if n >= 1 => out.push(n as usize),
                            _ => errs.push(format!("$.n_list[{k}]"), "must be a positive integer"),
                        }
                    }
                    (out.len() == items.len()).then_some(out)
                }
                Some(_) => {
                    errs.push("$.n_list", "must be a nonempty array of positive integers");
                    None
                }
            };
            let max_length = usize_field(obj, "max_length", ergolab::free_shift::DEFAULT_MAX_LENGTH, 1, errs);
            Some(SystemSpec::FreeShift {
                word: word?,
                n_list: n_list?,
                max_length: max_length?,
            })
        }
        Experiment::Weighted => {
            let ch = channel("channel", errs);
            let obs = observables(ch.as_ref().map(|c| c.channel.dim()), errs);
            let weights = match obj.get("weights") {
                None => Some(WeightSpec::Generator("zm:1".into())),
                Some(Value::String(s)) => match s.strip_prefix("generator:") {
                    Some(g) if BesicovitchGenerator::from_spec(g).is_ok() => Some(WeightSpec::Generator(g.into())),
                    _ => {
                        errs.push("$.weights", format!("unknown weight source {s:?}; expected generator:zm:<m>"));
                        None
                    }
                },
                Some(Value::Array(items)) => {
                    let mut out = Vec::new();
                    for (k, v) in items.iter().enumerate() {
                        match parse_complex(v) {
                            Some(z) => out.push([z.re, z.im]),
                            None => errs.push(format!("$.weights[{k}]"), "must be a number or [re, im]"),
                        }
                    }
                    (out.len() == items.len()).then_some(WeightSpec::Explicit(out))
                }
                Some(_) => {
                    errs.push("$.weights", "must be \"generator:zm:<m>\" or an array of [re, im]");
                    None
                }
            };
            let generator = match obj.get("generator") {
                None => None,
                Some(Value::String(g)) if BesicovitchGenerator::from_spec(g).is_ok() => Some(g.clone()),
                Some(_) => {
                    errs.push("$.generator", "must be \"zm:<m>\"");
                    None
                }
            };
            if let (Some(WeightSpec::Explicit(w)), Some(n)) = (&weights, obj.get("n_max").and_then(Value::as_u64)) {
                if (w.len() as u64) < n {
                    errs.push("$.weights", format!("{} weights given, horizon needs {n}", w.len()));
                }
            }
            Some(SystemSpec::Weighted {
                channel: ch?,
                observables: obs?,
                weights: weights?,
                generator,
            })
        }
        Experiment::Subsequence => {
            let ch = channel("channel", errs);
            let obs = observables(ch.as_ref().map(|c| c.channel.dim()), errs);
            let k_seq = match obj.get("k_seq") {
                None => Some(IndexSequence::Step(2)),
                Some(Value::Object(m)) => match m.get("step").and_then(Value::as_u64) {
                    Some(s) if s >= 1 && m.len() == 1 => Some(IndexSequence::Step(s as usize)),
                    _ => {
                        errs.push("$.k_seq", "expected {\"step\": <positive integer>}");
                        None
                    }
                },
                Some(Value::Array(items)) => {
                    let mut out = Vec::new();
                    for (k, v) in items.iter().enumerate() {
                        match v.as_u64() {
                            Some(n) => out.push(n as usize),
                            None => errs.push(format!("$.k_seq[{k}]"), "must be a nonnegative integer"),
                        }
                    }
                    if let Some(p) = out.windows(2).position(|w| w[1] <= w[0]) {
                        errs.push(format!("$.k_seq[{}]", p + 1), "sequence must be strictly increasing");
                    }
                    (out.len() == items.len()).then_some(IndexSequence::Explicit(out))
                }
                Some(_) => {
                    errs.push("$.k_seq", "must be {\"step\": s} or an array of indices");
                    None
                }
            };
            Some(SystemSpec::Subsequence {
                channel: ch?,
                observables: obs?,
                k_seq: k_seq?,
            })
        }
    }
}

fn usize_field(
    obj: &Map<String, Value>,
    key: &str,
    default: usize,
    min: u64,
    errs: &mut ConfigErrors,
) -> Option<usize> {
    match obj.get(key) {
        None => Some(default),
        Some(v) => match v.as_u64() {
            Some(n) if n >= min => Some(n as usize),
            _ => {
                errs.push(format!("$.{key}"), format!("must be an integer ≥ {min}"));
                None
            }
        },
    }
}

fn matrix_units(d: usize) -> Vec<Observable> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(Observable {
                label: format!("unit:{i}:{j}"),
                matrix: SquareMatrix::unit(d, i, j),
            });
        }
    }
    out
}

fn parse_observables(v: &Value, dim: usize, errs: &mut ConfigErrors) -> Option<Vec<Observable>> {
    let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
        errs.push("$.observables", "must be a nonempty array");
        return None;
    };
    let mut out = Vec::new();
    let before = errs.0.len();
    for (k, item) in items.iter().enumerate() {
        let path = format!("$.observables[{k}]");
        match item {
            Value::String(s) if s == "identity" => out.push(Observable {
                label: s.clone(),
                matrix: SquareMatrix::identity(dim),
            }),
            Value::String(s) => match parse_unit(s, dim) {
                Some(m) => out.push(Observable { label: s.clone(), matrix: m }),
                None => errs.push(path, format!("expected \"identity\" or \"unit:i:j\" with i, j < {dim}")),
            },
            other => {
                if let Some(m) = parse_matrix(other, &path, errs) {
                    if m.dim() != dim {
                        errs.push(path, format!("observable has dimension {}, channel has {dim}", m.dim()));
                    } else {
                        out.push(Observable {
                            label: format!("matrix:{k}"),
                            matrix: m,
                        });
                    }
                }
            }
        }
    }
    (errs.0.len() == before).then_some(out)
}

fn parse_unit(s: &str, dim: usize) -> Option<SquareMatrix> {
    let rest = s.strip_prefix("unit:")?;
    let (i, j) = rest.split_once(':')?;
    let (i, j): (usize, usize) = (i.parse().ok()?, j.parse().ok()?);
    (i < dim && j < dim).then(|| SquareMatrix::unit(dim, i, j))
}

fn parse_complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|re| C64::new(re, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

/// Rows of entries, each a number or `[re, im]`.
fn parse_matrix(v: &Value, path: &str, errs: &mut ConfigErrors) -> Option<SquareMatrix> {
    let Some(rows) = v.as_array().filter(|r| !r.is_empty()) else {
        errs.push(path, "matrix must be a nonempty array of rows");
        return None;
    };
    let mut parsed = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let Some(entries) = row.as_array() else {
            errs.push(format!("{path}[{i}]"), "row must be an array");
            return None;
        };
        if entries.len() != rows.len() {
            errs.push(
                path,
                format!("matrix is not square: {} rows, row {i} has {} entries", rows.len(), entries.len()),
            );
            return None;
        }
        let mut r = Vec::with_capacity(entries.len());
        for (j, z) in entries.iter().enumerate() {
            match parse_complex(z) {
                Some(z) if z.re.is_finite() && z.im.is_finite() => r.push(z),
                _ => {
                    errs.push(format!("{path}[{i}][{j}]"), "entry must be a finite number or [re, im]");
                    return None;
                }
            }
        }
        parsed.push(r);
    }
    match SquareMatrix::from_rows(&parsed) {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(path, e.to_string());
            None
        }
    }
}

fn parse_kraus_list(v: &Value, path: &str, errs: &mut ConfigErrors) -> Option<KrausChannel> {
    let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
        errs.push(path, "Kraus list must be a nonempty array of matrices");
        return None;
    };
    let before = errs.0.len();
    let mats: Vec<Option<SquareMatrix>> = items
        .iter()
        .enumerate()
        .map(|(k, m)| parse_matrix(m, &format!("{path}[{k}]"), errs))
        .collect();
    if errs.0.len() != before {
        return None;
    }
    let mats: Vec<SquareMatrix> = mats.into_iter().map(|m| m.expect("no errors")).collect();
    let d = mats[0].dim();
    if let Some(k) = mats.iter().position(|m| m.dim() != d) {
        errs.push(
            format!("{path}[{k}]"),
            format!("Kraus matrix {k} has dimension {}, expected {d}", mats[k].dim()),
        );
        return None;
    }
    match KrausChannel::new(mats) {
        Ok(ch) => Some(ch),
        Err(e) => {
            errs.push(path, e.to_string());
            None
        }
    }
}

fn parse_channel_object(v: &Value, path: &str, errs: &mut ConfigErrors) -> Option<KrausChannel> {
    match v {
        Value::Array(_) => parse_kraus_list(v, path, errs),
        Value::Object(m) => {
            let Some(kraus) = m.get("kraus") else {
                errs.push(path, "channel object needs a \"kraus\" array");
                return None;
            };
            let ch = parse_kraus_list(kraus, &format!("{path}.kraus"), errs)?;
            if let Some(d) = m.get("dim") {
                if d.as_u64() != Some(ch.dim() as u64) {
                    errs.push(format!("{path}.dim"), format!("declared dimension does not match Kraus dimension {}", ch.dim()));
                    return None;
                }
            }
            Some(ch)
        }
        _ => {
            errs.push(path, "channel must be a name, a file path, or an object with \"kraus\"");
            None
        }
    }
}

fn parse_dim(arg: Option<&str>, path: &str, errs: &mut ConfigErrors) -> Option<usize> {
    match arg {
        None => Some(2),
        Some(s) => match s.parse::<usize>() {
            Ok(d) if d >= 1 => Some(d),
            _ => {
                errs.push(path, format!("dimension {s:?} must be a positive integer"));
                None
            }
        },
    }
}

/// Builds a channel from `identity[:d]`, `trace[:d]`, `unitary:<json>`,
/// `v_beta:<β>`, `periodic:<d>`, a `*.json` file, or an inline object.
pub fn parse_channel(v: &Value, path: &str, base: &Path, errs: &mut ConfigErrors) -> Option<NamedChannel> {
    let Value::String(spec) = v else {
        let channel = parse_channel_object(v, path, errs)?;
        return Some(NamedChannel {
            label: "inline".into(),
            channel,
        });
    };
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec.as_str(), None),
    };
    let channel = if spec.ends_with(".json") {
        let file = base.join(spec);
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                errs.push(path, format!("cannot read channel file {}: {e}", file.display()));
                return None;
            }
        };
        match serde_json::from_str::<Value>(&text) {
            Ok(doc) => parse_channel_object(&doc, &format!("{path}<{spec}>"), errs)?,
            Err(e) => {
                errs.push(path, format!("malformed JSON in {spec}: {e}"));
                return None;
            }
        }
    } else {
        match head {
            "identity" => KrausChannel::identity(parse_dim(arg, path, errs)?),
            "trace" => KrausChannel::trace(parse_dim(arg, path, errs)?),
            "periodic" => ergolab::corpus::periodic_channel(parse_dim(arg, path, errs)?),
            "v_beta" => {
                let beta = arg.and_then(|b| b.parse::<f64>().ok());
                match beta.map(KrausChannel::v_beta) {
                    Some(Ok(ch)) => ch,
                    Some(Err(e)) => {
                        errs.push(path, e.to_string());
                        return None;
                    }
                    None => {
                        errs.push(path, "v_beta needs a numeric parameter, e.g. v_beta:1.0");
                        return None;
                    }
                }
            }
            "unitary" => {
                let doc = arg.and_then(|a| serde_json::from_str::<Value>(a).ok());
                let Some(doc) = doc else {
                    errs.push(path, "unitary needs an inline JSON matrix, e.g. unitary:[[1,0],[0,-1]]");
                    return None;
                };
                let u = parse_matrix(&doc, &format!("{path}<unitary>"), errs)?;
                match KrausChannel::unitary(u) {
                    Ok(ch) => ch,
                    Err(e) => {
                        errs.push(path, e.to_string());
                        return None;
                    }
                }
            }
            _ => {
                errs.push(path, format!("unknown channel {spec:?}"));
                return None;
            }
        }
    };
    Some(NamedChannel {
        label: spec.clone(),
        channel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(v: Value) -> Result<ExperimentConfig, ConfigErrors> {
        parse_config(&v, Path::new("."))
    }

    #[test]
    fn named_channels() {
        for name in ["identity", "identity:3", "trace:2", "v_beta:0.5", "periodic:3", "unitary:[[1,0],[0,[0,1]]]"] {
            let cfg = parse(json!({"experiment": "classify", "channel": name}));
            assert!(cfg.is_ok(), "{name}: {}", cfg.unwrap_err());
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse(json!({"experiment": "free-shift"})).unwrap();
        match cfg.system {
            SystemSpec::FreeShift { word, n_list, max_length } => {
                assert_eq!(word, "g0");
                assert_eq!(n_list, vec![4, 9, 16, 25]);
                assert_eq!(max_length, 3);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn errors_are_collected() {
        let errs = parse(json!({
            "experiment": "cesaro",
            "channel": "v_beta:x",
            "n_max": 1,
            "tol": -1.0,
            "bogus": true
        }))
        .unwrap_err();
        let paths: Vec<&str> = errs.issues().iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["$.bogus", "$.n_max", "$.tol", "$.channel"]);
    }

    #[test]
    fn observables_validated_against_dimension() {
        let errs = parse(json!({
            "experiment": "cesaro",
            "channel": "identity:2",
            "observables": ["unit:0:2", [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "identity"]
        }))
        .unwrap_err();
        assert_eq!(errs.issues().len(), 2);
        assert_eq!(errs.issues()[0].path, "$.observables[0]");
        assert!(errs.issues()[1].message.contains("dimension 3"));
    }

    #[test]
    fn non_unital_inline_channel_rejected() {
        let errs = parse(json!({
            "experiment": "classify",
            "channel": {"kraus": [[[1, 0], [0, 0]]]}
        }))
        .unwrap_err();
        assert_eq!(errs.issues()[0].path, "$.channel.kraus");
        assert!(errs.issues()[0].message.contains("not unital"));
    }

    #[test]
    fn k_seq_must_increase() {
        let errs = parse(json!({
            "experiment": "subsequence",
            "channel": "v_beta:1",
            "k_seq": [0, 2, 2, 5]
        }))
        .unwrap_err();
        assert_eq!(errs.issues()[0].path, "$.k_seq[2]");
    }
}
