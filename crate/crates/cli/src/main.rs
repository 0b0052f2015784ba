use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergolab_cli::config::{parse_config, read_config_value, ConfigErrors, ConfigIssue};
use ergolab_cli::run::run;
use serde_json::{json, Map, Value};

#[derive(Parser, Debug)]
#[command(name = "ergolab", version, about = "Ergodic-hierarchy experiments on quantum channels")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON configuration; command-line options override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<u64>,
    /// Classifier tolerance (closed-form tolerance for `rotation`).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// identity[:d], trace[:d], unitary:<json>, v_beta:<β>, periodic:<d> or a .json file.
    channel: Option<String>,
    /// `identity`, `unit:i:j`; repeatable. Defaults to every matrix unit.
    #[arg(long = "observable")]
    observables: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a channel in the mixing hierarchy.
    Classify {
        channel: Option<String>,
    },
    /// Cesàro trails of observables.
    Cesaro(ChannelArgs),
    /// Check the tensor-product implications for T and H (H = T by default).
    TensorCheck {
        first: Option<String>,
        second: Option<String>,
    },
    /// Irrational rotation witnesses.
    Rotation {
        /// `golden`, `sqrt2` or a number in [0, 1).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        degree: Option<u64>,
    },
    /// Shift averages in the truncated free-group representation.
    FreeShift {
        /// Reduced word such as "g0 g1^-1".
        #[arg(long)]
        word: Option<String>,
        /// Comma-separated list of n.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Vec<u64>,
        #[arg(long = "max-length")]
        max_length: Option<u64>,
    },
    /// Weighted Cesàro averages.
    Weighted {
        #[command(flatten)]
        channel: ChannelArgs,
        /// `generator:zm:<m>` or a JSON array of [re, im] pairs.
        #[arg(long)]
        weights: Option<String>,
        /// Reference generator `zm:<m>` for explicit weights.
        #[arg(long)]
        generator: Option<String>,
    },
    /// Subsequential Cesàro averages along k_m = step·m.
    Subsequence {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        step: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Cesaro(_) => "cesaro",
            Command::TensorCheck { .. } => "tensor-check",
            Command::Rotation { .. } => "rotation",
            Command::FreeShift { .. } => "free-shift",
            Command::Weighted { .. } => "weighted",
            Command::Subsequence { .. } => "subsequence",
        }
    }
}

/// Channel paths given on the command line are relative to the working
/// directory, not to the config file.
fn channel_value(spec: &str) -> Value {
    if spec.ends_with(".json") {
        if let Ok(abs) = std::path::absolute(spec) {
            return Value::String(abs.to_string_lossy().into_owned());
        }
    }
    Value::String(spec.to_string())
}

fn apply_channel_args(m: &mut Map<String, Value>, args: &ChannelArgs) {
    if let Some(c) = &args.channel {
        m.insert("channel".into(), channel_value(c));
    }
    if !args.observables.is_empty() {
        m.insert("observables".into(), json!(args.observables));
    }
}

fn overrides(cli: &Cli) -> Map<String, Value> {
    let mut m = Map::new();
    let g = &cli.global;
    if let Some(o) = &g.out {
        m.insert("out".into(), json!(o.to_string_lossy()));
    }
    if let Some(f) = &g.format {
        m.insert("format".into(), json!(f));
    }
    if let Some(n) = g.n_max {
        m.insert("n_max".into(), json!(n));
    }
    if let Some(t) = g.tol {
        m.insert("tol".into(), json!(t));
    }
    match &cli.command {
        Command::Classify { channel } => {
            if let Some(c) = channel {
                m.insert("channel".into(), channel_value(c));
            }
        }
        Command::Cesaro(args) => apply_channel_args(&mut m, args),
        Command::TensorCheck { first, second } => {
            if let Some(c) = first {
                m.insert("channel".into(), channel_value(c));
            }
            if let Some(c) = second {
                m.insert("second".into(), channel_value(c));
            }
        }
        Command::Rotation { alpha, degree } => {
            if let Some(a) = alpha {
                m.insert("alpha".into(), json!(a));
            }
            if let Some(d) = degree {
                m.insert("degree".into(), json!(d));
            }
        }
        Command::FreeShift { word, n_list, max_length } => {
            if let Some(w) = word {
                m.insert("word".into(), json!(w));
            }
            if !n_list.is_empty() {
                m.insert("n_list".into(), json!(n_list));
            }
            if let Some(l) = max_length {
                m.insert("max_length".into(), json!(l));
            }
        }
        Command::Weighted {
            channel,
            weights,
            generator,
        } => {
            apply_channel_args(&mut m, channel);
            if let Some(w) = weights {
                let v = if w.trim_start().starts_with('[') {
                    serde_json::from_str(w).unwrap_or_else(|_| json!(w))
                } else {
                    json!(w)
                };
                m.insert("weights".into(), v);
            }
            if let Some(g) = generator {
                m.insert("generator".into(), json!(g));
            }
        }
        Command::Subsequence { channel, step } => {
            apply_channel_args(&mut m, channel);
            if let Some(s) = step {
                m.insert("k_seq".into(), json!({ "step": s }));
            }
        }
    }
    m
}

fn build_config(cli: &Cli) -> Result<ergolab_cli::ExperimentConfig, ConfigErrors> {
    let (mut value, base) = match &cli.global.config {
        Some(path) => (
            read_config_value(path)?,
            path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        ),
        None => (json!({}), PathBuf::from(".")),
    };
    let Some(obj) = value.as_object_mut() else {
        let mut errs = ConfigErrors::default();
        errs.0.push(ConfigIssue {
            path: "$".into(),
            message: "configuration must be a JSON object".into(),
        });
        return Err(errs);
    };
    let sub = cli.command.name();
    if let Some(Value::String(e)) = obj.get("experiment") {
        if e != sub {
            let mut errs = ConfigErrors::default();
            errs.0.push(ConfigIssue {
                path: "$.experiment".into(),
                message: format!("config is for {e:?} but the subcommand is {sub:?}"),
            });
            return Err(errs);
        }
    }
    obj.insert("experiment".into(), json!(sub));
    obj.extend(overrides(cli));
    parse_config(&value, &base)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(errs) => {
            eprintln!("invalid configuration:\n{errs}");
            return ExitCode::from(1);
        }
    };
    let manifest = match run(&cfg) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let dir = cfg.out_dir.display();
    for c in &manifest.checks {
        let mark = if c.holds { "ok  " } else { "FAIL" };
        println!("[{mark}] {} ({})", c.statement, c.detail);
    }
    println!("wrote {} file(s) and manifest.json to {dir}", manifest.outputs.len());
    if manifest.all_checks_hold() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
