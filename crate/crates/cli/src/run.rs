//! Executes a validated experiment, writes its tables and a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ergolab::ergodic::{
    cesaro_against, classify_with, subsequence_cesaro_against, tensor_theorem_check_with, unique_invariant_state,
    ClassifyOptions, ConvergenceRule, PERIPHERAL_TOL,
};
use ergolab::free_shift::{free_generator_average_norm, haagerup_bound_check, ReducedWord};
use ergolab::rotation::{
    h_eigenvalue, swm_failure_witness, torus_square_fixed_point, uniquely_ergodic_witness, RotationSystem,
};
use ergolab::weighted::{weighted_cesaro, weighted_run, BesicovitchGenerator, WeightSequence};
use ergolab::{LabError, C64};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format, NamedChannel, Observable, SystemSpec, WeightSpec};

/// Closed-form agreement required of the rotation witness table.
pub const ROTATION_CLOSED_FORM_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Lab {
        context: String,
        #[source]
        source: LabError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn lab(context: &str) -> impl FnOnce(LabError) -> RunError + '_ {
    move |source| RunError::Lab {
        context: context.to_string(),
        source,
    }
}

/// One asserted implication; any failure makes the process exit with 2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub statement: String,
    pub holds: bool,
    pub detail: String,
}

fn check(statement: impl Into<String>, holds: bool, detail: impl Into<String>) -> Check {
    Check {
        statement: statement.into(),
        holds,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub experiment: &'static str,
    pub verdicts: Value,
    pub checks: Vec<Check>,
    pub outputs: Vec<OutputFile>,
    pub wall_time_ms: u128,
}

impl RunManifest {
    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// SHA-256 of the canonical JSON of the validated configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex(&Sha256::digest(canonical.as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Experiment output before it is written out.
struct Outcome {
    tables: Vec<(String, String)>,
    verdicts: Value,
    checks: Vec<Check>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn csv<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn classify_options(cfg: &ExperimentConfig, n_max: usize) -> ClassifyOptions {
    ClassifyOptions {
        n_max,
        peripheral_tol: cfg.tol.unwrap_or(PERIPHERAL_TOL),
        ..ClassifyOptions::default()
    }
}

/// Runs the experiment and writes `<experiment>.<ext>` tables plus
/// `manifest.json` into the configured output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    let outcome = execute(cfg)?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut outputs = Vec::new();
    for (name, content) in &outcome.tables {
        write_file(&dir.join(name), content)?;
        outputs.push(OutputFile {
            file: name.clone(),
            bytes: content.len(),
            sha256: hex(&Sha256::digest(content.as_bytes())),
        });
    }
    let manifest = RunManifest {
        artifact: "ergolab",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(cfg),
        experiment: cfg.experiment.name(),
        verdicts: outcome.verdicts,
        checks: outcome.checks,
        outputs,
        wall_time_ms: start.elapsed().as_millis(),
    };
    write_file(&dir.join(MANIFEST_FILE), &to_json(&manifest))?;
    Ok(manifest)
}

fn write_file(path: &Path, content: &str) -> Result<(), RunError> {
    std::fs::write(path, content).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    match &cfg.system {
        SystemSpec::Classify { channel } => run_classify(cfg, channel),
        SystemSpec::Cesaro { channel, observables } => run_cesaro(cfg, channel, observables),
        SystemSpec::TensorCheck { first, second } => run_tensor(cfg, first, second),
        SystemSpec::Rotation { alpha, degree } => run_rotation(cfg, alpha, *degree),
        SystemSpec::FreeShift { word, n_list, max_length } => run_free_shift(cfg, word, n_list, *max_length),
        SystemSpec::Weighted {
            channel,
            observables,
            weights,
            generator,
        } => run_weighted(cfg, channel, observables, weights, generator.as_deref()),
        SystemSpec::Subsequence {
            channel,
            observables,
            k_seq,
        } => {
            let ks = k_seq.materialize(cfg.n_max);
            run_subsequence(cfg, channel, observables, &ks)
        }
    }
}

fn table_name(cfg: &ExperimentConfig, stem: &str) -> String {
    format!("{stem}.{}", cfg.format.extension())
}

fn run_classify(cfg: &ExperimentConfig, ch: &NamedChannel) -> Result<Outcome, RunError> {
    let report = classify_with(&ch.channel, &classify_options(cfg, cfg.n_max)).map_err(lab("classify"))?;
    let content = match cfg.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
    };
    let checks = hierarchy_checks(&ch.label, &report.flags);
    Ok(Outcome {
        tables: vec![(table_name(cfg, "classify"), content)],
        verdicts: json!({
            "channel": ch.label,
            "flags": report.flags,
            "verdict_source": report.verdict_source,
            "routes_agree": report.routes_agree,
        }),
        checks,
    })
}

fn hierarchy_checks(label: &str, flags: &ergolab::ergodic::MixingFlags) -> Vec<Check> {
    let v = flags.violations();
    if v.is_empty() {
        vec![check(
            "mixing hierarchy",
            true,
            format!("{label}: no implication among SWM => UE => ergodic, SWM => WM is violated"),
        )]
    } else {
        v.into_iter()
            .map(|s| check(s, false, format!("{label}: {flags:?}")))
            .collect()
    }
}

#[derive(Serialize)]
struct TrailRow<'a> {
    observable: &'a str,
    n: usize,
    norm: f64,
    deviation: Option<f64>,
}

fn trail_table(cfg: &ExperimentConfig, rows: &[TrailRow]) -> String {
    match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => csv(
            "n,observable,norm,deviation",
            rows.iter().map(|r| {
                let dev = r.deviation.map(|d| format!("{d:e}")).unwrap_or_default();
                format!("{},{},{:e},{dev}", r.n, r.observable, r.norm)
            }),
        ),
    }
}

fn run_cesaro(cfg: &ExperimentConfig, ch: &NamedChannel, obs: &[Observable]) -> Result<Outcome, RunError> {
    let report = classify_with(&ch.channel, &classify_options(cfg, cfg.n_max)).map_err(lab("classify"))?;
    let phi = unique_invariant_state(&ch.channel);
    let rule = ConvergenceRule::default();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for o in obs {
        let trail = cesaro_against(&ch.channel, &o.matrix, cfg.n_max, phi.as_ref()).map_err(lab("cesaro"))?;
        for n in 1..=cfg.n_max {
            rows.push((o.label.as_str(), n, ergolab::algebra::operator_norm(trail.average(n)), trail.deviation(n)));
        }
        if let Some(fit) = trail.fit() {
            let scale = ergolab::algebra::operator_norm(&o.matrix).max(1.0);
            let converged = rule.converged(&fit, scale);
            summary.push(json!({
                "observable": o.label,
                "fit": fit,
                "converged": converged,
                "convergence_expected": report.flags.uniquely_ergodic,
            }));
        }
    }
    let rows: Vec<TrailRow> = rows
        .into_iter()
        .map(|(observable, n, norm, deviation)| TrailRow {
            observable,
            n,
            norm,
            deviation,
        })
        .collect();
    Ok(Outcome {
        tables: vec![(table_name(cfg, "cesaro"), trail_table(cfg, &rows))],
        verdicts: json!({
            "channel": ch.label,
            "uniquely_ergodic": report.flags.uniquely_ergodic,
            "observables": summary,
        }),
        checks: Vec::new(),
    })
}

fn run_tensor(cfg: &ExperimentConfig, t: &NamedChannel, h: &NamedChannel) -> Result<Outcome, RunError> {
    let opts = classify_options(cfg, cfg.n_max);
    match tensor_theorem_check_with(&t.channel, &h.channel, &opts) {
        Ok(report) => {
            let content = match cfg.format {
                Format::Json => to_json(&report),
                Format::Csv => csv(
                    "statement,holds,evidence",
                    report
                        .checks
                        .iter()
                        .map(|c| format!("\"{}\",{},\"{}\"", c.statement, c.holds, c.evidence)),
                ),
            };
            let checks = report
                .checks
                .iter()
                .map(|c| check(c.statement.clone(), c.holds, c.evidence.clone()))
                .collect();
            Ok(Outcome {
                tables: vec![(table_name(cfg, "tensor-check"), content)],
                verdicts: json!({
                    "first": t.label,
                    "second": h.label,
                    "first_flags": report.first.flags,
                    "second_flags": report.second.flags,
                    "product_flags": report.product.flags,
                }),
                checks,
            })
        }
        Err(LabError::ImplicationViolated { statement, evidence }) => Ok(Outcome {
            tables: Vec::new(),
            verdicts: json!({"first": t.label, "second": h.label}),
            checks: vec![check(statement, false, evidence)],
        }),
        Err(e) => Err(lab("tensor-check")(e)),
    }
}

fn run_rotation(cfg: &ExperimentConfig, alpha: &str, degree: usize) -> Result<Outcome, RunError> {
    let sys = RotationSystem::from_name(alpha, degree).map_err(lab("rotation"))?;
    let tol = cfg.tol.unwrap_or(ROTATION_CLOSED_FORM_TOL);
    let ue = uniquely_ergodic_witness(&sys, cfg.n_max);
    let swm = swm_failure_witness(&sys, cfg.n_max);
    let torus = torus_square_fixed_point(&sys);
    let h = h_eigenvalue(&sys);

    let worst = ue
        .iter()
        .map(|r| (r.deviation - r.closed_form).abs())
        .fold(0.0, f64::max);
    let s_exact = swm.iter().all(|&(_, s)| s == 1.0);
    let checks = vec![
        check(
            "unique-ergodicity deviations match the closed form",
            worst <= tol,
            format!("max |deviation − closed form| = {worst:e}, tolerance {tol:e}"),
        ),
        check(
            "strict weak mixing fails: S_n = 1 for every n",
            s_exact,
            format!("checked n = 1..={}", cfg.n_max),
        ),
        check(
            "T ⊗ T has a non-scalar fixed point",
            torus.certifies_non_ergodic,
            format!("residual {:e}, scalar {}", torus.residual, torus.is_scalar),
        ),
    ];
    let tables = match cfg.format {
        Format::Json => vec![(
            "rotation.json".to_string(),
            to_json(&json!({
                "system": sys,
                "unique_ergodicity": ue,
                "swm_failure": swm.iter().map(|&(n, s)| json!({"n": n, "s_n": s})).collect::<Vec<_>>(),
                "torus_fixed_point": torus,
                "h_eigenvalue": [h.re, h.im],
            })),
        )],
        Format::Csv => vec![
            (
                "rotation_ue.csv".to_string(),
                csv(
                    "n,m,deviation,closed_form",
                    ue.iter()
                        .map(|r| format!("{},{},{:e},{:e}", r.n, r.m, r.deviation, r.closed_form)),
                ),
            ),
            (
                "rotation_swm.csv".to_string(),
                csv("n,s_n", swm.iter().map(|(n, s)| format!("{n},{s:e}"))),
            ),
        ],
    };
    Ok(Outcome {
        tables,
        verdicts: json!({
            "alpha": sys.alpha,
            "assumed_irrational": sys.assumed_irrational,
            "max_closed_form_error": worst,
            "swm_sum_exactly_one": s_exact,
            "torus_residual": torus.residual,
            "torus_fixed_point_is_scalar": torus.is_scalar,
            "h_eigenvalue": [h.re, h.im],
        }),
        checks,
    })
}

fn run_free_shift(cfg: &ExperimentConfig, word: &str, n_list: &[usize], max_length: usize) -> Result<Outcome, RunError> {
    let s = ReducedWord::parse(word).map_err(lab("free-shift"))?;
    let rows = haagerup_bound_check(&s, n_list, max_length).map_err(lab("free-shift"))?;
    let single = s.len() == 1;
    let checks = rows
        .iter()
        .flat_map(|r| {
            [
                check(
                    format!("‖A_{}‖ ≤ (p+1)/√n", r.n),
                    r.pass,
                    format!("norm {:e}, bound {:e}, margin {:e}", r.norm, r.bound, r.margin),
                ),
                check(
                    format!("vector-state averages vanish at n = {}", r.n),
                    r.vector_state_sum == 0.0,
                    format!("{:e}", r.vector_state_sum),
                ),
            ]
        })
        .collect();
    let oracle = |n: usize| single.then(|| free_generator_average_norm(n));
    let content = match cfg.format {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|r| json!({"row": r, "oracle": oracle(r.n)}))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => csv(
            "n,norm,bound,pass,margin,oracle,ball_size,iterations",
            rows.iter().map(|r| {
                let o = oracle(r.n).map(|o| format!("{o:e}")).unwrap_or_default();
                format!(
                    "{},{:e},{:e},{},{:e},{o},{},{}",
                    r.n, r.norm, r.bound, r.pass, r.margin, r.ball_size, r.iterations
                )
            }),
        ),
    };
    Ok(Outcome {
        tables: vec![(table_name(cfg, "free-shift"), content)],
        verdicts: json!({
            "word": s.to_string(),
            "max_length": max_length,
            "all_within_bound": rows.iter().all(|r| r.pass),
            "min_margin": rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        }),
        checks,
    })
}

fn run_weighted(
    cfg: &ExperimentConfig,
    ch: &NamedChannel,
    obs: &[Observable],
    weights: &WeightSpec,
    generator: Option<&str>,
) -> Result<Outcome, RunError> {
    let (gen, explicit) = match weights {
        WeightSpec::Generator(g) => (Some(BesicovitchGenerator::from_spec(g).map_err(lab("weighted"))?), None),
        WeightSpec::Explicit(v) => {
            let b = WeightSequence::explicit(v.iter().map(|&[re, im]| C64::new(re, im)).collect())
                .map_err(lab("weighted"))?;
            let gen = generator
                .map(BesicovitchGenerator::from_spec)
                .transpose()
                .map_err(lab("weighted"))?;
            (gen, Some(b))
        }
    };
    let rule = ConvergenceRule::default();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for o in obs {
        let trail = match &gen {
            Some(g) => weighted_run(&ch.channel, &o.matrix, g, explicit.as_ref(), cfg.n_max),
            None => weighted_cesaro(&ch.channel, &o.matrix, explicit.as_ref().expect("explicit weights"), cfg.n_max),
        }
        .map_err(lab("weighted"))?;
        for n in 1..=cfg.n_max {
            rows.push((
                o.label.clone(),
                n,
                trail.norms[n - 1],
                trail.residuals.as_ref().map(|r| r[n - 1]),
            ));
        }
        let fit = trail.fit();
        let x_norm = ergolab::algebra::operator_norm(&o.matrix);
        let within_band = trail.band.as_ref().map(|band| {
            let sup_b = explicit.as_ref().map_or(1.0, |b| b.bound).max(1.0);
            band.tail_max_residual <= band.radius + rule.max_residual * x_norm * sup_b
        });
        summary.push(json!({
            "observable": o.label,
            "fit": fit,
            "converged": rule.converged(&fit, x_norm.max(1.0)),
            "band": trail.band,
            "within_band": within_band,
            "strictly_weak_mixing": trail.strictly_weak_mixing,
        }));
    }
    let content = match cfg.format {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(o, n, w, r)| json!({"observable": o, "n": n, "norm": w, "residual": r}))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => csv(
            "n,observable,norm,residual",
            rows.iter().map(|(o, n, w, r)| {
                let r = r.map(|r| format!("{r:e}")).unwrap_or_default();
                format!("{n},{o},{w:e},{r}")
            }),
        ),
    };
    Ok(Outcome {
        tables: vec![(table_name(cfg, "weighted"), content)],
        verdicts: json!({"channel": ch.label, "observables": summary}),
        checks: Vec::new(),
    })
}

fn run_subsequence(
    cfg: &ExperimentConfig,
    ch: &NamedChannel,
    obs: &[Observable],
    k_seq: &[usize],
) -> Result<Outcome, RunError> {
    let report = classify_with(&ch.channel, &classify_options(cfg, cfg.n_max.min(2000))).map_err(lab("classify"))?;
    let phi = unique_invariant_state(&ch.channel);
    let rule = ConvergenceRule::default();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for o in obs {
        let trail = subsequence_cesaro_against(&ch.channel, &o.matrix, k_seq, cfg.n_max, phi.as_ref())
            .map_err(lab("subsequence"))?;
        for n in 1..=cfg.n_max {
            rows.push((o.label.as_str(), n, ergolab::algebra::operator_norm(trail.average(n)), trail.deviation(n)));
        }
        let ratio = trail.index_ratio.unwrap_or(f64::INFINITY);
        if let Some(fit) = trail.fit() {
            let scale = ergolab::algebra::operator_norm(&o.matrix).max(1.0);
            let converged = rule.converged(&fit, scale);
            summary.push(json!({
                "observable": o.label,
                "index_ratio": ratio,
                "fit": fit,
                "converged": converged,
                "convergence_expected": report.flags.strictly_weak_mixing,
            }));
        }
    }
    let rows: Vec<TrailRow> = rows
        .into_iter()
        .map(|(observable, n, norm, deviation)| TrailRow {
            observable,
            n,
            norm,
            deviation,
        })
        .collect();
    Ok(Outcome {
        tables: vec![(table_name(cfg, "subsequence"), trail_table(cfg, &rows))],
        verdicts: json!({
            "channel": ch.label,
            "strictly_weak_mixing": report.flags.strictly_weak_mixing,
            "observables": summary,
        }),
        checks: Vec::new(),
    })
}
