//! Command implementations.

use crate::error::CliError;
use crate::model_file::{self, Backend, LoadedModel};
use crate::record::ReportRecord;
use crate::{Common, Format};
use cmm_core::contextual::report::{feature_report, DiagnosticsReport};
use cmm_core::contextual::{ops, ContextualModel};
use cmm_core::linalg::C64;
use cmm_core::quantum::{chsh_maximize, quantum_interference, DensityMatrix, QuantumModel};
use cmm_core::sampler;
use serde_json::{json, Value};

fn load(common: &Common) -> Result<LoadedModel, CliError> {
    model_file::load(&common.model, &common.tol)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    common: &Common,
    command: &str,
    digest: &str,
    seed: Option<u64>,
    inputs: Value,
    outputs: Value,
    text: String,
    csv: Option<String>,
) -> Result<String, CliError> {
    match common.format {
        Format::Text => Ok(text),
        Format::Json => {
            let record = ReportRecord::new(command, digest, seed, inputs, outputs);
            Ok(record.to_json() + "\n")
        }
        Format::Csv => csv.ok_or_else(|| {
            CliError::usage(format!("command `{command}` has no CSV representation"))
        }),
    }
}

/// Resolve the context sample for a command: named subset, or the model's
/// default sample.
fn context_sample<M: ContextualModel>(
    model: &M,
    names: Option<&str>,
    seed: u64,
) -> Result<Vec<(String, M::Context)>, CliError> {
    match names {
        Some(csv) => csv
            .split(',')
            .map(|name| {
                let name = name.trim();
                model
                    .context(name)
                    .map(|c| (name.to_string(), c))
                    .map_err(CliError::from_core)
            })
            .collect(),
        None => Ok(model.default_context_sample(seed)),
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn validate(common: &Common) -> Result<String, CliError> {
    let loaded = load(common)?;
    let mut text = String::new();
    for check in &loaded.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{status} {} (residual {:.3e})\n",
            check.invariant, check.residual
        ));
    }
    text.push_str(&format!(
        "model `{}` ({}) is valid: {} invariants checked\n",
        common.model,
        loaded.backend.kind_name(),
        loaded.checks.len()
    ));
    let outputs = json!({
        "kind": loaded.backend.kind_name(),
        "checks": loaded.checks,
    });
    finish(
        common,
        "validate",
        &loaded.digest,
        None,
        json!({ "model": common.model }),
        outputs,
        text,
        None,
    )
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

pub fn diagnose(
    common: &Common,
    contexts: Option<&str>,
    seed: Option<u64>,
    restarts: usize,
) -> Result<String, CliError> {
    let loaded = load(common)?;
    if loaded.randomized_defaults && seed.is_none() {
        return Err(CliError::usage(
            "this model draws a seeded context sample and search: pass --seed",
        ));
    }
    let seed_value = seed.unwrap_or(0);
    let report = match &loaded.backend {
        Backend::Classical(m) => diagnose_impl(m, contexts, seed_value, restarts)?,
        Backend::Quantum(m) => diagnose_impl(m, contexts, seed_value, restarts)?,
        Backend::Measure(m) => diagnose_impl(m, contexts, seed_value, restarts)?,
    };
    let text = format!("{}\n{}", report.table(), witnesses_text(&report));
    let outputs = serde_json::to_value(&report).expect("report serializes");
    finish(
        common,
        "diagnose",
        &loaded.digest,
        seed,
        json!({ "model": common.model, "contexts": contexts, "restarts": restarts }),
        outputs,
        text,
        None,
    )
}

fn diagnose_impl<M: ContextualModel>(
    model: &M,
    contexts: Option<&str>,
    seed: u64,
    _restarts: usize,
) -> Result<DiagnosticsReport, CliError> {
    let sample = context_sample(model, contexts, seed)?;
    let observables = model.observables();
    feature_report(model, &sample, &observables, seed).map_err(CliError::from_core)
}

fn witnesses_text(report: &DiagnosticsReport) -> String {
    let mut out = String::new();
    if let Some(w) = &report.ftp_witness {
        out.push_str(&format!(
            "  FTP witness: context {}, instrument {}, P({}={}) off by {:+.6}\n",
            w.context, w.instrument_a, w.observable_b, w.outcome_b, w.delta
        ));
    }
    if let Some(w) = &report.oe_witness {
        out.push_str(&format!(
            "  OE witness: context {}, ({}, {}) outcome pair ({}, {}), discrepancy {:.6}\n",
            w.context, w.instrument_a, w.instrument_b, w.outcome_a, w.outcome_b, w.discrepancy
        ));
    }
    if let Some(w) = &report.replicability_failure {
        out.push_str(&format!(
            "  replicability failure: context {}, instrument {}, residual {:.3e}\n",
            w.context, w.instrument, w.residual
        ));
    }
    if let Some(w) = &report.rre_failure {
        out.push_str(&format!(
            "  RRE failure: context {}, pair ({}, {}), residual {:.3e}\n",
            w.context, w.instrument_a, w.instrument_b, w.discrepancy
        ));
    }
    if let Some(w) = &report.oe_rre_witness {
        out.push_str(&format!(
            "  OE+RRE witness: context {}, pair ({}, {}), OE margin {:.6}\n",
            w.context, w.instrument_a, w.instrument_b, w.discrepancy
        ));
    }
    out.push_str(&format!(
        "  CHSH configuration: {}\n",
        report.chsh_configuration
    ));
    out
}

// ---------------------------------------------------------------------------
// interference
// ---------------------------------------------------------------------------

struct InterferenceRow {
    parameter: String,
    delta: f64,
    cross_delta: Option<f64>,
    lambda: Option<f64>,
    theta: Option<f64>,
    regime: &'static str,
}

fn regime_name(r: ops::InterferenceRegime) -> &'static str {
    match r {
        ops::InterferenceRegime::Trigonometric => "trigonometric",
        ops::InterferenceRegime::Hyperbolic => "hyperbolic",
        ops::InterferenceRegime::Degenerate => "degenerate",
    }
}

pub fn interference(
    common: &Common,
    instrument_a: &str,
    observable_b: &str,
    outcome: Option<usize>,
    context: Option<&str>,
    sweep: Option<usize>,
) -> Result<String, CliError> {
    let loaded = load(common)?;
    let mut rows = Vec::new();
    match &loaded.backend {
        Backend::Quantum(m) => {
            let y = resolve_outcome(m, observable_b, outcome)?;
            match sweep {
                Some(steps) => {
                    if steps == 0 {
                        return Err(CliError::usage("--sweep must be at least 1"));
                    }
                    for k in 0..=steps {
                        let t = k as f64 * std::f64::consts::PI / steps as f64;
                        let mut amps = vec![C64::new(0.0, 0.0); m.dim()];
                        amps[0] = C64::new(t.cos(), 0.0);
                        amps[1] = C64::new(t.sin(), 0.0);
                        let state = DensityMatrix::from_pure(&amps).map_err(CliError::from_core)?;
                        rows.push(quantum_row(
                            m,
                            &state,
                            format!("{t:.6}"),
                            instrument_a,
                            observable_b,
                            y,
                        )?);
                    }
                }
                None => {
                    let name = context.ok_or_else(|| {
                        CliError::usage("pass --context or --sweep for interference")
                    })?;
                    let state = m.context(name).map_err(CliError::from_core)?;
                    rows.push(quantum_row(
                        m,
                        &state,
                        name.to_string(),
                        instrument_a,
                        observable_b,
                        y,
                    )?);
                }
            }
        }
        Backend::Classical(m) => {
            if sweep.is_some() {
                return Err(CliError::usage(
                    "--sweep parameterizes quantum states; classical models evaluate per context",
                ));
            }
            let y = resolve_outcome(m, observable_b, outcome)?;
            let sample = context_sample(m, context, 0)?;
            for (name, ctx) in sample {
                let datum = ops::ftp_interference(m, &ctx, instrument_a, observable_b, y)
                    .map_err(CliError::from_core)?;
                rows.push(InterferenceRow {
                    parameter: name,
                    delta: datum.delta,
                    cross_delta: None,
                    lambda: datum.lambda,
                    theta: datum.theta,
                    regime: regime_name(datum.regime),
                });
            }
        }
        Backend::Measure(m) => {
            if sweep.is_some() {
                return Err(CliError::usage(
                    "--sweep parameterizes quantum states; measure models evaluate per context",
                ));
            }
            let y = resolve_outcome(m, observable_b, outcome)?;
            let sample = context_sample(m, context, 0)?;
            for (name, ctx) in sample {
                let datum = ops::ftp_interference(m, &ctx, instrument_a, observable_b, y)
                    .map_err(CliError::from_core)?;
                rows.push(InterferenceRow {
                    parameter: name,
                    delta: datum.delta,
                    cross_delta: None,
                    lambda: datum.lambda,
                    theta: datum.theta,
                    regime: regime_name(datum.regime),
                });
            }
        }
    }

    let mut csv = String::from("parameter,delta,cross_delta,lambda,theta,regime\n");
    let mut text =
        format!("interference of P({observable_b}=y) conditioned through {instrument_a}\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
    let quote = |s: &str| {
        if s.contains(',') || s.contains('"') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            quote(&row.parameter),
            row.delta,
            opt(row.cross_delta),
            opt(row.lambda),
            opt(row.theta),
            row.regime
        ));
        text.push_str(&format!(
            "  {}: delta {:+.6}{} lambda {} theta {} [{}]\n",
            row.parameter,
            row.delta,
            row.cross_delta
                .map_or(String::new(), |c| format!(" (cross-terms {c:+.6})")),
            row.lambda.map_or("-".into(), |l| format!("{l:+.6}")),
            row.theta.map_or("-".into(), |t| format!("{t:.6}")),
            row.regime
        ));
    }
    let outputs: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "parameter": r.parameter,
                "delta": r.delta,
                "cross_delta": r.cross_delta,
                "lambda": r.lambda,
                "theta": r.theta,
                "regime": r.regime,
            })
        })
        .collect();
    finish(
        common,
        "interference",
        &loaded.digest,
        None,
        json!({
            "model": common.model,
            "a": instrument_a,
            "b": observable_b,
            "context": context,
            "sweep": sweep,
        }),
        Value::Array(outputs),
        text,
        Some(csv),
    )
}

fn resolve_outcome<M: ContextualModel>(
    model: &M,
    observable: &str,
    outcome: Option<usize>,
) -> Result<usize, CliError> {
    let outcomes = model.outcomes(observable).map_err(CliError::from_core)?;
    match outcome {
        Some(y) if y < outcomes.len() => Ok(y),
        Some(y) => Err(CliError::usage(format!(
            "outcome index {y} out of range for {observable} ({} outcomes)",
            outcomes.len()
        ))),
        None => Ok(outcomes.len() - 1),
    }
}

fn quantum_row(
    model: &QuantumModel,
    state: &DensityMatrix,
    parameter: String,
    instrument_a: &str,
    observable_b: &str,
    y: usize,
) -> Result<InterferenceRow, CliError> {
    // The cross-term route needs the projective pair; fall back to the
    // generic definition for non-Lüders instruments.
    let obs_a = model
        .instrument_observable(instrument_a)
        .map_err(CliError::from_core)?;
    let cross = match (model.hermitian(&obs_a), model.hermitian(observable_b)) {
        (Ok(a), Ok(b)) if obs_a == instrument_a => {
            let result = quantum_interference(state, a, b, y, model.tolerances())
                .map_err(CliError::from_core)?;
            Some(result)
        }
        _ => None,
    };
    let datum = match &cross {
        Some(q) => q.datum.clone(),
        None => ops::ftp_interference(model, state, instrument_a, observable_b, y)
            .map_err(CliError::from_core)?,
    };
    Ok(InterferenceRow {
        parameter,
        delta: datum.delta,
        cross_delta: cross.as_ref().map(|q| q.delta_cross_terms),
        lambda: datum.lambda,
        theta: datum.theta,
        regime: regime_name(datum.regime),
    })
}

// ---------------------------------------------------------------------------
// chsh
// ---------------------------------------------------------------------------

pub fn chsh(
    common: &Common,
    seed: Option<u64>,
    restarts: usize,
    separable: bool,
    context: Option<&str>,
    quadruple: [Option<&str>; 4],
    force: bool,
) -> Result<String, CliError> {
    let loaded = load(common)?;
    let eval_mode = quadruple.iter().all(Option::is_some);
    if !eval_mode && quadruple.iter().any(Option::is_some) {
        return Err(CliError::usage(
            "evaluation mode needs all of --a1 --a2 --b1 --b2",
        ));
    }

    if eval_mode {
        let context = context.ok_or_else(|| CliError::usage("evaluation mode needs --context"))?;
        let [a1, a2, b1, b2] = quadruple.map(|q| q.unwrap());
        let value = match &loaded.backend {
            Backend::Classical(m) => eval_chsh(m, context, a1, a2, b1, b2, force)?,
            Backend::Quantum(m) => eval_chsh(m, context, a1, a2, b1, b2, force)?,
            Backend::Measure(m) => eval_chsh(m, context, a1, a2, b1, b2, force)?,
        };
        let label = if value.sequential {
            "sequential CHSH"
        } else {
            "CHSH"
        };
        let text = format!(
            "{label} = {:.9}\n  correlations (A1B1, A1B2, A2B1, A2B2): {:+.6} {:+.6} {:+.6} {:+.6}\n",
            value.value,
            value.correlations[0],
            value.correlations[1],
            value.correlations[2],
            value.correlations[3],
        );
        let outputs = serde_json::to_value(&value).expect("serializes");
        return finish(
            common,
            "chsh",
            &loaded.digest,
            None,
            json!({
                "model": common.model, "context": context,
                "a1": a1, "a2": a2, "b1": b1, "b2": b2, "force": force,
            }),
            outputs,
            text,
            None,
        );
    }

    let seed = seed.ok_or_else(|| CliError::usage("the CHSH maximizer requires --seed"))?;
    match &loaded.backend {
        Backend::Quantum(_) => {}
        _ => {
            return Err(CliError::usage(
                "the CHSH maximizer explores the two-qubit quantum class; classical models take evaluation mode",
            ))
        }
    }
    let search = chsh_maximize(4, seed, restarts, separable).map_err(CliError::from_core)?;
    let text = format!(
        "CHSH maximum ({}) = {:.9}\n  bloch a1 {:?}\n  bloch a2 {:?}\n  bloch b1 {:?}\n  bloch b2 {:?}\n",
        if separable { "separable states" } else { "entangled search" },
        search.value,
        search.witness.bloch[0],
        search.witness.bloch[1],
        search.witness.bloch[2],
        search.witness.bloch[3],
    );
    let state_json: Vec<[f64; 2]> = search.witness.state.iter().map(|z| [z.re, z.im]).collect();
    let outputs = json!({
        "value": search.value,
        "separable": search.separable,
        "witness": { "state": state_json, "bloch": search.witness.bloch },
    });
    finish(
        common,
        "chsh",
        &loaded.digest,
        Some(seed),
        json!({ "model": common.model, "restarts": restarts, "separable": separable }),
        outputs,
        text,
        None,
    )
}

fn eval_chsh<M: ContextualModel>(
    model: &M,
    context: &str,
    a1: &str,
    a2: &str,
    b1: &str,
    b2: &str,
    force: bool,
) -> Result<ops::ChshValue, CliError> {
    let ctx = model.context(context).map_err(CliError::from_core)?;
    ops::chsh_value(model, &ctx, [a1, a2], [b1, b2], force).map_err(CliError::from_core)
}

// ---------------------------------------------------------------------------
// entangle
// ---------------------------------------------------------------------------

pub fn entangle(
    common: &Common,
    context: &str,
    instrument_a: &str,
    observable_b: &str,
    gamma: Option<&str>,
) -> Result<String, CliError> {
    let loaded = load(common)?;
    let outputs = match &loaded.backend {
        Backend::Classical(m) => entangle_impl(m, context, instrument_a, observable_b, gamma)?,
        Backend::Quantum(m) => entangle_impl(m, context, instrument_a, observable_b, gamma)?,
        Backend::Measure(m) => entangle_impl(m, context, instrument_a, observable_b, gamma)?,
    };
    let text = format!(
        "concurrence = {} (degenerate: {})\nAB-entangled: {}\nEPR pairings: {}\n",
        outputs["concurrence"]["value"],
        outputs["concurrence"]["degenerate"],
        outputs["ab_entangled"],
        outputs["epr"],
    );
    finish(
        common,
        "entangle",
        &loaded.digest,
        None,
        json!({
            "model": common.model, "context": context,
            "a": instrument_a, "b": observable_b, "gamma": gamma,
        }),
        outputs,
        text,
        None,
    )
}

fn parse_gamma(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("bad gamma pair `{pair}`")))?;
            Ok((
                a.parse::<usize>()
                    .map_err(|e| CliError::usage(format!("bad gamma index `{a}`: {e}")))?,
                b.parse::<usize>()
                    .map_err(|e| CliError::usage(format!("bad gamma index `{b}`: {e}")))?,
            ))
        })
        .collect()
}

fn entangle_impl<M: ContextualModel>(
    model: &M,
    context: &str,
    instrument_a: &str,
    observable_b: &str,
    gamma: Option<&str>,
) -> Result<Value, CliError> {
    let ctx = model.context(context).map_err(CliError::from_core)?;
    let conc =
        ops::concurrence(model, &ctx, instrument_a, observable_b).map_err(CliError::from_core)?;
    // Entanglement of the pair is defined through B's outcomes alone, so any
    // instrument measuring B serves.
    let instrument_b = model
        .instruments_for(observable_b)
        .map_err(CliError::from_core)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::usage(format!("observable {observable_b} has no instrument")))?;
    let entangled =
        ops::ab_entangled(model, &ctx, instrument_a, &instrument_b).map_err(CliError::from_core)?;
    let obs_a = model
        .instrument_observable(instrument_a)
        .map_err(CliError::from_core)?;
    let na = model.outcomes(&obs_a).map_err(CliError::from_core)?.len();
    let nb = model
        .outcomes(observable_b)
        .map_err(CliError::from_core)?
        .len();

    let pairings: Vec<Vec<(usize, usize)>> = match gamma {
        Some(s) => vec![parse_gamma(s)?],
        None if na == 2 && nb == 2 => vec![vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]],
        None => Vec::new(),
    };
    let mut epr = Vec::new();
    for pairing in &pairings {
        let check = ops::epr_entangled(model, &ctx, instrument_a, observable_b, pairing)
            .map_err(CliError::from_core)?;
        epr.push(json!({
            "gamma": pairing,
            "holds": check.holds,
            "complete": check.complete,
        }));
    }
    Ok(json!({
        "concurrence": {
            "value": conc.value,
            "degenerate": conc.degenerate,
            "excluded_pairs": conc.excluded,
        },
        "ab_entangled": entangled,
        "epr": epr,
    }))
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

pub fn sample(
    common: &Common,
    context: &str,
    instrument_a: &str,
    instrument_b: Option<&str>,
    trials: usize,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let seed = seed.ok_or_else(|| CliError::usage("sampling requires --seed"))?;
    if trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let loaded = load(common)?;
    match &loaded.backend {
        Backend::Classical(m) => sample_impl(
            common,
            &loaded,
            m,
            context,
            instrument_a,
            instrument_b,
            trials,
            seed,
        ),
        Backend::Quantum(m) => sample_impl(
            common,
            &loaded,
            m,
            context,
            instrument_a,
            instrument_b,
            trials,
            seed,
        ),
        Backend::Measure(m) => sample_impl(
            common,
            &loaded,
            m,
            context,
            instrument_a,
            instrument_b,
            trials,
            seed,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn sample_impl<M: ContextualModel>(
    common: &Common,
    loaded: &LoadedModel,
    model: &M,
    context: &str,
    instrument_a: &str,
    instrument_b: Option<&str>,
    trials: usize,
    seed: u64,
) -> Result<String, CliError> {
    let ctx = model.context(context).map_err(CliError::from_core)?;
    let obs_a = model
        .instrument_observable(instrument_a)
        .map_err(CliError::from_core)?;
    let labels_a: Vec<String> = model
        .outcomes(&obs_a)
        .map_err(CliError::from_core)?
        .iter()
        .map(|o| o.label.clone())
        .collect();

    match instrument_b {
        None => {
            let seq = sampler::sample(model, &ctx, context, instrument_a, trials, seed)
                .map_err(CliError::from_core)?;
            let est = sampler::estimate(&seq, labels_a.len()).map_err(CliError::from_core)?;
            let nu = est.nu();
            let mut text =
                format!("{trials} draws of {obs_a} in context {context} (seed {seed})\n");
            for (label, (count, freq)) in labels_a.iter().zip(est.counts.iter().zip(&nu)) {
                text.push_str(&format!("  {label}: {count} ({freq:.6})\n"));
            }
            let outputs = json!({
                "observable": obs_a,
                "outcome_labels": labels_a,
                "counts": est.counts,
                "frequencies": nu,
            });
            finish(
                common,
                "sample",
                &loaded.digest,
                Some(seed),
                json!({
                    "model": common.model, "context": context,
                    "a": instrument_a, "trials": trials,
                }),
                outputs,
                text,
                Some(seq.to_csv(&labels_a)),
            )
        }
        Some(instrument_b) => {
            let obs_b = model
                .instrument_observable(instrument_b)
                .map_err(CliError::from_core)?;
            let labels_b: Vec<String> = model
                .outcomes(&obs_b)
                .map_err(CliError::from_core)?
                .iter()
                .map(|o| o.label.clone())
                .collect();
            let pair = sampler::sample_sequential(
                model,
                &ctx,
                context,
                instrument_a,
                instrument_b,
                trials,
                seed,
            )
            .map_err(CliError::from_core)?;
            let (joint, total) = sampler::estimate_joint(&pair, labels_a.len(), labels_b.len())
                .map_err(CliError::from_core)?;
            // Fresh single runs at matched length for the combinability
            // check, on derived seed streams.
            let single_a = sampler::sample(
                model,
                &ctx,
                context,
                instrument_a,
                trials,
                seed.wrapping_add(1),
            )
            .map_err(CliError::from_core)?;
            let single_b = sampler::sample(
                model,
                &ctx,
                context,
                instrument_b,
                trials,
                seed.wrapping_add(2),
            )
            .map_err(CliError::from_core)?;
            let comb = sampler::combinability_check(
                &pair,
                &single_a,
                &single_b,
                labels_a.len(),
                labels_b.len(),
            )
            .map_err(CliError::from_core)?;

            let mut text = format!(
                "{trials} sequential ({obs_a}, {obs_b}) trials in context {context} (seed {seed})\n"
            );
            for (x, la) in labels_a.iter().enumerate() {
                for (y, lb) in labels_b.iter().enumerate() {
                    let f = joint[x][y] as f64 / total as f64;
                    text.push_str(&format!("  ({la}, {lb}): {} ({f:.6})\n", joint[x][y]));
                }
            }
            text.push_str(&format!(
                "combinability: {} (max marginal residual {:.6}, threshold {:.6})\n",
                if comb.marginals_match {
                    "marginals match"
                } else {
                    "marginals mismatch"
                },
                comb.max_residual,
                comb.threshold
            ));
            let outputs = json!({
                "observable_a": obs_a,
                "observable_b": obs_b,
                "joint_counts": joint,
                "completed_trials": total,
                "failed_trials": pair.failed_trials(),
                "combinability": {
                    "marginals_match": comb.marginals_match,
                    "max_residual": comb.max_residual,
                    "threshold": comb.threshold,
                },
            });
            finish(
                common,
                "sample",
                &loaded.digest,
                Some(seed),
                json!({
                    "model": common.model, "context": context,
                    "a": instrument_a, "b": instrument_b, "trials": trials,
                }),
                outputs,
                text,
                Some(pair.to_csv(&labels_a, &labels_b)),
            )
        }
    }
}
