//! The contextual calculus: conditioning, interference, order effects,
//! replicability, correlations, CHSH, dependence, and entanglement measures.
//!
//! Every operation is a pure function of (model, inputs). Sequential
//! probabilities are always computed by chained context updates,
//! `P(A=x) * P_{T_A(x)C}(B=y) * ...`, which is the only reading consistent
//! with instrument-based conditioning.

use super::{numeric_outcomes, ContextualModel, OutcomeValue};
use crate::error::{CmmError, Result};
use serde::{Deserialize, Serialize};

/// Outcome distribution of `observable` in `context`, validated against the
/// distribution axioms (nonnegative, sums to one within tolerance).
pub fn prob_dist<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    observable: &str,
) -> Result<Vec<f64>> {
    let dist = model.prob_dist(context, observable)?;
    let tol = model.tolerances();
    let mut sum = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        if !p.is_finite() || p < -tol.dist_sum {
            return Err(CmmError::invariant(
                format!("P_C^{observable}({i}) >= 0"),
                (-p).max(0.0),
            ));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol.dist_sum {
        return Err(CmmError::invariant(
            format!("sum_x P_C^{observable}(x) = 1"),
            (sum - 1.0).abs(),
        ));
    }
    Ok(dist)
}

/// Average of the (numeric) observable in the given context.
pub fn average<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    observable: &str,
) -> Result<f64> {
    let values = numeric_outcomes(model, observable)?;
    let dist = prob_dist(model, context, observable)?;
    Ok(values.iter().zip(&dist).map(|(x, p)| x * p).sum())
}

/// Conditional probability `P(B=y | A=x)` under the given instrument for A:
/// the probability of `B=y` in the updated context. Depends on the chosen
/// instrument, not only on the observable it measures.
pub fn conditional_prob<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    x: usize,
    observable_b: &str,
    y: usize,
) -> Result<f64> {
    let updated = model.update(context, instrument_a, x)?;
    let dist = prob_dist(model, &updated, observable_b)?;
    dist.get(y).copied().ok_or_else(|| {
        CmmError::Lookup(format!("outcome index {y} out of range for {observable_b}"))
    })
}

/// Sequentially measured joint distribution over the outcome grid of
/// (instrument A's observable) x B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalJpd {
    pub observable_a: String,
    pub observable_b: String,
    pub outcomes_a: Vec<OutcomeValue>,
    pub outcomes_b: Vec<OutcomeValue>,
    /// `probs[x][y] = P(A=x, B=y)`.
    pub probs: Vec<Vec<f64>>,
}

impl ConditionalJpd {
    /// Marginal over the second observable: recovers `P_C^A` exactly.
    pub fn marginal_a(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// Marginal over the first observable.
    pub fn marginal_b(&self) -> Vec<f64> {
        let cols = self.outcomes_b.len();
        (0..cols)
            .map(|y| self.probs.iter().map(|row| row[y]).sum())
            .collect()
    }
}

/// Conditional joint probability distribution
/// `P(A=x, B=y) = P(A=x) * P(B=y | A=x)`, measured A first. Outcomes of A
/// at or below the conditioning threshold contribute zero rows.
pub fn conditional_jpd<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    observable_b: &str,
) -> Result<ConditionalJpd> {
    let observable_a = model.instrument_observable(instrument_a)?;
    let outcomes_a = model.outcomes(&observable_a)?;
    let outcomes_b = model.outcomes(observable_b)?;
    let dist_a = prob_dist(model, context, &observable_a)?;
    let eps = model.tolerances().eps_cond;

    let mut probs = vec![vec![0.0; outcomes_b.len()]; outcomes_a.len()];
    let mut total = 0.0;
    for (x, &px) in dist_a.iter().enumerate() {
        if px <= eps {
            continue;
        }
        let updated = model.update(context, instrument_a, x)?;
        let cond = prob_dist(model, &updated, observable_b)?;
        for (y, &q) in cond.iter().enumerate() {
            probs[x][y] = px * q;
            total += px * q;
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(CmmError::invariant(
            "conditional JPD sums to 1",
            (total - 1.0).abs(),
        ));
    }
    Ok(ConditionalJpd {
        observable_a,
        observable_b: observable_b.to_string(),
        outcomes_a,
        outcomes_b,
        probs,
    })
}

/// Probability of a sequence of instrument outcomes under chained updates.
/// A step whose outcome probability is at or below the conditioning
/// threshold makes the whole product zero.
pub fn sequential_prob<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    steps: &[(&str, usize)],
) -> Result<f64> {
    let eps = model.tolerances().eps_cond;
    let mut current = context.clone();
    let mut product = 1.0;
    for &(instrument, outcome) in steps {
        let observable = model.instrument_observable(instrument)?;
        let dist = prob_dist(model, &current, &observable)?;
        let p = *dist.get(outcome).ok_or_else(|| {
            CmmError::Lookup(format!(
                "outcome index {outcome} out of range for {observable}"
            ))
        })?;
        if p <= eps {
            return Ok(0.0);
        }
        product *= p;
        current = model.update(&current, instrument, outcome)?;
    }
    Ok(product)
}

/// Order-effect verdict for a pair of instruments in a context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEffect {
    pub present: bool,
    pub max_discrepancy: f64,
    /// Outcome pair (x, y) realizing the maximum discrepancy.
    pub witness: (usize, usize),
}

/// Detect the order effect: compare `P(A=x, B=y)` with `P(B=y, A=x)` over
/// the full outcome grid.
pub fn order_effect<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<OrderEffect> {
    let ab = conditional_jpd(
        model,
        context,
        instrument_a,
        &model.instrument_observable(instrument_b)?,
    )?;
    let ba = conditional_jpd(
        model,
        context,
        instrument_b,
        &model.instrument_observable(instrument_a)?,
    )?;
    let mut max_discrepancy = 0.0;
    let mut witness = (0, 0);
    for x in 0..ab.outcomes_a.len() {
        for y in 0..ab.outcomes_b.len() {
            let d = (ab.probs[x][y] - ba.probs[y][x]).abs();
            if d > max_discrepancy {
                max_discrepancy = d;
                witness = (x, y);
            }
        }
    }
    Ok(OrderEffect {
        present: max_discrepancy > model.tolerances().eps_oe,
        max_discrepancy,
        witness,
    })
}

/// Two instruments are conditionally compatible for a context when they show
/// no order effect there; the shared JPD then satisfies the Bayes formulas.
pub fn conditionally_compatible<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<bool> {
    Ok(!order_effect(model, context, instrument_a, instrument_b)?.present)
}

/// Bayes posterior over the outcomes of B given the observation `A=x`,
/// computed from the prior `P(B=.)` and the likelihoods `P(A=x | B=.)`.
///
/// Requires conditional compatibility; under it the posterior agrees with
/// the directly conditioned probability `P(B=. | A=x)`.
pub fn bayes_infer<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    x: usize,
    instrument_b: &str,
) -> Result<Vec<f64>> {
    if !conditionally_compatible(model, context, instrument_a, instrument_b)? {
        return Err(CmmError::Precondition(format!(
            "{instrument_a} and {instrument_b} are not conditionally compatible in {}",
            model.describe_context(context)
        )));
    }
    let eps = model.tolerances().eps_cond;
    let observable_a = model.instrument_observable(instrument_a)?;
    let observable_b = model.instrument_observable(instrument_b)?;
    let dist_a = prob_dist(model, context, &observable_a)?;
    let px = dist_a.get(x).copied().ok_or_else(|| {
        CmmError::Lookup(format!("outcome index {x} out of range for {observable_a}"))
    })?;
    if px <= eps {
        return Err(CmmError::Conditioning {
            context: model.describe_context(context),
            observable: observable_a,
            outcome: x.to_string(),
        });
    }
    let prior = prob_dist(model, context, &observable_b)?;
    let mut joint = vec![0.0; prior.len()];
    let mut norm = 0.0;
    for (j, &pj) in prior.iter().enumerate() {
        if pj <= eps {
            continue;
        }
        let likelihood = conditional_prob(model, context, instrument_b, j, &observable_a, x)?;
        joint[j] = pj * likelihood;
        norm += joint[j];
    }
    if norm <= eps {
        return Err(CmmError::Conditioning {
            context: model.describe_context(context),
            observable: observable_a,
            outcome: x.to_string(),
        });
    }
    Ok(joint.into_iter().map(|v| v / norm).collect())
}

/// Interference regime classification for dichotomous conditioning
/// observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceRegime {
    /// |lambda| <= 1: the term is expressible as `2 cos(theta) sqrt(...)`.
    Trigonometric,
    /// |lambda| >= 1: hyperbolic interference.
    Hyperbolic,
    /// Some factor under the square root is numerically zero (or the
    /// conditioning observable is not dichotomous), so lambda is undefined.
    Degenerate,
}

/// Violation of the total-probability formula for one target outcome:
/// `delta = P(B=y) - sum_x P(B=y | A=x) P(A=x)`, with the normalized
/// coefficient `lambda` and angle `theta` when the conditioning observable
/// is dichotomous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceDatum {
    pub delta: f64,
    pub lambda: Option<f64>,
    pub regime: InterferenceRegime,
    /// `arccos(lambda)` in radians, trigonometric regime only.
    pub theta: Option<f64>,
}

/// Interference term of the total-probability formula for `B=y` conditioned
/// through the instrument for A.
pub fn ftp_interference<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    observable_b: &str,
    y: usize,
) -> Result<InterferenceDatum> {
    let tol = model.tolerances();
    let observable_a = model.instrument_observable(instrument_a)?;
    let dist_a = prob_dist(model, context, &observable_a)?;
    let dist_b = prob_dist(model, context, observable_b)?;
    let py = *dist_b.get(y).ok_or_else(|| {
        CmmError::Lookup(format!("outcome index {y} out of range for {observable_b}"))
    })?;

    let mut classical = 0.0;
    let mut conditionals = vec![None; dist_a.len()];
    for (x, &px) in dist_a.iter().enumerate() {
        if px <= tol.eps_cond {
            continue;
        }
        let c = conditional_prob(model, context, instrument_a, x, observable_b, y)?;
        conditionals[x] = Some(c);
        classical += c * px;
    }
    let delta = py - classical;

    if dist_a.len() != 2 {
        return Ok(InterferenceDatum {
            delta,
            lambda: None,
            regime: InterferenceRegime::Degenerate,
            theta: None,
        });
    }

    // Factors under the square root: P(B=y|A=x1) P(A=x1) P(B=y|A=x2) P(A=x2).
    let mut factors = Vec::with_capacity(4);
    for x in 0..2 {
        factors.push(dist_a[x]);
        factors.push(conditionals[x].unwrap_or(0.0));
    }
    if factors.iter().any(|&f| f <= tol.eps_cond) {
        return Ok(InterferenceDatum {
            delta,
            lambda: None,
            regime: InterferenceRegime::Degenerate,
            theta: None,
        });
    }
    let root = factors.iter().product::<f64>().sqrt();
    let lambda = delta / (2.0 * root);
    let (regime, theta) = if lambda.abs() <= 1.0 + tol.lambda_trig {
        (
            InterferenceRegime::Trigonometric,
            Some(lambda.clamp(-1.0, 1.0).acos()),
        )
    } else {
        (InterferenceRegime::Hyperbolic, None)
    };
    Ok(InterferenceDatum {
        delta,
        lambda: Some(lambda),
        regime,
        theta,
    })
}

/// Replicability: repeating the instrument reproduces its outcome with
/// probability one for every outcome of positive probability.
pub fn replicability<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
) -> Result<bool> {
    Ok(replicability_residual(model, context, instrument_a)? <= model.tolerances().eps_rep)
}

/// Largest deviation of `P(A=x | A=x)` from one over the admissible outcomes.
pub fn replicability_residual<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
) -> Result<f64> {
    let eps = model.tolerances().eps_cond;
    let observable = model.instrument_observable(instrument_a)?;
    let dist = prob_dist(model, context, &observable)?;
    let mut worst = 0.0_f64;
    for (x, &px) in dist.iter().enumerate() {
        if px <= eps {
            continue;
        }
        let repeat = conditional_prob(model, context, instrument_a, x, &observable, x)?;
        worst = worst.max((repeat - 1.0).abs());
    }
    Ok(worst)
}

/// Response replicability: both triple-sequence identities
/// `P(A=x, B=y, A=x) = P(A=x, B=y)` and `P(B=y, A=x, B=y) = P(B=y, A=x)`
/// hold over the full outcome grid.
pub fn rre_check<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<bool> {
    Ok(rre_residual(model, context, instrument_a, instrument_b)? <= model.tolerances().eps_rre)
}

/// Largest deviation across both response-replicability identities.
pub fn rre_residual<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<f64> {
    let observable_a = model.instrument_observable(instrument_a)?;
    let observable_b = model.instrument_observable(instrument_b)?;
    let na = model.outcomes(&observable_a)?.len();
    let nb = model.outcomes(&observable_b)?.len();
    let mut worst = 0.0_f64;
    for x in 0..na {
        for y in 0..nb {
            let pair = sequential_prob(model, context, &[(instrument_a, x), (instrument_b, y)])?;
            let triple = sequential_prob(
                model,
                context,
                &[(instrument_a, x), (instrument_b, y), (instrument_a, x)],
            )?;
            worst = worst.max((pair - triple).abs());

            let pair_rev =
                sequential_prob(model, context, &[(instrument_b, y), (instrument_a, x)])?;
            let triple_rev = sequential_prob(
                model,
                context,
                &[(instrument_b, y), (instrument_a, x), (instrument_b, y)],
            )?;
            worst = worst.max((pair_rev - triple_rev).abs());
        }
    }
    Ok(worst)
}

/// Correlation `<A B> = sum_{x,y} x y P(A=x, B=y)` of two conditionally
/// compatible instruments with numeric outcomes.
pub fn correlation<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<f64> {
    if !conditionally_compatible(model, context, instrument_a, instrument_b)? {
        return Err(CmmError::Precondition(format!(
            "{instrument_a} and {instrument_b} are not conditionally compatible in {}",
            model.describe_context(context)
        )));
    }
    correlation_sequential(model, context, instrument_a, instrument_b)
}

/// The same correlation sum without the compatibility precondition, always
/// measured A first.
pub fn correlation_sequential<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<f64> {
    let observable_b = model.instrument_observable(instrument_b)?;
    let jpd = conditional_jpd(model, context, instrument_a, &observable_b)?;
    let values_a = numeric_outcomes(model, &jpd.observable_a)?;
    let values_b = numeric_outcomes(model, &jpd.observable_b)?;
    let mut sum = 0.0;
    for (x, &vx) in values_a.iter().enumerate() {
        for (y, &vy) in values_b.iter().enumerate() {
            sum += vx * vy * jpd.probs[x][y];
        }
    }
    Ok(sum)
}

/// Result of a CHSH evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshValue {
    pub value: f64,
    pub correlations: [f64; 4],
    /// True when the compatibility precondition was skipped and the
    /// correlations were taken sequentially, A first.
    pub sequential: bool,
}

/// CHSH expression `|<A1 B1> + <A2 B1> + <A1 B2> - <A2 B2>|` for four
/// instruments with outcomes in [-1, 1].
///
/// Each (A_i, B_j) pair must be conditionally compatible unless `force` is
/// set, in which case the correlations are evaluated sequentially (A first)
/// and flagged as such.
pub fn chsh_value<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instruments_a: [&str; 2],
    instruments_b: [&str; 2],
    force: bool,
) -> Result<ChshValue> {
    for inst in instruments_a.iter().chain(instruments_b.iter()) {
        let observable = model.instrument_observable(inst)?;
        for v in numeric_outcomes(model, &observable)? {
            if v.abs() > 1.0 + 1e-9 {
                return Err(CmmError::Precondition(format!(
                    "observable {observable} has outcome {v} outside [-1, 1]"
                )));
            }
        }
    }
    let mut correlations = [0.0; 4];
    let mut k = 0;
    for ia in instruments_a {
        for ib in instruments_b {
            correlations[k] = if force {
                correlation_sequential(model, context, ia, ib)?
            } else {
                correlation(model, context, ia, ib)?
            };
            k += 1;
        }
    }
    // Layout: [A1B1, A1B2, A2B1, A2B2].
    let value = (correlations[0] + correlations[2] + correlations[1] - correlations[3]).abs();
    Ok(ChshValue {
        value,
        correlations,
        sequential: force,
    })
}

/// Exact witness configuration of a backend CHSH search: state amplitudes
/// as (re, im) pairs plus the four Bloch vectors (a1, a2, b1, b2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshWitnessConfig {
    pub state: Vec<[f64; 2]>,
    pub bloch: [[f64; 3]; 4],
}

/// Backend-level CHSH search summary (used by the feature report).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshSummary {
    pub value: f64,
    pub configuration: String,
    /// Full-precision witness when the backend search produces one.
    pub witness: Option<ChshWitnessConfig>,
}

/// Whether the outcome `B=beta` depends on the outcomes of A: two admissible
/// outcomes of A condition `B=beta` to visibly different probabilities.
pub fn depends_on<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    observable_b: &str,
    beta: usize,
) -> Result<bool> {
    let tol = model.tolerances();
    let observable_a = model.instrument_observable(instrument_a)?;
    let dist_a = prob_dist(model, context, &observable_a)?;
    let mut conditionals = Vec::new();
    for (x, &px) in dist_a.iter().enumerate() {
        if px > tol.eps_cond {
            conditionals.push(conditional_prob(
                model,
                context,
                instrument_a,
                x,
                observable_b,
                beta,
            )?);
        }
    }
    if conditionals.len() < 2 {
        return Err(CmmError::Precondition(format!(
            "dependence needs at least two admissible outcomes of {observable_a}, found {}",
            conditionals.len()
        )));
    }
    let lo = conditionals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = conditionals
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo > tol.eps_dep)
}

/// Instruments are AB-entangled in a context when every outcome of B depends
/// on the outcomes of A.
pub fn ab_entangled<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    instrument_b: &str,
) -> Result<bool> {
    let observable_b = model.instrument_observable(instrument_b)?;
    let nb = model.outcomes(&observable_b)?.len();
    for beta in 0..nb {
        if !depends_on(model, context, instrument_a, &observable_b, beta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Concurrence of conditional probabilities, with the outcomes excluded by
/// the conditioning threshold reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concurrence {
    pub value: f64,
    /// True when some conditioning outcome was numerically null and pairs
    /// involving it were excluded from the sum.
    pub degenerate: bool,
    /// Excluded unordered pairs (indices into the outcome range of A).
    pub excluded: Vec<(usize, usize)>,
}

/// Concurrence of conditional probabilities:
/// `sum_beta sum_{alpha < alpha'} |P(B=beta|A=alpha) - P(B=beta|A=alpha')|`,
/// over unordered pairs of admissible A-outcomes.
pub fn concurrence<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    observable_b: &str,
) -> Result<Concurrence> {
    let tol = model.tolerances();
    let observable_a = model.instrument_observable(instrument_a)?;
    let dist_a = prob_dist(model, context, &observable_a)?;
    let nb = model.outcomes(observable_b)?.len();

    let mut conditionals: Vec<Option<Vec<f64>>> = Vec::with_capacity(dist_a.len());
    for (x, &px) in dist_a.iter().enumerate() {
        if px <= tol.eps_cond {
            conditionals.push(None);
            continue;
        }
        let updated = model.update(context, instrument_a, x)?;
        conditionals.push(Some(prob_dist(model, &updated, observable_b)?));
    }

    let mut value = 0.0;
    let mut excluded = Vec::new();
    for alpha in 0..dist_a.len() {
        for alpha2 in (alpha + 1)..dist_a.len() {
            match (&conditionals[alpha], &conditionals[alpha2]) {
                (Some(p), Some(q)) => {
                    for beta in 0..nb {
                        value += (p[beta] - q[beta]).abs();
                    }
                }
                _ => excluded.push((alpha, alpha2)),
            }
        }
    }
    Ok(Concurrence {
        degenerate: !excluded.is_empty(),
        value,
        excluded,
    })
}

/// EPR-entanglement verdict for a pairing set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EprCheck {
    /// Perfect conditional correlation holds for every pair in gamma.
    pub holds: bool,
    /// Every outcome of A and of B appears exactly once among the pairs.
    pub complete: bool,
}

/// Perfect conditional correlation on a pairing set gamma of
/// (A-outcome, B-outcome) index pairs: `P(B=beta | A=alpha) >= 1 - eps` for
/// every pair.
pub fn epr_entangled<M: ContextualModel>(
    model: &M,
    context: &M::Context,
    instrument_a: &str,
    observable_b: &str,
    gamma: &[(usize, usize)],
) -> Result<EprCheck> {
    let tol = model.tolerances();
    let observable_a = model.instrument_observable(instrument_a)?;
    let na = model.outcomes(&observable_a)?.len();
    let nb = model.outcomes(observable_b)?.len();

    let mut seen_alpha = vec![false; na];
    for &(alpha, beta) in gamma {
        if alpha >= na || beta >= nb {
            return Err(CmmError::Input(format!(
                "gamma pair ({alpha}, {beta}) out of outcome range"
            )));
        }
        if seen_alpha[alpha] {
            return Err(CmmError::Input(format!(
                "gamma repeats the A-outcome index {alpha}"
            )));
        }
        seen_alpha[alpha] = true;
    }

    let dist_a = prob_dist(model, context, &observable_a)?;
    let mut holds = true;
    for &(alpha, beta) in gamma {
        if dist_a[alpha] <= tol.eps_cond {
            return Err(CmmError::Conditioning {
                context: model.describe_context(context),
                observable: observable_a,
                outcome: alpha.to_string(),
            });
        }
        let p = conditional_prob(model, context, instrument_a, alpha, observable_b, beta)?;
        if p < 1.0 - tol.eps_epr {
            holds = false;
        }
    }

    let mut seen_beta = vec![false; nb];
    let mut beta_repeated = false;
    for &(_, beta) in gamma {
        if seen_beta[beta] {
            beta_repeated = true;
        }
        seen_beta[beta] = true;
    }
    let complete = !beta_repeated
        && seen_alpha.iter().all(|&s| s)
        && seen_beta.iter().all(|&s| s)
        && gamma.len() == na
        && gamma.len() == nb;

    Ok(EprCheck { holds, complete })
}
