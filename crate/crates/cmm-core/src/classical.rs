//! Finite Kolmogorov probability spaces as a contextual backend.
//!
//! Contexts are events of positive probability, observables are random
//! variables, and the unique instrument of each random variable is Bayesian
//! conditioning: `C -> C /\ {a = x}`. Events are stored as bitsets over at
//! most 64 sample points, which keeps exhaustive verification cheap.

use crate::contextual::ops::ChshSummary;
use crate::contextual::{ContextualModel, OutcomeValue};
use crate::error::{CmmError, Result};
use crate::tolerance::Tolerances;
use std::collections::BTreeMap;

/// Weighted finite sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteProbSpace {
    /// Build a space from point labels and weights (nonnegative, finite,
    /// summing to one within tolerance). Zero weights are allowed: they are
    /// the null points the quotient removes.
    pub fn new(
        labels: Vec<String>,
        weights: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<FiniteProbSpace> {
        if labels.is_empty() {
            return Err(CmmError::Input("sample space with no points".into()));
        }
        if labels.len() > 64 {
            return Err(CmmError::Input(format!(
                "sample space with {} points exceeds the 64-point bitset limit",
                labels.len()
            )));
        }
        if labels.len() != weights.len() {
            return Err(CmmError::Shape(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(CmmError::Input(format!("non-finite weight at point {i}")));
            }
            if w < 0.0 {
                return Err(CmmError::invariant(
                    format!("weight of point `{}` >= 0", labels[i]),
                    -w,
                ));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol.weights_sum {
            return Err(CmmError::invariant("weights sum to 1", (sum - 1.0).abs()));
        }
        Ok(FiniteProbSpace { labels, weights })
    }

    /// Uniform distribution over the given labels.
    pub fn uniform(labels: Vec<String>) -> FiniteProbSpace {
        let n = labels.len();
        let w = 1.0 / n as f64;
        FiniteProbSpace {
            labels,
            weights: vec![w; n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability mass of an event.
    pub fn prob(&self, event: Event) -> f64 {
        let mut p = 0.0;
        for i in 0..self.len() {
            if event.contains(i) {
                p += self.weights[i];
            }
        }
        p
    }

    /// The sure event over this space.
    pub fn omega(&self) -> Event {
        Event::full(self.len())
    }

    /// Indices of points with zero weight.
    pub fn null_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.weights[i] == 0.0)
            .collect()
    }
}

/// Subset of sample points, bitset semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    bits: u64,
}

impl Event {
    pub fn empty() -> Event {
        Event { bits: 0 }
    }

    pub fn full(n: usize) -> Event {
        if n == 64 {
            Event { bits: u64::MAX }
        } else {
            Event {
                bits: (1u64 << n) - 1,
            }
        }
    }

    pub fn from_indices(indices: &[usize]) -> Event {
        let mut bits = 0u64;
        for &i in indices {
            bits |= 1 << i;
        }
        Event { bits }
    }

    pub fn from_bits(bits: u64) -> Event {
        Event { bits }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn intersect(&self, other: Event) -> Event {
        Event {
            bits: self.bits & other.bits,
        }
    }

    pub fn union(&self, other: Event) -> Event {
        Event {
            bits: self.bits | other.bits,
        }
    }

    pub fn symmetric_difference(&self, other: Event) -> Event {
        Event {
            bits: self.bits ^ other.bits,
        }
    }

    pub fn indices(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.contains(i)).collect()
    }
}

/// Random variable: a total map from sample points to numeric outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    name: String,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<RandomVariable> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CmmError::Input(
                "random variable with non-finite value".into(),
            ));
        }
        Ok(RandomVariable {
            name: name.into(),
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, point: usize) -> f64 {
        self.values[point]
    }

    /// Sorted distinct values: the outcome range.
    pub fn range(&self) -> Vec<f64> {
        let mut r = self.values.clone();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r.dedup();
        r
    }

    /// Level set {a = x} as an event.
    pub fn level_set(&self, x: f64) -> Event {
        let mut e = Event::empty();
        for (i, &v) in self.values.iter().enumerate() {
            if v == x {
                e = e.union(Event::from_indices(&[i]));
            }
        }
        e
    }
}

/// Compose a random variable with an outcome map given as (from, to) pairs.
/// The map must cover the full range of `a`.
pub fn compose_rv(
    a: &RandomVariable,
    name: impl Into<String>,
    map: &[(f64, f64)],
) -> Result<RandomVariable> {
    let lookup =
        |x: f64| -> Option<f64> { map.iter().find(|(from, _)| *from == x).map(|(_, to)| *to) };
    for x in a.range() {
        if lookup(x).is_none() {
            return Err(CmmError::Input(format!(
                "outcome map is partial: no image for {x} in the range of {}",
                a.name()
            )));
        }
    }
    let values = a.values().iter().map(|&x| lookup(x).unwrap()).collect();
    RandomVariable::new(name, values)
}

/// Classical contextual model: a finite probability space, its random
/// variables, and named event contexts.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    space: FiniteProbSpace,
    variables: BTreeMap<String, RandomVariable>,
    contexts: BTreeMap<String, Event>,
    tolerances: Tolerances,
}

impl ClassicalModel {
    pub fn new(space: FiniteProbSpace, tolerances: Tolerances) -> ClassicalModel {
        let mut contexts = BTreeMap::new();
        contexts.insert("omega".to_string(), space.omega());
        ClassicalModel {
            space,
            variables: BTreeMap::new(),
            contexts,
            tolerances,
        }
    }

    pub fn add_variable(&mut self, rv: RandomVariable) -> Result<()> {
        if rv.values().len() != self.space.len() {
            return Err(CmmError::Shape(format!(
                "random variable {} has {} values for a {}-point space",
                rv.name(),
                rv.values().len(),
                self.space.len()
            )));
        }
        self.variables.insert(rv.name().to_string(), rv);
        Ok(())
    }

    /// Register a named event context; it must have positive probability.
    pub fn add_context(&mut self, name: impl Into<String>, event: Event) -> Result<()> {
        let name = name.into();
        if self.space.prob(event) <= self.tolerances.eps_cond {
            return Err(CmmError::invariant(
                format!("context `{name}` has positive probability"),
                0.0,
            ));
        }
        self.contexts.insert(name, event);
        Ok(())
    }

    pub fn space(&self) -> &FiniteProbSpace {
        &self.space
    }

    pub fn variables(&self) -> impl Iterator<Item = &RandomVariable> {
        self.variables.values()
    }

    pub fn variable(&self, name: &str) -> Result<&RandomVariable> {
        self.variables
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("unknown random variable `{name}`")))
    }

    /// Conditional probability `P({a = x} | C)` by the Bayes formula.
    pub fn cond_prob(&self, context: Event, a: &RandomVariable, x: f64) -> Result<f64> {
        let pc = self.space.prob(context);
        if pc <= self.tolerances.eps_cond {
            return Err(CmmError::Conditioning {
                context: self.describe_event(context),
                observable: a.name().to_string(),
                outcome: format!("{x}"),
            });
        }
        Ok(self.space.prob(context.intersect(a.level_set(x))) / pc)
    }

    /// Bayesian context update `C -> C /\ {a = x}`.
    pub fn context_update(&self, context: Event, a: &RandomVariable, x: f64) -> Result<Event> {
        let updated = context.intersect(a.level_set(x));
        if self.space.prob(updated) <= self.tolerances.eps_cond {
            return Err(CmmError::Conditioning {
                context: self.describe_event(context),
                observable: a.name().to_string(),
                outcome: format!("{x}"),
            });
        }
        Ok(updated)
    }

    fn describe_event(&self, event: Event) -> String {
        let points: Vec<&str> = (0..self.space.len())
            .filter(|&i| event.contains(i))
            .map(|i| self.space.labels()[i].as_str())
            .collect();
        format!("{{{}}}", points.join(","))
    }

    /// Exhaustive CHSH maximum over all +/-1-valued random variables on this
    /// space, evaluated in the sure context. Only available for spaces small
    /// enough to enumerate (up to 10 points).
    pub fn chsh_exhaustive(&self) -> Option<ChshSummary> {
        chsh_exhaustive_in(&self.space, self.space.omega())
    }
}

/// Exhaustive CHSH maximum over all +/-1-valued random variables in the
/// given context of a small space.
pub fn chsh_exhaustive_in(space: &FiniteProbSpace, context: Event) -> Option<ChshSummary> {
    let n = space.len();
    if n > 10 {
        return None;
    }
    let pc = space.prob(context);
    if pc <= 0.0 {
        return None;
    }
    let count = 1usize << n;

    // Conditional correlation of sign vectors u, v:
    // E[uv | C] = sum_w u(w) v(w) P(w | C); u XOR v determines the product.
    let mut point_prob = vec![0.0f64; n];
    for (i, slot) in point_prob.iter_mut().enumerate() {
        if context.contains(i) {
            *slot = space.weights()[i] / pc;
        }
    }
    // corr[m] = sum over points of (-1)^{m_i} p_i, where m = u XOR v.
    let mut corr = vec![0.0f64; count];
    for (m, slot) in corr.iter_mut().enumerate() {
        let mut e = 0.0;
        for (i, &p) in point_prob.iter().enumerate() {
            e += if m >> i & 1 == 1 { -p } else { p };
        }
        *slot = e;
    }

    let mut best = f64::NEG_INFINITY;
    let mut witness = (0, 0, 0, 0);
    for b1 in 0..count {
        for b2 in 0..count {
            // f(a) = E(a,b1) + E(a,b2), g(a) = E(a,b1) - E(a,b2);
            // CHSH = |f(a1) + g(a2)| maximized blockwise.
            let mut f_max = f64::NEG_INFINITY;
            let mut f_min = f64::INFINITY;
            let mut g_max = f64::NEG_INFINITY;
            let mut g_min = f64::INFINITY;
            let mut f_arg = (0, 0);
            let mut g_arg = (0, 0);
            for a in 0..count {
                let e1 = corr[a ^ b1];
                let e2 = corr[a ^ b2];
                let f = e1 + e2;
                let g = e1 - e2;
                if f > f_max {
                    f_max = f;
                    f_arg.0 = a;
                }
                if f < f_min {
                    f_min = f;
                    f_arg.1 = a;
                }
                if g > g_max {
                    g_max = g;
                    g_arg.0 = a;
                }
                if g < g_min {
                    g_min = g;
                    g_arg.1 = a;
                }
            }
            let hi = f_max + g_max;
            let lo = -(f_min + g_min);
            let (v, a1, a2) = if hi >= lo {
                (hi, f_arg.0, g_arg.0)
            } else {
                (lo, f_arg.1, g_arg.1)
            };
            if v > best {
                best = v;
                witness = (a1, a2, b1, b2);
            }
        }
    }
    Some(ChshSummary {
        value: best,
        configuration: format!(
            "exhaustive +/-1 variables: a1={:#b} a2={:#b} b1={:#b} b2={:#b}",
            witness.0, witness.1, witness.2, witness.3
        ),
        witness: None,
    })
}

impl ContextualModel for ClassicalModel {
    type Context = Event;

    fn observables(&self) -> Vec<String> {
        self.variables.keys().cloned().collect()
    }

    fn outcomes(&self, observable: &str) -> Result<Vec<OutcomeValue>> {
        Ok(self
            .variable(observable)?
            .range()
            .into_iter()
            .map(OutcomeValue::numeric)
            .collect())
    }

    fn instruments_for(&self, observable: &str) -> Result<Vec<String>> {
        self.variable(observable)?;
        Ok(vec![observable.to_string()])
    }

    fn instrument_observable(&self, instrument: &str) -> Result<String> {
        self.variable(instrument)?;
        Ok(instrument.to_string())
    }

    fn prob_dist(&self, context: &Event, observable: &str) -> Result<Vec<f64>> {
        let rv = self.variable(observable)?;
        let pc = self.space.prob(*context);
        if pc <= self.tolerances.eps_cond {
            return Err(CmmError::Conditioning {
                context: self.describe_event(*context),
                observable: observable.to_string(),
                outcome: "(distribution)".into(),
            });
        }
        Ok(rv
            .range()
            .into_iter()
            .map(|x| self.space.prob(context.intersect(rv.level_set(x))) / pc)
            .collect())
    }

    fn update(&self, context: &Event, instrument: &str, outcome: usize) -> Result<Event> {
        let rv = self.variable(instrument)?;
        let range = rv.range();
        let x = *range.get(outcome).ok_or_else(|| {
            CmmError::Lookup(format!(
                "outcome index {outcome} out of range for {instrument}"
            ))
        })?;
        self.context_update(*context, rv, x)
    }

    fn context_names(&self) -> Vec<String> {
        self.contexts.keys().cloned().collect()
    }

    fn context(&self, name: &str) -> Result<Event> {
        self.contexts
            .get(name)
            .copied()
            .ok_or_else(|| CmmError::Lookup(format!("unknown context `{name}`")))
    }

    fn describe_context(&self, context: &Event) -> String {
        self.describe_event(*context)
    }

    fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// All events of positive probability, for spaces small enough to
    /// enumerate; the registered contexts otherwise.
    fn default_context_sample(&self, _seed: u64) -> Vec<(String, Event)> {
        let n = self.space.len();
        if n <= 12 {
            let mut out = Vec::new();
            for bits in 1..(1u64 << n) {
                let e = Event::from_bits(bits);
                if self.space.prob(e) > self.tolerances.eps_cond {
                    out.push((self.describe_event(e), e));
                }
            }
            out
        } else {
            self.contexts
                .iter()
                .map(|(name, &e)| (name.clone(), e))
                .collect()
        }
    }

    fn chsh_maximum(&self, _seed: u64, _restarts: usize) -> Option<ChshSummary> {
        self.chsh_exhaustive()
    }
}

/// Canonicalization that deletes zero-weight points: the finite-case
/// realization of the null-set quotient. Events that differ by a null set
/// and random variables that agree off a null set become identical.
#[derive(Debug, Clone)]
pub struct NullQuotient {
    kept: Vec<usize>,
    original_len: usize,
    space: FiniteProbSpace,
}

/// Build the quotient of a space by its null points.
pub fn quotient_null(space: &FiniteProbSpace) -> NullQuotient {
    let kept: Vec<usize> = (0..space.len())
        .filter(|&i| space.weights()[i] > 0.0)
        .collect();
    let labels = kept.iter().map(|&i| space.labels()[i].clone()).collect();
    let weights = kept.iter().map(|&i| space.weights()[i]).collect();
    NullQuotient {
        kept,
        original_len: space.len(),
        space: FiniteProbSpace { labels, weights },
    }
}

impl NullQuotient {
    /// The quotient space (null points removed).
    pub fn space(&self) -> &FiniteProbSpace {
        &self.space
    }

    /// True when the quotient changed nothing.
    pub fn is_identity(&self) -> bool {
        self.kept.len() == self.original_len
    }

    /// Canonical form of an event: restriction to the kept points.
    pub fn canonical_event(&self, event: Event) -> Event {
        let mut bits = 0u64;
        for (new, &old) in self.kept.iter().enumerate() {
            if event.contains(old) {
                bits |= 1 << new;
            }
        }
        Event::from_bits(bits)
    }

    /// Canonical form of a random variable: restriction to the kept points.
    pub fn canonical_rv(&self, rv: &RandomVariable) -> RandomVariable {
        RandomVariable {
            name: rv.name().to_string(),
            values: self.kept.iter().map(|&i| rv.values()[i]).collect(),
        }
    }

    /// Quotient an entire model: space, variables, and named contexts.
    pub fn canonical_model(&self, model: &ClassicalModel) -> ClassicalModel {
        let mut out = ClassicalModel::new(self.space.clone(), model.tolerances);
        for rv in model.variables() {
            out.add_variable(self.canonical_rv(rv))
                .expect("same length");
        }
        for (name, &event) in &model.contexts {
            let canon = self.canonical_event(event);
            if self.space.prob(canon) > model.tolerances.eps_cond {
                out.contexts.insert(name.clone(), canon);
            }
        }
        out
    }
}

/// Outcome of the uniqueness (separation) checks.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    /// Distinct registered random variables are distinguished by some
    /// context.
    pub observables_separated: bool,
    /// Distinct positive-probability events are distinguished by some
    /// random variable (indicator variables included).
    pub contexts_separated: bool,
    /// A colliding pair of variable names, when observables are not
    /// separated.
    pub observable_collision: Option<(String, String)>,
    /// A colliding pair of events, when contexts are not separated.
    pub context_collision: Option<(Event, Event)>,
}

/// Verify the separation conditions on a classical model.
///
/// Two events that differ only by null points receive identical conditional
/// distributions from every random variable, so contexts are separated
/// exactly when the space has no null points (any null point yields a
/// colliding pair). Registered variables are separated when no two of them
/// agree off the null set while being distinct; a single-point context
/// distinguishes variables that differ at a positive-weight point.
pub fn uniqueness_check(model: &ClassicalModel) -> UniquenessReport {
    let space = model.space();
    let eps = model.tolerances.eps_cond;

    // Contexts: a null point produces two distinct events with the same
    // distributions for every variable.
    let mut context_collision = None;
    for null in space.null_points() {
        if let Some(base) = (0..space.len())
            .find(|&i| space.weights()[i] > 0.0)
            .map(|i| Event::from_indices(&[i]))
        {
            let with_null = base.union(Event::from_indices(&[null]));
            context_collision = Some((base, with_null));
            break;
        }
    }
    // For spaces without null points, verify separation exhaustively on
    // small spaces using indicator variables, as in the separation argument.
    let contexts_separated = if context_collision.is_some() {
        false
    } else if space.len() <= 10 {
        let mut ok = true;
        'outer: for b1 in 1..(1u64 << space.len()) {
            let e1 = Event::from_bits(b1);
            if space.prob(e1) <= eps {
                continue;
            }
            for b2 in (b1 + 1)..(1u64 << space.len()) {
                let e2 = Event::from_bits(b2);
                if space.prob(e2) <= eps {
                    continue;
                }
                if !indicator_separates(space, e1, e2) {
                    ok = false;
                    context_collision = Some((e1, e2));
                    break 'outer;
                }
            }
        }
        ok
    } else {
        true
    };

    // Observables: search registered pairs for a separating context.
    let vars: Vec<&RandomVariable> = model.variables().collect();
    let mut observables_separated = true;
    let mut observable_collision = None;
    'vars: for i in 0..vars.len() {
        for j in (i + 1)..vars.len() {
            if vars[i].values() == vars[j].values() {
                continue;
            }
            let differs_positively = (0..space.len())
                .any(|p| space.weights()[p] > 0.0 && vars[i].values()[p] != vars[j].values()[p]);
            if !differs_positively {
                observables_separated = false;
                observable_collision =
                    Some((vars[i].name().to_string(), vars[j].name().to_string()));
                break 'vars;
            }
        }
    }

    UniquenessReport {
        observables_separated,
        contexts_separated,
        observable_collision,
        context_collision,
    }
}

/// Whether the indicator of `e1` or of `e2` assigns the two events different
/// conditional distributions.
fn indicator_separates(space: &FiniteProbSpace, e1: Event, e2: Event) -> bool {
    for ind in [e1, e2] {
        let p1 = space.prob(e1.intersect(ind)) / space.prob(e1);
        let p2 = space.prob(e2.intersect(ind)) / space.prob(e2);
        if (p1 - p2).abs() > 0.0 {
            return true;
        }
    }
    false
}
