//! Seeded searches over the quantum model class: the CHSH maximizer and the
//! hunt for instrument pairs that combine the order effect with response
//! replicability.

use super::instrument::Instrument;
use super::{DensityMatrix, HermitianObservable, QuantumModel};
use crate::contextual::{ops, OutcomeValue};
use crate::error::{CmmError, Result};
use crate::linalg::{fixed, jacobi_eig, CMatrix, C64};
use crate::sampler::CounterRng;
use crate::tolerance::Tolerances;

/// Witness configuration of a CHSH search: the state amplitudes and the four
/// Bloch vectors (a1, a2, b1, b2).
#[derive(Debug, Clone, PartialEq)]
pub struct ChshWitness {
    pub state: Vec<C64>,
    pub bloch: [[f64; 3]; 4],
}

/// Result of the CHSH search.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshSearch {
    pub value: f64,
    pub witness: ChshWitness,
    pub separable: bool,
}

/// One-line description of a search result for reports.
pub fn search_space_summary(search: &ChshSearch) -> String {
    let b = &search.witness.bloch;
    format!(
        "two-qubit search{}: a1=({:.3},{:.3},{:.3}) a2=({:.3},{:.3},{:.3}) b1=({:.3},{:.3},{:.3}) b2=({:.3},{:.3},{:.3})",
        if search.separable { " (separable states)" } else { "" },
        b[0][0], b[0][1], b[0][2],
        b[1][0], b[1][1], b[1][2],
        b[2][0], b[2][1], b[2][2],
        b[3][0], b[3][1], b[3][2],
    )
}

/// Bell operator `A1(x)B1 + A2(x)B1 + A1(x)B2 - A2(x)B2` for Bloch-vector
/// observables placed on separate factors.
pub fn bell_operator(bloch: &[[f64; 3]; 4]) -> CMatrix {
    let a1 = fixed::bloch(bloch[0]);
    let a2 = fixed::bloch(bloch[1]);
    let b1 = fixed::bloch(bloch[2]);
    let b2 = fixed::bloch(bloch[3]);
    let t11 = a1.kron(&b1);
    let t21 = a2.kron(&b1);
    let t12 = a1.kron(&b2);
    let t22 = a2.kron(&b2);
    t11.add(&t21)
        .and_then(|m| m.add(&t12))
        .and_then(|m| m.sub(&t22))
        .expect("same shape")
}

/// Evaluate a witness configuration exactly: `|<psi| Bell |psi>|`.
pub fn evaluate_witness(witness: &ChshWitness) -> Result<f64> {
    let bell = bell_operator(&witness.bloch);
    let v = bell.mul_vec(&witness.state)?;
    let e: C64 = witness
        .state
        .iter()
        .zip(&v)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(e.re.abs())
}

fn expectation(bell: &CMatrix, state: &[C64]) -> f64 {
    let v = bell.mul_vec(state).expect("dimension 4");
    state.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Top eigenvector (largest eigenvalue) of a Hermitian matrix.
fn top_eigenvector(m: &CMatrix) -> Vec<C64> {
    let (_, vectors) = jacobi_eig(m);
    let n = m.rows();
    (0..n).map(|i| vectors[(i, n - 1)]).collect()
}

/// Correlation vector `v_k = Tr(rho (sigma_k (x) m))` (or with the factors
/// swapped), used for the exact per-observable ascent step.
fn side_gradient(rho4: &CMatrix, m: &CMatrix, first_factor: bool) -> [f64; 3] {
    let paulis = [fixed::sigma_x(), fixed::sigma_y(), fixed::sigma_z()];
    let mut v = [0.0; 3];
    for (k, sigma) in paulis.iter().enumerate() {
        let op = if first_factor {
            sigma.kron(m)
        } else {
            m.kron(sigma)
        };
        v[k] = op.mul(rho4).expect("dim 4").trace().expect("square").re;
    }
    v
}

fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-12 {
        None
    } else {
        Some([v[0] / n, v[1] / n, v[2] / n])
    }
}

/// CHSH maximum over two-qubit configurations: seeded random restarts
/// followed by cyclic block-coordinate ascent. Each block (the state, or one
/// Bloch vector) is maximized exactly given the others; no gradients.
///
/// With `separable` set, the state block is restricted to product states,
/// which pins the search under the classical bound.
pub fn chsh_maximize(
    dim: usize,
    seed: u64,
    restarts: usize,
    separable: bool,
) -> Result<ChshSearch> {
    if dim != 4 {
        return Err(CmmError::Precondition(format!(
            "CHSH search runs on the two-qubit space (dim 4), got {dim}"
        )));
    }
    let restarts = restarts.max(1);
    let mut best: Option<ChshSearch> = None;
    for r in 0..restarts {
        let mut rng = CounterRng::new(seed).split(r as u64);
        let candidate = ascend(&mut rng, separable);
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn ascend(rng: &mut CounterRng, separable: bool) -> ChshSearch {
    let mut bloch = [
        super::random::bloch_vector(rng),
        super::random::bloch_vector(rng),
        super::random::bloch_vector(rng),
        super::random::bloch_vector(rng),
    ];
    let mut state = if separable {
        let s1 = super::random::pure_state_vector(2, rng);
        let s2 = super::random::pure_state_vector(2, rng);
        product_state(&s1, &s2)
    } else {
        super::random::pure_state_vector(4, rng)
    };

    let mut value = f64::NEG_INFINITY;
    for _ in 0..200 {
        // State block.
        let bell = bell_operator(&bloch);
        state = if separable {
            optimize_product_state(&bell, &state)
        } else {
            top_eigenvector(&bell)
        };
        let rho = CMatrix::outer(&state);

        // Observable blocks: each Bloch vector maximizes a linear form.
        let b1m = fixed::bloch(bloch[2]);
        let b2m = fixed::bloch(bloch[3]);
        let sum_b = b1m.add(&b2m).expect("2x2");
        let diff_b = b1m.sub(&b2m).expect("2x2");
        if let Some(v) = normalize3(side_gradient(&rho, &sum_b, true)) {
            bloch[0] = v;
        }
        if let Some(v) = normalize3(side_gradient(&rho, &diff_b, true)) {
            bloch[1] = v;
        }
        let a1m = fixed::bloch(bloch[0]);
        let a2m = fixed::bloch(bloch[1]);
        let sum_a = a1m.add(&a2m).expect("2x2");
        let diff_a = a1m.sub(&a2m).expect("2x2");
        if let Some(v) = normalize3(side_gradient(&rho, &sum_a, false)) {
            bloch[2] = v;
        }
        if let Some(v) = normalize3(side_gradient(&rho, &diff_a, false)) {
            bloch[3] = v;
        }

        let new_value = expectation(&bell_operator(&bloch), &state);
        if new_value - value < 1e-13 {
            value = value.max(new_value);
            break;
        }
        value = new_value;
    }
    ChshSearch {
        value: value.abs(),
        witness: ChshWitness { state, bloch },
        separable,
    }
}

fn product_state(s1: &[C64], s2: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(4);
    for a in s1 {
        for b in s2 {
            out.push(a * b);
        }
    }
    out
}

/// Alternate exact maximization over the two tensor factors.
fn optimize_product_state(bell: &CMatrix, start: &[C64]) -> Vec<C64> {
    // Recover factors from the current product state by best rank-one fit:
    // just restart from the dominant basis decomposition.
    let mut s1 = vec![start[0] + start[1], start[2] + start[3]];
    normalize_vec(&mut s1);
    if s1.iter().all(|z| z.norm() < 1e-9) {
        s1 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    }
    let mut s2 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    for _ in 0..40 {
        // Effective operator on factor 2 given s1.
        let m2 = CMatrix::from_fn(2, 2, |k, l| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    acc += s1[i].conj() * bell[(i * 2 + k, j * 2 + l)] * s1[j];
                }
            }
            acc
        });
        let new_s2 = top_eigenvector(&m2);
        // Effective operator on factor 1 given s2.
        let m1 = CMatrix::from_fn(2, 2, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += new_s2[k].conj() * bell[(i * 2 + k, j * 2 + l)] * new_s2[l];
                }
            }
            acc
        });
        let new_s1 = top_eigenvector(&m1);
        let delta = new_s1
            .iter()
            .zip(&s1)
            .chain(new_s2.iter().zip(&s2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        s1 = new_s1;
        s2 = new_s2;
        if delta < 1e-12 {
            break;
        }
    }
    product_state(&s1, &s2)
}

fn normalize_vec(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 1e-12 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// A validated order-effect + response-replicability witness.
#[derive(Debug, Clone)]
pub struct OeRreWitness {
    pub instrument_a: Instrument,
    pub instrument_b: Instrument,
    pub context: DensityMatrix,
    pub oe_margin: f64,
    pub rre_residual: f64,
}

/// Search outcome; `found = false` after an exhausted budget is a result,
/// not an error.
#[derive(Debug, Clone)]
pub struct OeRreSearch {
    pub found: bool,
    pub witness: Option<OeRreWitness>,
    pub candidates_tried: usize,
}

/// Build the model holding one candidate pair so the generic diagnostics can
/// judge it.
pub fn pair_model(
    instrument_a: &Instrument,
    instrument_b: &Instrument,
    tol: &Tolerances,
) -> Result<QuantumModel> {
    let mut model = QuantumModel::new(instrument_a.dim(), *tol);
    model.add_instrument(instrument_a.clone(), None)?;
    model.add_instrument(instrument_b.clone(), None)?;
    Ok(model)
}

/// Seeded random search for instrument pairs showing the order effect while
/// passing response replicability, judged through the generic calculus.
///
/// With `luders_only` the candidates are restricted to projection
/// instruments of random Hermitian observables; in that class the
/// combination is impossible and the search reports `found = false`.
pub fn search_oe_rre(
    dim: usize,
    seed: u64,
    budget: usize,
    luders_only: bool,
) -> Result<OeRreSearch> {
    if dim != 2 && dim != 4 {
        return Err(CmmError::Precondition(format!(
            "witness search supports dimensions 2 and 4, got {dim}"
        )));
    }
    let tol = Tolerances::default();
    let mut tried = 0;
    for k in 0..budget {
        let mut rng = CounterRng::new(seed).split(1000 + k as u64);
        let candidate = if luders_only {
            luders_candidate(dim, &mut rng, &tol)
        } else if k % 3 == 2 {
            random_atomic_candidate(dim, &mut rng, &tol)
        } else {
            structured_mp_candidate(dim, &mut rng, &tol)
        };
        let Some((inst_a, inst_b, contexts)) = candidate else {
            continue;
        };
        tried += 1;
        let model = pair_model(&inst_a, &inst_b, &tol)?;
        let (name_a, name_b) = (inst_a.name().to_string(), inst_b.name().to_string());
        for ctx in contexts {
            let oe = ops::order_effect(&model, &ctx, &name_a, &name_b)?;
            if oe.max_discrepancy <= 1e-3 {
                continue;
            }
            let rre_residual = ops::rre_residual(&model, &ctx, &name_a, &name_b)?;
            if rre_residual < 1e-9 {
                return Ok(OeRreSearch {
                    found: true,
                    witness: Some(OeRreWitness {
                        instrument_a: inst_a,
                        instrument_b: inst_b,
                        context: ctx,
                        oe_margin: oe.max_discrepancy,
                        rre_residual,
                    }),
                    candidates_tried: tried,
                });
            }
        }
    }
    Ok(OeRreSearch {
        found: false,
        witness: None,
        candidates_tried: tried,
    })
}

type Candidate = (Instrument, Instrument, Vec<DensityMatrix>);

fn dichotomous_outcomes() -> Vec<OutcomeValue> {
    vec![OutcomeValue::numeric(-1.0), OutcomeValue::numeric(1.0)]
}

fn column(u: &CMatrix, j: usize) -> Vec<C64> {
    (0..u.rows()).map(|i| u[(i, j)]).collect()
}

/// Measure-and-prepare pair with cyclic preparations: the B-preparations lie
/// in the A-effect eigenspaces and vice versa, so each measurement's outcome
/// is pinned by the other's preparation.
fn structured_mp_candidate(
    dim: usize,
    rng: &mut CounterRng,
    tol: &Tolerances,
) -> Option<Candidate> {
    if dim == 2 {
        let u = super::random::unitary(2, rng);
        let v = super::random::unitary(2, rng);
        let a_minus = CMatrix::outer(&column(&u, 0));
        let a_plus = CMatrix::outer(&column(&u, 1));
        let b_minus = CMatrix::outer(&column(&v, 0));
        let b_plus = CMatrix::outer(&column(&v, 1));
        let inst_a = Instrument::measure_and_prepare(
            "ia",
            dichotomous_outcomes(),
            vec![a_minus.clone(), a_plus.clone()],
            vec![
                DensityMatrix::trusted(b_minus.clone()),
                DensityMatrix::trusted(b_plus.clone()),
            ],
            tol,
        )
        .ok()?;
        let inst_b = Instrument::measure_and_prepare(
            "ib",
            dichotomous_outcomes(),
            vec![b_minus, b_plus],
            vec![
                DensityMatrix::trusted(a_minus),
                DensityMatrix::trusted(a_plus),
            ],
            tol,
        )
        .ok()?;
        let contexts = vec![
            super::random::pure_state(2, rng),
            super::random::mixed_state(2, rng),
            DensityMatrix::trusted(CMatrix::outer(&column(&u, 0))),
        ];
        Some((inst_a, inst_b, contexts))
    } else {
        let u = super::random::unitary(4, rng);
        let f: Vec<CMatrix> = (0..4).map(|j| CMatrix::outer(&column(&u, j))).collect();
        let a_minus = f[0].add(&f[1]).ok()?;
        let a_plus = f[2].add(&f[3]).ok()?;
        let b_minus = f[0].add(&f[2]).ok()?;
        let b_plus = f[1].add(&f[3]).ok()?;
        // Prepared states sit in intersections of the effect eigenspaces:
        // f0 lies in both "minus" spaces, f3 in both "plus" spaces.
        let lo = DensityMatrix::trusted(f[0].clone());
        let hi = DensityMatrix::trusted(f[3].clone());
        let inst_a = Instrument::measure_and_prepare(
            "ia",
            dichotomous_outcomes(),
            vec![a_minus, a_plus],
            vec![lo.clone(), hi.clone()],
            tol,
        )
        .ok()?;
        let inst_b = Instrument::measure_and_prepare(
            "ib",
            dichotomous_outcomes(),
            vec![b_minus, b_plus],
            vec![lo, hi],
            tol,
        )
        .ok()?;
        let contexts = vec![
            DensityMatrix::trusted(f[1].clone()),
            super::random::pure_state(4, rng),
            super::random::mixed_state(4, rng),
        ];
        Some((inst_a, inst_b, contexts))
    }
}

/// Random atomic pair (Hermitian square-root Kraus operators of a random
/// two-effect POVM); generically fails response replicability but keeps the
/// search honest.
fn random_atomic_candidate(
    dim: usize,
    rng: &mut CounterRng,
    tol: &Tolerances,
) -> Option<Candidate> {
    let make = |name: &str, rng: &mut CounterRng| -> Option<Instrument> {
        let h = super::random::hermitian(dim, rng);
        let spec = crate::linalg::hermitian_eig(&h, tol.cluster_rel, 1e-9).ok()?;
        // Squash the spectrum into (0, 1) to get an effect, then pair it
        // with its complement.
        let lo = spec.eigenvalues().first().copied()?;
        let hi = spec.eigenvalues().last().copied()?;
        let width = (hi - lo).max(1e-6);
        let effect = spec.apply_function(|x| 0.05 + 0.9 * (x - lo) / width);
        let sqrt_e = crate::linalg::hermitian_eig(&effect, tol.cluster_rel, 1e-9)
            .ok()?
            .apply_function(|x| x.max(0.0).sqrt());
        let complement = CMatrix::identity(dim).sub(&effect).ok()?;
        let sqrt_c = crate::linalg::hermitian_eig(&complement, tol.cluster_rel, 1e-9)
            .ok()?
            .apply_function(|x| x.max(0.0).sqrt());
        Instrument::atomic(name, dichotomous_outcomes(), vec![sqrt_c, sqrt_e], tol).ok()
    };
    let inst_a = make("ia", rng)?;
    let inst_b = make("ib", rng)?;
    let contexts = vec![
        super::random::pure_state(dim, rng),
        super::random::mixed_state(dim, rng),
    ];
    Some((inst_a, inst_b, contexts))
}

/// Random projection (Lüders) pair.
fn luders_candidate(dim: usize, rng: &mut CounterRng, tol: &Tolerances) -> Option<Candidate> {
    let ha = HermitianObservable::new("ia", super::random::hermitian(dim, rng), tol).ok()?;
    let hb = HermitianObservable::new("ib", super::random::hermitian(dim, rng), tol).ok()?;
    let inst_a = Instrument::luders("ia", &ha, tol).ok()?;
    let inst_b = Instrument::luders("ib", &hb, tol).ok()?;
    let contexts = vec![
        super::random::pure_state(dim, rng),
        super::random::mixed_state(dim, rng),
    ];
    Some((inst_a, inst_b, contexts))
}
