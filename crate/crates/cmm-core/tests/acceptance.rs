//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them).

use cmm_core::classical::{
    chsh_exhaustive_in, quotient_null, uniqueness_check, ClassicalModel, Event, FiniteProbSpace,
    RandomVariable,
};
use cmm_core::contextual::ops::{self, InterferenceRegime};
use cmm_core::contextual::report::feature_report;
use cmm_core::contextual::{ContextualModel, OutcomeValue};
use cmm_core::linalg::{fixed, CMatrix, C64};
use cmm_core::lsr::{mackey_embed, MInstrument, MeasureModel, MeasureVector};
use cmm_core::quantum::{
    chsh_maximize, joint_distribution, pair_model, povm_from_instrument, quantum_interference,
    search_oe_rre, DensityMatrix, HermitianObservable, Instrument, JointEffectTable, Povm,
    QuantumModel,
};
use cmm_core::sampler::{self, CounterRng};
use cmm_core::Tolerances;
use std::time::Instant;

fn run_criterion(n: u32, label: &str, body: impl FnOnce() -> Result<String, String>) {
    match body() {
        Ok(detail) => println!("criterion {n:02} ({label}): PASS - {detail}"),
        Err(msg) => {
            println!("criterion {n:02} ({label}): FAIL - {msg}");
            panic!("criterion {n} ({label}) failed: {msg}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        match $cond {
            true => {}
            false => return Err(format!($($fmt)*)),
        }
    };
}

fn map_err<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Seeded random classical model: `points` sample points, three random
/// variables, optionally with one null point.
fn random_classical(points: usize, seed: u64, with_null: bool) -> ClassicalModel {
    let tol = Tolerances::default();
    let mut rng = CounterRng::new(seed);
    let mut weights: Vec<f64> = (0..points).map(|_| 0.05 + rng.next_f64()).collect();
    if with_null && points > 1 {
        let idx = (rng.next_u64() % points as u64) as usize;
        weights[idx] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let labels: Vec<String> = (0..points).map(|i| format!("w{i}")).collect();
    let space = FiniteProbSpace::new(labels, weights, &tol).expect("valid space");
    let mut model = ClassicalModel::new(space, tol);
    for (k, name) in ["u", "v", "s"].iter().enumerate() {
        let card = if k == 2 { 3 } else { 2 };
        let values: Vec<f64> = (0..points)
            .map(|_| {
                let x = (rng.next_u64() % card) as f64;
                if card == 2 {
                    2.0 * x - 1.0
                } else {
                    x
                }
            })
            .collect();
        model
            .add_variable(RandomVariable::new(*name, values).unwrap())
            .unwrap();
    }
    model
}

#[test]
fn criterion_01_classical_law_suite() {
    run_criterion(1, "classical laws on 50 seeded spaces", || {
        let start = Instant::now();
        let mut contexts_checked = 0usize;
        let mut chsh_best = 0.0f64;
        for i in 0..50u64 {
            let points = 2 + (i % 7) as usize; // 2..=8
            let model = random_classical(points, 0xC1A551C0 + i, false);
            let observables = model.observables();
            let sample = model.default_context_sample(0);
            for (_, ctx) in &sample {
                contexts_checked += 1;
                for a in &observables {
                    let repl = map_err(ops::replicability_residual(&model, ctx, a))?;
                    ensure!(
                        repl <= 1e-12,
                        "replicability residual {repl:e} on space {i}"
                    );
                    for b in &observables {
                        if a == b {
                            continue;
                        }
                        let nb = map_err(model.outcomes(b))?.len();
                        for y in 0..nb {
                            let datum = map_err(ops::ftp_interference(&model, ctx, a, b, y))?;
                            ensure!(
                                datum.delta.abs() < 1e-12,
                                "FTP residual {:e} on space {i}",
                                datum.delta.abs()
                            );
                        }
                        let oe = map_err(ops::order_effect(&model, ctx, a, b))?;
                        ensure!(
                            oe.max_discrepancy <= 1e-12,
                            "order effect {:e} on space {i}",
                            oe.max_discrepancy
                        );
                        let rre = map_err(ops::rre_residual(&model, ctx, a, b))?;
                        ensure!(rre <= 1e-12, "RRE residual {rre:e} on space {i}");
                    }
                }
            }
            let chsh = chsh_exhaustive_in(model.space(), model.space().omega())
                .expect("small space supports exhaustive search");
            ensure!(
                chsh.value <= 2.0 + 1e-12,
                "exhaustive CHSH {} on space {i}",
                chsh.value
            );
            chsh_best = chsh_best.max(chsh.value);
        }
        let elapsed = start.elapsed();
        ensure!(
            elapsed.as_secs_f64() < 30.0,
            "runtime {:.1}s exceeds 30s",
            elapsed.as_secs_f64()
        );
        Ok(format!(
            "{contexts_checked} contexts, best exhaustive CHSH {chsh_best:.12}, {:.2}s",
            elapsed.as_secs_f64()
        ))
    });
}

fn qubit_fixture() -> QuantumModel {
    let tol = Tolerances::default();
    let mut m = QuantumModel::new(2, tol);
    m.add_observable(HermitianObservable::new("sz", fixed::sigma_z(), &tol).unwrap())
        .unwrap();
    m.add_observable(HermitianObservable::new("sx", fixed::sigma_x(), &tol).unwrap())
        .unwrap();
    m.add_state(
        "zero",
        DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap(),
    )
    .unwrap();
    m
}

#[test]
fn criterion_02_projective_feature_table() {
    run_criterion(2, "projective feature table", || {
        let start = Instant::now();
        let model = qubit_fixture();
        let contexts = model.default_context_sample(2026);
        let observables = model.observables();
        let report = map_err(feature_report(&model, &contexts, &observables, 2026))?;

        ensure!(report.ftp_violated, "expected FTP violation");
        ensure!(report.order_effect, "expected order effect");
        ensure!(report.replicability, "expected replicability to hold");
        ensure!(!report.rre, "expected RRE to fail");
        ensure!(!report.oe_and_rre, "expected no OE+RRE combination");
        ensure!(
            report.bell_violated,
            "expected Bell violation, CHSH max {}",
            report.chsh_max
        );

        // Witnesses re-verify through the operations they summarize.
        let ftp = report.ftp_witness.as_ref().ok_or("missing FTP witness")?;
        let ctx = contexts
            .iter()
            .find(|(n, _)| *n == ftp.context)
            .map(|(_, c)| c.clone())
            .ok_or("FTP witness context not in sample")?;
        let datum = map_err(ops::ftp_interference(
            &model,
            &ctx,
            &ftp.instrument_a,
            &ftp.observable_b,
            ftp.outcome_b,
        ))?;
        ensure!(
            (datum.delta - ftp.delta).abs() < 1e-12,
            "FTP witness does not re-verify"
        );
        let oe_w = report.oe_witness.as_ref().ok_or("missing OE witness")?;
        let ctx = contexts
            .iter()
            .find(|(n, _)| *n == oe_w.context)
            .map(|(_, c)| c.clone())
            .ok_or("OE witness context not in sample")?;
        let oe = map_err(ops::order_effect(
            &model,
            &ctx,
            &oe_w.instrument_a,
            &oe_w.instrument_b,
        ))?;
        ensure!(oe.present, "OE witness does not re-verify");
        let rre_w = report
            .rre_failure
            .as_ref()
            .ok_or("missing RRE failure witness")?;
        let ctx = contexts
            .iter()
            .find(|(n, _)| *n == rre_w.context)
            .map(|(_, c)| c.clone())
            .ok_or("RRE witness context not in sample")?;
        ensure!(
            !map_err(ops::rre_check(
                &model,
                &ctx,
                &rre_w.instrument_a,
                &rre_w.instrument_b
            ))?,
            "RRE failure witness does not re-verify"
        );
        // The Bell row's witness re-evaluates to the reported maximum.
        let bell_w = report.chsh_witness.as_ref().ok_or("missing CHSH witness")?;
        let witness = cmm_core::quantum::ChshWitness {
            state: bell_w
                .state
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect(),
            bloch: bell_w.bloch,
        };
        let re_evaluated = map_err(cmm_core::quantum::evaluate_witness(&witness))?;
        ensure!(
            (re_evaluated - report.chsh_max).abs() < 1e-9,
            "CHSH witness re-evaluates to {re_evaluated}, reported {}",
            report.chsh_max
        );

        let elapsed = start.elapsed();
        ensure!(
            elapsed.as_secs_f64() < 10.0,
            "runtime {:.1}s exceeds 10s",
            elapsed.as_secs_f64()
        );
        Ok(format!(
            "table (FTP yes, OE yes, repl yes, RRE no, OE+RRE no, Bell yes), CHSH {:.4}, {:.2}s",
            report.chsh_max,
            elapsed.as_secs_f64()
        ))
    });
}

/// Random dichotomous observable in dimension 4: sign split of a random
/// Hermitian at the middle of its spectrum.
fn random_dichotomous_4(rng: &mut CounterRng, tol: &Tolerances) -> HermitianObservable {
    loop {
        let h = cmm_core::quantum::random::hermitian(4, rng);
        let probe = HermitianObservable::new("probe", h, tol).unwrap();
        let eig = probe.spectral().eigenvalues();
        if eig.len() < 4 {
            continue;
        }
        let split = 0.5 * (eig[1] + eig[2]);
        let obs = cmm_core::quantum::function_of_observable(
            &probe,
            "a",
            |x| if x > split { 1.0 } else { -1.0 },
            tol,
        )
        .unwrap();
        if obs.outcomes().len() == 2 {
            return obs;
        }
    }
}

#[test]
fn criterion_03_interference_identity() {
    run_criterion(3, "interference identity", || {
        let tol = Tolerances::default();
        let mut rng = CounterRng::new(0x1F7E);
        let mut checked = 0;
        let mut trig_checked = 0;
        for case in 0..20 {
            let dim = if case % 2 == 0 { 2 } else { 4 };
            let (a, b) = if dim == 2 {
                (
                    HermitianObservable::new(
                        "a",
                        cmm_core::quantum::random::hermitian(2, &mut rng),
                        &tol,
                    )
                    .unwrap(),
                    HermitianObservable::new(
                        "b",
                        cmm_core::quantum::random::hermitian(2, &mut rng),
                        &tol,
                    )
                    .unwrap(),
                )
            } else {
                (
                    random_dichotomous_4(&mut rng, &tol),
                    HermitianObservable::new(
                        "b",
                        cmm_core::quantum::random::hermitian(4, &mut rng),
                        &tol,
                    )
                    .unwrap(),
                )
            };
            let psi = cmm_core::quantum::random::pure_state(dim, &mut rng);
            for y in 0..b.outcomes().len() {
                let result = map_err(quantum_interference(&psi, &a, &b, y, &tol))?;
                let gap = (result.delta_cross_terms - result.datum.delta).abs();
                ensure!(
                    gap < 1e-9,
                    "cross-term vs definition gap {gap:e} (case {case}, y {y})"
                );
                checked += 1;

                // Dichotomous reconstruction through the extracted angle.
                if a.outcomes().len() == 2
                    && result.datum.regime == InterferenceRegime::Trigonometric
                {
                    let theta = result.datum.theta.ok_or("missing theta")?;
                    let mut model = QuantumModel::new(dim, tol);
                    map_err(model.add_observable(a.clone()))?;
                    map_err(model.add_observable(b.clone()))?;
                    let dist_a = map_err(ops::prob_dist(&model, &psi, a.name()))?;
                    let mut classical = 0.0;
                    let mut product = 1.0;
                    for (x, &px) in dist_a.iter().enumerate() {
                        let c = map_err(ops::conditional_prob(
                            &model,
                            &psi,
                            a.name(),
                            x,
                            b.name(),
                            y,
                        ))?;
                        classical += px * c;
                        product *= px * c;
                    }
                    let reconstructed = classical + 2.0 * theta.cos() * product.sqrt();
                    let dist_b = map_err(ops::prob_dist(&model, &psi, b.name()))?;
                    ensure!(
                        (reconstructed - dist_b[y]).abs() < 1e-9,
                        "cos reconstruction off by {:e}",
                        (reconstructed - dist_b[y]).abs()
                    );
                    trig_checked += 1;
                }
            }
        }
        ensure!(
            trig_checked >= 10,
            "only {trig_checked} trigonometric cases"
        );
        Ok(format!(
            "{checked} (state, outcome) cases, {trig_checked} angle reconstructions"
        ))
    });
}

#[test]
fn criterion_04_tsirelson_attainment() {
    run_criterion(4, "Tsirelson attainment", || {
        let start = Instant::now();
        let tsirelson = 2.0 * std::f64::consts::SQRT_2;
        let search = map_err(chsh_maximize(4, 0xB311, 16, false))?;
        ensure!(
            search.value >= 2.8184,
            "maximizer reached only {}",
            search.value
        );
        ensure!(
            search.value <= tsirelson + 1e-6,
            "maximizer exceeded the bound: {}",
            search.value
        );
        let separable = map_err(chsh_maximize(4, 0xB312, 16, true))?;
        ensure!(
            separable.value <= 2.0 + 1e-6,
            "separable search exceeded 2: {}",
            separable.value
        );
        let elapsed = start.elapsed();
        ensure!(
            elapsed.as_secs_f64() < 120.0,
            "runtime {:.1}s exceeds 2min",
            elapsed.as_secs_f64()
        );
        Ok(format!(
            "entangled {:.6}, separable {:.6}, {:.2}s",
            search.value,
            separable.value,
            elapsed.as_secs_f64()
        ))
    });
}

fn two_qubit_pair(a_bloch: [f64; 3], b_bloch: [f64; 3], tol: &Tolerances) -> QuantumModel {
    let mut m = QuantumModel::new(4, *tol);
    let a = fixed::bloch(a_bloch).kron(&CMatrix::identity(2));
    let b = CMatrix::identity(2).kron(&fixed::bloch(b_bloch));
    m.add_observable(HermitianObservable::new("a", a, tol).unwrap())
        .unwrap();
    m.add_observable(HermitianObservable::new("b", b, tol).unwrap())
        .unwrap();
    m
}

#[test]
fn criterion_05_concurrence_and_epr() {
    run_criterion(5, "concurrence / EPR equivalences", || {
        let tol = Tolerances::default();
        let inv = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let model = two_qubit_pair([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], &tol);
        let singlet =
            DensityMatrix::from_pure(&[C64::new(0.0, 0.0), inv, -inv, C64::new(0.0, 0.0)]).unwrap();
        let conc = map_err(ops::concurrence(&model, &singlet, "a", "b"))?;
        ensure!(
            (conc.value - 2.0).abs() < 1e-9,
            "singlet concurrence {}",
            conc.value
        );
        let epr = map_err(ops::epr_entangled(
            &model,
            &singlet,
            "a",
            "b",
            &[(1, 0), (0, 1)],
        ))?;
        ensure!(epr.holds && epr.complete, "singlet EPR pairing failed");

        let half = C64::new(0.5, 0.0);
        let product = DensityMatrix::from_pure(&[half, half, half, half]).unwrap();
        let conc0 = map_err(ops::concurrence(&model, &product, "a", "b"))?;
        ensure!(
            conc0.value.abs() < 1e-12,
            "product concurrence {}",
            conc0.value
        );

        // Proposition-style equivalences on seeded random states with random
        // Lüders sigma-observables.
        let mut rng = CounterRng::new(0x5107);
        let mut tested = 0;
        let mut maximal = 0;
        for _ in 0..100 {
            let a_dir = cmm_core::quantum::random::bloch_vector(&mut rng);
            let b_dir = cmm_core::quantum::random::bloch_vector(&mut rng);
            let m = two_qubit_pair(a_dir, b_dir, &tol);
            let psi = cmm_core::quantum::random::pure_state(4, &mut rng);
            let dist = map_err(ops::prob_dist(&m, &psi, "a"))?;
            if dist.iter().any(|&p| p <= 1e-6) {
                continue; // dependence needs two admissible outcomes
            }
            // Dichotomous dependence equivalence.
            let d0 = map_err(ops::depends_on(&m, &psi, "a", "b", 0))?;
            let d1 = map_err(ops::depends_on(&m, &psi, "a", "b", 1))?;
            let ent = map_err(ops::ab_entangled(&m, &psi, "a", "b"))?;
            ensure!(d0 == d1 && d1 == ent, "dependence equivalence broken");

            // Concurrence shortcut: the general sum equals
            // 2 |P(B=+|A=-) - P(B=+|A=+)| for dichotomous observables.
            let conc = map_err(ops::concurrence(&m, &psi, "a", "b"))?;
            let p_plus_given_minus = map_err(ops::conditional_prob(&m, &psi, "a", 0, "b", 1))?;
            let p_plus_given_plus = map_err(ops::conditional_prob(&m, &psi, "a", 1, "b", 1))?;
            let shortcut = 2.0 * (p_plus_given_minus - p_plus_given_plus).abs();
            ensure!(
                (conc.value - shortcut).abs() < 1e-12,
                "dichotomous shortcut gap {:e}",
                (conc.value - shortcut).abs()
            );

            // Maximal concurrence holds exactly when one complete pairing is
            // perfectly correlated.
            let lhs = conc.value >= 2.0 - 2.0 * tol.eps_epr;
            let id_pairing =
                map_err(ops::epr_entangled(&m, &psi, "a", "b", &[(0, 0), (1, 1)]))?.holds;
            let swap_pairing =
                map_err(ops::epr_entangled(&m, &psi, "a", "b", &[(0, 1), (1, 0)]))?.holds;
            ensure!(
                lhs == (id_pairing || swap_pairing),
                "maximality equivalence broken (conc {})",
                conc.value
            );
            if lhs {
                maximal += 1;
            }
            tested += 1;
        }
        ensure!(tested >= 90, "only {tested} random states were admissible");

        // Anchor the maximal side of the equivalence explicitly.
        let conc_singlet = map_err(ops::concurrence(&model, &singlet, "a", "b"))?;
        ensure!(
            conc_singlet.value >= 2.0 - 2.0 * tol.eps_epr,
            "singlet anchor"
        );
        Ok(format!(
            "singlet/product anchors plus {tested} seeded states ({maximal} maximal)"
        ))
    });
}

/// Seeded instruments of each kind for the consistency battery.
fn seeded_instrument(
    kind: usize,
    index: usize,
    rng: &mut CounterRng,
    tol: &Tolerances,
) -> Instrument {
    let dim = if index % 2 == 0 { 2 } else { 4 };
    match kind {
        0 => {
            let h = cmm_core::quantum::random::hermitian(dim, rng);
            let obs = HermitianObservable::new("h", h, tol).unwrap();
            Instrument::luders("inst", &obs, tol).unwrap()
        }
        1 => {
            // Atomic: Hermitian square roots of a random two-effect POVM.
            let h = cmm_core::quantum::random::hermitian(dim, rng);
            let obs = HermitianObservable::new("h", h, tol).unwrap();
            let lo = obs.spectral().eigenvalues()[0];
            let hi = *obs.spectral().eigenvalues().last().unwrap();
            let width = (hi - lo).max(1e-6);
            let effect = obs
                .spectral()
                .apply_function(|x| 0.1 + 0.8 * (x - lo) / width);
            let sqrt_e = HermitianObservable::new("e", effect.clone(), tol)
                .unwrap()
                .spectral()
                .apply_function(|x| x.max(0.0).sqrt());
            let complement = CMatrix::identity(dim).sub(&effect).unwrap();
            let sqrt_c = HermitianObservable::new("c", complement, tol)
                .unwrap()
                .spectral()
                .apply_function(|x| x.max(0.0).sqrt());
            Instrument::atomic(
                "inst",
                vec![OutcomeValue::numeric(-1.0), OutcomeValue::numeric(1.0)],
                vec![sqrt_c, sqrt_e],
                tol,
            )
            .unwrap()
        }
        2 => {
            // Measure-and-prepare over a random PVM with random preparations.
            let h = cmm_core::quantum::random::hermitian(dim, rng);
            let obs = HermitianObservable::new("h", h, tol).unwrap();
            let effects = obs.spectral().projectors().to_vec();
            let prepared: Vec<DensityMatrix> = (0..effects.len())
                .map(|_| cmm_core::quantum::random::pure_state(dim, rng))
                .collect();
            let outcomes = obs
                .outcomes()
                .iter()
                .map(|&x| OutcomeValue::numeric(x))
                .collect();
            Instrument::measure_and_prepare("inst", outcomes, effects, prepared, tol).unwrap()
        }
        _ => {
            // General: convex mixture of an atomic and a measure-and-prepare
            // channel per outcome.
            let atomic = seeded_instrument(1, index, rng, tol);
            let h = cmm_core::quantum::random::hermitian(dim, rng);
            let obs = HermitianObservable::new("h", h, tol).unwrap();
            let lo = obs.spectral().eigenvalues()[0];
            let hi = *obs.spectral().eigenvalues().last().unwrap();
            let width = (hi - lo).max(1e-6);
            let effect = obs
                .spectral()
                .apply_function(|x| 0.1 + 0.8 * (x - lo) / width);
            let complement = CMatrix::identity(dim).sub(&effect).unwrap();
            let mp = Instrument::measure_and_prepare(
                "mp",
                vec![OutcomeValue::numeric(-1.0), OutcomeValue::numeric(1.0)],
                vec![complement, effect],
                vec![
                    cmm_core::quantum::random::pure_state(dim, rng),
                    cmm_core::quantum::random::pure_state(dim, rng),
                ],
                tol,
            )
            .unwrap();
            let superops: Vec<CMatrix> = (0..2)
                .map(|x| {
                    let s1 = atomic.superop_matrix(x).unwrap();
                    let s2 = mp.superop_matrix(x).unwrap();
                    s1.scale(C64::new(0.5, 0.0))
                        .add(&s2.scale(C64::new(0.5, 0.0)))
                        .unwrap()
                })
                .collect();
            Instrument::general(
                "inst",
                vec![OutcomeValue::numeric(-1.0), OutcomeValue::numeric(1.0)],
                superops,
                dim,
                tol,
            )
            .unwrap()
        }
    }
}

#[test]
fn criterion_06_instrument_povm_consistency() {
    run_criterion(6, "instrument/POVM consistency", || {
        let tol = Tolerances::default();
        let mut rng = CounterRng::new(0x6EED);
        let mut tested = 0;
        for kind in 0..4 {
            for index in 0..20 {
                let inst = seeded_instrument(kind, index, &mut rng, &tol);
                let povm = map_err(povm_from_instrument(&inst, &tol))?;
                // Completeness is enforced by the POVM constructor; verify
                // the generalized Born identity over seeded states.
                for _ in 0..20 {
                    let rho = cmm_core::quantum::random::mixed_state(inst.dim(), &mut rng);
                    for x in 0..povm.len() {
                        let via_effect = map_err(povm.prob(x, &rho))?;
                        let via_map = map_err(inst.apply(x, &rho, &tol))?.prob;
                        ensure!(
                            (via_effect - via_map).abs() < 1e-9,
                            "Born consistency gap {:e} (kind {kind})",
                            (via_effect - via_map).abs()
                        );
                    }
                }
                tested += 1;
            }
        }

        // Conditional JPD equals the commuting joint distribution for
        // projection instruments.
        let model = two_qubit_pair([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], &tol);
        let a_obs = model.hermitian("a").unwrap();
        let b_obs = model.hermitian("b").unwrap();
        let a_povm = map_err(Povm::new(a_obs.spectral().projectors().to_vec(), &tol))?;
        let b_povm = map_err(Povm::new(b_obs.spectral().projectors().to_vec(), &tol))?;
        let table = map_err(JointEffectTable::product(&a_povm, &b_povm))?;
        let mut rng2 = CounterRng::new(0x77);
        for _ in 0..5 {
            let rho = cmm_core::quantum::random::mixed_state(4, &mut rng2);
            let joint = map_err(joint_distribution(&table, &rho))?;
            let jpd = map_err(ops::conditional_jpd(&model, &rho, "a", "b"))?;
            for x in 0..2 {
                for y in 0..2 {
                    ensure!(
                        (joint[x][y] - jpd.probs[x][y]).abs() < 1e-10,
                        "projection JPD mismatch {:e}",
                        (joint[x][y] - jpd.probs[x][y]).abs()
                    );
                }
            }
        }

        // A non-projection instrument whose POVM is a PVM diverges from the
        // commuting joint distribution.
        let tol2 = tol;
        let sz = HermitianObservable::new("sz", fixed::sigma_z(), &tol2).unwrap();
        let plus = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let minus = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        let mp = map_err(Instrument::measure_and_prepare(
            "sz-mp",
            vec![OutcomeValue::numeric(-1.0), OutcomeValue::numeric(1.0)],
            sz.spectral().projectors().to_vec(),
            vec![minus, plus],
            &tol2,
        ))?;
        let mp_povm = map_err(povm_from_instrument(&mp, &tol2))?;
        for x in 0..2 {
            ensure!(
                mp_povm.effect(x).sub(sz.projector(x)).unwrap().max_norm() < 1e-12,
                "the constructed instrument's POVM is not the PVM"
            );
        }
        let mut m = QuantumModel::new(2, tol2);
        map_err(m.add_observable(sz.clone()))?;
        map_err(m.add_instrument(mp, Some("sz")))?;
        let zero = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let sz_povm = map_err(Povm::new(sz.spectral().projectors().to_vec(), &tol2))?;
        let sz_table = map_err(JointEffectTable::product(&sz_povm, &sz_povm))?;
        let commuting = map_err(joint_distribution(&sz_table, &zero))?;
        let sequential = map_err(ops::conditional_jpd(&m, &zero, "sz-mp", "sz"))?;
        let mut divergence = 0.0f64;
        for x in 0..2 {
            for y in 0..2 {
                divergence = divergence.max((commuting[x][y] - sequential.probs[x][y]).abs());
            }
        }
        ensure!(
            divergence > 1e-3,
            "JPD divergence only {divergence:e} on the constructed witness"
        );
        Ok(format!(
            "{tested} instruments validated, JPD divergence witness {divergence:.3}"
        ))
    });
}

#[test]
fn criterion_07_null_quotient_uniqueness() {
    run_criterion(7, "null-quotient uniqueness", || {
        let mut quotients_changed = 0;
        for i in 0..50u64 {
            let points = 3 + (i % 6) as usize;
            let with_null = i % 2 == 0;
            let model = random_classical(points, 0x9001 + i, with_null);
            let quotient = quotient_null(model.space());
            if !quotient.is_identity() {
                quotients_changed += 1;
            }
            let canonical = quotient.canonical_model(&model);
            let report = uniqueness_check(&canonical);
            ensure!(
                report.observables_separated && report.contexts_separated,
                "space {i} not separated after quotient"
            );
        }
        ensure!(quotients_changed >= 20, "not enough null-point spaces");

        // Constructed counterexample before quotienting.
        let tol = Tolerances::default();
        let space = FiniteProbSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.5, 0.5, 0.0],
            &tol,
        )
        .unwrap();
        let mut model = ClassicalModel::new(space, tol);
        model
            .add_variable(RandomVariable::new("r", vec![0.0, 1.0, 0.0]).unwrap())
            .unwrap();
        let report = uniqueness_check(&model);
        ensure!(
            !report.contexts_separated,
            "null-point space should fail context separation"
        );
        let (e1, e2) = report
            .context_collision
            .ok_or("missing collision witness")?;
        let d1 = map_err(model.prob_dist(&e1, "r"))?;
        let d2 = map_err(model.prob_dist(&e2, "r"))?;
        ensure!(d1 == d2, "collision witness distributions differ");
        Ok(format!(
            "50 spaces separated after quotient ({quotients_changed} carried null points)"
        ))
    });
}

#[test]
fn criterion_08_sampler_convergence() {
    run_criterion(8, "sampler convergence", || {
        let n = 100_000usize;
        let bound = |p: f64| 3.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-12;

        // Classical fair coin.
        let tol = Tolerances::default();
        let space = FiniteProbSpace::uniform(vec!["h".into(), "t".into()]);
        let mut coin = ClassicalModel::new(space, tol);
        coin.add_variable(RandomVariable::new("coin", vec![1.0, 0.0]).unwrap())
            .unwrap();
        let omega = coin.space().omega();
        let seq = map_err(sampler::sample(&coin, &omega, "omega", "coin", n, 801))?;
        let nu = map_err(sampler::estimate(&seq, 2))?.nu();
        for &f in &nu {
            ensure!(
                (f - 0.5).abs() <= bound(0.5),
                "coin frequency {f} outside the concentration bound"
            );
        }

        // Quantum sequential pair from the interference fixture.
        let model = qubit_fixture();
        let zero = model.context("zero").unwrap();
        let pair = map_err(sampler::sample_sequential(
            &model, &zero, "zero", "sx", "sz", n, 802,
        ))?;
        ensure!(
            pair.failed_trials() == 0,
            "unexpected conditioning failures"
        );
        let (joint, total) = map_err(sampler::estimate_joint(&pair, 2, 2))?;
        let jpd = map_err(ops::conditional_jpd(&model, &zero, "sx", "sz"))?;
        for x in 0..2 {
            for y in 0..2 {
                let f = joint[x][y] as f64 / total as f64;
                let p = jpd.probs[x][y];
                ensure!(
                    (f - p).abs() <= bound(p),
                    "joint frequency {f} vs {p} outside the bound"
                );
            }
        }

        // Combinability: classical pair matches, the interfering quantum
        // pair does not, and its B-marginal deficit reproduces delta.
        let sa = map_err(sampler::sample(&model, &zero, "zero", "sx", n, 803))?;
        let sb = map_err(sampler::sample(&model, &zero, "zero", "sz", n, 804))?;
        let comb = map_err(sampler::combinability_check(&pair, &sa, &sb, 2, 2))?;
        ensure!(
            !comb.marginals_match,
            "interfering pair unexpectedly combinable (residual {})",
            comb.max_residual
        );
        let datum = map_err(ops::ftp_interference(&model, &zero, "sx", "sz", 1))?;
        let freq_b = map_err(sampler::estimate(&sb, 2))?.nu();
        let marginal_b1: f64 = (0..2).map(|x| joint[x][1] as f64).sum::<f64>() / total as f64;
        let empirical_delta = freq_b[1] - marginal_b1;
        ensure!(
            (empirical_delta - datum.delta).abs() < 0.02,
            "empirical delta {empirical_delta} vs analytic {}",
            datum.delta
        );

        let space = FiniteProbSpace::uniform(vec!["1".into(), "2".into(), "3".into(), "4".into()]);
        let mut classical = ClassicalModel::new(space, tol);
        classical
            .add_variable(RandomVariable::new("parity", vec![0., 1., 0., 1.]).unwrap())
            .unwrap();
        classical
            .add_variable(RandomVariable::new("low", vec![1., 1., 0., 0.]).unwrap())
            .unwrap();
        let omega = classical.space().omega();
        let cpair = map_err(sampler::sample_sequential(
            &classical, &omega, "omega", "parity", "low", n, 805,
        ))?;
        let ca = map_err(sampler::sample(
            &classical, &omega, "omega", "parity", n, 806,
        ))?;
        let cb = map_err(sampler::sample(&classical, &omega, "omega", "low", n, 807))?;
        let ccomb = map_err(sampler::combinability_check(&cpair, &ca, &cb, 2, 2))?;
        ensure!(
            ccomb.marginals_match,
            "classical pair not combinable (residual {})",
            ccomb.max_residual
        );

        Ok(format!(
            "coin/joint within 3-sigma, empirical delta {empirical_delta:.4} vs analytic {:.4}",
            datum.delta
        ))
    });
}

#[test]
fn criterion_09_oe_rre_search() {
    run_criterion(9, "OE+RRE witness search", || {
        let tol = Tolerances::default();
        let mut found_dims = Vec::new();
        for dim in [2usize, 4] {
            let result = map_err(search_oe_rre(dim, 0x0E88 + dim as u64, 60, false))?;
            if result.found {
                let w = result.witness.as_ref().ok_or("found without witness")?;
                // Validate through the generic diagnostics.
                let model = map_err(pair_model(&w.instrument_a, &w.instrument_b, &tol))?;
                let oe = map_err(ops::order_effect(&model, &w.context, "ia", "ib"))?;
                ensure!(
                    oe.present && oe.max_discrepancy > 1e-3,
                    "witness OE margin {} too small",
                    oe.max_discrepancy
                );
                let rre = map_err(ops::rre_residual(&model, &w.context, "ia", "ib"))?;
                ensure!(rre < 1e-9, "witness RRE residual {rre:e}");
                found_dims.push(dim);
            }
        }
        ensure!(
            !found_dims.is_empty(),
            "structured search found no witness in any dimension"
        );

        let restricted = map_err(search_oe_rre(2, 0x0E77, 40, true))?;
        ensure!(
            !restricted.found,
            "projection-only search must not combine OE with RRE"
        );
        Ok(format!(
            "witnesses found in dims {found_dims:?}; projection-only search empty as required"
        ))
    });
}

#[test]
fn criterion_10_lsr_equivalence() {
    run_criterion(10, "linear-space equivalence", || {
        let tol = Tolerances::default();
        // Conditioning instruments over a seeded space reproduce the
        // classical backend on every (context, variable, outcome) triple.
        let classical = random_classical(5, 0xA11CE, false);
        let space = classical.space().clone();
        let mut measure = MeasureModel::new(space.labels().to_vec(), tol);
        for name in classical.observables() {
            let rv = classical.variable(&name).unwrap();
            let range = rv.range();
            let membership: Vec<usize> = rv
                .values()
                .iter()
                .map(|v| range.iter().position(|r| r == v).unwrap())
                .collect();
            let outcomes = range.iter().map(|&x| OutcomeValue::numeric(x)).collect();
            map_err(measure.add_instrument(map_err(MInstrument::conditioning(
                &name,
                outcomes,
                &membership,
                &tol,
            ))?))?;
        }
        let mut triples = 0;
        for bits in 1..(1u64 << space.len()) {
            let event = Event::from_bits(bits);
            let pc = space.prob(event);
            if pc <= tol.eps_cond {
                continue;
            }
            // The measure-model context matching an event is its
            // conditional distribution.
            let mu = MeasureVector::state(
                (0..space.len())
                    .map(|i| {
                        if event.contains(i) {
                            space.weights()[i] / pc
                        } else {
                            0.0
                        }
                    })
                    .collect(),
                &tol,
            )
            .unwrap();
            for name in classical.observables() {
                let lhs = map_err(ops::prob_dist(&classical, &event, &name))?;
                let rhs = map_err(ops::prob_dist(&measure, &mu, &name))?;
                for (a, b) in lhs.iter().zip(&rhs) {
                    ensure!(
                        (a - b).abs() < 1e-12,
                        "classical/measure mismatch {:e}",
                        (a - b).abs()
                    );
                    triples += 1;
                }
            }
        }

        // The embedding separates seeded distinct quantum states.
        let mut m = QuantumModel::new(2, tol);
        for (name, mat) in [
            ("sx", fixed::sigma_x()),
            ("sy", fixed::sigma_y()),
            ("sz", fixed::sigma_z()),
        ] {
            map_err(m.add_observable(map_err(HermitianObservable::new(name, mat, &tol))?))?;
        }
        let mut rng = CounterRng::new(0xE4B);
        let contexts: Vec<(String, DensityMatrix)> = (0..10)
            .map(|i| {
                (
                    format!("s{i}"),
                    cmm_core::quantum::random::pure_state(2, &mut rng),
                )
            })
            .collect();
        let observables: Vec<String> = vec!["sx".into(), "sy".into(), "sz".into()];
        let embedding = map_err(mackey_embed(&m, &contexts, &observables))?;
        ensure!(
            embedding.separated,
            "states collide in the embedding: {:?}",
            embedding.collision
        );
        Ok(format!(
            "{triples} classical/measure triples agree; 10 quantum states separated"
        ))
    });
}
