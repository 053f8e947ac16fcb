//! Seed-driven property checks shared by the property tests and the
//! acceptance runner. Every check derives all of its inputs from one `u64`.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdd_core::engine::{
    apply_channel, bath_block_decompose, compile_unitary, decoupling_residual, deterministic_channel,
    randomized_channel, ChannelBranch, ExtendedEvolver, MixedUnitaryChannel,
};
use rdd_core::experiments::{
    read_csv_from, run_fig2_sweep, write_csv_to, ErrorKind, Fig2Axis, Fig2Config, Protocol, SweepRecord,
};
use rdd_core::extended::{to_double, to_extended};
use rdd_core::linalg::{
    commutator, eigvalsh, expm_hermitian, kron, operator_norm, partial_trace, phase_aligned_distance,
    trace_distance,
};
use rdd_core::model::{
    build_hahn_model, build_heisenberg, build_local_bath_model, haar_state, pauli_matrix, pauli_mul, Pauli,
    PauliWord, Phase,
};
use rdd_core::sequences::{
    randomize, seq_cdd, seq_hahn, seq_hahn_reversed, seq_udd, seq_xy4, seq_xy8, udd_pulse_times, DecouplingGroup,
    PulseSequence,
};
use rdd_core::{ComplexMatrix, C64};

pub type Check = fn(u64) -> Result<(), String>;

pub const CASES: u32 = 128;

pub const SUITES: &[(&str, Check)] = &[
    ("unitarity", unitarity),
    ("channel_preservation", channel_preservation),
    ("randomized_is_branch_average", randomized_is_branch_average),
    ("pauli_twirl", pauli_twirl),
    ("hahn_branch_identity", hahn_branch_identity),
    ("extra_pulses", extra_pulses),
    ("branch_is_conjugation", branch_is_conjugation),
    ("csv_determinism", csv_determinism),
    ("durations_sum", durations_sum),
    ("cdd_equal_intervals", cdd_equal_intervals),
    ("udd_symmetry", udd_symmetry),
    ("merged_pulses", merged_pulses),
    ("bath_blocks", bath_blocks),
    ("expm_group", expm_group),
    ("trace_distance_metric", trace_distance_metric),
    ("partial_trace_linear", partial_trace_linear),
    ("kron_associative", kron_associative),
    ("pauli_product", pauli_product),
    ("operator_norm_oracle", operator_norm_oracle),
    ("model_summaries", model_summaries),
    ("extended_matches_double", extended_matches_double),
];

/// Runs `check` on `cases` random seeds; `Err` carries the minimal failing message.
pub fn run_suite(check: Check, cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&any::<u64>(), |seed| check(seed).map_err(|m| TestCaseError::fail(format!("seed {seed}: {m}"))))
        .map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| C64::new(gauss(rng), gauss(rng)))
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = random_matrix(d, rng);
    (&a + &a.adjoint()).scale_real(0.5)
}

pub fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    expm_hermitian(&random_hermitian(d, rng), 1.0).unwrap()
}

/// Full-rank or rank-deficient density matrix.
pub fn random_density(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let rank = rng.random_range(1..=d);
    let mut rho = ComplexMatrix::zeros(d, d);
    for _ in 0..rank {
        let psi = haar_state(d, rng);
        let w: f64 = rng.random::<f64>() + 0.01;
        rho = &rho + &ComplexMatrix::projector(&psi).scale_real(w);
    }
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

pub fn random_pauli(rng: &mut ChaCha8Rng) -> Pauli {
    Pauli::ALL[rng.random_range(0..4usize)]
}

pub fn random_word(n: usize, rng: &mut ChaCha8Rng) -> PauliWord {
    let labels = (0..n).map(|_| random_pauli(rng)).collect();
    PauliWord::new(labels, Phase::from_power(rng.random_range(0..4u8)))
}

/// A sequence from one of the builders on `n` qubits with total time of order `scale`.
pub fn random_sequence(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> PulseSequence {
    let tau = scale * (0.05 + rng.random::<f64>());
    let kinds = if n == 1 { 7 } else { 6 };
    match rng.random_range(0..kinds) {
        0 => seq_hahn(n, tau).unwrap(),
        1 => seq_hahn_reversed(n, tau).unwrap(),
        2 => seq_xy4(n, tau).unwrap(),
        3 => seq_xy8(n, tau).unwrap(),
        4 => seq_cdd(n, 1, tau).unwrap(),
        5 => seq_cdd(n, 2, tau / 4.0).unwrap(),
        _ => seq_udd(rng.random_range(1..=5), tau * 4.0).unwrap(),
    }
}

fn random_group(n: usize, rng: &mut ChaCha8Rng) -> DecouplingGroup {
    match rng.random_range(0..3) {
        0 => DecouplingGroup::trivial(n),
        1 => DecouplingGroup::spin_flip(n),
        _ => DecouplingGroup::xy4(n),
    }
}

fn small_dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (rng.random_range(1..=2), rng.random_range(1..=2))
}

/// `g D g^dagger` applied directly as dense products of frame-conjugated
/// free evolutions: `prod_l g_l exp(-i H tau_l) g_l^dagger`.
pub fn frame_product(seq: &PulseSequence, h: &ComplexMatrix, n_bath: usize) -> ComplexMatrix {
    let bath_id = ComplexMatrix::identity(1 << n_bath);
    let mut d = ComplexMatrix::identity(h.dim());
    for (frame, seg) in seq.frames().iter().zip(seq.segments()) {
        let g = kron(&pauli_matrix(frame), &bath_id);
        let e = expm_hermitian(h, seg.duration).unwrap();
        d = &(&(&g * &e) * &g.adjoint()) * &d;
    }
    d
}

pub fn unitarity(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let j = 10f64.powf(-3.0 * rng.random::<f64>());
    let model = ok(build_local_bath_model(ns, nb, j, seed))?;
    let seq = random_sequence(ns, &mut rng, 0.3);
    let group = random_group(ns, &mut rng);
    for (_, branch) in ok(randomize(&seq, &group))? {
        let u = ok(compile_unitary(&branch, model.h_total()))?;
        let defect = u.unitarity_defect();
        ensure(defect <= 1e-10, || format!("unitarity defect {defect:e}"))?;
    }
    Ok(())
}

pub fn channel_preservation(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let d = 1usize << (ns + nb);
    let ch = if rng.random::<bool>() {
        let model = ok(build_local_bath_model(ns, nb, rng.random::<f64>(), seed))?;
        let seq = random_sequence(ns, &mut rng, 0.5);
        ok(randomized_channel(&seq, &random_group(ns, &mut rng), &model))?
    } else {
        let k = rng.random_range(1..=5);
        let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let branches = raw
            .iter()
            .map(|w| ChannelBranch {
                weight: w / total,
                unitary: random_unitary(d, &mut rng),
            })
            .collect();
        ok(MixedUnitaryChannel::new(branches))?
    };
    let rho = random_density(d, &mut rng);
    let out = ok(apply_channel(&ch, &rho))?;
    let tr = out.trace();
    ensure((tr.re - 1.0).abs() <= 1e-12 && tr.im.abs() <= 1e-12, || format!("trace {tr}"))?;
    let herm = out.hermiticity_defect();
    ensure(herm <= 1e-12, || format!("hermiticity defect {herm:e}"))?;
    let min = ok(eigvalsh(&out))?[0];
    ensure(min >= -1e-10, || format!("min eigenvalue {min:e}"))
}

pub fn randomized_is_branch_average(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let model = ok(build_local_bath_model(ns, nb, rng.random::<f64>(), seed))?;
    let seq = random_sequence(ns, &mut rng, 0.5);
    let group = random_group(ns, &mut rng);
    let rho = random_density(model.dim(), &mut rng);
    let mixed = ok(apply_channel(&ok(randomized_channel(&seq, &group, &model))?, &rho))?;
    let mut avg = ComplexMatrix::zeros(model.dim(), model.dim());
    for (w, branch) in ok(randomize(&seq, &group))? {
        let out = ok(apply_channel(&ok(deterministic_channel(&branch, &model))?, &rho))?;
        avg = &avg + &out.scale_real(w);
    }
    let diff = (&mixed - &avg).max_abs();
    ensure(diff <= 1e-13, || format!("mixture differs from branch average by {diff:e}"))
}

pub fn pauli_twirl(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let nb = rng.random_range(1..=2);
    let site = rng.random_range(0..n);
    let axis = Pauli::NONTRIVIAL[rng.random_range(0..3usize)];
    let b = random_hermitian(1 << nb, &mut rng);
    let h_sb = kron(&pauli_matrix(&PauliWord::single(n, site, axis)), &b);
    let r = ok(decoupling_residual(&DecouplingGroup::xy4(n), &h_sb, n))?;
    ensure(r <= 1e-12, || format!("XY4 residual {r:e} on {axis:?} at site {site}"))?;
    let zb = kron(&pauli_matrix(&PauliWord::single(1, 0, Pauli::Z)), &b);
    let r = ok(decoupling_residual(&DecouplingGroup::spin_flip(1), &zb, 1))?;
    ensure(r <= 1e-12, || format!("spin-flip residual {r:e}"))?;
    if n < 2 {
        return Ok(());
    }
    let hs = ok(build_heisenberg(n))?;
    for g in DecouplingGroup::xy4(n).elements() {
        let c = commutator(&pauli_matrix(g), &hs).max_abs();
        ensure(c <= 1e-12, || format!("[{g}, H_S] = {c:e}"))?;
    }
    Ok(())
}

pub fn hahn_branch_identity(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let j = rng.random::<f64>();
    let model = if ns > 1 && rng.random::<bool>() {
        ok(build_hahn_model(ns, nb, j, seed))?
    } else {
        ok(build_local_bath_model(ns, nb, j, seed))?
    };
    let tau = 0.02 + rng.random::<f64>();
    let seq = ok(seq_hahn(ns, tau))?;
    let branches = ok(randomize(&seq, &DecouplingGroup::spin_flip(ns)))?;
    let forward = ok(compile_unitary(&seq, model.h_total()))?;
    let reversed = ok(compile_unitary(&ok(seq_hahn_reversed(ns, tau))?, model.h_total()))?;
    ensure(branches.len() == 2, || format!("{} branches", branches.len()))?;
    for ((w, branch), expected) in branches.iter().zip([&forward, &reversed]) {
        ensure(*w == 0.5, || format!("weight {w}"))?;
        let u = ok(compile_unitary(branch, model.h_total()))?;
        let dist = phase_aligned_distance(&u, expected);
        ensure(dist <= 1e-10, || format!("branch differs from echo by {dist:e}"))?;
    }
    Ok(())
}

pub fn extra_pulses(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let seq = random_sequence(n, &mut rng, 1.0);
    let g = random_word(n, &mut rng);
    let branch = ok(seq.conjugated(&g))?;
    ensure(branch.pulse_count() <= seq.pulse_count() + 2, || {
        format!("{} pulses from {}", branch.pulse_count(), seq.pulse_count())
    })?;
    ensure(branch.len() == seq.len(), || "segment count changed".into())?;
    for (a, b) in branch.segments().iter().zip(seq.segments()).skip(1) {
        ensure(a == b, || "interior segment changed".into())?;
    }
    ensure(branch.segments()[0].duration == seq.segments()[0].duration, || "first duration changed".into())?;
    ensure(branch.total_time() == seq.total_time(), || "total time changed".into())
}

pub fn branch_is_conjugation(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let model = ok(build_local_bath_model(ns, nb, rng.random::<f64>(), seed))?;
    let seq = random_sequence(ns, &mut rng, 0.5);
    let g = random_word(ns, &mut rng);
    let d = ok(compile_unitary(&seq, model.h_total()))?;
    let gm = kron(&pauli_matrix(&g), &ComplexMatrix::identity(model.dim_bath()));
    let expected = &(&gm * &d) * &gm.adjoint();
    let got = ok(compile_unitary(&ok(seq.conjugated(&g))?, model.h_total()))?;
    let dist = phase_aligned_distance(&got, &expected);
    ensure(dist <= 1e-10, || format!("branch differs from g D g^dagger by {dist:e}"))
}

fn random_record(rng: &mut ChaCha8Rng) -> SweepRecord {
    let protocols = [Protocol::Hahn, Protocol::Xy4, Protocol::Xy8, Protocol::Cdd, Protocol::Udd];
    let protocol = protocols[rng.random_range(0..5usize)];
    let order_k = match protocol {
        Protocol::Cdd | Protocol::Udd => rng.random_range(1..=6),
        _ => 0,
    };
    let pick = |rng: &mut ChaCha8Rng| 10f64.powf(-8.0 * rng.random::<f64>()) * (1.0 + rng.random::<f64>());
    SweepRecord {
        protocol,
        randomized: rng.random(),
        order_k,
        j: pick(rng),
        tau: pick(rng),
        total_t: pick(rng),
        seed: rng.random(),
        trial: rng.random_range(0..50),
        error_kind: if rng.random() { ErrorKind::JointState } else { ErrorKind::Subsystem },
        error: rng.random::<f64>() * 10f64.powi(-rng.random_range(0..30)),
    }
}

pub fn csv_determinism(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(0..40);
    let records: Vec<SweepRecord> = (0..count).map(|_| random_record(&mut rng)).collect();
    let mut shuffled = records.clone();
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, rng.random_range(0..=i));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    ok(write_csv_to(&records, &mut a))?;
    ok(write_csv_to(&shuffled, &mut b))?;
    ensure(a == b, || "input order changed the bytes".into())?;
    let back = ok(read_csv_from(a.as_slice()))?;
    let mut again = Vec::new();
    ok(write_csv_to(&back, &mut again))?;
    ensure(again == a, || "round trip changed the bytes".into())?;
    let mut sorted_back = back.clone();
    sorted_back.sort_by(|x, y| x.error.total_cmp(&y.error).then(x.seed.cmp(&y.seed)));
    let mut sorted_in = records;
    sorted_in.sort_by(|x, y| x.error.total_cmp(&y.error).then(x.seed.cmp(&y.seed)));
    ensure(sorted_back == sorted_in, || "round trip lost information".into())?;

    if rng.random_range(0..8) == 0 {
        let grid = vec![0.05 + 0.1 * rng.random::<f64>(), 0.2 + 0.1 * rng.random::<f64>()];
        let cfg = Fig2Config::new(Fig2Axis::T, vec![1, 2], grid, 2, rng.random());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        ok(write_csv_to(&ok(run_fig2_sweep(&cfg))?, &mut x))?;
        ok(write_csv_to(&ok(run_fig2_sweep(&cfg))?, &mut y))?;
        ensure(x == y, || "repeated sweep produced different bytes".into())?;
    }
    Ok(())
}

pub fn durations_sum(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let tau = 10f64.powf(-4.0 * rng.random::<f64>());
    let k = rng.random_range(1..=4);
    let seqs = [
        (ok(seq_hahn(n, tau))?, 2.0 * tau),
        (ok(seq_xy4(n, tau))?, 4.0 * tau),
        (ok(seq_xy8(n, tau))?, 8.0 * tau),
        (ok(seq_cdd(n, k, tau))?, 4f64.powi(k as i32) * tau),
        (ok(seq_udd(k, tau))?, tau),
    ];
    for (seq, declared) in seqs {
        let sum: f64 = seq.segments().iter().map(|s| s.duration).sum();
        ensure((sum - declared).abs() <= 1e-14 * declared.max(1.0), || {
            format!("durations sum to {sum:e}, declared {declared:e}")
        })?;
        ensure((seq.total_time() - declared).abs() <= 1e-14 * declared.max(1.0), || {
            format!("total_time {:e}, declared {declared:e}", seq.total_time())
        })?;
    }
    Ok(())
}

pub fn cdd_equal_intervals(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let k = rng.random_range(1..=4);
    let tau = 10f64.powf(-4.0 * rng.random::<f64>());
    let seq = ok(seq_cdd(n, k, tau))?;
    ensure(seq.is_equal_interval(), || format!("cdd{k} has unequal intervals"))?;
    ensure(seq.len() == 1 << (2 * k), || format!("cdd{k} has {} segments", seq.len()))
}

pub fn udd_symmetry(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=12);
    let t = 10f64.powf(2.0 - 4.0 * rng.random::<f64>());
    let times = ok(udd_pulse_times(k, t))?;
    ensure(times.len() == k, || format!("{} times for order {k}", times.len()))?;
    for j in 0..k {
        let s = times[j] + times[k - 1 - j];
        ensure((s - t).abs() <= 1e-14 * t.max(1.0), || format!("t_j + t_(k+1-j) = {s:e}, T = {t:e}"))?;
        let expected = t * (std::f64::consts::PI * (j + 1) as f64 / (2 * k + 2) as f64).sin().powi(2);
        ensure((times[j] - expected).abs() <= 1e-14 * t.max(1.0), || format!("t_{j} = {:e}", times[j]))?;
    }
    Ok(())
}

pub fn merged_pulses(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let model = ok(build_local_bath_model(ns, nb, rng.random::<f64>(), seed))?;
    let mut seq = random_sequence(ns, &mut rng, 0.4);
    if rng.random::<bool>() {
        seq = ok(seq.conjugated(&random_word(ns, &mut rng)))?;
    }
    let merged = ok(compile_unitary(&seq, model.h_total()))?;
    let unmerged = frame_product(&seq, model.h_total(), nb);
    let dist = phase_aligned_distance(&merged, &unmerged);
    ensure(dist <= 1e-10, || format!("merged and unmerged differ by {dist:e}"))
}

pub fn bath_blocks(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let d = random_matrix(1 << (ns + nb), &mut rng);
    let blocks = ok(bath_block_decompose(&d, ns))?;
    ensure(blocks.entries().len() == 1 << (2 * ns), || "wrong block count".into())?;
    let diff = (&blocks.reconstruct() - &d).max_abs();
    ensure(diff <= 1e-10, || format!("reconstruction off by {diff:e}"))?;
    let p = random_word(ns, &mut rng).with_phase(Phase::ONE);
    let b = random_matrix(1 << nb, &mut rng);
    let single = ok(bath_block_decompose(&kron(&pauli_matrix(&p), &b), ns))?;
    for (q, e) in single.entries() {
        let expected = if q.same_labels(&p) { b.clone() } else { ComplexMatrix::zeros(b.dim(), b.dim()) };
        let diff = (e - &expected).max_abs();
        ensure(diff <= 1e-12, || format!("block {q} off by {diff:e}"))?;
    }
    Ok(())
}

pub fn expm_group(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=16);
    let h = random_hermitian(d, &mut rng);
    let (s, t) = (2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
    let lhs = &ok(expm_hermitian(&h, s))? * &ok(expm_hermitian(&h, t))?;
    let rhs = ok(expm_hermitian(&h, s + t))?;
    let diff = (&lhs - &rhs).max_abs();
    ensure(diff <= 1e-10, || format!("group property off by {diff:e}"))
}

pub fn trace_distance_metric(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2..=12);
    let (a, b, c) = (random_density(d, &mut rng), random_density(d, &mut rng), random_density(d, &mut rng));
    let ab = ok(trace_distance(&a, &b))?;
    let bc = ok(trace_distance(&b, &c))?;
    let ac = ok(trace_distance(&a, &c))?;
    ensure(ac <= ab + bc + 1e-12, || format!("triangle: {ac} > {ab} + {bc}"))?;
    ensure((0.0..=1.0).contains(&ab), || format!("distance {ab} outside [0, 1]"))?;
    let u = random_unitary(d, &mut rng);
    let rotated = ok(trace_distance(&a.conjugate_by(&u), &b.conjugate_by(&u)))?;
    ensure((rotated - ab).abs() <= 1e-12, || format!("unitary invariance: {rotated} vs {ab}"))?;
    let self_dist = ok(trace_distance(&a, &a))?;
    ensure(self_dist <= 1e-12, || format!("self distance {self_dist:e}"))
}

pub fn partial_trace_linear(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ds, db) = (rng.random_range(1..=4), rng.random_range(1..=4));
    let (r1, r2) = (random_density(ds * db, &mut rng), random_density(ds * db, &mut rng));
    let (a, b) = (C64::new(gauss(&mut rng), gauss(&mut rng)), C64::new(gauss(&mut rng), gauss(&mut rng)));
    let mix = &r1.scale(a) + &r2.scale(b);
    for keep_sys in [true, false] {
        let lhs = ok(partial_trace(&mix, ds, db, keep_sys))?;
        let rhs = &ok(partial_trace(&r1, ds, db, keep_sys))?.scale(a) + &ok(partial_trace(&r2, ds, db, keep_sys))?.scale(b);
        let diff = (&lhs - &rhs).max_abs();
        ensure(diff <= 1e-12, || format!("linearity off by {diff:e}"))?;
    }
    let tr = ok(partial_trace(&r1, ds, db, false))?.trace();
    ensure((tr.re - 1.0).abs() <= 1e-12, || format!("reduced trace {tr}"))
}

pub fn kron_associative(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = || rng.random_range(1..=3);
    let (da, db, dc) = (dims(), dims(), dims());
    let a = random_matrix(da, &mut rng);
    let b = random_matrix(db, &mut rng);
    let c = random_matrix(dc, &mut rng);
    let left = kron(&kron(&a, &b), &c);
    let right = kron(&a, &kron(&b, &c));
    let diff = (&left - &right).max_abs();
    ensure(diff <= 1e-14 * left.max_abs().max(1.0), || format!("kron associativity off by {diff:e}"))?;
    for i in 0..da * db * dc {
        for j in 0..da * db * dc {
            let expected = a.get(i / (db * dc), j / (db * dc))
                * b.get((i / dc) % db, (j / dc) % db)
                * c.get(i % dc, j % dc);
            let diff = (left.get(i, j) - expected).norm();
            ensure(diff <= 1e-14 * expected.norm().max(1.0), || format!("entry ({i}, {j}) off by {diff:e}"))?;
        }
    }
    Ok(())
}

pub fn pauli_product(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let (a, b) = (random_word(n, &mut rng), random_word(n, &mut rng));
    let ab = ok(pauli_mul(&a, &b))?;
    let dense = &pauli_matrix(&a) * &pauli_matrix(&b);
    let diff = (&pauli_matrix(&ab) - &dense).max_abs();
    ensure(diff == 0.0, || format!("{a} * {b} = {ab} off by {diff:e}"))?;
    let anti = (&(&pauli_matrix(&a) * &pauli_matrix(&b)) + &(&pauli_matrix(&b) * &pauli_matrix(&a))).max_abs();
    ensure(a.commutes_with(&b) == (anti != 0.0), || format!("commutation of {a} and {b}"))?;
    let rt: PauliWord = ok(a.to_string().parse())?;
    ensure(rt == a, || format!("{a} does not round-trip"))
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Largest eigenvalue magnitude of a Hermitian matrix via its real embedding.
pub fn oracle_hermitian_norm(h: &ComplexMatrix) -> f64 {
    let n = h.dim();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            m[i][j] = z.re;
            m[i + n][j + n] = z.re;
            m[i][j + n] = -z.im;
            m[i + n][j] = z.im;
        }
    }
    jacobi_eigenvalues(m).into_iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn operator_norm_oracle(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=8);
    let a = random_matrix(d, &mut rng);
    let expected = oracle_hermitian_norm(&(&a.adjoint() * &a)).sqrt();
    let got = operator_norm(&a);
    ensure((got - expected).abs() <= 1e-10 * expected.max(1.0), || format!("norm {got} vs oracle {expected}"))
}

pub fn model_summaries(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let j = rng.random::<f64>() * 10f64.powi(-rng.random_range(0..4));
    let model = ok(build_local_bath_model(ns, nb, j, seed))?;
    ensure(model.coupling_j == j, || format!("coupling_j {} vs {j}", model.coupling_j))?;
    let beta = oracle_hermitian_norm(model.h0());
    ensure((model.beta - beta).abs() <= 1e-10 * beta.max(1.0), || format!("beta {} vs oracle {beta}", model.beta))?;
    let again = ok(build_local_bath_model(ns, nb, j, seed))?;
    ensure(again.h_total() == model.h_total(), || "model is not a function of its seed".into())?;
    let split = (&(model.h0() + &model.h_sb) - model.h_total()).max_abs();
    ensure(split <= 1e-14, || format!("H != H_0 + H_SB by {split:e}"))?;
    let mut norms = 0.0;
    for t in &model.coupling_terms {
        norms += oracle_hermitian_norm(&t.bath);
    }
    ensure((model.coupling_norm_sum - norms).abs() <= 1e-10 * norms.max(1.0), || {
        format!("coupling norm sum {} vs oracle {norms}", model.coupling_norm_sum)
    })
}

pub fn extended_matches_double(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nb) = small_dims(&mut rng);
    let model = ok(build_local_bath_model(ns, nb, rng.random::<f64>(), seed))?;
    let seq = random_sequence(ns, &mut rng, 0.3);
    let psi = haar_state(model.dim(), &mut rng);
    let u = ok(compile_unitary(&seq, model.h_total()))?;
    let double = u.matvec(&psi);
    let mut evolver = ExtendedEvolver::new(&model);
    let extended = to_double(&evolver.propagate(&seq, &to_extended(&psi)));
    let diff = double.iter().zip(&extended).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(diff <= 1e-12, || format!("extended and double propagation differ by {diff:e}"))
}
