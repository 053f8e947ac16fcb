use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::engine::{
    apply_channel, ideal_unitary, randomized_channel, deterministic_channel, subsystem_error, ChannelBranch,
    ExtendedEvolver, MixedUnitaryChannel,
};
use crate::error::{Error, Result};
use crate::extended::{self, Cdd};
use crate::linalg::trace_distance;
use crate::model::{
    build_hahn_model, dephasing_model_from, identity_coupled_model_from, local_bath_model_from, trial_seed, DephasingCoefficients,
    HamiltonianModel, LocalBathCoefficients, ProductState,
};
use crate::sequences::{randomize, seq_cdd, seq_hahn, seq_udd, seq_xy4, seq_xy8, DecouplingGroup, PulseSequence};

use super::records::{sort_records, ErrorKind, Protocol, SweepRecord};

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs 0 < lo < hi and at least 2 points, got {lo}, {hi}, {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument("grid values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_states(n_states: usize) -> Result<()> {
    if n_states == 0 {
        return Err(Error::InvalidArgument("need at least one state per grid point".into()));
    }
    Ok(())
}

/// Arithmetic used for joint-state errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    /// Dense density matrices in double precision.
    Double,
    /// Pure states propagated in double-double arithmetic.
    #[default]
    Extended,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::InvalidArgument(format!("unknown precision {other:?}"))),
        }
    }
}

/// A protocol entry such as `xy4`, `cdd3` or `rand-xy4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fig1Protocol {
    pub protocol: Protocol,
    pub order_k: u32,
    pub randomized: bool,
}

impl Fig1Protocol {
    pub fn sequence(&self, n: usize, tau: f64) -> Result<PulseSequence> {
        match self.protocol {
            Protocol::Xy4 => seq_xy4(n, tau),
            Protocol::Xy8 => seq_xy8(n, tau),
            Protocol::Cdd => seq_cdd(n, self.order_k as usize, tau),
            other => Err(Error::InvalidArgument(format!("{other} is not a universal-decoupling protocol"))),
        }
    }
}

impl fmt::Display for Fig1Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::records::curve_label(self.protocol, self.randomized, self.order_k))
    }
}

impl FromStr for Fig1Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (randomized, rest) = match s.strip_prefix("rand-") {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (protocol, order_k) = match rest {
            "xy4" => (Protocol::Xy4, 0),
            "xy8" => (Protocol::Xy8, 0),
            _ => {
                let k = rest
                    .strip_prefix("cdd")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown protocol {s:?}")))?;
                if k == 0 || k as usize > crate::sequences::MAX_CDD_ORDER {
                    return Err(Error::InvalidArgument(format!(
                        "concatenation order must be in 1..={}, got {k}",
                        crate::sequences::MAX_CDD_ORDER
                    )));
                }
                (Protocol::Cdd, k)
            }
        };
        Ok(Self {
            protocol,
            order_k,
            randomized,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fig1Axis {
    J,
    Tau,
}

#[derive(Clone, Debug)]
pub struct Fig1Config {
    pub axis: Fig1Axis,
    pub protocols: Vec<Fig1Protocol>,
    pub grid: Vec<f64>,
    /// Coupling used when sweeping `tau`.
    pub fixed_j: f64,
    /// Interval used when sweeping `J`.
    pub fixed_tau: f64,
    pub n_states: usize,
    pub seed: u64,
    pub n_sys: usize,
    pub n_bath: usize,
    pub precision: Precision,
    /// Draw a fresh bath for every trial instead of once per sweep.
    pub resample_bath: bool,
    /// Evaluate one seeded branch per trial instead of the full mixture.
    pub sample_branch: bool,
    /// Add the coupling `J sum_i I_i (x) B_I` with an extra drawn `B_I`.
    pub identity_coupled: bool,
}

impl Fig1Config {
    pub fn new(axis: Fig1Axis, protocols: Vec<Fig1Protocol>, grid: Vec<f64>, n_states: usize, seed: u64) -> Self {
        Self {
            axis,
            protocols,
            grid,
            fixed_j: 1e-3,
            fixed_tau: 1e-3,
            n_states,
            seed,
            n_sys: 4,
            n_bath: 4,
            precision: Precision::Extended,
            resample_bath: false,
            sample_branch: false,
            identity_coupled: false,
        }
    }

    pub fn default_grid(axis: Fig1Axis) -> Vec<f64> {
        match axis {
            Fig1Axis::J => logspace(1e-4, 1e-1, 8),
            Fig1Axis::Tau => logspace(1e-4, 1e-2, 8),
        }
        .expect("static grid")
    }
}

/// A sequence (possibly randomized) evaluated on every trial state.
struct Job {
    protocol: Protocol,
    randomized: bool,
    order_k: u32,
    /// Pulse interval as given on the grid.
    tau: f64,
    branches: Vec<(f64, PulseSequence)>,
}

impl Job {
    fn total_t(&self) -> f64 {
        self.branches[0].1.total_time()
    }
}

fn bath_seed(seed: u64) -> u64 {
    seed
}

fn trial_bath_seed(seed: u64, trial: u64) -> u64 {
    trial_seed(seed ^ 0xBA7B_5EED, trial)
}

fn state_seed(seed: u64, trial: u64) -> u64 {
    trial_seed(seed, trial)
}

/// Branch drawn for `trial` when randomized sequences are sampled.
fn sampled_branch(seed: u64, trial: u64, branches: usize) -> usize {
    (trial_seed(seed ^ 0x5A3F_1E0D, trial) % branches as u64) as usize
}

/// The branches evaluated for `trial`: all of them, or one drawn with weight 1.
fn trial_branches(branches: &[(f64, PulseSequence)], sample: Option<u64>, trial: u64) -> Vec<(f64, PulseSequence)> {
    match sample {
        Some(seed) if branches.len() > 1 => {
            vec![(1.0, branches[sampled_branch(seed, trial, branches.len())].1.clone())]
        }
        _ => branches.to_vec(),
    }
}

/// Prefix-sharing cache of ideal (coupling-free) evolutions of one state.
struct IdealCache {
    entries: Vec<(Vec<u64>, Vec<Cdd>)>,
}

impl IdealCache {
    fn new(psi: Vec<Cdd>) -> Self {
        Self {
            entries: vec![(Vec::new(), psi)],
        }
    }

    fn get(&mut self, ev: &mut ExtendedEvolver, durations: &[f64]) -> Vec<Cdd> {
        let key: Vec<u64> = durations.iter().map(|d| d.to_bits()).collect();
        let (start, state) = self
            .entries
            .iter()
            .filter(|(k, _)| key.starts_with(k))
            .max_by_key(|(k, _)| k.len())
            .map(|(k, v)| (k.len(), v.clone()))
            .expect("empty prefix always present");
        if start == key.len() {
            return state;
        }
        let out = ev.ideal(&durations[start..], &state);
        self.entries.push((key, out.clone()));
        out
    }
}

/// Joint-state errors `[job][trial]` on one model; `states` pairs each state
/// with its trial index.
fn joint_state_errors(
    model: &HamiltonianModel,
    jobs: &[Job],
    states: &[(u64, ProductState)],
    precision: Precision,
    sample: Option<u64>,
) -> Result<Vec<Vec<f64>>> {
    match precision {
        Precision::Extended => {
            let mut ev = ExtendedEvolver::new(model);
            let mut out = vec![Vec::with_capacity(states.len()); jobs.len()];
            for (trial, st) in states {
                let psi = extended::to_extended(&st.joint_vector());
                let mut ideal = IdealCache::new(psi.clone());
                for (job, row) in jobs.iter().zip(out.iter_mut()) {
                    let durations: Vec<f64> = job.branches[0].1.segments().iter().map(|s| s.duration).collect();
                    let target = ideal.get(&mut ev, &durations);
                    let branches = trial_branches(&job.branches, sample, *trial);
                    row.push(ev.state_error_against(&branches, &psi, &target));
                }
            }
            Ok(out)
        }
        Precision::Double => jobs
            .iter()
            .map(|job| {
                let unitaries = job
                    .branches
                    .iter()
                    .map(|(_, seq)| crate::engine::compile_unitary(seq, model.h_total()))
                    .collect::<Result<Vec<_>>>()?;
                let channel = |pick: Option<usize>| {
                    let branches = match pick {
                        Some(i) => vec![ChannelBranch {
                            weight: 1.0,
                            unitary: unitaries[i].clone(),
                        }],
                        None => job
                            .branches
                            .iter()
                            .zip(&unitaries)
                            .map(|((w, _), u)| ChannelBranch {
                                weight: *w,
                                unitary: u.clone(),
                            })
                            .collect(),
                    };
                    MixedUnitaryChannel::new(branches)
                };
                let full = channel(None)?;
                let u0 = ideal_unitary(model, job.total_t())?;
                states
                    .iter()
                    .map(|(trial, st)| {
                        let rho = st.density();
                        let out = match sample {
                            Some(seed) if unitaries.len() > 1 => {
                                let ch = channel(Some(sampled_branch(seed, *trial, unitaries.len())))?;
                                apply_channel(&ch, &rho)?
                            }
                            _ => apply_channel(&full, &rho)?,
                        };
                        trace_distance(&out, &rho.conjugate_by(&u0))
                    })
                    .collect()
            })
            .collect(),
    }
}

fn run_joint_cells<F>(
    cells: Vec<(f64, f64)>,
    n_states: usize,
    seed: u64,
    resample: Option<&(dyn Fn(u64, f64) -> Result<HamiltonianModel> + Sync)>,
    shared_model: &(dyn Fn(f64) -> Result<HamiltonianModel> + Sync),
    jobs_for: F,
    precision: Precision,
    sample: bool,
) -> Result<Vec<SweepRecord>>
where
    F: Fn(f64) -> Result<Vec<Job>> + Sync,
{
    let per_cell: Vec<Vec<SweepRecord>> = cells
        .par_iter()
        .map(|&(j, tau)| {
            let jobs = jobs_for(tau)?;
            let sample = sample.then_some(seed);
            let errors = match resample {
                None => {
                    let model = shared_model(j)?;
                    let states = (0..n_states as u64)
                        .map(|t| Ok((t, ProductState::random(model.dim_sys(), model.dim_bath(), state_seed(seed, t))?)))
                        .collect::<Result<Vec<_>>>()?;
                    joint_state_errors(&model, &jobs, &states, precision, sample)?
                }
                Some(build) => {
                    let mut errors = vec![Vec::with_capacity(n_states); jobs.len()];
                    for t in 0..n_states as u64 {
                        let model = build(t, j)?;
                        let st = ProductState::random(model.dim_sys(), model.dim_bath(), state_seed(seed, t))?;
                        let e = joint_state_errors(&model, &jobs, &[(t, st)], precision, sample)?;
                        for (row, col) in errors.iter_mut().zip(e) {
                            row.extend(col);
                        }
                    }
                    errors
                }
            };
            let mut records = Vec::new();
            for (job, row) in jobs.iter().zip(errors) {
                for (trial, error) in row.into_iter().enumerate() {
                    records.push(SweepRecord {
                        protocol: job.protocol,
                        randomized: job.randomized,
                        order_k: job.order_k,
                        j,
                        tau: job.tau,
                        total_t: job.total_t(),
                        seed,
                        trial: trial as u64,
                        error_kind: ErrorKind::JointState,
                        error,
                    });
                }
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<SweepRecord> = per_cell.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Heisenberg chain with general 1-local bath coupling: joint-state error of
/// each protocol over a grid of `J` or `tau`.
pub fn run_fig1_sweep(cfg: &Fig1Config) -> Result<Vec<SweepRecord>> {
    check_grid(&cfg.grid)?;
    check_states(cfg.n_states)?;
    if cfg.protocols.is_empty() {
        return Err(Error::InvalidArgument("no protocols given".into()));
    }
    let cells: Vec<(f64, f64)> = match cfg.axis {
        Fig1Axis::J => cfg.grid.iter().map(|&j| (j, cfg.fixed_tau)).collect(),
        Fig1Axis::Tau => cfg.grid.iter().map(|&t| (cfg.fixed_j, t)).collect(),
    };
    let n_sys = cfg.n_sys;
    let group = DecouplingGroup::xy4(n_sys);
    let jobs_for = |tau: f64| -> Result<Vec<Job>> {
        cfg.protocols
            .iter()
            .map(|p| {
                let seq = p.sequence(n_sys, tau)?;
                let branches = if p.randomized {
                    randomize(&seq, &group)?
                } else {
                    vec![(1.0, seq)]
                };
                Ok(Job {
                    protocol: p.protocol,
                    randomized: p.randomized,
                    order_k: p.order_k,
                    tau,
                    branches,
                })
            })
            .collect()
    };
    let coeffs = LocalBathCoefficients::draw(cfg.n_bath, bath_seed(cfg.seed));
    let build = |seed: u64, c: &LocalBathCoefficients, j: f64| {
        if cfg.identity_coupled {
            identity_coupled_model_from(n_sys, c, &LocalBathCoefficients::draw_identity(cfg.n_bath, seed), j)
        } else {
            local_bath_model_from(n_sys, c, j)
        }
    };
    let shared = |j: f64| build(bath_seed(cfg.seed), &coeffs, j);
    let per_trial = |t: u64, j: f64| {
        let seed = trial_bath_seed(cfg.seed, t);
        build(seed, &LocalBathCoefficients::draw(cfg.n_bath, seed), j)
    };
    let resample: Option<&(dyn Fn(u64, f64) -> Result<HamiltonianModel> + Sync)> =
        if cfg.resample_bath { Some(&per_trial) } else { None };
    run_joint_cells(cells, cfg.n_states, cfg.seed, resample, &shared, jobs_for, cfg.precision, cfg.sample_branch)
}

#[derive(Clone, Debug)]
pub struct HahnConfig {
    pub grid: Vec<f64>,
    pub j: f64,
    pub n_states: usize,
    pub seed: u64,
    pub n_sys: usize,
    pub n_bath: usize,
    pub precision: Precision,
    pub sample_branch: bool,
}

impl HahnConfig {
    pub fn new(grid: Vec<f64>, j: f64, n_states: usize, seed: u64) -> Self {
        Self {
            grid,
            j,
            n_states,
            seed,
            n_sys: 4,
            n_bath: 4,
            precision: Precision::Extended,
            sample_branch: false,
        }
    }

    pub fn default_grid() -> Vec<f64> {
        logspace(1e-3, 3e-2, 8).expect("static grid")
    }
}

/// Deterministic and randomized Hahn echo on the Heisenberg chain with
/// local dephasing coupling.
pub fn run_hahn_sweep(cfg: &HahnConfig) -> Result<Vec<SweepRecord>> {
    check_grid(&cfg.grid)?;
    check_states(cfg.n_states)?;
    if !(cfg.j >= 0.0 && cfg.j.is_finite()) {
        return Err(Error::InvalidArgument(format!("coupling must be non-negative, got {}", cfg.j)));
    }
    let n_sys = cfg.n_sys;
    let model = build_hahn_model(n_sys, cfg.n_bath, cfg.j, bath_seed(cfg.seed))?;
    let group = DecouplingGroup::spin_flip(n_sys);
    let jobs_for = |tau: f64| -> Result<Vec<Job>> {
        let seq = seq_hahn(n_sys, tau)?;
        Ok(vec![
            Job {
                protocol: Protocol::Hahn,
                randomized: false,
                order_k: 0,
                tau,
                branches: vec![(1.0, seq.clone())],
            },
            Job {
                protocol: Protocol::Hahn,
                randomized: true,
                order_k: 0,
                tau,
                branches: randomize(&seq, &group)?,
            },
        ])
    };
    let shared = |_j: f64| Ok(model.clone());
    let cells = cfg.grid.iter().map(|&t| (cfg.j, t)).collect();
    run_joint_cells(cells, cfg.n_states, cfg.seed, None, &shared, jobs_for, cfg.precision, cfg.sample_branch)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fig2Axis {
    T,
    J,
}

#[derive(Clone, Debug)]
pub struct Fig2Config {
    pub axis: Fig2Axis,
    pub orders: Vec<u32>,
    pub grid: Vec<f64>,
    /// Coupling used when sweeping `T`.
    pub fixed_j: f64,
    /// Total time used when sweeping `J`.
    pub fixed_t: f64,
    pub n_states: usize,
    pub seed: u64,
    pub resample_bath: bool,
    pub sample_branch: bool,
}

impl Fig2Config {
    pub fn new(axis: Fig2Axis, orders: Vec<u32>, grid: Vec<f64>, n_states: usize, seed: u64) -> Self {
        Self {
            axis,
            orders,
            grid,
            fixed_j: 1.0,
            fixed_t: 0.1,
            n_states,
            seed,
            resample_bath: false,
            sample_branch: false,
        }
    }

    pub fn default_grid(axis: Fig2Axis) -> Vec<f64> {
        match axis {
            Fig2Axis::T => logspace(0.02, 0.3, 8),
            Fig2Axis::J => logspace(1e-3, 1.0, 8),
        }
        .expect("static grid")
    }
}

/// Deterministic and randomized UDD on one system qubit with pure-dephasing
/// coupling to a two-qubit bath; subsystem errors.
pub fn run_fig2_sweep(cfg: &Fig2Config) -> Result<Vec<SweepRecord>> {
    check_grid(&cfg.grid)?;
    check_states(cfg.n_states)?;
    if cfg.orders.is_empty() || cfg.orders.contains(&0) {
        return Err(Error::InvalidArgument("orders must be non-empty and positive".into()));
    }
    let cells: Vec<(f64, f64)> = match cfg.axis {
        Fig2Axis::T => cfg.grid.iter().map(|&t| (cfg.fixed_j, t)).collect(),
        Fig2Axis::J => cfg.grid.iter().map(|&j| (j, cfg.fixed_t)).collect(),
    };
    let shared = DephasingCoefficients::draw(bath_seed(cfg.seed));
    let group = DecouplingGroup::spin_flip(1);
    let per_cell: Vec<Vec<SweepRecord>> = cells
        .par_iter()
        .map(|&(j, total_t)| {
            let mut records = Vec::new();
            let shared_model = dephasing_model_from(&shared, j)?;
            for &k in &cfg.orders {
                let seq = seq_udd(k as usize, total_t)?;
                let tau = total_t / (k + 1) as f64;
                let mut channels = None;
                for trial in 0..cfg.n_states as u64 {
                    let trial_model;
                    let model = if cfg.resample_bath {
                        trial_model = dephasing_model_from(
                            &DephasingCoefficients::draw(trial_bath_seed(cfg.seed, trial)),
                            j,
                        )?;
                        channels = None;
                        &trial_model
                    } else {
                        &shared_model
                    };
                    if channels.is_none() {
                        channels = Some((
                            deterministic_channel(&seq, model)?,
                            randomized_channel(&seq, &group, model)?,
                        ));
                    }
                    let (det, ran) = channels.as_ref().expect("set above");
                    let rho = ProductState::random(2, 4, state_seed(cfg.seed, trial))?.density();
                    let drawn;
                    let ran = if cfg.sample_branch {
                        let pick = sampled_branch(cfg.seed, trial, ran.branches().len());
                        drawn = MixedUnitaryChannel::unitary(ran.branches()[pick].unitary.clone())?;
                        &drawn
                    } else {
                        ran
                    };
                    for (randomized, ch) in [(false, det), (true, ran)] {
                        records.push(SweepRecord {
                            protocol: Protocol::Udd,
                            randomized,
                            order_k: k,
                            j,
                            tau,
                            total_t,
                            seed: cfg.seed,
                            trial,
                            error_kind: ErrorKind::Subsystem,
                            error: subsystem_error(ch, &rho, 2, 4)?,
                        });
                    }
                }
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<SweepRecord> = per_cell.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}
