//! Compilation of pulse sequences into propagators, channels built from them,
//! and the error metrics reported by the sweeps.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::extended::{self, Cdd, DdMatrix};
use crate::linalg::{expm_hermitian, operator_norm, partial_trace, trace_distance, ComplexMatrix, C64, TRACE_TOL};
use crate::model::{HamiltonianModel, Pauli, PauliWord, Phase};
use crate::sequences::{DecouplingGroup, PulseSequence};

#[derive(Clone, Debug)]
pub struct ChannelBranch {
    pub weight: f64,
    pub unitary: ComplexMatrix,
}

/// `rho -> sum_i w_i U_i rho U_i^dagger`.
#[derive(Clone, Debug)]
pub struct MixedUnitaryChannel {
    branches: Vec<ChannelBranch>,
}

impl MixedUnitaryChannel {
    /// Rejects non-positive weights, weights not summing to one (1e-12) and
    /// non-unitary branches (1e-10).
    pub fn new(branches: Vec<ChannelBranch>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(Error::InvalidWeights(0.0));
        };
        let dim = first.unitary.dim();
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        if branches.iter().any(|b| !(b.weight > 0.0)) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidWeights(total));
        }
        for b in &branches {
            if !b.unitary.is_square() || b.unitary.dim() != dim {
                return Err(Error::DimensionMismatch("channel branches differ in dimension".into()));
            }
            b.unitary.ensure_unitary()?;
        }
        Ok(Self { branches })
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![ChannelBranch { weight: 1.0, unitary: u }])
    }

    pub fn branches(&self) -> &[ChannelBranch] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.branches[0].unitary.dim()
    }
}

/// System-Pauli blocks `E_P` of a joint operator, in [`pauli_basis`] order.
#[derive(Clone, Debug)]
pub struct BathBlockMap {
    entries: Vec<(PauliWord, ComplexMatrix)>,
}

impl BathBlockMap {
    pub fn entries(&self) -> &[(PauliWord, ComplexMatrix)] {
        &self.entries
    }

    /// Block for the word with the same labels as `p` (phase ignored).
    pub fn get(&self, p: &PauliWord) -> Option<&ComplexMatrix> {
        self.entries.iter().find(|(q, _)| q.same_labels(p)).map(|(_, e)| e)
    }

    /// `sum_P P (x) E_P`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut it = self.entries.iter();
        let (p, e) = it.next().expect("block map is never empty");
        let mut acc = crate::linalg::kron(&p.matrix(), e);
        for (p, e) in it {
            acc = &acc + &crate::linalg::kron(&p.matrix(), e);
        }
        acc
    }
}

/// All `4^n` Pauli words on `n` qubits, qubit 0 varying slowest, `I < X < Y < Z`.
pub fn pauli_basis(n: usize) -> Vec<PauliWord> {
    (0..1usize << (2 * n))
        .map(|mut idx| {
            let mut labels = vec![Pauli::I; n];
            for q in (0..n).rev() {
                labels[q] = Pauli::ALL[idx & 3];
                idx >>= 2;
            }
            PauliWord::new(labels, Phase::ONE)
        })
        .collect()
}

fn bath_dim(joint: usize, n_sys: usize) -> Result<usize> {
    let ds = 1usize << n_sys;
    if joint == 0 || !joint.is_multiple_of(ds) {
        return Err(Error::DimensionMismatch(format!(
            "joint dimension {joint} is not a multiple of 2^{n_sys}"
        )));
    }
    Ok(joint / ds)
}

/// Exponential cache keyed by the bit pattern of the duration.
struct ExpCache<'a> {
    h: &'a ComplexMatrix,
    map: HashMap<u64, ComplexMatrix>,
}

impl<'a> ExpCache<'a> {
    fn new(h: &'a ComplexMatrix) -> Self {
        Self { h, map: HashMap::new() }
    }

    fn get(&mut self, t: f64) -> Result<&ComplexMatrix> {
        let h = self.h;
        match self.map.entry(t.to_bits()) {
            std::collections::hash_map::Entry::Occupied(e) => Ok(e.into_mut()),
            std::collections::hash_map::Entry::Vacant(e) => Ok(e.insert(expm_hermitian(h, t)?)),
        }
    }
}

/// Time-ordered propagator of `seq` under `h_total`; pulses act as `P (x) I`.
pub fn compile_unitary(seq: &PulseSequence, h_total: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h_total.is_square() {
        return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
    }
    h_total.ensure_hermitian()?;
    let db = bath_dim(h_total.dim(), seq.num_qubits())?;
    let mut cache = ExpCache::new(h_total);
    let mut d = ComplexMatrix::identity(h_total.dim());
    for seg in seq.segments() {
        if !seg.pulse.is_identity() || seg.pulse.phase() != Phase::ONE {
            d = seg.pulse.basis_action().left_mul(&d, db);
        }
        d = cache.get(seg.duration)? * &d;
    }
    d = seq.final_pulse().basis_action().left_mul(&d, db);
    d.ensure_unitary()?;
    Ok(d)
}

/// `exp(-i H_0 T)`.
pub fn ideal_unitary(model: &HamiltonianModel, total_t: f64) -> Result<ComplexMatrix> {
    if !(total_t >= 0.0) {
        return Err(Error::InvalidArgument(format!("total time must be non-negative, got {total_t}")));
    }
    expm_hermitian(model.h0(), total_t)
}

pub fn deterministic_channel(seq: &PulseSequence, model: &HamiltonianModel) -> Result<MixedUnitaryChannel> {
    check_register(seq, model)?;
    MixedUnitaryChannel::unitary(compile_unitary(seq, model.h_total())?)
}

/// Uniform mixture of `g D g^dagger` over the group.
pub fn randomized_channel(
    seq: &PulseSequence,
    group: &DecouplingGroup,
    model: &HamiltonianModel,
) -> Result<MixedUnitaryChannel> {
    check_register(seq, model)?;
    if group.num_qubits() != seq.num_qubits() {
        return Err(Error::LengthMismatch(group.num_qubits(), seq.num_qubits()));
    }
    let d = compile_unitary(seq, model.h_total())?;
    let db = model.dim_bath();
    let w = 1.0 / group.len() as f64;
    let branches = group
        .elements()
        .iter()
        .map(|g| {
            let action = g.basis_action();
            let unitary = action.right_mul_adjoint(&action.left_mul(&d, db), db);
            ChannelBranch { weight: w, unitary }
        })
        .collect();
    MixedUnitaryChannel::new(branches)
}

fn check_register(seq: &PulseSequence, model: &HamiltonianModel) -> Result<()> {
    if seq.num_qubits() != model.n_sys {
        return Err(Error::LengthMismatch(seq.num_qubits(), model.n_sys));
    }
    Ok(())
}

pub fn apply_channel(ch: &MixedUnitaryChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !rho.is_square() || rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel on {} dimensions applied to {}x{}",
            ch.dim(),
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for b in ch.branches() {
        out = &out + &rho.conjugate_by(&b.unitary).scale_real(b.weight);
    }
    Ok(out)
}

/// `1/2 || ch(rho) - U_0 rho U_0^dagger ||_1`.
pub fn state_error(
    ch: &MixedUnitaryChannel,
    model: &HamiltonianModel,
    rho: &ComplexMatrix,
    total_t: f64,
) -> Result<f64> {
    let out = apply_channel(ch, rho)?;
    let ideal = rho.conjugate_by(&ideal_unitary(model, total_t)?);
    trace_distance(&out, &ideal)
}

/// Trace distance between the reduced system states before and after `ch`.
pub fn subsystem_error(
    ch: &MixedUnitaryChannel,
    rho0: &ComplexMatrix,
    dim_sys: usize,
    dim_bath: usize,
) -> Result<f64> {
    let out = apply_channel(ch, rho0)?;
    let after = partial_trace(&out, dim_sys, dim_bath, true)?;
    let before = partial_trace(rho0, dim_sys, dim_bath, true)?;
    trace_distance(&after, &before)
}

/// `E_P = 2^{-n} tr_S[(P^dagger (x) I) d]` for every `n`-qubit Pauli `P`.
pub fn bath_block_decompose(d: &ComplexMatrix, n_sys: usize) -> Result<BathBlockMap> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch("operator must be square".into()));
    }
    let db = bath_dim(d.dim(), n_sys)?;
    let ds = 1usize << n_sys;
    let norm = 1.0 / ds as f64;
    let entries = pauli_basis(n_sys)
        .into_iter()
        .map(|p| {
            let projected = p.adjoint().basis_action().left_mul(d, db);
            let block = partial_trace(&projected, ds, db, false)?.scale_real(norm);
            Ok((p, block))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BathBlockMap { entries })
}

/// `|| |G|^{-1} sum_g (g (x) I) h_sb (g (x) I)^dagger ||`.
pub fn decoupling_residual(group: &DecouplingGroup, h_sb: &ComplexMatrix, n_sys: usize) -> Result<f64> {
    if group.num_qubits() != n_sys {
        return Err(Error::LengthMismatch(group.num_qubits(), n_sys));
    }
    if !h_sb.is_square() {
        return Err(Error::DimensionMismatch("coupling must be square".into()));
    }
    let db = bath_dim(h_sb.dim(), n_sys)?;
    let mut acc = ComplexMatrix::zeros(h_sb.dim(), h_sb.dim());
    for g in group.elements() {
        let a = g.basis_action();
        acc = &acc + &a.right_mul_adjoint(&a.left_mul(h_sb, db), db);
    }
    Ok(operator_norm(&acc.scale_real(1.0 / group.len() as f64)))
}

/// Right-hand sides of the concatenated-sequence error bounds.
///
/// Returns `(T (2 beta)^k J 2^{k(k-1)+1} tau^k + extra, extra)` with
/// `extra = J^2 T [2 + T (2 beta + J)] tau`; the randomized bound is the
/// squared measured deviation plus `extra`.
pub fn cdd_bound_rhs(j: f64, beta: f64, tau: f64, k: u32, total_t: f64) -> Result<(f64, f64)> {
    for (name, v) in [("j", j), ("beta", beta), ("tau", tau), ("total_t", total_t)] {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
        }
    }
    let extra = j * j * total_t * (2.0 + total_t * (2.0 * beta + j)) * tau;
    let exponent = (k * k.saturating_sub(1) + 1) as i32;
    let leading = total_t * (2.0 * beta).powi(k as i32) * j * 2f64.powi(exponent) * tau.powi(k as i32);
    Ok((leading + extra, extra))
}

/// Pure-state propagation in double-double arithmetic.
///
/// Holds `H = H_0 + H_SB` and `H_0` with their exponentials cached per
/// duration. The sum is formed in extended precision.
pub struct ExtendedEvolver {
    dim_bath: usize,
    h: DdMatrix,
    h0: DdMatrix,
    exp_h: HashMap<u64, DdMatrix>,
    exp_h0: HashMap<u64, DdMatrix>,
}

impl ExtendedEvolver {
    pub fn new(model: &HamiltonianModel) -> Self {
        let h0 = DdMatrix::from_complex(model.h0());
        let h = h0.add(&DdMatrix::from_complex(&model.h_sb));
        Self {
            dim_bath: model.dim_bath(),
            h,
            h0,
            exp_h: HashMap::new(),
            exp_h0: HashMap::new(),
        }
    }

    fn step(&mut self, t: f64, ideal: bool, v: &[Cdd]) -> Vec<Cdd> {
        let (map, h) = if ideal {
            (&mut self.exp_h0, &self.h0)
        } else {
            (&mut self.exp_h, &self.h)
        };
        map.entry(t.to_bits())
            .or_insert_with(|| extended::expm_neg_i(h, t))
            .matvec(v)
    }

    /// `D |psi>` for the compiled sequence.
    pub fn propagate(&mut self, seq: &PulseSequence, psi: &[Cdd]) -> Vec<Cdd> {
        let mut v = psi.to_vec();
        for seg in seq.segments() {
            v = extended::apply_pauli(&seg.pulse.basis_action(), &v, self.dim_bath);
            v = self.step(seg.duration, false, &v);
        }
        extended::apply_pauli(&seq.final_pulse().basis_action(), &v, self.dim_bath)
    }

    /// `exp(-i H_0 t_{L-1}) ... exp(-i H_0 t_0) |psi>` over the given durations.
    pub fn ideal(&mut self, durations: &[f64], psi: &[Cdd]) -> Vec<Cdd> {
        durations.iter().fold(psi.to_vec(), |v, &t| self.step(t, true, &v))
    }

    /// Joint-state trace distance of the branch mixture from the ideal evolution.
    pub fn state_error(&mut self, branches: &[(f64, PulseSequence)], psi: &[C64]) -> f64 {
        let psi = extended::to_extended(psi);
        let durations: Vec<f64> = branches[0].1.segments().iter().map(|s| s.duration).collect();
        let target = self.ideal(&durations, &psi);
        self.state_error_against(branches, &psi, &target)
    }

    /// As [`Self::state_error`] with a precomputed ideal final state.
    pub fn state_error_against(
        &mut self,
        branches: &[(f64, PulseSequence)],
        psi: &[Cdd],
        target: &[Cdd],
    ) -> f64 {
        let weights: Vec<f64> = branches.iter().map(|(w, _)| *w).collect();
        let outputs: Vec<Vec<Cdd>> = branches.iter().map(|(_, s)| self.propagate(s, psi)).collect();
        extended::mixture_trace_distance(&weights, &outputs, target)
    }
}
