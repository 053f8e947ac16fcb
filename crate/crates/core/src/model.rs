//! Pauli-word algebra and the system/bath Hamiltonians used by the sweeps.
//!
//! Qubit 0 is the most significant tensor factor: `X` on qubit 0 of a
//! two-qubit register is `X (x) I`. The system register always precedes the
//! bath register in the joint space.
//!
//! All randomness goes through [`seeded_rng`] (ChaCha8 from `rand_chacha`
//! 0.10), so a model is a pure function of its structure parameters and seed.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{kron, operator_norm, ComplexMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn signs(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    /// Single-qubit product `self * rhs = i^k * p`, returned as `(k, p)`.
    fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            Pauli::Z => ComplexMatrix::from_diagonal(&[ONE, -ONE]),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A unit phase `i^k`, `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    pub fn times(self, other: Phase) -> Self {
        Phase((self.0 + other.0) % 4)
    }
}

/// An n-qubit Pauli operator with an exact unit phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord {
    labels: Vec<Pauli>,
    phase: Phase,
}

impl PauliWord {
    pub fn new(labels: Vec<Pauli>, phase: Phase) -> Self {
        Self { labels, phase }
    }

    pub fn identity(n: usize) -> Self {
        Self::uniform(n, Pauli::I)
    }

    /// `p` on every qubit, e.g. `X^{(x) n}`.
    pub fn uniform(n: usize, p: Pauli) -> Self {
        Self::new(vec![p; n], Phase::ONE)
    }

    /// `p` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut labels = vec![Pauli::I; n];
        labels[q] = p;
        Self::new(labels, Phase::ONE)
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// True when every label is `I` (the phase is ignored).
    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    pub fn same_labels(&self, other: &PauliWord) -> bool {
        self.labels == other.labels
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.labels.clone(), self.phase.conj())
    }

    pub fn mul(&self, rhs: &PauliWord) -> Result<PauliWord> {
        pauli_mul(self, rhs)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        pauli_matrix(self)
    }

    /// True when the two words commute as operators.
    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        let anti = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Computational-basis action: `P|s> = coeffs[s] |s ^ xmask>`.
    pub fn basis_action(&self) -> PauliAction {
        let n = self.labels.len();
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        let mut y_count = 0u8;
        for (q, &p) in self.labels.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                xmask |= bit;
            }
            if p.signs() {
                zmask |= bit;
            }
            if p == Pauli::Y {
                y_count += 1;
            }
        }
        let base = self.phase.times(Phase::from_power(y_count));
        let coeffs = (0..1usize << n)
            .map(|s| {
                let flip = (s & zmask).count_ones() % 2 == 1;
                if flip {
                    base.times(Phase::MINUS_ONE)
                } else {
                    base
                }
            })
            .collect();
        PauliAction { xmask, coeffs }
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for p in &self.labels {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    /// Parses words such as `XYZ`, `-XX`, `+iZ` or `-iIY`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (Phase::MINUS_ONE, r),
            None => (Phase::ONE, s.strip_prefix('+').unwrap_or(s)),
        };
        let (phase, rest) = match rest.strip_prefix('i') {
            Some(r) => (sign.times(Phase::I), r),
            None => (sign, rest),
        };
        let labels = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!(
                    "bad pauli symbol {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::InvalidArgument(format!("empty pauli word {s:?}")));
        }
        Ok(PauliWord::new(labels, phase))
    }
}

/// Permutation-with-phases form of a Pauli word on the computational basis.
#[derive(Clone, Debug)]
pub struct PauliAction {
    pub xmask: usize,
    pub coeffs: Vec<Phase>,
}

impl PauliAction {
    /// Applies `P (x) I_bath` to a joint vector of length `2^n * dim_bath`.
    pub fn apply_vec<T: Copy>(&self, v: &[T], dim_bath: usize, mul: impl Fn(Phase, T) -> T) -> Vec<T> {
        let mut out = v.to_vec();
        for (s, &c) in self.coeffs.iter().enumerate() {
            let t = s ^ self.xmask;
            for b in 0..dim_bath {
                out[t * dim_bath + b] = mul(c, v[s * dim_bath + b]);
            }
        }
        out
    }

    /// `(P (x) I) m` for a joint-space matrix.
    pub fn left_mul(&self, m: &ComplexMatrix, dim_bath: usize) -> ComplexMatrix {
        let n = m.ncols();
        let src = m.inner();
        let mut out = ComplexMatrix::zeros(m.nrows(), n);
        let dst = out.inner_mut();
        for (s, &c) in self.coeffs.iter().enumerate() {
            let t = s ^ self.xmask;
            let cv = c.value();
            for b in 0..dim_bath {
                let (r_src, r_dst) = (s * dim_bath + b, t * dim_bath + b);
                for col in 0..n {
                    dst[(r_dst, col)] = cv * src[(r_src, col)];
                }
            }
        }
        out
    }

    /// `m (P (x) I)^dagger` for a joint-space matrix.
    pub fn right_mul_adjoint(&self, m: &ComplexMatrix, dim_bath: usize) -> ComplexMatrix {
        let rows = m.nrows();
        let src = m.inner();
        let mut out = ComplexMatrix::zeros(rows, m.ncols());
        let dst = out.inner_mut();
        for (s, &c) in self.coeffs.iter().enumerate() {
            let t = s ^ self.xmask;
            let cv = c.conj().value();
            for b in 0..dim_bath {
                let (c_src, c_dst) = (s * dim_bath + b, t * dim_bath + b);
                // (M P^dagger)[:, t] = conj(c(s)) M[:, s] with t = s ^ x.
                for r in 0..rows {
                    dst[(r, c_dst)] = cv * src[(r, c_src)];
                }
            }
        }
        out
    }
}

pub fn pauli_mul(a: &PauliWord, b: &PauliWord) -> Result<PauliWord> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::LengthMismatch(a.num_qubits(), b.num_qubits()));
    }
    let mut phase = a.phase.times(b.phase);
    let labels = a
        .labels
        .iter()
        .zip(&b.labels)
        .map(|(&p, &q)| {
            let (k, r) = p.mul(q);
            phase = phase.times(Phase::from_power(k));
            r
        })
        .collect();
    Ok(PauliWord::new(labels, phase))
}

/// Dense `2^n x 2^n` matrix of a Pauli word, phase included.
pub fn pauli_matrix(w: &PauliWord) -> ComplexMatrix {
    let n = 1usize << w.num_qubits();
    let action = w.basis_action();
    let mut m = ComplexMatrix::zeros(n, n);
    for (s, c) in action.coeffs.iter().enumerate() {
        m.set(s ^ action.xmask, s, c.value());
    }
    m
}

/// `sum_k c_k P_k` as a dense matrix.
pub fn pauli_sum(n: usize, terms: &[(f64, PauliWord)]) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (coef, w) in terms {
        assert_eq!(w.num_qubits(), n, "pauli_sum qubit count");
        let action = w.basis_action();
        for (s, c) in action.coeffs.iter().enumerate() {
            let r = s ^ action.xmask;
            let v = m.get(r, s) + c.value() * *coef;
            m.set(r, s, v);
        }
    }
    m
}

/// Open-chain Heisenberg Hamiltonian `sum_j XX + YY + ZZ` on neighbors.
pub fn build_heisenberg(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "heisenberg chain needs at least 2 qubits, got {n}"
        )));
    }
    let mut terms = Vec::with_capacity(3 * (n - 1));
    for j in 0..n - 1 {
        for p in Pauli::NONTRIVIAL {
            let mut labels = vec![Pauli::I; n];
            labels[j] = p;
            labels[j + 1] = p;
            terms.push((1.0, PauliWord::new(labels, Phase::ONE)));
        }
    }
    Ok(pauli_sum(n, &terms))
}

/// The random-number generator behind every seeded draw.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for trial `trial` of a sweep (splitmix64).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ 0x5DEE_CE66_D1CE_4E5B_u64.wrapping_mul(trial.wrapping_add(1));
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Single-site operator table on `n` qubits: `sum_k sum_beta g[k][beta] sigma_{beta,k}`
/// with `beta` running over `I, X, Y, Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    pub coefficients: Vec<[f64; 4]>,
}

impl LocalOperator {
    pub fn zeros(n: usize) -> Self {
        Self {
            coefficients: vec![[0.0; 4]; n],
        }
    }

    /// Coefficients drawn uniformly from `[0, 1)`, qubit-major then `I, X, Y, Z`.
    pub fn draw(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let coefficients = (0..n)
            .map(|_| {
                let mut row = [0.0; 4];
                for v in &mut row {
                    *v = rng.random::<f64>();
                }
                row
            })
            .collect();
        Self { coefficients }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.coefficients.len();
        let terms: Vec<_> = self
            .coefficients
            .iter()
            .enumerate()
            .flat_map(|(k, row)| {
                Pauli::ALL
                    .iter()
                    .zip(row)
                    .map(move |(&p, &g)| (g, PauliWord::single(n, k, p)))
            })
            .collect();
        pauli_sum(n, &terms)
    }
}

/// Two-qubit operator with every 1- and 2-body term:
/// `sum_{alpha,beta} g[alpha][beta] sigma_alpha (x) sigma_beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitOperator {
    pub coefficients: [[f64; 4]; 4],
}

impl TwoQubitOperator {
    pub fn zeros() -> Self {
        Self {
            coefficients: [[0.0; 4]; 4],
        }
    }

    pub fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut coefficients = [[0.0; 4]; 4];
        for row in &mut coefficients {
            for v in row.iter_mut() {
                *v = rng.random::<f64>();
            }
        }
        Self { coefficients }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let mut terms = Vec::with_capacity(16);
        for (a, row) in Pauli::ALL.iter().zip(&self.coefficients) {
            for (b, &g) in Pauli::ALL.iter().zip(row) {
                terms.push((g, PauliWord::new(vec![*a, *b], Phase::ONE)));
            }
        }
        pauli_sum(2, &terms)
    }
}

/// One system-Pauli-times-bath-operator piece of the interaction.
#[derive(Clone, Debug)]
pub struct CouplingTerm {
    pub system: PauliWord,
    /// Bath operator, already multiplied by the coupling constant.
    pub bath: ComplexMatrix,
}

/// `H = H_S (x) I + I (x) H_B + H_SB` together with its summary numbers.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    pub h_sys: ComplexMatrix,
    pub h_bath: ComplexMatrix,
    pub h_sb: ComplexMatrix,
    pub n_sys: usize,
    pub n_bath: usize,
    /// Explicit prefactor of `H_SB`.
    pub coupling_j: f64,
    /// `||H_S (x) I + I (x) H_B||`.
    pub beta: f64,
    /// Sum of the spectral norms of the (J-scaled) bath operators in
    /// [`Self::coupling_terms`].
    pub coupling_norm_sum: f64,
    pub coupling_terms: Vec<CouplingTerm>,
    h0: ComplexMatrix,
    h_total: ComplexMatrix,
}

impl HamiltonianModel {
    /// Assembles a model from its parts; `h_sb` is `sum_t P_t (x) B_t`.
    pub fn from_parts(
        n_sys: usize,
        n_bath: usize,
        h_sys: ComplexMatrix,
        h_bath: ComplexMatrix,
        coupling_j: f64,
        coupling_terms: Vec<CouplingTerm>,
    ) -> Result<Self> {
        let (ds, db) = (1usize << n_sys, 1usize << n_bath);
        if h_sys.dim() != ds || h_bath.dim() != db {
            return Err(Error::DimensionMismatch(format!(
                "model expects {ds}x{ds} system and {db}x{db} bath Hamiltonians"
            )));
        }
        h_sys.ensure_hermitian()?;
        h_bath.ensure_hermitian()?;
        let mut h_sb = ComplexMatrix::zeros(ds * db, ds * db);
        for term in &coupling_terms {
            if term.system.num_qubits() != n_sys || term.bath.dim() != db {
                return Err(Error::DimensionMismatch(
                    "coupling term does not match the register sizes".into(),
                ));
            }
            h_sb = &h_sb + &kron(&term.system.matrix(), &term.bath);
        }
        h_sb.ensure_hermitian()?;
        let h0 = &kron(&h_sys, &ComplexMatrix::identity(db)) + &kron(&ComplexMatrix::identity(ds), &h_bath);
        let h_total = &h0 + &h_sb;
        let beta = operator_norm(&h0);
        let coupling_norm_sum = coupling_terms.iter().map(|t| operator_norm(&t.bath)).sum();
        Ok(Self {
            h_sys,
            h_bath,
            h_sb,
            n_sys,
            n_bath,
            coupling_j,
            beta,
            coupling_norm_sum,
            coupling_terms,
            h0,
            h_total,
        })
    }

    pub fn dim_sys(&self) -> usize {
        1 << self.n_sys
    }

    pub fn dim_bath(&self) -> usize {
        1 << self.n_bath
    }

    pub fn dim(&self) -> usize {
        self.dim_sys() * self.dim_bath()
    }

    /// `H_0 = H_S (x) I + I (x) H_B`.
    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    /// `H_0 + H_SB`.
    pub fn h_total(&self) -> &ComplexMatrix {
        &self.h_total
    }
}

/// Bath coefficients of the Heisenberg-chain model with general 1-local noise.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBathCoefficients {
    /// `B_X, B_Y, B_Z`.
    pub coupling: [LocalOperator; 3],
    /// Bath self-Hamiltonian.
    pub bath: LocalOperator,
}

impl LocalBathCoefficients {
    /// Draw order: `B_X`, `B_Y`, `B_Z`, then `H_B`.
    pub fn draw(n_bath: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let coupling = [
            LocalOperator::draw(n_bath, &mut rng),
            LocalOperator::draw(n_bath, &mut rng),
            LocalOperator::draw(n_bath, &mut rng),
        ];
        let bath = LocalOperator::draw(n_bath, &mut rng);
        Self { coupling, bath }
    }

    /// `B_I` for the identity channel, drawn after the operators of [`Self::draw`].
    pub fn draw_identity(n_bath: usize, seed: u64) -> LocalOperator {
        let mut rng = seeded_rng(seed);
        for _ in 0..4 {
            LocalOperator::draw(n_bath, &mut rng);
        }
        LocalOperator::draw(n_bath, &mut rng)
    }

    pub fn zeros(n_bath: usize) -> Self {
        Self {
            coupling: [
                LocalOperator::zeros(n_bath),
                LocalOperator::zeros(n_bath),
                LocalOperator::zeros(n_bath),
            ],
            bath: LocalOperator::zeros(n_bath),
        }
    }
}

/// Heisenberg chain coupled through `J sum_i sum_{alpha in X,Y,Z} sigma_{alpha,i} (x) B_alpha`.
pub fn build_local_bath_model(n_sys: usize, n_bath: usize, j: f64, seed: u64) -> Result<HamiltonianModel> {
    if n_sys < 1 || n_bath < 1 {
        return Err(Error::InvalidArgument("register sizes must be positive".into()));
    }
    local_bath_model_from(n_sys, &LocalBathCoefficients::draw(n_bath, seed), j)
}

pub fn local_bath_model_from(n_sys: usize, coeffs: &LocalBathCoefficients, j: f64) -> Result<HamiltonianModel> {
    let n_bath = coeffs.bath.coefficients.len();
    let h_sys = if n_sys >= 2 {
        build_heisenberg(n_sys)?
    } else {
        ComplexMatrix::zeros(2, 2)
    };
    let bath_ops: Vec<ComplexMatrix> = coeffs.coupling.iter().map(|b| b.matrix().scale_real(j)).collect();
    let mut terms = Vec::with_capacity(3 * n_sys);
    for i in 0..n_sys {
        for (alpha, b) in Pauli::NONTRIVIAL.iter().zip(&bath_ops) {
            terms.push(CouplingTerm {
                system: PauliWord::single(n_sys, i, *alpha),
                bath: b.clone(),
            });
        }
    }
    HamiltonianModel::from_parts(n_sys, n_bath, h_sys, coeffs.bath.matrix(), j, terms)
}

/// As [`local_bath_model_from`] plus the identity channel
/// `J sum_i I_i (x) B_I`, one term per system qubit.
pub fn identity_coupled_model_from(
    n_sys: usize,
    coeffs: &LocalBathCoefficients,
    b_identity: &LocalOperator,
    j: f64,
) -> Result<HamiltonianModel> {
    let base = local_bath_model_from(n_sys, coeffs, j)?;
    let b = b_identity.matrix().scale_real(j);
    let mut terms = base.coupling_terms;
    for _ in 0..n_sys {
        terms.push(CouplingTerm {
            system: PauliWord::identity(n_sys),
            bath: b.clone(),
        });
    }
    HamiltonianModel::from_parts(n_sys, base.n_bath, base.h_sys, base.h_bath, j, terms)
}

/// Bath coefficients of the pure-dephasing model (`B_Z`, `B_I` on two bath qubits).
#[derive(Clone, Debug, PartialEq)]
pub struct DephasingCoefficients {
    pub b_z: TwoQubitOperator,
    pub b_i: TwoQubitOperator,
}

impl DephasingCoefficients {
    /// Draw order: `B_Z` then `B_I`, each row-major over `(alpha, beta)`.
    pub fn draw(seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let b_z = TwoQubitOperator::draw(&mut rng);
        let b_i = TwoQubitOperator::draw(&mut rng);
        Self { b_z, b_i }
    }
}

/// One system qubit, two bath qubits: `H = I (x) B_I + J Z (x) B_Z`.
pub fn build_dephasing_model(j: f64, seed: u64) -> Result<HamiltonianModel> {
    dephasing_model_from(&DephasingCoefficients::draw(seed), j)
}

pub fn dephasing_model_from(coeffs: &DephasingCoefficients, j: f64) -> Result<HamiltonianModel> {
    let terms = vec![CouplingTerm {
        system: PauliWord::single(1, 0, Pauli::Z),
        bath: coeffs.b_z.matrix().scale_real(j),
    }];
    HamiltonianModel::from_parts(1, 2, ComplexMatrix::zeros(2, 2), coeffs.b_i.matrix(), j, terms)
}

/// Heisenberg chain with local dephasing `J sum_j Z_j (x) B_j`, each `B_j` and
/// the bath Hamiltonian drawn as a [`LocalOperator`] on the bath register.
/// Draw order: `B_0 .. B_{n_sys-1}`, then `H_B`.
pub fn build_hahn_model(n_sys: usize, n_bath: usize, j: f64, seed: u64) -> Result<HamiltonianModel> {
    if n_bath < 1 {
        return Err(Error::InvalidArgument("bath must have at least one qubit".into()));
    }
    let h_sys = build_heisenberg(n_sys)?;
    let mut rng = seeded_rng(seed);
    let ops: Vec<LocalOperator> = (0..n_sys).map(|_| LocalOperator::draw(n_bath, &mut rng)).collect();
    let bath = LocalOperator::draw(n_bath, &mut rng);
    let terms = ops
        .iter()
        .enumerate()
        .map(|(i, b)| CouplingTerm {
            system: PauliWord::single(n_sys, i, Pauli::Z),
            bath: b.matrix().scale_real(j),
        })
        .collect();
    HamiltonianModel::from_parts(n_sys, n_bath, h_sys, bath.matrix(), j, terms)
}

/// Haar-random pure state of dimension `dim` (normalized complex Gaussian,
/// Box-Muller on the seeded generator).
pub fn haar_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let r = (-2.0 * (1.0 - u1).ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            C64::new(r * theta.cos(), r * theta.sin())
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// A pure product state `|psi_S> (x) |psi_B>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub sys: Vec<C64>,
    pub bath: Vec<C64>,
}

impl ProductState {
    /// System factor drawn first, then the bath factor.
    pub fn random(dim_sys: usize, dim_bath: usize, seed: u64) -> Result<Self> {
        if dim_sys < 2 || dim_bath < 2 {
            return Err(Error::InvalidArgument(format!(
                "product state needs dimensions >= 2, got {dim_sys} and {dim_bath}"
            )));
        }
        let mut rng = seeded_rng(seed);
        let sys = haar_state(dim_sys, &mut rng);
        let bath = haar_state(dim_bath, &mut rng);
        Ok(Self { sys, bath })
    }

    pub fn joint_vector(&self) -> Vec<C64> {
        self.sys
            .iter()
            .flat_map(|&a| self.bath.iter().map(move |&b| a * b))
            .collect()
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.joint_vector())
    }

    pub fn system_density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.sys)
    }
}

/// `|psi_S><psi_S| (x) |psi_B><psi_B|` with Haar-random factors.
pub fn random_product_state(dim_sys: usize, dim_bath: usize, seed: u64) -> Result<ComplexMatrix> {
    Ok(ProductState::random(dim_sys, dim_bath, seed)?.density())
}
