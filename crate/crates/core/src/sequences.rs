//! Pulse sequences and the decoupling groups that randomize them.
//!
//! A sequence is a list of segments, each an instantaneous pulse followed by
//! free evolution, closed by a final pulse. Most builders are written in terms
//! of *frames* `g_0, ..., g_{L-1}`: the propagator is
//! `g_{L-1} E g_{L-1}^dagger ... g_0 E g_0^dagger`, so the physical pulses
//! are `g_0^dagger`, the transitions `g_l^dagger g_{l-1}`, and finally
//! `g_{L-1}`.

use crate::error::{Error, Result};
use crate::model::{pauli_mul, Pauli, PauliWord};

/// Largest supported concatenation order (`4^6` segments).
pub const MAX_CDD_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// Applied at the start of the segment.
    pub pulse: PauliWord,
    /// Free-evolution time after the pulse.
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    segments: Vec<Segment>,
    final_pulse: PauliWord,
    total_time: f64,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>, final_pulse: PauliWord) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("sequence needs at least one segment".into()));
        }
        let n = final_pulse.num_qubits();
        for s in &segments {
            if s.pulse.num_qubits() != n {
                return Err(Error::LengthMismatch(s.pulse.num_qubits(), n));
            }
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "segment duration must be positive and finite, got {}",
                    s.duration
                )));
            }
        }
        let total_time = segments.iter().map(|s| s.duration).sum();
        Ok(Self {
            segments,
            final_pulse,
            total_time,
        })
    }

    /// Builds the sequence whose toggling frames are `frames`, segment `l`
    /// lasting `durations[l]`.
    pub fn from_frames(frames: &[PauliWord], durations: &[f64]) -> Result<Self> {
        if frames.len() != durations.len() {
            return Err(Error::LengthMismatch(frames.len(), durations.len()));
        }
        let Some(first) = frames.first() else {
            return Err(Error::InvalidArgument("no frames given".into()));
        };
        let mut segments = Vec::with_capacity(frames.len());
        let mut prev: Option<&PauliWord> = None;
        for (g, &duration) in frames.iter().zip(durations) {
            let pulse = match prev {
                None => g.adjoint(),
                Some(p) => pauli_mul(&g.adjoint(), p)?,
            };
            segments.push(Segment { pulse, duration });
            prev = Some(g);
        }
        let last = frames.last().unwrap_or(first).clone();
        Self::new(segments, last)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn final_pulse(&self) -> &PauliWord {
        &self.final_pulse
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn num_qubits(&self) -> usize {
        self.final_pulse.num_qubits()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Number of non-identity pulses, final pulse included.
    pub fn pulse_count(&self) -> usize {
        self.segments.iter().filter(|s| !s.pulse.is_identity()).count()
            + usize::from(!self.final_pulse.is_identity())
    }

    /// Toggling frames `g_l = (p_l ... p_0)^dagger` before each segment.
    pub fn frames(&self) -> Vec<PauliWord> {
        let mut acc = PauliWord::identity(self.num_qubits());
        self.segments
            .iter()
            .map(|s| {
                acc = pauli_mul(&s.pulse, &acc).expect("qubit counts checked at construction");
                acc.adjoint()
            })
            .collect()
    }

    /// True when every segment has the same duration (bitwise).
    pub fn is_equal_interval(&self) -> bool {
        let d = self.segments[0].duration;
        self.segments.iter().all(|s| s.duration == d)
    }

    /// The branch `g D g^dagger`: first pulse becomes `p_0 g^dagger`, final
    /// pulse becomes `g p_final`.
    pub fn conjugated(&self, g: &PauliWord) -> Result<Self> {
        if g.num_qubits() != self.num_qubits() {
            return Err(Error::LengthMismatch(g.num_qubits(), self.num_qubits()));
        }
        let mut segments = self.segments.clone();
        segments[0].pulse = pauli_mul(&segments[0].pulse, &g.adjoint())?;
        let final_pulse = pauli_mul(g, &self.final_pulse)?;
        Ok(Self {
            segments,
            final_pulse,
            total_time: self.total_time,
        })
    }
}

/// A set of Pauli words containing the identity and closed under
/// multiplication up to phase.
#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingGroup {
    elements: Vec<PauliWord>,
}

impl DecouplingGroup {
    pub fn new(elements: Vec<PauliWord>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidArgument("empty decoupling group".into()));
        };
        let n = first.num_qubits();
        if let Some(bad) = elements.iter().find(|g| g.num_qubits() != n) {
            return Err(Error::LengthMismatch(bad.num_qubits(), n));
        }
        if !elements.iter().any(|g| g.is_identity()) {
            return Err(Error::InvalidArgument("decoupling group must contain the identity".into()));
        }
        for a in &elements {
            for b in &elements {
                let ab = pauli_mul(a, b)?;
                if !elements.iter().any(|g| g.same_labels(&ab)) {
                    return Err(Error::InvalidArgument(format!(
                        "decoupling group not closed: {a} * {b} = {ab}"
                    )));
                }
            }
        }
        Ok(Self { elements })
    }

    /// `{I}`.
    pub fn trivial(n: usize) -> Self {
        Self {
            elements: vec![PauliWord::identity(n)],
        }
    }

    /// `{I, X^{(x) n}}`.
    pub fn spin_flip(n: usize) -> Self {
        Self {
            elements: vec![PauliWord::identity(n), PauliWord::uniform(n, Pauli::X)],
        }
    }

    /// `{I, X, Y, Z}^{(x) n}`, applied globally.
    pub fn xy4(n: usize) -> Self {
        Self {
            elements: xy4_frames(n),
        }
    }

    pub fn elements(&self) -> &[PauliWord] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.elements[0].num_qubits()
    }
}

fn check_interval(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("interval must be positive, got {tau}")))
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sequence needs at least one qubit".into()));
    }
    Ok(())
}

fn xy4_frames(n: usize) -> Vec<PauliWord> {
    Pauli::ALL.iter().map(|&p| PauliWord::uniform(n, p)).collect()
}

/// `E X E X`: pulses at `t = 0` and `t = tau`.
pub fn seq_hahn(n: usize, tau: f64) -> Result<PulseSequence> {
    check_qubits(n)?;
    check_interval(tau)?;
    let x = PauliWord::uniform(n, Pauli::X);
    PulseSequence::from_frames(&[x, PauliWord::identity(n)], &[tau, tau])
}

/// `X E X E`: pulses at `t = tau` and `t = 2 tau`.
pub fn seq_hahn_reversed(n: usize, tau: f64) -> Result<PulseSequence> {
    check_qubits(n)?;
    check_interval(tau)?;
    let x = PauliWord::uniform(n, Pauli::X);
    PulseSequence::from_frames(&[PauliWord::identity(n), x], &[tau, tau])
}

/// Frames `I, X, Y, Z` (each applied to every qubit).
pub fn seq_xy4(n: usize, tau: f64) -> Result<PulseSequence> {
    check_qubits(n)?;
    check_interval(tau)?;
    PulseSequence::from_frames(&xy4_frames(n), &[tau; 4])
}

/// XY4 frames followed by their reverse: `I X Y Z Z Y X I`.
pub fn seq_xy8(n: usize, tau: f64) -> Result<PulseSequence> {
    check_qubits(n)?;
    check_interval(tau)?;
    let mut frames = xy4_frames(n);
    let back: Vec<_> = frames.iter().rev().cloned().collect();
    frames.extend(back);
    PulseSequence::from_frames(&frames, &[tau; 8])
}

/// Frames of the order-`k` concatenation: each XY4 frame times every frame of
/// order `k - 1`, the outer index varying slowest.
pub fn cdd_frames(n: usize, k: usize) -> Vec<PauliWord> {
    let outer = xy4_frames(n);
    let mut frames = vec![PauliWord::identity(n)];
    for _ in 0..k {
        frames = outer
            .iter()
            .flat_map(|g| frames.iter().map(move |f| pauli_mul(g, f).expect("equal qubit counts")))
            .collect();
    }
    frames
}

/// Concatenated XY4 of order `k` (`1 <= k <= 6`): `4^k` segments of length `tau`.
pub fn seq_cdd(n: usize, k: usize, tau: f64) -> Result<PulseSequence> {
    check_qubits(n)?;
    check_interval(tau)?;
    if k == 0 || k > MAX_CDD_ORDER {
        return Err(Error::InvalidArgument(format!(
            "concatenation order must be in 1..={MAX_CDD_ORDER}, got {k}"
        )));
    }
    let frames = cdd_frames(n, k);
    let durations = vec![tau; frames.len()];
    PulseSequence::from_frames(&frames, &durations)
}

/// `t_j = T sin^2(j pi / (2k + 2))` for `j = 1..=k`.
pub fn udd_pulse_times(k: usize, total_t: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("UDD order must be at least 1".into()));
    }
    check_interval(total_t)?;
    // sin^2(x) = (1 - cos 2x) / 2; the upper half mirrors the lower half.
    let denom = (k + 1) as f64;
    let mut times = vec![0.0; k];
    for j in 1..=k {
        times[j - 1] = match (2 * j).cmp(&(k + 1)) {
            std::cmp::Ordering::Less => {
                total_t * 0.5 * (1.0 - (j as f64 * std::f64::consts::PI / denom).cos())
            }
            std::cmp::Ordering::Equal => 0.5 * total_t,
            std::cmp::Ordering::Greater => total_t - times[k - j],
        };
    }
    Ok(times)
}

/// Single-qubit UDD of order `k`: `X` pulses at [`udd_pulse_times`].
///
/// The frames alternate `I, X, I, ...`; for odd `k` the sequence closes the
/// frame with a final `X`, so `pulse_count` is `k` for even `k` and `k + 1`
/// for odd `k`.
pub fn seq_udd(k: usize, total_t: f64) -> Result<PulseSequence> {
    let times = udd_pulse_times(k, total_t)?;
    let mut durations = Vec::with_capacity(k + 1);
    let mut prev = 0.0;
    for &t in &times {
        durations.push(t - prev);
        prev = t;
    }
    let head: f64 = durations.iter().sum();
    durations.push(total_t - head);
    let frames: Vec<PauliWord> = (0..=k)
        .map(|j| PauliWord::single(1, 0, if j % 2 == 0 { Pauli::I } else { Pauli::X }))
        .collect();
    PulseSequence::from_frames(&frames, &durations)
}

/// The `|G|` equally weighted branches `g D g^dagger` of the randomized sequence.
pub fn randomize(seq: &PulseSequence, group: &DecouplingGroup) -> Result<Vec<(f64, PulseSequence)>> {
    if group.num_qubits() != seq.num_qubits() {
        return Err(Error::LengthMismatch(group.num_qubits(), seq.num_qubits()));
    }
    let w = 1.0 / group.len() as f64;
    group
        .elements()
        .iter()
        .map(|g| Ok((w, seq.conjugated(g)?)))
        .collect()
}
