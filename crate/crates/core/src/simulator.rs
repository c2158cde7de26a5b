//! Dense statevector simulation, computational-basis sampling and stochastic Pauli noise.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{index_to_bitstring, PauliAxis};
use crate::rng::{seeded, Rng};

/// Registers larger than this are refused; 2^24 amplitudes is already 256 MiB.
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Rx(usize, f64),
    /// Half-angle convention: `RY(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    Ry(usize, f64),
    Rz(usize, f64),
    /// `diag(1, e^{iλ})`.
    Phase(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    Cz(usize, usize),
    /// `exp(-i φ Z⊗Z / 2)`.
    Rzz(usize, usize, f64),
}

impl Gate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::Phase(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) | Gate::Rzz(a, b, _) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz(..) | Gate::Rzz(..))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Phase(q, t) => Gate::Phase(q, -t),
            Gate::Rzz(a, b, t) => Gate::Rzz(a, b, -t),
            g => g,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Phase(..) => "PHASE",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::Rzz(..) => "RZZ",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) | Gate::Phase(_, t) => Some(t),
            Gate::Rzz(_, _, t) => Some(t),
            _ => None,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let targets = self.targets();
        for &q in &targets {
            if q >= n_qubits {
                return Err(Error::InvalidQubit { index: q, n_qubits });
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::RepeatedTarget(targets[0]));
        }
        if let Some(t) = self.angle() {
            if !t.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite angle in {}",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Single-qubit matrix, row-major `[[a, b], [c, d]]`.
    fn matrix_1q(&self) -> Option<[Complex64; 4]> {
        let c = Complex64::new;
        let z = c(0.0, 0.0);
        Some(match *self {
            Gate::H(_) => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                [h, h, h, -h]
            }
            Gate::X(_) => [z, c(1.0, 0.0), c(1.0, 0.0), z],
            Gate::Y(_) => [z, c(0.0, -1.0), c(0.0, 1.0), z],
            Gate::Z(_) => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
            Gate::Rx(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            Gate::Ry(_, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            Gate::Rz(_, t) => [
                Complex64::from_polar(1.0, -t / 2.0),
                z,
                z,
                Complex64::from_polar(1.0, t / 2.0),
            ],
            Gate::Phase(_, t) => [c(1.0, 0.0), z, z, Complex64::from_polar(1.0, t)],
            _ => return None,
        })
    }
}

impl fmt::Display for Gate {
    /// Debug-dump form: `RY(1.5708) q0`, `CNOT q0 q1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        if let Some(t) = self.angle() {
            write!(f, "({t:.4})")?;
        }
        for q in self.targets() {
            write!(f, " q{q}")?;
        }
        Ok(())
    }
}

/// Parses one line of the gate dump format. Angles may carry any precision.
impl std::str::FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let head = tokens
            .next()
            .ok_or_else(|| Error::invalid("empty gate line"))?;
        let (name, angle) = match head.find('(') {
            Some(open) => {
                let close = head
                    .rfind(')')
                    .filter(|&c| c > open)
                    .ok_or_else(|| Error::invalid(format!("unbalanced parenthesis in '{head}'")))?;
                let angle: f64 = head[open + 1..close]
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad angle in '{head}'")))?;
                (&head[..open], Some(angle))
            }
            None => (head, None),
        };
        let qubits = tokens
            .map(|t| {
                t.strip_prefix('q')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::invalid(format!("bad qubit token '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let name = name.to_ascii_uppercase();
        let needs_angle = matches!(name.as_str(), "RX" | "RY" | "RZ" | "PHASE" | "RZZ");
        if needs_angle != angle.is_some() {
            return Err(Error::invalid(format!("angle mismatch for gate '{name}'")));
        }
        let arity = if matches!(name.as_str(), "CNOT" | "CX" | "CZ" | "RZZ") {
            2
        } else {
            1
        };
        if qubits.len() != arity {
            return Err(Error::invalid(format!(
                "gate '{name}' takes {arity} qubit(s), got {}",
                qubits.len()
            )));
        }
        let t = angle.unwrap_or(0.0);
        let q = qubits[0];
        Ok(match name.as_str() {
            "H" => Gate::H(q),
            "X" => Gate::X(q),
            "Y" => Gate::Y(q),
            "Z" => Gate::Z(q),
            "RX" => Gate::Rx(q, t),
            "RY" => Gate::Ry(q, t),
            "RZ" => Gate::Rz(q, t),
            "PHASE" => Gate::Phase(q, t),
            "CNOT" | "CX" => Gate::Cnot {
                control: q,
                target: qubits[1],
            },
            "CZ" => Gate::Cz(q, qubits[1]),
            "RZZ" => Gate::Rzz(q, qubits[1], t),
            other => return Err(Error::invalid(format!("unknown gate '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends every gate of `other`, which must act on the same register size.
    pub fn extend_from(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    /// Runs on `|0…0⟩`.
    pub fn run(&self) -> Result<StateVector> {
        self.run_from(StateVector::zero_state(self.n_qubits))
    }

    pub fn run_from(&self, mut state: StateVector) -> Result<StateVector> {
        if state.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: state.n_qubits,
            });
        }
        for g in &self.gates {
            state.apply(g)?;
        }
        Ok(state)
    }

    /// One stochastic trajectory under `noise`. Deterministic for a fixed seed.
    pub fn run_noisy(&self, noise: &NoiseModel, seed: u64) -> Result<StateVector> {
        let mut rng = seeded(seed);
        Ok(self.run_trajectory(noise, &mut rng)?.0)
    }

    /// Runs one trajectory and reports how many faults were injected.
    pub(crate) fn run_trajectory(
        &self,
        noise: &NoiseModel,
        rng: &mut Rng,
    ) -> Result<(StateVector, usize)> {
        let mut state = StateVector::zero_state(self.n_qubits);
        let mut faults = 0;
        for g in &self.gates {
            state.apply(g)?;
            faults += noise.inject_fault(&mut state, g, rng);
        }
        Ok((state, faults))
    }

    /// Draws only the fault pattern of a trajectory: `None` when no fault fires. Consumes the
    /// generator exactly as [`run_trajectory`](Self::run_trajectory) does, so callers can skip
    /// the simulation for fault-free trajectories.
    pub(crate) fn draw_faults(
        &self,
        noise: &NoiseModel,
        rng: &mut Rng,
    ) -> Option<Vec<(usize, Fault)>> {
        let mut faults = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(f) = noise.draw_fault(g, rng) {
                faults.push((i, f));
            }
        }
        (!faults.is_empty()).then_some(faults)
    }

    /// Replays a trajectory with a pre-drawn fault pattern.
    pub(crate) fn run_with_faults(&self, faults: &[(usize, Fault)]) -> Result<StateVector> {
        let mut state = StateVector::zero_state(self.n_qubits);
        let mut next = faults.iter().peekable();
        for (i, g) in self.gates.iter().enumerate() {
            state.apply(g)?;
            while let Some((_, f)) = next.next_if(|(at, _)| *at == i) {
                f.apply(&mut state, g);
            }
        }
        Ok(state)
    }

    /// Parses a gate dump (one gate per line, `#` comments). The register size is inferred from
    /// the largest qubit index unless given.
    pub fn parse(text: &str, n_qubits: Option<usize>) -> Result<Circuit> {
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let g: Gate = line.parse().map_err(|e: Error| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            gates.push(g);
        }
        let inferred = gates
            .iter()
            .flat_map(|g| g.targets())
            .max()
            .map_or(1, |m| m + 1);
        let n = n_qubits.unwrap_or(inferred);
        Circuit::from_gates(n, gates)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0).expect("index 0 is always valid")
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SizeLimit {
                what: "statevector",
                limit: MAX_QUBITS,
                requested: n_qubits,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Basis state from a bitstring, qubit 0 leftmost.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let index = crate::pauli::bitstring_to_index(bits, bits.len())?;
        Self::basis_state(bits.len(), index)
    }

    /// The amplitudes must have power-of-two length and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude vector length {len} is not a power of two ≥ 2"
            )));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "state is not normalised (norm² = {norm})"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if let Some(m) = gate.matrix_1q() {
            self.apply_1q(gate.targets()[0], m);
            return Ok(());
        }
        match *gate {
            Gate::Cnot { control, target } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amplitudes.swap(i, i | tm);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Rzz(a, b, t) => {
                let same = Complex64::from_polar(1.0, -t / 2.0);
                let differ = same.conj();
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    let parity = ((i >> a) ^ (i >> b)) & 1;
                    *amp *= if parity == 0 { same } else { differ };
                }
            }
            _ => unreachable!("single-qubit gates handled above"),
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [Complex64; 4]) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            self.amplitudes[i] = m[0] * a0 + m[1] * a1;
            self.amplitudes[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }

    fn apply_pauli(&mut self, q: usize, axis: PauliAxis) {
        match axis {
            PauliAxis::I => {}
            PauliAxis::X => self.apply_1q(q, Gate::X(q).matrix_1q().unwrap()),
            PauliAxis::Y => self.apply_1q(q, Gate::Y(q).matrix_1q().unwrap()),
            PauliAxis::Z => self.apply_1q(q, Gate::Z(q).matrix_1q().unwrap()),
        }
    }

    /// Multinomial draw of `shots` computational-basis outcomes, followed by independent
    /// per-bit readout flips when a noise model is supplied.
    pub fn sample(
        &self,
        shots: usize,
        noise: Option<&NoiseModel>,
        seed: u64,
    ) -> Result<SampleCounts> {
        let mut rng = seeded(seed);
        self.sample_with(shots, noise, &mut rng)
    }

    pub(crate) fn sample_with(
        &self,
        shots: usize,
        noise: Option<&NoiseModel>,
        rng: &mut Rng,
    ) -> Result<SampleCounts> {
        let indices = self.sample_indices(shots, noise, rng)?;
        let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
        for i in indices {
            *tally.entry(i).or_default() += 1;
        }
        Ok(SampleCounts::from_index_counts(self.n_qubits, tally))
    }

    pub(crate) fn sample_indices(
        &self,
        shots: usize,
        noise: Option<&NoiseModel>,
        rng: &mut Rng,
    ) -> Result<Vec<usize>> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let last = cumulative.len() - 1;
        let readout = noise.filter(|n| n.readout_flip0 > 0.0 || n.readout_flip1 > 0.0);
        Ok((0..shots)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * total;
                let mut index = cumulative.partition_point(|&c| c <= u).min(last);
                // skip zero-probability entries that rounding could land on
                while index > 0 && cumulative[index] == cumulative[index - 1] {
                    index -= 1;
                }
                if let Some(n) = readout {
                    index = n.apply_readout(index, self.n_qubits, rng);
                }
                index
            })
            .collect())
    }
}

/// Stochastic Pauli fault model plus asymmetric readout error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Fault probability after each single-qubit gate (uniform over X, Y, Z).
    pub p1: f64,
    /// Fault probability after each two-qubit gate (uniform over the 15 non-identity pairs).
    pub p2: f64,
    /// P(read 1 | true 0).
    pub readout_flip0: f64,
    /// P(read 0 | true 1).
    pub readout_flip1: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1: 0.0018,
            p2: 0.017,
            readout_flip0: 0.038,
            readout_flip1: 0.038,
        }
    }
}

/// A drawn fault: one or two Pauli axes applied to the gate's targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fault([PauliAxis; 2]);

impl Fault {
    fn apply(&self, state: &mut StateVector, gate: &Gate) {
        for (q, axis) in gate.targets().into_iter().zip(self.0) {
            state.apply_pauli(q, axis);
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            readout_flip0: 0.0,
            readout_flip1: 0.0,
        }
    }

    pub fn new(p1: f64, p2: f64, readout_flip0: f64, readout_flip1: f64) -> Result<Self> {
        let m = Self {
            p1,
            p2,
            readout_flip0,
            readout_flip1,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("readout_flip0", self.readout_flip0),
            ("readout_flip1", self.readout_flip1),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.p1 > 0.0 || self.p2 > 0.0
    }

    /// Same fault probabilities, no readout error.
    pub fn gates_only(&self) -> Self {
        Self {
            readout_flip0: 0.0,
            readout_flip1: 0.0,
            ..*self
        }
    }

    fn draw_fault(&self, gate: &Gate, rng: &mut Rng) -> Option<Fault> {
        let p = if gate.is_two_qubit() {
            self.p2
        } else {
            self.p1
        };
        if p <= 0.0 || rng.random::<f64>() >= p {
            return None;
        }
        const NON_ID: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
        Some(if gate.is_two_qubit() {
            // 1..=15 encodes (a, b) in base 4, excluding (I, I)
            let k = rng.random_range(1..16usize);
            Fault([PauliAxis::ALL[k / 4], PauliAxis::ALL[k % 4]])
        } else {
            Fault([NON_ID[rng.random_range(0..3usize)], PauliAxis::I])
        })
    }

    fn inject_fault(&self, state: &mut StateVector, gate: &Gate, rng: &mut Rng) -> usize {
        match self.draw_fault(gate, rng) {
            Some(f) => {
                f.apply(state, gate);
                1
            }
            None => 0,
        }
    }

    fn apply_readout(&self, index: usize, n_qubits: usize, rng: &mut Rng) -> usize {
        let mut out = index;
        for q in 0..n_qubits {
            let bit = 1usize << q;
            let flip = if index & bit == 0 {
                self.readout_flip0
            } else {
                self.readout_flip1
            };
            if flip > 0.0 && rng.random::<f64>() < flip {
                out ^= bit;
            }
        }
        out
    }
}

/// Histogram of measured bitstrings (qubit 0 leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub n_qubits: usize,
    pub shots: usize,
    pub counts: BTreeMap<String, usize>,
}

impl SampleCounts {
    pub fn new(n_qubits: usize, counts: BTreeMap<String, usize>) -> Result<Self> {
        for b in counts.keys() {
            crate::pauli::bitstring_to_index(b, n_qubits)?;
        }
        let shots = counts.values().sum();
        if shots == 0 {
            return Err(Error::EmptySamples);
        }
        Ok(Self {
            n_qubits,
            shots,
            counts,
        })
    }

    fn from_index_counts(n_qubits: usize, tally: BTreeMap<usize, usize>) -> Self {
        let shots = tally.values().sum();
        let counts = tally
            .into_iter()
            .map(|(i, c)| (index_to_bitstring(i, n_qubits), c))
            .collect();
        Self {
            n_qubits,
            shots,
            counts,
        }
    }

    pub fn get(&self, bits: &str) -> usize {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bits: &str) -> f64 {
        self.get(bits) as f64 / self.shots as f64
    }

    /// `(basis index, count)` pairs.
    pub fn index_counts(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(b, &c)| {
            let i = crate::pauli::bitstring_to_index(b, self.n_qubits)
                .expect("keys validated on construction");
            (i, c)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ry_pi_flips_zero() {
        let mut s = StateVector::zero_state(1);
        s.apply(&Gate::Ry(0, PI)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_makes_plus() {
        let mut s = StateVector::zero_state(1);
        s.apply(&Gate::H(0)).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        }
    }

    #[test]
    fn ry_minus_half_pi_rotates_plus_to_zero() {
        let mut s = StateVector::zero_state(1);
        s.apply(&Gate::H(0)).unwrap();
        s.apply(&Gate::Ry(0, -PI / 2.0)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 1.0, epsilon = 1e-12);
        // and +π/2 sends |+⟩ to |1⟩
        let mut s = StateVector::zero_state(1);
        s.apply(&Gate::H(0)).unwrap();
        s.apply(&Gate::Ry(0, PI / 2.0)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_targets_rejected() {
        let mut s = StateVector::zero_state(2);
        assert!(matches!(
            s.apply(&Gate::X(2)),
            Err(Error::InvalidQubit { .. })
        ));
        assert!(matches!(
            s.apply(&Gate::Cnot {
                control: 1,
                target: 1
            }),
            Err(Error::RepeatedTarget(1))
        ));
        let mut circ = Circuit::new(2);
        assert!(circ.push(Gate::Cz(0, 5)).is_err());
    }

    #[test]
    fn run_examples() {
        let empty = Circuit::new(2);
        assert_eq!(empty.run().unwrap(), StateVector::zero_state(2));

        let h3 = Circuit::from_gates(3, (0..3).map(Gate::H)).unwrap();
        for a in h3.run().unwrap().amplitudes() {
            assert_abs_diff_eq!(a.re, 1.0 / 8f64.sqrt(), epsilon = 1e-15);
        }

        let ry0 = Circuit::from_gates(1, [Gate::Ry(0, 0.0)]).unwrap();
        assert_eq!(ry0.run().unwrap(), StateVector::zero_state(1));

        let wrong = StateVector::zero_state(3);
        assert!(ry0.run_from(wrong).is_err());
    }

    #[test]
    fn cnot_entangles() {
        let bell = Circuit::from_gates(
            2,
            [
                Gate::H(0),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
            ],
        )
        .unwrap()
        .run()
        .unwrap();
        let a = bell.amplitudes();
        assert_abs_diff_eq!(a[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[3].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1].norm() + a[2].norm(), 0.0);
    }

    #[test]
    fn noiseless_trajectory_equals_run() {
        let circ = Circuit::from_gates(
            2,
            [
                Gate::H(0),
                Gate::Ry(1, 0.3),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
                Gate::Rz(0, 1.1),
            ],
        )
        .unwrap();
        assert_eq!(
            circ.run_noisy(&NoiseModel::noiseless(), 7).unwrap(),
            circ.run().unwrap()
        );
    }

    #[test]
    fn certain_fault_fires_every_gate() {
        let noise = NoiseModel::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let circ = Circuit::from_gates(1, vec![Gate::Ry(0, 0.0); 5]).unwrap();
        let mut rng = seeded(3);
        let (_, faults) = circ.run_trajectory(&noise, &mut rng).unwrap();
        assert_eq!(faults, 5);
    }

    #[test]
    fn trajectory_replay_matches_direct_run() {
        let noise = NoiseModel::new(0.3, 0.5, 0.0, 0.0).unwrap();
        let circ = Circuit::from_gates(
            2,
            [
                Gate::H(0),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
                Gate::Rx(1, 0.7),
                Gate::Cz(0, 1),
            ],
        )
        .unwrap();
        for seed in 0..50 {
            let direct = circ.run_trajectory(&noise, &mut seeded(seed)).unwrap().0;
            let replay = match circ.draw_faults(&noise, &mut seeded(seed)) {
                Some(f) => circ.run_with_faults(&f).unwrap(),
                None => circ.run().unwrap(),
            };
            assert_eq!(direct, replay);
        }
    }

    #[test]
    fn sample_deterministic_state() {
        let one = StateVector::basis_state(1, 1).unwrap();
        let counts = one.sample(100, None, 1).unwrap();
        assert_eq!(counts.get("1"), 100);
        assert_eq!(counts.counts.len(), 1);
        assert!(one.sample(0, None, 1).is_err());
    }

    #[test]
    fn sample_frequency_matches_amplitude() {
        let t = PI / 6.0;
        let psi = StateVector::from_amplitudes(vec![
            c(t.cos(), 0.0),
            c(t.sin(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        let n = 100_000;
        let counts = psi.sample(n, None, 11).unwrap();
        let p = 0.25;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((counts.frequency("10") - p).abs() < 3.0 * sigma);
        assert_eq!(counts.counts.values().sum::<usize>(), n);
    }

    #[test]
    fn readout_flip_rate() {
        let noise = NoiseModel::default();
        let n = 100_000;
        let counts = StateVector::zero_state(1)
            .sample(n, Some(&noise), 5)
            .unwrap();
        let p = 0.038;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((counts.frequency("1") - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let psi = Circuit::from_gates(3, (0..3).map(Gate::H))
            .unwrap()
            .run()
            .unwrap();
        assert_eq!(
            psi.sample(500, None, 9).unwrap(),
            psi.sample(500, None, 9).unwrap()
        );
        assert_ne!(
            psi.sample(500, None, 9).unwrap(),
            psi.sample(500, None, 10).unwrap()
        );
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(1.2, 0.0, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1, 0.0, 0.0).is_err());
        let d = NoiseModel::default();
        assert_eq!(
            (d.p1, d.p2, d.readout_flip0, d.readout_flip1),
            (0.0018, 0.017, 0.038, 0.038)
        );
    }

    #[test]
    fn gate_dump_format() {
        let circ = Circuit::from_gates(
            2,
            [
                Gate::Ry(0, PI / 2.0),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
                Gate::Rzz(0, 1, -0.25),
                Gate::H(1),
            ],
        )
        .unwrap();
        assert_eq!(
            circ.to_string(),
            "RY(1.5708) q0\nCNOT q0 q1\nRZZ(-0.2500) q0 q1\nH q1\n"
        );
        let parsed = Circuit::parse(&circ.to_string(), None).unwrap();
        assert_eq!(parsed.len(), 4);
        assert_eq!(
            parsed.gates()[1],
            Gate::Cnot {
                control: 0,
                target: 1
            }
        );

        assert!(Circuit::parse("RY q0", None).is_err());
        assert!(Circuit::parse("H q0 q1", None).is_err());
        assert!(Circuit::parse("FOO q0", None).is_err());
        assert!(Circuit::parse("CNOT q0 q0", None).is_err());
    }

    #[test]
    fn inverse_undoes_gate() {
        let gates = [
            Gate::H(0),
            Gate::Rx(0, 0.4),
            Gate::Ry(1, -1.3),
            Gate::Rz(0, 2.2),
            Gate::Phase(1, 0.9),
            Gate::Cnot {
                control: 1,
                target: 0,
            },
            Gate::Cz(0, 1),
            Gate::Rzz(0, 1, 0.6),
            Gate::Y(1),
        ];
        let start = Circuit::from_gates(2, [Gate::H(0), Gate::Ry(1, 0.8), Gate::Rz(1, 0.2)])
            .unwrap()
            .run()
            .unwrap();
        for g in gates {
            let mut s = start.clone();
            s.apply(&g).unwrap();
            s.apply(&g.inverse()).unwrap();
            assert!(
                (s.inner(&start).unwrap() - c(1.0, 0.0)).norm() < 1e-12,
                "{g}"
            );
        }
    }
}
