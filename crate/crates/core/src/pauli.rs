//! Pauli-string algebra and weighted observables.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::StateVector;

/// Coefficients below this magnitude are dropped by [`Observable::simplify`].
pub const SIMPLIFY_THRESHOLD: f64 = 1e-12;

/// Largest register for which a dense matrix may be built.
pub const DENSE_QUBIT_LIMIT: usize = 10;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// Product `self * other` as (power of i, axis).
    pub fn times(self, other: PauliAxis) -> (Phase, PauliAxis) {
        use PauliAxis::*;
        match (self, other) {
            (I, a) | (a, I) => (Phase::ONE, a),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == PauliAxis::I
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, PauliAxis::I | PauliAxis::Z)
    }

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }
}

/// A fourth root of unity, stored as the exponent `k` in `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

/// Tensor product of single-qubit Paulis, one axis per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    axes: Vec<PauliAxis>,
}

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("a Pauli string needs at least one qubit"));
        }
        Ok(Self { axes })
    }

    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "a Pauli string needs at least one qubit");
        Self {
            axes: vec![PauliAxis::I; n_qubits],
        }
    }

    /// Builds a string from `(qubit, axis)` pairs; unspecified qubits are identity.
    pub fn from_sparse(n_qubits: usize, factors: &[(usize, PauliAxis)]) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("a Pauli string needs at least one qubit"));
        }
        let mut axes = vec![PauliAxis::I; n_qubits];
        for &(q, axis) in factors {
            if q >= n_qubits {
                return Err(Error::InvalidQubit { index: q, n_qubits });
            }
            if !axes[q].is_identity() {
                return Err(Error::RepeatedTarget(q));
            }
            axes[q] = axis;
        }
        Ok(Self { axes })
    }

    /// Parses a dense label such as `"ZXI"`, qubit 0 first.
    pub fn from_label(label: &str) -> Result<Self> {
        let axes = label
            .chars()
            .map(|c| {
                PauliAxis::from_symbol(c)
                    .ok_or_else(|| Error::invalid(format!("bad Pauli symbol '{c}' in '{label}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.axes
    }

    pub fn axis(&self, q: usize) -> PauliAxis {
        self.axes[q]
    }

    pub fn support(&self) -> Vec<usize> {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_identity())
            .map(|(q, _)| q)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|a| !a.is_identity()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|a| a.is_identity())
    }

    pub fn is_diagonal(&self) -> bool {
        self.axes.iter().all(|a| a.is_diagonal())
    }

    /// Bits flipped by the string (X or Y).
    pub fn x_mask(&self) -> usize {
        self.mask(|a| matches!(a, PauliAxis::X | PauliAxis::Y))
    }

    /// Bits contributing a sign (Y or Z).
    pub fn z_mask(&self) -> usize {
        self.mask(|a| matches!(a, PauliAxis::Y | PauliAxis::Z))
    }

    fn mask(&self, pred: impl Fn(PauliAxis) -> bool) -> usize {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| pred(a))
            .fold(0, |m, (q, _)| m | (1usize << q))
    }

    fn y_count(&self) -> u32 {
        self.axes.iter().filter(|&&a| a == PauliAxis::Y).count() as u32
    }

    /// Qubit-wise product with accumulated phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PhasedString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::Dimension {
                expected: self.n_qubits(),
                found: other.n_qubits(),
            });
        }
        let mut phase = Phase::ONE;
        let axes = self
            .axes
            .iter()
            .zip(&other.axes)
            .map(|(&a, &b)| {
                let (p, axis) = a.times(b);
                phase = phase * p;
                axis
            })
            .collect();
        Ok(PhasedString {
            phase,
            string: PauliString { axes },
        })
    }

    /// True when every qubit carries equal axes or at least one identity.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> bool {
        self.axes
            .iter()
            .zip(&other.axes)
            .all(|(&a, &b)| a == b || a.is_identity() || b.is_identity())
    }

    /// Full (anti)commutation test: strings commute when they anticommute on an even number of qubits.
    pub fn commutes(&self, other: &PauliString) -> bool {
        self.axes
            .iter()
            .zip(&other.axes)
            .filter(|(&a, &b)| a != b && !a.is_identity() && !b.is_identity())
            .count()
            % 2
            == 0
    }

    /// `P|i⟩ = phase · |i ^ x_mask⟩`; returns that phase.
    #[inline]
    pub(crate) fn basis_phase(y_count: u32, z_mask: usize, index: usize) -> Complex64 {
        let sign_flips = (index & z_mask).count_ones();
        Phase::from_exponent(y_count + 2 * sign_flips).to_complex()
    }

    /// Eigenvalue (±1) of a diagonal string on computational basis state `index`.
    #[inline]
    pub(crate) fn diagonal_sign(z_mask: usize, index: usize) -> f64 {
        if (index & z_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for PauliString {
    /// Sparse form, e.g. `Z0*X1`; the identity is `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for (q, a) in self.axes.iter().enumerate() {
            if a.is_identity() {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            write!(f, "{}{}", a.symbol(), q)?;
            first = false;
        }
        Ok(())
    }
}

/// A Pauli string times a fourth root of unity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedString {
    pub phase: Phase,
    pub string: PauliString,
}

impl fmt::Display for PhasedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.phase, self.string)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite coefficient {coefficient}"
            )));
        }
        Ok(Self {
            coefficient,
            string,
        })
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.string)
    }
}

/// Real-weighted sum of Pauli strings plus a constant (the all-identity weight).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    constant: f64,
}

impl Observable {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("an observable needs at least one qubit"));
        }
        Ok(Self {
            n_qubits,
            terms: Vec::new(),
            constant: 0.0,
        })
    }

    pub fn constant_only(n_qubits: usize, constant: f64) -> Result<Self> {
        let mut obs = Self::new(n_qubits)?;
        obs.add_constant(constant)?;
        Ok(obs)
    }

    /// Builds an observable from `(coefficient, label)` pairs, labels in sparse text form
    /// (`"Z0*X1"`, `"I"`). Terms are kept as given; call [`simplify`](Self::simplify) to merge.
    pub fn from_terms(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let mut obs = Self::new(n_qubits)?;
        for &(c, label) in terms {
            let string = parse_sparse_string(label, n_qubits)?;
            obs.add_term(c, string)?;
        }
        Ok(obs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Constant plus the weights of any identity-string terms not yet folded in.
    pub fn offset(&self) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .filter(|t| t.string.is_identity())
                .map(|t| t.coefficient)
                .sum::<f64>()
    }

    /// Appends a term. An identity string is kept as a term until [`simplify`](Self::simplify).
    pub fn add_term(&mut self, coefficient: f64, string: PauliString) -> Result<&mut Self> {
        if string.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: string.n_qubits(),
            });
        }
        self.terms.push(PauliTerm::new(coefficient, string)?);
        Ok(self)
    }

    pub fn add_constant(&mut self, value: f64) -> Result<&mut Self> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite constant {value}")));
        }
        self.constant += value;
        Ok(self)
    }

    /// Merges like terms, folds identity strings into the constant and drops coefficients
    /// below [`SIMPLIFY_THRESHOLD`]. First-occurrence order is preserved.
    pub fn simplify(&self) -> Observable {
        let mut constant = self.constant;
        let mut order: Vec<PauliString> = Vec::new();
        let mut weights: HashMap<PauliString, f64> = HashMap::new();
        for t in &self.terms {
            if t.string.is_identity() {
                constant += t.coefficient;
                continue;
            }
            match weights.get_mut(&t.string) {
                Some(w) => *w += t.coefficient,
                None => {
                    order.push(t.string.clone());
                    weights.insert(t.string.clone(), t.coefficient);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|s| {
                let c = weights[&s];
                (c.abs() >= SIMPLIFY_THRESHOLD).then_some(PauliTerm {
                    coefficient: c,
                    string: s,
                })
            })
            .collect();
        if constant.abs() < SIMPLIFY_THRESHOLD {
            constant = 0.0;
        }
        Observable {
            n_qubits: self.n_qubits,
            terms,
            constant,
        }
    }

    pub fn one_norm(&self) -> f64 {
        self.constant.abs() + self.terms.iter().map(|t| t.coefficient.abs()).sum::<f64>()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_diagonal())
    }

    pub fn scaled(&self, factor: f64) -> Observable {
        Observable {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coefficient: t.coefficient * factor,
                    string: t.string.clone(),
                })
                .collect(),
            constant: self.constant * factor,
        }
    }

    /// Sum of two observables, simplified.
    pub fn plus(&self, other: &Observable) -> Result<Observable> {
        self.check_size(other.n_qubits)?;
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.constant += other.constant;
        Ok(out.simplify())
    }

    /// Operator product, simplified. Fails if a term with imaginary weight survives, which
    /// happens only when the factors do not commute.
    pub fn product(&self, other: &Observable) -> Result<Observable> {
        self.check_size(other.n_qubits)?;
        let id = PauliString::identity(self.n_qubits);
        let lhs: Vec<(f64, &PauliString)> = std::iter::once((self.constant, &id))
            .chain(self.terms.iter().map(|t| (t.coefficient, &t.string)))
            .collect();
        let rhs: Vec<(f64, &PauliString)> = std::iter::once((other.constant, &id))
            .chain(other.terms.iter().map(|t| (t.coefficient, &t.string)))
            .collect();

        let mut order: Vec<PauliString> = Vec::new();
        let mut weights: HashMap<PauliString, Complex64> = HashMap::new();
        for &(ca, sa) in &lhs {
            for &(cb, sb) in &rhs {
                if ca == 0.0 || cb == 0.0 {
                    continue;
                }
                let p = sa.multiply(sb)?;
                let w = p.phase.to_complex() * (ca * cb);
                match weights.get_mut(&p.string) {
                    Some(acc) => *acc += w,
                    None => {
                        order.push(p.string.clone());
                        weights.insert(p.string, w);
                    }
                }
            }
        }
        let mut out = Observable::new(self.n_qubits)?;
        for s in order {
            let w = weights[&s];
            if w.im.abs() >= SIMPLIFY_THRESHOLD {
                return Err(Error::invalid(format!(
                    "product has imaginary weight {} on {s}",
                    w.im
                )));
            }
            out.add_term(w.re, s)?;
        }
        Ok(out.simplify())
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: n,
            });
        }
        Ok(())
    }

    /// Dense `2^n x 2^n` matrix. Each string is a signed permutation, so entries are filled
    /// directly from the bit masks.
    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::SizeLimit {
                what: "dense matrix",
                limit: DENSE_QUBIT_LIMIT,
                requested: self.n_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::from(self.constant);
        for t in &self.terms {
            let (x, z, ny) = (t.string.x_mask(), t.string.z_mask(), t.string.y_count());
            for col in 0..dim {
                m[(col ^ x, col)] += PauliString::basis_phase(ny, z, col) * t.coefficient;
            }
        }
        Ok(m)
    }

    /// Energy of a computational basis state given as a bitstring (qubit 0 leftmost).
    pub fn eval_bitstring(&self, bits: &str) -> Result<f64> {
        let index = bitstring_to_index(bits, self.n_qubits)?;
        self.eval_index(index)
    }

    /// Energy of basis state `index` for a diagonal observable.
    pub fn eval_index(&self, index: usize) -> Result<f64> {
        if !self.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok(self.eval_index_unchecked(index))
    }

    pub(crate) fn eval_index_unchecked(&self, index: usize) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coefficient * PauliString::diagonal_sign(t.string.z_mask(), index))
                .sum::<f64>()
    }

    /// `H|ψ⟩` computed term by term.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let mut out: Vec<Complex64> = amplitudes.iter().map(|a| a * self.constant).collect();
        for t in &self.terms {
            let (x, z, ny) = (t.string.x_mask(), t.string.z_mask(), t.string.y_count());
            for (i, a) in amplitudes.iter().enumerate() {
                out[i ^ x] += PauliString::basis_phase(ny, z, i) * a * t.coefficient;
            }
        }
        Ok(out)
    }

    /// `⟨ψ|H|ψ⟩` without building the dense matrix.
    pub fn exact_expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        let amps = state.amplitudes();
        let mut total = Complex64::from(self.constant * state.norm_sqr());
        for t in &self.terms {
            let (x, z, ny) = (t.string.x_mask(), t.string.z_mask(), t.string.y_count());
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, a) in amps.iter().enumerate() {
                acc += amps[i ^ x].conj() * PauliString::basis_phase(ny, z, i) * a;
            }
            total += acc * t.coefficient;
        }
        debug_assert!(total.im.abs() < 1e-10 * (1.0 + self.one_norm()));
        Ok(total.re)
    }

    /// Parses the line format `<coeff> <axis><qubit>[*<axis><qubit>...]` (constant as `<coeff> I`).
    /// `#` starts a comment. The register size is the largest qubit index plus one unless
    /// `n_qubits` is given.
    pub fn parse(text: &str, n_qubits: Option<usize>) -> Result<Observable> {
        let mut parsed: Vec<(f64, Vec<(usize, PauliAxis)>)> = Vec::new();
        let mut max_q: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut tokens = line.split_whitespace();
            let coeff_tok = tokens.next().expect("non-empty line");
            let coeff: f64 = coeff_tok
                .parse()
                .map_err(|_| err(format!("bad coefficient '{coeff_tok}'")))?;
            if !coeff.is_finite() {
                return Err(err(format!("non-finite coefficient '{coeff_tok}'")));
            }
            let term_tok = tokens
                .next()
                .ok_or_else(|| err("missing Pauli term".to_string()))?;
            if let Some(extra) = tokens.next() {
                return Err(err(format!("unexpected token '{extra}'")));
            }
            let factors = parse_factors(term_tok).map_err(err)?;
            for &(q, _) in &factors {
                max_q = Some(max_q.map_or(q, |m| m.max(q)));
            }
            parsed.push((coeff, factors));
        }
        let inferred = max_q.map_or(1, |m| m + 1);
        let n = match n_qubits {
            Some(n) if n < inferred => {
                return Err(Error::InvalidQubit {
                    index: inferred - 1,
                    n_qubits: n,
                })
            }
            Some(n) => n,
            None => inferred,
        };
        let mut obs = Observable::new(n)?;
        for (c, factors) in parsed {
            if factors.is_empty() {
                obs.add_constant(c)?;
            } else {
                obs.add_term(c, PauliString::from_sparse(n, &factors)?)?;
            }
        }
        Ok(obs)
    }
}

impl fmt::Display for Observable {
    /// One term per line in the parseable text format; the constant comes first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constant != 0.0 || self.terms.is_empty() {
            writeln!(f, "{} I", self.constant)?;
        }
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Observable::parse(s, None)
    }
}

/// Identity factors (`I` or `I3`) are accepted and ignored.
fn parse_factors(token: &str) -> std::result::Result<Vec<(usize, PauliAxis)>, String> {
    let mut out: Vec<(usize, PauliAxis)> = Vec::new();
    for factor in token.split('*') {
        let mut chars = factor.chars();
        let axis = chars
            .next()
            .and_then(PauliAxis::from_symbol)
            .ok_or_else(|| format!("bad Pauli factor '{factor}'"))?;
        let digits = chars.as_str();
        if axis.is_identity() {
            if !digits.is_empty() && digits.parse::<usize>().is_err() {
                return Err(format!("bad qubit index in '{factor}'"));
            }
            continue;
        }
        let q: usize = digits
            .parse()
            .map_err(|_| format!("bad qubit index in '{factor}'"))?;
        if out.iter().any(|&(p, _)| p == q) {
            return Err(format!("qubit {q} appears twice in '{token}'"));
        }
        out.push((q, axis));
    }
    Ok(out)
}

/// Parses a sparse label (`"Z0*X1"`, `"I"`) into a string on `n_qubits`.
pub fn parse_sparse_string(label: &str, n_qubits: usize) -> Result<PauliString> {
    let factors = parse_factors(label).map_err(Error::InvalidArgument)?;
    PauliString::from_sparse(n_qubits, &factors)
}

/// Qubit 0 is the leftmost character.
pub fn bitstring_to_index(bits: &str, n_qubits: usize) -> Result<usize> {
    if bits.len() != n_qubits {
        return Err(Error::Dimension {
            expected: n_qubits,
            found: bits.len(),
        });
    }
    bits.chars()
        .enumerate()
        .try_fold(0usize, |acc, (q, c)| match c {
            '0' => Ok(acc),
            '1' => Ok(acc | (1 << q)),
            _ => Err(Error::invalid(format!(
                "bitstring '{bits}' has non-binary character '{c}'"
            ))),
        })
}

pub fn index_to_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}
