//! Slow reference implementations for verification.
//!
//! Everything here is built from explicit Kronecker products and dense linear algebra. None of it
//! calls the bit-mask fast paths in [`crate::pauli`] or the in-place kernels in
//! [`crate::simulator`], so agreement between the two is evidence rather than tautology.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliAxis, PauliString, DENSE_QUBIT_LIMIT};
use crate::simulator::{Circuit, Gate, StateVector};

pub type DenseMatrix = DMatrix<Complex64>;

/// Largest register for [`brute_force_min`].
pub const BRUTE_FORCE_LIMIT: usize = 22;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> DenseMatrix {
    DMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

pub fn pauli_matrix(axis: PauliAxis) -> DenseMatrix {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match axis {
        PauliAxis::I => m2(o, z, z, o),
        PauliAxis::X => m2(z, o, o, z),
        PauliAxis::Y => m2(z, c(0.0, -1.0), c(0.0, 1.0), z),
        PauliAxis::Z => m2(o, z, z, -o),
    }
}

fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense oracle",
            limit: DENSE_QUBIT_LIMIT,
            requested: n_qubits,
        });
    }
    Ok(())
}

/// `⊗_q op_q` with qubit `n-1` as the leftmost (most significant) factor. Qubits missing from
/// `ops` get the identity.
pub fn embed(ops: &[(usize, DenseMatrix)], n_qubits: usize) -> Result<DenseMatrix> {
    check_dense(n_qubits)?;
    let mut out = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..n_qubits).rev() {
        let factor = ops
            .iter()
            .find(|(p, _)| *p == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| pauli_matrix(PauliAxis::I));
        out = out.kronecker(&factor);
    }
    Ok(out)
}

pub fn string_matrix(s: &PauliString) -> Result<DenseMatrix> {
    let ops: Vec<(usize, DenseMatrix)> = s
        .axes()
        .iter()
        .enumerate()
        .map(|(q, &a)| (q, pauli_matrix(a)))
        .collect();
    embed(&ops, s.n_qubits())
}

pub fn observable_matrix(obs: &Observable) -> Result<DenseMatrix> {
    check_dense(obs.n_qubits())?;
    let dim = 1usize << obs.n_qubits();
    let mut m = DMatrix::identity(dim, dim) * c(obs.constant(), 0.0);
    for t in obs.terms() {
        m += string_matrix(&t.string)? * c(t.coefficient, 0.0);
    }
    Ok(m)
}

/// Single-qubit gate matrix written out from its textbook definition.
fn gate_matrix_1q(g: &Gate) -> Option<DenseMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    Some(match *g {
        Gate::H(_) => m2(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
        Gate::X(_) => pauli_matrix(PauliAxis::X),
        Gate::Y(_) => pauli_matrix(PauliAxis::Y),
        Gate::Z(_) => pauli_matrix(PauliAxis::Z),
        // exp(-iθσ/2) = cos(θ/2) I - i sin(θ/2) σ
        Gate::Rx(_, t) => axis_rotation(PauliAxis::X, t),
        Gate::Ry(_, t) => axis_rotation(PauliAxis::Y, t),
        Gate::Rz(_, t) => axis_rotation(PauliAxis::Z, t),
        Gate::Phase(_, t) => m2(o, z, z, Complex64::from_polar(1.0, t)),
        _ => return None,
    })
}

fn axis_rotation(axis: PauliAxis, theta: f64) -> DenseMatrix {
    pauli_matrix(PauliAxis::I) * c((theta / 2.0).cos(), 0.0)
        - pauli_matrix(axis) * c(0.0, (theta / 2.0).sin())
}

/// Full `2^n x 2^n` unitary of one gate.
pub fn gate_unitary(g: &Gate, n_qubits: usize) -> Result<DenseMatrix> {
    let targets = g.targets();
    if let Some(&q) = targets.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::InvalidQubit { index: q, n_qubits });
    }
    if let Some(m) = gate_matrix_1q(g) {
        return embed(&[(targets[0], m)], n_qubits);
    }
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let p0 = m2(o, z, z, z);
    let p1 = m2(z, z, z, o);
    match *g {
        Gate::Cnot { control, target } => Ok(embed(&[(control, p0)], n_qubits)?
            + embed(
                &[(control, p1), (target, pauli_matrix(PauliAxis::X))],
                n_qubits,
            )?),
        Gate::Cz(a, b) => Ok(embed(&[(a, p0)], n_qubits)?
            + embed(&[(a, p1), (b, pauli_matrix(PauliAxis::Z))], n_qubits)?),
        Gate::Rzz(a, b, t) => {
            let dim = 1usize << n_qubits;
            let zz = embed(
                &[
                    (a, pauli_matrix(PauliAxis::Z)),
                    (b, pauli_matrix(PauliAxis::Z)),
                ],
                n_qubits,
            )?;
            Ok(
                DMatrix::identity(dim, dim) * c((t / 2.0).cos(), 0.0)
                    - zz * c(0.0, (t / 2.0).sin()),
            )
        }
        _ => unreachable!("single-qubit gates handled above"),
    }
}

/// Product of gate unitaries, first gate rightmost.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseMatrix> {
    let n = circuit.n_qubits();
    check_dense(n)?;
    let dim = 1usize << n;
    circuit
        .gates()
        .iter()
        .try_fold(DMatrix::identity(dim, dim), |acc, g| {
            Ok(gate_unitary(g, n)? * acc)
        })
}

pub fn dense_apply(m: &DenseMatrix, state: &StateVector) -> Result<Vec<Complex64>> {
    let dim = state.amplitudes().len();
    if m.ncols() != dim {
        return Err(Error::Dimension {
            expected: m.ncols(),
            found: dim,
        });
    }
    let v = DVector::from_column_slice(state.amplitudes());
    Ok((m * v).iter().copied().collect())
}

/// `exp(-i·angle·H)` for a diagonal observable.
pub fn dense_expm_diagonal(obs: &Observable, angle: f64) -> Result<DenseMatrix> {
    if !obs.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let h = observable_matrix(obs)?;
    let dim = h.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        out[(i, i)] = Complex64::from_polar(1.0, -angle * h[(i, i)].re);
    }
    Ok(out)
}

/// `exp(-i·angle·H)` for a one-qubit observable, in closed form:
/// with `H = a I + r n̂·σ`, `exp(-iβH) = e^{-iβa} (cos(βr) I - i sin(βr) n̂·σ)`.
pub fn expm_single_qubit(obs: &Observable, angle: f64) -> Result<DenseMatrix> {
    if obs.n_qubits() != 1 {
        return Err(Error::Unsupported(format!(
            "closed-form exponential needs a 1-qubit observable, got {} qubits",
            obs.n_qubits()
        )));
    }
    let mut vec = [0.0f64; 3];
    for t in obs.terms() {
        match t.string.axis(0) {
            PauliAxis::X => vec[0] += t.coefficient,
            PauliAxis::Y => vec[1] += t.coefficient,
            PauliAxis::Z => vec[2] += t.coefficient,
            PauliAxis::I => {}
        }
    }
    let id_weight = obs.constant()
        + obs
            .terms()
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .sum::<f64>();
    let r = (vec[0] * vec[0] + vec[1] * vec[1] + vec[2] * vec[2]).sqrt();
    let global = Complex64::from_polar(1.0, -angle * id_weight);
    let mut m = pauli_matrix(PauliAxis::I) * c((angle * r).cos(), 0.0);
    if r > 0.0 {
        let n_sigma = pauli_matrix(PauliAxis::X) * c(vec[0] / r, 0.0)
            + pauli_matrix(PauliAxis::Y) * c(vec[1] / r, 0.0)
            + pauli_matrix(PauliAxis::Z) * c(vec[2] / r, 0.0);
        m -= n_sigma * c(0.0, (angle * r).sin());
    }
    Ok(m * global)
}

/// Exhaustive minimum of a diagonal observable. Returns the energy and every bitstring within
/// `1e-9` of it, sorted lexicographically.
pub fn brute_force_min(obs: &Observable) -> Result<(f64, Vec<String>)> {
    if !obs.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let n = obs.n_qubits();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            what: "brute-force scan",
            limit: BRUTE_FORCE_LIMIT,
            requested: n,
        });
    }
    // supports as qubit lists, evaluated from the characters of each bitstring
    let terms: Vec<(f64, Vec<usize>)> = obs
        .terms()
        .iter()
        .map(|t| (t.coefficient, t.string.support()))
        .collect();
    let mut best = f64::INFINITY;
    let mut energies = Vec::with_capacity(1 << n);
    for index in 0..(1usize << n) {
        let bits: Vec<u8> = (0..n).map(|q| ((index >> q) & 1) as u8).collect();
        let e = obs.constant()
            + terms
                .iter()
                .map(|(coef, support)| {
                    let ones = support.iter().filter(|&&q| bits[q] == 1).count();
                    if ones % 2 == 0 {
                        *coef
                    } else {
                        -*coef
                    }
                })
                .sum::<f64>();
        best = best.min(e);
        energies.push((bits, e));
    }
    let tol = 1e-9 * (1.0 + best.abs());
    let mut argmins: Vec<String> = energies
        .into_iter()
        .filter(|(_, e)| *e <= best + tol)
        .map(|(bits, _)| {
            bits.iter()
                .map(|b| if *b == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    argmins.sort();
    Ok((best, argmins))
}

/// Lowest eigenvalue by dense Hermitian diagonalisation.
pub fn dense_ground_energy(obs: &Observable) -> Result<f64> {
    let h = observable_matrix(obs)?;
    let eig = h.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// One-qubit density-matrix evolution of `circuit` with the channel
/// `ρ → (1-p)ρ + p/3 (XρX + YρY + ZρZ)` after every gate. Returns ρ.
pub fn density_matrix_1q(circuit: &Circuit, p1: f64) -> Result<DenseMatrix> {
    if circuit.n_qubits() != 1 {
        return Err(Error::Unsupported(
            "density-matrix oracle is 1-qubit only".into(),
        ));
    }
    let mut rho = m2(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let paulis = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z].map(pauli_matrix);
    for g in circuit.gates() {
        let u = gate_unitary(g, 1)?;
        rho = &u * rho * u.adjoint();
        let mut mixed = rho.clone() * c(1.0 - p1, 0.0);
        for p in &paulis {
            mixed += p * &rho * p * c(p1 / 3.0, 0.0);
        }
        rho = mixed;
    }
    Ok(rho)
}

/// `Tr(ρ O)` for dense matrices.
pub fn expectation_dm(rho: &DenseMatrix, obs: &Observable) -> Result<f64> {
    let o = observable_matrix(obs)?;
    Ok((rho * o).trace().re)
}

/// Largest entrywise difference after removing the relative global phase of `b`.
pub fn max_diff_up_to_phase(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let inner: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        c(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn brute_force_examples() {
        let h = Observable::from_terms(2, &[(5.0, "Z0"), (3.0, "Z1"), (2.0, "Z0*Z1")]).unwrap();
        let (e, arg) = brute_force_min(&h).unwrap();
        assert_eq!(e, -6.0);
        assert_eq!(arg, ["11"]);

        let k = Observable::constant_only(2, 1.5).unwrap();
        let (e, arg) = brute_force_min(&k).unwrap();
        assert_eq!(e, 1.5);
        assert_eq!(arg, ["00", "01", "10", "11"]);

        let x = Observable::from_terms(1, &[(1.0, "X0")]).unwrap();
        assert_eq!(brute_force_min(&x), Err(Error::NotDiagonal));
    }

    #[test]
    fn diagonal_exponential_examples() {
        let z = Observable::from_terms(1, &[(1.0, "Z0")]).unwrap();
        let g = 0.37;
        let m = dense_expm_diagonal(&z, g).unwrap();
        assert!((m[(0, 0)] - Complex64::from_polar(1.0, -g)).norm() < 1e-15);
        assert!((m[(1, 1)] - Complex64::from_polar(1.0, g)).norm() < 1e-15);
        assert_eq!(
            dense_expm_diagonal(&z, 0.0).unwrap(),
            DMatrix::identity(2, 2)
        );
    }

    #[test]
    fn single_qubit_exponential_is_unitary_and_matches_rotation() {
        // exp(-iβX) = RX(2β)
        let x = Observable::from_terms(1, &[(1.0, "X0")]).unwrap();
        let beta = 0.81;
        let m = expm_single_qubit(&x, beta).unwrap();
        let rx = gate_unitary(&Gate::Rx(0, 2.0 * beta), 1).unwrap();
        assert!(max_diff_up_to_phase(&m, &rx) < 1e-14);
        let prod = &m * m.adjoint();
        assert!((prod - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn kron_ordering_puts_qubit_zero_in_low_bit() {
        let x0 = string_matrix(&PauliString::from_label("XI").unwrap()).unwrap();
        // X on qubit 0 maps index 0 -> 1
        assert_eq!(x0[(1, 0)], c(1.0, 0.0));
        assert_eq!(x0[(2, 0)], c(0.0, 0.0));
    }

    #[test]
    fn matrices_agree_with_fast_path() {
        let obs = Observable::from_terms(
            3,
            &[(0.5, "X0*Y2"), (-1.5, "Z1"), (2.0, "Y0*Y1*Z2"), (0.25, "I")],
        )
        .unwrap();
        let fast = obs.dense_matrix().unwrap();
        let slow = observable_matrix(&obs).unwrap();
        assert!((fast - slow).norm() < 1e-12);
    }

    #[test]
    fn depolarised_flip_decays() {
        let circ = Circuit::from_gates(1, [Gate::X(0)]).unwrap();
        let z = Observable::from_terms(1, &[(1.0, "Z0")]).unwrap();
        let p = 0.3;
        let rho = density_matrix_1q(&circ, p).unwrap();
        assert_abs_diff_eq!(
            expectation_dm(&rho, &z).unwrap(),
            -(1.0 - 4.0 * p / 3.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn size_limits_enforced() {
        assert!(embed(&[], 11).is_err());
        let big = Observable::new(23).unwrap();
        assert!(brute_force_min(&big).is_err());
    }
}
