//! Dense statevector simulation: state preparation, gate application, and
//! exact expectation values of weighted Pauli-Z observables.
//!
//! Qubit 0 is the least-significant bit of the basis-state index. All
//! expectations are computed exactly from the amplitudes; there is no shot
//! sampling anywhere in this crate.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::VqodeError;

/// Upper bound on register size for the dense representation.
pub const MAX_QUBITS: usize = 24;

/// Kinds of gates supported by the simulator.
///
/// Rotations follow the convention R = exp(-i θ P / 2) for P in {X, Y, Z}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    Cnot,
}

impl GateKind {
    /// True for Rx/Ry/Rz, which carry an angle parameter.
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }
}

/// A gate instance: kind, target qubit(s) and an optional angle.
///
/// `control` is only set for CNOT. Rotation gates store the resolved angle
/// in radians; H and CNOT carry none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubit: usize,
    pub control: Option<usize>,
    pub angle: Option<f64>,
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Rx, qubit, control: None, angle: Some(angle) }
    }
    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Ry, qubit, control: None, angle: Some(angle) }
    }
    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Rz, qubit, control: None, angle: Some(angle) }
    }
    pub fn h(qubit: usize) -> Self {
        Gate { kind: GateKind::H, qubit, control: None, angle: None }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubit: target, control: Some(control), angle: None }
    }

    /// The gate with its rotation angle negated; H and CNOT are self-inverse.
    pub fn inverse(self) -> Self {
        Gate { angle: self.angle.map(|a| -a), ..self }
    }

    fn validate(&self, n_qubits: usize) -> Result<(), VqodeError> {
        if self.qubit >= n_qubits {
            return Err(VqodeError::QubitOutOfRange { qubit: self.qubit, n_qubits });
        }
        if let Some(c) = self.control {
            if c >= n_qubits {
                return Err(VqodeError::QubitOutOfRange { qubit: c, n_qubits });
            }
            if c == self.qubit {
                return Err(VqodeError::CnotSameQubit(c));
            }
        }
        Ok(())
    }
}

/// Dense state over `n_qubits` qubits; amplitude of basis state `b` at index `b`.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self, VqodeError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(VqodeError::BadQubitCount(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), VqodeError> {
        gate.validate(self.n_qubits)?;
        match gate.kind {
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.map_pairs(gate.qubit, |a, b| (h * (a + b), h * (a - b)));
            }
            GateKind::Rx => {
                let t = gate.angle.expect("rotation gate without angle") / 2.0;
                let c = Complex64::new(t.cos(), 0.0);
                let s = Complex64::new(0.0, -t.sin());
                self.map_pairs(gate.qubit, |a, b| (c * a + s * b, s * a + c * b));
            }
            GateKind::Ry => {
                let t = gate.angle.expect("rotation gate without angle") / 2.0;
                let c = Complex64::new(t.cos(), 0.0);
                let s = Complex64::new(t.sin(), 0.0);
                self.map_pairs(gate.qubit, |a, b| (c * a - s * b, s * a + c * b));
            }
            GateKind::Rz => {
                let t = gate.angle.expect("rotation gate without angle") / 2.0;
                let p0 = Complex64::from_polar(1.0, -t);
                let p1 = Complex64::from_polar(1.0, t);
                let mask = 1usize << gate.qubit;
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if i & mask == 0 { p0 } else { p1 };
                }
            }
            GateKind::Cnot => {
                let cmask = 1usize << gate.control.expect("CNOT without control");
                let tmask = 1usize << gate.qubit;
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<(), VqodeError> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn map_pairs(&mut self, qubit: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = (self.amps[i], self.amps[j]);
                let (na, nb) = f(a, b);
                self.amps[i] = na;
                self.amps[j] = nb;
            }
        }
    }

    /// <Z_q> = P(bit q = 0) - P(bit q = 1).
    pub fn expectation_z(&self, qubit: usize) -> Result<f64, VqodeError> {
        if qubit >= self.n_qubits {
            return Err(VqodeError::QubitOutOfRange { qubit, n_qubits: self.n_qubits });
        }
        let mask = 1usize << qubit;
        let mut acc = 0.0;
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            acc += if i & mask == 0 { p } else { -p };
        }
        Ok(acc)
    }

    /// <Y_q>, needed by the cached readout evaluator.
    pub fn expectation_y(&self, qubit: usize) -> Result<f64, VqodeError> {
        if qubit >= self.n_qubits {
            return Err(VqodeError::QubitOutOfRange { qubit, n_qubits: self.n_qubits });
        }
        // Y = [[0, -i], [i, 0]]: <Y> = 2 Im(conj(a0) a1) over each pair.
        let mask = 1usize << qubit;
        let mut acc = 0.0;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                acc += 2.0 * (a0.conj() * a1).im;
            }
        }
        Ok(acc)
    }

    /// Sum_j w_j <Z_j> for the given (qubit, weight) pairs.
    pub fn expectation_weighted_z(&self, weights: &[(usize, f64)]) -> Result<f64, VqodeError> {
        let mut acc = 0.0;
        for &(q, w) in weights {
            acc += w * self.expectation_z(q)?;
        }
        Ok(acc)
    }

    /// Sum_j w_j <Z_anc Z_j>: the weighted-Z cost correlated with an ancilla
    /// Z readout, used by the Hadamard-test derivative circuits.
    pub fn expectation_weighted_z_with_ancilla(
        &self,
        ancilla: usize,
        weights: &[(usize, f64)],
    ) -> Result<f64, VqodeError> {
        if ancilla >= self.n_qubits {
            return Err(VqodeError::QubitOutOfRange { qubit: ancilla, n_qubits: self.n_qubits });
        }
        let amask = 1usize << ancilla;
        let mut acc = 0.0;
        for &(q, w) in weights {
            if q >= self.n_qubits {
                return Err(VqodeError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
            let qmask = 1usize << q;
            let mut term = 0.0;
            for (i, amp) in self.amps.iter().enumerate() {
                let p = amp.norm_sqr();
                let sa = if i & amask == 0 { 1.0 } else { -1.0 };
                let sq = if i & qmask == 0 { 1.0 } else { -1.0 };
                term += sa * sq * p;
            }
            acc += w * term;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    #[test]
    fn zero_state_is_computational_zero() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes()[1], Complex64::new(0.0, 0.0));

        let s2 = StateVector::zero(2).unwrap();
        assert_eq!(s2.amplitudes()[0], Complex64::new(1.0, 0.0));
        for i in 1..4 {
            assert_eq!(s2.amplitudes()[i], Complex64::new(0.0, 0.0));
        }

        let s3 = StateVector::zero(3).unwrap();
        assert!((s3.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn rejects_zero_qubits() {
        assert!(StateVector::zero(0).is_err());
    }

    #[test]
    fn ry_half_turn_flips_zero_to_one() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::ry(0, PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < TOL);
        assert!((s.amplitudes()[1].re - 1.0).abs() < TOL);
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |10> in qubit order (q0=0, q1=1) means index 2.
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::ry(1, PI)).unwrap(); // q1 -> |1>
        s.apply(&Gate::cnot(1, 0)).unwrap();
        assert!((s.amplitudes()[3].re - 1.0).abs() < TOL); // |11>
    }

    #[test]
    fn ry_angle_prepares_cos_sin_superposition() {
        let phi = 0.7;
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::ry(0, phi)).unwrap();
        // Oracle: direct 2x2 matrix action on (1, 0).
        assert!((s.amplitudes()[0].re - (phi / 2.0).cos()).abs() < TOL);
        assert!((s.amplitudes()[1].re - (phi / 2.0).sin()).abs() < TOL);
    }

    #[test]
    fn weighted_z_on_basis_and_bell_states() {
        let s = StateVector::zero(1).unwrap();
        assert!((s.expectation_weighted_z(&[(0, 1.0)]).unwrap() - 1.0).abs() < TOL);

        let mut bell = StateVector::zero(2).unwrap();
        bell.apply(&Gate::h(0)).unwrap();
        bell.apply(&Gate::cnot(0, 1)).unwrap();
        let m = bell.expectation_weighted_z(&[(0, 1.0), (1, 1.0)]).unwrap();
        assert!(m.abs() < TOL);
    }

    #[test]
    fn z_expectation_of_rotated_qubit_is_cos() {
        let phi = 0.7;
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::ry(0, phi)).unwrap();
        assert!((s.expectation_z(0).unwrap() - phi.cos()).abs() < TOL);
    }

    #[test]
    fn rejects_out_of_range_and_degenerate_cnot() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply(&Gate::ry(2, 0.1)).is_err());
        assert!(s.apply(&Gate::cnot(1, 1)).is_err());
    }

    #[test]
    fn y_expectation_matches_bloch_algebra() {
        // RX(t)|0> has <Y> = -sin(t).
        let t = 0.93;
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::rx(0, t)).unwrap();
        assert!((s.expectation_y(0).unwrap() + t.sin()).abs() < TOL);
    }
}
