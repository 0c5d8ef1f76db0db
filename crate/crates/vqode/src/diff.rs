//! Exact circuit differentiation: the parameter-shift rule, Hadamard-test
//! derivative circuits, second partials, and the chain rule assembling
//! df/dx and d²f/dx² from encoding-slot partials.
//!
//! Both first-order engines are exact for the R = exp(-i θ P / 2) convention
//! and agree to numerical precision; the shift rule is the default numerical
//! path, the Hadamard-test path exists as a second route and to back the
//! per-derivative circuit accounting.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{Circuit, FeatureMapKind};
use crate::error::VqodeError;
use crate::sim::{Gate, GateKind, StateVector};

/// Which slot a partial derivative targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotId {
    /// Encoding function phi_i.
    Var(usize),
    /// Variational parameter theta_k.
    Theta(usize),
}

/// Per-function encoding derivatives dphi_i/dx and d²phi_i/dx².
#[derive(Debug, Clone)]
pub struct EncodingDerivatives {
    pub dphi_dx: Vec<f64>,
    pub d2phi_dx2: Vec<f64>,
}

fn occurrences(circuit: &Circuit, slot: SlotId) -> Result<Vec<usize>, VqodeError> {
    let occ = match slot {
        SlotId::Var(i) => {
            if i >= circuit.n_var() {
                return Err(VqodeError::UnknownSlot(i));
            }
            circuit.var_occurrences(i)
        }
        SlotId::Theta(k) => {
            if k >= circuit.n_theta() {
                return Err(VqodeError::UnknownSlot(k));
            }
            circuit.theta_occurrences(k)
        }
    };
    for &g in &occ {
        if !circuit.gates[g].kind.is_rotation() {
            let idx = match slot {
                SlotId::Var(i) => i,
                SlotId::Theta(k) => k,
            };
            return Err(VqodeError::SlotNotRotation(idx));
        }
    }
    Ok(occ)
}

pub(crate) fn expectation_with_shifts(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    shifts: &[(usize, f64)],
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let mut gates = circuit.resolve(x, theta)?;
    for &(g, s) in shifts {
        let a = gates[g].angle.expect("shift on non-rotation gate");
        gates[g].angle = Some(a + s);
    }
    let mut state = StateVector::zero(circuit.n_qubits)?;
    state.apply_all(&gates)?;
    state.expectation_weighted_z(weights)
}

/// Parameter-shift partial of the cost expectation with respect to one slot:
/// (1/2) sum over occurrences of [<C>(+pi/2) - <C>(-pi/2)].
pub fn shift_rule_partial(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    slot: SlotId,
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let occ = occurrences(circuit, slot)?;
    let mut acc = 0.0;
    for &g in &occ {
        let plus = expectation_with_shifts(circuit, x, theta, &[(g, FRAC_PI_2)], weights)?;
        let minus = expectation_with_shifts(circuit, x, theta, &[(g, -FRAC_PI_2)], weights)?;
        acc += 0.5 * (plus - minus);
    }
    Ok(acc)
}

/// Build and run the Hadamard-test derivative circuit for one gate
/// occurrence: an ancilla prepared in |+>, a controlled generator inserted
/// before the occurrence, an S†-H basis change on the ancilla, and the cost
/// operator read out correlated with the ancilla Z.
fn hadamard_test_occurrence(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    occurrence: usize,
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let gates = circuit.resolve(x, theta)?;
    let anc = circuit.n_qubits;
    let n = circuit.n_qubits + 1;
    let target = gates[occurrence].qubit;

    let mut full: Vec<Gate> = Vec::with_capacity(gates.len() + 8);
    full.push(Gate::h(anc));
    full.extend_from_slice(&gates[..occurrence]);
    match gates[occurrence].kind {
        GateKind::Rx => full.push(Gate::cnot(anc, target)),
        GateKind::Ry => {
            // controlled-Y = (I ⊗ S) CNOT (I ⊗ S†) up to global phase
            full.push(Gate::rz(target, -FRAC_PI_2));
            full.push(Gate::cnot(anc, target));
            full.push(Gate::rz(target, FRAC_PI_2));
        }
        GateKind::Rz => {
            full.push(Gate::h(target));
            full.push(Gate::cnot(anc, target));
            full.push(Gate::h(target));
        }
        _ => unreachable!("occurrence pre-validated as a rotation"),
    }
    full.extend_from_slice(&gates[occurrence..]);
    // map Y_anc onto Z_anc: S† then H
    full.push(Gate::rz(anc, -FRAC_PI_2));
    full.push(Gate::h(anc));

    let mut state = StateVector::zero(n)?;
    state.apply_all(&full)?;
    state.expectation_weighted_z_with_ancilla(anc, weights)
}

/// Hadamard-test partial: same value as `shift_rule_partial`, one derivative
/// circuit per gate occurrence instead of two.
pub fn hadamard_test_partial(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    slot: SlotId,
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let occ = occurrences(circuit, slot)?;
    let mut acc = 0.0;
    for &g in &occ {
        acc += hadamard_test_occurrence(circuit, x, theta, g, weights)?;
    }
    Ok(acc)
}

/// Mixed second partial of the cost expectation with respect to two slots.
///
/// Each pair of distinct occurrences contributes the four-circuit double
/// shift; a repeated occurrence (diagonal) contributes
/// [f(+pi) - 2 f(0) + f(-pi)] / 4.
pub fn second_partial(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    slot_a: SlotId,
    slot_b: SlotId,
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let occ_a = occurrences(circuit, slot_a)?;
    let occ_b = occurrences(circuit, slot_b)?;
    let base = expectation_with_shifts(circuit, x, theta, &[], weights)?;
    let mut acc = 0.0;
    for &ga in &occ_a {
        for &gb in &occ_b {
            if ga == gb {
                let plus =
                    expectation_with_shifts(circuit, x, theta, &[(ga, std::f64::consts::PI)], weights)?;
                let minus =
                    expectation_with_shifts(circuit, x, theta, &[(ga, -std::f64::consts::PI)], weights)?;
                acc += (plus - 2.0 * base + minus) / 4.0;
            } else {
                let pp = expectation_with_shifts(
                    circuit,
                    x,
                    theta,
                    &[(ga, FRAC_PI_2), (gb, FRAC_PI_2)],
                    weights,
                )?;
                let pm = expectation_with_shifts(
                    circuit,
                    x,
                    theta,
                    &[(ga, FRAC_PI_2), (gb, -FRAC_PI_2)],
                    weights,
                )?;
                let mp = expectation_with_shifts(
                    circuit,
                    x,
                    theta,
                    &[(ga, -FRAC_PI_2), (gb, FRAC_PI_2)],
                    weights,
                )?;
                let mm = expectation_with_shifts(
                    circuit,
                    x,
                    theta,
                    &[(ga, -FRAC_PI_2), (gb, -FRAC_PI_2)],
                    weights,
                )?;
                acc += (pp - pm - mp + mm) / 4.0;
            }
        }
    }
    Ok(acc)
}

/// dphi_i/dx and d²phi_i/dx² for every encoding function of the map.
///
/// With gamma the arccos argument, dphi/dgamma = -1/sqrt(1 - gamma²) and
/// d²phi/dgamma² = -gamma/(1 - gamma²)^{3/2}; both diverge as |gamma| -> 1.
pub fn encoding_derivatives(map: &FeatureMapKind, x: f64) -> Result<EncodingDerivatives, VqodeError> {
    let n = map.n_functions();
    let mut dphi = Vec::with_capacity(n);
    let mut d2phi = Vec::with_capacity(n);
    for i in 0..n {
        let gamma = map.arccos_arg(i, x);
        if gamma.abs() >= 1.0 {
            return Err(VqodeError::EncodingDerivativeDiverges(gamma.abs()));
        }
        let dgamma_dx = match map {
            FeatureMapKind::Chebyshev { .. } => 1.0,
            _ => 0.5,
        };
        let outer = match map {
            FeatureMapKind::Chebyshev { .. } => 2.0 * (i as f64 + 1.0),
            _ => 1.0,
        };
        let s = 1.0 - gamma * gamma;
        let d1 = -1.0 / s.sqrt();
        let d2 = -gamma / s.powf(1.5);
        dphi.push(outer * d1 * dgamma_dx);
        d2phi.push(outer * d2 * dgamma_dx * dgamma_dx);
    }
    Ok(EncodingDerivatives { dphi_dx: dphi, d2phi_dx2: d2phi })
}

/// df/dx of the cost expectation via the chain rule over encoding slots.
pub fn df_dx(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let map = circuit
        .encoding()
        .ok_or_else(|| VqodeError::Config("circuit has no encoding".into()))?;
    let enc = encoding_derivatives(map, x)?;
    let mut acc = 0.0;
    for i in 0..circuit.n_var() {
        let partial = shift_rule_partial(circuit, x, theta, SlotId::Var(i), weights)?;
        acc += partial * enc.dphi_dx[i];
    }
    Ok(acc)
}

/// d²f/dx²: first-derivative terms with d²phi/dx² plus the full double sum
/// of mixed partials weighted by dphi_i/dx dphi_j/dx.
pub fn d2f_dx2(
    circuit: &Circuit,
    x: f64,
    theta: &[f64],
    weights: &[(usize, f64)],
) -> Result<f64, VqodeError> {
    let map = circuit
        .encoding()
        .ok_or_else(|| VqodeError::Config("circuit has no encoding".into()))?;
    let enc = encoding_derivatives(map, x)?;
    let n = circuit.n_var();
    let mut acc = 0.0;
    for i in 0..n {
        let partial = shift_rule_partial(circuit, x, theta, SlotId::Var(i), weights)?;
        acc += partial * enc.d2phi_dx2[i];
    }
    for i in 0..n {
        for j in 0..n {
            if enc.dphi_dx[i] == 0.0 || enc.dphi_dx[j] == 0.0 {
                continue;
            }
            let sp = second_partial(circuit, x, theta, SlotId::Var(i), SlotId::Var(j), weights)?;
            acc += sp * enc.dphi_dx[i] * enc.dphi_dx[j];
        }
    }
    Ok(acc)
}
