//! Circuit construction: feature maps, variational ansätze, and binding of
//! the problem variable x and parameter vector θ to concrete gate angles.
//!
//! Circuits are gate lists with symbolic parameter slots. A `Var(i)` slot
//! resolves to the i-th encoding function evaluated at x; a `Theta(k)` slot
//! resolves to θ\[k\]. The same slot may appear in several gates (the
//! simplified Lagrange map places interior encoding functions twice);
//! derivative engines must sum over all occurrences.

use crate::error::VqodeError;
use crate::sim::{Gate, GateKind, StateVector};

/// Symbolic parameter of a gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    /// Fixed angle in radians.
    Fixed(f64),
    /// Encoding-function slot: resolves to phi_i(x).
    Var(usize),
    /// Variational slot: resolves to theta[k].
    Theta(usize),
    /// No parameter (H, CNOT).
    None,
}

/// A gate with an unresolved parameter slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGate {
    pub kind: GateKind,
    pub qubit: usize,
    pub control: Option<usize>,
    pub param: Param,
}

impl SlotGate {
    fn fixed(kind: GateKind, qubit: usize, control: Option<usize>, angle: f64) -> Self {
        SlotGate { kind, qubit, control, param: Param::Fixed(angle) }
    }
    fn h(qubit: usize) -> Self {
        SlotGate { kind: GateKind::H, qubit, control: None, param: Param::None }
    }
    fn cnot(control: usize, target: usize) -> Self {
        SlotGate { kind: GateKind::Cnot, qubit: target, control: Some(control), param: Param::None }
    }
}

/// Interpolation nodes with their normalizers rho_j.
///
/// rho_j = (1/2^(n-1)) prod_{i != j} (x_j - x_i); this equals the bare-map
/// expectation <Z_j> at x = x_j and is precomputed once per node set.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<f64>,
    rho: Vec<f64>,
}

impl NodeSet {
    pub fn new(nodes: Vec<f64>) -> Result<Self, VqodeError> {
        if nodes.len() < 2 {
            return Err(VqodeError::BadNodeSet(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(VqodeError::BadNodeSet(format!(
                    "nodes not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        for &x in &nodes {
            if !(0.0..1.0).contains(&x) {
                return Err(VqodeError::BadNodeSet(format!("node {x} outside [0, 1)")));
            }
        }
        let rho = lagrange_rho(&nodes);
        for (j, &r) in rho.iter().enumerate() {
            if r == 0.0 || !r.is_finite() {
                return Err(VqodeError::BadNodeSet(format!("rho[{j}] = {r}")));
            }
        }
        Ok(NodeSet { nodes, rho })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Cost-operator weights 1/rho_j for the first-register qubits.
    pub fn weights(&self) -> Vec<(usize, f64)> {
        self.rho.iter().enumerate().map(|(j, &r)| (j, 1.0 / r)).collect()
    }
}

/// rho_j for a plain node slice (nodes assumed distinct).
pub fn lagrange_rho(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let scale = 0.5f64.powi(n as i32 - 1);
    (0..n)
        .map(|j| {
            let mut p = scale;
            for i in 0..n {
                if i != j {
                    p *= nodes[j] - nodes[i];
                }
            }
            p
        })
        .collect()
}

/// Which feature map a circuit encodes the variable x with.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMapKind {
    /// phi_j(x) = 2 j arccos(x), j = 1..n (Chebyshev tower).
    Chebyshev { n_qubits: usize },
    /// phi_i(x) = arccos((x - x_i)/2) on a register pair per node.
    LagrangeExtended(NodeSet),
    /// Same encoding functions, single-ancilla two-pass structure.
    LagrangeSimplified(NodeSet),
}

impl FeatureMapKind {
    /// Number of encoding functions phi_i.
    pub fn n_functions(&self) -> usize {
        match self {
            FeatureMapKind::Chebyshev { n_qubits } => *n_qubits,
            FeatureMapKind::LagrangeExtended(ns) | FeatureMapKind::LagrangeSimplified(ns) => {
                ns.len()
            }
        }
    }

    /// phi_i(x) with i zero-based.
    pub fn phi(&self, i: usize, x: f64) -> Result<f64, VqodeError> {
        let arg = self.arccos_arg(i, x);
        if !(-1.0..=1.0).contains(&arg) {
            return Err(VqodeError::ArccosDomain(arg));
        }
        match self {
            FeatureMapKind::Chebyshev { .. } => Ok(2.0 * (i as f64 + 1.0) * arg.acos()),
            _ => Ok(arg.acos()),
        }
    }

    /// The arccos argument for function i at x: x itself for Chebyshev,
    /// (x - x_i)/2 for the Lagrange maps.
    pub fn arccos_arg(&self, i: usize, x: f64) -> f64 {
        match self {
            FeatureMapKind::Chebyshev { .. } => x,
            FeatureMapKind::LagrangeExtended(ns) | FeatureMapKind::LagrangeSimplified(ns) => {
                (x - ns.nodes()[i]) / 2.0
            }
        }
    }

    pub fn node_set(&self) -> Option<&NodeSet> {
        match self {
            FeatureMapKind::Chebyshev { .. } => None,
            FeatureMapKind::LagrangeExtended(ns) | FeatureMapKind::LagrangeSimplified(ns) => {
                Some(ns)
            }
        }
    }
}

/// An ordered gate list with parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<SlotGate>,
    n_var: usize,
    n_theta: usize,
    encoding: Option<FeatureMapKind>,
}

impl Circuit {
    pub fn n_var(&self) -> usize {
        self.n_var
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn encoding(&self) -> Option<&FeatureMapKind> {
        self.encoding.as_ref()
    }

    /// Gate indices carrying encoding slot `i`.
    pub fn var_occurrences(&self, i: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.param == Param::Var(i))
            .map(|(k, _)| k)
            .collect()
    }

    /// Gate indices carrying variational slot `k`.
    pub fn theta_occurrences(&self, k: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.param == Param::Theta(k))
            .map(|(k2, _)| k2)
            .collect()
    }

    /// Append another circuit (same register width; theta slots must already
    /// be disjoint — feature maps carry none).
    pub fn then(mut self, other: &Circuit) -> Circuit {
        assert_eq!(self.n_qubits, other.n_qubits, "register width mismatch");
        self.gates.extend(other.gates.iter().copied());
        self.n_var = self.n_var.max(other.n_var);
        self.n_theta = self.n_theta.max(other.n_theta);
        if self.encoding.is_none() {
            self.encoding = other.encoding.clone();
        }
        self
    }

    /// Resolve all slots to concrete angles.
    ///
    /// Occurrence-level shifts are applied afterwards by the differentiation
    /// engines, so this returns the plain resolved gate list.
    pub fn resolve(&self, x: f64, theta: &[f64]) -> Result<Vec<Gate>, VqodeError> {
        if theta.len() != self.n_theta {
            return Err(VqodeError::ThetaLengthMismatch {
                given: theta.len(),
                expected: self.n_theta,
            });
        }
        let enc = self.encoding.as_ref();
        let mut phis = Vec::with_capacity(self.n_var);
        if let Some(map) = enc {
            for i in 0..self.n_var {
                phis.push(map.phi(i, x)?);
            }
        }
        self.gates
            .iter()
            .map(|g| {
                let angle = match g.param {
                    Param::Fixed(a) => Some(a),
                    Param::Var(i) => Some(phis[i]),
                    Param::Theta(k) => Some(theta[k]),
                    Param::None => None,
                };
                Ok(Gate { kind: g.kind, qubit: g.qubit, control: g.control, angle })
            })
            .collect()
    }

    /// Resolve and run: all slots bound, gates applied in order to |0...0>.
    pub fn bind(&self, x: f64, theta: &[f64]) -> Result<StateVector, VqodeError> {
        let gates = self.resolve(x, theta)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        state.apply_all(&gates)?;
        Ok(state)
    }
}

/// Chebyshev feature map (one RY per qubit, no entanglers): qubit j carries
/// phi_{j+1}(x) = 2 (j+1) arccos(x).
pub fn build_chebyshev_map(n_qubits: usize) -> Circuit {
    assert!(n_qubits >= 1);
    let gates = (0..n_qubits)
        .map(|q| SlotGate { kind: GateKind::Ry, qubit: q, control: None, param: Param::Var(q) })
        .collect();
    Circuit {
        n_qubits,
        gates,
        n_var: n_qubits,
        n_theta: 0,
        encoding: Some(FeatureMapKind::Chebyshev { n_qubits }),
    }
}

/// Extended Lagrange feature map over 2n qubits: first register 0..n-1 is
/// measured, second register n..2n-1 carries the encoding rotations.
///
/// Each second-register qubit i sits between two identical CNOT networks in
/// which every first-register qubit j != i controls it. This pairing is
/// pinned by the zero-θ identity <Z_j> = (1/2^(n-1)) prod_{i != j} (x - x_i),
/// which the j-to-j pairing provably fails (it yields <Z_j> = (x - x_j)/2 and
/// a vanishing rho_j at the nodes).
pub fn build_lagrange_extended(nodes: &NodeSet) -> Circuit {
    let n = nodes.len();
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(SlotGate::h(q));
    }
    let network = |gates: &mut Vec<SlotGate>| {
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    gates.push(SlotGate::cnot(j, n + i));
                }
            }
        }
    };
    network(&mut gates);
    for i in 0..n {
        gates.push(SlotGate { kind: GateKind::Ry, qubit: n + i, control: None, param: Param::Var(i) });
    }
    network(&mut gates);
    for q in 0..n {
        gates.push(SlotGate::h(q));
    }
    Circuit {
        n_qubits: 2 * n,
        gates,
        n_var: n,
        n_theta: 0,
        encoding: Some(FeatureMapKind::LagrangeExtended(nodes.clone())),
    }
}

/// Simplified Lagrange feature map over n+1 qubits (register 0..n-1 plus one
/// encoding ancilla), two descending CNOT/RY passes on the ancilla.
///
/// phi_1 and phi_n each appear in one gate, interior phi_i in two; the
/// zero-θ first-register expectations match the extended structure exactly.
pub fn build_lagrange_simplified(nodes: &NodeSet) -> Circuit {
    let n = nodes.len();
    let a = n; // ancilla index
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(SlotGate::h(q));
    }
    gates.push(SlotGate::cnot(n - 1, a));
    // first pass: RY(phi_i), CNOT_{i,a} for i = n-1 down to 1 (1-based)
    for i in (1..n).rev() {
        gates.push(SlotGate { kind: GateKind::Ry, qubit: a, control: None, param: Param::Var(i - 1) });
        gates.push(SlotGate::cnot(i - 1, a));
    }
    gates.push(SlotGate::cnot(n - 1, a));
    // second pass: RY(phi_{i+1}), CNOT_{i,a} for i = n-1 down to 1
    for i in (1..n).rev() {
        gates.push(SlotGate { kind: GateKind::Ry, qubit: a, control: None, param: Param::Var(i) });
        gates.push(SlotGate::cnot(i - 1, a));
    }
    for q in 0..n {
        gates.push(SlotGate::h(q));
    }
    Circuit {
        n_qubits: n + 1,
        gates,
        n_var: n,
        n_theta: 0,
        encoding: Some(FeatureMapKind::LagrangeSimplified(nodes.clone())),
    }
}

/// Hardware-style ansatz: `n_layers` repetitions of one RX(θ) per qubit
/// followed by a linear CNOT chain k -> k+1. Exactly n_qubits * n_layers
/// theta slots. Used by the Chebyshev-encoded solver.
pub fn build_ansatz(n_qubits: usize, n_layers: usize) -> Circuit {
    build_ansatz_on(n_qubits, n_qubits, n_layers)
}

/// Ansatz acting on the first `active` qubits of a wider register.
pub fn build_ansatz_on(n_qubits: usize, active: usize, n_layers: usize) -> Circuit {
    assert!(n_layers >= 1 && active >= 1 && active <= n_qubits);
    let mut gates = Vec::new();
    for l in 0..n_layers {
        for q in 0..active {
            gates.push(SlotGate {
                kind: GateKind::Rx,
                qubit: q,
                control: None,
                param: Param::Theta(l * active + q),
            });
        }
        for q in 0..active.saturating_sub(1) {
            gates.push(SlotGate::cnot(q, q + 1));
        }
    }
    Circuit { n_qubits, gates, n_var: 0, n_theta: active * n_layers, encoding: None }
}

/// Single-layer per-channel ansatz for the Lagrange readout: one RX(θ_j) on
/// each first-register qubit, no entangling chain.
///
/// The CNOT chain of the hardware ansatz provably breaks the Lagrange basis
/// identity (a chained readout measures prefix Z-strings instead of single
/// Z_j channels), so the Lagrange solver trains per-channel weights
/// α_j(θ) = cos θ_j only.
pub fn build_channel_ansatz(n_qubits: usize, active: usize) -> Circuit {
    assert!(active >= 1 && active <= n_qubits);
    let gates = (0..active)
        .map(|q| SlotGate { kind: GateKind::Rx, qubit: q, control: None, param: Param::Theta(q) })
        .collect();
    Circuit { n_qubits, gates, n_var: 0, n_theta: active, encoding: None }
}

/// Two-qubit Hadamard-test cell: H, CNOT, RY(angle) on the target, CNOT, H.
/// Measuring Z on qubit 0 yields cos(angle).
pub fn hadamard_test_cell(angle: f64) -> Circuit {
    let gates = vec![
        SlotGate::h(0),
        SlotGate::cnot(0, 1),
        SlotGate::fixed(GateKind::Ry, 1, None, angle),
        SlotGate::cnot(0, 1),
        SlotGate::h(0),
    ];
    Circuit { n_qubits: 2, gates, n_var: 0, n_theta: 0, encoding: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn b4_product(nodes: &[f64], x: f64, j: usize) -> f64 {
        let n = nodes.len();
        let mut p = 0.5f64.powi(n as i32 - 1);
        for (i, &xi) in nodes.iter().enumerate() {
            if i != j {
                p *= x - xi;
            }
        }
        p
    }

    fn random_nodes(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.9)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if v.windows(2).all(|w| w[1] - w[0] > 0.04) {
                return v;
            }
        }
    }

    #[test]
    fn chebyshev_map_structure_and_angles() {
        let c = build_chebyshev_map(3);
        assert_eq!(c.gates.len(), 3);
        let x = 0.37;
        let gates = c.resolve(x, &[]).unwrap();
        for (j, g) in gates.iter().enumerate() {
            let expect = 2.0 * (j as f64 + 1.0) * x.acos();
            assert!((g.angle.unwrap() - expect).abs() < 1e-15);
        }

        let c1 = build_chebyshev_map(1);
        let g = c1.resolve(0.5, &[]).unwrap();
        assert!((g[0].angle.unwrap() - 2.0 * 0.5f64.acos()).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_identity_per_qubit() {
        // Amplitude of |0> on the single-qubit map is T_1(x) = x, and
        // <Z_j> = cos(2 j arccos x) on every qubit of the tower.
        let c1 = build_chebyshev_map(1);
        let s1 = c1.bind(0.5, &[]).unwrap();
        assert!((s1.amplitudes()[0].re - 0.5).abs() < 1e-12);

        for j in 1..=3usize {
            let c = build_chebyshev_map(j);
            for xi in 1..=9 {
                let x = xi as f64 / 10.0;
                let state = c.bind(x, &[]).unwrap();
                let z = state.expectation_z(j - 1).unwrap();
                let expect = (2.0 * j as f64 * x.acos()).cos();
                assert!(
                    (z - expect).abs() < 1e-12,
                    "j={j} x={x}: z={z} expect={expect}"
                );
            }
        }
    }

    #[test]
    fn lagrange_extended_matches_b4_examples() {
        // n=2, nodes {0.1, 0.9}: at x = x_1 the j=2 channel vanishes.
        let ns = NodeSet::new(vec![0.1, 0.9]).unwrap();
        let c = build_lagrange_extended(&ns);
        let s = c.bind(0.1, &[]).unwrap();
        assert!(s.expectation_z(1).unwrap().abs() < 1e-12);

        // x=0.5: <Z_1> = (0.5 - 0.9)/2 = -0.2.
        let s = c.bind(0.5, &[]).unwrap();
        assert!((s.expectation_z(0).unwrap() + 0.2).abs() < 1e-12);

        // n=3: <Z_2>/rho_2 = 1 at x = x_2, rho_2 = (1/4)(0.4)(-0.4).
        let ns3 = NodeSet::new(vec![0.1, 0.5, 0.9]).unwrap();
        let rho2 = ns3.rho()[1];
        assert!((rho2 - 0.25 * 0.4 * (-0.4)).abs() < 1e-15);
        let c3 = build_lagrange_extended(&ns3);
        let s3 = c3.bind(0.5, &[]).unwrap();
        assert!((s3.expectation_z(1).unwrap() / rho2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lagrange_basis_identity_both_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6 {
            for _ in 0..6 {
                let nodes = random_nodes(&mut rng, n);
                let ns = NodeSet::new(nodes.clone()).unwrap();
                let x = rng.gen_range(0.0..0.9);
                let ext = build_lagrange_extended(&ns).bind(x, &[]).unwrap();
                let simp = build_lagrange_simplified(&ns).bind(x, &[]).unwrap();
                for j in 0..n {
                    let target = b4_product(&nodes, x, j);
                    assert!((ext.expectation_z(j).unwrap() - target).abs() < 1e-10);
                    assert!((simp.expectation_z(j).unwrap() - target).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn hadamard_test_cell_reads_cos_phi() {
        let (x, xi) = (0.41, 0.83);
        let phi = ((x - xi) / 2.0).acos();
        let s = hadamard_test_cell(phi).bind(0.0, &[]).unwrap();
        assert!((s.expectation_z(0).unwrap() - (x - xi) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn structure_equivalence_with_random_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=5 {
            let nodes = random_nodes(&mut rng, n);
            let ns = NodeSet::new(nodes).unwrap();
            for _ in 0..5 {
                let x = rng.gen_range(0.0..0.9);
                let theta: Vec<f64> =
                    (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
                let ext = build_lagrange_extended(&ns)
                    .then(&build_channel_ansatz(2 * n, n))
                    .bind(x, &theta)
                    .unwrap();
                let simp = build_lagrange_simplified(&ns)
                    .then(&build_channel_ansatz(n + 1, n))
                    .bind(x, &theta)
                    .unwrap();
                for j in 0..n {
                    let (a, b) = (ext.expectation_z(j).unwrap(), simp.expectation_z(j).unwrap());
                    assert!((a - b).abs() < 1e-10, "n={n} j={j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_identity_ansatz() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=6 {
            let nodes = random_nodes(&mut rng, n);
            let ns = NodeSet::new(nodes).unwrap();
            let c = build_lagrange_simplified(&ns);
            let w = ns.weights();
            for _ in 0..10 {
                let x = rng.gen_range(0.0..0.9);
                let s = c.bind(x, &[]).unwrap();
                let total = s.expectation_weighted_z(&w).unwrap();
                assert!((total - 1.0).abs() < 1e-10, "n={n} x={x}: {total}");
            }
        }
    }

    #[test]
    fn simplified_slot_occurrence_bookkeeping() {
        let ns = NodeSet::new(vec![0.1, 0.9]).unwrap();
        let c = build_lagrange_simplified(&ns);
        assert_eq!(c.var_occurrences(0).len(), 1);
        assert_eq!(c.var_occurrences(1).len(), 1);

        let ns3 = NodeSet::new(vec![0.1, 0.5, 0.9]).unwrap();
        let c3 = build_lagrange_simplified(&ns3);
        assert_eq!(c3.var_occurrences(0).len(), 1);
        assert_eq!(c3.var_occurrences(1).len(), 2);
        assert_eq!(c3.var_occurrences(2).len(), 1);
    }

    #[test]
    fn simplified_gate_count_exceeds_extended_by_one_at_n3() {
        let ns = NodeSet::new(vec![0.1, 0.5, 0.9]).unwrap();
        let ext = build_lagrange_extended(&ns);
        let simp = build_lagrange_simplified(&ns);
        assert_eq!(simp.gates.len(), ext.gates.len() + 1);
        assert_eq!(ext.n_qubits, simp.n_qubits + 2);
    }

    #[test]
    fn ansatz_parameter_counts() {
        assert_eq!(build_ansatz(5, 2).n_theta(), 10);
        assert_eq!(build_ansatz(3, 1).n_theta(), 3);
    }

    #[test]
    fn ansatz_at_zero_theta_is_bare_cnot_chain() {
        let c = build_ansatz(3, 1);
        let gates = c.resolve(0.0, &[0.0; 3]).unwrap();
        let rot: Vec<_> = gates.iter().filter(|g| g.kind.is_rotation()).collect();
        assert!(rot.iter().all(|g| g.angle.unwrap() == 0.0));
        let cnots: Vec<_> = gates.iter().filter(|g| g.kind == GateKind::Cnot).collect();
        assert_eq!(cnots.len(), 2);
    }

    #[test]
    fn bind_edge_cases() {
        // Empty circuit binds to the zero state.
        let empty = Circuit { n_qubits: 2, gates: vec![], n_var: 0, n_theta: 0, encoding: None };
        let s = empty.bind(0.0, &[]).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-15);

        // Chebyshev with x = 1: arccos(1) = 0, state stays |0>.
        let c = build_chebyshev_map(1);
        let s = c.bind(1.0, &[]).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-15);

        // Theta length mismatch is rejected.
        let a = build_ansatz(2, 1);
        assert!(a.bind(0.0, &[0.1]).is_err());

        // Out-of-domain x is rejected.
        assert!(build_chebyshev_map(1).bind(1.5, &[]).is_err());
    }

    #[test]
    fn node_set_invariants() {
        assert!(NodeSet::new(vec![0.5]).is_err());
        assert!(NodeSet::new(vec![0.5, 0.5]).is_err());
        assert!(NodeSet::new(vec![0.9, 0.1]).is_err());
        assert!(NodeSet::new(vec![0.1, 1.2]).is_err());
        let ns = NodeSet::new(vec![0.2, 0.6]).unwrap();
        assert!((ns.rho()[0] - 0.5 * (0.2 - 0.6)).abs() < 1e-15);
    }
}
