//! Function readout f_θ(x) from circuits and the weighted loss assembly:
//! DE term, initial/boundary-condition term, regularization term.

use crate::circuit::Circuit;
use crate::diff::{d2f_dx2, df_dx};
use crate::error::VqodeError;
use crate::problems::{CoordinateMap, DifferentialEquation};
use serde::{Deserialize, Serialize};

/// Distance used inside the loss terms; squared error is the default used
/// by every experiment, absolute error is available as a switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    #[default]
    Squared,
    Absolute,
}

impl DistanceKind {
    pub fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            DistanceKind::Squared => (a - b) * (a - b),
            DistanceKind::Absolute => (a - b).abs(),
        }
    }

    /// d/da of the distance.
    pub fn grad(self, a: f64, b: f64) -> f64 {
        match self {
            DistanceKind::Squared => 2.0 * (a - b),
            DistanceKind::Absolute => (a - b).signum(),
        }
    }
}

/// Weights (η_DE, η_Cs, η_R) of Eq.-style weighted total loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub de: f64,
    pub cs: f64,
    pub reg: f64,
}

impl Eta {
    pub fn new(de: f64, cs: f64, reg: f64) -> Result<Self, VqodeError> {
        for w in [de, cs, reg] {
            if w < 0.0 {
                return Err(VqodeError::NegativeWeight(w));
            }
        }
        Ok(Eta { de, cs, reg })
    }
}

/// Loss components and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub de: f64,
    pub cs: f64,
    pub reg: f64,
    pub eta: (f64, f64, f64),
    pub total: f64,
}

/// total = η_DE de + η_Cs cs + η_R reg.
pub fn total_loss(de: f64, cs: f64, reg: f64, eta: Eta) -> LossBreakdown {
    LossBreakdown {
        de,
        cs,
        reg,
        eta: (eta.de, eta.cs, eta.reg),
        total: eta.de * de + eta.cs * cs + eta.reg * reg,
    }
}

/// A boundary/initial-condition residual term entering the Cs loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcTerm {
    /// Encoded coordinate of the constraint.
    pub x: f64,
    /// Target value of f (Value) or of df/dt (Derivative).
    pub target: f64,
    pub derivative: bool,
}

/// Readout specification: circuit, cost weights, amplitude scale and the
/// optional floating-boundary shift f_Cs.
///
/// Lagrange maps use weights 1/rho_j on the first register; the Chebyshev
/// map uses the total magnetization (weight 1 on every qubit).
#[derive(Debug, Clone)]
pub struct ReadoutSpec {
    pub circuit: Circuit,
    pub weights: Vec<(usize, f64)>,
    pub scale: f64,
    pub shift: f64,
}

impl ReadoutSpec {
    pub fn new(circuit: Circuit, weights: Vec<(usize, f64)>) -> Self {
        ReadoutSpec { circuit, weights, scale: 1.0, shift: 0.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Cost-operator expectation times the amplitude scale, without shift.
    pub fn raw(&self, x: f64, theta: &[f64]) -> Result<f64, VqodeError> {
        let state = self.circuit.bind(x, theta)?;
        Ok(self.scale * state.expectation_weighted_z(&self.weights)?)
    }

    /// f_θ(x): cost-operator expectation plus the shift f_Cs.
    pub fn readout(&self, x: f64, theta: &[f64]) -> Result<f64, VqodeError> {
        Ok(self.raw(x, theta)? + self.shift)
    }

    /// df/dx in the encoded coordinate (scale applied, shift constant).
    pub fn readout_dx(&self, x: f64, theta: &[f64]) -> Result<f64, VqodeError> {
        Ok(self.scale * df_dx(&self.circuit, x, theta, &self.weights)?)
    }

    /// d²f/dx² in the encoded coordinate.
    pub fn readout_dx2(&self, x: f64, theta: &[f64]) -> Result<f64, VqodeError> {
        Ok(self.scale * d2f_dx2(&self.circuit, x, theta, &self.weights)?)
    }

    /// Floating-boundary constant: f_Cs = u0 - raw(x0), recomputed each
    /// iteration so the readout meets u0 at x0 exactly for any θ.
    pub fn floating_shift(&self, x0: f64, u0: f64, theta: &[f64]) -> Result<f64, VqodeError> {
        Ok(u0 - self.raw(x0, theta)?)
    }
}

/// (1/M) Σ dist(residual(x_i), 0) over the DE points, in physical coords.
pub fn de_loss(
    problem: &dyn DifferentialEquation,
    spec: &ReadoutSpec,
    map: &CoordinateMap,
    theta: &[f64],
    points: &[f64],
    distance: DistanceKind,
) -> Result<f64, VqodeError> {
    if points.is_empty() {
        return Err(VqodeError::EmptyPointList);
    }
    let dxdt = map.dx_dt();
    let mut acc = 0.0;
    for &x in points {
        let t = map.t_of_x(x);
        let f = spec.readout(x, theta)?;
        let f1 = spec.readout_dx(x, theta)? * dxdt;
        let f2 = spec.readout_dx2(x, theta)? * dxdt * dxdt;
        acc += distance.eval(problem.residual(t, f, f1, f2), 0.0);
    }
    Ok(acc / points.len() as f64)
}

/// Σ over declared constraint terms of the squared (or absolute) residual.
pub fn cs_loss(
    spec: &ReadoutSpec,
    map: &CoordinateMap,
    theta: &[f64],
    terms: &[BcTerm],
    distance: DistanceKind,
) -> Result<f64, VqodeError> {
    let dxdt = map.dx_dt();
    let mut acc = 0.0;
    for term in terms {
        let v = if term.derivative {
            spec.readout_dx(term.x, theta)? * dxdt
        } else {
            spec.readout(term.x, theta)?
        };
        acc += distance.eval(v, term.target);
    }
    Ok(acc)
}

/// (1/M_R) Σ dist(f_θ(x_r), u_r); empty list contributes 0.
pub fn reg_loss(
    spec: &ReadoutSpec,
    theta: &[f64],
    points: &[(f64, f64)],
    distance: DistanceKind,
) -> Result<f64, VqodeError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for &(x, u) in points {
        acc += distance.eval(spec.readout(x, theta)?, u);
    }
    Ok(acc / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_channel_ansatz, build_lagrange_simplified, NodeSet};
    use crate::problems::DmssProblem;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn lagrange_spec(nodes: Vec<f64>) -> (ReadoutSpec, usize) {
        let n = nodes.len();
        let ns = NodeSet::new(nodes).unwrap();
        let w = ns.weights();
        let c = build_lagrange_simplified(&ns).then(&build_channel_ansatz(n + 1, n));
        (ReadoutSpec::new(c, w), n)
    }

    #[test]
    fn identity_ansatz_reads_partition_of_unity() {
        let (spec, n) = lagrange_spec(vec![0.12, 0.5, 0.82]);
        let theta = vec![0.0; n];
        for &x in &[0.05, 0.3, 0.66, 0.89] {
            assert!((spec.readout(x, &theta).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn readout_agrees_with_classical_lagrange_interpolant() {
        // sample the readout at the nodes, interpolate classically, compare
        // off-node
        let nodes = vec![0.1, 0.4, 0.7, 0.85];
        let (spec, n) = lagrange_spec(nodes.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta: Vec<f64> =
            (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let at_nodes: Vec<f64> =
            nodes.iter().map(|&x| spec.readout(x, &theta).unwrap()).collect();
        let interp = |x: f64| -> f64 {
            let mut acc = 0.0;
            for j in 0..nodes.len() {
                let mut l = 1.0;
                for i in 0..nodes.len() {
                    if i != j {
                        l *= (x - nodes[i]) / (nodes[j] - nodes[i]);
                    }
                }
                acc += at_nodes[j] * l;
            }
            acc
        };
        for k in 0..20 {
            let x = 0.02 + 0.86 * (k as f64) / 19.0;
            let direct = spec.readout(x, &theta).unwrap();
            assert!((direct - interp(x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn shift_arithmetic_and_exactness() {
        let (mut spec, n) = lagrange_spec(vec![0.2, 0.6, 0.8]);
        let theta = vec![0.4; n];
        let x0 = 0.0;
        let raw = spec.raw(x0, &theta).unwrap();
        let shift = spec.floating_shift(x0, 1.0, &theta).unwrap();
        assert!((shift - (1.0 - raw)).abs() < 1e-15);
        spec.shift = shift;
        assert!((spec.readout(x0, &theta).unwrap() - 1.0).abs() < 1e-12);
        // u0 equal to the raw value makes the shift vanish
        let z = spec.floating_shift(x0, raw, &theta).unwrap();
        assert!(z.abs() < 1e-15);
        // worked example: raw 0.3, u0 1.0 -> shift 0.7
        assert!((1.0 - 0.3 - 0.7f64).abs() < 1e-15);
    }

    #[test]
    fn de_loss_of_analytic_solution_is_negligible() {
        // feed oracle-supplied (f, f', f'') straight into the residual
        let p = DmssProblem::default();
        let mut acc: f64 = 0.0;
        for i in 0..10 {
            let t = i as f64;
            let (f, f1, f2) = p.analytical(t).unwrap();
            acc = acc.max(p.residual(t, f, f1, f2).powi(2));
        }
        assert!(acc <= 1e-20);
    }

    #[test]
    fn de_loss_mean_of_squares_and_empty_list() {
        // residuals {1, -1} -> mean of squares 1
        let d = DistanceKind::Squared;
        assert!((0.5 * (d.eval(1.0, 0.0) + d.eval(-1.0, 0.0)) - 1.0).abs() < 1e-15);

        let (spec, n) = lagrange_spec(vec![0.2, 0.6, 0.8]);
        let map = CoordinateMap::new(0.0, 10.0, 0.0, 0.9).unwrap();
        let p = DmssProblem::default();
        let err = de_loss(&p, &spec, &map, &vec![0.0; n], &[], d);
        assert!(matches!(err, Err(VqodeError::EmptyPointList)));
    }

    #[test]
    fn cs_and_reg_losses() {
        let (mut spec, n) = lagrange_spec(vec![0.2, 0.6, 0.8]);
        let theta = vec![0.0; n];
        let map = CoordinateMap::new(0.0, 10.0, 0.0, 0.9).unwrap();
        // identity ansatz readout is constant 1: derivative residual is 0,
        // value residual at target 0.5 is 0.25
        spec.shift = 0.0;
        let terms = [
            BcTerm { x: 0.3, target: 0.5, derivative: false },
            BcTerm { x: 0.3, target: 0.0, derivative: true },
        ];
        let cs = cs_loss(&spec, &map, &theta, &terms, DistanceKind::Squared).unwrap();
        assert!((cs - 0.25).abs() < 1e-9);

        assert_eq!(reg_loss(&spec, &theta, &[], DistanceKind::Squared).unwrap(), 0.0);
        let r = reg_loss(&spec, &theta, &[(0.4, 1.0)], DistanceKind::Squared).unwrap();
        assert!(r < 1e-12);
        let r = reg_loss(&spec, &theta, &[(0.4, 0.9)], DistanceKind::Squared).unwrap();
        assert!((r - 0.01).abs() < 1e-9);
    }

    #[test]
    fn total_loss_weighting() {
        let eta = Eta::new(1.0, 1.0, 0.0).unwrap();
        let lb = total_loss(0.5, 0.25, 7.0, eta);
        assert!((lb.total - 0.75).abs() < 1e-15);
        // weighted sums used by the two solver configurations
        let hl = Eta::new(1.0, 0.6, 1.0).unwrap();
        let lb = total_loss(1.0, 1.0, 1.0, hl);
        assert!((lb.total - 2.6).abs() < 1e-15);
        assert!(Eta::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn polynomial_degree_bound_for_any_theta() {
        // readout sampled at n nodes determines a degree-(n-1) polynomial
        // reproducing the readout at fresh points
        let nodes = vec![0.08, 0.33, 0.58, 0.83];
        let (spec, n) = lagrange_spec(nodes.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..3 {
            let theta: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let vals: Vec<f64> =
                nodes.iter().map(|&x| spec.readout(x, &theta).unwrap()).collect();
            for _ in 0..20 {
                let x = rng.gen_range(0.0..0.9);
                let mut interp = 0.0;
                for j in 0..n {
                    let mut l = 1.0;
                    for i in 0..n {
                        if i != j {
                            l *= (x - nodes[i]) / (nodes[j] - nodes[i]);
                        }
                    }
                    interp += vals[j] * l;
                }
                let direct = spec.readout(x, &theta).unwrap();
                assert!((direct - interp).abs() < 1e-9, "x={x}");
            }
        }
    }

    #[test]
    fn mae_switch() {
        let d = DistanceKind::Absolute;
        assert!((d.eval(1.5, 0.0) - 1.5).abs() < 1e-15);
        assert!((d.grad(1.5, 0.0) - 1.0).abs() < 1e-15);
    }
}
