//! Self-check suite behind the `verify` subcommand: encoding identities,
//! derivative-engine agreement, and reference-solution checks, each printed
//! as a pass/fail line.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    build_channel_ansatz, build_chebyshev_map, build_lagrange_extended, build_lagrange_simplified,
    hadamard_test_cell, NodeSet,
};
use crate::diff::{hadamard_test_partial, shift_rule_partial, SlotId};
use crate::problems::{DifferentialEquation, DmssProblem, PoissonBc, PoissonProblem};
use crate::sim::{Gate, StateVector};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_nodes(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.9)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.windows(2).all(|w| w[1] - w[0] > 0.05) {
            return v;
        }
    }
}

fn b4_product(nodes: &[f64], x: f64, j: usize) -> f64 {
    let mut p = 0.5f64.powi(nodes.len() as i32 - 1);
    for (i, &xi) in nodes.iter().enumerate() {
        if i != j {
            p *= x - xi;
        }
    }
    p
}

fn check_hadamard_cell() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let x = 0.05 + 0.04 * k as f64;
        let xi = 0.85 - 0.03 * k as f64;
        let phi = ((x - xi) / 2.0).acos();
        let s = hadamard_test_cell(phi).bind(0.0, &[]).unwrap();
        worst = worst.max((s.expectation_z(0).unwrap() - (x - xi) / 2.0).abs());
    }
    Check {
        name: "hadamard-test cell reads (x - x_i)/2",
        passed: worst < 1e-12,
        detail: format!("max |err| = {worst:.3e}"),
    }
}

fn check_lagrange_basis() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for _ in 0..8 {
            let nodes = random_nodes(&mut rng, n);
            let ns = NodeSet::new(nodes.clone()).unwrap();
            let x = rng.gen_range(0.0..0.9);
            for (label, circuit) in
                [(0, build_lagrange_extended(&ns)), (1, build_lagrange_simplified(&ns))]
            {
                let _ = label;
                let st = circuit.bind(x, &[]).unwrap();
                for j in 0..n {
                    worst =
                        worst.max((st.expectation_z(j).unwrap() - b4_product(&nodes, x, j)).abs());
                }
            }
        }
    }
    Check {
        name: "Lagrange basis identity on both structures",
        passed: worst < 1e-10,
        detail: format!("max |err| = {worst:.3e}"),
    }
}

fn check_partition_of_unity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        let nodes = random_nodes(&mut rng, n);
        let ns = NodeSet::new(nodes).unwrap();
        let c = build_lagrange_simplified(&ns);
        let w = ns.weights();
        for _ in 0..20 {
            let x = rng.gen_range(0.0..0.9);
            let s = c.bind(x, &[]).unwrap();
            worst = worst.max((s.expectation_weighted_z(&w).unwrap() - 1.0).abs());
        }
    }
    Check {
        name: "partition of unity under the identity ansatz",
        passed: worst < 1e-10,
        detail: format!("max |sum - 1| = {worst:.3e}"),
    }
}

fn check_structure_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        let nodes = random_nodes(&mut rng, n);
        let ns = NodeSet::new(nodes).unwrap();
        for _ in 0..6 {
            let x = rng.gen_range(0.0..0.9);
            let theta: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let e = build_lagrange_extended(&ns)
                .then(&build_channel_ansatz(2 * n, n))
                .bind(x, &theta)
                .unwrap();
            let s = build_lagrange_simplified(&ns)
                .then(&build_channel_ansatz(n + 1, n))
                .bind(x, &theta)
                .unwrap();
            for j in 0..n {
                worst =
                    worst.max((e.expectation_z(j).unwrap() - s.expectation_z(j).unwrap()).abs());
            }
        }
    }
    Check {
        name: "extended and simplified structures agree",
        passed: worst < 1e-10,
        detail: format!("max |diff| = {worst:.3e}"),
    }
}

fn check_chebyshev_identity() -> Check {
    let mut worst: f64 = 0.0;
    for j in 1..=3usize {
        let c = build_chebyshev_map(j);
        for k in 1..=9 {
            let x = k as f64 / 10.0;
            let st = c.bind(x, &[]).unwrap();
            let z = st.expectation_z(j - 1).unwrap();
            worst = worst.max((z - (2.0 * j as f64 * x.acos()).cos()).abs());
        }
    }
    Check {
        name: "Chebyshev map reads cos(2j arccos x)",
        passed: worst < 1e-12,
        detail: format!("max |err| = {worst:.3e}"),
    }
}

fn check_engine_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for _ in 0..12 {
        let n = rng.gen_range(2..=4);
        let nodes = random_nodes(&mut rng, n);
        let ns = NodeSet::new(nodes).unwrap();
        let w = ns.weights();
        let c = build_lagrange_simplified(&ns).then(&build_channel_ansatz(n + 1, n));
        let theta: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let x = rng.gen_range(0.0..0.9);
        for i in 0..n {
            let a = shift_rule_partial(&c, x, &theta, SlotId::Var(i), &w).unwrap();
            let b = hadamard_test_partial(&c, x, &theta, SlotId::Var(i), &w).unwrap();
            worst = worst.max((a - b).abs());
        }
        for k in 0..n {
            let a = shift_rule_partial(&c, x, &theta, SlotId::Theta(k), &w).unwrap();
            let b = hadamard_test_partial(&c, x, &theta, SlotId::Theta(k), &w).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    Check {
        name: "shift-rule and Hadamard-test partials agree",
        passed: worst < 1e-10,
        detail: format!("max |diff| = {worst:.3e}"),
    }
}

fn check_rz_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let n = rng.gen_range(2..=5usize);
        let mut state = StateVector::zero(n).unwrap();
        for _ in 0..rng.gen_range(4..24) {
            match rng.gen_range(0..5) {
                0 => state.apply(&Gate::rx(rng.gen_range(0..n), rng.gen_range(-3.0..3.0))),
                1 => state.apply(&Gate::ry(rng.gen_range(0..n), rng.gen_range(-3.0..3.0))),
                2 => state.apply(&Gate::rz(rng.gen_range(0..n), rng.gen_range(-3.0..3.0))),
                3 => state.apply(&Gate::h(rng.gen_range(0..n))),
                _ => {
                    let c = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n);
                    while t == c {
                        t = rng.gen_range(0..n);
                    }
                    state.apply(&Gate::cnot(c, t))
                }
            }
            .unwrap();
        }
        let weights: Vec<(usize, f64)> = (0..n).map(|q| (q, rng.gen_range(-2.0..2.0))).collect();
        let before = state.expectation_weighted_z(&weights).unwrap();
        let mut rotated = state.clone();
        rotated.apply(&Gate::rz(rng.gen_range(0..n), rng.gen_range(-3.0..3.0))).unwrap();
        let after = rotated.expectation_weighted_z(&weights).unwrap();
        worst = worst.max((before - after).abs());
        worst = worst.max((state.norm_sqr() - 1.0).abs());
    }
    Check {
        name: "weighted-Z expectation unchanged by RZ, norm preserved",
        passed: worst < 1e-12,
        detail: format!("max |err| = {worst:.3e}"),
    }
}

fn check_dmss_oracle() -> Check {
    let p = DmssProblem::default();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let t = 10.0 * i as f64 / 199.0;
        let (f, f1, f2) = p.analytical(t).unwrap();
        worst = worst.max(p.residual(t, f, f1, f2).abs());
    }
    Check {
        name: "mass-spring closed form satisfies its own equation",
        passed: worst < 1e-12,
        detail: format!("max |residual| = {worst:.3e}"),
    }
}

fn check_poisson_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut bc_ok = true;
    for bc in [PoissonBc::Periodic, PoissonBc::Dirichlet, PoissonBc::Neumann] {
        let p = PoissonProblem { bc, ..Default::default() };
        for k in 0..40 {
            let x = 0.2 + 30.5 * k as f64 / 39.0;
            if (x - p.midpoint()).abs() < 0.5 {
                continue;
            }
            let (_, _, f2) = p.analytical(x);
            worst = worst.max((f2 + p.source(x).unwrap()).abs());
        }
        let (fm, _, _) = p.analytical(p.midpoint());
        bc_ok &= fm == 0.0;
    }
    let d = PoissonProblem { bc: PoissonBc::Dirichlet, ..Default::default() };
    bc_ok &= d.analytical(d.a - 1.0).0.abs() < 1e-12 && d.analytical(d.b + 1.0).0.abs() < 1e-12;
    let n = PoissonProblem { bc: PoissonBc::Neumann, ..Default::default() };
    bc_ok &= n.analytical(n.a).1.abs() < 1e-12 && n.analytical(n.b).1.abs() < 1e-12;
    Check {
        name: "Poisson closed forms satisfy the equation and stated conditions",
        passed: worst < 1e-12 && bc_ok,
        detail: format!("max |f'' + s| = {worst:.3e}, conditions ok = {bc_ok}"),
    }
}

/// Run every check; prints one line per check when `print` is set.
pub fn run_all(print: bool) -> Vec<Check> {
    let checks = vec![
        check_hadamard_cell(),
        check_lagrange_basis(),
        check_partition_of_unity(),
        check_structure_equivalence(),
        check_chebyshev_identity(),
        check_engine_agreement(),
        check_rz_invariance(),
        check_dmss_oracle(),
        check_poisson_oracle(),
    ];
    if print {
        for c in &checks {
            println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_verify_checks_pass() {
        let checks = super::run_all(false);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
