//! Problem definitions: the damped mass-spring system and the Poisson
//! equation, training-node constructions, coordinate scaling, and
//! closed-form reference solutions.

use crate::error::VqodeError;
use serde::{Deserialize, Serialize};

/// Residual interface shared by all differential equations.
///
/// `residual` evaluates the DE with all terms on one side at a physical
/// point t; `partials` returns (∂r/∂f, ∂r/∂f', ∂r/∂f'') there.
pub trait DifferentialEquation: Send + Sync {
    fn residual(&self, t: f64, f: f64, f1: f64, f2: f64) -> f64;
    fn partials(&self, t: f64) -> (f64, f64, f64);
    /// Which of (f, f', f'') appear in the DE; zeroes absent budget terms.
    fn terms(&self) -> DeTerms;
}

/// Presence flags for the DE components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeTerms {
    pub uses_f: bool,
    pub uses_f1: bool,
    pub uses_f2: bool,
}

/// Affine map between the physical coordinate t and the encoded variable x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateMap {
    pub t_lo: f64,
    pub t_hi: f64,
    pub a: f64,
    pub b: f64,
}

impl CoordinateMap {
    pub fn new(t_lo: f64, t_hi: f64, a: f64, b: f64) -> Result<Self, VqodeError> {
        if t_hi <= t_lo {
            return Err(VqodeError::DegenerateInterval(t_lo, t_hi));
        }
        if b <= a {
            return Err(VqodeError::DegenerateInterval(a, b));
        }
        Ok(CoordinateMap { t_lo, t_hi, a, b })
    }

    pub fn t_of_x(&self, x: f64) -> f64 {
        self.t_lo + (self.t_hi - self.t_lo) * (x - self.a) / (self.b - self.a)
    }

    pub fn x_of_t(&self, t: f64) -> f64 {
        self.a + (self.b - self.a) * (t - self.t_lo) / (self.t_hi - self.t_lo)
    }

    /// Chain-rule factor dx/dt converting encoded-variable derivatives to
    /// physical ones: f' = f̂' · dx/dt, f'' = f̂'' · (dx/dt)².
    pub fn dx_dt(&self) -> f64 {
        (self.b - self.a) / (self.t_hi - self.t_lo)
    }
}

/// Chebyshev-Gauss nodes of the first kind rescaled to [a, b], ascending.
///
/// The 0 <= k < N indexing in the source formula collides at k = 0 and
/// k = 1 (cosine is even), so the standard 1 <= k <= N range is used.
pub fn chebyshev_nodes_kind1(a: f64, b: f64, n: usize) -> Result<Vec<f64>, VqodeError> {
    if n < 2 {
        return Err(VqodeError::BadNodeSet(format!("kind-1 nodes need n >= 2, got {n}")));
    }
    let mut xs: Vec<f64> = (1..=n)
        .map(|k| {
            (a + b) / 2.0
                + (b - a) / 2.0 * ((2.0 * k as f64 - 1.0) * std::f64::consts::PI / (2.0 * n as f64)).cos()
        })
        .collect();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    Ok(xs)
}

/// Positive Chebyshev nodes scaled over [0, b]: k = 1..n-1 from the cosine
/// formula plus the endpoint b completing n distinct points, ascending.
pub fn chebyshev_nodes_kind2(b: f64, n: usize) -> Result<Vec<f64>, VqodeError> {
    if n < 2 {
        return Err(VqodeError::BadNodeSet(format!("kind-2 nodes need n >= 2, got {n}")));
    }
    let mut xs: Vec<f64> = (1..n)
        .map(|k| {
            b * ((2.0 * k as f64 - 1.0) * std::f64::consts::PI / (4.0 * (n as f64 - 1.0))).cos()
        })
        .collect();
    xs.push(b);
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    for w in xs.windows(2) {
        if w[1] - w[0] < 1e-12 {
            return Err(VqodeError::BadNodeSet(format!(
                "kind-2 completion produced duplicate nodes near {}",
                w[0]
            )));
        }
    }
    Ok(xs)
}

// ---------------------------------------------------------------------------
// Damped mass-spring system
// ---------------------------------------------------------------------------

/// m f'' + b f' + k f = 0 with initial values f(0) = u0, f'(0) = du0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmssProblem {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub u0: f64,
    pub du0: f64,
}

impl Default for DmssProblem {
    fn default() -> Self {
        DmssProblem { mass: 1.0, damping: 1.0, stiffness: 1.0, u0: 1.0, du0: 0.0 }
    }
}

impl DifferentialEquation for DmssProblem {
    fn residual(&self, _t: f64, f: f64, f1: f64, f2: f64) -> f64 {
        self.mass * f2 + self.damping * f1 + self.stiffness * f
    }
    fn partials(&self, _t: f64) -> (f64, f64, f64) {
        (self.stiffness, self.damping, self.mass)
    }
    fn terms(&self) -> DeTerms {
        DeTerms { uses_f: true, uses_f1: true, uses_f2: true }
    }
}

impl DmssProblem {
    pub fn discriminant(&self) -> f64 {
        self.damping * self.damping - 4.0 * self.mass * self.stiffness
    }

    /// Closed-form underdamped solution and its first two derivatives.
    ///
    /// With the complex roots α ± iβ of m λ² + b λ + k = 0, the solution is
    /// e^{αt}(C₁ cos βt + C₂ sin βt), C₁ and C₂ fixed by the initial values.
    pub fn analytical(&self, t: f64) -> Result<(f64, f64, f64), VqodeError> {
        let disc = self.discriminant();
        if disc >= 0.0 {
            return Err(VqodeError::NotUnderdamped(disc));
        }
        let alpha = -self.damping / (2.0 * self.mass);
        let beta = (-disc).sqrt() / (2.0 * self.mass);
        let c1 = self.u0;
        let c2 = (self.du0 - alpha * self.u0) / beta;
        let e = (alpha * t).exp();
        let (s, c) = (beta * t).sin_cos();
        let f = e * (c1 * c + c2 * s);
        let f1 = alpha * f + e * beta * (-c1 * s + c2 * c);
        let f2 = -(self.damping * f1 + self.stiffness * f) / self.mass;
        Ok((f, f1, f2))
    }
}

// ---------------------------------------------------------------------------
// Poisson equation
// ---------------------------------------------------------------------------

/// Boundary-condition kinds for the Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoissonBc {
    Periodic,
    Dirichlet,
    Neumann,
}

/// f'' + s = 0 over [a, b] with the antisymmetric step source of amplitude
/// (1/2)^{n/2}, solved on the left half-interval [a, (a+b)/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonProblem {
    pub n_src: u32,
    pub bc: PoissonBc,
    pub a: f64,
    pub b: f64,
}

impl Default for PoissonProblem {
    fn default() -> Self {
        PoissonProblem { n_src: 5, bc: PoissonBc::Neumann, a: 0.0, b: 31.0 }
    }
}

impl DifferentialEquation for PoissonProblem {
    fn residual(&self, t: f64, _f: f64, _f1: f64, f2: f64) -> f64 {
        // left limit at the discontinuity: the solver works on the left half
        let amp = 0.5f64.powf(self.n_src as f64 / 2.0);
        f2 + if t <= self.midpoint() { amp } else { -amp }
    }
    fn partials(&self, _t: f64) -> (f64, f64, f64) {
        (0.0, 0.0, 1.0)
    }
    fn terms(&self) -> DeTerms {
        DeTerms { uses_f: false, uses_f1: false, uses_f2: true }
    }
}

impl PoissonProblem {
    pub fn midpoint(&self) -> f64 {
        (self.a + self.b) / 2.0
    }

    /// Leading quadratic coefficient A = -(1/2)^{n/2 + 1}.
    pub fn coeff_a(&self) -> f64 {
        -0.5f64.powf(self.n_src as f64 / 2.0 + 1.0)
    }

    /// Step source: +(1/2)^{n/2} left of the midpoint, negated right of it.
    pub fn source(&self, x: f64) -> Result<f64, VqodeError> {
        let mid = self.midpoint();
        let amp = 0.5f64.powf(self.n_src as f64 / 2.0);
        if x < mid {
            Ok(amp)
        } else if x > mid {
            Ok(-amp)
        } else {
            Err(VqodeError::SourceAtMidpoint(x))
        }
    }

    /// Coefficients (B1, C1) of the left branch A(x² + B1 x + C1).
    pub fn left_branch_coeffs(&self) -> (f64, f64) {
        let (a, b) = (self.a, self.b);
        match self.bc {
            PoissonBc::Periodic => {
                (-0.5 * (3.0 * a + b - 1.0), 0.5 * (a - 0.5) * (a + b + 1.0))
            }
            PoissonBc::Dirichlet => (-0.5 * (3.0 * a + b - 2.0), 0.5 * (a - 1.0) * (a + b)),
            PoissonBc::Neumann => {
                (-2.0 * a, (3.0 * a * a + 2.0 * a * b - b * b) / 4.0)
            }
        }
    }

    /// Coefficients (B2, C2) of the right branch -A(x² + B2 x + C2).
    pub fn right_branch_coeffs(&self) -> (f64, f64) {
        let (a, b) = (self.a, self.b);
        match self.bc {
            PoissonBc::Periodic => {
                (-0.5 * (3.0 * b + a + 1.0), 0.5 * (b + 0.5) * (a + b + 1.0))
            }
            PoissonBc::Dirichlet => (-0.5 * (a + 3.0 * b + 2.0), 0.5 * (b + 1.0) * (a + b)),
            PoissonBc::Neumann => {
                (-2.0 * b, (3.0 * b * b + 2.0 * a * b - a * a) / 4.0)
            }
        }
    }

    /// Piecewise-quadratic closed-form solution and derivatives; exactly 0
    /// at the midpoint by convention.
    pub fn analytical(&self, x: f64) -> (f64, f64, f64) {
        let mid = self.midpoint();
        let big_a = self.coeff_a();
        if x == mid {
            // value pinned to 0 at the discontinuity; derivative from the left
            let (b1, _) = self.left_branch_coeffs();
            return (0.0, big_a * (2.0 * x + b1), 2.0 * big_a);
        }
        if x < mid {
            let (b1, c1) = self.left_branch_coeffs();
            (
                big_a * (x * x + b1 * x + c1),
                big_a * (2.0 * x + b1),
                2.0 * big_a,
            )
        } else {
            let (b2, c2) = self.right_branch_coeffs();
            (
                -big_a * (x * x + b2 * x + c2),
                -big_a * (2.0 * x + b2),
                -2.0 * big_a,
            )
        }
    }
}
