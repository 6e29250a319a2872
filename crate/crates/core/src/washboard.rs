//! The tilted periodic ("washboard") potential `U(g) = -(cos g + γ g)` of the
//! reduced particle problem, its critical points and the linearised structure
//! of the singular points of the autonomous system
//!
//! ```text
//! g' = u,    u' = -μ u - sin g + γ.
//! ```
//!
//! Angles are unwrapped reals; nothing here reduces modulo 2π.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|γ - 1|` below this selects the degenerate `γ = 1` branch.
pub const GAMMA_ONE_TOL: f64 = 1e-14;

/// Tolerance on the `μ(α, v)` consistency relation.
const MU_CONSISTENCY_TOL: f64 = 1e-12;

pub fn is_gamma_one(gamma: f64) -> bool {
    (gamma - 1.0).abs() <= GAMMA_ONE_TOL
}

/// Sign of `g'` along a monotone piece of trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Physical and reduced parameters of one travelling-wave problem.
///
/// `alpha` and `v` are the physical dissipation and velocity; the reduced
/// equation sees them only through `mu = alpha / sqrt(|v^-2 - 1|)`. A purely
/// reduced problem (built with [`SystemParams::reduced`]) carries
/// `alpha = v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub v: f64,
    pub epsilon: Sign,
}

impl SystemParams {
    pub fn reduced(gamma: f64, mu: f64, epsilon: Sign) -> Self {
        Self {
            alpha: 0.0,
            gamma,
            mu,
            v: 0.0,
            epsilon,
        }
    }

    /// Parameters of a wave with physical dissipation `alpha` and velocity `v`
    /// (`0 < |v| < 1`); `mu` follows from the consistency relation.
    pub fn with_motion(alpha: f64, gamma: f64, v: f64, epsilon: Sign) -> Result<Self> {
        if !(v.abs() < 1.0) || v == 0.0 {
            return Err(Error::VelocityOutOfRange { v });
        }
        let mu = alpha / (v.powi(-2) - 1.0).abs().sqrt();
        let p = Self {
            alpha,
            gamma,
            mu,
            v,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::GammaOutOfRange {
                gamma: self.gamma,
                expected: "[0, inf)",
            });
        }
        if !(self.mu >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "mu",
                value: self.mu,
                reason: "must be non-negative".into(),
            });
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "alpha",
                value: self.alpha,
                reason: "must be non-negative".into(),
            });
        }
        if self.v.abs() < 1.0 && self.v != 0.0 && self.alpha > 0.0 {
            let expect = self.alpha / (self.v.powi(-2) - 1.0).sqrt();
            if (expect - self.mu).abs() > MU_CONSISTENCY_TOL * expect.max(1.0) {
                return Err(Error::ParamOutOfRange {
                    name: "mu",
                    value: self.mu,
                    reason: format!("inconsistent with alpha and v (expected {expect})"),
                });
            }
        }
        Ok(())
    }
}

/// `U(g) = -(cos g + γ g)`.
pub fn potential(g: f64, gamma: f64) -> f64 {
    -(g.cos() + gamma * g)
}

/// `U_g(g) = sin g - γ`.
pub fn potential_slope(g: f64, gamma: f64) -> f64 {
    g.sin() - gamma
}

/// Local maximum `g_k^M = -asin γ + (2k+1)π` (γ ≤ 1).
pub fn maximum_point(k: i64, gamma: f64) -> f64 {
    -gamma.asin() + (2 * k + 1) as f64 * PI
}

/// Local minimum `g_k^m = asin γ + 2kπ` (γ ≤ 1).
pub fn minimum_point(k: i64, gamma: f64) -> f64 {
    gamma.asin() + (2 * k) as f64 * PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub index: i64,
    pub kind: CriticalKind,
}

/// All critical points of `U` with lattice index in `k_range` (inclusive).
///
/// Minima and maxima for `γ < 1`, inflections for `γ = 1`, nothing for `γ > 1`.
pub fn critical_points(gamma: f64, k_range: std::ops::RangeInclusive<i64>) -> Vec<CriticalPoint> {
    let mut out = Vec::new();
    if is_gamma_one(gamma) {
        for k in k_range {
            out.push(CriticalPoint {
                location: (2.0 * k as f64 + 0.5) * PI,
                index: k,
                kind: CriticalKind::Inflection,
            });
        }
    } else if gamma < 1.0 {
        for k in k_range {
            out.push(CriticalPoint {
                location: minimum_point(k, gamma),
                index: k,
                kind: CriticalKind::Minimum,
            });
            out.push(CriticalPoint {
                location: maximum_point(k, gamma),
                index: k,
                kind: CriticalKind::Maximum,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Saddle,
    Node,
    Focus,
    Center,
    SaddleNode,
    /// `γ = 1`, `μ = 0`: double zero eigenvalue.
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPointReport {
    pub point: CriticalPoint,
    pub classification: Classification,
    pub eigenvalues: (Complex64, Complex64),
}

/// Linearised classification of the singular point `(point, 0)` via the
/// characteristic equation `λ² + μλ ∓ sqrt(1-γ²) = 0` (upper sign at maxima).
pub fn classify_singular_point(point: &CriticalPoint, mu: f64, gamma: f64) -> Result<SingularPointReport> {
    if gamma > 1.0 + GAMMA_ONE_TOL {
        return Err(Error::NoSingularPoints { gamma });
    }
    let s = if is_gamma_one(gamma) {
        0.0
    } else {
        (1.0 - gamma * gamma).sqrt()
    };
    // λ² + μλ + c = 0
    let c = match point.kind {
        CriticalKind::Maximum => -s,
        CriticalKind::Minimum => s,
        CriticalKind::Inflection => 0.0,
    };
    let disc = Complex64::new(mu * mu - 4.0 * c, 0.0).sqrt();
    let l1 = (Complex64::new(-mu, 0.0) + disc) * 0.5;
    let l2 = (Complex64::new(-mu, 0.0) - disc) * 0.5;

    let classification = match point.kind {
        CriticalKind::Maximum => Classification::Saddle,
        CriticalKind::Inflection => {
            if mu > 0.0 {
                Classification::SaddleNode
            } else {
                Classification::Cusp
            }
        }
        CriticalKind::Minimum => {
            if mu == 0.0 {
                Classification::Center
            } else if mu >= 2.0 * s.sqrt() {
                Classification::Node
            } else {
                Classification::Focus
            }
        }
    };
    Ok(SingularPointReport {
        point: *point,
        classification,
        eigenvalues: (l1, l2),
    })
}

/// Leading-order slopes `u_{ε'ε} = (ε'μ + ε sqrt(μ² + 4 sqrt(1-γ²)))/2` of the
/// four separatrices at a saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixSlopes {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl SeparatrixSlopes {
    /// `u_{ε'ε}`.
    pub fn get(&self, eps_prime: Sign, eps: Sign) -> f64 {
        match (eps_prime, eps) {
            (Sign::Plus, Sign::Plus) => self.pp,
            (Sign::Plus, Sign::Minus) => self.pm,
            (Sign::Minus, Sign::Plus) => self.mp,
            (Sign::Minus, Sign::Minus) => self.mm,
        }
    }
}

pub fn separatrix_slopes(mu: f64, gamma: f64) -> Result<SeparatrixSlopes> {
    if !(gamma < 1.0) || is_gamma_one(gamma) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "[0, 1)",
        });
    }
    let root = (mu * mu + 4.0 * (1.0 - gamma * gamma).sqrt()).sqrt();
    Ok(SeparatrixSlopes {
        pp: 0.5 * (mu + root),
        pm: 0.5 * (mu - root),
        mp: 0.5 * (-mu + root),
        mm: 0.5 * (-mu - root),
    })
}
