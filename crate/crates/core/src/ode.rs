//! Scalar one-step integrators with dense output.
//!
//! Every reduced equation in this crate is a scalar first-order problem
//! `y' = f(t, y)` (the kinetic energy or the velocity as a function of the
//! angle), so the steppers are specialised to one dimension. Two methods are
//! provided:
//!
//! - [`dopri5_step`]: Dormand–Prince 5(4) with Hairer's fourth-order continuous
//!   extension. Used whenever the problem is not stiff.
//! - [`radau5_step`]: three-stage Radau IIA (order 5, L-stable). The error is
//!   estimated by step doubling and the dense output is the quintic matching
//!   values and slopes at the start, middle and end of the step. Used when the Jacobian `∂f/∂y`
//!   times the step size leaves the explicit stability region, which happens
//!   for strongly overdamped arrays.

/// A scalar right-hand side `f(t, y)` together with its `y`-derivative.
pub trait ScalarOde {
    fn rhs(&self, t: f64, y: f64) -> f64;
    fn dfdy(&self, t: f64, y: f64) -> f64;
}

/// Continuous representation of the solution over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseKind {
    /// Dormand–Prince continuous extension coefficients.
    Dopri([f64; 5]),
    /// Values and scaled slopes at `theta = 0, 1/2, 1`:
    /// `[y0, ym, y1, h*y0', h*ym', h*y1']`.
    Midpoint([f64; 6]),
    /// Cubic Hermite data `[y0, y1, h*y0', h*y1']` for tabulated functions.
    Hermite([f64; 4]),
}

/// One accepted step `[t0, t0 + h]` (`h` may be negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    pub kind: DenseKind,
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> f64 {
        self.eval_theta(0.0)
    }

    pub fn y1(&self) -> f64 {
        self.eval_theta(1.0)
    }

    /// True when `t` lies within the closed step interval.
    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.bounds();
        t >= lo && t <= hi
    }

    pub fn bounds(&self) -> (f64, f64) {
        let t1 = self.t1();
        if self.h >= 0.0 {
            (self.t0, t1)
        } else {
            (t1, self.t0)
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_theta((t - self.t0) / self.h)
    }

    /// Evaluate at the normalised position `theta = (t - t0) / h`.
    pub fn eval_theta(&self, theta: f64) -> f64 {
        match self.kind {
            DenseKind::Dopri(r) => {
                let th1 = 1.0 - theta;
                r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])))
            }
            DenseKind::Midpoint(v) => midpoint_hermite(theta, &v),
            DenseKind::Hermite([y0, y1, d0, d1]) => {
                let t = theta;
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * d0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * d1
            }
        }
    }
}

/// Quintic Hermite interpolant on `[0, 1]` from
/// `[y0, y1, h*y0', h*y1', h²*y0'', h²*y1'']`; returns the value and the first
/// two derivatives with respect to `theta`.
pub fn quintic_hermite(t: f64, v: &[f64; 6]) -> (f64, f64, f64) {
    let [y0, y1, d0, d1, a0, a1] = *v;
    let c0 = y0;
    let c1 = d0;
    let c2 = 0.5 * a0;
    let dd = y1 - c0 - c1 - c2;
    let ee = d1 - c1 - 2.0 * c2;
    let ff = a1 - 2.0 * c2;
    let c3 = 10.0 * dd - 4.0 * ee + 0.5 * ff;
    let c4 = -15.0 * dd + 7.0 * ee - ff;
    let c5 = 6.0 * dd - 3.0 * ee + 0.5 * ff;
    let p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    let dp = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
    let ddp = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
    (p, dp, ddp)
}

/// Quintic on `[0, 1]` through values and slopes at `0, 1/2, 1`, evaluated in
/// Newton form over the doubled nodes.
pub fn midpoint_hermite(t: f64, v: &[f64; 6]) -> f64 {
    let [y0, ym, y1, d0, dm, d1] = *v;
    let x = [0.0, 0.0, 0.5, 0.5, 1.0, 1.0];
    let mut c = [d0, 2.0 * (ym - y0), dm, 2.0 * (y1 - ym), d1];
    let mut coef = [y0, d0, 0.0, 0.0, 0.0, 0.0];
    // c[i] holds the divided difference of the current order starting at node i
    for k in 2..6 {
        for i in 0..6 - k {
            c[i] = (c[i + 1] - c[i]) / (x[i + k] - x[i]);
        }
        coef[k] = c[0];
    }
    let mut p = coef[5];
    for k in (0..5).rev() {
        p = coef[k] + (t - x[k]) * p;
    }
    p
}

/// Error-norm tolerances for a scalar step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }
}

/// Result of a single attempted step.
#[derive(Debug, Clone, Copy)]
pub struct StepResult {
    pub y1: f64,
    /// Scaled error estimate; the step is acceptable when `err <= 1`.
    pub err: f64,
    /// Dense output for the step (meaningful only when accepted). Radau steps
    /// produce two half-step segments.
    pub segments: [Option<Segment>; 2],
    /// False when an implicit step failed to converge.
    pub converged: bool,
}

impl StepResult {
    /// Suggested factor for the next step size.
    pub fn step_factor(&self, order: i32) -> f64 {
        if !self.converged {
            return 0.5;
        }
        if self.err == 0.0 {
            return 5.0;
        }
        (0.9 * self.err.powf(-1.0 / f64::from(order))).clamp(0.2, 5.0)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One Dormand–Prince 5(4) step from `(t, y)` with step `h`.
pub fn dopri5_step<S: ScalarOde + ?Sized>(sys: &S, t: f64, y: f64, h: f64, tol: Tolerance) -> StepResult {
    let k1 = sys.rhs(t, y);
    let k2 = sys.rhs(t + C2 * h, y + h * A21 * k1);
    let k3 = sys.rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = sys.rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = sys.rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = sys.rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = sys.rhs(t + h, y1);

    let err_abs = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    let err = (err_abs / tol.scale(y, y1)).abs();

    let ydiff = y1 - y;
    let bspl = h * k1 - ydiff;
    let rcont = [
        y,
        ydiff,
        bspl,
        ydiff - h * k7 - bspl,
        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
    ];
    StepResult {
        y1,
        err: if err.is_finite() { err } else { f64::INFINITY },
        segments: [
            Some(Segment {
                t0: t,
                h,
                kind: DenseKind::Dopri(rcont),
            }),
            None,
        ],
        converged: y1.is_finite(),
    }
}

const SQRT6: f64 = 2.449_489_742_783_178;
const RADAU_C: [f64; 2] = [(4.0 - SQRT6) / 10.0, (4.0 + SQRT6) / 10.0];
const RADAU_A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQRT6) / 360.0,
        (296.0 - 169.0 * SQRT6) / 1800.0,
        (-2.0 + 3.0 * SQRT6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQRT6) / 1800.0,
        (88.0 + 7.0 * SQRT6) / 360.0,
        (-2.0 - 3.0 * SQRT6) / 225.0,
    ],
    [(16.0 - SQRT6) / 36.0, (16.0 + SQRT6) / 36.0, 1.0 / 9.0],
];

/// A single Radau IIA collocation step without error control.
fn radau_raw<S: ScalarOde + ?Sized>(sys: &S, t: f64, y: f64, h: f64, newton_tol: f64) -> Option<f64> {
    let c = [RADAU_C[0], RADAU_C[1], 1.0];
    let mut z = [0.0; 3];
    for _ in 0..25 {
        let mut fz = [0.0; 3];
        let mut jz = [0.0; 3];
        for i in 0..3 {
            fz[i] = sys.rhs(t + c[i] * h, y + z[i]);
            jz[i] = sys.dfdy(t + c[i] * h, y + z[i]);
        }
        // Full Newton on G(Z) = Z - h A F(Z) = 0.
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                acc += RADAU_A[i][j] * fz[j];
                m[i][j] = -h * RADAU_A[i][j] * jz[j];
            }
            m[i][i] += 1.0;
            rhs[i] = -(z[i] - h * acc);
        }
        let dz = solve3(m, rhs)?;
        let mut norm: f64 = 0.0;
        for i in 0..3 {
            z[i] += dz[i];
            norm = norm.max(dz[i].abs());
        }
        if !norm.is_finite() {
            return None;
        }
        if norm <= newton_tol {
            return Some(y + z[2]);
        }
    }
    None
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot = m[col];
            for (a, p) in m[row][col..].iter_mut().zip(&pivot[col..]) {
                *a -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// One Radau IIA step of size `h` with a step-doubling error estimate. The
/// returned solution is the two-half-step value.
pub fn radau5_step<S: ScalarOde + ?Sized>(sys: &S, t: f64, y: f64, h: f64, tol: Tolerance) -> StepResult {
    let newton_tol = 1e-3 * tol.scale(y, y).min(1e-8);
    let failed = StepResult {
        y1: y,
        err: f64::INFINITY,
        segments: [None, None],
        converged: false,
    };
    let Some(y_full) = radau_raw(sys, t, y, h, newton_tol) else {
        return failed;
    };
    let Some(y_half) = radau_raw(sys, t, y, 0.5 * h, newton_tol) else {
        return failed;
    };
    let Some(y2) = radau_raw(sys, t + 0.5 * h, y_half, 0.5 * h, newton_tol) else {
        return failed;
    };
    let err = ((y2 - y_full) / 31.0 / tol.scale(y, y2)).abs();
    let seg = Segment {
        t0: t,
        h,
        kind: DenseKind::Midpoint([
            y,
            y_half,
            y2,
            h * sys.rhs(t, y),
            h * sys.rhs(t + 0.5 * h, y_half),
            h * sys.rhs(t + h, y2),
        ]),
    };
    StepResult {
        y1: y2,
        err: if err.is_finite() { err } else { f64::INFINITY },
        segments: [Some(seg), None],
        converged: true,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) mod gauss {
    pub const NODES_5: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    pub const WEIGHTS_5: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    pub const NODES_8: [f64; 8] = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    pub const WEIGHTS_8: [f64; 8] = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ];

    /// Integrate `f` over `[a, b]` with the given rule.
    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}
