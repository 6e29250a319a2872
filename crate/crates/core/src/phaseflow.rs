//! The first-order reduction of the travelling-wave problem.
//!
//! Along a monotone piece of trajectory the velocity is a function of the
//! angle, and the kinetic energy `z = u²/2` obeys
//!
//! ```text
//! z_g = γ - sin g - εμ √(2z).
//! ```
//!
//! [`integrate_z`] solves this with dense output, [`volterra_residual`] checks
//! a solution against the equivalent integral form, [`quadrature_xi`] recovers
//! the wave coordinate `ξ = ε∫ dg/√(2z)` and [`loop_integral`] evaluates
//! `I(z, g) = ∫_g^{g+2π} √(2z)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri5_step, gauss, quintic_hermite, radau5_step, DenseKind, ScalarOde, Segment, Tolerance};
use crate::washboard::{maximum_point, potential, Sign, SystemParams};

/// How a curve ends on either side of its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    /// `z → 0` at a maximum of the potential.
    SaddleTouch,
    /// `z → 0` at a regular point: the particle turns around.
    ZeroCrossing,
    /// The requested span was exhausted.
    Truncated,
    /// `z` exceeded the blow-up cap.
    Unbounded,
}

/// Separatrix handling at the initial point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Launch {
    /// Separatrix launch iff `z0 = 0` at a maximum of the potential.
    Auto,
    /// Demand a separatrix launch; fails away from a maximum.
    Separatrix,
}

/// Integrator settings for [`integrate_z_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Offset `δ` of the first integrated point from a saddle.
    pub launch_offset: f64,
    /// Distance below which a maximum counts as reached.
    pub reach_tol: f64,
    /// Energy below which a reached maximum counts as touched.
    pub touch_energy: f64,
    pub blowup_cap: f64,
    pub max_steps: usize,
    pub max_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            launch_offset: 1e-6,
            reach_tol: 1e-9,
            touch_energy: 1e-12,
            blowup_cap: 1e6,
            max_steps: 2_000_000,
            max_step: 0.1,
        }
    }
}

impl FlowOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

// Leave the velocity form once |u| or the distance from the saddle exceeds these.
const U_SWITCH: f64 = 0.05;
const ETA_SWITCH: f64 = 0.5;
const LOCAL_FRACTION: f64 = 0.02;

/// The maximum `g_k^M` nearest to `g`, if `γ < 1`.
pub(crate) fn nearest_maximum(g: f64, gamma: f64) -> Option<f64> {
    if !(gamma < 1.0) {
        return None;
    }
    let k = ((g + gamma.asin() - PI) / (2.0 * PI)).round() as i64;
    Some(maximum_point(k, gamma))
}

/// Local expansion `u = ση + cη² + dη³` (`η = g - g_s`) of the separatrix
/// that leaves or enters the saddle `g_s` on the side `sign(η)` with `sign(u) = ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SaddleSeries {
    pub g_s: f64,
    pub sigma: f64,
    pub c: f64,
    pub d: f64,
}

impl SaddleSeries {
    pub fn new(g_s: f64, side: f64, eps: Sign, mu: f64, gamma: f64) -> Self {
        let s = (1.0 - gamma * gamma).sqrt();
        let r = (mu * mu + 4.0 * s).sqrt();
        let sigma = if side * eps.value() > 0.0 {
            2.0 * s / (mu + r)
        } else {
            -(mu + r) / 2.0
        };
        let c = 0.5 * gamma / (3.0 * sigma + mu);
        let d = -(2.0 * c * c + s / 6.0) / (4.0 * sigma + mu);
        Self { g_s, sigma, c, d }
    }

    pub fn u(&self, g: f64) -> f64 {
        let eta = g - self.g_s;
        eta * (self.sigma + eta * (self.c + eta * self.d))
    }
}

/// Local expansion `z = Aη - (2/3)m√(2A)η^{3/2} + (B/2 + m²/3)η²` of the
/// solution leaving a regular zero of `z` at `g0`, with `η = |g - g0|`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TurningSeries {
    g0: f64,
    a1: f64,
    a32: f64,
    a2: f64,
}

impl TurningSeries {
    fn new(g0: f64, d: f64, params: &SystemParams) -> Self {
        let a = d * (params.gamma - g0.sin());
        let b = -g0.cos();
        let m = d * params.epsilon.value() * params.mu;
        Self {
            g0,
            a1: a,
            a32: -2.0 / 3.0 * m * (2.0 * a).sqrt(),
            a2: 0.5 * b + m * m / 3.0,
        }
    }

    fn z(&self, g: f64) -> f64 {
        let eta = (g - self.g0).abs();
        (eta * (self.a1 + self.a32 * eta.sqrt() + self.a2 * eta)).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StartSeries {
    Saddle(SaddleSeries),
    Turning(TurningSeries),
}

impl StartSeries {
    fn z(&self, g: f64) -> f64 {
        match self {
            StartSeries::Saddle(s) => {
                let u = s.u(g);
                0.5 * u * u
            }
            StartSeries::Turning(t) => t.z(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Velocity,
    Energy,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    seg: Segment,
    var: Var,
}

impl Piece {
    fn z(&self, g: f64) -> f64 {
        let y = self.seg.eval(g);
        match self.var {
            Var::Velocity => 0.5 * y * y,
            Var::Energy => y.max(0.0),
        }
    }

    fn lo(&self) -> f64 {
        self.seg.bounds().0
    }
}

struct EnergyFlow {
    gamma: f64,
    mu_eps: f64,
}

impl ScalarOde for EnergyFlow {
    fn rhs(&self, g: f64, z: f64) -> f64 {
        self.gamma - g.sin() - self.mu_eps * (2.0 * z.max(0.0)).sqrt()
    }

    fn dfdy(&self, _g: f64, z: f64) -> f64 {
        -self.mu_eps / (2.0 * z.max(1e-300)).sqrt()
    }
}

struct VelocityFlow {
    gamma: f64,
    mu: f64,
}

impl ScalarOde for VelocityFlow {
    fn rhs(&self, g: f64, u: f64) -> f64 {
        (self.gamma - g.sin()) / u - self.mu
    }

    fn dfdy(&self, g: f64, u: f64) -> f64 {
        -(self.gamma - g.sin()) / (u * u)
    }
}

enum Stop {
    Reached,
    ZeroCrossing,
    Blowup,
}

struct Trace {
    pieces: Vec<Piece>,
    end_g: f64,
    stop: Stop,
}

struct DriveStart {
    g: f64,
    y: f64,
    var: Var,
    h: f64,
    launch_g: f64,
}

fn drive(params: &SystemParams, start: DriveStart, d: f64, g_target: f64, opts: &FlowOptions) -> Result<Trace> {
    let ef = EnergyFlow {
        gamma: params.gamma,
        mu_eps: params.mu * params.epsilon.value(),
    };
    let vf = VelocityFlow {
        gamma: params.gamma,
        mu: params.mu,
    };
    let eps = params.epsilon.value();
    // Local errors are held well below the requested global tolerance.
    let (rtol, atol) = (LOCAL_FRACTION * opts.rtol, LOCAL_FRACTION * opts.atol);
    let tol_z = Tolerance::new(rtol, atol);
    let tol_u = Tolerance::new(rtol, atol.min(1e-16));

    let DriveStart {
        mut g,
        mut y,
        mut var,
        mut h,
        launch_g,
    } = start;
    let mut pieces = Vec::new();
    let mut stiff = false;
    let mut count = 0usize;
    let mut steps = 0usize;

    loop {
        let remaining = d * (g_target - g);
        if remaining <= 4.0 * f64::EPSILON * (1.0 + g.abs()) {
            return Ok(Trace {
                pieces,
                end_g: g,
                stop: Stop::Reached,
            });
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration(format!("step limit reached at g = {g}")));
        }
        if var == Var::Energy && y <= 0.0 && d * ef.rhs(g, 0.0) <= 0.0 {
            return Ok(Trace {
                pieces,
                end_g: g,
                stop: Stop::ZeroCrossing,
            });
        }

        let mut hs = h.min(opts.max_step);
        let last = hs >= 0.999 * remaining;
        if last {
            hs = remaining;
        }
        let (sys, tol): (&dyn ScalarOde, Tolerance) = match var {
            Var::Energy => (&ef, tol_z),
            Var::Velocity => (&vf, tol_u),
        };

        let (res, order) = if stiff {
            (radau5_step(sys, g, y, d * hs, tol), 6)
        } else {
            (dopri5_step(sys, g, y, d * hs, tol), 5)
        };

        if var == Var::Velocity && res.converged && !(res.y1 * eps > 0.0) {
            // the velocity form breaks down as u reaches 0
            y = 0.5 * y * y;
            var = Var::Energy;
            h = hs * 0.5;
            continue;
        }
        if !(res.converged && res.err <= 1.0) {
            h = hs * res.step_factor(order).min(0.9);
            if h < 1e-15 * (1.0 + g.abs()) {
                return Err(Error::Integration(format!("step size underflow at g = {g}")));
            }
            continue;
        }

        for seg in res.segments.iter().flatten() {
            if var == Var::Energy && seg.y1() < 0.0 {
                let root = zero_of_segment(seg);
                pieces.push(Piece { seg: *seg, var });
                return Ok(Trace {
                    pieces,
                    end_g: root,
                    stop: Stop::ZeroCrossing,
                });
            }
            pieces.push(Piece { seg: *seg, var });
        }
        let stiffness = sys.dfdy(g, y).abs() * hs;
        let vote = if stiff { stiffness < 0.5 } else { stiffness > 1.0 };
        count = if vote { count + 1 } else { count.saturating_sub(1) };
        if count >= 8 {
            stiff = !stiff;
            count = 0;
        }
        g = if last { g_target } else { g + d * hs };
        y = res.y1;
        if var == Var::Energy && y > opts.blowup_cap {
            return Ok(Trace {
                pieces,
                end_g: g,
                stop: Stop::Blowup,
            });
        }
        if var == Var::Velocity && (y.abs() >= U_SWITCH || (g - launch_g).abs() >= ETA_SWITCH) {
            y = 0.5 * y * y;
            var = Var::Energy;
        }
        h = hs * res.step_factor(order);
    }
}

/// First sign change of the dense output on a step whose end value is negative.
fn zero_of_segment(seg: &Segment) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if seg.eval_theta(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    seg.t0 + lo * seg.h
}

/// A solution `z(g)` of the kinetic-energy equation on a closed interval,
/// with dense evaluation and endpoint classification.
#[derive(Debug, Clone)]
pub struct KineticCurve {
    params: SystemParams,
    g0: f64,
    z0: f64,
    lo: f64,
    hi: f64,
    pieces: Vec<Piece>,
    launch: Option<(StartSeries, f64, f64)>,
    endpoint_left: EndpointKind,
    endpoint_right: EndpointKind,
    g_grid: Vec<f64>,
    z_values: Vec<f64>,
    e_values: Vec<f64>,
}

impl KineticCurve {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Initial point of the integration.
    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn endpoint_left(&self) -> EndpointKind {
        self.endpoint_left
    }

    pub fn endpoint_right(&self) -> EndpointKind {
        self.endpoint_right
    }

    /// Accepted-step nodes, strictly increasing.
    pub fn g_grid(&self) -> &[f64] {
        &self.g_grid
    }

    pub fn z_values(&self) -> &[f64] {
        &self.z_values
    }

    /// Total energy `e = z + U` at the grid nodes.
    pub fn e_values(&self) -> &[f64] {
        &self.e_values
    }

    pub fn contains(&self, g: f64) -> bool {
        g >= self.lo && g <= self.hi
    }

    /// Dense `z(g)`; `None` outside the domain.
    pub fn z_at(&self, g: f64) -> Option<f64> {
        if !self.contains(g) {
            return None;
        }
        Some(self.z_unchecked(g))
    }

    /// Signed velocity `u = ε√(2z)`.
    pub fn u_at(&self, g: f64) -> Option<f64> {
        self.z_at(g).map(|z| self.params.epsilon.value() * (2.0 * z).sqrt())
    }

    fn z_unchecked(&self, g: f64) -> f64 {
        if let Some((series, a, b)) = &self.launch {
            if g >= *a && g <= *b {
                return series.z(g);
            }
        }
        if self.pieces.is_empty() {
            return self.z0;
        }
        let idx = self.pieces.partition_point(|p| p.lo() <= g);
        let piece = &self.pieces[idx.saturating_sub(1)];
        piece.z(g)
    }

    /// Build a curve from tabulated `(g, z, z_g)` data with cubic Hermite
    /// interpolation. Mainly useful for synthetic test curves.
    pub fn tabulated(params: SystemParams, g: &[f64], z: &[f64], dz: &[f64]) -> Result<Self> {
        if g.len() < 2 || g.len() != z.len() || g.len() != dz.len() {
            return Err(Error::InvalidArgument(
                "tabulated curve needs at least two nodes and equal lengths".into(),
            ));
        }
        if g.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("g must be strictly increasing".into()));
        }
        if let Some(&bad) = z.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeInitialEnergy { z0: bad });
        }
        let pieces = g
            .windows(2)
            .zip(z.windows(2).zip(dz.windows(2)))
            .map(|(gw, (zw, dw))| {
                let h = gw[1] - gw[0];
                Piece {
                    seg: Segment {
                        t0: gw[0],
                        h,
                        kind: DenseKind::Hermite([zw[0], zw[1], h * dw[0], h * dw[1]]),
                    },
                    var: Var::Energy,
                }
            })
            .collect();
        let end_kind = |gg: f64, zz: f64| {
            if zz > 0.0 {
                EndpointKind::Truncated
            } else if nearest_maximum(gg, params.gamma).is_some_and(|m| (m - gg).abs() <= 1e-9) {
                EndpointKind::SaddleTouch
            } else {
                EndpointKind::ZeroCrossing
            }
        };
        let n = g.len();
        let mut curve = Self {
            params,
            g0: g[0],
            z0: z[0],
            lo: g[0],
            hi: g[n - 1],
            pieces,
            launch: None,
            endpoint_left: end_kind(g[0], z[0]),
            endpoint_right: end_kind(g[n - 1], z[n - 1]),
            g_grid: Vec::new(),
            z_values: Vec::new(),
            e_values: Vec::new(),
        };
        curve.fill_grid(g.to_vec());
        Ok(curve)
    }

    /// Synthetic curve sampled from `f(g) = (z, z_g)` on `n` uniform intervals.
    pub fn from_fn(params: SystemParams, lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let n = n.max(1);
        let g: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let (z, dz): (Vec<f64>, Vec<f64>) = g.iter().map(|&x| f(x)).unzip();
        Self::tabulated(params, &g, &z, &dz)
    }

    fn fill_grid(&mut self, mut nodes: Vec<f64>) {
        nodes.retain(|g| *g >= self.lo && *g <= self.hi);
        nodes.push(self.lo);
        nodes.push(self.hi);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
        let z: Vec<f64> = nodes.iter().map(|&g| self.z_unchecked(g)).collect();
        let e = nodes
            .iter()
            .zip(&z)
            .map(|(&g, &z)| z + potential(g, self.params.gamma))
            .collect();
        self.g_grid = nodes;
        self.z_values = z;
        self.e_values = e;
    }

    pub(crate) fn set_endpoint_right(&mut self, kind: EndpointKind) {
        self.endpoint_right = kind;
    }

    fn is_zero_crossing_end(&self, g: f64) -> bool {
        (g == self.lo && self.endpoint_left == EndpointKind::ZeroCrossing)
            || (g == self.hi && self.endpoint_right == EndpointKind::ZeroCrossing)
    }

    /// `∫_a^b √(2z)` for `a ≤ b` inside the domain.
    pub(crate) fn integral_sqrt(&self, a: f64, b: f64) -> f64 {
        self.integral_of(a, b, |z| (2.0 * z).sqrt())
    }

    /// `∫_a^b h(z(g)) dg`; square-root endpoint behaviour at turning points
    /// is removed by substitution.
    fn integral_of(&self, a: f64, b: f64, h: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let f = |g: f64| h(self.z_unchecked(g));
        let mut cuts = vec![a];
        let first = self.pieces.partition_point(|p| p.seg.bounds().1 <= a);
        for p in self.pieces[first..].iter().take_while(|p| p.lo() < b) {
            let (pl, ph) = p.seg.bounds();
            for c in [pl, ph] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        if let Some((_, la, lb)) = &self.launch {
            for c in [*la, *lb] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if self.is_zero_crossing_end(x1) {
                let t1 = (x1 - x0).sqrt();
                total += adaptive(&|t: f64| 2.0 * t * f(x1 - t * t), 0.0, t1, 0);
            } else if self.is_zero_crossing_end(x0) {
                let t1 = (x1 - x0).sqrt();
                total += adaptive(&|t: f64| 2.0 * t * f(x0 + t * t), 0.0, t1, 0);
            } else {
                total += adaptive(&f, x0, x1, 0);
            }
        }
        total
    }
}

/// Gauss–Legendre 8 with a 5-point comparison, bisecting where they disagree.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> f64 {
    let q8 = gauss::integrate(f, a, b, &gauss::NODES_8, &gauss::WEIGHTS_8);
    let q5 = gauss::integrate(f, a, b, &gauss::NODES_5, &gauss::WEIGHTS_5);
    if depth >= 16 || (q8 - q5).abs() <= QUAD_TOL * (q8.abs() + (b - a).abs()) {
        return q8;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, depth + 1) + adaptive(f, m, b, depth + 1)
}

const QUAD_TOL: f64 = 1e-13;

/// Integrate `z_g = γ - sin g - εμ√(2z)` from `(g0, z0)` over at most
/// `g_max_span` in `direction`, with default options and automatic launch.
pub fn integrate_z(g0: f64, z0: f64, params: SystemParams, direction: Sign, g_max_span: f64) -> Result<KineticCurve> {
    integrate_z_with(
        g0,
        z0,
        params,
        direction,
        g_max_span,
        Launch::Auto,
        &FlowOptions::default(),
    )
}

pub fn integrate_z_with(
    g0: f64,
    z0: f64,
    params: SystemParams,
    direction: Sign,
    g_max_span: f64,
    launch: Launch,
    opts: &FlowOptions,
) -> Result<KineticCurve> {
    if !(z0 >= 0.0) {
        return Err(Error::NegativeInitialEnergy { z0 });
    }
    params.validate()?;
    if !(g_max_span > 0.0 && g_max_span.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "integration span must be positive and finite, got {g_max_span}"
        )));
    }
    let d = direction.value();
    let gamma = params.gamma;
    let saddle = nearest_maximum(g0, gamma).filter(|m| (g0 - m).abs() <= opts.reach_tol);
    let separatrix = match launch {
        Launch::Separatrix => {
            if saddle.is_none() {
                return Err(Error::SingularLaunchAtNonSaddle { g0 });
            }
            if z0 != 0.0 {
                return Err(Error::InvalidArgument("a separatrix launch needs z0 = 0".into()));
            }
            true
        }
        Launch::Auto => z0 == 0.0 && saddle.is_some(),
    };

    let g_start = if separatrix { saddle.unwrap_or(g0) } else { g0 };
    let g_target = g_start + d * g_max_span;
    let mut launch_series = None;
    let (start, start_kind) = if separatrix {
        let series = SaddleSeries::new(g_start, d, params.epsilon, params.mu, gamma);
        let delta = opts.launch_offset.min(0.5 * g_max_span);
        let g1 = g_start + d * delta;
        launch_series = Some((StartSeries::Saddle(series), g_start.min(g1), g_start.max(g1)));
        (
            DriveStart {
                g: g1,
                y: series.u(g1),
                var: Var::Velocity,
                h: delta,
                launch_g: g_start,
            },
            EndpointKind::SaddleTouch,
        )
    } else if z0 == 0.0 {
        let series = TurningSeries::new(g_start, d, &params);
        if !(series.a1 > 0.0) {
            // the particle cannot move in this direction at all
            let mut curve = KineticCurve {
                params,
                g0: g_start,
                z0,
                lo: g_start,
                hi: g_start,
                pieces: Vec::new(),
                launch: None,
                endpoint_left: EndpointKind::ZeroCrossing,
                endpoint_right: EndpointKind::ZeroCrossing,
                g_grid: Vec::new(),
                z_values: Vec::new(),
                e_values: Vec::new(),
            };
            curve.fill_grid(Vec::new());
            return Ok(curve);
        }
        let delta = opts.launch_offset.min(0.5 * g_max_span);
        let g1 = g_start + d * delta;
        launch_series = Some((StartSeries::Turning(series), g_start.min(g1), g_start.max(g1)));
        (
            DriveStart {
                g: g1,
                y: series.z(g1),
                var: Var::Energy,
                h: delta,
                launch_g: g_start,
            },
            EndpointKind::ZeroCrossing,
        )
    } else {
        (
            DriveStart {
                g: g_start,
                y: z0,
                var: Var::Energy,
                h: 1e-3,
                launch_g: g_start,
            },
            EndpointKind::Truncated,
        )
    };

    let trace = drive(&params, start, d, g_target, opts)?;
    let end_g = trace.end_g;
    let near_max = nearest_maximum(end_g, gamma).is_some_and(|m| (end_g - m).abs() <= opts.reach_tol);
    let mut pieces = trace.pieces;
    let mut curve = KineticCurve {
        params,
        g0: g_start,
        z0,
        lo: g_start.min(end_g),
        hi: g_start.max(end_g),
        pieces: Vec::new(),
        launch: launch_series,
        endpoint_left: start_kind,
        endpoint_right: start_kind,
        g_grid: Vec::new(),
        z_values: Vec::new(),
        e_values: Vec::new(),
    };
    if d < 0.0 {
        pieces.reverse();
    }
    let nodes: Vec<f64> = pieces.iter().flat_map(|p| [p.seg.t0, p.seg.t1()]).collect();
    curve.pieces = pieces;
    let end_z = curve.z_unchecked(end_g);
    let end_kind = match trace.stop {
        Stop::Blowup => EndpointKind::Unbounded,
        Stop::ZeroCrossing if near_max => EndpointKind::SaddleTouch,
        Stop::ZeroCrossing => EndpointKind::ZeroCrossing,
        // z cannot be resolved below the absolute tolerance
        Stop::Reached if near_max && end_z <= opts.touch_energy.max(opts.atol) => EndpointKind::SaddleTouch,
        Stop::Reached => EndpointKind::Truncated,
    };
    if d > 0.0 {
        curve.endpoint_right = end_kind;
    } else {
        curve.endpoint_left = end_kind;
    }
    curve.fill_grid(nodes);
    Ok(curve)
}

/// Largest deviation, over the grid nodes, from the integral form
/// `z(g) = z0 + U(g0) - U(g) - εμ∫_{g0}^g √(2z)`.
pub fn volterra_residual(curve: &KineticCurve) -> f64 {
    let p = &curve.params;
    let g0 = curve.g0;
    let base = curve.z0 + potential(g0, p.gamma);
    let mu_eps = p.mu * p.epsilon.value();
    let grid = &curve.g_grid;
    let i0 = grid.partition_point(|&g| g < g0).min(grid.len() - 1);
    let mut worst: f64 = 0.0;
    let mut check = |g: f64, z: f64, integral: f64| {
        let r = (z - base + potential(g, p.gamma) + mu_eps * integral).abs();
        worst = worst.max(r);
    };
    // rightwards from g0
    let mut acc = 0.0;
    let mut prev = g0;
    for (i, &g) in grid.iter().enumerate().skip(i0) {
        acc += curve.integral_sqrt(prev, g);
        prev = g;
        check(g, curve.z_values[i], acc);
    }
    // leftwards from g0
    let mut acc = 0.0;
    let mut prev = g0;
    for i in (0..i0).rev() {
        let g = grid[i];
        acc -= curve.integral_sqrt(g, prev);
        prev = g;
        check(g, curve.z_values[i], acc);
    }
    worst
}

/// `I(z, g) = ∫_g^{g+2π} √(2z)`.
pub fn loop_integral(curve: &KineticCurve, g: f64) -> Result<f64> {
    let need_hi = g + 2.0 * PI;
    let slack = 1e-12 * (1.0 + need_hi.abs());
    if g < curve.lo - slack || need_hi > curve.hi + slack {
        return Err(Error::DomainTooShort {
            lo: curve.lo,
            hi: curve.hi,
            need_lo: g,
            need_hi,
        });
    }
    Ok(curve.integral_sqrt(g.max(curve.lo), need_hi.min(curve.hi)))
}

/// `∫_a^b dg/√(2z)`: the ξ-time the orbit spends between two angles.
pub fn xi_span(curve: &KineticCurve, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    let slack = 1e-12 * (1.0 + hi.abs());
    if lo < curve.lo - slack || hi > curve.hi + slack {
        return Err(Error::DomainTooShort {
            lo: curve.lo,
            hi: curve.hi,
            need_lo: lo,
            need_hi: hi,
        });
    }
    let (lo, hi) = (lo.max(curve.lo), hi.min(curve.hi));
    if let Some(g) = curve
        .g_grid
        .iter()
        .find(|&&g| g > lo && g < hi && curve.z_unchecked(g) <= 0.0)
    {
        return Err(Error::ZeroEnergyInInterior { g: *g });
    }
    Ok(curve.integral_of(lo, hi, |z| 1.0 / (2.0 * z).sqrt()))
}

/// One term of the period-to-period energy relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResidual {
    pub k: usize,
    pub z_k: f64,
    pub z_next: f64,
    pub loop_integral: f64,
    /// `z(g_{k+1}) - z(g_k)`.
    pub difference: f64,
    /// `|difference - (2πγ - εμ I_k)|`.
    pub residual: f64,
}

/// Check `z(g_{k+1}) - z(g_k) = 2πγ - εμ I_k` with `g_k = g0 + 2kπ` for
/// every period contained in the curve.
pub fn step_relation_check(curve: &KineticCurve, g0: f64) -> Result<Vec<StepResidual>> {
    let slack = 1e-12 * (1.0 + g0.abs());
    let periods = ((curve.hi - g0 + slack) / (2.0 * PI)).floor();
    if g0 < curve.lo - slack || periods < 2.0 {
        return Err(Error::DomainTooShort {
            lo: curve.lo,
            hi: curve.hi,
            need_lo: g0,
            need_hi: g0 + 4.0 * PI,
        });
    }
    let p = &curve.params;
    let mu_eps = p.mu * p.epsilon.value();
    let mut out = Vec::new();
    for k in 0..periods as usize {
        let gk = g0 + 2.0 * PI * k as f64;
        let gn = (gk + 2.0 * PI).min(curve.hi);
        let zk = curve.z_unchecked(gk.max(curve.lo));
        let zn = curve.z_unchecked(gn);
        let ik = loop_integral(curve, gk)?;
        let difference = zn - zk;
        out.push(StepResidual {
            k,
            z_k: zk,
            z_next: zn,
            loop_integral: ik,
            difference,
            residual: (difference - (2.0 * PI * p.gamma - mu_eps * ik)).abs(),
        });
    }
    Ok(out)
}

/// Settings for [`quadrature_xi_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiOptions {
    /// Largest spacing of profile nodes in ξ.
    pub max_dxi: f64,
    /// Largest spacing of profile nodes in g.
    pub max_dg: f64,
    /// Saddle ends are cut off at this distance in g.
    pub reach_tol: f64,
    /// Within this distance of a saddle end the local separatrix expansion
    /// replaces the integrated energy.
    pub near_saddle: f64,
}

impl Default for XiOptions {
    fn default() -> Self {
        Self {
            max_dxi: 0.02,
            max_dg: 0.04,
            reach_tol: 1e-9,
            near_saddle: 1e-3,
        }
    }
}

/// Exponential continuation `g = g_s + η_c e^{σ(ξ - ξ_c)}` beyond a cut-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub xi_c: f64,
    pub g_s: f64,
    pub eta_c: f64,
    pub sigma: f64,
}

impl Tail {
    fn eval(&self, xi: f64) -> ProfilePoint {
        let eta = self.eta_c * (self.sigma * (xi - self.xi_c)).exp();
        ProfilePoint {
            g: self.g_s + eta,
            u: self.sigma * eta,
            acc: self.sigma * self.sigma * eta,
        }
    }
}

/// `g`, `g'` and `g''` at one value of ξ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub g: f64,
    pub u: f64,
    pub acc: f64,
}

/// A trajectory `g(ξ)` sampled on a strictly increasing ξ grid, evaluated by
/// quintic Hermite interpolation of `(g, g', g'')`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveProfile {
    xi: Vec<f64>,
    g: Vec<f64>,
    u: Vec<f64>,
    acc: Vec<f64>,
    origin: (f64, f64),
    low_tail: Option<Tail>,
    high_tail: Option<Tail>,
    /// `(Ξ, Δg)`: `g(ξ + Ξ) = g(ξ) + Δg`.
    period: Option<(f64, f64)>,
}

impl WaveProfile {
    pub(crate) fn from_parts(xi: Vec<f64>, g: Vec<f64>, u: Vec<f64>, acc: Vec<f64>, origin: (f64, f64)) -> Self {
        Self {
            xi,
            g,
            u,
            acc,
            origin,
            low_tail: None,
            high_tail: None,
            period: None,
        }
    }

    pub fn xi_grid(&self) -> &[f64] {
        &self.xi
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u
    }

    pub fn acc_values(&self) -> &[f64] {
        &self.acc
    }

    /// Anchor `(ξ0, g0)`.
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi[0], self.xi[self.xi.len() - 1])
    }

    pub fn low_tail(&self) -> Option<&Tail> {
        self.low_tail.as_ref()
    }

    pub fn high_tail(&self) -> Option<&Tail> {
        self.high_tail.as_ref()
    }

    pub fn period(&self) -> Option<(f64, f64)> {
        self.period
    }

    pub(crate) fn set_period(&mut self, xi_period: f64, dg: f64) {
        self.period = Some((xi_period, dg));
    }

    /// Mirror `ξ → -ξ` (the counter-propagating twin of a profile).
    pub(crate) fn reflected(&self) -> Self {
        let flip = |t: &Tail| Tail {
            xi_c: -t.xi_c,
            sigma: -t.sigma,
            ..*t
        };
        Self {
            xi: self.xi.iter().rev().map(|x| -x).collect(),
            g: self.g.iter().rev().copied().collect(),
            u: self.u.iter().rev().map(|u| -u).collect(),
            acc: self.acc.iter().rev().copied().collect(),
            origin: (-self.origin.0, self.origin.1),
            low_tail: self.high_tail.as_ref().map(flip),
            high_tail: self.low_tail.as_ref().map(flip),
            period: self.period.map(|(p, dg)| (p, -dg)),
        }
    }

    /// True when `eval(xi)` succeeds.
    pub fn covers(&self, xi: f64) -> bool {
        let (lo, hi) = self.xi_range();
        self.period.is_some() || (xi >= lo || self.low_tail.is_some()) && (xi <= hi || self.high_tail.is_some())
    }

    pub fn eval(&self, xi: f64) -> Result<ProfilePoint> {
        let (lo, hi) = self.xi_range();
        if !xi.is_finite() {
            return Err(Error::OutOfProfileRange { xi });
        }
        if xi < lo || xi > hi {
            if let Some((p, dg)) = self.period {
                let n = ((xi - lo) / p).floor();
                let mut x = xi - n * p;
                if x > hi {
                    x = hi;
                }
                let mut pt = self.interp(x.max(lo));
                pt.g += n * dg;
                return Ok(pt);
            }
            let tail = if xi < lo { &self.low_tail } else { &self.high_tail };
            return tail.as_ref().map(|t| t.eval(xi)).ok_or(Error::OutOfProfileRange { xi });
        }
        Ok(self.interp(xi))
    }

    fn interp(&self, xi: f64) -> ProfilePoint {
        let n = self.xi.len();
        if n == 1 {
            return ProfilePoint {
                g: self.g[0],
                u: self.u[0],
                acc: self.acc[0],
            };
        }
        let i = self.xi.partition_point(|&x| x <= xi).clamp(1, n - 1) - 1;
        let h = self.xi[i + 1] - self.xi[i];
        let t = (xi - self.xi[i]) / h;
        let data = [
            self.g[i],
            self.g[i + 1],
            h * self.u[i],
            h * self.u[i + 1],
            h * h * self.acc[i],
            h * h * self.acc[i + 1],
        ];
        let (p, dp, ddp) = quintic_hermite(t, &data);
        ProfilePoint {
            g: p,
            u: dp / h,
            acc: ddp / (h * h),
        }
    }
}

pub fn quadrature_xi(curve: &KineticCurve, g_anchor: f64, xi_anchor: f64) -> Result<WaveProfile> {
    quadrature_xi_with(curve, g_anchor, xi_anchor, &XiOptions::default())
}

/// Recover `ξ(g) = ξ_anchor + ε∫_{g_anchor}^g ds/√(2z)` and sample the
/// inverse function `g(ξ)`.
pub fn quadrature_xi_with(
    curve: &KineticCurve,
    g_anchor: f64,
    xi_anchor: f64,
    opts: &XiOptions,
) -> Result<WaveProfile> {
    let (lo, hi) = curve.domain();
    if !(g_anchor >= lo && g_anchor <= hi) {
        return Err(Error::DomainTooShort {
            lo,
            hi,
            need_lo: g_anchor,
            need_hi: g_anchor,
        });
    }
    let p = *curve.params();
    let eps = p.epsilon;
    let width = hi - lo;
    let end_zone = (0.05_f64).min(0.25 * width);

    let left_saddle =
        (curve.endpoint_left == EndpointKind::SaddleTouch).then(|| SaddleSeries::new(lo, 1.0, eps, p.mu, p.gamma));
    let right_saddle =
        (curve.endpoint_right == EndpointKind::SaddleTouch).then(|| SaddleSeries::new(hi, -1.0, eps, p.mu, p.gamma));
    let left_zero = curve.endpoint_left == EndpointKind::ZeroCrossing;
    let right_zero = curve.endpoint_right == EndpointKind::ZeroCrossing;

    let speed = |g: f64| -> f64 {
        if let Some(s) = &left_saddle {
            if g - lo < opts.near_saddle {
                return s.u(g).abs();
            }
        }
        if let Some(s) = &right_saddle {
            if hi - g < opts.near_saddle {
                return s.u(g).abs();
            }
        }
        (2.0 * curve.z_unchecked(g)).sqrt()
    };

    let mut nodes: Vec<f64> = Vec::new();
    // left end zone
    let mut a = lo;
    if let Some(s) = &left_saddle {
        let q = (s.sigma.abs() * opts.max_dxi).exp();
        let mut eta = opts.reach_tol;
        while eta < end_zone {
            nodes.push(lo + eta);
            eta *= q;
        }
        a = lo + end_zone;
    } else if left_zero && width > 0.0 {
        a = lo + end_zone;
        push_turning_zone(&mut nodes, lo, a, speed(a), opts.max_dxi);
    }
    let mut b = hi;
    let mut right_nodes = Vec::new();
    if let Some(s) = &right_saddle {
        let q = (s.sigma.abs() * opts.max_dxi).exp();
        let mut eta = opts.reach_tol;
        while eta < end_zone {
            right_nodes.push(hi - eta);
            eta *= q;
        }
        b = hi - end_zone;
    } else if right_zero && width > 0.0 {
        b = hi - end_zone;
        push_turning_zone(&mut right_nodes, hi, b, speed(b), opts.max_dxi);
    }
    // interior
    let mut g = a;
    nodes.push(a);
    while g < b {
        let step = opts.max_dg.min(opts.max_dxi * speed(g)).max(1e-12);
        g = (g + step).min(b);
        if b - g < 0.2 * step {
            g = b;
        }
        nodes.push(g);
    }
    nodes.extend(right_nodes);
    nodes.push(g_anchor);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));

    let n = nodes.len();
    let mut speeds = Vec::with_capacity(n);
    for (i, &g) in nodes.iter().enumerate() {
        let s = speed(g);
        let at_end = (i == 0 && (left_zero || g == lo)) || (i == n - 1 && (right_zero || g == hi));
        if !(s > 0.0) && !at_end {
            return Err(Error::ZeroEnergyInInterior { g });
        }
        speeds.push(s);
    }

    // time increments between consecutive nodes
    let inv = |g: f64| 1.0 / speed(g);
    let mut dt = Vec::with_capacity(n - 1);
    for w in nodes.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let val = if right_zero && x1 == hi {
            let t1 = (x1 - x0).sqrt();
            adaptive(&|t: f64| 2.0 * t / speed(x1 - t * t).max(1e-300), 0.0, t1, 0)
        } else if left_zero && x0 == lo {
            let t1 = (x1 - x0).sqrt();
            adaptive(&|t: f64| 2.0 * t / speed(x0 + t * t).max(1e-300), 0.0, t1, 0)
        } else {
            adaptive(&inv, x0, x1, 0)
        };
        dt.push(val);
    }
    let ia = nodes
        .iter()
        .position(|&g| (g - g_anchor).abs() <= 1e-14 * (1.0 + g_anchor.abs()))
        .unwrap_or(0);
    let e = eps.value();
    let mut xi = vec![0.0; n];
    xi[ia] = xi_anchor;
    for i in ia + 1..n {
        xi[i] = xi[i - 1] + e * dt[i - 1];
    }
    for i in (0..ia).rev() {
        xi[i] = xi[i + 1] - e * dt[i];
    }

    let u: Vec<f64> = speeds.iter().map(|s| e * s).collect();
    let acc: Vec<f64> = nodes
        .iter()
        .zip(&u)
        .map(|(&g, &u)| p.gamma - g.sin() - p.mu * u)
        .collect();

    let mut prof = WaveProfile::from_parts(xi, nodes, u, acc, (xi_anchor, g_anchor));
    let tail_left = left_saddle.map(|s| Tail {
        xi_c: prof.xi[0],
        g_s: lo,
        eta_c: prof.g[0] - lo,
        sigma: s.sigma,
    });
    let tail_right = right_saddle.map(|s| Tail {
        xi_c: prof.xi[n - 1],
        g_s: hi,
        eta_c: prof.g[n - 1] - hi,
        sigma: s.sigma,
    });
    if e > 0.0 {
        prof.low_tail = tail_left;
        prof.high_tail = tail_right;
    } else {
        prof.xi.reverse();
        prof.g.reverse();
        prof.u.reverse();
        prof.acc.reverse();
        prof.low_tail = tail_right;
        prof.high_tail = tail_left;
    }
    Ok(prof)
}

/// Nodes `end ± η` with `η` quadratic in the node index, so that ξ is roughly
/// uniform near a turning point where `u ∝ √η`.
fn push_turning_zone(nodes: &mut Vec<f64>, end: f64, inner: f64, u_inner: f64, max_dxi: f64) {
    let zone = (inner - end).abs();
    let extent = 2.0 * zone / u_inner.max(1e-300);
    let m = ((extent / max_dxi).ceil() as usize).clamp(4, 100_000);
    for k in 0..m {
        let t = k as f64 / m as f64;
        nodes.push(end + (inner - end) * t * t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unperturbed() -> SystemParams {
        SystemParams::reduced(0.0, 0.0, Sign::Plus)
    }

    #[test]
    fn conservative_flow_matches_closed_form() {
        let c = integrate_z(0.0, 2.0, unperturbed(), Sign::Plus, 3.0).unwrap();
        assert_abs_diff_eq!(c.z_at(PI / 2.0).unwrap(), 1.0, epsilon = 1e-10);
        for (&g, &z) in c.g_grid().iter().zip(c.z_values()) {
            assert_abs_diff_eq!(z, 1.0 + g.cos(), epsilon = 1e-10);
        }
        assert!(volterra_residual(&c) <= 1e-10);
    }

    #[test]
    fn unperturbed_separatrix_touches_both_saddles() {
        let c = integrate_z(-PI, 0.0, unperturbed(), Sign::Plus, 2.0 * PI).unwrap();
        assert_eq!(c.endpoint_left(), EndpointKind::SaddleTouch);
        assert_eq!(c.endpoint_right(), EndpointKind::SaddleTouch);
        for g in [-3.0, -1.0, 0.0, 0.5, 2.0, 3.1] {
            assert_abs_diff_eq!(c.z_at(g).unwrap(), 1.0 + f64::cos(g), epsilon = 1e-10);
        }
        assert!(volterra_residual(&c) <= 1e-10);
        assert_abs_diff_eq!(loop_integral(&c, -PI).unwrap(), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn weak_damping_passes_the_next_saddle() {
        let p = SystemParams::reduced(0.1, 0.05, Sign::Plus);
        let c = integrate_z(-PI, 0.0, p, Sign::Plus, 2.0 * PI).unwrap();
        let g1 = PI - 0.1f64.asin();
        assert!(c.z_at(g1).unwrap() > 0.0);
        assert!(volterra_residual(&c) <= 1e-8);
    }

    #[test]
    fn strong_damping_turns_back() {
        let p = SystemParams::reduced(0.1, 0.5, Sign::Plus);
        let c = integrate_z(-PI - 0.1f64.asin(), 0.0, p, Sign::Plus, 2.0 * PI).unwrap();
        assert_eq!(c.endpoint_right(), EndpointKind::ZeroCrossing);
        assert!(volterra_residual(&c) <= 1e-8);
        // total energy decreases along the motion
        assert!(c.e_values().windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn separatrix_demand_away_from_saddle_fails() {
        let p = SystemParams::reduced(0.1, 0.1, Sign::Plus);
        let err = integrate_z_with(
            0.3,
            0.0,
            p,
            Sign::Plus,
            1.0,
            Launch::Separatrix,
            &FlowOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::SingularLaunchAtNonSaddle { g0: 0.3 });
        assert!(matches!(
            integrate_z(0.0, -1.0, p, Sign::Plus, 1.0),
            Err(Error::NegativeInitialEnergy { .. })
        ));
        // a regular zero at a non-critical point is a turning point
        let c = integrate_z(0.3, 0.0, p, Sign::Minus, 1.0).unwrap();
        assert_eq!(c.endpoint_right(), EndpointKind::ZeroCrossing);
    }

    #[test]
    fn synthetic_constant_curve() {
        let c = 0.5;
        let curve = KineticCurve::from_fn(unperturbed(), -1.0, 8.0, 16, |_| (c, 0.0)).unwrap();
        assert_abs_diff_eq!(loop_integral(&curve, 0.0).unwrap(), 2.0 * PI, epsilon = 1e-12);
        let prof = quadrature_xi(&curve, 0.0, 0.0).unwrap();
        for (&x, &g) in prof.xi_grid().iter().zip(prof.g_values()) {
            assert_abs_diff_eq!(x, g / (2.0 * c).sqrt(), epsilon = 1e-12);
        }
        assert!(matches!(loop_integral(&curve, 2.0), Err(Error::DomainTooShort { .. })));
    }

    #[test]
    fn unperturbed_profile_is_the_kink() {
        let c = integrate_z(-PI, 0.0, unperturbed(), Sign::Plus, 2.0 * PI).unwrap();
        let prof = quadrature_xi(&c, 0.0, 0.0).unwrap();
        let pt = prof.eval(0.0).unwrap();
        assert_abs_diff_eq!(pt.g, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.u, 2.0, epsilon = 1e-9);
        for xi in [-12.0, -5.0, -1.0, 0.3, 2.0, 7.5, 15.0, 40.0] {
            let exact = 4.0 * f64::exp(xi).atan() - PI;
            assert_abs_diff_eq!(prof.eval(xi).unwrap().g, exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn step_relation_conservative() {
        let p = SystemParams::reduced(0.3, 0.0, Sign::Plus);
        let c = integrate_z(0.0, 2.0, p, Sign::Plus, 5.0 * PI).unwrap();
        let rel = step_relation_check(&c, 0.0).unwrap();
        assert_eq!(rel.len(), 2);
        for r in rel {
            assert_abs_diff_eq!(r.difference, 2.0 * PI * 0.3, epsilon = 1e-9);
        }
    }

    #[test]
    fn step_relation_minus_branch_grows() {
        let p = SystemParams::reduced(0.5, 0.3, Sign::Minus);
        let c = integrate_z(0.0, 1.0, p, Sign::Plus, 8.0 * PI).unwrap();
        let rel = step_relation_check(&c, 0.0).unwrap();
        assert!(rel.len() >= 2);
        for r in &rel {
            assert!(r.residual <= 1e-8, "{r:?}");
            assert!(r.difference > 2.0 * PI * 0.5);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn larger_initial_energy_stays_above(
            gamma in 0.0f64..0.9, mu in 0.0f64..1.0, g0 in -PI..PI,
            z_lo in 0.0f64..1.0, dz in 0.01f64..1.0,
        ) {
            let p = SystemParams::reduced(gamma, mu, Sign::Plus);
            let c1 = integrate_z(g0, z_lo + dz, p, Sign::Plus, 2.0 * PI).unwrap();
            let c2 = integrate_z(g0, z_lo, p, Sign::Plus, 2.0 * PI).unwrap();
            prop_assert!(c1.domain().1 >= c2.domain().1 - 1e-9);
            for &g in c2.g_grid() {
                if let (Some(a), Some(b)) = (c1.z_at(g), c2.z_at(g)) {
                    prop_assert!(a >= b - 1e-9, "g={g} z1={a} z2={b}");
                }
            }
        }

        #[test]
        fn energy_never_increases(gamma in 0.0f64..0.9, mu in 0.01f64..1.0, z0 in 0.1f64..3.0) {
            let p = SystemParams::reduced(gamma, mu, Sign::Plus);
            let c = integrate_z(0.0, z0, p, Sign::Plus, 4.0 * PI).unwrap();
            prop_assert!(c.e_values().windows(2).all(|w| w[1] <= w[0] + 1e-10));
            prop_assert!(volterra_residual(&c) <= 1e-8);
        }
    }
}
