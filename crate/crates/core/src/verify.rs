//! Independent checks on assembled solutions: finite-difference residuals of
//! the field equation, tail limits, the `μ̂` bound sweep and a
//! method-of-lines stability probe.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{circle_wrap, Family, WaveSolution};
use crate::phaseflow::{integrate_z, step_relation_check, KineticCurve};
use crate::shooting::{hat_mu_bounds, solve_hat_mu, DEFAULT_MU_TOL};
use crate::washboard::{Sign, SystemParams};

/// Rectangle of sample points `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub nt: usize,
}

impl GridSpec {
    fn check(&self) -> Result<()> {
        let ok = self.nx >= 1
            && self.nt >= 1
            && self.x_lo.is_finite()
            && self.x_hi.is_finite()
            && self.t_lo.is_finite()
            && self.t_hi.is_finite()
            && self.x_hi >= self.x_lo
            && self.t_hi >= self.t_lo;
        if ok {
            Ok(())
        } else {
            Err(Error::GridOutOfRange {
                reason: format!("invalid grid {self:?}"),
            })
        }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let at = |lo: f64, hi: f64, n: usize, k: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        (0..self.nt)
            .flat_map(|j| {
                (0..self.nx).map(move |i| {
                    (
                        at(self.x_lo, self.x_hi, self.nx, i),
                        at(self.t_lo, self.t_hi, self.nt, j),
                    )
                })
            })
            .collect()
    }
}

/// A window around the interesting part of each family.
pub fn default_grid(solution: &WaveSolution) -> GridSpec {
    let lf = solution.lorentz_factor();
    let (x_lo, x_hi) = match solution.family {
        Family::Constant => (0.0, 1.0),
        Family::Array | Family::Antiarray => (0.0, 2.0 * solution.x_period.unwrap_or(1.0)),
        Family::Soliton | Family::Antisoliton => (-10.0 * lf, 10.0 * lf),
        Family::HalfArray | Family::AntiHalfArray => (-10.0 * lf, 30.0 * lf),
    };
    GridSpec {
        x_lo: x_lo + solution.phase_x0,
        x_hi: x_hi + solution.phase_x0,
        nx: 41,
        t_lo: 0.0,
        t_hi: 1.0,
        nt: 5,
    }
}

/// Steps used for the convergence order.
pub const DEFAULT_STEPS: [f64; 3] = [0.04, 0.02, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: GridSpec,
    /// `h_x = h_t` for each refinement level.
    pub steps: Vec<f64>,
    pub max_residuals: Vec<f64>,
    /// `log2` ratios of consecutive residuals.
    pub orders: Vec<f64>,
    /// Order from the two finest levels; absent when the residual vanishes.
    pub observed_order: Option<f64>,
    pub max_residual: f64,
}

fn residual_at(solution: &WaveSolution, x: f64, t: f64, h: f64) -> Result<f64> {
    let phi = |x: f64, t: f64| {
        solution
            .map_to_xt(x, t)
            .map(|p| p.phi)
            .map_err(|e| Error::GridOutOfRange { reason: e.to_string() })
    };
    let c = phi(x, t)?;
    let tp = phi(x, t + h)?;
    let tm = phi(x, t - h)?;
    let xp = phi(x + h, t)?;
    let xm = phi(x - h, t)?;
    let p = &solution.params;
    let h2 = h * h;
    Ok(((tp - 2.0 * c + tm) - (xp - 2.0 * c + xm)) / h2 + c.sin() + p.alpha * (tp - tm) / (2.0 * h) + p.gamma)
}

/// Largest centred-difference residual of the field equation over the grid.
pub fn pde_residual(solution: &WaveSolution, grid: &GridSpec, h: f64) -> Result<f64> {
    grid.check()?;
    if !(h > 0.0) {
        return Err(Error::GridOutOfRange {
            reason: format!("step must be positive, got {h}"),
        });
    }
    let pts = grid.points();
    let vals: Result<Vec<f64>> = pts.par_iter().map(|&(x, t)| residual_at(solution, x, t, h)).collect();
    Ok(vals?.into_iter().fold(0.0, |m, r| m.max(r.abs())))
}

/// Residuals at each step in `steps` and the observed convergence order.
pub fn residual_report(solution: &WaveSolution, grid: &GridSpec, steps: &[f64]) -> Result<ResidualReport> {
    let max_residuals = steps
        .iter()
        .map(|&h| pde_residual(solution, grid, h))
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = max_residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, s)| (r[0] / r[1]).ln() / (s[0] / s[1]).ln())
        .collect();
    let observed_order = orders.last().copied().filter(|o| o.is_finite());
    Ok(ResidualReport {
        grid: *grid,
        steps: steps.to_vec(),
        max_residual: max_residuals.iter().fold(0.0, |m: f64, &r| m.max(r)),
        max_residuals,
        orders,
        observed_order,
    })
}

/// Measured limits and decay rates of a solution's tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub family: Family,
    /// `φ` at the left and right ends of the computed window (`ξ → ∓∞`).
    pub limit_left: Option<f64>,
    pub limit_right: Option<f64>,
    pub expected_left: Option<f64>,
    pub expected_right: Option<f64>,
    pub limit_error: f64,
    /// Exponential approach rates, left and right.
    pub rate_left: Option<f64>,
    pub rate_right: Option<f64>,
    /// `(φ(+∞) - φ(-∞)) / 2π` for solitons, per period for arrays.
    pub winding: Option<f64>,
    /// `max |φ(ξ + Ξ) - φ(ξ) - 2πn|` for arrays.
    pub periodicity_error: Option<f64>,
    pub pass: bool,
}

/// Tolerance on measured tail limits.
pub const LIMIT_TOL: f64 = 1e-6;

fn fit_rate(samples: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d)| *d > 0.0 && d.is_finite())
        .map(|&(x, d)| (x, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Tail limits and approach rates, measured on the computed window.
pub fn asymptotic_check(solution: &WaveSolution) -> Result<AsymptoticReport> {
    let gamma = solution.params.gamma;
    let base = -gamma.min(1.0).asin();
    let mut rep = AsymptoticReport {
        family: solution.family,
        limit_left: None,
        limit_right: None,
        expected_left: None,
        expected_right: None,
        limit_error: 0.0,
        rate_left: None,
        rate_right: None,
        winding: None,
        periodicity_error: None,
        pass: true,
    };
    let Some(profile) = solution.xi_profile() else {
        rep.limit_left = solution.constant_phi;
        rep.limit_right = solution.constant_phi;
        return Ok(rep);
    };
    let (lo, hi) = profile.xi_range();
    let phi = |xi: f64| solution.phi_of_xi(xi);
    let plus = solution.helicity == Sign::Plus;
    match solution.family {
        Family::Soliton | Family::Antisoliton => {
            let (l, r) = (phi(lo)?, phi(hi)?);
            let (el, er) = if plus {
                (base, base + 2.0 * PI)
            } else {
                (base + 2.0 * PI, base)
            };
            rep.limit_left = Some(l);
            rep.limit_right = Some(r);
            rep.expected_left = Some(el);
            rep.expected_right = Some(er);
            rep.limit_error = (l - el).abs().max((r - er).abs());
            rep.winding = Some((r - l) / (2.0 * PI));
            let width = hi - lo;
            let left: Vec<(f64, f64)> = (0..20)
                .map(|k| {
                    let x = lo + width * (0.02 + 0.01 * k as f64);
                    phi(x).map(|p| (x, (p - el).abs()))
                })
                .collect::<Result<_>>()?;
            let right: Vec<(f64, f64)> = (0..20)
                .map(|k| {
                    let x = hi - width * (0.02 + 0.01 * k as f64);
                    phi(x).map(|p| (x, (p - er).abs()))
                })
                .collect::<Result<_>>()?;
            rep.rate_left = fit_rate(&left);
            rep.rate_right = fit_rate(&right).map(|s| -s);
            rep.pass = rep.limit_error <= LIMIT_TOL
                && rep.rate_left.is_some_and(|r| r > 0.0)
                && rep.rate_right.is_some_and(|r| r > 0.0);
        }
        Family::Array | Family::Antiarray => {
            let xi_p = solution.xi_period.ok_or(Error::NotAnArray)?;
            let n = solution.helicity.value();
            let mut err: f64 = 0.0;
            for k in 0..64 {
                let x = lo + xi_p * k as f64 / 64.0;
                err = err.max((phi(x + xi_p)? - phi(x)? - 2.0 * PI * n).abs());
            }
            rep.winding = Some(n);
            rep.periodicity_error = Some(err);
            rep.pass = err <= 1e-8;
        }
        Family::HalfArray | Family::AntiHalfArray => {
            let m = solution.merge.as_ref().ok_or(Error::NotAnArray)?;
            // in the trajectory variable s the saddle is on the left
            let s_lo = if plus { lo } else { -hi };
            let g_s = base + PI;
            let l = solution.trajectory(s_lo)?.0;
            rep.expected_left = Some(base);
            rep.limit_left = Some(l - PI);
            rep.limit_error = (l - g_s).abs();
            let w = m.s_end - s_lo;
            let left: Vec<(f64, f64)> = (0..20)
                .map(|k| {
                    let s = s_lo + (0.002 + 0.001 * k as f64) * w;
                    solution.trajectory(s).map(|(g, _)| (s, (g - g_s).abs()))
                })
                .collect::<Result<_>>()?;
            rep.rate_left = fit_rate(&left);
            // strobed gap to the periodic reference in its asymptotic phase
            let xi_p = solution.xi_period.ok_or(Error::NotAnArray)?;
            let mut gap = Vec::new();
            let mut s = 0.0;
            while s < 0.6 * m.s_end {
                let g = solution.trajectory(s)?.0;
                let r = m.array.eval(s - m.asymptotic_shift)?.g;
                gap.push((s, g - r));
                s += xi_p;
            }
            let positive = gap.iter().all(|&(_, d)| d > 0.0);
            let decreasing = gap.windows(2).all(|w| w[1].1 < w[0].1);
            rep.rate_right = fit_rate(&gap).map(|s| -s);
            rep.winding = Some(solution.helicity.value());
            rep.pass = rep.limit_error <= LIMIT_TOL
                && positive
                && decreasing
                && rep.rate_left.is_some_and(|r| r > 0.0)
                && rep.rate_right.is_some_and(|r| r > 0.0);
        }
        Family::Constant => {}
    }
    Ok(rep)
}

/// One row of the `μ̂` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub gamma: f64,
    pub hat_mu: f64,
    pub lower: f64,
    pub upper: f64,
    /// First-order value `πγ/4`.
    pub mu1: f64,
    pub within_bounds: bool,
    /// `hat_mu` exceeds the previous row's.
    pub increasing: bool,
}

/// `μ̂` with its two-sided bounds on a grid in `(0, 0.999]`, computed in
/// parallel. Rows keep the grid order.
pub fn bounds_sweep(gammas: &[f64]) -> Result<Vec<BoundsRow>> {
    if let Some(&g) = gammas.iter().find(|&&g| !(g > 0.0 && g <= 0.999)) {
        return Err(Error::GammaOutOfRange {
            gamma: g,
            expected: "(0, 0.999]",
        });
    }
    let mus = gammas
        .par_iter()
        .map(|&g| solve_hat_mu(g, DEFAULT_MU_TOL).map(|r| r.mu_star))
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::with_capacity(gammas.len());
    for (k, (&gamma, &hat_mu)) in gammas.iter().zip(&mus).enumerate() {
        let (lower, upper) = hat_mu_bounds(gamma);
        rows.push(BoundsRow {
            gamma,
            hat_mu,
            lower,
            upper,
            mu1: PI * gamma / 4.0,
            within_bounds: lower <= hat_mu && hat_mu <= upper,
            increasing: k == 0 || (hat_mu > mus[k - 1] && gamma > gammas[k - 1]),
        });
    }
    Ok(rows)
}

/// Settings of the method-of-lines probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub amplitude: f64,
    pub horizon: f64,
    pub dx: f64,
    /// `dt / dx`.
    pub courant: f64,
    /// Half-width of the line window around the initial centre.
    pub half_width: f64,
    /// Number of periods on the circle for arrays.
    pub sector: u32,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            amplitude: 0.01,
            horizon: 50.0,
            dx: 0.05,
            courant: 0.5,
            half_width: 30.0,
            sector: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityProbeReport {
    pub family: Family,
    pub amplitude: f64,
    pub horizon: f64,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub on_circle: bool,
    /// `max |φ_num - φ_exact|` at the final time.
    pub drift_linf: f64,
    /// The same against the reference translated by `(v_est - v) T`.
    pub drift_translated: Option<f64>,
    pub velocity: f64,
    pub velocity_estimate: Option<f64>,
    /// Largest deviation from the initial exact profile, at the end over the start.
    pub departure_ratio: f64,
    /// `H(T) - H(0) + α∫∫φ_t²` on circles.
    pub energy_defect: Option<f64>,
    pub finite: bool,
}

struct Mol {
    x: Vec<f64>,
    dx: f64,
    /// Added to the left neighbour of the first node and subtracted from the
    /// right neighbour of the last one on a circle.
    jump: Option<f64>,
}

impl Mol {
    fn laplacian(&self, phi: &[f64], left: f64, right: f64, out: &mut [f64]) {
        let n = phi.len();
        let inv = 1.0 / (self.dx * self.dx);
        for i in 0..n {
            let l = if i == 0 {
                match self.jump {
                    Some(j) => phi[n - 1] - j,
                    None => left,
                }
            } else {
                phi[i - 1]
            };
            let r = if i == n - 1 {
                match self.jump {
                    Some(j) => phi[0] + j,
                    None => right,
                }
            } else {
                phi[i + 1]
            };
            out[i] = (l - 2.0 * phi[i] + r) * inv;
        }
    }

    fn gradient_sq_sum(&self, phi: &[f64], left: f64, right: f64) -> f64 {
        let n = phi.len();
        let mut s = 0.0;
        for i in 0..n {
            let r = if i == n - 1 {
                match self.jump {
                    Some(j) => phi[0] + j,
                    None => right,
                }
            } else {
                phi[i + 1]
            };
            let d = (r - phi[i]) / self.dx;
            s += d * d;
        }
        if self.jump.is_none() {
            let d = (phi[0] - left) / self.dx;
            s += d * d;
        }
        s
    }
}

/// Evolve the perturbed solution with a second-order leapfrog scheme and
/// report how far it drifts from the exact travelling wave.
pub fn stability_probe(solution: &WaveSolution, opts: &ProbeOptions) -> Result<StabilityProbeReport> {
    if !(opts.dx > 0.0 && opts.horizon > 0.0) {
        return Err(Error::GridOutOfRange {
            reason: "dx and horizon must be positive".into(),
        });
    }
    let dt = opts.courant * opts.dx;
    if !(opts.courant > 0.0) || dt > opts.dx {
        return Err(Error::CflViolation { dt, dx: opts.dx });
    }
    let p = solution.params;
    let on_circle = solution.family.is_array();
    // on a circle dx is adjusted so that the nodes tile the length exactly
    let (x_lo, n, dx, jump) = if on_circle {
        let w = circle_wrap(solution, opts.sector.max(1))?;
        let n = (w.length / opts.dx).round().max(8.0) as usize;
        (solution.phase_x0, n, w.length / n as f64, Some(w.jump))
    } else {
        let n = (2.0 * opts.half_width / opts.dx).round() as usize + 1;
        (solution.phase_x0 - opts.half_width, n, opts.dx, None)
    };
    let dt = opts.courant * dx;
    let mol = Mol {
        x: (0..n).map(|i| x_lo + dx * i as f64).collect(),
        dx,
        jump,
    };
    let exact = |t: f64| -> Result<Vec<(f64, f64)>> {
        mol.x
            .iter()
            .map(|&x| solution.map_to_xt(x, t).map(|q| (q.phi, q.phi_t)))
            .collect()
    };
    let boundary = |t: f64| -> Result<(f64, f64)> {
        if on_circle {
            return Ok((0.0, 0.0));
        }
        Ok((
            solution.map_to_xt(x_lo - dx, t)?.phi,
            solution.map_to_xt(x_lo + dx * n as f64, t)?.phi,
        ))
    };
    let init = exact(0.0)?;
    let width = if on_circle {
        dx * n as f64
    } else {
        2.0 * opts.half_width
    };
    let centre = x_lo + if on_circle { 0.5 * width } else { opts.half_width };
    let bump = |x: f64| {
        if on_circle {
            (2.0 * PI * (x - x_lo) / width).sin()
        } else {
            1.0 / ((x - centre) / 2.0).cosh()
        }
    };
    let mut prev: Vec<f64> = init.iter().map(|q| q.0).collect();
    let phi0_exact = prev.clone();
    for (v, &x) in prev.iter_mut().zip(&mol.x) {
        *v += opts.amplitude * bump(x);
    }
    let start_dev = prev
        .iter()
        .zip(&phi0_exact)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let steps = (opts.horizon / dt).ceil() as usize;
    let mut lap = vec![0.0; n];
    let (bl, br) = boundary(0.0)?;
    mol.laplacian(&prev, bl, br, &mut lap);
    let mut cur: Vec<f64> = (0..n)
        .map(|i| {
            let vt = init[i].1;
            let acc = lap[i] - prev[i].sin() - p.alpha * vt - p.gamma;
            prev[i] + dt * vt + 0.5 * dt * dt * acc
        })
        .collect();
    let energy = |phi: &[f64], phi_prev: &[f64], l: f64, r: f64| -> f64 {
        let kin: f64 = phi
            .iter()
            .zip(phi_prev)
            .map(|(a, b)| 0.5 * ((a - b) / dt).powi(2))
            .sum();
        let pot: f64 = phi.iter().map(|&f| p.gamma * f - f.cos()).sum();
        dx * (kin + pot + 0.5 * mol.gradient_sq_sum(phi, l, r))
    };
    let h_start = energy(&cur, &prev, bl, br);
    let mut dissipated = 0.0;
    let mut means = Vec::new();
    let alpha_term = 0.5 * p.alpha * dt;
    let mut next = vec![0.0; n];
    let mut t = dt;
    for step in 1..steps {
        let (l, r) = boundary(t)?;
        mol.laplacian(&cur, l, r, &mut lap);
        for i in 0..n {
            let f = lap[i] - cur[i].sin() - p.gamma;
            next[i] = (2.0 * cur[i] - (1.0 - alpha_term) * prev[i] + dt * dt * f) / (1.0 + alpha_term);
        }
        let rate: f64 = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| ((a - b) / (2.0 * dt)).powi(2))
            .sum();
        dissipated += p.alpha * rate * dx * dt;
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        t += dt;
        if step % 20 == 0 {
            means.push((t, cur.iter().sum::<f64>() * dx));
        }
    }
    let finite = cur.iter().all(|v| v.is_finite());
    let (l, r) = boundary(t)?;
    let h_end = energy(&cur, &prev, l, r);
    let ref_end = exact(t)?;
    let drift_linf = cur
        .iter()
        .zip(&ref_end)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b.0).abs()));

    // d/dt ∫φ = -v [φ]_jump for a travelling wave
    let total_jump = match (jump, solution.family) {
        (Some(j), _) => Some(j),
        (None, Family::Soliton | Family::Antisoliton) => Some(2.0 * PI * solution.helicity.value()),
        _ => None,
    };
    let velocity_estimate = total_jump.and_then(|j| {
        let half: Vec<&(f64, f64)> = means.iter().filter(|m| m.0 >= 0.5 * t).collect();
        let (a, b) = (half.first()?, half.last()?);
        (b.0 > a.0).then(|| -(b.1 - a.1) / (b.0 - a.0) / j)
    });
    let drift_translated = match velocity_estimate {
        Some(ve) => {
            let delta = (ve - p.v) * t;
            let mut m: f64 = 0.0;
            for (i, &x) in mol.x.iter().enumerate() {
                m = m.max((cur[i] - solution.map_to_xt(x - delta, t)?.phi).abs());
            }
            Some(m)
        }
        None => None,
    };
    let end_dev = cur
        .iter()
        .zip(&ref_end)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b.0).abs()));
    Ok(StabilityProbeReport {
        family: solution.family,
        amplitude: opts.amplitude,
        horizon: t,
        dx,
        dt,
        steps,
        on_circle,
        drift_linf,
        drift_translated,
        velocity: p.v,
        velocity_estimate,
        departure_ratio: if start_dev > 0.0 { end_dev / start_dev } else { end_dev },
        energy_defect: on_circle.then_some(h_end - h_start + dissipated),
        finite,
    })
}

/// Outcome of one randomized property suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySuite {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest value of the checked quantity over all cases; a case fails
    /// when it exceeds `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub first_failure: Option<String>,
}

impl PropertySuite {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
            first_failure: None,
        }
    }

    fn record(&mut self, value: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(value);
        if !(value <= self.tolerance) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub suites: Vec<PropertySuite>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(PropertySuite::passed)
    }
}

/// Pointwise tolerance for the ordering suites.
pub const ORDER_TOL: f64 = 1e-10;
/// Bound on the step-relation residual.
pub const STEP_TOL: f64 = 1e-8;
const PROP_SPAN: f64 = 4.0 * PI;
const MAX_DRAWS: usize = 50;

fn random_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.random_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

fn both_ways(g0: f64, z0: f64, params: SystemParams) -> Result<(KineticCurve, KineticCurve)> {
    Ok((
        integrate_z(g0, z0, params, Sign::Plus, PROP_SPAN)?,
        integrate_z(g0, z0, params, Sign::Minus, PROP_SPAN)?,
    ))
}

// max of f(b) - f(a) on the nodes of both curves in (lo, hi), away from the
// common start. Negative when `a > b` holds strictly.
fn order_violation(
    a: &KineticCurve,
    b: &KineticCurve,
    lo: f64,
    hi: f64,
    g0: f64,
    f: impl Fn(&KineticCurve, f64) -> f64,
) -> f64 {
    a.g_grid()
        .iter()
        .chain(b.g_grid())
        .filter(|&&g| g > lo && g < hi && (g - g0).abs() > 1e-9)
        .map(|&g| f(b, g) - f(a, g))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn prop_initial_energy(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertySuite> {
    let mut suite = PropertySuite::new("initial_energy_monotone", ORDER_TOL);
    let z = |c: &KineticCurve, g: f64| c.z_at(g).unwrap_or(f64::NAN);
    for _ in 0..cases {
        let gamma = rng.random_range(0.0..0.9);
        let mu = rng.random_range(0.0..1.0);
        let g0 = rng.random_range(-PI..PI);
        let z02 = rng.random_range(0.01..1.0);
        let z01 = z02 + rng.random_range(0.01..1.0);
        let params = SystemParams::reduced(gamma, mu, random_sign(rng));
        let (f1, b1) = both_ways(g0, z01, params)?;
        let (f2, b2) = both_ways(g0, z02, params)?;
        let hi = f1.domain().1.min(f2.domain().1);
        let lo = b1.domain().0.max(b2.domain().0);
        let mut v = order_violation(&f1, &f2, g0, hi, g0, z).max(order_violation(&b1, &b2, lo, g0, g0, z));
        v = v.max(f2.domain().1 - f1.domain().1);
        v = v.max(b1.domain().0 - b2.domain().0);
        suite.record(v, || {
            format!(
                "gamma={gamma} mu={mu} g0={g0} z0=({z01}, {z02}) eps={:?}",
                params.epsilon
            )
        });
    }
    Ok(suite)
}

fn prop_parameter_order(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertySuite> {
    let mut suite = PropertySuite::new("mu_gamma_monotone", ORDER_TOL);
    let u = |c: &KineticCurve, g: f64| c.u_at(g).unwrap_or(f64::NAN);
    for _ in 0..cases {
        let eps = random_sign(rng);
        let mut mu = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        mu.sort_by(f64::total_cmp);
        // γ1 ε ≥ γ2 ε; a strict gap in γ makes the ordering strict.
        let mut gamma = [rng.random_range(0.0..0.9), rng.random_range(0.0..0.9)];
        gamma.sort_by(f64::total_cmp);
        if eps == Sign::Plus {
            gamma.swap(0, 1);
        }
        if gamma[0] == gamma[1] && mu[0] == mu[1] {
            continue;
        }
        let g0 = rng.random_range(-PI..PI);
        let z0 = rng.random_range(0.05..2.0);
        let p1 = SystemParams::reduced(gamma[0], mu[0], eps);
        let p2 = SystemParams::reduced(gamma[1], mu[1], eps);
        let (f1, b1) = both_ways(g0, z0, p1)?;
        let (f2, b2) = both_ways(g0, z0, p2)?;
        let hi = f1.domain().1.min(f2.domain().1);
        let lo = b1.domain().0.max(b2.domain().0);
        let v = order_violation(&f1, &f2, g0, hi, g0, u).max(order_violation(&b2, &b1, lo, g0, g0, u));
        suite.record(v, || format!("eps={eps:?} gamma={gamma:?} mu={mu:?} g0={g0} z0={z0}"));
    }
    Ok(suite)
}

fn prop_step_relation(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertySuite> {
    let mut suite = PropertySuite::new("step_relation", STEP_TOL);
    for _ in 0..cases {
        let mut drawn = None;
        for _ in 0..MAX_DRAWS {
            let eps = random_sign(rng);
            let params = SystemParams::reduced(rng.random_range(0.05..0.9), rng.random_range(0.0..1.0), eps);
            let g0 = rng.random_range(-PI..PI);
            let z0 = rng.random_range(0.1..4.0);
            let curve = integrate_z(g0, z0, params, Sign::Plus, 2.0 * PROP_SPAN)?;
            if let Ok(steps) = step_relation_check(&curve, g0) {
                drawn = Some((params, g0, z0, steps));
                break;
            }
        }
        let Some((params, g0, z0, steps)) = drawn else {
            suite.record(f64::INFINITY, || "no curve spanning two periods drawn".into());
            continue;
        };
        let mut v = steps.iter().map(|s| s.residual).fold(0.0, f64::max);
        if params.epsilon == Sign::Minus && steps.iter().any(|s| s.z_next <= s.z_k) {
            v = f64::INFINITY;
        }
        suite.record(v, || format!("{params:?} g0={g0} z0={z0}"));
    }
    Ok(suite)
}

/// Run the three randomized suites on the kinetic-energy flow: ordering in
/// the initial energy, ordering in `(μ, -εγ)` and the per-period step
/// relation, `cases` draws each.
pub fn property_suite(seed: u64, cases: usize) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(PropertyReport {
        seed,
        suites: vec![
            prop_initial_energy(&mut rng, cases)?,
            prop_parameter_order(&mut rng, cases)?,
            prop_step_relation(&mut rng, cases)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_array, build_constant, build_constant_unstable, build_soliton, ArrayParam};

    #[test]
    fn constant_residual_vanishes() {
        let c = build_constant(0.5).unwrap();
        let r = pde_residual(&c, &default_grid(&c), 0.01).unwrap();
        assert_eq!(r, 0.0);
        let rep = residual_report(&c, &default_grid(&c), &DEFAULT_STEPS).unwrap();
        assert_eq!(rep.observed_order, None);
    }

    #[test]
    fn soliton_residual_is_second_order() {
        let s = build_soliton(0.1, 1.0, Sign::Plus).unwrap();
        let rep = residual_report(&s, &default_grid(&s), &DEFAULT_STEPS).unwrap();
        let o = rep.observed_order.unwrap();
        assert!((1.9..=2.1).contains(&o), "{rep:?}");
        assert!(pde_residual(&s, &default_grid(&s), 1e-3).unwrap() <= 1e-5);
    }

    #[test]
    fn soliton_limits() {
        let s = build_soliton(0.1, 1.0, Sign::Plus).unwrap();
        let r = asymptotic_check(&s).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.winding.unwrap() - 1.0).abs() < 1e-6);
        let a = build_soliton(0.1, 1.0, Sign::Minus).unwrap();
        let r = asymptotic_check(&a).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.winding.unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn sweep_rows() {
        let rows = bounds_sweep(&[0.05, 0.3, 0.6]).unwrap();
        assert!(rows.iter().all(|r| r.within_bounds && r.increasing));
        assert!((rows[0].hat_mu / 0.05 - PI / 4.0).abs() <= 0.05 * PI / 4.0);
        assert!(bounds_sweep(&[1.0]).is_err());
    }

    #[test]
    fn probe_cfl() {
        let c = build_constant(0.2).unwrap();
        let opts = ProbeOptions {
            courant: 1.5,
            ..Default::default()
        };
        assert!(matches!(stability_probe(&c, &opts), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn probe_array_unperturbed() {
        let a = build_array(0.5, 1.0, Sign::Plus, ArrayParam::ZM(0.5)).unwrap();
        let opts = ProbeOptions {
            amplitude: 0.0,
            horizon: 50.0,
            ..Default::default()
        };
        let r = stability_probe(&a, &opts).unwrap();
        assert!(r.finite);
        assert!(r.drift_linf < 0.05, "{r:?}");
        assert!(r.energy_defect.unwrap().abs() < 0.05, "{r:?}");
    }

    #[test]
    fn probe_soliton_and_unstable_constant() {
        let s = build_soliton(0.1, 1.0, Sign::Plus).unwrap();
        let r = stability_probe(&s, &ProbeOptions::default()).unwrap();
        let ve = r.velocity_estimate.unwrap();
        assert!((ve - s.velocity()).abs() <= 0.05 * s.velocity(), "{r:?}");
        let u = build_constant_unstable(0.2, true).unwrap();
        let opts = ProbeOptions {
            amplitude: 1e-4,
            horizon: 10.0,
            ..Default::default()
        };
        let r = stability_probe(&u, &opts).unwrap();
        assert!(r.departure_ratio > 10.0, "{r:?}");
    }

    #[test]
    fn property_suites_hold_for_fixed_seed() {
        let report = property_suite(7, 100).unwrap();
        for suite in &report.suites {
            assert!(suite.passed(), "{suite:?}");
            assert!(suite.cases >= 95);
        }
    }
}
