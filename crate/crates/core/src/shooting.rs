//! Shooting solvers for the damping constants of the travelling waves.
//!
//! - [`solve_hat_mu`]: the unique `μ̂(γ)` for which the separatrix leaving one
//!   maximum of the potential lands on the next one (the soliton).
//! - [`solve_check_mu`]: the `μ̌(γ, z_M)` for which the orbit through
//!   `(g0, z_M)` is periodic in `g` (the array).
//! - [`half_array_curve`]: the separatrix at `μ < μ̂` together with the
//!   periodic orbit it merges into.
//! - [`unit_velocity_profile`]: the `v = ±1` branch `αg' = γ - sin g`, `γ > 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::gauss;
use crate::phaseflow::{integrate_z_with, loop_integral, EndpointKind, FlowOptions, KineticCurve, Launch, WaveProfile};
use crate::washboard::{is_gamma_one, maximum_point, Sign, SystemParams};

/// Integrator tolerance used by all shooting runs.
pub const SHOOT_TOL: f64 = 1e-11;

/// Default bracket width at which shooting stops.
pub const DEFAULT_MU_TOL: f64 = 1e-12;

/// Largest γ for which `μ̂` is computed directly.
pub const GAMMA_MAX_DIRECT: f64 = 0.999;

fn shoot_options() -> FlowOptions {
    FlowOptions::with_tolerance(SHOOT_TOL)
}

/// Two-sided bounds `(lower, upper)` on `μ̂(γ)`, `0 ≤ γ ≤ 1`.
pub fn hat_mu_bounds(gamma: f64) -> (f64, f64) {
    let s = (1.0 - gamma * gamma).max(0.0).sqrt();
    let q = (4.0 - 3.0 * gamma * gamma).max(0.0).sqrt();
    let lower = gamma / (q + 2.0 * s).sqrt();
    let upper = gamma * (2.0 / (1.0 + s)).sqrt();
    (lower, upper)
}

/// Outcome of a shooting run.
#[derive(Debug, Clone)]
pub struct ShootResult {
    pub mu_star: f64,
    /// Bracket `(μ_lo, μ_hi)` after every iteration.
    pub bracket_history: Vec<(f64, f64)>,
    /// Kinetic energy over one period at `mu_star`.
    pub curve: KineticCurve,
    /// `I(z, g0)` at `mu_star`.
    pub loop_integral: f64,
    /// `|μ I - 2πγ|`.
    pub balance_residual: f64,
    /// `max |z(g + 2π) - z(g)|` for arrays.
    pub periodicity_residual: Option<f64>,
}

impl ShootResult {
    pub fn iterations(&self) -> usize {
        self.bracket_history.len()
    }
}

fn separatrix(gamma: f64, mu: f64, span: f64) -> Result<KineticCurve> {
    let g0 = maximum_point(0, gamma);
    integrate_z_with(
        g0,
        0.0,
        SystemParams::reduced(gamma, mu, Sign::Plus),
        Sign::Plus,
        span,
        Launch::Separatrix,
        &shoot_options(),
    )
}

/// True when the separatrix at `mu` reaches the next maximum.
fn separatrix_passes(gamma: f64, mu: f64) -> Result<(bool, KineticCurve)> {
    let g1 = maximum_point(1, gamma);
    let curve = separatrix(gamma, mu, 2.0 * PI)?;
    let reached = curve.domain().1 >= g1 - 1e-12 && curve.endpoint_right() != EndpointKind::ZeroCrossing;
    Ok((reached, curve))
}

/// `μ̂(γ)` by bisection on whether the separatrix reaches the next maximum.
pub fn solve_hat_mu(gamma: f64, mu_tol: f64) -> Result<ShootResult> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "(0, 1)",
        });
    }
    let (lower, upper) = hat_mu_bounds(gamma);
    let mut lo = 0.9 * lower;
    let mut hi = 1.1 * upper;
    let (lo_ok, mut lo_curve) = separatrix_passes(gamma, lo)?;
    let (hi_ok, _) = separatrix_passes(gamma, hi)?;
    if !lo_ok || hi_ok {
        return Err(Error::BracketFailure {
            lo,
            hi,
            reason: format!("criterion at ends: reached(lo) = {lo_ok}, reached(hi) = {hi_ok}"),
        });
    }
    let mut history = vec![(lo, hi)];
    while hi - lo > mu_tol.max(4.0 * f64::EPSILON * hi) {
        let mid = 0.5 * (lo + hi);
        let (ok, curve) = separatrix_passes(gamma, mid)?;
        if ok {
            lo = mid;
            lo_curve = curve;
        } else {
            hi = mid;
        }
        history.push((lo, hi));
        if history.len() > 200 {
            return Err(Error::MaxIterExceeded { iterations: 200 });
        }
    }
    lo_curve.set_endpoint_right(EndpointKind::SaddleTouch);
    let g0 = lo_curve.g0();
    let i = loop_integral(&lo_curve, g0)?;
    Ok(ShootResult {
        mu_star: lo,
        bracket_history: history,
        balance_residual: (lo * i - 2.0 * PI * gamma).abs(),
        loop_integral: i,
        curve: lo_curve,
        periodicity_residual: None,
    })
}

/// `μ̂` at γ = 1, where the saddle degenerates, by extrapolation from
/// `γ ≤ 0.999`. Always flagged as extrapolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedHatMu {
    pub gamma: f64,
    pub hat_mu: f64,
    pub extrapolated: bool,
}

/// `μ̂(γ)` for `0 < γ ≤ 1`; the value at γ = 1 is extrapolated from three
/// nearby direct solutions, quadratically in `√(1-γ)`.
pub fn hat_mu_extended(gamma: f64, mu_tol: f64) -> Result<ExtrapolatedHatMu> {
    if gamma < 1.0 && !is_gamma_one(gamma) {
        return Ok(ExtrapolatedHatMu {
            gamma,
            hat_mu: solve_hat_mu(gamma, mu_tol)?.mu_star,
            extrapolated: false,
        });
    }
    if !is_gamma_one(gamma) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "(0, 1]",
        });
    }
    let gs = [0.996, 0.9975, GAMMA_MAX_DIRECT];
    let mut xs = [0.0; 3];
    let mut ys = [0.0; 3];
    for (k, &g) in gs.iter().enumerate() {
        xs[k] = (1.0 - g).sqrt();
        ys[k] = solve_hat_mu(g, mu_tol)?.mu_star;
    }
    // Lagrange polynomial through the three points, evaluated at x = 0
    let mut value = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= xs[j] / (xs[j] - xs[i]);
            }
        }
        value += w * ys[i];
    }
    Ok(ExtrapolatedHatMu {
        gamma: 1.0,
        hat_mu: value,
        extrapolated: true,
    })
}

/// Launch angle of the array shoot: a maximum of the potential for γ < 1 and
/// the point where `sin g = 1` otherwise.
pub fn array_launch_point(gamma: f64) -> f64 {
    if gamma < 1.0 && !is_gamma_one(gamma) {
        maximum_point(0, gamma)
    } else {
        PI / 2.0
    }
}

/// One period of the orbit through `(g0, z_M)`.
fn array_period(gamma: f64, mu: f64, z_m: f64, periods: f64) -> Result<KineticCurve> {
    let mut opts = shoot_options();
    // small launch energies need an absolute tolerance scaled with z_M
    opts.atol = SHOOT_TOL * (100.0 * z_m).min(1.0);
    integrate_z_with(
        array_launch_point(gamma),
        z_m,
        SystemParams::reduced(gamma, mu, Sign::Plus),
        Sign::Plus,
        2.0 * PI * periods,
        Launch::Auto,
        &opts,
    )
}

/// `z(g0 + 2π) - z_M`, continued below `-z_M` when the orbit turns back early.
fn period_defect(gamma: f64, mu: f64, z_m: f64) -> Result<f64> {
    let curve = array_period(gamma, mu, z_m, 1.0)?;
    let target = curve.g0() + 2.0 * PI;
    let (_, hi) = curve.domain();
    if hi >= target - 1e-12 {
        Ok(curve.z_at(hi).unwrap_or(0.0) - z_m)
    } else {
        Ok(-z_m - (target - hi))
    }
}

/// Bracketing root search (Illinois variant of regula falsi). Returns the
/// best abscissa found.
pub(crate) fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    xtol: f64,
    history: &mut Vec<(f64, f64)>,
) -> Result<f64> {
    let mut side = 0i8;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..300 {
        history.push((a.min(b), a.max(b)));
        if (b - a).abs() <= xtol || best.1 == 0.0 {
            return Ok(best.0);
        }
        let mut c = (fa * b - fb * a) / (fa - fb);
        let (lo, hi) = (a.min(b), a.max(b));
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc.abs() < best.1.abs() {
            best = (c, fc);
        }
        if fc == 0.0 {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::MaxIterExceeded { iterations: 300 })
}

/// `max |z(g + 2π) - z(g)|` over one period of a curve covering two periods.
fn periodicity_residual(curve: &KineticCurve) -> f64 {
    let g0 = curve.g0();
    let (_, hi) = curve.domain();
    let n = 256;
    (0..=n)
        .filter_map(|k| {
            let g = g0 + 2.0 * PI * k as f64 / n as f64;
            let g2 = (g + 2.0 * PI).min(hi);
            Some((curve.z_at(g2)? - curve.z_at(g)?).abs())
        })
        .fold(0.0, f64::max)
}

/// `μ̌(γ, z_M)`: the damping for which the orbit through `(g0, z_M)` is
/// periodic.
pub fn solve_check_mu(gamma: f64, z_m: f64, mu_tol: f64) -> Result<ShootResult> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "(0, inf)",
        });
    }
    if !(z_m > 0.0) || !z_m.is_finite() {
        return Err(Error::ZmNonPositive { z_m });
    }
    let mut history = Vec::new();
    let f0 = 2.0 * PI * gamma;
    let mut hi = 10.0_f64;
    if gamma < 1.0 {
        hi = hi.max(hat_mu_bounds(gamma).1);
    }
    if gamma > 1.0 {
        hi = hi.max(2.0 * array_leading_order(gamma, z_m, 1.0).mu);
    }
    let mut fhi = period_defect(gamma, hi, z_m)?;
    let mut doublings = 0;
    while fhi >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::BracketFailure {
                lo: 0.0,
                hi,
                reason: "no sign change while doubling the upper end".into(),
            });
        }
        fhi = period_defect(gamma, hi, z_m)?;
    }
    let mu = illinois(|m| period_defect(gamma, m, z_m), 0.0, f0, hi, fhi, mu_tol, &mut history)?;
    let curve2 = array_period(gamma, mu, z_m, 2.0)?;
    let periodicity = periodicity_residual(&curve2);
    let curve = array_period(gamma, mu, z_m, 1.0)?;
    let i = loop_integral(&curve, curve.g0())?;
    Ok(ShootResult {
        mu_star: mu,
        bracket_history: history,
        balance_residual: (mu * i - 2.0 * PI * gamma).abs(),
        loop_integral: i,
        curve,
        periodicity_residual: Some(periodicity),
    })
}

/// `z_M` of the periodic orbit at a given `μ` (the inverse of `μ̌(γ, ·)`),
/// found as the fixed point of the period map on `log z_M`.
pub fn periodic_energy_for_mu(gamma: f64, mu: f64, z_hint: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "mu",
            value: mu,
            reason: "must be positive".into(),
        });
    }
    let defect = |t: f64| period_defect(gamma, mu, t.exp());
    // the defect decreases in z_M; bracket by expanding geometrically
    let mut a = z_hint.max(1e-300).ln();
    let mut fa = defect(a)?;
    let mut b = a;
    let mut fb = fa;
    let step = if fa > 0.0 { 1.0 } else { -1.0 };
    let mut k = 0;
    while fa * fb > 0.0 {
        a = b;
        fa = fb;
        b += step * (1 + k) as f64;
        fb = defect(b)?;
        k += 1;
        if k > 60 || !(-700.0..=700.0).contains(&b) {
            return Err(Error::BracketFailure {
                lo: a.min(b).exp(),
                hi: a.max(b).exp(),
                reason: format!("no periodic orbit found for mu = {mu}"),
            });
        }
    }
    let mut history = Vec::new();
    let t = illinois(defect, a, fa, b, fb, 1e-13, &mut history)?;
    Ok(t.exp())
}

/// The separatrix at `μ < μ̂` and the periodic orbit it approaches.
#[derive(Debug, Clone)]
pub struct HalfArrayCurve {
    pub mu: f64,
    /// Separatrix from `g0` over the whole span.
    pub zbar: KineticCurve,
    /// One period of the periodic orbit, starting at `g0`.
    pub zcheck: KineticCurve,
    /// `ž(g0)`.
    pub z_m: f64,
    pub zcheck_max: f64,
    /// `(g, z̄(g) - ž(g))` on a uniform grid over the span.
    pub w_samples: Vec<(f64, f64)>,
    /// Fitted exponential decay rate of `|w|` per unit angle.
    pub decay_rate: f64,
    /// Proven lower bound `μ/√(2(ž_max + |w(g0)|))` on the decay rate.
    pub decay_bound: f64,
    /// Angle where `rho_offset` is evaluated (one period after launch).
    pub rho_anchor: f64,
    /// `ρ = ∫ [1/√(2z̄) - 1/√(2ž)]` from `rho_anchor` to infinity.
    pub rho_offset: f64,
}

impl HalfArrayCurve {
    /// `ž(g)` continued periodically.
    pub fn zcheck_at(&self, g: f64) -> f64 {
        let g0 = self.zcheck.g0();
        let t = (g - g0).rem_euclid(2.0 * PI);
        self.zcheck.z_at(g0 + t).unwrap_or(0.0)
    }
}

/// Minimum span, in periods, for the decay fit.
pub const MIN_HALF_ARRAY_PERIODS: f64 = 3.0;

/// Separatrix and periodic reference for the half-array at `0 < μ < μ̂(γ)`.
pub fn half_array_curve(gamma: f64, mu: f64, span_periods: f64) -> Result<HalfArrayCurve> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "(0, 1)",
        });
    }
    if span_periods < MIN_HALF_ARRAY_PERIODS {
        return Err(Error::SpanTooShort {
            periods: span_periods,
            required: MIN_HALF_ARRAY_PERIODS,
        });
    }
    let hat = solve_hat_mu(gamma, 1e-10)?.mu_star;
    if !(mu > 0.0 && mu < hat) {
        return Err(Error::MuNotBelowHatMu { mu, hat_mu: hat });
    }
    let periods = span_periods.floor();
    let zbar = separatrix(gamma, mu, 2.0 * PI * periods)?;
    let g0 = zbar.g0();
    if zbar.domain().1 < g0 + 2.0 * PI * periods - 1e-9 {
        return Err(Error::Integration(
            "the separatrix turned back below the soliton threshold".into(),
        ));
    }
    let z_hint = zbar.z_at(g0 + 2.0 * PI).unwrap_or(1e-3).max(1e-12);
    let z_m = periodic_energy_for_mu(gamma, mu, z_hint)?;
    let zcheck = array_period(gamma, mu, z_m, 1.0)?;

    let zcheck_max = zcheck.z_values().iter().fold(0.0_f64, |m, &v| m.max(v));
    let mut out = HalfArrayCurve {
        mu,
        zbar,
        zcheck,
        z_m,
        zcheck_max,
        w_samples: Vec::new(),
        decay_rate: 0.0,
        decay_bound: 0.0,
        rho_anchor: g0 + 2.0 * PI,
        rho_offset: 0.0,
    };
    let per = 64;
    let n = (periods as usize) * per;
    out.w_samples = (0..=n)
        .map(|k| {
            let g = g0 + 2.0 * PI * k as f64 / per as f64;
            (g, out.zbar.z_at(g).unwrap_or(0.0) - out.zcheck_at(g))
        })
        .collect();
    let w0 = out.w_samples[0].1.abs();
    out.decay_bound = mu / (2.0 * (zcheck_max + w0)).sqrt();

    // fit log|w| on period-strobed samples above the noise level, last 60%
    let strobe: Vec<(f64, f64)> = out
        .w_samples
        .iter()
        .step_by(per)
        .skip(1)
        .filter(|(_, w)| w.abs() > 1e-8)
        .map(|&(g, w)| (g, w.abs().ln()))
        .collect();
    if strobe.len() < 3 {
        return Err(Error::SpanTooShort {
            periods: strobe.len() as f64,
            required: 3.0,
        });
    }
    let skip = (0.4 * strobe.len() as f64).floor() as usize;
    let fit = &strobe[skip.min(strobe.len() - 2)..];
    out.decay_rate = -least_squares_slope(fit);
    out.rho_offset = rho_tail(&out, periods as usize);
    Ok(out)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `∫_{g0+2π}^∞ [1/√(2z̄) - 1/√(2ž)]`, summed per period and closed with a
/// geometric tail.
fn rho_tail(h: &HalfArrayCurve, periods: usize) -> f64 {
    let g0 = h.zbar.g0();
    let f = |g: f64| {
        let a = h.zbar.z_at(g).unwrap_or(0.0);
        let b = h.zcheck_at(g);
        1.0 / (2.0 * a).sqrt() - 1.0 / (2.0 * b).sqrt()
    };
    let mut parts = Vec::new();
    for k in 1..periods {
        let start = g0 + 2.0 * PI * k as f64;
        let m = 64;
        let dg = 2.0 * PI / m as f64;
        let s: f64 = (0..m)
            .map(|j| {
                let a = start + dg * j as f64;
                gauss::integrate(&f, a, a + dg, &gauss::NODES_8, &gauss::WEIGHTS_8)
            })
            .sum();
        parts.push(s);
    }
    let mut total: f64 = parts.iter().sum();
    if parts.len() >= 2 {
        let q = parts[parts.len() - 1] / parts[parts.len() - 2];
        if q > 0.0 && q < 1.0 {
            total += parts[parts.len() - 1] * q / (1.0 - q);
        }
    }
    total
}

/// The `v = ±1` branch for `γ > 1`: `αg' = γ - sin g`, sampled over one
/// period, and its period `Ξ = α∫₀^{2π} ds/(γ - sin s)`.
pub fn unit_velocity_profile(gamma: f64, alpha: f64, samples: usize) -> Result<(WaveProfile, f64)> {
    if !(gamma > 1.0) || is_gamma_one(gamma) {
        return Err(Error::GammaNotAboveOne { gamma });
    }
    if !(alpha > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "alpha",
            value: alpha,
            reason: "must be positive".into(),
        });
    }
    let m = samples.max(16);
    let dg = 2.0 * PI / m as f64;
    let inv = |s: f64| alpha / (gamma - s.sin());
    let mut xi = vec![0.0; m + 1];
    let mut g = vec![0.0; m + 1];
    for k in 0..m {
        let a = dg * k as f64;
        g[k + 1] = a + dg;
        // each interval split in four Gauss pieces
        let mut acc = 0.0;
        for j in 0..4 {
            let s = a + 0.25 * dg * j as f64;
            acc += gauss::integrate(&inv, s, s + 0.25 * dg, &gauss::NODES_8, &gauss::WEIGHTS_8);
        }
        xi[k + 1] = xi[k] + acc;
    }
    g[m] = 2.0 * PI;
    let xi_period = xi[m];
    let u: Vec<f64> = g.iter().map(|&s| (gamma - s.sin()) / alpha).collect();
    let acc: Vec<f64> = g.iter().zip(&u).map(|(&s, &v)| -s.cos() * v / alpha).collect();
    let mut prof = WaveProfile::from_parts(xi, g, u, acc, (0.0, 0.0));
    prof.set_period(xi_period, 2.0 * PI);
    Ok((prof, xi_period))
}

/// Closed-form period of the `v = ±1` branch, `2πα/√(γ²-1)`.
pub fn unit_velocity_period(gamma: f64, alpha: f64) -> f64 {
    2.0 * PI * alpha / (gamma * gamma - 1.0).sqrt()
}

/// Leading-order behaviour of the array for `γ > 1` and small `z_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayLeadingOrder {
    /// `(γ-1)/√(2z_M)`.
    pub mu: f64,
    /// `√(2z_M)·2πγ/(γ-1)`.
    pub loop_integral: f64,
    /// `2π√((γ-1)/(γ+1))/√(2z_M)`, which scales as `1/√z_M`.
    pub xi_period: f64,
    /// `(γ-1)/√(2z_Mα² + (γ-1)²)`.
    pub velocity: f64,
}

pub fn array_leading_order(gamma: f64, z_m: f64, alpha: f64) -> ArrayLeadingOrder {
    let q = (2.0 * z_m).sqrt();
    let d = gamma - 1.0;
    ArrayLeadingOrder {
        mu: d / q,
        loop_integral: q * 2.0 * PI * gamma / d,
        xi_period: 2.0 * PI * (d / (gamma + 1.0)).sqrt() / q,
        velocity: d / (2.0 * z_m * alpha * alpha + d * d).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bounds_at_reference_points() {
        let (lo, hi) = hat_mu_bounds(0.5);
        assert_abs_diff_eq!(lo, 0.26594, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 0.51764, epsilon = 1e-5);
        let (lo, hi) = hat_mu_bounds(1.0);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hat_mu_small_gamma() {
        let r = solve_hat_mu(0.05, 1e-12).unwrap();
        assert!((r.mu_star / 0.05 - PI / 4.0).abs() < 0.05 * PI / 4.0);
        assert!(r.balance_residual <= 1e-8, "{}", r.balance_residual);
    }

    #[test]
    fn check_mu_zero_damping_end() {
        let d = period_defect(0.5, 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(d, PI, epsilon = 1e-8);
    }

    #[test]
    fn check_mu_periodic() {
        let r = solve_check_mu(0.5, 0.2, 1e-12).unwrap();
        assert!(r.periodicity_residual.unwrap() <= 1e-8);
        assert!(r.balance_residual <= 1e-8);
        let z = periodic_energy_for_mu(0.5, r.mu_star, 1.0).unwrap();
        assert_abs_diff_eq!(z, 0.2, epsilon = 1e-8);
    }

    #[test]
    fn unit_velocity_period_matches_closed_form() {
        let (_, xi) = unit_velocity_profile(2f64.sqrt(), 1.0, 64).unwrap();
        assert_abs_diff_eq!(xi, 2.0 * PI, epsilon = 1e-10);
        let (p, xi) = unit_velocity_profile(2.0, 1.0, 64).unwrap();
        assert_abs_diff_eq!(xi, 2.0 * PI / 3f64.sqrt(), epsilon = 1e-10);
        let a = p.eval(0.7).unwrap();
        let b = p.eval(0.7 + xi).unwrap();
        assert_abs_diff_eq!(b.g - a.g, 2.0 * PI, epsilon = 1e-9);
        assert!(p.u_values().iter().all(|&u| u > 0.0));
        assert!(matches!(
            unit_velocity_profile(0.9, 1.0, 64),
            Err(Error::GammaNotAboveOne { .. })
        ));
    }

    #[test]
    fn leading_order_values() {
        let lo = array_leading_order(1.5, 1e-4, 1.0);
        assert_abs_diff_eq!(lo.mu, 35.355, epsilon = 1e-3);
        assert_abs_diff_eq!(lo.velocity, 0.99960, epsilon = 1e-5);
    }
}
