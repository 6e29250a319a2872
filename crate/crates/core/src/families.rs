//! Travelling waves in physical coordinates.
//!
//! A [`WaveSolution`] holds an increasing trajectory `g(s)` of the reduced
//! problem and maps it to the field by
//!
//! ```text
//! φ(x, t) = g(h·ξ) - π,    ξ = (x - x0 - v t) / √(1 - v²),
//! ```
//!
//! with `h = ±1` the helicity. On the `|v| = 1` branch the Lorentz factor is
//! dropped and `ξ = x - x0 - v t`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phaseflow::{quadrature_xi, xi_span, KineticCurve, WaveProfile};
use crate::shooting::{
    array_launch_point, array_leading_order, half_array_curve, hat_mu_extended, illinois, periodic_energy_for_mu,
    solve_check_mu, solve_hat_mu, unit_velocity_profile, ShootResult, DEFAULT_MU_TOL, MIN_HALF_ARRAY_PERIODS,
};
use crate::washboard::{is_gamma_one, maximum_point, Sign, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    Soliton,
    Antisoliton,
    Array,
    Antiarray,
    HalfArray,
    AntiHalfArray,
}

impl Family {
    fn with_helicity(self, h: Sign) -> Self {
        match (self, h) {
            (Family::Soliton, Sign::Minus) => Family::Antisoliton,
            (Family::Array, Sign::Minus) => Family::Antiarray,
            (Family::HalfArray, Sign::Minus) => Family::AntiHalfArray,
            (f, _) => f,
        }
    }

    pub fn is_array(self) -> bool {
        matches!(self, Family::Array | Family::Antiarray)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Soliton => "soliton",
            Family::Antisoliton => "antisoliton",
            Family::Array => "array",
            Family::Antiarray => "antiarray",
            Family::HalfArray => "half_array",
            Family::AntiHalfArray => "anti_half_array",
        }
    }
}

/// `v̌(μ) = μ/√(α² + μ²)`; infinite `μ` (or `α = 0`) gives 1.
pub fn velocity_from_mu(mu: f64, alpha: f64) -> f64 {
    if mu.is_infinite() {
        return 1.0;
    }
    if mu == 0.0 {
        return 0.0;
    }
    mu / alpha.hypot(mu)
}

/// Inverse of [`velocity_from_mu`] for `|v| < 1`.
pub fn mu_from_velocity(v: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::AlphaZeroInverse);
    }
    let a = v.abs();
    if !(a < 1.0) {
        return Err(Error::VelocityOutOfRange { v });
    }
    Ok(alpha * a / ((1.0 - a) * (1.0 + a)).sqrt())
}

/// One way of fixing an array within its one-parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayParam {
    ZM(f64),
    Mu(f64),
    Xi(f64),
    AbsV(f64),
    LoopI(f64),
}

/// All five array parameters at one point of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub z_m: f64,
    pub mu: f64,
    pub loop_i: f64,
    pub xi_period: f64,
    pub abs_v: f64,
}

/// Conversions among `z_M`, `Ǐ`, `μ̌`, `Ξ` and `|v|` at fixed `(γ, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamChart {
    pub gamma: f64,
    pub alpha: f64,
    pub mu_tol: f64,
}

impl ParamChart {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::GammaOutOfRange {
                gamma,
                expected: "(0, inf)",
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "alpha",
                value: alpha,
                reason: "must be positive".into(),
            });
        }
        Ok(Self {
            gamma,
            alpha,
            mu_tol: DEFAULT_MU_TOL,
        })
    }

    /// Upper end of the admissible `μ̌` range (infinite for γ > 1).
    pub fn mu_limit(&self) -> Result<f64> {
        if self.gamma > 1.0 && !is_gamma_one(self.gamma) {
            Ok(f64::INFINITY)
        } else {
            Ok(hat_mu_extended(self.gamma.min(1.0), 1e-10)?.hat_mu)
        }
    }

    /// Shoot the array with launch energy `z_m` and read off every parameter.
    pub fn shoot(&self, z_m: f64) -> Result<(ChartPoint, ShootResult)> {
        let r = solve_check_mu(self.gamma, z_m, self.mu_tol)?;
        let g0 = r.curve.g0();
        let xi = xi_span(&r.curve, g0, g0 + 2.0 * PI)?;
        Ok((
            ChartPoint {
                z_m,
                mu: r.mu_star,
                loop_i: r.loop_integral,
                xi_period: xi,
                abs_v: velocity_from_mu(r.mu_star, self.alpha),
            },
            r,
        ))
    }

    pub fn point(&self, z_m: f64) -> Result<ChartPoint> {
        Ok(self.shoot(z_m)?.0)
    }

    fn z_from_mu(&self, mu: f64) -> Result<f64> {
        let limit = self.mu_limit()?;
        if !(mu > 0.0 && mu < limit) {
            return Err(Error::ParamOutOfRange {
                name: "mu",
                value: mu,
                reason: format!("arrays need 0 < mu < {limit}"),
            });
        }
        let hint = if self.gamma > 1.0 {
            0.5 * ((self.gamma - 1.0) / mu).powi(2)
        } else {
            1.0
        };
        periodic_energy_for_mu(self.gamma, mu, hint)
    }

    fn z_from_xi(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "Xi",
                value: xi,
                reason: "must be positive and finite".into(),
            });
        }
        // Ξ decreases in z_M; start from the free-rotation estimate Ξ ≈ 2π/√(2z)
        let target = xi.ln();
        let f = |t: f64| -> Result<f64> {
            let z = t.exp();
            let r = solve_check_mu(self.gamma, z, self.mu_tol)?;
            let g0 = r.curve.g0();
            Ok(xi_span(&r.curve, g0, g0 + 2.0 * PI)?.ln() - target)
        };
        let mut a = (0.5 * (2.0 * PI / xi).powi(2)).ln();
        let mut fa = f(a)?;
        let step = if fa > 0.0 { 1.0 } else { -1.0 };
        let mut b = a;
        let mut fb = fa;
        let mut k = 0;
        while fa * fb > 0.0 {
            a = b;
            fa = fb;
            b += step * (1 + k) as f64;
            fb = f(b)?;
            k += 1;
            if k > 40 {
                return Err(Error::ParamOutOfRange {
                    name: "Xi",
                    value: xi,
                    reason: "no array with this period".into(),
                });
            }
        }
        let mut hist = Vec::new();
        Ok(illinois(f, a, fa, b, fb, 1e-14, &mut hist)?.exp())
    }

    /// `z_M` of the array fixed by `param`.
    pub fn z_m_from(&self, param: ArrayParam) -> Result<f64> {
        match param {
            ArrayParam::ZM(z) => {
                if !(z > 0.0) || !z.is_finite() {
                    return Err(Error::ZmNonPositive { z_m: z });
                }
                Ok(z)
            }
            ArrayParam::Mu(mu) => self.z_from_mu(mu),
            ArrayParam::AbsV(v) => {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::ParamOutOfRange {
                        name: "abs_v",
                        value: v,
                        reason: "must lie in (0, 1)".into(),
                    });
                }
                self.z_from_mu(mu_from_velocity(v, self.alpha)?)
            }
            ArrayParam::LoopI(i) => {
                if !(i > 0.0) || !i.is_finite() {
                    return Err(Error::ParamOutOfRange {
                        name: "loop_i",
                        value: i,
                        reason: "must be positive and finite".into(),
                    });
                }
                self.z_from_mu(2.0 * PI * self.gamma / i)
            }
            ArrayParam::Xi(xi) => self.z_from_xi(xi),
        }
    }
}

/// Periodic reference a half-array merges into: `ḡ(s) → ǧ(s - shift)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeReference {
    pub array: WaveProfile,
    /// `ξ̄(g) - ξ̌(g)` where the computed window ends.
    pub shift: f64,
    /// The same offset in the limit `g → ∞`.
    pub asymptotic_shift: f64,
    /// Beyond this `s` the half-array is evaluated through `array`.
    pub s_end: f64,
    pub z_m: f64,
    pub decay_rate: f64,
    pub decay_bound: f64,
    pub rho_offset: f64,
    pub periods: f64,
}

impl MergeReference {
    /// `ǧ(s - shift)`.
    pub fn reference_g(&self, s: f64) -> Result<f64> {
        Ok(self.array.eval(s - self.shift)?.g)
    }
}

/// Field values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub phi: f64,
    pub phi_x: f64,
    pub phi_t: f64,
}

/// A classified travelling wave.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveSolution {
    pub family: Family,
    pub params: SystemParams,
    pub helicity: Sign,
    /// Winding per period (arrays) or in total (solitons).
    pub winding: i32,
    /// Increasing trajectory `g(s)`; absent for constants.
    pub profile: Option<WaveProfile>,
    /// Period in `ξ`.
    pub xi_period: Option<f64>,
    /// Spatial period `Ξ√(1 - v²)`.
    pub x_period: Option<f64>,
    pub phase_x0: f64,
    /// `φ` of a constant solution.
    pub constant_phi: Option<f64>,
    pub stable: bool,
    pub z_m: Option<f64>,
    pub loop_i: Option<f64>,
    pub balance_residual: Option<f64>,
    pub periodicity_residual: Option<f64>,
    pub merge: Option<MergeReference>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "alpha",
            value: alpha,
            reason: "must be positive".into(),
        });
    }
    Ok(())
}

fn check_increasing(profile: &WaveProfile) -> Result<()> {
    if let Some(i) = profile.u_values().iter().position(|&u| !(u > 0.0)) {
        return Err(Error::Integration(format!(
            "profile not increasing at g = {}",
            profile.g_values()[i]
        )));
    }
    Ok(())
}

fn moving_params(alpha: f64, gamma: f64, mu: f64, helicity: Sign) -> SystemParams {
    SystemParams {
        alpha,
        gamma,
        mu,
        v: helicity.value() * velocity_from_mu(mu, alpha),
        epsilon: Sign::Plus,
    }
}

/// The stable uniform state `φ ≡ -asin γ`, `0 ≤ γ < 1`.
pub fn build_constant(gamma: f64) -> Result<WaveSolution> {
    if !(0.0..1.0).contains(&gamma) || is_gamma_one(gamma) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "[0, 1)",
        });
    }
    Ok(constant(gamma, -gamma.asin(), true))
}

/// The uniform state on the potential maximum, `φ ≡ asin γ - π`, `0 ≤ γ ≤ 1`.
/// Unstable; built only when `include_unstable` is set.
pub fn build_constant_unstable(gamma: f64, include_unstable: bool) -> Result<WaveSolution> {
    if !include_unstable {
        return Err(Error::InvalidArgument(
            "the unstable uniform state needs include_unstable".into(),
        ));
    }
    let g = if is_gamma_one(gamma) { 1.0 } else { gamma };
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "[0, 1]",
        });
    }
    Ok(constant(gamma, g.asin() - PI, false))
}

fn constant(gamma: f64, phi: f64, stable: bool) -> WaveSolution {
    WaveSolution {
        family: Family::Constant,
        params: SystemParams::reduced(gamma, 0.0, Sign::Plus),
        helicity: Sign::Plus,
        winding: 0,
        profile: None,
        xi_period: None,
        x_period: None,
        phase_x0: 0.0,
        constant_phi: Some(phi),
        stable,
        z_m: None,
        loop_i: None,
        balance_residual: None,
        periodicity_residual: None,
        merge: None,
    }
}

/// The soliton (`helicity = +`) or antisoliton of `0 < γ < 1`.
///
/// The trajectory runs from `π - asin γ` to `3π - asin γ` with `g(0) = 2π - asin γ`.
pub fn build_soliton(gamma: f64, alpha: f64, helicity: Sign) -> Result<WaveSolution> {
    check_alpha(alpha)?;
    let shot = solve_hat_mu(gamma, DEFAULT_MU_TOL)?;
    let anchor = maximum_point(0, gamma) + PI;
    let profile = quadrature_xi(&shot.curve, anchor, 0.0)?;
    check_increasing(&profile)?;
    Ok(WaveSolution {
        family: Family::Soliton.with_helicity(helicity),
        params: moving_params(alpha, gamma, shot.mu_star, helicity),
        helicity,
        winding: helicity.value() as i32,
        profile: Some(profile),
        xi_period: None,
        x_period: None,
        phase_x0: 0.0,
        constant_phi: None,
        stable: true,
        z_m: Some(0.0),
        loop_i: Some(shot.loop_integral),
        balance_residual: Some(shot.balance_residual),
        periodicity_residual: None,
        merge: None,
    })
}

fn array_profile(curve: &KineticCurve) -> Result<(WaveProfile, f64)> {
    let g0 = curve.g0();
    let mut profile = quadrature_xi(curve, g0, 0.0)?;
    let xi_period = profile.xi_range().1 - profile.xi_range().0;
    profile.set_period(xi_period, 2.0 * PI);
    Ok((profile, xi_period))
}

/// The array (`helicity = +`) or antiarray fixed by one parameter. For
/// `γ > 1`, `ArrayParam::Mu(∞)` (or `AbsV(1)`) gives the `|v| = 1` branch.
pub fn build_array(gamma: f64, alpha: f64, helicity: Sign, param: ArrayParam) -> Result<WaveSolution> {
    check_alpha(alpha)?;
    let unit =
        matches!(param, ArrayParam::Mu(m) if m == f64::INFINITY) || matches!(param, ArrayParam::AbsV(v) if v == 1.0);
    if unit {
        if !(gamma > 1.0) || is_gamma_one(gamma) {
            return Err(Error::MuInfinityRequiresGammaAboveOne { gamma });
        }
        let (profile, xi_period) = unit_velocity_profile(gamma, alpha, 256)?;
        check_increasing(&profile)?;
        return Ok(WaveSolution {
            family: Family::Array.with_helicity(helicity),
            params: moving_params(alpha, gamma, f64::INFINITY, helicity),
            helicity,
            winding: helicity.value() as i32,
            profile: Some(profile),
            xi_period: Some(xi_period),
            x_period: Some(xi_period),
            phase_x0: 0.0,
            constant_phi: None,
            stable: true,
            z_m: None,
            loop_i: None,
            balance_residual: None,
            periodicity_residual: None,
            merge: None,
        });
    }
    let chart = ParamChart::new(gamma, alpha)?;
    let z_m = chart.z_m_from(param)?;
    let (point, shot) = chart.shoot(z_m)?;
    let (profile, xi_period) = array_profile(&shot.curve)?;
    check_increasing(&profile)?;
    let params = moving_params(alpha, gamma, point.mu, helicity);
    Ok(WaveSolution {
        family: Family::Array.with_helicity(helicity),
        params,
        helicity,
        winding: helicity.value() as i32,
        profile: Some(profile),
        xi_period: Some(xi_period),
        x_period: Some(xi_period * (1.0 - params.v * params.v).sqrt()),
        phase_x0: 0.0,
        constant_phi: None,
        stable: true,
        z_m: Some(z_m),
        loop_i: Some(shot.loop_integral),
        balance_residual: Some(shot.balance_residual),
        periodicity_residual: shot.periodicity_residual,
        merge: None,
    })
}

/// Target size of `|ḡ - ǧ|` where the half-array hands over to the array.
const MERGE_GAP: f64 = 1e-10;
const MAX_HALF_ARRAY_PERIODS: f64 = 1000.0;

/// The half-array (`helicity = +`) or its mirror image, `0 < μ < μ̂(γ)`.
pub fn build_half_array(gamma: f64, alpha: f64, helicity: Sign, mu: f64) -> Result<WaveSolution> {
    check_alpha(alpha)?;
    let mut periods = 8.0_f64.max(MIN_HALF_ARRAY_PERIODS);
    let mut h = half_array_curve(gamma, mu, periods)?;
    let w0 = h.w_samples[0].1.abs();
    let needed = ((w0 / MERGE_GAP).ln() / (2.0 * PI * h.decay_rate)).ceil() + 1.0;
    if needed > periods {
        periods = needed.min(MAX_HALF_ARRAY_PERIODS);
        h = half_array_curve(gamma, mu, periods)?;
    }
    let g0 = h.zbar.g0();
    let anchor = g0 + PI;
    let profile = quadrature_xi(&h.zbar, anchor, 0.0)?;
    check_increasing(&profile)?;
    let (array, xi_period) = array_profile(&h.zcheck)?;
    // ξ̄(g) - ξ̌(g) at the end of the window and in the limit g → ∞
    let g_end = h.zbar.domain().1;
    let shift = xi_span(&h.zbar, anchor, g_end)? - periods * xi_period;
    let asymptotic_shift = xi_span(&h.zbar, anchor, h.rho_anchor)? - xi_period + h.rho_offset;
    let params = moving_params(alpha, gamma, mu, helicity);
    let s_end = profile.xi_range().1;
    Ok(WaveSolution {
        family: Family::HalfArray.with_helicity(helicity),
        params,
        helicity,
        winding: helicity.value() as i32,
        profile: Some(profile),
        xi_period: Some(xi_period),
        x_period: Some(xi_period * (1.0 - params.v * params.v).sqrt()),
        phase_x0: 0.0,
        constant_phi: None,
        stable: true,
        z_m: Some(h.z_m),
        loop_i: None,
        balance_residual: None,
        periodicity_residual: None,
        merge: Some(MergeReference {
            array,
            shift,
            asymptotic_shift,
            s_end,
            z_m: h.z_m,
            decay_rate: h.decay_rate,
            decay_bound: h.decay_bound,
            rho_offset: h.rho_offset,
            periods,
        }),
    })
}

impl WaveSolution {
    pub fn with_phase(mut self, x0: f64) -> Self {
        self.phase_x0 = x0;
        self
    }

    pub fn velocity(&self) -> f64 {
        self.params.v
    }

    /// `√(1 - v²)`, or 1 on the `|v| = 1` branch.
    pub fn lorentz_factor(&self) -> f64 {
        let v = self.params.v;
        if v.abs() >= 1.0 {
            1.0
        } else {
            (1.0 - v * v).sqrt()
        }
    }

    pub fn xi_of(&self, x: f64, t: f64) -> f64 {
        (x - self.phase_x0 - self.params.v * t) / self.lorentz_factor()
    }

    /// `(g, g')` of the base trajectory at `s`.
    pub fn trajectory(&self, s: f64) -> Result<(f64, f64)> {
        let Some(profile) = &self.profile else {
            let phi = self.constant_phi.unwrap_or(0.0);
            return Ok((phi + PI, 0.0));
        };
        if let Some(m) = &self.merge {
            if s > m.s_end {
                let p = m.array.eval(s - m.shift)?;
                return Ok((p.g, p.u));
            }
        }
        let p = profile.eval(s)?;
        Ok((p.g, p.u))
    }

    /// `φ(ξ)` with `ξ` the comoving coordinate.
    pub fn phi_of_xi(&self, xi: f64) -> Result<f64> {
        Ok(self.trajectory(self.helicity.value() * xi)?.0 - PI)
    }

    /// `(φ, φ_x, φ_t)` at `(x, t)`.
    pub fn map_to_xt(&self, x: f64, t: f64) -> Result<FieldPoint> {
        if let Some(phi) = self.constant_phi {
            return Ok(FieldPoint {
                phi,
                phi_x: 0.0,
                phi_t: 0.0,
            });
        }
        let h = self.helicity.value();
        let lf = self.lorentz_factor();
        let (g, dg) = self.trajectory(h * self.xi_of(x, t))?;
        let phi_x = h * dg / lf;
        Ok(FieldPoint {
            phi: g - PI,
            phi_x,
            phi_t: -self.params.v * phi_x,
        })
    }

    /// `φ_t²/2 + φ_x²/2 + γφ - cos φ`.
    pub fn energy_density(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.map_to_xt(x, t)?;
        Ok(0.5 * p.phi_t * p.phi_t + 0.5 * p.phi_x * p.phi_x + self.params.gamma * p.phi - p.phi.cos())
    }

    /// The profile as a function of the comoving coordinate (mirrored for
    /// negative helicity).
    pub fn xi_profile(&self) -> Option<WaveProfile> {
        let p = self.profile.as_ref()?;
        Some(match self.helicity {
            Sign::Plus => p.clone(),
            Sign::Minus => p.reflected(),
        })
    }

    /// `(ξ, g, u, φ)` samples of the comoving profile on `[lo, hi]`.
    pub fn sample(&self, lo: f64, hi: f64, n: usize) -> Result<Vec<[f64; 4]>> {
        if self.constant_phi.is_some() {
            let phi = self.constant_phi.unwrap_or(0.0);
            return Ok(vec![[0.0, phi + PI, 0.0, phi]]);
        }
        let n = n.max(2);
        let h = self.helicity.value();
        (0..n)
            .map(|k| {
                let xi = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                let (g, u) = self.trajectory(h * xi)?;
                Ok([xi, g, h * u, g - PI])
            })
            .collect()
    }

    /// Leading-order parameters of a `γ > 1` array.
    pub fn leading_order(&self) -> Option<crate::shooting::ArrayLeadingOrder> {
        let z_m = self.z_m?;
        (self.family.is_array() && self.params.gamma > 1.0)
            .then(|| array_leading_order(self.params.gamma, z_m, self.params.alpha))
    }

    /// Launch angle of the shooting behind an array.
    pub fn launch_point(&self) -> f64 {
        array_launch_point(self.params.gamma)
    }
}

/// An array wrapped on a circle of length `L = mX`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleWrap {
    pub m: u32,
    pub length: f64,
    pub x_period: f64,
    /// `φ(x + L) - φ(x)`.
    pub jump: f64,
}

pub fn circle_wrap(solution: &WaveSolution, m: u32) -> Result<CircleWrap> {
    if !solution.family.is_array() {
        return Err(Error::NotAnArray);
    }
    if m == 0 {
        return Err(Error::InvalidArgument("the sector m must be positive".into()));
    }
    let x_period = solution.x_period.ok_or(Error::NotAnArray)?;
    Ok(CircleWrap {
        m,
        length: m as f64 * x_period,
        x_period,
        jump: 2.0 * PI * m as f64 * solution.helicity.value(),
    })
}

impl CircleWrap {
    /// `φ` at the circle position of `x`, with `x` reduced into `[0, L)` and
    /// the winding removed.
    pub fn phi(&self, solution: &WaveSolution, x: f64, t: f64) -> Result<f64> {
        let k = (x / self.length).floor();
        solution.map_to_xt(x - k * self.length, t).map(|p| p.phi)
    }

    /// Mismatch of `φ` across the seam once the `2πm` jump is removed.
    pub fn seam_mismatch(&self, solution: &WaveSolution, t: f64) -> Result<f64> {
        let a = solution.map_to_xt(0.0, t)?.phi;
        let b = solution.map_to_xt(self.length, t)?.phi;
        Ok((b - a - self.jump).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constants() {
        let c = build_constant(0.0).unwrap();
        assert_eq!(c.map_to_xt(1.0, 2.0).unwrap().phi, 0.0);
        assert_abs_diff_eq!(c.energy_density(0.0, 0.0).unwrap(), -1.0, epsilon = 1e-15);
        let c = build_constant(0.5).unwrap();
        assert_abs_diff_eq!(c.constant_phi.unwrap(), -PI / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.energy_density(3.0, 1.0).unwrap(), -1.1278, epsilon = 1e-4);
        assert!(matches!(build_constant(1.0), Err(Error::GammaOutOfRange { .. })));
        assert!(build_constant_unstable(1.0, false).is_err());
        let u = build_constant_unstable(1.0, true).unwrap();
        assert!(!u.stable);
        assert_abs_diff_eq!(u.constant_phi.unwrap(), -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn velocity_map() {
        assert_abs_diff_eq!(velocity_from_mu(2.0, 2.0), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(velocity_from_mu(f64::INFINITY, 1.0), 1.0);
        assert_eq!(mu_from_velocity(0.5, 0.0), Err(Error::AlphaZeroInverse));
    }

    proptest! {
        #[test]
        fn velocity_round_trip(mu in 1e-3f64..50.0, alpha in 1e-2f64..10.0) {
            let v = velocity_from_mu(mu, alpha);
            let back = mu_from_velocity(v, alpha).unwrap();
            prop_assert!((velocity_from_mu(back, alpha) - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn soliton_and_antisoliton() {
        let s = build_soliton(0.1, 1.0, Sign::Plus).unwrap();
        let a = build_soliton(0.1, 1.0, Sign::Minus).unwrap();
        assert_eq!(a.family, Family::Antisoliton);
        assert_abs_diff_eq!(a.velocity(), -s.velocity(), epsilon = 1e-15);
        for xi in [-3.0, -0.5, 0.0, 1.2, 4.0] {
            assert_abs_diff_eq!(a.phi_of_xi(xi).unwrap(), s.phi_of_xi(-xi).unwrap(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(s.phi_of_xi(0.0).unwrap(), PI - 0.1f64.asin(), epsilon = 1e-12);
        let far = s.phi_of_xi(-60.0).unwrap();
        assert_abs_diff_eq!(far, -0.1f64.asin(), epsilon = 1e-9);
        let far = s.phi_of_xi(60.0).unwrap();
        assert_abs_diff_eq!(far, 2.0 * PI - 0.1f64.asin(), epsilon = 1e-9);
    }

    #[test]
    fn unit_velocity_array() {
        let a = build_array(2.0, 1.0, Sign::Plus, ArrayParam::Mu(f64::INFINITY)).unwrap();
        assert_eq!(a.velocity(), 1.0);
        assert_abs_diff_eq!(a.xi_period.unwrap(), 2.0 * PI / 3f64.sqrt(), epsilon = 1e-10);
        assert_eq!(
            build_array(0.5, 1.0, Sign::Plus, ArrayParam::Mu(f64::INFINITY)).unwrap_err(),
            Error::MuInfinityRequiresGammaAboveOne { gamma: 0.5 }
        );
    }

    #[test]
    fn chart_round_trip() {
        let chart = ParamChart::new(0.5, 1.0).unwrap();
        let p = chart.point(0.3).unwrap();
        for param in [
            ArrayParam::Mu(p.mu),
            ArrayParam::Xi(p.xi_period),
            ArrayParam::AbsV(p.abs_v),
            ArrayParam::LoopI(p.loop_i),
        ] {
            let z = chart.z_m_from(param).unwrap();
            assert!((z - 0.3).abs() <= 1e-8, "{param:?} -> {z}");
        }
    }

    #[test]
    fn array_circle() {
        let a = build_array(0.5, 1.0, Sign::Plus, ArrayParam::ZM(0.3)).unwrap();
        let w = circle_wrap(&a, 3).unwrap();
        assert_abs_diff_eq!(w.length, 3.0 * a.x_period.unwrap(), epsilon = 1e-15);
        assert!(w.seam_mismatch(&a, 0.7).unwrap() <= 1e-8);
        let s = build_soliton(0.5, 1.0, Sign::Plus).unwrap();
        assert_eq!(circle_wrap(&s, 1).unwrap_err(), Error::NotAnArray);
    }

    #[test]
    fn half_array_merges() {
        let hat = solve_hat_mu(0.1, 1e-10).unwrap().mu_star;
        let s = build_half_array(0.1, 1.0, Sign::Plus, 0.5 * hat).unwrap();
        let m = s.merge.as_ref().unwrap();
        assert_abs_diff_eq!(s.phi_of_xi(-80.0).unwrap(), -0.1f64.asin(), epsilon = 1e-9);
        let end = m.s_end;
        // the handover to the array is smooth
        let a = s.trajectory(end - 1e-9).unwrap().0;
        let b = s.trajectory(end + 1e-9).unwrap().0;
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        let gap = |x: f64| s.trajectory(x).unwrap().0 - m.reference_g(x).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let x = 0.5 * end + k as f64 * 0.025 * end;
            let d = gap(x);
            assert!(d > 0.0 && d < last, "x={x} d={d}");
            last = d;
        }
    }
}
