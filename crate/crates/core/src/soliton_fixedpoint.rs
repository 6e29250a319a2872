//! Successive approximations for the soliton energy profile.
//!
//! In the shifted angle `y = g - g0` (`g0 = -π - asin γ`, a maximum of the
//! potential) the heteroclinic kinetic energy is the fixed point of
//!
//! ```text
//! Ãz(y) = √(1-γ²)·2sin²(y/2) + γ(y - sin y) - μ̃(z) ∫₀^y √(2z),
//! μ̃(z) = 2πγ / ∫₀^{2π} √(2z),
//! ```
//!
//! which contracts in the norm `‖z‖ = sup |2z/p²|`, `p(y) = sin(y/2)`, on the
//! box `a² ≤ 2z/p² ≤ b²` for small enough γ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::washboard::potential;

/// Default number of grid intervals on `[0, 2π]`.
pub const DEFAULT_INTERVALS: usize = 2048;

/// Below this the integral of `√(2z)` is treated as zero.
const DEGENERATE_INTEGRAL: f64 = 1e-14;

/// Successive differences below this are dominated by round-off and are not
/// used to measure contraction ratios.
const RATIO_NOISE_FLOOR: f64 = 1e-10;

/// Shift between the fixed-point variable `y` and the angle `g`.
pub fn fixed_point_origin(gamma: f64) -> f64 {
    -PI - gamma.asin()
}

/// The weight `p(y) = sin(y/2)`.
pub fn weight(y: f64) -> f64 {
    (0.5 * y).sin()
}

/// Nonnegative samples of a function on the uniform grid `y_i = 2πi/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGridFunction {
    values: Vec<f64>,
}

impl WeightedGridFunction {
    /// Needs at least 4 intervals.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::InvalidArgument(
                "a grid function needs at least 4 intervals".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid function values must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * PI / n as f64;
        Self::new((0..=n).map(|i| f(h * i as f64)).collect())
    }

    /// The unperturbed separatrix `2sin²(y/2)`.
    pub fn initial(n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut values: Vec<f64> = (0..=n)
            .map(|i| {
                let p = weight(h * i as f64);
                2.0 * p * p
            })
            .collect();
        values[0] = 0.0;
        values[n] = 0.0;
        Self { values }
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.intervals() as f64
    }

    pub fn y_grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.values.len()).map(|i| h * i as f64).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `2z/p²` at every node; the endpoint values are extrapolated.
    pub fn weighted_ratio(&self) -> Vec<f64> {
        weighted_ratio(&self.values, self.step())
    }

    /// Membership in `a² ≤ 2z/p² ≤ b²` at the interior nodes, up to `slack`.
    pub fn in_box(&self, a: f64, b: f64, slack: f64) -> bool {
        let r = self.weighted_ratio();
        let n = r.len() - 1;
        r[1..n].iter().all(|&v| v >= a * a - slack && v <= b * b + slack)
    }

    /// Cumulative integrals `∫₀^{y_i} √(2z)`.
    pub fn cumulative_action(&self) -> Vec<f64> {
        let pieces = self.action_pieces();
        let mut out = vec![0.0; pieces.len() + 1];
        for (i, p) in pieces.iter().enumerate() {
            out[i + 1] = out[i] + p;
        }
        out
    }

    fn action_pieces(&self) -> Vec<f64> {
        let f: Vec<f64> = self.values.iter().map(|&z| (2.0 * z.max(0.0)).sqrt()).collect();
        interval_integrals(&f, self.step())
    }
}

fn weighted_ratio(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut r: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let p = weight(h * i as f64);
            2.0 * z / (p * p)
        })
        .collect();
    r[0] = 3.0 * r[1] - 3.0 * r[2] + r[3];
    r[n] = 3.0 * r[n - 1] - 3.0 * r[n - 2] + r[n - 3];
    r
}

/// Integrals over each grid interval with the four-point rule: each interval
/// uses the cubic through the nearest four nodes.
fn interval_integrals(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let c = h / 24.0;
    (0..n)
        .map(|i| {
            if i == 0 {
                c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
            } else if i == n - 1 {
                c * (f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n])
            } else {
                c * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
            }
        })
        .collect()
}

fn forcing(y: f64, gamma: f64) -> f64 {
    let p = weight(y);
    (1.0 - gamma * gamma).sqrt() * 2.0 * p * p + gamma * (y - y.sin())
}

/// `forcing(2π - t) - 2πγ`, free of cancellation for small `t`.
fn forcing_from_right(t: f64, gamma: f64) -> f64 {
    let p = weight(t);
    (1.0 - gamma * gamma).sqrt() * 2.0 * p * p - gamma * (t - t.sin())
}

/// One application of `Ã`; returns the new iterate and `μ̃(z)`.
pub fn apply_operator(z: &WeightedGridFunction, gamma: f64) -> Result<(WeightedGridFunction, f64)> {
    let pieces = z.action_pieces();
    let n = z.intervals();
    let total: f64 = pieces.iter().sum();
    if !(total > DEGENERATE_INTEGRAL) {
        return Err(Error::DegenerateIterate { integral: total });
    }
    let mu = 2.0 * PI * gamma / total;
    let h = z.step();
    let mut values = vec![0.0; n + 1];
    // left half from y = 0, right half from y = 2π, where Ãz(2π) = 0
    let mid = n / 2;
    let mut acc = 0.0;
    for i in 1..=mid {
        acc += pieces[i - 1];
        values[i] = forcing(h * i as f64, gamma) - mu * acc;
    }
    let mut acc = 0.0;
    for i in (mid + 1..n).rev() {
        acc += pieces[i];
        values[i] = forcing_from_right(h * (n - i) as f64, gamma) + mu * acc;
    }
    values[0] = 0.0;
    values[n] = 0.0;
    // round-off can leave tiny negative values next to the endpoints
    for v in &mut values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((WeightedGridFunction { values }, mu))
}

/// The classical operator with prescribed `μ` and initial energy `z(0)`:
/// `z(0) + √(1-γ²)·2sin²(y/2) + γ(y - sin y) - μ∫₀^y √(2z)`.
pub fn apply_fixed_mu(z: &WeightedGridFunction, gamma: f64, mu: f64) -> Vec<f64> {
    let cum = z.cumulative_action();
    let h = z.step();
    let z0 = z.values[0];
    cum.iter()
        .enumerate()
        .map(|(i, c)| z0 + forcing(h * i as f64, gamma) - mu * c)
        .collect()
}

/// `sup |2(z1 - z2)/p²|` over the grid.
pub fn weighted_distance(z1: &WeightedGridFunction, z2: &WeightedGridFunction) -> Result<f64> {
    if z1.values.len() != z2.values.len() {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = z1.values.iter().zip(&z2.values).map(|(a, b)| a - b).collect();
    Ok(weighted_ratio(&diff, z1.step())
        .into_iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// Box and contraction constants for a given γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// `a² > 0` and `a/b ≥ 1/2`.
    pub box_valid: bool,
    /// The box is valid, `λ < 1` and γ is below the proven threshold.
    pub contraction_valid: bool,
}

/// Largest γ for which `a/b ≥ 1/2`.
pub fn box_threshold() -> f64 {
    (1.0 + 25.0 * PI * PI / 9.0).powf(-0.5)
}

/// Largest γ of the proven contraction range.
pub fn contraction_threshold() -> f64 {
    (1.0 + (1.75 * PI).powi(2)).powf(-0.5)
}

pub fn contraction_constants(gamma: f64) -> ContractionConstants {
    let s = (1.0 - gamma * gamma).max(0.0).sqrt();
    let a2 = 4.0 * (s - gamma * PI);
    let b2 = 4.0 * (s + gamma * PI);
    let a = if a2 > 0.0 { a2.sqrt() } else { f64::NAN };
    let b = b2.sqrt();
    let lambda = if a2 > 0.0 {
        (1.0 + b / a) * PI * gamma / a2
    } else {
        f64::INFINITY
    };
    let box_valid = a2 > 0.0 && a / b >= 0.5;
    let contraction_valid = box_valid && lambda < 1.0 && gamma < contraction_threshold();
    ContractionConstants {
        a,
        b,
        lambda,
        box_valid,
        contraction_valid,
    }
}

/// Settings for [`iterate_to_fixed_point_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub intervals: usize,
    /// Iterate even where contraction is not proven.
    pub force: bool,
    /// Keep every iterate in the run (otherwise only the first two and the last).
    pub keep_iterates: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            force: false,
            keep_iterates: false,
        }
    }
}

/// State and diagnostics of one fixed-point iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointRun {
    pub gamma: f64,
    pub iterates: Vec<WeightedGridFunction>,
    pub mu_sequence: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// `‖z_n - z_{n-1}‖` for `n = 1, 2, ...`.
    pub differences: Vec<f64>,
    /// Observed ratios of successive differences above the noise floor.
    pub observed_ratios: Vec<f64>,
    /// A-priori bound on `‖z_n - ẑ‖`.
    pub apriori_error_z: f64,
    /// A-priori bound on `|μ_n - μ̂|`.
    pub apriori_error_mu: f64,
    /// True when the run went beyond the proven range.
    pub forced: bool,
}

impl FixedPointRun {
    pub fn iterations(&self) -> usize {
        self.differences.len()
    }

    /// Final estimate of `μ̂`.
    pub fn mu(&self) -> f64 {
        *self.mu_sequence.last().unwrap_or(&0.0)
    }

    pub fn last(&self) -> &WeightedGridFunction {
        self.iterates.last().expect("a run holds at least one iterate")
    }

    pub fn max_observed_ratio(&self) -> f64 {
        self.observed_ratios.iter().fold(0.0, |m, &r| m.max(r))
    }
}

pub fn iterate_to_fixed_point(gamma: f64, tol: f64, max_iter: usize) -> Result<FixedPointRun> {
    iterate_to_fixed_point_with(gamma, tol, max_iter, &FixedPointOptions::default())
}

/// Iterate `z_{n+1} = Ãz_n` from `z_0 = 2sin²(y/2)` until the a-posteriori
/// bound `‖z_n - z_{n-1}‖ λ/(1-λ)` drops below `tol`.
pub fn iterate_to_fixed_point_with(
    gamma: f64,
    tol: f64,
    max_iter: usize,
    opts: &FixedPointOptions,
) -> Result<FixedPointRun> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange {
            gamma,
            expected: "[0, 1)",
        });
    }
    let cc = contraction_constants(gamma);
    if !cc.contraction_valid && !opts.force {
        return Err(Error::NotContractive {
            gamma,
            lambda: cc.lambda,
        });
    }
    let proven = cc.contraction_valid;
    let mut iterates = vec![WeightedGridFunction::initial(opts.intervals.max(4))];
    let mut mu_sequence = Vec::new();
    let mut differences: Vec<f64> = Vec::new();
    let mut observed_ratios = Vec::new();
    let mut current = iterates[0].clone();

    for n in 1..=max_iter {
        let (next, mu) = apply_operator(&current, gamma)?;
        let diff = weighted_distance(&next, &current)?;
        if let Some(&prev) = differences.last() {
            if prev > RATIO_NOISE_FLOOR && diff > RATIO_NOISE_FLOOR {
                observed_ratios.push(diff / prev);
            }
        }
        differences.push(diff);
        mu_sequence.push(mu);
        if opts.keep_iterates || n == 1 {
            iterates.push(next.clone());
        }
        current = next;

        let rate = if proven {
            cc.lambda
        } else {
            observed_ratios.last().copied().unwrap_or(0.5).min(0.999)
        };
        let stalled = diff < RATIO_NOISE_FLOOR && differences.len() >= 2 && diff >= differences[differences.len() - 2];
        if diff * rate / (1.0 - rate) <= tol || diff == 0.0 || stalled {
            if !opts.keep_iterates && n > 1 {
                iterates.push(current);
            }
            let d1 = differences[0];
            let geometric = rate.powi(n as i32) / (1.0 - rate) * d1;
            let s = (1.0 - gamma * gamma).sqrt();
            let mu_factor = if s - gamma * PI > 0.0 {
                PI * gamma / 32.0 * (s - gamma * PI).powf(-1.5)
            } else {
                f64::INFINITY
            };
            return Ok(FixedPointRun {
                gamma,
                iterates,
                mu_sequence,
                a: cc.a,
                b: cc.b,
                lambda: cc.lambda,
                differences,
                observed_ratios,
                apriori_error_z: geometric,
                apriori_error_mu: mu_factor * geometric,
                forced: !proven,
            });
        }
    }
    Err(Error::MaxIterExceeded { iterations: max_iter })
}

/// Closed-form first iterate and the derived velocity estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstApproximation {
    pub gamma: f64,
    pub alpha: f64,
    pub mu1: f64,
    pub v1: f64,
}

impl FirstApproximation {
    /// `z₁(y) = √(1-γ²)·2sin²(y/2) + γ[π(cos(y/2) - 1) + y - sin y]`.
    pub fn z1(&self, y: f64) -> f64 {
        let g = self.gamma;
        let p = weight(y);
        (1.0 - g * g).sqrt() * 2.0 * p * p + g * (PI * ((0.5 * y).cos() - 1.0) + y - y.sin())
    }

    /// Total energy `e₁(y) = z₁(y) + U(y + g0)`.
    pub fn e1(&self, y: f64) -> f64 {
        let g0 = fixed_point_origin(self.gamma);
        potential(g0, self.gamma) + self.gamma * PI * ((0.5 * y).cos() - 1.0)
    }
}

/// `μ₁ = πγ/4` and `v₁ = [1 + (4α/πγ)²]^{-1/2}` (zero when `γ = 0`).
pub fn first_approximation(gamma: f64, alpha: f64) -> FirstApproximation {
    let mu1 = PI * gamma / 4.0;
    let v1 = if gamma == 0.0 {
        0.0
    } else {
        (1.0 + (4.0 * alpha / (PI * gamma)).powi(2)).powf(-0.5)
    };
    FirstApproximation { gamma, alpha, mu1, v1 }
}

/// Outcome of the classical convergence test for fixed-μ iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TricomiCheck {
    pub holds: bool,
    /// `sup |z₁ - z₀|`.
    pub eps1: f64,
    /// `min |z₁|`.
    pub eta1: f64,
    /// `(√η₁ - √ε₁)² / (2π√2)`, the largest admissible μ.
    pub mu_limit: f64,
}

/// The classical condition `η₁ > ε₁` and `μ < (√η₁ - √ε₁)²/(2π√2)` for a seed
/// `z0` and its image `z1` under the fixed-μ operator.
pub fn tricomi_condition(z0: &[f64], z1: &[f64], mu: f64) -> Result<TricomiCheck> {
    if z0.len() != z1.len() || z0.is_empty() {
        return Err(Error::GridMismatch);
    }
    let eps1 = z0.iter().zip(z1).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let eta1 = z1.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let mu_limit = if eta1 > eps1 {
        (eta1.sqrt() - eps1.sqrt()).powi(2) / (2.0 * PI * 2f64.sqrt())
    } else {
        0.0
    };
    Ok(TricomiCheck {
        holds: eta1 > eps1 && mu < mu_limit,
        eps1,
        eta1,
        mu_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn unperturbed_separatrix_is_fixed() {
        let z0 = WeightedGridFunction::initial(256);
        let (z1, mu) = apply_operator(&z0, 0.0).unwrap();
        assert_eq!(mu, 0.0);
        assert!(weighted_distance(&z0, &z1).unwrap() < 1e-12);
        assert_abs_diff_eq!(
            weighted_distance(&z0, &WeightedGridFunction::new(vec![0.0; 257]).unwrap()).unwrap(),
            4.0,
            epsilon = 1e-9
        );
        let run = iterate_to_fixed_point(0.0, 1e-12, 10).unwrap();
        assert_eq!(run.iterations(), 1);
        assert_eq!(run.mu(), 0.0);
    }

    #[test]
    fn first_step_matches_closed_form() {
        let gamma = 0.1;
        let z0 = WeightedGridFunction::initial(2048);
        let (z1, mu) = apply_operator(&z0, gamma).unwrap();
        assert_abs_diff_eq!(mu, PI * gamma / 4.0, epsilon = 1e-12);
        let fa = first_approximation(gamma, 1.0);
        for (y, v) in z1.y_grid().iter().zip(z1.values()) {
            assert_abs_diff_eq!(*v, fa.z1(*y), epsilon = 1e-11);
        }
        assert_abs_diff_eq!(z1.values()[1024], 2.0 * 0.99f64.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn constants_at_reference_gamma() {
        let c = contraction_constants(0.1);
        assert_abs_diff_eq!(c.a, 1.65025, epsilon = 1e-5);
        assert_abs_diff_eq!(c.b, 2.28836, epsilon = 1e-5);
        assert_abs_diff_eq!(c.lambda, 0.27533, epsilon = 1e-5);
        assert!(c.box_valid && c.contraction_valid);
        let c0 = contraction_constants(0.0);
        assert_eq!((c0.a, c0.b, c0.lambda), (2.0, 2.0, 0.0));
        assert!(!contraction_constants(0.2).contraction_valid);
        assert_abs_diff_eq!(box_threshold(), 0.187, epsilon = 1e-3);
        assert_abs_diff_eq!(contraction_threshold(), 0.179, epsilon = 1e-3);
        assert!(contraction_constants(box_threshold() - 1e-9).box_valid);
        assert!(!contraction_constants(box_threshold() + 1e-9).box_valid);
    }

    #[test]
    fn refuses_outside_proven_range() {
        assert!(matches!(
            iterate_to_fixed_point(0.2, 1e-10, 100),
            Err(Error::NotContractive { .. })
        ));
        let opts = FixedPointOptions {
            force: true,
            ..Default::default()
        };
        let run = iterate_to_fixed_point_with(0.2, 1e-10, 500, &opts).unwrap();
        assert!(run.forced);
    }

    #[test]
    fn iteration_contracts_at_reference_gamma() {
        let run = iterate_to_fixed_point(0.1, 1e-12, 200).unwrap();
        assert!(run.max_observed_ratio() <= run.lambda + 1e-6);
        assert!(run.apriori_error_mu > 0.0);
        let cc = contraction_constants(0.1);
        assert!(run.last().in_box(cc.a, cc.b, 1e-9));
    }

    #[test]
    fn first_approximation_velocity() {
        let fa = first_approximation(0.1, 1.0);
        assert_abs_diff_eq!(fa.v1, 0.078299, epsilon = 1e-6);
        assert_eq!(first_approximation(0.0, 3.0).v1, 0.0);
        // e1 = z1 + U(g)
        let g0 = fixed_point_origin(0.1);
        for y in [0.0, 1.0, 3.0, 5.5] {
            assert_abs_diff_eq!(fa.e1(y), fa.z1(y) + potential(y + g0, 0.1), epsilon = 1e-12);
        }
    }

    #[test]
    fn tricomi_cases() {
        let seed = WeightedGridFunction::from_fn(512, |_| 10.0).unwrap();
        let img = apply_fixed_mu(&seed, 0.1, 0.01);
        assert!(tricomi_condition(seed.values(), &img, 0.01).unwrap().holds);

        let sep = WeightedGridFunction::initial(512);
        let img = apply_fixed_mu(&sep, 0.1, 0.05);
        let chk = tricomi_condition(sep.values(), &img, 0.05).unwrap();
        assert_eq!(chk.eta1, 0.0);
        assert!(!chk.holds);
        assert!(!tricomi_condition(&[1.0, 1.0], &[0.2, 0.5], 0.0).unwrap().holds);
    }

    fn box_member(n: usize, a: f64, b: f64, c: &[f64]) -> WeightedGridFunction {
        // 2z/p² = a² + (b² - a²)·(1 + tanh-like bounded mix)/2
        WeightedGridFunction::from_fn(n, |y| {
            let mix: f64 = c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * ((k as f64 + 1.0) * y / 2.0).sin())
                .sum();
            let t = 0.5 * (1.0 + mix.tanh());
            let p = weight(y);
            0.5 * p * p * (a * a + (b * b - a * a) * t)
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn box_is_preserved(gamma in 0.0f64..0.179, c in prop::collection::vec(-2.0f64..2.0, 4)) {
            let cc = contraction_constants(gamma);
            let z = box_member(512, cc.a, cc.b, &c);
            let (img, mu) = apply_operator(&z, gamma).unwrap();
            prop_assert!(img.in_box(cc.a, cc.b, 1e-9));
            prop_assert!(mu >= gamma * PI / (2.0 * cc.b) - 1e-12);
            prop_assert!(mu <= gamma * PI / (2.0 * cc.a) + 1e-12);
        }

        #[test]
        fn operator_contracts(gamma in 0.0f64..0.179,
                              c1 in prop::collection::vec(-2.0f64..2.0, 4),
                              c2 in prop::collection::vec(-2.0f64..2.0, 4)) {
            let cc = contraction_constants(gamma);
            let z1 = box_member(512, cc.a, cc.b, &c1);
            let z2 = box_member(512, cc.a, cc.b, &c2);
            let d0 = weighted_distance(&z1, &z2).unwrap();
            let d1 = weighted_distance(&apply_operator(&z1, gamma).unwrap().0, &apply_operator(&z2, gamma).unwrap().0).unwrap();
            prop_assert!(d1 <= cc.lambda * d0 + 1e-9, "d1={d1} lambda*d0={}", cc.lambda * d0);
        }
    }
}
