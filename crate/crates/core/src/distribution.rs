//! Probability density of the normalized potential `s = U/Ū`.
//!
//! In the variable `w = 20t/(2πχ)` the cumulant generating function of `s`
//! is `φ = (2πχ/6) B(w)` with the entire function
//!
//! ```text
//! B(w) = −1 + e^{−w} − 2 w^{3/7} γ_{4/7}(w) + 3 w^{2/7} γ_{5/7}(w)
//!      = 6 Σ_{m≥1} (−w)^m / (m! (7m−3)(7m−2)).
//! ```
//!
//! The density is the Bromwich integral of `exp(st + φ(t))`. Along the
//! contour `w = w_c + iτ`
//!
//! ```text
//! p(s) = (χ/10) Re ∫₀^∞ exp{(2πχ/6) [(3/10) s w + B(w)]} dτ.
//! ```
//!
//! With `w_c = 0` this is the plain inversion integral. Deep in the left tail
//! the integrand on that line is a nearly perfect cancellation, so the
//! contour is moved to the real saddle `w_c > 0` of the exponent, where the
//! integrand is largest at `τ = 0` and decays without sign changes nearby.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::quadrature::{
    integrate_adaptive_with_breaks, integrate_oscillatory_semiinfinite_with, Envelope,
    OscillatoryOptions, QuadValue,
};
use crate::specfun::{complex_pow_principal, exp_m1, gamma_real, lower_incomplete_gamma};
use crate::{Complex, Error, Real, Result};

/// `|w|` below which `B` is summed from its Taylor series.
const BRACKET_SERIES_RADIUS: f64 = 4.0;

/// Below `s = χ / SADDLE_SWITCH_DIVISOR` the contour is moved to the saddle.
pub const SADDLE_SWITCH_DIVISOR: f64 = 20.0;

/// Default relative tolerance for the inversion integral.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

fn seven_ths<T: Real>(k: f64) -> T {
    T::of(k / 7.0)
}

fn bracket_series<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    let mut power = Complex::new(T::one(), T::zero());
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut factorial = T::one();
    for m in 1..200 {
        let mf = T::of(m as f64);
        power = power * (-w);
        factorial = factorial * mf;
        let denom = factorial * (T::of(7.0) * mf - T::of(3.0)) * (T::of(7.0) * mf - T::of(2.0));
        let term = power / denom;
        sum = sum + term;
        if term.norm() <= T::epsilon() * sum.norm() / T::of(4.0) {
            return Ok(sum * T::of(6.0));
        }
    }
    Err(Error::Convergence {
        func: "cgf bracket series",
        iterations: 200,
    })
}

fn bracket_special<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    let low = lower_incomplete_gamma(seven_ths::<T>(4.0), w)?;
    let high = lower_incomplete_gamma(seven_ths::<T>(5.0), w)?;
    let w37 = complex_pow_principal(w, seven_ths::<T>(3.0))?;
    let w27 = complex_pow_principal(w, seven_ths::<T>(2.0))?;
    Ok(exp_m1(-w) - w37 * low * T::of(2.0) + w27 * high * T::of(3.0))
}

/// `B(w)`, the bracket of the cumulant generating function, computed from
/// its Taylor series near the origin and from incomplete gamma functions
/// elsewhere.
pub fn cgf_bracket<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    if w.norm() <= T::of(BRACKET_SERIES_RADIUS) {
        bracket_series(w)
    } else {
        bracket_special(w)
    }
}

/// `B` through the incomplete-gamma route only (exposed for cross-checks).
pub fn cgf_bracket_special<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    bracket_special(w)
}

/// `B` through the Taylor series only (exposed for cross-checks; loses
/// accuracy when `|w| − Re w` is large).
pub fn cgf_bracket_series<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    bracket_series(w)
}

/// Cumulant generating function of `s`, `φ = (2πχ/6) B(τ)`, as a function of
/// the scaled argument `τ = 20t/(2πχ)`.
pub fn cgf_phi<T: Real>(tau: Complex<T>, chi: T) -> Result<Complex<T>> {
    if !(chi > T::zero()) {
        return Err(domain("cgf_phi", "chi must be positive"));
    }
    Ok(cgf_bracket(tau)? * (T::of(2.0) * T::PI() * chi / T::of(6.0)))
}

/// `B'(w)` for real `w ≥ 0`.
fn bracket_slope<T: Real>(w: T) -> Result<T> {
    if w <= T::of(BRACKET_SERIES_RADIUS) {
        // 6 Σ_{m≥1} (−1)^m w^{m−1} / ((m−1)! (7m−3)(7m−2))
        let mut power = T::one();
        let mut factorial = T::one();
        let mut sum = T::zero();
        for m in 1..200 {
            let mf = T::of(m as f64);
            if m > 1 {
                power = power * (-w);
                factorial = factorial * (mf - T::one());
            }
            let term = -power
                / (factorial * (T::of(7.0) * mf - T::of(3.0)) * (T::of(7.0) * mf - T::of(2.0)));
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() / T::of(4.0) {
                return Ok(sum * T::of(6.0));
            }
        }
        return Err(Error::Convergence {
            func: "cgf bracket slope series",
            iterations: 200,
        });
    }
    let wc = Complex::new(w, T::zero());
    let low = lower_incomplete_gamma(seven_ths::<T>(4.0), wc)?.re;
    let high = lower_incomplete_gamma(seven_ths::<T>(5.0), wc)?.re;
    Ok(seven_ths::<T>(6.0)
        * (w.powf(seven_ths::<T>(-5.0)) * high - w.powf(seven_ths::<T>(-4.0)) * low))
}

/// Real saddle `w > 0` of `(3/10) s w + B(w)`, defined for `0 < s < 1`.
pub fn real_saddle<T: Real>(s: T) -> Result<T> {
    if !(s > T::zero() && s < T::one()) {
        return Err(domain("real_saddle", format!("s = {s} must lie in (0, 1)")));
    }
    let target = T::of(0.3) * s;
    let residual = |w: T| bracket_slope(w).map(|d| d + target);
    // B'(w) ≈ −(6/7) Γ(4/7) w^{−4/7} far out.
    let g47 = gamma_real(seven_ths::<T>(4.0))?;
    let mut hi = (seven_ths::<T>(6.0) * g47 / target)
        .powf(T::of(7.0 / 4.0))
        .max(T::one());
    let mut guard = 0;
    while residual(hi)? <= T::zero() {
        hi = hi * T::of(4.0);
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence {
                func: "real_saddle",
                iterations: guard,
            });
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = if lo > T::zero() {
            (lo * hi).sqrt()
        } else {
            hi / T::of(1e6)
        };
        let mid = if mid <= lo {
            (lo + hi) / T::of(2.0)
        } else {
            mid
        };
        if residual(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::of(4.0) * T::epsilon() * hi {
            break;
        }
    }
    Ok((lo + hi) / T::of(2.0))
}

/// Which contour the inversion integral was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `w_c = 0`: the oscillatory integral along the imaginary axis.
    Direct,
    /// `w_c` at the real saddle: the small-`s` evaluation.
    SaddleShifted,
}

/// One evaluation of `p(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfValue<T> {
    /// Density, clamped at zero.
    pub p: T,
    pub error: T,
    /// `ln p`; finite even where `p` underflows, `−∞` when clamped to zero.
    pub ln_p: T,
    pub representation: Representation,
    pub contour_shift: T,
    pub truncation_point: T,
    pub panels_used: usize,
    pub envelope_violation: bool,
}

fn check_s_chi<T: Real>(func: &'static str, s: T, chi: T) -> Result<()> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(domain(func, format!("s = {s} must be positive")));
    }
    if !(chi > T::zero()) || !chi.is_finite() {
        return Err(domain(func, format!("chi = {chi} must be positive")));
    }
    Ok(())
}

/// Exact `p(s)` at `χ` from the inversion integral.
pub fn pdf_exact<T: Real>(s: T, chi: T, rel_tol: T) -> Result<PdfValue<T>> {
    check_s_chi("pdf_exact", s, chi)?;
    let representation = if s < chi / T::of(SADDLE_SWITCH_DIVISOR) && s < T::one() {
        Representation::SaddleShifted
    } else {
        Representation::Direct
    };
    pdf_exact_on(s, chi, rel_tol, representation)
}

/// `p(s)` on an explicitly chosen contour. Both contours give the same value
/// up to quadrature error wherever both are numerically usable.
pub fn pdf_exact_on<T: Real>(
    s: T,
    chi: T,
    rel_tol: T,
    representation: Representation,
) -> Result<PdfValue<T>> {
    check_s_chi("pdf_exact", s, chi)?;
    let shift = match representation {
        Representation::Direct => T::zero(),
        Representation::SaddleShifted => real_saddle(s)?,
    };
    let k = T::of(2.0) * T::PI() * chi / T::of(6.0);
    let linear = T::of(0.3) * s;
    let exponent = |w: Complex<T>| cgf_bracket(w).map(|b| (w * linear + b) * k);
    let peak = exponent(Complex::new(shift, T::zero()))?.re;

    let integrand = |tau: T| {
        let w = Complex::new(shift, tau);
        match exponent(w) {
            Ok(e) => (e - peak).exp(),
            Err(_) => Complex::new(T::nan(), T::nan()),
        }
    };
    let envelope = Envelope {
        c1: T::of(2.0) * T::PI() * chi / T::of(3.0)
            * gamma_real(seven_ths::<T>(4.0))?
            * (T::of(3.0) * T::PI() / T::of(14.0)).cos(),
        p: seven_ths::<T>(3.0),
    };
    let omega = T::PI() * chi * s / T::of(10.0);
    // Subtracting the peak exponent leaves noise of order ε|peak| in the
    // integrand; no tighter relative accuracy is attainable.
    let rel_tol = rel_tol.max(T::of(64.0) * T::epsilon() * peak.abs());
    let mut options = OscillatoryOptions::new(rel_tol);
    // The truncation point grows like ln(1/ε)^{7/3}; loose requests get a
    // correspondingly shorter range.
    options.eps_trunc = (rel_tol * T::of(1e-3)).max(T::of(1e-16)).min(T::of(1e-8));
    let quad = integrate_oscillatory_semiinfinite_with(integrand, envelope, omega, options)
        .map_err(|e| match e {
            Error::NonFinite { .. } => Error::Convergence {
                func: "pdf_exact integrand",
                iterations: 0,
            },
            Error::ToleranceNotMet {
                value_re,
                value_im,
                abs_error,
                panels,
            } => {
                let factor = (chi / T::of(10.0)).to_f64_lossy() * peak.to_f64_lossy().exp();
                Error::ToleranceNotMet {
                    value_re: value_re * factor,
                    value_im: value_im * factor,
                    abs_error: abs_error * factor,
                    panels,
                }
            }
            other => other,
        })?;

    let prefactor_ln = (chi / T::of(10.0)).ln() + peak;
    let scale = prefactor_ln.exp();
    let raw = quad.value.re;
    let error = quad.abs_error_estimate * scale;
    let (p, ln_p, error) = if raw > T::zero() {
        (raw * scale, prefactor_ln + raw.ln(), error)
    } else {
        // Negative within (or beyond) the error bound: clamp and widen.
        (T::zero(), T::neg_infinity(), error.max(-raw * scale))
    };
    Ok(PdfValue {
        p,
        error,
        ln_p,
        representation,
        contour_shift: shift,
        truncation_point: quad.truncation_point.unwrap_or(T::zero()),
        panels_used: quad.panels_used,
        envelope_violation: quad.envelope_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Tabulated density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfGrid<T> {
    pub chi: T,
    pub s_values: Vec<T>,
    pub p_values: Vec<T>,
    pub error_estimates: Vec<T>,
    /// `Some(message)` where the evaluation failed; the row then holds the
    /// best available estimate (zero when none exists).
    pub failures: Vec<Option<String>>,
}

impl<T: Real> PdfGrid<T> {
    pub fn len(&self) -> usize {
        self.s_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_values.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.failures.iter().all(Option::is_none)
    }

    /// Trapezoid integral of `g(s) p(s)` over the grid.
    pub fn trapezoid_moment(&self, g: impl Fn(T) -> T) -> T {
        self.s_values
            .windows(2)
            .zip(self.p_values.windows(2))
            .fold(T::zero(), |acc, (s, p)| {
                acc + (s[1] - s[0]) * (g(s[0]) * p[0] + g(s[1]) * p[1]) / T::of(2.0)
            })
    }
}

/// Grid points of `spacing` kind on `[s_min, s_max]`.
pub fn grid_points<T: Real>(
    s_min: T,
    s_max: T,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<T>> {
    if n_points < 2 {
        return Err(domain("pdf_grid", "need at least two points"));
    }
    if !(s_min > T::zero()) || !(s_max >= s_min) || !s_max.is_finite() {
        return Err(domain(
            "pdf_grid",
            format!("need 0 < s_min ≤ s_max, got [{s_min}, {s_max}]"),
        ));
    }
    let last = T::of((n_points - 1) as f64);
    Ok((0..n_points)
        .map(|i| {
            if i + 1 == n_points {
                return s_max;
            }
            let frac = T::of(i as f64) / last;
            match spacing {
                Spacing::Linear => s_min + (s_max - s_min) * frac,
                Spacing::Log => (s_min.ln() + (s_max.ln() - s_min.ln()) * frac).exp(),
            }
        })
        .collect())
}

/// `p(s)` on a grid; each point is independent, so the grid is evaluated in
/// parallel and the result does not depend on the evaluation order.
pub fn pdf_grid<T: Real>(
    s_min: T,
    s_max: T,
    n_points: usize,
    spacing: Spacing,
    chi: T,
    rel_tol: T,
) -> Result<PdfGrid<T>> {
    let s_values = grid_points(s_min, s_max, n_points, spacing)?;
    pdf_on_points(&s_values, chi, rel_tol)
}

/// `p(s)` at arbitrary positive points.
pub fn pdf_on_points<T: Real>(s_values: &[T], chi: T, rel_tol: T) -> Result<PdfGrid<T>> {
    if !(chi > T::zero()) {
        return Err(domain("pdf_grid", "chi must be positive"));
    }
    let rows: Vec<(T, T, Option<String>)> = s_values
        .par_iter()
        .map(|&s| match pdf_exact(s, chi, rel_tol) {
            Ok(v) => (v.p, v.error, None),
            Err(Error::ToleranceNotMet {
                value_re,
                abs_error,
                ..
            }) => (
                T::of(value_re.max(0.0)),
                T::of(abs_error),
                Some(format!("tolerance not met at s = {s}")),
            ),
            Err(e) => (T::zero(), T::infinity(), Some(e.to_string())),
        })
        .collect();
    let mut grid = PdfGrid {
        chi,
        s_values: s_values.to_vec(),
        p_values: Vec::with_capacity(rows.len()),
        error_estimates: Vec::with_capacity(rows.len()),
        failures: Vec::with_capacity(rows.len()),
    };
    for (p, e, f) in rows {
        grid.p_values.push(p);
        grid.error_estimates.push(e);
        grid.failures.push(f);
    }
    Ok(grid)
}

/// Moments `(∫p, ∫s p, ∫(s−1)² p)` integrated together.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Triple<T>([T; 3]);

impl<T: Real> std::ops::Add for Triple<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Triple([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}
impl<T: Real> std::ops::Sub for Triple<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Triple([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}
impl<T: Real> std::ops::Mul<T> for Triple<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Triple([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}
impl<T: Real> num_traits::Zero for Triple<T> {
    fn zero() -> Self {
        Triple([T::zero(); 3])
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
}
impl<T: Real> QuadValue<T> for Triple<T> {
    fn magnitude(self) -> T {
        // The normalization dominates; tolerances refer to it.
        self.0[0].abs().max(self.0[1].abs()).max(self.0[2].abs())
    }
    fn is_finite_value(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
    fn parts(self) -> (f64, f64) {
        (self.0[0].to_f64_lossy(), self.0[1].to_f64_lossy())
    }
}

/// Low-order moments of `p(s)` integrated over `[s_lower, s_upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfMoments<T> {
    pub chi: T,
    pub mass: T,
    pub mean: T,
    /// `∫(s−1)² p ds`.
    pub second_central: T,
    pub abs_error: T,
    pub s_lower: T,
    pub s_upper: T,
}

/// Integration range holding all but a negligible part of the mass. The
/// lower end steps down from `s = 1/2` until `p < 1e-14`; the upper end
/// starts at the Gaussian bound `(33π/100) χ (s−1)² = ln 10⁸ + 2` and is
/// pushed out until `s² p(s)` is below `1e-12` or `p` is below its own
/// error estimate.
pub fn moment_range<T: Real>(chi: T) -> Result<(T, T)> {
    let rel_tol = T::of(DEFAULT_REL_TOL);
    if !(chi > T::zero()) {
        return Err(domain("moment_range", "chi must be positive"));
    }
    let mut lower = T::of(0.5);
    for _ in 0..200 {
        if pdf_exact(lower, chi, rel_tol)?.p < T::of(1e-14) {
            break;
        }
        lower = lower * T::of(0.8);
    }
    let gauss = T::one() + ((T::of(1e8).ln() + T::of(2.0)) / (T::of(0.33) * T::PI() * chi)).sqrt();
    let mut upper = gauss.max(T::of(2.0));
    for _ in 0..60 {
        let v = pdf_exact(upper, chi, rel_tol)?;
        // Stop once the tail is negligible or lost in quadrature noise.
        if upper * upper * v.p <= T::of(1e-12) || v.p <= T::of(10.0) * v.error {
            break;
        }
        upper = upper * T::of(1.5);
    }
    Ok((lower, upper))
}

/// `∫p`, `∫s p` and `∫(s−1)² p` by adaptive quadrature over `s`.
pub fn pdf_moments<T: Real>(chi: T, rel_tol: T) -> Result<PdfMoments<T>> {
    let (lower, upper) = moment_range(chi)?;
    // Kinks of p sit at multiples of the largest single-scatterer value.
    let single = T::of(10.0) / (T::PI() * chi);
    let mut breaks = vec![lower];
    for candidate in [
        chi / T::of(SADDLE_SWITCH_DIVISOR),
        T::one(),
        single,
        single * T::of(2.0),
    ] {
        if candidate > lower && candidate < upper {
            breaks.push(candidate);
        }
    }
    breaks.push(upper);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();

    let inner_tol = rel_tol;
    let f = |s: T| match pdf_exact(s, chi, inner_tol) {
        Ok(v) => {
            let d = s - T::one();
            Triple([v.p, s * v.p, d * d * v.p])
        }
        Err(_) => Triple([T::nan(); 3]),
    };
    let r = integrate_adaptive_with_breaks(f, &breaks, T::of(1e-6), T::of(1e-8))?;
    Ok(PdfMoments {
        chi,
        mass: r.value.0[0],
        mean: r.value.0[1],
        second_central: r.value.0[2],
        abs_error: r.abs_error_estimate,
        s_lower: lower,
        s_upper: upper,
    })
}

/// Gaussian limit `p ≈ (√(33χ)/10) exp[−(33π/100) χ (s−1)²]`.
pub fn pdf_gaussian_asymptotic<T: Real>(s: T, chi: T) -> T {
    (T::of(33.0) * chi).sqrt() / T::of(10.0)
        * (-(T::of(0.33) * T::PI() * chi * (s - T::one()).powi(2))).exp()
}

/// The same Gaussian written with mean 1 and variance `K₂(s) = 50/(33πχ)`.
pub fn pdf_gaussian_from_cumulants<T: Real>(s: T, chi: T) -> T {
    let variance = T::of(50.0) / (T::of(33.0) * T::PI() * chi);
    (-(s - T::one()).powi(2) / (T::of(2.0) * variance)).exp()
        / (T::of(2.0) * T::PI() * variance).sqrt()
}

/// An asymptotic estimate with a flag telling whether `(s, χ)` is inside the
/// (guard-banded) regime the formula is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotic<T> {
    pub value: T,
    pub within_validity: bool,
}

/// Moderate-`s` form
/// `p ≈ (2/7) 10^{3/7} (πχ)^{4/7} s^{−10/7} [1 − (πχs/10)^{1/7}]`,
/// intended for `χ ≪ s ≪ 1/χ`. Not clamped: beyond the root of the bracket
/// it goes negative.
pub fn pdf_moderate_asymptotic<T: Real>(s: T, chi: T) -> Asymptotic<T> {
    let pc = T::PI() * chi;
    let bracket = T::one() - (pc * s / T::of(10.0)).powf(seven_ths::<T>(1.0));
    let value =
        T::of(2.0 / 7.0) * T::of(10.0).powf(seven_ths::<T>(3.0)) * pc.powf(seven_ths::<T>(4.0))
            / s.powf(seven_ths::<T>(10.0))
            * bracket;
    Asymptotic {
        value,
        within_validity: s > T::of(10.0) * chi && s < T::of(0.1) / chi,
    }
}

/// Prefactors of the small-`s` tail:
/// `α = (20/7)^{3/8} Γ(4/7)^{7/8}`, `β = 16√2 π (5/7)^{3/4} Γ(4/7)^{7/4} / 21`.
pub fn lifshitz_constants<T: Real>() -> Result<(T, T)> {
    let g = gamma_real(seven_ths::<T>(4.0))?;
    let alpha = T::of(20.0 / 7.0).powf(T::of(3.0 / 8.0)) * g.powf(T::of(7.0 / 8.0));
    let beta = T::of(16.0)
        * T::of(2.0).sqrt()
        * T::PI()
        * T::of(5.0 / 7.0).powf(T::of(0.75))
        * g.powf(T::of(1.75))
        / T::of(21.0);
    Ok((alpha, beta))
}

/// `ln p` of the small-`s` tail for explicit constants `(α, β)`.
pub fn ln_pdf_lifshitz_tail_with<T: Real>(s: T, chi: T, constants: (T, T)) -> T {
    let (alpha, beta) = constants;
    alpha.ln() + chi.sqrt().ln() - T::of(11.0 / 8.0) * s.ln() - beta * chi / s.powf(T::of(0.75))
}

/// Small-`s` tail `p ≈ α √χ s^{−11/8} exp(−β χ / s^{3/4})`, meant for `s ≪ χ`.
pub fn pdf_lifshitz_tail<T: Real>(s: T, chi: T) -> Result<Asymptotic<T>> {
    let constants = lifshitz_constants()?;
    Ok(Asymptotic {
        value: ln_pdf_lifshitz_tail_with(s, chi, constants).exp(),
        within_validity: s <= chi / T::of(10.0),
    })
}

/// `ln` of [`pdf_lifshitz_tail`]; stays finite where the density underflows.
pub fn ln_pdf_lifshitz_tail<T: Real>(s: T, chi: T) -> Result<T> {
    Ok(ln_pdf_lifshitz_tail_with(s, chi, lifshitz_constants()?))
}

/// Phase function of the small-`s` steepest-descent integral,
/// `f(y) = (3/10) i y⁷ − 2Γ(4/7) i^{3/7} s³ y³ + 3Γ(5/7) i^{2/7} s⁴ y²`,
/// and its first two derivatives. `with_quartic = false` drops the `s⁴` term.
pub fn tail_phase<T: Real>(y: Complex<T>, s: T, with_quartic: bool) -> Result<[Complex<T>; 3]> {
    let i = Complex::new(T::zero(), T::one());
    let a = i * T::of(0.3);
    let b = complex_pow_principal(i, seven_ths::<T>(3.0))?
        * (T::of(-2.0) * gamma_real(seven_ths::<T>(4.0))? * s.powi(3));
    let c = if with_quartic {
        complex_pow_principal(i, seven_ths::<T>(2.0))?
            * (T::of(3.0) * gamma_real(seven_ths::<T>(5.0))? * s.powi(4))
    } else {
        Complex::new(T::zero(), T::zero())
    };
    let f = a * y.powi(7) + b * y.powi(3) + c * y.powi(2);
    let f1 = a * T::of(7.0) * y.powi(6) + b * T::of(3.0) * y.powi(2) + c * T::of(2.0) * y;
    let f2 = a * T::of(42.0) * y.powi(5) + b * T::of(6.0) * y + c * T::of(2.0);
    Ok([f, f1, f2])
}

/// Contributing saddle `y_SP = [60Γ(4/7)s³/21]^{1/4} e^{−iπ/14}`.
pub fn saddle_point<T: Real>(s: T) -> Result<Complex<T>> {
    if !(s > T::zero()) {
        return Err(domain("saddle_point", "s must be positive"));
    }
    let modulus = (T::of(60.0) * gamma_real(seven_ths::<T>(4.0))? * s.powi(3) / T::of(21.0))
        .powf(T::of(0.25));
    Ok(Complex::from_polar(modulus, -T::PI() / T::of(14.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    LifshitzTail,
    Moderate,
    Gaussian,
    ExactOnly,
}

impl RegimeKind {
    pub fn label(self) -> &'static str {
        match self {
            RegimeKind::LifshitzTail => "lifshitz_tail",
            RegimeKind::Moderate => "moderate",
            RegimeKind::Gaussian => "gaussian",
            RegimeKind::ExactOnly => "exact_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRegime {
    pub kind: RegimeKind,
    pub validity: String,
}

/// Regime of `(s, χ)` with factor-10 guard bands: Lifshitz tail for
/// `s < χ/10`, moderate for `10χ < s < 0.1/χ`, Gaussian for `s > 10/χ`.
/// Where the Gaussian and tail bands overlap (`χ > 10`) the Gaussian wins.
pub fn classify_regime<T: Real>(s: T, chi: T) -> Result<AsymptoticRegime> {
    check_s_chi("classify_regime", s, chi)?;
    let ten = T::of(10.0);
    let (kind, validity) = if s > ten / chi {
        (RegimeKind::Gaussian, format!("s > 10/χ = {}", ten / chi))
    } else if s < chi / ten {
        (
            RegimeKind::LifshitzTail,
            format!("s < χ/10 = {}", chi / ten),
        )
    } else if s > ten * chi && s < T::of(0.1) / chi {
        (
            RegimeKind::Moderate,
            format!("10χ = {} < s < 0.1/χ = {}", ten * chi, T::of(0.1) / chi),
        )
    } else {
        (
            RegimeKind::ExactOnly,
            "outside every asymptotic band".to_string(),
        )
    };
    Ok(AsymptoticRegime { kind, validity })
}
