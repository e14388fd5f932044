//! Closed forms of the pairwise-summation model.
//!
//! The potential is `U = Σᵢ −Γ₇/rᵢ⁷` over a Poisson field of density `n`
//! below a plane at distance `z` from the probe. Integrating the Poisson
//! cumulants over spherical-cap shells `dV = 2πr(r−z)dr` gives
//!
//! ```text
//! K_m(U) = (−1)^m 2πn Γ₇^m / ((7m−3)(7m−2) z^{7m−3})
//! ```
//!
//! and in units of the mean `Ū = K₁` everything depends on `χ = n z³` only.

use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::{Error, Real, Result};

/// ħc in eV·nm (CODATA 2018).
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// `n·a³` above which the dilute-medium picture is flagged.
pub const DILUTE_WARNING_THRESHOLD: f64 = 1e-2;

fn positive<T: Real>(func: &'static str, name: &str, x: T) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(x)
    } else {
        Err(domain(
            func,
            format!("{name} = {x} must be positive and finite"),
        ))
    }
}

/// Random medium: scatterer density, polarizability (SI / ε₀) and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec<T> {
    pub density_n: T,
    pub polarizability_alpha_s: T,
    pub radius_a: T,
}

impl<T: Real> MediumSpec<T> {
    /// Fails unless all fields are positive and `n a³ < 1`.
    pub fn new(density_n: T, polarizability_alpha_s: T, radius_a: T) -> Result<Self> {
        positive("MediumSpec::new", "density", density_n)?;
        positive("MediumSpec::new", "polarizability", polarizability_alpha_s)?;
        positive("MediumSpec::new", "radius", radius_a)?;
        let spec = Self {
            density_n,
            polarizability_alpha_s,
            radius_a,
        };
        if spec.packing() >= T::one() {
            return Err(domain(
                "MediumSpec::new",
                format!("n a³ = {} is not dilute", spec.packing()),
            ));
        }
        Ok(spec)
    }

    /// Medium with only a density; polarizability and radius set to tiny
    /// placeholders (they never enter the pairwise-summation statistics).
    pub fn from_density(density_n: T) -> Result<Self> {
        positive("MediumSpec::from_density", "density", density_n)?;
        Ok(Self {
            density_n,
            polarizability_alpha_s: T::min_positive_value(),
            radius_a: T::min_positive_value(),
        })
    }

    pub fn packing(&self) -> T {
        self.density_n * self.radius_a.powi(3)
    }

    /// Warning text when `n a³` exceeds [`DILUTE_WARNING_THRESHOLD`].
    pub fn dilute_warning(&self) -> Option<String> {
        (self.packing() > T::of(DILUTE_WARNING_THRESHOLD)).then(|| {
            format!(
                "n a³ = {} exceeds {DILUTE_WARNING_THRESHOLD}; pairwise summation assumes a dilute medium",
                self.packing()
            )
        })
    }

    pub fn chi(&self, z: T) -> T {
        self.density_n * z.powi(3)
    }
}

/// Probe sphere. `λ₀` only bounds the retarded regime `z ≫ λ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec<T> {
    pub polarizability_alpha_0: T,
    pub radius: T,
    pub resonance_wavelength_lambda0: T,
}

impl<T: Real> ProbeSpec<T> {
    pub fn new(
        polarizability_alpha_0: T,
        radius: T,
        resonance_wavelength_lambda0: T,
    ) -> Result<Self> {
        positive("ProbeSpec::new", "polarizability", polarizability_alpha_0)?;
        positive("ProbeSpec::new", "radius", radius)?;
        positive(
            "ProbeSpec::new",
            "resonance wavelength",
            resonance_wavelength_lambda0,
        )?;
        Ok(Self {
            polarizability_alpha_0,
            radius,
            resonance_wavelength_lambda0,
        })
    }

    /// Warning text when `z` is not well inside the retarded regime.
    pub fn retarded_warning(&self, z: T) -> Option<String> {
        (z < T::of(10.0) * self.resonance_wavelength_lambda0).then(|| {
            format!(
                "z = {z} is not ≫ λ₀ = {}; the r⁻⁷ pair law assumes the retarded regime",
                self.resonance_wavelength_lambda0
            )
        })
    }
}

/// Coefficient of the retarded pair law `ℰ(r) = −Γ₇/r⁷`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficient<T> {
    pub gamma7: T,
    pub hbar_c: T,
}

impl<T: Real> PairCoefficient<T> {
    /// Uses an explicit `Γ₇`; `hbar_c` is kept for the dimensional outputs.
    pub fn from_gamma7(gamma7: T, hbar_c: T) -> Result<Self> {
        positive("PairCoefficient::from_gamma7", "gamma7", gamma7)?;
        positive("PairCoefficient::from_gamma7", "hbar_c", hbar_c)?;
        Ok(Self { gamma7, hbar_c })
    }
}

/// `(χ, s)` with `χ = n z³` and `s = U/Ū`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint<T> {
    pub chi: T,
    pub s: T,
}

impl<T: Real> DimensionlessPoint<T> {
    pub fn new(chi: T, s: T) -> Result<Self> {
        positive("DimensionlessPoint::new", "chi", chi)?;
        if !s.is_finite() {
            return Err(domain("DimensionlessPoint::new", "s must be finite"));
        }
        Ok(Self { chi, s })
    }

    pub fn from_potential(
        medium: &MediumSpec<T>,
        z: T,
        coeff: &PairCoefficient<T>,
        potential: T,
    ) -> Result<Self> {
        let mean = mean_potential(medium, z, coeff)?;
        Self::new(medium.chi(z), potential / mean)
    }
}

/// Cumulants `K_1..K_order_max` of `s`, index 0 holding `K_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet<T> {
    pub order_max: usize,
    pub values: Vec<T>,
}

impl<T: Real> CumulantSet<T> {
    /// Closed-form cumulants of `s` at `χ`.
    pub fn closed_form(order_max: usize, chi: T) -> Result<Self> {
        if order_max == 0 {
            return Err(domain("CumulantSet::closed_form", "order_max must be ≥ 1"));
        }
        let values = (1..=order_max)
            .map(|m| cumulant_dimensionless(m, chi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { order_max, values })
    }

    pub fn get(&self, m: usize) -> Option<T> {
        m.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

/// `Γ₇ = 23 ħc α₀ αₛ / (4π)³`, the retarded Casimir-Polder coefficient of
/// two polarizable particles.
pub fn gamma7_pair<T: Real>(alpha0: T, alpha_s: T, hbar_c: T) -> Result<PairCoefficient<T>> {
    positive("gamma7_pair", "alpha0", alpha0)?;
    positive("gamma7_pair", "alpha_s", alpha_s)?;
    positive("gamma7_pair", "hbar_c", hbar_c)?;
    let four_pi = T::of(4.0) * T::PI();
    Ok(PairCoefficient {
        gamma7: T::of(23.0) * hbar_c * alpha0 * alpha_s / four_pi.powi(3),
        hbar_c,
    })
}

/// [`gamma7_pair`] for a probe identical to the scatterers.
pub fn gamma7_identical<T: Real>(alpha0: T, hbar_c: T) -> Result<PairCoefficient<T>> {
    gamma7_pair(alpha0, alpha0, hbar_c)
}

/// `ℰ(r) = −Γ₇/r⁷`.
pub fn pair_potential<T: Real>(r: T, coeff: &PairCoefficient<T>) -> Result<T> {
    positive("pair_potential", "r", r)?;
    Ok(-coeff.gamma7 / r.powi(7))
}

/// Potential between the probe and a perfect mirror, `−3α₀ħc/(32π²z⁴)`.
pub fn perfect_mirror_potential<T: Real>(z: T, alpha0: T, hbar_c: T) -> Result<T> {
    positive("perfect_mirror_potential", "z", z)?;
    positive("perfect_mirror_potential", "alpha0", alpha0)?;
    positive("perfect_mirror_potential", "hbar_c", hbar_c)?;
    Ok(-T::of(3.0) * alpha0 * hbar_c / (T::of(32.0) * T::PI() * T::PI() * z.powi(4)))
}

/// Mean potential `Ū = K₁ = −2πnΓ₇/(20 z⁴)`.
pub fn mean_potential<T: Real>(
    medium: &MediumSpec<T>,
    z: T,
    coeff: &PairCoefficient<T>,
) -> Result<T> {
    positive("mean_potential", "z", z)?;
    Ok(-T::of(2.0) * T::PI() * medium.density_n * coeff.gamma7 / (T::of(20.0) * z.powi(4)))
}

/// Effective-medium form of the mean, `(23/60) n αₛ U*(z)`.
pub fn mean_potential_effective_medium<T: Real>(
    medium: &MediumSpec<T>,
    z: T,
    alpha0: T,
    hbar_c: T,
) -> Result<T> {
    let mirror = perfect_mirror_potential(z, alpha0, hbar_c)?;
    Ok(T::of(23.0) / T::of(60.0) * medium.density_n * medium.polarizability_alpha_s * mirror)
}

/// Dimensional cumulant `K_m(U)`, evaluated as sign × exp(log-magnitude).
pub fn cumulant_dimensional<T: Real>(
    m: usize,
    medium: &MediumSpec<T>,
    z: T,
    coeff: &PairCoefficient<T>,
) -> Result<T> {
    if m == 0 {
        return Err(domain("cumulant_dimensional", "order must be ≥ 1"));
    }
    positive("cumulant_dimensional", "z", z)?;
    let mf = T::of(m as f64);
    let log_magnitude = (T::of(2.0) * T::PI() * medium.density_n).ln() + mf * coeff.gamma7.ln()
        - ((T::of(7.0) * mf - T::of(3.0)) * (T::of(7.0) * mf - T::of(2.0))).ln()
        - (T::of(7.0) * mf - T::of(3.0)) * z.ln();
    if log_magnitude > T::max_value().ln() {
        return Err(Error::Overflow {
            func: "cumulant_dimensional",
            log_magnitude: log_magnitude.to_f64_lossy(),
        });
    }
    let magnitude = log_magnitude.exp();
    Ok(if m.is_multiple_of(2) {
        magnitude
    } else {
        -magnitude
    })
}

/// Cumulant of `s`: `K_m(s) = 20^m / ((7m−3)(7m−2)(2πχ)^{m−1})`.
pub fn cumulant_dimensionless<T: Real>(m: usize, chi: T) -> Result<T> {
    if m == 0 {
        return Err(domain("cumulant_dimensionless", "order must be ≥ 1"));
    }
    positive("cumulant_dimensionless", "chi", chi)?;
    let mf = T::of(m as f64);
    let log_value = mf * T::of(20.0).ln()
        - ((T::of(7.0) * mf - T::of(3.0)) * (T::of(7.0) * mf - T::of(2.0))).ln()
        - (mf - T::one()) * (T::of(2.0) * T::PI() * chi).ln();
    if log_value > T::max_value().ln() {
        return Err(Error::Overflow {
            func: "cumulant_dimensionless",
            log_magnitude: log_value.to_f64_lossy(),
        });
    }
    if m == 1 {
        return Ok(T::one());
    }
    Ok(log_value.exp())
}

/// Relative fluctuation `γ = √(50/(33π)) / √χ`.
pub fn relative_fluctuation<T: Real>(chi: T) -> Result<T> {
    positive("relative_fluctuation", "chi", chi)?;
    Ok((T::of(50.0) / (T::of(33.0) * T::PI() * chi)).sqrt())
}

/// Potential with no scatterer closer than the sphere of radius
/// `ρ = √(z² + R²)` around the probe:
/// `−2πnΓ₇ [1/(4ρ⁴) − z/(5ρ⁵)]`.
pub fn exclusion_zone_potential<T: Real>(
    exclusion_radius: T,
    z: T,
    medium: &MediumSpec<T>,
    coeff: &PairCoefficient<T>,
) -> Result<T> {
    positive("exclusion_zone_potential", "z", z)?;
    if !(exclusion_radius >= T::zero()) || !exclusion_radius.is_finite() {
        return Err(domain("exclusion_zone_potential", "R must be ≥ 0"));
    }
    let rho = z.hypot(exclusion_radius);
    let bracket = T::one() / (T::of(4.0) * rho.powi(4)) - z / (T::of(5.0) * rho.powi(5));
    Ok(-T::of(2.0) * T::PI() * medium.density_n * coeff.gamma7 * bracket)
}

/// Fraction of `K₁` carried by scatterers farther than `r_max` from the probe.
pub fn omitted_mean_fraction<T: Real>(r_max_over_z: T) -> Result<T> {
    if !(r_max_over_z >= T::one()) {
        return Err(domain("omitted_mean_fraction", "r_max must be ≥ z"));
    }
    let x = r_max_over_z;
    Ok(T::of(20.0) * (T::one() / (T::of(4.0) * x.powi(4)) - T::one() / (T::of(5.0) * x.powi(5))))
}
