//! Monte Carlo sampling of the pairwise-summation potential.
//!
//! Two ensembles are available: scatterers forming a Poisson field in the
//! half-space below the probe (the ensemble the analytic results describe),
//! and a fixed number of scatterers spread uniformly in a cube whose top face
//! lies at distance `z` below the probe.
//!
//! Every realization draws from its own ChaCha8 streams, keyed by the
//! ensemble seed and the realization index, so an ensemble is bitwise
//! reproducible regardless of how the work is split across threads.

mod ensemble;
mod histogram;

pub use ensemble::{jackknife, k_statistics, run_ensemble, EnsembleConfig, EnsembleResult};
pub use histogram::{
    build_histogram, compare_histogram_to_pdf, compare_to_pdf, grid_cdf, ks_two_sample, Binning,
    Histogram, PdfComparison,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::pws::{mean_potential, omitted_mean_fraction, MediumSpec, PairCoefficient};
use crate::{Error, Result};

/// Identity of the random number generator, recorded in exported files.
pub const RNG_IDENTITY: &str =
    "rand_chacha-0.9 ChaCha8Rng; seed_from_u64(seed); stream 2*index (radii, cube points), 2*index+1 (angles)";

/// Largest share of the mean potential that the half-space truncation may
/// leave out.
pub const DEFAULT_OMITTED_MEAN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    PoissonHalfspace,
    FixedNCube,
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson_halfspace" | "halfspace" | "poisson" => Ok(SamplingMode::PoissonHalfspace),
            "fixed_n_cube" | "cube" => Ok(SamplingMode::FixedNCube),
            other => Err(domain("SamplingMode", format!("unknown mode {other:?}"))),
        }
    }
}

/// Where the scatterers live relative to the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGeometry {
    pub mode: SamplingMode,
    /// Probe height above the medium's surface.
    pub z: f64,
    pub chi: f64,
    /// Cube side (cube mode only).
    pub cube_side: Option<f64>,
    /// Scatterer count (cube mode only).
    pub fixed_n: Option<usize>,
    /// Truncation radius around the probe (half-space mode only).
    pub r_max: f64,
}

/// `r_max/z` at which the scatterers beyond `r_max` carry the fraction
/// `omitted` of the mean potential.
pub fn truncation_ratio(omitted: f64) -> Result<f64> {
    if !(omitted > 0.0 && omitted < 1.0) {
        return Err(domain(
            "truncation_ratio",
            "omitted fraction must lie in (0, 1)",
        ));
    }
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while omitted_mean_fraction(hi)? > omitted {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if omitted_mean_fraction(mid)? > omitted {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

impl SamplingGeometry {
    /// Poisson half-space with the default truncation radius.
    pub fn halfspace(z: f64, chi: f64) -> Result<Self> {
        Self::halfspace_with_r_max(z, chi, truncation_ratio(DEFAULT_OMITTED_MEAN)? * z)
    }

    pub fn halfspace_with_r_max(z: f64, chi: f64, r_max: f64) -> Result<Self> {
        let g = Self {
            mode: SamplingMode::PoissonHalfspace,
            z,
            chi,
            cube_side: None,
            fixed_n: None,
            r_max,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n_scatterers` uniform in a cube of side `side`; `χ = N z³/L³`.
    pub fn cube(side: f64, n_scatterers: usize, z: f64) -> Result<Self> {
        let g = Self {
            mode: SamplingMode::FixedNCube,
            z,
            chi: n_scatterers as f64 * (z / side).powi(3),
            cube_side: Some(side),
            fixed_n: Some(n_scatterers),
            r_max: f64::INFINITY,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad(format!("z = {} must be positive", self.z));
        }
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return bad(format!("chi = {} must be positive", self.chi));
        }
        match self.mode {
            SamplingMode::PoissonHalfspace => {
                if !(self.r_max > self.z && self.r_max.is_finite()) {
                    return bad(format!("r_max = {} must exceed z = {}", self.r_max, self.z));
                }
            }
            SamplingMode::FixedNCube => {
                let (Some(side), Some(n)) = (self.cube_side, self.fixed_n) else {
                    return bad("cube mode needs a side and a scatterer count".into());
                };
                if !(side > 0.0 && side.is_finite()) || n == 0 {
                    return bad(format!("cube side {side} and count {n} must be positive"));
                }
                if self.z >= 0.5 * side {
                    return bad(format!(
                        "z = {} must stay below L/2 = {}",
                        self.z,
                        0.5 * side
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn density(&self) -> f64 {
        self.chi / self.z.powi(3)
    }

    /// Mean scatterer count per realization.
    pub fn expected_count(&self) -> f64 {
        match self.mode {
            SamplingMode::PoissonHalfspace => {
                self.chi * 2.0 * std::f64::consts::PI * radial_cdf(self.r_max / self.z)
            }
            SamplingMode::FixedNCube => self.fixed_n.unwrap_or(0) as f64,
        }
    }

    /// Share of the mean potential left out by the truncation radius.
    pub fn omitted_mean(&self) -> Result<f64> {
        match self.mode {
            SamplingMode::PoissonHalfspace => omitted_mean_fraction(self.r_max / self.z),
            SamplingMode::FixedNCube => Ok(0.0),
        }
    }
}

/// Per-realization random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedContext {
    pub seed: u64,
    pub index: u64,
}

impl SeedContext {
    fn stream(&self, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * self.index + purpose);
        rng
    }
}

/// One sampled configuration. The probe sits at `(0, 0, z)` and the medium
/// occupies `height ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub positions: Vec<[f64; 3]>,
    pub probe_distance_z: f64,
    pub potential_u: f64,
    pub normalized_s: f64,
}

/// Normalized volume `∫₁^x y(y−1) dy = (x−1)²(2x+1)/6` of the half-space
/// region between distances `z` and `x z` from the probe, in units of `z³`
/// (times `2π`).
pub fn radial_cdf(x: f64) -> f64 {
    (x - 1.0).powi(2) * (2.0 * x + 1.0) / 6.0
}

/// Inverse of [`radial_cdf`] by Newton iteration on `d = x − 1`; the cubic
/// is convex in `d`, and steps that leave `d > 0` are halved back.
pub fn radial_cdf_inverse(g: f64) -> f64 {
    if g <= 0.0 {
        return 1.0;
    }
    let mut d = if g < 1.0 / 6.0 {
        let d0 = (2.0 * g).sqrt();
        (6.0 * g / (3.0 + 2.0 * d0)).sqrt()
    } else {
        let c = (3.0 * g - 0.25).cbrt();
        c + 0.25 / c - 0.5
    };
    for _ in 0..50 {
        let h = d * d * (3.0 + 2.0 * d) - 6.0 * g;
        let slope = 6.0 * d * (1.0 + d);
        let mut next = d - h / slope;
        if next <= 0.0 {
            next = 0.5 * d;
        }
        let done = (next - d).abs() <= 1e-15 * (1.0 + next);
        d = next;
        if done {
            break;
        }
    }
    1.0 + d
}

/// Fast inverse of [`radial_cdf`] on `[1, r_max/z]` for uniform draws: a
/// table of `x − 1` against `√u` (smooth at both ends) interpolated linearly
/// and polished by two Newton steps.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    g_max: f64,
    nodes: Vec<f64>,
}

const RADIAL_TABLE_SIZE: usize = 1 << 14;

impl RadialSampler {
    pub fn new(x_max: f64) -> Self {
        let g_max = radial_cdf(x_max);
        let nodes = (0..=RADIAL_TABLE_SIZE)
            .map(|i| {
                let t = i as f64 / RADIAL_TABLE_SIZE as f64;
                radial_cdf_inverse(g_max * t * t) - 1.0
            })
            .collect();
        Self { g_max, nodes }
    }

    /// Table for a half-space geometry (a placeholder for the cube).
    pub fn for_geometry(geometry: &SamplingGeometry) -> Self {
        match geometry.mode {
            SamplingMode::PoissonHalfspace => Self::new(geometry.r_max / geometry.z),
            SamplingMode::FixedNCube => Self::new(2.0),
        }
    }

    /// `x` with `radial_cdf(x) = u · radial_cdf(x_max)`, `u ∈ [0, 1]`.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        let pos = u.sqrt() * RADIAL_TABLE_SIZE as f64;
        let i = (pos as usize).min(RADIAL_TABLE_SIZE - 1);
        let frac = pos - i as f64;
        let mut d = self.nodes[i] + (self.nodes[i + 1] - self.nodes[i]) * frac;
        let target = 6.0 * self.g_max * u;
        for _ in 0..2 {
            let slope = 6.0 * d * (1.0 + d);
            if slope <= 0.0 {
                break;
            }
            d -= (d * d * (3.0 + 2.0 * d) - target) / slope;
        }
        1.0 + d
    }
}

/// `Σ (z/rᵢ)⁷` over the radial draws of a half-space realization, together
/// with the radii in units of `z`.
fn halfspace_radii(
    rng: &mut ChaCha8Rng,
    geometry: &SamplingGeometry,
    sampler: &RadialSampler,
    keep: bool,
) -> Result<(f64, Vec<f64>)> {
    let mean = geometry.expected_count();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidGeometry(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut radii = if keep {
        Vec::with_capacity(count)
    } else {
        Vec::new()
    };
    let mut sum = 0.0;
    for _ in 0..count {
        let x = sampler.sample(rng.random::<f64>());
        sum += x.powi(-7);
        if keep {
            radii.push(x);
        }
    }
    Ok((sum, radii))
}

fn cube_points(rng: &mut ChaCha8Rng, geometry: &SamplingGeometry) -> (f64, Vec<[f64; 3]>) {
    let side = geometry.cube_side.unwrap_or(0.0);
    let n = geometry.fixed_n.unwrap_or(0);
    let mut positions = Vec::with_capacity(n);
    let mut sum = 0.0;
    for _ in 0..n {
        let p = [
            (rng.random::<f64>() - 0.5) * side,
            (rng.random::<f64>() - 0.5) * side,
            -rng.random::<f64>() * side,
        ];
        let dz = geometry.z - p[2];
        let r2 = p[0] * p[0] + p[1] * p[1] + dz * dz;
        sum += (geometry.z * geometry.z / r2).powi(3) * (geometry.z * geometry.z / r2).sqrt();
        positions.push(p);
    }
    (sum, positions)
}

fn normalize(
    geometry: &SamplingGeometry,
    coeff: &PairCoefficient<f64>,
    sum_z_over_r7: f64,
) -> Result<(f64, f64)> {
    let medium = MediumSpec::from_density(geometry.density())?;
    let u = -coeff.gamma7 * sum_z_over_r7 / geometry.z.powi(7);
    let mean = mean_potential(&medium, geometry.z, coeff)?;
    Ok((u, u / mean))
}

/// `s` of realization `ctx.index` without materializing positions; bitwise
/// equal to `sample_realization(..).normalized_s`.
pub fn sample_s(
    ctx: SeedContext,
    geometry: &SamplingGeometry,
    coeff: &PairCoefficient<f64>,
) -> Result<f64> {
    geometry.validate()?;
    sample_s_with(ctx, geometry, coeff, &RadialSampler::for_geometry(geometry))
}

/// [`sample_s`] with a prebuilt radial sampler (see
/// [`RadialSampler::for_geometry`]); the geometry is not re-validated.
pub fn sample_s_with(
    ctx: SeedContext,
    geometry: &SamplingGeometry,
    coeff: &PairCoefficient<f64>,
    sampler: &RadialSampler,
) -> Result<f64> {
    let mut rng = ctx.stream(0);
    let sum = match geometry.mode {
        SamplingMode::PoissonHalfspace => halfspace_radii(&mut rng, geometry, sampler, false)?.0,
        SamplingMode::FixedNCube => cube_points(&mut rng, geometry).0,
    };
    Ok(normalize(geometry, coeff, sum)?.1)
}

/// Draws one configuration and its potential `U = Σ −Γ₇/rᵢ⁷`, normalized by
/// the mean of the untruncated half-space.
pub fn sample_realization(
    ctx: SeedContext,
    geometry: &SamplingGeometry,
    coeff: &PairCoefficient<f64>,
) -> Result<Realization> {
    geometry.validate()?;
    sample_realization_with(ctx, geometry, coeff, &RadialSampler::for_geometry(geometry))
}

/// [`sample_realization`] with a prebuilt radial sampler; the geometry is not
/// re-validated.
pub fn sample_realization_with(
    ctx: SeedContext,
    geometry: &SamplingGeometry,
    coeff: &PairCoefficient<f64>,
    sampler: &RadialSampler,
) -> Result<Realization> {
    let mut rng = ctx.stream(0);
    let (sum, positions) = match geometry.mode {
        SamplingMode::PoissonHalfspace => {
            let (sum, radii) = halfspace_radii(&mut rng, geometry, sampler, true)?;
            // Uniform on the spherical cap of radius r below the surface.
            let mut angles = ctx.stream(1);
            let positions = radii
                .iter()
                .map(|&x| {
                    let r = x * geometry.z;
                    let lowest = 1.0 / x;
                    let cos_t = lowest + (1.0 - lowest) * angles.random::<f64>();
                    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * angles.random::<f64>();
                    [
                        r * sin_t * phi.cos(),
                        r * sin_t * phi.sin(),
                        (geometry.z - r * cos_t).min(0.0),
                    ]
                })
                .collect();
            (sum, positions)
        }
        SamplingMode::FixedNCube => cube_points(&mut rng, geometry),
    };
    let (potential_u, normalized_s) = normalize(geometry, coeff, sum)?;
    Ok(Realization {
        positions,
        probe_distance_z: geometry.z,
        potential_u,
        normalized_s,
    })
}
