use anyhow::anyhow;
use cpstat::distribution::{
    classify_regime, pdf_gaussian_asymptotic, pdf_grid, pdf_lifshitz_tail, pdf_moderate_asymptotic,
    Spacing,
};
use cpstat::montecarlo::{
    build_histogram, compare_to_pdf, run_ensemble, Binning, EnsembleConfig, SamplingGeometry,
    SamplingMode, RNG_IDENTITY,
};
use cpstat::pws::{
    cumulant_dimensional, cumulant_dimensionless, gamma7_pair, mean_potential,
    mean_potential_effective_medium, relative_fluctuation, MediumSpec, PairCoefficient,
    HBAR_C_EV_NM,
};
use cpstat::validation::{run_check, Level, ValidationOptions, CHECK_COUNT};
use serde_json::Value;

use crate::config::{GammaCurveArgs, MomentsArgs, PdfArgs, SampleArgs, Shared, ValidateArgs};
use crate::output::{Cell, Table};
use crate::BadInput;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REALIZATIONS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// What a command produced and how the run ended.
pub struct Run {
    pub tables: Vec<Table>,
    pub seed: Option<u64>,
    pub rng: bool,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationFailed,
    ConvergenceFailed,
}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    BadInput::from(anyhow!(msg.into())).into()
}

/// Physical inputs after cross-checking: `χ` directly or from `(n, z)`, and
/// the pair coefficient from `Γ₇` or `(α₀, αₛ, ħc)`.
#[derive(Debug, Clone, Copy)]
pub struct Physical {
    pub chi: Option<f64>,
    pub n: Option<f64>,
    pub z: Option<f64>,
    pub coeff: Option<PairCoefficient<f64>>,
    /// `(α₀, αₛ, ħc)` when given.
    pub polarizabilities: Option<(f64, f64, f64)>,
}

impl Physical {
    pub fn resolve(shared: &Shared) -> anyhow::Result<Self> {
        // Dimensional defaults: nanometres, ħc in eV·nm.
        let hbar_c = shared.hbar_c.unwrap_or(HBAR_C_EV_NM);
        let polarizabilities =
            match (shared.alpha0, shared.alpha_s) {
                (Some(a0), Some(a_s)) => Some((a0, a_s, hbar_c)),
                (None, None) => None,
                _ => return Err(bad(
                    "dimensional inputs accept (n, z, gamma7) or (n, z, alpha0, alpha-s, hbar-c); \
                     alpha0 and alpha-s must be given together",
                )),
            };
        let coeff = match (shared.gamma7, polarizabilities) {
            (Some(_), Some(_)) => {
                return Err(bad(
                    "give either --gamma7 or (--alpha0, --alpha-s, --hbar-c), not both",
                ))
            }
            (Some(g), None) => Some(PairCoefficient::from_gamma7(g, hbar_c)?),
            (None, Some((a0, a_s, hc))) => Some(gamma7_pair(a0, a_s, hc)?),
            (None, None) => None,
        };
        let (chi, n, z) = match (shared.chi, shared.n, shared.z) {
            (Some(c), Some(n), Some(z)) => {
                if ((n * z.powi(3)) / c - 1.0).abs() > 1e-12 {
                    return Err(bad(format!(
                        "--chi {c} disagrees with n z³ = {}",
                        n * z.powi(3)
                    )));
                }
                (Some(c), Some(n), Some(z))
            }
            (Some(c), Some(n), None) => (Some(c), Some(n), Some((c / n).cbrt())),
            (Some(c), None, Some(z)) => (Some(c), Some(c / z.powi(3)), Some(z)),
            (None, Some(n), Some(z)) => (Some(n * z.powi(3)), Some(n), Some(z)),
            (c, n, z) => (c, n, z),
        };
        for (name, v) in [("chi", chi), ("n", n), ("z", z)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad(format!("{name} must be positive and finite, got {v}")));
                }
            }
        }
        Ok(Self {
            chi,
            n,
            z,
            coeff,
            polarizabilities,
        })
    }

    pub fn require_chi(&self) -> anyhow::Result<f64> {
        self.chi
            .ok_or_else(|| bad("need --chi, or --n together with --z"))
    }

    /// `Ū` and, with polarizabilities, its effective-medium form.
    fn mean_potentials(&self, z: f64) -> anyhow::Result<Option<(f64, Option<f64>)>> {
        let (Some(n), Some(coeff)) = (self.n, self.coeff) else {
            return Ok(None);
        };
        let alpha_s = self.polarizabilities.map_or(f64::MIN_POSITIVE, |p| p.1);
        let medium = MediumSpec {
            density_n: n,
            polarizability_alpha_s: alpha_s,
            radius_a: 0.0,
        };
        let direct = mean_potential(&medium, z, &coeff)?;
        let effective = match self.polarizabilities {
            Some((a0, _, hc)) => Some(mean_potential_effective_medium(&medium, z, a0, hc)?),
            None => None,
        };
        Ok(Some((direct, effective)))
    }

    /// Records the derived quantities back into the shared parameters.
    pub fn fill(&self, shared: &mut Shared) {
        shared.chi = shared.chi.or(self.chi);
        shared.n = shared.n.or(self.n);
        shared.z = shared.z.or(self.z);
        if let Some(c) = self.coeff {
            shared.gamma7 = Some(c.gamma7);
            shared.hbar_c = Some(c.hbar_c);
        }
    }
}

pub fn moments(shared: &mut Shared, args: &mut MomentsArgs) -> anyhow::Result<Run> {
    let phys = Physical::resolve(shared)?;
    let chi = phys.require_chi()?;
    let m_max = *args.m_max.get_or_insert(4);
    if m_max == 0 {
        return Err(bad("--m-max must be at least 1"));
    }
    phys.fill(shared);
    let dimensional = match (phys.n, phys.z, phys.coeff) {
        (Some(n), Some(z), Some(coeff)) => Some((MediumSpec::from_density(n)?, z, coeff)),
        _ => None,
    };
    let mut columns = vec!["m", "cumulant_s"];
    if dimensional.is_some() {
        columns.push("cumulant_u");
    }
    let mut table = Table::new("moments", &columns);
    for m in 1..=m_max {
        let mut row: Vec<Cell> = vec![m.into(), cumulant_dimensionless(m, chi)?.into()];
        if let Some((medium, z, coeff)) = &dimensional {
            row.push(cumulant_dimensional(m, medium, *z, coeff)?.into());
        }
        table.push(row);
    }
    table.note("chi", chi);
    table.note("gamma", relative_fluctuation(chi)?);
    if let Some(z) = phys.z {
        if let Some((direct, effective)) = phys.mean_potentials(z)? {
            table.note("mean_potential", direct);
            if let Some(e) = effective {
                table.note("mean_potential_effective_medium", e);
            }
        }
    }
    Ok(Run {
        tables: vec![table],
        seed: None,
        rng: false,
        status: Status::Ok,
    })
}

fn parse_spacing(s: &str) -> anyhow::Result<Spacing> {
    match s {
        "linear" | "lin" => Ok(Spacing::Linear),
        "log" => Ok(Spacing::Log),
        other => Err(bad(format!("unknown spacing {other:?} (linear or log)"))),
    }
}

pub fn pdf(shared: &mut Shared, args: &mut PdfArgs) -> anyhow::Result<Run> {
    let phys = Physical::resolve(shared)?;
    let chi = phys.require_chi()?;
    phys.fill(shared);
    let tol = *shared.tol.get_or_insert(DEFAULT_TOL);
    let s_min = *args.s_min.get_or_insert(0.05);
    let s_max = *args.s_max.get_or_insert(4.0);
    let points = *args.points.get_or_insert(200);
    let spacing = parse_spacing(args.spacing.get_or_insert_with(|| "linear".into()))?;
    let grid = pdf_grid(s_min, s_max, points, spacing, chi, tol)?;
    let mut table = Table::new(
        "pdf",
        &[
            "s",
            "p",
            "error",
            "regime",
            "gaussian",
            "moderate",
            "lifshitz_tail",
            "status",
        ],
    );
    for i in 0..grid.len() {
        let s = grid.s_values[i];
        let regime = classify_regime(s, chi)?;
        table.push(vec![
            s.into(),
            grid.p_values[i].into(),
            grid.error_estimates[i].into(),
            regime.kind.label().into(),
            pdf_gaussian_asymptotic(s, chi).into(),
            pdf_moderate_asymptotic(s, chi).value.into(),
            pdf_lifshitz_tail(s, chi)?.value.into(),
            grid.failures[i]
                .clone()
                .unwrap_or_else(|| "ok".into())
                .into(),
        ]);
    }
    table.note("chi", chi);
    Ok(Run {
        tables: vec![table],
        seed: None,
        rng: false,
        status: if grid.all_converged() {
            Status::Ok
        } else {
            Status::ConvergenceFailed
        },
    })
}

fn geometry(
    shared: &Shared,
    args: &SampleArgs,
    phys: &Physical,
) -> anyhow::Result<SamplingGeometry> {
    let mode: SamplingMode = shared.mode.as_deref().unwrap_or("halfspace").parse()?;
    let z = phys.z.unwrap_or(1.0);
    match mode {
        SamplingMode::PoissonHalfspace => Ok(SamplingGeometry::halfspace(z, phys.require_chi()?)?),
        SamplingMode::FixedNCube => {
            let (Some(side), Some(count)) = (args.cube_side, args.cube_n) else {
                return Err(bad("cube mode needs --cube-side and --cube-n"));
            };
            let g = SamplingGeometry::cube(side, count, z)?;
            if let Some(c) = phys.chi {
                if (g.chi / c - 1.0).abs() > 1e-12 {
                    return Err(bad(format!("--chi {c} disagrees with N z³/L³ = {}", g.chi)));
                }
            }
            Ok(g)
        }
    }
}

pub fn sample(shared: &mut Shared, args: &mut SampleArgs) -> anyhow::Result<Run> {
    let phys = Physical::resolve(shared)?;
    let geometry = geometry(shared, args, &phys)?;
    let chi = geometry.chi;
    let phys = Physical {
        chi: Some(chi),
        z: Some(geometry.z),
        n: phys.n.or(Some(chi / geometry.z.powi(3))),
        ..phys
    };
    phys.fill(shared);
    shared.mode = Some(
        match geometry.mode {
            SamplingMode::PoissonHalfspace => "halfspace",
            SamplingMode::FixedNCube => "cube",
        }
        .into(),
    );
    let seed = *shared.seed.get_or_insert(DEFAULT_SEED);
    let realizations = *shared.realizations.get_or_insert(DEFAULT_REALIZATIONS);
    let raw = *args.raw_samples.get_or_insert(false);
    let reference_points = *args.reference_points.get_or_insert(800);
    let coeff = match phys.coeff {
        Some(c) => c,
        None => PairCoefficient::from_gamma7(1.0, 1.0)?,
    };
    let result = run_ensemble(&EnsembleConfig {
        geometry,
        coeff,
        realizations,
        seed,
        workers: 0,
    })?;
    let binning = match args.bins {
        Some(0) => return Err(bad("--bins must be positive")),
        Some(b) => {
            let lo = result
                .samples_s
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let hi = result
                .samples_s
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                Binning::FixedWidth((hi - lo) / b as f64)
            } else {
                Binning::Auto
            }
        }
        None => Binning::Auto,
    };
    let histogram = build_histogram(&result.samples_s, &binning)?;
    let mut hist = Table::new(
        "histogram",
        &[
            "bin_lower",
            "bin_upper",
            "count",
            "density",
            "standard_error",
        ],
    );
    for i in 0..histogram.bin_count() {
        hist.push(vec![
            histogram.bin_edges[i].into(),
            histogram.bin_edges[i + 1].into(),
            histogram.counts[i].into(),
            histogram.density[i].into(),
            histogram.standard_errors[i].into(),
        ]);
    }

    let mut summary = Table::new("summary", &["statistic", "value"]);
    let mut stat = |name: &str, v: Cell| summary.push(vec![name.into(), v]);
    stat("chi", chi.into());
    stat("realizations", result.realization_count.into());
    stat("mean_s", result.mean_s.into());
    stat("stderr_mean_s", result.stderr_mean.into());
    stat("std_s", result.std_s.into());
    stat("gamma_empirical", result.relative_fluctuation.into());
    stat("stderr_gamma", result.stderr_relative_fluctuation.into());
    stat("gamma_theory", relative_fluctuation(chi)?.into());
    for (m, (k, se)) in result
        .cumulants_s
        .values
        .iter()
        .zip(&result.cumulant_stderr)
        .enumerate()
    {
        stat(&format!("k{}_empirical", m + 1), (*k).into());
        stat(&format!("k{}_stderr", m + 1), (*se).into());
        stat(
            &format!("k{}_theory", m + 1),
            cumulant_dimensionless(m + 1, chi)?.into(),
        );
    }
    if let Some((direct, _)) = phys.mean_potentials(geometry.z)? {
        stat("mean_potential_theory", direct.into());
        stat("mean_potential_empirical", (direct * result.mean_s).into());
    }
    let comparison = cpstat::validation::reference_grid(chi, reference_points)
        .and_then(|grid| compare_to_pdf(&result.samples_s, &grid));
    match comparison {
        Ok(c) => {
            stat("ks_distance", c.ks_distance.into());
            stat("chi2_per_dof", c.chi2_per_dof.into());
            stat("chi2_dof", c.dof.into());
            stat("reference_grid_mass", c.grid_mass.into());
            stat("covered_fraction", c.covered_fraction.into());
        }
        Err(e) => stat("comparison_error", e.to_string().into()),
    }

    let mut tables = vec![summary, hist];
    if raw {
        let mut samples = Table::new("samples", &["index", "s"]);
        for (i, s) in result.samples_s.iter().enumerate() {
            samples.push(vec![i.into(), (*s).into()]);
        }
        tables.push(samples);
    }
    Ok(Run {
        tables,
        seed: Some(seed),
        rng: true,
        status: Status::Ok,
    })
}

pub fn gamma_curve(shared: &mut Shared, args: &mut GammaCurveArgs) -> anyhow::Result<Run> {
    if shared.chi.is_some() || shared.z.is_some() {
        return Err(bad("gamma-curve takes --chi-list (and optionally --n for dimensional columns), not --chi or --z"));
    }
    let phys = Physical::resolve(shared)?;
    phys.fill(shared);
    let chis = args
        .chi_list
        .get_or_insert_with(|| vec![0.2, 0.5, 1.0, 2.0, 5.0])
        .clone();
    if chis.is_empty() {
        return Err(bad("--chi-list is empty"));
    }
    let seed = *shared.seed.get_or_insert(DEFAULT_SEED);
    let realizations = *shared.realizations.get_or_insert(DEFAULT_REALIZATIONS);
    let dimensional = phys.n.is_some() && phys.coeff.is_some();
    let mut columns = vec![
        "chi",
        "realizations",
        "seed",
        "mean_s",
        "stderr_mean_s",
        "gamma_empirical",
        "stderr_gamma",
        "gamma_theory",
        "z_score",
    ];
    if dimensional {
        columns.extend(["z", "mean_potential_theory", "mean_potential_empirical"]);
        if phys.polarizabilities.is_some() {
            columns.push("mean_potential_effective_medium");
        }
    }
    let mut table = Table::new("gamma_curve", &columns);
    let coeff = match phys.coeff {
        Some(c) => c,
        None => PairCoefficient::from_gamma7(1.0, 1.0)?,
    };
    for (i, &chi) in chis.iter().enumerate() {
        // One z per χ: the given density fixes z = (χ/n)^{1/3}.
        let z = phys.n.map_or(1.0, |n| (chi / n).cbrt());
        let row_seed = seed.wrapping_add(i as u64);
        let r = run_ensemble(&EnsembleConfig {
            geometry: SamplingGeometry::halfspace(z, chi)?,
            coeff,
            realizations,
            seed: row_seed,
            workers: 0,
        })?;
        let theory = relative_fluctuation(chi)?;
        let mut row: Vec<Cell> = vec![
            chi.into(),
            realizations.into(),
            row_seed.into(),
            r.mean_s.into(),
            r.stderr_mean.into(),
            r.relative_fluctuation.into(),
            r.stderr_relative_fluctuation.into(),
            theory.into(),
            ((r.relative_fluctuation - theory) / r.stderr_relative_fluctuation).into(),
        ];
        if dimensional {
            let (direct, effective) = phys
                .mean_potentials(z)?
                .ok_or_else(|| anyhow!("dimensional inputs incomplete"))?;
            row.extend([z.into(), direct.into(), (direct * r.mean_s).into()]);
            if let Some(e) = effective {
                row.push(e.into());
            }
        }
        table.push(row);
    }
    Ok(Run {
        tables: vec![table],
        seed: Some(seed),
        rng: true,
        status: Status::Ok,
    })
}

pub fn validate(shared: &mut Shared, args: &mut ValidateArgs) -> anyhow::Result<Run> {
    let level: Level = args
        .level
        .get_or_insert_with(|| "fast".into())
        .parse()
        .map_err(|_| bad("--level must be fast or full"))?;
    let mut options = ValidationOptions::new(level);
    options.seed = *shared.seed.get_or_insert(options.seed);
    let mut table = Table::new(
        "validation",
        &[
            "id",
            "name",
            "passed",
            "measured",
            "tolerance",
            "seconds",
            "detail",
        ],
    );
    let mut all = true;
    for id in 1..=CHECK_COUNT {
        let c = run_check(id, &options);
        eprintln!("{}", c.line());
        all &= c.passed;
        table.push(vec![
            (c.id as usize).into(),
            c.name.into(),
            c.passed.into(),
            c.measured.into(),
            c.tolerance.into(),
            c.seconds.into(),
            c.detail.into(),
        ]);
    }
    Ok(Run {
        tables: vec![table],
        seed: Some(options.seed),
        rng: true,
        status: if all {
            Status::Ok
        } else {
            Status::ValidationFailed
        },
    })
}

/// The resolved parameters of a run as one JSON object, unset keys dropped.
pub fn resolved_config<A: serde::Serialize>(shared: &Shared, args: &A) -> Value {
    let mut out = serde_json::Map::new();
    for part in [serde_json::to_value(shared), serde_json::to_value(args)] {
        if let Ok(Value::Object(m)) = part {
            out.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
        }
    }
    Value::Object(out)
}

pub fn rng_identity(run: &Run) -> Option<String> {
    run.rng.then(|| RNG_IDENTITY.to_string())
}
