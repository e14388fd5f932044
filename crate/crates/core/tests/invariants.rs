use std::f64::consts::PI;

use cpstat::distribution::{classify_regime, pdf_exact, RegimeKind};
use cpstat::montecarlo::{
    build_histogram, k_statistics, run_ensemble, sample_s, Binning, EnsembleConfig,
    SamplingGeometry, SeedContext,
};
use cpstat::pws::{
    cumulant_dimensional, cumulant_dimensionless, mean_potential, MediumSpec, PairCoefficient,
};
use cpstat::specfun::{complex_pow_principal, lower_incomplete_gamma};
use cpstat::Complex64;
use proptest::prelude::*;

const SEVENTHS: [f64; 4] = [2.0 / 7.0, 3.0 / 7.0, 4.0 / 7.0, 5.0 / 7.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn incomplete_gamma_recurrence(k in 0usize..4, angle in 0.0..=PI / 2.0, log_mod in -3.0f64..=3.0) {
        let q = SEVENTHS[k];
        let w = Complex64::from_polar(10f64.powf(log_mod), angle);
        let lhs = lower_incomplete_gamma(q + 1.0, w).unwrap();
        let rhs = lower_incomplete_gamma(q, w).unwrap() * q - complex_pow_principal(w, q).unwrap() * (-w).exp();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm(), "q={q} w={w}");
    }

    #[test]
    fn incomplete_gamma_conjugation(k in 0usize..4, re in -20.0f64..40.0, im in 0.01f64..40.0) {
        let q = SEVENTHS[k];
        let w = Complex64::new(re, im);
        let a = lower_incomplete_gamma(q, w.conj()).unwrap();
        let b = lower_incomplete_gamma(q, w).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300));
    }

    #[test]
    fn cumulant_signs_alternate_and_collapse(
        m in 1usize..=8,
        log_n in -2.0f64..1.0,
        log_z in -1.0f64..2.0,
        log_g in -1.0f64..2.0,
    ) {
        let (n, z, g) = (10f64.powf(log_n), 10f64.powf(log_z), 10f64.powf(log_g));
        let medium = MediumSpec::from_density(n).unwrap();
        let coeff = PairCoefficient::from_gamma7(g, 1.0).unwrap();
        let k = cumulant_dimensional(m, &medium, z, &coeff).unwrap();
        prop_assert_eq!(k.is_sign_negative(), m % 2 == 1);
        let mean = mean_potential(&medium, z, &coeff).unwrap();
        let collapsed = k / mean.powi(m as i32);
        let expected = cumulant_dimensionless(m, n * z.powi(3)).unwrap();
        prop_assert!((collapsed / expected - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn realizations_are_positive(seed in any::<u64>(), index in 0u64..1_000_000, chi in 0.05f64..5.0) {
        let geometry = SamplingGeometry::halfspace(1.0, chi).unwrap();
        let coeff = PairCoefficient::from_gamma7(1.0, 1.0).unwrap();
        let s = sample_s(SeedContext { seed, index }, &geometry, &coeff).unwrap();
        prop_assert!(s > 0.0 && s.is_finite());
    }

    #[test]
    fn k_statistics_are_shift_invariant(xs in prop::collection::vec(-10.0f64..10.0, 5..60), shift in -5.0f64..5.0) {
        let a = k_statistics(&xs);
        let b = k_statistics(&xs.iter().map(|x| x + shift).collect::<Vec<_>>());
        prop_assert!((b[0] - a[0] - shift).abs() <= 1e-9);
        for i in 1..4 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-8 * (1.0 + a[i].abs()));
        }
    }

    #[test]
    fn histogram_accounts_for_every_sample(xs in prop::collection::vec(0.0f64..100.0, 1..400), width in 0.5f64..20.0) {
        let h = build_histogram(&xs, &Binning::FixedWidth(width)).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>() + h.outside, xs.len() as u64);
        let mass: f64 = h.density.iter().zip(h.bin_edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        let inside = (xs.len() as u64 - h.outside) as f64 / xs.len() as f64;
        prop_assert!((mass - inside).abs() <= 1e-12);
    }

    #[test]
    fn regimes_cover_the_plane(log_s in -4.0f64..3.0, log_chi in -3.0f64..3.0) {
        let (s, chi) = (10f64.powf(log_s), 10f64.powf(log_chi));
        let r = classify_regime(s, chi).unwrap();
        match r.kind {
            RegimeKind::Gaussian => prop_assert!(s > 10.0 / chi),
            RegimeKind::LifshitzTail => prop_assert!(s < chi / 10.0),
            RegimeKind::Moderate => prop_assert!(10.0 * chi < s && s < 0.1 / chi),
            RegimeKind::ExactOnly => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_is_nonnegative_and_finite(s in 0.02f64..6.0, chi in 0.1f64..10.0) {
        let v = pdf_exact(s, chi, 1e-8).unwrap();
        prop_assert!(v.p >= 0.0 && v.p.is_finite());
        prop_assert!(v.error.is_finite());
    }

    #[test]
    fn ensembles_ignore_worker_count(seed in any::<u64>(), chi in 0.1f64..3.0) {
        let run = |workers| {
            run_ensemble(&EnsembleConfig {
                geometry: SamplingGeometry::halfspace(1.0, chi).unwrap(),
                coeff: PairCoefficient::from_gamma7(1.0, 1.0).unwrap(),
                realizations: 200,
                seed,
                workers,
            })
            .unwrap()
            .samples_s
        };
        let reference = run(1);
        for workers in [4, 16] {
            prop_assert!(run(workers).iter().zip(&reference).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
