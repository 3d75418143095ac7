use polariton_dqc::config::{GridConfig, RunConfig, Toggles};
use polariton_dqc::hamiltonian::{build_blocks, conserves_excitation};
use polariton_dqc::model::{cavity_frequency, effective_coupling};
use polariton_dqc::polariton::diagonalize_system;
use polariton_dqc::{spectrum, Axis, CavitySpec, CouplingSource, FrequencyGrid, Pathway, SystemSpec, VibrationalMode};
use proptest::prelude::*;

fn coarse() -> FrequencyGrid {
    FrequencyGrid::new(
        Axis::new(2700.0, 3700.0, 10.0).unwrap(),
        Axis::new(1250.0, 1950.0, 10.0).unwrap(),
    )
}

/// Random one- to three-mode systems near the cavity, anharmonic or not.
fn system(harmonic: bool) -> impl Strategy<Value = SystemSpec> {
    (1usize..=3).prop_flat_map(move |m| {
        (
            prop::collection::vec((1450.0..1750.0f64, 5.0..30.0f64, 0.2..2.0f64, -1.0..1.0f64), m),
            prop::collection::vec(-20.0..20.0f64, m * m),
            prop::collection::vec(0.0..20.0f64, m * m),
            prop::collection::vec(0.0..80.0f64, m),
            1500.0..1700.0f64,
            0.0..15.0f64,
        )
            .prop_map(move |(modes, j, d, g, cutoff, kappa)| {
                let modes = modes
                    .into_iter()
                    .map(|(w, gamma, mu, cos)| VibrationalMode::new(w, gamma, mu, cos).unwrap())
                    .collect();
                let sym = |v: &[f64], zero_diag: bool| {
                    (0..m)
                        .map(|a| {
                            (0..m)
                                .map(|b| {
                                    if a == b && zero_diag {
                                        0.0
                                    } else if harmonic && !zero_diag {
                                        0.0
                                    } else {
                                        v[a.min(b) * m + a.max(b)]
                                    }
                                })
                                .collect()
                        })
                        .collect()
                };
                SystemSpec::builder(modes, CavitySpec::new(cutoff, 0.0, 0.5, kappa, 1.0).unwrap())
                    .scalar_coupling(sym(&j, true))
                    .anharmonicity(sym(&d, false))
                    .couplings(CouplingSource::Direct(g))
                    .build()
                    .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blocks_are_symmetric_and_conserve_quanta(spec in system(false)) {
        for block in build_blocks(&spec).unwrap() {
            prop_assert!(block.asymmetry() <= 1e-12);
        }
        prop_assert!(conserves_excitation(&spec).unwrap().conserved);
    }

    #[test]
    fn eigenvectors_reconstruct(spec in system(false)) {
        for m in diagonalize_system(&spec).unwrap().manifolds() {
            prop_assert!(m.reconstruction_residual() <= 1e-9);
            prop_assert!(m.orthonormality_error() <= 1e-9);
            prop_assert!(m.energies().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn harmonic_sum_rule(spec in system(true)) {
        let s = diagonalize_system(&spec).unwrap();
        let e = s.single().energies();
        let mut sums = Vec::new();
        for i in 0..e.len() {
            for j in i..e.len() {
                sums.push(e[i] + e[j]);
            }
        }
        sums.sort_by(f64::total_cmp);
        for (f, want) in s.double().energies().iter().zip(&sums) {
            prop_assert!((f - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn harmonic_signal_cancels(spec in system(true)) {
        let s = spectrum(&spec, &coarse(), 0.0).unwrap();
        prop_assert!(s.max_abs(Pathway::Total) <= 1e-8 * s.max_abs(Pathway::I));
    }

    #[test]
    fn pathways_add_up(spec in system(false), t1 in 0.0..200.0f64) {
        let s = spectrum(&spec, &coarse(), t1).unwrap();
        for ((a, b), t) in s.values(Pathway::I).iter().zip(s.values(Pathway::II)).zip(s.values(Pathway::Total)) {
            prop_assert_eq!(a + b, *t);
            prop_assert!(t.re.is_finite() && t.im.is_finite());
        }
        prop_assert!(s.max_abs(Pathway::Total) <= s.max_abs(Pathway::I) + s.max_abs(Pathway::II));
    }

    #[test]
    fn fourth_power_in_dipoles(spec in system(false), scale in 0.1..5.0f64) {
        let a = spectrum(&spec, &coarse(), 0.0).unwrap();
        let b = spectrum(&spec.with_dipole_scale(scale).unwrap(), &coarse(), 0.0).unwrap();
        let s4 = scale.powi(4);
        let max = a.max_abs(Pathway::I);
        for (x, y) in a.values(Pathway::I).iter().zip(b.values(Pathway::I)) {
            prop_assert!((x * s4 - y).norm() <= 1e-12 * s4 * max);
        }
    }

    #[test]
    fn rabi_gap_at_resonance(g in 0.5..120.0f64, w in 1400.0..1800.0f64) {
        let spec = SystemSpec::builder(
            vec![VibrationalMode::new(w, 20.0, 1.0, 1.0).unwrap()],
            CavitySpec::new(w, 0.0, 0.5, 0.0, 1.0).unwrap(),
        )
        .couplings(CouplingSource::Direct(vec![g]))
        .build()
        .unwrap();
        let e = diagonalize_system(&spec).unwrap().single().energies().to_vec();
        prop_assert!(((e[1] - e[0]) - 2.0 * g).abs() <= 1e-9 * 2.0 * g);
    }

    #[test]
    fn cavity_blue_shifts_with_angle(a in 0.0..60.0f64, b in 0.0..60.0f64) {
        let c = |deg| cavity_frequency(&CavitySpec::new(1625.0, deg, 1.5, 0.0, 1.0).unwrap()).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(c(lo) >= 1625.0);
        if lo < hi {
            prop_assert!(c(lo) < c(hi));
        }
    }

    #[test]
    fn effective_coupling_identity(g in 0.0..100.0f64, n in 1.0..1e4f64, kappa in 0.0..40.0f64, gamma in 0.0..40.0f64) {
        match effective_coupling(g, n, kappa, gamma) {
            Ok(gt) => {
                let lhs = gt * gt + 0.25 * (kappa - gamma).powi(2);
                prop_assert!((lhs - n * g * g).abs() <= 1e-9 * (n * g * g).max(1.0));
            }
            Err(_) => prop_assert!(n * g * g < 0.25 * (kappa - gamma).powi(2)),
        }
    }

    #[test]
    fn config_round_trips(
        sweep in prop::collection::btree_set(0u32..2000, 1..5),
        t1 in 0.0..500.0f64,
        threshold in 0.01..0.5f64,
        cross in any::<bool>(),
        gamma in prop::option::of(1.0..40.0f64),
        two_modes in any::<bool>(),
    ) {
        let mut c = RunConfig::default();
        if two_modes {
            c.preset = Some("amide-I+II".into());
        }
        c.sweep = Some(sweep.into_iter().map(|x| x as f64 / 16.0).collect());
        c.t1 = t1;
        c.threshold = threshold;
        c.grid = GridConfig::parse("3000:3400:3,1450:1800:0.7").unwrap();
        c.toggles = Toggles { cross_anharmonicity: cross, gamma_override: gamma, ..Toggles::default() };
        let text = c.to_toml();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}
