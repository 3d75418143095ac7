//! Acceptance criteria 1-8: one PASS/FAIL line each, then a single assertion.

use std::time::Instant;

use polariton_dqc::analysis::{
    assign_axis_peaks, assign_peaks, axis_peaks, default_tolerance, find_peaks, find_peaks_in, measure_splitting,
    resonance_lines, PeakAxis,
};
use polariton_dqc::config::{GridConfig, RunConfig};
use polariton_dqc::fourier::{fourier_check, FourierSettings};
use polariton_dqc::hamiltonian::build_blocks;
use polariton_dqc::output::render_spectra;
use polariton_dqc::polariton::{
    diagonalize_system, polariton_anharmonicity_formula, polariton_anharmonicity_numeric, transition_table,
    zero_detuning_values,
};
use polariton_dqc::{presets, spectrum, FrequencyGrid, Pathway, SystemSpec};

fn amide_i(g: f64) -> SystemSpec {
    presets::amide_i().with_couplings(vec![g]).unwrap()
}

fn amide_i_ii(g: f64) -> SystemSpec {
    presets::amide_i_ii().with_couplings(vec![g, g]).unwrap()
}

struct Outcome {
    id: usize,
    passed: bool,
    detail: String,
}

fn report(id: usize, passed: bool, detail: String) -> Outcome {
    println!("criterion {id}: {} - {detail}", if passed { "PASS" } else { "FAIL" });
    Outcome { id, passed, detail }
}

fn harmonic_null() -> Outcome {
    let start = Instant::now();
    let grid = FrequencyGrid::default_grid();
    let mut worst = 0.0f64;
    for g in [0.0, 20.0, 50.0, 80.0] {
        for spec in [amide_i(g).harmonic(), amide_i_ii(g).harmonic()] {
            let s = spectrum(&spec, &grid, 0.0).unwrap();
            worst = worst.max(s.max_abs(Pathway::Total) / s.max_abs(Pathway::I));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst <= 1e-8 && secs < 10.0,
        format!("harmonic null: max|S|/max|S_i| = {worst:.2e} (<= 1e-8), {secs:.2} s (< 10 s)"),
    )
}

fn rabi() -> Outcome {
    let mut worst = 0.0f64;
    for g in [1.0, 20.0, 50.0, 80.0] {
        let e = diagonalize_system(&amide_i(g)).unwrap().single().energies().to_vec();
        worst = worst.max(((e[1] - e[0]) - 2.0 * g).abs() / (2.0 * g));
    }
    let (_, table) = transition_table(&amide_i(50.0)).unwrap();
    let s = spectrum(&amide_i(50.0), &FrequencyGrid::default_grid(), 0.0).unwrap();
    let peaks = find_peaks_in(&s, Pathway::I, 0.05).unwrap();
    let peaks = assign_peaks(&peaks, &table, Pathway::I, default_tolerance(&table)).unwrap();
    let split = measure_splitting(&peaks, PeakAxis::Omega3, "e1", "e2");
    let peak_ok = matches!(split, Ok(d) if (d - 100.0).abs() <= 1.0);
    report(
        2,
        worst <= 1e-9 && peak_ok,
        format!("Rabi gap rel. error {worst:.2e} (<= 1e-9); S_i e1/e2 peak splitting at g=50: {split:?} (100 +- 1)"),
    )
}

fn sum_rule() -> Outcome {
    let mut worst = 0.0f64;
    for spec in [amide_i(30.0).harmonic(), amide_i_ii(30.0).harmonic()] {
        let system = diagonalize_system(&spec).unwrap();
        let e = system.single().energies();
        let mut sums = Vec::new();
        for i in 0..e.len() {
            for j in i..e.len() {
                sums.push(e[i] + e[j]);
            }
        }
        sums.sort_by(f64::total_cmp);
        for (f, s) in system.double().energies().iter().zip(&sums) {
            worst = worst.max((f - s).abs() / s);
        }
    }
    report(3, worst <= 1e-9, format!("harmonic f = e + e' sum rule: rel. error {worst:.2e} (<= 1e-9)"))
}

fn axis_count(spec: &SystemSpec, pathway: Pathway, axis: PeakAxis) -> (usize, Vec<String>) {
    let s = spectrum(spec, &FrequencyGrid::default_grid(), 0.0).unwrap();
    let (_, table) = transition_table(spec).unwrap();
    let peaks = axis_peaks(&s, pathway, axis, 0.05).unwrap();
    let lines = resonance_lines(&table, axis, pathway);
    let labelled = assign_axis_peaks(&peaks, &lines, default_tolerance(&table));
    let text = labelled
        .iter()
        .map(|p| format!("{:.1}[{}]", p.position, p.labels.join("+")))
        .collect();
    (peaks.len(), text)
}

fn total_peaks(spec: &SystemSpec) -> Vec<(f64, f64, String)> {
    let s = spectrum(spec, &FrequencyGrid::default_grid(), 0.0).unwrap();
    let (_, table) = transition_table(spec).unwrap();
    let peaks = find_peaks(&s, 0.05).unwrap();
    assign_peaks(&peaks, &table, Pathway::Total, default_tolerance(&table))
        .unwrap()
        .into_iter()
        .map(|p| (p.omega3, p.omega2, p.label()))
        .collect()
}

fn figure_structure() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let free = total_peaks(&amide_i(0.0));
    let expected = [(1625.0, 3235.0), (1610.0, 3235.0)];
    let positions_ok = free.len() == 2
        && expected
            .iter()
            .all(|(w3, w2)| free.iter().any(|p| (p.0 - w3).abs() <= 1.0 && (p.1 - w2).abs() <= 1.0));
    ok &= positions_ok;
    parts.push(format!(
        "free Amide-I: {} total peaks {:?} (want 2 at (1625, 3235), (1610, 3235))",
        free.len(),
        free.iter().map(|p| format!("({:.1}, {:.1}) {}", p.0, p.1, p.2)).collect::<Vec<_>>()
    ));

    for g in [20.0, 50.0] {
        let (n2, l2) = axis_count(&amide_i(g), Pathway::Total, PeakAxis::Omega2);
        let (n3, l3) = axis_count(&amide_i(g), Pathway::II, PeakAxis::Omega3);
        ok &= n2 == 3 && n3 == 6;
        let s = spectrum(&amide_i(g), &FrequencyGrid::default_grid(), 0.0).unwrap();
        let maxima_2d = find_peaks_in(&s, Pathway::II, 0.05).unwrap().len();
        parts.push(format!(
            "Amide-I g={g}: {n2} Omega2 peaks {l2:?} (want 3); {n3} S_ii Omega3 peaks {l3:?} (want 6; \
             for reference {maxima_2d} 2D |S_ii| maxima)"
        ));
    }

    let (n2, l2) = axis_count(&amide_i_ii(60.0), Pathway::Total, PeakAxis::Omega2);
    let two = total_peaks(&amide_i_ii(60.0));
    ok &= n2 == 6 && two.len() == 10;
    parts.push(format!(
        "Amide-I+II g=60: {n2} Omega2 peaks {l2:?} (want 6); {} total peaks (want 10)",
        two.len()
    ));
    report(4, ok, parts.join("; "))
}

fn fourier() -> Outcome {
    let start = Instant::now();
    let (_, table) = transition_table(&amide_i(50.0)).unwrap();
    let settings = FourierSettings::default();
    let r = fourier_check(&table, 0.0, Pathway::Total, &FrequencyGrid::default_grid(), &settings).unwrap();
    let secs = start.elapsed().as_secs_f64();
    report(
        5,
        r.max_relative_error < 0.02 && r.compared > 0 && secs < 30.0,
        format!(
            "FFT vs resolvent: max rel. error {:.2e} over {} points (< 2%), {}x{} samples, {}x Nyquist, {secs:.2} s",
            r.max_relative_error, r.compared, r.samples.0, r.samples.1, settings.oversampling
        ),
    )
}

fn anharmonicity() -> Outcome {
    let d = presets::AMIDE_I_ANHARMONICITY;
    let mut values = Vec::new();
    for k in 1..=8 {
        let f = polariton_anharmonicity_formula(&amide_i(10.0 * k as f64), 0, 0, None).unwrap();
        values.push(f.closed_form.unwrap().unwrap());
    }
    let spread = values.iter().map(|v| (v - values[0]).abs() / values[0]).fold(0.0, f64::max);
    let z = zero_detuning_values(d);
    let numeric: Vec<f64> = polariton_anharmonicity_numeric(&diagonalize_system(&amide_i(50.0)).unwrap())
        .iter()
        .map(|s| s.shift)
        .collect();
    report(
        6,
        spread <= 1e-12 && (values[0] - d / 16.0).abs() <= 1e-12 * d,
        format!(
            "zero-detuning formula constant over g=10..80: spread {spread:.2e} (<= 1e-12), value {:.6} = D/16; \
             quoted D/32 = {:.6}, table form D/8 = {:.6}; numeric f-state shifts at g=50 {numeric:.4?}",
            values[0], z.quoted_limit, z.table_form
        ),
    )
}

fn hygiene() -> Outcome {
    let mut asym = 0.0f64;
    let mut eig = 0.0f64;
    let mut sum_rule = 0.0f64;
    for spec in [amide_i(0.0), amide_i(50.0), amide_i_ii(10.0), amide_i_ii(60.0)] {
        for b in build_blocks(&spec).unwrap() {
            asym = asym.max(b.asymmetry());
        }
        let (system, table) = transition_table(&spec).unwrap();
        for m in system.manifolds() {
            eig = eig.max(m.reconstruction_residual()).max(m.orthonormality_error());
        }
        let d = spec.slot_dipoles();
        let eg: f64 = table.mu_eg_all().iter().map(|x| x * x).sum();
        let eg_want: f64 = d.iter().map(|x| x * x).sum();
        let fe: f64 = table.mu_fe_all().iter().map(|x| x * x).sum();
        let fe_want: f64 = system
            .single()
            .basis()
            .states()
            .iter()
            .map(|s| (0..d.len()).map(|k| d[k] * d[k] * (s.occupation(k) as f64 + 1.0)).sum::<f64>())
            .sum();
        sum_rule = sum_rule.max((eg - eg_want).abs() / eg_want).max((fe - fe_want).abs() / fe_want);
    }
    let grid = FrequencyGrid::default_grid().with_step(2.0).unwrap();
    let a = spectrum(&amide_i_ii(60.0), &grid, 0.0).unwrap();
    let b = spectrum(&amide_i_ii(60.0).with_dipole_scale(2.0).unwrap(), &grid, 0.0).unwrap();
    let exact = [Pathway::I, Pathway::II, Pathway::Total]
        .iter()
        .all(|&p| a.values(p).iter().zip(b.values(p)).all(|(x, y)| 16.0 * x == *y));
    report(
        7,
        asym <= 1e-12 && eig <= 1e-9 && sum_rule <= 1e-10 && exact,
        format!(
            "asymmetry {asym:.1e} (<= 1e-12); eigen residual {eig:.1e} (<= 1e-9); dipole sum rule {sum_rule:.1e} \
             (<= 1e-10); S(2 mu) == 16 S(mu) exactly: {exact}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut config = RunConfig::default();
    config.preset = Some(presets::AMIDE_I_II.to_string());
    config.sweep = Some(vec![0.0, 10.0, 60.0]);
    config.grid = GridConfig::parse("2950:3450:2,1400:1850:2").unwrap();
    let render = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| render_spectra(&config).unwrap())
    };
    let reference = render(1);
    let same = [1, 2, 4, 8].iter().all(|&t| render(t) == reference);
    let bytes: usize = reference.iter().map(|f| f.1.len()).sum();
    report(
        8,
        same,
        format!("{} files ({bytes} bytes) byte-identical across runs with 1, 2, 4, 8 workers: {same}", reference.len()),
    )
}

#[test]
fn acceptance() {
    let outcomes = [
        harmonic_null(),
        rabi(),
        sum_rule(),
        figure_structure(),
        fourier(),
        anharmonicity(),
        hygiene(),
        determinism(),
    ];
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("criterion {}: {}", o.id, o.detail))
        .collect();
    assert!(failed.is_empty(), "failed acceptance criteria:\n{}", failed.join("\n"));
}
