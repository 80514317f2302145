//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricavity::dynamics::{
    assemble_appendix_a, assemble_generic, initial_state_all_excited, Rk4Stepper, StepSchedule,
};
use tricavity::experiments::{
    detect_retardation_kinks, fidelity_map, log_grid, max_negativity, run_time_series,
    sweep_max_negativity, uniform_grid, FidelityMapPoint, KinkSignal, Scenario, Simulation,
    SweepPoint, TimeSeriesRecord, DEFAULT_DT, DEFAULT_STRIDE, DEFAULT_T_MAX, KINK_THRESHOLD,
};
use tricavity::hilbert::{count_amplitudes, enumerate_basis, Basis};
use tricavity::model::{SystemParams, DEFAULT_COUPLING, SAME_LOCATION, SEPARATED};
use tricavity::observables::{
    ghz_fidelity, negativity, partial_transpose, QubitDensityMatrix,
};

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn check(&mut self, name: &'static str, pass: bool, started: Instant, detail: String) {
        println!(
            "{} {name} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        if !pass {
            self.failed.push(name);
        }
    }
}

fn info(msg: String) {
    println!("     info: {msg}");
}

fn default_schedule() -> StepSchedule {
    StepSchedule::new(DEFAULT_T_MAX, DEFAULT_DT, DEFAULT_STRIDE).unwrap()
}

fn lossy(p: SystemParams) -> SystemParams {
    let k = 0.1 * DEFAULT_COUPLING;
    p.with_losses(k, k)
}

fn at(series: &[TimeSeriesRecord], t: f64) -> &TimeSeriesRecord {
    series
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .unwrap()
}

/// Largest |Δ‖A‖| over every RK4 step, and whether the norm ever grew.
fn stepwise_norms(params: &SystemParams, dt: f64, t_max: f64) -> (f64, bool) {
    let basis = Basis::three_excitation(params.n_modes).unwrap();
    let m = assemble_generic(params, &basis).unwrap();
    let mut state = initial_state_all_excited(basis.dims()).unwrap().amplitudes;
    let mut stepper = Rk4Stepper::new(&m, dt);
    let norm = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let (mut worst, mut grew, mut last) = (0.0f64, false, 1.0);
    for _ in 0..(t_max / dt).round() as usize {
        stepper.step(&mut state);
        let n = norm(&state);
        worst = worst.max((n - 1.0).abs());
        grew |= n > last;
        last = n;
    }
    (worst, grew)
}

fn observable_drift(a: &[TimeSeriesRecord], b: &[TimeSeriesRecord]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            [
                x.p_eee - y.p_eee,
                x.p_eeg - y.p_eeg,
                x.p_egg - y.p_egg,
                x.p_ggg - y.p_ggg,
                x.norm - y.norm,
                x.negativity - y.negativity,
                x.fidelity - y.fidelity,
            ]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
        })
        .fold(0.0, f64::max)
}

fn to_dmatrix(a: &[[Complex64; 8]; 8]) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(8, 8, |i, j| Complex::new(a[i][j].re, a[i][j].im))
}

fn random_pure(rng: &mut ChaCha8Rng) -> [Complex64; 8] {
    let mut psi = [Complex64::new(0.0, 0.0); 8];
    for a in psi.iter_mut() {
        *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let n = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    psi.map(|a| a / n)
}

fn random_mixture(rng: &mut ChaCha8Rng, terms: usize) -> QubitDensityMatrix {
    let w: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut rho = QubitDensityMatrix::zero();
    for wk in w {
        let p = QubitDensityMatrix::from_pure(&random_pure(rng));
        for (x, y) in rho.entries.iter_mut().flatten().zip(p.entries.iter().flatten()) {
            *x += y * (wk / total);
        }
    }
    rho
}

/// `(tr √(√ρ σ √ρ))²` by dense eigendecomposition.
fn uhlmann(rho: &QubitDensityMatrix, sigma: &QubitDensityMatrix) -> f64 {
    let eig = SymmetricEigen::new(to_dmatrix(&rho.entries));
    let roots = eig.eigenvalues.map(|l| Complex::new(l.max(0.0).sqrt(), 0.0));
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint();
    let inner = &s * to_dmatrix(&sigma.entries) * &s;
    let inner = (&inner + inner.adjoint()) * Complex::new(0.5, 0.0);
    let tr: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|l| if *l > 1e-15 { l.sqrt() } else { 0.0 })
        .sum();
    tr * tr
}

fn ghz_projector() -> QubitDensityMatrix {
    let mut psi = [Complex64::new(0.0, 0.0); 8];
    psi[0] = Complex64::new(0.5f64.sqrt(), 0.0);
    psi[7] = psi[0];
    QubitDensityMatrix::from_pure(&psi)
}

/// Points with `F ≥ level`, and the latest time reached by the connected
/// region (4-neighbour, on the cooperativity × time grid) containing `t = 0`.
fn region_stats(map: &[FidelityMapPoint], n_times: usize, level: f64) -> (usize, f64) {
    let n_coop = map.len() / n_times;
    let inside: Vec<bool> = map.iter().map(|p| p.fidelity >= level).collect();
    let area = inside.iter().filter(|&&b| b).count();
    let mut seen = vec![false; map.len()];
    let mut stack: Vec<usize> = (0..n_coop).map(|c| c * n_times).filter(|&k| inside[k]).collect();
    let mut reach = 0.0f64;
    while let Some(k) = stack.pop() {
        if seen[k] {
            continue;
        }
        seen[k] = true;
        reach = reach.max(map[k].t);
        let (c, t) = (k / n_times, k % n_times);
        let mut push = |c2: usize, t2: usize| {
            let j = c2 * n_times + t2;
            if inside[j] && !seen[j] {
                stack.push(j);
            }
        };
        if t > 0 {
            push(c, t - 1);
        }
        if t + 1 < n_times {
            push(c, t + 1);
        }
        if c > 0 {
            push(c - 1, t);
        }
        if c + 1 < n_coop {
            push(c + 1, t);
        }
    }
    (area, reach)
}

fn main() {
    let mut report = Report { failed: Vec::new() };
    let mut identity_series: Vec<(String, Vec<TimeSeriesRecord>)> = Vec::new();

    // Amplitude counts
    let t0 = Instant::now();
    let printed = [
        count_amplitudes(2, 2, 1).unwrap(),
        count_amplitudes(3, 3, 3).unwrap(),
        count_amplitudes(3, 3, 7).unwrap(),
    ];
    let lengths_agree = (1..=8).all(|n| {
        enumerate_basis(3, 3, n).unwrap().len() as u64 == count_amplitudes(3, 3, n).unwrap()
    });
    report.check(
        "amplitude counts",
        printed == [4, 38, 190] && lengths_agree,
        t0,
        format!("counts {printed:?}, enumeration lengths agree for N=1..8: {lengths_agree}"),
    );

    // Assembly equivalence
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for n in [1, 2, 3, 7] {
        let basis = Basis::three_excitation(n).unwrap();
        for pos in [SAME_LOCATION, SEPARATED] {
            for p in [
                SystemParams::default().with_modes(n).with_positions(pos),
                lossy(SystemParams::default().with_modes(n).with_positions(pos)),
            ] {
                let a = assemble_generic(&p, &basis).unwrap();
                let b = assemble_appendix_a(&p, &basis).unwrap();
                worst = worst.max(a.matrix.max_abs_diff(&b.matrix));
            }
        }
    }
    report.check(
        "assembly equivalence",
        worst < 1e-12,
        t0,
        format!("max |M_generic − M_appendix| = {worst:.2e} (tol 1e-12)"),
    );

    // Lossless norm conservation and step halving
    let t0 = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [1, 7] {
        let p = SystemParams::default().with_modes(n).with_positions(SEPARATED);
        let (norm_dev, _) = stepwise_norms(&p, DEFAULT_DT, DEFAULT_T_MAX);
        let coarse = run_time_series(&p, &default_schedule(), false).unwrap();
        let fine_schedule = StepSchedule::new(DEFAULT_T_MAX, DEFAULT_DT / 2.0, 2 * DEFAULT_STRIDE).unwrap();
        let fine = run_time_series(&p, &fine_schedule, false).unwrap();
        let drift = observable_drift(&coarse, &fine);
        pass &= norm_dev <= 1e-9 && drift < 1e-8;
        detail.push(format!("N={n}: max |‖A‖−1| = {norm_dev:.1e}, dt-halving drift = {drift:.1e}"));
    }
    report.check("lossless norm conservation", pass, t0, detail.join("; ") + " (tol 1e-9, 1e-8)");

    // Single-mode lossless landmarks
    let t0 = Instant::now();
    let fine_grid = StepSchedule::new(DEFAULT_T_MAX, DEFAULT_DT, 25).unwrap();
    let single = run_time_series(&SystemParams::default(), &fine_grid, false).unwrap();
    let mid = at(&single, 0.875);
    let peak = max_negativity(&single);
    let pass = single[0].p_eee == 1.0
        && single[0].negativity == 0.0
        && (mid.p_eee - 0.2).abs() <= 0.05
        && (mid.p_ggg - 0.2).abs() <= 0.05
        && (peak - 0.68).abs() <= 0.05;
    report.check(
        "single-mode lossless landmarks",
        pass,
        t0,
        format!(
            "P_eee(0) = {}, N(0) = {}, at t = {:.4}: P_eee = {:.4}, P_ggg = {:.4} (0.2 ± 0.05); max N = {peak:.4} (0.68 ± 0.05)",
            single[0].p_eee, single[0].negativity, mid.t, mid.p_eee, mid.p_ggg
        ),
    );
    let onset = single.iter().find(|r| r.negativity > 1e-6).map(|r| r.t).unwrap_or(f64::NAN);
    info(format!("single-mode negativity first exceeds 1e-6 at t = {onset:.4}"));
    identity_series.push(("N=1 lossless".into(), single));

    // Single-mode lossy landmarks
    let t0 = Instant::now();
    let p = lossy(SystemParams::default().with_positions(SEPARATED));
    let series = run_time_series(&p, &default_schedule(), false).unwrap();
    let peak = max_negativity(&series);
    let end = series.last().unwrap();
    let (_, grew) = stepwise_norms(&p, DEFAULT_DT, DEFAULT_T_MAX);
    report.check(
        "single-mode lossy landmarks",
        (peak - 0.20).abs() <= 0.05 && end.negativity < 0.02 && !grew,
        t0,
        format!(
            "max N = {peak:.4} (0.20 ± 0.05), N(t = {}) = {:.2e} (< 0.02), norm non-increasing at every step: {}",
            end.t, end.negativity, !grew
        ),
    );
    identity_series.push(("N=1 lossy".into(), series));

    // Retardation kinks
    let t0 = Instant::now();
    let same31 = Simulation::new(&SystemParams::default().with_modes(31)).unwrap();
    let sep31 = Simulation::new(&SystemParams::default().with_modes(31).with_positions(SEPARATED)).unwrap();
    let same_series = same31.run(&default_schedule(), false).unwrap();
    let sep_series = sep31.run(&default_schedule(), false).unwrap();
    let k_same = detect_retardation_kinks(&same_series, &[1.0], KinkSignal::GroundPopulation).unwrap();
    let k_sep = detect_retardation_kinks(&sep_series, &[1.0 / 3.0, 2.0 / 3.0, 1.0], KinkSignal::GroundPopulation).unwrap();
    let mut controls = Vec::new();
    for pos in [SAME_LOCATION, SEPARATED] {
        let s = run_time_series(&SystemParams::default().with_positions(pos), &default_schedule(), false).unwrap();
        controls.push(detect_retardation_kinks(&s, &[1.0], KinkSignal::GroundPopulation).unwrap()[0]);
    }
    let pass = k_same[0].fires() && k_sep[0].fires() && k_sep[1].fires() && controls.iter().all(|k| !k.fires());
    report.check(
        "retardation kinks",
        pass,
        t0,
        format!(
            "dimension {}; same-location t=L/c strength {:.1} at t={:.2}; separated L/3 {:.1} at t={:.2}, 2L/3 {:.1} at t={:.2}; single-mode t=L/c {:.2} / {:.2} (threshold {KINK_THRESHOLD})",
            same31.dimension(),
            k_same[0].strength,
            k_same[0].time,
            k_sep[0].strength,
            k_sep[0].time,
            k_sep[1].strength,
            k_sep[1].time,
            controls[0].strength,
            controls[1].strength
        ),
    );
    info(format!("separated t=L/c strength {:.1}", k_sep[2].strength));
    let revival: Vec<f64> = same_series
        .iter()
        .zip(&sep_series)
        .filter(|(a, b)| b.negativity > 0.05 && a.negativity < 0.01)
        .map(|(a, _)| a.t)
        .collect();
    info(format!(
        "31 modes: max N same {:.4}, separated {:.4}; {} samples with separated N > 0.05 while same N < 0.01 (first at t = {:.2})",
        max_negativity(&same_series),
        max_negativity(&sep_series),
        revival.len(),
        revival.first().copied().unwrap_or(f64::NAN)
    ));
    let (peak_same31, peak_sep31) = (max_negativity(&same_series), max_negativity(&sep_series));
    identity_series.push(("N=31 same".into(), same_series));
    identity_series.push(("N=31 separated".into(), sep_series));

    // Mode sweep
    let t0 = Instant::now();
    let base = SystemParams::default();
    let small: Vec<u32> = (1..=9).collect();
    let sweep = sweep_max_negativity(&base, &small, &Scenario::ALL, &default_schedule(), 100.0, &|_| {}).unwrap();
    let large: Vec<u32> = (15..=31).collect();
    // The plateau runs at a coarser step; its N=31 values are checked against
    // the default-step runs above.
    let coarse = StepSchedule::new(DEFAULT_T_MAX, 5e-4, 20).unwrap();
    let plateau = sweep_max_negativity(&base, &large, &Scenario::ALL, &coarse, 100.0, &|_| {}).unwrap();
    let value = |pts: &[SweepPoint], n: u32, s: Scenario| {
        pts.iter().find(|p| p.n_modes == n && p.scenario == s).unwrap().max_negativity
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for s in [Scenario::NoLossSameLocation, Scenario::NoLossSeparated] {
        let one = value(&sweep, 1, s);
        let rest = small[1..]
            .iter()
            .chain(&large)
            .map(|&n| value(if n <= 9 { &sweep } else { &plateau }, n, s))
            .fold(0.0, f64::max);
        pass &= one > rest;
        notes.push(format!("{s}: N=1 {one:.4} vs best N>1 {rest:.4}"));
    }
    let mut pointwise = true;
    for pts in [&sweep, &plateau] {
        for p in pts.iter().filter(|p| p.scenario.is_lossy()) {
            let clean = match p.scenario {
                Scenario::LossSameLocation => Scenario::NoLossSameLocation,
                _ => Scenario::NoLossSeparated,
            };
            pointwise &= p.max_negativity <= value(pts, p.n_modes, clean);
        }
    }
    pass &= pointwise;
    notes.push(format!("lossy <= lossless pointwise: {pointwise}"));
    let mut worst_step = 0.0f64;
    for s in Scenario::ALL {
        for w in large.windows(2) {
            let (a, b) = (value(&plateau, w[0], s), value(&plateau, w[1], s));
            worst_step = worst_step.max((b - a).abs() / a);
        }
    }
    pass &= worst_step < 0.15;
    let coarse_dev = (value(&plateau, 31, Scenario::NoLossSameLocation) - peak_same31)
        .abs()
        .max((value(&plateau, 31, Scenario::NoLossSeparated) - peak_sep31).abs());
    pass &= coarse_dev < 1e-3;
    notes.push(format!("N=31 coarse-step deviation {coarse_dev:.1e} (< 1e-3)"));
    notes.push(format!("largest successive relative change for N >= 15: {:.1}% (< 15%)", 100.0 * worst_step));
    report.check("mode sweep", pass, t0, notes.join("; "));
    for s in Scenario::ALL {
        let row: Vec<String> = small
            .iter()
            .chain(&large)
            .map(|&n| format!("{:.3}", value(if n <= 9 { &sweep } else { &plateau }, n, s)))
            .collect();
        info(format!("{s} (N=1..9,15..31): {}", row.join(" ")));
    }

    // Fidelity identities
    let t0 = Instant::now();
    let n7 = run_time_series(&SystemParams::default().with_modes(7).with_positions(SEPARATED), &default_schedule(), false).unwrap();
    identity_series.push(("N=7 separated".into(), n7));
    let mut worst_identity = 0.0f64;
    let mut start_ok = true;
    for (_, s) in &identity_series {
        start_ok &= s[0].fidelity == 0.5;
        for r in s {
            worst_identity = worst_identity.max((r.fidelity - 0.5 * (r.p_eee + r.p_ggg)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let target = ghz_projector();
    let mut worst_uhlmann = 0.0f64;
    for _ in 0..100 {
        let rho = random_mixture(&mut rng, 10);
        worst_uhlmann = worst_uhlmann.max((ghz_fidelity(&rho) - uhlmann(&rho, &target)).abs());
    }
    report.check(
        "fidelity identities",
        worst_identity <= 1e-10 && start_ok && worst_uhlmann <= 1e-10,
        t0,
        format!(
            "max |F − (P_eee+P_ggg)/2| = {worst_identity:.1e} over {} runs, F(0) = 0.5 in all: {start_ok}, max |closed form − Uhlmann| = {worst_uhlmann:.1e} on 100 random states",
            identity_series.len()
        ),
    );

    // Negativity oracle
    let t0 = Instant::now();
    let ghz = negativity(&target).unwrap();
    let mut oracle_dev = 0.0f64;
    for cut in 0..3 {
        let pt = partial_transpose(&target, cut).unwrap();
        let oracle: f64 = SymmetricEigen::new(to_dmatrix(&pt)).eigenvalues.iter().map(|l| l.abs() - l).sum();
        oracle_dev = oracle_dev.max((ghz.per_cut[cut] - oracle).abs()).max((oracle - 1.0).abs());
    }
    let mut ppt_worst = 0.0f64;
    for _ in 0..50 {
        // separable mixture of product states
        let mut rho = QubitDensityMatrix::zero();
        for _ in 0..4 {
            let q: Vec<[Complex64; 2]> = (0..3)
                .map(|_| {
                    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
                    [a / n, b / n]
                })
                .collect();
            let mut psi = [Complex64::new(0.0, 0.0); 8];
            let slot = [0, 1, 2, 4, 3, 5, 6, 7];
            for mask in 0..8usize {
                psi[slot[mask]] = q[0][mask >> 2 & 1] * q[1][mask >> 1 & 1] * q[2][mask & 1];
            }
            let p = QubitDensityMatrix::from_pure(&psi);
            for (x, y) in rho.entries.iter_mut().flatten().zip(p.entries.iter().flatten()) {
                *x += y * 0.25;
            }
        }
        let n = negativity(&rho).unwrap();
        ppt_worst = ppt_worst.max(n.per_cut.iter().copied().fold(0.0, f64::max));
    }
    report.check(
        "negativity oracle",
        ghz.per_cut.iter().all(|v| (v - 1.0).abs() < 1e-12) && oracle_dev < 1e-12 && ppt_worst < 1e-12,
        t0,
        format!(
            "GHZ per-cut {:?}, tripartite {:.12}, |ours − dense oracle| and |oracle − 1| <= {oracle_dev:.1e}; max per-cut on separable states {ppt_worst:.1e}",
            ghz.per_cut, ghz.tripartite
        ),
    );

    // GHZ fidelity map
    let t0 = Instant::now();
    let coop = log_grid(0.005, 120.0, 60);
    let times = uniform_grid(DEFAULT_T_MAX, 400);
    let seven = SystemParams::default().with_modes(7);
    let map_same = fidelity_map(&seven, &coop, &times, DEFAULT_DT, false).unwrap();
    let map_sep = fidelity_map(&seven.clone().with_positions(SEPARATED), &coop, &times, DEFAULT_DT, false).unwrap();
    let (area_same, reach_same) = region_stats(&map_same, times.len(), 0.35);
    let (area_sep, reach_sep) = region_stats(&map_sep, times.len(), 0.35);
    let low_c_ok = map_same
        .iter()
        .chain(&map_sep)
        .filter(|p| p.cooperativity == coop[0])
        .all(|p| p.fidelity <= 0.5 + 1e-12);
    report.check(
        "fidelity map region",
        area_same >= 3 * area_sep,
        t0,
        format!(
            "F >= 0.35 area on 60x400 grid: same-location {area_same} (reaches t = {reach_same:.2}), separated {area_sep} (reaches t = {reach_sep:.2}); need same >= 3x separated"
        ),
    );
    info(format!("C = 0.005 rows never exceed 0.5: {low_c_ok}"));
    let map_same_r = fidelity_map(&seven, &coop, &times, DEFAULT_DT, true).unwrap();
    let map_sep_r = fidelity_map(&seven.with_positions(SEPARATED), &coop, &times, DEFAULT_DT, true).unwrap();
    let (a_r, t_r) = region_stats(&map_same_r, times.len(), 0.35);
    let (b_r, u_r) = region_stats(&map_sep_r, times.len(), 0.35);
    info(format!(
        "with renormalised qubit state: same-location area {a_r} (reaches t = {t_r:.2}), separated {b_r} (reaches t = {u_r:.2})"
    ));

    println!();
    if report.failed.is_empty() {
        println!("all acceptance criteria passed");
    } else {
        println!("failed: {}", report.failed.join(", "));
        std::process::exit(1);
    }
}
