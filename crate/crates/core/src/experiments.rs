//! Scenario runners: time series, retardation kinks, max-negativity sweeps
//! over the mode count and GHZ-fidelity maps over time and cooperativity.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{assemble_generic, initial_state_all_excited, integrate_with, StepSchedule};
use crate::dynamics::EffectiveGenerator;
use crate::error::{Error, Result};
use crate::hilbert::Basis;
use crate::model::{SystemParams, SAME_LOCATION, SEPARATED};
use crate::observables::{ghz_fidelity, negativity, populations, QubitReducer};

pub const DEFAULT_T_MAX: f64 = 5.0;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_STRIDE: usize = 100;
/// Cooperativity of the lossy scenarios, `κ = γ = 0.1|𝒢|`.
pub const DEFAULT_LOSS_COOPERATIVITY: f64 = 100.0;
/// A kink is declared when the peak second difference is at least this many
/// times the median one.
pub const KINK_THRESHOLD: f64 = 5.0;
pub const KINK_WINDOW: f64 = 0.02;
pub const MAP_COOPERATIVITY_RANGE: (f64, f64) = (0.005, 120.0);
pub const MAP_COOPERATIVITIES: usize = 60;
pub const MAP_TIMES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub p_eee: f64,
    pub p_eeg: f64,
    pub p_egg: f64,
    pub p_ggg: f64,
    /// `‖A(t)‖` of the full state.
    pub norm: f64,
    pub negativity: f64,
    pub fidelity: f64,
}

/// Basis, generator and partial-trace plan for one parameter point.
pub struct Simulation {
    pub params: SystemParams,
    pub basis: Basis,
    pub generator: EffectiveGenerator,
    reducer: QubitReducer,
}

impl Simulation {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let basis = Basis::three_excitation(params.n_modes)?;
        let generator = assemble_generic(params, &basis)?;
        let reducer = QubitReducer::new(&basis)?;
        Ok(Self {
            params: params.clone(),
            basis,
            generator,
            reducer,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Observables of one state. With `renormalize` the reduced state is
    /// scaled to unit trace first; `norm` is always the raw value.
    pub fn observe(&self, t: f64, amplitudes: &[Complex64], renormalize: bool) -> Result<TimeSeriesRecord> {
        let raw = self.reducer.reduce(amplitudes)?;
        let norm = raw.trace().max(0.0).sqrt();
        let rho = if renormalize { raw.renormalized() } else { raw };
        let p = populations(&rho);
        Ok(TimeSeriesRecord {
            t,
            p_eee: p.p_eee,
            p_eeg: p.p_eeg,
            p_egg: p.p_egg,
            p_ggg: p.p_ggg,
            norm,
            negativity: negativity(&rho)?.tripartite,
            fidelity: ghz_fidelity(&rho),
        })
    }

    /// Evolve from the all-excited state and record every sample.
    pub fn run(&self, schedule: &StepSchedule, renormalize: bool) -> Result<Vec<TimeSeriesRecord>> {
        let initial = initial_state_all_excited(self.basis.dims())?;
        let mut out = Vec::with_capacity(schedule.sample_count());
        integrate_with(&self.generator, &initial, schedule, |t, a| {
            out.push(self.observe(t, a, renormalize)?);
            Ok(())
        })?;
        Ok(out)
    }
}

pub fn run_time_series(
    params: &SystemParams,
    schedule: &StepSchedule,
    renormalize: bool,
) -> Result<Vec<TimeSeriesRecord>> {
    Simulation::new(params)?.run(schedule, renormalize)
}

pub fn max_negativity(series: &[TimeSeriesRecord]) -> f64 {
    series.iter().map(|r| r.negativity).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinkSignal {
    GroundPopulation,
    Negativity,
}

impl KinkSignal {
    fn value(self, r: &TimeSeriesRecord) -> f64 {
        match self {
            KinkSignal::GroundPopulation => r.p_ggg,
            KinkSignal::Negativity => r.negativity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub expected: f64,
    /// Sample time of the largest second difference in the window.
    pub time: f64,
    /// That second difference over the median nonzero one.
    pub strength: f64,
}

impl Kink {
    pub fn fires(&self) -> bool {
        self.strength >= KINK_THRESHOLD
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Locate slope discontinuities near each expected time.
///
/// For every expected time the largest `|x_{i+1} − 2x_i + x_{i−1}|` within
/// `±KINK_WINDOW` is compared with the median of all nonzero second
/// differences of the series.
pub fn detect_retardation_kinks(
    series: &[TimeSeriesRecord],
    expected_times: &[f64],
    signal: KinkSignal,
) -> Result<Vec<Kink>> {
    if series.len() < 3 {
        return Err(Error::InvalidParams(
            "kink detection needs at least three samples".into(),
        ));
    }
    let h = series[1].t - series[0].t;
    for w in series.windows(2) {
        if !(h > 0.0) || ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::NonUniformSampling(w[0].t));
        }
    }
    let d2: Vec<(f64, f64)> = series
        .windows(3)
        .map(|w| {
            let x = [signal.value(&w[0]), signal.value(&w[1]), signal.value(&w[2])];
            (w[1].t, (x[2] - 2.0 * x[1] + x[0]).abs())
        })
        .collect();
    let scale = median(d2.iter().map(|&(_, v)| v).filter(|&v| v > 0.0).collect());

    Ok(expected_times
        .iter()
        .map(|&expected| {
            let peak = d2
                .iter()
                .filter(|(t, _)| (t - expected).abs() <= KINK_WINDOW + 1e-9)
                .fold(None, |best: Option<(f64, f64)>, &(t, v)| match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((t, v)),
                });
            match (peak, scale) {
                (Some((time, v)), Some(s)) => Kink {
                    expected,
                    time,
                    strength: v / s,
                },
                (Some((time, _)), None) => Kink {
                    expected,
                    time,
                    strength: 0.0,
                },
                (None, _) => Kink {
                    expected,
                    time: f64::NAN,
                    strength: 0.0,
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    NoLossSameLocation,
    NoLossSeparated,
    LossSameLocation,
    LossSeparated,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::NoLossSameLocation,
        Scenario::NoLossSeparated,
        Scenario::LossSameLocation,
        Scenario::LossSeparated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NoLossSameLocation => "no-loss/same-location",
            Scenario::NoLossSeparated => "no-loss/separated",
            Scenario::LossSameLocation => "loss/same-location",
            Scenario::LossSeparated => "loss/separated",
        }
    }

    pub fn is_lossy(self) -> bool {
        matches!(self, Scenario::LossSameLocation | Scenario::LossSeparated)
    }

    pub fn positions(self) -> [f64; 3] {
        match self {
            Scenario::NoLossSameLocation | Scenario::LossSameLocation => SAME_LOCATION,
            Scenario::NoLossSeparated | Scenario::LossSeparated => SEPARATED,
        }
    }

    /// `base` with this scenario's positions and losses; lossy scenarios use
    /// `κ = γ = |𝒢|/√𝒞`.
    pub fn apply(self, base: &SystemParams, loss_cooperativity: f64) -> SystemParams {
        let p = base.clone().with_positions(self.positions());
        if self.is_lossy() {
            p.with_cooperativity(loss_cooperativity)
        } else {
            p.with_losses(0.0, 0.0)
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidParams(format!(
                    "unknown scenario '{s}', expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_modes: u32,
    pub scenario: Scenario,
    pub max_negativity: f64,
}

/// Maximum tripartite negativity on the sample grid for every
/// `(mode count, scenario)` pair. Points run in parallel on the current rayon
/// pool and come back sorted by mode count, then scenario.
pub fn sweep_max_negativity(
    base: &SystemParams,
    modes_list: &[u32],
    scenarios: &[Scenario],
    schedule: &StepSchedule,
    loss_cooperativity: f64,
    progress: &(dyn Fn(&SweepPoint) + Sync),
) -> Result<Vec<SweepPoint>> {
    if modes_list.is_empty() || scenarios.is_empty() {
        return Err(Error::InvalidParams(
            "sweep needs at least one mode count and one scenario".into(),
        ));
    }
    let jobs: Vec<(u32, Scenario)> = modes_list
        .iter()
        .flat_map(|&n| scenarios.iter().map(move |&s| (n, s)))
        .collect();
    let mut points = jobs
        .into_par_iter()
        .map(|(n, scenario)| {
            let params = scenario.apply(&base.clone().with_modes(n), loss_cooperativity);
            let series = run_time_series(&params, schedule, false)?;
            let point = SweepPoint {
                n_modes: n,
                scenario,
                max_negativity: max_negativity(&series),
            };
            progress(&point);
            Ok(point)
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by_key(|p| (p.n_modes, p.scenario));
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityMapPoint {
    pub t: f64,
    pub cooperativity: f64,
    pub fidelity: f64,
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n ≥ 2` evenly spaced times from 0 to `t_max` inclusive.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// GHZ fidelity over a cooperativity × time grid with `κ = γ = |𝒢|/√𝒞`.
///
/// `t_grid` must be uniform and start at 0; the RK4 step is the largest one
/// not exceeding `max_dt` that lands on every grid time.
pub fn fidelity_map(
    base: &SystemParams,
    coop_grid: &[f64],
    t_grid: &[f64],
    max_dt: f64,
    renormalize: bool,
) -> Result<Vec<FidelityMapPoint>> {
    if coop_grid.is_empty() || coop_grid.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidParams(
            "cooperativity grid must be non-empty and positive".into(),
        ));
    }
    if t_grid.len() < 2 || t_grid[0] != 0.0 {
        return Err(Error::InvalidParams(
            "time grid needs at least two points starting at t = 0".into(),
        ));
    }
    let spacing = t_grid[1] - t_grid[0];
    for w in t_grid.windows(2) {
        if ((w[1] - w[0]) - spacing).abs() > 1e-9 * spacing.max(1.0) {
            return Err(Error::NonUniformSampling(w[0]));
        }
    }
    let t_max = *t_grid.last().unwrap();
    let schedule = StepSchedule::with_sample_spacing(t_max, spacing, max_dt)?;

    let rows = coop_grid
        .par_iter()
        .map(|&c| {
            let params = base.clone().with_cooperativity(c);
            let series = run_time_series(&params, &schedule, renormalize)?;
            Ok(series
                .iter()
                .zip(t_grid)
                .map(|(r, &t)| FidelityMapPoint {
                    t,
                    cooperativity: c,
                    fidelity: r.fidelity,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points: Vec<_> = rows.into_iter().flatten().collect();
    points.sort_by(|a, b| {
        a.cooperativity
            .total_cmp(&b.cooperativity)
            .then(a.t.total_cmp(&b.t))
    });
    Ok(points)
}

pub const TIME_SERIES_HEADER: &str = "t,p_eee,p_eeg,p_egg,p_ggg,norm,negativity,fidelity";
pub const SWEEP_HEADER: &str = "n_modes,scenario,max_negativity";
pub const MAP_HEADER: &str = "t,cooperativity,fidelity";

/// Write through a temporary file in the target directory and rename it into
/// place, so a failed run never leaves a partial file behind.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_time_series(path: &Path, series: &[TimeSeriesRecord]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{TIME_SERIES_HEADER}")?;
        for r in series {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.p_eee, r.p_eeg, r.p_egg, r.p_ggg, r.norm, r.negativity, r.fidelity
            )?;
        }
        Ok(())
    })
}

pub fn write_sweep(path: &Path, points: &[SweepPoint]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for p in points {
            writeln!(w, "{},{},{:.16e}", p.n_modes, p.scenario, p.max_negativity)?;
        }
        Ok(())
    })
}

pub fn write_fidelity_map(path: &Path, points: &[FidelityMapPoint]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{MAP_HEADER}")?;
        for p in points {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.t, p.cooperativity, p.fidelity)?;
        }
        Ok(())
    })
}
