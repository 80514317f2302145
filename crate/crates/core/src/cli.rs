//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{keys_help, Command, Grid, RawConfig, RunConfig};
use crate::dynamics::StepSchedule;
use crate::error::{Error, Result};
use crate::experiments::{
    fidelity_map, log_grid, max_negativity, sweep_max_negativity, uniform_grid,
    write_fidelity_map, write_sweep, write_time_series, Simulation,
};
use crate::hilbert::{count_amplitudes, SectorDimensions};

pub const OUTPUT_DIR_ENV: &str = "TRICAVITY_OUTPUT_DIR";

const EXIT_CODES: &str = "Exit status: 0 success, 2 invalid configuration or parameters, \
3 file I/O, 4 non-finite amplitudes, 5 eigensolver failure, 6 amplitude count overflow, \
7 internal consistency error.";

#[derive(Parser, Debug)]
#[command(name = "tricavity", version, about = "Three emitters in a multimode ring cavity", after_help = EXIT_CODES)]
pub struct Cli {
    /// Cap on worker threads for parallel sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Print the number of amplitudes of a fixed-excitation sector
    Count {
        #[arg(long, default_value_t = 3)]
        atoms: u32,
        #[arg(long, default_value_t = 3)]
        excitations: u32,
        #[arg(long)]
        modes: u32,
    },
    /// Evolve from the all-excited state and write the time series
    #[command(after_help = keys_help())]
    Evolve(RunArgs),
    /// Maximum negativity against the number of modes
    #[command(after_help = keys_help())]
    SweepModes(RunArgs),
    /// GHZ fidelity over time and cooperativity
    #[command(after_help = keys_help())]
    FidelityMap(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Config file of key = value lines
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory for relative output paths
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Number of cavity modes [count, default 1]
    #[arg(long)]
    n_modes: Option<String>,
    /// Round-trip length [λ_eg, default 994.28]
    #[arg(long)]
    cavity_length_lambda: Option<String>,
    /// Qubit positions, e.g. 0,1/3,2/3 [fractions of L, default 0,0,0]
    #[arg(long, allow_hyphen_values = true)]
    positions: Option<String>,
    /// Coupling magnitude |G| [c/L, required]
    #[arg(long)]
    coupling_g: Option<String>,
    /// Cavity leakage rate [c/L, default 0]
    #[arg(long)]
    kappa: Option<String>,
    /// Spontaneous emission rate [c/L, default 0]
    #[arg(long)]
    gamma: Option<String>,
    /// Sets kappa = gamma = |G|/sqrt(C) [default unset]
    #[arg(long)]
    cooperativity: Option<String>,
    /// Centre of the mode window [mode number, default round(L)]
    #[arg(long)]
    resonant_mode: Option<String>,
    /// Detunings measured from the resonant mode [bool, default true]
    #[arg(long)]
    lock_resonance: Option<String>,
    /// Final time [L/c, default 5]
    #[arg(long)]
    t_max: Option<String>,
    /// RK4 step [L/c, default 1e-4]
    #[arg(long)]
    dt: Option<String>,
    /// Steps between samples [default 100]
    #[arg(long)]
    stride: Option<String>,
    /// Renormalise the qubit state [bool, default false]
    #[arg(long)]
    renormalize: Option<String>,
    /// Mode counts for sweep-modes, e.g. 1-9 [default 1-31]
    #[arg(long)]
    modes: Option<String>,
    /// Comma-separated sweep scenarios [default all]
    #[arg(long)]
    scenarios: Option<String>,
    /// Cooperativity of lossy sweep scenarios [default 100]
    #[arg(long)]
    loss_cooperativity: Option<String>,
    /// Smallest map cooperativity [default 0.005]
    #[arg(long)]
    coop_min: Option<String>,
    /// Largest map cooperativity [default 120]
    #[arg(long)]
    coop_max: Option<String>,
    /// Map cooperativity count [default 60]
    #[arg(long)]
    coop_points: Option<String>,
    /// Map time count [default 400]
    #[arg(long)]
    time_points: Option<String>,
    /// CSV destination [path, default <command>.csv]
    #[arg(long, short)]
    output_path: Option<String>,
}

impl RunArgs {
    fn merged(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("n_modes", &self.n_modes),
            ("cavity_length_lambda", &self.cavity_length_lambda),
            ("positions", &self.positions),
            ("coupling_g", &self.coupling_g),
            ("kappa", &self.kappa),
            ("gamma", &self.gamma),
            ("cooperativity", &self.cooperativity),
            ("resonant_mode", &self.resonant_mode),
            ("lock_resonance", &self.lock_resonance),
            ("t_max", &self.t_max),
            ("dt", &self.dt),
            ("stride", &self.stride),
            ("renormalize", &self.renormalize),
            ("modes", &self.modes),
            ("scenarios", &self.scenarios),
            ("loss_cooperativity", &self.loss_cooperativity),
            ("coop_min", &self.coop_min),
            ("coop_max", &self.coop_max),
            ("coop_points", &self.coop_points),
            ("time_points", &self.time_points),
            ("output_path", &self.output_path),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v.clone());
            }
        }
        Ok(raw)
    }
}

pub struct Summary {
    pub dimension: usize,
    pub seconds: f64,
    pub peak_label: &'static str,
    pub peak: f64,
    pub output: PathBuf,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "dimension={} runtime={:.3}s {}={:.6} output={}",
            self.dimension,
            self.seconds,
            self.peak_label,
            self.peak,
            self.output.display()
        )
    }
}

pub fn run(config: &RunConfig) -> Result<Summary> {
    let start = Instant::now();
    let (dimension, peak_label, peak) = match &config.grid {
        Grid::Evolve => {
            let schedule = StepSchedule::new(config.t_max, config.dt, config.stride)?;
            let sim = Simulation::new(&config.params)?;
            let series = sim.run(&schedule, config.renormalize)?;
            write_time_series(&config.output_path, &series)?;
            (sim.dimension(), "peak_negativity", max_negativity(&series))
        }
        Grid::Sweep {
            modes,
            scenarios,
            loss_cooperativity,
        } => {
            let schedule = StepSchedule::new(config.t_max, config.dt, config.stride)?;
            let total = modes.len() * scenarios.len();
            let done = std::sync::atomic::AtomicUsize::new(0);
            let points = sweep_max_negativity(
                &config.params,
                modes,
                scenarios,
                &schedule,
                *loss_cooperativity,
                &|p| {
                    let k = done.fetch_add(1, std::sync::atomic::Ordering::SeqCst) + 1;
                    eprintln!("[{k}/{total}] n_modes={} {} max_negativity={:.6}", p.n_modes, p.scenario, p.max_negativity);
                },
            )?;
            write_sweep(&config.output_path, &points)?;
            let largest = *modes.iter().max().unwrap_or(&1);
            let dim = SectorDimensions::three_excitation(largest)?.dimension;
            let peak = points.iter().map(|p| p.max_negativity).fold(0.0, f64::max);
            (dim, "peak_negativity", peak)
        }
        Grid::FidelityMap {
            coop_min,
            coop_max,
            coop_points,
            time_points,
        } => {
            let coop = log_grid(*coop_min, *coop_max, *coop_points);
            let times = uniform_grid(config.t_max, *time_points);
            let map = fidelity_map(&config.params, &coop, &times, config.dt, config.renormalize)?;
            write_fidelity_map(&config.output_path, &map)?;
            let dim = SectorDimensions::three_excitation(config.params.n_modes)?.dimension;
            let peak = map.iter().map(|p| p.fidelity).fold(0.0, f64::max);
            (dim, "peak_fidelity", peak)
        }
    };
    Ok(Summary {
        dimension,
        seconds: start.elapsed().as_secs_f64(),
        peak_label,
        peak,
        output: config.output_path.clone(),
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let (command, args) = match cli.command {
        Sub::Count {
            atoms,
            excitations,
            modes,
        } => {
            println!("{}", count_amplitudes(atoms, excitations, modes)?);
            return Ok(());
        }
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::SweepModes(a) => (Command::SweepModes, a),
        Sub::FidelityMap(a) => (Command::FidelityMap, a),
    };
    let raw = args.merged()?;
    let config = RunConfig::from_raw(command, &raw, args.output_dir.as_deref())?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config(vec!["--threads: must be at least 1".into()]));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let summary = pool.install(|| run(&config))?;
    println!("{summary}");
    Ok(())
}

/// Parse `args`, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
