use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use caresim::export::export_batch;
use caresim::{run_batch, Error, ModelVariant, Preset, SimulationConfig};

/// Run doctor-patient simulations and write per-round metrics.
#[derive(Debug, Parser)]
#[command(name = "caresim", version)]
struct Cli {
    /// Model variant: classical or css.
    #[arg(long, default_value = "css")]
    model: ModelVariant,
    /// Parameter set to start from: paper-full or paper-single.
    #[arg(long, default_value = "paper-full")]
    preset: Preset,
    #[arg(long)]
    doctors: Option<usize>,
    #[arg(long)]
    patients: Option<usize>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Infections per round.
    #[arg(long)]
    infected: Option<usize>,
    /// Base seed; repeat seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write a network snapshot every K rounds (css only, 0 = off).
    #[arg(long, default_value_t = 0)]
    snapshot_every: u32,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long)]
    tournaments_per_round: Option<usize>,
    #[arg(long)]
    elites: Option<usize>,
    #[arg(long)]
    mutation_chance: Option<f64>,
    #[arg(long)]
    crossover_chance: Option<f64>,
    /// Infected patients keep looking for a doctor below this health.
    #[arg(long)]
    infected_seek_threshold: Option<f64>,
}

impl Cli {
    fn config(&self) -> SimulationConfig {
        let mut c = SimulationConfig::preset(self.preset, self.model);
        c.num_doctors = self.doctors.unwrap_or(c.num_doctors);
        c.num_patients = self.patients.unwrap_or(c.num_patients);
        c.num_rounds = self.rounds.unwrap_or(c.num_rounds);
        c.num_repeats = self.repeats.unwrap_or(c.num_repeats);
        c.num_infected_per_round = self.infected.unwrap_or(c.num_infected_per_round);
        c.tournament_size = self.tournament_size.unwrap_or(c.tournament_size);
        c.num_elites = self.elites.unwrap_or(c.num_elites);
        c.mutation_chance = self.mutation_chance.unwrap_or(c.mutation_chance);
        c.crossover_chance = self.crossover_chance.unwrap_or(c.crossover_chance);
        c.tournaments_per_round = self.tournaments_per_round.or(c.tournaments_per_round);
        c.rules.infected_seek_threshold = self.infected_seek_threshold;
        c.snapshot_every = self.snapshot_every;
        c.base_seed = self.seed;
        c
    }
}

fn run(cli: &Cli, config: &SimulationConfig) -> Result<(), Error> {
    export_batch(&run_batch(config)?, &cli.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = cli.config();
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
