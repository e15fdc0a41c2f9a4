//! Round loop, per-round metrics, network snapshots and the repeat driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{
    check_dense_ids, init_doctors, init_patients, AgentId, DoctorState, PatientState, PeerMap,
    Roster,
};
use crate::classical::{choose_doctor, receive_treatment};
use crate::cognitive::{choose_doctor_css, receive_treatment_css, refresh_respect_and_confidence};
use crate::config::{ModelVariant, SimulationConfig};
use crate::evolution::{
    crossover_doctor, crossover_patient, evolve_population, fitness_doctor, fitness_patient,
    mutate_doctor_classical, mutate_doctor_css, mutate_patient, GaParams,
};
use crate::infection::{needs_doctor, spread_infection, triage_order, InfectionCounter};
use crate::ledger::RatingLedger;
use crate::rng::{derive_run_seed, RngStream};
use crate::Error;

/// Metric column names, in CSV order.
pub const METRIC_COLUMNS: [&str; 14] = [
    "doctor_fitness",
    "patient_fitness",
    "research_ability",
    "empathy",
    "weight_wmrat",
    "weight_mwres",
    "confidence",
    "cred_weight",
    "mean_rating_weight",
    "past_rating_weight",
    "resilience",
    "infections",
    "treatments",
    "untreated",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RoundMetrics {
    pub run_id: usize,
    /// 1-based.
    pub round_index: u32,
    pub model: ModelVariant,
    pub doctor_fitness: f64,
    pub patient_fitness: f64,
    pub research_ability: f64,
    pub empathy: f64,
    pub weight_wmrat: f64,
    pub weight_mwres: f64,
    pub confidence: f64,
    pub cred_weight: f64,
    pub mean_rating_weight: f64,
    pub past_rating_weight: f64,
    pub resilience: f64,
    pub infections: usize,
    pub treatments: usize,
    pub untreated: usize,
}

impl RoundMetrics {
    /// Values in [`METRIC_COLUMNS`] order.
    pub fn values(&self) -> [f64; METRIC_COLUMNS.len()] {
        [
            self.doctor_fitness,
            self.patient_fitness,
            self.research_ability,
            self.empathy,
            self.weight_wmrat,
            self.weight_mwres,
            self.confidence,
            self.cred_weight,
            self.mean_rating_weight,
            self.past_rating_weight,
            self.resilience,
            self.infections as f64,
            self.treatments as f64,
            self.untreated as f64,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Doctor,
    Patient,
}

// Fields are declared alphabetically so serialized keys come out sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub source: String,
    pub strength: f64,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub edges: Vec<SnapshotEdge>,
    pub nodes: Vec<SnapshotNode>,
    pub round: u32,
}

fn six_decimals(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn push_edges<K: AgentId + std::fmt::Display>(
    edges: &mut Vec<SnapshotEdge>,
    source: &str,
    ties: &PeerMap<K>,
) {
    edges.extend(ties.iter().map(|(target, strength)| SnapshotEdge {
        source: source.to_owned(),
        strength: six_decimals(strength),
        target: target.to_string(),
    }));
}

/// Every directed tie in the population, doctors first, in id order.
pub fn network_snapshot(
    round: u32,
    doctors: &[DoctorState],
    patients: &[PatientState],
) -> NetworkSnapshot {
    let mut nodes = Vec::with_capacity(doctors.len() + patients.len());
    let mut edges = Vec::new();
    for d in doctors {
        let id = d.id.to_string();
        push_edges(&mut edges, &id, &d.social_ties_doctors);
        push_edges(&mut edges, &id, &d.social_ties_patients);
        nodes.push(SnapshotNode {
            id,
            kind: NodeKind::Doctor,
        });
    }
    for p in patients {
        let id = p.id.to_string();
        push_edges(&mut edges, &id, &p.social_ties_doctors);
        push_edges(&mut edges, &id, &p.social_ties_patients);
        nodes.push(SnapshotNode {
            id,
            kind: NodeKind::Patient,
        });
    }
    NetworkSnapshot {
        edges,
        nodes,
        round,
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

/// Full state of one run.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: SimulationConfig,
    run_id: usize,
    doctors: Vec<DoctorState>,
    patients: Vec<PatientState>,
    ledger: RatingLedger,
    infections: InfectionCounter,
    rng: RngStream,
    round: u32,
}

impl Simulation {
    /// Validates `config` and initializes doctors, then patients, from one
    /// stream seeded with `run_seed`.
    pub fn new(config: &SimulationConfig, run_seed: u64, run_id: usize) -> Result<Self, Error> {
        config.validate()?;
        let mut rng = RngStream::from_seed(run_seed);
        let roster = Roster {
            num_doctors: config.num_doctors,
            num_patients: config.num_patients,
        };
        let doctors = init_doctors(config.model, roster, &mut rng);
        let patients = init_patients(config.model, roster, &mut rng);
        Ok(Self::assemble(
            config,
            run_id,
            doctors,
            patients,
            RatingLedger::new(),
            rng,
        ))
    }

    /// Builds a run from explicit state. Populations must be ordered by id
    /// and match the configured sizes.
    pub fn from_parts(
        config: &SimulationConfig,
        run_id: usize,
        doctors: Vec<DoctorState>,
        patients: Vec<PatientState>,
        ledger: RatingLedger,
        rng: RngStream,
    ) -> Result<Self, Error> {
        let sized = SimulationConfig {
            num_doctors: doctors.len(),
            num_patients: patients.len(),
            ..config.clone()
        };
        sized.validate()?;
        check_dense_ids(doctors.iter().map(|d| d.id))?;
        check_dense_ids(patients.iter().map(|p| p.id))?;
        Ok(Self::assemble(
            &sized, run_id, doctors, patients, ledger, rng,
        ))
    }

    fn assemble(
        config: &SimulationConfig,
        run_id: usize,
        doctors: Vec<DoctorState>,
        patients: Vec<PatientState>,
        ledger: RatingLedger,
        rng: RngStream,
    ) -> Self {
        Self {
            config: config.clone(),
            run_id,
            doctors,
            patients,
            ledger,
            infections: InfectionCounter::new(),
            rng,
            round: 0,
        }
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn doctors(&self) -> &[DoctorState] {
        &self.doctors
    }

    pub fn patients(&self) -> &[PatientState] {
        &self.patients
    }

    pub fn ledger(&self) -> &RatingLedger {
        &self.ledger
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn into_populations(self) -> (Vec<DoctorState>, Vec<PatientState>) {
        (self.doctors, self.patients)
    }

    /// Current tie network; only meaningful under the css model.
    pub fn snapshot(&self) -> Result<NetworkSnapshot, Error> {
        if !self.config.model.is_css() {
            return Err(Error::SnapshotNeedsCss);
        }
        Ok(network_snapshot(self.round, &self.doctors, &self.patients))
    }

    /// Runs one round and returns its metrics.
    pub fn run_round(&mut self) -> RoundMetrics {
        let model = self.config.model;
        let rules = self.config.rules;
        self.round += 1;

        if model.is_css() {
            refresh_respect_and_confidence(&mut self.doctors, &self.ledger);
        }
        let infections = spread_infection(
            &mut self.patients,
            self.config.num_infected_per_round,
            &mut self.infections,
            &rules,
            &mut self.rng,
        );
        for d in &mut self.doctors {
            d.is_busy = false;
        }

        let (mut treatments, mut untreated) = (0, 0);
        for idx in triage_order(&self.patients) {
            let patient = &mut self.patients[idx];
            if !needs_doctor(patient, &rules) {
                continue;
            }
            let choice = match model {
                ModelVariant::Classical => {
                    choose_doctor(patient, &self.doctors, &self.ledger, &rules)
                }
                ModelVariant::Css => {
                    choose_doctor_css(patient, &self.doctors, &self.ledger, &rules)
                }
            };
            let Some(id) = choice else {
                untreated += 1;
                continue;
            };
            let doctor = &mut self.doctors[id.index()];
            match model {
                ModelVariant::Classical => {
                    receive_treatment(patient, doctor, &mut self.ledger, &rules);
                }
                ModelVariant::Css => {
                    receive_treatment_css(patient, doctor, &mut self.ledger, &rules);
                }
            }
            treatments += 1;
        }

        for p in &mut self.patients {
            p.health_history.push(p.health_level);
        }

        self.evolve();
        self.metrics(infections, treatments, untreated)
    }

    fn evolve(&mut self) {
        let model = self.config.model;
        let ties = self.config.patient_tie_mutation;
        evolve_population(
            &mut self.patients,
            &GaParams::for_patients(&self.config),
            fitness_patient,
            |loser, winner, rng| crossover_patient(loser, winner, model, rng),
            |p, rng| mutate_patient(p, model, ties, rng),
            &mut self.rng,
        );
        let ledger = &self.ledger;
        evolve_population(
            &mut self.doctors,
            &GaParams::for_doctors(&self.config),
            |d| fitness_doctor(d, ledger),
            |loser, winner, rng| crossover_doctor(loser, winner, model, rng),
            |d, rng| match model {
                ModelVariant::Classical => mutate_doctor_classical(d, ledger, rng),
                ModelVariant::Css => mutate_doctor_css(d, ledger, rng),
            },
            &mut self.rng,
        );
    }

    fn metrics(&self, infections: usize, treatments: usize, untreated: usize) -> RoundMetrics {
        let ds = &self.doctors;
        let ps = &self.patients;
        RoundMetrics {
            run_id: self.run_id,
            round_index: self.round,
            model: self.config.model,
            doctor_fitness: mean(ds.iter().map(|d| fitness_doctor(d, &self.ledger))),
            patient_fitness: mean(ps.iter().map(fitness_patient)),
            research_ability: mean(ds.iter().map(|d| d.research_ability)),
            empathy: mean(ds.iter().map(|d| d.empathy)),
            weight_wmrat: mean(ds.iter().map(|d| d.weight_wmrat)),
            weight_mwres: mean(ds.iter().map(|d| d.weight_mwres)),
            confidence: mean(ds.iter().map(|d| d.confidence)),
            cred_weight: mean(ps.iter().map(|p| p.weights.credential)),
            mean_rating_weight: mean(ps.iter().map(|p| p.weights.mean_rating)),
            past_rating_weight: mean(ps.iter().map(|p| p.weights.past_rating)),
            resilience: mean(ps.iter().map(|p| p.resilience)),
            infections,
            treatments,
            untreated,
        }
    }
}

/// Output of a single run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub run_id: usize,
    pub seed: u64,
    pub metrics: Vec<RoundMetrics>,
    pub snapshots: Vec<NetworkSnapshot>,
    pub doctors: Vec<DoctorState>,
    pub patients: Vec<PatientState>,
}

/// Runs `config.num_rounds` rounds from `run_seed`, capturing a snapshot
/// after every round divisible by `config.snapshot_every`.
pub fn run_simulation(
    config: &SimulationConfig,
    run_seed: u64,
    run_id: usize,
) -> Result<RunOutput, Error> {
    let mut sim = Simulation::new(config, run_seed, run_id)?;
    let mut metrics = Vec::with_capacity(config.num_rounds as usize);
    let mut snapshots = Vec::new();
    for _ in 0..config.num_rounds {
        metrics.push(sim.run_round());
        if config.snapshot_every > 0 && sim.round() % config.snapshot_every == 0 {
            snapshots.push(sim.snapshot()?);
        }
    }
    let (doctors, patients) = sim.into_populations();
    Ok(RunOutput {
        run_id,
        seed: run_seed,
        metrics,
        snapshots,
        doctors,
        patients,
    })
}

/// Per-run series kept by a batch; final populations are dropped.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub run_id: usize,
    pub seed: u64,
    pub metrics: Vec<RoundMetrics>,
    pub snapshots: Vec<NetworkSnapshot>,
}

/// Mean and sample standard deviation of every metric at one round.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRound {
    pub round_index: u32,
    pub mean: [f64; METRIC_COLUMNS.len()],
    pub std_dev: [f64; METRIC_COLUMNS.len()],
}

#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub model: ModelVariant,
    /// Sorted by run id.
    pub runs: Vec<RunSummary>,
    pub aggregate: Vec<AggregateRound>,
}

/// Per-round mean and sample standard deviation (0 for a single run).
/// Inputs are reduced in the order given.
pub fn aggregate_rounds(series: &[&[RoundMetrics]]) -> Vec<AggregateRound> {
    let rounds = series.iter().map(|s| s.len()).min().unwrap_or(0);
    (0..rounds)
        .map(|r| {
            let rows: Vec<[f64; METRIC_COLUMNS.len()]> =
                series.iter().map(|s| s[r].values()).collect();
            let n = rows.len() as f64;
            let mut mean = [0.0; METRIC_COLUMNS.len()];
            let mut std_dev = [0.0; METRIC_COLUMNS.len()];
            for c in 0..METRIC_COLUMNS.len() {
                mean[c] = rows.iter().map(|row| row[c]).sum::<f64>() / n;
                if rows.len() > 1 {
                    let ss: f64 = rows.iter().map(|row| (row[c] - mean[c]).powi(2)).sum();
                    std_dev[c] = (ss / (n - 1.0)).sqrt();
                }
            }
            AggregateRound {
                round_index: series[0][r].round_index,
                mean,
                std_dev,
            }
        })
        .collect()
}

/// Runs `num_repeats` independent simulations in parallel and aggregates
/// them per round in repeat order.
pub fn run_batch(config: &SimulationConfig) -> Result<BatchOutput, Error> {
    config.validate()?;
    let mut runs: Vec<RunSummary> = (0..config.num_repeats)
        .into_par_iter()
        .map(|repeat| {
            let seed = derive_run_seed(config.base_seed, repeat as u64);
            run_simulation(config, seed, repeat).map(|out| RunSummary {
                run_id: out.run_id,
                seed: out.seed,
                metrics: out.metrics,
                snapshots: out.snapshots,
            })
        })
        .collect::<Result<_, _>>()?;
    runs.sort_by_key(|r| r.run_id);
    let series: Vec<&[RoundMetrics]> = runs.iter().map(|r| r.metrics.as_slice()).collect();
    let aggregate = aggregate_rounds(&series);
    Ok(BatchOutput {
        model: config.model,
        runs,
        aggregate,
    })
}
