use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::PatientTieMutation;

/// Which behavioral model a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    /// Perfect-information model: no social ties, no confidence.
    Classical,
    /// Cognitive social system: directed tie maps, respect and confidence.
    Css,
}

impl ModelVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Classical => "classical",
            ModelVariant::Css => "css",
        }
    }

    pub fn is_css(self) -> bool {
        self == ModelVariant::Css
    }

    pub fn default_mutation_chance(self) -> f64 {
        match self {
            ModelVariant::Classical => 0.5,
            ModelVariant::Css => 0.01,
        }
    }

    pub fn default_crossover_chance(self) -> f64 {
        match self {
            ModelVariant::Classical => 0.3,
            ModelVariant::Css => 0.5,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(ModelVariant::Classical),
            "css" => Ok(ModelVariant::Css),
            other => Err(ConfigError::UnknownModel(other.to_string())),
        }
    }
}

/// Thresholds and constants of the care process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CareRules {
    /// Health removed by one infection.
    pub infection_severity: f64,
    /// Patients with health strictly below this look for a doctor.
    pub needs_doctor_threshold: f64,
    /// Post-treatment health at or above this earns a perfect rating.
    pub rating_perfect_threshold: f64,
    /// Upper bound on a doctor's treatment effectiveness.
    pub effectiveness_cap: f64,
    /// When set, infected patients also look for a doctor while their health
    /// is below this level. Off by default.
    pub infected_seek_threshold: Option<f64>,
}

impl Default for CareRules {
    fn default() -> Self {
        Self {
            infection_severity: 0.2,
            needs_doctor_threshold: 0.6,
            rating_perfect_threshold: 0.8,
            effectiveness_cap: 0.7,
            infected_seek_threshold: None,
        }
    }
}

/// Named parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// 100 doctors, 1000 patients, 100 rounds, 200 infections per round, 50 repeats.
    PaperFull,
    /// 15 doctors, 100 patients, 20 rounds, every patient exposed each round, 1 repeat.
    PaperSingle,
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-full" => Ok(Preset::PaperFull),
            "paper-single" => Ok(Preset::PaperSingle),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{field} must be positive")]
    NotPositive { field: &'static str },
    #[error("{field} must lie in [0, 1], got {value}")]
    NotProbability { field: &'static str, value: f64 },
    #[error("{field} must be a finite non-negative number, got {value}")]
    BadThreshold { field: &'static str, value: f64 },
    #[error("tournament size {tournament_size} exceeds the {population} population of {size}")]
    TournamentTooLarge {
        tournament_size: usize,
        population: &'static str,
        size: usize,
    },
    #[error("{num_elites} elites leave no room in the {population} population of {size}")]
    TooManyElites {
        num_elites: usize,
        population: &'static str,
        size: usize,
    },
    #[error("{infected} infections per round exceed the {patients} patients")]
    TooManyInfected { infected: usize, patients: usize },
    #[error("unknown model {0:?} (expected classical or css)")]
    UnknownModel(String),
    #[error("unknown preset {0:?} (expected paper-full or paper-single)")]
    UnknownPreset(String),
    #[error("network snapshots require the css model")]
    SnapshotsNeedCss,
}

/// Everything needed to reproduce a batch of runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: ModelVariant,
    pub num_doctors: usize,
    pub num_patients: usize,
    pub num_rounds: u32,
    pub num_infected_per_round: usize,
    pub num_repeats: usize,
    pub rules: CareRules,
    pub mutation_chance: f64,
    pub crossover_chance: f64,
    pub tournament_size: usize,
    pub num_elites: usize,
    /// Tournaments per population per round. `None` uses `ceil(size / 10)`
    /// separately for each population.
    pub tournaments_per_round: Option<usize>,
    /// Capture a network snapshot every this many rounds; 0 disables.
    pub snapshot_every: u32,
    pub patient_tie_mutation: PatientTieMutation,
    pub base_seed: u64,
}

impl SimulationConfig {
    /// Full-scale parameters with the given model's GA defaults.
    pub fn new(model: ModelVariant) -> Self {
        Self::preset(Preset::PaperFull, model)
    }

    pub fn preset(preset: Preset, model: ModelVariant) -> Self {
        let (num_doctors, num_patients, num_rounds, num_infected_per_round, num_repeats) =
            match preset {
                Preset::PaperFull => (100, 1000, 100, 200, 50),
                Preset::PaperSingle => (15, 100, 20, 100, 1),
            };
        Self {
            model,
            num_doctors,
            num_patients,
            num_rounds,
            num_infected_per_round,
            num_repeats,
            rules: CareRules::default(),
            mutation_chance: model.default_mutation_chance(),
            crossover_chance: model.default_crossover_chance(),
            tournament_size: 5,
            num_elites: 1,
            tournaments_per_round: None,
            snapshot_every: 0,
            patient_tie_mutation: PatientTieMutation::EveryTie,
            base_seed: 0,
        }
    }

    /// Switches the model and resets the GA chances to that model's defaults.
    pub fn with_model(mut self, model: ModelVariant) -> Self {
        self.model = model;
        self.mutation_chance = model.default_mutation_chance();
        self.crossover_chance = model.default_crossover_chance();
        self
    }

    pub fn doctor_tournaments(&self) -> usize {
        self.tournaments_per_round
            .unwrap_or_else(|| self.num_doctors.div_ceil(10))
    }

    pub fn patient_tournaments(&self) -> usize {
        self.tournaments_per_round
            .unwrap_or_else(|| self.num_patients.div_ceil(10))
    }

    /// Zero rounds is accepted and yields an empty metrics series.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("num_doctors", self.num_doctors),
            ("num_patients", self.num_patients),
            ("num_infected_per_round", self.num_infected_per_round),
            ("num_repeats", self.num_repeats),
            ("tournament_size", self.tournament_size),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(ConfigError::NotPositive { field });
            }
        }
        if self.tournaments_per_round == Some(0) {
            return Err(ConfigError::NotPositive {
                field: "tournaments_per_round",
            });
        }
        for (field, value) in [
            ("mutation_chance", self.mutation_chance),
            ("crossover_chance", self.crossover_chance),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::NotProbability { field, value });
            }
        }
        let rules = &self.rules;
        for (field, value) in [
            ("infection_severity", rules.infection_severity),
            ("needs_doctor_threshold", rules.needs_doctor_threshold),
            ("rating_perfect_threshold", rules.rating_perfect_threshold),
            ("effectiveness_cap", rules.effectiveness_cap),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::BadThreshold { field, value });
            }
        }
        if let Some(value) = rules.infected_seek_threshold {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::BadThreshold {
                    field: "infected_seek_threshold",
                    value,
                });
            }
        }
        if rules.rating_perfect_threshold == 0.0 {
            return Err(ConfigError::BadThreshold {
                field: "rating_perfect_threshold",
                value: 0.0,
            });
        }
        for (population, size) in [("doctor", self.num_doctors), ("patient", self.num_patients)] {
            if self.tournament_size > size {
                return Err(ConfigError::TournamentTooLarge {
                    tournament_size: self.tournament_size,
                    population,
                    size,
                });
            }
            if self.num_elites >= size {
                return Err(ConfigError::TooManyElites {
                    num_elites: self.num_elites,
                    population,
                    size,
                });
            }
        }
        if self.num_infected_per_round > self.num_patients {
            return Err(ConfigError::TooManyInfected {
                infected: self.num_infected_per_round,
                patients: self.num_patients,
            });
        }
        if self.snapshot_every > 0 && !self.model.is_css() {
            return Err(ConfigError::SnapshotsNeedCss);
        }
        Ok(())
    }
}
