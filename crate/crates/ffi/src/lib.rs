//! C interface to the caresim engine.
//!
//! Every fallible function returns a [`CaresimStatus`]. On failure a
//! description is stored per thread and can be read with
//! [`caresim_last_error_message`]. Simulations are opaque handles created by
//! [`caresim_simulation_new`] and released with [`caresim_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use caresim::export::{export_batch, export_network_snapshot};
use caresim::{CareRules, ModelVariant, Preset, RoundMetrics, Simulation, SimulationConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaresimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaresimModel {
    Classical = 0,
    Css = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaresimPreset {
    PaperFull = 0,
    PaperSingle = 1,
}

/// Flat mirror of the engine configuration.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaresimConfig {
    pub model: CaresimModel,
    pub num_doctors: usize,
    pub num_patients: usize,
    pub num_rounds: u32,
    pub num_infected_per_round: usize,
    pub num_repeats: usize,
    pub mutation_chance: f64,
    pub crossover_chance: f64,
    pub tournament_size: usize,
    pub num_elites: usize,
    /// 0 selects the population-size default.
    pub tournaments_per_round: usize,
    /// 0 disables snapshots.
    pub snapshot_every: u32,
    pub base_seed: u64,
    /// Mutate a single random tie per patient instead of every tie.
    pub single_tie_mutation: bool,
    pub infection_severity: f64,
    pub needs_doctor_threshold: f64,
    pub rating_perfect_threshold: f64,
    pub effectiveness_cap: f64,
    /// Negative disables the extra search rule for infected patients.
    pub infected_seek_threshold: f64,
}

/// Metrics of one completed round.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CaresimRoundMetrics {
    pub round_index: u32,
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

/// Opaque simulation handle.
pub struct CaresimSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CaresimStatus, String);

impl From<caresim::Error> for Failure {
    fn from(e: caresim::Error) -> Self {
        let status = match e {
            caresim::Error::Config(_)
            | caresim::Error::Init(_)
            | caresim::Error::SnapshotNeedsCss => CaresimStatus::InvalidConfig,
            caresim::Error::Io { .. }
            | caresim::Error::Csv { .. }
            | caresim::Error::Json { .. } => CaresimStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

impl From<caresim::ConfigError> for Failure {
    fn from(e: caresim::ConfigError) -> Self {
        Failure(CaresimStatus::InvalidConfig, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CaresimStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, recording its failure or panic as the thread's last error.
fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> CaresimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CaresimStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            set_error(format!("panic: {message}"));
            CaresimStatus::Panic
        }
    }
}

impl From<&SimulationConfig> for CaresimConfig {
    fn from(c: &SimulationConfig) -> Self {
        Self {
            model: match c.model {
                ModelVariant::Classical => CaresimModel::Classical,
                ModelVariant::Css => CaresimModel::Css,
            },
            num_doctors: c.num_doctors,
            num_patients: c.num_patients,
            num_rounds: c.num_rounds,
            num_infected_per_round: c.num_infected_per_round,
            num_repeats: c.num_repeats,
            mutation_chance: c.mutation_chance,
            crossover_chance: c.crossover_chance,
            tournament_size: c.tournament_size,
            num_elites: c.num_elites,
            tournaments_per_round: c.tournaments_per_round.unwrap_or(0),
            snapshot_every: c.snapshot_every,
            base_seed: c.base_seed,
            single_tie_mutation: c.patient_tie_mutation
                == caresim::evolution::PatientTieMutation::SingleTie,
            infection_severity: c.rules.infection_severity,
            needs_doctor_threshold: c.rules.needs_doctor_threshold,
            rating_perfect_threshold: c.rules.rating_perfect_threshold,
            effectiveness_cap: c.rules.effectiveness_cap,
            infected_seek_threshold: c.rules.infected_seek_threshold.unwrap_or(-1.0),
        }
    }
}

impl CaresimConfig {
    fn to_config(self) -> Result<SimulationConfig, Failure> {
        let model = match self.model {
            CaresimModel::Classical => ModelVariant::Classical,
            CaresimModel::Css => ModelVariant::Css,
        };
        let config = SimulationConfig {
            model,
            num_doctors: self.num_doctors,
            num_patients: self.num_patients,
            num_rounds: self.num_rounds,
            num_infected_per_round: self.num_infected_per_round,
            num_repeats: self.num_repeats,
            rules: CareRules {
                infection_severity: self.infection_severity,
                needs_doctor_threshold: self.needs_doctor_threshold,
                rating_perfect_threshold: self.rating_perfect_threshold,
                effectiveness_cap: self.effectiveness_cap,
                infected_seek_threshold: (self.infected_seek_threshold >= 0.0)
                    .then_some(self.infected_seek_threshold),
            },
            mutation_chance: self.mutation_chance,
            crossover_chance: self.crossover_chance,
            tournament_size: self.tournament_size,
            num_elites: self.num_elites,
            tournaments_per_round: (self.tournaments_per_round > 0)
                .then_some(self.tournaments_per_round),
            snapshot_every: self.snapshot_every,
            patient_tie_mutation: if self.single_tie_mutation {
                caresim::evolution::PatientTieMutation::SingleTie
            } else {
                caresim::evolution::PatientTieMutation::EveryTie
            },
            base_seed: self.base_seed,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&RoundMetrics> for CaresimRoundMetrics {
    fn from(m: &RoundMetrics) -> Self {
        Self {
            round_index: m.round_index,
            doctor_fitness: m.doctor_fitness,
            patient_fitness: m.patient_fitness,
            research_ability: m.research_ability,
            empathy: m.empathy,
            weight_wmrat: m.weight_wmrat,
            weight_mwres: m.weight_mwres,
            confidence: m.confidence,
            cred_weight: m.cred_weight,
            mean_rating_weight: m.mean_rating_weight,
            past_rating_weight: m.past_rating_weight,
            resilience: m.resilience,
            infections: m.infections,
            treatments: m.treatments,
            untreated: m.untreated,
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn path_arg(ptr: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        Failure(
            CaresimStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })?;
    Ok(PathBuf::from(text))
}

/// Fills `out` with a named parameter set for `model`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `CaresimConfig`.
#[no_mangle]
pub unsafe extern "C" fn caresim_config_preset(
    preset: CaresimPreset,
    model: CaresimModel,
    out: *mut CaresimConfig,
) -> CaresimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let preset = match preset {
            CaresimPreset::PaperFull => Preset::PaperFull,
            CaresimPreset::PaperSingle => Preset::PaperSingle,
        };
        let model = match model {
            CaresimModel::Classical => ModelVariant::Classical,
            CaresimModel::Css => ModelVariant::Css,
        };
        unsafe {
            out.write(CaresimConfig::from(&SimulationConfig::preset(
                preset, model,
            )))
        };
        Ok(())
    })
}

/// Checks a configuration without running anything.
///
/// # Safety
/// `config` must be null or point to a valid `CaresimConfig`.
#[no_mangle]
pub unsafe extern "C" fn caresim_config_validate(config: *const CaresimConfig) -> CaresimStatus {
    guarded(|| {
        let config = unsafe { config.as_ref() }.ok_or_else(|| null("config"))?;
        config.to_config().map(drop)
    })
}

/// Creates a simulation seeded with `run_seed` and stores the handle in `out`.
///
/// # Safety
/// `config` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn caresim_simulation_new(
    config: *const CaresimConfig,
    run_seed: u64,
    out: *mut *mut CaresimSimulation,
) -> CaresimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { out.write(ptr::null_mut()) };
        let config = unsafe { config.as_ref() }
            .ok_or_else(|| null("config"))?
            .to_config()?;
        let inner = Simulation::new(&config, run_seed, 0)?;
        unsafe { out.write(Box::into_raw(Box::new(CaresimSimulation { inner }))) };
        Ok(())
    })
}

/// Advances one round. `metrics` may be null when the values are not needed.
///
/// # Safety
/// `sim` must be null or a live handle; `metrics` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn caresim_simulation_run_round(
    sim: *mut CaresimSimulation,
    metrics: *mut CaresimRoundMetrics,
) -> CaresimStatus {
    guarded(|| {
        let sim = unsafe { sim.as_mut() }.ok_or_else(|| null("sim"))?;
        let m = sim.inner.run_round();
        if !metrics.is_null() {
            unsafe { metrics.write(CaresimRoundMetrics::from(&m)) };
        }
        Ok(())
    })
}

/// Rounds completed so far, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caresim_simulation_round(sim: *const CaresimSimulation) -> u32 {
    unsafe { sim.as_ref() }.map_or(0, |s| s.inner.round())
}

/// Writes the current tie network as JSON to `path` (css model only).
///
/// # Safety
/// `sim` must be null or a live handle; `path` must be null or a valid
/// NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn caresim_simulation_write_snapshot(
    sim: *const CaresimSimulation,
    path: *const c_char,
) -> CaresimStatus {
    guarded(|| {
        let sim = unsafe { sim.as_ref() }.ok_or_else(|| null("sim"))?;
        let path = unsafe { path_arg(path, "path") }?;
        export_network_snapshot(&sim.inner.snapshot()?, &path)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from `caresim_simulation_new` that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn caresim_simulation_free(sim: *mut CaresimSimulation) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Runs every repeat of `config` and writes metrics CSVs and snapshots into
/// `out_dir`, creating it if needed.
///
/// # Safety
/// `config` must be null or valid; `out_dir` must be null or a valid
/// NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn caresim_run_batch_to_csv(
    config: *const CaresimConfig,
    out_dir: *const c_char,
) -> CaresimStatus {
    guarded(|| {
        let config = unsafe { config.as_ref() }
            .ok_or_else(|| null("config"))?
            .to_config()?;
        let dir = unsafe { path_arg(out_dir, "out_dir") }?;
        export_batch(&caresim::run_batch(&config)?, &dir)?;
        Ok(())
    })
}

/// Seed of repeat `repeat_index` in a batch started from `base_seed`.
#[no_mangle]
pub extern "C" fn caresim_derive_run_seed(base_seed: u64, repeat_index: u64) -> u64 {
    caresim::derive_run_seed(base_seed, repeat_index)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next caresim call on the same thread.
#[no_mangle]
pub extern "C" fn caresim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
