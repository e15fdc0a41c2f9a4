use proptest::prelude::*;

use caresim::agents::{init_doctors, init_patients, Roster};
use caresim::classical::{rate_doctor, treat_patient, treatment_effectiveness, upgrade_credential};
use caresim::cognitive::{confidence, refresh_respect_and_confidence};
use caresim::engine::{aggregate_rounds, METRIC_COLUMNS};
use caresim::evolution::{
    crossover_doctor, crossover_patient, evolve_population, fitness_doctor, fitness_patient,
    mutate_doctor_classical, mutate_doctor_css, mutate_patient, GaParams, PatientTieMutation,
};
use caresim::infection::{infect, priority, spread_infection, triage_order, InfectionCounter};
use caresim::*;

fn model_strategy() -> impl Strategy<Value = ModelVariant> {
    prop_oneof![Just(ModelVariant::Classical), Just(ModelVariant::Css)]
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn assert_doctor(d: &DoctorState) {
    assert!(unit(d.research_ability) && unit(d.empathy), "{d:?}");
    assert!(unit(d.weight_wmrat) && unit(d.weight_mwres), "{d:?}");
    assert!(unit(d.technological_resource_constraint));
    assert!(d.personal_resource >= 0.0 && d.confidence >= 0.0);
    assert!(d.social_ties_doctors.values().all(unit) && d.social_ties_patients.values().all(unit));
    assert!(d.respect_for_colleagues.values().all(|r| r >= 0.0));
}

fn assert_patient(p: &PatientState) {
    let w = p.weights;
    assert!(unit(p.health_level), "{p:?}");
    assert!((0.1..=0.4).contains(&p.resilience), "{p:?}");
    assert!(
        [w.credential, w.mean_rating, w.past_rating]
            .into_iter()
            .all(unit),
        "{w:?}"
    );
    assert!((w.sum() - 1.0).abs() <= 1e-9, "{w:?}");
    assert!(p.social_ties_doctors.values().all(unit) && p.social_ties_patients.values().all(unit));
    assert!(!p.is_infected || p.infected_order.is_some(), "{p:?}");
}

fn small_config(
    model: ModelVariant,
    doctors: usize,
    extra_patients: usize,
    infected: usize,
    elites: usize,
) -> SimulationConfig {
    let patients = doctors + extra_patients;
    SimulationConfig {
        num_doctors: doctors,
        num_patients: patients,
        num_rounds: 15,
        num_infected_per_round: 1 + infected % patients,
        num_repeats: 3,
        tournament_size: 2.min(doctors),
        num_elites: elites % doctors,
        ..SimulationConfig::new(model)
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn states_stay_valid_through_rounds(
        model in model_strategy(),
        doctors in 1usize..8,
        extra in 1usize..20,
        infected in 0usize..30,
        elites in 0usize..4,
        seed in any::<u64>(),
    ) {
        let config = small_config(model, doctors, extra, infected, elites);
        let mut sim = Simulation::new(&config, seed, 0).unwrap();
        let mut last: Vec<(Credential, u32)> = sim.doctors().iter().map(|d| (d.credential, d.experience)).collect();
        for round in 1..=config.num_rounds {
            let m = sim.run_round();
            prop_assert_eq!(m.round_index, round);
            prop_assert!(m.treatments <= config.num_doctors);
            prop_assert!(m.infections <= config.num_patients && m.untreated <= config.num_patients);
            prop_assert!((0.0..=5.0).contains(&m.doctor_fitness));
            prop_assert!(unit(m.patient_fitness));
            sim.doctors().iter().for_each(assert_doctor);
            sim.patients().iter().for_each(assert_patient);
            for (d, (cred, exp)) in sim.doctors().iter().zip(&last) {
                prop_assert!(d.credential >= *cred && d.experience >= *exp);
            }
            last = sim.doctors().iter().map(|d| (d.credential, d.experience)).collect();
        }
    }

    #[test]
    fn same_seed_same_run(model in model_strategy(), doctors in 1usize..6, extra in 1usize..10, seed in any::<u64>()) {
        let config = small_config(model, doctors, extra, 3, 1);
        let a = run_simulation(&config, seed, 0).unwrap();
        let b = run_simulation(&config, seed, 0).unwrap();
        prop_assert_eq!(a.metrics, b.metrics);
        prop_assert_eq!(a.doctors, b.doctors);
        prop_assert_eq!(a.patients, b.patients);
    }

    #[test]
    fn evolution_keeps_bounds_and_elites(
        model in model_strategy(),
        size in 2usize..12,
        elites in 0usize..4,
        mutation in 0.0f64..=1.0,
        crossover in 0.0f64..=1.0,
        tournaments in 1usize..6,
        single_tie in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::from_seed(seed);
        let roster = Roster { num_doctors: size, num_patients: size };
        let mut docs = init_doctors(model, roster, &mut rng);
        let mut pats = init_patients(model, roster, &mut rng);
        let mut ledger = RatingLedger::new();
        for _ in 0..size * 2 {
            let r = rng.index(6) as f64;
            ledger.add_rating(DoctorId(rng.index(size) as u32), PatientId(rng.index(size) as u32), r).unwrap();
        }
        for p in &mut pats {
            let h = rng.uniform(0.1, 1.0);
            p.health_history.push(h);
        }
        let params = GaParams {
            tournament_size: 2,
            num_elites: elites.min(size - 1),
            mutation_chance: mutation,
            crossover_chance: crossover,
            tournaments_per_round: tournaments,
        };
        let ties = if single_tie { PatientTieMutation::SingleTie } else { PatientTieMutation::EveryTie };

        let mut ranked: Vec<usize> = (0..size).collect();
        let scores: Vec<f64> = pats.iter().map(fitness_patient).collect();
        ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let elite_patients: Vec<(usize, PatientState)> =
            ranked[..params.num_elites].iter().map(|&i| (i, pats[i].clone())).collect();
        evolve_population(
            &mut pats,
            &params,
            fitness_patient,
            |l, w, r| crossover_patient(l, w, model, r),
            |p, r| mutate_patient(p, model, ties, r),
            &mut rng,
        );
        for (i, e) in &elite_patients {
            prop_assert_eq!(&pats[*i], e);
        }
        pats.iter().for_each(assert_patient);

        let mut ranked: Vec<usize> = (0..size).collect();
        let scores: Vec<f64> = docs.iter().map(|d| fitness_doctor(d, &ledger)).collect();
        ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let elite_doctors: Vec<(usize, DoctorState)> =
            ranked[..params.num_elites].iter().map(|&i| (i, docs[i].clone())).collect();
        let before: Vec<Credential> = docs.iter().map(|d| d.credential).collect();
        let mut replay_docs = docs.clone();
        let mut replay_rng = rng.clone();
        let mutate = |d: &mut DoctorState, r: &mut RngStream| match model {
            ModelVariant::Classical => mutate_doctor_classical(d, &ledger, r),
            ModelVariant::Css => mutate_doctor_css(d, &ledger, r),
        };
        evolve_population(&mut docs, &params, |d| fitness_doctor(d, &ledger), |l, w, r| crossover_doctor(l, w, model, r), mutate, &mut rng);
        evolve_population(
            &mut replay_docs,
            &params,
            |d| fitness_doctor(d, &ledger),
            |l, w, r| crossover_doctor(l, w, model, r),
            mutate,
            &mut replay_rng,
        );
        prop_assert_eq!(&docs, &replay_docs);
        for (i, e) in &elite_doctors {
            prop_assert_eq!(&docs[*i], e);
        }
        for (d, c) in docs.iter().zip(before) {
            prop_assert!(d.credential >= c);
        }
        docs.iter().for_each(assert_doctor);
    }

    #[test]
    fn effectiveness_and_credential_stay_in_range(seed in any::<u64>(), steps in 1usize..200) {
        let rules = CareRules::default();
        let mut rng = RngStream::from_seed(seed);
        let roster = Roster { num_doctors: 1, num_patients: 1 };
        let mut d = init_doctors(ModelVariant::Classical, roster, &mut rng).remove(0);
        for _ in 0..steps {
            d.research_ability = rng.unit();
            d.empathy = rng.unit();
            d.is_busy = rng.chance(0.3);
            let before = d.credential;
            let e = treat_patient(&mut d, &rules);
            prop_assert!((0.0..=0.7).contains(&e));
            prop_assert!((0.0..=0.7).contains(&treatment_effectiveness(&d, &rules)));
            upgrade_credential(&mut d);
            prop_assert!(d.credential >= before);
        }
    }

    #[test]
    fn classical_rating_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let rules = CareRules::default();
        let mut rng = RngStream::from_seed(0);
        let roster = Roster { num_doctors: 1, num_patients: 1 };
        let mut p = init_patients(ModelVariant::Classical, roster, &mut rng).remove(0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        p.health_level = lo;
        let r_lo = rate_doctor(&p, &rules);
        p.health_level = hi;
        let r_hi = rate_doctor(&p, &rules);
        prop_assert!(r_lo <= 5 && r_hi <= 5 && r_lo <= r_hi);
    }

    #[test]
    fn infection_orders_extend_the_counter(seed in any::<u64>(), n in 1usize..60, waves in 1usize..6, k in 0usize..30) {
        let rules = CareRules::default();
        let mut rng = RngStream::from_seed(seed);
        let mut pats = init_patients(ModelVariant::Classical, Roster { num_doctors: 1, num_patients: n }, &mut rng);
        let mut counter = InfectionCounter::new();
        for _ in 0..waves {
            let start = counter.peek();
            let newly = spread_infection(&mut pats, k, &mut counter, &rules, &mut rng);
            prop_assert_eq!(counter.peek(), start + newly as u64);
            let mut orders: Vec<u64> = pats.iter().filter_map(|p| p.infected_order).collect();
            orders.sort_unstable();
            prop_assert_eq!(orders, (0..counter.peek()).collect::<Vec<_>>());
            prop_assert!(pats.iter().all(|p| p.health_level >= 0.0));
        }
    }

    #[test]
    fn infect_is_idempotent_on_infected(health in 0.0f64..=1.0) {
        let rules = CareRules::default();
        let mut rng = RngStream::from_seed(1);
        let mut p = init_patients(ModelVariant::Classical, Roster { num_doctors: 1, num_patients: 1 }, &mut rng).remove(0);
        p.health_level = health;
        infect(&mut p, 0, &rules);
        prop_assert!(p.health_level >= 0.0);
        let once = p.clone();
        if p.is_infected {
            infect(&mut p, 1, &rules);
            prop_assert_eq!(p, once);
        }
    }

    #[test]
    fn triage_is_a_total_order(seed in any::<u64>(), n in 1usize..40) {
        let rules = CareRules::default();
        let mut rng = RngStream::from_seed(seed);
        let mut pats = init_patients(ModelVariant::Classical, Roster { num_doctors: 1, num_patients: n }, &mut rng);
        spread_infection(&mut pats, n / 2, &mut InfectionCounter::new(), &rules, &mut rng);
        for p in pats.iter_mut().filter(|_| rng.chance(0.3)) {
            p.health_level = 0.5;
        }
        let order = triage_order(&pats);
        let mut seen = order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        for w in order.windows(2) {
            let (a, b) = (priority(&pats[w[0]]), priority(&pats[w[1]]));
            prop_assert!(a.total_cmp(&b).is_le());
            if a.total_cmp(&b).is_eq() {
                prop_assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn zero_ties_give_zero_confidence(seed in any::<u64>(), n in 1usize..8, m in 1usize..8) {
        let mut rng = RngStream::from_seed(seed);
        let roster = Roster { num_doctors: n, num_patients: m };
        let mut docs = init_doctors(ModelVariant::Css, roster, &mut rng);
        for d in &mut docs {
            d.social_ties_doctors.values_mut().for_each(|s| *s = 0.0);
            d.social_ties_patients.values_mut().for_each(|s| *s = 0.0);
        }
        let mut ledger = RatingLedger::new();
        for _ in 0..n * m {
            let r = rng.uniform(0.0, 5.0);
            ledger.add_rating(DoctorId(rng.index(n) as u32), PatientId(rng.index(m) as u32), r).unwrap();
        }
        refresh_respect_and_confidence(&mut docs, &ledger);
        for d in &docs {
            prop_assert_eq!(d.confidence, 0.0);
            prop_assert_eq!(confidence(d, &ledger, &docs), 0.0);
            prop_assert!(d.respect_for_colleagues.values().all(|r| r == 0.0));
        }
    }

    #[test]
    fn aggregation_ignores_repeat_order(model in model_strategy(), seed in any::<u64>(), rotate in 0usize..3) {
        let mut config = small_config(model, 3, 6, 2, 1);
        config.base_seed = seed;
        let batch = run_batch(&config).unwrap();
        let mut series: Vec<&[RoundMetrics]> = batch.runs.iter().map(|r| r.metrics.as_slice()).collect();
        series.rotate_left(rotate);
        series.reverse();
        let shuffled = aggregate_rounds(&series);
        for (a, b) in batch.aggregate.iter().zip(&shuffled) {
            prop_assert_eq!(a.round_index, b.round_index);
            for c in 0..METRIC_COLUMNS.len() {
                prop_assert!((a.mean[c] - b.mean[c]).abs() <= 1e-9 * (1.0 + a.mean[c].abs()));
                prop_assert!((a.std_dev[c] - b.std_dev[c]).abs() <= 1e-9 * (1.0 + a.std_dev[c].abs()));
            }
        }
        let again = run_batch(&config).unwrap();
        prop_assert_eq!(&batch.aggregate, &again.aggregate);
    }
}
