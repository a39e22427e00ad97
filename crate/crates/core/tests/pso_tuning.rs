use proptest::prelude::*;
use retinex_pso::pso::{
    self, init_swarm, maximize, ParamBounds, SwarmConfig, TuneOptions,
};
use retinex_pso::retinex::{RetinexParams, Variant};
use retinex_pso::synthetic::{low_light, Scene};

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn sphere_converges_for_every_seed() {
    let target = [3.7, -6.2];
    let bounds = ParamBounds::uniform(2, -10.0, 10.0).unwrap();
    let mut total = 0.0;
    for seed in 1..=5 {
        let cfg = SwarmConfig {
            max_iterations: 100,
            ..SwarmConfig::new(2).with_seed(seed)
        };
        let run = maximize(
            &bounds,
            &cfg,
            |x| -((x[0] - target[0]).powi(2) + (x[1] - target[1]).powi(2)),
            |_| {},
        )
        .unwrap();
        assert!(run.history.windows(2).all(|w| w[0] <= w[1]));
        total += distance(&run.best_position, &target);
    }
    assert!(total / 5.0 < 1e-2, "mean distance {}", total / 5.0);
}

#[test]
fn fixed_coefficient_mode_also_converges() {
    let bounds = ParamBounds::uniform(2, -10.0, 10.0).unwrap();
    let mut cfg = SwarmConfig {
        max_iterations: 100,
        ..SwarmConfig::new(2).with_seed(4).with_fixed_coefficients(2.0, 2.0)
    };
    cfg.w_max = 0.9;
    cfg.w_min = 0.4;
    let run = maximize(&bounds, &cfg, |x| -(x[0] * x[0] + x[1] * x[1]), |_| {}).unwrap();
    assert!(distance(&run.best_position, &[0.0, 0.0]) < 1e-2);
}

#[test]
fn tuned_msrmcr_respects_search_ranges() {
    let img = low_light(Scene::Spotlight, 32);
    let bounds = ParamBounds::for_variant(Variant::Msrmcr);
    let cfg = SwarmConfig {
        particle_count: 12,
        max_iterations: 8,
        ..SwarmConfig::for_variant(Variant::Msrmcr).with_seed(2)
    };
    let mut every_step_inside = true;
    let res = pso::tune_observed(&img, Variant::Msrmcr, &bounds, &cfg, &TuneOptions::default(), |s| {
        every_step_inside &= s.particles().iter().all(|p| bounds.contains(&p.position));
    })
    .unwrap();
    assert!(every_step_inside);
    assert!(bounds.contains(&res.best_params.to_vector()));
    assert!(res.history.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(res.best_fitness, *res.history.last().unwrap());
    assert_eq!(res.evaluations, 12 * 9);
    let rescored = pso::score(&img, &res.best_params, &TuneOptions::default()).unwrap();
    assert_eq!(rescored, res.best_fitness);
}

#[test]
fn tuned_msrcr_respects_search_ranges() {
    let img = low_light(Scene::Foliage, 24);
    let bounds = ParamBounds::for_variant(Variant::Msrcr);
    let cfg = SwarmConfig {
        particle_count: 8,
        max_iterations: 5,
        ..SwarmConfig::for_variant(Variant::Msrcr).with_seed(8)
    };
    let res = pso::tune(&img, Variant::Msrcr, &bounds, &cfg, &TuneOptions::default()).unwrap();
    assert!(bounds.contains(&res.best_params.to_vector()));
    assert!(matches!(res.best_params, RetinexParams::Msrcr(_)));
}

#[test]
fn tuning_is_deterministic() {
    let img = low_light(Scene::Office, 24);
    let bounds = ParamBounds::for_variant(Variant::Msrmcr);
    let cfg = SwarmConfig {
        particle_count: 6,
        max_iterations: 4,
        ..SwarmConfig::for_variant(Variant::Msrmcr).with_seed(77)
    };
    let a = pso::tune(&img, Variant::Msrmcr, &bounds, &cfg, &TuneOptions::default()).unwrap();
    let b = pso::tune(&img, Variant::Msrmcr, &bounds, &cfg, &TuneOptions::default()).unwrap();
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
}

#[test]
fn mismatched_bounds_are_rejected() {
    let img = low_light(Scene::Office, 8);
    let cfg = SwarmConfig::for_variant(Variant::Msrcr);
    let err = pso::tune(
        &img,
        Variant::Msrcr,
        &ParamBounds::for_variant(Variant::Msrmcr),
        &cfg,
        &TuneOptions::default(),
    );
    assert!(err.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn positions_never_leave_the_box(
        seed in any::<u64>(),
        dims in 1usize..5,
        lo in -50.0f64..0.0,
        width in 0.0f64..40.0,
        particles in 1usize..12,
    ) {
        let bounds = ParamBounds::uniform(dims, lo, lo + width).unwrap();
        let cfg = SwarmConfig { particle_count: particles, max_iterations: 25, ..SwarmConfig::new(dims).with_seed(seed) };
        let mut inside = true;
        // A fitness with its peak outside the box pushes particles into the walls.
        let run = maximize(&bounds, &cfg, |x| x.iter().sum::<f64>(), |s| {
            inside &= s.particles().iter().all(|p| bounds.contains(&p.position) && bounds.contains(&p.pbest_position));
        }).unwrap();
        prop_assert!(inside);
        prop_assert!(run.history.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn initial_swarm_within_msrmcr_ranges(seed in any::<u64>()) {
        let bounds = ParamBounds::for_variant(Variant::Msrmcr);
        let cfg = SwarmConfig::for_variant(Variant::Msrmcr).with_seed(seed);
        let swarm = init_swarm(&bounds, &cfg).unwrap();
        prop_assert_eq!(swarm.particles().len(), 30);
        for p in swarm.particles() {
            for (v, iv) in p.position.iter().zip(bounds.intervals()) {
                prop_assert!(iv.lower <= *v && *v <= iv.upper);
            }
        }
    }
}
