use std::f64::consts::PI;

use nmheom_core::measure::{
    distance_series_from_map, maximize_with_map, pair_states, positive_variation,
};
use nmheom_core::{
    maximize, nonmarkovianity_for_pair, phase_unitary, trace_distance, BathModel, CouplingOperator,
    DynamicalMap, Dynamics, HeomDynamics, InitialPair, PropagatorConfig, RwaDynamics, Sampler,
};

const LAMBDA: f64 = 0.1;

fn heom(delta: f64, chi: f64, depth: usize) -> HeomDynamics {
    HeomDynamics::new(
        BathModel::baseline().with_delta(delta),
        CouplingOperator::new(chi).unwrap(),
        PropagatorConfig::default().with_depth(depth),
    )
}

fn rwa(delta: f64) -> RwaDynamics {
    RwaDynamics::new(BathModel::baseline().with_delta(delta), 0.005, 50.0)
}

#[test]
fn pair_states_are_orthogonal_pure_states() {
    for (theta, phi) in [(0.0, 0.0), (PI / 2.0, 0.0), (1.3, 4.1), (PI, 2.0)] {
        let (a, b) = pair_states(InitialPair::new(theta, phi));
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!((a * a - a).max_abs() < 1e-15 && (b * b - b).max_abs() < 1e-15);
    }
}

#[test]
fn resonant_rotating_wave_dynamics_is_markovian_in_the_measure() {
    let value = nonmarkovianity_for_pair(InitialPair::new(0.0, 0.0), &rwa(0.0)).unwrap();
    assert_eq!(value, 0.0);
}

#[test]
fn large_detuning_gives_backflow() {
    let value = nonmarkovianity_for_pair(InitialPair::new(0.0, 0.0), &rwa(15.0 * LAMBDA)).unwrap();
    assert!(value > 1e-6, "value {value:.3e}");
}

#[test]
fn decoupled_bath_gives_zero_for_every_pair() {
    let d = HeomDynamics::new(
        BathModel::baseline().with_gamma0(0.0).with_delta(1.0),
        CouplingOperator::new(1.0).unwrap(),
        PropagatorConfig::default().with_depth(2),
    );
    let res = maximize(
        &d,
        &Sampler {
            grid: 5,
            random: 8,
            seed: 1,
        },
    )
    .unwrap();
    assert!(res.per_pair.iter().all(|p| p.value < 1e-12));
    assert!(res.value < 1e-12);
}

#[test]
fn rotating_wave_optimum_is_at_the_pole() {
    let res = maximize(&heom(10.0 * LAMBDA, 0.0, 2), &Sampler::default()).unwrap();
    assert_eq!((res.best_pair.theta, res.best_pair.phi), (0.0, 0.0));
    assert!(res.value > 0.0);
    assert!(res
        .per_pair
        .iter()
        .all(|p| p.value >= 0.0 && p.value.is_finite()));
}

#[test]
fn rotating_wave_measure_is_independent_of_phi() {
    let map = DynamicalMap::from_dynamics(&heom(10.0 * LAMBDA, 0.0, 2)).unwrap();
    for theta in [0.3, PI / 2.0, 2.2] {
        let reference = positive_variation(
            &distance_series_from_map(&map, InitialPair::new(theta, 0.0)).unwrap(),
        );
        for phi in [0.7, 2.0, 5.5] {
            let v = positive_variation(
                &distance_series_from_map(&map, InitialPair::new(theta, phi)).unwrap(),
            );
            assert!((v - reference).abs() < 1e-8, "theta={theta} phi={phi}");
        }
    }
}

#[test]
fn map_superposition_matches_direct_propagation() {
    let d = heom(5.0 * LAMBDA, 0.75, 6);
    let map = DynamicalMap::from_dynamics(&d).unwrap();
    for (theta, phi) in [(0.0, 0.0), (1.0, 2.5), (2.9, 0.1)] {
        let p = InitialPair::new(theta, phi);
        let direct = nonmarkovianity_for_pair(p, &d).unwrap();
        let via_map = positive_variation(&distance_series_from_map(&map, p).unwrap());
        assert!((direct - via_map).abs() < 1e-12);
    }
}

#[test]
fn distance_is_invariant_under_the_free_rotation() {
    let d = heom(3.0 * LAMBDA, 1.0, 6);
    let (a0, b0) = pair_states(InitialPair::new(1.2, 0.8));
    let (a, b) = (d.evolve(&a0).unwrap(), d.evolve(&b0).unwrap());
    for ((t, ra), rb) in a.iter().zip(b.states()).step_by(97) {
        let u = phase_unitary(2.0, t);
        let plain = trace_distance(ra, rb).unwrap();
        let rotated = trace_distance(&ra.conjugate_by(&u), &rb.conjugate_by(&u)).unwrap();
        assert!((plain - rotated).abs() < 1e-12);
    }
}

#[test]
fn maximum_is_seed_invariant_when_grid_holds_optimum() {
    let map = DynamicalMap::from_dynamics(&heom(10.0 * LAMBDA, 0.0, 2)).unwrap();
    let a = maximize_with_map(
        &map,
        &Sampler {
            seed: 1,
            ..Sampler::default()
        },
        50.0,
        0.005,
    )
    .unwrap();
    let b = maximize_with_map(
        &map,
        &Sampler {
            seed: 99,
            ..Sampler::default()
        },
        50.0,
        0.005,
    )
    .unwrap();
    assert_eq!(a.best_pair, b.best_pair);
    assert!((a.value - b.value).abs() < 1e-12);
    let again = maximize_with_map(
        &map,
        &Sampler {
            seed: 1,
            ..Sampler::default()
        },
        50.0,
        0.005,
    )
    .unwrap();
    assert_eq!(a, again);
}

#[test]
fn measure_is_stable_under_grid_refinement() {
    let sampler = Sampler {
        grid: 7,
        random: 0,
        seed: 0,
    };
    for chi in [0.0, 1.0] {
        let coarse = heom(10.0 * LAMBDA, chi, 6);
        let mut fine = coarse;
        fine.cfg = fine.cfg.with_dt(0.5 * coarse.cfg.dt);
        let a = maximize(&coarse, &sampler).unwrap().value;
        let b = maximize(&fine, &sampler).unwrap().value;
        assert!((a - b).abs() < 1e-4, "chi={chi}: {a} vs {b}");
    }
}

#[test]
fn counter_rotating_terms_enhance_the_measure() {
    let sampler = Sampler {
        grid: 7,
        random: 16,
        seed: 0,
    };
    let base = maximize(&heom(5.0 * LAMBDA, 0.0, 2), &sampler)
        .unwrap()
        .value;
    let full = maximize(&heom(5.0 * LAMBDA, 1.0, 8), &sampler)
        .unwrap()
        .value;
    assert!(full > base + 1e-6, "{full} vs {base}");
}
