use std::cell::RefCell;

use proptest::prelude::*;
use qaoa_gmvp::optim::{Objective, OptimizerSpec, Termination};

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[test]
fn testbed_functions() {
    let mut obj = Objective::new(vec![(-5.0, 5.0); 2], |x| Ok(sphere(x))).unwrap();
    let r = OptimizerSpec::cobyla().run(&mut obj, &[1.3, -2.2], 0).unwrap();
    assert!(r.best_value < 1e-8, "cobyla sphere {r:?}");

    let rosen = |x: &[f64]| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let mut obj = Objective::new(vec![(-5.0, 5.0); 2], rosen).unwrap();
    let r = OptimizerSpec::powell().run(&mut obj, &[-1.2, 1.0], 0).unwrap();
    assert!(r.best_value < 1e-6 && r.nfev <= 2000, "powell rosenbrock {r:?}");

    let rastrigin = |x: &[f64]| {
        Ok(20.0
            + x.iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>())
    };
    let da = OptimizerSpec::DualAnnealing {
        q_v: 2.62,
        q_a: -5.0,
        t0: 5230.0,
        maxfev: 5000,
        local_polish: true,
    };
    let mut obj = Objective::new(vec![(-5.12, 5.12); 2], rastrigin).unwrap();
    let r = da.run(&mut obj, &[3.0, -4.0], 7).unwrap();
    assert!(r.best_value < 1e-3 && r.nfev <= 5000, "dual annealing rastrigin {r:?}");
}

#[test]
fn constant_objective_for_every_optimizer() {
    for spec in OptimizerSpec::standard_set() {
        let mut obj = Objective::new(vec![(0.0, 1.0); 3], |_| Ok(2.5)).unwrap();
        let r = spec.run(&mut obj, &[0.5; 3], 1).unwrap();
        assert_eq!(r.best_value, 2.5, "{}", spec.name());
        assert!(r.nfev <= spec.maxfev());
    }
}

#[test]
fn runs_are_deterministic_per_seed() {
    let f = |x: &[f64]| Ok((x[0] - 0.3).powi(2) + (3.0 * x[1]).sin() + x[2].cos());
    for spec in OptimizerSpec::standard_set() {
        let run = |seed| {
            let mut obj = Objective::new(vec![(-2.0, 2.0); 3], f).unwrap();
            spec.run(&mut obj, &[1.0, -1.0, 0.5], seed).unwrap()
        };
        assert_eq!(run(3), run(3), "{}", spec.name());
    }
}

#[test]
fn budget_exhaustion_is_reported() {
    let f = |x: &[f64]| Ok(x.iter().map(|v| (5.0 * v).sin()).sum::<f64>());
    for spec in [
        OptimizerSpec::Cobyla {
            rho_beg: 0.5,
            rho_end: 1e-12,
            maxfev: 30,
        },
        OptimizerSpec::Powell {
            xtol: 1e-12,
            ftol: 1e-14,
            maxfev: 30,
        },
        OptimizerSpec::DualAnnealing {
            q_v: 2.62,
            q_a: -5.0,
            t0: 5230.0,
            maxfev: 30,
            local_polish: true,
        },
    ] {
        let mut obj = Objective::new(vec![(-1.0, 1.0); 2], f).unwrap();
        let r = spec.run(&mut obj, &[0.1, 0.2], 0).unwrap();
        assert_eq!(
            (r.nfev, r.termination),
            (30, Termination::BudgetExhausted),
            "{}",
            spec.name()
        );
        assert_eq!(obj.eval_count(), 30);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluations_stay_in_bounds_and_are_counted(
        cx in -3.0..3.0f64, cy in -3.0..3.0f64, x0 in -1.0..1.0f64, y0 in -1.0..1.0f64, which in 0usize..3, seed in 0u64..100
    ) {
        let spec = OptimizerSpec::standard_set()[which].clone();
        let seen = RefCell::new(Vec::new());
        let mut obj = Objective::new(vec![(-1.0, 1.0), (-1.0, 1.0)], |x: &[f64]| {
            seen.borrow_mut().push(x.to_vec());
            Ok((x[0] - cx).powi(2) + (x[1] - cy).powi(2))
        }).unwrap();
        let r = spec.run(&mut obj, &[x0, y0], seed).unwrap();
        let count = obj.eval_count();
        let trace = obj.incumbent_trace().to_vec();
        drop(obj);
        let seen = seen.into_inner();
        prop_assert_eq!(seen.len(), count);
        prop_assert_eq!(r.nfev, count);
        prop_assert!(r.nfev <= spec.maxfev());
        for x in &seen {
            prop_assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)), "{:?}", x);
        }
        // the incumbent value is the recorded value at best_x
        let best = (r.best_x[0] - cx).powi(2) + (r.best_x[1] - cy).powi(2);
        prop_assert_eq!(best, r.best_value);
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*trace.last().unwrap(), r.best_value);
    }
}
