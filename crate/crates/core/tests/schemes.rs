mod common;

use common::*;
use proptest::prelude::*;
use wittflow::models::{HestonParams, ModelKind};
use wittflow::ode::rk4_flow;
use wittflow::pricing::{price, RunConfig};
use wittflow::sampling::SourceKind;
use wittflow::schemes::{
    em_step, nn_step, nv_step, simulate_path, Backend, Bernoulli, Scheme, SchemeConfig, StepDraws,
};

fn rk_config(scheme: Scheme, substeps: usize) -> SchemeConfig {
    SchemeConfig {
        rk_substeps: substeps,
        ..SchemeConfig::new(scheme, Backend::RungeKutta)
    }
}

fn random_draws(rng: &mut common::Rng) -> StepDraws {
    let normals = [rng.normal(), rng.normal(), rng.normal(), rng.normal()];
    let sign = if rng.uniform() < 0.5 {
        Bernoulli::Plus
    } else {
        Bernoulli::Minus
    };
    StepDraws::new(normals, sign)
}

#[test]
fn nv_analytic_step_matches_rk_on_random_inputs() {
    let spec = benchmark_sabr();
    let an = SchemeConfig::new(Scheme::Nv, Backend::Analytic);
    let rk = rk_config(Scheme::Nv, 64);
    let mut rng = common::Rng::new(31);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = [rng.range(0.5, 1.5), rng.range(0.1, 0.5)];
        let d = random_draws(&mut rng);
        let a = nv_step(&spec, 1.0 / 16.0, x, &d, &an).unwrap();
        let b = nv_step(&spec, 1.0 / 16.0, x, &d, &rk).unwrap();
        worst = worst.max(max_abs_diff(a, b));
    }
    assert!(worst < 1e-5, "worst {worst:e}");
}

#[test]
fn heston_steps_match_rk() {
    let spec = sample_heston();
    let mut rng = common::Rng::new(32);
    for scheme in [Scheme::Nv, Scheme::Nn] {
        let an = SchemeConfig::new(scheme, Backend::Analytic);
        let rk = rk_config(scheme, 256);
        for _ in 0..100 {
            let x = [rng.range(0.8, 1.2), rng.range(0.03, 0.06)];
            let d = random_draws(&mut rng);
            let step = |c: &SchemeConfig| match scheme {
                Scheme::Nv => nv_step(&spec, 1.0 / 64.0, x, &d, c).unwrap(),
                _ => nn_step(&spec, 1.0 / 64.0, x, &d, c).unwrap(),
            };
            let (a, b) = (step(&an), step(&rk));
            assert!(max_abs_diff(a, b) < 1e-6, "{scheme}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn zero_noise_nv_step_is_the_drift_flow() {
    let spec = benchmark_sabr();
    let cfg = SchemeConfig {
        nv_term_cap: Some(6),
        series_order: 8,
        ..SchemeConfig::new(Scheme::Nv, Backend::Analytic)
    };
    let x = [1.1, 0.35];
    let t = 0.2;
    for sign in [Bernoulli::Plus, Bernoulli::Minus] {
        let got = nv_step(&spec, t, x, &StepDraws::new([0.0; 4], sign), &cfg).unwrap();
        let want = rk4_flow(&|y| spec.raw_field(0, y), t, 2000, x).unwrap();
        assert!(max_abs_diff(got, want) < 1e-9, "{got:?} vs {want:?}");
    }
}

#[test]
fn em_step_at_zero_noise_is_an_euler_drift_step() {
    let spec = sample_heston();
    let x = [1.0, 0.09];
    let got = em_step(&spec, 0.1, x, &StepDraws::default());
    let b = spec.ito_drift(x);
    assert_eq!(got, [x[0] + 0.1 * b[0], x[1] + 0.1 * b[1]]);
}

#[test]
fn path_rejects_wrong_draw_count() {
    let spec = benchmark_sabr();
    let cfg = SchemeConfig::default();
    assert!(simulate_path(&spec, &cfg, 4, 1.0, [1.0, 0.3], &[StepDraws::default(); 3]).is_err());
    assert!(simulate_path(&spec, &cfg, 0, 1.0, [1.0, 0.3], &[]).is_err());
}

fn small_run(scheme: Scheme, threads: usize) -> RunConfig {
    RunConfig {
        scheme: SchemeConfig::new(scheme, Backend::Analytic),
        n_steps: 8,
        samples: 20_000,
        threads: Some(threads),
        ..RunConfig::default()
    }
}

#[test]
fn zero_strike_prices_the_forward() {
    // X_1 is a martingale, so a zero-strike call is worth X_1(0) = 1.
    for scheme in [Scheme::Em, Scheme::Nv, Scheme::Nn] {
        let cfg = RunConfig {
            strike: 0.0,
            ..small_run(scheme, 2)
        };
        let r = price(&cfg).unwrap();
        assert!((r.estimate - 1.0).abs() < 5e-3, "{scheme}: {}", r.estimate);
    }
}

#[test]
fn price_is_independent_of_thread_count() {
    for scheme in [Scheme::Em, Scheme::Nv, Scheme::Nn] {
        let a = price(&small_run(scheme, 1)).unwrap();
        let b = price(&small_run(scheme, 3)).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits(), "{scheme}");
        assert_eq!((a.threads, b.threads), (1, 3));
    }
}

#[test]
fn prng_runs_are_reproducible_and_report_an_error_bar() {
    let cfg = RunConfig {
        source: SourceKind::Prng { seed: 5 },
        ..small_run(Scheme::Nn, 2)
    };
    let a = price(&cfg).unwrap();
    let b = price(&cfg).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    let se = a.standard_error.expect("prng runs carry a standard error");
    assert!(se > 0.0 && se < 2e-3);
    let sobol = price(&small_run(Scheme::Nn, 2)).unwrap();
    assert!(sobol.standard_error.is_none());
    assert!((sobol.estimate - a.estimate).abs() < 5.0 * se);
}

#[test]
fn heston_prices_agree_across_schemes_and_backends() {
    let model = ModelKind::Heston(HestonParams::new(0.0, 2.0, 0.09, 0.2, -0.7).unwrap());
    let run = |scheme, backend| {
        let cfg = RunConfig {
            model,
            x0: [1.0, 0.09],
            strike: 1.0,
            scheme: SchemeConfig::new(scheme, backend),
            n_steps: 16,
            samples: 4096,
            threads: Some(2),
            ..RunConfig::default()
        };
        price(&cfg).unwrap().estimate
    };
    let nv = run(Scheme::Nv, Backend::Analytic);
    let nn = run(Scheme::Nn, Backend::Analytic);
    let nv_rk = run(Scheme::Nv, Backend::RungeKutta);
    // Black-Scholes at sigma = 0.3 gives about 0.119.
    assert!(nv > 0.10 && nv < 0.13, "{nv}");
    assert!((nv - nn).abs() < 3e-3, "{nv} vs {nn}");
    assert!((nv - nv_rk).abs() < 1e-4, "{nv} vs {nv_rk}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_are_deterministic_and_small_for_small_t(
        x1 in 0.5f64..1.5,
        x2 in 0.1f64..0.5,
        z in prop::array::uniform4(-3.0f64..3.0),
        plus in any::<bool>(),
        scheme in prop_oneof![Just(Scheme::Nv), Just(Scheme::Nn)],
    ) {
        let spec = benchmark_sabr();
        let cfg = SchemeConfig::new(scheme, Backend::Analytic);
        let d = StepDraws::new(z, if plus { Bernoulli::Plus } else { Bernoulli::Minus });
        let x = [x1, x2];
        let run = |t| match scheme {
            Scheme::Nv => nv_step(&spec, t, x, &d, &cfg).unwrap(),
            _ => nn_step(&spec, t, x, &d, &cfg).unwrap(),
        };
        prop_assert_eq!(run(1e-2), run(1e-2));
        // The increment scales like sqrt(t).
        let small = max_abs_diff(run(1e-6), x);
        prop_assert!(small < 5e-3 * (1.0 + z.iter().map(|v| v.abs()).sum::<f64>()), "{}", small);
    }

    #[test]
    fn nv_sign_only_matters_through_the_bracket(
        x1 in 0.5f64..1.5,
        x2 in 0.1f64..0.5,
        z1 in -3.0f64..3.0,
        z2 in -3.0f64..3.0,
    ) {
        let spec = benchmark_sabr();
        let cfg = SchemeConfig::new(Scheme::Nv, Backend::Analytic);
        let t = 1e-3;
        let step = |b| nv_step(&spec, t, [x1, x2], &StepDraws::new([z1, z2, 0.0, 0.0], b), &cfg).unwrap();
        // Swapping the order of two flows moves the state by O(t |z1 z2|).
        let gap = max_abs_diff(step(Bernoulli::Plus), step(Bernoulli::Minus));
        prop_assert!(gap <= 5.0 * t * (z1 * z2).abs() + 1e-12, "{}", gap);
        if z2 == 0.0 {
            prop_assert_eq!(gap, 0.0);
        }
    }
}
