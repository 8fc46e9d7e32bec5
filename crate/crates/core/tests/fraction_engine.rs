use approx::assert_abs_diff_eq;
use fqf_core::fraction::{
    entropy, fractions_from_logits, grid_search_oracle, logit_gradient, optimize_fractions, softmax, FractionProposer,
    OptimizerState, StepSchedule, TRACE_EVERY,
};
use fqf_core::quantile::{w1_of_fractions, FractionSet, QuantileFunction, W1Options};
use fqf_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decaying(step_size: f64, steps: usize) -> OptimizerState {
    OptimizerState::rmsprop(step_size).unwrap().with_schedule(StepSchedule::LinearDecay { horizon: steps as u64 })
}

fn smooth_suite() -> Vec<QuantileFunction> {
    vec![
        QuantileFunction::uniform(0.0, 1.0).unwrap(),
        QuantileFunction::uniform(-2.0, 5.0).unwrap(),
        QuantileFunction::gaussian(0.0, 1.0).unwrap(),
        QuantileFunction::exponential(1.0).unwrap(),
        QuantileFunction::truncated_gaussian(0.0, 1.0, -2.0, 2.0).unwrap(),
    ]
}

#[test]
fn fractions_from_logits_examples() {
    let f = fractions_from_logits(&[0.0; 4]).unwrap();
    assert_eq!(f.interior(), &[0.25, 0.5, 0.75]);
    let f = fractions_from_logits(&[0.0, 3.0f64.ln()]).unwrap();
    assert_abs_diff_eq!(f.interior()[0], 0.25, epsilon = 1e-15);
    for c in [-7.5, 0.0, 3.25, 40.0] {
        let f = fractions_from_logits(&[c; 32]).unwrap();
        for (i, t) in f.bounds().iter().enumerate() {
            assert_abs_diff_eq!(*t, i as f64 / 32.0, epsilon = 1e-12);
        }
    }
    assert!(matches!(fractions_from_logits(&[0.0, f64::NAN]), Err(Error::NonFiniteLogits)));
    assert!(matches!(fractions_from_logits(&[f64::INFINITY, 0.0]), Err(Error::NonFiniteLogits)));
}

#[test]
#[allow(clippy::approx_constant)] // the tabulated ln 2
fn entropy_examples() {
    assert_abs_diff_eq!(entropy(&[0.0; 32]).unwrap(), 32f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(entropy(&[1.2; 32]).unwrap(), 3.46574, epsilon = 1e-5);
    assert!(entropy(&[0.0, -50.0]).unwrap().abs() < 1e-8);
    assert_abs_diff_eq!(entropy(&[0.0, 0.0]).unwrap(), 0.693147, epsilon = 1e-6);
}

#[test]
fn logit_gradient_examples() {
    assert_eq!(logit_gradient(&[0.3, -1.0, 2.0], &[0.0, 0.0], 0.0).unwrap(), vec![0.0; 3]);
    let g = logit_gradient(&[0.0, 0.0], &[1.0], 0.0).unwrap();
    assert_abs_diff_eq!(g[0], 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(g[1], -0.25, epsilon = 1e-15);
    assert!(matches!(logit_gradient(&[0.0; 3], &[1.0], 0.0), Err(Error::LengthMismatch { .. })));
}

/// Independent objective: sum_i g_i tau_i - lambda H, with tau from a plain
/// softmax that does not share code with the crate.
fn objective(logits: &[f64], g: &[f64], lambda: f64) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = e.iter().sum();
    let q: Vec<f64> = e.iter().map(|x| x / z).collect();
    let mut tau = 0.0;
    let mut linear = 0.0;
    for (qi, gi) in q.iter().zip(g) {
        tau += qi;
        linear += gi * tau;
    }
    let h: f64 = -q.iter().map(|p| p * p.ln()).sum::<f64>();
    linear - lambda * h
}

#[test]
fn grid_oracle_examples() {
    let u = QuantileFunction::uniform(0.0, 1.0).unwrap();
    let (f, w) = grid_search_oracle(&u, 2, 1e-3).unwrap();
    assert_abs_diff_eq!(f.interior()[0], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(w, 0.125, epsilon = 1e-9);

    let (f, w) = grid_search_oracle(&u, 3, 1e-3).unwrap();
    assert!((f.interior()[0] - 1.0 / 3.0).abs() <= 1e-3 && (f.interior()[1] - 2.0 / 3.0).abs() <= 1e-3);
    assert!((w - 1.0 / 12.0).abs() < 1e-6);

    let g = QuantileFunction::gaussian(0.0, 1.0).unwrap();
    let (f, _) = grid_search_oracle(&g, 2, 1e-3).unwrap();
    assert_abs_diff_eq!(f.interior()[0], 0.5, epsilon = 1e-12);

    assert!(grid_search_oracle(&u, 4, 1e-3).is_err());
    assert!(grid_search_oracle(&u, 2, 0.1).is_err());
}

#[test]
fn uniform_converges_to_equal_spacing_from_random_starts() {
    let u = QuantileFunction::uniform(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let logits: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let run = optimize_fractions(
            &u,
            FractionProposer::new(logits.clone(), 0.0).unwrap(),
            5000,
            &mut decaying(0.05, 5000),
        )
        .unwrap();
        for (i, t) in run.fractions.bounds().iter().enumerate() {
            assert!((t - i as f64 / 4.0).abs() < 1e-3, "start {logits:?}: {:?}", run.fractions.bounds());
        }
    }
}

#[test]
fn exponential_reaches_grid_optimum() {
    let e = QuantileFunction::exponential(1.0).unwrap();
    let (_, best) = grid_search_oracle(&e, 3, 1e-3).unwrap();
    let run =
        optimize_fractions(&e, FractionProposer::uniform(3, 0.0).unwrap(), 5000, &mut decaying(0.05, 5000)).unwrap();
    assert!(run.final_w1() <= best * 1.02, "{} vs oracle {best}", run.final_w1());
}

#[test]
fn stationary_start_stays_put() {
    let u = QuantileFunction::uniform(0.0, 1.0).unwrap();
    let run = optimize_fractions(
        &u,
        FractionProposer::uniform(5, 0.0).unwrap(),
        500,
        &mut OptimizerState::rmsprop(0.05).unwrap(),
    )
    .unwrap();
    for (i, t) in run.fractions.bounds().iter().enumerate() {
        assert!((t - i as f64 / 5.0).abs() < 1e-6);
    }
    assert!(run.trace.windows(2).all(|w| w[1].w1 <= w[0].w1 + 1e-12));
}

#[test]
fn trace_is_sampled_every_few_steps() {
    let e = QuantileFunction::exponential(1.0).unwrap();
    let run = optimize_fractions(
        &e,
        FractionProposer::uniform(4, 0.0).unwrap(),
        25,
        &mut OptimizerState::rmsprop(0.01).unwrap(),
    )
    .unwrap();
    let steps: Vec<usize> = run.trace.iter().map(|p| p.step).collect();
    assert_eq!(steps, vec![0, TRACE_EVERY, 2 * TRACE_EVERY, 25]);
}

#[test]
fn optimizer_rejects_bad_input_and_reports_divergence() {
    let u = QuantileFunction::uniform(0.0, 1.0).unwrap();
    let mut opt = OptimizerState::rmsprop(0.05).unwrap();
    assert!(optimize_fractions(&u, FractionProposer::uniform(1, 0.0).unwrap(), 10, &mut opt).is_err());
    assert!(optimize_fractions(&u, FractionProposer::uniform(3, 0.0).unwrap(), 0, &mut opt).is_err());
    let e = QuantileFunction::exponential(1.0).unwrap();
    let err = optimize_fractions(
        &e,
        FractionProposer::uniform(4, 0.0).unwrap(),
        200,
        &mut OptimizerState::rmsprop(1000.0).unwrap(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Diverged { .. }), "{err:?}");
}

#[test]
fn w1_trace_does_not_increase() {
    for qf in smooth_suite() {
        for n in [2usize, 4, 8] {
            for step_size in [0.01, 0.05] {
                let run = optimize_fractions(
                    &qf,
                    FractionProposer::uniform(n, 0.0).unwrap(),
                    1000,
                    &mut decaying(step_size, 1000),
                )
                .unwrap();
                for w in run.trace.windows(2) {
                    assert!(w[1].w1 <= w[0].w1 + 1e-6, "{qf:?} N={n} lr={step_size}: {:?} -> {:?}", w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn ordering_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=64);
        let scale = [0.1, 1.0, 10.0, 30.0][rng.random_range(0..4)];
        let logits: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let f = fractions_from_logits(&logits).unwrap();
        assert!(f.bounds().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(f.bounds()[0], 0.0);
        assert_eq!(*f.bounds().last().unwrap(), 1.0);
    }
}

#[test]
fn optimized_fractions_beat_equal_spacing_on_exponential() {
    let e = QuantileFunction::exponential(1.0).unwrap();
    let even = w1_of_fractions(&e, &FractionSet::equally_spaced(4).unwrap(), W1Options::default()).unwrap();
    let run =
        optimize_fractions(&e, FractionProposer::uniform(4, 0.0).unwrap(), 3000, &mut decaying(0.05, 3000)).unwrap();
    assert!(run.final_w1() < even - 1e-4);
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-40.0..40.0f64, 1..64)) {
        let q = softmax(&logits).unwrap();
        prop_assert!(q.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let h = entropy(&logits).unwrap();
        prop_assert!(h >= -1e-12 && h <= (logits.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn shift_invariance(logits in prop::collection::vec(-10.0..10.0f64, 1..64), c in -20.0..20.0f64) {
        let base = fractions_from_logits(&logits).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|l| l + c).collect();
        let moved = fractions_from_logits(&shifted).unwrap();
        for (a, b) in base.bounds().iter().zip(moved.bounds()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn logit_gradient_matches_finite_difference(
        (logits, g) in (2usize..12).prop_flat_map(|n| (
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n - 1),
        )),
        lambda in prop::sample::select(vec![0.0, 0.01, 0.5]),
    ) {
        let analytic = logit_gradient(&logits, &g, lambda).unwrap();
        let h = 1e-6;
        for k in 0..logits.len() {
            let mut up = logits.clone();
            let mut down = logits.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (objective(&up, &g, lambda) - objective(&down, &g, lambda)) / (2.0 * h);
            let rel = (analytic[k] - fd).abs() / analytic[k].abs().max(fd.abs()).max(1e-6);
            prop_assert!(rel < 1e-5, "logit {k}: {} vs {fd}", analytic[k]);
        }
    }

    #[test]
    fn proposer_and_free_functions_agree(logits in prop::collection::vec(-5.0..5.0f64, 2..10), lambda in 0.0..1.0f64) {
        let p = FractionProposer::new(logits.clone(), lambda).unwrap();
        let g = vec![0.5; logits.len() - 1];
        prop_assert_eq!(p.fractions().unwrap(), fractions_from_logits(&logits).unwrap());
        prop_assert_eq!(p.logit_gradient(&g).unwrap(), logit_gradient(&logits, &g, lambda).unwrap());
    }
}
