mod common;

use common::{random_cnn, random_input, random_mlp, rng};
use proptest::prelude::*;
use rand::Rng;
use srp_core::analysis::{
    check_theorem1, mean_quantization_error, type_i_report, TheoremInstance, DEFAULT_TOLERANCE,
};
use srp_core::layers::{Dense, LayerParams};
use srp_core::snn::IfLayerState;
use srp_core::{
    classify_case, convert, error_type_i_distribution, error_type_ii_distribution,
    srp_effect_report, verify_theorem1, Error, Layer, NetworkSpec, QcfsActivation, Tensor,
    TheoremClause, UnevennessCase,
};

fn fig1_net() -> NetworkSpec {
    NetworkSpec::new(
        vec![2],
        vec![
            Layer::activated(
                LayerParams::Dense(
                    Dense::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 2]).unwrap(),
                ),
                QcfsActivation::new(6, 1.0).unwrap(),
            ),
            Layer::activated(
                LayerParams::Dense(Dense::new(2, 1, vec![2.0, -1.0], vec![0.0]).unwrap()),
                QcfsActivation::new(6, 1.0).unwrap(),
            ),
            Layer::linear(LayerParams::Dense(
                Dense::new(1, 1, vec![1.0], vec![0.0]).unwrap(),
            )),
        ],
    )
    .unwrap()
}

#[test]
fn fig1_theorem_fixture() {
    let run = verify_theorem1(&TheoremInstance::new(vec![2.0, -1.0], vec![3, 3], 6)).unwrap();
    assert_eq!(run.verdicts.len(), 400);
    assert!(run.all_passed());
    assert!(run.verdicts.iter().all(|v| v.a == 0.5));
    // both presynaptic neurons on the same steps
    let even = run
        .verdicts
        .iter()
        .find(|v| v.placement[0] == 0b010101 && v.placement[1] == 0b010101)
        .unwrap();
    assert_eq!(even.phi, 0.5);
    // uneven placements exist on both sides
    assert!(run.verdicts.iter().any(|v| v.phi > 0.5));
    assert!(run.verdicts.iter().any(|v| v.phi < 0.5));
}

#[test]
fn zero_weights_pass_vacuously() {
    let run = verify_theorem1(&TheoremInstance::new(vec![0.0, 0.0], vec![2, 4], 6)).unwrap();
    assert_eq!(run.verdicts.len(), 15 * 15);
    for v in &run.verdicts {
        assert_eq!((v.a, v.phi, v.v_final), (0.0, 0.0, 0.5));
        assert_eq!(v.clause, TheoremClause::ZeroActivation);
        assert!(v.passed);
    }
}

#[test]
fn srp_example_is_a_necessity_instance() {
    let run = verify_theorem1(&TheoremInstance::new(vec![0.6, -0.6], vec![1, 1], 2)).unwrap();
    let v = run
        .verdicts
        .iter()
        .find(|v| v.placement[0] == 0b01 && v.placement[1] == 0b10)
        .unwrap();
    assert_eq!(v.a, 0.0);
    assert_eq!(v.phi, 0.5);
    assert!((v.v_final + 0.5).abs() < 1e-12);
    assert_eq!(v.clause, TheoremClause::ZeroActivation);
    assert!(v.passed);
}

#[test]
fn theorem_holds_for_random_weights() {
    let mut r = rng(2024);
    let mut checked = 0usize;
    for draw in 0..150 {
        let n = 1 + draw % 3;
        let t = [2, 4, 6][draw % 3];
        let weights: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let counts: Vec<usize> = (0..n).map(|_| r.random_range(0..=t)).collect();
        let mut inst = TheoremInstance::new(weights, counts, t);
        inst.threshold = r.random_range(0.5..2.0);
        inst.presynaptic_threshold = r.random_range(0.5..2.0);
        let run = verify_theorem1(&inst).unwrap();
        assert_eq!(run.verdicts.len() as u64, inst.placement_count());
        assert_eq!(run.failures().count(), 0, "{inst:?}");
        checked += run.verdicts.len();
    }
    assert!(checked > 1000);
}

#[test]
fn tampered_dynamics_are_caught() {
    // Without reset-by-subtraction the residual potential no longer carries the
    // over-firing signal; the clause checker must notice.
    let inst = TheoremInstance::new(vec![2.0, -1.0], vec![3, 3], 6);
    let a = inst.activation();
    let mut failures = 0;
    for pa in srp_core::analysis::placements(6, 3) {
        for pb in srp_core::analysis::placements(6, 3) {
            let mut v: f64 = 0.5;
            let mut count = 0;
            for t in 0..6 {
                v += 2.0 * f64::from(pa >> t & 1) - f64::from(pb >> t & 1);
                if v >= 1.0 {
                    count += 1;
                    v = 0.0; // reset to zero
                }
            }
            let (_, ok) = check_theorem1(a, count as f64 / 6.0, v, DEFAULT_TOLERANCE);
            failures += usize::from(!ok);
        }
    }
    assert!(failures > 0);
}

#[test]
fn type_i_first_layer_exact_at_t_equals_l() {
    let mut r = rng(8);
    for _ in 0..50 {
        let net = random_mlp(&mut r, 3, Some(4));
        let snn = convert(&net).unwrap();
        let x = random_input(&mut r, &net);
        let report = error_type_i_distribution(&net, &snn, &x, 4).unwrap();
        let first = &report.layers[0];
        assert_eq!(first.counts[UnevennessCase::NoError.index()], first.neurons);
    }
}

#[test]
fn zero_input_all_no_error() {
    let net = fig1_net();
    let snn = convert(&net).unwrap();
    let x = Tensor::zeros(vec![2]);
    for report in [
        error_type_i_distribution(&net, &snn, &x, 6).unwrap(),
        error_type_ii_distribution(&net, &snn, &x, 6).unwrap(),
    ] {
        for layer in &report.layers {
            assert_eq!(layer.fraction(UnevennessCase::NoError), 1.0);
        }
    }
}

#[test]
fn fig1_adversarial_timing_shows_case2() {
    let net = fig1_net();
    let snn = convert(&net).unwrap();
    let x = Tensor::from_vec(vec![0.5, 0.5]);
    // Inject the front-loaded arrival pattern (+2 spikes first, -1 spikes last)
    // into the postsynaptic layer of an otherwise genuine simulation.
    let mut sim = snn.simulate(&x, 6).unwrap();
    assert_eq!(sim.phi[0].data(), &[0.5, 0.5]);
    let mut post = IfLayerState::new(1, 1.0, 0.5);
    for c in [2.0, 2.0, 2.0, -1.0, -1.0, -1.0] {
        post.step(&[c]);
    }
    sim.phi[1] = Tensor::from_vec(post.phi(6));
    sim.potentials[1] = Tensor::from_vec(post.potential.clone());
    let report = type_i_report(&net, &x, &sim).unwrap();
    let layer = &report.layers[1];
    assert_eq!(layer.counts[UnevennessCase::Case2.index()], 1);
    assert!((layer.max_abs_error - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn type_i_and_ii_agree_on_first_layer() {
    let mut r = rng(21);
    for i in 0..40 {
        let net = if i % 2 == 0 {
            random_cnn(&mut r, 4)
        } else {
            random_mlp(&mut r, 4, None)
        };
        let snn = convert(&net).unwrap();
        let x = random_input(&mut r, &net);
        let t = r.random_range(1..9);
        let one = error_type_i_distribution(&net, &snn, &x, t).unwrap();
        let two = error_type_ii_distribution(&net, &snn, &x, t).unwrap();
        assert_eq!(one.layers[0], two.layers[0]);
        for report in [&one, &two] {
            for layer in &report.layers {
                assert!((layer.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pairing_is_checked() {
    let mut r = rng(1);
    let a = random_mlp(&mut r, 3, Some(4));
    let b = random_mlp(&mut r, 3, Some(4));
    let snn_b = convert(&b).unwrap();
    let x = random_input(&mut r, &a);
    assert!(matches!(
        error_type_i_distribution(&a, &snn_b, &x, 4),
        Err(Error::Pairing(_))
    ));
    assert!(matches!(
        srp_effect_report(&a, &snn_b, &[x], 4, 4),
        Err(Error::Pairing(_))
    ));
}

#[test]
fn srp_effect_single_neuron_fixture() {
    let net = NetworkSpec::new(
        vec![2],
        vec![
            Layer::activated(
                LayerParams::Dense(
                    Dense::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 2]).unwrap(),
                ),
                QcfsActivation::new(2, 1.0).unwrap(),
            ),
            Layer::activated(
                LayerParams::Dense(Dense::new(2, 1, vec![0.6, -0.6], vec![0.0]).unwrap()),
                QcfsActivation::new(2, 1.0).unwrap(),
            ),
            Layer::linear(LayerParams::Dense(
                Dense::new(1, 1, vec![1.0], vec![0.0]).unwrap(),
            )),
        ],
    )
    .unwrap();
    let snn = convert(&net).unwrap();
    let effect = srp_effect_report(&net, &snn, &[Tensor::from_vec(vec![0.5, 0.25])], 2, 2).unwrap();
    assert_eq!(
        effect.before.layers[1].counts[UnevennessCase::Case1.index()],
        1
    );
    assert_eq!(
        effect.after.layers[1].counts[UnevennessCase::NoError.index()],
        1
    );
    assert_eq!(effect.deltas()[1][UnevennessCase::Case1.index()], -1.0);
}

#[test]
fn srp_effect_identity_when_masks_open() {
    let net = NetworkSpec::new(
        vec![2],
        vec![
            Layer::activated(
                LayerParams::Dense(
                    Dense::new(2, 2, vec![0.3, 0.2, 0.1, 0.9], vec![0.0; 2]).unwrap(),
                ),
                QcfsActivation::new(4, 1.0).unwrap(),
            ),
            Layer::linear(LayerParams::Dense(
                Dense::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 2]).unwrap(),
            )),
        ],
    )
    .unwrap();
    let snn = convert(&net).unwrap();
    let effect = srp_effect_report(&net, &snn, &[Tensor::from_vec(vec![0.4, 0.8])], 4, 4).unwrap();
    assert_eq!(effect.before, effect.after);
}

#[test]
fn quantization_error_has_zero_mean() {
    for t in [2usize, 4, 8] {
        let m = mean_quantization_error(1.0, t as u32, t, 100_000).unwrap();
        assert!(m.abs() < 1e-4, "T={t}: {m}");
    }
}

proptest! {
    #[test]
    fn cases_partition(k in 0u32..=8, j in 0u32..=8, lambda in 0.1f64..3.0) {
        let a = lambda * k as f64 / 8.0;
        let phi = lambda * j as f64 / 8.0;
        let case = classify_case(a, phi, lambda, DEFAULT_TOLERANCE).unwrap();
        let matches = [
            j == k,
            k == 0 && j > k,
            0 < k && k < 8 && j > k,
            0 < k && k < 8 && j < k,
            k == 8 && j < k,
        ];
        prop_assert_eq!(matches.iter().filter(|&&m| m).count(), 1);
        prop_assert!(matches[case.index()]);
    }
}
