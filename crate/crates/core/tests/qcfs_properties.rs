use proptest::prelude::*;
use srp_core::layers::{avgpool2d_forward, AvgPool2d};
use srp_core::qcfs::qcfs;
use srp_core::train::qcfs_backward;
use srp_core::Tensor;

/// Expected-value surrogate of QCFS with the floor removed.
fn surrogate(y: f64, lambda: f64) -> f64 {
    lambda * (y / lambda).clamp(0.0, 1.0)
}

proptest! {
    #[test]
    fn output_on_quantization_grid(y in -10.0f64..10.0, lambda in 0.01f64..5.0, steps in 1u32..32) {
        let a = qcfs(y, lambda, steps).unwrap();
        let k = (0..=steps).find(|&k| (lambda * k as f64 / steps as f64 - a).abs() <= 1e-12 * lambda);
        prop_assert!(k.is_some(), "qcfs({y}) = {a} is not a grid level");
        prop_assert!(a <= lambda && a >= 0.0);
    }

    #[test]
    fn monotone(y1 in -10.0f64..10.0, dy in 0.0f64..5.0, lambda in 0.01f64..5.0, steps in 1u32..32) {
        prop_assert!(qcfs(y1, lambda, steps).unwrap() <= qcfs(y1 + dy, lambda, steps).unwrap());
    }

    #[test]
    fn straight_through_matches_surrogate_slope(r in 0.0f64..1.0, lambda in 0.1f64..4.0, steps in 1u32..16) {
        let y = r * lambda;
        let h = 1e-6 * lambda;
        prop_assume!(y > 2.0 * h && y < lambda - 2.0 * h);
        let fd = (surrogate(y + h, lambda) - surrogate(y - h, lambda)) / (2.0 * h);
        let (gy, _) = qcfs_backward(y, lambda, steps, 1.0).unwrap();
        prop_assert!((gy - fd).abs() < 1e-4);
    }

    #[test]
    fn straight_through_zero_outside(y in 0.0f64..10.0, lambda in 0.1f64..4.0, steps in 1u32..16) {
        let h = 1e-6 * lambda;
        for y in [-y - 2.0 * h, lambda + y + 2.0 * h] {
            let fd = (surrogate(y + h, lambda) - surrogate(y - h, lambda)) / (2.0 * h);
            let (gy, _) = qcfs_backward(y, lambda, steps, 1.0).unwrap();
            prop_assert!((gy - fd).abs() < 1e-4);
        }
    }

    #[test]
    fn pooling_is_linear(
        xs in prop::collection::vec(-3.0f64..3.0, 32),
        zs in prop::collection::vec(-3.0f64..3.0, 32),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let pool = AvgPool2d { kernel_size: 2, stride: 2 };
        let x = Tensor::new(vec![2, 4, 4], xs.clone()).unwrap();
        let z = Tensor::new(vec![2, 4, 4], zs.clone()).unwrap();
        let mix: Vec<f64> = xs.iter().zip(&zs).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = avgpool2d_forward(&pool, &Tensor::new(vec![2, 4, 4], mix).unwrap()).unwrap();
        let px = avgpool2d_forward(&pool, &x).unwrap();
        let pz = avgpool2d_forward(&pool, &z).unwrap();
        for i in 0..lhs.len() {
            let rhs = alpha * px.data()[i] + beta * pz.data()[i];
            prop_assert!((lhs.data()[i] - rhs).abs() < 1e-12);
        }
    }
}
