use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semplan::planner::{sample_bucket, sample_control, SamplingMode};

const DRAWS: usize = 100_000;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_bucket_keeps_a_floor(k in 1usize..12, kmin_len in 1usize..12, p in 0.55f64..0.99, seed in any::<u64>()) {
        let kmin_len = kmin_len.min(k);
        let kmin: Vec<usize> = (0..kmin_len).collect();
        let rest: Vec<usize> = (kmin_len..k).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; k];
        for _ in 0..DRAWS {
            counts[sample_bucket(&kmin, &rest, p, SamplingMode::Biased, &mut rng)] += 1;
        }
        let floor = (1.0 - p) / (2.0 * k as f64);
        for (b, &c) in counts.iter().enumerate() {
            prop_assert!(c as f64 / DRAWS as f64 >= floor, "bucket {b}: {c}");
        }
    }

    #[test]
    fn every_control_keeps_a_floor(n in 1usize..60, star in proptest::option::of(0usize..60), p in 0.55f64..0.99, seed in any::<u64>()) {
        let star = star.map(|s| s % n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; n];
        for _ in 0..DRAWS {
            counts[sample_control(n, star, p, &mut rng).0] += 1;
        }
        let floor = (1.0 - p) / (2.0 * n as f64);
        for (u, &c) in counts.iter().enumerate() {
            prop_assert!(c as f64 / DRAWS as f64 >= floor, "control {u}: {c}");
        }
    }
}

#[test]
fn uniform_mode_ignores_kmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 4];
    for _ in 0..DRAWS {
        counts[sample_bucket(&[0], &[1, 2, 3], 0.9, SamplingMode::Uniform, &mut rng)] += 1;
    }
    for c in counts {
        assert!((c as f64 / DRAWS as f64 - 0.25).abs() < 0.01);
    }
}
