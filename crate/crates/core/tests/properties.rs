use bsmip::echo_path::{desired_signal, make_block_sparse, Cluster, PathSchedule};
use bsmip::filters::{
    bs_gains, ip_gains, sign_vector, AdaptiveFilter, Algorithm, FilterParams, GainVariant,
};
use bsmip::harness::{synthesize, ExperimentConfig, InputKind};
use bsmip::signal::{ratio_db, scale_to_ratio, NoiseModel, SeededStream};
use proptest::prelude::*;

fn experiment(taps: usize, block: usize, iterations: usize, seed: u64) -> ExperimentConfig {
    let path = make_block_sparse(
        taps,
        &[Cluster::new(taps / 4, taps / 4)],
        SeededStream::new(seed, 99),
        true,
        "p",
    )
    .unwrap();
    ExperimentConfig {
        params: FilterParams {
            filter_length: taps,
            block_length: block,
            ..FilterParams::default()
        },
        algorithms: Algorithm::ALL.to_vec(),
        schedule: PathSchedule::fixed(path),
        input: InputKind::Ar1 { pole: 0.8 },
        noise: NoiseModel::default(),
        iterations,
        trials: 1,
        base_seed: seed,
    }
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    (1usize..6, 1usize..5)
        .prop_flat_map(|(blocks, p)| prop::collection::vec(-3.0f64..3.0, blocks * p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gains_are_positive(h in weights(), alpha in -1.0f64..0.999, eps in 1e-6f64..1.0) {
        prop_assert!(ip_gains(&h, alpha, eps).iter().all(|&g| g > 0.0));
        for p in (1..=h.len()).filter(|p| h.len() % p == 0) {
            for v in [GainVariant::AsPrinted, GainVariant::MipConsistent] {
                prop_assert!(bs_gains(&h, p, alpha, eps, v).unwrap().iter().all(|&g| g > 0.0));
            }
        }
    }

    #[test]
    fn block_gains_are_constant_within_blocks(h in weights(), alpha in -1.0f64..0.999) {
        for p in (1..=h.len()).filter(|p| h.len() % p == 0) {
            let g = bs_gains(&h, p, alpha, 0.01, GainVariant::MipConsistent).unwrap();
            for block in g.chunks(p) {
                prop_assert!(block.iter().all(|&v| v == block[0]));
            }
        }
    }

    #[test]
    fn sign_is_scale_invariant(e in prop::collection::vec(-10.0f64..10.0, 1..8), c in 1e-6f64..1e6) {
        let scaled: Vec<f64> = e.iter().map(|v| v * c).collect();
        prop_assert_eq!(sign_vector(&e), sign_vector(&scaled));
    }

    #[test]
    fn desired_signal_is_linear_in_the_path(
        x in prop::collection::vec(-5.0f64..5.0, 6),
        h1 in prop::collection::vec(-1.0f64..1.0, 6),
        h2 in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let sum: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
        let lhs = desired_signal(&x, &sum, 0.0);
        let rhs = desired_signal(&x, &h1, 0.0) + desired_signal(&x, &h2, 0.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn scaled_ratio_is_exact(
        r in prop::collection::vec(0.1f64..5.0, 16),
        n in prop::collection::vec(0.1f64..5.0, 16),
        db in -20.0f64..60.0,
    ) {
        let scaled = scale_to_ratio(&r, &n, db).unwrap();
        prop_assert!((ratio_db(&r, &scaled) - db).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_update_is_bounded_by_the_step_size(seed in any::<u64>(), block in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let cfg = experiment(32, block, 300, seed);
        let s = synthesize(&cfg, 0).unwrap();
        for a in Algorithm::ALL {
            let mut f = AdaptiveFilter::new(a, cfg.params.clone()).unwrap();
            for (&x, &y) in s.input.iter().zip(&s.desired) {
                let before = f.weights().to_vec();
                f.step(x, y);
                let moved: f64 = before.iter().zip(f.weights()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                prop_assert!(moved < cfg.params.step_size);
            }
        }
    }

    #[test]
    fn unit_blocks_reproduce_mip_apsa_bit_for_bit(seed in any::<u64>()) {
        let cfg = experiment(16, 1, 200, seed);
        let s = synthesize(&cfg, 0).unwrap();
        let mut mip = AdaptiveFilter::new(Algorithm::MipApsa, cfg.params.clone()).unwrap();
        let mut bs = AdaptiveFilter::new(Algorithm::BsMipApsa, cfg.params.clone()).unwrap();
        for (&x, &y) in s.input.iter().zip(&s.desired) {
            mip.step(x, y);
            bs.step(x, y);
            prop_assert_eq!(mip.state(), bs.state());
        }
    }
}
