use proptest::prelude::*;

use noma_link::analytic::*;
use noma_link::{MobilityProfile, SystemConfig};

fn system() -> impl Strategy<Value = SystemConfig> {
    (
        prop::sample::select(vec![1u32, 2, 3, 8, 32, 128]),
        0.01f64..0.99,
        -10.0f64..40.0,
        -2.0f64..2.0,
        -5.0f64..-1.0,
        0.0f64..300.0,
        0.0f64..300.0,
    )
        .prop_map(|(n, a1, snr_db, log_g, log_tp, f1, f2)| {
            let m1 = MobilityProfile::from_doppler(f1).unwrap();
            let m2 = MobilityProfile::from_doppler(f2).unwrap();
            SystemConfig::new(n, a1, 10f64.powf(snr_db / 10.0), 10f64.powf(log_g), 10f64.powf(log_tp), m1, m2)
                .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cdfs_are_distribution_functions(c in system(), ratio in 1.0f64..10.0) {
        let g = c.gamma_th();
        for stage in [Stage::Stage1, Stage::Stage2] {
            let lo = cdf(stage, &c, g).unwrap();
            let hi = cdf(stage, &c, g * ratio).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            prop_assert!(hi >= lo - 1e-14, "{stage:?}: F({}) = {hi} < F({g}) = {lo}", g * ratio);
            prop_assert!(lcr(stage, &c, g).unwrap() >= 0.0);
        }
    }

    #[test]
    fn outage_falls_with_snr(c in system(), gain in 1.0f64..100.0) {
        let louder = c.with_snr_linear(c.snr_linear() * gain).unwrap();
        let g = c.gamma_th();
        prop_assert!(cdf_gamma1(&louder, g).unwrap() <= cdf_gamma1(&c, g).unwrap() + 1e-14);
        prop_assert!(cdf_gamma2(&louder, g).unwrap() <= cdf_gamma2(&c, g).unwrap() + 1e-14);
    }

    #[test]
    fn per_lies_between_outage_and_one(c in system()) {
        for p in [per_stage1(&c), per_stage2_conditional(&c)] {
            prop_assert!((0.0..=1.0).contains(&p.total));
            prop_assert!(p.total >= p.outage_term - 1e-15);
            prop_assert!(p.lcr_penalty >= 0.0);
        }
    }

    #[test]
    fn longer_packets_fail_more(c in system(), stretch in 1.0f64..20.0) {
        let longer = c.with_t_packet_s(c.t_packet_s() * stretch).unwrap();
        prop_assert!(per_stage1(&longer).total >= per_stage1(&c).total - 1e-15);
        prop_assert!(per_stage2_conditional(&longer).total >= per_stage2_conditional(&c).total - 1e-15);
    }

    #[test]
    fn first_order_expansion_is_conservative(c in system()) {
        let b = per_stage2_bound(&c);
        prop_assume!(!b.stage1.degenerate && !b.stage2_conditional.degenerate);
        let a1 = per_stage1_asymptotic(&c);
        let a2 = per_stage2_asymptotic(&c);
        prop_assert!(a1 >= b.stage1.total * (1.0 - 1e-12));
        prop_assert!(a2 >= b.raw * (1.0 - 1e-12));
    }

    #[test]
    fn bound_is_the_clamped_sum(c in system()) {
        let b = per_stage2_bound(&c);
        prop_assert_eq!(b.raw, b.stage1.total + b.stage2_conditional.total);
        prop_assert_eq!(b.clamped, b.raw.min(1.0));
        prop_assert_eq!(b.stage1, per_stage1(&c));
        prop_assert_eq!(b.stage2_conditional, per_stage2_conditional(&c));
    }

    #[test]
    fn static_channels_reduce_to_outage(c in system()) {
        let still = c.with_mobility(MobilityProfile::stationary(), MobilityProfile::stationary()).unwrap();
        let p1 = per_stage1(&still);
        let p2 = per_stage2_conditional(&still);
        prop_assert_eq!(p1.lcr_penalty, 0.0);
        prop_assert!((p1.total - cdf_gamma1(&still, still.gamma_th()).unwrap()).abs() < 1e-15);
        prop_assert!((p2.total - cdf_gamma2(&still, still.gamma_th()).unwrap()).abs() < 1e-15);
    }
}
