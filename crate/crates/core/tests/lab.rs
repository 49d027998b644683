use bxos_core::construction::{Construction, Variant};
use bxos_core::lab::stats::two_sample;
use bxos_core::lab::{
    check_opt, gen_instances, parse_instance, run_protocol, serialize_instance, verify_concentration, verify_info,
    verify_theta_recovery, ExperimentConfig, LabError, Status,
};
use bxos_core::setcore::RngStream;

fn cfg(m: usize, n: usize, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        m,
        n,
        trials,
        seed: 99,
        ..ExperimentConfig::default()
    }
}

#[test]
fn mean_regular_cross_intersection_is_close_to_expectation() {
    let m = 160;
    let c = Construction::new(m).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let draws = 10_000;
    let mut total = 0usize;
    for _ in 0..draws {
        let s = c.sample_basis(&mut rng);
        let t = c.sample_compatible(&s, &mut rng).unwrap();
        let (a1, _) = c.sample_clause_pair(&s, &mut rng).unwrap();
        let (b1, _) = c.sample_clause_pair(&t, &mut rng).unwrap();
        total += a1.intersection_count(&b1);
    }
    let mean = total as f64 / draws as f64;
    let expected = 51.0 * m as f64 / 200.0;
    assert!((mean - expected).abs() <= 0.01 * expected, "mean {mean}, expected {expected}");
}

#[test]
fn reports_are_deterministic() {
    let c = cfg(160, 4, 20);
    assert_eq!(verify_theta_recovery(&c).unwrap().to_json(), verify_theta_recovery(&c).unwrap().to_json());
    let g1: Vec<String> = gen_instances(&c).unwrap().iter().map(serialize_instance).collect();
    let g2: Vec<String> = gen_instances(&c).unwrap().iter().map(serialize_instance).collect();
    assert_eq!(g1, g2);
}

#[test]
fn identical_samples_give_zero_statistic() {
    let xs: Vec<i64> = (0..400).map(|i| (i * 7919) % 13).collect();
    assert_eq!(two_sample(&xs, &xs).statistic, 0.0);
}

#[test]
fn serialized_instances_round_trip() {
    for variant in [Variant::Nu, Variant::NuPrime] {
        let c = ExperimentConfig { variant, ..cfg(32, 3, 5) };
        for inst in gen_instances(&c).unwrap() {
            let back = parse_instance(serialize_instance(&inst).as_bytes()).unwrap();
            assert_eq!(back, inst);
        }
    }
    assert!(matches!(parse_instance(b"{}"), Err(LabError::Json(_) | LabError::Malformed(_))));
}

#[test]
fn drivers_pass_on_small_configs() {
    // Margin eps·m = 800 at m = 16000.
    assert!(verify_concentration(&ExperimentConfig { eps: 0.05, ..cfg(16_000, 4, 3) }).unwrap().passed);
    assert!(verify_theta_recovery(&cfg(1600, 4, 5)).unwrap().passed);
    assert!(verify_info(&cfg(16, 4, 50)).unwrap().passed);
    let c = cfg(160, 4, 10);
    assert!(check_opt(&c, &gen_instances(&c).unwrap()).unwrap().passed);
}

#[test]
fn run_reports_expected_ratios() {
    let trivial = run_protocol(&ExperimentConfig { protocol: Some("trivial".into()), ..cfg(160, 4, 30) }).unwrap();
    assert_eq!(trivial.check("ratio exactly 1/2").unwrap().status, Status::Pass);
    let be = run_protocol(&ExperimentConfig { protocol: Some("basis-exchange".into()), ..cfg(160, 4, 30) }).unwrap();
    assert_eq!(be.check("ratio exactly 1 in two rounds").unwrap().status, Status::Pass);
    assert!(matches!(run_protocol(&cfg(160, 4, 3)), Err(LabError::Config(_))));
}

#[test]
fn config_validation() {
    assert!(matches!(verify_info(&cfg(17, 4, 1)), Err(LabError::Config(_))));
    let bad_eps = ExperimentConfig { eps: 0.3, ..cfg(16, 4, 1) };
    assert!(bad_eps.validate().is_err());
}
