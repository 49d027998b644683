mod common;

use bxos_core::construction::{Construction, CopyIndex, Instance, Variant};
use bxos_core::setcore::{expected_intersection, ratio, PartitionParameter, RngStream};
use common::*;

#[test]
fn reference_configuration_matches_printed_sets() {
    let (s, t, a1, a2) = reference_16();
    let inst = Instance::reference(16, CopyIndex::One).unwrap();
    assert_eq!((&inst.s, &inst.t), (&s, &t));
    assert_eq!((&inst.a1[0], &inst.a2[0]), (&a1, &a2));
    assert_eq!(profile(&[&s.s1, &s.s2], 16, None), BASIS.to_vec());
    assert_eq!(profile(&[&s.s1, &s.s2, &t.s1, &t.s2], 16, None), CMP.to_vec());
    assert_eq!(profile(&[&s.s1, &s.s2, &t.s1, &t.s2], 16, Some(&a1)), SPEC1.to_vec());
    assert_eq!(profile(&[&s.s1, &s.s2, &t.s1, &t.s2], 16, Some(&a2)), SPEC2.to_vec());
    assert_eq!(profile(&[&s.s1, &s.s2], 16, Some(&a1)), REG.to_vec());
    assert_eq!(profile(&[&s.s2, &s.s1], 16, Some(&a2)), REG.to_vec());
    Construction::new(16).unwrap().validate(&inst).unwrap();
}

#[test]
fn reference_expectations_are_exact() {
    let (s, t, _, _) = reference_16();
    let reg = PartitionParameter::from_sets(&[s.s1.clone(), s.s2.clone()], 16, REG.to_vec()).unwrap();
    let reg_t = PartitionParameter::from_sets(&[t.s2.clone(), t.s1.clone()], 16, REG.to_vec()).unwrap();
    assert_eq!(expected_intersection(&reg, &reg_t).unwrap(), ratio(51 * 16, 200));
    let oracle = expected_by_items(&[&s.s1, &s.s2], &REG, &[&t.s2, &t.s1], &REG, 16);
    assert_eq!(oracle, ratio(51 * 16, 200));
    let st = [s.s1.clone(), s.s2.clone(), t.s1.clone(), t.s2.clone()];
    let spec = PartitionParameter::from_sets(&st, 16, SPEC1.to_vec()).unwrap();
    assert_eq!(expected_intersection(&spec, &reg_t).unwrap(), ratio(61 * 16, 240));
}

#[test]
fn sampled_instances_validate_and_respect_structure() {
    for variant in [Variant::Nu, Variant::NuPrime] {
        let c = Construction::new(32).unwrap();
        for seed in 0..50 {
            let inst = c.sample_instance(5, variant, &mut RngStream::new(seed, 7)).unwrap();
            c.validate(&inst).unwrap();
            assert!(inst.i_star < inst.n);
            let st = [&inst.s.s1, &inst.s.s2, &inst.t.s1, &inst.t.s2];
            assert_eq!(profile(&st, 32, None), scaled(&CMP, 32));
            // The special pair is complementary in the chosen copy.
            let j = inst.theta;
            let s = inst.i_star;
            assert_eq!(inst.a(j)[s].complement(), inst.b(j)[s]);
            for i in 0..inst.n {
                assert_eq!(inst.a1[i].count(), 16);
                assert_eq!(inst.b2[i].count(), 16);
            }
        }
    }
}

#[test]
fn validate_rejects_tampering() {
    let c = Construction::new(16).unwrap();
    let mut inst = c.sample_instance(3, Variant::Nu, &mut RngStream::new(1, 1)).unwrap();
    let z = inst.a1[0].iter().next().unwrap();
    inst.a1[0].remove(z);
    assert!(c.validate(&inst).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let c = Construction::new(160).unwrap();
    let a = c.sample_instance(8, Variant::Nu, &mut RngStream::new(42, 3)).unwrap();
    let b = c.sample_instance(8, Variant::Nu, &mut RngStream::new(42, 3)).unwrap();
    let d = c.sample_instance(8, Variant::Nu, &mut RngStream::new(43, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, d);
}

#[test]
fn rejects_bad_sizes() {
    assert!(Construction::new(0).is_err());
    assert!(Construction::new(20).is_err());
    assert!(Construction::new(48).is_ok());
}

#[test]
fn pair_intersections_have_printed_sizes() {
    let c = Construction::new(160).unwrap();
    let mut rng = RngStream::new(5, 5);
    for _ in 0..200 {
        let s = c.sample_basis(&mut rng);
        let t = c.sample_compatible(&s, &mut rng).unwrap();
        let (a1, a2) = c.sample_clause_pair(&s, &mut rng).unwrap();
        assert_eq!(a1.intersection_count(&a2), 2 * 160 / 16);
        let (x1, x2) = c.sample_special_pair(&s, &t, &mut rng).unwrap();
        assert_eq!(x1.intersection_count(&x2), 2 * 160 / 16);
        assert!(c.is_special_pair(&x1, &x2, &s, &t).unwrap());
        assert!(c.is_clause_pair(&a1, &a2, &s).unwrap());
    }
}
