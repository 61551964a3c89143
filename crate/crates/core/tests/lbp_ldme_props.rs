use fq_junta::analysis::multiple_of;
use fq_junta::funcs::*;
use fq_junta::lbp::*;
use fq_junta::ldme::*;
use fq_junta::rng::stream;
use fq_junta::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lbp_files_round_trip(n in 2usize..12, d in 1usize..150, seed in any::<u64>()) {
        let (inst, planted) = gen_planted(n, d, 0.5, &mut stream(seed, "lbp-file", 0)).unwrap();
        let text = inst.to_text(Some((&planted.0, &planted.1)));
        let (back, p) = LbpInstance::<usize>::parse(&text).unwrap();
        prop_assert_eq!(p, Some(planted));
        prop_assert_eq!(back.labels(), inst.labels());
        for c in 0..n {
            for r in 0..d {
                prop_assert_eq!(back.bits().entry(c, r), inst.bits().entry(c, r));
            }
        }
    }

    #[test]
    fn grouped_with_unit_groups_matches_naive(n in 2usize..40, d in 1usize..300, seed in any::<u64>()) {
        let (inst, _) = gen_planted(n, d, 0.6, &mut stream(seed, "lbp-g1", 0)).unwrap();
        prop_assert_eq!(solve_naive(&inst, 0.0), solve_grouped(&inst, 0.0, Some(1)));
    }

    #[test]
    fn inner_products_match_entries(n in 2usize..8, d in 1usize..200, seed in any::<u64>()) {
        let (inst, _) = gen_planted(n, d, 0.0, &mut stream(seed, "lbp-inner", 0)).unwrap();
        for i in 0..n {
            for j in 0..n {
                let direct: i64 = (0..d).map(|r| (inst.bits().entry(i, r) * inst.bits().entry(j, r)) as i64).sum();
                prop_assert_eq!(inst.inner(i, j), direct);
            }
        }
    }
}

#[test]
fn malformed_lbp_files_are_rejected() {
    let bad = [
        "",
        "lbp 2 3",
        "lbp 2 3 0.5\n+++ 0\n",
        "lbp 2 3 0.5\n+++ 0\n++ 1\n",
        "lbp 2 3 0.5\n+++ 0\n+x+ 1\n",
        "lbp 2 3 0.5\n+++ 0\n+++ 0\n",
        "lbp 2 3 0.5\n+++ 0\n--- 1\nplanted 0 7\n",
    ];
    for text in bad {
        assert!(LbpInstance::<usize>::parse(text).is_err(), "{text:?}");
    }
}

#[test]
fn weight_one_secret_is_found_in_phase_one() {
    for q in [2u64, 3, 5] {
        let fs = FieldSpec::of_order(q).unwrap();
        for i in [0usize, 5] {
            let alpha = FieldVector::unit(6, i, fs.from_int(q as i64 - 1));
            let t = gen_ldme_target(&fs, alpha.clone(), 0.6).unwrap();
            let out = solve_ldme(&t, 2, 0.6, 0.1, &LdmeConfig::default(), &mut stream(q, "ldme-w1", i as u64)).unwrap();
            assert_eq!(out.stats.phase, 1, "q={q} i={i}");
            assert!(multiple_of(&fs, &out.gamma, &alpha).is_some(), "q={q} i={i}: {:?}", out.gamma);
        }
    }
}

#[test]
fn noise_free_weight_two_secret_is_recovered() {
    for q in [2u64, 3] {
        let fs = FieldSpec::of_order(q).unwrap();
        let mut rng = stream(q, "ldme-w2-secret", 0);
        for t in 0..3u64 {
            let alpha = random_vector_of_weight(&fs, 8, 2, &mut rng);
            let target = gen_ldme_target(&fs, alpha.clone(), 1.0).unwrap();
            let out = solve_ldme(&target, 2, 1.0, 0.1, &LdmeConfig::default(), &mut stream(q, "ldme-w2", t)).unwrap();
            assert!(multiple_of(&fs, &out.gamma, &alpha).is_some(), "q={q} alpha={alpha:?} got {:?}", out.gamma);
        }
    }
}

#[test]
fn ldme_rejects_bad_parameters() {
    let fs = FieldSpec::of_order(2).unwrap();
    let t = gen_ldme_target(&fs, FieldVector::unit(4, 0, Fq::ONE), 0.5).unwrap();
    let cfg = LdmeConfig::default();
    let mut rng = stream(0, "bad", 0);
    assert!(solve_ldme(&t, 0, 0.5, 0.1, &cfg, &mut rng).is_err());
    assert!(solve_ldme(&t, 1, 0.0, 0.1, &cfg, &mut rng).is_err());
    assert!(solve_ldme(&t, 1, 0.5, 1.0, &cfg, &mut rng).is_err());
}

#[test]
fn check_cor_separates_signal_from_noise() {
    let fs = FieldSpec::of_order(3).unwrap();
    let alpha = FieldVector::unit(5, 2, Fq::ONE);
    let t = gen_ldme_target(&fs, alpha.clone(), 0.5).unwrap();
    let mut rng = stream(9, "cor", 0);
    assert!(check_cor(&t, 0.5, &alpha, 0.05, &mut rng).unwrap());
    assert!(!check_cor(&t, 0.5, &FieldVector::unit(5, 3, Fq::ONE), 0.05, &mut rng).unwrap());
}
