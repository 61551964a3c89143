use fq_junta::analysis::*;
use fq_junta::funcs::*;
use fq_junta::rng::stream;
use fq_junta::*;
use proptest::prelude::*;

fn field(q: u64) -> FieldSpec {
    FieldSpec::of_order(q).unwrap()
}

fn junta_case() -> impl Strategy<Value = (u64, usize, usize, u64)> {
    (prop::sample::select(vec![2u64, 3, 4, 5]), 1usize..7).prop_flat_map(|(q, n)| (Just(q), Just(n), 0..=n.min(3), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planted_relevant_set_is_exact((q, n, k, seed) in junta_case()) {
        let f = gen_random_junta(&field(q), n, k, &mut stream(seed, "junta", 0)).unwrap();
        prop_assert_eq!(relevant_bruteforce(&f), f.relevant().to_vec());
        prop_assert_eq!(f.relevant().len(), k);
    }

    #[test]
    fn irrelevant_flips_do_not_change_the_value((q, n, k, seed) in junta_case()) {
        let fs = field(q);
        let mut rng = stream(seed, "flip", 0);
        let f = gen_random_junta(&fs, n, k, &mut rng).unwrap();
        for _ in 0..20 {
            let (mut x, b) = f.sample(&mut rng).unwrap();
            prop_assert_eq!(f.eval(x.as_slice()).unwrap(), b);
            for i in (0..n).filter(|i| !f.relevant().contains(i)) {
                x.0[i] = fs.random(&mut rng);
            }
            prop_assert_eq!(f.eval(x.as_slice()).unwrap(), b);
        }
    }

    #[test]
    fn junta_files_round_trip((q, n, k, seed) in junta_case()) {
        let f = gen_random_junta(&field(q), n, k, &mut stream(seed, "file", 0)).unwrap();
        let (g, kk) = JuntaFunction::parse(&f.to_text(k + 1)).unwrap();
        prop_assert_eq!(kk, k + 1);
        prop_assert_eq!(g, f);
    }

    #[test]
    fn restricted_oracle_respects_the_restriction((q, n, k, seed) in junta_case()) {
        prop_assume!(k >= 1);
        let fs = field(q);
        let mut rng = stream(seed, "restrict", 0);
        let f = gen_random_junta(&fs, n, k, &mut rng).unwrap();
        let r0 = f.relevant()[0];
        let v = fs.random(&mut rng);
        let tau = Restriction::from_pairs([(r0, v)]);
        let o = restricted_oracle(&f, &tau, DEFAULT_CAP_MULTIPLIER);
        prop_assert_eq!(o.arity(), n - 1);
        let kept = o.kept_coords().to_vec();
        prop_assert!(!kept.contains(&r0));
        let mut x = vec![Fq::ZERO; n - 1];
        for _ in 0..20 {
            let b = o.draw(&mut rng, &mut x).unwrap();
            let mut full = vec![Fq::ZERO; n];
            full[r0] = v;
            for (j, &i) in kept.iter().enumerate() {
                full[i] = x[j];
            }
            prop_assert_eq!(f.eval(&full).unwrap(), b);
        }
    }

    #[test]
    fn parseval((q, n, k, seed) in junta_case()) {
        prop_assume!(n <= 4);
        let fs = field(q);
        let f = gen_random_junta(&fs, n, k, &mut stream(seed, "parseval", 0)).unwrap();
        let mut total = 0.0;
        let qs = fs.q() as usize;
        let mut alpha = vec![Fq::ZERO; n];
        for t in 0..qs.pow(n as u32) {
            decode_mixed(t, qs, &mut alpha);
            total += fourier_exact(&f, &FieldVector(alpha.clone())).unwrap().norm_sqr();
        }
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
    }
}

#[test]
fn counted_oracle_counts_draws() {
    let f = JuntaFunction::constant(field(3), 4, Fq::ONE);
    let c = Counted::new(&f);
    let mut rng = stream(1, "count", 0);
    for _ in 0..17 {
        c.sample(&mut rng).unwrap();
    }
    assert_eq!(c.count(), 17);
    c.reset();
    assert_eq!(c.count(), 0);
}

#[test]
fn scaled_oracle_scales_labels() {
    let fs = field(5);
    let f = JuntaFunction::linear(fs.clone(), &FieldVector::unit(3, 2, Fq::ONE));
    let c = fs.from_int(3);
    let s = scaled_oracle(&f, c);
    let mut rng = stream(2, "scale", 0);
    for _ in 0..20 {
        let (x, b) = s.sample(&mut rng).unwrap();
        assert_eq!(b, fs.mul(c, x[2]));
    }
}

#[test]
fn eta_mix_has_the_requested_correlation() {
    for q in [2u64, 3, 4, 7] {
        let fs = field(q);
        for rho in [0.1, 0.5, 1.0] {
            let t = gen_ldme_target(&fs, FieldVector::unit(4, 1, Fq::ONE), rho).unwrap();
            assert!((t.correlation() - rho).abs() < 1e-9, "q={q} rho={rho}");
            let (u, _) = LdmeTarget::parse(&t.to_text(1)).unwrap();
            assert_eq!(u.alpha(), t.alpha());
        }
    }
}

#[test]
fn identity_channel_is_noise_free() {
    let fs = field(3);
    let alpha = FieldVector(vec![fs.from_int(1), Fq::ZERO, fs.from_int(2)]);
    let t = gen_ldme_target(&fs, alpha.clone(), 1.0).unwrap();
    let mut rng = stream(3, "noise", 0);
    for _ in 0..50 {
        let (x, b) = t.sample(&mut rng).unwrap();
        assert_eq!(b, fs.dot(alpha.as_slice(), x.as_slice()));
    }
}

#[test]
fn malformed_junta_files_are_rejected() {
    let bad = [
        "",
        "junta 2 1 3",
        "junta 2 1 3 1\nrelevant 0\n",
        "junta 2 1 3 1\nrelevant 0 1\ntable 0 1 1 0\n",
        "junta 2 1 3 1\nrelevant 0\ntable 0 1 1\n",
        "junta 2 1 3 1\nrelevant 5\ntable 0 1\n",
        "junta 4 1 3 1\nrelevant 0\ntable 0 1 1 0\n",
        "junta 2 1 3 1\nrelevant 0\ntable 0 2\n",
    ];
    for text in bad {
        assert!(JuntaFunction::parse(text).is_err(), "{text:?}");
    }
    let (f, k) = JuntaFunction::parse("# comment\njunta 3 1 4 2\nrelevant 1\ntable 0 2 1\n").unwrap();
    assert_eq!((f.relevant(), k), (&[1usize][..], 2));
}
