use fq_junta::funcs::*;
use fq_junta::junta::*;
use fq_junta::rng::stream;
use fq_junta::*;
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (u64, usize, usize, u64)> {
    (prop::sample::select(vec![2u64, 3]), 3usize..10, 1usize..=2, any::<u64>())
}

fn run(f: &JuntaFunction, k: usize, seed: u64) -> (Result<(), JuntaError>, LearnerState) {
    let cfg = LearnerConfig::desk(f.field().q());
    let mut state = LearnerState::default();
    let res = learn_junta_with_state(f, k, &cfg, &mut state, &mut stream(seed, "learn", 0));
    (res, state)
}

fn check_invariants(f: &JuntaFunction, k: usize, res: &Result<(), JuntaError>, st: &LearnerState) -> Result<(), TestCaseError> {
    let q = f.field().q() as u64;
    let got = st.relevant_sorted();
    prop_assert!(got.iter().all(|i| f.relevant().contains(i)), "got {:?} truth {:?}", got, f.relevant());
    prop_assert!(st.loops <= k + 1);
    prop_assert!(st.loops <= got.len() + 1);
    prop_assert!(st.const_calls + st.add_rc_calls <= (k as u64 + 1) * q.pow(k as u32) + k as u64);
    if res.is_ok() {
        prop_assert_eq!(st.add_rc_calls as usize + 1, st.loops);
    }
    for e in st.audit.iter().filter(|e| e.accepted) {
        prop_assert!(e.candidate.iter().all(|(i, _)| f.relevant().contains(i)));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn learner_is_sound_and_bounded((q, n, k, seed) in instance()) {
        let fs = FieldSpec::of_order(q).unwrap();
        let f = gen_random_junta(&fs, n, k, &mut stream(seed, "target", 0)).unwrap();
        let (res, st) = run(&f, k, seed);
        check_invariants(&f, k, &res, &st)?;
    }

    #[test]
    fn permuting_coordinates_permutes_the_answer((q, n, k, seed) in instance(), shift in 1usize..9) {
        let fs = FieldSpec::of_order(q).unwrap();
        let f = gen_random_junta(&fs, n, k, &mut stream(seed, "target", 0)).unwrap();
        let pi = |i: usize| (i + shift) % n;
        let coords: Vec<usize> = f.relevant().iter().map(|&i| pi(i)).collect();
        let qs = q as usize;
        let g = JuntaFunction::from_fn(fs.clone(), n, &coords, |a| f.table_value(encode_mixed(a, qs))).unwrap();
        let mut moved: Vec<usize> = coords.clone();
        moved.sort_unstable();
        prop_assert_eq!(g.relevant(), &moved[..]);
        let (rf, sf) = run(&f, k, seed);
        let (rg, sg) = run(&g, k, seed);
        check_invariants(&f, k, &rf, &sf)?;
        check_invariants(&g, k, &rg, &sg)?;
        if rf.is_ok() && rg.is_ok() && sf.relevant.len() == k && sg.relevant.len() == k {
            let mut mapped: Vec<usize> = sf.relevant_sorted().into_iter().map(pi).collect();
            mapped.sort_unstable();
            prop_assert_eq!(mapped, sg.relevant_sorted());
        }
    }
}

#[test]
fn size_overflow_is_reported() {
    let fs = FieldSpec::of_order(2).unwrap();
    let f = gen_random_junta(&fs, 6, 3, &mut stream(4, "overflow", 0)).unwrap();
    let mut state = LearnerState::default();
    let res = learn_junta_with_state(&f, 1, &LearnerConfig::desk(2), &mut state, &mut stream(4, "overflow-learn", 0));
    // A 3-junta run with k = 1 may either overflow or stop with a subset, but never reports an outsider.
    if let Err(JuntaError::SizeOverflow { size, k }) = &res {
        assert!(*size > *k);
    }
    assert!(state.relevant.iter().all(|i| f.relevant().contains(i)));
}

#[test]
fn linear_function_is_learned_exactly() {
    for q in [2u64, 3, 4] {
        let fs = FieldSpec::of_order(q).unwrap();
        let alpha = FieldVector(vec![Fq::ZERO, Fq::ONE, Fq::ZERO, Fq::ZERO, Fq::ONE, Fq::ZERO]);
        let f = JuntaFunction::linear(fs.clone(), &alpha);
        let got = learn_junta(&f, 2, &LearnerConfig::desk(fs.q()), &mut stream(q, "linear", 0)).unwrap();
        assert_eq!(got, vec![1, 4], "q={q}");
    }
}

#[test]
fn bad_config_is_rejected() {
    let f = JuntaFunction::constant(FieldSpec::of_order(2).unwrap(), 3, Fq::ZERO);
    for delta in [0.0, 1.0, -0.5] {
        let cfg = LearnerConfig { delta, ..LearnerConfig::default() };
        assert!(learn_junta(&f, 1, &cfg, &mut stream(0, "cfg", 0)).is_err());
    }
}
