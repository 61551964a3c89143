use fq_junta::gf::{conway_polynomial, consecutive_partitions};
use fq_junta::*;
use proptest::prelude::*;

const ORDERS: [u64; 9] = [2, 3, 4, 5, 7, 8, 9, 16, 25];

fn any_field() -> impl Strategy<Value = FieldSpec> {
    prop::sample::select(ORDERS.to_vec()).prop_map(|q| FieldSpec::of_order(q).unwrap())
}

fn field_and(n: usize) -> impl Strategy<Value = (FieldSpec, Vec<u32>)> {
    any_field().prop_flat_map(move |f| {
        let q = f.q();
        (Just(f), prop::collection::vec(0..q, n))
    })
}

fn el(f: &FieldSpec, i: u32) -> Fq {
    f.element(i).unwrap()
}

/// Schoolbook product of coefficient vectors reduced by the modulus; an
/// oracle independent of the log tables.
fn poly_mul(f: &FieldSpec, a: Fq, b: Fq) -> Fq {
    let p = f.p();
    let ell = f.ell() as usize;
    let (ca, cb) = (f.coeffs(a), f.coeffs(b));
    let mut prod = vec![0u32; 2 * ell];
    for i in 0..ell {
        for j in 0..ell {
            prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p;
        }
    }
    let m = f.modulus();
    for top in (ell..2 * ell).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        for (i, &mi) in m.iter().enumerate() {
            let idx = top - ell + i;
            prod[idx] = (prod[idx] + p * p - c * mi % p) % p;
        }
    }
    f.from_coeffs(&prod[..ell]).unwrap()
}

proptest! {
    #[test]
    fn ring_axioms((f, v) in field_and(3)) {
        let (a, b, c) = (el(&f, v[0]), el(&f, v[1]), el(&f, v[2]));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.add(a, f.neg(a)), Fq::ZERO);
    }

    #[test]
    fn multiplication_matches_polynomial_arithmetic((f, v) in field_and(2)) {
        let (a, b) = (el(&f, v[0]), el(&f, v[1]));
        prop_assert_eq!(f.mul(a, b), poly_mul(&f, a, b));
    }

    #[test]
    fn inverses((f, v) in field_and(1)) {
        let a = el(&f, v[0]);
        if a.is_zero() {
            prop_assert!(f.inv(a).is_err());
        } else {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fq::ONE);
            prop_assert_eq!(f.pow(a, f.q() as u64 - 1), Fq::ONE);
        }
    }

    #[test]
    fn trace_is_additive_and_frobenius_invariant((f, v) in field_and(2)) {
        let (a, b) = (el(&f, v[0]), el(&f, v[1]));
        let p = f.p();
        prop_assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
        prop_assert_eq!(f.trace(f.pow(a, p as u64)), f.trace(a));
        let c = f.character(f.add(a, b));
        let d = f.character(a) * f.character(b);
        prop_assert!((c - d).norm() < 1e-9);
    }

    #[test]
    fn element_tokens_round_trip((f, v) in field_and(4)) {
        let xs: Vec<Fq> = v.iter().map(|&i| el(&f, i)).collect();
        for &x in &xs {
            prop_assert_eq!(f.parse_element(&f.format_element(x)).unwrap(), x);
        }
        let s = f.format_vector(&xs);
        prop_assert_eq!(f.parse_vector(&s).unwrap().0, xs);
    }

    #[test]
    fn field_tokens_round_trip(f in any_field()) {
        let g: FieldSpec = f.to_string().parse().unwrap();
        prop_assert_eq!(g, f);
    }

    #[test]
    fn partitions_cover_every_coordinate(n in 1usize..40) {
        let parts = consecutive_partitions(n);
        prop_assert_eq!(parts.len(), n);
        for p in &parts {
            let j = p.coords(Side::J);
            let c = p.coords(Side::Complement);
            prop_assert_eq!(j.len(), n.div_ceil(2));
            prop_assert_eq!(j.len() + c.len(), n);
        }
    }
}

#[test]
fn trace_counts_are_balanced() {
    for q in ORDERS {
        let f = FieldSpec::of_order(q).unwrap();
        let mut counts = vec![0u32; f.p() as usize];
        for a in f.elements() {
            counts[f.trace(a) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c as u64 == q / f.p() as u64), "q={q}: {counts:?}");
    }
}

#[test]
fn conway_moduli() {
    assert_eq!(conway_polynomial(2, 2).unwrap(), vec![1, 1, 1]);
    assert_eq!(conway_polynomial(2, 3).unwrap(), vec![1, 1, 0, 1]);
    assert_eq!(conway_polynomial(3, 2).unwrap(), vec![2, 2, 1]);
    assert_eq!(conway_polynomial(2, 4).unwrap(), vec![1, 1, 0, 0, 1]);
    assert_eq!(conway_polynomial(5, 2).unwrap(), vec![2, 4, 1]);
}

#[test]
fn bad_orders_are_rejected() {
    for q in [0u64, 1, 6, 10, 12, 1 << 17] {
        assert!(FieldSpec::of_order(q).is_err(), "q={q}");
    }
    for tok in ["", "2", "4:1", "2:x", "2:2:1,0,1", "2:2:1,1,1:9"] {
        assert!(tok.parse::<FieldSpec>().is_err(), "{tok:?}");
    }
}

#[test]
fn init_is_first_nonzero_entry() {
    let f = FieldSpec::of_order(5).unwrap();
    let v = FieldVector(vec![Fq::ZERO, f.from_int(3), f.from_int(1)]);
    assert_eq!(v.init().unwrap(), f.from_int(3));
    assert_eq!(v.weight(), 2);
    assert_eq!(v.support(), vec![1, 2]);
    assert!(FieldVector::zeros(3).init().is_err());
}
