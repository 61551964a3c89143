#![no_main]

use fq_junta::FieldSpec;
use libfuzzer_sys::fuzz_target;

const ORDERS: [u64; 8] = [2, 3, 4, 5, 8, 9, 49, 121];

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    let f = FieldSpec::of_order(ORDERS[sel as usize % ORDERS.len()]).unwrap();
    if let Ok(a) = f.parse_element(s) {
        assert_eq!(f.parse_element(&f.format_element(a)).unwrap(), a);
    }
    if let Ok(v) = f.parse_vector(s) {
        assert_eq!(f.parse_vector(&f.format_vector(v.as_slice())).unwrap(), v);
    }
});
