#![no_main]

use fq_junta::FieldSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(f) = s.parse::<FieldSpec>() {
            let back: FieldSpec = f.to_string().parse().expect("display round trip");
            assert_eq!(back, f);
        }
    }
});
