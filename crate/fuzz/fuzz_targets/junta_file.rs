#![no_main]

use fq_junta::funcs::JuntaFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((f, k)) = JuntaFunction::parse(s) {
            let (g, kk) = JuntaFunction::parse(&f.to_text(k)).expect("round trip");
            assert_eq!((g, kk), (f, k));
        }
    }
});
