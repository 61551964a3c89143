#![no_main]

use fq_junta::funcs::LdmeTarget;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((t, k)) = LdmeTarget::parse(s) {
            let (u, kk) = LdmeTarget::parse(&t.to_text(k)).expect("round trip");
            assert_eq!(u.alpha(), t.alpha());
            assert_eq!(kk, k);
        }
    }
});
