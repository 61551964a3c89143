#![no_main]

use fq_junta::lbp::{solve_naive, LbpInstance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((inst, planted)) = LbpInstance::<String>::parse(s) {
            let text = inst.to_text(planted.as_ref().map(|(a, b)| (a, b)));
            let (back, p) = LbpInstance::<String>::parse(&text).expect("round trip");
            assert_eq!(back.labels(), inst.labels());
            assert_eq!(p, planted);
            if inst.n() * inst.n() * inst.d() < 1 << 20 {
                let _ = solve_naive(&inst, inst.rho());
            }
        }
    }
});
