#![no_main]

use std::collections::BTreeMap;

use fq_junta_cli::config::{parse_config_text, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(file) = parse_config_text(s) {
            let cfg = RunConfig::resolve(&BTreeMap::new(), &file, None).expect("file keys are known");
            let _ = cfg.field();
            for (k, v) in &file {
                assert_eq!(cfg.raw(k), v);
            }
        }
    }
});
