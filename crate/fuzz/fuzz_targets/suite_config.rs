#![no_main]

use libfuzzer_sys::fuzz_target;
use liouville_core::suite::SuiteConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for cfg in [SuiteConfig::from_json_str(text), SuiteConfig::from_toml_str(text)].into_iter().flatten() {
        let _ = cfg.check();
    }
});
