#![no_main]

use libfuzzer_sys::fuzz_target;
use liouville_core::manifold::ManifoldConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ManifoldConfig::from_json_str(text) else { return };
    // Validation samples the profile on a fixed grid; keep tables small so runs stay fast.
    if cfg.a.len() <= 8 {
        let _ = cfg.validate();
    }
});
