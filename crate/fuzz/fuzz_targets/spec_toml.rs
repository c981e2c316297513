//! TOML manifold configs: parse, then validate whatever parses.

#![no_main]

use libfuzzer_sys::fuzz_target;
use liouville_core::manifold::ManifoldConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ManifoldConfig::from_toml_str(text) {
            if cfg.a.len() <= 8 {
                let _ = cfg.validate();
            }
        }
    }
});
