#![no_main]

use libfuzzer_sys::fuzz_target;
use liouville_core::suite::SuiteReport;

// Any report that parses must survive a write/read cycle unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<SuiteReport>(data) {
        let text = serde_json::to_string(&report).unwrap();
        let again: SuiteReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, again);
    }
});
