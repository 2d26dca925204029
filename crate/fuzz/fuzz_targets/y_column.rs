#![no_main]

use fplr::cliio::parse_y_column;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(y) = parse_y_column(data) {
        assert!(y.iter().all(|v| v.is_finite()));
    }
});
