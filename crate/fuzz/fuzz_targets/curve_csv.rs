#![no_main]

use fplr::cliio::{curves_to_csv, parse_curves};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Anything that parses must serialize and parse back to the same curves.
    if let Ok((grid, curves)) = parse_curves(data) {
        let text = curves_to_csv(&grid, &curves).expect("parsed curves share the grid");
        let (grid2, again) = parse_curves(&text).expect("serialized curves parse");
        assert_eq!(grid, grid2);
        assert_eq!(curves, again);
    }
});
