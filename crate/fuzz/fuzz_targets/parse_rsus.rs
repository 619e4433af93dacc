#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::dataset::{parse_rsus, rsus_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(dep) = parse_rsus(text) {
        assert_eq!(parse_rsus(&rsus_to_csv(&dep)).unwrap(), dep);
    }
});
