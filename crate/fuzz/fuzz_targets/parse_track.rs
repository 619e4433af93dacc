#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::ingest::parse_track;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_track(text) {
        assert!(t.records.windows(2).all(|w| w[0].timestamp_s < w[1].timestamp_s));
    }
});
