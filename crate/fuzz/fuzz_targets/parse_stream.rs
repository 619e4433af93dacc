#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::ingest::parse_stream;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_stream(text, 0) {
        assert!(s.records.windows(2).all(|w| w[0].0 < w[1].0));
    }
});
