#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::dataset::{metadata_to_string, parse_metadata};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(meta) = parse_metadata(text) {
        let _ = meta.deployment();
        let _ = meta.model();
        if let Ok(s) = metadata_to_string(&meta) {
            assert_eq!(parse_metadata(&s).unwrap(), meta);
        }
    }
});
