#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::dataset::{dataset_to_csv, parse_dataset, parse_metadata};

// Input: metadata, a NUL byte, then the CSV body.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Some((meta, csv)) = text.split_once('\0') else { return };
    let Ok(meta) = parse_metadata(meta) else { return };
    if let Ok(ds) = parse_dataset(csv, &meta) {
        // Anything accepted must survive a write/read cycle unchanged.
        let again = parse_dataset(&dataset_to_csv(&ds).unwrap(), &meta).unwrap();
        assert_eq!(again, ds);
    }
});
