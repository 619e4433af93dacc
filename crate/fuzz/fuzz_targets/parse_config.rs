#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        if let Ok(resolved) = cfg.resolved() {
            let echoed = resolved.to_toml_string().unwrap();
            assert_eq!(RunConfig::parse(&echoed).unwrap(), resolved);
        }
    }
});
