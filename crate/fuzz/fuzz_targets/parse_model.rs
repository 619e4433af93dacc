#![no_main]

use libfuzzer_sys::fuzz_target;
use rssloc::io::model::{model_to_string, parse_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = parse_model(text) {
        // A validated net must evaluate without panicking and round-trip exactly.
        let _ = net.forward(&vec![-60.0; net.input_dim]);
        assert_eq!(parse_model(&model_to_string(&net).unwrap()).unwrap(), net);
    }
});
