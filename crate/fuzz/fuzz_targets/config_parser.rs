#![no_main]

use besov_inflate_cli::{parse_config, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(settings) = parse_config(text) {
        // Resolution must reject or accept, never panic.
        let _ = RunConfig::resolve(settings);
    }
});
