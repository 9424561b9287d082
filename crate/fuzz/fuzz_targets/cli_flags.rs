#![no_main]

use besov_inflate_cli::{parse_flags, RunConfig};
use libfuzzer_sys::fuzz_target;

// NUL-separated argument vector.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("besov-inflate").chain(text.split('\0'));
    if let Ok((_, settings)) = parse_flags(args) {
        let _ = RunConfig::resolve(settings);
    }
});
