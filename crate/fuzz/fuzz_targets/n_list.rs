#![no_main]

use besov_inflate_cli::parse_n_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ns) = parse_n_list(text) {
        let joined = ns.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        assert_eq!(parse_n_list(&joined).unwrap(), ns);
    }
});
