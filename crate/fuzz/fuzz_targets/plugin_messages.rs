#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::fill::plugin::{parse_request, parse_response};

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_request(line);
    let _ = parse_response(line);
});
