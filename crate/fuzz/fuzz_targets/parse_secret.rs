#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::sketch::{parse_secret, write_secret};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(secret) = parse_secret(text) {
        assert_eq!(
            parse_secret(&write_secret(&secret).unwrap()).unwrap(),
            secret
        );
    }
});
