#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::dataset::{parse_pool, write_pool};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pool) = parse_pool(text) {
        assert_eq!(parse_pool(&write_pool(&pool).unwrap()).unwrap(), pool);
    }
});
