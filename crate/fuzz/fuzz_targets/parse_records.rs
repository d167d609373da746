#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::corpus::{parse_records, write_records, IngestConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_records(text, &IngestConfig::default()) {
        let again = parse_records(&write_records(&records), &IngestConfig::default()).unwrap();
        assert_eq!(again, records);
    }
    let _ = parse_records(
        text,
        &IngestConfig {
            lowercase_lemmas: true,
        },
    );
});
