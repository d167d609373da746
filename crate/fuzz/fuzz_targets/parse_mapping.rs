#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::corpus::parse_mapping;
use semsketch::eval::accuracy;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_mapping(text) {
        assert_eq!(parse_mapping(&m.to_json().unwrap()).unwrap(), m);
        let r = accuracy(&m, &m);
        assert!(m.is_empty() || r.accuracy == 1.0);
    }
});
