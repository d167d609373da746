#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::corpus::{parse_contexts, write_contexts};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(contexts) = parse_contexts(text) {
        for c in &contexts {
            assert_eq!(c.span_text(), c.target);
            let _ = c.replace_target("[MASK]");
        }
        let again = parse_contexts(&write_contexts(&contexts).unwrap()).unwrap();
        assert_eq!(again, contexts);
    }
});
