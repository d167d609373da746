#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::matchers::flatten_sketch;
use semsketch::render::render_html;
use semsketch::sketch::{parse_sketches, write_sketches};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sketches) = parse_sketches(text) {
        for sk in &sketches {
            let _ = render_html(sk);
            let _ = flatten_sketch(sk);
        }
        assert_eq!(
            parse_sketches(&write_sketches(&sketches).unwrap()).unwrap(),
            sketches
        );
    }
});
