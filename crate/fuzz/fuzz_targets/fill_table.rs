#![no_main]

use libfuzzer_sys::fuzz_target;
use semsketch::fill::{ClozeQuery, FillModel, FillTable, TableFillModel};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = FillTable::parse(text) {
        let templates: Vec<String> = table.templates.keys().cloned().collect();
        let model = TableFillModel::new(table);
        for t in templates {
            let got = model.fill(&ClozeQuery::new(t, 3).unwrap()).unwrap();
            assert!(got.len() <= 3);
        }
    }
});
