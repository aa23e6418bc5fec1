#![no_main]

use libfuzzer_sys::fuzz_target;
use rsm_core::report::{parse_records, write_records};

fuzz_target!(|text: &str| {
    if let Ok(records) = parse_records(text) {
        // written output is a fixed point of parse-then-write
        let written = write_records(&records);
        let reparsed = parse_records(&written).expect("written reports parse");
        assert_eq!(write_records(&reparsed), written);
        assert_eq!(reparsed.len(), records.len());
    }
});
