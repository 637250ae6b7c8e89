#![no_main]

use concentrator_core::lab::parse_graph_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_graph_json(text) {
        let again = parse_graph_json(&g.to_json().to_string()).expect("exported graphs reparse");
        assert_eq!(again, g);
    }
});
