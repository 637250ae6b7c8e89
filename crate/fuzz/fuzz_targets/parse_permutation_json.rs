#![no_main]

use concentrator_core::lab::parse_permutation_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_permutation_json(text) {
        let mut seen = vec![false; p.len()];
        for &v in p.mapping() {
            assert!(!std::mem::replace(&mut seen[v as usize], true));
        }
    }
});
