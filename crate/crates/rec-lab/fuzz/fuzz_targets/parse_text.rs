//! Fuzzes the element text parser: parsing must be total (no panics, no
//! unbounded recursion) on arbitrary input, and anything it accepts must
//! survive a render → reparse round trip with the same value.

#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_lab::tower::{element_to_text, parse_element, Tower};
use std::sync::OnceLock;

/// A spread of tower shapes: both heights and all three primes.
fn towers() -> &'static [Tower] {
    static TOWERS: OnceLock<Vec<Tower>> = OnceLock::new();
    TOWERS.get_or_init(|| {
        [(3, 1), (3, 2), (5, 1), (7, 1)]
            .iter()
            .map(|&(p, m)| Tower::new(p, m, 6).expect("reference tower"))
            .collect()
    })
}

fuzz_target!(|data: &[u8]| {
    let Some((&pick, text_bytes)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(text_bytes) else {
        return;
    };
    let tower = &towers()[pick as usize % towers().len()];
    if let Ok(elt) = parse_element(tower, text) {
        let rendered = element_to_text(&elt).expect("accepted elements render");
        let again = parse_element(tower, &rendered).expect("canonical text reparses");
        assert!(
            elt.same_value(&again).expect("same tower"),
            "round trip changed the value: {text:?} -> {rendered:?}"
        );
    }
});
