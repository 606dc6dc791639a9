//! Fuzzes the JSON element decoder: decoding must be total on arbitrary
//! input, and any accepted document must round-trip bit-exactly through
//! the encoder.

#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_lab::tower::{decode_json, encode_json, Tower};
use std::sync::OnceLock;

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
    let Some((&pick, doc_bytes)) = data.split_first() else {
        return;
    };
    let Ok(doc) = std::str::from_utf8(doc_bytes) else {
        return;
    };
    let tower = &towers()[pick as usize % towers().len()];
    if let Ok(elt) = decode_json(tower, doc) {
        let encoded = encode_json(&elt).expect("accepted elements encode");
        let again = decode_json(tower, &encoded).expect("canonical JSON decodes");
        assert!(
            elt.same_value(&again).expect("same tower"),
            "round trip changed the value: {doc:?} -> {encoded:?}"
        );
        let twice = encode_json(&again).expect("accepted elements encode");
        assert_eq!(encoded, twice, "encoding is not canonical");
    }
});
