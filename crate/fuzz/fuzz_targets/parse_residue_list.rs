#![no_main]

use libfuzzer_sys::fuzz_target;
use satreal::indexing::parse_residue_list;
use satreal::IndexingSet;

// First two bytes pick the modulus, the rest is the list.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let modulus = u16::from_le_bytes([data[0], data[1]]) as u64 % 4096 + 1;
    let Ok(text) = std::str::from_utf8(&data[2..]) else {
        return;
    };
    let _ = parse_residue_list(text);
    if let Ok(set) = IndexingSet::parse_list(modulus, text) {
        assert!(set.contains(0));
        assert!(set.residues().is_negation_closed());
        let back = IndexingSet::parse_list(modulus, &set.to_list_string()).unwrap();
        assert_eq!(back, set);
    }
});
