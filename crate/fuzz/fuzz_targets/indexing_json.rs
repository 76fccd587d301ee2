#![no_main]

use libfuzzer_sys::fuzz_target;
use satreal::{CyclicOrder, IndexingSet};

fuzz_target!(|data: &[u8]| {
    let Ok(set) = serde_json::from_slice::<IndexingSet>(data) else {
        return;
    };
    let text = serde_json::to_string(&set).unwrap();
    assert_eq!(serde_json::from_str::<IndexingSet>(&text).unwrap(), set);
    if set.modulus() > 5000 {
        return;
    }
    if let Ok(order) = CyclicOrder::from_modulus(set.modulus()) {
        let t = set.realized_system(&order).unwrap();
        assert!(t.is_saturated());
    }
});
