#![no_main]

use libfuzzer_sys::fuzz_target;
use satreal::parse::parse_edges;
use satreal::TransferSystem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((Some(order), edges)) = parse_edges(text) else {
        return;
    };
    if order.subgroup_count() > 64 {
        return;
    }
    if let Ok(t) = TransferSystem::generate(order, &edges) {
        assert!(TransferSystem::validate(order, &t.edges()).is_ok());
        for &(x, y) in &edges {
            assert!(t.contains(x, y));
        }
    }
});
