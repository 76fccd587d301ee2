#![no_main]

use libfuzzer_sys::fuzz_target;
use satreal::parse::parse_order;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(order) = parse_order(text) {
        let expected = order.p().pow(order.n()) * order.q().pow(order.m());
        assert_eq!(order.modulus(), expected);
        assert!(order.p() != order.q());
        let again = parse_order(&format!(
            "{},{},{},{}",
            order.p(),
            order.n(),
            order.q(),
            order.m()
        ))
        .unwrap();
        assert_eq!(again, order);
    }
});
