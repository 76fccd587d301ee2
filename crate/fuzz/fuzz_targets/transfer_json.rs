#![no_main]

use libfuzzer_sys::fuzz_target;
use satreal::TransferSystem;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = serde_json::from_slice::<TransferSystem>(data) {
        let text = serde_json::to_string(&t).unwrap();
        let back: TransferSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        let _ = t.is_saturated();
    }
});
