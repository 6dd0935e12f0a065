#![no_main]

use libfuzzer_sys::fuzz_target;
use linkforge::assemble::MixedPoly;

fuzz_target!(|data: &str| {
    if let Ok(p) = MixedPoly::from_json(data) {
        let again = MixedPoly::from_json(&p.to_json()).expect("encoded polynomial decodes");
        assert_eq!(again, p);
    }
});
