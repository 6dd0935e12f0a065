//! Braid word text: first byte picks the strand count, the rest is the word.

#![no_main]

use libfuzzer_sys::fuzz_target;
use linkforge::braid::parse_braid_word;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(word) = parse_braid_word(text, n as usize) {
        let again = parse_braid_word(&word.to_text(), word.strands()).expect("printed word parses");
        assert_eq!(again, word);
    }
});
