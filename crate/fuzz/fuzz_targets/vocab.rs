#![no_main]

use abusebench::neural::{tokenize, Vocab};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(vocab) = Vocab::parse(text) {
        let again = Vocab::parse(&vocab.to_file_string()).expect("written vocab parses");
        assert_eq!(again, vocab);
        let seq = tokenize(text, &vocab, 16);
        assert_eq!(seq.ids.len(), 16);
        assert!(seq.ids.iter().all(|&id| (id as usize) < vocab.len()));
    }
});
