#![no_main]

use abusebench::boosted::TreeEnsemble;
use abusebench::runner::ModelCard;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(card) = ModelCard::parse(text) {
        let json = serde_json::to_string(&card).unwrap();
        assert_eq!(ModelCard::parse(&json).expect("written card parses"), card);
    }
    let _ = TreeEnsemble::from_json(text);
});
