#![no_main]

use abusebench::corpus::{LabelMap, Task};
use abusebench::runner::{emit_submission, parse_submission};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let map = LabelMap::for_task(Task::Threatening);
    if let Ok(rows) = parse_submission(text, &map) {
        let (ids, labels): (Vec<String>, Vec<_>) = rows.iter().cloned().unzip();
        let written = emit_submission(&ids, &labels, &map).expect("parsed rows re-emit");
        assert_eq!(parse_submission(&written, &map).expect("emitted submission parses"), rows);
    }
});
