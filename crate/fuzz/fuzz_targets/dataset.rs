#![no_main]

use abusebench::corpus::{parse_dataset, DataFormat, LabelMap, Task};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&mode, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let format = if mode & 1 == 0 { DataFormat::Tsv } else { DataFormat::Csv };
    let task = if mode & 2 == 0 { Task::Abusive } else { Task::Threatening };
    if let Ok(ds) = parse_dataset(text, format, &LabelMap::for_task(task), "fuzz", task) {
        let mut ids = ds.ids();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n, "duplicate ids accepted");
        assert!(ds.examples().iter().all(|e| !e.id.is_empty() && !e.text.is_empty()));
    }
});
