#![no_main]

use abusebench::corpus::{parse_unlabeled, DataFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&mode, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let format = if mode & 1 == 0 { DataFormat::Tsv } else { DataFormat::Csv };
    let _ = parse_unlabeled(text, format);
});
