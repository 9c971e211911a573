#![no_main]

use std::path::Path;

use abusebench::runner::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text, Path::new("/fuzz"), std::iter::empty::<(&str, &str)>()) {
        let _ = cfg.config_hash();
        let _ = cfg.run_dir();
    }
});
