#![no_main]

// Input: manifest JSON, a 0 byte, vocab text, a 0 byte, then raw tensor bytes
// handed out to the manifest's tensors in name order.

use std::fs;

use abusebench::neural::{load_external_checkpoint, CheckpointManifest};
use libfuzzer_sys::fuzz_target;

const MAX_TENSOR_BYTES: usize = 1 << 16;

fuzz_target!(|data: &[u8]| {
    let mut parts = data.splitn(3, |&b| b == 0);
    let (Some(manifest), Some(vocab), Some(weights)) = (parts.next(), parts.next(), parts.next()) else { return };
    let Ok(manifest_text) = std::str::from_utf8(manifest) else { return };
    let Ok(m) = CheckpointManifest::parse(manifest_text) else { return };
    let dir = tempfile::tempdir().expect("tempdir");
    fs::write(dir.path().join("manifest.json"), manifest).unwrap();
    fs::write(dir.path().join("vocab.txt"), vocab).unwrap();
    let mut rest = weights;
    for (name, shape) in &m.shapes {
        let n = shape.iter().product::<usize>().saturating_mul(8).min(MAX_TENSOR_BYTES).min(rest.len());
        let (head, tail) = rest.split_at(n);
        fs::write(dir.path().join(format!("{name}.bin")), head).unwrap();
        rest = tail;
    }
    if let Ok(model) = load_external_checkpoint(dir.path()) {
        let _ = model.predict_texts(["a b c", "x"]);
    }
});
