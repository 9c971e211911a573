use std::collections::HashSet;

use abusebench::corpus::{
    class_weights, dataset_stats, load_dataset, normalize_text, parse_dataset, stratified_split, write_dataset,
    ClassCounts, DataFormat, Dataset, Label, LabelMap, LabeledExample, Task, WeightScheme,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dataset(n_pos: usize, n_neg: usize, shuffle_seed: u64) -> Dataset {
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Positive, n_pos).chain(std::iter::repeat_n(Label::Negative, n_neg)).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    let examples = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| LabeledExample { id: format!("ex{i}"), text: format!("text {i}"), label })
        .collect();
    Dataset::new("d", Task::Abusive, examples).unwrap()
}

fn ids(d: &Dataset) -> HashSet<String> {
    d.ids().into_iter().map(String::from).collect()
}

#[test]
fn counts_1187_1213_split_exactly() {
    let d = dataset(1187, 1213, 0);
    let (train, val) = stratified_split(&d, 0.85, 13).unwrap();
    assert_eq!((train.len(), val.len()), (2040, 360));
    let c = dataset_stats(&train);
    assert_eq!((c.n_positive, c.n_negative), (1009, 1031));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn split_partitions_ids(n_pos in 1usize..40, n_neg in 1usize..40, fraction in 0.05f64..0.95, seed: u64) {
        let d = dataset(n_pos, n_neg, seed ^ 0x55);
        let (train, val) = stratified_split(&d, fraction, seed).unwrap();
        let (t, v) = (ids(&train), ids(&val));
        prop_assert!(t.is_disjoint(&v));
        prop_assert_eq!(t.union(&v).cloned().collect::<HashSet<_>>(), ids(&d));
        prop_assert_eq!(train.len() + val.len(), d.len());
        for label in [Label::Positive, Label::Negative] {
            let n_c = d.examples().iter().filter(|e| e.label == label).count() as f64;
            let kept = train.examples().iter().filter(|e| e.label == label).count() as f64;
            prop_assert!((kept / n_c - fraction).abs() <= 1.0 / n_c + 1e-12);
        }
        // both outputs keep the input's relative order
        let pos: std::collections::HashMap<&str, usize> = d.ids().into_iter().enumerate().map(|(i, id)| (id, i)).collect();
        for part in [&train, &val] {
            let idx: Vec<usize> = part.ids().iter().map(|id| pos[id]).collect();
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

proptest! {
    #[test]
    fn split_depends_on_ids_not_order(n_pos in 1usize..50, n_neg in 1usize..50, seed: u64, perm: u64) {
        let d = dataset(n_pos, n_neg, 1);
        let mut shuffled = d.examples().to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let d2 = Dataset::new("d", Task::Abusive, shuffled).unwrap();
        let (a, _) = stratified_split(&d, 0.85, seed).unwrap();
        let (b, _) = stratified_split(&d2, 0.85, seed).unwrap();
        prop_assert_eq!(ids(&a), ids(&b));
    }

    #[test]
    fn inverse_frequency_weights_average_to_one(n_pos in 1usize..100_000, n_neg in 1usize..100_000) {
        let w = class_weights(ClassCounts::new(n_pos, n_neg), WeightScheme::InverseFrequency).unwrap();
        let total = (n_pos + n_neg) as f64;
        let sum = w.w_positive * n_pos as f64 + w.w_negative * n_neg as f64;
        prop_assert!(((sum - total) / total).abs() <= 1e-9);
        prop_assert!(w.w_positive > 0.0 && w.w_negative > 0.0);
    }

    #[test]
    fn write_then_load_is_identity(
        rows in proptest::collection::vec(("[a-z0-9]{1,6}", "[a-zA-Z0-9 ,;\"'ابپتٹ]{1,24}", any::<bool>()), 0..30),
        csv in any::<bool>(),
    ) {
        let mut seen = HashSet::new();
        let examples: Vec<LabeledExample> = rows
            .into_iter()
            .filter(|(id, text, _)| seen.insert(id.clone()) && !normalize_text(text).is_empty())
            .map(|(id, text, pos)| LabeledExample { id, text: normalize_text(&text), label: pos.into() })
            .collect();
        let format = if csv { DataFormat::Csv } else { DataFormat::Tsv };
        let d = Dataset::new("rt", Task::Threatening, examples).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(format!("rt.{}", format.extension()));
        let map = LabelMap::for_task(Task::Threatening);
        write_dataset(&d, &path, format, &map).unwrap();
        let back = load_dataset(&path, format, &map, Task::Threatening).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn stats_match_a_line_scan(labels in proptest::collection::vec(any::<bool>(), 0..80)) {
        let mut file = String::from("label\tid\ttext\n");
        for (i, pos) in labels.iter().enumerate() {
            file.push_str(&format!("{}\t{i}\tsome  text {i}\n", if *pos { "Abusive" } else { "Non-Abusive" }));
        }
        let d = parse_dataset(&file, DataFormat::Tsv, &LabelMap::for_task(Task::Abusive), "s", Task::Abusive).unwrap();
        let scan_pos = file.lines().skip(1).filter(|l| l.starts_with("Abusive\t")).count();
        let scan_neg = file.lines().skip(1).filter(|l| l.starts_with("Non-Abusive\t")).count();
        prop_assert_eq!(dataset_stats(&d), ClassCounts::new(scan_pos, scan_neg));
    }
}
