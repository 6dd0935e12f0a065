//! The three text decoders never panic and round-trip what they accept. The
//! same seeds are checked in under `fuzz/corpus`.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;

use linkforge::assemble::MixedPoly;
use linkforge::braid::parse_braid_word;
use linkforge::pipeline::{render_plots, PipelineTrace};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

fn check_braid(data: &[u8]) {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(word) = parse_braid_word(text, n as usize) {
        assert_eq!(parse_braid_word(&word.to_text(), word.strands()).unwrap(), word);
    }
}

fn check_poly(text: &str) {
    if let Ok(p) = MixedPoly::from_json(text) {
        assert_eq!(MixedPoly::from_json(&p.to_json()).unwrap(), p);
    }
}

fn check_trace(text: &str) {
    if let Ok(trace) = PipelineTrace::from_json(text) {
        assert_eq!(render_plots(&trace).len(), 3);
        assert_eq!(PipelineTrace::from_json(&trace.to_json()).unwrap(), trace);
    }
}

#[test]
fn seed_corpora_decode_as_labelled() {
    let braids = seeds("parse_braid");
    assert!(braids.len() >= 4);
    braids.iter().for_each(|d| check_braid(d));

    let polys = seeds("decode_mixed_poly");
    let ok = polys
        .iter()
        .filter(|d| MixedPoly::from_json(std::str::from_utf8(d).unwrap()).is_ok())
        .count();
    assert_eq!(ok, polys.len() - 1, "only the zero-degree seed is invalid");
    polys.iter().for_each(|d| check_poly(std::str::from_utf8(d).unwrap()));

    let traces = seeds("decode_trace");
    let ok = traces
        .iter()
        .filter(|d| PipelineTrace::from_json(std::str::from_utf8(d).unwrap()).is_ok())
        .count();
    assert_eq!(ok, traces.len() - 1, "only the bad-version seed is invalid");
    traces.iter().for_each(|d| check_trace(std::str::from_utf8(d).unwrap()));
}

/// Byte-level damage to a valid seed: a deleted span and an overwritten byte.
fn mutate(seed: &[u8], cut: usize, len: usize, at: usize, byte: u8) -> String {
    let mut v = seed.to_vec();
    if !v.is_empty() {
        let a = cut % v.len();
        let b = (a + len).min(v.len());
        v.drain(a..b);
    }
    if !v.is_empty() {
        let i = at % v.len();
        v[i] = byte;
    }
    String::from_utf8_lossy(&v).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn braid_text_never_panics(n in any::<u8>(), text in "[-0-9 \t\n+a-z]{0,40}") {
        let mut data = vec![n];
        data.extend_from_slice(text.as_bytes());
        check_braid(&data);
    }

    #[test]
    fn arbitrary_json_never_panics(text in "[{}\\[\\]:,\"0-9a-z.eE+-]{0,80}") {
        check_poly(&text);
        check_trace(&text);
    }

    #[test]
    fn damaged_poly_never_panics(cut in any::<usize>(), len in 0usize..40, at in any::<usize>(), byte in any::<u8>()) {
        for seed in seeds("decode_mixed_poly") {
            check_poly(&mutate(&seed, cut, len, at, byte));
        }
    }

    #[test]
    fn damaged_trace_never_panics(cut in any::<usize>(), len in 0usize..40, at in any::<usize>(), byte in any::<u8>()) {
        for seed in seeds("decode_trace") {
            check_trace(&mutate(&seed, cut, len, at, byte));
        }
    }
}
