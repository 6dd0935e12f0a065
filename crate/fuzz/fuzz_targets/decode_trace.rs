//! A trace that decodes must also render.

#![no_main]

use libfuzzer_sys::fuzz_target;
use linkforge::pipeline::{render_plots, PipelineTrace};

fuzz_target!(|data: &str| {
    if let Ok(trace) = PipelineTrace::from_json(data) {
        let _ = render_plots(&trace);
    }
});
