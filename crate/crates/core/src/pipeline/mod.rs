//! End-to-end construction and verification with a full trace of the
//! choices made along the way.

mod plot;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::{assemble, AssembleError, CrossingDatum, MixedPoly};
use crate::braid::{markov_stabilize, BraidError, BraidWord};
use crate::genericity::{make_generic, GenericityError, GenericityReport};
use crate::parametrize::{build_f, layout_diagram, strand_value, ParametrizeError, StrandSystem};
use crate::trigpoly::TrigPoly;
use crate::verifier::{track_braid, verify, TrackedCrossing, VerificationReport, VerifyError, VerifyOptions};

pub use plot::{render_plots, PLOT_FILES};

pub const TRACE_VERSION: u32 = 1;
/// Samples per strand kept in the stored trajectory.
const TRAJECTORY_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("braid: {0}")]
    Braid(#[from] BraidError),
    #[error("parametrize: {0}")]
    Parametrize(#[from] ParametrizeError),
    #[error("genericity: {0}")]
    Genericity(#[from] GenericityError),
    #[error("assemble: {0}")]
    Assemble(#[from] AssembleError),
    #[error("verifier: {0}")]
    Verify(#[from] VerifyError),
    #[error("trace: {0}")]
    Trace(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub lanes: Vec<usize>,
    pub degree: f64,
    /// `⌊s_C ℓ / 2⌋`, or 0 for a strand whose diagram samples are constant.
    pub expected_degree: f64,
    /// Largest deviation from the diagram samples.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1Trace {
    pub sample_times: Vec<f64>,
    pub crossing_times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub components: Vec<ComponentSummary>,
    pub initial_system: StrandSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub k: u32,
    pub m: u32,
    pub degree: u32,
    pub degree_u: u32,
    pub g_degree_t: i64,
    pub crossing_data: Vec<CrossingDatum>,
    pub a_tilde: TrigPoly,
    /// Largest violation of the Hermite conditions at the nodes.
    pub star_residual: f64,
    pub a_degree: i64,
    pub monomials: usize,
}

/// Tracked roots at the certified radius, in scaled coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub r: f64,
    pub times: Vec<f64>,
    /// `re[j][i]`: strand `j` at `times[i]`.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub crossings: Vec<TrackedCrossing>,
}

/// Where each crossing of the singular braid resolved: `half[k]` is 0 for
/// `t_k/2` and 1 for `t_k/2 + π` on the `f`-circle, `None` when no
/// extracted crossing is near either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfReport {
    pub half: Vec<Option<u8>>,
    /// Every crossing resolved exactly once, with no extra crossings.
    pub one_per_crossing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub version: u32,
    pub input: BraidWord,
    /// The word actually realized, after stabilization.
    pub word: BraidWord,
    pub stabilized: bool,
    pub step1: Option<Step1Trace>,
    pub genericity: GenericityReport,
    pub system: StrandSystem,
    pub construction: ConstructionSummary,
    pub verification: Option<VerificationReport>,
    pub trajectory: Option<Trajectory>,
    pub halves: Option<HalfReport>,
}

impl PipelineTrace {
    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self)
    }

    /// Decodes and checks the internal consistency the plotting code relies on.
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let trace: PipelineTrace =
            serde_json::from_str(text).map_err(|e| PipelineError::Trace(e.to_string()))?;
        trace.validate()?;
        Ok(trace)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Trace(m.to_string()));
        if self.version != TRACE_VERSION {
            return bad("unsupported trace version");
        }
        let s = self.word.strands();
        if self.system.strand_count() != s || self.system.components.iter().any(|c| c.lanes.is_empty()) {
            return bad("strand system does not match the word");
        }
        if self.system.components.iter().flat_map(|c| &c.lanes).any(|&l| l >= s) {
            return bad("lane out of range");
        }
        if let Some(tr) = &self.trajectory {
            let n = tr.times.len();
            if tr.re.len() != s
                || tr.im.len() != s
                || tr.re.iter().chain(&tr.im).any(|v| v.len() != n)
                || tr.crossings.iter().any(|c| c.pair.0 >= s || c.pair.1 >= s)
            {
                return bad("trajectory shape does not match the word");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub poly: MixedPoly,
    pub trace: PipelineTrace,
}

/// A word the construction accepts: at least two strands and one letter.
pub fn stabilize(word: &BraidWord) -> (BraidWord, bool) {
    if word.strands() < 2 || word.is_empty() {
        (markov_stabilize(word), true)
    } else {
        (word.clone(), false)
    }
}

fn step1_trace(word: &BraidWord, system: &StrandSystem) -> Result<Step1Trace, PipelineError> {
    let grid = layout_diagram(word)?;
    let l = word.len();
    let components = system
        .components
        .iter()
        .enumerate()
        .map(|(c, comp)| {
            let mut residual = 0.0f64;
            for (j, &lane) in comp.lanes.iter().enumerate() {
                for (i, &t) in grid.sample_times.iter().enumerate() {
                    let v = strand_value(system, c, j, t);
                    residual = residual.max((v - grid.positions[lane][i]).abs());
                }
            }
            let first = grid.positions[comp.lanes[0]][0];
            let constant = comp
                .lanes
                .iter()
                .all(|&lane| grid.positions[lane].iter().all(|&p| p == first));
            ComponentSummary {
                lanes: comp.lanes.clone(),
                degree: comp.f.degree(),
                expected_degree: if constant {
                    0.0
                } else {
                    ((comp.strand_count() * l) / 2) as f64
                },
                residual,
            }
        })
        .collect();
    Ok(Step1Trace {
        sample_times: grid.sample_times,
        crossing_times: grid.crossing_times,
        positions: grid.positions,
        components,
        initial_system: system.clone(),
    })
}

/// Steps 1 to 6; the returned trace has no verification yet.
pub fn build(input: &BraidWord) -> Result<BuildOutput, PipelineError> {
    let (word, stabilized) = stabilize(input);
    if stabilized {
        log::info!("stabilized {input} on {} strands to {word} on {}", input.strands(), word.strands());
    }
    let system = build_f(&word)?;
    let step1 = step1_trace(&word, &system)?;
    let generic = make_generic(&system, &word)?;
    let con = assemble(&generic.system, &generic.b_sing, &generic.report.signs)?;
    let deriv = con.a_tilde.derivative();
    let star_residual = con
        .data
        .iter()
        .map(|d| {
            let w = d.y / (d.t / 2.0).cos();
            let v = con.a_tilde.evaluate(d.t);
            let dv = deriv.evaluate(d.t);
            let dw = num_complex::Complex64::new(0.0, d.z as f64 * w);
            (v - w).norm().max((dv - dw).norm())
        })
        .fold(0.0, f64::max);
    let construction = ConstructionSummary {
        k: con.k,
        m: con.m,
        degree: con.f.total_degree(),
        degree_u: con.f.deg_u(),
        g_degree_t: con.g.degree_t(),
        crossing_data: con.data.clone(),
        a_tilde: con.a_tilde.clone(),
        star_residual,
        a_degree: con.a.max_abs_freq(),
        monomials: con.f.len(),
    };
    let trace = PipelineTrace {
        version: TRACE_VERSION,
        input: input.clone(),
        word,
        stabilized,
        step1: Some(step1),
        genericity: generic.report,
        system: generic.system,
        construction,
        verification: None,
        trajectory: None,
        halves: None,
    };
    Ok(BuildOutput { poly: con.f, trace })
}

fn trajectory(f: &MixedPoly, r: f64, samples: usize) -> Result<Trajectory, VerifyError> {
    let tb = track_braid(f, r, samples)?;
    let n = tb.times.len();
    let stride = n.div_ceil(TRAJECTORY_SAMPLES).max(1);
    let keep: Vec<usize> = (0..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
    let mut keep = keep;
    keep.dedup();
    let s = tb.strand_count();
    Ok(Trajectory {
        r,
        times: keep.iter().map(|&i| tb.times[i]).collect(),
        re: (0..s).map(|j| keep.iter().map(|&i| tb.roots[i][j].re).collect()).collect(),
        im: (0..s).map(|j| keep.iter().map(|&i| tb.roots[i][j].im).collect()).collect(),
        crossings: tb.crossings,
    })
}

/// Matches extracted crossings to the two copies `t_k/2`, `t_k/2 + π` of
/// each singular crossing.
pub fn crossing_halves(b_sing_times: &[f64], extracted: &[TrackedCrossing]) -> HalfReport {
    let dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let n = b_sing_times.len();
    let window = if n > 0 { PI / (2.0 * n as f64) } else { PI };
    let mut hits = vec![Vec::new(); n];
    let mut stray = 0;
    for c in extracted {
        let best = b_sing_times
            .iter()
            .enumerate()
            .flat_map(|(k, &t)| [(k, 0u8, dist(c.t, t / 2.0)), (k, 1u8, dist(c.t, t / 2.0 + PI))])
            .min_by(|a, b| a.2.total_cmp(&b.2));
        match best {
            Some((k, h, d)) if d < window => hits[k].push(h),
            _ => stray += 1,
        }
    }
    HalfReport {
        one_per_crossing: stray == 0 && hits.iter().all(|h| h.len() == 1),
        half: hits.iter().map(|h| if h.len() == 1 { Some(h[0]) } else { None }).collect(),
    }
}

/// Build followed by verification against the realized word.
pub fn build_and_verify(input: &BraidWord, opts: &VerifyOptions) -> Result<BuildOutput, PipelineError> {
    let mut out = build(input)?;
    let report = verify(&out.poly, &out.trace.word, opts)?;
    if let Some((r, _)) = report.link.certified {
        let tr = trajectory(&out.poly, r, opts.samples)?;
        out.trace.halves = Some(crossing_halves(&out.trace.genericity.b_sing.crossing_times, &tr.crossings));
        out.trace.trajectory = Some(tr);
    }
    out.trace.verification = Some(report);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilization_rule() {
        let empty = BraidWord::new(1, Vec::new()).unwrap();
        let (w, st) = stabilize(&empty);
        assert!(st);
        assert_eq!(w, BraidWord::from_signed(2, &[1]).unwrap());
        let hopf = BraidWord::from_signed(2, &[1, 1]).unwrap();
        assert_eq!(stabilize(&hopf), (hopf.clone(), false));
    }

    #[test]
    fn hopf_end_to_end() {
        let word = BraidWord::from_signed(2, &[1, 1]).unwrap();
        let out = build_and_verify(&word, &VerifyOptions::default()).unwrap();
        let rep = out.trace.verification.as_ref().unwrap();
        assert!(rep.passed, "{}", rep.to_json());
        let halves = out.trace.halves.as_ref().unwrap();
        assert!(halves.one_per_crossing, "{halves:?}");
        let text = out.trace.to_json();
        let back = PipelineTrace::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn unknot_input_is_stabilized() {
        let word = BraidWord::new(1, Vec::new()).unwrap();
        let out = build_and_verify(&word, &VerifyOptions::default()).unwrap();
        assert!(out.trace.stabilized);
        assert_eq!(out.trace.word.strands(), 2);
        assert!(out.trace.verification.unwrap().passed);
    }
}
