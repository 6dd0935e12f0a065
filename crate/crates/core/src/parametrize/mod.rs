//! Step 1: trigonometric strand parametrizations realizing a braid diagram.
//!
//! Strand `j` of component `C` (with `s_C` strands) has real part
//! `F_C((t + 2πj)/s_C)` at time `t`, so the component parameter
//! `τ ∈ [0, 2π)` runs once around the whole closed component. Strand `j` of a
//! component starts at its `j`-th orbit lane and, at `t = 2π`, arrives where
//! strand `j + 1` starts.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{components, BraidWord, Permutation};
use crate::trigpoly::{interpolate, Ratio, TrigError, TrigPoly};

/// Sample values are pulled toward the partner lane by this amount for each
/// adjacent crossing.
pub const LANE_BIAS: f64 = 0.125;

/// Two strand values closer than this at a schedule endpoint count as a
/// crossing sitting on the endpoint.
pub const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParametrizeError {
    #[error("empty braid word; stabilize first")]
    EmptyWord,
    #[error("interval {interval}: strand order change does not match the braid letter")]
    PermConditionFailed { interval: usize },
    #[error("two strands meet at schedule endpoint t = {time}")]
    EndpointOnCrossing { time: f64 },
    #[error(transparent)]
    Interp(#[from] TrigError),
}

/// Diagram samples: lane positions of every strand at the schedule points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    /// Crossing times `2π(i + 1/2)/ℓ`.
    pub crossing_times: Vec<f64>,
    /// Sample times `2πi/ℓ`, `i = 0..ℓ`.
    pub sample_times: Vec<f64>,
    /// `positions[p][i]`: value of the strand starting in lane `p` (0-based)
    /// at sample `i`, including the crossing bias.
    pub positions: Vec<Vec<f64>>,
}

/// Lane occupied at every sample by the strand starting in each lane.
fn lane_paths(word: &BraidWord) -> Vec<Vec<usize>> {
    let s = word.strands();
    let mut lane_of: Vec<usize> = (0..s).collect();
    let mut paths = vec![Vec::with_capacity(word.len()); s];
    for letter in word.letters() {
        for (p, path) in paths.iter_mut().enumerate() {
            path.push(lane_of[p]);
        }
        let j = letter.index - 1;
        for lane in lane_of.iter_mut() {
            if *lane == j {
                *lane = j + 1;
            } else if *lane == j + 1 {
                *lane = j;
            }
        }
    }
    paths
}

/// Lane bias at sample `i` for a strand currently in `lane`: toward the
/// partner of the next crossing and of the previous one (cyclically).
fn bias(word: &BraidWord, i: usize, lane: usize) -> f64 {
    let l = word.len();
    let toward = |letter_idx: usize| {
        let j = word.letters()[letter_idx].index - 1;
        if lane == j {
            LANE_BIAS
        } else if lane == j + 1 {
            -LANE_BIAS
        } else {
            0.0
        }
    };
    toward(i) + toward((i + l - 1) % l)
}

pub fn layout_diagram(word: &BraidWord) -> Result<SampleGrid, ParametrizeError> {
    let l = word.len();
    if l == 0 {
        return Err(ParametrizeError::EmptyWord);
    }
    let paths = lane_paths(word);
    let positions = paths
        .iter()
        .map(|path| {
            path.iter()
                .enumerate()
                .map(|(i, &lane)| (lane + 1) as f64 + bias(word, i, lane))
                .collect()
        })
        .collect();
    Ok(SampleGrid {
        crossing_times: (0..l).map(|i| TAU * (i as f64 + 0.5) / l as f64).collect(),
        sample_times: (0..l).map(|i| TAU * i as f64 / l as f64).collect(),
        positions,
    })
}

/// One closure component and its parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPoly {
    /// `F_C`, a real trigonometric polynomial in the component parameter.
    pub f: TrigPoly,
    /// Starting lanes (0-based) of strands `0..s_C`, in orbit order.
    pub lanes: Vec<usize>,
}

impl ComponentPoly {
    pub fn strand_count(&self) -> usize {
        self.lanes.len()
    }
}

/// Strand label `(component, j)` with `j` in `0..s_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StrandId {
    pub component: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrandSystem {
    pub components: Vec<ComponentPoly>,
    /// Interval endpoints; `schedule[i]..schedule[i + 1]` carries letter `i`.
    pub schedule: Vec<f64>,
    /// Total time shift applied since construction (strands now show at `t`
    /// what they showed at `t + time_shift`).
    pub time_shift: f64,
}

impl StrandSystem {
    pub fn strand_count(&self) -> usize {
        self.components.iter().map(ComponentPoly::strand_count).sum()
    }

    /// All strands, component by component.
    pub fn strand_ids(&self) -> Vec<StrandId> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(c, comp)| {
                (0..comp.strand_count()).map(move |index| StrandId {
                    component: c,
                    index,
                })
            })
            .collect()
    }

    /// The strand as a function of `t`: `F_C((t + 2πj)/s_C)`.
    pub fn strand_poly(&self, id: StrandId) -> TrigPoly {
        let comp = &self.components[id.component];
        let sc = comp.strand_count() as i64;
        comp.f
            .shift_scale(Ratio::new(1, sc), TAU * id.index as f64 / sc as f64)
    }

    /// Strand values at `t`, ordered as [`strand_ids`](Self::strand_ids).
    pub fn values_at(&self, t: f64) -> Vec<f64> {
        self.strand_ids()
            .into_iter()
            .map(|id| strand_value(self, id.component, id.index, t))
            .collect()
    }

    /// Replaces `t` by `t + beta` in every strand, moving the schedule by `-beta`.
    pub fn shifted(&self, beta: f64) -> StrandSystem {
        StrandSystem {
            components: self
                .components
                .iter()
                .map(|comp| ComponentPoly {
                    f: comp
                        .f
                        .shift_scale(Ratio::integer(1), beta / comp.strand_count() as f64),
                    lanes: comp.lanes.clone(),
                })
                .collect(),
            schedule: self.schedule.iter().map(|t| t - beta).collect(),
            time_shift: self.time_shift + beta,
        }
    }
}

/// `F_C((t + 2πj)/s_C)`; `j` is taken modulo `s_C`, so `j = s_C` is strand 0.
pub fn strand_value(system: &StrandSystem, component: usize, j: usize, t: f64) -> f64 {
    let comp = &system.components[component];
    let sc = comp.strand_count() as f64;
    comp.f.eval_re((t + TAU * (j % comp.strand_count()) as f64) / sc)
}

/// Interpolates each component's orbit samples.
pub fn build_f(word: &BraidWord) -> Result<StrandSystem, ParametrizeError> {
    let grid = layout_diagram(word)?;
    let l = word.len();
    let mut comps = Vec::new();
    for comp in components(word) {
        let sc = comp.strand_count();
        let mut nodes = Vec::with_capacity(sc * l);
        let mut values = Vec::with_capacity(sc * l);
        for (j, &lane) in comp.lanes.iter().enumerate() {
            for (i, &t) in grid.sample_times.iter().enumerate() {
                nodes.push((t + TAU * j as f64) / sc as f64);
                values.push(Complex64::new(grid.positions[lane][i], 0.0));
            }
        }
        let f = interpolate(&nodes, &values)?;
        log::debug!(
            "component {:?}: {} samples, degree {}",
            comp.lanes,
            nodes.len(),
            f.degree()
        );
        comps.push(ComponentPoly {
            f,
            lanes: comp.lanes,
        });
    }
    let system = StrandSystem {
        components: comps,
        schedule: (0..=l).map(|i| TAU * i as f64 / l as f64).collect(),
        time_shift: 0.0,
    };
    let report = check_perm_condition(&system, word)?;
    if let Some(bad) = report.intervals.iter().find(|c| !c.ok) {
        return Err(ParametrizeError::PermConditionFailed {
            interval: bad.interval,
        });
    }
    Ok(system)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub interval: usize,
    /// Expected transposition of Re-ranks (1-based generator index).
    pub generator: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermReport {
    pub ok: bool,
    pub intervals: Vec<IntervalCheck>,
}

/// `rank[i]` = Re-rank of strand `i` among `values`.
fn ranks(values: &[f64], time: f64) -> Result<Vec<usize>, ParametrizeError> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    for w in order.windows(2) {
        if values[w[1]] - values[w[0]] <= ENDPOINT_TOL {
            return Err(ParametrizeError::EndpointOnCrossing { time });
        }
    }
    let mut rank = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    Ok(rank)
}

/// Checks that over every schedule interval the Re-order of the strands
/// changes by exactly the transposition of that interval's letter.
pub fn check_perm_condition(
    system: &StrandSystem,
    word: &BraidWord,
) -> Result<PermReport, ParametrizeError> {
    let s = system.strand_count();
    let mut intervals = Vec::with_capacity(word.len());
    let mut prev = ranks(&system.values_at(system.schedule[0]), system.schedule[0])?;
    for (i, letter) in word.letters().iter().enumerate() {
        let t1 = system.schedule[i + 1];
        let next = ranks(&system.values_at(t1), t1)?;
        // lane permutation: strand at rank prev[x] moves to rank next[x]
        let mut images = vec![0; s];
        for x in 0..s {
            images[prev[x]] = next[x];
        }
        let got = Permutation::from_images(images).expect("ranks are a bijection");
        let want = Permutation::transposition(s, letter.index - 1, letter.index);
        intervals.push(IntervalCheck {
            interval: i,
            generator: letter.index,
            ok: got == want,
        });
        prev = next;
    }
    let ok = !word.is_empty() && intervals.iter().all(|c| c.ok);
    Ok(PermReport { ok, intervals })
}
