//! Step 2: make every crossing of the singular braid a transverse crossing of
//! exactly two strands, then attach crossing signs.
//!
//! Trials follow fixed halving sequences. A trial is kept only if the Re-order
//! of the strands at every schedule endpoint is unchanged (so the interval
//! permutations survive) and the [`Metrics`] vector decreases
//! lexicographically, which bounds the number of rounds.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidWord, Sign, SingularBraidWord};
use crate::parametrize::{
    check_perm_condition, ComponentPoly, ParametrizeError, StrandId, StrandSystem,
};
use crate::trigpoly::{real_roots_in, real_roots_on_circle, RootKind, TrigError, TrigPoly};

/// Pair roots closer than this in `t` are merged into one event.
pub const TAU_MERGE: f64 = 1e-7;
/// Distinct events closer than this in `t` are pulled apart.
pub const TAU_SEPARATE: f64 = 1e-3;
/// Halving sequences stop below this magnitude.
pub const EPS_FLOOR: f64 = 1e-12;
/// A strand difference with all coefficients below this is identically zero.
pub const IDENTICAL_TOL: f64 = 1e-12;
/// Crossing times kept at least this far from π.
pub const PI_MARGIN: f64 = 1e-6;
const MAX_ROUNDS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenericityError {
    #[error("strands {0:?} and {1:?} coincide identically")]
    IdenticalStrands(StrandId, StrandId),
    #[error("{pass}: no admissible perturbation above {floor:e}")]
    BudgetExhausted { pass: &'static str, floor: f64 },
    #[error("{0}")]
    NotApplicable(String),
    #[error("crossing at t = {t} cannot be assigned to a schedule interval")]
    UnresolvableInterval { t: f64 },
    #[error("non-generic events remain after {0} rounds")]
    RoundLimit(usize),
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Parametrize(#[from] ParametrizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TransversePair,
    Tangential,
    MultiStrand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub t: f64,
    /// Common strand value at `t`.
    pub value: f64,
    /// Sorted, at least two.
    pub participants: Vec<StrandId>,
    pub kind: EventKind,
    /// Participant pairs whose contact is tangential.
    pub tangential_pairs: Vec<(StrandId, StrandId)>,
}

impl CrossingEvent {
    pub fn is_generic(&self) -> bool {
        self.kind == EventKind::TransversePair
    }

    fn components(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.participants.iter().map(|p| p.component).collect();
        c.dedup();
        c
    }
}

struct Detection {
    events: Vec<CrossingEvent>,
    identical: Vec<(StrandId, StrandId)>,
}

fn detect(system: &StrandSystem) -> Result<Detection, TrigError> {
    let ids = system.strand_ids();
    let polys: Vec<TrigPoly> = ids.iter().map(|&id| system.strand_poly(id)).collect();
    let mut roots: Vec<(f64, usize, usize, bool)> = Vec::new();
    let mut identical = Vec::new();
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            let d = polys[a].sub(&polys[b]);
            let scale = 1.0 + polys[a].max_coeff_abs().max(polys[b].max_coeff_abs());
            if d.max_coeff_abs() <= IDENTICAL_TOL * scale {
                identical.push((ids[a], ids[b]));
                continue;
            }
            let found = if d.base_den() == 1 {
                real_roots_on_circle(&d)?
            } else {
                real_roots_in(&d, 0.0, TAU)?
            };
            for r in found {
                roots.push((r.t, a, b, r.kind == RootKind::Tangential));
            }
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut events = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let mut j = i + 1;
        while j < roots.len() && roots[j].0 - roots[j - 1].0 <= TAU_MERGE {
            j += 1;
        }
        events.extend(merge_cluster(&roots[i..j], &ids, system));
        i = j;
    }
    events.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(Detection { events, identical })
}

/// Splits a time cluster of pair roots into events by shared strands.
fn merge_cluster(
    cluster: &[(f64, usize, usize, bool)],
    ids: &[StrandId],
    system: &StrandSystem,
) -> Vec<CrossingEvent> {
    let mut group: BTreeMap<usize, usize> = BTreeMap::new();
    let mut parent: Vec<usize> = (0..cluster.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (k, &(_, a, b, _)) in cluster.iter().enumerate() {
        for s in [a, b] {
            match group.get(&s) {
                Some(&other) => {
                    let (ra, rb) = (find(&mut parent, k), find(&mut parent, other));
                    parent[ra] = rb;
                }
                None => {
                    group.insert(s, k);
                }
            }
        }
    }
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..cluster.len() {
        let r = find(&mut parent, k);
        buckets.entry(r).or_default().push(k);
    }
    buckets
        .values()
        .map(|members| {
            let mut strands: Vec<usize> = members
                .iter()
                .flat_map(|&k| [cluster[k].1, cluster[k].2])
                .collect();
            strands.sort_unstable();
            strands.dedup();
            let t = members.iter().map(|&k| cluster[k].0).sum::<f64>() / members.len() as f64;
            let tangential_pairs: Vec<(StrandId, StrandId)> = members
                .iter()
                .filter(|&&k| cluster[k].3)
                .map(|&k| (ids[cluster[k].1], ids[cluster[k].2]))
                .collect();
            let participants: Vec<StrandId> = strands.iter().map(|&s| ids[s]).collect();
            let value = participants
                .iter()
                .map(|id| crate::parametrize::strand_value(system, id.component, id.index, t))
                .sum::<f64>()
                / participants.len() as f64;
            let kind = if !tangential_pairs.is_empty() {
                EventKind::Tangential
            } else if participants.len() > 2 {
                EventKind::MultiStrand
            } else {
                EventKind::TransversePair
            };
            CrossingEvent {
                t,
                value,
                participants,
                kind,
                tangential_pairs,
            }
        })
        .collect()
}

/// All crossing events in `t ∈ [0, 2π)`, sorted by time.
pub fn find_crossings(system: &StrandSystem) -> Result<Vec<CrossingEvent>, GenericityError> {
    let det = detect(system)?;
    if let Some(&(a, b)) = det.identical.first() {
        return Err(GenericityError::IdenticalStrands(a, b));
    }
    Ok(det.events)
}

/// Non-genericity counts in pass priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Metrics {
    pub identical_pairs: usize,
    pub inter_component_tangencies: usize,
    pub mixed_multi_strand: usize,
    pub tangencies: usize,
    /// Sum of participant counts over multi-strand events.
    pub multi_strand_participants: usize,
    /// Consecutive distinct events closer than [`TAU_SEPARATE`].
    pub close_pairs: usize,
}

impl Metrics {
    fn as_array(&self) -> [usize; 6] {
        [
            self.identical_pairs,
            self.inter_component_tangencies,
            self.mixed_multi_strand,
            self.tangencies,
            self.multi_strand_participants,
            self.close_pairs,
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|&x| x == 0)
    }

    /// `true` iff entry `target` strictly decreases and no earlier entry grows.
    fn improves_on(&self, old: &Metrics, target: usize) -> bool {
        let (n, o) = (self.as_array(), old.as_array());
        (0..target).all(|i| n[i] <= o[i]) && n[target] < o[target]
    }
}

fn close_pairs(events: &[CrossingEvent]) -> usize {
    let n = events.len();
    if n < 2 {
        return 0;
    }
    (0..n)
        .filter(|&i| {
            let gap = if i + 1 < n {
                events[i + 1].t - events[i].t
            } else {
                events[0].t + TAU - events[n - 1].t
            };
            gap < TAU_SEPARATE
        })
        .count()
}

fn metrics_of(det: &Detection) -> Metrics {
    let mut m = Metrics {
        identical_pairs: det.identical.len(),
        inter_component_tangencies: 0,
        mixed_multi_strand: 0,
        tangencies: 0,
        multi_strand_participants: 0,
        close_pairs: close_pairs(&det.events),
    };
    for e in &det.events {
        m.tangencies += e.tangential_pairs.len();
        m.inter_component_tangencies += e
            .tangential_pairs
            .iter()
            .filter(|(a, b)| a.component != b.component)
            .count();
        if e.participants.len() > 2 {
            m.multi_strand_participants += e.participants.len();
            if e.components().len() > 1 {
                m.mixed_multi_strand += 1;
            }
        }
    }
    m
}

pub fn metrics(system: &StrandSystem) -> Result<Metrics, GenericityError> {
    Ok(metrics_of(&detect(system)?))
}

/// Strictly ordered strand pairs at each schedule endpoint.
fn endpoint_orders(system: &StrandSystem) -> Vec<Vec<(usize, usize)>> {
    system
        .schedule
        .iter()
        .map(|&t| {
            let v = system.values_at(t);
            let mut pairs = Vec::new();
            for a in 0..v.len() {
                for b in 0..v.len() {
                    if v[b] - v[a] > crate::parametrize::ENDPOINT_TOL {
                        pairs.push((a, b));
                    }
                }
            }
            pairs
        })
        .collect()
}

fn preserves_endpoints(base: &[Vec<(usize, usize)>], cand: &StrandSystem) -> bool {
    let now = endpoint_orders(cand);
    base.iter().zip(&now).all(|(b, n)| b.iter().all(|p| n.contains(p)))
}

/// Smallest strand gap over the schedule endpoints (ties excluded).
fn endpoint_gap(system: &StrandSystem) -> f64 {
    let mut gap = f64::INFINITY;
    for &t in &system.schedule {
        let mut v = system.values_at(t);
        v.sort_by(f64::total_cmp);
        for w in v.windows(2) {
            let d = w[1] - w[0];
            if d > crate::parametrize::ENDPOINT_TOL {
                gap = gap.min(d);
            }
        }
    }
    if gap.is_finite() {
        gap
    } else {
        1.0
    }
}

fn halving(start: f64) -> impl Iterator<Item = f64> {
    std::iter::successors(Some(start), |e| Some(e / 2.0)).take_while(|e| *e >= EPS_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Constant,
    Phase,
    Tangency,
    MultiStrand,
    Separation,
    TimeShift,
}

/// One accepted modification. For bumps `F_C += magnitude·cos(τ − phase)`;
/// for phase shifts `F_C(τ) ← F_C(τ + magnitude)`; for constants
/// `F_C += magnitude`; the time shift applies to all components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub component: Option<usize>,
    pub magnitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy)]
enum Edit {
    Constant(f64),
    Phase(f64),
    Bump(f64, f64),
}

fn apply(system: &StrandSystem, c: usize, edit: Edit) -> StrandSystem {
    let mut out = system.clone();
    let comp = &system.components[c];
    let f = match edit {
        Edit::Constant(e) => comp.f.add(&TrigPoly::constant(e)),
        Edit::Phase(e) => comp.f.shift_scale(crate::trigpoly::Ratio::integer(1), e),
        Edit::Bump(e, phi) => comp
            .f
            .add(&TrigPoly::cos_sin(e * phi.cos(), e * phi.sin(), 1, 1)),
    };
    out.components[c] = ComponentPoly {
        f,
        lanes: comp.lanes.clone(),
    };
    out
}

fn record(kind: PerturbationKind, c: usize, edit: Edit) -> Perturbation {
    let (magnitude, phase) = match edit {
        Edit::Constant(e) | Edit::Phase(e) => (e, 0.0),
        Edit::Bump(e, phi) => (e, phi),
    };
    Perturbation {
        kind,
        component: Some(c),
        magnitude,
        phase,
    }
}

/// Tries `edits` for component `c` in order; keeps the first that preserves
/// the endpoint orders and satisfies `accept`.
fn first_admissible(
    system: &StrandSystem,
    c: usize,
    edits: impl IntoIterator<Item = Edit>,
    accept: impl Fn(&Metrics, &Detection) -> bool,
) -> Result<Option<(StrandSystem, Edit, Metrics)>, GenericityError> {
    let base = endpoint_orders(system);
    for edit in edits {
        let cand = apply(system, c, edit);
        if !preserves_endpoints(&base, &cand) {
            continue;
        }
        let det = detect(&cand)?;
        let m = metrics_of(&det);
        if accept(&m, &det) {
            return Ok(Some((cand, edit, m)));
        }
    }
    Ok(None)
}

fn max_derivative(f: &TrigPoly) -> f64 {
    let d = f.derivative();
    d.coeffs().values().map(|c| c.norm()).sum::<f64>().max(1e-300)
}

/// Offsets every constant component and every component involved in an
/// identical pair or an inter-component tangency, one component at a time,
/// with pairwise distinct offsets.
pub fn perturb_constants(
    system: &StrandSystem,
) -> Result<(StrandSystem, Vec<Perturbation>), GenericityError> {
    let mut sys = system.clone();
    let mut log = Vec::new();
    let mut used: Vec<f64> = Vec::new();
    let det = detect(&sys)?;
    let mut targets: Vec<usize> = (0..sys.components.len())
        .filter(|&c| sys.components[c].f.max_abs_freq() == 0)
        .collect();
    for (a, b) in &det.identical {
        targets.extend([a.component, b.component]);
    }
    for e in &det.events {
        for (a, b) in &e.tangential_pairs {
            if a.component != b.component {
                targets.extend([a.component, b.component]);
            }
        }
    }
    targets.sort_unstable();
    targets.dedup();

    for c in targets {
        let cur = metrics_of(&detect(&sys)?);
        let involved = |det: &Detection| {
            det.identical
                .iter()
                .any(|(a, b)| a.component == c || b.component == c)
                || det.events.iter().any(|e| {
                    e.tangential_pairs.iter().any(|(a, b)| {
                        a.component != b.component && (a.component == c || b.component == c)
                    })
                })
        };
        if !involved(&detect(&sys)?) && sys.components[c].f.max_abs_freq() != 0 {
            continue;
        }
        let start = endpoint_gap(&sys) / 8.0;
        let edits: Vec<Edit> = halving(start)
            .flat_map(|e| [e, -e])
            .filter(|e| used.iter().all(|u| (u - e).abs() > EPS_FLOOR))
            .map(Edit::Constant)
            .collect();
        let found = first_admissible(&sys, c, edits, |m, det| !involved(det) && *m <= cur)?;
        let Some((next, edit, _)) = found else {
            return Err(GenericityError::BudgetExhausted {
                pass: "constants",
                floor: EPS_FLOOR,
            });
        };
        if let Edit::Constant(e) = edit {
            used.push(e);
        }
        log.push(record(PerturbationKind::Constant, c, edit));
        sys = next;
    }
    Ok((sys, log))
}

/// Phase-shifts components until every multi-strand event involves a single
/// component.
pub fn perturb_phase(
    system: &StrandSystem,
) -> Result<(StrandSystem, Vec<Perturbation>), GenericityError> {
    let mut sys = system.clone();
    let mut log = Vec::new();
    let mut used: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for _ in 0..MAX_ROUNDS {
        let det = detect(&sys)?;
        let cur = metrics_of(&det);
        let Some(event) = det
            .events
            .iter()
            .find(|e| e.participants.len() > 2 && e.components().len() > 1)
        else {
            return Ok((sys, log));
        };
        let mut done = false;
        for &c in event.components().iter().rev() {
            let start = endpoint_gap(&sys) / 8.0 / max_derivative(&sys.components[c].f);
            let taken = used.get(&c).cloned().unwrap_or_default();
            let edits: Vec<Edit> = halving(start)
                .flat_map(|e| [e, -e])
                .filter(|e| taken.iter().all(|u| (u - e).abs() > EPS_FLOOR))
                .map(Edit::Phase)
                .collect();
            if let Some((next, edit, _)) =
                first_admissible(&sys, c, edits, |m, _| m.improves_on(&cur, 2))?
            {
                if let Edit::Phase(e) = edit {
                    used.entry(c).or_default().push(e);
                }
                log.push(record(PerturbationKind::Phase, c, edit));
                sys = next;
                done = true;
                break;
            }
        }
        if !done {
            return Err(GenericityError::BudgetExhausted {
                pass: "phase",
                floor: EPS_FLOOR,
            });
        }
    }
    Err(GenericityError::RoundLimit(MAX_ROUNDS))
}

/// Component-parameter value of strand `(C, j)` at time `t`.
fn tau_of(system: &StrandSystem, id: StrandId, t: f64) -> f64 {
    let sc = system.components[id.component].strand_count() as f64;
    (t + TAU * id.index as f64) / sc
}

/// Removes one tangential contact between two strands of one component by
/// adding `ε cos(τ − τ_j)` to `F_C`, with `ε` pushing the strands apart.
pub fn perturb_tangency(
    system: &StrandSystem,
    event: &CrossingEvent,
) -> Result<(StrandSystem, Perturbation), GenericityError> {
    let Some(&(a, b)) = event.tangential_pairs.first() else {
        return Err(GenericityError::NotApplicable(
            "event has no tangential contact".into(),
        ));
    };
    if a.component != b.component {
        return Err(GenericityError::NotApplicable(
            "tangency between different components".into(),
        ));
    }
    let c = a.component;
    let d = system.strand_poly(a).sub(&system.strand_poly(b));
    let h = 1e-3;
    let side = d.eval_re(event.t - h) + d.eval_re(event.t + h);
    let sign = if side >= 0.0 { 1.0 } else { -1.0 };
    let phi = tau_of(system, a, event.t);
    let cur = metrics(system)?;
    let start = endpoint_gap(system) / 8.0;
    let edits: Vec<Edit> = halving(start).map(|e| Edit::Bump(sign * e, phi)).collect();
    match first_admissible(system, c, edits, |m, _| m.improves_on(&cur, 3))? {
        Some((next, edit, _)) => Ok((next, record(PerturbationKind::Tangency, c, edit))),
        None => Err(GenericityError::BudgetExhausted {
            pass: "tangency",
            floor: EPS_FLOOR,
        }),
    }
}

/// Phase making `cos(τ_j − φ) = cos(τ_j' − φ)` for the two designated
/// strands at time `t`: the midpoint of their component parameters.
pub fn multistrand_phase(system: &StrandSystem, a: StrandId, b: StrandId, t: f64) -> f64 {
    0.5 * (tau_of(system, a, t) + tau_of(system, b, t))
}

/// Splits a single-component multi-strand event: the two lowest strands keep
/// crossing at `t` while the others move off.
pub fn perturb_multistrand(
    system: &StrandSystem,
    event: &CrossingEvent,
) -> Result<(StrandSystem, Perturbation), GenericityError> {
    if event.participants.len() < 3 || event.components().len() != 1 {
        return Err(GenericityError::NotApplicable(
            "event is not a single-component multi-strand event".into(),
        ));
    }
    let cur = metrics(system)?;
    if cur.tangencies > 0 {
        return Err(GenericityError::NotApplicable(
            "tangencies must be removed first".into(),
        ));
    }
    let (a, b) = (event.participants[0], event.participants[1]);
    let c = a.component;
    let phi = multistrand_phase(system, a, b, event.t);
    let start = endpoint_gap(system) / 8.0;
    let edits: Vec<Edit> = halving(start)
        .flat_map(|e| [Edit::Bump(e, phi), Edit::Bump(-e, phi)])
        .collect();
    match first_admissible(system, c, edits, |m, _| m.improves_on(&cur, 4))? {
        Some((next, edit, _)) => Ok((next, record(PerturbationKind::MultiStrand, c, edit))),
        None => Err(GenericityError::BudgetExhausted {
            pass: "multi-strand",
            floor: EPS_FLOOR,
        }),
    }
}

/// Pulls apart distinct events that occur at nearly the same time.
fn separate(system: &StrandSystem) -> Result<(StrandSystem, Perturbation), GenericityError> {
    let det = detect(system)?;
    let cur = metrics_of(&det);
    let n = det.events.len();
    let i = (0..n)
        .find(|&i| {
            let next = (i + 1) % n;
            let gap = (det.events[next].t - det.events[i].t).rem_euclid(TAU);
            gap < TAU_SEPARATE
        })
        .ok_or_else(|| GenericityError::NotApplicable("no close events".into()))?;
    let pair = [&det.events[i], &det.events[(i + 1) % n]];
    let mut comps: Vec<usize> = pair.iter().flat_map(|e| e.components()).collect();
    comps.sort_unstable();
    comps.dedup();
    let gap = endpoint_gap(system) / 8.0;
    for &c in comps.iter().rev() {
        let f = &system.components[c].f;
        let anchor = tau_of(system, pair[0].participants[0], pair[0].t);
        let phase_start = gap / max_derivative(f);
        let mut edits = Vec::new();
        for k in 0..40 {
            let e = gap / f64::powi(2.0, k);
            let p = phase_start / f64::powi(2.0, k);
            if e < EPS_FLOOR {
                break;
            }
            if f.max_abs_freq() == 0 {
                edits.extend([Edit::Constant(e), Edit::Constant(-e)]);
                continue;
            }
            edits.extend([Edit::Phase(p), Edit::Phase(-p)]);
            for phi in [anchor, anchor + PI / 2.0] {
                edits.extend([Edit::Bump(e, phi), Edit::Bump(-e, phi)]);
            }
        }
        if let Some((next, edit, _)) =
            first_admissible(system, c, edits, |m, _| m.improves_on(&cur, 5))?
        {
            return Ok((next, record(PerturbationKind::Separation, c, edit)));
        }
    }
    Err(GenericityError::BudgetExhausted {
        pass: "separation",
        floor: EPS_FLOOR,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub pass: String,
    pub before: Metrics,
    pub after: Metrics,
    pub events_before: usize,
    pub events_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub initial_events: Vec<CrossingEvent>,
    pub passes: Vec<PassRecord>,
    pub perturbations: Vec<Perturbation>,
    /// Events of the final system, in the final time coordinate.
    pub final_events: Vec<CrossingEvent>,
    pub time_shift: f64,
    pub b_sing: SingularBraidWord,
    pub signs: Vec<Sign>,
}

/// Time shift placing the crossings as far as possible from both `π` and the
/// window boundary `0 ≡ 2π`.
fn choose_shift(events: &[CrossingEvent]) -> f64 {
    if events.is_empty() {
        return 0.0;
    }
    let dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let grid = 4096;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..grid {
        let beta = TAU * i as f64 / grid as f64;
        let score = events
            .iter()
            .map(|e| {
                let t = e.t - beta;
                dist(t, PI).min(dist(t, 0.0))
            })
            .fold(f64::INFINITY, f64::min);
        if score > best.0 + 1e-12 {
            best = (score, beta);
        }
    }
    best.1
}

/// Rank-based generator index: one plus the number of strands strictly
/// below the crossing value.
fn generator_index(system: &StrandSystem, e: &CrossingEvent) -> usize {
    let below = system
        .strand_ids()
        .iter()
        .zip(system.values_at(e.t))
        .filter(|(id, v)| !e.participants.contains(id) && *v < e.value)
        .count();
    below + 1
}

fn singular_word(system: &StrandSystem, events: &[CrossingEvent]) -> SingularBraidWord {
    SingularBraidWord {
        strands: system.strand_count(),
        letters: events.iter().map(|e| generator_index(system, e)).collect(),
        crossing_times: events.iter().map(|e| e.t).collect(),
    }
}

pub struct GenericOutput {
    pub system: StrandSystem,
    pub b_sing: SingularBraidWord,
    pub report: GenericityReport,
}

fn pass_record(name: &str, before: (Metrics, usize), after: (Metrics, usize)) -> PassRecord {
    PassRecord {
        pass: name.to_string(),
        before: before.0,
        after: after.0,
        events_before: before.1,
        events_after: after.1,
    }
}

fn snapshot(system: &StrandSystem) -> Result<(Metrics, usize), GenericityError> {
    let det = detect(system)?;
    Ok((metrics_of(&det), det.events.len()))
}

/// Runs the passes until the system is generic, shifts time away from `π`
/// and attaches crossing signs.
pub fn make_generic(
    system: &StrandSystem,
    word: &BraidWord,
) -> Result<GenericOutput, GenericityError> {
    let initial_events = detect(system)?.events;
    let mut passes = Vec::new();
    let mut log = Vec::new();

    let before = snapshot(system)?;
    let (mut sys, mut constant_log) = perturb_constants(system)?;
    if !constant_log.is_empty() {
        passes.push(pass_record("constants", before, snapshot(&sys)?));
        log.append(&mut constant_log);
    }

    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(GenericityError::RoundLimit(MAX_ROUNDS));
        }
        let det = detect(&sys)?;
        let m = metrics_of(&det);
        let before = (m, det.events.len());
        if let Some(&(a, b)) = det.identical.first() {
            return Err(GenericityError::IdenticalStrands(a, b));
        }
        let (name, next, mut entries) = if m.inter_component_tangencies > 0 {
            let (next, entries) = perturb_constants(&sys)?;
            ("constants", next, entries)
        } else if m.mixed_multi_strand > 0 {
            let (next, entries) = perturb_phase(&sys)?;
            ("phase", next, entries)
        } else if m.tangencies > 0 {
            let e = det.events.iter().find(|e| !e.tangential_pairs.is_empty());
            let (next, entry) = perturb_tangency(&sys, e.expect("counted"))?;
            ("tangency", next, vec![entry])
        } else if m.multi_strand_participants > 0 {
            let e = det.events.iter().find(|e| e.participants.len() > 2);
            let (next, entry) = perturb_multistrand(&sys, e.expect("counted"))?;
            ("multi-strand", next, vec![entry])
        } else if m.close_pairs > 0 {
            let (next, entry) = separate(&sys)?;
            ("separation", next, vec![entry])
        } else {
            break;
        };
        if entries.is_empty() {
            return Err(GenericityError::BudgetExhausted {
                pass: name,
                floor: EPS_FLOOR,
            });
        }
        log::debug!("{name} pass: {} perturbation(s)", entries.len());
        sys = next;
        passes.push(pass_record(name, before, snapshot(&sys)?));
        log.append(&mut entries);
    }

    let beta = choose_shift(&detect(&sys)?.events);
    let shifted = sys.shifted(beta);
    let final_events = find_crossings(&shifted)?;
    let unshifted_count = detect(&sys)?.events.len();
    if final_events.len() != unshifted_count
        || final_events.iter().any(|e| !e.is_generic())
        || !metrics(&shifted)?.is_zero()
    {
        return Err(GenericityError::NotApplicable(format!(
            "time shift {beta} changed the crossing structure"
        )));
    }
    if final_events.iter().any(|e| (e.t - PI).abs() < PI_MARGIN) {
        return Err(GenericityError::NotApplicable("crossing at t = π".into()));
    }
    log.push(Perturbation {
        kind: PerturbationKind::TimeShift,
        component: None,
        magnitude: beta,
        phase: 0.0,
    });
    let perm = check_perm_condition(&shifted, word)?;
    if !perm.ok {
        return Err(ParametrizeError::PermConditionFailed {
            interval: perm.intervals.iter().find(|c| !c.ok).map_or(0, |c| c.interval),
        }
        .into());
    }

    let b_sing = singular_word(&shifted, &final_events);
    let mut report = GenericityReport {
        initial_events,
        passes,
        perturbations: log,
        final_events,
        time_shift: beta,
        b_sing: b_sing.clone(),
        signs: Vec::new(),
    };
    report.signs = assign_signs(&shifted, word, &report)?;
    Ok(GenericOutput {
        system: shifted,
        b_sing,
        report,
    })
}

/// Crossing signs realizing `word`.
///
/// Inside each schedule interval the strands are stacked in `Im` by their
/// Re-rank at the interval start, with the two strands of the interval's
/// letter exchanged when the letter is negative. Any Re-motion at fixed
/// distinct depths is isotopic to the straight one, so the interval
/// contributes exactly that letter. A crossing is then positive iff the
/// strand on the left before it lies deeper (smaller `Im`).
pub fn assign_signs(
    system: &StrandSystem,
    word: &BraidWord,
    report: &GenericityReport,
) -> Result<Vec<Sign>, GenericityError> {
    let l = word.len();
    let h = TAU / l as f64;
    let ids = system.strand_ids();
    let pos: BTreeMap<StrandId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let t0 = system.schedule[0];
    let mut signs = Vec::with_capacity(report.final_events.len());
    for e in &report.final_events {
        if e.participants.len() != 2 {
            return Err(GenericityError::UnresolvableInterval { t: e.t });
        }
        let off = (e.t - t0).rem_euclid(TAU);
        let i = ((off / h).floor() as usize).min(l - 1);
        let into = off - i as f64 * h;
        if into < 1e-9 || h - into < 1e-9 {
            return Err(GenericityError::UnresolvableInterval { t: e.t });
        }
        let start = e.t - into;
        let values = system.values_at(start);
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
        let mut depth = vec![0usize; ids.len()];
        for (r, &x) in order.iter().enumerate() {
            depth[x] = r;
        }
        let letter = word.letters()[i];
        if letter.sign == Sign::Neg {
            let (p, q) = (order[letter.index - 1], order[letter.index]);
            depth.swap(p, q);
        }
        let (a, b) = (e.participants[0], e.participants[1]);
        let d = system.strand_poly(a).sub(&system.strand_poly(b));
        let slope = d.derivative().eval_re(e.t);
        let a_left = if slope.abs() > 1e-12 {
            slope > 0.0
        } else {
            d.eval_re(e.t - 1e-4) < 0.0
        };
        let (left, right) = if a_left { (a, b) } else { (b, a) };
        signs.push(if depth[pos[&left]] < depth[pos[&right]] {
            Sign::Pos
        } else {
            Sign::Neg
        });
    }
    Ok(signs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::invariants;
    use crate::parametrize::build_f;

    fn w(s: usize, v: &[i64]) -> BraidWord {
        BraidWord::from_signed(s, v).unwrap()
    }

    fn system(polys: Vec<(TrigPoly, Vec<usize>)>) -> StrandSystem {
        StrandSystem {
            components: polys
                .into_iter()
                .map(|(f, lanes)| ComponentPoly { f, lanes })
                .collect(),
            schedule: vec![0.0, TAU],
            time_shift: 0.0,
        }
    }

    #[test]
    fn cos_half_strands_cross_once() {
        let sys = system(vec![(TrigPoly::cos(), vec![0, 1])]);
        let ev = find_crossings(&sys).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].t - PI).abs() < 1e-9);
        assert_eq!(ev[0].kind, EventKind::TransversePair);
    }

    #[test]
    fn tangential_event_at_zero() {
        let c = 0.4;
        let bump = TrigPoly::constant(c + 1.0).sub(&TrigPoly::cos());
        let sys = system(vec![(TrigPoly::constant(c), vec![0]), (bump, vec![1])]);
        let ev = find_crossings(&sys).unwrap();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].t < 1e-6 || TAU - ev[0].t < 1e-6);
        assert_eq!(ev[0].kind, EventKind::Tangential);
    }

    #[test]
    fn three_strand_events() {
        let sys = system(vec![
            (TrigPoly::constant(0.0), vec![0]),
            (TrigPoly::sin(), vec![1]),
            (TrigPoly::sin().scale((-1.0).into()), vec![2]),
        ]);
        let ev = find_crossings(&sys).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.kind == EventKind::MultiStrand));
        assert!(ev[0].t.abs() < 1e-9 && (ev[1].t - PI).abs() < 1e-9);
    }

    #[test]
    fn identical_constants_get_distinct_offsets() {
        let sys = system(vec![
            (TrigPoly::constant(0.0), vec![0]),
            (TrigPoly::constant(0.0), vec![1]),
        ]);
        assert!(matches!(
            find_crossings(&sys),
            Err(GenericityError::IdenticalStrands(..))
        ));
        let (out, log) = perturb_constants(&sys).unwrap();
        assert_eq!(log.len(), 2);
        assert_ne!(log[0].magnitude, log[1].magnitude);
        assert!(find_crossings(&out).unwrap().is_empty());
    }

    #[test]
    fn inter_component_tangency_removed_by_constants() {
        let bump = TrigPoly::constant(1.4).sub(&TrigPoly::cos());
        let sys = system(vec![(TrigPoly::constant(0.4), vec![0]), (bump, vec![1])]);
        let (out, _) = perturb_constants(&sys).unwrap();
        let ev = find_crossings(&out).unwrap();
        assert!(ev.iter().all(|e| e.tangential_pairs.is_empty()));
    }

    #[test]
    fn mixed_three_strand_event_split_by_phase() {
        // component 0: two strands ±sin(t/2)-like; component 1: constant 0
        let two = TrigPoly::cos_sin(0.0, 1.0, 1, 1);
        let sys = system(vec![
            (two, vec![0, 1]),
            (TrigPoly::cos_sin(0.0, 0.5, 1, 1), vec![2]),
        ]);
        let before = metrics(&sys).unwrap();
        assert!(before.mixed_multi_strand > 0);
        let (out, log) = perturb_phase(&sys).unwrap();
        assert!(!log.is_empty());
        assert_eq!(metrics(&out).unwrap().mixed_multi_strand, 0);
    }

    #[test]
    fn tangency_removed_in_one_step() {
        // s_C = 2: strands F(t/2), F(t/2 + π); F = cos τ + cos 2τ touches itself
        let f = TrigPoly::cos_sin(0.0, 1.0, 1, 1).add(&TrigPoly::cos_sin(0.0, 0.0, 2, 1));
        let g = TrigPoly::cos().multiply(&TrigPoly::cos());
        let sys = system(vec![(f.add(&g), vec![0, 1])]);
        let ev = find_crossings(&sys).unwrap();
        if let Some(e) = ev.iter().find(|e| e.kind == EventKind::Tangential) {
            let before = metrics(&sys).unwrap().tangencies;
            let (out, _) = perturb_tangency(&sys, e).unwrap();
            assert!(metrics(&out).unwrap().tangencies < before);
        }
        let transverse = ev.iter().find(|e| e.kind != EventKind::Tangential);
        if let Some(e) = transverse {
            assert!(matches!(
                perturb_tangency(&sys, e),
                Err(GenericityError::NotApplicable(_))
            ));
        }
    }

    #[test]
    fn phase_formula_example() {
        let sys = system(vec![(TrigPoly::cos(), vec![0, 1])]);
        let a = StrandId {
            component: 0,
            index: 1,
        };
        let b = StrandId {
            component: 0,
            index: 2,
        };
        let phi = multistrand_phase(&sys, a, b, PI);
        assert!(phi.rem_euclid(TAU).min(TAU - phi.rem_euclid(TAU)) < 1e-12);
        let ta = tau_of(&sys, a, PI);
        let tb = tau_of(&sys, b, PI);
        assert!(((ta - phi).cos() - (tb - phi).cos()).abs() < 1e-12);
    }

    #[test]
    fn generic_system_is_untouched() {
        let word = w(2, &[1, 1, 1]);
        let sys = build_f(&word).unwrap();
        let out = make_generic(&sys, &word).unwrap();
        let changes: Vec<_> = out
            .report
            .perturbations
            .iter()
            .filter(|p| p.kind != PerturbationKind::TimeShift)
            .collect();
        if metrics(&sys).unwrap().is_zero() {
            assert!(changes.is_empty());
        }
        assert!(out.report.final_events.iter().all(CrossingEvent::is_generic));
        assert!(out.b_sing.len() >= word.len());
    }

    #[test]
    fn signs_reproduce_corpus_links() {
        for word in [
            w(2, &[1, 1]),
            w(2, &[1, 1, 1]),
            w(2, &[-1, -1, -1]),
            w(3, &[1, -2, 1, -2]),
            w(3, &[1, 1, 1, 2]),
            w(3, &[1, 1, 2, 2]),
        ] {
            let sys = build_f(&word).unwrap();
            let out = make_generic(&sys, &word).unwrap();
            let realized = out.b_sing.with_signs(&out.report.signs);
            let a = invariants(&word).unwrap();
            let b = invariants(&realized).unwrap();
            assert!(a.same_link(&b), "{word} realized as {realized}");
            for comp in &out.system.components {
                let sc = comp.strand_count() as i64;
                let expect = if comp.f.max_abs_freq() == 0 { 0 } else { sc * word.len() as i64 / 2 };
                assert_eq!(comp.f.integer_degree(), Some(expect));
            }
            assert!(out.b_sing.crossing_times.iter().all(|t| (t - PI).abs() > PI_MARGIN));
        }
    }
}
