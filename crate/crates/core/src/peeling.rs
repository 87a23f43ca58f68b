//! The peeling exploration of a random surface around one pants.
//!
//! Starting from `2g − 2` loose pants, each step glues the open cuff of the
//! base pants' component that is closest to the base midpoint to a uniformly
//! random other open cuff. When the component has no open cuff left, two
//! uniformly random open cuffs are glued instead. Every step pairs one
//! deterministic-given-the-past cuff with a uniform partner, so the final
//! matching is a uniform configuration-model matching.
//!
//! Distances to cuffs are measured through the lift along the spanning tree
//! of first attachments: a pants attached across side `j` of a pants with
//! state `(q, σ)` gets state `(r_j·q, σ')` exactly as in the cover walk, and
//! the distance to its cuff with side label `i` is `d(q, side_i)`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::Vector3;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PantsGraph;
use crate::hexagon::build_hexagon;
use crate::hyp::acosh_clamped;
use crate::lattice::{origin_vec, BallCounter, OrbitKernel, MAX_RADIUS};
use crate::seeds::trial_rng;
use crate::stats::{wilson_interval, Z_99};
use crate::surface::{child_frame, Frame, ROOT_FRAME};

/// Constant of the final display `R_τ₂ ≤ ½ log g + 12.5 log log g + C₀`.
pub const FINAL_CONSTANT: f64 = 15.0;

/// Distances are compared after rounding to this resolution so that the
/// cuff-id tie-break is not at the mercy of the last bits.
const TIE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// The closest open cuff of the base component was glued.
    Normal,
    /// The base component was closed; two random open cuffs were glued.
    DisconnectedCase,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeelStep {
    /// Step number, starting at 1.
    pub index: usize,
    pub cuff: usize,
    pub partner: usize,
    pub was_bad: bool,
    pub kind: StepKind,
    /// `R_t` after this step; `None` once the base component is closed.
    pub r_t: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplorationTrace {
    pub genus: u64,
    pub ell: f64,
    pub epsilon: f64,
    pub k: u64,
    pub c_ell: f64,
    pub base_vertex: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub total_steps: usize,
    /// Horizon `2g − 2` of the alternative indexing.
    pub short_horizon: usize,
    pub steps: Vec<PeelStep>,
    pub bad_phase1: u64,
    pub bad_phase2: u64,
    /// `r_at[t] = R_t` for `t = 0..=total_steps`.
    pub r_at: Vec<Option<f64>>,
    /// Open cuffs of the base component after each step, starting at `t = 0`.
    pub boundary_sizes: Vec<usize>,
    /// Whether the base component ran out of open cuffs before the end.
    pub closed_early: bool,
    pub matching: Vec<u32>,
}

impl ExplorationTrace {
    /// `R_t` with `t` clamped to the number of steps.
    pub fn r(&self, t: usize) -> Option<f64> {
        self.r_at[t.min(self.total_steps)]
    }

    /// Cumulative bad-step count after each step.
    pub fn cumulative_bad(&self) -> Vec<u64> {
        self.steps
            .iter()
            .scan(0u64, |acc, s| {
                *acc += u64::from(s.was_bad);
                Some(*acc)
            })
            .collect()
    }

    pub fn bad_in_first(&self, t: usize) -> u64 {
        self.steps.iter().take(t).filter(|s| s.was_bad).count() as u64
    }

    pub fn final_graph(&self) -> Result<PantsGraph> {
        PantsGraph::from_matching(self.genus, self.matching.clone())
    }
}

/// `(⌊(g−1)^{1/2−ε}⌋, ⌊√(25(g−1)·log(g−1))⌋)`, clamped to the step count.
pub fn phase_boundaries(genus: u64, epsilon: f64) -> (usize, usize) {
    let gm = genus as f64 - 1.0;
    let total = 3 * genus as usize - 3;
    let tau1 = gm.powf(0.5 - epsilon).floor() as usize;
    let tau2 = (25.0 * gm * gm.ln()).sqrt().floor() as usize;
    (tau1.min(total), tau2.min(total))
}

fn check_params(genus: u64, epsilon: f64, k: u64) -> Result<()> {
    if genus < 3 {
        return Err(Error::InvalidInput(format!("exploration needs genus at least 3, got {genus}")));
    }
    if !(epsilon > 1.0 / 3.0 && epsilon < 0.5) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (1/3, 1/2), got {epsilon}")));
    }
    if k < 3 {
        return Err(Error::InvalidInput(format!("k must be at least 3, got {k}")));
    }
    Ok(())
}

/// Open cuffs in a set supporting uniform sampling and removal.
struct OpenCuffs {
    items: Vec<u32>,
    slot: Vec<u32>,
}

impl OpenCuffs {
    fn new(n: usize) -> Self {
        OpenCuffs {
            items: (0..n as u32).collect(),
            slot: (0..n as u32).collect(),
        }
    }

    fn remove(&mut self, c: usize) {
        let i = self.slot[c] as usize;
        let last = *self.items.last().expect("nonempty");
        self.items[i] = last;
        self.slot[last as usize] = i as u32;
        self.items.pop();
    }

    fn take_random<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let c = self.items[rng.random_range(0..self.items.len())] as usize;
        self.remove(c);
        c
    }
}

struct Attached {
    q: Vector3<f64>,
    frame: Frame,
}

struct Frontier<'a> {
    kernel: &'a OrbitKernel,
    nearest: BinaryHeap<Reverse<(i64, u32)>>,
    farthest: BinaryHeap<(u64, u32)>,
}

impl Frontier<'_> {
    /// Records the pants and pushes its cuffs other than `skip`; returns how
    /// many were pushed.
    fn attach(&mut self, attached: &mut [Option<Attached>], p: usize, state: Attached, skip: Option<usize>) -> usize {
        let mut added = 0;
        for side in 0..3 {
            let c = 3 * p + state.frame[side] as usize;
            if Some(c) == skip {
                continue;
            }
            let d = acosh_clamped(self.kernel.side_cosh(side, &state.q));
            self.nearest.push(Reverse(((d / TIE_RESOLUTION).round() as i64, c as u32)));
            self.farthest.push((d.to_bits(), c as u32));
            added += 1;
        }
        attached[p] = Some(state);
        added
    }

    /// Largest distance to a still-open cuff.
    fn radius(&mut self, matching: &[u32]) -> Option<f64> {
        while let Some(&(bits, c)) = self.farthest.peek() {
            if matching[c as usize] == u32::MAX {
                return Some(f64::from_bits(bits));
            }
            self.farthest.pop();
        }
        None
    }
}

pub fn explore(genus: u64, seed: u64, ell: f64, epsilon: f64, k: u64) -> Result<ExplorationTrace> {
    let mut rng = trial_rng(seed);
    explore_with_rng(genus, &mut rng, ell, epsilon, k)
}

pub fn explore_with_rng<R: Rng + ?Sized>(
    genus: u64,
    rng: &mut R,
    ell: f64,
    epsilon: f64,
    k: u64,
) -> Result<ExplorationTrace> {
    check_params(genus, epsilon, k)?;
    let hex = build_hexagon(ell)?;
    let kernel = OrbitKernel::new(&hex);
    let n_cuffs = 6 * genus as usize - 6;
    let total = n_cuffs / 2;
    let base = 0usize;

    let mut open = OpenCuffs::new(n_cuffs);
    let mut matching = vec![u32::MAX; n_cuffs];
    let mut attached: Vec<Option<Attached>> = (0..n_cuffs / 3).map(|_| None).collect();
    let mut frontier = Frontier {
        kernel: &kernel,
        nearest: BinaryHeap::new(),
        farthest: BinaryHeap::new(),
    };
    let mut boundary = frontier.attach(
        &mut attached,
        base,
        Attached {
            q: origin_vec(),
            frame: ROOT_FRAME,
        },
        None,
    );

    let mut r_at = vec![frontier.radius(&matching)];
    let mut boundary_sizes = vec![boundary];
    let mut steps = Vec::with_capacity(total);
    let mut closed_early = false;

    for index in 1..=total {
        let (cuff, partner, was_bad, kind);
        if boundary > 0 {
            let c = loop {
                let Reverse((_, c)) = frontier.nearest.pop().expect("open boundary cuff exists");
                if matching[c as usize] == u32::MAX {
                    break c as usize;
                }
            };
            open.remove(c);
            let p = open.take_random(rng);
            let pants = p / 3;
            cuff = c;
            partner = p;
            kind = StepKind::Normal;
            if attached[pants].is_some() {
                was_bad = true;
                boundary -= 2;
            } else {
                was_bad = false;
                let from = attached[c / 3].as_ref().expect("cuff of the base component");
                let side = from
                    .frame
                    .iter()
                    .position(|&x| x as usize == c % 3)
                    .expect("frame is a permutation") as u8;
                let state = Attached {
                    q: kernel.reflect(side as usize, &from.q),
                    frame: child_frame(&from.frame, side, (p % 3) as u8),
                };
                matching[c] = p as u32;
                matching[p] = c as u32;
                boundary -= 1;
                boundary += frontier.attach(&mut attached, pants, state, Some(p));
            }
        } else {
            closed_early = true;
            cuff = open.take_random(rng);
            partner = open.take_random(rng);
            was_bad = false;
            kind = StepKind::DisconnectedCase;
        }
        matching[cuff] = partner as u32;
        matching[partner] = cuff as u32;
        let r_t = if boundary > 0 {
            frontier.radius(&matching)
        } else {
            None
        };
        r_at.push(r_t);
        boundary_sizes.push(boundary);
        steps.push(PeelStep {
            index,
            cuff,
            partner,
            was_bad,
            kind,
            r_t,
        });
    }

    let (tau1, tau2) = phase_boundaries(genus, epsilon);
    let bad_phase1 = steps[..tau1].iter().filter(|s| s.was_bad).count() as u64;
    let bad_phase2 = steps[tau1..tau2].iter().filter(|s| s.was_bad).count() as u64;
    Ok(ExplorationTrace {
        genus,
        ell,
        epsilon,
        k,
        c_ell: hex.c_ell,
        base_vertex: base,
        tau1,
        tau2,
        total_steps: total,
        short_horizon: (2 * genus as usize - 2).min(total),
        steps,
        bad_phase1,
        bad_phase2,
        r_at,
        boundary_sizes,
        closed_early,
        matching,
    })
}

fn factorial(k: u64) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(1/k!)·(g − 1)^{−2εk}`.
pub fn phase1_bound(genus: u64, epsilon: f64, k: u64) -> f64 {
    (genus as f64 - 1.0).powf(-2.0 * epsilon * k as f64) / factorial(k)
}

/// `log³(g − 1)`.
pub fn phase2_threshold(genus: u64) -> f64 {
    (genus as f64 - 1.0).ln().powi(3)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub genus: u64,
    pub ell: f64,
    pub epsilon: f64,
    pub k: u64,
    pub trials: u64,
    pub tau1: usize,
    pub tau2: usize,
    /// Trials with at least `k` bad steps in the first phase.
    pub phase1_events: u64,
    pub phase1_frequency: f64,
    pub phase1_interval: (f64, f64),
    pub phase1_bound: f64,
    /// Trials with at least `log³(g − 1)` bad steps in the second phase.
    pub phase2_events: u64,
    pub phase2_threshold: f64,
    pub phase2_frequency: f64,
    pub phase2_interval: (f64, f64),
    /// Reference rate `(g − 1)^{−2}`; the asymptotic bound is `o` of it.
    pub phase2_reference: f64,
    pub closed_early: u64,
}

/// Event frequencies over independent explorations with per-trial seeds
/// derived from `root_seed`.
pub fn phase_statistics(
    genus: u64,
    ell: f64,
    epsilon: f64,
    k: u64,
    trials: u64,
    root_seed: u64,
) -> Result<PhaseReport> {
    check_params(genus, epsilon, k)?;
    let traces = crate::harness::run_trials(trials, |t| {
        explore(genus, crate::seeds::derive_seed(root_seed, genus, t), ell, epsilon, k)
    });
    let threshold = phase2_threshold(genus);
    let (mut p1, mut p2, mut closed) = (0, 0, 0);
    let mut tau = (0, 0);
    for trace in traces {
        let trace = trace?;
        tau = (trace.tau1, trace.tau2);
        p1 += u64::from(trace.bad_phase1 >= k);
        p2 += u64::from(trace.bad_phase2 as f64 >= threshold);
        closed += u64::from(trace.closed_early);
    }
    let freq = |e: u64| if trials == 0 { 0.0 } else { e as f64 / trials as f64 };
    Ok(PhaseReport {
        genus,
        ell,
        epsilon,
        k,
        trials,
        tau1: tau.0,
        tau2: tau.1,
        phase1_events: p1,
        phase1_frequency: freq(p1),
        phase1_interval: wilson_interval(p1, trials, Z_99),
        phase1_bound: phase1_bound(genus, epsilon, k),
        phase2_events: p2,
        phase2_threshold: threshold,
        phase2_frequency: freq(p2),
        phase2_interval: wilson_interval(p2, trials, Z_99),
        phase2_reference: (genus as f64 - 1.0).powi(-2),
        closed_early: closed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; nonnegative when the inequality holds.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    /// Every conditioned inequality was evaluated.
    Complete,
    /// The base component closed before the end; conditioned checks skipped.
    SkippedClosed,
    /// Too many bad steps for the phase assumptions; conditioned checks skipped.
    SkippedBadSteps,
    /// A needed ball count lies beyond the supported radius.
    Incomplete,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub status: AuditStatus,
    pub checks: Vec<InequalityCheck>,
    /// Cuff distances go through the spanning-tree lift, an upper bound on
    /// the surface distance once handles appear.
    pub distance_note: &'static str,
}

impl AuditReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.checks.iter().map(|c| c.slack).reduce(f64::min)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_R6K: &str = "R_6k <= (12k+1) C";
pub const CHECK_PHASE1: &str = "(2/3) N(R_tau1 - R_6k - l/2 - 4C) <= tau1";
pub const CHECK_PHASE2: &str = "(tau1 - 3k - 2 log^3 g) (2/3) N(R_tau2 - R_tau1 - l/2 - 4C) <= tau2";
pub const CHECK_FINAL: &str = "R_tau2 <= log(g)/2 + 12.5 log log g + C0";

/// Evaluates the chained inequalities of the exploration on one run.
pub fn audit_inequalities(trace: &ExplorationTrace, census: &dyn BallCounter) -> AuditReport {
    let g = trace.genus as f64;
    let c = trace.c_ell;
    let k = trace.k as f64;
    let mut checks = Vec::new();
    let note = "cuff distances measured through the spanning-tree lift";
    let report = |status, checks| AuditReport {
        status,
        checks,
        distance_note: note,
    };

    let six_k = 6 * trace.k as usize;
    if trace.bad_in_first(six_k) == 0 {
        if let Some(r6k) = trace.r(six_k) {
            checks.push(InequalityCheck::new(CHECK_R6K, r6k, (12.0 * k + 1.0) * c));
        }
    }
    if trace.closed_early {
        return report(AuditStatus::SkippedClosed, checks);
    }
    if trace.bad_phase1 >= trace.k || trace.bad_phase2 as f64 >= phase2_threshold(trace.genus) {
        return report(AuditStatus::SkippedBadSteps, checks);
    }
    let (Some(r6k), Some(r1), Some(r2)) = (trace.r(six_k), trace.r(trace.tau1), trace.r(trace.tau2)) else {
        return report(AuditStatus::SkippedClosed, checks);
    };
    let margin = trace.ell / 2.0 + 4.0 * c;
    let count = |r: f64| -> Option<f64> {
        if r > MAX_RADIUS {
            return None;
        }
        census.count_within(r).ok().map(|n| n as f64)
    };
    let (Some(n1), Some(n2)) = (count(r1 - r6k - margin), count(r2 - r1 - margin)) else {
        return report(AuditStatus::Incomplete, checks);
    };
    checks.push(InequalityCheck::new(CHECK_PHASE1, 2.0 / 3.0 * n1, trace.tau1 as f64));
    let factor = trace.tau1 as f64 - 3.0 * k - 2.0 * g.ln().powi(3);
    let lhs2 = if factor <= 0.0 { 0.0 } else { factor * 2.0 / 3.0 * n2 };
    checks.push(InequalityCheck::new(CHECK_PHASE2, lhs2, trace.tau2 as f64));
    let lg = g.ln();
    checks.push(InequalityCheck::new(CHECK_FINAL, r2, 0.5 * lg + 12.5 * lg.ln() + FINAL_CONSTANT));
    report(AuditStatus::Complete, checks)
}
