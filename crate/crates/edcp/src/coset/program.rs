//! Straight-line programs over coset states, runnable in both engines.

use std::collections::HashMap;

use rand::Rng;

use super::dense::{DenseBranch, DenseCoset};
use super::{Branch, CosetState, LinearForm};
use crate::error::Result;
use crate::modmath::ZqVector;
use crate::statevec::Direction;

/// Outcomes below this probability are treated as structurally absent.
const NEGLIGIBLE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    ReduceR(u64),
    ProjectJ(u64),
    Phase(LinearForm),
    Subtract(ZqVector),
    Measure(LinearForm),
    MeasureSecond,
    FourierSecond,
    QftFirst(Direction),
    MeasureFull,
}

impl Op {
    /// Ops after which no state remains.
    pub fn is_terminal(&self) -> bool {
        matches!(self, Op::QftFirst(_) | Op::MeasureFull)
    }

    pub fn is_measurement(&self) -> bool {
        !matches!(self, Op::Phase(_) | Op::Subtract(_))
    }
}

/// Run `ops` on a symbolic state, recording one outcome per measurement.
pub fn run_symbolic<R: Rng + ?Sized>(
    mut state: CosetState,
    ops: &[Op],
    rng: &mut R,
) -> Result<(Vec<u64>, Option<CosetState>)> {
    let mut transcript = Vec::new();
    for op in ops {
        let (outcome, next) = step_symbolic(state, op, rng)?;
        transcript.extend(outcome);
        match next {
            Some(s) => state = s,
            None => return Ok((transcript, None)),
        }
    }
    Ok((transcript, Some(state)))
}

fn step_symbolic<R: Rng + ?Sized>(
    st: CosetState,
    op: &Op,
    rng: &mut R,
) -> Result<(Option<u64>, Option<CosetState>)> {
    Ok(match op {
        Op::ReduceR(t) => {
            let branches = st.reduce_r_branches(*t)?;
            let b = CosetState::pick(branches, rng);
            (Some(b.outcome), b.state)
        }
        Op::ProjectJ(m) => {
            let (c, s) = st.project_j_mod(*m, rng)?;
            (Some(c), Some(s))
        }
        Op::Phase(f) => (None, Some(st.adversary_phase(f)?)),
        Op::Subtract(v) => (None, Some(st.multiply_subtract(v)?)),
        Op::Measure(f) => {
            let (c, s) = st.measure_linear(f, rng)?;
            (Some(c), Some(s))
        }
        Op::MeasureSecond => {
            let (y, s) = st.measure_second(rng)?;
            (Some(y.to_index() as u64), Some(s))
        }
        Op::FourierSecond => {
            let (u, s) = st.fourier_measure_second(rng)?;
            (Some(u.to_index() as u64), Some(s))
        }
        Op::QftFirst(dir) => (Some(st.qft_first_measure(*dir, rng)?), None),
        Op::MeasureFull => {
            let code_base = (st.params().q()).pow(st.params().n() as u32);
            let (j, y) = st.measure_full(rng)?;
            (Some(j * code_base + y.to_index() as u64), None)
        }
    })
}

fn symbolic_branches(st: &CosetState, op: &Op) -> Result<Vec<Branch>> {
    let single = |s: CosetState| {
        vec![Branch {
            outcome: 0,
            probability: 1.0,
            state: Some(s),
        }]
    };
    Ok(match op {
        Op::ReduceR(t) => st.reduce_r_branches(*t)?,
        Op::ProjectJ(m) => st.project_branches(*m)?,
        Op::Phase(f) => single(st.duplicate().adversary_phase(f)?),
        Op::Subtract(v) => single(st.duplicate().multiply_subtract(v)?),
        Op::Measure(f) => st.linear_branches(f)?,
        Op::MeasureSecond => st.second_branches()?,
        Op::FourierSecond => st.fourier_branches()?,
        Op::QftFirst(dir) => st
            .qft_first_distribution(*dir)
            .into_iter()
            .enumerate()
            .map(|(k, p)| Branch {
                outcome: k as u64,
                probability: p,
                state: None,
            })
            .collect(),
        Op::MeasureFull => st
            .full_distribution()
            .into_iter()
            .map(|(code, p)| Branch {
                outcome: code,
                probability: p,
                state: None,
            })
            .collect(),
    })
}

fn dense_branches(st: &DenseCoset, op: &Op) -> Result<Vec<DenseBranch>> {
    let single = |s: DenseCoset| {
        vec![DenseBranch {
            outcome: 0,
            probability: 1.0,
            state: Some(s),
        }]
    };
    let terminal = |d: Vec<(u64, f64)>| {
        d.into_iter()
            .map(|(outcome, probability)| DenseBranch {
                outcome,
                probability,
                state: None,
            })
            .collect()
    };
    Ok(match op {
        Op::ReduceR(t) => st.reduce_r_branches(*t)?,
        Op::ProjectJ(m) => st.project_branches(*m)?,
        Op::Phase(f) => single(st.phase(f)),
        Op::Subtract(v) => single(st.multiply_subtract(v)?),
        Op::Measure(f) => st.linear_branches(f)?,
        Op::MeasureSecond => st.second_branches()?,
        Op::FourierSecond => st.fourier_branches()?,
        Op::QftFirst(dir) => terminal(st.qft_first_distribution(*dir)?),
        Op::MeasureFull => terminal(st.full_distribution()),
    })
}

/// Result of running one program through both engines exhaustively.
#[derive(Clone, Debug, Default)]
pub struct Comparison {
    /// Total variation between the exact transcript distributions.
    pub tv: f64,
    /// Largest amplitude error between matching post-states, after removing global phase.
    pub max_state_error: f64,
    pub leaves: usize,
    /// Dense conditional outcome distributions, keyed by transcript prefix.
    pub dense_tree: HashMap<Vec<u64>, Vec<(u64, f64)>>,
}

/// Enumerate every branch of `ops` in both engines side by side.
pub fn compare_engines(sym: &CosetState, dense: &DenseCoset, ops: &[Op]) -> Result<Comparison> {
    let mut cmp = Comparison::default();
    walk(
        Some(sym),
        Some(dense),
        ops,
        1.0,
        1.0,
        &mut Vec::new(),
        &mut cmp,
    )?;
    Ok(cmp)
}

fn walk(
    sym: Option<&CosetState>,
    dense: Option<&DenseCoset>,
    ops: &[Op],
    ps: f64,
    pd: f64,
    prefix: &mut Vec<u64>,
    cmp: &mut Comparison,
) -> Result<()> {
    let (Some(op), Some(s), Some(d)) = (ops.first(), sym, dense) else {
        // leaf, or one engine has no mass here
        cmp.leaves += 1;
        cmp.tv += 0.5 * (ps - pd).abs();
        if let (Some(s), Some(d)) = (sym, dense) {
            let img = s.to_dense::<f64>()?;
            let err = phase_aligned_error(&img, &d.state);
            cmp.max_state_error = cmp.max_state_error.max(err);
        }
        return Ok(());
    };
    let sb: Vec<Branch> = symbolic_branches(s, op)?
        .into_iter()
        .filter(|b| b.probability > NEGLIGIBLE)
        .collect();
    let db: Vec<DenseBranch> = dense_branches(d, op)?
        .into_iter()
        .filter(|b| b.probability > NEGLIGIBLE)
        .collect();
    if op.is_measurement() {
        cmp.dense_tree.insert(
            prefix.clone(),
            db.iter().map(|b| (b.outcome, b.probability)).collect(),
        );
    }
    let mut outcomes: Vec<u64> = sb
        .iter()
        .map(|b| b.outcome)
        .chain(db.iter().map(|b| b.outcome))
        .collect();
    outcomes.sort_unstable();
    outcomes.dedup();
    for o in outcomes {
        let s_b = sb.iter().find(|b| b.outcome == o);
        let d_b = db.iter().find(|b| b.outcome == o);
        let ps2 = ps * s_b.map_or(0.0, |b| b.probability);
        let pd2 = pd * d_b.map_or(0.0, |b| b.probability);
        if op.is_measurement() {
            prefix.push(o);
        }
        if op.is_terminal() || s_b.is_none() || d_b.is_none() {
            cmp.leaves += 1;
            cmp.tv += 0.5 * (ps2 - pd2).abs();
        } else {
            walk(
                s_b.and_then(|b| b.state.as_ref()),
                d_b.and_then(|b| b.state.as_ref()),
                &ops[1..],
                ps2,
                pd2,
                prefix,
                cmp,
            )?;
        }
        if op.is_measurement() {
            prefix.pop();
        }
    }
    Ok(())
}

/// Largest |e^{iθ}a − b| entry after aligning the global phase.
pub fn phase_aligned_error(
    a: &crate::statevec::StateVector<f64>,
    b: &crate::statevec::StateVector<f64>,
) -> f64 {
    if a.space() != b.space() {
        return f64::INFINITY;
    }
    let ip = a.inner(b);
    if ip.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = ip / ip.norm();
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (*x * phase - *y).norm())
        .fold(0.0, f64::max)
}

/// Sample a transcript from the exact dense tree, one draw per measurement.
pub fn sample_dense_tree<R: Rng + ?Sized>(
    tree: &HashMap<Vec<u64>, Vec<(u64, f64)>>,
    rng: &mut R,
) -> Vec<u64> {
    let mut prefix = Vec::new();
    while let Some(dist) = tree.get(&prefix) {
        let w: Vec<f64> = dist.iter().map(|d| d.1).collect();
        let k = crate::rng::sample_index(&w, rng);
        prefix.push(dist[k].0);
    }
    prefix
}
