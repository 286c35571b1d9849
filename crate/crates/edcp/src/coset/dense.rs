//! Dense mirrors of the symbolic operations.
//!
//! These act on the full amplitude vector over Z_w × Z_q^n and never look at
//! the secret; they are the reference the symbolic engine is checked against.

use super::{CosetState, LinearForm};
use crate::error::{Error, Result};
use crate::modmath::{RootOfUnity, ZqVector};
use crate::statevec::{Direction, StateVector};

/// Deliberate defects for sensitivity testing of the checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Every dense QFT runs with the opposite sign.
    QftSign,
}

impl Fault {
    pub fn direction(self, dir: Direction) -> Direction {
        match self {
            Fault::None => dir,
            Fault::QftSign => dir.flip(),
        }
    }
}

/// A dense state over Z_w × Z_q^n.
#[derive(Clone, Debug)]
pub struct DenseCoset {
    pub width: u64,
    pub q: u64,
    pub n: usize,
    pub state: StateVector<f64>,
    pub fault: Fault,
}

pub struct DenseBranch {
    pub outcome: u64,
    pub probability: f64,
    pub state: Option<DenseCoset>,
}

impl DenseCoset {
    pub fn from_symbolic(st: &CosetState) -> Result<Self> {
        Ok(Self {
            width: st.width(),
            q: st.params().q(),
            n: st.params().n(),
            state: st.to_dense()?,
            fault: Fault::None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    fn qn(&self) -> usize {
        (self.q as usize).pow(self.n as u32)
    }

    fn j_of(&self, idx: usize) -> u64 {
        (idx / self.qn()) as u64
    }

    fn y_of(&self, idx: usize) -> ZqVector {
        ZqVector::from_index(self.q, self.n, idx % self.qn())
    }

    fn with_state(&self, state: StateVector<f64>) -> Self {
        Self {
            width: self.width,
            q: self.q,
            n: self.n,
            state,
            fault: self.fault,
        }
    }

    fn branches(&self, f: impl Fn(usize) -> u64 + Copy) -> Result<Vec<DenseBranch>> {
        Ok(self
            .state
            .branches(f)?
            .into_iter()
            .map(|(outcome, probability, s)| DenseBranch {
                outcome,
                probability,
                state: Some(self.with_state(s)),
            })
            .collect())
    }

    pub fn reduce_r_branches(&self, target: u64) -> Result<Vec<DenseBranch>> {
        let w = self.width;
        if target == 0 || target > w {
            return Err(Error::InvalidOperation(format!(
                "cannot reduce width {w} to {target}"
            )));
        }
        let indicator = 2 * target > w;
        let key = |idx: usize| {
            let j = self.j_of(idx);
            if indicator {
                u64::from(j < target)
            } else {
                j / target
            }
        };
        let mut out = self.branches(key)?;
        for b in out.iter_mut() {
            if CosetState::reduce_succeeded(w, target, b.outcome) {
                let shift = if indicator { 0 } else { b.outcome * target };
                let st = b.state.take().unwrap();
                let moved = st.state.clone().reindex_register(0, target as usize, |j| {
                    let j = j as u64;
                    (j >= shift && j < shift + target).then(|| (j - shift) as usize)
                })?;
                b.state = Some(DenseCoset {
                    width: target,
                    ..st.with_state(moved)
                });
            }
        }
        Ok(out)
    }

    pub fn project_branches(&self, modulus: u64) -> Result<Vec<DenseBranch>> {
        self.branches(|idx| self.j_of(idx) % modulus)
    }

    pub fn linear_branches(&self, form: &LinearForm) -> Result<Vec<DenseBranch>> {
        self.branches(|idx| form.eval(self.j_of(idx), self.y_of(idx).coords()))
    }

    pub fn second_branches(&self) -> Result<Vec<DenseBranch>> {
        let qn = self.qn();
        self.branches(|idx| (idx % qn) as u64)
    }

    pub fn phase(&self, form: &LinearForm) -> Self {
        let st = self.state.clone().diagonal_phase(|idx| {
            RootOfUnity::new(
                form.modulus,
                form.eval(self.j_of(idx), self.y_of(idx).coords()) as i64,
            )
        });
        self.with_state(st)
    }

    pub fn multiply_subtract(&self, v: &ZqVector) -> Result<Self> {
        Ok(self.with_state(self.state.clone().multiply_add(v, -1)?))
    }

    /// QFT_q on each second-register coordinate.
    pub fn fourier_second(&self) -> Result<Self> {
        let mut st = self.state.clone();
        for k in 1..=self.n {
            st = st.qft(k, self.fault.direction(Direction::Forward))?;
        }
        Ok(self.with_state(st))
    }

    pub fn fourier_branches(&self) -> Result<Vec<DenseBranch>> {
        self.fourier_second()?.second_branches()
    }

    pub fn qft_first_distribution(&self, dir: Direction) -> Result<Vec<(u64, f64)>> {
        let st = self.state.clone().qft(0, self.fault.direction(dir))?;
        let qn = self.qn();
        Ok(st.distribution_of(|idx| (idx / qn) as u64))
    }

    pub fn full_distribution(&self) -> Vec<(u64, f64)> {
        self.state.distribution_of(|idx| idx as u64)
    }
}
