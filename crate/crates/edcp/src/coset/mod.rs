//! Symbolic coset states.
//!
//! Every state produced by the procedures in this crate has the form
//!
//! (1/√m) Σ_{i<m} ω_M^{α·i} |d·i + c0⟩ |x + (d·i + c0)·s⟩
//!
//! over Z_w × Z_q^n, where s is the challenger's secret shifted by whatever
//! multiply-subtract operations were applied. [`CosetState`] stores exactly
//! these numbers, so measurement outcomes are computed in O(m) rather than
//! O(w·q^n). The dense image is available through [`CosetState::to_dense`].

mod challenger;
pub mod dense;
mod params;
pub mod program;
mod record;

pub use challenger::Challenger;
pub use params::EdcpParams;
pub use record::{CosetRecord, Role};

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::{gcd, lcm, mul_mod, RootOfUnity, ZqVector};
use crate::rng::sample_index;
use crate::scalar::Real;
use crate::statevec::{Direction, IndexSpace, StateVector};

/// Support {base + stride·i : i < count} of the first register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub stride: u64,
    pub base: u64,
    pub count: u64,
}

impl Progression {
    pub fn full(width: u64) -> Self {
        Self {
            stride: 1,
            base: 0,
            count: width,
        }
    }

    #[inline]
    pub fn at(&self, i: u64) -> u64 {
        self.base + self.stride * i
    }

    pub fn last(&self) -> u64 {
        self.at(self.count - 1)
    }
}

/// The value (j_coeff·j + Σ_k y_coeffs[k]·y_k) mod modulus, read either as a
/// measured observable or as the exponent of a phase ω_modulus^{value}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    pub modulus: u64,
    pub j_coeff: u64,
    pub y_coeffs: Vec<u64>,
}

impl LinearForm {
    pub fn new(modulus: u64, j_coeff: u64, y_coeffs: Vec<u64>) -> Self {
        Self {
            modulus,
            j_coeff,
            y_coeffs,
        }
    }

    /// A form that only reads the first register.
    pub fn on_j(modulus: u64, j_coeff: u64, n: usize) -> Self {
        Self::new(modulus, j_coeff, vec![0; n])
    }

    fn reads_y(&self) -> bool {
        self.y_coeffs.iter().any(|&c| c % self.modulus != 0)
    }

    pub fn eval(&self, j: u64, y: &[u64]) -> u64 {
        let m = self.modulus;
        y.iter()
            .zip(&self.y_coeffs)
            .fold(mul_mod(self.j_coeff, j, m), |acc, (&yk, &c)| {
                (acc + mul_mod(c, yk, m)) % m
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Phase {
    modulus: u64,
    slope: u64,
}

/// One outcome of a measurement together with its post-measurement state.
pub struct Branch {
    pub outcome: u64,
    pub probability: f64,
    pub state: Option<CosetState>,
}

/// Exact symbolic state. Operations consume `self`; there is no way to copy one.
#[derive(Debug, PartialEq, Eq)]
pub struct CosetState {
    params: EdcpParams,
    width: u64,
    offset: ZqVector,
    secret: ZqVector,
    support: Progression,
    phase: Phase,
    issuer: u64,
}

impl CosetState {
    pub(crate) fn fresh(params: EdcpParams, x: ZqVector, s: ZqVector, t: u64, issuer: u64) -> Self {
        let width = params.r();
        let p = params.p();
        let st = Self {
            width,
            offset: x,
            secret: s,
            support: Progression::full(width),
            phase: Phase {
                modulus: p,
                slope: t % p,
            },
            issuer,
            params,
        };
        st.canonical()
    }

    /// Copy for exact branch enumeration inside the simulator; never exposed.
    pub(crate) fn duplicate(&self) -> Self {
        Self {
            params: self.params.clone(),
            width: self.width,
            offset: self.offset.clone(),
            secret: self.secret.clone(),
            support: self.support,
            phase: self.phase,
            issuer: self.issuer,
        }
    }

    pub fn params(&self) -> &EdcpParams {
        &self.params
    }

    /// Size of the first register.
    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn support(&self) -> Progression {
        self.support
    }

    pub fn phase_modulus(&self) -> u64 {
        self.phase.modulus
    }

    /// Opaque id of the challenger that issued the state.
    pub fn issuer(&self) -> u64 {
        self.issuer
    }

    #[cfg(test)]
    pub(crate) fn phase_slope(&self) -> u64 {
        self.phase.slope
    }

    #[cfg(test)]
    pub(crate) fn offset(&self) -> &ZqVector {
        &self.offset
    }

    #[cfg(test)]
    pub(crate) fn effective_secret(&self) -> &ZqVector {
        &self.secret
    }

    fn phase_cap(&self) -> u64 {
        self.params.q() * self.params.r()
    }

    fn canonical(mut self) -> Self {
        if self.support.count <= 1 {
            self.phase = Phase {
                modulus: 1,
                slope: 0,
            };
        }
        let g = gcd(self.phase.slope, self.phase.modulus);
        self.phase.modulus /= g;
        self.phase.slope /= g;
        self
    }

    fn y_of(&self, j: u64) -> ZqVector {
        self.offset.add_scaled(&self.secret, j)
    }

    /// Amplitude exponent of support index i as a root of unity.
    fn amp_phase(&self, i: u64) -> RootOfUnity {
        RootOfUnity::new(
            self.phase.modulus,
            mul_mod(self.phase.slope, i, self.phase.modulus) as i64,
        )
    }

    /// Partition support indices by a key; keys come out ascending.
    fn split(&self, key: impl Fn(u64, u64) -> u64) -> BTreeMap<u64, Vec<u64>> {
        let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for i in 0..self.support.count {
            groups
                .entry(key(i, self.support.at(i)))
                .or_default()
                .push(i);
        }
        groups
    }

    /// The state restricted to the given (ascending) support indices.
    ///
    /// `period` is the period of the measured key in the support index, when
    /// known; it fixes the stride even if the class has a single element.
    fn restrict(&self, idx: &[u64], period: Option<u64>) -> Result<Self> {
        let step = match period {
            Some(p) => p,
            None if idx.len() >= 2 => idx[1] - idx[0],
            None => 1,
        };
        if idx.windows(2).any(|w| w[1] - w[0] != step) {
            return Err(Error::InvalidOperation(
                "outcome class is not a progression".into(),
            ));
        }
        let mut out = self.duplicate();
        out.support = Progression {
            stride: self.support.stride * step,
            base: self.support.at(idx[0]),
            count: idx.len() as u64,
        };
        out.phase.slope = mul_mod(self.phase.slope, step, self.phase.modulus);
        Ok(out.canonical())
    }

    fn branches_by(
        &self,
        period: Option<u64>,
        key: impl Fn(u64, u64) -> u64,
    ) -> Result<Vec<Branch>> {
        let m = self.support.count as f64;
        self.split(key)
            .into_iter()
            .map(|(outcome, idx)| {
                Ok(Branch {
                    outcome,
                    probability: idx.len() as f64 / m,
                    state: Some(self.restrict(&idx, period)?),
                })
            })
            .collect()
    }

    fn pick<R: Rng + ?Sized>(branches: Vec<Branch>, rng: &mut R) -> Branch {
        let w: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let k = sample_index(&w, rng);
        branches.into_iter().nth(k).unwrap()
    }

    fn compose_phase(mut self, modulus: u64, add: u64) -> Result<Self> {
        let l = lcm(self.phase.modulus, modulus);
        if l > self.phase_cap() {
            return Err(Error::IncompatiblePhaseModulus {
                modulus: l,
                cap: self.phase_cap(),
            });
        }
        let a = mul_mod(self.phase.slope, l / self.phase.modulus, l);
        let b = mul_mod(add % modulus, l / modulus, l);
        self.phase = Phase {
            modulus: l,
            slope: (a + b) % l,
        };
        Ok(self.canonical())
    }

    // ---- self-reduction --------------------------------------------------

    /// Whether outcome `a` of a reduce_r measurement from `width` to `target` succeeded.
    pub fn reduce_succeeded(width: u64, target: u64, a: u64) -> bool {
        if 2 * target > width {
            a == 1
        } else {
            a < width / target
        }
    }

    pub(crate) fn reduce_r_branches(&self, target: u64) -> Result<Vec<Branch>> {
        let w = self.width;
        if target == 0 || target > w {
            return Err(Error::InvalidOperation(format!(
                "cannot reduce width {w} to {target}"
            )));
        }
        let indicator = 2 * target > w;
        let mut out = self.branches_by(None, |_, j| {
            if indicator {
                u64::from(j < target)
            } else {
                j / target
            }
        })?;
        for b in out.iter_mut() {
            if Self::reduce_succeeded(w, target, b.outcome) {
                let shift = if indicator { 0 } else { b.outcome * target };
                let st = b.state.take().unwrap();
                b.state = Some(st.shift_down(shift, target));
            }
        }
        Ok(out)
    }

    fn shift_down(mut self, shift: u64, new_width: u64) -> Self {
        self.offset = self.offset.add_scaled(&self.secret, shift);
        self.support.base -= shift;
        self.width = new_width;
        self
    }

    /// Turn a sample of length w into one of length `target`.
    ///
    /// For target > w/2 the indicator [j < target] is measured; otherwise the
    /// block index ⌊j/target⌋, succeeding when the block is complete. Returns
    /// the success flag and the post-measurement state; failures are not
    /// retried here.
    pub fn reduce_r<R: Rng + ?Sized>(self, target: u64, rng: &mut R) -> Result<(bool, CosetState)> {
        let w = self.width;
        let b = Self::pick(self.reduce_r_branches(target)?, rng);
        Ok((
            Self::reduce_succeeded(w, target, b.outcome),
            b.state.unwrap(),
        ))
    }

    // ---- measurements that keep the coset form -------------------------

    pub(crate) fn project_branches(&self, modulus: u64) -> Result<Vec<Branch>> {
        if modulus == 0 {
            return Err(Error::InvalidOperation("modulus 0".into()));
        }
        let period = self.linear_period(1, modulus);
        self.branches_by(Some(period), |_, j| j % modulus)
    }

    /// Period in the support index of i ↦ coef·(d·i) mod modulus.
    fn linear_period(&self, coef: u64, modulus: u64) -> u64 {
        let step = mul_mod(coef % modulus, self.support.stride % modulus, modulus);
        modulus / gcd(step, modulus)
    }

    /// Measure j mod `modulus` (the hybrid level for modulus p^k). Returns the residue.
    pub fn project_j_mod<R: Rng + ?Sized>(
        self,
        modulus: u64,
        rng: &mut R,
    ) -> Result<(u64, CosetState)> {
        let b = Self::pick(self.project_branches(modulus)?, rng);
        Ok((b.outcome, b.state.unwrap()))
    }

    fn check_form(&self, form: &LinearForm) -> Result<()> {
        if form.y_coeffs.len() != self.params.n() {
            return Err(Error::DimensionMismatch {
                expected: self.params.n(),
                got: form.y_coeffs.len(),
            });
        }
        if form.modulus == 0 {
            return Err(Error::InvalidOperation("modulus 0".into()));
        }
        Ok(())
    }

    pub(crate) fn linear_branches(&self, form: &LinearForm) -> Result<Vec<Branch>> {
        self.check_form(form)?;
        if form.reads_y() && self.params.q() % form.modulus != 0 {
            return Err(Error::InvalidOperation(format!(
                "modulus {} must divide q to read the second register",
                form.modulus
            )));
        }
        let m = form.modulus;
        let coef = form
            .y_coeffs
            .iter()
            .zip(self.secret.coords())
            .fold(form.j_coeff % m, |acc, (&c, &s)| {
                (acc + mul_mod(c % m, s % m, m)) % m
            });
        let period = self.linear_period(coef, m);
        self.branches_by(Some(period), |_, j| form.eval(j, self.y_of(j).coords()))
    }

    /// Measure (a·j + ⟨c, y⟩) mod P into an ancilla and discard it.
    pub fn measure_linear<R: Rng + ?Sized>(
        self,
        form: &LinearForm,
        rng: &mut R,
    ) -> Result<(u64, CosetState)> {
        let b = Self::pick(self.linear_branches(form)?, rng);
        Ok((b.outcome, b.state.unwrap()))
    }

    pub(crate) fn second_branches(&self) -> Result<Vec<Branch>> {
        self.branches_by(None, |_, j| self.y_of(j).to_index() as u64)
    }

    /// Measure the second register in the computational basis.
    pub fn measure_second<R: Rng + ?Sized>(self, rng: &mut R) -> Result<(ZqVector, CosetState)> {
        let b = Self::pick(self.second_branches()?, rng);
        let (q, n) = (self.params.q(), self.params.n());
        Ok((
            ZqVector::from_index(q, n, b.outcome as usize),
            b.state.unwrap(),
        ))
    }

    // ---- unitaries -----------------------------------------------------

    /// Multiply by ω_M^{a·j + ⟨c, y⟩}. On the coset support this is a phase
    /// linear in the support index, with slope d·(a + ⟨c, s⟩).
    pub fn adversary_phase(self, form: &LinearForm) -> Result<CosetState> {
        self.check_form(form)?;
        let m = form.modulus;
        let q = self.params.q();
        if form
            .y_coeffs
            .iter()
            .any(|&c| (c as u128 * q as u128) % m as u128 != 0)
        {
            return Err(Error::IncompatiblePhaseModulus {
                modulus: m,
                cap: self.phase_cap(),
            });
        }
        let cs = form
            .y_coeffs
            .iter()
            .zip(self.secret.coords())
            .fold(form.j_coeff % m, |acc, (&c, &s)| {
                (acc + mul_mod(c, s, m)) % m
            });
        let add = mul_mod(self.support.stride % m, cs, m);
        self.compose_phase(m, add)
    }

    /// |j⟩|y⟩ ↦ |j⟩|y − j·v⟩ (S_v).
    pub fn multiply_subtract(mut self, v: &ZqVector) -> Result<CosetState> {
        if v.dim() != self.params.n() || v.modulus() != self.params.q() {
            return Err(Error::ParamMismatch(format!(
                "vector {v} does not live in Z_q^n"
            )));
        }
        self.secret = self.secret.sub(v);
        Ok(self)
    }

    /// |j⟩|y⟩ ↦ |j⟩|y + j·v⟩ (A_v).
    pub fn multiply_add(self, v: &ZqVector) -> Result<CosetState> {
        self.multiply_subtract(&v.neg())
    }

    // ---- Fourier-basis measurements ------------------------------------

    fn after_fourier(&self, u: &ZqVector) -> Result<Self> {
        let q = self.params.q();
        let add = mul_mod(self.support.stride % q, u.dot(&self.secret), q);
        let mut out = self.duplicate().compose_phase(q, add)?;
        out.offset = u.clone();
        out.secret = ZqVector::zeros(q, self.params.n());
        Ok(out)
    }

    pub(crate) fn fourier_branches(&self) -> Result<Vec<Branch>> {
        let (q, n) = (self.params.q(), self.params.n());
        let total = (q as usize).pow(n as u32);
        let pr = 1.0 / total as f64;
        (0..total)
            .map(|idx| {
                let u = ZqVector::from_index(q, n, idx);
                Ok(Branch {
                    outcome: idx as u64,
                    probability: pr,
                    state: Some(self.after_fourier(&u)?),
                })
            })
            .collect()
    }

    /// Apply QFT_{q^n} to the second register and measure it.
    ///
    /// The outcome u is uniform. Afterwards the registers are a product: the
    /// first carries the extra phase ω_q^{j⟨u,s⟩}, the second is |u⟩.
    pub fn fourier_measure_second<R: Rng + ?Sized>(
        self,
        rng: &mut R,
    ) -> Result<(ZqVector, CosetState)> {
        let (q, n) = (self.params.q(), self.params.n());
        let total = (q as u128).pow(n as u32);
        let draw: f64 = rng.gen();
        let idx = ((draw * total as f64) as u128).min(total - 1);
        let u = ZqVector::from_index(q, n, idx as usize);
        let st = self.after_fourier(&u)?;
        Ok((u, st))
    }

    /// Distribution of the outcome k of QFT_w (or its inverse) on the first register.
    pub(crate) fn qft_first_distribution(&self, dir: Direction) -> Vec<f64> {
        let w = self.width;
        let m = self.support.count;
        let groups = self.split(|_, j| self.y_of(j).to_index() as u64);
        let sign: i64 = if dir == Direction::Forward { 1 } else { -1 };
        let norm = 1.0 / (w as f64 * m as f64);
        (0..w)
            .map(|k| {
                groups
                    .values()
                    .map(|idx| {
                        let s: Complex<f64> = idx
                            .iter()
                            .map(|&i| {
                                let j = self.support.at(i);
                                self.amp_phase(i)
                                    .mul(RootOfUnity::new(w, sign * mul_mod(k, j, w) as i64))
                                    .evaluate::<f64>()
                            })
                            .sum();
                        s.norm_sqr() * norm
                    })
                    .sum()
            })
            .collect()
    }

    /// Apply QFT_w (or its inverse) to the first register and measure it.
    pub fn qft_first_measure<R: Rng + ?Sized>(self, dir: Direction, rng: &mut R) -> Result<u64> {
        let dist = self.qft_first_distribution(dir);
        Ok(sample_index(&dist, rng) as u64)
    }

    /// Measure both registers; returns (j, y).
    pub fn measure_full<R: Rng + ?Sized>(self, rng: &mut R) -> Result<(u64, ZqVector)> {
        let w = vec![1.0; self.support.count as usize];
        let j = self.support.at(sample_index(&w, rng) as u64);
        Ok((j, self.y_of(j)))
    }

    /// Outcome code of a full measurement: j·q^n + index(y).
    pub fn full_outcome_code(&self, j: u64, y: &ZqVector) -> u64 {
        let qn = (self.params.q() as u64).pow(self.params.n() as u32);
        j * qn + y.to_index() as u64
    }

    pub(crate) fn full_distribution(&self) -> Vec<(u64, f64)> {
        let m = self.support.count as f64;
        (0..self.support.count)
            .map(|i| {
                let j = self.support.at(i);
                (self.full_outcome_code(j, &self.y_of(j)), 1.0 / m)
            })
            .collect()
    }

    // ---- dense bridge --------------------------------------------------

    /// Amplitudes of the first register, when it is not entangled with the second.
    pub(crate) fn first_register(&self) -> Result<Vec<(u64, RootOfUnity)>> {
        if !self.secret.is_zero() && self.support.count > 1 {
            return Err(Error::InvalidOperation(
                "first register is entangled with the second".into(),
            ));
        }
        Ok((0..self.support.count)
            .map(|i| (self.support.at(i), self.amp_phase(i)))
            .collect())
    }

    /// Dense image over Z_w × Z_q^n.
    pub fn to_dense<T: Real>(&self) -> Result<StateVector<T>> {
        let (q, n) = (self.params.q(), self.params.n());
        let space = IndexSpace::edcp(self.width, q, n)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); space.dim()];
        let a = T::one() / T::of(self.support.count as f64).sqrt();
        let qn = space.stride(0);
        for i in 0..self.support.count {
            let j = self.support.at(i);
            let idx = j as usize * qn + self.y_of(j).to_index();
            amps[idx] = self.amp_phase(i).evaluate::<T>() * a;
        }
        StateVector::new(space, amps)
    }
}

#[cfg(test)]
mod tests;
