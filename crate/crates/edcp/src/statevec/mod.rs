//! Dense statevector and density-operator simulator.
//!
//! Registers are laid out row-major: register 0 is the most significant digit
//! of the flat index. This is the brute-force oracle for the symbolic engine.

mod density;
pub mod eigen;

pub use density::{DensityOperator, DENSITY_CAP};

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::modmath::{RootOfUnity, ZqVector};
use crate::rng::sample_index;
use crate::scalar::Real;

/// Default cap on the dimension of a dense vector.
pub const DENSE_CAP: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSpace {
    factors: Vec<usize>,
    dim: usize,
}

impl IndexSpace {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        Self::with_cap(factors, DENSE_CAP)
    }

    pub fn with_cap(factors: Vec<usize>, cap: u64) -> Result<Self> {
        if factors.iter().any(|&f| f == 0) {
            return Err(Error::SpaceMismatch("register of size 0".into()));
        }
        let dim: u128 = factors.iter().map(|&f| f as u128).product();
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(Self {
            factors,
            dim: dim as usize,
        })
    }

    /// Z_r × Z_q^n
    pub fn edcp(r: u64, q: u64, n: usize) -> Result<Self> {
        let mut f = vec![r as usize];
        f.extend(std::iter::repeat(q as usize).take(n));
        Self::new(f)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn registers(&self) -> usize {
        self.factors.len()
    }

    /// Index distance between consecutive values of a register.
    pub fn stride(&self, reg: usize) -> usize {
        self.factors[reg + 1..].iter().product()
    }

    pub fn digit(&self, idx: usize, reg: usize) -> usize {
        (idx / self.stride(reg)) % self.factors[reg]
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f;
            idx /= f;
        }
        out
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.factors.len());
        digits.iter().zip(&self.factors).fold(0, |acc, (&d, &f)| {
            debug_assert!(d < f);
            acc * f + d
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Self::new(f)
    }

    fn check_register(&self, reg: usize) -> Result<()> {
        if reg >= self.factors.len() {
            return Err(Error::SpaceMismatch(format!(
                "register {reg} out of range for {} registers",
                self.factors.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    space: IndexSpace,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes; they must already be normalized.
    pub fn new(space: IndexSpace, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amps.len(),
            });
        }
        let s = Self { space, amps };
        let norm = s.norm_sqr();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(Error::BadDistribution(norm.to_f64_lossy()));
        }
        Ok(s)
    }

    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(space: IndexSpace, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amps.len(),
            });
        }
        let mut s = Self { space, amps };
        let norm = s.norm_sqr().sqrt();
        if norm == T::zero() {
            return Err(Error::ZeroProbabilityBranch);
        }
        s.scale(T::one() / norm);
        Ok(s)
    }

    pub fn basis(space: IndexSpace, idx: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); space.dim()];
        amps[idx] = Complex::new(T::one(), T::zero());
        Self { space, amps }
    }

    pub fn space(&self) -> &IndexSpace {
        &self.space
    }

    pub fn amps(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amp(&self, idx: usize) -> Complex<T> {
        self.amps[idx]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, k: T) {
        for a in self.amps.iter_mut() {
            *a = *a * k;
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps
            .iter()
            .map(|a| a.norm_sqr().to_f64_lossy())
            .collect()
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.space, other.space);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// Equal up to a global phase, amplitude-wise within `tol`.
    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        if self.space != other.space {
            return false;
        }
        let ip = self.inner(other);
        let mag = ip.norm();
        if mag == T::zero() {
            return false;
        }
        let phase = ip / mag;
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (*a * phase - *b).norm() <= tol)
    }

    /// QFT_N on one register: |j⟩ ↦ N^{-1/2} Σ_k ω_N^{±jk} |k⟩.
    pub fn qft(self, reg: usize, dir: Direction) -> Result<Self> {
        self.space.check_register(reg)?;
        let n = self.space.factors[reg];
        let stride = self.space.stride(reg);
        let block = n * stride;
        let sign: i64 = match dir {
            Direction::Forward => 1,
            Direction::Inverse => -1,
        };
        let table: Vec<Complex<T>> = (0..n)
            .map(|k| RootOfUnity::new(n as u64, sign * k as i64).evaluate())
            .collect();
        let norm = T::one() / T::of(n as f64).sqrt();
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for outer in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                for (j, c) in col.iter_mut().enumerate() {
                    *c = self.amps[outer + j * stride + inner];
                }
                for k in 0..n {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (j, c) in col.iter().enumerate() {
                        if c.re != T::zero() || c.im != T::zero() {
                            acc += *c * table[(j * k) % n];
                        }
                    }
                    out[outer + k * stride + inner] = acc * norm;
                }
            }
        }
        Ok(Self {
            space: self.space,
            amps: out,
        })
    }

    /// Basis permutation |idx⟩ ↦ |map(idx)⟩; `map` must be a bijection.
    pub fn permute(self, map: impl Fn(usize) -> usize) -> Result<Self> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        let mut hit = vec![false; self.amps.len()];
        for (idx, a) in self.amps.into_iter().enumerate() {
            let t = map(idx);
            if t >= out.len() || hit[t] {
                return Err(Error::InvalidOperation("map is not a permutation".into()));
            }
            hit[t] = true;
            out[t] = a;
        }
        Ok(Self {
            space: self.space,
            amps: out,
        })
    }

    /// A_s (sign +1) or S_s (sign −1): |j⟩|y⟩ ↦ |j⟩|y ± j·s⟩ on Z_r × Z_q^n.
    pub fn multiply_add(self, s: &ZqVector, sign: i8) -> Result<Self> {
        let f = self.space.factors.clone();
        let q = s.modulus() as usize;
        if f.len() != s.dim() + 1 || f[1..].iter().any(|&x| x != q) {
            return Err(Error::SpaceMismatch(format!(
                "expected Z_r × Z_{q}^{}, got {f:?}",
                s.dim()
            )));
        }
        let space = self.space.clone();
        let coeff: Vec<usize> = s
            .coords()
            .iter()
            .map(|&c| {
                if sign >= 0 {
                    c as usize
                } else {
                    (q - c as usize) % q
                }
            })
            .collect();
        self.permute(|idx| {
            let mut d = space.decode(idx);
            let j = d[0];
            for (k, c) in coeff.iter().enumerate() {
                d[k + 1] = (d[k + 1] + j * c) % q;
            }
            space.encode(&d)
        })
    }

    pub fn diagonal_phase(mut self, phase: impl Fn(usize) -> RootOfUnity) -> Self {
        for (idx, a) in self.amps.iter_mut().enumerate() {
            *a = *a * phase(idx).evaluate::<T>();
        }
        self
    }

    /// Born distribution of `f(idx)` as ascending (value, probability) pairs.
    pub fn distribution_of(&self, f: impl Fn(usize) -> u64) -> Vec<(u64, f64)> {
        let mut map = std::collections::BTreeMap::new();
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr().to_f64_lossy();
            if p > 0.0 {
                *map.entry(f(idx)).or_insert(0.0) += p;
            }
        }
        map.into_iter().collect()
    }

    /// Project onto f(idx) = value and renormalize. Returns (probability, state).
    pub fn project(&self, f: impl Fn(usize) -> u64, value: u64) -> Result<(f64, Self)> {
        let mut amps = self.amps.clone();
        for (idx, a) in amps.iter_mut().enumerate() {
            if f(idx) != value {
                *a = Complex::new(T::zero(), T::zero());
            }
        }
        let p: f64 = amps.iter().map(|a| a.norm_sqr().to_f64_lossy()).sum();
        if p <= 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        Ok((p, Self::normalized(self.space.clone(), amps)?))
    }

    /// Every outcome of measuring f with its probability and post-state.
    pub fn branches(&self, f: impl Fn(usize) -> u64 + Copy) -> Result<Vec<(u64, f64, Self)>> {
        self.distribution_of(f)
            .into_iter()
            .map(|(v, _)| {
                let (p, s) = self.project(f, v)?;
                Ok((v, p, s))
            })
            .collect()
    }

    /// Measure the observable f; one uniform draw, outcomes in ascending order.
    pub fn measure_with<R: Rng + ?Sized>(
        self,
        f: impl Fn(usize) -> u64 + Copy,
        rng: &mut R,
    ) -> Result<(u64, Self)> {
        let dist = self.distribution_of(f);
        if dist.is_empty() {
            return Err(Error::ZeroProbabilityBranch);
        }
        let weights: Vec<f64> = dist.iter().map(|d| d.1).collect();
        let v = dist[sample_index(&weights, rng)].0;
        let (_, s) = self.project(f, v)?;
        Ok((v, s))
    }

    pub fn measure_register<R: Rng + ?Sized>(
        self,
        reg: usize,
        rng: &mut R,
    ) -> Result<(usize, Self)> {
        self.space.check_register(reg)?;
        let space = self.space.clone();
        let (v, s) = self.measure_with(|idx| space.digit(idx, reg) as u64, rng)?;
        Ok((v as usize, s))
    }

    /// Resize a register, moving value v to map(v); amplitude on unmapped values must vanish.
    pub fn reindex_register(
        self,
        reg: usize,
        new_size: usize,
        map: impl Fn(usize) -> Option<usize>,
    ) -> Result<Self> {
        self.space.check_register(reg)?;
        let mut factors = self.space.factors.clone();
        factors[reg] = new_size;
        let space = IndexSpace::new(factors)?;
        let mut out = vec![Complex::new(T::zero(), T::zero()); space.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut d = self.space.decode(idx);
            match map(d[reg]) {
                Some(v) if v < new_size => {
                    d[reg] = v;
                    out[space.encode(&d)] += *a;
                }
                _ => {
                    if a.norm_sqr() > T::tolerance() * T::tolerance() {
                        return Err(Error::InvalidOperation(format!(
                            "register {reg} value {} carries amplitude but has no image",
                            d[reg]
                        )));
                    }
                }
            }
        }
        Ok(Self { space, amps: out })
    }

    /// Remove a register that is in a definite basis state.
    pub fn discard_register(self, reg: usize) -> Result<Self> {
        self.space.check_register(reg)?;
        let dist = self.distribution_of(|idx| self.space.digit(idx, reg) as u64);
        let [(value, _)] = dist.as_slice() else {
            return Err(Error::InvalidOperation(format!(
                "register {reg} is not in a basis state"
            )));
        };
        let mut factors = self.space.factors.clone();
        factors.remove(reg);
        let space = IndexSpace::new(factors)?;
        let mut out = vec![Complex::new(T::zero(), T::zero()); space.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut d = self.space.decode(idx);
            if d[reg] as u64 == *value {
                d.remove(reg);
                out[space.encode(&d)] = *a;
            }
        }
        Ok(Self { space, amps: out })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        let mut amps = Vec::with_capacity(space.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        Ok(Self { space, amps })
    }

    /// Weight of each value of register 0: π_k = (Σ_rest |amp(k, rest)|²)^{1/2}.
    pub fn first_register_weights(&self) -> Vec<T> {
        let n = self.space.factors[0];
        let stride = self.space.stride(0);
        (0..n)
            .map(|k| {
                self.amps[k * stride..(k + 1) * stride]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum::<T>()
                    .sqrt()
            })
            .collect()
    }

    /// Quantum rejection sampling on register 0 towards target weights ε.
    ///
    /// Succeeds with probability ‖ε‖₂². On success the register-0 profile is
    /// ε/‖ε‖ with the conditional states (and their phases) untouched; on
    /// failure the complementary branch is returned.
    pub fn rejection_resample<R: Rng + ?Sized>(
        self,
        eps: &[T],
        rng: &mut R,
    ) -> Result<(bool, Self)> {
        let pi = self.first_register_weights();
        if eps.len() != pi.len() {
            return Err(Error::DimensionMismatch {
                expected: pi.len(),
                got: eps.len(),
            });
        }
        for (k, (&e, &p)) in eps.iter().zip(&pi).enumerate() {
            if e < T::zero() || e > p + T::tolerance() {
                return Err(Error::WeightExceedsAmplitude(k));
            }
        }
        let success: f64 = eps.iter().map(|e| (*e * *e).to_f64_lossy()).sum();
        let accept = sample_index(&[1.0 - success, success], rng) == 1;
        let stride = self.space.stride(0);
        let mut amps = self.amps;
        for (k, chunk) in amps.chunks_mut(stride).enumerate() {
            let p = pi[k];
            let factor = if p == T::zero() {
                T::zero()
            } else if accept {
                eps[k] / p
            } else {
                (p * p - eps[k] * eps[k]).max(T::zero()).sqrt() / p
            };
            for a in chunk.iter_mut() {
                *a = *a * factor;
            }
        }
        let s = Self::normalized(self.space, amps)?;
        Ok((accept, s))
    }

    pub fn to_density(&self) -> Result<DensityOperator<T>> {
        DensityOperator::pure(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn random_state(space: IndexSpace, seed: u64) -> StateVector<f64> {
        let mut rng = seeded(seed);
        let amps = (0..space.dim())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(space, amps).unwrap()
    }

    /// QFT as an explicit matrix, written out independently of the fast path.
    fn qft_matrix(n: usize) -> Vec<C> {
        let mut m = vec![c(0.0, 0.0); n * n];
        for k in 0..n {
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                m[k * n + j] = c(th.cos(), th.sin()) / (n as f64).sqrt();
            }
        }
        m
    }

    #[test]
    fn hadamard_and_qft4() {
        let sp = IndexSpace::new(vec![2]).unwrap();
        let s = StateVector::<f64>::basis(sp, 0)
            .qft(0, Direction::Forward)
            .unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((s.amp(0) - c(h, 0.0)).norm() < 1e-15 && (s.amp(1) - c(h, 0.0)).norm() < 1e-15);

        let sp = IndexSpace::new(vec![4]).unwrap();
        let s = StateVector::<f64>::basis(sp, 1)
            .qft(0, Direction::Forward)
            .unwrap();
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for k in 0..4 {
            assert!((s.amp(k) - expect[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn qft_matches_matrix_on_middle_register() {
        let sp = IndexSpace::new(vec![2, 5, 3]).unwrap();
        let s = random_state(sp.clone(), 1);
        let out = s.clone().qft(1, Direction::Forward).unwrap();
        let m = qft_matrix(5);
        for a in 0..2 {
            for b in 0..3 {
                for k in 0..5 {
                    let expect: C = (0..5)
                        .map(|j| m[k * 5 + j] * s.amp(sp.encode(&[a, j, b])))
                        .sum();
                    assert!((out.amp(sp.encode(&[a, k, b])) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn qft_unitary_for_used_sizes() {
        for n in [2usize, 3, 4, 5, 6, 8, 9, 16, 27, 97] {
            let m = qft_matrix(n);
            for i in 0..n {
                for j in 0..n {
                    let dot: C = (0..n).map(|k| m[i * n + k] * m[j * n + k].conj()).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(e, 0.0)).norm() < 1e-10);
                }
            }
            // the fast path agrees with the matrix on every basis vector
            let sp = IndexSpace::new(vec![n]).unwrap();
            for j in 0..n.min(6) {
                let out = StateVector::<f64>::basis(sp.clone(), j)
                    .qft(0, Direction::Forward)
                    .unwrap();
                for k in 0..n {
                    assert!((out.amp(k) - m[k * n + j]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn multiply_add_example() {
        let sp = IndexSpace::edcp(2, 4, 1).unwrap();
        let s = ZqVector::new(4, vec![3]);
        let st = StateVector::<f64>::basis(sp.clone(), sp.encode(&[1, 1]));
        let out = st.multiply_add(&s, 1).unwrap();
        assert!((out.amp(sp.encode(&[1, 0])) - c(1.0, 0.0)).norm() < 1e-15);
        let zero = ZqVector::zeros(4, 1);
        let r = random_state(sp.clone(), 2);
        assert_eq!(r.clone().multiply_add(&zero, 1).unwrap(), r);
        assert!(matches!(
            r.multiply_add(&ZqVector::zeros(4, 2), 1),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn phase_example_p2() {
        let sp = IndexSpace::edcp(2, 4, 1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[sp.encode(&[0, 1])] = c(h, 0.0);
        amps[sp.encode(&[1, 2])] = c(h, 0.0);
        let st = StateVector::new(sp.clone(), amps).unwrap();
        let sp2 = sp.clone();
        let out = st.diagonal_phase(|idx| RootOfUnity::new(2, sp2.digit(idx, 0) as i64));
        assert!((out.amp(sp.encode(&[0, 1])) - c(h, 0.0)).norm() < 1e-15);
        assert!((out.amp(sp.encode(&[1, 2])) - c(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn measurement_examples() {
        let sp = IndexSpace::new(vec![2, 2]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let amps = vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)];
        let st = StateVector::new(sp.clone(), amps).unwrap();
        let mut rng = seeded(0);
        loop {
            let (v, post) = st.clone().measure_register(1, &mut rng).unwrap();
            if v == 1 {
                assert!((post.amp(sp.encode(&[0, 1])) - c(1.0, 0.0)).norm() < 1e-12);
                break;
            }
        }
        let b = StateVector::<f64>::basis(sp.clone(), 3);
        for _ in 0..10 {
            assert_eq!(b.clone().measure_register(0, &mut rng).unwrap().0, 1);
        }
    }

    #[test]
    fn plus_state_frequencies() {
        let sp = IndexSpace::new(vec![2]).unwrap();
        let plus = StateVector::<f64>::basis(sp, 0)
            .qft(0, Direction::Forward)
            .unwrap();
        let mut rng = seeded(12);
        let trials = 10_000;
        let ones = (0..trials)
            .filter(|_| plus.clone().measure_register(0, &mut rng).unwrap().0 == 1)
            .count();
        assert!((ones as f64 / trials as f64 - 0.5).abs() < 0.05);
    }

    #[test]
    fn born_frequencies_over_seeds() {
        for seed in 0..100u64 {
            let sp = IndexSpace::new(vec![3, 2]).unwrap();
            let st = random_state(sp.clone(), 1000 + seed);
            let exact = st.distribution_of(|i| sp.digit(i, 0) as u64);
            let mut rng = seeded(seed);
            let trials = 400;
            let mut counts = [0usize; 3];
            for _ in 0..trials {
                counts[st.clone().measure_register(0, &mut rng).unwrap().0] += 1;
            }
            for (v, p) in exact {
                let f = counts[v as usize] as f64 / trials as f64;
                assert!((f - p).abs() < 4.0 / (trials as f64).sqrt(), "seed {seed}");
            }
        }
    }

    #[test]
    fn rejection_examples() {
        let sp = IndexSpace::new(vec![4]).unwrap();
        let uniform = StateVector::<f64>::basis(sp.clone(), 0)
            .qft(0, Direction::Forward)
            .unwrap();
        let pi = uniform.first_register_weights();
        let mut rng = seeded(3);
        let (ok, same) = uniform.clone().rejection_resample(&pi, &mut rng).unwrap();
        assert!(ok && same.equal_up_to_phase(&uniform, 1e-12));

        let half: Vec<f64> = pi.iter().map(|p| p / 2f64.sqrt()).collect();
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| {
                uniform
                    .clone()
                    .rejection_resample(&half, &mut rng)
                    .unwrap()
                    .0
            })
            .count();
        let f = hits as f64 / trials as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25f64 / trials as f64).sqrt());

        let too_big = vec![1.0, 0.0, 0.0, 0.0];
        assert_eq!(
            uniform.rejection_resample(&too_big, &mut rng).unwrap_err(),
            Error::WeightExceedsAmplitude(0)
        );
    }

    #[test]
    fn rejection_keeps_phases() {
        let sp = IndexSpace::new(vec![3, 2]).unwrap();
        let st = random_state(sp.clone(), 8);
        let pi = st.first_register_weights();
        let eps: Vec<f64> = pi
            .iter()
            .enumerate()
            .map(|(k, p)| p * [0.2, 0.9, 0.5][k])
            .collect();
        let mut rng = seeded(1);
        let post = loop {
            let (ok, post) = st.clone().rejection_resample(&eps, &mut rng).unwrap();
            if ok {
                break post;
            }
        };
        let norm: f64 = eps.iter().map(|e| e * e).sum::<f64>().sqrt();
        for (idx, a) in st.amps().iter().enumerate() {
            let k = sp.digit(idx, 0);
            let expect = *a * (eps[k] / pi[k] / norm);
            assert!((post.amp(idx) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(
            IndexSpace::new(vec![1 << 12, 1 << 11]),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn discard_requires_basis_state() {
        let sp = IndexSpace::new(vec![2, 3]).unwrap();
        let st = StateVector::<f64>::basis(sp.clone(), sp.encode(&[1, 2]));
        let out = st.discard_register(1).unwrap();
        assert_eq!(out.space().factors(), &[2]);
        assert!((out.amp(1).norm() - 1.0).abs() < 1e-15);
        let mixed = random_state(sp, 4);
        assert!(mixed.discard_register(0).is_err());
    }

    #[test]
    fn single_precision_qft_roundtrip() {
        let sp = IndexSpace::new(vec![6, 2]).unwrap();
        let st = StateVector::<f32>::basis(sp, 7);
        let back = st
            .clone()
            .qft(0, Direction::Forward)
            .unwrap()
            .qft(0, Direction::Inverse)
            .unwrap();
        assert!(back.equal_up_to_phase(&st, 1e-5));
    }

    proptest! {
        #[test]
        fn qft_roundtrip_is_identity(n in 1usize..12, m in 1usize..4, seed in 0u64..1000) {
            let sp = IndexSpace::new(vec![m, n]).unwrap();
            let st = random_state(sp, seed);
            let back = st.clone().qft(1, Direction::Forward).unwrap().qft(1, Direction::Inverse).unwrap();
            for (a, b) in st.amps().iter().zip(back.amps()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn unitaries_preserve_norm(r in 1u64..5, q in 2u64..6, n in 1usize..3, seed in 0u64..1000) {
            let sp = IndexSpace::edcp(r, q, n).unwrap();
            let st = random_state(sp.clone(), seed);
            let mut rng = seeded(seed);
            let s = ZqVector::random(q, n, &mut rng);
            let out = st.clone().multiply_add(&s, 1).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            let back = out.clone().multiply_add(&s, -1).unwrap();
            for (a, b) in st.amps().iter().zip(back.amps()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
            let ph = out.qft(0, Direction::Forward).unwrap()
                .diagonal_phase(|i| RootOfUnity::new(7, i as i64));
            prop_assert!((ph.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
