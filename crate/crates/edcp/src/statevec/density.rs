use num_complex::Complex;

use super::eigen::{hermitian_eigenvalues, hermitian_function};
use super::{IndexSpace, StateVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest dimension for which D×D density matrices are built.
pub const DENSITY_CAP: u64 = 1 << 11;

/// Multiplicity clustering tolerance for [`DensityOperator::eigen_spectrum`].
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T: Real> {
    space: IndexSpace,
    mat: Vec<Complex<T>>,
}

impl<T: Real> DensityOperator<T> {
    fn zero(space: IndexSpace) -> Result<Self> {
        let d = space.dim();
        if d as u64 > DENSITY_CAP {
            return Err(Error::DimensionCap {
                dim: d as u128,
                cap: DENSITY_CAP,
            });
        }
        Ok(Self {
            space,
            mat: vec![Complex::new(T::zero(), T::zero()); d * d],
        })
    }

    /// From a row-major D×D matrix; checked for hermiticity and unit trace.
    pub fn from_matrix(space: IndexSpace, mat: Vec<Complex<T>>) -> Result<Self> {
        let d = space.dim();
        if mat.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: mat.len(),
            });
        }
        let mut out = Self::zero(space)?;
        out.mat = mat;
        let tol = T::tolerance();
        for i in 0..d {
            for j in 0..i {
                if (out.mat[i * d + j] - out.mat[j * d + i].conj()).norm() > tol {
                    return Err(Error::InvalidOperation("matrix is not Hermitian".into()));
                }
            }
        }
        let tr = out.trace();
        if (tr - T::one()).abs() > tol {
            return Err(Error::BadDistribution(tr.to_f64_lossy()));
        }
        Ok(out)
    }

    pub fn pure(state: &StateVector<T>) -> Result<Self> {
        let mut out = Self::zero(state.space().clone())?;
        out.add_outer(T::one(), state);
        Ok(out)
    }

    pub fn maximally_mixed(space: IndexSpace) -> Result<Self> {
        let d = space.dim();
        let mut out = Self::zero(space)?;
        let w = T::one() / T::of(d as f64);
        for i in 0..d {
            out.mat[i * d + i] = Complex::new(w, T::zero());
        }
        Ok(out)
    }

    /// ρ = Σ_x p_x |ψ_x⟩⟨ψ_x|.
    pub fn from_ensemble(members: &[(f64, StateVector<T>)]) -> Result<Self> {
        let first = members.first().ok_or(Error::BadDistribution(0.0))?;
        let total: f64 = members.iter().map(|m| m.0).sum();
        if (total - 1.0).abs() > 1e-9 || members.iter().any(|m| m.0 < 0.0) {
            return Err(Error::BadDistribution(total));
        }
        let mut out = Self::zero(first.1.space().clone())?;
        for (p, s) in members {
            if s.space() != &out.space {
                return Err(Error::SpaceMismatch(
                    "ensemble members differ in space".into(),
                ));
            }
            out.add_outer(T::of(*p), s);
        }
        Ok(out)
    }

    fn add_outer(&mut self, w: T, s: &StateVector<T>) {
        let d = self.space.dim();
        let amps = s.amps();
        let support: Vec<usize> = (0..d)
            .filter(|&i| amps[i].re != T::zero() || amps[i].im != T::zero())
            .collect();
        for &i in &support {
            let ai = amps[i] * w;
            for &j in &support {
                self.mat[i * d + j] += ai * amps[j].conj();
            }
        }
    }

    pub fn space(&self) -> &IndexSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &[Complex<T>] {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.mat[i * self.dim() + j]
    }

    pub fn trace(&self) -> T {
        let d = self.dim();
        (0..d).map(|i| self.mat[i * d + i].re).sum()
    }

    /// Mixture w·self + (1 − w)·other.
    pub fn mix(&self, w: T, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "mixing operators on different spaces".into(),
            ));
        }
        let mat = self
            .mat
            .iter()
            .zip(&other.mat)
            .map(|(a, b)| *a * w + *b * (T::one() - w))
            .collect();
        Ok(Self {
            space: self.space.clone(),
            mat,
        })
    }

    /// Average of operators on a shared space.
    pub fn average(ops: &[Self]) -> Result<Self> {
        let first = ops.first().ok_or(Error::BadDistribution(0.0))?;
        let mut out = Self::zero(first.space.clone())?;
        let w = T::one() / T::of(ops.len() as f64);
        for op in ops {
            if op.space != out.space {
                return Err(Error::SpaceMismatch(
                    "averaging operators on different spaces".into(),
                ));
            }
            for (a, b) in out.mat.iter_mut().zip(&op.mat) {
                *a += *b * w;
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        let (da, db) = (self.dim(), other.dim());
        let mut out = Self::zero(space)?;
        let d = da * db;
        for i1 in 0..da {
            for j1 in 0..da {
                let a = self.mat[i1 * da + j1];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for i2 in 0..db {
                    for j2 in 0..db {
                        out.mat[(i1 * db + i2) * d + (j1 * db + j2)] = a * other.mat[i2 * db + j2];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut v = hermitian_eigenvalues(&self.mat, self.dim());
        v.reverse();
        v
    }

    /// Descending (eigenvalue, multiplicity) pairs, clustered at 1e-7.
    pub fn eigen_spectrum(&self) -> Vec<(f64, usize)> {
        cluster(
            &self
                .eigenvalues()
                .iter()
                .map(|x| x.to_f64_lossy())
                .collect::<Vec<_>>(),
        )
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|x| x.to_f64_lossy())
            .filter(|&x| x > 1e-14)
            .map(|x| -x * x.log2())
            .sum()
    }

    /// f(ρ) computed spectrally (not a density operator in general).
    pub fn apply_function(&self, f: impl Fn(T) -> T) -> Vec<Complex<T>> {
        hermitian_function(&self.mat, self.dim(), f)
    }

    /// Expectation tr(ρ M) for a row-major matrix M.
    pub fn expectation(&self, m: &[Complex<T>]) -> Complex<T> {
        let d = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            for j in 0..d {
                acc += self.mat[i * d + j] * m[j * d + i];
            }
        }
        acc
    }
}

/// Groups descending values whose neighbours differ by at most 1e-7.
pub fn cluster(desc: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &x in desc {
        match out.last_mut() {
            Some((last, count, sum)) if (*last - x).abs() <= CLUSTER_TOL => {
                *last = x;
                *count += 1;
                *sum += x;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter().map(|(_, c, s)| (s / c as f64, c)).collect()
}

/// Trace norm ‖a − b‖₁ (no factor 1/2): orthogonal pure states are at distance 2.
pub fn trace_distance<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<T> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch("trace distance across spaces".into()));
    }
    let diff: Vec<Complex<T>> = a.mat.iter().zip(&b.mat).map(|(x, y)| *x - *y).collect();
    Ok(hermitian_eigenvalues(&diff, a.dim())
        .into_iter()
        .map(|x| x.abs())
        .sum())
}

impl<T: Real> DensityOperator<T> {
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        trace_distance(self, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::ZqVector;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    type C = Complex<f64>;

    fn random_state(space: IndexSpace, seed: u64) -> StateVector<f64> {
        let mut rng = seeded(seed);
        let amps = (0..space.dim())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(space, amps).unwrap()
    }

    /// |φ_{s,r}(x)⟩ written directly from its amplitude formula.
    fn coset_vector(r: u64, q: u64, s: &ZqVector, x: &ZqVector) -> StateVector<f64> {
        let sp = IndexSpace::edcp(r, q, s.dim()).unwrap();
        let mut amps = vec![C::new(0.0, 0.0); sp.dim()];
        for j in 0..r {
            let y = x.add(&s.scale(j));
            let mut d = vec![j as usize];
            d.extend(y.coords().iter().map(|&c| c as usize));
            amps[sp.encode(&d)] = C::new(1.0 / (r as f64).sqrt(), 0.0);
        }
        StateVector::new(sp, amps).unwrap()
    }

    #[test]
    fn ensemble_examples() {
        let sp = IndexSpace::new(vec![3]).unwrap();
        let s = random_state(sp.clone(), 1);
        let rho = DensityOperator::from_ensemble(&[(1.0, s)]).unwrap();
        assert_eq!(rho.eigen_spectrum().len(), 2);
        assert!((rho.eigenvalues()[0] - 1.0).abs() < 1e-12);

        let members: Vec<_> = (0..8)
            .map(|i| {
                (
                    1.0 / 8.0,
                    StateVector::<f64>::basis(IndexSpace::new(vec![8]).unwrap(), i),
                )
            })
            .collect();
        let mixed = DensityOperator::from_ensemble(&members).unwrap();
        let mm = DensityOperator::maximally_mixed(IndexSpace::new(vec![8]).unwrap()).unwrap();
        assert!(trace_distance(&mixed, &mm).unwrap() < 1e-12);
        let spectrum = mixed.eigen_spectrum();
        assert_eq!(spectrum.len(), 1);
        assert!((spectrum[0].0 - 0.125).abs() < 1e-12 && spectrum[0].1 == 8);

        assert!(matches!(
            DensityOperator::from_ensemble(&[(0.5, random_state(sp, 2))]),
            Err(Error::BadDistribution(_))
        ));
    }

    #[test]
    fn coset_density_spectra() {
        // ρ_{s,2} over Z_2 × Z_4 and its average over s
        let (q, r) = (4u64, 2u64);
        let per_s: Vec<DensityOperator<f64>> = (0..q)
            .map(|s| {
                let s = ZqVector::new(q, vec![s]);
                let members: Vec<_> = (0..q)
                    .map(|x| {
                        (
                            1.0 / q as f64,
                            coset_vector(r, q, &s, &ZqVector::new(q, vec![x])),
                        )
                    })
                    .collect();
                DensityOperator::from_ensemble(&members).unwrap()
            })
            .collect();
        for rho in &per_s {
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            let spectrum = rho.eigen_spectrum();
            assert_eq!(spectrum.len(), 2);
            assert!((spectrum[0].0 - 0.25).abs() < 1e-9 && spectrum[0].1 == 4);
            assert!(spectrum[1].0.abs() < 1e-9 && spectrum[1].1 == 4);
        }
        let avg = DensityOperator::average(&per_s).unwrap();
        let spectrum = avg.eigen_spectrum();
        let expect = [(0.25, 1), (0.125, 6), (0.0, 1)];
        assert_eq!(spectrum.len(), 3);
        for ((v, m), (ev, em)) in spectrum.iter().zip(expect) {
            assert!((v - ev).abs() < 1e-9 && *m == em, "{spectrum:?}");
        }
    }

    #[test]
    fn trace_distance_examples() {
        let sp = IndexSpace::new(vec![4]).unwrap();
        let a = DensityOperator::<f64>::pure(&StateVector::basis(sp.clone(), 0)).unwrap();
        let b = DensityOperator::<f64>::pure(&StateVector::basis(sp.clone(), 2)).unwrap();
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-12);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    /// Truncating a Gaussian superposition to |j| ≤ √κ·r costs a trace distance
    /// that shrinks exponentially in κ.
    #[test]
    fn truncated_gaussian_superposition() {
        let (r, n) = (4.0f64, 64usize);
        let sp = IndexSpace::new(vec![n]).unwrap();
        let build = |bound: i64| {
            let mut amps = vec![C::new(0.0, 0.0); n];
            for j in -bound..=bound {
                let g = (-std::f64::consts::PI * (j * j) as f64 / (r * r)).exp();
                let k = j.rem_euclid(n as i64) as usize;
                let th = 2.0 * std::f64::consts::PI * (3 * j) as f64 / n as f64;
                amps[k] += C::new(th.cos(), th.sin()) * g;
            }
            StateVector::normalized(sp.clone(), amps).unwrap()
        };
        let full = DensityOperator::pure(&build(31)).unwrap();
        let mut prev = f64::INFINITY;
        for kappa in [0.25f64, 1.0, 2.25, 4.0] {
            let bound = (kappa.sqrt() * r).floor() as i64;
            let td = trace_distance(&DensityOperator::pure(&build(bound)).unwrap(), &full).unwrap();
            assert!(
                td <= 4.0 * (-std::f64::consts::PI * kappa).exp(),
                "κ={kappa}: {td}"
            );
            assert!(td < prev || td < 1e-7);
            prev = td;
        }
    }

    /// Without the 1/2 the trace norm can exceed ‖u − v‖₁: a small rotation
    /// gives 2 sin θ against roughly θ.
    #[test]
    fn unhalved_norm_exceeds_l1_for_small_rotations() {
        let sp = IndexSpace::new(vec![2]).unwrap();
        let th = 0.01f64;
        let u = StateVector::<f64>::basis(sp.clone(), 0);
        let v = StateVector::new(sp, vec![C::new(th.cos(), 0.0), C::new(th.sin(), 0.0)]).unwrap();
        let l1 = (1.0 - th.cos()) + th.sin();
        let td = trace_distance(&u.to_density().unwrap(), &v.to_density().unwrap()).unwrap();
        assert!((td - 2.0 * th.sin()).abs() < 1e-12);
        assert!(td > l1);
    }

    #[test]
    fn entropy_of_mixed_qubit() {
        let mm =
            DensityOperator::<f64>::maximally_mixed(IndexSpace::new(vec![4]).unwrap()).unwrap();
        assert!((mm.entropy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kron_dimensions_and_trace() {
        let a = DensityOperator::pure(&random_state(IndexSpace::new(vec![2]).unwrap(), 1)).unwrap();
        let b = DensityOperator::pure(&random_state(IndexSpace::new(vec![3]).unwrap(), 2)).unwrap();
        let k = a.kron(&b).unwrap();
        assert_eq!(k.dim(), 6);
        assert!((k.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_cap() {
        let sp = IndexSpace::new(vec![4096]).unwrap();
        assert!(matches!(
            DensityOperator::<f64>::maximally_mixed(sp),
            Err(Error::DimensionCap { .. })
        ));
    }

    proptest! {
        #[test]
        fn spectrum_is_valid(seed in 0u64..500, k in 1usize..5) {
            let sp = IndexSpace::new(vec![3, 2]).unwrap();
            let members: Vec<_> = (0..k)
                .map(|i| (1.0 / k as f64, random_state(sp.clone(), seed * 10 + i as u64)))
                .collect();
            let rho = DensityOperator::from_ensemble(&members).unwrap();
            let spectrum = rho.eigen_spectrum();
            let total: f64 = spectrum.iter().map(|(v, m)| v * *m as f64).sum();
            prop_assert!((total - 1.0).abs() < 1e-8);
            prop_assert!(spectrum.iter().all(|(v, _)| *v >= -1e-9));
            prop_assert!(spectrum.windows(2).all(|w| w[0].0 > w[1].0));
        }

        #[test]
        fn pure_state_distance_bounded_by_l2(seed in 0u64..500) {
            let sp = IndexSpace::new(vec![5]).unwrap();
            let u = random_state(sp.clone(), seed);
            let v = random_state(sp, seed + 7919);
            let l2: f64 = u.amps().iter().zip(v.amps()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let l1: f64 = u.amps().iter().zip(v.amps()).map(|(a, b)| (a - b).norm()).sum();
            let td = trace_distance(&u.to_density().unwrap(), &v.to_density().unwrap()).unwrap();
            prop_assert!(td <= 2.0 * l2 + 1e-12);
            prop_assert!(td / 2.0 <= l1 + 1e-12);
        }
    }
}
