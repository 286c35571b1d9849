//! Exact arithmetic over Z_q and Z_q^n.

mod crt;
mod gaussian;
mod linear;

pub use crt::crt_reconstruct;
pub use gaussian::{discrete_gaussian_pmf, wrapped_gaussian_pmf, GAUSSIAN_KAPPA};
pub use linear::{solve_linear_mod, LinearSolution};

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default bound on prime factors of q.
pub const PRIME_BOUND: u64 = 1 << 20;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Largest e with p^e | x (x > 0).
pub fn valuation(mut x: u64, p: u64) -> u32 {
    let mut e = 0;
    while x != 0 && x % p == 0 {
        x /= p;
        e += 1;
    }
    e
}

/// Trial-division factorization with every prime bounded by `bound`.
pub fn factorize_bounded(q: u64, bound: u64) -> Result<Vec<(u64, u32)>> {
    if q < 2 {
        return Err(Error::BadModulus(q));
    }
    let mut out = Vec::new();
    let mut rest = q;
    let mut p = 2u64;
    while p * p <= rest && p <= bound {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        if rest > bound {
            return Err(Error::PrimeBoundExceeded {
                cofactor: rest,
                bound,
            });
        }
        out.push((rest, 1));
    }
    Ok(out)
}

pub fn factorize(q: u64) -> Result<Vec<(u64, u32)>> {
    factorize_bounded(q, PRIME_BOUND)
}

/// If `x = p^e` for a prime p, returns (p, e).
pub fn prime_power(x: u64) -> Option<(u64, u32)> {
    match factorize(x).ok()?.as_slice() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus {
    q: u64,
    factors: Vec<(u64, u32)>,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_bound(q, PRIME_BOUND)
    }

    pub fn with_bound(q: u64, bound: u64) -> Result<Self> {
        if q >= 1 << 31 {
            return Err(Error::BadModulus(q));
        }
        let factors = factorize_bounded(q, bound)?;
        Ok(Self { q, factors })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    /// Exponent of p in q (0 if p does not divide q).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|(f, _)| *f == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        Modulus::new(q)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.q
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// An element of Z_q^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZqVector {
    q: u64,
    coords: Vec<u64>,
}

impl ZqVector {
    pub fn new(q: u64, coords: Vec<u64>) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let coords = coords.into_iter().map(|c| c % q).collect();
        Self { q, coords }
    }

    pub fn from_signed(q: u64, coords: &[i64]) -> Self {
        let coords = coords
            .iter()
            .map(|&c| c.rem_euclid(q as i64) as u64)
            .collect();
        Self { q, coords }
    }

    pub fn zeros(q: u64, n: usize) -> Self {
        Self {
            q,
            coords: vec![0; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(q: u64, n: usize, rng: &mut R) -> Self {
        Self {
            q,
            coords: (0..n).map(|_| rng.gen_range(0..q)).collect(),
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.q, other.q, "modulus mismatch");
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % self.q)
            .collect();
        Self { q: self.q, coords }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + self.q - b) % self.q)
            .collect();
        Self { q: self.q, coords }
    }

    pub fn neg(&self) -> Self {
        let coords = self.coords.iter().map(|a| (self.q - a) % self.q).collect();
        Self { q: self.q, coords }
    }

    pub fn scale(&self, k: u64) -> Self {
        let coords = self.coords.iter().map(|&a| mul_mod(a, k, self.q)).collect();
        Self { q: self.q, coords }
    }

    /// self + k·other
    pub fn add_scaled(&self, other: &Self, k: u64) -> Self {
        self.add(&other.scale(k))
    }

    pub fn dot(&self, other: &Self) -> u64 {
        self.check(other);
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0, |acc, (&a, &b)| (acc + mul_mod(a, b, self.q)) % self.q)
    }

    /// Coordinates reduced into a smaller modulus m | q.
    pub fn reduce(&self, m: u64) -> Self {
        assert!(self.q % m == 0, "{m} does not divide {}", self.q);
        Self::new(m, self.coords.clone())
    }

    /// Row-major index of this vector in Z_q^n (first coordinate most significant).
    pub fn to_index(&self) -> usize {
        self.coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.q as usize + c as usize)
    }

    pub fn from_index(q: u64, n: usize, mut idx: usize) -> Self {
        let mut coords = vec![0; n];
        for c in coords.iter_mut().rev() {
            *c = (idx % q as usize) as u64;
            idx /= q as usize;
        }
        Self { q, coords }
    }

    /// Every vector of Z_q^n in index order.
    pub fn enumerate(q: u64, n: usize) -> impl Iterator<Item = ZqVector> {
        let total = (q as usize).pow(n as u32);
        (0..total).map(move |i| ZqVector::from_index(q, n, i))
    }
}

impl fmt::Display for ZqVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ") mod {}", self.q)
    }
}

/// exp(2πi k/M)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    modulus: u64,
    exponent: u64,
}

impl RootOfUnity {
    pub fn new(modulus: u64, exponent: i64) -> Self {
        assert!(modulus >= 1);
        Self {
            modulus,
            exponent: exponent.rem_euclid(modulus as i64) as u64,
        }
    }

    pub fn one() -> Self {
        Self {
            modulus: 1,
            exponent: 0,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Product, expressed over the lcm of the two moduli.
    pub fn mul(self, other: Self) -> Self {
        let m = lcm(self.modulus, other.modulus);
        let a = self.exponent as u128 * (m / self.modulus) as u128;
        let b = other.exponent as u128 * (m / other.modulus) as u128;
        Self {
            modulus: m,
            exponent: ((a + b) % m as u128) as u64,
        }
    }

    pub fn conj(self) -> Self {
        Self {
            modulus: self.modulus,
            exponent: (self.modulus - self.exponent) % self.modulus,
        }
    }

    pub fn evaluate<T: Real>(&self) -> Complex<T> {
        if self.exponent == 0 {
            return Complex::new(T::one(), T::zero());
        }
        let theta = 2.0 * std::f64::consts::PI * self.exponent as f64 / self.modulus as f64;
        Complex::new(T::of(theta.cos()), T::of(theta.sin()))
    }
}
