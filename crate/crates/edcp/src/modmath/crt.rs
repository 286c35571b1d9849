use super::{gcd, inv_mod, mul_mod, ZqVector};
use crate::error::{Error, Result};

/// Combine residues modulo pairwise coprime moduli into one vector modulo their product.
///
/// Each input carries its own modulus.
pub fn crt_reconstruct(residues: &[ZqVector]) -> Result<ZqVector> {
    let first = residues
        .first()
        .ok_or_else(|| Error::InvalidOperation("no residues to combine".into()))?;
    let n = first.dim();
    let mut acc = first.clone();
    for r in &residues[1..] {
        if r.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.dim(),
            });
        }
        let (m1, m2) = (acc.modulus(), r.modulus());
        if gcd(m1, m2) != 1 {
            return Err(Error::NonCoprimeModuli(m1, m2));
        }
        let m = m1.checked_mul(m2).ok_or(Error::BadModulus(u64::MAX))?;
        // x = a1 + m1·((a2 − a1)·m1^{-1} mod m2)
        let inv = inv_mod(m1 % m2, m2).unwrap_or(0);
        let coords = acc
            .coords()
            .iter()
            .zip(r.coords())
            .map(|(&a1, &a2)| {
                let diff = (a2 + m2 - a1 % m2) % m2;
                let k = mul_mod(diff, inv, m2);
                (a1 + m1 * k) % m
            })
            .collect();
        acc = ZqVector::new(m, coords);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::factorize;
    use crate::rng::seeded;
    use rand::Rng;

    fn brute(residues: &[(u64, u64)]) -> u64 {
        let m: u64 = residues.iter().map(|r| r.0).product();
        (0..m)
            .find(|x| residues.iter().all(|&(mi, ai)| x % mi == ai))
            .unwrap()
    }

    #[test]
    fn examples() {
        let out = crt_reconstruct(&[ZqVector::new(4, vec![3]), ZqVector::new(9, vec![7])]).unwrap();
        assert_eq!(out, ZqVector::new(36, vec![brute(&[(4, 3), (9, 7)])]));
        assert_eq!(out.get(0), 7);
        let out = crt_reconstruct(&[ZqVector::new(2, vec![1]), ZqVector::new(3, vec![2])]).unwrap();
        assert_eq!(out.get(0), brute(&[(2, 1), (3, 2)]));
        let single = ZqVector::new(11, vec![4, 9]);
        assert_eq!(crt_reconstruct(&[single.clone()]).unwrap(), single);
    }

    #[test]
    fn rejects_common_factor() {
        let r = crt_reconstruct(&[ZqVector::new(4, vec![1]), ZqVector::new(6, vec![1])]);
        assert_eq!(r, Err(Error::NonCoprimeModuli(4, 6)));
    }

    #[test]
    fn random_instances_reduce_back() {
        let mut rng = seeded(11);
        let mut done = 0;
        while done < 200 {
            let q = rng.gen_range(2..1_000_000u64);
            let f = factorize(q).unwrap();
            let n = rng.gen_range(1..4);
            let target = ZqVector::random(q, n, &mut rng);
            let parts: Vec<ZqVector> = f.iter().map(|&(p, e)| target.reduce(p.pow(e))).collect();
            let out = crt_reconstruct(&parts).unwrap();
            assert_eq!(out, target);
            for part in &parts {
                assert_eq!(out.reduce(part.modulus()), *part);
            }
            done += 1;
        }
    }
}
