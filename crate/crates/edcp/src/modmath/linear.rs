use super::{crt_reconstruct, inv_mod, mul_mod, valuation, Modulus, ZqVector};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Unique(ZqVector),
    Underdetermined,
}

enum Local {
    Unique(Vec<u64>),
    Many,
    None,
}

/// Solve ⟨y_i, s⟩ ≡ v_i (mod q) for s.
///
/// Works per prime-power factor of q with a Smith-style elimination
/// (pivot of least p-adic valuation, so units first), then recombines by CRT.
pub fn solve_linear_mod(equations: &[(ZqVector, u64)], q: &Modulus) -> Result<LinearSolution> {
    let n = match equations.first() {
        Some((y, _)) => y.dim(),
        None => return Ok(LinearSolution::Underdetermined),
    };
    for (y, _) in equations {
        if y.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.dim(),
            });
        }
        if y.modulus() != q.value() {
            return Err(Error::BadParams(format!(
                "equation modulus {} differs from {}",
                y.modulus(),
                q
            )));
        }
    }
    let mut parts = Vec::new();
    let mut underdetermined = false;
    for &(p, e) in q.factors() {
        let pe = p.pow(e);
        match solve_prime_power(equations, n, p, pe) {
            Local::None => return Err(Error::Inconsistent),
            Local::Many => underdetermined = true,
            Local::Unique(s) => parts.push(ZqVector::new(pe, s)),
        }
    }
    if underdetermined {
        return Ok(LinearSolution::Underdetermined);
    }
    Ok(LinearSolution::Unique(crt_reconstruct(&parts)?))
}

fn solve_prime_power(equations: &[(ZqVector, u64)], n: usize, p: u64, pe: u64) -> Local {
    let m = equations.len();
    let mut a: Vec<Vec<u64>> = equations
        .iter()
        .map(|(y, _)| y.coords().iter().map(|&c| c % pe).collect())
        .collect();
    let mut b: Vec<u64> = equations.iter().map(|(_, v)| v % pe).collect();
    // column transform: s = V·y
    let mut v: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    let sub = |x: u64, y: u64| (x + pe - y) % pe;

    let mut pivots = Vec::new();
    for k in 0..m.min(n) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if x != 0 {
                    let val = valuation(x, p);
                    if best.map_or(true, |(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((val, pi, pj)) = best else { break };
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in v.iter_mut() {
            row.swap(k, pj);
        }
        let pv = p.pow(val);
        let unit = a[k][k] / pv;
        let uinv = inv_mod(unit, pe).expect("unit part must be invertible");
        for x in a[k].iter_mut() {
            *x = mul_mod(*x, uinv, pe);
        }
        b[k] = mul_mod(b[k], uinv, pe);
        for i in k + 1..m {
            let f = a[i][k] / pv;
            if f == 0 {
                continue;
            }
            for j in k..n {
                let t = mul_mod(f, a[k][j], pe);
                a[i][j] = sub(a[i][j], t);
            }
            b[i] = sub(b[i], mul_mod(f, b[k], pe));
        }
        for j in k + 1..n {
            let f = a[k][j] / pv;
            if f == 0 {
                continue;
            }
            for row in a.iter_mut() {
                let t = mul_mod(f, row[k], pe);
                row[j] = sub(row[j], t);
            }
            for row in v.iter_mut() {
                let t = mul_mod(f, row[k], pe);
                row[j] = sub(row[j], t);
            }
        }
        pivots.push(pv);
    }

    let rank = pivots.len();
    if b[rank..].iter().any(|&x| x != 0) {
        return Local::None;
    }
    let mut y = vec![0u64; n];
    for (k, &pv) in pivots.iter().enumerate() {
        if b[k] % pv != 0 {
            return Local::None;
        }
        y[k] = b[k] / pv;
    }
    if rank < n || pivots.iter().any(|&pv| pv != 1) {
        return Local::Many;
    }
    let s = (0..n)
        .map(|i| (0..n).fold(0, |acc, j| (acc + mul_mod(v[i][j], y[j], pe)) % pe))
        .collect();
    Local::Unique(s)
}
