//! Symmetric and Hermitian eigensolvers.
//!
//! Householder tridiagonalization followed by implicit QL (the tred2/tql2 pair
//! from EISPACK). Hermitian D×D matrices go through the real 2D×2D embedding
//! [[A, −B], [B, A]], whose spectrum is that of A + iB with every value doubled.

use num_complex::Complex;

use crate::scalar::Real;

/// Eigen-decomposition of a real symmetric matrix (row-major, n×n).
/// Returns ascending eigenvalues and the eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut v = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n);
    (d, v)
}

fn tred2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize) {
    let ix = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = T::zero();
                v[ix(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[ix(j, i)] = f;
                g = e[j] + v[ix(j, j)] * f;
                for k in j + 1..i {
                    g += v[ix(k, j)] * d[k];
                    e[k] += v[ix(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let t = f * e[k] + g * d[k];
                    v[ix(k, j)] -= t;
                }
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[ix(n - 1, i)] = v[ix(i, i)];
        v[ix(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[ix(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[ix(k, i + 1)] * v[ix(k, j)];
                }
                for k in 0..=i {
                    let t = g * d[k];
                    v[ix(k, j)] -= t;
                }
            }
        }
        for k in 0..=i {
            v[ix(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
        v[ix(n - 1, j)] = T::zero();
    }
    v[ix(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize) {
    let ix = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                assert!(iter < 300, "tql2 failed to converge");
                let mut g = d[l];
                let two = T::one() + T::one();
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[ix(k, i + 1)];
                        v[ix(k, i + 1)] = s * v[ix(k, i)] + c * h;
                        v[ix(k, i)] = c * v[ix(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    // ascending, carrying eigenvector columns along
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v.swap(ix(j, i), ix(j, k));
            }
        }
    }
}

fn embed<T: Real>(h: &[Complex<T>], n: usize) -> Vec<T> {
    let m = 2 * n;
    let mut out = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            out[i * m + j] = z.re;
            out[(i + n) * m + (j + n)] = z.re;
            out[(i + n) * m + j] = z.im;
            out[i * m + (j + n)] = -z.im;
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues<T: Real>(h: &[Complex<T>], n: usize) -> Vec<T> {
    let (vals, _) = symmetric_eigen(&embed(h, n), 2 * n);
    let half = T::one() / (T::one() + T::one());
    vals.chunks(2).map(|c| (c[0] + c[1]) * half).collect()
}

/// f(H) for Hermitian H, computed spectrally.
pub fn hermitian_function<T: Real>(
    h: &[Complex<T>],
    n: usize,
    f: impl Fn(T) -> T,
) -> Vec<Complex<T>> {
    let m = 2 * n;
    let (vals, vecs) = symmetric_eigen(&embed(h, n), m);
    let fv: Vec<T> = vals.iter().map(|&x| f(x)).collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut re = T::zero();
            let mut im = T::zero();
            for k in 0..m {
                re += vecs[i * m + k] * fv[k] * vecs[j * m + k];
                im += vecs[(i + n) * m + k] * fv[k] * vecs[j * m + k];
            }
            out[i * n + j] = Complex::new(re, im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        let (vals, _) = symmetric_eigen(&a, 3);
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let mut rng = seeded(3);
        for n in [1, 2, 5, 17] {
            let mut a = vec![0.0f64; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let x = rng.gen_range(-1.0..1.0);
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            let (vals, v) = symmetric_eigen(&a, n);
            for i in 0..n {
                for j in 0..n {
                    let rec: f64 = (0..n).map(|k| v[i * n + k] * vals[k] * v[j * n + k]).sum();
                    assert!((rec - a[i * n + j]).abs() < 1e-12);
                }
            }
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn pauli_y_spectrum() {
        let z = Complex::new(0.0, 0.0);
        let h: [Complex<f64>; 4] = [z, Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), z];
        let vals = hermitian_eigenvalues(&h, 2);
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn square_root_squares_back() {
        let mut rng = seeded(4);
        let n = 6;
        // random PSD: G G*
        let g: Vec<Complex<f64>> = (0..n * n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut h = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = (0..n).map(|k| g[i * n + k] * g[j * n + k].conj()).sum();
            }
        }
        let root = hermitian_function(&h, n, |x: f64| x.max(0.0).sqrt());
        for i in 0..n {
            for j in 0..n {
                let sq: Complex<f64> = (0..n).map(|k| root[i * n + k] * root[k * n + j]).sum();
                assert!((sq - h[i * n + j]).norm() < 1e-10);
            }
        }
    }
}
