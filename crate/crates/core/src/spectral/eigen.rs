//! Dense real eigenvalues: Householder reduction to upper Hessenberg form
//! followed by Francis double-shift QR iterations (after the EISPACK `orthes`
//! and `hqr` routines).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{RenormError, Result};

/// Per-eigenvalue iteration cap before declaring non-convergence.
pub const MAX_QR_ITERATIONS: usize = 100;

/// Reduces `a` in place to upper Hessenberg form by orthogonal similarity.
pub fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| a[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = a[(i, m - 1)] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * a[(i, j)]).sum::<f64>() / h;
            for i in m..=high {
                a[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * a[(i, j)]).sum::<f64>() / h;
            for j in m..=high {
                a[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        a[(m, m - 1)] = scale * g;
        for i in (m + 1)..=high {
            a[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying it.
pub fn hqr(h: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let nn = h.nrows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    if nn == 0 {
        return Ok(Vec::new());
    }
    let low = 0usize;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        // small subdiagonal element
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            d[nu] = h[(nu, nu)] + exshift;
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            let x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = if z != 0.0 { x - w / z } else { x + z };
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            let mut x = h[(nu, nu)];
            let mut y = 0.0;
            let mut w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_QR_ITERATIONS {
                let partial = ((nu + 1)..nn).map(|i| (d[i], e[i])).collect();
                return Err(RenormError::QrNonConvergence { index: nu, iterations: iter - 1, partial });
            }

            // two consecutive small subdiagonal elements
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let mut t = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            t += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= t * z;
                        }
                        h[(k, j)] -= t * x;
                        h[(k + 1, j)] -= t * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        let mut t = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            t += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= t * r;
                        }
                        h[(i, k)] -= t;
                        h[(i, k + 1)] -= t * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(d.into_iter().zip(e).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// All eigenvalues of a square matrix, sorted by decreasing modulus (ties by
/// decreasing real part, then decreasing imaginary part).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(RenormError::Argument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(RenormError::Argument("matrix has non-finite entries".into()));
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut ev = hqr(&mut h)?;
    sort_by_modulus(&mut ev);
    Ok(ev)
}

pub fn sort_by_modulus(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Unit eigenvector for a real eigenvalue by inverse iteration.
pub fn real_eigenvector(a: &DMatrix<f64>, eigenvalue: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    let shift = eigenvalue + 1e-10 * eigenvalue.abs().max(1.0);
    let shifted = a - DMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| 1.0 / (1.0 + i as f64));
    for _ in 0..8 {
        let w = lu
            .solve(&v)
            .ok_or_else(|| RenormError::Inconsistent("singular shifted matrix in inverse iteration".into()))?;
        let norm = w.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(RenormError::Inconsistent("inverse iteration broke down".into()));
        }
        v = w / norm;
    }
    // fix the sign: largest component positive
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v = -v;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn oracle(a: &DMatrix<f64>) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
        sort_by_modulus(&mut ev);
        ev
    }

    fn uniform(rng: &mut StdRng) -> f64 {
        rng.random_range(-1.0..1.0)
    }

    #[test]
    fn identity_and_diagonal() {
        let ev = eigenvalues(&DMatrix::identity(5, 5)).unwrap();
        assert!(ev.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 5.0, 0.1]));
        let ev = eigenvalues(&d).unwrap();
        assert_eq!(ev.iter().map(|z| z.re).collect::<Vec<_>>(), vec![5.0, 0.5, 0.1]);
    }

    #[test]
    fn rotation_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let ev = eigenvalues(&a).unwrap();
        assert!((ev[0] - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn hessenberg_is_similarity() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = DMatrix::from_fn(9, 9, |_, _| uniform(&mut rng));
        let mut h = a.clone();
        hessenberg(&mut h);
        for i in 2..9 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert!((h.trace() - a.trace()).abs() < 1e-12);
        assert!((h.norm() - a.norm()).abs() < 1e-12);
    }

    #[test]
    fn random_matrices_match_oracle() {
        let mut rng = StdRng::seed_from_u64(42);
        for n in [1, 2, 3, 4, 7, 16, 40, 64] {
            let a = DMatrix::from_fn(n, n, |_, _| uniform(&mut rng));
            let ours = eigenvalues(&a).unwrap();
            let theirs = oracle(&a);
            assert_eq!(ours.len(), n);
            // match each eigenvalue to the nearest oracle value
            for z in &ours {
                let best = theirs.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-9 * (1.0 + z.norm()), "n = {n}: {z} unmatched ({best:e})");
            }
            let ours_sum: Complex64 = ours.iter().sum();
            assert!((ours_sum.re - a.trace()).abs() < 1e-10 && ours_sum.im.abs() < 1e-10);
        }
    }

    #[test]
    fn graded_spectrum_like_renormalization() {
        // eigenvalues 4.67, 0.4^k under a random similarity
        let n = 12;
        let mut rng = StdRng::seed_from_u64(3);
        let s = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.3 * uniform(&mut rng) });
        let mut diag = vec![4.669];
        diag.extend((1..n).map(|k| 0.4f64.powi(k as i32)));
        let a = &s * DMatrix::from_diagonal(&DVector::from_vec(diag.clone())) * s.clone().try_inverse().unwrap();
        let ev = eigenvalues(&a).unwrap();
        for (z, want) in ev.iter().zip(&diag) {
            assert!((z.re - want).abs() < 1e-10 && z.im.abs() < 1e-10, "{z} vs {want}");
        }
    }

    #[test]
    fn inverse_iteration() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.1]);
        let v = real_eigenvector(&a, 0.5).unwrap();
        let r = &a * &v - &v * 0.5;
        assert!(r.norm() < 1e-10);
    }

    #[test]
    fn rejects_non_square() {
        assert!(eigenvalues(&DMatrix::zeros(2, 3)).is_err());
    }
}
