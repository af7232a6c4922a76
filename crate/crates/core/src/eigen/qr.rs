use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Counters from one run of the shifted QR iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct IterationStats {
    /// Francis double-shift sweeps.
    pub sweeps: usize,
    /// Exceptional (ad hoc) shifts applied.
    pub exceptional_shifts: usize,
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration with 1×1 / 2×2 deflation. Only the active window is updated, as
/// no Schur vectors are wanted. The matrix is destroyed.
pub(crate) fn hessenberg_eigenvalues(h: &mut DenseMatrix) -> Result<(Vec<Complex64>, IterationStats)> {
    let nn = h.rows();
    let mut out = vec![Complex64::new(0.0, 0.0); nn];
    let mut stats = IterationStats::default();
    if nn == 0 {
        return Ok((out, stats));
    }
    let eps = f64::EPSILON;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let max_iterations = 30 * nn.max(1);
    let mut total = 0usize;

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // Look for a single small sub-diagonal element.
        let mut l = nu;
        while l > 0 {
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
            out[nu] = Complex64::new(h[(nu, nu)] + exshift, 0.0);
            n -= 1;
            iter = 0;
            continue;
        }
        if l == nu - 1 {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                let hi = x + z;
                let lo = if z != 0.0 { x - w / z } else { hi };
                out[nu - 1] = Complex64::new(hi, 0.0);
                out[nu] = Complex64::new(lo, 0.0);
            } else {
                out[nu - 1] = Complex64::new(x + p, z);
                out[nu] = Complex64::new(x + p, -z);
            }
            n -= 2;
            iter = 0;
            continue;
        }

        // No convergence yet: form the shift.
        x = h[(nu, nu)];
        y = h[(nu - 1, nu - 1)];
        w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

        if iter == 10 || iter == 20 {
            // Wilkinson's exceptional shift
            stats.exceptional_shifts += 1;
            exshift += x;
            // every unconverged diagonal entry, not just the active block, since
            // exshift is added back to all later eigenvalues
            for i in 0..=nu {
                h[(i, i)] -= x;
            }
            s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        if iter == 30 {
            stats.exceptional_shifts += 1;
            s = (y - x) / 2.0;
            s = s * s + w;
            if s > 0.0 {
                s = s.sqrt();
                if y < x {
                    s = -s;
                }
                s = x - w / ((y - x) / 2.0 + s);
                for i in 0..=nu {
                    h[(i, i)] -= s;
                }
                exshift += s;
                x = 0.964;
                y = x;
                w = x;
            }
        }
        iter += 1;
        total += 1;
        stats.sweeps += 1;
        if total > max_iterations {
            return Err(Error::EigenNoConvergence {
                lo: l,
                hi: nu,
                iterations: total,
            });
        }

        // Look for two consecutive small sub-diagonal elements.
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
            if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
            {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nu {
            h[(i, i - 2)] = 0.0;
            if i > m + 2 {
                h[(i, i - 3)] = 0.0;
            }
        }

        // Double QR step on rows l..=n and columns m..=n.
        for k in m..nu {
            let notlast = k != nu - 1;
            if k != m {
                p = h[(k, k - 1)];
                q = h[(k + 1, k - 1)];
                r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x == 0.0 {
                    continue;
                }
                p /= x;
                q /= x;
                r /= x;
            } else {
                x = 0.0;
            }
            s = (p * p + q * q + r * r).sqrt();
            if p < 0.0 {
                s = -s;
            }
            if s == 0.0 {
                continue;
            }
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

            // Row modification.
            apply_rows(h, k, nu, notlast, x, y, z, q, r);

            // Column modification.
            let top = nu.min(k + 3);
            for i in l..=top {
                let row = &mut h.row_mut(i)[k..];
                let mut pp = x * row[0] + y * row[1];
                if notlast {
                    pp += z * row[2];
                    row[2] -= pp * r;
                }
                row[0] -= pp;
                row[1] -= pp * q;
            }
        }
    }
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn apply_rows(
    h: &mut DenseMatrix,
    k: usize,
    n: usize,
    notlast: bool,
    x: f64,
    y: f64,
    z: f64,
    q: f64,
    r: f64,
) {
    let cols = h.cols();
    let len = n + 1 - k;
    let (first, rest) = h.as_mut_slice()[k * cols..].split_at_mut(cols);
    let (second, rest) = rest.split_at_mut(cols);
    let r0 = &mut first[k..k + len];
    let r1 = &mut second[k..k + len];
    let r2 = notlast.then(|| &mut rest[k..k + len]);
    match r2 {
        Some(r2) => {
            for ((a, b), c) in r0.iter_mut().zip(r1.iter_mut()).zip(r2.iter_mut()) {
                let p = *a + q * *b + r * *c;
                *a -= p * x;
                *b -= p * y;
                *c -= p * z;
            }
        }
        None => {
            for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
                let p = *a + q * *b;
                *a -= p * x;
                *b -= p * y;
            }
        }
    }
}
