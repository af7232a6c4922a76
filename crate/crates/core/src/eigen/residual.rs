use num_complex::Complex64;

use crate::matrix::DenseMatrix;

/// Backward-error style residual of an approximate eigenvalue of an upper
/// Hessenberg matrix, from a few steps of shifted inverse iteration.
pub(crate) fn inverse_iteration_residual(h: &DenseMatrix, lambda: Complex64) -> f64 {
    let n = h.rows();
    let norm = h.norm_inf().max(f64::MIN_POSITIVE);
    let zero = Complex64::new(0.0, 0.0);
    // Nudge the shift so the factorisation is not exactly singular.
    let mu = lambda + Complex64::new(norm * 1e3 * f64::EPSILON, 0.0);

    let mut a = vec![zero; n * n];
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            a[i * n + j] = Complex64::new(h[(i, j)], 0.0);
        }
        a[i * n + i] -= mu;
    }
    let mut swapped = vec![false; n];
    let mut mult = vec![zero; n];
    for k in 0..n.saturating_sub(1) {
        if a[(k + 1) * n + k].norm() > a[k * n + k].norm() {
            swapped[k] = true;
            for j in k..n {
                a.swap(k * n + j, (k + 1) * n + j);
            }
        }
        let piv = a[k * n + k];
        let f = if piv == zero { zero } else { a[(k + 1) * n + k] / piv };
        mult[k] = f;
        a[(k + 1) * n + k] = zero;
        if f != zero {
            for j in k + 1..n {
                let v = a[k * n + j];
                a[(k + 1) * n + j] -= f * v;
            }
        }
    }
    let tiny = norm * f64::EPSILON;
    for k in 0..n {
        if a[k * n + k].norm() < tiny {
            a[k * n + k] = Complex64::new(tiny, 0.0);
        }
    }

    let mut x = vec![Complex64::new(1.0, 0.0); n];
    for _ in 0..3 {
        for k in 0..n.saturating_sub(1) {
            if swapped[k] {
                x.swap(k, k + 1);
            }
            let v = x[k];
            x[k + 1] -= mult[k] * v;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s / a[i * n + i];
        }
        let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(scale.is_finite() && scale > 0.0) {
            return f64::INFINITY;
        }
        for z in &mut x {
            *z /= scale;
        }
    }

    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut rnorm = 0.0;
    for i in 0..n {
        let mut s = -lambda * x[i];
        for j in i.saturating_sub(1)..n {
            s += h[(i, j)] * x[j];
        }
        rnorm += s.norm_sqr();
    }
    rnorm.sqrt() / (norm * xnorm)
}
