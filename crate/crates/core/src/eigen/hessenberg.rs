use crate::matrix::DenseMatrix;

const RADIX: f64 = 2.0;

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Returns the applied scale factors.
pub(crate) fn balance(a: &mut DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut scale = vec![1.0; n];
    let sq = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sq;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= sq;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                let g = 1.0 / f;
                for v in a.row_mut(i) {
                    *v *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// Householder reduction to upper Hessenberg form (orthogonal similarity).
///
/// Columns whose sub-diagonal part is already zero are skipped, so banded and
/// block-diagonal inputs with Hessenberg structure cost only the scan.
pub(crate) fn reduce_to_hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let mut f = vec![0.0; n];
    for m in 1..n - 1 {
        // Last row with a nonzero entry in column m-1; rows below need no work.
        let Some(high) = (m..n).rev().find(|&i| a[(i, m - 1)] != 0.0) else {
            continue;
        };
        if high == m {
            continue;
        }
        let scale: f64 = (m..=high).map(|i| a[(i, m - 1)].abs()).sum();
        let mut h = 0.0;
        for i in m..=high {
            ort[i] = a[(i, m - 1)] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;

        // Left: rows m..=high, columns m..n, accumulated row-wise.
        let cols = m..n;
        f[cols.clone()].fill(0.0);
        for i in m..=high {
            let oi = ort[i];
            let row = a.row(i);
            for j in cols.clone() {
                f[j] += oi * row[j];
            }
        }
        for j in cols.clone() {
            f[j] /= h;
        }
        for i in m..=high {
            let oi = ort[i];
            let row = a.row_mut(i);
            for j in cols.clone() {
                row[j] -= f[j] * oi;
            }
        }

        // Right: all rows, columns m..=high.
        let o = &ort[m..=high];
        for i in 0..n {
            let row = &mut a.row_mut(i)[m..=high];
            let fi: f64 = row.iter().zip(o).map(|(x, y)| x * y).sum::<f64>() / h;
            for (x, y) in row.iter_mut().zip(o) {
                *x -= fi * y;
            }
        }

        a[(m, m - 1)] = scale * g;
        for i in m + 1..=high {
            a[(i, m - 1)] = 0.0;
        }
    }
}
