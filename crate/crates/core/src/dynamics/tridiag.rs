/// Pre-factored tridiagonal system (Thomas algorithm without pivoting; the
/// matrices used here are diagonally dominant).
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    upper_scaled: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[0]` and `upper[n-1]` are ignored.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut upper_scaled = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < n { upper[i] * inv_pivot[i] } else { 0.0 };
            upper_scaled[i] = prev;
        }
        Self {
            lower: lower.to_vec(),
            upper_scaled,
            inv_pivot,
        }
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        b[0] *= self.inv_pivot[0];
        for i in 1..n {
            b[i] = (b[i] - self.lower[i] * b[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.upper_scaled[i] * b[i + 1];
        }
    }
}
