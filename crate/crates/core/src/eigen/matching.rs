use num_complex::Complex64;
use serde::Serialize;

use super::SpectrumResult;

/// Above this many branches the exhaustive assignment search gives way to a
/// greedy nearest-pair pass.
const EXACT_LIMIT: usize = 7;
const AMBIGUITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalescenceKind {
    /// Two real eigenvalues turned into a conjugate pair.
    RealToComplex,
    /// A conjugate pair split into two real eigenvalues.
    ComplexToReal,
}

/// Two branches that change between real and complex-conjugate across a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Coalescence {
    pub branch_a: usize,
    pub branch_b: usize,
    pub kind: CoalescenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchMatching {
    /// `assignment[i]` is the index in `next` continuing `prev[i]`.
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub ambiguous: bool,
    pub coalescences: Vec<Coalescence>,
}

/// Pairs the `k` leading eigenvalues of two neighbouring spectra.
pub fn match_branches(prev: &SpectrumResult, next: &SpectrumResult, k: usize) -> BranchMatching {
    let k = k.min(prev.len()).min(next.len());
    let a: Vec<Complex64> = prev.pairs[..k].iter().map(|p| p.lambda).collect();
    let b: Vec<Complex64> = next.pairs[..k].iter().map(|p| p.lambda).collect();
    let scale = a.iter().chain(&b).map(|z| z.norm()).fold(1.0, f64::max);
    match_lambdas(&a, &b, 1e-9 * scale)
}

/// Minimal total-distance pairing of `prev` onto `next` (equal lengths).
/// Eigenvalues with `|Im| <= im_tol` count as real.
pub fn match_lambdas(prev: &[Complex64], next: &[Complex64], im_tol: f64) -> BranchMatching {
    let k = prev.len().min(next.len());
    let prev = &prev[..k];
    let next = &next[..k];
    let sign = |z: Complex64| {
        if z.im > im_tol {
            1
        } else if z.im < -im_tol {
            -1
        } else {
            0
        }
    };
    let cost_of = |perm: &[usize]| -> f64 { perm.iter().enumerate().map(|(i, &j)| (prev[i] - next[j]).norm()).sum() };
    let continuation = |perm: &[usize]| -> usize {
        perm.iter()
            .enumerate()
            .filter(|&(i, &j)| sign(prev[i]) == sign(next[j]))
            .count()
    };
    let scale = prev.iter().chain(next).map(|z| z.norm()).fold(1.0, f64::max);
    let tol = AMBIGUITY_TOL * scale;

    let (assignment, cost, ambiguous) = if k <= EXACT_LIMIT {
        let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut best = f64::INFINITY;
        for_each_permutation(k, |perm| {
            let c = cost_of(perm);
            if c <= best + tol {
                best = best.min(c);
                candidates.push((c, perm.to_vec()));
            }
        });
        candidates.retain(|(c, _)| *c <= best + tol);
        let ambiguous = candidates.len() > 1;
        let (c, perm) = candidates
            .into_iter()
            .max_by(|(ca, pa), (cb, pb)| continuation(pa).cmp(&continuation(pb)).then(cb.total_cmp(ca)))
            .expect("at least the identity permutation");
        (perm, c, ambiguous)
    } else {
        greedy(prev, next, &sign, tol)
    };

    let coalescences = find_coalescences(prev, next, &assignment, &sign);
    BranchMatching {
        assignment,
        cost,
        ambiguous,
        coalescences,
    }
}

fn greedy(
    prev: &[Complex64],
    next: &[Complex64],
    sign: &dyn Fn(Complex64) -> i32,
    tol: f64,
) -> (Vec<usize>, f64, bool) {
    let k = prev.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(k * k);
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            edges.push(((a - b).norm(), i, j));
        }
    }
    edges.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then_with(|| (sign(prev[y.1]) == sign(next[y.2])).cmp(&(sign(prev[x.1]) == sign(next[x.2]))))
    });
    let mut assignment = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    let mut cost = 0.0;
    let mut ambiguous = false;
    let mut last: Option<f64> = None;
    for &(d, i, j) in &edges {
        if assignment[i] != usize::MAX || taken[j] {
            continue;
        }
        if let Some(prev_d) = last {
            if (d - prev_d).abs() < tol && d > 0.0 {
                ambiguous = true;
            }
        }
        last = Some(d);
        assignment[i] = j;
        taken[j] = true;
        cost += d;
    }
    (assignment, cost, ambiguous)
}

fn find_coalescences(
    prev: &[Complex64],
    next: &[Complex64],
    assignment: &[usize],
    sign: &dyn Fn(Complex64) -> i32,
) -> Vec<Coalescence> {
    let mut out = Vec::new();
    let k = prev.len();
    for a in 0..k {
        for b in a + 1..k {
            let (pa, pb) = (prev[a], prev[b]);
            let (na, nb) = (next[assignment[a]], next[assignment[b]]);
            let prev_real = sign(pa) == 0 && sign(pb) == 0;
            let next_real = sign(na) == 0 && sign(nb) == 0;
            let prev_pair = sign(pa) * sign(pb) == -1 && is_conjugate(pa, pb);
            let next_pair = sign(na) * sign(nb) == -1 && is_conjugate(na, nb);
            let kind = if prev_real && next_pair {
                CoalescenceKind::RealToComplex
            } else if prev_pair && next_real {
                CoalescenceKind::ComplexToReal
            } else {
                continue;
            };
            out.push(Coalescence {
                branch_a: a,
                branch_b: b,
                kind,
            });
        }
    }
    out
}

fn is_conjugate(a: Complex64, b: Complex64) -> bool {
    (a - b.conj()).norm() <= 1e-8 * a.norm().max(1.0)
}

/// Heap's algorithm over `0..k`.
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    f(&p);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
