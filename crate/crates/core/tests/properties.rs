use alphadyn::eigen::eigenvalues;
use alphadyn::operator::{assemble, assemble_with, AlphaProfile, AssemblyScheme, RadialGrid};
use alphadyn::reversal::{align_and_average, detect_reversals, DetectOptions, DipoleSeries};
use alphadyn::{Complex64, DenseMatrix};
use proptest::prelude::*;

fn matrix(max_n: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-10.0..10.0f64, n * n).prop_map(move |v| {
            let rows: Vec<&[f64]> = v.chunks(n).collect();
            DenseMatrix::from_rows(&rows).unwrap()
        })
    })
}

fn spectrum(m: &DenseMatrix) -> Vec<Complex64> {
    eigenvalues(m).unwrap().lambdas()
}

/// Greedy nearest matching distance between two spectra.
fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigenvalue_sum_is_trace(m in matrix(12)) {
        let s: Complex64 = spectrum(&m).iter().sum();
        let scale = 1.0 + m.frobenius() * m.rows() as f64;
        prop_assert!((s.re - m.trace()).abs() < 1e-10 * scale);
        prop_assert!(s.im.abs() < 1e-10 * scale);
    }

    #[test]
    fn eigenvalue_product_is_determinant(m in matrix(6)) {
        let p: Complex64 = spectrum(&m).iter().product();
        let det = m.determinant();
        let scale = 1.0 + m.frobenius().powi(m.rows() as i32);
        prop_assert!((p.re - det).abs() < 1e-9 * scale, "{} vs {}", p, det);
        prop_assert!(p.im.abs() < 1e-9 * scale);
    }

    #[test]
    fn complex_eigenvalues_come_in_conjugate_pairs(m in matrix(10)) {
        let l = spectrum(&m);
        let conj: Vec<Complex64> = l.iter().map(|z| z.conj()).collect();
        prop_assert!(spectral_distance(&l, &conj) < 1e-8 * (1.0 + m.frobenius()));
    }

    #[test]
    fn shift_moves_spectrum(m in matrix(8), c in -5.0..5.0f64) {
        let a = spectrum(&m);
        let shifted: Vec<Complex64> = a.iter().map(|z| z + c).collect();
        let b = spectrum(&m.shifted(c));
        prop_assert!(spectral_distance(&shifted, &b) < 1e-7 * (1.0 + m.frobenius()));
    }

    #[test]
    fn transpose_has_same_spectrum(m in matrix(8)) {
        let d = spectral_distance(&spectrum(&m), &spectrum(&m.transpose()));
        prop_assert!(d < 1e-7 * (1.0 + m.frobenius()));
    }

    #[test]
    fn triangular_spectrum_is_diagonal(diag in prop::collection::vec(-10.0..10.0f64, 1..10), fill in -3.0..3.0f64) {
        let n = diag.len();
        let mut m = DenseMatrix::from_diagonal(&diag);
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = fill * ((i + 2 * j) as f64).sin();
            }
        }
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        prop_assert!(spectral_distance(&spectrum(&m), &d) < 1e-6 * (1.0 + fill.abs()));
    }
}

fn poly_profile() -> impl Strategy<Value = AlphaProfile> {
    (prop::collection::vec(-2.0..2.0f64, 1..4), 0.5..3.0f64).prop_map(|(coef, c)| AlphaProfile::polynomial(c, coef))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_is_affine_in_amplitude(p in poly_profile(), a in -4.0..4.0f64, b in -4.0..4.0f64, n in 16usize..40) {
        let grid = RadialGrid::new(n).unwrap();
        let at = |c: f64| assemble(1, &p.with_amplitude(c), grid).unwrap().into_matrix();
        let m0 = at(0.0);
        let lhs = at(a + b).sub(&m0);
        let rhs = at(a).sub(&m0).add(&at(b).sub(&m0));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-9 * (1.0 + lhs.max_abs()));
        prop_assert_eq!(m0.rows(), 2 * n - 1);
    }

    #[test]
    fn operator_is_linear_on_vectors(p in poly_profile(), x in prop::collection::vec(-1.0..1.0f64, 39), y in prop::collection::vec(-1.0..1.0f64, 39), k in -3.0..3.0f64) {
        let m = assemble(2, &p, RadialGrid::new(20).unwrap()).unwrap().into_matrix();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + k * b).collect();
        let lhs = m.matvec(&combo);
        let (mx, my) = (m.matvec(&x), m.matvec(&y));
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - mx[i] - k * my[i]).abs() < 1e-9 * (1.0 + m.max_abs()));
        }
    }

    #[test]
    fn flux_and_expansion_agree_on_smooth_fields(p in poly_profile(), l in 1u32..4) {
        // both discretisations, applied to a smooth field, differ by O(h²)
        let diff_at = |n: usize| {
            let grid = RadialGrid::new(n).unwrap();
            let f = assemble_with(l, &p, grid, AssemblyScheme::Flux).unwrap();
            let e = assemble_with(l, &p, grid, AssemblyScheme::Expansion).unwrap();
            let v = f.stack(|r| r.powi(l as i32 + 1) * (1.0 - r * r), |r| r.powi(l as i32 + 1) * (1.0 - r));
            let (a, b) = (f.matrix().matvec(&v), e.matrix().matvec(&v));
            (0..a.len()).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (diff_at(40), diff_at(80));
        prop_assert!(fine <= 0.3 * coarse + 1e-9, "{coarse} -> {fine}");
    }

    #[test]
    fn zero_alpha_spectrum_is_real_and_decaying(n in 16usize..40, l in 1u32..4) {
        let m = assemble(l, &AlphaProfile::zero(), RadialGrid::new(n).unwrap()).unwrap();
        let s = eigenvalues(&m).unwrap();
        prop_assert!(s.max_abs_im() < 1e-9);
        prop_assert!(s.max_re() < 0.0);
    }
}

/// Random polarity segments with jitter, sampled at `dt = 0.01`.
fn dipole() -> impl Strategy<Value = DipoleSeries> {
    (
        prop::collection::vec((20usize..300, any::<bool>(), 0.5..2.0f64), 2..12),
        prop::collection::vec(-0.4..0.4f64, 4000),
    )
        .prop_map(|(segs, jitter)| {
            let mut d = Vec::new();
            for (len, pos, amp) in segs {
                let s = if pos { amp } else { -amp };
                d.extend(std::iter::repeat_n(s, len));
            }
            for (x, j) in d.iter_mut().zip(jitter.iter().cycle()) {
                *x += j;
            }
            let t = (0..d.len()).map(|i| i as f64 * 0.01).collect();
            DipoleSeries::new(t, d).unwrap()
        })
}

fn opts(threshold_frac: f64, persistence: f64) -> DetectOptions {
    DetectOptions {
        threshold_frac,
        persistence,
        ..DetectOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sign_flip_flips_polarity_only(s in dipole(), p in 0.0..0.5f64) {
        let o = opts(0.5, p);
        let a = detect_reversals(&s, &o).unwrap();
        let flipped = DipoleSeries::new(s.t.clone(), s.d.iter().map(|x| -x).collect()).unwrap();
        let b = detect_reversals(&flipped, &o).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.t_cross, y.t_cross);
            prop_assert_eq!(x.polarity_before, -y.polarity_before);
            prop_assert_eq!(x.polarity_after, -y.polarity_after);
        }
    }

    #[test]
    fn amplitude_scale_does_not_matter(s in dipole(), k in 0.01..100.0f64) {
        let o = opts(0.5, 0.1);
        let a = detect_reversals(&s, &o).unwrap();
        let scaled = DipoleSeries::new(s.t.clone(), s.d.iter().map(|x| k * x).collect()).unwrap();
        let b = detect_reversals(&scaled, &o).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.t_cross - y.t_cross).abs() < 1e-9);
        }
    }

    #[test]
    fn events_alternate_polarity(s in dipole()) {
        let e = detect_reversals(&s, &opts(0.5, 0.05)).unwrap();
        for w in e.windows(2) {
            prop_assert_eq!(w[0].polarity_after, w[1].polarity_before);
            prop_assert!(w[0].t_cross < w[1].t_cross);
        }
        for x in &e {
            prop_assert_eq!(x.polarity_before, -x.polarity_after);
            prop_assert!(x.t_start <= x.t_cross && x.t_cross <= x.t_end);
        }
    }

    #[test]
    fn stricter_persistence_never_adds_events(s in dipole(), p in 0.0..0.5f64, extra in 0.0..1.0f64) {
        let loose = detect_reversals(&s, &opts(0.5, p)).unwrap().len();
        let strict = detect_reversals(&s, &opts(0.5, p + extra)).unwrap().len();
        prop_assert!(strict <= loose);
    }

    #[test]
    fn higher_threshold_never_adds_events(s in dipole(), f in 0.05..0.6f64, extra in 0.0..0.3f64) {
        let low = detect_reversals(&s, &opts(f, 0.1)).unwrap().len();
        let high = detect_reversals(&s, &opts(f + extra, 0.1)).unwrap().len();
        prop_assert!(high <= low);
    }

    #[test]
    fn duplicated_events_leave_the_stack_unchanged(s in dipole()) {
        let e = detect_reversals(&s, &opts(0.5, 0.1)).unwrap();
        let inside: Vec<_> = e.into_iter().filter(|x| x.t_cross > 0.5 && x.t_cross < s.t[s.len() - 1] - 0.2).collect();
        prop_assume!(!inside.is_empty());
        let one = align_and_average(&s, &inside[..1], 0.4, 0.1).unwrap();
        let twice = align_and_average(&s, &[inside[0].clone(), inside[0].clone()], 0.4, 0.1).unwrap();
        prop_assert_eq!(twice.count(), 2);
        for (a, b) in one.mean.iter().zip(&twice.mean) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
