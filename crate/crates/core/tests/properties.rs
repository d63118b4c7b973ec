mod common;

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::interpolation::{
    average_path_interpolation_norm, interpolation_norm, k_functional, k_functional_mixed, lp_expectation,
    mixed_interpolation_norm,
};
use orderstat_bounds::matrix::{order_map, Matrix, OrderMap};
use orderstat_bounds::orderstat::{apply_coefficients, coefficient_f, expectation_exact};
use orderstat_bounds::orlicz::{luxemburg_norm, mj_function};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn matrix() -> impl Strategy<Value = Matrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, c)| {
        prop::collection::vec(0.0f64..10.0, n * c).prop_map(move |e| Matrix::new(n, c, e).unwrap())
    })
}

fn families(n: usize, cols: usize) -> Vec<MapFamily> {
    let mut out = vec![MapFamily::full_mapping(n, cols).unwrap()];
    if n == cols {
        out.push(MapFamily::symmetric_group(n).unwrap());
    }
    out
}

fn shuffle(len: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    let mut s = seed;
    for i in (1..len).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        p.swap(i, (s >> 33) as usize % (i + 1));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn expectation_matches_enumeration_oracle(a in matrix(), ell_seed in 0usize..8) {
        for fam in families(a.rows(), a.cols()) {
            let ell = 1 + ell_seed % a.rows();
            let rows = common::rows_of(a.entries(), a.cols());
            let want = common::expectation(&rows, &common::members_of(fam.descriptor()), ell);
            let got = expectation_exact(&a, &fam, ell).unwrap().value;
            prop_assert!(close(got, want, TOL), "{got} vs {want}");
        }
    }

    #[test]
    fn expectation_is_invariant_under_row_and_column_permutations(a in matrix(), seed in any::<u64>()) {
        let pr = shuffle(a.rows(), seed);
        let pc = shuffle(a.cols(), seed ^ 0x9e37);
        let b = a.permute_rows(&pr).unwrap().permute_cols(&pc).unwrap();
        prop_assert_eq!(a.rearrangement(), b.rearrangement());
        for fam in families(a.rows(), a.cols()) {
            for ell in 1..=a.rows() {
                let x = expectation_exact(&a, &fam, ell).unwrap().value;
                let y = expectation_exact(&b, &fam, ell).unwrap().value;
                prop_assert!(close(x, y, TOL));
            }
        }
    }

    #[test]
    fn expectation_is_homogeneous_and_monotone(a in matrix(), c in 0.0f64..5.0, bump in 0.0f64..1.0) {
        let scaled = a.scaled(c).unwrap();
        let bigger = Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j) + bump * ((i + j) % 2) as f64).unwrap();
        for fam in families(a.rows(), a.cols()) {
            for ell in 1..=a.rows() {
                let e = expectation_exact(&a, &fam, ell).unwrap().value;
                prop_assert!(close(expectation_exact(&scaled, &fam, ell).unwrap().value, c * e, TOL));
                prop_assert!(expectation_exact(&bigger, &fam, ell).unwrap().value >= e - TOL);
            }
        }
    }

    #[test]
    fn coefficient_identity_on_the_order_class(
        shape in prop::sample::select(vec![(2usize, 2usize), (2, 3), (3, 3), (3, 2), (4, 4)]),
        raw in prop::collection::vec(0.0f64..1.0, 16),
        ell_seed in 0usize..4,
        seed in any::<u64>(),
    ) {
        let (n, cols) = shape;
        let ell = 1 + ell_seed % n;
        let top = ell * cols;
        let h = OrderMap::from_positions(n, cols, shuffle(n * cols, seed).into_iter().map(|r| (r / cols, r % cols)).collect()).unwrap();
        let mut vals: Vec<f64> = raw[..top].to_vec();
        vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut entries = vec![0.0; n * cols];
        for (r, v) in vals.iter().enumerate() {
            let (i, j) = h.position(r);
            entries[i * cols + j] = *v;
        }
        let b = Matrix::new(n, cols, entries).unwrap();
        prop_assert!(h.admits(&b, top));
        for fam in families(n, cols) {
            let f = coefficient_f(&fam, &h, ell).unwrap();
            let want = expectation_exact(&b, &fam, ell).unwrap().value;
            prop_assert!(close(apply_coefficients(&f, &h, &b), want, TOL));
        }
    }

    #[test]
    fn luxemburg_norm_matches_closed_form_and_is_a_norm(
        x in prop::collection::vec(-5.0f64..5.0, 1..30),
        y_seed in prop::collection::vec(-5.0f64..5.0, 30),
        c in -4.0f64..4.0,
        j_seed in 0usize..30,
    ) {
        let n = x.len();
        let j = 1 + j_seed % n;
        let m = mj_function(j as u64).unwrap();
        let tol = 1e-12;
        let nx = luxemburg_norm(&x, &m, tol).unwrap();
        prop_assert!(close(nx, common::luxemburg_mj(&x, j), 1e-9));
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!(close(luxemburg_norm(&cx, &m, tol).unwrap(), c.abs() * nx, 1e-9));
        let y = &y_seed[..n];
        let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let ny = luxemburg_norm(y, &m, tol).unwrap();
        prop_assert!(luxemburg_norm(&sum, &m, tol).unwrap() <= nx + ny + 1e-9 * (1.0 + nx + ny));
    }

    #[test]
    fn k_functional_is_concave_monotone_and_capped(
        x in prop::collection::vec(-3.0f64..3.0, 1..20),
        t in prop::collection::vec(0.0f64..25.0, 3),
    ) {
        let mut t = t;
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k: Vec<f64> = t.iter().map(|&s| k_functional(&x, s).unwrap()).collect();
        prop_assert!(k[0] <= k[1] + TOL && k[1] <= k[2] + TOL);
        if t[2] > t[0] {
            let w = (t[1] - t[0]) / (t[2] - t[0]);
            prop_assert!(k[1] >= (1.0 - w) * k[0] + w * k[2] - 1e-12 * (1.0 + k[2]));
        }
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        let linf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&s, &kv) in t.iter().zip(&k) {
            prop_assert!(kv <= l1.min(s * linf) + TOL * (1.0 + l1));
            prop_assert!((kv - common::k_functional(&x, s)).abs() <= 1e-9);
        }
    }

    #[test]
    fn interpolation_norm_lies_between_lp_and_hardy_bound(
        x in prop::collection::vec(0.0f64..3.0, 1..12),
        p in prop::sample::select(vec![1.25f64, 1.5, 2.0, 3.0, 5.0]),
    ) {
        let lp: f64 = x.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
        let v = interpolation_norm(&x, p).unwrap();
        prop_assert!(v >= lp * (1.0 - 1e-10));
        prop_assert!(v <= p / (p - 1.0) * lp * (1.0 + 1e-10));
    }

    #[test]
    fn mixed_objects_respect_minkowski_and_hardy(a in matrix(), p in prop::sample::select(vec![1.5f64, 2.0, 3.0])) {
        for fam in families(a.rows(), a.cols()) {
            let mixed = mixed_interpolation_norm(&a, &fam, p).unwrap();
            let avg = average_path_interpolation_norm(&a, &fam, p).unwrap();
            let lp = lp_expectation(&a, &fam, p).unwrap();
            prop_assert!(mixed <= avg * (1.0 + 1e-10) + 1e-12);
            prop_assert!(avg <= p / (p - 1.0) * lp * (1.0 + 1e-10) + 1e-12);
            for t in [0.5, 1.0, 2.5] {
                let direct = k_functional_mixed(&a, &fam, t).unwrap();
                let curve = orderstat_bounds::interpolation::mixed_k_curve(&a, &fam).unwrap().eval(t).unwrap();
                prop_assert!(close(direct, curve, TOL));
            }
        }
    }

    #[test]
    fn lp_expectation_is_nonincreasing_in_p(a in matrix()) {
        for fam in families(a.rows(), a.cols()) {
            let vals: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 8.0].iter().map(|&p| lp_expectation(&a, &fam, p).unwrap()).collect();
            prop_assert!(vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn order_map_is_compatible(a in matrix()) {
        let h = order_map(&a);
        prop_assert!(h.is_compatible_with(&a));
        for r in 0..h.len() {
            let (i, j) = h.position(r);
            prop_assert_eq!(h.rank(i, j), r);
        }
    }
}
