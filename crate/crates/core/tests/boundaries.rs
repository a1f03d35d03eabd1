use proptest::prelude::*;
use sparsepois::boundaries::{max_test_boundary, rho_dense, rho_dense_one_sided, rho_sparse};

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let a = (lo * 1000.0).round() as i64 + 1;
    let b = (hi * 1000.0).round() as i64 - 1;
    (a..=b).map(|k| k as f64 / 1000.0).collect()
}

#[test]
fn sparse_boundary_is_continuous_at_three_quarters() {
    let left = 0.75 - 0.5;
    let right = (1.0 - 0.25_f64.sqrt()).powi(2);
    assert!((left - right).abs() < 1e-15);
    assert!((rho_sparse(0.75 + 1e-12).unwrap() - 0.25).abs() < 1e-11);
    assert!((rho_sparse(0.75 - 1e-12).unwrap() - 0.25).abs() < 1e-11);
}

#[test]
fn max_curve_dominates_linear_branch() {
    let f = |b: f64| (1.0 - (1.0 - b).sqrt()).powi(2) - (b - 0.5);
    let g = grid(0.75, 1.0);
    for w in g.windows(2) {
        assert!(f(w[0]) >= 0.0);
        assert!(f(w[1]) > f(w[0]), "{} {}", w[0], w[1]);
    }
}

#[test]
fn boundaries_increase() {
    let d = grid(0.0, 0.5);
    for w in d.windows(2) {
        assert!(rho_dense(w[1]).unwrap() > rho_dense(w[0]).unwrap());
        assert!(rho_dense_one_sided(w[1]).unwrap() > rho_dense_one_sided(w[0]).unwrap());
        assert!(rho_dense(w[0]).unwrap() > rho_dense_one_sided(w[0]).unwrap());
    }
    let s = grid(0.5, 1.0);
    for w in s.windows(2) {
        assert!(rho_sparse(w[1]).unwrap() > rho_sparse(w[0]).unwrap());
        assert!(max_test_boundary(w[1]).unwrap() > max_test_boundary(w[0]).unwrap());
        assert!(max_test_boundary(w[0]).unwrap() >= rho_sparse(w[0]).unwrap() - 1e-15);
    }
}

proptest! {
    #[test]
    fn one_sided_dense_lies_below(beta in 1e-6f64..0.499_999) {
        prop_assert!(rho_dense(beta).unwrap() > rho_dense_one_sided(beta).unwrap());
    }
}
