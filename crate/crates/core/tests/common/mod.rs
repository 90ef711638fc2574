#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use qcorr::qcore::{normalize, Basis, BipartiteState, CMatrix, Ket, Observable};

pub fn labels(prefix: &str, n: usize) -> Basis {
    Basis::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

pub fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

pub fn ket(basis: Basis) -> impl Strategy<Value = Ket> {
    let n = basis.dim();
    prop::collection::vec(complex(), n)
        .prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |v| normalize(basis.clone(), v).unwrap())
}

/// Random bipartite state with factor dimensions in `2..=max_dim`.
pub fn bipartite(max_dim: usize) -> impl Strategy<Value = BipartiteState> {
    (2..=max_dim, 2..=max_dim).prop_flat_map(|(na, nb)| {
        prop::collection::vec(complex(), na * nb)
            .prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
            .prop_map(move |v| {
                let m = CMatrix::from_row_slice(na, nb, &v);
                BipartiteState::new(labels("a", na), labels("b", nb), m).unwrap()
            })
    })
}

pub fn hermitian(basis: Basis) -> impl Strategy<Value = Observable> {
    let n = basis.dim();
    prop::collection::vec(complex(), n * n).prop_map(move |v| {
        let m = CMatrix::from_row_slice(n, n, &v);
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Observable::new(basis.clone(), h).unwrap()
    })
}
