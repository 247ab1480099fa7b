use contactdyn::expr::{Bindings, Expr};
use contactdyn::exterior::{contact_volume_coefficient, contract, wedge, FormExpr, FormValue, VectorValue};
use proptest::prelude::*;

mod common;
use common::{increasing, Dense};

/// Coefficients are multiples of 1/4 so that sums in any order are exact.
fn form(dim: usize, degree: usize) -> impl Strategy<Value = FormValue> {
    let n = increasing(dim, degree).len();
    prop::collection::vec((-12i32..=12).prop_map(|k| k as f64 * 0.25), n).prop_map(move |coeffs| {
        let mut f = FormValue::zero(dim, degree);
        for (idx, c) in increasing(dim, degree).iter().zip(coeffs) {
            f.add_term(idx, c);
        }
        f
    })
}

fn dim_and_degrees() -> impl Strategy<Value = (usize, usize, usize)> {
    prop_oneof![Just(3usize), Just(5usize)].prop_flat_map(|dim| (Just(dim), 0..=3usize, 0..=3usize))
        .prop_filter("total degree fits", |(dim, k, l)| k + l <= *dim)
}

fn pair() -> impl Strategy<Value = (FormValue, FormValue)> {
    dim_and_degrees().prop_flat_map(|(dim, k, l)| (form(dim, k), form(dim, l)))
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim)
}

fn max_gap(a: &FormValue, b: &FormValue) -> f64 {
    (a - b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn wedge_matches_dense_oracle((a, b) in pair()) {
        let sparse = wedge(&a, &b).unwrap();
        let dense = Dense::wedge(&Dense::from_sparse(&a), &Dense::from_sparse(&b));
        prop_assert!(dense.distance(&sparse) <= 1e-12);
    }

    #[test]
    fn contract_matches_dense_oracle(
        (f, x) in (prop_oneof![Just(3usize), Just(5usize)], 1..=3usize)
            .prop_flat_map(|(dim, k)| (form(dim, k), vector(dim)))
    ) {
        let sparse = contract(&VectorValue(x.clone()), &f).unwrap();
        let dense = Dense::contract(&x, &Dense::from_sparse(&f));
        prop_assert!(dense.distance(&sparse) <= 1e-12);
    }

    #[test]
    fn wedge_is_graded_commutative((a, b) in pair()) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        let sign = if (a.degree() * b.degree()) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(ab, ba.scale(sign));
    }

    #[test]
    fn contract_is_a_graded_derivation(
        (a, b, x) in dim_and_degrees()
            .prop_filter("contractible", |(_, k, l)| k + l >= 1 && k + l <= 3)
            .prop_flat_map(|(dim, k, l)| (form(dim, k), form(dim, l), vector(dim)))
    ) {
        let x = VectorValue(x);
        let lhs = contract(&x, &wedge(&a, &b).unwrap()).unwrap();
        let dim = a.dim();
        let left = if a.degree() == 0 {
            FormValue::zero(dim, lhs.degree())
        } else {
            wedge(&contract(&x, &a).unwrap(), &b).unwrap()
        };
        let right = if b.degree() == 0 {
            FormValue::zero(dim, lhs.degree())
        } else {
            let sign = if a.degree() % 2 == 0 { 1.0 } else { -1.0 };
            wedge(&a, &contract(&x, &b).unwrap()).unwrap().scale(sign)
        };
        prop_assert!(max_gap(&lhs, &(&left + &right)) <= 1e-12);
    }

    #[test]
    fn contracting_twice_with_the_same_vector_vanishes(
        (f, x) in (prop_oneof![Just(3usize), Just(5usize)], 2..=3usize)
            .prop_flat_map(|(dim, k)| (form(dim, k), vector(dim)))
    ) {
        let x = VectorValue(x);
        let twice = contract(&x, &contract(&x, &f).unwrap()).unwrap();
        prop_assert!(twice.max_abs() <= 1e-12);
    }

    #[test]
    fn canonical_contact_volume_is_unit(n in 1usize..=2, pt in prop::collection::vec(-5.0f64..5.0, 5)) {
        let names = canonical_names(n);
        let eta = canonical_eta(n);
        let b = Bindings::from_slices(&names, &pt[..2 * n + 1]);
        let c = contact_volume_coefficient(&eta, &names, &b, n).unwrap();
        prop_assert!((c.abs() - 1.0).abs() <= 1e-12, "{}", c);
    }
}

fn canonical_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    names.extend((0..n).map(|i| format!("p{i}")));
    names.push("s".into());
    names
}

/// `ds - p_i dq^i`.
fn canonical_eta(n: usize) -> FormExpr {
    let mut coeffs = vec![Expr::zero(); 2 * n + 1];
    for i in 0..n {
        coeffs[i] = Expr::neg(Expr::var(&format!("p{i}")));
    }
    coeffs[2 * n] = Expr::one();
    FormExpr::one_form(coeffs)
}

#[test]
fn degenerate_form_has_zero_volume() {
    let names = canonical_names(1);
    let eta = FormExpr::one_form(vec![Expr::zero(), Expr::zero(), Expr::one()]);
    let b = Bindings::from_slices(&names, &[0.3, -1.0, 2.0]);
    assert_eq!(contact_volume_coefficient(&eta, &names, &b, 1).unwrap(), 0.0);
}

#[test]
fn dead_term_in_a_top_wedge() {
    // (ds - 5 dq) ∧ dq∧dp in (q, p, s)
    let eta = FormValue::covector(&[-5.0, 0.0, 1.0]);
    let top = wedge(&eta, &FormValue::basis(3, &[0, 1])).unwrap();
    assert_eq!(top.get(&[0, 1, 2]), 1.0);
    assert_eq!(top.components().count(), 1);
}
