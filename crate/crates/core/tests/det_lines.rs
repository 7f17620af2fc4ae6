use detgerbe::exact_linalg::{det, mat_mul, q, Matrix, Scalar};
use detgerbe::tate_window::*;
use proptest::prelude::*;

fn window() -> Window {
    Window::new(-2, 2).unwrap()
}

fn lattice_strategy() -> impl Strategy<Value = WLattice> {
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, 4), 0..4).prop_map(|rows| {
        let rows: Vec<Vec<Scalar>> = rows.into_iter().map(|r| r.into_iter().map(q).collect()).collect();
        WLattice::from_rows(window(), &rows).unwrap()
    })
}

fn invertible_strategy() -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-2i64..=2, 16)
        .prop_map(|xs| (0..4).map(|i| (0..4).map(|j| q(xs[4 * i + j])).collect()).collect::<Matrix>())
        .prop_filter("invertible", |m| det(m) != q(0))
}

fn nonzero() -> impl Strategy<Value = Scalar> {
    (1i64..5, prop::bool::ANY).prop_map(|(n, s)| if s { q(n) } else { q(-n) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_coherence_on_four_chains(
        l0 in lattice_strategy(), l1 in lattice_strategy(), l2 in lattice_strategy(), l3 in lattice_strategy(),
        a in nonzero(), b in nonzero(), c in nonzero(),
    ) {
        let x = DetLineElement::with_scalar(l0, l1.clone(), a).unwrap();
        let y = DetLineElement::with_scalar(l1, l2.clone(), b).unwrap();
        let z = DetLineElement::with_scalar(l2, l3, c).unwrap();
        let left = gamma_compose(&gamma_compose(&x, &y).unwrap(), &z).unwrap();
        let right = gamma_compose(&x, &gamma_compose(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn action_is_functorial(g in invertible_strategy(), h in invertible_strategy(),
                            l in lattice_strategy(), lp in lattice_strategy(), s in nonzero()) {
        let d = DetLineElement::with_scalar(l, lp, s).unwrap();
        let gh = mat_mul(&g, &h);
        let lhs = act_on_det(&gh, &d).unwrap();
        let rhs = act_on_det(&g, &act_on_det(&h, &d).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_commutes_with_gamma(g in invertible_strategy(), l0 in lattice_strategy(),
                                  l1 in lattice_strategy(), l2 in lattice_strategy()) {
        let x = DetLineElement::canonical(l0, l1.clone()).unwrap();
        let y = DetLineElement::canonical(l1, l2).unwrap();
        let lhs = act_on_det(&g, &gamma_compose(&x, &y).unwrap()).unwrap();
        let rhs = gamma_compose(&act_on_det(&g, &x).unwrap(), &act_on_det(&g, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gamma_stable_under_enlargement(l0 in lattice_strategy(), l1 in lattice_strategy(), l2 in lattice_strategy()) {
        let x = DetLineElement::canonical(l0, l1.clone()).unwrap();
        let y = DetLineElement::canonical(l1, l2).unwrap();
        let big = window().enlarge(1);
        let small = gamma_compose(&x, &y).unwrap().embed(&big).unwrap();
        let large = gamma_compose(&x.embed(&big).unwrap(), &y.embed(&big).unwrap()).unwrap();
        prop_assert_eq!(small, large);
    }

    #[test]
    fn det_element_alternating(l in lattice_strategy(), lp in lattice_strategy()) {
        let i = l.intersect(&lp).unwrap();
        let mut bl = omega(l.space(), i.space());
        let blp = omega(lp.space(), i.space());
        prop_assume!(bl.len() >= 2);
        let base = det_element(&l, &lp, &bl, &blp).unwrap();
        prop_assert_eq!(base.scalar.clone(), q(1));
        bl.swap(0, 1);
        prop_assert_eq!(det_element(&l, &lp, &bl, &blp).unwrap().scalar, q(-1));
        // adding a multiple of one vector to another leaves the wedge alone
        let extra: Vec<Scalar> = bl[1].iter().map(|x| x * q(3)).collect();
        for (a, e) in bl[0].iter_mut().zip(extra) { *a += e; }
        prop_assert_eq!(det_element(&l, &lp, &bl, &blp).unwrap().scalar, q(-1));
    }

    #[test]
    fn theory_square_on_random_flags(rows in proptest::collection::vec(proptest::collection::vec(-2i64..=2, 4), 3),
                                     anchor in lattice_strategy()) {
        let rows: Vec<Vec<Scalar>> = rows.into_iter().map(|r| r.into_iter().map(q).collect()).collect();
        let l1 = WLattice::from_rows(window(), &rows[..1]).unwrap();
        let l2 = WLattice::from_rows(window(), &rows[..2]).unwrap();
        let l3 = WLattice::from_rows(window(), &rows[..3]).unwrap();
        let th = DetTheory::new(anchor);
        let lhs = th.transition(&l1, &l2).unwrap() * th.transition(&l2, &l3).unwrap();
        let rhs = th.transition(&l1, &l3).unwrap() * nested_wedge_scalar(&l1, &l2, &l3);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hom_sets_closed_under_composition(l0 in lattice_strategy(), l1 in lattice_strategy(),
                                         l2 in lattice_strategy(), a in nonzero(), b in nonzero()) {
        let x = DetLineElement::with_scalar(l0, l1.clone(), a).unwrap();
        let y = DetLineElement::with_scalar(l1, l2, b).unwrap();
        let z = gamma_compose(&x, &y).unwrap();
        prop_assert!(z.scalar != q(0));
        let back = gamma_compose(&z, &y.inverse_line()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn codimension_shift(l in lattice_strategy(), lp in lattice_strategy()) {
        // replacing L by t^2 O ∩ L changes dim L/I - dim L'/I by the codimension
        let sub = l.intersect(&std_lattice(&window(), 1).unwrap()).unwrap();
        let k = (l.dim() - sub.dim()) as i64;
        let (a, b) = commensurable(&l, &lp).unwrap();
        let (c, d) = commensurable(&sub, &lp).unwrap();
        prop_assert_eq!(a as i64 - b as i64 - k, c as i64 - d as i64);
    }
}
