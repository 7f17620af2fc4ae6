use detgerbe::clifford_fock::{exterior_power_operator, CliffordAlg, FockMorphism, Linear};
use detgerbe::double_loop::*;
use detgerbe::exact_linalg::{identity, mat_vec, q, Scalar, Subspace};
use detgerbe::gerbal_core::pi0_action_on_pi1;
use detgerbe::gl_tower::WindowOperator;
use detgerbe::tate_window::{act_on_det, kappa, DetLineElement, WLattice, Window};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn w3() -> DoubleWindow {
    DoubleWindow::square(-3, 3).unwrap()
}

fn w2() -> DoubleWindow {
    DoubleWindow::square(-2, 2).unwrap()
}

/// `t[-1,2) × s[-1,1)`: six monomials, small enough for Fock modules.
fn tiny() -> DoubleWindow {
    DoubleWindow::new(Window::new(-1, 2).unwrap(), Window::new(-1, 1).unwrap())
}

/// The same coordinates read as a one-variable window.
fn flat(w: &DoubleWindow) -> Window {
    Window::new(-1, w.dim() as i64 - 1).unwrap()
}

fn scale(w: &DoubleWindow, i: i64, j: i64, c: Scalar) -> GL2Element {
    let mut m = identity(w.dim());
    let k = w.index(i, j).unwrap();
    m[k][k] = c;
    GL2Element::new(w, m).unwrap()
}

/// Generators: cyclic shifts, the mixing element, the rotation, and a few
/// diagonal scalings (so that transport factors are not all ±1).
fn generators(w: &DoubleWindow) -> Vec<GL2Element> {
    let mut g = vec![
        GL2Element::shift_s(w, 1),
        GL2Element::shift_t(w, 1),
        GL2Element::mixing(w),
        GL2Element::rotation(w),
        scale(w, 0, 0, q(2)),
        scale(w, w.t().low(), w.s().high() - 1, q(-3)),
    ];
    let inv: Vec<GL2Element> = g.iter().map(GL2Element::inv).collect();
    g.extend(inv);
    g
}

fn element(w: DoubleWindow) -> impl Strategy<Value = GL2Element> {
    let n = generators(&w).len();
    proptest::collection::vec(0..n, 0..4).prop_map(move |word| {
        let gens = generators(&w);
        word.iter().fold(GL2Element::identity(&w), |acc, &k| acc.mul(&gens[k]))
    })
}

/// `L₀` moved by a few GL⁺-type elements (mixing, t-scalings) plus extra
/// monomials at interior rows.
fn secondary(w: DoubleWindow) -> impl Strategy<Value = Subspace> {
    (0usize..3, proptest::collection::vec((-2i64..0, 0i64..2), 0..3), any::<bool>()).prop_map(move |(k, extra, sc)| {
        let a = GL2Element::mixing(&w);
        let mut l = l0(&w);
        for _ in 0..k {
            l = a.apply(&l);
        }
        if sc {
            l = scale(&w, 1, 0, q(5)).apply(&l);
        }
        for (i, j) in extra {
            l = l.sum(&w.span([(i, j)]));
        }
        l
    })
}

fn subspace(n: usize) -> impl Strategy<Value = Subspace> {
    proptest::collection::vec(proptest::collection::vec(-1i64..=1, n), 0..=n).prop_map(move |rows| {
        let rows: Vec<Vec<Scalar>> = rows.into_iter().map(|r| r.into_iter().map(q).collect()).collect();
        Subspace::from_rows(n, &rows).unwrap()
    })
}

// ---------------------------------------------------------------- lattices

#[test]
fn big_lattice_examples() {
    let w = w3();
    assert_eq!(is_big_lattice(&o_k(&w), &w), Some((0, 0)));
    let mixed = example_lattice(&w, 1, &[(-1, 2), (0, -1)]);
    assert_eq!(is_big_lattice(&mixed, &w), Some((1, -1)));
    // missing the s-tail
    assert_eq!(is_big_lattice(&l0(&w), &w), None);
    assert_eq!(is_big_lattice(&cut(&w, 1), &w), Some((1, 1)));
}

#[test]
fn secondary_lattice_examples() {
    let w = w3();
    let o = BigLattice::o_k(&w);
    let l = tails(&w, &[(0, 1), (1, 0), (2, -2)]);
    assert!(is_secondary(&l, &o).unwrap().holds());
    assert!(SecLattice::new(&o, l).is_ok());
    let whole = is_secondary(o.space(), &o).unwrap();
    assert!(whole.levels.iter().all(|r| !r.compact && r.open));
    assert_eq!(whole.levels.iter().map(|r| r.level).collect::<Vec<_>>(), vec![0, 1, 2]);
    let zero = is_secondary(&Subspace::zero(w.dim()), &o).unwrap();
    assert!(zero.levels.iter().all(|r| r.compact && !r.open));
    assert!(is_secondary(&cut(&w, -1), &o).is_err());
}

#[test]
fn mixing_element_example() {
    for w in [w3(), w3().enlarge(1)] {
        let a = GL2Element::mixing(&w);
        let l = l0(&w);
        let al = a.apply(&l);
        assert_eq!(pseudo_commensurable(&w, &al, &l), Some(1));
        assert!(!commensurable(&w, &al, &l));
        // In a window with sh ≤ th the intersection keeps a·t^(th-1), whose
        // tail s^j t^(th-1-j) is cut off before it leaves Q[[t]].
        let meet = al.intersect(&l);
        let sl = l.intersect(&cut(&w, 1));
        let top = w.t().high() - 1;
        let extra = Subspace::from_rows(w.dim(), &[a.apply_vec(&w.span([(top, 0)]).rows()[0])]).unwrap();
        assert_eq!(meet, sl.sum(&extra));
        assert_eq!(meet.dim(), sl.dim() + 1);
        let big = BigLattice::o_k(&w);
        assert!(is_secondary(&al, &big).unwrap().holds());
        assert_eq!(a.class(), Gl2Class::Finite);
        assert!(a.is_plus());
    }
}

#[test]
fn mixing_intersection_is_exact_when_s_window_is_deeper() {
    let w = DoubleWindow::new(Window::new(-2, 2).unwrap(), Window::new(-1, 4).unwrap());
    let a = GL2Element::mixing(&w);
    let l = l0(&w);
    assert_eq!(a.apply(&l).intersect(&l), l.intersect(&cut(&w, 1)));
}

#[test]
fn rotation_is_not_pseudo_commensurable() {
    for w in [w3(), w3().enlarge(1)] {
        let l = l0(&w);
        let r = GL2Element::rotation(&w);
        assert_eq!(pseudo_commensurable(&w, &r.apply(&l), &l), None);
        assert_eq!(pseudo_commensurable(&w, &l, &l), Some(w.s().low()));
    }
}

#[test]
fn operator_classes() {
    let w = w3();
    assert_eq!(GL2Element::identity(&w).class(), Gl2Class::Finite);
    assert_eq!(GL2Element::shift_t(&w, 1).class(), Gl2Class::Plus);
    assert_eq!(GL2Element::shift_s(&w, 1).class(), Gl2Class::Full);
    assert_eq!(GL2Element::mixing(&w).finite_level(), Some(1));
    let s = GL2Element::shift_s(&w, 1);
    let six = (0..6).fold(GL2Element::identity(&w), |acc, _| acc.mul(&s));
    assert_eq!(six, GL2Element::identity(&w));
    assert!(GL2Element::new(&w, vec![vec![q(0); w.dim()]; w.dim()]).is_err());
}

#[test]
fn transitivity_examples() {
    let w = w3();
    let o = BigLattice::o_k(&w);
    assert_eq!(transitivity_witness(&o).unwrap(), GL2Element::identity(&w));
    let so = BigLattice::new(&w, cut(&w, 1)).unwrap();
    assert!(matches!(transitivity_witness(&so), Err(DoubleLoopError::NoWitness(_))));
    // levels 1, 2 full, levels -1 and 0 with t-tails of total size 6
    let mixed = BigLattice::new(&w, example_lattice(&w, 1, &[(-1, 0), (0, 0)])).unwrap();
    let g = transitivity_witness(&mixed).unwrap();
    assert_eq!(g.apply(&o_k(&w)), *mixed.space());
    let bent = BigLattice::new(&w, GL2Element::mixing(&w).apply(&o_k(&w)).sum(&w.span([(0, -1)]))).unwrap();
    let twisted = GL2Element::rotation(&w).apply(bent.space());
    if let Ok(t) = BigLattice::new(&w, twisted) {
        assert!(transitivity_witness(&t).is_err());
    }
}

// ---------------------------------------------------------------- pseudo det lines

#[test]
fn pseudo_det_line_examples() {
    for w in [w3(), w3().enlarge(1)] {
        let l = l0(&w);
        let d = det_line_pseudo(&w, &l, &l).unwrap();
        for m in w.levels() {
            assert_eq!(d.at_level(m).unwrap(), q(1));
        }
        let al = GL2Element::mixing(&w).apply(&l);
        let e = det_line_pseudo(&w, &l, &al).unwrap();
        assert_eq!(e.witness(), 1);
        let (x, y) = e.stability().unwrap();
        assert!(!x.is_zero() && !y.is_zero());
        assert_eq!(x, e.transition(1).unwrap() * &y);
        // a commensurable pair: the stable level is the plain det line
        let lp = l.sum(&w.span([(-1, 0)]));
        let f = det_line_pseudo(&w, &l, &lp).unwrap();
        let plain = DetLineElement::canonical(WLattice::new(flat(&w), l.clone()).unwrap(), WLattice::new(flat(&w), lp.clone()).unwrap()).unwrap();
        assert_eq!(f.at_level(w.s().high()).unwrap(), plain.scalar);
        assert!(det_line_pseudo(&w, &l, &GL2Element::rotation(&w).apply(&l)).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transitions_compose_to_the_direct_factor(a in secondary(w2()), b in secondary(w2())) {
        let w = w2();
        let b = {
            // force pseudo commensurability with a from level 1 on
            let keep = a.intersect(&cut(&w, 1));
            truncate_below(&w, &b, 1).intersect(&cut(&w, 0)).sum(&keep)
        };
        prop_assume!(pseudo_commensurable(&w, &a, &b).is_some());
        let d = det_line_pseudo(&w, &a, &b).unwrap();
        let top = w.s().high();
        for m in d.witness()..top {
            let stepwise = (m..top).fold(Scalar::one(), |acc, k| acc * d.transition(k).unwrap());
            prop_assert_eq!(stepwise, d.level_factor(m, top).unwrap());
        }
    }

    #[test]
    fn pseudo_commensurability_is_an_equivalence(a in secondary(w2()), b in secondary(w2()), c in secondary(w2())) {
        let w = w2();
        let r = |x: &Subspace, y: &Subspace| pseudo_commensurable(&w, x, y);
        prop_assert!(r(&a, &a).is_some());
        prop_assert_eq!(r(&a, &b), r(&b, &a));
        if let (Some(n), Some(m)) = (r(&a, &b), r(&b, &c)) {
            let k = r(&a, &c);
            prop_assert!(k.is_some() && k.unwrap() <= n.max(m));
        }
    }

    #[test]
    fn gamma_is_coherent_on_pseudo_lines(a in secondary(w2()), b in secondary(w2()), c in secondary(w2()), d in secondary(w2()),
                                          x in 1i64..4, y in -3i64..-1, z in 1i64..3) {
        let w = w2();
        // common tail from level 1 on
        let tail = a.intersect(&cut(&w, 1));
        let fix = |s: &Subspace| truncate_below(&w, s, 1).intersect(&cut(&w, 0)).sum(&tail);
        let (b, c, d) = (fix(&b), fix(&c), fix(&d));
        let line = |s: &Subspace, t: &Subspace, v: i64| PseudoDetLine::with_scalar(&w, s.clone(), t.clone(), q(v)).unwrap();
        let (ab, bc, cd) = (line(&a, &b, x), line(&b, &c, y), line(&c, &d, z));
        let left = gamma_pseudo(&gamma_pseudo(&ab, &bc).unwrap(), &cd).unwrap();
        let right = gamma_pseudo(&ab, &gamma_pseudo(&bc, &cd).unwrap()).unwrap();
        prop_assert_eq!(&left.scalar, &right.scalar);
        // composition commutes with reading the line at a lower level
        let ac = gamma_pseudo(&ab, &bc).unwrap();
        let m = ac.witness().max(ab.witness()).max(bc.witness());
        let (ta, tb, tc) = (truncate_below(&w, &a, m), truncate_below(&w, &b, m), truncate_below(&w, &c, m));
        let low = ab.at_level(m).unwrap() * bc.at_level(m).unwrap() * kappa(&ta, &tb) * kappa(&tb, &tc) / kappa(&ta, &tc);
        prop_assert_eq!(ac.at_level(m).unwrap(), low);
    }
}

// ---------------------------------------------------------------- functors

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transport_is_strictly_multiplicative(g in element(w2()), h in element(w2()), l in secondary(w2())) {
        let (tg, th, tgh) = (Transport { g: g.clone() }, Transport { g: h.clone() }, Transport { g: g.mul(&h) });
        let (hl, p1) = th.map(&l);
        let (ghl, p2) = tg.map(&hl);
        let (direct, p) = tgh.map(&l);
        prop_assert_eq!(ghl, direct);
        prop_assert_eq!(p1 * p2, p);
    }

    #[test]
    fn transport_gauge_matches_det_transport(g in element(w2()), l in secondary(w2()), lp in secondary(w2())) {
        let w = w2();
        let t = Transport { g: g.clone() };
        let (gl, pl) = t.map(&l);
        let (glp, plp) = t.map(&lp);
        let gauge = gauge_hom_scalar(&l, &lp, &gl, &glp, &pl, &plp);
        prop_assert_eq!(&gauge, &t.hom_scalar(&l, &lp));
        let fw = flat(&w);
        let d = DetLineElement::canonical(WLattice::new(fw, l).unwrap(), WLattice::new(fw, lp).unwrap()).unwrap();
        prop_assert_eq!(act_on_det(g.matrix(), &d).unwrap().scalar, gauge);
    }

    #[test]
    fn xi_is_equivariant(g in element(w2()), objs in proptest::collection::vec(secondary(w2()), 1..4)) {
        let w = w2();
        let r = xi_equivariance(&w, &g, &o_k(&w), &cut(&w, 1), &objs).unwrap();
        prop_assert!(r.mismatches.is_empty());
        prop_assert!(!r.torsor.is_zero());
    }

    #[test]
    fn xi_composes_through_the_exact_sequence(objs in proptest::collection::vec(secondary(w2()), 1..4)) {
        let w = w2();
        let r = xi_composition(&w, &o_k(&w), &cut(&w, 1), &Subspace::zero(w.dim()).sum(&cut(&w, 1).intersect(&p_part(&w))), &objs);
        // the third lattice is not a lattice of the window, so only check the nested big ones
        let _ = r;
        let r = xi_composition(&w, &cut(&w, -1), &o_k(&w), &cut(&w, 1), &objs).unwrap();
        prop_assert!(r.mismatches.is_empty());
        prop_assert!(r.anchors_exact);
        prop_assert!(!r.nu_anchor.is_zero());
    }
}

#[test]
fn xi_examples() {
    let w = w3();
    let o = o_k(&w);
    let id = Xi::new(&w, &o, &o).unwrap();
    let l = l0(&w);
    assert_eq!(id.map(&l).unwrap(), (l.clone(), q(1)));
    let xi = Xi::new(&w, &o, &cut(&w, 1)).unwrap();
    let (x, phi) = xi.map(&l).unwrap();
    assert_eq!(x, l.intersect(&cut(&w, 1)));
    assert_eq!(phi, q(1));
    // the twisting line is that of the level-0 quotient Q[[t]], which is
    // also the preferred anchor, so Ξ(M_{L₀}) is untwisted
    assert_eq!(xi.image(&l), *xi.anchor());
    assert_eq!(xi.image(&l).dim(), 3);
    // quasi-inverse
    let (back, d) = xi.unmap(&x).unwrap();
    assert_eq!(back, l);
    assert_eq!(d, q(1));
    // a non-monomial object: the split is read off an explicit basis change
    let al = GL2Element::mixing(&w).apply(&l);
    let (ax, aphi) = xi.map(&al).unwrap();
    assert_eq!(ax, al.intersect(&cut(&w, 1)));
    assert!(!aphi.is_zero());
}

#[test]
fn xi_equivariance_for_the_paper_elements() {
    for w in [w3(), w3().enlarge(1)] {
        let objs = vec![l0(&w), GL2Element::mixing(&w).apply(&l0(&w)), l0(&w).sum(&w.span([(-1, 0), (-2, 1)]))];
        for g in [GL2Element::mixing(&w), GL2Element::shift_t(&w, 1), GL2Element::rotation(&w), GL2Element::shift_s(&w, 1)] {
            let r = xi_equivariance(&w, &g, &o_k(&w), &cut(&w, 1), &objs).unwrap();
            assert!(r.mismatches.is_empty(), "{g:?}");
        }
    }
}

// ---------------------------------------------------------------- Fock oracle

fn flat_lattice(w: &DoubleWindow, s: &Subspace) -> WLattice {
    WLattice::new(flat(w), s.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn css_composition_matches_fock(x in subspace(6), y in subspace(6), z in subspace(6)) {
        let w = tiny();
        let alg = CliffordAlg::new(flat(&w));
        let (fx, fy, fz) = (flat_lattice(&w, &x), flat_lattice(&w, &y), flat_lattice(&w, &z));
        let xy = FockMorphism::canonical(alg, &fx, &fy).unwrap();
        let yz = FockMorphism::canonical(alg, &fy, &fz).unwrap();
        let xz = FockMorphism::canonical(alg, &fx, &fz).unwrap();
        let lhs = xy.then(&yz).unwrap().fock_scalar().unwrap();
        prop_assert_eq!(lhs, comp_scalar(&x, &y, &z) * xz.fock_scalar().unwrap());
    }

    #[test]
    fn transport_factor_matches_exterior_power(word in proptest::collection::vec(0usize..12, 0..4), l in subspace(6)) {
        let w = tiny();
        let gens = generators(&w);
        let g = word.iter().fold(GL2Element::identity(&w), |acc, &k| acc.mul(&gens[k]));
        let alg = CliffordAlg::new(flat(&w));
        let op = WindowOperator::new(flat(&w), 0, g.matrix().clone(), q(1), q(1)).unwrap();
        let lam = exterior_power_operator(&alg, &op).unwrap();
        let moved = mat_vec(&lam, &alg.vacuum(&l));
        let target = alg.vacuum(&g.apply(&l));
        let k = target.iter().position(|x| !x.is_zero()).unwrap();
        let tau = &moved[k] / &target[k];
        prop_assert_eq!(moved, target.iter().map(|x| x * &tau).collect::<Vec<_>>());
        prop_assert_eq!(tau, g.tau(&l));
    }

    #[test]
    fn xi_split_matches_fock_wedges(l in subspace(6)) {
        let w = tiny();
        let big = Subspace::full(6);
        let sub = o_k(&w);
        let xi = Xi::new(&w, &big, &sub).unwrap();
        let alg = CliffordAlg::new(flat(&w));
        // φ(v₁)⋯φ(v_k)|∅⟩ for [lifts of RREF π(L)] ++ RREF(L∩𝕃')
        let x = l.intersect(&sub);
        let images: Vec<Vec<Scalar>> = l.rows().iter().map(|r| xi.class(r)).collect();
        let pi = xi.image(&l);
        let mut fam: Vec<Vec<Scalar>> = pi.rows().iter().map(|t| {
            let c = solve_lift(&images, l.rows(), t);
            c
        }).collect();
        fam.extend(x.rows().iter().cloned());
        let empty = alg.vacuum(&Subspace::zero(6));
        let wedge = alg.apply_product(&fam.iter().cloned().map(Linear::Phi).collect::<Vec<_>>(), &empty);
        let vac = alg.vacuum(&l);
        let k = vac.iter().position(|v| !v.is_zero()).unwrap();
        prop_assert_eq!(&wedge[k] / &vac[k], xi.split(&l));
    }
}

/// Brute-force lift: try combinations of the source rows with coefficients
/// in {-1, 0, 1} first, then fall back to exact solving row by row.
fn solve_lift(images: &[Vec<Scalar>], sources: &[Vec<Scalar>], target: &[Scalar]) -> Vec<Scalar> {
    let n = sources[0].len();
    let k = images.len();
    let mut best: Option<Vec<Scalar>> = None;
    let mut coeffs = vec![-1i64; k];
    loop {
        let img: Vec<Scalar> = (0..target.len()).map(|i| (0..k).map(|r| &images[r][i] * q(coeffs[r])).sum()).collect();
        if img == target {
            best = Some((0..n).map(|i| (0..k).map(|r| &sources[r][i] * q(coeffs[r])).sum()).collect());
            break;
        }
        let mut p = 0;
        while p < k && coeffs[p] == 1 {
            coeffs[p] = -1;
            p += 1;
        }
        if p == k {
            break;
        }
        coeffs[p] += 1;
    }
    best.expect("RREF rows of π(L) lift with small coefficients on these windows")
}

// ---------------------------------------------------------------- the gerbal representation

fn paper_sample(w: &DoubleWindow, cap: usize) -> Gl2Sample {
    let gens = vec![
        ("σs".to_string(), GL2Element::shift_s(w, 1)),
        ("σt".to_string(), GL2Element::shift_t(w, 1)),
        ("a".to_string(), GL2Element::mixing(w)),
    ];
    word_sample(w, &gens, cap).unwrap()
}

fn base_objects(w: &DoubleWindow) -> Vec<Subspace> {
    let l = l0(w);
    vec![l.clone(), GL2Element::mixing(w).apply(&l), l.sum(&w.span([(-1, 0)]))]
}

#[test]
fn identity_sample_is_trivial() {
    let w = w3();
    let e = word_sample(&w, &[], 3).unwrap();
    assert_eq!(e.len(), 1);
    let mut rep = GerbalRep::new(&BigLattice::o_k(&w), e).unwrap();
    let base: Vec<usize> = base_objects(&w).into_iter().map(|s| rep.intern(s).unwrap()).collect();
    let c = rep.extract(&base).unwrap();
    assert!(c.is_trivial());
    for &x in &base {
        assert_eq!(rep.apply(0, x).unwrap(), (x, q(1)));
    }
}

#[test]
fn word_sample_cocycle_is_the_coboundary_of_the_choices() {
    // cap 3: a non-identity triple with all products defined needs words of
    // length 3, and on [-2,2)² those push F_g F_h L₀ into the boundary level
    let w = w3();
    let sample = paper_sample(&w, 3);
    let mut canonical = GerbalRep::new(&BigLattice::o_k(&w), sample.clone()).unwrap();
    let base: Vec<usize> = base_objects(&w).into_iter().map(|s| canonical.intern(s).unwrap()).collect();
    let c = canonical.extract(&base).unwrap();
    assert!(c.is_trivial());
    assert!(c.identity.failures.is_empty() && c.identity.checked > 0);
    let mut rep = GerbalRep::new(&BigLattice::o_k(&w), sample).unwrap().with_random_choices(5);
    let base: Vec<usize> = base_objects(&w).into_iter().map(|s| rep.intern(s).unwrap()).collect();
    let c = rep.extract(&base).unwrap();
    assert!(!c.is_trivial());
    for (&(g1, g2, g3), v) in &c.values {
        assert_eq!(Some(v.clone()), rep.choice_coboundary(g1, g2, g3));
    }
    assert!(c.identity.failures.is_empty());
    let n = rep.sample().len();
    for g in 0..n {
        for h in 0..n {
            if rep.sample().group.mul(g, h).is_some() {
                assert!(rep.check_naturality(g, h, &base).unwrap() > 0);
            }
        }
    }
}

#[test]
fn mixing_functor_is_transport() {
    // a preserves O_K, so F_a = T_a and F_a(L₀) = aL₀, pseudo commensurable with L₀
    let w = w3();
    let sample = paper_sample(&w, 1);
    let a = sample.find(&GL2Element::mixing(&w)).unwrap();
    let mut rep = GerbalRep::new(&BigLattice::o_k(&w), sample).unwrap();
    let x = rep.intern(l0(&w)).unwrap();
    let (y, phi) = rep.apply(a, x).unwrap();
    assert_eq!(*rep.object(y), GL2Element::mixing(&w).apply(&l0(&w)));
    assert_eq!(phi, GL2Element::mixing(&w).tau(&l0(&w)));
    assert!(rep.related(x, y));
}

fn cyclic_rep(w: &DoubleWindow, lattice: &BigLattice, seed: u64) -> GerbalRep {
    let s = cyclic_sample("σs", &GL2Element::shift_s(w, 1), 64).unwrap();
    GerbalRep::new(lattice, s).unwrap().with_topology(Topology::Cyclic).with_random_choices(seed)
}

fn cyclic_base(w: &DoubleWindow, lattice: &Subspace) -> Vec<Subspace> {
    let l = l0(w).intersect(lattice);
    vec![l.clone(), l.sum(&w.span([(-1, 0)]).intersect(lattice))]
}

#[test]
fn cyclic_pipeline_on_the_s_shift() {
    let w = w3();
    let o = BigLattice::o_k(&w);
    let mut rep = cyclic_rep(&w, &o, 11);
    let r = cyclic_pipeline(&mut rep, &cyclic_base(&w, o.space()), 200).unwrap();
    assert_eq!(r.order, 6);
    assert!(r.matches_choice_coboundary);
    assert!(r.identity.failures.is_empty() && r.identity.checked > 0);
    assert_eq!(r.h3_invariant_factors, vec![2; r.blocks]);
    assert!(r.class_is_zero);
    assert!(r.trivialization.is_some());
}

#[test]
fn cyclic_cocycle_does_not_depend_on_the_lattice() {
    let w = w2();
    let o = BigLattice::o_k(&w);
    let so = BigLattice::new(&w, cut(&w, 1)).unwrap();
    let mut r1 = cyclic_rep(&w, &o, 3);
    let mut r2 = cyclic_rep(&w, &so, 3);
    let a = cyclic_pipeline(&mut r1, &cyclic_base(&w, o.space()), 200).unwrap();
    let b = cyclic_pipeline(&mut r2, &cyclic_base(&w, so.space()), 200).unwrap();
    let n = a.order;
    for g1 in 0..n {
        for g2 in 0..n {
            for g3 in 0..n {
                let (x, y) = (a.cocycle.get(g1, g2, g3).unwrap(), b.cocycle.get(g1, g2, g3).unwrap());
                assert!(x.iter().all(|v| *v == x[0]) && y.iter().all(|v| *v == x[0]));
            }
        }
    }
    assert!(a.class_is_zero && b.class_is_zero);
}

// ---------------------------------------------------------------- the B C^× extension

#[test]
fn bgerbe_identity_and_central_elements() {
    let w = w3();
    let big = BigLattice::o_k(&w);
    let gb = BGerbe::new(&big);
    let e = gb.identity();
    let x = gb.element(GL2Element::shift_s(&w, 1), q(3)).unwrap();
    assert_eq!(gb.multiply(&e, &x), x);
    assert_eq!(gb.multiply(&x, &e), x);
    let lam = gb.central(q(7)).unwrap();
    assert_eq!(gb.multiply(&lam, &x).delta, q(21));
    // (1, λ) acts as the identity functor twisted by λ⁻¹ on objects
    let sample = paper_sample(&w, 1);
    let mut rep = GerbalRep::new(&big, sample).unwrap();
    let obj = rep.intern(l0(&w)).unwrap();
    assert_eq!(rep.act_gerbe(&gb, &lam, obj).unwrap(), (obj, q(1) / q(7)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bgerbe_is_associative(g in element(w2()), h in element(w2()), k in element(w2()), a in 1i64..5, b in -4i64..-1, c in 2i64..6) {
        let w = w2();
        let gb = BGerbe::new(&BigLattice::o_k(&w));
        let (x, y, z) = (gb.element(g, q(a)).unwrap(), gb.element(h, q(b)).unwrap(), gb.element(k, q(c)).unwrap());
        prop_assert_eq!(gb.multiply(&gb.multiply(&x, &y), &z), gb.multiply(&x, &gb.multiply(&y, &z)));
    }
}

#[test]
fn bgerbe_pi0_acts_trivially() {
    let w = w3();
    let gb = BGerbe::new(&BigLattice::o_k(&w));
    let sample = cyclic_sample("σs", &GL2Element::shift_s(&w, 1), 64).unwrap();
    let p = gb.presentation(&sample).unwrap();
    let rho = pi0_action_on_pi1(&p).unwrap();
    assert!(rho.iter().all(|m| *m == vec![vec![1i64]]));
}

#[test]
fn genuine_action_agrees_with_the_gerbal_representation() {
    let w = w2();
    let big = BigLattice::o_k(&w);
    let gb = BGerbe::new(&big);
    let sample = paper_sample(&w, 2);
    let mut rep = GerbalRep::new(&big, sample.clone()).unwrap();
    let base: Vec<usize> = base_objects(&w).into_iter().map(|s| rep.intern(s).unwrap()).collect();
    let n = sample.len();
    let delta = |g: usize| q(g as i64 + 2);
    for g in 0..n {
        for h in 0..n {
            if sample.group.mul(g, h).is_none() {
                continue;
            }
            let x = gb.element(sample.elements[g].clone(), delta(g)).unwrap();
            let y = gb.element(sample.elements[h].clone(), delta(h)).unwrap();
            let xy = gb.multiply(&x, &y);
            for &o in &base {
                let (fo, _) = rep.act_gerbe(&gb, &x, o).unwrap();
                assert_eq!(fo, rep.apply(g, o).unwrap().0);
                let lhs = rep.gerbe_c(&gb, &x, &y, o).unwrap();
                let rhs = rep.c(g, h, o).unwrap() * gb.absolute(&xy) / (gb.absolute(&x) * gb.absolute(&y));
                assert_eq!(lhs, rhs);
            }
        }
    }
    // The section g ↦ (g, δ_g) strictifies with u(g,h) = A(gh)/(A(g)A(h))
    // read through the gerbe product; its coboundary vanishes.
    let abs: Vec<Scalar> = (0..n).map(|g| gb.absolute(&gb.element(sample.elements[g].clone(), delta(g)).unwrap())).collect();
    rep.set_choices(|g, h| match sample.group.mul(g, h) {
        Some(gh) => {
            let x = gb.element(sample.elements[g].clone(), delta(g)).unwrap();
            let y = gb.element(sample.elements[h].clone(), delta(h)).unwrap();
            gb.absolute(&gb.multiply(&x, &y)) / (&abs[g] * &abs[h]) * &abs[gh] / gb.absolute(&gb.multiply(&x, &y))
        }
        None => q(1),
    });
    let c = rep.extract(&base).unwrap();
    assert!(c.is_trivial());
}

// ---------------------------------------------------------------- window stability

#[test]
fn outputs_are_stable_under_enlargement() {
    let summary = |w: DoubleWindow| {
        let l = l0(&w);
        let a = GL2Element::mixing(&w);
        let al = a.apply(&l);
        let d = det_line_pseudo(&w, &l, &al).unwrap();
        let meet = al.intersect(&l);
        let sl = l.intersect(&cut(&w, 1));
        let o = BigLattice::o_k(&w);
        let big = is_big_lattice(&o_k(&w), &w);
        let sec = is_secondary(&l, &o).unwrap().holds();
        let mut rep = GerbalRep::new(&o, paper_sample(&w, 2)).unwrap().with_random_choices(9);
        let base: Vec<usize> = base_objects(&w).into_iter().map(|s| rep.intern(s).unwrap()).collect();
        let c = rep.extract(&base).unwrap();
        let matches = c.values.iter().all(|(&(x, y, z), v)| Some(v.clone()) == rep.choice_coboundary(x, y, z));
        (
            pseudo_commensurable(&w, &al, &l),
            commensurable(&w, &al, &l),
            meet.dim() - sl.dim(),
            d.stability().unwrap(),
            big,
            sec,
            c.identity.failures.is_empty(),
            matches,
            pseudo_commensurable(&w, &GL2Element::rotation(&w).apply(&l), &l),
        )
    };
    assert_eq!(summary(w2()), summary(w2().enlarge(1)));
    assert_eq!(summary(w3()), summary(w3().enlarge(1)));
}

#[test]
fn shallow_window_reports_the_broken_relation() {
    let w = w2();
    let mut rep = GerbalRep::new(&BigLattice::o_k(&w), paper_sample(&w, 3)).unwrap();
    let base: Vec<usize> = base_objects(&w).into_iter().map(|s| rep.intern(s).unwrap()).collect();
    assert!(matches!(rep.extract(&base), Err(DoubleLoopError::NotIsomorphic { .. })));
}

#[test]
fn plus_elements_preserve_secondary_lattices() {
    for w in [w3(), w3().enlarge(1)] {
        let o = BigLattice::o_k(&w);
        let a = GL2Element::mixing(&w);
        let l = l0(&w);
        let mut x = l.clone();
        for k in 1..=3 {
            x = a.apply(&x);
            assert!(is_secondary(&x, &o).unwrap().holds(), "a^{k}");
            assert!(pseudo_commensurable(&w, &x, &l).is_some(), "a^{k}");
        }
        let m: Vec<(i64, i64)> = (0..w.s().high()).map(|j| (j, [1, 0, 2][j.min(2) as usize])).collect();
        let y = tails(&w, &m);
        assert!(is_secondary(&y, &o).unwrap().holds());
        let g = scale(&w, 1, 0, q(5)).mul(&a);
        assert!(is_secondary(&g.apply(&y), &o).unwrap().holds());
        // the cyclic t-shift wraps the top t-row to the bottom one
        let st = GL2Element::shift_t(&w, 1);
        assert!(!is_secondary(&st.apply(&y), &o).unwrap().holds());
    }
}
