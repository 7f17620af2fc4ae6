//! The acceptance suite: ten criteria, each a list of named checks plus the
//! observables that the window-stability criterion compares.

use crate::clifford_fock::{hat_act, hom_fock, hom_to_det, CliffordAlg, FockModule};
use crate::double_loop::{
    commensurable, cut, cyclic_pipeline, cyclic_sample, l0, pseudo_commensurable, word_sample, BigLattice, DoubleWindow, GL2Element,
    GerbalRep, Topology,
};
use crate::exact_linalg::{mat_mul, q, Scalar};
use crate::gerbal_core::{
    check_cocycle_identity, check_gerbal_pair, compatible_choice, extract_3cocycle, gerbal_pair_3cocycle, tautological_action,
    two_group_from_gerbal, AutoEquiv, CenterSubgroup, GerbalActionSpec, GerbalPair, GroupSample, LineCategory, PairVerdict, Root, Unit,
    TwoGroup,
};
use crate::gl_tower::{
    canonical_section, degree_in, extension_2cocycle, hat_multiply, identification_composite, random_band, random_finite,
    random_monomial_or_unipotent, random_tilde, tilde_multiply, tilde_to_hat, HatElement, TildeElement, WindowOperator,
};
use crate::group_cohomology::{
    brute_force_invariant_factors, brute_force_is_coboundary, coboundary, cocycles, cohomology, d3_by_filtration, d3_difference_witness,
    find_action_lifting, heisenberg_swap, quaternion_group, Cochain, ComplexOptions, FiniteGroup, GModule,
};
use crate::tate_window::{gamma_compose, kappa, std_lattice, DetLineElement, WLattice, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Booleans and scalars that must not move when windows grow.
    pub observables: Vec<(String, String)>,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        self.elapsed <= self.limit && self.checks.iter().all(|c| c.pass)
    }
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let mut s = format!(
            "{} criterion {:>2}: {} ({:.1}s / {}s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        );
        if !failed.is_empty() {
            s.push_str(&format!(" failing: {}", failed.join(", ")));
        }
        s
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub seed: u64,
    /// Extra steps added to every window (criterion 10 runs with 1).
    pub enlarge: i64,
}

impl Default for Config {
    fn default() -> Self {
        Config { seed: 2026, enlarge: 0 }
    }
}

struct Builder {
    checks: Vec<Check>,
    observables: Vec<(String, String)>,
}

impl Builder {
    fn new() -> Self {
        Builder { checks: Vec::new(), observables: Vec::new() }
    }
    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }
    fn observe(&mut self, key: &str, v: impl ToString) {
        self.observables.push((key.into(), v.to_string()));
    }
    fn finish(self, id: u8, title: &'static str, start: Instant, limit: u64) -> CriterionReport {
        CriterionReport { id, title, checks: self.checks, observables: self.observables, elapsed: start.elapsed(), limit: Duration::from_secs(limit) }
    }
}

fn err(b: &mut Builder, name: &str, e: impl std::fmt::Debug) {
    b.check(name, false, format!("error: {e:?}"));
}

pub fn run(id: u8, cfg: &Config) -> CriterionReport {
    match id {
        1 => degree(cfg),
        2 => central_extension(cfg),
        3 => clifford_det(cfg),
        4 => anomaly(cfg),
        5 => calibration(),
        6 => transgression(),
        7 => round_trip(),
        8 => h3_identities(cfg),
        9 => double_loop(cfg),
        10 => stability(cfg, &[]),
        _ => panic!("no criterion {id}"),
    }
}

pub fn run_all(cfg: &Config) -> Vec<CriterionReport> {
    let mut out: Vec<CriterionReport> = (1..=9).map(|i| run(i, cfg)).collect();
    out.push(stability(cfg, &out));
    out
}

// ---------------------------------------------------------------- 1

fn degree(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let w = Window::new(-4, 4).unwrap().enlarge(cfg.enlarge);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut pairs, mut bad, mut tries) = (0, 0, 0);
    while pairs < 200 && tries < 10_000 {
        tries += 1;
        let g = random_band(&w, 2, &mut rng);
        let h = random_band(&w, 2, &mut rng);
        if let (Ok(x), Ok(y), Ok(z)) = (degree_in(&g, &w), degree_in(&h, &w), degree_in(&g.compose(&h), &w)) {
            pairs += 1;
            bad += usize::from(z != x + y);
        }
    }
    b.check("additive", pairs >= 200 && bad == 0, format!("{pairs} pairs, {bad} violations"));
    let sigma = degree_in(&WindowOperator::shift_power(&w, 1), &w);
    b.check("deg σ = 1", sigma == Ok(1), format!("{sigma:?}"));
    b.observe("additive", bad == 0);
    b.observe("deg σ", format!("{sigma:?}"));
    b.finish(1, "degree homomorphism", start, 5)
}

// ---------------------------------------------------------------- 2

fn central_extension(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let w = Window::new(-4, 4).unwrap().enlarge(cfg.enlarge);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 2);
    let mut assoc = 0;
    for i in 0..100 {
        let xs: Vec<HatElement> = (0..3)
            .map(|k| HatElement::with_scalar(&random_monomial_or_unipotent(&w, &mut rng), &w, q(i % 7 + k + 2)).unwrap())
            .collect();
        let l = hat_multiply(&hat_multiply(&xs[0], &xs[1]).unwrap(), &xs[2]).unwrap();
        let r = hat_multiply(&xs[0], &hat_multiply(&xs[1], &xs[2]).unwrap()).unwrap();
        assoc += usize::from(l.same_element(&r));
    }
    b.check("associative", assoc == 100, format!("{assoc}/100 triples"));
    let mut homs = 0;
    for _ in 0..100 {
        let u = random_tilde(&w, &mut rng);
        let v = random_tilde(&w, &mut rng);
        let ok = match (tilde_multiply(&u, &v), tilde_to_hat(&u, &w), tilde_to_hat(&v, &w)) {
            (Ok(uv), Ok(x), Ok(y)) => match (tilde_to_hat(&uv, &w), hat_multiply(&x, &y)) {
                (Ok(l), Ok(r)) => l.same_element(&r),
                _ => false,
            },
            _ => false,
        };
        homs += usize::from(ok);
    }
    b.check("homomorphism", homs == 100, format!("{homs}/100 pairs"));
    let mut det_ok = 0;
    for _ in 0..50 {
        let a = random_finite(4, &mut rng);
        let d = a.finite_det().unwrap();
        let u = TildeElement::from_finite(a, &w).unwrap();
        let comp = identification_composite(&u, &w).map(|x| x.scalar);
        let cen = tilde_to_hat(&u, &w).ok().and_then(|x| x.central_scalar());
        det_ok += usize::from(comp.as_ref() == Ok(&d) && cen == Some(q(1) / &d));
    }
    b.check("det on GL_f", det_ok == 50, format!("{det_ok}/50: composite = det(a), stored line = det(a)^-1"));
    b.observe("associative", assoc == 100);
    b.observe("homomorphism", homs == 100);
    b.observe("det", det_ok == 50);
    b.finish(2, "central-extension coherence", start, 30)
}

// ---------------------------------------------------------------- 3

fn monomial_lattices(w: Window) -> Vec<WLattice> {
    let n = w.dim();
    (0..1usize << n)
        .map(|mask| {
            let rows: Vec<Vec<Scalar>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| (0..n).map(|j| q(i64::from(i == j))).collect()).collect();
            WLattice::from_rows(w, &rows).unwrap()
        })
        .collect()
}

fn random_lattice(w: Window, rng: &mut ChaCha8Rng) -> WLattice {
    let n = w.dim();
    let k = rng.gen_range(0..=n);
    let rows: Vec<Vec<Scalar>> = (0..k).map(|_| (0..n).map(|_| q(rng.gen_range(-1..=1))).collect()).collect();
    WLattice::from_rows(w, &rows).unwrap()
}

fn fock_gamma_agree(alg: CliffordAlg, x: &WLattice, y: &WLattice, z: &WLattice) -> bool {
    let run = || -> Option<bool> {
        let composite = hom_fock(alg, x, y).ok()?.then(&hom_fock(alg, y, z).ok()?).ok()?;
        let via_fock = hom_to_det(&composite).ok()?;
        let via_gamma = gamma_compose(&DetLineElement::canonical(x.clone(), y.clone()).ok()?, &DetLineElement::canonical(y.clone(), z.clone()).ok()?).ok()?;
        Some(via_fock == via_gamma)
    };
    run().unwrap_or(false)
}

fn clifford_det(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let e = cfg.enlarge;
    // exhaustive monomial triples, exhaustive monomial pairs, random triples
    let (w1, w2, w3) = (Window::new(-1, 1).unwrap().enlarge(e), Window::new(-2, 2).unwrap().enlarge(e), Window::new(-3, 3).unwrap().enlarge(e));
    let mono = monomial_lattices(w1);
    let alg = CliffordAlg::new(w1);
    let mut bad = 0;
    for x in &mono {
        for y in &mono {
            for z in &mono {
                bad += usize::from(!fock_gamma_agree(alg, x, y, z));
            }
        }
    }
    b.check("monomial triples", bad == 0, format!("{} triples in dim {}, {bad} mismatches", mono.len().pow(3), w1.dim()));
    let ok3 = bad == 0;
    let mut ok2 = true;
    for wp in [w2, w3] {
        let mono = monomial_lattices(wp);
        let alg = CliffordAlg::new(wp);
        let mut bad = 0;
        for x in &mono {
            for y in &mono {
                let f = hom_fock(alg, x, y).and_then(|f| f.fock_scalar());
                bad += usize::from(f.ok() != Some(kappa(x.space(), y.space())));
            }
        }
        b.check(&format!("monomial pairs, dim {}", wp.dim()), bad == 0, format!("{} pairs, Fock scalar = absolute det scalar, {bad} mismatches", mono.len().pow(2)));
        ok2 &= bad == 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 3);
    let alg = CliffordAlg::new(w3);
    let trials = if e == 0 { 200 } else { 60 };
    let mut bad = 0;
    for _ in 0..trials {
        let (x, y, z) = (random_lattice(w3, &mut rng), random_lattice(w3, &mut rng), random_lattice(w3, &mut rng));
        bad += usize::from(!fock_gamma_agree(alg, &x, &y, &z));
    }
    b.check("random triples", bad == 0, format!("{trials} triples in dim {}, {bad} mismatches", w3.dim()));
    b.observe("agree", ok3 && ok2 && bad == 0);
    b.finish(3, "Clifford-det agreement", start, 60)
}

// ---------------------------------------------------------------- 4

fn anomaly(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let w = Window::new(-2, 2).unwrap().enlarge(cfg.enlarge);
    let alg = CliffordAlg::new(w);
    let m = FockModule::new(alg, std_lattice(&w, 0).unwrap()).unwrap();
    let sec = canonical_section(w);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 4);
    let pairs = if cfg.enlarge == 0 { 100 } else { 30 };
    let (mut ok, mut nontrivial) = (0, 0);
    for _ in 0..pairs {
        let g = random_monomial_or_unipotent(&w, &mut rng);
        let h = random_monomial_or_unipotent(&w, &mut rng);
        let Ok(c) = extension_2cocycle(&sec, &g, &h) else { continue };
        let act = |x: &WindowOperator| sec(x).and_then(|s| hat_act(&s, &m).ok());
        if let (Some(ug), Some(uh), Some(ugh)) = (act(&g), act(&h), act(&g.compose(&h))) {
            let rhs: Vec<Vec<Scalar>> = ugh.iter().map(|r| r.iter().map(|x| x * &c).collect()).collect();
            ok += usize::from(mat_mul(&ug, &uh) == rhs);
        }
        nontrivial += usize::from(c != q(1));
    }
    b.check("U_g U_h = c(g,h) U_gh", ok == pairs, format!("{ok}/{pairs} pairs"));
    b.check("anomaly exercised", nontrivial > 0, format!("{nontrivial} pairs with c ≠ 1"));
    b.observe("anomaly", ok == pairs);
    b.finish(4, "projective-action anomaly", start, 60)
}

// ---------------------------------------------------------------- 5

fn calibration() -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let full = ComplexOptions { normalized: false, budget: 50_000_000 };
    let (mut cases, mut bad, mut brute) = (0, Vec::new(), 0);
    for n in 1..=6usize {
        for m in 1..=6i64 {
            let g = FiniteGroup::cyclic(n);
            let module = GModule::trivial(&g, m);
            let gcd = num_integer::gcd(n as i64, m);
            let expect = if gcd == 1 { vec![] } else { vec![gcd] };
            for k in 1..=3 {
                cases += 1;
                let a = cohomology(&g, &module, k, ComplexOptions::default()).map(|h| h.invariant_factors);
                let c = cohomology(&g, &module, k, full).map(|h| h.invariant_factors);
                let mut good = a.as_ref() == Ok(&expect) && c.as_ref() == Ok(&expect);
                // enumeration oracle wherever the cochain count allows
                if (m as u128).checked_pow((n as u32).pow(k as u32)).is_some_and(|c| c <= 400_000) {
                    brute += 1;
                    good &= brute_force_invariant_factors(&g, &module, k, 400_000).as_ref() == Ok(&expect);
                }
                if !good {
                    bad.push(format!("H^{k}(Z/{n}, Z/{m})"));
                }
            }
        }
    }
    b.check("H^k(Z/n, μ_m) = Z/gcd", bad.is_empty(), format!("{cases} cases at two budgets, {brute} also enumerated; bad: {bad:?}"));
    b.finish(5, "cohomology solver calibration", start, 120)
}

// ---------------------------------------------------------------- 6

fn transgression() -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let (cext, ext) = heisenberg_swap(2);
    let lifts = match find_action_lifting(&cext, &ext, 1 << 12) {
        Ok(Some(l)) => l,
        other => {
            err(&mut b, "lifting", other);
            return b.finish(6, "transgression oracle equivalence", start, 120);
        }
    };
    let pair = GerbalPair { cext, ext, lifts };
    b.check("gerbal pair", check_gerbal_pair(&pair) == PairVerdict::Valid, format!("{:?}", check_gerbal_pair(&pair)));
    let k = pair.ext.k().clone();
    let m = pair.cext.modulus();
    let run = || -> Result<(bool, bool), String> {
        let e = gerbal_pair_3cocycle(&pair, &pair.standard_tlifts()).map_err(|e| format!("{e:?}"))?;
        let (fil, ind) = d3_by_filtration(&pair.cext, &pair.ext).map_err(|e| format!("{e:?}"))?;
        let cocycle = coboundary(&k, &GModule::trivial(&k, m), &e).is_zero();
        let Some(w) = d3_difference_witness(&k, m, &e, &fil.representative, &ind) else { return Ok((cocycle, false)) };
        // e − d₃ = δy + Σ cᵢ·(indeterminacy)ᵢ, recomputed here
        let mut rhs = coboundary(&k, &GModule::trivial(&k, m), &w.y);
        for (c, x) in w.coefficients.iter().zip(&ind) {
            rhs = rhs.add(&x.scale(*c)).map_err(|e| format!("{e:?}"))?;
        }
        Ok((cocycle, e.sub(&fil.representative).map_err(|e| format!("{e:?}"))? == rhs))
    };
    match run() {
        Ok((cocycle, solved)) => {
            b.check("e is a 3-cocycle", cocycle, "δe = 0 on K");
            b.check("e ~ d3 with explicit witness", solved, "coboundary solved and re-verified");
        }
        Err(e) => err(&mut b, "e ~ d3", e),
    }
    b.finish(6, "transgression oracle equivalence", start, 120)
}

// ---------------------------------------------------------------- 7

fn round_trip() -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    for n in [2usize, 3] {
        let name = format!("n = {n}");
        let g = FiniteGroup::cyclic(n);
        let m = GModule::trivial(&g, n as i64);
        let run = || -> Result<String, String> {
            let h3 = cohomology(&g, &m, 3, ComplexOptions::default()).map_err(|e| format!("{e:?}"))?;
            if h3.invariant_factors != vec![n as i64] {
                return Err(format!("H3 = {:?}", h3.invariant_factors));
            }
            let omega = h3.generators[0].clone();
            let tg = TwoGroup::new(g.clone(), vec![n as i64], vec![vec![vec![1]]; n], |t| omega.get(t).to_vec()).map_err(|e| format!("{e:?}"))?;
            let spec = tautological_action(&tg).map_err(|e| format!("{e:?}"))?;
            let a = extract_3cocycle(&spec).map_err(|e| format!("{e:?}"))?;
            if !check_cocycle_identity(&spec, &a).failures.is_empty() {
                return Err("identity fails".into());
            }
            let back = two_group_from_gerbal(&spec, CenterSubgroup::Diagonal(n as i64)).map_err(|e| format!("{e:?}"))?;
            if h3.class_of(back.associator()) != h3.class_of(&omega) {
                return Err("class differs".into());
            }
            if brute_force_is_coboundary(&g, &m, back.associator(), 1 << 16).map_err(|e| format!("{e:?}"))? {
                return Err("extracted cocycle is a coboundary".into());
            }
            Ok(format!("class {:?}, exhaustive δ-image search finds no preimage", h3.class_of(&omega)))
        };
        match run() {
            Ok(d) => b.check(&name, true, d),
            Err(e) => b.check(&name, false, e),
        }
    }
    b.finish(7, "gerbal round trip", start, 120)
}

// ---------------------------------------------------------------- 8

/// `n` objects in `blocks` blocks, `g` permuting blocks by `block_act` and
/// inside blocks by `inner`, Hom bases twisted by `phi`; strict.
fn strict_action(
    g: &FiniteGroup,
    blocks: usize,
    per: usize,
    block_act: impl Fn(usize, usize) -> usize,
    inner: impl Fn(usize, usize) -> usize,
    phi: &dyn Fn(usize, usize) -> Root,
) -> GerbalActionSpec<Root> {
    let n = blocks * per;
    let labels = (0..n).map(|x| format!("X{x}")).collect();
    let block = (0..n).map(|x| x / per).collect();
    let cat = LineCategory::new(labels, block, |x, y, z| phi(x, y).times(&phi(y, z)).over(&phi(x, z))).unwrap();
    let functors = g
        .elements()
        .map(|h| {
            let map: Vec<usize> = (0..n).map(|x| block_act(h, x / per) * per + inner(h, x % per)).collect();
            let m2 = map.clone();
            AutoEquiv::new(&cat, map, move |x, y| phi(x, y).over(&phi(m2[x], m2[y]))).unwrap()
        })
        .collect();
    GerbalActionSpec::new(cat, GroupSample::from_group(g), functors, |_, _| vec![Root::one(); n]).unwrap()
}

fn phi(seed: u64, n: i64) -> impl Fn(usize, usize) -> Root {
    move |x, y| {
        if x == y {
            Root::one()
        } else {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ ((x as u64) << 20) ^ ((y as u64) << 40));
            Root::new(r.gen_range(0..n), n)
        }
    }
}

fn klein() -> FiniteGroup {
    FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))
}

fn h3_identities(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    // twisted identity and rechoice on strict actions rescaled by random d
    let (mut checked, mut fails, mut shift_bad, mut fixed) = (0, 0, 0, 0);
    for s in 0..6u64 {
        let seed = cfg.seed.wrapping_add(s);
        let p = phi(seed, 12);
        let specs = [
            strict_action(&FiniteGroup::cyclic(4), 2, 2, |h, b| (b + h) % 2, |h, i| (i + h) % 2, &p),
            strict_action(&klein(), 2, 3, |h, b| (b + h / 2) % 2, |h, i| if h % 2 == 1 { (3 - i) % 3 } else { i }, &p),
        ];
        for spec in specs {
            let e = spec.group().identity();
            let d = move |a: usize, c: usize| -> Vec<Root> {
                if a == e || c == e {
                    return vec![Root::one(); 2];
                }
                let mut r = ChaCha8Rng::seed_from_u64(seed ^ ((a as u64) << 16) ^ ((c as u64) << 32));
                (0..2).map(|_| Root::new(r.gen_range(0..4), 4)).collect()
            };
            let re = spec.rescale(d).unwrap();
            let a0 = extract_3cocycle(&spec).unwrap();
            let a1 = extract_3cocycle(&re).unwrap();
            shift_bad += usize::from(a1 != a0.times(&spec.coboundary_of(d)));
            let chk = check_cocycle_identity(&re, &a1);
            checked += chk.checked;
            fails += chk.failures.len();
            if let Ok(Some(f)) = compatible_choice(&re) {
                fixed += usize::from(extract_3cocycle(&f).map(|x| x.is_trivial()).unwrap_or(false));
            }
        }
    }
    // a genuinely non-trivial associator
    for n in [2usize, 3] {
        let g = FiniteGroup::cyclic(n);
        let m = GModule::trivial(&g, n as i64);
        let h3 = cohomology(&g, &m, 3, ComplexOptions::default()).unwrap();
        let omega = h3.generators[0].clone();
        let tg = TwoGroup::new(g.clone(), vec![n as i64], vec![vec![vec![1]]; n], |t| omega.get(t).to_vec()).unwrap();
        let spec = tautological_action(&tg).unwrap();
        let a = extract_3cocycle(&spec).unwrap();
        let chk = check_cocycle_identity(&spec, &a);
        checked += chk.checked;
        fails += chk.failures.len();
    }
    b.check("twisted identity", fails == 0 && checked > 0, format!("{checked} quadruples, {fails} failures"));
    b.check("rechoice shifts by δd", shift_bad == 0, format!("{shift_bad} mismatches over 12 specs"));
    b.check("compatible c exhibited", fixed == 12, format!("{fixed}/12 trivialized"));
    // torsor under 2-cocycles
    let mut torsor_bad = Vec::new();
    let p = phi(7, 6);
    for (g, n) in [(FiniteGroup::cyclic(2), 2i64), (FiniteGroup::cyclic(3), 3), (klein(), 2), (FiniteGroup::cyclic(4), 2), (FiniteGroup::cyclic(4), 4), (klein(), 4)] {
        let spec = strict_action(&g, 1, 2, |_, b| b, |_, i| i, &p);
        let m = GModule::trivial(&g, n);
        let id = g.identity();
        let tuples: Vec<[usize; 2]> = g.elements().flat_map(|a| g.elements().map(move |b| [a, b])).filter(|t| !t.contains(&id)).collect();
        let total = (n as usize).pow(tuples.len() as u32);
        let mut compatible = 0;
        for mut code in 0..total {
            let mut d = Cochain::zero_for(&g, &m, 2);
            for t in &tuples {
                d.set(t, &[(code % n as usize) as i64]);
                code /= n as usize;
            }
            let strict = extract_3cocycle(&spec.rescale(|a, c| vec![Root::new(d.scalar(&[a, c]), n)]).unwrap()).unwrap().is_trivial();
            if strict != coboundary(&g, &m, &d).is_zero() {
                torsor_bad.push(format!("|G|={} n={n}", g.order()));
                break;
            }
            compatible += usize::from(strict);
        }
        if compatible != cocycles(&g, &m, 2, true, 1 << 20).unwrap().len() {
            torsor_bad.push(format!("|G|={} n={n} count", g.order()));
        }
    }
    let z2cubed = FiniteGroup::product(&klein(), &FiniteGroup::cyclic(2));
    for (g, n) in [(FiniteGroup::cyclic(8), 2i64), (FiniteGroup::cyclic(8), 4), (quaternion_group(), 2), (quaternion_group(), 4), (z2cubed, 2)] {
        let spec = strict_action(&g, 1, 2, |_, b| b, |_, i| i, &p);
        let m = GModule::trivial(&g, n);
        let zs = cocycles(&g, &m, 2, true, 1 << 16).unwrap();
        let h2 = cohomology(&g, &m, 2, ComplexOptions::default()).unwrap();
        let b2 = zs.iter().filter(|z| h2.is_coboundary(z)).count();
        let all = zs.iter().all(|z| extract_3cocycle(&spec.rescale(|a, c| vec![Root::new(z.scalar(&[a, c]), n)]).unwrap()).unwrap().is_trivial());
        if zs.len() as u128 != b2 as u128 * h2.order() || !all {
            torsor_bad.push(format!("|G|=8 n={n}"));
        }
    }
    b.check("torsor under Z²", torsor_bad.is_empty(), format!("exhaustive for |G| ≤ 4, cocycle lattice for |G| = 8; bad: {torsor_bad:?}"));
    b.finish(8, "H3 identities", start, 300)
}

// ---------------------------------------------------------------- 9

fn double_loop(cfg: &Config) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let w = DoubleWindow::square(-3, 3).unwrap().enlarge(cfg.enlarge);
    let l = l0(&w);
    let a = GL2Element::mixing(&w);
    let al = a.apply(&l);
    let meet = al.intersect(&l);
    let sl = l.intersect(&cut(&w, 1));
    let extra = meet.dim() as i64 - sl.dim() as i64;
    let top = w.t().high() - 1;
    let at = a.apply(&w.span([(top, 0)]));
    b.check(
        "aL0 ∩ L0 = sL0",
        meet == sl,
        format!("dim {} vs {}: the intersection also holds a·t^{top} (the s-window stops before its t-exponent turns negative)", meet.dim(), sl.dim()),
    );
    let explained = meet == sl.sum(&at);
    let witness = pseudo_commensurable(&w, &al, &l);
    let comm = commensurable(&w, &al, &l);
    b.check("pseudo-commensurable, not commensurable", witness == Some(1) && !comm && explained, format!("witness {witness:?}, commensurable {comm}"));
    b.observe("intersection excess", extra);
    b.observe("excess is a·t^top", explained);
    b.observe("pseudo witness", format!("{witness:?}"));
    b.observe("commensurable", comm);

    let gens = vec![("σs".to_string(), GL2Element::shift_s(&w, 1)), ("σt".to_string(), GL2Element::shift_t(&w, 1)), ("a".to_string(), a.clone())];
    let big = BigLattice::o_k(&w);
    let words = || -> Result<(usize, usize, usize, bool, usize), String> {
        let sample = word_sample(&w, &gens, 3).map_err(|e| format!("{e:?}"))?;
        let mut rep = GerbalRep::new(&big, sample).map_err(|e| format!("{e:?}"))?.with_random_choices(cfg.seed);
        let base: Vec<usize> =
            [l.clone(), al.clone(), l.sum(&w.span([(-1, 0)]))].into_iter().map(|s| rep.intern(s)).collect::<Result<_, _>>().map_err(|e| format!("{e:?}"))?;
        let c = rep.extract(&base).map_err(|e| format!("{e:?}"))?;
        let matches = c.values.iter().all(|(&(x, y, z), v)| Some(v.clone()) == rep.choice_coboundary(x, y, z));
        Ok((rep.sample().len(), c.values.len(), c.identity.checked, c.identity.failures.is_empty() && matches, c.identity.failures.len()))
    };
    match words() {
        Ok((n, triples, quads, ok, fails)) => {
            b.check("F_g F_h ≅ F_gh, identity on word-cap-3 sample", ok && quads > 0, format!("{n} elements, {triples} triples, {quads} quadruples, {fails} failures"));
            b.observe("word sample identity", ok);
        }
        Err(e) => err(&mut b, "F_g F_h ≅ F_gh, identity on word-cap-3 sample", e),
    }

    let cyclic = || -> Result<String, String> {
        let s = cyclic_sample("σs", &GL2Element::shift_s(&w, 1), 64).map_err(|e| format!("{e:?}"))?;
        let mut rep = GerbalRep::new(&big, s).map_err(|e| format!("{e:?}"))?.with_topology(Topology::Cyclic).with_random_choices(cfg.seed);
        let base = vec![l.clone(), l.sum(&w.span([(-1, 0)])), GL2Element::shift_t(&w, 1).apply(&l).intersect(&l)];
        let r = cyclic_pipeline(&mut rep, &base, 400).map_err(|e| format!("{e:?}"))?;
        let good = r.matches_choice_coboundary && r.identity.failures.is_empty() && !r.h3_invariant_factors.is_empty() && r.class_is_zero && r.trivialization.is_some();
        if !good {
            return Err(format!("{:?}", (r.matches_choice_coboundary, r.identity.failures.len(), &r.h3_invariant_factors, r.class_is_zero)));
        }
        Ok(format!("order {}, {} objects, {} blocks, H3 factors {:?}, class zero, trivialization found", r.order, r.objects, r.blocks, r.h3_invariant_factors))
    };
    match cyclic() {
        Ok(d) => {
            b.check("cyclic subgroup class and trivialization", true, d);
            b.observe("cyclic trivialized", true);
        }
        Err(e) => b.check("cyclic subgroup class and trivialization", false, e),
    }
    b.finish(9, "double-loop pipeline", start, 300)
}

/// The check of criterion 9 that cannot hold on a square window.
pub const KNOWN_FAILURE: (u8, &str) = (9, "aL0 ∩ L0 = sL0");

// ---------------------------------------------------------------- 10

/// Reruns the windowed criteria one step larger; `prior` supplies reports
/// already computed at the base size.
fn stability(cfg: &Config, prior: &[CriterionReport]) -> CriterionReport {
    let start = Instant::now();
    let mut b = Builder::new();
    let big = Config { enlarge: cfg.enlarge + 1, ..*cfg };
    for id in [1u8, 2, 3, 4, 9] {
        let x = prior.iter().find(|r| r.id == id).cloned().unwrap_or_else(|| run(id, cfg));
        let y = run(id, &big);
        let same = x.observables == y.observables;
        let moved: Vec<String> = x.observables.iter().zip(&y.observables).filter(|(p, q)| p != q).map(|(p, q)| format!("{}: {} → {}", p.0, p.1, q.1)).collect();
        b.check(&format!("criterion {id}"), same, if same { format!("{} observables", x.observables.len()) } else { moved.join("; ") });
    }
    b.finish(10, "window stability", start, 600)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_lattices_cover_all_coordinate_subspaces() {
        let w = Window::new(-1, 1).unwrap();
        let ls = monomial_lattices(w);
        assert_eq!(ls.len(), 4);
        assert_eq!(ls.iter().map(|l| l.dim()).sum::<usize>(), 4);
    }

    #[test]
    fn report_line_names_failures() {
        let r = CriterionReport {
            id: 3,
            title: "t",
            checks: vec![Check { name: "x".into(), pass: false, detail: String::new() }],
            observables: vec![],
            elapsed: Duration::ZERO,
            limit: Duration::from_secs(1),
        };
        assert!(r.line().starts_with("FAIL criterion  3"));
        assert!(r.line().ends_with("failing: x"));
    }
}
