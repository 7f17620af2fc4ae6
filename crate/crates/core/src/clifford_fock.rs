//! Clifford algebras `Cl(V ⊕ V*)` on a window, Fock modules `M_L`, the
//! identification `Hom(M_L, M_L') ≅ det(L|L')`, and the projective action of
//! the central extension on `M_{L0}`.
//!
//! Generators are `φ_n` for `n` in the window and `φ*_m` for `m` in the
//! negated window, with `[φ_n, φ*_m]₊ = δ_{n,−m}`. All modules are realized
//! inside one concrete irreducible module `F = Λ(V)` (`φ_n` acts by
//! `e_n ∧ -`, `φ*_m` by contraction with `e_{−m}`); `M_L` is `F` with the
//! generator `|0⟩_L ↦ ∧(RREF basis of L)`.

use crate::exact_linalg::{Scalar, Subspace};
use crate::gl_tower::{GlError, HatElement, WindowOperator};
use crate::tate_window::{omega, DetLineElement, WLattice, Window, WindowError};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Gl(#[from] GlError),
    #[error("operator does not preserve the window")]
    NotWindowPreserving,
    #[error("vector is not a multiple of the vacuum")]
    NotProportional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    Phi(i64),
    /// `φ*_m`, dual to `φ_{−m}`.
    PhiStar(i64),
}

impl Gen {
    fn key(&self) -> (u8, i64) {
        match *self {
            Gen::Phi(n) => (0, -n),
            Gen::PhiStar(m) => (1, -m),
        }
    }
    fn anticommutator(a: Gen, b: Gen) -> i64 {
        match (a, b) {
            (Gen::Phi(n), Gen::PhiStar(m)) | (Gen::PhiStar(m), Gen::Phi(n)) if n == -m => 1,
            _ => 0,
        }
    }
}

impl PartialOrd for Gen {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Gen {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Phi(n) => write!(f, "φ{}", n),
            Gen::PhiStar(m) => write!(f, "φ*{}", m),
        }
    }
}

/// A combination of normally ordered monomials.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CliffordElement {
    terms: BTreeMap<Vec<Gen>, Scalar>,
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word: Vec<String> = w.iter().map(|g| g.to_string()).collect();
                format!("{}·{}", c, if word.is_empty() { "1".into() } else { word.join(" ") })
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `mono · g` for a normally ordered `mono`, normally ordered.
fn mul_mono_gen(mono: &[Gen], g: Gen) -> Vec<(Vec<Gen>, i64)> {
    match mono.last() {
        None => vec![(vec![g], 1)],
        Some(&last) if last < g => {
            let mut m = mono.to_vec();
            m.push(g);
            vec![(m, 1)]
        }
        Some(&last) if last == g => vec![],
        Some(&last) => {
            let prefix = &mono[..mono.len() - 1];
            // prefix·last·g = −(prefix·g)·last + {last,g}·prefix
            let mut out: Vec<(Vec<Gen>, i64)> = mul_mono_gen(prefix, g)
                .into_iter()
                .map(|(mut m, c)| {
                    m.push(last);
                    (m, -c)
                })
                .collect();
            let ac = Gen::anticommutator(last, g);
            if ac != 0 {
                out.push((prefix.to_vec(), ac));
            }
            out
        }
    }
}

impl CliffordElement {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn scalar(c: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(vec![], c);
        e
    }
    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }
    pub fn gen(g: Gen) -> Self {
        let mut e = Self::zero();
        e.add_term(vec![g], Scalar::one());
        e
    }
    /// The word `g_1 g_2 … g_k`, normally ordered.
    pub fn word(gens: &[Gen]) -> Self {
        gens.iter().fold(Self::one(), |acc, &g| acc.mul(&Self::gen(g)))
    }
    fn add_term(&mut self, w: Vec<Gen>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(w.clone()).or_insert_with(Scalar::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&w);
        }
    }
    pub fn terms(&self) -> &BTreeMap<Vec<Gen>, Scalar> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &other.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }
    pub fn scale(&self, s: &Scalar) -> Self {
        let mut r = Self::zero();
        for (w, c) in &self.terms {
            r.add_term(w.clone(), c * s);
        }
        r
    }
    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut cur: Vec<(Vec<Gen>, Scalar)> = vec![(w1.clone(), c1 * c2)];
                for &g in w2 {
                    let mut next = Vec::new();
                    for (m, c) in cur {
                        for (m2, s) in mul_mono_gen(&m, g) {
                            next.push((m2, &c * Scalar::from_integer(s.into())));
                        }
                    }
                    cur = next;
                }
                for (m, c) in cur {
                    r.add_term(m, c);
                }
            }
        }
        r
    }
}

/// Normal form of an arbitrary (not necessarily ordered) combination of words.
pub fn clifford_normal_form(words: &[(Vec<Gen>, Scalar)]) -> CliffordElement {
    let mut r = CliffordElement::zero();
    for (w, c) in words {
        r = r.add(&CliffordElement::word(w).scale(c));
    }
    r
}

/// A linear generator `φ(v)` or `φ*(ξ)`; `ξ` is given by its values on the
/// window basis `e_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Linear {
    Phi(Vec<Scalar>),
    Star(Vec<Scalar>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliffordAlg {
    window: Window,
}

impl CliffordAlg {
    pub fn new(window: Window) -> Self {
        CliffordAlg { window }
    }
    pub fn window(&self) -> &Window {
        &self.window
    }
    fn n(&self) -> usize {
        self.window.dim()
    }

    pub fn linear(&self, l: &Linear) -> CliffordElement {
        let mut e = CliffordElement::zero();
        match l {
            Linear::Phi(v) => {
                for (i, x) in v.iter().enumerate() {
                    e.add_term(vec![Gen::Phi(self.window.exponent(i))], x.clone());
                }
            }
            Linear::Star(xi) => {
                for (i, x) in xi.iter().enumerate() {
                    e.add_term(vec![Gen::PhiStar(-self.window.exponent(i))], x.clone());
                }
            }
        }
        e
    }

    pub fn product(&self, ls: &[Linear]) -> CliffordElement {
        ls.iter().fold(CliffordElement::one(), |acc, l| acc.mul(&self.linear(l)))
    }

    fn gen_index(&self, g: Gen) -> (bool, usize) {
        match g {
            Gen::Phi(n) => (true, self.window.index(n).expect("generator in window")),
            Gen::PhiStar(m) => (false, self.window.index(-m).expect("generator in dual window")),
        }
    }

    /// Dimension of the concrete module `F`.
    pub fn fock_dim(&self) -> usize {
        1 << self.n()
    }

    fn apply_basis_op(&self, wedge: bool, i: usize, v: &[Scalar], coeff: &Scalar, out: &mut [Scalar]) {
        for (mask, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let has = mask >> i & 1 == 1;
            if has == wedge {
                continue;
            }
            let sign = (mask & ((1 << i) - 1)).count_ones() % 2 == 1;
            let target = mask ^ (1 << i);
            let t = x * coeff;
            if sign {
                out[target] -= t;
            } else {
                out[target] += t;
            }
        }
    }

    pub fn apply_linear(&self, l: &Linear, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); v.len()];
        let (wedge, coeffs) = match l {
            Linear::Phi(c) => (true, c),
            Linear::Star(c) => (false, c),
        };
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                self.apply_basis_op(wedge, i, v, c, &mut out);
            }
        }
        out
    }

    /// `ρ(x)·v` on `F`.
    pub fn apply(&self, x: &CliffordElement, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); v.len()];
        for (w, c) in x.terms() {
            let mut cur = v.to_vec();
            for &g in w.iter().rev() {
                let (wedge, i) = self.gen_index(g);
                let mut next = vec![Scalar::zero(); v.len()];
                self.apply_basis_op(wedge, i, &cur, &Scalar::one(), &mut next);
                cur = next;
            }
            for (o, y) in out.iter_mut().zip(cur) {
                *o += c * y;
            }
        }
        out
    }

    /// `ρ(l_1 ⋯ l_k)·v`.
    pub fn apply_product(&self, ls: &[Linear], v: &[Scalar]) -> Vec<Scalar> {
        ls.iter().rev().fold(v.to_vec(), |acc, l| self.apply_linear(l, &acc))
    }

    /// The vacuum `∧(rows of L)` in `F`.
    pub fn vacuum(&self, l: &Subspace) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.fock_dim()];
        v[0] = Scalar::one();
        let ls: Vec<Linear> = l.rows().iter().map(|r| Linear::Phi(r.clone())).collect();
        self.apply_product(&ls, &v)
    }

    /// The Clifford automorphism induced by `g`: `φ(v) ↦ φ(gv)`,
    /// `φ*(ξ) ↦ φ*(ξ∘g^{-1})`.
    pub fn transform(&self, g: &WindowOperator, l: &Linear) -> Result<Linear, FockError> {
        let (m, minv) = window_matrix(g, &self.window)?;
        Ok(match l {
            Linear::Phi(v) => Linear::Phi(crate::exact_linalg::mat_vec(&m, v)),
            Linear::Star(xi) => {
                let n = xi.len();
                Linear::Star((0..n).map(|j| (0..n).map(|i| &xi[i] * &minv[i][j]).sum()).collect())
            }
        })
    }
}

/// The matrix of a window-preserving operator and its inverse.
fn window_matrix(g: &WindowOperator, w: &Window) -> Result<(Vec<Vec<Scalar>>, Vec<Vec<Scalar>>), FockError> {
    let (lo, hi) = g.tails();
    if g.shift() != 0 || !lo.is_one() || !hi.is_one() || !w.contains_window(g.window()) {
        return Err(FockError::NotWindowPreserving);
    }
    let m = g.embed(w).matrix().clone();
    let minv = crate::exact_linalg::inverse(&m).map_err(|_| FockError::NotWindowPreserving)?;
    Ok((m, minv))
}

fn ratio(v: &[Scalar], base: &[Scalar]) -> Result<Scalar, FockError> {
    let i = base.iter().position(|x| !x.is_zero()).ok_or(FockError::NotProportional)?;
    let s = &v[i] / &base[i];
    if v.iter().zip(base).any(|(a, b)| *a != &s * b) {
        return Err(FockError::NotProportional);
    }
    Ok(s)
}

/// `L^⊥ ⊂ V*` as functionals on the window basis.
pub fn perp(l: &Subspace) -> Subspace {
    let n = l.ambient();
    let piv = l.pivots();
    let mut rows = Vec::new();
    for f in 0..n {
        if piv.contains(&f) {
            continue;
        }
        // ξ = e_f* − Σ_r rows[r][f]·e_{p_r}*
        let mut xi = vec![Scalar::zero(); n];
        xi[f] = Scalar::one();
        for (r, &p) in piv.iter().enumerate() {
            xi[p] = -l.rows()[r][f].clone();
        }
        rows.push(xi);
    }
    Subspace::from_rows(n, &rows).expect("ambient")
}

/// `M_L` with its monomial basis: creators `φ(e_n)` for non-pivot `n`
/// and `φ*(e_p*)` for pivots `p` of `L`, descending index, `φ` before `φ*`.
#[derive(Clone, Debug)]
pub struct FockModule {
    alg: CliffordAlg,
    lattice: WLattice,
    vacuum: Vec<Scalar>,
    creators: Vec<Linear>,
}

impl FockModule {
    pub fn new(alg: CliffordAlg, lattice: WLattice) -> Result<Self, FockError> {
        if lattice.window() != alg.window() {
            return Err(WindowError::Mismatch(*lattice.window(), *alg.window()).into());
        }
        let n = alg.n();
        let piv = lattice.space().pivots().to_vec();
        let mut creators = Vec::new();
        for i in (0..n).rev().filter(|i| !piv.contains(i)) {
            creators.push(Linear::Phi(crate::exact_linalg::unit_vec(n, i)));
        }
        for i in (0..n).rev().filter(|i| piv.contains(i)) {
            creators.push(Linear::Star(crate::exact_linalg::unit_vec(n, i)));
        }
        let vacuum = alg.vacuum(lattice.space());
        Ok(FockModule { alg, lattice, vacuum, creators })
    }
    pub fn alg(&self) -> &CliffordAlg {
        &self.alg
    }
    pub fn lattice(&self) -> &WLattice {
        &self.lattice
    }
    pub fn dim(&self) -> usize {
        1 << self.creators.len()
    }
    pub fn vacuum(&self) -> &[Scalar] {
        &self.vacuum
    }

    /// `φ(L) ∪ φ*(L^⊥)`.
    pub fn annihilators(&self) -> Vec<Linear> {
        let mut a: Vec<Linear> = self.lattice.space().rows().iter().map(|r| Linear::Phi(r.clone())).collect();
        a.extend(perp(self.lattice.space()).rows().iter().map(|r| Linear::Star(r.clone())));
        a
    }

    /// Basis vector for a subset of creators (bit `i` ↔ `creators[i]`),
    /// creators applied in list order.
    pub fn basis_vector(&self, mask: usize) -> Vec<Scalar> {
        let ls: Vec<Linear> = (0..self.creators.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.creators[i].clone()).collect();
        self.alg.apply_product(&ls, &self.vacuum)
    }

    pub fn creators_of(&self, mask: usize) -> Vec<Linear> {
        (0..self.creators.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.creators[i].clone()).collect()
    }

    pub fn basis(&self) -> Vec<Vec<Scalar>> {
        (0..self.dim()).map(|m| self.basis_vector(m)).collect()
    }

    /// Coordinates of a vector of `F` in the monomial basis.
    pub fn coords(&self, v: &[Scalar]) -> Vec<Scalar> {
        crate::exact_linalg::solve_in_basis(&self.basis(), v).expect("monomial basis spans F")
    }

    /// Dimension of the joint kernel of the annihilators.
    pub fn invariants_dim(&self) -> usize {
        let ann = self.annihilators();
        let d = self.alg.fock_dim();
        // kernel of the stacked operator, computed column by column
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for a in &ann {
            let cols: Vec<Vec<Scalar>> = (0..d).map(|j| self.alg.apply_linear(a, &crate::exact_linalg::unit_vec(d, j))).collect();
            for i in 0..d {
                rows.push(cols.iter().map(|c| c[i].clone()).collect());
            }
        }
        d - Subspace::from_rows(d, &rows).expect("width").dim()
    }

    /// Whether every nonzero vector generates the module (spot-checked on
    /// the given vectors).
    pub fn generates(&self, v: &[Scalar]) -> bool {
        let d = self.alg.fock_dim();
        let n = self.alg.n();
        let gens: Vec<Linear> = (0..n)
            .flat_map(|i| [Linear::Phi(crate::exact_linalg::unit_vec(n, i)), Linear::Star(crate::exact_linalg::unit_vec(n, i))])
            .collect();
        let mut span = Subspace::from_rows(d, &[v.to_vec()]).expect("width");
        let mut frontier = vec![v.to_vec()];
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = self.alg.apply_linear(g, &x);
                if !span.contains(&y) {
                    span = span.sum(&Subspace::from_rows(d, &[y.clone()]).unwrap());
                    frontier.push(y);
                }
            }
        }
        span.dim() == d
    }
}

/// A module map `M_from → M_to`, `|0⟩_from ↦ image·|0⟩_to`.
#[derive(Clone, Debug)]
pub struct FockMorphism {
    pub alg: CliffordAlg,
    pub from: WLattice,
    pub to: WLattice,
    pub image: Vec<Linear>,
    pub coeff: Scalar,
}

impl FockMorphism {
    /// The map corresponding to the canonical element of `det(L|L')`:
    /// `φ(q_1)⋯φ(q_a)·φ*(η_b)⋯φ*(η_1)` with `q = ω(L/I)` and `η` dual to
    /// `ω(L'/I)` inside `I^⊥`.
    pub fn canonical(alg: CliffordAlg, from: &WLattice, to: &WLattice) -> Result<Self, FockError> {
        let i = from.intersect(to)?;
        let mut image: Vec<Linear> = omega(from.space(), i.space()).into_iter().map(Linear::Phi).collect();
        let qs = omega(to.space(), i.space());
        let etas = dual_family(i.space(), to.space(), &qs);
        image.extend(etas.into_iter().rev().map(Linear::Star));
        Ok(FockMorphism { alg, from: from.clone(), to: to.clone(), image, coeff: Scalar::one() })
    }

    /// Its scalar as a multiple of the identity of `F`.
    pub fn fock_scalar(&self) -> Result<Scalar, FockError> {
        let v_to = self.alg.vacuum(self.to.space());
        let img = self.alg.apply_product(&self.image, &v_to);
        let v_from = self.alg.vacuum(self.from.space());
        Ok(&self.coeff * ratio(&img, &v_from)?)
    }

    /// The vacuum image in the monomial basis of `M_to`.
    pub fn image_vector(&self) -> Result<Vec<Scalar>, FockError> {
        let m = FockModule::new(self.alg, self.to.clone())?;
        let v = self.alg.apply_product(&self.image, m.vacuum());
        Ok(m.coords(&v).into_iter().map(|x| x * &self.coeff).collect())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &FockMorphism) -> Result<FockMorphism, FockError> {
        if self.to != other.from {
            return Err(WindowError::Endpoint.into());
        }
        let mut image = self.image.clone();
        image.extend(other.image.iter().cloned());
        Ok(FockMorphism { alg: self.alg, from: self.from.clone(), to: other.to.clone(), image, coeff: &self.coeff * &other.coeff })
    }
}

/// Functionals `η_j` vanishing on `i` with `η_j(q_k) = δ_{jk}`, for a
/// family `q` spanning `whole / i`.
fn dual_family(i: &Subspace, whole: &Subspace, qs: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = whole.ambient();
    // Solve on the basis [q; rows(i)] of `whole`, extended by unit vectors.
    let mut basis: Vec<Vec<Scalar>> = qs.to_vec();
    basis.extend(i.rows().iter().cloned());
    let mut span = Subspace::from_rows(n, &basis).unwrap();
    for k in 0..n {
        let e = crate::exact_linalg::unit_vec(n, k);
        if !span.contains(&e) {
            basis.push(e.clone());
            span = span.sum(&Subspace::from_rows(n, &[e]).unwrap());
        }
    }
    // Rows of the inverse of the basis matrix (columns = basis vectors).
    let cols: Vec<Vec<Scalar>> = (0..n).map(|r| basis.iter().map(|b| b[r].clone()).collect()).collect();
    let inv = crate::exact_linalg::inverse(&cols).expect("basis");
    (0..qs.len()).map(|j| inv[j].clone()).collect()
}

/// `Hom(M_L, M_L') ≅ det(L|L')`: the morphism classified by `d`.
pub fn det_to_hom(alg: CliffordAlg, d: &DetLineElement) -> Result<FockMorphism, FockError> {
    let mut f = FockMorphism::canonical(alg, &d.from, &d.to)?;
    f.coeff = d.scalar.clone();
    Ok(f)
}

/// Inverse of [`det_to_hom`].
pub fn hom_to_det(f: &FockMorphism) -> Result<DetLineElement, FockError> {
    let can = FockMorphism::canonical(f.alg, &f.from, &f.to)?;
    let s = f.fock_scalar()? / can.fock_scalar()?;
    Ok(DetLineElement::with_scalar(f.from.clone(), f.to.clone(), s)?)
}

pub fn hom_fock(alg: CliffordAlg, l: &WLattice, lp: &WLattice) -> Result<FockMorphism, FockError> {
    FockMorphism::canonical(alg, l, lp)
}

/// The operator of `(c, g)` on `M_{L0}` in its monomial basis (columns are
/// images of basis vectors): `a|0⟩ ↦ g(a)·X_c|0⟩`, where `X_c` is the vacuum
/// image of the morphism `M_{gL0} → M_{L0}` classified by `c`.
pub fn hat_act(x: &HatElement, module: &FockModule) -> Result<Vec<Vec<Scalar>>, FockError> {
    let alg = module.alg;
    let l0 = module.lattice();
    if x.c.to != *l0 {
        return Err(WindowError::Endpoint.into());
    }
    let xc = det_to_hom(alg, &x.c)?;
    let base = alg.apply_product(&xc.image, module.vacuum());
    let base: Vec<Scalar> = base.into_iter().map(|v| v * &xc.coeff).collect();
    let mut cols = Vec::with_capacity(module.dim());
    for mask in 0..module.dim() {
        let moved: Vec<Linear> =
            module.creators_of(mask).iter().map(|l| alg.transform(&x.g, l)).collect::<Result<_, _>>()?;
        let v = alg.apply_product(&moved, &base);
        cols.push(module.coords(&v));
    }
    // cols[j] is the image of basis j; return as a matrix acting on columns
    let n = cols.len();
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// `Λ(g)` on `F`, an independent description of the twist.
pub fn exterior_power_operator(alg: &CliffordAlg, g: &WindowOperator) -> Result<Vec<Vec<Scalar>>, FockError> {
    let (m, _) = window_matrix(g, alg.window())?;
    let n = alg.n();
    let d = alg.fock_dim();
    let mut cols = Vec::with_capacity(d);
    for mask in 0..d {
        let mut v = vec![Scalar::zero(); d];
        v[0] = Scalar::one();
        let ls: Vec<Linear> =
            (0..n).filter(|i| mask >> i & 1 == 1).map(|i| Linear::Phi(m.iter().map(|r| r[i].clone()).collect())).collect();
        cols.push(alg.apply_product(&ls, &v));
    }
    Ok((0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::q;
    use crate::tate_window::std_lattice;

    #[test]
    fn normal_form_examples() {
        let x = clifford_normal_form(&[(vec![Gen::PhiStar(0), Gen::Phi(0)], q(1))]);
        let want = CliffordElement::word(&[Gen::Phi(0), Gen::PhiStar(0)]).scale(&q(-1)).add(&CliffordElement::one());
        assert_eq!(x, want);
        assert_eq!(x.terms().get(&vec![Gen::Phi(0), Gen::PhiStar(0)]), Some(&q(-1)));
        assert!(CliffordElement::word(&[Gen::Phi(1), Gen::Phi(1)]).is_zero());
        let s = CliffordElement::gen(Gen::Phi(0)).add(&CliffordElement::gen(Gen::PhiStar(0)));
        assert_eq!(s.mul(&s), CliffordElement::one());
    }

    #[test]
    fn fock_examples() {
        let w = Window::new(-2, 2).unwrap();
        let alg = CliffordAlg::new(w);
        let o = std_lattice(&w, 0).unwrap();
        let m = FockModule::new(alg, o).unwrap();
        assert_eq!(m.dim(), 16);
        for g in [Gen::Phi(0), Gen::Phi(1), Gen::PhiStar(1), Gen::PhiStar(2)] {
            let v = alg.apply(&CliffordElement::gen(g), m.vacuum());
            assert!(v.iter().all(|x| x.is_zero()), "{g} should kill the vacuum");
        }
        assert_eq!(m.invariants_dim(), 1);
    }

    #[test]
    fn image_vector_example() {
        let w = Window::new(-1, 2).unwrap();
        let alg = CliffordAlg::new(w);
        let o = std_lattice(&w, 0).unwrap();
        let to = std_lattice(&w, 1).unwrap();
        let f = hom_fock(alg, &o, &to).unwrap();
        assert_eq!(f.image, vec![Linear::Phi(vec![q(0), q(1), q(0)])]);
        let m = FockModule::new(alg, to.clone()).unwrap();
        let expect = m.coords(&alg.apply(&CliffordElement::gen(Gen::Phi(0)), m.vacuum()));
        assert_eq!(f.image_vector().unwrap(), expect);
        let id = hom_fock(alg, &o, &o).unwrap();
        assert_eq!(hom_to_det(&id).unwrap().scalar, q(1));
    }
}
