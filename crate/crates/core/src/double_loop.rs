//! The two-variable model `Q((t))((s))` in a finite double window.
//!
//! A [`DoubleWindow`] keeps the monomials `t^i s^j` with `i` in the t-window
//! and `j` in the s-window, ordered level by level (`j` outer). Subspaces
//! carry no implicit tails. The bottom row `t^tl` of each level stands for
//! arbitrarily negative powers of `t`, and the top row `t^(th-1)` and the
//! top level `s^(sh-1)` stand for the deep tails; compactness, openness and
//! commensurability are read off those boundary coordinates.
//!
//! Operators are invertible window matrices acting on column vectors. The
//! shifts `σ_s`, `σ_t` are realized cyclically (a truncated shift is not
//! invertible). The mixing element `a(t^i) = Σ_j s^j t^(i-j)` is truncated
//! to the window and stays unipotent.
//!
//! Functors between lattice categories are described in the absolute gauge:
//! an object map together with `φ(L)`, where `Λ(L) ↦ φ(L)·Λ(FL)` on RREF
//! wedges and every twisting line is trivialized by its generator. Relative
//! Hom scalars then follow as `κ(L,L')φ(L) / (φ(L')κ(FL,FL'))`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact_linalg::{det, inverse, mat_mul, mat_vec, q, solve_in_basis, zero_vec, LinalgError, Matrix, Scalar, Subspace};
use crate::gerbal_core::{
    compatible_choice, extract_3cocycle, check_cocycle_identity, AutoEquiv, Cocycle3, GerbalActionSpec, GerbalError, GroupSample,
    IdentityCheck, LineCategory, MonoidalPresentation,
};
use crate::group_cohomology::{cohomology, ComplexOptions};
use crate::tate_window::{gamma_scalar, kappa, transport_factor, Window, WindowError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoubleLoopError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Gerbal(#[from] GerbalError),
    #[error("ambient dimension {found} does not match the window ({expected})")]
    Dimension { expected: usize, found: usize },
    #[error("operator is singular")]
    Singular,
    #[error("not a lattice: {0}")]
    NotLattice(String),
    #[error("containment fails: {0}")]
    NotContained(String),
    #[error("the lattices are not pseudo commensurable")]
    NotPseudo,
    #[error("F_g F_h X and F_gh X are not isomorphic (g = {g}, h = {h}, X = {x})")]
    NotIsomorphic { g: usize, h: usize, x: usize },
    #[error("the comparison for ({0},{1},{2}) differs between objects")]
    NotCentral(usize, usize, usize),
    #[error("no transitivity witness: {0}")]
    NoWitness(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid sample: {0}")]
    Sample(String),
}

type Result<T> = std::result::Result<T, DoubleLoopError>;

// ---------------------------------------------------------------- windows

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DoubleWindow {
    t: Window,
    s: Window,
}

impl fmt::Display for DoubleWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{} s{}", self.t, self.s)
    }
}

impl DoubleWindow {
    pub fn new(t: Window, s: Window) -> Self {
        DoubleWindow { t, s }
    }
    /// Both windows equal to `[low, high)`.
    pub fn square(low: i64, high: i64) -> std::result::Result<Self, WindowError> {
        let w = Window::new(low, high)?;
        Ok(DoubleWindow { t: w, s: w })
    }
    pub fn t(&self) -> Window {
        self.t
    }
    pub fn s(&self) -> Window {
        self.s
    }
    pub fn dim(&self) -> usize {
        self.t.dim() * self.s.dim()
    }
    pub fn t_dim(&self) -> usize {
        self.t.dim()
    }
    pub fn levels(&self) -> std::ops::Range<i64> {
        self.s.low()..self.s.high()
    }
    pub fn enlarge(&self, steps: i64) -> Self {
        DoubleWindow { t: self.t.enlarge(steps), s: self.s.enlarge(steps) }
    }
    pub fn index(&self, i: i64, j: i64) -> Option<usize> {
        Some(self.s.index(j)? * self.t.dim() + self.t.index(i)?)
    }
    pub fn exponents(&self, idx: usize) -> (i64, i64) {
        (self.t.exponent(idx % self.t.dim()), self.s.exponent(idx / self.t.dim()))
    }
    pub fn level_of(&self, idx: usize) -> i64 {
        self.s.exponent(idx / self.t.dim())
    }
    /// Span of the monomials `t^i s^j`; those outside the window are dropped.
    pub fn span(&self, monomials: impl IntoIterator<Item = (i64, i64)>) -> Subspace {
        Subspace::span_units(self.dim(), monomials.into_iter().filter_map(|(i, j)| self.index(i, j)))
    }
    pub fn check(&self, s: &Subspace) -> Result<()> {
        if s.ambient() != self.dim() {
            return Err(DoubleLoopError::Dimension { expected: self.dim(), found: s.ambient() });
        }
        Ok(())
    }
    /// `v` with every level `≥ m` set to zero.
    pub fn project_below(&self, v: &[Scalar], m: i64) -> Vec<Scalar> {
        v.iter().enumerate().map(|(k, x)| if self.level_of(k) < m { x.clone() } else { Scalar::zero() }).collect()
    }
    /// Coordinates standing for the infinite directions.
    fn boundary(&self, topology: Topology) -> Vec<bool> {
        let (tl, th, sh) = (self.t.low(), self.t.high(), self.s.high());
        (0..self.dim())
            .map(|k| {
                let (i, j) = self.exponents(k);
                i == tl || i == th - 1 || (topology == Topology::STail && j == sh - 1)
            })
            .collect()
    }
}

/// How the s-direction of the window is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    /// The top level stands for the deep tail `s^(sh-1) O` and beyond.
    STail,
    /// Levels are identified cyclically (`s^sh = s^sl`); only the t-rows
    /// carry infinite directions.
    Cyclic,
}

// ---------------------------------------------------------------- lattices

/// `U ⊗ s^n O`: every level `≥ n`, all t-rows.
pub fn cut(w: &DoubleWindow, n: i64) -> Subspace {
    let (t, lv) = (w.t(), w.levels());
    w.span(lv.filter(|&j| j >= n).flat_map(|j| (t.low()..t.high()).map(move |i| (i, j))))
}

/// `s^j t^m Q[[t]]` at a single level.
pub fn level_tail(w: &DoubleWindow, j: i64, m: i64) -> Subspace {
    w.span((m.max(w.t().low())..w.t().high()).map(|i| (i, j)))
}

/// `O_K = Q((t))[[s]]`.
pub fn o_k(w: &DoubleWindow) -> Subspace {
    cut(w, 0)
}

/// `Q[[t]]((s))`, the subspace `U ⊗ P` used for the preferred anchors.
pub fn p_part(w: &DoubleWindow) -> Subspace {
    let t = w.t();
    w.span(w.levels().flat_map(|j| (0..t.high()).map(move |i| (i, j))))
}

/// `Σ_j s^j t^(m_j) Q[[t]]` over the listed `(j, m_j)`.
pub fn tails(w: &DoubleWindow, parts: &[(i64, i64)]) -> Subspace {
    parts.iter().fold(Subspace::zero(w.dim()), |acc, &(j, m)| acc.sum(&level_tail(w, j, m)))
}

/// `L₀ = Q[[t]][[s]]`.
pub fn l0(w: &DoubleWindow) -> Subspace {
    let parts: Vec<(i64, i64)> = w.levels().filter(|&j| j >= 0).map(|j| (j, 0)).collect();
    tails(w, &parts)
}

/// `s^n O_K ⊕ ⊕_i s^i t^(m_i) Q[[t]]`.
pub fn example_lattice(w: &DoubleWindow, n: i64, parts: &[(i64, i64)]) -> Subspace {
    cut(w, n).sum(&tails(w, parts))
}

/// Sandwich witnesses `(a, b)`: `U⊗s^a O ⊆ S ⊆ U⊗s^b O` with `a` smallest
/// and `b` largest. The deep tail must be present: level `sh-1` full.
pub fn is_big_lattice(s: &Subspace, w: &DoubleWindow) -> Option<(i64, i64)> {
    if s.ambient() != w.dim() {
        return None;
    }
    let a = w.levels().find(|&n| cut(w, n).is_subspace_of(s))?;
    let b = w.levels().rev().find(|&n| s.is_subspace_of(&cut(w, n)))?;
    Some((a, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigLattice {
    window: DoubleWindow,
    space: Subspace,
    a: i64,
    b: i64,
}

impl BigLattice {
    pub fn new(w: &DoubleWindow, space: Subspace) -> Result<Self> {
        w.check(&space)?;
        let (a, b) = is_big_lattice(&space, w).ok_or_else(|| DoubleLoopError::NotLattice("no s-tail sandwich".into()))?;
        Ok(BigLattice { window: *w, space, a, b })
    }
    pub fn o_k(w: &DoubleWindow) -> Self {
        Self::new(w, o_k(w)).expect("O_K is a lattice")
    }
    pub fn window(&self) -> &DoubleWindow {
        &self.window
    }
    pub fn space(&self) -> &Subspace {
        &self.space
    }
    pub fn sandwich(&self) -> (i64, i64) {
        (self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelReport {
    pub level: i64,
    /// No component along `t^tl`.
    pub compact: bool,
    /// Contains the `t^(th-1)` row of the ambient lattice.
    pub open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondaryReport {
    pub levels: Vec<LevelReport>,
}

impl SecondaryReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|l| l.compact && l.open)
    }
}

/// Per-level sandwich test for `L ⊆ 𝕃`, on the levels where `𝕃` lives.
pub fn is_secondary(l: &Subspace, big: &BigLattice) -> Result<SecondaryReport> {
    let w = big.window;
    w.check(l)?;
    if !l.is_subspace_of(&big.space) {
        return Err(DoubleLoopError::NotContained("L ⊄ 𝕃".into()));
    }
    let (tl, th) = (w.t().low(), w.t().high());
    let levels = (big.b..w.s().high())
        .map(|j| {
            let bottom = w.index(tl, j).unwrap();
            let top = w.span([(th - 1, j)]);
            // openness is read in 𝕃 / (levels > j)
            let deeper = big.space.intersect(&cut(&w, j + 1));
            LevelReport {
                level: j,
                compact: l.rows().iter().all(|r| r[bottom].is_zero()),
                open: big.space.intersect(&top).is_subspace_of(&l.sum(&deeper)),
            }
        })
        .collect();
    Ok(SecondaryReport { levels })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecLattice {
    big: BigLattice,
    space: Subspace,
}

impl SecLattice {
    pub fn new(big: &BigLattice, space: Subspace) -> Result<Self> {
        let rep = is_secondary(&space, big)?;
        if let Some(bad) = rep.levels.iter().find(|l| !(l.compact && l.open)) {
            return Err(DoubleLoopError::NotLattice(format!("not a secondary lattice at level {}", bad.level)));
        }
        Ok(SecLattice { big: big.clone(), space })
    }
    pub fn big(&self) -> &BigLattice {
        &self.big
    }
    pub fn space(&self) -> &Subspace {
        &self.space
    }
}

/// `L` and `L'` differ by a finite-dimensional amount: they agree modulo the
/// span of the interior (non-boundary) coordinates.
pub fn commensurable(w: &DoubleWindow, l: &Subspace, lp: &Subspace) -> bool {
    commensurable_in(w, Topology::STail, l, lp)
}

pub fn commensurable_in(w: &DoubleWindow, topology: Topology, l: &Subspace, lp: &Subspace) -> bool {
    let b = w.boundary(topology);
    let interior = Subspace::span_units(w.dim(), (0..w.dim()).filter(|&k| !b[k]));
    l.sum(&interior) == lp.sum(&interior)
}

/// Smallest `n` with `L ∩ s^n O = L' ∩ s^n O`.
pub fn pseudo_commensurable(w: &DoubleWindow, l: &Subspace, lp: &Subspace) -> Option<i64> {
    w.levels().find(|&n| {
        let c = cut(w, n);
        l.intersect(&c) == lp.intersect(&c)
    })
}

/// Smallest `n` with `L ∩ s^n O` and `L' ∩ s^n O` commensurable: the Hom
/// relation of `Ĉ^ss`.
pub fn pseudo_related(w: &DoubleWindow, l: &Subspace, lp: &Subspace) -> Option<i64> {
    pseudo_related_in(w, Topology::STail, l, lp)
}

pub fn pseudo_related_in(w: &DoubleWindow, topology: Topology, l: &Subspace, lp: &Subspace) -> Option<i64> {
    w.levels().find(|&n| {
        let c = cut(w, n);
        commensurable_in(w, topology, &l.intersect(&c), &lp.intersect(&c))
    })
}

/// `L / (L ∩ s^m O)`, realized as the projection of `L` onto levels `< m`.
pub fn truncate_below(w: &DoubleWindow, l: &Subspace, m: i64) -> Subspace {
    let rows: Vec<Vec<Scalar>> = l.rows().iter().map(|r| w.project_below(r, m)).collect();
    Subspace::from_rows(w.dim(), &rows).expect("ambient")
}

/// Exact-sequence splitting for `π_{<m}` on `A = π_{<top}(L)`:
/// `[lifts of RREF π_{<m}A] ∧ RREF(A ∩ s^m O) = D · Λ(A)`.
fn level_split(w: &DoubleWindow, l: &Subspace, m: i64, top: i64) -> Scalar {
    let a = truncate_below(w, l, top);
    let low = truncate_below(w, &a, m);
    let kernel = a.intersect(&cut(w, m));
    let images: Vec<Vec<Scalar>> = a.rows().iter().map(|r| w.project_below(r, m)).collect();
    let mut fam = lifts(&images, a.rows(), low.rows());
    fam.extend(kernel.rows().iter().cloned());
    family_det(&a, &fam)
}

/// For each target, a combination of `sources` whose `images` hit it.
fn lifts(images: &[Vec<Scalar>], sources: &[Vec<Scalar>], targets: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = sources.first().map_or(0, Vec::len);
    let mut keep: Vec<usize> = Vec::new();
    let mut acc = Subspace::zero(images.first().map_or(0, Vec::len));
    for (k, v) in images.iter().enumerate() {
        if !acc.contains(v) {
            acc = acc.sum(&Subspace::from_rows(v.len(), &[v.clone()]).expect("ambient"));
            keep.push(k);
        }
    }
    let basis: Vec<Vec<Scalar>> = keep.iter().map(|&k| images[k].clone()).collect();
    targets
        .iter()
        .map(|t| {
            let c = solve_in_basis(&basis, t).expect("target lies in the image");
            let mut v = zero_vec(n);
            for (ci, &k) in c.iter().zip(&keep) {
                for (x, y) in v.iter_mut().zip(&sources[k]) {
                    *x += ci * y;
                }
            }
            v
        })
        .collect()
}

/// `Λ(family) = D · Λ(RREF s)`; zero if the family is not a basis.
fn family_det(s: &Subspace, fam: &[Vec<Scalar>]) -> Scalar {
    if fam.len() != s.dim() {
        return Scalar::zero();
    }
    let mut m = Vec::with_capacity(fam.len());
    for v in fam {
        match s.coords(v) {
            Some(c) => m.push(c),
            None => return Scalar::zero(),
        }
    }
    if m.is_empty() {
        return Scalar::one();
    }
    det(&m)
}

/// An element of `det(L|L') = lim_m det(L/(L∩s^m O) | L'/(L'∩s^m O))`,
/// stored by its relative scalar at the stable level `sh` (the whole
/// window).
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoDetLine {
    window: DoubleWindow,
    from: Subspace,
    to: Subspace,
    witness: i64,
    pub scalar: Scalar,
}

impl PseudoDetLine {
    pub fn canonical(w: &DoubleWindow, from: Subspace, to: Subspace) -> Result<Self> {
        Self::with_scalar(w, from, to, Scalar::one())
    }
    pub fn with_scalar(w: &DoubleWindow, from: Subspace, to: Subspace, scalar: Scalar) -> Result<Self> {
        w.check(&from)?;
        w.check(&to)?;
        if scalar.is_zero() {
            return Err(WindowError::ZeroScalar.into());
        }
        let witness = pseudo_commensurable(w, &from, &to).ok_or(DoubleLoopError::NotPseudo)?;
        Ok(PseudoDetLine { window: *w, from, to, witness, scalar })
    }
    pub fn from(&self) -> &Subspace {
        &self.from
    }
    pub fn to(&self) -> &Subspace {
        &self.to
    }
    pub fn witness(&self) -> i64 {
        self.witness
    }

    /// Factor taking relative scalars at level `top` to level `m`, for
    /// `witness ≤ m ≤ top ≤ sh`.
    pub fn level_factor(&self, m: i64, top: i64) -> Result<Scalar> {
        let w = &self.window;
        if m < self.witness || top > w.s().high() || m > top {
            return Err(DoubleLoopError::NotPseudo);
        }
        let (a, ap) = (truncate_below(w, &self.from, top), truncate_below(w, &self.to, top));
        let (b, bp) = (truncate_below(w, &self.from, m), truncate_below(w, &self.to, m));
        let (d, dp) = (level_split(w, &self.from, m, top), level_split(w, &self.to, m, top));
        if d.is_zero() || dp.is_zero() {
            return Err(WindowError::Basis.into());
        }
        // Λ(A) = D⁻¹·lift(Λ B) ∧ Λ(K) and the kernel K is shared.
        Ok(kappa(&a, &ap) * dp / (d * kappa(&b, &bp)))
    }

    /// From level `m + 1` down to `m`.
    pub fn transition(&self, m: i64) -> Result<Scalar> {
        self.level_factor(m, m + 1)
    }

    /// Relative scalar of this element in the level-`m` line.
    pub fn at_level(&self, m: i64) -> Result<Scalar> {
        Ok(&self.scalar * self.level_factor(m, self.window.s().high())?)
    }

    /// The element read at the witness level and at the next one.
    pub fn stability(&self) -> Result<(Scalar, Scalar)> {
        let n = self.witness;
        let next = (n + 1).min(self.window.s().high());
        Ok((self.at_level(n)?, self.at_level(next)?))
    }
}

pub fn det_line_pseudo(w: &DoubleWindow, l: &Subspace, lp: &Subspace) -> Result<PseudoDetLine> {
    PseudoDetLine::canonical(w, l.clone(), lp.clone())
}

/// `γ(d1 ⊗ d2)` for `d1 ∈ det(L|L')`, `d2 ∈ det(L'|L'')`.
pub fn gamma_pseudo(d1: &PseudoDetLine, d2: &PseudoDetLine) -> Result<PseudoDetLine> {
    if d1.to != d2.from || d1.window != d2.window {
        return Err(WindowError::Endpoint.into());
    }
    let s = gamma_scalar(&d1.from, &d1.to, &d2.to, &d1.scalar, &d2.scalar);
    PseudoDetLine::with_scalar(&d1.window, d1.from.clone(), d2.to.clone(), s)
}

// ---------------------------------------------------------------- operators

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gl2Class {
    /// Identity on some `s^n O` inside the window.
    Finite,
    /// Preserves `O_K`.
    Plus,
    Full,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GL2Element {
    window: DoubleWindow,
    matrix: Matrix,
    inverse: Matrix,
}

impl fmt::Debug for GL2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GL2Element({}, {:?})", self.window, self.class())
    }
}

impl GL2Element {
    pub fn new(w: &DoubleWindow, matrix: Matrix) -> Result<Self> {
        let n = w.dim();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(DoubleLoopError::Dimension { expected: n, found: matrix.len() });
        }
        let inv = inverse(&matrix).map_err(|_| DoubleLoopError::Singular)?;
        Ok(GL2Element { window: *w, matrix, inverse: inv })
    }

    /// Column `(i, j)` is `image(i, j)`, a list of monomials with coefficients.
    fn from_images(w: &DoubleWindow, image: impl Fn(i64, i64) -> Vec<(i64, i64, Scalar)>) -> Result<Self> {
        let n = w.dim();
        let mut m = vec![zero_vec(n); n];
        for col in 0..n {
            let (i, j) = w.exponents(col);
            for (ii, jj, c) in image(i, j) {
                if let Some(row) = w.index(ii, jj) {
                    m[row][col] += c;
                }
            }
        }
        Self::new(w, m)
    }

    pub fn identity(w: &DoubleWindow) -> Self {
        Self::from_images(w, |i, j| vec![(i, j, q(1))]).expect("identity")
    }

    /// `t^i s^j ↦ t^i s^(j+k)`, levels taken cyclically.
    pub fn shift_s(w: &DoubleWindow, k: i64) -> Self {
        let s = w.s();
        let d = s.dim() as i64;
        Self::from_images(w, |i, j| vec![(i, s.low() + (j - s.low() + k).rem_euclid(d), q(1))]).expect("permutation")
    }

    /// `t^i s^j ↦ t^(i+k) s^j`, t-rows taken cyclically.
    pub fn shift_t(w: &DoubleWindow, k: i64) -> Self {
        let t = w.t();
        let d = t.dim() as i64;
        Self::from_images(w, |i, j| vec![(t.low() + (i - t.low() + k).rem_euclid(d), j, q(1))]).expect("permutation")
    }

    /// `a(t^i) = Σ_{j ≥ 0} s^j t^(i-j)` on level 0, identity elsewhere.
    pub fn mixing(w: &DoubleWindow) -> Self {
        let sh = w.s().high();
        Self::from_images(w, |i, j| if j == 0 { (0..sh).map(|k| (i - k, k, q(1))).collect() } else { vec![(i, j, q(1))] })
            .expect("unipotent")
    }

    /// `t^i s^j ↦ t^i s^j + t^(i-1) s^(j+1)`, levels taken cyclically:
    /// unipotent, and it mixes every level into the next.
    pub fn rotation(w: &DoubleWindow) -> Self {
        let s = w.s();
        let d = s.dim() as i64;
        Self::from_images(w, |i, j| vec![(i, j, q(1)), (i - 1, s.low() + (j - s.low() + 1).rem_euclid(d), q(1))]).expect("unipotent")
    }

    pub fn window(&self) -> &DoubleWindow {
        &self.window
    }
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
    pub fn mul(&self, o: &GL2Element) -> GL2Element {
        GL2Element { window: self.window, matrix: mat_mul(&self.matrix, &o.matrix), inverse: mat_mul(&o.inverse, &self.inverse) }
    }
    pub fn inv(&self) -> GL2Element {
        GL2Element { window: self.window, matrix: self.inverse.clone(), inverse: self.matrix.clone() }
    }
    pub fn apply_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        mat_vec(&self.matrix, v)
    }
    pub fn apply(&self, s: &Subspace) -> Subspace {
        s.image(&self.matrix)
    }
    /// `g·Λ(RREF S) = τ · Λ(RREF gS)`.
    pub fn tau(&self, s: &Subspace) -> Scalar {
        let gs = self.apply(s);
        let imgs: Vec<Vec<Scalar>> = s.rows().iter().map(|r| self.apply_vec(r)).collect();
        family_det(&gs, &imgs)
    }
    /// Smallest `n` such that `g` fixes `s^n O` pointwise.
    pub fn finite_level(&self) -> Option<i64> {
        let w = &self.window;
        let fixed = |col: usize| (0..w.dim()).all(|r| self.matrix[r][col] == if r == col { q(1) } else { q(0) });
        w.levels().find(|&n| (0..w.dim()).filter(|&c| w.level_of(c) >= n).all(fixed))
    }
    pub fn is_plus(&self) -> bool {
        let o = o_k(&self.window);
        self.apply(&o) == o
    }
    pub fn class(&self) -> Gl2Class {
        if self.finite_level().is_some() {
            Gl2Class::Finite
        } else if self.is_plus() {
            Gl2Class::Plus
        } else {
            Gl2Class::Full
        }
    }
}

/// A `g` with `g·O_K = 𝕃`, block by block. Only lattices spanned by
/// monomials with `dim 𝕃 = dim O_K` inside the window are reachable by an
/// invertible window operator.
pub fn transitivity_witness(big: &BigLattice) -> Result<GL2Element> {
    let w = big.window;
    let l = &big.space;
    let o = o_k(&w);
    let monomial = l.rows().iter().all(|r| r.iter().filter(|x| !x.is_zero()).count() == 1);
    if !monomial {
        return Err(DoubleLoopError::NoWitness("the lattice is not spanned by monomials".into()));
    }
    if l.dim() != o.dim() {
        return Err(DoubleLoopError::NoWitness(format!(
            "dim 𝕃 = {} but dim O_K = {} inside the window; an invertible window operator preserves dimension",
            l.dim(),
            o.dim()
        )));
    }
    let inside = |s: &Subspace| -> (Vec<usize>, Vec<usize>) {
        let p = s.pivots();
        (0..w.dim()).partition(|k| p.contains(k))
    };
    let (src_in, src_out) = inside(&o);
    let (dst_in, dst_out) = inside(l);
    let n = w.dim();
    let mut m = vec![zero_vec(n); n];
    for (s, d) in src_in.iter().zip(&dst_in).chain(src_out.iter().zip(&dst_out)) {
        m[*d][*s] = q(1);
    }
    let g = GL2Element::new(&w, m)?;
    debug_assert!(g.apply(&o) == *l);
    Ok(g)
}

// ---------------------------------------------------------------- functors

/// `κ(x,y)φ(x) / (φ(y)κ(Fx,Fy))`: the relative Hom scalar of a functor in
/// the absolute gauge.
pub fn gauge_hom_scalar(x: &Subspace, y: &Subspace, fx: &Subspace, fy: &Subspace, phi_x: &Scalar, phi_y: &Scalar) -> Scalar {
    kappa(x, y) * phi_x / (phi_y * kappa(fx, fy))
}

/// Composition scalar of `C^ss`: `b_{xy} ∘ b_{yz} = comp · b_{xz}`.
pub fn comp_scalar(x: &Subspace, y: &Subspace, z: &Subspace) -> Scalar {
    gamma_scalar(x, y, z, &Scalar::one(), &Scalar::one())
}

/// `T_g`: `M_L ↦ M_{gL}`.
#[derive(Clone, Debug)]
pub struct Transport {
    pub g: GL2Element,
}

impl Transport {
    pub fn map(&self, l: &Subspace) -> (Subspace, Scalar) {
        (self.g.apply(l), self.g.tau(l))
    }
    /// The Hom scalar through the `tate_window` transport of det lines.
    pub fn hom_scalar(&self, l: &Subspace, lp: &Subspace) -> Scalar {
        let (gl, glp) = (self.g.apply(l), self.g.apply(lp));
        transport_factor(l, lp, &gl, &glp, |v| self.g.apply_vec(v))
    }
}

/// `Ξ_{𝕃,𝕃'}` for `𝕃 ⊇ 𝕃'`: `M_L ↦ M_{L∩𝕃'} ⊗ Δ(L/(L∩𝕃'))^{-1}`, the
/// determinantal theory `Δ` on `𝕃/𝕃'` anchored at a subspace `A` of the
/// quotient (coordinates against `ω(𝕃/𝕃')`).
#[derive(Clone, Debug)]
pub struct Xi {
    window: DoubleWindow,
    big: Subspace,
    sub: Subspace,
    q: Vec<Vec<Scalar>>,
    basis: Vec<Vec<Scalar>>,
    anchor: Subspace,
}

impl Xi {
    /// Anchored at the preferred `V = (𝕃 ∩ U⊗P) / (𝕃' ∩ U⊗P)`.
    pub fn new(w: &DoubleWindow, big: &Subspace, sub: &Subspace) -> Result<Self> {
        let mut xi = Self::with_anchor(w, big, sub, None)?;
        xi.anchor = xi.image(&big.intersect(&p_part(w)));
        Ok(xi)
    }

    pub fn with_anchor(w: &DoubleWindow, big: &Subspace, sub: &Subspace, anchor: Option<Subspace>) -> Result<Self> {
        w.check(big)?;
        w.check(sub)?;
        if !sub.is_subspace_of(big) {
            return Err(DoubleLoopError::NotContained("𝕃' ⊄ 𝕃".into()));
        }
        let q = big.quotient_basis(sub);
        let mut basis = q.clone();
        basis.extend(sub.rows().iter().cloned());
        let r = q.len();
        let anchor = match anchor {
            Some(a) if a.ambient() != r => return Err(DoubleLoopError::Dimension { expected: r, found: a.ambient() }),
            Some(a) => a,
            None => Subspace::zero(r),
        };
        Ok(Xi { window: *w, big: big.clone(), sub: sub.clone(), q, basis, anchor })
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }
    pub fn big(&self) -> &Subspace {
        &self.big
    }
    pub fn sub(&self) -> &Subspace {
        &self.sub
    }
    pub fn anchor(&self) -> &Subspace {
        &self.anchor
    }
    /// Coordinates of the class of `v ∈ 𝕃` in `𝕃/𝕃'`.
    pub fn class(&self, v: &[Scalar]) -> Vec<Scalar> {
        let c = solve_in_basis(&self.basis, v).expect("vector lies in 𝕃");
        c[..self.rank()].to_vec()
    }
    pub fn lift(&self, c: &[Scalar]) -> Vec<Scalar> {
        let mut v = zero_vec(self.window.dim());
        for (ci, qv) in c.iter().zip(&self.q) {
            for (x, y) in v.iter_mut().zip(qv) {
                *x += ci * y;
            }
        }
        v
    }
    /// `π(L) ⊆ 𝕃/𝕃'`.
    pub fn image(&self, l: &Subspace) -> Subspace {
        let rows: Vec<Vec<Scalar>> = l.rows().iter().map(|r| self.class(r)).collect();
        Subspace::from_rows(self.rank(), &rows).expect("ambient")
    }
    /// Lifts into `L` of the RREF basis of `π(L)`.
    fn lifts_into(&self, l: &Subspace) -> Vec<Vec<Scalar>> {
        let images: Vec<Vec<Scalar>> = l.rows().iter().map(|r| self.class(r)).collect();
        lifts(&images, l.rows(), self.image(l).rows())
    }
    /// `[lifts of RREF π(L)] ∧ RREF(L∩𝕃') = D · Λ(L)`.
    pub fn split(&self, l: &Subspace) -> Scalar {
        let mut fam = self.lifts_into(l);
        fam.extend(l.intersect(&self.sub).rows().iter().cloned());
        family_det(l, &fam)
    }
    /// Object and `φ` of `Ξ(M_L)`.
    pub fn map(&self, l: &Subspace) -> Result<(Subspace, Scalar)> {
        if !l.is_subspace_of(&self.big) {
            return Err(DoubleLoopError::NotContained("L ⊄ 𝕃".into()));
        }
        Ok((l.intersect(&self.sub), Scalar::one() / self.split(l)))
    }
    /// `lift(A) ⊆ 𝕃`, meeting `𝕃'` in zero.
    pub fn lifted_anchor(&self) -> Subspace {
        let rows: Vec<Vec<Scalar>> = self.anchor.rows().iter().map(|c| self.lift(c)).collect();
        Subspace::from_rows(self.window.dim(), &rows).expect("ambient")
    }
    /// Quasi-inverse on objects: `Y ↦ Y ⊕ lift(A)`, whose twisting line is
    /// `Δ(A) = det(A|A)`.
    pub fn unmap(&self, y: &Subspace) -> Result<(Subspace, Scalar)> {
        if !y.is_subspace_of(&self.sub) {
            return Err(DoubleLoopError::NotContained("Y ⊄ 𝕃'".into()));
        }
        let z = y.sum(&self.lifted_anchor());
        let d = self.split(&z);
        Ok((z, d))
    }
}

/// `Ξ_{g𝕃, g𝕃'} ∘ T_g` against `T_g ∘ Ξ_{𝕃,𝕃'}`, object by object.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivarianceReport {
    pub checked: usize,
    pub mismatches: Vec<usize>,
    /// `ḡ·Λ(A) = torsor · Λ(ḡA)`, the scalar carried by `gΔ ≅ Δ'`.
    pub torsor: Scalar,
    /// Whether `ḡA` is the preferred anchor of `g𝕃/g𝕃'`.
    pub anchors_match: bool,
}

pub fn xi_equivariance(w: &DoubleWindow, g: &GL2Element, big: &Subspace, sub: &Subspace, objects: &[Subspace]) -> Result<EquivarianceReport> {
    let xi = Xi::new(w, big, sub)?;
    let xi_g = Xi::new(w, &g.apply(big), &g.apply(sub))?;
    // ḡ in quotient coordinates: column k is the class of g·q_k.
    let gbar: Matrix = {
        let cols: Vec<Vec<Scalar>> = xi.q.iter().map(|v| xi_g.class(&g.apply_vec(v))).collect();
        let r = xi.rank();
        (0..r).map(|i| (0..r).map(|k| cols[k][i].clone()).collect()).collect()
    };
    let tau_bar = |s: &Subspace| -> (Subspace, Scalar) {
        if s.ambient() == 0 {
            return (s.clone(), Scalar::one());
        }
        let img = s.image(&gbar);
        let vs: Vec<Vec<Scalar>> = s.rows().iter().map(|r| mat_vec(&gbar, r)).collect();
        let d = family_det(&img, &vs);
        (img, d)
    };
    let mut out = EquivarianceReport { checked: 0, mismatches: Vec::new(), torsor: Scalar::one(), anchors_match: true };
    for (k, l) in objects.iter().enumerate() {
        let (_, phi0) = xi.map(l)?;
        let x = l.intersect(sub);
        let (_, tb) = tau_bar(&xi.image(l));
        let path2 = phi0 * g.tau(&x) * tb;
        let gl = g.apply(l);
        let (_, phi1) = xi_g.map(&gl)?;
        let path1 = g.tau(l) * phi1;
        out.checked += 1;
        if path1 != path2 {
            out.mismatches.push(k);
        }
    }
    let (ga, t) = tau_bar(xi.anchor());
    out.torsor = t;
    out.anchors_match = ga == *xi_g.anchor();
    Ok(out)
}

/// `Ξ_{𝕃',𝕃''} ∘ Ξ_{𝕃,𝕃'}` against `Ξ_{𝕃,𝕃''}` through the exact sequence
/// `0 → 𝕃'/𝕃'' → 𝕃/𝕃'' → 𝕃/𝕃' → 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionReport {
    pub checked: usize,
    pub mismatches: Vec<usize>,
    /// The anchors satisfy the exact-sequence condition.
    pub anchors_exact: bool,
    /// `Λ(A) ⊗ Λ(A') ↦ ν_A · Λ(A'')`: the chosen `Δ ⊗ Δ' ≅ Δ''`.
    pub nu_anchor: Scalar,
}

pub fn xi_composition(w: &DoubleWindow, l1: &Subspace, l2: &Subspace, l3: &Subspace, objects: &[Subspace]) -> Result<CompositionReport> {
    let x12 = Xi::new(w, l1, l2)?;
    let x23 = Xi::new(w, l2, l3)?;
    let x13 = Xi::new(w, l1, l3)?;
    // ν: [lift of RREF π12 S] ++ [ι RREF π23 (S∩l2)] against RREF π13 S, all
    // read in l1/l3 coordinates.
    let nu = |s: &Subspace| -> Scalar {
        let x = s.intersect(l2);
        let mut fam: Vec<Vec<Scalar>> = x12.lifts_into(s).iter().map(|v| x13.class(v)).collect();
        fam.extend(x23.lifts_into(&x).iter().map(|v| x13.class(v)));
        if fam.is_empty() {
            return Scalar::one();
        }
        family_det(&x13.image(s), &fam)
    };
    let mut out = CompositionReport { checked: 0, mismatches: Vec::new(), anchors_exact: true, nu_anchor: Scalar::one() };
    for (k, l) in objects.iter().enumerate() {
        let (x, p12) = x12.map(l)?;
        let (_, p23) = x23.map(&x)?;
        let (_, p13) = x13.map(l)?;
        out.checked += 1;
        if p12 * p23 * nu(l) != p13 {
            out.mismatches.push(k);
        }
    }
    // Exactness: ι(A') ⊆ A'' and A'' maps onto A.
    let iota: Vec<Vec<Scalar>> = x23.anchor.rows().iter().map(|c| x13.class(&x23.lift(c))).collect();
    let a13 = &x13.anchor;
    let inside = iota.iter().all(|v| a13.contains(v));
    let lifted13 = x13.lifted_anchor();
    let onto = x12.image(&lifted13) == x12.anchor;
    out.anchors_exact = inside && onto && a13.dim() == x12.anchor.dim() + x23.anchor.dim();
    if out.anchors_exact {
        let lifted = lifted13.sum(&l3.clone());
        out.nu_anchor = nu(&lifted);
    }
    Ok(out)
}

// ---------------------------------------------------------------- samples

#[derive(Clone, Debug)]
pub struct Gl2Sample {
    pub elements: Vec<GL2Element>,
    pub group: GroupSample,
}

impl Gl2Sample {
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
    pub fn find(&self, g: &GL2Element) -> Option<usize> {
        self.elements.iter().position(|x| x.matrix == g.matrix)
    }
    fn from_elements(elements: Vec<GL2Element>, labels: Vec<String>, word_cap: Option<usize>) -> Result<Self> {
        let index: HashMap<&Matrix, usize> = elements.iter().enumerate().map(|(k, g)| (&g.matrix, k)).collect();
        let table: Vec<Vec<Option<usize>>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index.get(&mat_mul(&a.matrix, &b.matrix)).copied()).collect())
            .collect();
        let group = GroupSample::partial(labels, table, 0, word_cap)?;
        Ok(Gl2Sample { elements, group })
    }
}

/// Positive words of length `≤ cap` in the generators, deduplicated by
/// matrix; a product is defined when its matrix is in the sample.
pub fn word_sample(w: &DoubleWindow, gens: &[(String, GL2Element)], cap: usize) -> Result<Gl2Sample> {
    let mut elements = vec![GL2Element::identity(w)];
    let mut labels = vec!["e".to_string()];
    let mut seen: HashMap<Matrix, usize> = HashMap::from([(elements[0].matrix.clone(), 0)]);
    let mut frontier = vec![0usize];
    for _ in 0..cap {
        let mut next = Vec::new();
        for &k in &frontier {
            for (name, g) in gens {
                if g.window != *w {
                    return Err(DoubleLoopError::Sample(format!("generator {name} lives on another window")));
                }
                let h = elements[k].mul(g);
                if seen.contains_key(&h.matrix) {
                    continue;
                }
                seen.insert(h.matrix.clone(), elements.len());
                labels.push(if k == 0 { name.clone() } else { format!("{}·{}", labels[k], name) });
                next.push(elements.len());
                elements.push(h);
            }
        }
        frontier = next;
    }
    Gl2Sample::from_elements(elements, labels, Some(cap))
}

/// `⟨g⟩`, which must be finite of order `≤ max_order`.
pub fn cyclic_sample(label: &str, g: &GL2Element, max_order: usize) -> Result<Gl2Sample> {
    let w = g.window;
    let e = GL2Element::identity(&w);
    let mut elements = vec![e.clone()];
    let mut cur = g.clone();
    while cur.matrix != e.matrix {
        if elements.len() >= max_order {
            return Err(DoubleLoopError::Budget(format!("{label} has order > {max_order}")));
        }
        elements.push(cur.clone());
        cur = cur.mul(g);
    }
    let labels = (0..elements.len()).map(|k| if k == 0 { "e".into() } else { format!("{label}^{k}") }).collect();
    Gl2Sample::from_elements(elements, labels, None)
}

// ---------------------------------------------------------------- the gerbal representation

/// Values of the extracted 3-cocycle on a partial sample, evaluated at a set
/// of base objects (where they must agree: they are central scalars).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCocycle {
    pub values: BTreeMap<(usize, usize, usize), Scalar>,
    pub identity: IdentityCheck,
}

impl SampledCocycle {
    pub fn is_trivial(&self) -> bool {
        self.values.values().all(One::is_one)
    }
}

/// `F_g = Ξ^{-1}_{𝕃, 𝕃∩g𝕃} ∘ Ξ_{g𝕃, 𝕃∩g𝕃} ∘ T_g` on `C^ss_𝕃`, with Hom
/// lines for pseudo-related pairs, and `c(g,h) = u(g,h)·(canonical)`.
/// Objects are interned on demand; `F_g` is memoized.
#[derive(Clone, Debug)]
pub struct GerbalRep {
    window: DoubleWindow,
    topology: Topology,
    lattice: Subspace,
    sample: Gl2Sample,
    choice: Vec<Scalar>,
    objects: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
    memo: HashMap<(usize, usize), (usize, Scalar)>,
    steps: Vec<Option<(Xi, Xi)>>,
}

impl GerbalRep {
    pub fn new(lattice: &BigLattice, sample: Gl2Sample) -> Result<Self> {
        let w = lattice.window;
        if sample.elements.iter().any(|g| g.window != w) {
            return Err(DoubleLoopError::Sample("elements live on another window".into()));
        }
        let n = sample.len();
        Ok(GerbalRep {
            window: w,
            topology: Topology::STail,
            lattice: lattice.space.clone(),
            choice: vec![Scalar::one(); n * n],
            steps: vec![None; n],
            sample,
            objects: Vec::new(),
            index: HashMap::new(),
            memo: HashMap::new(),
        })
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    /// Independent `±1` choices of `u(g,h)`, normalized at the identity.
    pub fn with_random_choices(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, e) = (self.sample.len(), self.sample.group.identity());
        for g in 0..n {
            for h in 0..n {
                let flip = rng.gen_bool(0.5);
                self.choice[g * n + h] = if g == e || h == e || !flip { q(1) } else { q(-1) };
            }
        }
        self
    }
    pub fn set_choices(&mut self, u: impl Fn(usize, usize) -> Scalar) {
        let n = self.sample.len();
        for g in 0..n {
            for h in 0..n {
                self.choice[g * n + h] = u(g, h);
            }
        }
    }
    pub fn choice(&self, g: usize, h: usize) -> &Scalar {
        &self.choice[g * self.sample.len() + h]
    }
    pub fn window(&self) -> &DoubleWindow {
        &self.window
    }
    pub fn sample(&self) -> &Gl2Sample {
        &self.sample
    }
    pub fn lattice(&self) -> &Subspace {
        &self.lattice
    }
    pub fn objects(&self) -> &[Subspace] {
        &self.objects
    }
    pub fn object(&self, x: usize) -> &Subspace {
        &self.objects[x]
    }

    pub fn intern(&mut self, s: Subspace) -> Result<usize> {
        self.window.check(&s)?;
        if !s.is_subspace_of(&self.lattice) {
            return Err(DoubleLoopError::NotContained("object ⊄ 𝕃".into()));
        }
        if let Some(&k) = self.index.get(&s) {
            return Ok(k);
        }
        self.objects.push(s.clone());
        self.index.insert(s, self.objects.len() - 1);
        Ok(self.objects.len() - 1)
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        pseudo_related_in(&self.window, self.topology, &self.objects[x], &self.objects[y]).is_some()
    }

    fn steps(&mut self, g: usize) -> Result<&(Xi, Xi)> {
        if self.steps[g].is_none() {
            let gl = self.sample.elements[g].apply(&self.lattice);
            let meet = gl.intersect(&self.lattice);
            let down = Xi::new(&self.window, &gl, &meet)?;
            let up = Xi::new(&self.window, &self.lattice, &meet)?;
            self.steps[g] = Some((down, up));
        }
        Ok(self.steps[g].as_ref().unwrap())
    }

    /// `F_g(X)` and `φ_g(X)`.
    pub fn apply(&mut self, g: usize, x: usize) -> Result<(usize, Scalar)> {
        if let Some(v) = self.memo.get(&(g, x)) {
            return Ok(v.clone());
        }
        let el = self.sample.elements[g].clone();
        let (gx, t) = Transport { g: el }.map(&self.objects[x]);
        let (down, up) = self.steps(g)?.clone();
        let (y, p1) = down.map(&gx)?;
        let (z, p2) = up.unmap(&y)?;
        let out = (self.intern(z)?, t * p1 * p2);
        self.memo.insert((g, x), out.clone());
        Ok(out)
    }

    /// `F_g(b_{xy}) = f · b_{F_g x, F_g y}`.
    pub fn hom_scalar(&mut self, g: usize, x: usize, y: usize) -> Result<Scalar> {
        let (fx, px) = self.apply(g, x)?;
        let (fy, py) = self.apply(g, y)?;
        let o = &self.objects;
        Ok(gauge_hom_scalar(&o[x], &o[y], &o[fx], &o[fy], &px, &py))
    }

    pub fn comp(&self, x: usize, y: usize, z: usize) -> Scalar {
        comp_scalar(&self.objects[x], &self.objects[y], &self.objects[z])
    }

    fn product(&self, g: usize, h: usize) -> Result<usize> {
        self.sample.group.mul(g, h).ok_or_else(|| DoubleLoopError::Sample(format!("{g}·{h} is not in the sample")))
    }

    /// `c(g,h)_X` relative to `b_{F_gF_h X, F_gh X}`.
    pub fn c(&mut self, g: usize, h: usize, x: usize) -> Result<Scalar> {
        let gh = self.product(g, h)?;
        let (hx, p_h) = self.apply(h, x)?;
        let (x1, p_g) = self.apply(g, hx)?;
        let (x2, p_gh) = self.apply(gh, x)?;
        if !self.related(x1, x2) {
            return Err(DoubleLoopError::NotIsomorphic { g, h, x });
        }
        let abs = p_h * p_g / p_gh * self.choice(g, h);
        Ok(abs / kappa(&self.objects[x1], &self.objects[x2]))
    }

    /// Naturality of `c(g,h)` on every related pair among `objects`; returns
    /// the number of Homs checked.
    pub fn check_naturality(&mut self, g: usize, h: usize, objects: &[usize]) -> Result<usize> {
        let gh = self.product(g, h)?;
        let mut checked = 0;
        for &x in objects {
            for &y in objects {
                if !self.related(x, y) {
                    continue;
                }
                let (hx, _) = self.apply(h, x)?;
                let (hy, _) = self.apply(h, y)?;
                let f = self.hom_scalar(h, x, y)? * self.hom_scalar(g, hx, hy)?;
                let fp = self.hom_scalar(gh, x, y)?;
                let (fx, _) = self.apply(g, hx)?;
                let (fy, _) = self.apply(g, hy)?;
                let (fpx, _) = self.apply(gh, x)?;
                let (fpy, _) = self.apply(gh, y)?;
                let (cx, cy) = (self.c(g, h, x)?, self.c(g, h, y)?);
                let lhs = fp * cx * self.comp(fx, fpx, fpy);
                let rhs = cy * f * self.comp(fx, fy, fpy);
                checked += 1;
                if lhs != rhs {
                    return Err(GerbalError::Naturality { g, h, x, y }.into());
                }
            }
        }
        Ok(checked)
    }

    /// `a(g₁,g₂,g₃)` at `X`, by the same two paths as `extract_3cocycle`.
    pub fn associator(&mut self, g1: usize, g2: usize, g3: usize, x: usize) -> Result<Scalar> {
        let (g12, g23) = (self.product(g1, g2)?, self.product(g2, g3)?);
        let g123 = self.product(g12, g3)?;
        let (x3, _) = self.apply(g3, x)?;
        let (x23, _) = self.apply(g2, x3)?;
        let (top, _) = self.apply(g1, x23)?;
        let (end, _) = self.apply(g123, x)?;
        let (x12, _) = self.apply(g12, x3)?;
        let path1 = self.c(g1, g2, x3)? * self.c(g12, g3, x)? * self.comp(top, x12, end);
        let (y23, _) = self.apply(g23, x)?;
        let (mid, _) = self.apply(g1, y23)?;
        let path2 = self.c(g2, g3, x)? * self.hom_scalar(g1, x23, y23)? * self.c(g1, g23, x)? * self.comp(top, mid, end);
        Ok(path2 / path1)
    }

    fn defined_triples(&self) -> Vec<(usize, usize, usize)> {
        let (n, s) = (self.sample.len(), &self.sample.group);
        let mut out = Vec::new();
        for g1 in 0..n {
            for g2 in 0..n {
                let Some(g12) = s.mul(g1, g2) else { continue };
                for g3 in 0..n {
                    if s.mul(g2, g3).is_some() && s.mul(g12, g3).is_some() {
                        out.push((g1, g2, g3));
                    }
                }
            }
        }
        out
    }

    /// The cocycle on every defined triple, evaluated at each base object
    /// (values must agree), then the cocycle identity on every quadruple
    /// where the five values are defined.
    pub fn extract(&mut self, base: &[usize]) -> Result<SampledCocycle> {
        let mut values = BTreeMap::new();
        for (g1, g2, g3) in self.defined_triples() {
            let mut val: Option<Scalar> = None;
            for &x in base {
                let a = self.associator(g1, g2, g3, x)?;
                match &val {
                    None => val = Some(a),
                    Some(v) if *v != a => return Err(DoubleLoopError::NotCentral(g1, g2, g3)),
                    _ => {}
                }
            }
            if let Some(v) = val {
                values.insert((g1, g2, g3), v);
            }
        }
        let n = self.sample.len();
        let s = &self.sample.group;
        let mut identity = IdentityCheck { checked: 0, failures: Vec::new() };
        for g1 in 0..n {
            for g2 in 0..n {
                for g3 in 0..n {
                    for g4 in 0..n {
                        let (Some(g12), Some(g23), Some(g34)) = (s.mul(g1, g2), s.mul(g2, g3), s.mul(g3, g4)) else { continue };
                        let get = |a, b, c| values.get(&(a, b, c));
                        let (Some(x), Some(y), Some(z), Some(u), Some(v)) =
                            (get(g2, g3, g4), get(g1, g23, g4), get(g1, g2, g3), get(g12, g3, g4), get(g1, g2, g34))
                        else {
                            continue;
                        };
                        identity.checked += 1;
                        if x * y * z != u * v {
                            identity.failures.push([g1, g2, g3, g4]);
                        }
                    }
                }
            }
        }
        Ok(SampledCocycle { values, identity })
    }

    /// `δu(g₁,g₂,g₃) = u(g₂,g₃)u(g₁,g₂g₃) / (u(g₁g₂,g₃)u(g₁,g₂))`.
    pub fn choice_coboundary(&self, g1: usize, g2: usize, g3: usize) -> Option<Scalar> {
        let s = &self.sample.group;
        let (g12, g23) = (s.mul(g1, g2)?, s.mul(g2, g3)?);
        Some(self.choice(g2, g3) * self.choice(g1, g23) / (self.choice(g12, g3) * self.choice(g1, g2)))
    }

    /// Interns `base` and closes the registry under every `F_g`.
    pub fn close(&mut self, base: &[Subspace], max_objects: usize) -> Result<Vec<usize>> {
        let ids = base.iter().map(|b| self.intern(b.clone())).collect::<Result<Vec<_>>>()?;
        let mut queue: VecDeque<usize> = ids.iter().copied().collect();
        let mut done = vec![false; self.objects.len()];
        while let Some(x) = queue.pop_front() {
            if done.get(x).copied().unwrap_or(false) {
                continue;
            }
            if done.len() <= x {
                done.resize(x + 1, false);
            }
            done[x] = true;
            for g in 0..self.sample.len() {
                let (y, _) = self.apply(g, x)?;
                if self.objects.len() > max_objects {
                    return Err(DoubleLoopError::Budget(format!("more than {max_objects} objects")));
                }
                if !done.get(y).copied().unwrap_or(false) {
                    queue.push_back(y);
                }
            }
        }
        Ok(ids)
    }

    /// The registry as a `GerbalActionSpec`; needs a closed sample and a
    /// registry closed under every `F_g` (see [`GerbalRep::close`]).
    pub fn to_spec(&mut self) -> Result<GerbalActionSpec<Scalar>> {
        if !self.sample.group.is_closed() {
            return Err(GerbalError::NotClosed.into());
        }
        let (n, m) = (self.sample.len(), self.objects.len());
        let mut maps = vec![vec![0usize; m]; n];
        let mut phis = vec![vec![Scalar::one(); m]; n];
        for g in 0..n {
            for x in 0..m {
                let (y, p) = self.apply(g, x)?;
                if y >= m {
                    return Err(DoubleLoopError::Sample("registry is not closed under the action".into()));
                }
                maps[g][x] = y;
                phis[g][x] = p;
            }
        }
        // Blocks: connected components of the Hom relation.
        let mut block = vec![usize::MAX; m];
        let mut nb = 0;
        for x in 0..m {
            if block[x] != usize::MAX {
                continue;
            }
            let mut stack = vec![x];
            block[x] = nb;
            while let Some(y) = stack.pop() {
                for z in 0..m {
                    if block[z] == usize::MAX && self.related(y, z) {
                        block[z] = nb;
                        stack.push(z);
                    }
                }
            }
            nb += 1;
        }
        let labels: Vec<String> = (0..m).map(|x| format!("X{x}")).collect();
        let objs = self.objects.clone();
        let cat = LineCategory::new(labels, block, |x, y, z| comp_scalar(&objs[x], &objs[y], &objs[z]))?;
        let functors = (0..n)
            .map(|g| {
                let (mp, ph) = (&maps[g], &phis[g]);
                AutoEquiv::new(&cat, mp.clone(), |x, y| gauge_hom_scalar(&objs[x], &objs[y], &objs[mp[x]], &objs[mp[y]], &ph[x], &ph[y]))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut cs = HashMap::new();
        for g in 0..n {
            for h in 0..n {
                let Some(gh) = self.sample.group.mul(g, h) else { continue };
                let v: Vec<Scalar> = (0..m)
                    .map(|x| {
                        let (x1, x2) = (maps[g][maps[h][x]], maps[gh][x]);
                        &phis[h][x] * &phis[g][maps[h][x]] / &phis[gh][x] * self.choice(g, h) / kappa(&objs[x1], &objs[x2])
                    })
                    .collect();
                cs.insert((g, h), v);
            }
        }
        Ok(GerbalActionSpec::new(cat, self.sample.group.clone(), functors, |g, h| cs[&(g, h)].clone())?)
    }
}

/// The pipeline on a finite cyclic subgroup: closed registry, spec,
/// extracted cocycle, its class in `H³(Z/n, μ₂^{blocks})` and the
/// trivializing rechoice.
#[derive(Clone, Debug)]
pub struct CyclicReport {
    pub order: usize,
    pub objects: usize,
    pub blocks: usize,
    pub cocycle: Cocycle3<Scalar>,
    pub matches_choice_coboundary: bool,
    pub identity: IdentityCheck,
    pub h3_invariant_factors: Vec<i64>,
    pub class_is_zero: bool,
    /// The rechoice `d` with `c·d` strict, as a table over `(g, h)`.
    pub trivialization: Option<Vec<Vec<Vec<Scalar>>>>,
}

pub fn cyclic_pipeline(rep: &mut GerbalRep, base: &[Subspace], max_objects: usize) -> Result<CyclicReport> {
    rep.close(base, max_objects)?;
    let spec = rep.to_spec()?;
    let a = extract_3cocycle(&spec)?;
    let n = rep.sample.len();
    let matches = (0..n).all(|g1| {
        (0..n).all(|g2| {
            (0..n).all(|g3| match (a.get(g1, g2, g3), rep.choice_coboundary(g1, g2, g3)) {
                (Some(v), Some(d)) => v.iter().all(|x| *x == d),
                _ => true,
            })
        })
    });
    let identity = check_cocycle_identity(&spec, &a);
    let group = spec.group().to_group().ok_or(GerbalError::NotClosed)?;
    let module = spec.center_module(2)?;
    let h3 = cohomology(&group, &module, 3, ComplexOptions::default()).map_err(GerbalError::from)?;
    let class_is_zero = a.is_trivial() || h3.coboundary_witness(&a.to_cochain(2)?).is_some();
    let trivialization = compatible_choice(&spec)?.map(|strict| {
        (0..n)
            .map(|g| {
                (0..n)
                    .map(|h| match (strict.c(g, h), spec.c(g, h)) {
                        (Some(s), Some(c)) => s.iter().zip(c).map(|(x, y)| x / y).collect(),
                        _ => Vec::new(),
                    })
                    .collect()
            })
            .collect()
    });
    Ok(CyclicReport {
        order: n,
        objects: spec.category().len(),
        blocks: spec.category().block_count(),
        cocycle: a,
        matches_choice_coboundary: matches,
        identity,
        h3_invariant_factors: h3.invariant_factors.clone(),
        class_is_zero,
        trivialization,
    })
}

// ---------------------------------------------------------------- the B C^× extension

/// `(g, Δ)` with `Δ ∈ det(g𝕃|𝕃)` stored by its relative scalar. In a
/// finite window `D(g𝕃|𝕃)` is equivalent to the torsor `det(g𝕃|𝕃)^×`.
#[derive(Clone, Debug, PartialEq)]
pub struct BGerbeElement {
    pub g: GL2Element,
    pub delta: Scalar,
}

#[derive(Clone, Debug)]
pub struct BGerbe {
    window: DoubleWindow,
    lattice: Subspace,
}

impl BGerbe {
    pub fn new(lattice: &BigLattice) -> Self {
        BGerbe { window: lattice.window, lattice: lattice.space.clone() }
    }
    pub fn identity(&self) -> BGerbeElement {
        BGerbeElement { g: GL2Element::identity(&self.window), delta: Scalar::one() }
    }
    /// `(1, λ)`.
    pub fn central(&self, lambda: Scalar) -> Result<BGerbeElement> {
        self.element(GL2Element::identity(&self.window), lambda)
    }
    pub fn element(&self, g: GL2Element, delta: Scalar) -> Result<BGerbeElement> {
        if g.window != self.window {
            return Err(DoubleLoopError::Sample("element lives on another window".into()));
        }
        if delta.is_zero() {
            return Err(WindowError::ZeroScalar.into());
        }
        Ok(BGerbeElement { g, delta })
    }
    /// `Λ(g𝕃) ⊗ Λ(𝕃)^{-1}` coefficient of `Δ`.
    pub fn absolute(&self, x: &BGerbeElement) -> Scalar {
        &x.delta * kappa(&x.g.apply(&self.lattice), &self.lattice)
    }

    /// `(gg', γ(g(Δ') ⊗ Δ))`.
    pub fn multiply(&self, x: &BGerbeElement, y: &BGerbeElement) -> BGerbeElement {
        let l = &self.lattice;
        let (g, gp) = (&x.g, &y.g);
        let gpl = gp.apply(l);
        let (ggpl, gl) = (g.apply(&gpl), g.apply(l));
        let moved = &y.delta * transport_factor(&gpl, l, &ggpl, &gl, |v| g.apply_vec(v));
        let delta = gamma_scalar(&ggpl, &gl, l, &moved, &x.delta);
        BGerbeElement { g: g.mul(gp), delta }
    }

    /// `π₀` = a closed sample, `π₁ ⊇ μ₂`; `r_x(μ)` is read off
    /// `x·(1,μ) = (1, r_x μ)·x`.
    pub fn presentation(&self, sample: &Gl2Sample) -> Result<MonoidalPresentation> {
        let pi0 = sample.group.to_group().ok_or(GerbalError::NotClosed)?;
        let minus = self.central(q(-1))?;
        let mut l = Vec::new();
        let mut r = Vec::new();
        for g in &sample.elements {
            let x = self.element(g.clone(), Scalar::one())?;
            let right = self.multiply(&x, &minus);
            let nu = &right.delta / &x.delta;
            let e = if nu == q(-1) {
                1
            } else if nu.is_one() {
                0
            } else {
                return Err(DoubleLoopError::Sample("conjugation leaves μ₂".into()));
            };
            l.push(vec![vec![1i64]]);
            r.push(vec![vec![e]]);
        }
        Ok(MonoidalPresentation { pi0, factors: vec![2], l, r })
    }
}

impl GerbalRep {
    /// `F_{(g,Δ)}`: `F_g` with the twisting line trivialized by `Δ`.
    pub fn act_gerbe(&mut self, gerbe: &BGerbe, x: &BGerbeElement, obj: usize) -> Result<(usize, Scalar)> {
        let g = self.sample.find(&x.g).ok_or_else(|| DoubleLoopError::Sample("element outside the sample".into()))?;
        let (y, p) = self.apply(g, obj)?;
        Ok((y, p / gerbe.absolute(x)))
    }

    /// The isomorphism `F_x F_y ⇒ F_{xy}` at `obj`, relative scalar.
    pub fn gerbe_c(&mut self, gerbe: &BGerbe, x: &BGerbeElement, y: &BGerbeElement, obj: usize) -> Result<Scalar> {
        let (o1, p1) = self.act_gerbe(gerbe, y, obj)?;
        let (o2, p2) = self.act_gerbe(gerbe, x, o1)?;
        let (o3, p3) = self.act_gerbe(gerbe, &gerbe.multiply(x, y), obj)?;
        if !self.related(o2, o3) {
            return Err(DoubleLoopError::NotIsomorphic { g: 0, h: 0, x: obj });
        }
        Ok(p1 * p2 / p3 / kappa(&self.objects[o2], &self.objects[o3]))
    }
}
