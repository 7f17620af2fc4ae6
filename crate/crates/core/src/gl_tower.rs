//! The tower `GL_f ⊂ GL̃_∞ → GL_∞` at finite window: degree, the projection
//! `π`, the two presentations of the central extension and the map between
//! them, and extraction of 2-cocycles from sections.
//!
//! A [`WindowOperator`] is an eventually-shift operator of `K`: inside its
//! window it is an arbitrary matrix, outside it sends `t^i` to
//! `λ_low·t^(i+k)` (below) or `λ_high·t^(i+k)` (above). This family is closed
//! under composition and inversion and contains `σ`, diagonal, monomial and
//! elementary unipotent operators.

use crate::exact_linalg::{det, inverse, q, quotient_family_det, unit_vec, LinalgError, Matrix, Scalar};
use crate::tate_window::{
    commensurable, kappa, split_scalar, std_lattice, transport_factor, DetLineElement, WLattice, Window, WindowError,
};
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Finitely supported Laurent polynomial `Σ c_e t^e`.
pub type Laurent = BTreeMap<i64, Scalar>;

fn add_scaled(acc: &mut Laurent, c: &Scalar, p: &Laurent) {
    for (e, x) in p {
        let v = acc.entry(*e).or_insert_with(Scalar::zero);
        *v += c * x;
        if v.is_zero() {
            acc.remove(e);
        }
    }
}

pub fn monomial(e: i64, c: Scalar) -> Laurent {
    let mut p = Laurent::new();
    if !c.is_zero() {
        p.insert(e, c);
    }
    p
}

pub fn laurent_from_window(w: &Window, v: &[Scalar]) -> Laurent {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (w.exponent(i), x.clone()))
        .collect()
}

/// Coordinates in `w`, dropping terms in the implicit tail `t^high·O`.
/// Fails if a term lies below the window.
pub fn laurent_to_window(w: &Window, p: &Laurent) -> Result<Vec<Scalar>, i64> {
    let mut v = vec![Scalar::zero(); w.dim()];
    for (e, x) in p {
        if *e < w.low() {
            return Err(*e);
        }
        if let Some(i) = w.index(*e) {
            v[i] = x.clone();
        }
    }
    Ok(v)
}

/// Membership of a Laurent polynomial in a window lattice.
pub fn lattice_contains(l: &WLattice, p: &Laurent) -> bool {
    match laurent_to_window(l.window(), p) {
        Ok(v) => l.space().contains(&v),
        Err(_) => false,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("operator is not invertible")]
    Singular,
    #[error("operator is not in the declared class {0:?}")]
    Class(OpClass),
    #[error("pair violates the GL̃ condition")]
    Invariant,
    #[error("section undefined at the requested element")]
    NoSection,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn overflow(w: &Window, extra: i64) -> GlError {
    GlError::Window(WindowError::Overflow { window: *w, suggested: w.enlarge(extra.max(1)) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpClass {
    /// `1 + (finite rank on O)`, identity on `t^{<0}`.
    Finite,
    /// Preserves `O`.
    Plus,
    General,
}

#[derive(Clone, PartialEq, Eq)]
pub struct WindowOperator {
    window: Window,
    shift: i64,
    /// Column `c` is the image of `t^(low+c)` in the basis `t^(low+shift+r)`.
    matrix: Matrix,
    lambda_low: Scalar,
    lambda_high: Scalar,
}

impl fmt::Debug for WindowOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Op{} shift {} tails ({}, {}) [", self.window, self.shift, self.lambda_low, self.lambda_high)?;
        for r in &self.matrix {
            let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            write!(f, "{};", s.join(" "))?;
        }
        write!(f, "]")
    }
}

impl WindowOperator {
    pub fn new(window: Window, shift: i64, matrix: Matrix, lambda_low: Scalar, lambda_high: Scalar) -> Result<Self, GlError> {
        let n = window.dim();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Dimension { expected: n, found: matrix.len() }.into());
        }
        if lambda_low.is_zero() || lambda_high.is_zero() || det(&matrix).is_zero() {
            return Err(GlError::Singular);
        }
        Ok(WindowOperator { window, shift, matrix, lambda_low, lambda_high })
    }

    pub fn identity(w: &Window) -> Self {
        Self::shift_power(w, 0)
    }

    /// `σ^k: t^i ↦ t^(i+k)`.
    pub fn shift_power(w: &Window, k: i64) -> Self {
        WindowOperator { window: *w, shift: k, matrix: crate::exact_linalg::identity(w.dim()), lambda_low: q(1), lambda_high: q(1) }
    }

    pub fn diagonal(w: &Window, entries: &[Scalar]) -> Result<Self, GlError> {
        let n = w.dim();
        let m: Matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i].clone() } else { Scalar::zero() }).collect())
            .collect();
        Self::new(*w, 0, m, q(1), q(1))
    }

    /// `t^src ↦ t^src + c·t^dst`, identity elsewhere.
    pub fn elementary(w: &Window, dst: i64, src: i64, c: Scalar) -> Result<Self, GlError> {
        let (i, j) = match (w.index(dst), w.index(src)) {
            (Some(i), Some(j)) if i != j => (i, j),
            _ => return Err(WindowError::Range(dst).into()),
        };
        let mut m = crate::exact_linalg::identity(w.dim());
        m[i][j] = c;
        Self::new(*w, 0, m, q(1), q(1))
    }

    /// `t^(low+c) ↦ scalars[c]·t^(low+perm[c])`.
    pub fn monomial(w: &Window, perm: &[usize], scalars: &[Scalar]) -> Result<Self, GlError> {
        let n = w.dim();
        let mut m: Matrix = vec![vec![Scalar::zero(); n]; n];
        for c in 0..n {
            m[perm[c]][c] = scalars[c].clone();
        }
        Self::new(*w, 0, m, q(1), q(1))
    }

    pub fn window(&self) -> &Window {
        &self.window
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
    pub fn tails(&self) -> (&Scalar, &Scalar) {
        (&self.lambda_low, &self.lambda_high)
    }

    /// Image of `t^e`.
    pub fn column(&self, e: i64) -> Laurent {
        let w = &self.window;
        match w.index(e) {
            Some(c) => self
                .matrix
                .iter()
                .enumerate()
                .filter(|(_, r)| !r[c].is_zero())
                .map(|(r, row)| (w.exponent(r) + self.shift, row[c].clone()))
                .collect(),
            None if e < w.low() => monomial(e + self.shift, self.lambda_low.clone()),
            None => monomial(e + self.shift, self.lambda_high.clone()),
        }
    }

    pub fn apply(&self, p: &Laurent) -> Laurent {
        let mut out = Laurent::new();
        for (e, x) in p {
            add_scaled(&mut out, x, &self.column(*e));
        }
        out
    }

    fn from_columns(window: Window, shift: i64, cols: impl Fn(i64) -> Laurent, lo: Scalar, hi: Scalar) -> Self {
        let n = window.dim();
        let mut m: Matrix = vec![vec![Scalar::zero(); n]; n];
        for c in 0..n {
            for (e, x) in cols(window.exponent(c)) {
                let r = e - shift - window.low();
                assert!((0..n as i64).contains(&r), "column escapes target window");
                m[r as usize][c] = x;
            }
        }
        WindowOperator { window, shift, matrix: m, lambda_low: lo, lambda_high: hi }
    }

    /// The same operator described on a larger window.
    pub fn embed(&self, bigger: &Window) -> Self {
        assert!(bigger.contains_window(&self.window));
        Self::from_columns(*bigger, self.shift, |e| self.column(e), self.lambda_low.clone(), self.lambda_high.clone())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WindowOperator) -> Self {
        let lo = other.window.low().min(self.window.low() - other.shift);
        let hi = other.window.high().max(self.window.high() - other.shift);
        let v = Window::new(lo, hi).expect("hull of a valid window");
        Self::from_columns(
            v,
            self.shift + other.shift,
            |e| self.apply(&other.column(e)),
            &self.lambda_low * &other.lambda_low,
            &self.lambda_high * &other.lambda_high,
        )
    }

    pub fn inverse(&self) -> Self {
        let w = &self.window;
        let big = Window::new(w.low().min(w.low() - self.shift), w.high().max(w.high() - self.shift)).unwrap();
        let g = self.embed(&big);
        let inv = inverse(&g.matrix).expect("invertible by construction");
        let target = Window::new(w.low().min(w.low() + self.shift), w.high().max(w.high() + self.shift)).unwrap();
        debug_assert_eq!(target.low(), big.low() + self.shift);
        WindowOperator {
            window: target,
            shift: -self.shift,
            matrix: inv,
            lambda_low: Scalar::one() / &self.lambda_low,
            lambda_high: Scalar::one() / &self.lambda_high,
        }
    }

    /// Equality as maps of `K`.
    pub fn same_map(&self, other: &WindowOperator) -> bool {
        if self.shift != other.shift || self.lambda_low != other.lambda_low || self.lambda_high != other.lambda_high {
            return false;
        }
        let h = self.window.hull(&other.window);
        self.embed(&h).matrix == other.embed(&h).matrix
    }

    pub fn is_identity(&self) -> bool {
        self.same_map(&WindowOperator::identity(&self.window))
    }

    /// `g(L)` read in `target`; fails if it does not fit.
    pub fn image_lattice(&self, l: &WLattice, target: &Window) -> Result<WLattice, GlError> {
        let lw = l.window();
        let mut gens: Vec<Laurent> = l.space().rows().iter().map(|r| laurent_from_window(lw, r)).collect();
        let top = lw.high().max(self.window.high()).max(target.high() - self.shift);
        for e in lw.high()..top {
            gens.push(monomial(e, q(1)));
        }
        let mut rows = Vec::new();
        for p in &gens {
            match laurent_to_window(target, &self.apply(p)) {
                Ok(v) => rows.push(v),
                Err(e) => return Err(overflow(target, target.low() - e)),
            }
        }
        let img = WLattice::from_rows(*target, &rows)?;
        // The implicit tail t^high·O of the target must lie in g(L).
        let inv = self.inverse();
        let stop = target.high().max(inv.window.high()).max(lw.high() + self.shift);
        for e in target.high()..stop {
            if !lattice_contains(l, &inv.column(e)) {
                return Err(overflow(target, stop - target.high()));
            }
        }
        Ok(img)
    }

    /// Class membership, checked on `K`.
    pub fn classify(&self) -> OpClass {
        let w = self.window;
        let o = std_lattice(&w, 0).unwrap();
        let preserves = self.shift == 0
            && matches!(self.image_lattice(&o, &w), Ok(ref img) if *img == o);
        if !preserves {
            return OpClass::General;
        }
        let id_below = self.lambda_low.is_one() && (w.low()..0).all(|e| self.column(e) == monomial(e, q(1)));
        if id_below && self.lambda_high.is_one() {
            OpClass::Finite
        } else {
            OpClass::Plus
        }
    }

    pub fn is_in(&self, class: OpClass) -> bool {
        match (class, self.classify()) {
            (OpClass::General, _) => true,
            (OpClass::Plus, c) => c != OpClass::General,
            (OpClass::Finite, c) => c == OpClass::Finite,
        }
    }

    /// Determinant of an element of `GL_f`.
    pub fn finite_det(&self) -> Result<Scalar, GlError> {
        if !self.is_in(OpClass::Finite) {
            return Err(GlError::Class(OpClass::Finite));
        }
        Ok(det(&self.matrix))
    }
}

/// `dim O/(O∩gO) − dim gO/(O∩gO)`, with `gO` read in `w`.
pub fn degree_in(g: &WindowOperator, w: &Window) -> Result<i64, GlError> {
    let o = std_lattice(w, 0)?;
    let go = g.image_lattice(&o, w)?;
    let (a, b) = commensurable(&o, &go)?;
    Ok(a as i64 - b as i64)
}

pub fn degree(g: &WindowOperator) -> Result<i64, GlError> {
    degree_in(g, g.window())
}

// ---------------------------------------------------------------------------

/// An endomorphism of `O`: on `t^0 … t^(n-1)` a block with rows
/// `t^0 … t^(n+k-1)`, above that `t^i ↦ λ·t^(i+k)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OOperator {
    n: i64,
    shift: i64,
    block: Matrix,
    lambda: Scalar,
}

impl OOperator {
    pub fn identity() -> Self {
        OOperator { n: 0, shift: 0, block: vec![], lambda: q(1) }
    }
    pub fn n(&self) -> i64 {
        self.n
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn column(&self, e: i64) -> Laurent {
        assert!(e >= 0, "O-operator applied outside O");
        if e >= self.n {
            return monomial(e + self.shift, self.lambda.clone());
        }
        (0..(self.n + self.shift))
            .filter(|&r| !self.block[r as usize][e as usize].is_zero())
            .map(|r| (r, self.block[r as usize][e as usize].clone()))
            .collect()
    }

    pub fn apply(&self, p: &Laurent) -> Laurent {
        let mut out = Laurent::new();
        for (e, x) in p {
            add_scaled(&mut out, x, &self.column(*e));
        }
        out
    }

    fn from_columns(n: i64, shift: i64, lambda: Scalar, cols: impl Fn(i64) -> Laurent) -> Self {
        let rows = (n + shift).max(0) as usize;
        let mut block = vec![vec![Scalar::zero(); n as usize]; rows];
        for c in 0..n {
            for (e, x) in cols(c) {
                if e >= 0 {
                    assert!(e < n + shift, "block escapes");
                    block[e as usize][c as usize] = x;
                }
            }
        }
        OOperator { n, shift, block, lambda }
    }

    /// `A ∘ B`.
    pub fn compose(&self, other: &OOperator) -> Self {
        let n = other.n.max(self.n - other.shift).max(0);
        Self::from_columns(n, self.shift + other.shift, &self.lambda * &other.lambda, |e| self.apply(&other.column(e)))
    }

    /// Re-describes the operator with a larger block.
    pub fn widen(&self, n: i64) -> Self {
        let n = n.max(self.n);
        Self::from_columns(n, self.shift, self.lambda.clone(), |e| self.column(e))
    }

    /// Smallest `n` with `self(t^i) = other(t^i)` for all `i ≥ n`.
    pub fn agree_from(&self, other: &OOperator) -> Option<i64> {
        if self.shift != other.shift || self.lambda != other.lambda {
            return None;
        }
        let mut n = self.n.max(other.n);
        while n > 0 && self.column(n - 1) == other.column(n - 1) {
            n -= 1;
        }
        Some(n)
    }

    pub fn same_map(&self, other: &OOperator) -> bool {
        self.agree_from(other) == Some(0)
    }

    pub fn is_invertible(&self) -> bool {
        self.shift == 0 && !self.lambda.is_zero() && !det(&self.block).is_zero()
    }

    pub fn inverse(&self) -> Option<OOperator> {
        if !self.is_invertible() {
            return None;
        }
        Some(OOperator { n: self.n, shift: 0, block: inverse(&self.block).ok()?, lambda: Scalar::one() / &self.lambda })
    }

    /// Extension by the identity on `t^{<0}`, as an operator of `K`.
    pub fn extend(&self, w: &Window) -> Result<WindowOperator, GlError> {
        if !self.is_invertible() || self.n > w.high() {
            return Err(GlError::Class(OpClass::Plus));
        }
        let op = WindowOperator::from_columns(
            *w,
            0,
            |e| if e < 0 { monomial(e, q(1)) } else { self.column(e) },
            q(1),
            self.lambda.clone(),
        );
        Ok(op)
    }

    /// Determinant when the operator is `1 + finite`.
    pub fn finite_det(&self) -> Option<Scalar> {
        (self.is_invertible() && self.lambda.is_one()).then(|| det(&self.block))
    }
}

/// `π(X)`: `X` followed by the projection onto `O` along `t^{-1}Q[t^{-1}]`.
pub fn pi_project(x: &WindowOperator) -> OOperator {
    let n = x.window.high().max(-x.shift).max(0);
    OOperator::from_columns(n, x.shift, x.lambda_high.clone(), |e| x.column(e))
}

// ---------------------------------------------------------------------------

/// `(a, g)` with `a ∈ GL⁺` (an automorphism of `O`), `g ∈ GL`, and
/// `a − π(g)` vanishing on a deep enough `t^n·O`.
#[derive(Clone, Debug)]
pub struct TildeElement {
    pub a: OOperator,
    pub g: WindowOperator,
}

impl TildeElement {
    pub fn new(a: OOperator, g: WindowOperator) -> Result<Self, GlError> {
        if !a.is_invertible() {
            return Err(GlError::Class(OpClass::Plus));
        }
        if a.agree_from(&pi_project(&g)).is_none() {
            return Err(GlError::Invariant);
        }
        Ok(TildeElement { a, g })
    }
    pub fn identity(w: &Window) -> Self {
        TildeElement { a: OOperator::identity(), g: WindowOperator::identity(w) }
    }
    /// `i(a) = (a, 1)`.
    pub fn from_finite(a: OOperator, w: &Window) -> Result<Self, GlError> {
        if a.finite_det().is_none() {
            return Err(GlError::Class(OpClass::Finite));
        }
        Self::new(a, WindowOperator::identity(w))
    }
    /// `(π(g), g)`, defined when `π(g)` is invertible.
    pub fn section(g: &WindowOperator) -> Result<Self, GlError> {
        Self::new(pi_project(g), g.clone())
    }
    /// Some `(a, g)` over `g`, if one exists.
    pub fn partner(g: &WindowOperator) -> Option<Self> {
        if let Ok(u) = Self::section(g) {
            return Some(u);
        }
        let p = pi_project(g);
        if p.shift != 0 {
            return None;
        }
        let a = OOperator::from_columns(p.n, 0, p.lambda.clone(), |e| monomial(e, q(1)));
        Self::new(a, g.clone()).ok()
    }
    /// Depth from which `a` and `π(g)` agree.
    pub fn agreement_depth(&self) -> i64 {
        self.a.agree_from(&pi_project(&self.g)).expect("valid element")
    }
}

pub fn tilde_multiply(u: &TildeElement, v: &TildeElement) -> Result<TildeElement, GlError> {
    TildeElement::new(u.a.compose(&v.a), u.g.compose(&v.g))
}

/// `σ̃(a, g) = (a_σ, σgσ^{-1})` with `a_σ = σaσ^{-1} ⊕ id` on `σO ⊕ Q·t^0`.
pub fn sigma_conjugate(u: &TildeElement) -> Result<TildeElement, GlError> {
    let w = *u.g.window();
    let s = WindowOperator::shift_power(&w, 1);
    let g = s.compose(&u.g).compose(&s.inverse());
    let n = u.a.n + 1;
    let a = OOperator::from_columns(n, 0, u.a.lambda.clone(), |e| {
        if e == 0 {
            monomial(0, q(1))
        } else {
            u.a.column(e - 1).into_iter().map(|(k, x)| (k + 1, x)).collect()
        }
    });
    TildeElement::new(a, g)
}

// ---------------------------------------------------------------------------

/// `(c, g)` with `c ∈ det(gL0 | L0)^×`, `L0 = O` read in the window of `c`.
#[derive(Clone, Debug)]
pub struct HatElement {
    pub c: DetLineElement,
    pub g: WindowOperator,
}

impl HatElement {
    pub fn new(c: DetLineElement, g: WindowOperator) -> Result<Self, GlError> {
        let w = *c.from.window();
        let l0 = std_lattice(&w, 0)?;
        if c.to != l0 || c.from != g.image_lattice(&l0, &w)? {
            return Err(WindowError::Endpoint.into());
        }
        Ok(HatElement { c, g })
    }
    pub fn window(&self) -> Window {
        *self.c.from.window()
    }
    pub fn identity(w: &Window) -> Self {
        let l0 = std_lattice(w, 0).unwrap();
        HatElement { c: DetLineElement::canonical(l0.clone(), l0).unwrap(), g: WindowOperator::identity(w) }
    }
    /// `(s·canonical, g)`.
    pub fn with_scalar(g: &WindowOperator, w: &Window, s: Scalar) -> Result<Self, GlError> {
        let l0 = std_lattice(w, 0)?;
        let gl0 = g.image_lattice(&l0, w)?;
        Ok(HatElement { c: DetLineElement::with_scalar(gl0, l0, s)?, g: g.clone() })
    }
    /// The central element `(s, 1)`.
    pub fn central(w: &Window, s: Scalar) -> Self {
        Self::with_scalar(&WindowOperator::identity(w), w, s).unwrap()
    }
    /// `s` if this element is central (its operator is the identity).
    pub fn central_scalar(&self) -> Option<Scalar> {
        self.g.is_identity().then(|| self.c.scalar.clone())
    }
    pub fn same_element(&self, other: &HatElement) -> bool {
        self.c == other.c && self.g.same_map(&other.g)
    }
}

/// Transport of `det(L|L')` along `g`, with `gL`, `gL'` read in `w`.
pub fn act_on_det_op(g: &WindowOperator, d: &DetLineElement) -> Result<DetLineElement, GlError> {
    let w = *d.from.window();
    let gl = g.image_lattice(&d.from, &w)?;
    let glp = g.image_lattice(&d.to, &w)?;
    let i = d.from.space().intersect(d.to.space());
    // Every quotient representative must land inside the window.
    for s in [d.from.space(), d.to.space()] {
        for v in s.quotient_basis(&i) {
            laurent_to_window(&w, &g.apply(&laurent_from_window(&w, &v))).map_err(|e| overflow(&w, w.low() - e))?;
        }
    }
    let f = transport_factor(d.from.space(), d.to.space(), gl.space(), glp.space(), |v| {
        laurent_to_window(&w, &g.apply(&laurent_from_window(&w, v))).expect("checked")
    });
    Ok(DetLineElement::with_scalar(gl, glp, &d.scalar * f)?)
}

/// `(c,g)(c',g') = (c·g(c'), gg')`.
pub fn hat_multiply(x: &HatElement, y: &HatElement) -> Result<HatElement, GlError> {
    if x.window() != y.window() {
        return Err(WindowError::Mismatch(x.window(), y.window()).into());
    }
    let moved = act_on_det_op(&x.g, &y.c)?;
    let c = crate::tate_window::gamma_compose(&moved, &x.c)?;
    Ok(HatElement { c, g: x.g.compose(&y.g) })
}

pub fn hat_inverse(x: &HatElement) -> Result<HatElement, GlError> {
    let gi = x.g.inverse();
    let c = act_on_det_op(&gi, &x.c)?.inverse_line();
    Ok(HatElement { c, g: gi })
}

/// The map `GL̃ → Ĝ`. The line element is built from the composite
/// `gL0/M → L0/M`, `x ↦ a g^{-1} x`, with `M = g(t^n O) = a(t^n O)`;
/// `depth` overrides the choice of `n`.
pub fn tilde_to_hat_at(u: &TildeElement, w: &Window, depth: Option<i64>) -> Result<HatElement, GlError> {
    let g = &u.g;
    // below this depth g may leave O
    let mut n_out = 0;
    for e in 0..g.window().high() {
        if g.column(e).keys().any(|&k| k < 0) {
            n_out = e + 1;
        }
    }
    let n_min = u.agreement_depth().max(n_out);
    let n = depth.unwrap_or(n_min);
    if n < n_min {
        return Err(GlError::Invariant);
    }
    if n > w.high() {
        return Err(overflow(w, n - w.high()));
    }
    let l0 = std_lattice(w, 0)?;
    let l = std_lattice(w, n)?;
    let gl0 = g.image_lattice(&l0, w)?;
    let m = g.image_lattice(&l, w)?;
    let ginv = g.inverse();
    let mut imgs = Vec::new();
    for x in gl0.space().quotient_basis(m.space()) {
        let y = ginv.apply(&laurent_from_window(w, &x));
        let z = u.a.apply(&y);
        imgs.push(laurent_to_window(w, &z).map_err(|e| overflow(w, w.low() - e))?);
    }
    let det_f = quotient_family_det(l0.space(), m.space(), &imgs);
    if det_f.is_zero() {
        return Err(GlError::Singular);
    }
    let abs = split_scalar(gl0.space(), m.space()) / (det_f * split_scalar(l0.space(), m.space()));
    let c = DetLineElement::from_absolute(gl0, l0, abs)?;
    Ok(HatElement { c, g: g.clone() })
}

pub fn tilde_to_hat(u: &TildeElement, w: &Window) -> Result<HatElement, GlError> {
    tilde_to_hat_at(u, w, None)
}

/// `Λ^top` of the composite, as an element of `det(L0 | gL0)`.
pub fn identification_composite(u: &TildeElement, w: &Window) -> Result<DetLineElement, GlError> {
    Ok(tilde_to_hat(u, w)?.c.inverse_line())
}

/// `s(g)·s(h)·s(gh)^{-1}` as a central scalar.
pub fn extension_2cocycle<S>(section: S, g: &WindowOperator, h: &WindowOperator) -> Result<Scalar, GlError>
where
    S: Fn(&WindowOperator) -> Option<HatElement>,
{
    let sg = section(g).ok_or(GlError::NoSection)?;
    let sh = section(h).ok_or(GlError::NoSection)?;
    let gh = g.compose(h);
    let sgh = section(&gh).ok_or(GlError::NoSection)?;
    let prod = hat_multiply(&sg, &sh)?;
    if !prod.g.same_map(&sgh.g) || prod.c.from != sgh.c.from {
        return Err(GlError::NoSection);
    }
    Ok(&prod.c.scalar / &sgh.c.scalar)
}

/// The section `g ↦ (canonical element, g)` in window `w`.
pub fn canonical_section(w: Window) -> impl Fn(&WindowOperator) -> Option<HatElement> {
    move |g| HatElement::with_scalar(g, &w, q(1)).ok()
}

/// Absolute-form helper: `κ(gL0, L0)`.
pub fn hat_kappa(x: &HatElement) -> Scalar {
    kappa(x.c.from.space(), x.c.to.space())
}

// ---------------------------------------------------------------------------
// Samples.

/// A random degree-zero operator: a signed monomial or an elementary
/// unipotent supported in `w`.
pub fn random_monomial_or_unipotent<R: Rng>(w: &Window, rng: &mut R) -> WindowOperator {
    let n = w.dim();
    if rng.gen_bool(0.5) {
        let mut perm: Vec<usize> = (0..n).collect();
        // a few random transpositions keep the support small
        for _ in 0..rng.gen_range(1..=2) {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            perm.swap(i, j);
        }
        let scalars: Vec<Scalar> = (0..n)
            .map(|_| {
                let x = [1i64, 1, 1, -1, 2, -2][rng.gen_range(0..6)];
                q(x)
            })
            .collect();
        WindowOperator::monomial(w, &perm, &scalars).unwrap()
    } else {
        loop {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                let c = q([1i64, -1, 2, 3][rng.gen_range(0..4)]);
                return WindowOperator::elementary(w, w.exponent(i), w.exponent(j), c).unwrap();
            }
        }
    }
}

/// A random operator of small shift whose window matrix is a product of
/// monomial and unipotent factors.
pub fn random_band<R: Rng>(w: &Window, max_shift: i64, rng: &mut R) -> WindowOperator {
    let mut g = WindowOperator::shift_power(w, rng.gen_range(-max_shift..=max_shift));
    for _ in 0..rng.gen_range(0..=2) {
        g = g.compose(&random_monomial_or_unipotent(w, rng));
        g = WindowOperator::from_columns(*w, g.shift, |e| g.column(e), g.lambda_low.clone(), g.lambda_high.clone());
    }
    g
}

/// A random element of `GL_f` supported on `t^0 … t^(n-1)`.
pub fn random_finite<R: Rng>(n: i64, rng: &mut R) -> OOperator {
    loop {
        let block: Matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            q([1i64, 1, 2, -1][rng.gen_range(0..4)])
                        } else {
                            q([0i64, 0, 1, -1][rng.gen_range(0..4)])
                        }
                    })
                    .collect()
            })
            .collect();
        if !det(&block).is_zero() {
            return OOperator { n, shift: 0, block, lambda: q(1) };
        }
    }
}

/// A random element of `GL̃` over a random degree-zero operator.
pub fn random_tilde<R: Rng>(w: &Window, rng: &mut R) -> TildeElement {
    loop {
        let g = random_monomial_or_unipotent(w, rng);
        if let Ok(u) = TildeElement::section(&g) {
            let f = random_finite(w.high().min(3), rng);
            return tilde_multiply(&u, &TildeElement::from_finite(f, w).unwrap()).unwrap();
        }
    }
}

/// Unit vector for exponent `e` in `w`.
pub fn unit_at(w: &Window, e: i64) -> Vec<Scalar> {
    unit_vec(w.dim(), w.index(e).expect("exponent in window"))
}
