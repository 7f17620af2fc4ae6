//! Finite windows of `K = Q((t))`: lattices, relative determinant lines
//! `det(L|L')`, their composition `γ`, transport by operators, and
//! determinantal theories anchored at a reference lattice.
//!
//! A window `[low, high)` stores the coefficients of `t^low … t^(high-1)`.
//! Every lattice is understood to contain the implicit tail `t^high·O`, so a
//! subspace of the window determines a lattice of `K` and enlarging the
//! window is a canonical embedding.
//!
//! Scalars of `det(L|L')` are stored relative to the canonical element
//! `ω(L/I) ⊗ ω(L'/I)^{-1}`, `I = L ∩ L'`, where `ω(S/T)` is the wedge of the
//! canonical quotient basis ([`Subspace::quotient_basis`]). Composition goes
//! through the absolute form `Λ(L) ⊗ Λ(L')^{-1}` (both taken modulo the
//! common tail), using the splitting `Λ(S) = Λ(S/T) ⊗ Λ(T)`, quotient first.

use crate::exact_linalg::{det, inverse, mat_vec, quotient_family_det, unit_vec, LinalgError, Matrix, Scalar, Subspace};
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("window [{low},{high}) must satisfy low < 0 <= high")]
    BadWindow { low: i64, high: i64 },
    #[error("exponent {0} outside window")]
    Range(i64),
    #[error("window mismatch: {0} vs {1}")]
    Mismatch(Window, Window),
    #[error("result escapes window {window}; retry with {suggested}")]
    Overflow { window: Window, suggested: Window },
    #[error("family does not span the quotient")]
    Basis,
    #[error("endpoint mismatch in composition")]
    Endpoint,
    #[error("operator is singular")]
    Singular,
    #[error("zero scalar is not an invertible line element")]
    ZeroScalar,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    low: i64,
    high: i64,
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.low, self.high)
    }
}

impl Window {
    pub fn new(low: i64, high: i64) -> Result<Self, WindowError> {
        if low < 0 && 0 <= high {
            Ok(Window { low, high })
        } else {
            Err(WindowError::BadWindow { low, high })
        }
    }
    pub fn low(&self) -> i64 {
        self.low
    }
    pub fn high(&self) -> i64 {
        self.high
    }
    pub fn dim(&self) -> usize {
        (self.high - self.low) as usize
    }
    /// Coordinate index of `t^0`.
    pub fn standard_offset(&self) -> usize {
        (-self.low) as usize
    }
    pub fn index(&self, exp: i64) -> Option<usize> {
        (self.low <= exp && exp < self.high).then(|| (exp - self.low) as usize)
    }
    pub fn exponent(&self, idx: usize) -> i64 {
        self.low + idx as i64
    }
    pub fn contains_window(&self, other: &Window) -> bool {
        self.low <= other.low && other.high <= self.high
    }
    /// `[low - steps, high + steps)`.
    pub fn enlarge(&self, steps: i64) -> Window {
        Window { low: self.low - steps, high: self.high + steps }
    }
    pub fn hull(&self, other: &Window) -> Window {
        Window { low: self.low.min(other.low), high: self.high.max(other.high) }
    }
    /// Pads a coordinate vector of this window into `bigger` (zeros outside).
    pub fn pad(&self, v: &[Scalar], bigger: &Window) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); bigger.dim()];
        let off = (self.low - bigger.low) as usize;
        for (i, x) in v.iter().enumerate() {
            out[off + i] = x.clone();
        }
        out
    }
}

/// A lattice of `K` seen through a window: `space ⊕ t^high·O`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WLattice {
    window: Window,
    space: Subspace,
}

impl fmt::Debug for WLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WLattice{} {:?}", self.window, self.space)
    }
}

impl WLattice {
    pub fn new(window: Window, space: Subspace) -> Result<Self, WindowError> {
        if space.ambient() != window.dim() {
            return Err(LinalgError::Dimension { expected: window.dim(), found: space.ambient() }.into());
        }
        Ok(WLattice { window, space })
    }
    pub fn from_rows(window: Window, rows: &[Vec<Scalar>]) -> Result<Self, WindowError> {
        Self::new(window, Subspace::from_rows(window.dim(), rows)?)
    }
    pub fn window(&self) -> &Window {
        &self.window
    }
    pub fn space(&self) -> &Subspace {
        &self.space
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Tightest `(b, a)` with `t^a·O ⊆ L ⊆ t^b·O`.
    pub fn sandwich(&self) -> (i64, i64) {
        let w = &self.window;
        let b = self.space.pivots().first().map(|&p| w.exponent(p)).unwrap_or(w.high);
        let mut a = w.high;
        while a > w.low {
            let idx = w.index(a - 1).unwrap();
            if self.space.contains(&unit_vec(w.dim(), idx)) {
                a -= 1;
            } else {
                break;
            }
        }
        (b, a)
    }

    /// The same lattice of `K` in a larger window.
    pub fn embed(&self, bigger: &Window) -> Result<WLattice, WindowError> {
        if !bigger.contains_window(&self.window) {
            return Err(WindowError::Mismatch(self.window, *bigger));
        }
        let mut rows: Vec<Vec<Scalar>> = self.space.rows().iter().map(|r| self.window.pad(r, bigger)).collect();
        for e in self.window.high..bigger.high {
            rows.push(unit_vec(bigger.dim(), bigger.index(e).unwrap()));
        }
        WLattice::from_rows(*bigger, &rows)
    }

    /// The same lattice in a smaller window, if it fits (contains the new
    /// tail and vanishes below the new bottom).
    pub fn restrict(&self, smaller: &Window) -> Result<WLattice, WindowError> {
        let (b, a) = self.sandwich();
        if !self.window.contains_window(smaller) || b < smaller.low || a > smaller.high {
            return Err(WindowError::Overflow { window: *smaller, suggested: smaller.hull(&Window { low: b.min(-1), high: a.max(0) }) });
        }
        let lo = (smaller.low - self.window.low) as usize;
        let hi = (smaller.high - self.window.low) as usize;
        let rows: Vec<Vec<Scalar>> = self
            .space
            .rows()
            .iter()
            .map(|r| r[lo..hi].to_vec())
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        WLattice::from_rows(*smaller, &rows)
    }

    pub fn intersect(&self, other: &WLattice) -> Result<WLattice, WindowError> {
        same_window(self, other)?;
        Ok(WLattice { window: self.window, space: self.space.intersect(&other.space) })
    }
    pub fn sum(&self, other: &WLattice) -> Result<WLattice, WindowError> {
        same_window(self, other)?;
        Ok(WLattice { window: self.window, space: self.space.sum(&other.space) })
    }
    pub fn is_sublattice_of(&self, other: &WLattice) -> bool {
        self.window == other.window && self.space.is_subspace_of(&other.space)
    }
}

fn same_window(a: &WLattice, b: &WLattice) -> Result<(), WindowError> {
    if a.window != b.window {
        return Err(WindowError::Mismatch(a.window, b.window));
    }
    Ok(())
}

/// `t^a·O` in the window.
pub fn std_lattice(w: &Window, a: i64) -> Result<WLattice, WindowError> {
    if a < w.low || a > w.high {
        return Err(WindowError::Range(a));
    }
    let start = (a - w.low) as usize;
    Ok(WLattice { window: *w, space: Subspace::span_units(w.dim(), start..w.dim()) })
}

/// Dimensions of `L/(L∩L')` and `L'/(L∩L')`.
pub fn commensurable(l: &WLattice, lp: &WLattice) -> Result<(usize, usize), WindowError> {
    let i = l.intersect(lp)?;
    Ok((l.dim() - i.dim(), lp.dim() - i.dim()))
}

// ---------------------------------------------------------------------------
// Determinant-line scalars on plain subspaces.

/// `ω(S/T)`: canonical basis of `S/T`, requires `T ⊆ S`.
pub fn omega(s: &Subspace, t: &Subspace) -> Vec<Vec<Scalar>> {
    s.quotient_basis(t)
}

/// `λ(S,T)` with `ω(S/T) ∧ ω(T) = λ(S,T)·ω(S)`.
pub fn split_scalar(s: &Subspace, t: &Subspace) -> Scalar {
    let mut fam = omega(s, t);
    fam.extend(t.rows().iter().cloned());
    let m: Matrix = fam.iter().map(|v| s.coords(v).expect("T ⊆ S")).collect();
    det(&m)
}

/// Conversion factor from relative to absolute scalars of `det(L|L')`.
pub fn kappa(l: &Subspace, lp: &Subspace) -> Scalar {
    let i = l.intersect(lp);
    split_scalar(l, &i) / split_scalar(lp, &i)
}

/// Relative scalar of `γ(x ⊗ y)` for `x ∈ det(L|L')`, `y ∈ det(L'|L'')` of
/// relative scalars `x`, `y`.
pub fn gamma_scalar(l: &Subspace, lp: &Subspace, lpp: &Subspace, x: &Scalar, y: &Scalar) -> Scalar {
    x * y * kappa(l, lp) * kappa(lp, lpp) / kappa(l, lpp)
}

/// Factor by which a linear map `f` (with `f(L) = fl`, `f(L') = flp`)
/// multiplies relative scalars of `det(L|L')`.
pub fn transport_factor<F>(l: &Subspace, lp: &Subspace, fl: &Subspace, flp: &Subspace, f: F) -> Scalar
where
    F: Fn(&[Scalar]) -> Vec<Scalar>,
{
    let i = l.intersect(lp);
    let fi = fl.intersect(flp);
    let side = |s: &Subspace, fs: &Subspace| {
        let imgs: Vec<Vec<Scalar>> = omega(s, &i).iter().map(|v| f(v)).collect();
        quotient_family_det(fs, &fi, &imgs)
    };
    side(l, fl) / side(lp, flp)
}

// ---------------------------------------------------------------------------

/// An element of `det(from|to)`, as a multiple of the canonical element.
#[derive(Clone, PartialEq, Eq)]
pub struct DetLineElement {
    pub from: WLattice,
    pub to: WLattice,
    pub scalar: Scalar,
}

impl fmt::Debug for DetLineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "det({:?} | {:?}) * {}", self.from, self.to, crate::exact_linalg::scalar_to_string(&self.scalar))
    }
}

impl DetLineElement {
    pub fn canonical(from: WLattice, to: WLattice) -> Result<Self, WindowError> {
        Self::with_scalar(from, to, Scalar::one())
    }
    pub fn with_scalar(from: WLattice, to: WLattice, scalar: Scalar) -> Result<Self, WindowError> {
        same_window(&from, &to)?;
        if scalar.is_zero() {
            return Err(WindowError::ZeroScalar);
        }
        Ok(DetLineElement { from, to, scalar })
    }
    /// Scalar against `Λ(from) ⊗ Λ(to)^{-1}` in RREF bases.
    pub fn absolute(&self) -> Scalar {
        &self.scalar * kappa(self.from.space(), self.to.space())
    }
    pub fn from_absolute(from: WLattice, to: WLattice, abs: Scalar) -> Result<Self, WindowError> {
        let k = kappa(from.space(), to.space());
        Self::with_scalar(from, to, abs / k)
    }
    pub fn inverse_line(&self) -> DetLineElement {
        // det(L'|L) = det(L|L')^{-1} with canonical elements matching.
        DetLineElement { from: self.to.clone(), to: self.from.clone(), scalar: Scalar::one() / &self.scalar }
    }
    pub fn embed(&self, bigger: &Window) -> Result<DetLineElement, WindowError> {
        Ok(DetLineElement { from: self.from.embed(bigger)?, to: self.to.embed(bigger)?, scalar: self.scalar.clone() })
    }
}

/// The element `Λ basisL ⊗ (Λ basisL')^{-1}` of `det(L|L')`.
pub fn det_element(
    l: &WLattice,
    lp: &WLattice,
    basis_l: &[Vec<Scalar>],
    basis_lp: &[Vec<Scalar>],
) -> Result<DetLineElement, WindowError> {
    same_window(l, lp)?;
    let i = l.space.intersect(&lp.space);
    for (s, b) in [(&l.space, basis_l), (&lp.space, basis_lp)] {
        if b.iter().any(|v| v.len() != s.ambient() || !s.contains(v)) {
            return Err(WindowError::Basis);
        }
    }
    let a = quotient_family_det(&l.space, &i, basis_l);
    let b = quotient_family_det(&lp.space, &i, basis_lp);
    if a.is_zero() || b.is_zero() {
        return Err(WindowError::Basis);
    }
    DetLineElement::with_scalar(l.clone(), lp.clone(), a / b)
}

/// `γ_{L,L',L''}(d1 ⊗ d2)`.
pub fn gamma_compose(d1: &DetLineElement, d2: &DetLineElement) -> Result<DetLineElement, WindowError> {
    if d1.to != d2.from {
        return Err(WindowError::Endpoint);
    }
    let s = gamma_scalar(d1.from.space(), d1.to.space(), d2.to.space(), &d1.scalar, &d2.scalar);
    DetLineElement::with_scalar(d1.from.clone(), d2.to.clone(), s)
}

/// Transport along an invertible operator of the window (column vectors).
pub fn act_on_det(g: &Matrix, d: &DetLineElement) -> Result<DetLineElement, WindowError> {
    let n = d.from.window.dim();
    if g.len() != n || g.iter().any(|r| r.len() != n) {
        return Err(LinalgError::Dimension { expected: n, found: g.len() }.into());
    }
    inverse(g).map_err(|_| WindowError::Singular)?;
    let gl = d.from.space.image(g);
    let glp = d.to.space.image(g);
    let f = transport_factor(d.from.space(), d.to.space(), &gl, &glp, |v| mat_vec(g, v));
    let w = d.from.window;
    DetLineElement::with_scalar(WLattice { window: w, space: gl }, WLattice { window: w, space: glp }, &d.scalar * f)
}

/// A determinantal theory in the anchored model: `Δ(L) = det(L | anchor)`.
#[derive(Clone, Debug)]
pub struct DetTheory {
    pub window: Window,
    pub anchor: WLattice,
}

impl DetTheory {
    pub fn new(anchor: WLattice) -> Self {
        DetTheory { window: anchor.window, anchor }
    }

    /// The canonical generator of `Δ(L)`.
    pub fn eval(&self, l: &WLattice) -> Result<DetLineElement, WindowError> {
        if l.window != self.window {
            return Err(WindowError::Mismatch(l.window, self.window));
        }
        DetLineElement::canonical(l.clone(), self.anchor.clone())
    }

    /// Scalar of `Δ_{L1,L2}: Δ(L1) ⊗ det(L2/L1) → Δ(L2)` on canonical
    /// generators, for `L1 ⊆ L2`; `det(L2/L1)` is read as `det(L2|L1)`.
    pub fn transition(&self, l1: &WLattice, l2: &WLattice) -> Result<Scalar, WindowError> {
        if !l1.is_sublattice_of(l2) {
            return Err(WindowError::Endpoint);
        }
        let top = DetLineElement::canonical(l2.clone(), l1.clone())?;
        Ok(gamma_compose(&top, &self.eval(l1)?)?.scalar)
    }
}

/// Scalar `μ` of the exact-sequence identification
/// `ω(L3/L2) ∧ ω(L2/L1) = μ · ω(L3/L1)` for `L1 ⊆ L2 ⊆ L3`.
pub fn nested_wedge_scalar(l1: &WLattice, l2: &WLattice, l3: &WLattice) -> Scalar {
    let mut fam = omega(l3.space(), l2.space());
    fam.extend(omega(l2.space(), l1.space()));
    quotient_family_det(l3.space(), l1.space(), &fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::q;

    fn w22() -> Window {
        Window::new(-2, 2).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn std_lattice_examples() {
        let w = w22();
        assert_eq!(std_lattice(&w, 0).unwrap().dim(), 2);
        assert_eq!(std_lattice(&w, -2).unwrap().dim(), 4);
        assert_eq!(std_lattice(&w, 2).unwrap().dim(), 0);
        assert!(std_lattice(&w, 3).is_err());
        assert!(Window::new(0, 3).is_err());
    }

    #[test]
    fn commensurable_examples() {
        let w = w22();
        let o = std_lattice(&w, 0).unwrap();
        assert_eq!(commensurable(&o, &o).unwrap(), (0, 0));
        let tm1 = std_lattice(&w, -1).unwrap();
        assert_eq!(commensurable(&tm1, &o).unwrap(), (1, 0));
        let l = WLattice::from_rows(w, &[v(&[0, 1, 1, 0]), v(&[0, 0, 0, 1])]).unwrap();
        assert_eq!(commensurable(&l, &o).unwrap(), (1, 1));
    }

    #[test]
    fn det_element_examples() {
        let w = w22();
        let l = std_lattice(&w, -2).unwrap();
        let lp = std_lattice(&w, 0).unwrap();
        let can = det_element(&l, &lp, &[v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])], &[]).unwrap();
        assert_eq!(can.scalar, q(1));
        let scaled = det_element(&l, &lp, &[v(&[5, 0, 0, 0]), v(&[0, 1, 0, 0])], &[]).unwrap();
        assert_eq!(scaled.scalar, q(5));
        let swapped = det_element(&l, &lp, &[v(&[0, 1, 0, 0]), v(&[1, 0, 0, 0])], &[]).unwrap();
        assert_eq!(swapped.scalar, q(-1));
        assert!(det_element(&l, &lp, &[v(&[1, 0, 0, 0])], &[]).is_err());
    }

    #[test]
    fn gamma_nested_multiplies() {
        let w = w22();
        let l = std_lattice(&w, 0).unwrap();
        let lp = std_lattice(&w, 1).unwrap();
        let lpp = std_lattice(&w, 2).unwrap();
        let a = DetLineElement::with_scalar(l.clone(), lp.clone(), q(3)).unwrap();
        let b = DetLineElement::with_scalar(lp, lpp, q(7)).unwrap();
        assert_eq!(gamma_compose(&a, &b).unwrap().scalar, q(21));
        let id = DetLineElement::canonical(l.clone(), l.clone()).unwrap();
        assert_eq!(gamma_compose(&id, &id).unwrap().scalar, q(1));
        assert!(gamma_compose(&b_of(&w), &id).is_err());
    }

    fn b_of(w: &Window) -> DetLineElement {
        DetLineElement::canonical(std_lattice(w, 1).unwrap(), std_lattice(w, 2).unwrap()).unwrap()
    }

    #[test]
    fn scalar_action_power() {
        let w = w22();
        let l = std_lattice(&w, -2).unwrap();
        let lp = WLattice::from_rows(w, &[v(&[0, 0, 1, 1])]).unwrap();
        let d = DetLineElement::canonical(l, lp).unwrap();
        let lam = q(3);
        let g: Matrix = (0..4).map(|i| (0..4).map(|j| if i == j { lam.clone() } else { q(0) }).collect()).collect();
        // dim L/I = 3, dim L'/I = 0
        assert_eq!(act_on_det(&g, &d).unwrap().scalar, q(27));
        let id: Matrix = crate::exact_linalg::identity(4);
        assert_eq!(act_on_det(&id, &d).unwrap(), d);
    }

    #[test]
    fn det_theory_square() {
        let w = w22();
        let th = DetTheory::new(std_lattice(&w, 0).unwrap());
        assert_eq!(th.eval(&th.anchor).unwrap().scalar, q(1));
        let (l1, l2, l3) = (std_lattice(&w, 2).unwrap(), std_lattice(&w, 1).unwrap(), std_lattice(&w, 0).unwrap());
        let lhs = th.transition(&l1, &l2).unwrap() * th.transition(&l2, &l3).unwrap();
        let rhs = th.transition(&l1, &l3).unwrap() * nested_wedge_scalar(&l1, &l2, &l3);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn embed_and_restrict() {
        let w = w22();
        let big = w.enlarge(1);
        let l = WLattice::from_rows(w, &[v(&[0, 1, 1, 0]), v(&[0, 0, 0, 1])]).unwrap();
        let e = l.embed(&big).unwrap();
        assert_eq!(e.dim(), 3);
        assert_eq!(e.restrict(&w).unwrap(), l);
        assert_eq!(l.sandwich(), (-1, 1));
    }
}
