//! Exact linear algebra over `Q`, plus finite cyclic scalars and
//! modular lattices used for cohomology with finite coefficients.

mod modular;

pub use modular::{kernel_mod, smith_mod, smith_normal_form, solve_mod, LinearSolver, ModLattice, Snf, SnfMod};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

pub type Scalar = BigRational;
pub type Matrix = Vec<Vec<Scalar>>;

pub fn q(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact string form `num/den` (or `num` for integers).
pub fn scalar_to_string(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_scalar(s: &str) -> Option<Scalar> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    Rank { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("vector not in span")]
    NotInSpan,
}

pub fn zero_vec(n: usize) -> Vec<Scalar> {
    vec![Scalar::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Scalar> {
    let mut v = zero_vec(n);
    v[i] = Scalar::one();
    v
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| unit_vec(n, i)).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![zero_vec(m); n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

/// `m · v` for a column vector `v`.
pub fn mat_vec(m: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| {
            let mut acc = Scalar::zero();
            for (a, b) in row.iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    acc += a * b;
                }
            }
            acc
        })
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return vec![];
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(|x| x.is_zero())
}

fn axpy(dst: &mut [Scalar], c: &Scalar, src: &[Scalar]) {
    if c.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d -= c * s;
        }
    }
}

/// Row reduction in place; returns pivot columns. Rows end up in RREF
/// with zero rows removed.
fn rref_in_place(rows: &mut Vec<Vec<Scalar>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                axpy(&mut rows[i], &f, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn det(m: &Matrix) -> Scalar {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Scalar::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Scalar::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        let prow = a[c].clone();
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                axpy(&mut a[i], &f, &prow);
            }
        }
    }
    d
}

pub fn inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.len();
    let mut aug: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit_vec(n, i));
            r
        })
        .collect();
    let piv = rref_in_place(&mut aug, 2 * n);
    if piv.len() < n || piv[n - 1] >= n {
        return Err(LinalgError::Singular);
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Coefficients `c` with `Σ c_i basis_i = v`, for linearly independent rows.
pub fn solve_in_basis(basis: &[Vec<Scalar>], v: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
    let k = basis.len();
    let n = v.len();
    // Augmented system on the transpose: columns = basis vectors.
    let mut rows: Vec<Vec<Scalar>> = (0..n)
        .map(|j| {
            let mut r: Vec<Scalar> = basis.iter().map(|b| b[j].clone()).collect();
            r.push(v[j].clone());
            r
        })
        .collect();
    let piv = rref_in_place(&mut rows, k + 1);
    if piv.contains(&k) {
        return Err(LinalgError::NotInSpan);
    }
    if piv.len() < k {
        return Err(LinalgError::Rank { expected: k, found: piv.len() });
    }
    let mut c = zero_vec(k);
    for (r, &p) in piv.iter().enumerate() {
        c[p] = rows[r][k].clone();
    }
    Ok(c)
}

/// A subspace of `Q^n` in canonical reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(n={}, [", self.ambient)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let s: Vec<String> = r.iter().map(scalar_to_string).collect();
            write!(f, "{}", s.join(" "))?;
        }
        write!(f, "])")
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: vec![], pivots: vec![] }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, rows: identity(ambient), pivots: (0..ambient).collect() }
    }

    pub fn from_rows(ambient: usize, rows: &[Vec<Scalar>]) -> Result<Self, LinalgError> {
        for r in rows {
            if r.len() != ambient {
                return Err(LinalgError::Dimension { expected: ambient, found: r.len() });
            }
        }
        let mut rows = rows.to_vec();
        let pivots = rref_in_place(&mut rows, ambient);
        Ok(Subspace { ambient, rows, pivots })
    }

    /// Span of standard basis vectors `e_i` for `i` in `idx`.
    pub fn span_units(ambient: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = idx.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Subspace {
            ambient,
            rows: v.iter().map(|&i| unit_vec(ambient, i)).collect(),
            pivots: v,
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce `v` modulo this subspace along pivot columns. The result is a
    /// canonical representative of the coset `v + self`.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !w[p].is_zero() {
                let c = w[p].clone();
                axpy(&mut w, &c, row);
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    /// Coordinates in the RREF basis, if `v` lies in the subspace.
    pub fn coords(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Subspace::from_rows(self.ambient, &rows).expect("equal ambient")
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let n = self.ambient;
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(n);
        }
        if self.dim() == n {
            return other.clone();
        }
        if other.dim() == n {
            return self.clone();
        }
        // Zassenhaus: rows [a | a] and [b | 0].
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for a in &self.rows {
            let mut r = a.clone();
            r.extend(a.iter().cloned());
            rows.push(r);
        }
        for b in &other.rows {
            let mut r = b.clone();
            r.extend(zero_vec(n));
            rows.push(r);
        }
        rref_in_place(&mut rows, 2 * n);
        let inter: Vec<Vec<Scalar>> = rows
            .into_iter()
            .filter(|r| is_zero_vec(&r[..n]))
            .map(|r| r[n..].to_vec())
            .collect();
        Subspace::from_rows(n, &inter).expect("ambient")
    }

    /// Image under `m` acting on column vectors.
    pub fn image(&self, m: &Matrix) -> Subspace {
        let rows: Vec<Vec<Scalar>> = self.rows.iter().map(|r| mat_vec(m, r)).collect();
        Subspace::from_rows(m.len(), &rows).expect("ambient")
    }

    /// Canonical basis of `self / sub` (requires `sub ⊆ self`): the rows of
    /// `self` reduced modulo `sub`, then brought to RREF. Each returned
    /// vector is already reduced modulo `sub`.
    pub fn quotient_basis(&self, sub: &Subspace) -> Vec<Vec<Scalar>> {
        let reduced: Vec<Vec<Scalar>> = self.rows.iter().map(|r| sub.reduce(r)).collect();
        let s = Subspace::from_rows(self.ambient, &reduced).expect("ambient");
        s.rows
    }

    /// Canonical complement-free description: the subspace of `v ∈ self`
    /// with `v` supported on coordinates `≥ start`.
    pub fn tail_part(&self, start: usize) -> Subspace {
        let rows: Vec<Vec<Scalar>> = self
            .rows
            .iter()
            .zip(&self.pivots)
            .filter(|(_, &p)| p >= start)
            .map(|(r, _)| r.clone())
            .collect();
        Subspace { ambient: self.ambient, rows, pivots: self.pivots.iter().copied().filter(|&p| p >= start).collect() }
    }
}

pub fn rref(ambient: usize, rows: &[Vec<Scalar>]) -> Result<Subspace, LinalgError> {
    Subspace::from_rows(ambient, rows)
}

pub fn meet_join(a: &Subspace, b: &Subspace) -> Result<(Subspace, Subspace), LinalgError> {
    if a.ambient != b.ambient {
        return Err(LinalgError::Dimension { expected: a.ambient, found: b.ambient });
    }
    Ok((a.intersect(b), a.sum(b)))
}

/// Determinant of the matrix expressing `basis1` in terms of `basis2`.
/// Both families must be bases of `s`.
pub fn basis_change_det(
    s: &Subspace,
    basis1: &[Vec<Scalar>],
    basis2: &[Vec<Scalar>],
) -> Result<Scalar, LinalgError> {
    let k = s.dim();
    for b in [basis1, basis2] {
        if b.len() != k {
            return Err(LinalgError::Rank { expected: k, found: b.len() });
        }
        for v in b {
            if v.len() != s.ambient {
                return Err(LinalgError::Dimension { expected: s.ambient, found: v.len() });
            }
            if !s.contains(v) {
                return Err(LinalgError::NotInSpan);
            }
        }
    }
    let c1: Matrix = basis1.iter().map(|v| s.coords(v).unwrap()).collect();
    let c2: Matrix = basis2.iter().map(|v| s.coords(v).unwrap()).collect();
    let d2 = det(&c2);
    if d2.is_zero() {
        return Err(LinalgError::Rank { expected: k, found: Subspace::from_rows(k, &c2)?.dim() });
    }
    let d1 = det(&c1);
    if d1.is_zero() {
        return Err(LinalgError::Rank { expected: k, found: Subspace::from_rows(k, &c1)?.dim() });
    }
    Ok(d1 / d2)
}

/// Determinant of the family `vecs` (reduced modulo `sub`) against the
/// canonical quotient basis of `whole / sub`. Zero if the family does not
/// span the quotient.
pub fn quotient_family_det(whole: &Subspace, sub: &Subspace, vecs: &[Vec<Scalar>]) -> Scalar {
    let qb = whole.quotient_basis(sub);
    if qb.len() != vecs.len() {
        return Scalar::zero();
    }
    if qb.is_empty() {
        return Scalar::one();
    }
    let qs = Subspace::from_rows(whole.ambient, &qb).expect("ambient");
    let mut m = Vec::with_capacity(vecs.len());
    for v in vecs {
        let r = sub.reduce(v);
        match qs.coords(&r) {
            Some(c) => m.push(c),
            None => return Scalar::zero(),
        }
    }
    det(&m)
}

/// An element of the cyclic group `Z/m`, written additively; models `μ_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicScalar {
    modulus: u64,
    residue: u64,
}

impl CyclicScalar {
    pub fn new(modulus: u64, value: i64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        let r = value.rem_euclid(modulus as i64) as u64;
        CyclicScalar { modulus, residue: r }
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn residue(&self) -> u64 {
        self.residue
    }
    pub fn add(&self, o: &CyclicScalar) -> CyclicScalar {
        assert_eq!(self.modulus, o.modulus);
        CyclicScalar::new(self.modulus, (self.residue + o.residue) as i64)
    }
    pub fn neg(&self) -> CyclicScalar {
        CyclicScalar::new(self.modulus, -(self.residue as i64))
    }
    pub fn order(&self) -> u64 {
        let g = num_integer::gcd(self.residue, self.modulus);
        self.modulus / g
    }
}

impl fmt::Display for CyclicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

pub fn abs_scalar(x: &Scalar) -> Scalar {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn rref_examples() {
        let s = rref(2, &[qv(&[2, 0]), qv(&[0, 3])]).unwrap();
        assert_eq!(s.rows(), &[qv(&[1, 0]), qv(&[0, 1])]);
        let s = rref(2, &[qv(&[1, 1]), qv(&[2, 2])]).unwrap();
        assert_eq!(s.rows(), &[qv(&[1, 1])]);
        let s = rref(3, &[]).unwrap();
        assert_eq!(s.dim(), 0);
    }

    #[test]
    fn meet_join_examples() {
        let a = Subspace::span_units(2, [0]);
        let b = Subspace::span_units(2, [1]);
        let (i, s) = meet_join(&a, &b).unwrap();
        assert_eq!(i.dim(), 0);
        assert_eq!(s, Subspace::full(2));
        let a = rref(3, &[qv(&[1, 1, 0]), qv(&[0, 0, 1])]).unwrap();
        let b = rref(3, &[qv(&[0, 1, 0]), qv(&[0, 0, 1])]).unwrap();
        let (i, s) = meet_join(&a, &b).unwrap();
        assert_eq!(i, Subspace::span_units(3, [2]));
        assert_eq!(s, Subspace::full(3));
        assert!(meet_join(&a, &Subspace::zero(2)).is_err());
    }

    #[test]
    fn basis_change_examples() {
        let s = Subspace::full(1);
        assert_eq!(basis_change_det(&s, &[qv(&[2])], &[qv(&[1])]).unwrap(), q(2));
        let s = Subspace::full(2);
        // shear then swap: rows (0,1),(1,1) against identity
        let b1 = vec![qv(&[0, 1]), qv(&[1, 1])];
        assert_eq!(basis_change_det(&s, &b1, &identity(2)).unwrap(), q(-1));
        assert!(basis_change_det(&s, &[qv(&[1, 0])], &identity(2)).is_err());
    }

    #[test]
    fn inverse_and_det() {
        let m = vec![qv(&[2, 1]), qv(&[1, 1])];
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert_eq!(det(&m), q(1));
        assert!(inverse(&vec![qv(&[1, 2]), qv(&[2, 4])]).is_err());
    }

    #[test]
    fn cyclic_scalar() {
        let a = CyclicScalar::new(6, -1);
        assert_eq!(a.residue(), 5);
        assert_eq!(a.add(&CyclicScalar::new(6, 2)).residue(), 1);
        assert_eq!(CyclicScalar::new(6, 4).order(), 3);
    }

    #[test]
    fn scalar_strings_round_trip() {
        for x in [qf(3, 4), q(-7), qf(-2, 6)] {
            assert_eq!(parse_scalar(&scalar_to_string(&x)).unwrap(), x);
        }
        assert!(parse_scalar("1/0").is_none());
    }
}
