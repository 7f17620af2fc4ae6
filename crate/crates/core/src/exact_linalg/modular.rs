//! Submodules of `(Z/e)^n` in Howell form, and a small Smith normal form.
//!
//! A `ModLattice` stores one normalized row per pivot column. Every time a
//! pivot `g | e` is installed, the row `(e/g)·row` is fed back into the
//! reduction; this keeps the echelon form closed under the annihilator
//! multiples, so greedy reduction decides membership and the rows with a
//! zero prefix span the intersection with the corresponding coordinate
//! subspace.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

pub(crate) fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

fn mulmod(a: i64, b: i64, m: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(m as i128)) as i64
}

/// A unit `u` of `Z/m` with `u·a ≡ gcd(a, m) (mod m)`.
fn normalizing_unit(a: i64, m: i64) -> i64 {
    let a = a.rem_euclid(m);
    let g = a.gcd(&m);
    let mp = m / g;
    if mp == 1 {
        return 1;
    }
    let (_, s, _) = ext_gcd(a / g, mp);
    let mut u = s.rem_euclid(mp);
    while u.gcd(&m) != 1 {
        u += mp;
    }
    u
}

#[derive(Clone, Debug)]
pub struct ModLattice {
    modulus: i64,
    width: usize,
    rows: Vec<Option<Vec<i64>>>,
}

impl ModLattice {
    pub fn new(modulus: i64, width: usize) -> Self {
        assert!(modulus >= 1);
        ModLattice { modulus, width, rows: vec![None; width] }
    }

    pub fn from_generators(modulus: i64, width: usize, gens: &[Vec<i64>]) -> Self {
        let mut l = ModLattice::new(modulus, width);
        for g in gens {
            l.insert(g);
        }
        l
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }
    pub fn width(&self) -> usize {
        self.width
    }

    fn normalize(&self, v: &mut [i64]) {
        for x in v.iter_mut() {
            *x = x.rem_euclid(self.modulus);
        }
    }

    pub fn insert(&mut self, v: &[i64]) {
        assert_eq!(v.len(), self.width);
        let e = self.modulus;
        let mut work: Vec<Vec<i64>> = vec![v.to_vec()];
        while let Some(mut v) = work.pop() {
            self.normalize(&mut v);
            let mut c = 0;
            while c < self.width {
                if v[c] == 0 {
                    c += 1;
                    continue;
                }
                match &self.rows[c] {
                    None => {
                        let u = normalizing_unit(v[c], e);
                        for x in v.iter_mut() {
                            *x = mulmod(*x, u, e);
                        }
                        let g = v[c];
                        let mult: Vec<i64> = v.iter().map(|&x| mulmod(x, e / g, e)).collect();
                        self.rows[c] = Some(v);
                        if mult.iter().any(|&x| x != 0) {
                            work.push(mult);
                        }
                        break;
                    }
                    Some(r) => {
                        let g = r[c];
                        if v[c] % g == 0 {
                            let f = v[c] / g;
                            for (x, y) in v.iter_mut().zip(r) {
                                *x = (*x - mulmod(f, *y, e)).rem_euclid(e);
                            }
                            c += 1;
                        } else {
                            let r = r.clone();
                            let (d, s, t) = ext_gcd(v[c], g);
                            let (a_d, g_d) = (v[c] / d, g / d);
                            let p: Vec<i64> = v
                                .iter()
                                .zip(&r)
                                .map(|(&x, &y)| (mulmod(s, x, e) + mulmod(t, y, e)).rem_euclid(e))
                                .collect();
                            let qv: Vec<i64> = v
                                .iter()
                                .zip(&r)
                                .map(|(&x, &y)| (mulmod(g_d, x, e) - mulmod(a_d, y, e)).rem_euclid(e))
                                .collect();
                            self.rows[c] = None;
                            work.push(qv);
                            work.push(p);
                            break;
                        }
                    }
                }
            }
        }
    }

    /// Greedy reduction restricted to columns `< upto`; returns the
    /// remainder and whether the prefix was cleared.
    pub fn reduce_prefix(&self, v: &[i64], upto: usize) -> (Vec<i64>, bool) {
        let e = self.modulus;
        let mut v = v.to_vec();
        self.normalize(&mut v);
        for c in 0..upto.min(self.width) {
            if v[c] == 0 {
                continue;
            }
            match &self.rows[c] {
                Some(r) if v[c] % r[c] == 0 => {
                    let f = v[c] / r[c];
                    for (x, y) in v.iter_mut().zip(r) {
                        *x = (*x - mulmod(f, *y, e)).rem_euclid(e);
                    }
                }
                _ => return (v, false),
            }
        }
        (v, true)
    }

    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        self.reduce_prefix(v, self.width).0
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce_prefix(v, self.width).1
    }

    pub fn is_sublattice_of(&self, other: &ModLattice) -> bool {
        self.generators().iter().all(|g| other.contains(g))
    }

    pub fn same_as(&self, other: &ModLattice) -> bool {
        self.is_sublattice_of(other) && other.is_sublattice_of(self)
    }

    /// Rows of the echelon form, keyed by pivot column.
    pub fn pivot_rows(&self) -> impl Iterator<Item = (usize, &Vec<i64>)> {
        self.rows.iter().enumerate().filter_map(|(c, r)| r.as_ref().map(|r| (c, r)))
    }

    pub fn generators(&self) -> Vec<Vec<i64>> {
        self.pivot_rows().map(|(_, r)| r.clone()).collect()
    }

    /// `|Λ / eZ^n|` as a product of `e / pivot` over pivot columns.
    pub fn order(&self) -> BigUint {
        let mut o = BigUint::one();
        for (c, r) in self.pivot_rows() {
            o *= BigUint::from((self.modulus / r[c]) as u64);
        }
        o
    }

    pub fn sum(&self, other: &ModLattice) -> ModLattice {
        let mut l = self.clone();
        for g in other.generators() {
            l.insert(&g);
        }
        l
    }
}

/// Reusable solver for `Σ x_i images[i] ≡ target (mod e)`: the images are
/// echelonized once together with an identity block that records the
/// combination.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    width: usize,
    count: usize,
    lattice: ModLattice,
}

impl LinearSolver {
    pub fn new(modulus: i64, w: usize, images: &[Vec<i64>]) -> Self {
        let k = images.len();
        let mut lattice = ModLattice::new(modulus, w + k);
        for (i, img) in images.iter().enumerate() {
            assert_eq!(img.len(), w);
            let mut row = img.clone();
            row.extend((0..k).map(|j| i64::from(i == j)));
            lattice.insert(&row);
        }
        LinearSolver { width: w, count: k, lattice }
    }

    /// Lattice of `x ∈ Z^k` with `Σ x_i images[i] ≡ 0`. Contains `eZ^k`.
    pub fn kernel(&self) -> ModLattice {
        let mut ker = ModLattice::new(self.lattice.modulus, self.count);
        for (c, r) in self.lattice.pivot_rows() {
            if c >= self.width {
                ker.insert(&r[self.width..]);
            }
        }
        ker
    }

    pub fn solve(&self, target: &[i64]) -> Option<Vec<i64>> {
        let (w, e) = (self.width, self.lattice.modulus);
        let mut t = target.to_vec();
        t.extend(std::iter::repeat(0).take(self.count));
        let (rem, ok) = self.lattice.reduce_prefix(&t, w);
        if !ok || rem[..w].iter().any(|&x| x != 0) {
            return None;
        }
        Some(rem[w..].iter().map(|&x| (-x).rem_euclid(e)).collect())
    }
}

/// Lattice of `x ∈ Z^k` with `Σ x_i images[i] ≡ 0 (mod e)` (all images of
/// width `w`). The result always contains `eZ^k`.
pub fn kernel_mod(modulus: i64, w: usize, images: &[Vec<i64>]) -> ModLattice {
    LinearSolver::new(modulus, w, images).kernel()
}

/// Some `x` with `Σ x_i images[i] ≡ target (mod e)`, if one exists.
pub fn solve_mod(modulus: i64, w: usize, images: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    LinearSolver::new(modulus, w, images).solve(target)
}

impl ModLattice {
    /// All elements, or `None` when there are more than `limit`.
    pub fn elements(&self, limit: usize) -> Option<Vec<Vec<i64>>> {
        let rows: Vec<(i64, &Vec<i64>)> = self.pivot_rows().map(|(c, r)| (self.modulus / r[c], r)).collect();
        let mut total: usize = 1;
        for (k, _) in &rows {
            total = total.checked_mul(*k as usize)?;
            if total > limit {
                return None;
            }
        }
        let e = self.modulus;
        let mut out = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut v = vec![0i64; self.width];
            for (k, r) in &rows {
                let c = (code % *k as usize) as i64;
                code /= *k as usize;
                if c != 0 {
                    for (x, y) in v.iter_mut().zip(r.iter()) {
                        *x = (*x + mulmod(c, *y, e)) % e;
                    }
                }
            }
            out.push(v);
        }
        Some(out)
    }
}

/// Smith form of the quotient `(Z/e)^cols / ⟨rows⟩`: returns the orders
/// `d_j | e` (one per column, possibly 1) and `V`, `V^{-1}` mod `e` such that
/// the new generators `y_j = Σ_k V^{-1}[j][k] x_k` have order `d_j` and
/// `x·V` gives the `y`-coordinates of `x`.
#[derive(Clone, Debug)]
pub struct SnfMod {
    pub orders: Vec<i64>,
    pub v: Vec<Vec<i64>>,
    pub v_inv: Vec<Vec<i64>>,
}

pub fn smith_mod(modulus: i64, cols: usize, rows: &[Vec<i64>]) -> SnfMod {
    let e = modulus;
    let mut a: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(e)).collect()).collect();
    a.retain(|r| r.iter().any(|&x| x != 0));
    let nr = a.len();
    let id = |n: usize| -> Vec<Vec<i64>> { (0..n).map(|i| (0..n).map(|j| i64::from(i == j) % e.max(2)).collect()).collect() };
    let mut v = id(cols);
    let mut vi = id(cols);
    let red = |x: i64| x.rem_euclid(e);
    let mut orders = vec![e; cols];
    let mut t = 0;
    while t < nr.min(cols) {
        // pivot: entry with the smallest gcd against e
        let mut best: Option<(usize, usize, i64)> = None;
        for i in t..nr {
            for j in t..cols {
                if a[i][j] != 0 {
                    let g = a[i][j].gcd(&e);
                    if best.map_or(true, |(_, _, bg)| g < bg) {
                        best = Some((i, j, g));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        a.swap(t, pi);
        if pj != t {
            for r in a.iter_mut() {
                r.swap(t, pj);
            }
            for r in v.iter_mut() {
                r.swap(t, pj);
            }
            vi.swap(t, pj);
        }
        let u = normalizing_unit(a[t][t], e);
        for x in a[t].iter_mut() {
            *x = mulmod(*x, u, e);
        }
        loop {
            let mut dirty = false;
            // column t
            for i in t + 1..nr {
                if a[i][t] == 0 {
                    continue;
                }
                let p = a[t][t];
                if a[i][t] % p == 0 {
                    let f = a[i][t] / p;
                    for j in 0..cols {
                        a[i][j] = red(a[i][j] - mulmod(f, a[t][j], e));
                    }
                } else {
                    let (d, s, tt) = ext_gcd(p, a[i][t]);
                    let (pd, qd) = (p / d, a[i][t] / d);
                    for j in 0..cols {
                        let (x, y) = (a[t][j], a[i][j]);
                        a[t][j] = red(mulmod(s, x, e) + mulmod(tt, y, e));
                        a[i][j] = red(mulmod(pd, y, e) - mulmod(qd, x, e));
                    }
                    dirty = true;
                }
            }
            // row t
            for j in t + 1..cols {
                if a[t][j] == 0 {
                    continue;
                }
                let p = a[t][t];
                if a[t][j] % p == 0 {
                    let f = a[t][j] / p;
                    for r in a.iter_mut() {
                        r[j] = red(r[j] - mulmod(f, r[t], e));
                    }
                    for r in v.iter_mut() {
                        r[j] = red(r[j] - mulmod(f, r[t], e));
                    }
                    for k in 0..cols {
                        vi[t][k] = red(vi[t][k] + mulmod(f, vi[j][k], e));
                    }
                } else {
                    let (d, s, tt) = ext_gcd(p, a[t][j]);
                    let (pd, qd) = (p / d, a[t][j] / d);
                    // columns (t, j) ← (s·c_t + tt·c_j, −qd·c_t + pd·c_j)
                    for r in a.iter_mut().chain(v.iter_mut()) {
                        let (x, y) = (r[t], r[j]);
                        r[t] = red(mulmod(s, x, e) + mulmod(tt, y, e));
                        r[j] = red(mulmod(pd, y, e) - mulmod(qd, x, e));
                    }
                    for k in 0..cols {
                        let (x, y) = (vi[t][k], vi[j][k]);
                        vi[t][k] = red(mulmod(pd, x, e) + mulmod(qd, y, e));
                        vi[j][k] = red(mulmod(s, y, e) - mulmod(tt, x, e));
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the rest of the block
            let p = a[t][t];
            let bad = (t + 1..nr).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in 0..cols {
                        a[t][j] = red(a[t][j] + a[i][j]);
                    }
                }
                None => break,
            }
        }
        orders[t] = a[t][t].gcd(&e);
        t += 1;
    }
    SnfMod { orders, v, v_inv: vi }
}

/// `U · M · V = diag(d_1, …)` with `d_i | d_{i+1}`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diag: Vec<i64>,
    pub u: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
    pub v_inv: Vec<Vec<i64>>,
}

fn ident(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Smith normal form of a small integer matrix (rows × cols).
pub fn smith_normal_form(m: &[Vec<i64>]) -> Snf {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u = ident(rows);
    let mut v = ident(cols);
    let mut vi = ident(cols);
    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        // pick the smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        for r in v.iter_mut() {
            r.swap(t, pj);
        }
        vi.swap(t, pj);
        let mut clean = true;
        // clear column t
        for i in t + 1..rows {
            let f = a[i][t].div_euclid(a[t][t]);
            if f != 0 {
                for j in 0..cols {
                    a[i][j] -= f * a[t][j];
                }
                for j in 0..rows {
                    u[i][j] -= f * u[t][j];
                }
            }
            if a[i][t] != 0 {
                clean = false;
            }
        }
        // clear row t
        for j in t + 1..cols {
            let f = a[t][j].div_euclid(a[t][t]);
            if f != 0 {
                for i in 0..rows {
                    a[i][j] -= f * a[i][t];
                }
                for i in 0..cols {
                    v[i][j] -= f * v[i][t];
                }
                // V^{-1} gets the inverse row operation
                for k in 0..cols {
                    vi[t][k] += f * vi[j][k];
                }
            }
            if a[t][j] != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: if some entry is not divisible by the pivot, fold its row in
        let p = a[t][t];
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if a[i][j] % p != 0 {
                    for k in 0..cols {
                        a[t][k] += a[i][k];
                    }
                    for k in 0..rows {
                        u[t][k] += u[i][k];
                    }
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            if a[t][t] < 0 {
                for k in 0..cols {
                    a[t][k] = -a[t][k];
                }
                for k in 0..rows {
                    u[t][k] = -u[t][k];
                }
            }
            t += 1;
        }
    }
    let diag = (0..n).map(|i| a[i][i] as i64).collect();
    let cv = |m: Vec<Vec<i128>>| m.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect();
    Snf { diag, u: cv(u), v: cv(v), v_inv: cv(vi) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn howell_membership_needs_annihilator_rows() {
        // In (Z/4)^2 the span of (2,1) contains (0,2) = 2·(2,1).
        let l = ModLattice::from_generators(4, 2, &[vec![2, 1]]);
        assert!(l.contains(&[0, 2]));
        assert!(!l.contains(&[0, 1]));
        assert_eq!(l.order(), BigUint::from(4u32));
    }

    #[test]
    fn kernel_and_solve() {
        // x ↦ 2x mod 4 on Z: kernel generated by 2.
        let ker = kernel_mod(4, 1, &[vec![2]]);
        assert!(ker.contains(&[2]));
        assert!(!ker.contains(&[1]));
        assert_eq!(solve_mod(4, 1, &[vec![2]], &[2]).map(|x| x[0] % 2), Some(1));
        assert!(solve_mod(4, 1, &[vec![2]], &[1]).is_none());
    }

    #[test]
    fn snf_small() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![2, 6, 12]);
        let mm: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mul = |a: &Vec<Vec<i128>>, b: &Vec<Vec<i128>>| -> Vec<Vec<i128>> {
            (0..a.len()).map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
        };
        let w = |x: &Vec<Vec<i64>>| x.iter().map(|r| r.iter().map(|&y| y as i128).collect()).collect::<Vec<Vec<i128>>>();
        let d = mul(&mul(&w(&s.u), &mm), &w(&s.v));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[i][j], if i == j { s.diag[i] as i128 } else { 0 });
            }
        }
        let id = mul(&w(&s.v), &w(&s.v_inv));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id[i][j], i128::from(i == j));
            }
        }
    }
}
