//! Normalized cochains of finite groups with finite abelian coefficients,
//! cohomology by linear algebra over `Z/e`, the Hochschild–Serre filtration
//! and the transgressions `d₂`, `d₃` for a central extension `Ĥ` of `H` by
//! `Z/m` sitting in `1 → H → G → K → 1`.
//!
//! Coefficient modules are written additively and embedded in `(Z/e)^w`
//! as a submodule; a direct sum of cyclic factors `Z/m_i` sits inside via
//! `c ↦ ((e/m_i)·c_i)`. The multiplicative `μ_m ⊂ C^×` of the paper is
//! `Z/m` here.

use crate::exact_linalg::{smith_mod, LinearSolver, ModLattice};
use num_integer::Integer;
use std::collections::HashSet;
use thiserror::Error;

pub type Perm = Vec<usize>;
pub type IntMatrix = Vec<Vec<i64>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomError {
    #[error("invalid group table: {0}")]
    Group(String),
    #[error("invalid module: {0}")]
    Module(String),
    #[error("cochain shape mismatch")]
    Shape,
    #[error("budget exceeded: {needed} table entries > {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("invalid section: {0}")]
    Section(String),
    #[error("not a cocycle")]
    NotCocycle,
    #[error("the cocycle has no extension with the required filtration")]
    NoExtension,
    #[error("lifting search space too large ({0} candidates)")]
    SearchTooLarge(u128),
    #[error("invalid lifting: {0}")]
    Lifting(String),
}

// ---------------------------------------------------------------- groups

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, CohomError> {
        let n = table.len();
        if n == 0 {
            return Err(CohomError::Group("empty table".into()));
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(CohomError::Group("table is not n×n over 0..n".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| CohomError::Group("no identity".into()))?;
        let mut inv = vec![0; n];
        for x in 0..n {
            inv[x] = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| CohomError::Group(format!("element {x} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(CohomError::Group(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { table, inv, identity })
    }

    pub fn trivial() -> Self {
        FiniteGroup { table: vec![vec![0]], inv: vec![0], identity: 0 }
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let inv = (0..n).map(|a| (n - a) % n).collect();
        FiniteGroup { table, inv, identity: 0 }
    }

    /// `A × B` with `(a, b) ↦ a·|B| + b`.
    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let table = (0..na * nb)
            .map(|x| (0..na * nb).map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb)).collect())
            .collect();
        let inv = (0..na * nb).map(|x| a.inv(x / nb) * nb + b.inv(x % nb)).collect();
        FiniteGroup { table, inv, identity: a.identity * nb + b.identity }
    }

    /// `H ⋊ K` with `(h, k)·(h', k') = (h·act_k(h'), kk')`, element
    /// `(h, k) ↦ k·|H| + h`. `act[k]` is a permutation of `H`.
    pub fn semidirect(h: &FiniteGroup, k: &FiniteGroup, act: &[Perm]) -> Result<Self, CohomError> {
        let (nh, nk) = (h.order(), k.order());
        if act.len() != nk || act.iter().any(|p| p.len() != nh) {
            return Err(CohomError::Group("action has the wrong shape".into()));
        }
        let table = (0..nh * nk)
            .map(|x| {
                (0..nh * nk)
                    .map(|y| {
                        let (hx, kx, hy, ky) = (x % nh, x / nh, y % nh, y / nh);
                        k.mul(kx, ky) * nh + h.mul(hx, act[kx][hy])
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }
    pub fn identity(&self) -> usize {
        self.identity
    }
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }
    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
    /// `g h g^{-1}`.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }
    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        let set: HashSet<usize> = elems.iter().copied().collect();
        set.contains(&self.identity) && elems.iter().all(|&a| elems.iter().all(|&b| set.contains(&self.mul(a, self.inv(b)))))
    }

    pub fn is_normal(&self, elems: &[usize]) -> bool {
        let set: HashSet<usize> = elems.iter().copied().collect();
        self.is_subgroup(elems) && self.elements().all(|g| elems.iter().all(|&h| set.contains(&self.conj(g, h))))
    }

    /// Subgroup generated by `gens` (sorted element list).
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut stack = vec![self.identity];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }
}

fn tuple_count(order: usize, n: usize) -> usize {
    order.pow(n as u32)
}

fn decode(order: usize, n: usize, mut idx: usize) -> Vec<usize> {
    let mut t = vec![0; n];
    for i in (0..n).rev() {
        t[i] = idx % order;
        idx /= order;
    }
    t
}

fn encode(order: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &x| acc * order + x)
}

// ---------------------------------------------------------------- modules

#[derive(Clone, Debug)]
pub struct GModule {
    modulus: i64,
    width: usize,
    lattice: ModLattice,
    action: Vec<IntMatrix>,
    factors: Option<Vec<i64>>,
}

impl GModule {
    /// Submodule of `(Z/e)^w` spanned by `generators`, with `g` acting by
    /// `action[g]` (column vectors). The matrices need only be meaningful on
    /// the submodule; they must preserve it and form an action there.
    pub fn new(
        g: &FiniteGroup,
        modulus: i64,
        width: usize,
        generators: &[Vec<i64>],
        action: Vec<IntMatrix>,
    ) -> Result<Self, CohomError> {
        if modulus < 1 || action.len() != g.order() {
            return Err(CohomError::Module("modulus or action count".into()));
        }
        if action.iter().any(|a| a.len() != width || a.iter().any(|r| r.len() != width))
            || generators.iter().any(|v| v.len() != width)
        {
            return Err(CohomError::Module("matrix shape".into()));
        }
        let lattice = ModLattice::from_generators(modulus, width, generators);
        let m = GModule { modulus, width, lattice, action, factors: None };
        let gens = m.lattice.generators();
        for x in g.elements() {
            for v in &gens {
                let gv = m.act(x, v);
                if !m.lattice.contains(&gv) {
                    return Err(CohomError::Module(format!("element {x} does not preserve the module")));
                }
                if x == g.identity() && gv != m.reduce(v) {
                    return Err(CohomError::Module("identity acts nontrivially".into()));
                }
                for y in g.elements() {
                    if m.act(x, &m.act(y, v)) != m.act(g.mul(x, y), v) {
                        return Err(CohomError::Module(format!("not an action at ({x},{y})")));
                    }
                }
            }
        }
        Ok(m)
    }

    /// `Z/m` with trivial action.
    pub fn trivial(g: &FiniteGroup, m: i64) -> Self {
        assert!(m >= 1);
        GModule {
            modulus: m,
            width: 1,
            lattice: ModLattice::from_generators(m, 1, &[vec![1]]),
            action: vec![vec![vec![1]]; g.order()],
            factors: Some(vec![m]),
        }
    }

    /// `⊕ Z/m_i` with `g` acting on coordinates by the integer matrix
    /// `action[g]`; entry `(i, j)` must be a multiple of `m_i / gcd(m_i, m_j)`.
    pub fn from_factors(g: &FiniteGroup, factors: &[i64], action: Vec<IntMatrix>) -> Result<Self, CohomError> {
        if factors.is_empty() || factors.iter().any(|&m| m < 1) {
            return Err(CohomError::Module("factors must be positive".into()));
        }
        let e = factors.iter().fold(1i64, |a, &m| a.lcm(&m));
        let w = factors.len();
        let mut embedded = Vec::with_capacity(action.len());
        for a in &action {
            if a.len() != w || a.iter().any(|r| r.len() != w) {
                return Err(CohomError::Module("matrix shape".into()));
            }
            let mut b = vec![vec![0; w]; w];
            for i in 0..w {
                for j in 0..w {
                    let num = a[i][j] * factors[j];
                    if num.rem_euclid(factors[i]) != 0 {
                        return Err(CohomError::Module(format!("entry ({i},{j}) is not a homomorphism Z/{} → Z/{}", factors[j], factors[i])));
                    }
                    b[i][j] = (num / factors[i]).rem_euclid(e);
                }
            }
            embedded.push(b);
        }
        let gens: Vec<Vec<i64>> = (0..w).map(|i| (0..w).map(|j| if i == j { e / factors[i] } else { 0 }).collect()).collect();
        let mut m = GModule::new(g, e, w, &gens, embedded)?;
        m.factors = Some(factors.to_vec());
        Ok(m)
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn lattice(&self) -> &ModLattice {
        &self.lattice
    }
    pub fn order(&self) -> u128 {
        biguint_to_u128(&self.lattice.order())
    }

    /// Factor coordinates `c ↦` embedded vector (factor modules only).
    pub fn embed(&self, coords: &[i64]) -> Vec<i64> {
        let f = self.factors.as_ref().expect("module was not built from cyclic factors");
        coords.iter().zip(f).map(|(&c, &m)| (c.rem_euclid(m) * (self.modulus / m)) % self.modulus).collect()
    }

    /// Inverse of `embed`.
    pub fn factor_coords(&self, v: &[i64]) -> Vec<i64> {
        let f = self.factors.as_ref().expect("module was not built from cyclic factors");
        v.iter().zip(f).map(|(&x, &m)| x.rem_euclid(self.modulus) / (self.modulus / m)).collect()
    }

    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        v.iter().map(|x| x.rem_euclid(self.modulus)).collect()
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.width]
    }

    pub fn act(&self, g: usize, v: &[i64]) -> Vec<i64> {
        let e = self.modulus as i128;
        self.action[g]
            .iter()
            .map(|row| (row.iter().zip(v).map(|(&a, &x)| a as i128 * x as i128).sum::<i128>().rem_euclid(e)) as i64)
            .collect()
    }

    pub fn is_trivial_action(&self) -> bool {
        let gens = self.lattice.generators();
        (0..self.action.len()).all(|g| gens.iter().all(|v| self.act(g, v) == self.reduce(v)))
    }

    pub fn elements(&self, limit: usize) -> Option<Vec<Vec<i64>>> {
        self.lattice.elements(limit)
    }
}

fn biguint_to_u128(x: &num_bigint::BigUint) -> u128 {
    u128::try_from(x).unwrap_or(u128::MAX)
}

fn vadd(e: i64, a: &mut [i64], b: &[i64], sign: i64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = (*x + sign * *y).rem_euclid(e);
    }
}

// ---------------------------------------------------------------- cochains

/// A function `G^n → M`, stored densely; tuple `(g_1,…,g_n)` has index
/// `Σ g_i·|G|^{n-i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    degree: usize,
    group_order: usize,
    width: usize,
    modulus: i64,
    values: Vec<Vec<i64>>,
}

impl Cochain {
    pub fn zero(group_order: usize, degree: usize, width: usize, modulus: i64) -> Self {
        Cochain { degree, group_order, width, modulus, values: vec![vec![0; width]; tuple_count(group_order, degree)] }
    }

    pub fn zero_for(g: &FiniteGroup, m: &GModule, degree: usize) -> Self {
        Cochain::zero(g.order(), degree, m.width(), m.modulus())
    }

    pub fn from_fn(g: &FiniteGroup, m: &GModule, degree: usize, mut f: impl FnMut(&[usize]) -> Vec<i64>) -> Self {
        let mut c = Cochain::zero_for(g, m, degree);
        for i in 0..c.values.len() {
            let t = decode(g.order(), degree, i);
            c.values[i] = m.reduce(&f(&t));
        }
        c
    }

    /// Width-one cochain with values in `Z/modulus`.
    pub fn scalar_fn(group_order: usize, degree: usize, modulus: i64, mut f: impl FnMut(&[usize]) -> i64) -> Self {
        let mut c = Cochain::zero(group_order, degree, 1, modulus);
        for i in 0..c.values.len() {
            let t = decode(group_order, degree, i);
            c.values[i] = vec![f(&t).rem_euclid(modulus)];
        }
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn group_order(&self) -> usize {
        self.group_order
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn modulus(&self) -> i64 {
        self.modulus
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[Vec<i64>] {
        &self.values
    }
    pub fn tuple(&self, idx: usize) -> Vec<usize> {
        decode(self.group_order, self.degree, idx)
    }
    pub fn get(&self, t: &[usize]) -> &[i64] {
        &self.values[encode(self.group_order, t)]
    }
    /// First coordinate; the value itself for width-one cochains.
    pub fn scalar(&self, t: &[usize]) -> i64 {
        self.values[encode(self.group_order, t)][0]
    }
    pub fn set(&mut self, t: &[usize], v: &[i64]) {
        let e = self.modulus;
        self.values[encode(self.group_order, t)] = v.iter().map(|x| x.rem_euclid(e)).collect();
    }

    fn same_shape(&self, o: &Cochain) -> bool {
        self.degree == o.degree && self.group_order == o.group_order && self.width == o.width && self.modulus == o.modulus
    }

    pub fn add(&self, o: &Cochain) -> Result<Cochain, CohomError> {
        self.combine(o, 1)
    }
    pub fn sub(&self, o: &Cochain) -> Result<Cochain, CohomError> {
        self.combine(o, -1)
    }
    fn combine(&self, o: &Cochain, sign: i64) -> Result<Cochain, CohomError> {
        if !self.same_shape(o) {
            return Err(CohomError::Shape);
        }
        let mut c = self.clone();
        for (a, b) in c.values.iter_mut().zip(&o.values) {
            vadd(self.modulus, a, b, sign);
        }
        Ok(c)
    }
    pub fn scale(&self, k: i64) -> Cochain {
        let mut c = self.clone();
        for v in c.values.iter_mut() {
            for x in v.iter_mut() {
                *x = ((*x as i128 * k as i128).rem_euclid(self.modulus as i128)) as i64;
            }
        }
        c
    }
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0))
    }
    pub fn is_normalized(&self, identity: usize) -> bool {
        (0..self.values.len()).all(|i| !self.tuple(i).contains(&identity) || self.values[i].iter().all(|&x| x == 0))
    }
}

/// `(δf)(g_1,…,g_{n+1}) = g_1·f(g_2,…) + Σ (−1)^i f(…, g_i g_{i+1}, …) + (−1)^{n+1} f(g_1,…,g_n)`.
pub fn coboundary(g: &FiniteGroup, m: &GModule, f: &Cochain) -> Cochain {
    let n = f.degree;
    let e = m.modulus();
    let mut out = Cochain::zero_for(g, m, n + 1);
    let mut t = vec![0usize; n];
    for idx in 0..out.values.len() {
        let x = decode(g.order(), n + 1, idx);
        let mut acc = m.act(x[0], f.get(&x[1..]));
        for i in 0..n {
            t.clear();
            t.extend_from_slice(&x[..i]);
            t.push(g.mul(x[i], x[i + 1]));
            t.extend_from_slice(&x[i + 2..]);
            let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
            vadd(e, &mut acc, f.get(&t), sign);
        }
        let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
        vadd(e, &mut acc, f.get(&x[..n]), sign);
        out.values[idx] = acc;
    }
    out
}

// ---------------------------------------------------------------- complexes

#[derive(Clone, Copy, Debug)]
pub struct ComplexOptions {
    /// Work in the normalized subcomplex (the default) or with all cochains.
    pub normalized: bool,
    /// Upper bound on `|G|^n · |M|`.
    pub budget: u128,
}

impl Default for ComplexOptions {
    fn default() -> Self {
        ComplexOptions { normalized: true, budget: 10_000_000 }
    }
}

fn basis_tuples(g: &FiniteGroup, n: usize, normalized: bool) -> Vec<usize> {
    (0..tuple_count(g.order(), n))
        .filter(|&i| !normalized || !decode(g.order(), n, i).contains(&g.identity()))
        .collect()
}

fn coords(f: &Cochain, tuples: &[usize]) -> Vec<i64> {
    tuples.iter().flat_map(|&i| f.values[i].iter().copied()).collect()
}

fn from_coords(template: &Cochain, tuples: &[usize], v: &[i64]) -> Cochain {
    let mut c = template.clone();
    for x in c.values.iter_mut() {
        x.iter_mut().for_each(|y| *y = 0);
    }
    let w = template.width;
    for (k, &i) in tuples.iter().enumerate() {
        c.values[i] = v[k * w..(k + 1) * w].to_vec();
    }
    c
}

/// Generators of `C^n`: one per (basis tuple, module generator).
fn cochain_generators(g: &FiniteGroup, m: &GModule, n: usize, tuples: &[usize]) -> Vec<Cochain> {
    let gens = m.lattice().generators();
    let mut out = Vec::with_capacity(tuples.len() * gens.len());
    for &i in tuples {
        for v in &gens {
            let mut c = Cochain::zero_for(g, m, n);
            c.values[i] = v.clone();
            out.push(c);
        }
    }
    out
}

/// A subquotient `Z / B` of `(Z/e)^w`, with an invariant-factor basis.
#[derive(Clone, Debug)]
struct Subquotient {
    rank: usize,
    solver: LinearSolver,
    keep: Vec<usize>,
    orders: Vec<i64>,
    v: IntMatrix,
    gens: Vec<Vec<i64>>,
    modulus: i64,
}

impl Subquotient {
    fn new(e: i64, w: usize, z_gens: &[Vec<i64>], b_gens: &[Vec<i64>]) -> Self {
        let z = ModLattice::from_generators(e, w, z_gens).generators();
        let b = ModLattice::from_generators(e, w, b_gens).generators();
        let r = z.len();
        let mut all = z.clone();
        all.extend(b.iter().cloned());
        let solver = LinearSolver::new(e, w, &all);
        let rel: Vec<Vec<i64>> = solver.kernel().generators().into_iter().map(|x| x[..r].to_vec()).collect();
        let snf = smith_mod(e, r, &rel);
        let keep: Vec<usize> = (0..r).filter(|&j| snf.orders[j] != 1).collect();
        let orders = keep.iter().map(|&j| snf.orders[j]).collect();
        let gens = keep
            .iter()
            .map(|&j| {
                let mut y = vec![0i64; w];
                for k in 0..r {
                    if snf.v_inv[j][k] != 0 {
                        for (a, b) in y.iter_mut().zip(&z[k]) {
                            *a = ((*a as i128 + snf.v_inv[j][k] as i128 * *b as i128).rem_euclid(e as i128)) as i64;
                        }
                    }
                }
                y
            })
            .collect();
        Subquotient { rank: r, solver, keep, orders, v: snf.v, gens, modulus: e }
    }

    fn coords(&self, x: &[i64]) -> Option<Vec<i64>> {
        let c = self.solver.solve(x)?;
        let e = self.modulus as i128;
        Some(
            self.keep
                .iter()
                .zip(&self.orders)
                .map(|(&j, &d)| {
                    let s: i128 = (0..self.rank).map(|k| c[k] as i128 * self.v[k][j] as i128).sum::<i128>().rem_euclid(e);
                    (s as i64).rem_euclid(d)
                })
                .collect(),
        )
    }
}

/// `H^n(G, M)` with an invariant-factor basis of representative cocycles.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub degree: usize,
    pub invariant_factors: Vec<i64>,
    pub generators: Vec<Cochain>,
    quotient: Subquotient,
    tuples: Vec<usize>,
    template: Cochain,
    b_solver: LinearSolver,
    below: Vec<Cochain>,
}

impl Cohomology {
    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }

    /// Coordinates of the class of `f` in the invariant-factor basis, or
    /// `None` when `f` is not a cocycle of the complex.
    pub fn class_of(&self, f: &Cochain) -> Option<Vec<i64>> {
        if f.degree != self.degree || f.width != self.template.width || f.modulus != self.template.modulus {
            return None;
        }
        self.quotient.coords(&coords(f, &self.tuples))
    }

    pub fn is_coboundary(&self, f: &Cochain) -> bool {
        self.coboundary_witness(f).is_some()
    }

    /// `x` with `δx = f`.
    pub fn coboundary_witness(&self, f: &Cochain) -> Option<Cochain> {
        if f.degree != self.degree {
            return None;
        }
        let c = self.b_solver.solve(&coords(f, &self.tuples))?;
        let mut x = match self.below.first() {
            Some(b) => Cochain::zero(b.group_order, b.degree, b.width, b.modulus),
            None => return if f.is_zero() { Some(Cochain::zero(f.group_order, 0, f.width, f.modulus)) } else { None },
        };
        for (k, b) in c.iter().zip(&self.below) {
            if *k != 0 {
                x = x.add(&b.scale(*k)).expect("same shape");
            }
        }
        Some(x)
    }

    /// The cocycle `Σ c_j·gen_j`.
    pub fn cocycle(&self, class: &[i64]) -> Cochain {
        let mut x = self.template.clone();
        for (k, g) in class.iter().zip(&self.generators) {
            x = x.add(&g.scale(*k)).expect("same shape");
        }
        x
    }

    pub fn width(&self) -> usize {
        self.quotient.gens.first().map_or(0, |g| g.len())
    }
}

/// `H^n(G, M)` by exact linear algebra over `Z/e`.
pub fn cohomology(g: &FiniteGroup, m: &GModule, n: usize, opts: ComplexOptions) -> Result<Cohomology, CohomError> {
    let needed = (g.order() as u128).saturating_pow(n as u32).saturating_mul(m.order());
    if needed > opts.budget {
        return Err(CohomError::Budget { needed, budget: opts.budget });
    }
    let e = m.modulus();
    let tn = basis_tuples(g, n, opts.normalized);
    let tn1 = basis_tuples(g, n + 1, opts.normalized);
    let gens = cochain_generators(g, m, n, &tn);
    let images: Vec<Vec<i64>> = gens.iter().map(|c| coords(&coboundary(g, m, c), &tn1)).collect();
    let ker = kernel_mod_of(e, tn1.len() * m.width(), &images);
    let z_gens: Vec<Vec<i64>> = ker
        .iter()
        .map(|x| {
            let mut v = vec![0i64; tn.len() * m.width()];
            for (k, c) in x.iter().enumerate() {
                if *c != 0 {
                    let gv = coords(&gens[k], &tn);
                    vadd(e, &mut v, &gv.iter().map(|y| y * c % e).collect::<Vec<_>>(), 1);
                }
            }
            v
        })
        .collect();
    let (below, b_gens): (Vec<Cochain>, Vec<Vec<i64>>) = if n == 0 {
        (Vec::new(), Vec::new())
    } else {
        let tb = basis_tuples(g, n - 1, opts.normalized);
        let below = cochain_generators(g, m, n - 1, &tb);
        let imgs = below.iter().map(|c| coords(&coboundary(g, m, c), &tn)).collect();
        (below, imgs)
    };
    let w = tn.len() * m.width();
    let quotient = Subquotient::new(e, w, &z_gens, &b_gens);
    let template = Cochain::zero_for(g, m, n);
    let generators = quotient.gens.iter().map(|y| from_coords(&template, &tn, y)).collect();
    Ok(Cohomology {
        degree: n,
        invariant_factors: quotient.orders.clone(),
        generators,
        b_solver: LinearSolver::new(e, w, &b_gens),
        quotient,
        tuples: tn,
        template,
        below,
    })
}

/// Every `n`-cocycle of the (normalized or full) complex, or an error
/// when there are more than `limit`.
pub fn cocycles(g: &FiniteGroup, m: &GModule, n: usize, normalized: bool, limit: usize) -> Result<Vec<Cochain>, CohomError> {
    let e = m.modulus();
    let tn = basis_tuples(g, n, normalized);
    let tn1 = basis_tuples(g, n + 1, normalized);
    let gens = cochain_generators(g, m, n, &tn);
    let images: Vec<Vec<i64>> = gens.iter().map(|c| coords(&coboundary(g, m, c), &tn1)).collect();
    let w = tn.len() * m.width();
    let z_gens: Vec<Vec<i64>> = LinearSolver::new(e, tn1.len() * m.width(), &images)
        .kernel()
        .generators()
        .iter()
        .map(|x| {
            let mut v = vec![0i64; w];
            for (k, c) in x.iter().enumerate() {
                if *c != 0 {
                    vadd(e, &mut v, &coords(&gens[k], &tn).iter().map(|y| y * c % e).collect::<Vec<_>>(), 1);
                }
            }
            v
        })
        .collect();
    let z = ModLattice::from_generators(e, w, &z_gens);
    let elems = z.elements(limit).ok_or(CohomError::SearchTooLarge(biguint_to_u128(&z.order())))?;
    let template = Cochain::zero_for(g, m, n);
    Ok(elems.iter().map(|v| from_coords(&template, &tn, v)).collect())
}

fn kernel_mod_of(e: i64, w: usize, images: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if images.is_empty() {
        return Vec::new();
    }
    LinearSolver::new(e, w, images).kernel().generators()
}

/// Whether `f` is `δx` for some normalized `x`, by trying every normalized
/// cochain of degree `n − 1`. Refuses beyond `limit` candidates.
pub fn brute_force_is_coboundary(g: &FiniteGroup, m: &GModule, f: &Cochain, limit: usize) -> Result<bool, CohomError> {
    if f.degree == 0 {
        return Ok(f.is_zero());
    }
    let elems = m.elements(limit).ok_or(CohomError::Budget { needed: m.order(), budget: limit as u128 })?;
    let tuples = basis_tuples(g, f.degree - 1, true);
    let count = (elems.len() as u128).saturating_pow(tuples.len() as u32);
    if count > limit as u128 {
        return Err(CohomError::Budget { needed: count, budget: limit as u128 });
    }
    for mut code in 0..count as usize {
        let mut c = Cochain::zero_for(g, m, f.degree - 1);
        for &i in &tuples {
            c.values[i] = elems[code % elems.len()].clone();
            code /= elems.len();
        }
        if coboundary(g, m, &c) == *f {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Invariant factors of `H^n` by enumerating every normalized cochain of
/// degree `n` and `n − 1`. Refuses when either count exceeds `limit`.
pub fn brute_force_invariant_factors(g: &FiniteGroup, m: &GModule, n: usize, limit: usize) -> Result<Vec<i64>, CohomError> {
    let elems = m.elements(limit).ok_or(CohomError::Budget { needed: m.order(), budget: limit as u128 })?;
    let enumerate = |deg: usize| -> Result<Vec<Cochain>, CohomError> {
        let tuples = basis_tuples(g, deg, true);
        let count = (elems.len() as u128).saturating_pow(tuples.len() as u32);
        if count > limit as u128 {
            return Err(CohomError::Budget { needed: count, budget: limit as u128 });
        }
        let mut out = Vec::with_capacity(count as usize);
        for mut code in 0..count as usize {
            let mut c = Cochain::zero_for(g, m, deg);
            for &i in &tuples {
                c.values[i] = elems[code % elems.len()].clone();
                code /= elems.len();
            }
            out.push(c);
        }
        Ok(out)
    };
    let cocycles: Vec<Cochain> = enumerate(n)?.into_iter().filter(|c| coboundary(g, m, c).is_zero()).collect();
    let boundaries: HashSet<Vec<Vec<i64>>> = if n == 0 {
        std::iter::once(Cochain::zero_for(g, m, 0).values).collect()
    } else {
        enumerate(n - 1)?.iter().map(|c| coboundary(g, m, c).values).collect()
    };
    let e = m.modulus();
    let mut factors_by_prime: Vec<(i64, Vec<u32>)> = Vec::new();
    for p in primes_dividing(e) {
        // log_p |H[p^j]| for growing j until it stabilizes
        let mut logs = vec![0u32];
        let mut j = 1u32;
        loop {
            let pj = p.pow(j);
            let count = cocycles.iter().filter(|z| boundaries.contains(&z.scale(pj).values)).count() / boundaries.len();
            let l = ilog(count as i64, p);
            if l == *logs.last().unwrap() {
                break;
            }
            logs.push(l);
            j += 1;
        }
        // exponents: number of cyclic factors with p-exponent ≥ j is logs[j] − logs[j−1]
        let ge: Vec<u32> = (1..logs.len()).map(|j| logs[j] - logs[j - 1]).collect();
        let mut exps = Vec::new();
        for j in 0..ge.len() {
            let next = ge.get(j + 1).copied().unwrap_or(0);
            for _ in 0..(ge[j] - next) {
                exps.push(j as u32 + 1);
            }
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        factors_by_prime.push((p, exps));
    }
    let len = factors_by_prime.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    let mut out: Vec<i64> = (0..len)
        .map(|i| factors_by_prime.iter().map(|(p, e)| e.get(i).map_or(1, |&x| p.pow(x))).product())
        .collect();
    out.reverse();
    Ok(out)
}

fn primes_dividing(mut n: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn ilog(mut x: i64, p: i64) -> u32 {
    let mut k = 0;
    while x > 1 {
        x /= p;
        k += 1;
    }
    k
}

// ---------------------------------------------------------------- extensions

/// `1 → H → G → K → 1` with a set-theoretic section `s` of `G → K`.
#[derive(Clone, Debug)]
pub struct ExtensionData {
    g: FiniteGroup,
    h: FiniteGroup,
    k: FiniteGroup,
    h_elems: Vec<usize>,
    h_index: Vec<Option<usize>>,
    proj: Vec<usize>,
    section: Vec<usize>,
}

impl ExtensionData {
    /// Cosets are numbered by their smallest element; the default section
    /// picks that element (the identity for the trivial coset).
    pub fn new(g: FiniteGroup, normal: &[usize]) -> Result<Self, CohomError> {
        let mut h_elems = normal.to_vec();
        h_elems.sort_unstable();
        h_elems.dedup();
        if !g.is_normal(&h_elems) {
            return Err(CohomError::NotNormal);
        }
        let mut h_index = vec![None; g.order()];
        for (i, &x) in h_elems.iter().enumerate() {
            h_index[x] = Some(i);
        }
        let nh = h_elems.len();
        let h_table = (0..nh).map(|a| (0..nh).map(|b| h_index[g.mul(h_elems[a], h_elems[b])].unwrap()).collect()).collect();
        let h = FiniteGroup::from_table(h_table)?;
        let mut proj = vec![usize::MAX; g.order()];
        let mut reps = Vec::new();
        // the identity coset first
        let mut order: Vec<usize> = vec![g.identity()];
        order.extend(g.elements().filter(|&x| x != g.identity()));
        for x in order {
            if proj[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            for &y in &h_elems {
                proj[g.mul(x, y)] = c;
            }
        }
        let nk = reps.len();
        let k_table = (0..nk).map(|a| (0..nk).map(|b| proj[g.mul(reps[a], reps[b])]).collect()).collect();
        let k = FiniteGroup::from_table(k_table)?;
        Ok(ExtensionData { g, h, k, h_elems, h_index, proj, section: reps })
    }

    /// `G = H ⋊ K` (see `FiniteGroup::semidirect`) with section `k ↦ (1, k)`.
    pub fn semidirect(h: &FiniteGroup, k: &FiniteGroup, act: &[Perm]) -> Result<Self, CohomError> {
        let g = FiniteGroup::semidirect(h, k, act)?;
        let nh = h.order();
        let normal: Vec<usize> = (0..nh).map(|x| k.identity() * nh + x).collect();
        let base = ExtensionData::new(g, &normal)?;
        let section: Vec<usize> = (0..base.k.order())
            .map(|c| (0..k.order()).map(|kk| kk * nh + h.identity()).find(|&x| base.proj[x] == c).unwrap())
            .collect();
        let mut out = base.with_section(section)?;
        // keep H indexed as given
        let perm_ok = (0..nh).all(|x| out.h_elems[x] == k.identity() * nh + x);
        if perm_ok {
            out.h = h.clone();
        }
        Ok(out)
    }

    pub fn with_section(&self, section: Vec<usize>) -> Result<Self, CohomError> {
        if section.len() != self.k.order() {
            return Err(CohomError::Section("wrong length".into()));
        }
        for (c, &x) in section.iter().enumerate() {
            if x >= self.g.order() || self.proj[x] != c {
                return Err(CohomError::Section(format!("s({c}) is not in its coset")));
            }
        }
        if section[self.k.identity()] != self.g.identity() {
            return Err(CohomError::Section("s(1) must be 1".into()));
        }
        let mut out = self.clone();
        out.section = section;
        Ok(out)
    }

    pub fn g(&self) -> &FiniteGroup {
        &self.g
    }
    pub fn h(&self) -> &FiniteGroup {
        &self.h
    }
    pub fn k(&self) -> &FiniteGroup {
        &self.k
    }
    pub fn h_elements(&self) -> &[usize] {
        &self.h_elems
    }
    /// Element of `G` for the `H`-index `i`.
    pub fn h_to_g(&self, i: usize) -> usize {
        self.h_elems[i]
    }
    pub fn g_to_h(&self, x: usize) -> Option<usize> {
        self.h_index[x]
    }
    pub fn proj(&self, x: usize) -> usize {
        self.proj[x]
    }
    pub fn section(&self, k: usize) -> usize {
        self.section[k]
    }
    pub fn sections(&self) -> &[usize] {
        &self.section
    }
    /// `t(k, k') = s(kk')^{-1} s(k) s(k')`, as an `H`-index.
    pub fn t(&self, k: usize, kp: usize) -> usize {
        let g = &self.g;
        let x = g.mul(g.inv(self.section[self.k.mul(k, kp)]), g.mul(self.section[k], self.section[kp]));
        self.h_index[x].expect("t lands in H")
    }
    /// `ρ_g(h) = g h g^{-1}` on `H`-indices.
    pub fn rho(&self, g: usize, h: usize) -> usize {
        self.h_index[self.g.conj(g, self.h_elems[h])].unwrap()
    }
    pub fn rho_perm(&self, g: usize) -> Perm {
        (0..self.h.order()).map(|h| self.rho(g, h)).collect()
    }
    /// `g ↦ s(π(g))`.
    pub fn rep(&self, x: usize) -> usize {
        self.section[self.proj[x]]
    }
    /// Every section of `G → K` fixing the identity, capped at `limit`.
    pub fn all_sections(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![self.g.identity()]];
        for c in 1..self.k.order() {
            let coset: Vec<usize> = self.g.elements().filter(|&x| self.proj[x] == c).collect();
            let mut next = Vec::new();
            for s in &out {
                for &x in &coset {
                    if next.len() >= limit {
                        break;
                    }
                    let mut t = s.clone();
                    t.push(x);
                    next.push(t);
                }
            }
            out = next;
        }
        // identity coset is numbered 0 by construction
        out
    }
}

/// Pull a cochain on `K` back to `G` along the projection.
pub fn inflate(ext: &ExtensionData, f: &Cochain) -> Cochain {
    let n = f.degree;
    let mut c = Cochain::zero(ext.g.order(), n, f.width, f.modulus);
    for idx in 0..c.values.len() {
        let t: Vec<usize> = decode(ext.g.order(), n, idx).into_iter().map(|x| ext.proj(x)).collect();
        c.values[idx] = f.get(&t).to_vec();
    }
    c
}

/// Restrict a cochain on `G` to `H`.
pub fn restrict_to_h(ext: &ExtensionData, f: &Cochain) -> Cochain {
    let n = f.degree;
    let mut c = Cochain::zero(ext.h.order(), n, f.width, f.modulus);
    for idx in 0..c.values.len() {
        let t: Vec<usize> = decode(ext.h.order(), n, idx).into_iter().map(|x| ext.h_to_g(x)).collect();
        c.values[idx] = f.get(&t).to_vec();
    }
    c
}

/// Evaluate a cochain on `G` at section values: `(k_i) ↦ f(s(k_1),…)`.
pub fn restrict_to_section(ext: &ExtensionData, f: &Cochain) -> Cochain {
    let n = f.degree;
    let mut c = Cochain::zero(ext.k.order(), n, f.width, f.modulus);
    for idx in 0..c.values.len() {
        let t: Vec<usize> = decode(ext.k.order(), n, idx).into_iter().map(|x| ext.section(x)).collect();
        c.values[idx] = f.get(&t).to_vec();
    }
    c
}

/// Largest `p` such that `f` depends on its last `p` arguments only
/// through their `K`-cosets.
pub fn hs_filtration_level(f: &Cochain, ext: &ExtensionData) -> usize {
    let n = f.degree;
    (0..=n)
        .rev()
        .find(|&p| {
            (0..f.values.len()).all(|idx| {
                let mut t = f.tuple(idx);
                for x in t[n - p..].iter_mut() {
                    *x = ext.rep(*x);
                }
                f.get(&t) == f.values[idx].as_slice()
            })
        })
        .unwrap_or(0)
}

// ---------------------------------------------------------------- central extensions

/// `Ĥ = H × Z/m` with `(h, z)(h', z') = (hh', z + z' + a(h, h'))`; element
/// `(h, z) ↦ h·m + z`. The central subgroup is `{(1, z)}`.
#[derive(Clone, Debug)]
pub struct CentralExtension {
    h: FiniteGroup,
    modulus: i64,
    a: Cochain,
    group: FiniteGroup,
}

impl CentralExtension {
    pub fn new(h: FiniteGroup, modulus: i64, a: Cochain) -> Result<Self, CohomError> {
        if a.degree != 2 || a.width != 1 || a.modulus != modulus || a.group_order != h.order() {
            return Err(CohomError::Shape);
        }
        if !a.is_normalized(h.identity()) || !coboundary(&h, &GModule::trivial(&h, modulus), &a).is_zero() {
            return Err(CohomError::NotCocycle);
        }
        let m = modulus as usize;
        let n = h.order() * m;
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let (hx, zx, hy, zy) = (x / m, x % m, y / m, y % m);
                        h.mul(hx, hy) * m + ((zx + zy) as i64 + a.scalar(&[hx, hy])).rem_euclid(modulus) as usize
                    })
                    .collect()
            })
            .collect();
        let group = FiniteGroup::from_table(table)?;
        Ok(CentralExtension { h, modulus, a, group })
    }

    /// Heisenberg group over `Z/p`: `H = (Z/p)²` (element `(x, y) ↦ x·p + y`)
    /// with `a((x, y), (x', y')) = x·y'`.
    pub fn heisenberg(p: usize) -> Self {
        let h = FiniteGroup::product(&FiniteGroup::cyclic(p), &FiniteGroup::cyclic(p));
        let a = Cochain::scalar_fn(p * p, 2, p as i64, |t| ((t[0] / p) * (t[1] % p)) as i64);
        CentralExtension::new(h, p as i64, a).expect("Heisenberg cocycle")
    }

    pub fn base(&self) -> &FiniteGroup {
        &self.h
    }
    pub fn modulus(&self) -> i64 {
        self.modulus
    }
    pub fn cocycle(&self) -> &Cochain {
        &self.a
    }
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }
    pub fn elem(&self, h: usize, z: i64) -> usize {
        h * self.modulus as usize + z.rem_euclid(self.modulus) as usize
    }
    pub fn parts(&self, x: usize) -> (usize, i64) {
        (x / self.modulus as usize, (x % self.modulus as usize) as i64)
    }
    pub fn lift(&self, h: usize) -> usize {
        self.elem(h, 0)
    }
    pub fn central(&self, z: i64) -> usize {
        self.elem(self.h.identity(), z)
    }
    pub fn center_elements(&self) -> Vec<usize> {
        (0..self.modulus).map(|z| self.central(z)).collect()
    }
    pub fn conj_perm(&self, u: usize) -> Perm {
        self.group.elements().map(|x| self.group.conj(u, x)).collect()
    }
    /// `(h, z) ↦ (ρ(h), z + φ(h))`.
    pub fn aut_from_phi(&self, rho: &[usize], phi: &[i64]) -> Perm {
        self.group
            .elements()
            .map(|x| {
                let (h, z) = self.parts(x);
                self.elem(rho[h], z + phi[h])
            })
            .collect()
    }
    pub fn is_hom(&self, p: &[usize]) -> bool {
        let g = &self.group;
        g.elements().all(|x| g.elements().all(|y| p[g.mul(x, y)] == g.mul(p[x], p[y])))
    }

    /// All automorphisms of `Ĥ` lifting the automorphism `rho` of `H` and
    /// fixing the center pointwise: a torsor under `Hom(H, Z/m)`. `None`
    /// when `rho` does not preserve the class of `a`.
    pub fn lifts_of(&self, rho: &[usize], limit: usize) -> Result<Option<Vec<Perm>>, CohomError> {
        let Some((phi0, solver, t1)) = self.lift_particular(rho) else { return Ok(None) };
        let ker = solver.kernel();
        let elems = ker.elements(limit).ok_or(CohomError::SearchTooLarge(biguint_to_u128(&ker.order())))?;
        let homs: Vec<Vec<i64>> = elems
            .into_iter()
            .map(|x| {
                let mut chi = vec![0i64; self.h.order()];
                for (k, &i) in t1.iter().enumerate() {
                    chi[i] = x[k];
                }
                chi
            })
            .collect();
        Ok(Some(
            homs.iter()
                .map(|chi| {
                    let phi: Vec<i64> = phi0.iter().zip(chi).map(|(a, b)| (a + b).rem_euclid(self.modulus)).collect();
                    self.aut_from_phi(rho, &phi)
                })
                .collect(),
        ))
    }

    /// One lift of `rho`, if any.
    pub fn lift_of(&self, rho: &[usize]) -> Option<Perm> {
        let (phi0, _, _) = self.lift_particular(rho)?;
        Some(self.aut_from_phi(rho, &phi0))
    }

    fn lift_particular(&self, rho: &[usize]) -> Option<(Vec<i64>, LinearSolver, Vec<usize>)> {
        let h = &self.h;
        let m = GModule::trivial(h, self.modulus);
        // δφ = a − ρ*a
        let target = Cochain::scalar_fn(h.order(), 2, self.modulus, |t| self.a.scalar(t) - self.a.scalar(&[rho[t[0]], rho[t[1]]]));
        let t1 = basis_tuples(h, 1, true);
        let t2 = basis_tuples(h, 2, true);
        let gens = cochain_generators(h, &m, 1, &t1);
        let imgs: Vec<Vec<i64>> = gens.iter().map(|c| coords(&coboundary(h, &m, c), &t2)).collect();
        let solver = LinearSolver::new(self.modulus, t2.len(), &imgs);
        let sol = solver.solve(&coords(&target, &t2))?;
        let mut phi0 = vec![0i64; h.order()];
        for (k, &i) in t1.iter().enumerate() {
            phi0[i] = sol[k];
        }
        Some((phi0, solver, t1))
    }
}

fn compose(p: &[usize], q: &[usize]) -> Perm {
    // p ∘ q
    q.iter().map(|&x| p[x]).collect()
}

fn invert(p: &[usize]) -> Perm {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x] = i;
    }
    out
}

/// Extend lifts `choice[k]` of `ρ_{s(k)}` to all of `G` by
/// `ρ̃_{s(k)h} = ρ̃_{s(k)} ∘ c_h`.
pub fn standard_liftings(cext: &CentralExtension, ext: &ExtensionData, choice: &[Perm]) -> Vec<Perm> {
    ext.g
        .elements()
        .map(|x| {
            let k = ext.proj(x);
            let h = ext.g_to_h(ext.g.mul(ext.g.inv(ext.section(k)), x)).unwrap();
            compose(&choice[k], &cext.conj_perm(cext.lift(h)))
        })
        .collect()
}

/// Checks the conditions on `ρ̃` (one automorphism of `Ĥ` per element of
/// `G`): it lifts conjugation, fixes the center, restricts to inner
/// automorphisms on `H` and, when `action` is set, is an action of `G`.
pub fn check_liftings(cext: &CentralExtension, ext: &ExtensionData, lifts: &[Perm], action: bool) -> Result<(), CohomError> {
    let hg = cext.group();
    if lifts.len() != ext.g.order() || lifts.iter().any(|p| p.len() != hg.order()) {
        return Err(CohomError::Lifting("wrong shape".into()));
    }
    for (x, p) in lifts.iter().enumerate() {
        if !cext.is_hom(p) || invert(p).len() != p.len() {
            return Err(CohomError::Lifting(format!("ρ̃ of {x} is not an automorphism")));
        }
        for y in hg.elements() {
            let (h, _) = cext.parts(y);
            if cext.parts(p[y]).0 != ext.rho(x, h) {
                return Err(CohomError::Lifting(format!("ρ̃ of {x} does not lift conjugation at {y}")));
            }
        }
        for z in cext.center_elements() {
            if p[z] != z {
                return Err(CohomError::Lifting(format!("ρ̃ of {x} moves the central element {z}")));
            }
        }
        if let Some(h) = ext.g_to_h(x) {
            if *p != cext.conj_perm(cext.lift(h)) {
                return Err(CohomError::Lifting(format!("ρ̃ of {x} ∈ H is not inner")));
            }
        }
    }
    if action {
        for x in ext.g.elements() {
            for y in ext.g.elements() {
                if lifts[ext.g.mul(x, y)] != compose(&lifts[x], &lifts[y]) {
                    return Err(CohomError::Lifting(format!("not an action at ({x},{y})")));
                }
            }
        }
    }
    Ok(())
}

/// One set of lifts of `ρ_{s(k)}` per `k`; `None` (with a witness `k`) when
/// some `ρ_{s(k)}` does not preserve the class of `a`.
pub fn section_lifts(cext: &CentralExtension, ext: &ExtensionData) -> Result<Vec<Perm>, usize> {
    (0..ext.k.order())
        .map(|k| {
            if k == ext.k.identity() {
                Ok((0..cext.group().order()).collect())
            } else {
                cext.lift_of(&ext.rho_perm(ext.section(k))).ok_or(k)
            }
        })
        .collect()
}

/// Search the `Hom(H, Z/m)`-torsors of lifts of each `ρ_{s(k)}` for a
/// choice making `ρ̃` an action of `G`.
pub fn find_action_lifting(cext: &CentralExtension, ext: &ExtensionData, limit: usize) -> Result<Option<Vec<Perm>>, CohomError> {
    Ok(action_liftings(cext, ext, limit, true)?.into_iter().next())
}

/// Every action lifting of the form `ρ̃_{s(k)h} = ρ̃_{s(k)} c_h`.
pub fn all_action_liftings(cext: &CentralExtension, ext: &ExtensionData, limit: usize) -> Result<Vec<Vec<Perm>>, CohomError> {
    action_liftings(cext, ext, limit, false)
}

fn action_liftings(cext: &CentralExtension, ext: &ExtensionData, limit: usize, first_only: bool) -> Result<Vec<Vec<Perm>>, CohomError> {
    let mut options: Vec<Vec<Perm>> = Vec::new();
    let mut total: u128 = 1;
    for k in 0..ext.k.order() {
        if k == ext.k.identity() {
            options.push(vec![(0..cext.group().order()).collect()]);
            continue;
        }
        match cext.lifts_of(&ext.rho_perm(ext.section(k)), limit)? {
            None => return Ok(Vec::new()),
            Some(v) => {
                total = total.saturating_mul(v.len() as u128);
                options.push(v);
            }
        }
    }
    if total > limit as u128 {
        return Err(CohomError::SearchTooLarge(total));
    }
    let mut found = Vec::new();
    for mut code in 0..total as usize {
        let choice: Vec<Perm> = options
            .iter()
            .map(|o| {
                let c = o[code % o.len()].clone();
                code /= o.len();
                c
            })
            .collect();
        let lifts = standard_liftings(cext, ext, &choice);
        if check_liftings(cext, ext, &lifts, true).is_ok() {
            found.push(lifts);
            if first_only {
                break;
            }
        }
    }
    Ok(found)
}

// ---------------------------------------------------------------- d₂

/// `Hom(H, Z/m) ⊂ (Z/m)^{|H|}` (values at every element) as a `K`-module,
/// `(k·χ)(h) = χ(s(k)^{-1} h s(k))`.
pub fn hom_module(ext: &ExtensionData, m: i64) -> GModule {
    let h = &ext.h;
    let triv = GModule::trivial(h, m);
    let t1 = basis_tuples(h, 1, true);
    let t2 = basis_tuples(h, 2, true);
    let gens = cochain_generators(h, &triv, 1, &t1);
    let imgs: Vec<Vec<i64>> = gens.iter().map(|c| coords(&coboundary(h, &triv, c), &t2)).collect();
    let homs: Vec<Vec<i64>> = kernel_mod_of(m, t2.len(), &imgs)
        .into_iter()
        .map(|x| {
            let mut chi = vec![0i64; h.order()];
            for (k, &i) in t1.iter().enumerate() {
                chi[i] = x[k];
            }
            chi
        })
        .collect();
    let n = h.order();
    let action = (0..ext.k.order())
        .map(|k| {
            let s = ext.section(k);
            let sinv = ext.g.inv(s);
            let mut p = vec![vec![0i64; n]; n];
            for (hh, row) in p.iter_mut().enumerate() {
                row[ext.rho(sinv, hh)] = 1;
            }
            p
        })
        .collect();
    GModule::new(&ext.k, m, n, &homs, action).expect("Hom(H, M) is a K-module")
}

#[derive(Clone, Debug)]
pub struct D2Result {
    /// `b(k, k') ∈ Hom(H, Z/m)`, a 2-cocycle of `K`.
    pub b: Cochain,
    pub module: GModule,
    pub h2: Cohomology,
    pub class: Vec<i64>,
    pub transgressive: bool,
}

#[derive(Clone, Debug)]
pub enum D2Outcome {
    /// `ρ_{s(k)}` does not fix the class of `a`.
    NotInvariant { witness: usize },
    Computed(D2Result),
}

/// `b̄(g, g') = (ρ̃_g ρ̃_{g'})^{-1} ρ̃_{gg'}` read as a homomorphism `H → Z/m`.
fn bbar(cext: &CentralExtension, lifts: &[Perm], g: &FiniteGroup, x: usize, y: usize) -> Result<Vec<i64>, CohomError> {
    let p = compose(&invert(&compose(&lifts[x], &lifts[y])), &lifts[g.mul(x, y)]);
    let h = cext.base();
    let mut chi = vec![0i64; h.order()];
    for (hh, c) in chi.iter_mut().enumerate() {
        let (h2, z) = cext.parts(p[cext.lift(hh)]);
        if h2 != hh {
            return Err(CohomError::Lifting("b̄ does not lift the identity".into()));
        }
        *c = z;
    }
    Ok(chi)
}

/// The obstruction `[b] ∈ H²(K, H¹(H, Z/m))` of a `K`-invariant class,
/// `b(k, k') = b̄(s(k')^{-1}, s(k)^{-1})`, from lifts satisfying
/// `ρ̃_{s(k)h} = ρ̃_{s(k)} c_h` (built from `section_lifts` when not given).
pub fn d2_transgression(cext: &CentralExtension, ext: &ExtensionData, lifts: Option<&[Perm]>) -> Result<D2Outcome, CohomError> {
    let lifts = match lifts {
        Some(l) => l.to_vec(),
        None => match section_lifts(cext, ext) {
            Ok(choice) => standard_liftings(cext, ext, &choice),
            Err(k) => return Ok(D2Outcome::NotInvariant { witness: k }),
        },
    };
    check_liftings(cext, ext, &lifts, false)?;
    let module = hom_module(ext, cext.modulus());
    let g = &ext.g;
    let nk = ext.k.order();
    let mut b = Cochain::zero(nk, 2, module.width(), module.modulus());
    for k in 0..nk {
        for kp in 0..nk {
            let chi = bbar(cext, &lifts, g, g.inv(ext.section(kp)), g.inv(ext.section(k)))?;
            b.set(&[k, kp], &chi);
        }
    }
    let h2 = cohomology(&ext.k, &module, 2, ComplexOptions::default())?;
    let class = h2.class_of(&b).ok_or(CohomError::NotCocycle)?;
    let transgressive = class.iter().all(|&c| c == 0);
    Ok(D2Outcome::Computed(D2Result { b, module, h2, class, transgressive }))
}

/// `ã ∈ C²(G)` with `ã|_{H×H} = a` and `δã ∈ F^p C³`, together with
/// generators of the homogeneous solutions (`x|_{H×H} = 0`, `δx ∈ F^p`).
pub fn filtered_extension(cext: &CentralExtension, ext: &ExtensionData, p: usize) -> Result<(Cochain, Vec<Cochain>), CohomError> {
    let g = &ext.g;
    let m = GModule::trivial(g, cext.modulus());
    let e = cext.modulus();
    let pairs = basis_tuples(g, 2, true);
    let free: Vec<usize> = pairs
        .iter()
        .copied()
        .filter(|&i| {
            let t = decode(g.order(), 2, i);
            !(ext.g_to_h(t[0]).is_some() && ext.g_to_h(t[1]).is_some())
        })
        .collect();
    let mut fixed = Cochain::zero_for(g, &m, 2);
    for a in 0..ext.h.order() {
        for b in 0..ext.h.order() {
            fixed.set(&[ext.h_to_g(a), ext.h_to_g(b)], &[cext.cocycle().scalar(&[a, b])]);
        }
    }
    let triples = basis_tuples(g, 3, true);
    let defect = |c: &Cochain| -> Vec<i64> {
        let d = coboundary(g, &m, c);
        triples
            .iter()
            .map(|&i| {
                let mut t = decode(g.order(), 3, i);
                let v = d.values[i][0];
                for x in t[3 - p..].iter_mut() {
                    *x = ext.rep(*x);
                }
                (v - d.get(&t)[0]).rem_euclid(e)
            })
            .collect()
    };
    let units: Vec<Cochain> = free
        .iter()
        .map(|&i| {
            let mut c = Cochain::zero_for(g, &m, 2);
            c.values[i] = vec![1];
            c
        })
        .collect();
    let imgs: Vec<Vec<i64>> = units.iter().map(&defect).collect();
    let solver = LinearSolver::new(e, triples.len(), &imgs);
    let target: Vec<i64> = defect(&fixed).iter().map(|x| (-x).rem_euclid(e)).collect();
    let sol = solver.solve(&target).ok_or(CohomError::NoExtension)?;
    let mut at = fixed;
    for (k, &i) in free.iter().enumerate() {
        at.values[i] = vec![sol[k]];
    }
    let homogeneous = solver
        .kernel()
        .generators()
        .into_iter()
        .map(|x| {
            let mut c = Cochain::zero_for(g, &m, 2);
            for (k, &i) in free.iter().enumerate() {
                c.values[i] = vec![x[k]];
            }
            c
        })
        .filter(|c| !c.is_zero())
        .collect();
    Ok((at, homogeneous))
}

/// `d₂` read off the filtration: `b'(k, k')(h) = δã(h, s(k), s(k'))` for an
/// extension `ã` with `δã ∈ F²`.
pub fn d2_by_filtration(cext: &CentralExtension, ext: &ExtensionData) -> Result<Cochain, CohomError> {
    let (at, _) = filtered_extension(cext, ext, 2)?;
    let g = &ext.g;
    let d = coboundary(g, &GModule::trivial(g, cext.modulus()), &at);
    let nk = ext.k.order();
    let mut b = Cochain::zero(nk, 2, ext.h.order(), cext.modulus());
    for k in 0..nk {
        for kp in 0..nk {
            let chi: Vec<i64> = (0..ext.h.order()).map(|h| d.scalar(&[ext.h_to_g(h), ext.section(k), ext.section(kp)])).collect();
            b.set(&[k, kp], &chi);
        }
    }
    Ok(b)
}

// ---------------------------------------------------------------- d₃

#[derive(Clone, Debug)]
pub struct D3Result {
    /// A 3-cocycle on `K` with values in `Z/m`.
    pub representative: Cochain,
    /// The extension `ã` of `a` to `G` it came from.
    pub atilde: Cochain,
}

#[derive(Clone, Debug)]
pub enum D3Outcome {
    NotInvariant { witness: usize },
    NotTransgressive,
    Computed(D3Result),
}

/// `ã(s(k)h, s(k')h') = t̃(k,k')·ρ̃_{s(k')^{-1}}(h̃)·h̃' / (t(k,k')ρ_{s(k')^{-1}}(h)h', 1)`
/// for an action lifting `ρ̃`, with `h̃ = (h, 0)`.
pub fn atilde_from_lifting(cext: &CentralExtension, ext: &ExtensionData, lifts: &[Perm]) -> Cochain {
    let g = &ext.g;
    let hg = cext.group();
    let decompose = |x: usize| -> (usize, usize) {
        let k = ext.proj(x);
        (k, ext.g_to_h(g.mul(g.inv(ext.section(k)), x)).unwrap())
    };
    Cochain::scalar_fn(g.order(), 2, cext.modulus(), |t| {
        let (k, h) = decompose(t[0]);
        let (kp, hp) = decompose(t[1]);
        let tt = cext.lift(ext.t(k, kp));
        let rh = lifts[g.inv(ext.section(kp))][cext.lift(h)];
        let prod = hg.mul(hg.mul(tt, rh), cext.lift(hp));
        cext.parts(prod).1
    })
}

/// `d₃(a)` as `δã|_{s(K)³}` with `ã` from the lifting formula; the lifting
/// is searched for (up to `limit` candidates) when not supplied.
pub fn d3_transgression(
    cext: &CentralExtension,
    ext: &ExtensionData,
    lifts: Option<&[Perm]>,
    limit: usize,
) -> Result<D3Outcome, CohomError> {
    let lifts = match lifts {
        Some(l) => {
            check_liftings(cext, ext, l, true)?;
            l.to_vec()
        }
        None => {
            if let Err(k) = section_lifts(cext, ext) {
                return Ok(D3Outcome::NotInvariant { witness: k });
            }
            match find_action_lifting(cext, ext, limit)? {
                Some(l) => l,
                None => return Ok(D3Outcome::NotTransgressive),
            }
        }
    };
    let at = atilde_from_lifting(cext, ext, &lifts);
    let g = &ext.g;
    let d = coboundary(g, &GModule::trivial(g, cext.modulus()), &at);
    Ok(D3Outcome::Computed(D3Result { representative: restrict_to_section(ext, &d), atilde: at }))
}

/// `d₃(a)` from the filtration alone: any `ã` with `ã|_{H×H} = a` and
/// `δã ∈ F³C³`, read on `s(K)³`. Also returns the indeterminacy
/// generators `δx|_{s(K)³}` over the homogeneous solutions `x`.
pub fn d3_by_filtration(cext: &CentralExtension, ext: &ExtensionData) -> Result<(D3Result, Vec<Cochain>), CohomError> {
    let (at, homogeneous) = filtered_extension(cext, ext, 3)?;
    let g = &ext.g;
    let m = GModule::trivial(g, cext.modulus());
    let rep = restrict_to_section(ext, &coboundary(g, &m, &at));
    let ind = homogeneous.iter().map(|x| restrict_to_section(ext, &coboundary(g, &m, x))).collect();
    Ok((D3Result { representative: rep, atilde: at }, ind))
}

/// Explicit witness that two 3-cocycles on `K` agree modulo the
/// indeterminacy: `e₁ − e₂ = Σ c_j ind_j + δy`.
#[derive(Clone, Debug)]
pub struct D3Witness {
    pub coefficients: Vec<i64>,
    pub y: Cochain,
}

pub fn d3_difference_witness(k: &FiniteGroup, m: i64, e1: &Cochain, e2: &Cochain, indeterminacy: &[Cochain]) -> Option<D3Witness> {
    let module = GModule::trivial(k, m);
    let t3 = basis_tuples(k, 3, true);
    let t2 = basis_tuples(k, 2, true);
    let units = cochain_generators(k, &module, 2, &t2);
    let mut imgs: Vec<Vec<i64>> = indeterminacy.iter().map(|c| coords(c, &t3)).collect();
    let ni = imgs.len();
    imgs.extend(units.iter().map(|u| coords(&coboundary(k, &module, u), &t3)));
    let diff = e1.sub(e2).ok()?;
    if t3.is_empty() {
        return if diff.is_zero() { Some(D3Witness { coefficients: vec![0; ni], y: Cochain::zero_for(k, &module, 2) }) } else { None };
    }
    // values off the normalized tuples must vanish on both sides
    if !diff.is_normalized(k.identity()) {
        return None;
    }
    let sol = LinearSolver::new(m, t3.len(), &imgs).solve(&coords(&diff, &t3))?;
    let mut y = Cochain::zero_for(k, &module, 2);
    for (c, u) in sol[ni..].iter().zip(&units) {
        y = y.add(&u.scale(*c)).ok()?;
    }
    Some(D3Witness { coefficients: sol[..ni].to_vec(), y })
}

// ---------------------------------------------------------------- samples

/// `Q8 = {i^a j^b}` with element `b·4 + a`, `j i = i^{-1} j`, `j² = i²`.
pub fn quaternion_group() -> FiniteGroup {
    let table = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (a, b, c, d) = (x % 4, x / 4, y % 4, y / 4);
                    let c = if b == 1 { (4 - c) % 4 } else { c };
                    let extra = if b == 1 && d == 1 { 2 } else { 0 };
                    (b ^ d) * 4 + (a + c + extra) % 4
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(table).expect("Q8")
}

/// Heisenberg(Z/2) over `H = (Z/2)²`, with `K = Z/n` (`n` even) acting
/// through `Z/2` by swapping the two factors; `G = H ⋊ K`.
pub fn heisenberg_swap(n: usize) -> (CentralExtension, ExtensionData) {
    assert!(n % 2 == 0);
    let c = CentralExtension::heisenberg(2);
    let swap: Perm = (0..4).map(|x| (x % 2) * 2 + x / 2).collect();
    let act: Vec<Perm> = (0..n).map(|i| if i % 2 == 1 { swap.clone() } else { (0..4).collect() }).collect();
    let ext = ExtensionData::semidirect(c.base(), &FiniteGroup::cyclic(n), &act).expect("semidirect");
    (c, ext)
}

/// `Z/4 = ⟨i⟩ ⊂ Q8` with the central extension `Z/8` (carry cocycle).
pub fn quaternion_carry() -> (CentralExtension, ExtensionData) {
    let ext = ExtensionData::new(quaternion_group(), &[0, 1, 2, 3]).expect("⟨i⟩ is normal");
    let a = Cochain::scalar_fn(4, 2, 2, |t| i64::from(t[0] + t[1] >= 4));
    (CentralExtension::new(ext.h().clone(), 2, a).expect("carry cocycle"), ext)
}
