//! Gerbal actions of groups on multiplicity-free linear categories, the
//! 3-cocycles they carry, 2-groups, and gerbal pairs `(G, Ĥ)`.
//!
//! A [`LineCategory`] has finitely many objects grouped into blocks of
//! mutually isomorphic objects. Every Hom inside a block is a line with a
//! chosen basis `b_{XY}`, and `b_{YZ} ∘ b_{XY} = comp(X,Y,Z)·b_{XZ}`;
//! Homs across blocks vanish. Scalars live in a [`Unit`] group: nonzero
//! rationals, or roots of unity written as fractions mod 1.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::exact_linalg::{mat_mul, q, Matrix, Scalar, Subspace};
use crate::group_cohomology::{
    coboundary, cohomology, CentralExtension, Cochain, CohomError, ComplexOptions, ExtensionData, FiniteGroup, GModule,
    IntMatrix, Perm,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GerbalError {
    #[error("invalid category: {0}")]
    Category(String),
    #[error("invalid functor: {0}")]
    Functor(String),
    #[error("c({g},{h}) is not natural on the Hom {x} → {y}")]
    Naturality { g: usize, h: usize, x: usize, y: usize },
    #[error("invalid gerbal action: {0}")]
    Spec(String),
    #[error("the comparison at ({0},{1},{2}) is not central")]
    NotCentral(usize, usize, usize),
    #[error("the cocycle value at ({0},{1},{2}) is not in the subgroup")]
    NotInSubgroup(usize, usize, usize),
    #[error("the group sample is not closed under multiplication")]
    NotClosed,
    #[error("the subcategory is not invariant: F_{g} moves object {x} out of it")]
    NotInvariant { g: usize, x: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid lifts: {0}")]
    Lifts(String),
    #[error(transparent)]
    Cohom(#[from] CohomError),
}

// ---------------------------------------------------------------- scalars

/// `exp(2πi·num/den)`, stored reduced with `0 ≤ num < den`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Root {
    num: i64,
    den: i64,
}

impl Root {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "a root of unity needs a positive order");
        let n = num.rem_euclid(den);
        let g = n.gcd(&den);
        Root { num: n / g, den: den / g }
    }
    pub fn num(&self) -> i64 {
        self.num
    }
    pub fn order(&self) -> i64 {
        self.den
    }
    /// `k` with `self = ζ_n^k`, when `self ∈ μ_n`.
    pub fn exponent_mod(&self, n: i64) -> Option<i64> {
        (n % self.den == 0).then(|| self.num * (n / self.den))
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "1")
        } else {
            write!(f, "e({}/{})", self.num, self.den)
        }
    }
}

/// Multiplicative group of scalars used for Hom bases and natural
/// transformations.
pub trait Unit: Clone + PartialEq + fmt::Debug {
    fn one() -> Self;
    fn times(&self, o: &Self) -> Self;
    fn inverse(&self) -> Self;
    /// The value as a root of unity, when it is one.
    fn as_root(&self) -> Option<Root>;
    fn from_root(r: Root) -> Option<Self>;
    fn is_unit(&self) -> bool {
        true
    }
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    fn over(&self, o: &Self) -> Self {
        self.times(&o.inverse())
    }
}

impl Unit for Root {
    fn one() -> Self {
        Root::new(0, 1)
    }
    fn times(&self, o: &Self) -> Self {
        Root::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
    fn inverse(&self) -> Self {
        Root::new(-self.num, self.den)
    }
    fn as_root(&self) -> Option<Root> {
        Some(*self)
    }
    fn from_root(r: Root) -> Option<Self> {
        Some(r)
    }
}

impl Unit for Scalar {
    fn one() -> Self {
        q(1)
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn inverse(&self) -> Self {
        q(1) / self
    }
    fn as_root(&self) -> Option<Root> {
        if *self == q(1) {
            Some(Root::new(0, 1))
        } else if *self == q(-1) {
            Some(Root::new(1, 2))
        } else {
            None
        }
    }
    fn from_root(r: Root) -> Option<Self> {
        match r.den {
            1 => Some(q(1)),
            2 => Some(q(-1)),
            _ => None,
        }
    }
    fn is_unit(&self) -> bool {
        !self.is_zero()
    }
}

// ---------------------------------------------------------------- categories

#[derive(Clone, Debug, PartialEq)]
pub struct LineCategory<U> {
    labels: Vec<String>,
    block: Vec<usize>,
    pos: Vec<usize>,
    members: Vec<Vec<usize>>,
    comp: Vec<Vec<U>>,
}

/// `scalar · b_{src,tgt}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism<U> {
    pub src: usize,
    pub tgt: usize,
    pub scalar: U,
}

impl<U: Unit> LineCategory<U> {
    /// Blocks are numbered `0..b` without gaps; `comp(x, y, z)` is read for
    /// every triple inside a block.
    pub fn new(labels: Vec<String>, block: Vec<usize>, comp: impl Fn(usize, usize, usize) -> U) -> Result<Self, GerbalError> {
        if labels.len() != block.len() {
            return Err(GerbalError::Category("one block number per label".into()));
        }
        let nb = block.iter().max().map_or(0, |b| b + 1);
        let mut members = vec![Vec::new(); nb];
        let mut pos = vec![0; block.len()];
        for (x, &b) in block.iter().enumerate() {
            pos[x] = members[b].len();
            members[b].push(x);
        }
        if members.iter().any(|m| m.is_empty()) {
            return Err(GerbalError::Category("block numbers must be contiguous".into()));
        }
        let comp = members
            .iter()
            .map(|m| {
                let mut v = Vec::with_capacity(m.len().pow(3));
                for &x in m {
                    for &y in m {
                        for &z in m {
                            v.push(comp(x, y, z));
                        }
                    }
                }
                v
            })
            .collect();
        let cat = LineCategory { labels, block, pos, members, comp };
        cat.validate()?;
        Ok(cat)
    }

    fn validate(&self) -> Result<(), GerbalError> {
        for m in &self.members {
            for &x in m {
                for &y in m {
                    if !self.comp(x, x, y).is_one() || !self.comp(x, y, y).is_one() {
                        return Err(GerbalError::Category(format!("identities do not act as 1 on {} → {}", self.labels[x], self.labels[y])));
                    }
                    for &z in m {
                        if !self.comp(x, y, z).is_unit() {
                            return Err(GerbalError::Category("zero composition scalar".into()));
                        }
                    }
                }
            }
            for &x in m {
                for &y in m {
                    for &z in m {
                        for &w in m {
                            let lhs = self.comp(x, y, z).times(self.comp(x, z, w));
                            let rhs = self.comp(y, z, w).times(self.comp(x, y, w));
                            if lhs != rhs {
                                return Err(GerbalError::Category(format!("composition is not associative on ({x},{y},{z},{w})")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Every object alone in its block.
    pub fn discrete(labels: Vec<String>) -> Self {
        let block = (0..labels.len()).collect();
        Self::new(labels, block, |_, _, _| U::one()).expect("discrete category")
    }

    /// All composition scalars equal to 1.
    pub fn trivialized(labels: Vec<String>, block: Vec<usize>) -> Result<Self, GerbalError> {
        Self::new(labels, block, |_, _, _| U::one())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }
    pub fn block_of(&self, x: usize) -> usize {
        self.block[x]
    }
    pub fn block_count(&self) -> usize {
        self.members.len()
    }
    pub fn members(&self, b: usize) -> &[usize] {
        &self.members[b]
    }
    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.block[x] == self.block[y]
    }

    pub fn comp(&self, x: usize, y: usize, z: usize) -> &U {
        let b = self.block[x];
        assert!(self.block[y] == b && self.block[z] == b, "objects in different blocks");
        let n = self.members[b].len();
        &self.comp[b][(self.pos[x] * n + self.pos[y]) * n + self.pos[z]]
    }

    pub fn basis(&self, x: usize, y: usize) -> Option<Morphism<U>> {
        self.same_block(x, y).then(|| Morphism { src: x, tgt: y, scalar: U::one() })
    }

    /// `g ∘ f`.
    pub fn compose(&self, f: &Morphism<U>, g: &Morphism<U>) -> Result<Morphism<U>, GerbalError> {
        if f.tgt != g.src || !self.same_block(f.src, g.tgt) {
            return Err(GerbalError::Category("morphisms are not composable".into()));
        }
        Ok(Morphism { src: f.src, tgt: g.tgt, scalar: f.scalar.times(&g.scalar).times(self.comp(f.src, f.tgt, g.tgt)) })
    }

    /// Full subcategory on `objects` (in that order), with the map from its
    /// blocks to the blocks of `self`.
    pub fn full_subcategory(&self, objects: &[usize]) -> Result<(Self, Vec<usize>), GerbalError> {
        let mut seen = vec![false; self.len()];
        let mut parent_blocks = Vec::new();
        let mut block = Vec::with_capacity(objects.len());
        for &x in objects {
            if x >= self.len() || std::mem::replace(&mut seen[x], true) {
                return Err(GerbalError::Category(format!("object {x} missing or repeated")));
            }
            let b = self.block[x];
            let nb = match parent_blocks.iter().position(|&p| p == b) {
                Some(i) => i,
                None => {
                    parent_blocks.push(b);
                    parent_blocks.len() - 1
                }
            };
            block.push(nb);
        }
        let labels = objects.iter().map(|&x| self.labels[x].clone()).collect();
        let sub = Self::new(labels, block, |a, b, c| self.comp(objects[a], objects[b], objects[c]).clone())?;
        Ok((sub, parent_blocks))
    }
}

// ---------------------------------------------------------------- functors

/// A linear auto-equivalence: an object map plus `F(b_{XY}) = f(X,Y)·b_{FX,FY}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoEquiv<U> {
    map: Vec<usize>,
    scalars: Vec<Option<U>>,
}

impl<U: Unit> AutoEquiv<U> {
    pub fn new(cat: &LineCategory<U>, map: Vec<usize>, f: impl Fn(usize, usize) -> U) -> Result<Self, GerbalError> {
        let n = cat.len();
        if map.len() != n || map.iter().any(|&y| y >= n) {
            return Err(GerbalError::Functor("object map has the wrong shape".into()));
        }
        let mut image = vec![false; cat.block_count()];
        for b in 0..cat.block_count() {
            let m = cat.members(b);
            let target = cat.block_of(map[m[0]]);
            if m.iter().any(|&x| cat.block_of(map[x]) != target) {
                return Err(GerbalError::Functor(format!("block {b} is split by the object map")));
            }
            if std::mem::replace(&mut image[target], true) {
                return Err(GerbalError::Functor("two blocks have the same image".into()));
            }
        }
        let mut scalars = vec![None; n * n];
        for b in 0..cat.block_count() {
            for &x in cat.members(b) {
                for &y in cat.members(b) {
                    let s = f(x, y);
                    if !s.is_unit() {
                        return Err(GerbalError::Functor(format!("zero scalar on {x} → {y}")));
                    }
                    scalars[x * n + y] = Some(s);
                }
            }
        }
        let out = AutoEquiv { map, scalars };
        for b in 0..cat.block_count() {
            let m = cat.members(b);
            for &x in m {
                for &y in m {
                    for &z in m {
                        let lhs = out.scalar(x, y).times(out.scalar(y, z)).times(cat.comp(out.map[x], out.map[y], out.map[z]));
                        let rhs = cat.comp(x, y, z).times(out.scalar(x, z));
                        if lhs != rhs {
                            return Err(GerbalError::Functor(format!("not functorial on ({x},{y},{z})")));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn identity(cat: &LineCategory<U>) -> Self {
        Self::new(cat, (0..cat.len()).collect(), |_, _| U::one()).expect("identity functor")
    }

    pub fn object(&self, x: usize) -> usize {
        self.map[x]
    }
    pub fn objects(&self) -> &[usize] {
        &self.map
    }
    pub fn scalar(&self, x: usize, y: usize) -> &U {
        self.scalars[x * self.map.len() + y].as_ref().expect("objects in different blocks")
    }

    pub fn apply(&self, m: &Morphism<U>) -> Morphism<U> {
        Morphism { src: self.map[m.src], tgt: self.map[m.tgt], scalar: m.scalar.times(self.scalar(m.src, m.tgt)) }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &AutoEquiv<U>) -> AutoEquiv<U> {
        let n = self.map.len();
        let map = g.map.iter().map(|&y| self.map[y]).collect();
        let scalars = (0..n * n)
            .map(|i| {
                let (x, y) = (i / n, i % n);
                g.scalars[i].as_ref().map(|s| s.times(self.scalar(g.map[x], g.map[y])))
            })
            .collect();
        AutoEquiv { map, scalars }
    }

    /// Image block of each block.
    pub fn block_map(&self, cat: &LineCategory<U>) -> Vec<usize> {
        (0..cat.block_count()).map(|b| cat.block_of(self.map[cat.members(b)[0]])).collect()
    }
}

/// Naturality of `η: F ⇒ F'` with components `comps[x]·b_{Fx,F'x}`, against
/// every Hom basis vector; on failure, the offending Hom.
pub fn check_natural<U: Unit>(
    cat: &LineCategory<U>,
    f: &AutoEquiv<U>,
    fp: &AutoEquiv<U>,
    comps: &[U],
) -> Result<(), (usize, usize)> {
    for x in 0..cat.len() {
        if !cat.same_block(f.object(x), fp.object(x)) || !comps[x].is_unit() {
            return Err((x, x));
        }
    }
    for b in 0..cat.block_count() {
        for &x in cat.members(b) {
            for &y in cat.members(b) {
                let (fx, fy, gx, gy) = (f.object(x), f.object(y), fp.object(x), fp.object(y));
                let lhs = fp.scalar(x, y).times(&comps[x]).times(cat.comp(fx, gx, gy));
                let rhs = comps[y].times(f.scalar(x, y)).times(cat.comp(fx, fy, gy));
                if lhs != rhs {
                    return Err((x, y));
                }
            }
        }
    }
    Ok(())
}

/// `Z(C)^×`: one scalar unit per block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenterUnits {
    pub rank: usize,
}

pub fn center_units<U: Unit>(cat: &LineCategory<U>) -> CenterUnits {
    CenterUnits { rank: cat.block_count() }
}

impl CenterUnits {
    /// The central element given by a per-object family of automorphisms,
    /// or the Hom on which the family fails to be natural.
    pub fn from_family<U: Unit>(&self, cat: &LineCategory<U>, family: &[U]) -> Result<Vec<U>, (usize, usize)> {
        let id = AutoEquiv::identity(cat);
        check_natural(cat, &id, &id, family)?;
        Ok((0..cat.block_count()).map(|b| family[cat.members(b)[0]].clone()).collect())
    }

    pub fn family<U: Unit>(&self, cat: &LineCategory<U>, a: &[U]) -> Vec<U> {
        (0..cat.len()).map(|x| a[cat.block_of(x)].clone()).collect()
    }
}

// ---------------------------------------------------------------- groups

/// A finite group, or a finite sample of an infinite group with the
/// products that stay inside the sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSample {
    labels: Vec<String>,
    table: Vec<Vec<Option<usize>>>,
    identity: usize,
    word_cap: Option<usize>,
}

impl GroupSample {
    pub fn from_group(g: &FiniteGroup) -> Self {
        GroupSample {
            labels: g.elements().map(|x| x.to_string()).collect(),
            table: g.table().iter().map(|r| r.iter().map(|&y| Some(y)).collect()).collect(),
            identity: g.identity(),
            word_cap: None,
        }
    }

    /// Checks the identity row and column and associativity wherever both
    /// sides are defined.
    pub fn partial(
        labels: Vec<String>,
        table: Vec<Vec<Option<usize>>>,
        identity: usize,
        word_cap: Option<usize>,
    ) -> Result<Self, GerbalError> {
        let n = labels.len();
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().flatten().any(|&y| y >= n)) || identity >= n {
            return Err(GerbalError::Spec("sample table has the wrong shape".into()));
        }
        for x in 0..n {
            if table[identity][x] != Some(x) || table[x][identity] != Some(x) {
                return Err(GerbalError::Spec(format!("identity law fails at {}", labels[x])));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let l = table[a][b].and_then(|ab| table[ab][c]);
                    let r = table[b][c].and_then(|bc| table[a][bc]);
                    if let (Some(l), Some(r)) = (l, r) {
                        if l != r {
                            return Err(GerbalError::Spec(format!("sample product is not associative at ({a},{b},{c})")));
                        }
                    }
                }
            }
        }
        Ok(GroupSample { labels, table, identity, word_cap })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }
    pub fn identity(&self) -> usize {
        self.identity
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn word_cap(&self) -> Option<usize> {
        self.word_cap
    }
    pub fn mul(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a][b]
    }
    pub fn is_closed(&self) -> bool {
        self.table.iter().all(|r| r.iter().all(Option::is_some))
    }
    pub fn to_group(&self) -> Option<FiniteGroup> {
        if !self.is_closed() {
            return None;
        }
        FiniteGroup::from_table(self.table.iter().map(|r| r.iter().map(|y| y.unwrap()).collect()).collect()).ok()
    }
}

// ---------------------------------------------------------------- gerbal actions

/// Functors `F_g` and isomorphisms `c(g,h): F_g F_h ⇒ F_{gh}` (one scalar
/// per object, relative to `b_{F_gF_h X, F_{gh} X}`).
#[derive(Clone, Debug)]
pub struct GerbalActionSpec<U> {
    cat: LineCategory<U>,
    group: GroupSample,
    functors: Vec<AutoEquiv<U>>,
    c: Vec<Option<Vec<U>>>,
}

impl<U: Unit> GerbalActionSpec<U> {
    /// `c(g, h)` is requested for every pair whose product is in the sample.
    pub fn new(
        cat: LineCategory<U>,
        group: GroupSample,
        functors: Vec<AutoEquiv<U>>,
        c: impl Fn(usize, usize) -> Vec<U>,
    ) -> Result<Self, GerbalError> {
        let n = group.order();
        if functors.len() != n || functors.iter().any(|f| f.objects().len() != cat.len()) {
            return Err(GerbalError::Spec("one functor on the category per group element".into()));
        }
        let e = group.identity();
        if let Some(x) = (0..cat.len()).find(|&x| !cat.same_block(functors[e].object(x), x)) {
            return Err(GerbalError::Spec(format!("F_e is not isomorphic to the identity at object {x}")));
        }
        let mut cs = vec![None; n * n];
        for g in 0..n {
            for h in 0..n {
                let Some(gh) = group.mul(g, h) else { continue };
                let comps = c(g, h);
                if comps.len() != cat.len() {
                    return Err(GerbalError::Spec(format!("c({g},{h}) needs one scalar per object")));
                }
                let fgh = functors[g].compose(&functors[h]);
                check_natural(&cat, &fgh, &functors[gh], &comps).map_err(|(x, y)| GerbalError::Naturality { g, h, x, y })?;
                cs[g * n + h] = Some(comps);
            }
        }
        Ok(GerbalActionSpec { cat, group, functors, c: cs })
    }

    pub fn category(&self) -> &LineCategory<U> {
        &self.cat
    }
    pub fn group(&self) -> &GroupSample {
        &self.group
    }
    pub fn functor(&self, g: usize) -> &AutoEquiv<U> {
        &self.functors[g]
    }
    pub fn c(&self, g: usize, h: usize) -> Option<&[U]> {
        self.c[g * self.group.order() + h].as_deref()
    }

    /// `F_e = id` on the nose and `c(e, g) = c(g, e) = 1`.
    pub fn is_unital(&self) -> bool {
        let e = self.group.identity();
        self.functors[e] == AutoEquiv::identity(&self.cat)
            && (0..self.group.order()).all(|g| {
                self.c(e, g).map_or(true, |v| v.iter().all(U::is_one)) && self.c(g, e).map_or(true, |v| v.iter().all(U::is_one))
            })
    }

    /// `ρ_g` on `Z(C)^×`: `ρ_g(a)_{F_g X} = F_g(a_X)`.
    pub fn center_action(&self, g: usize, a: &[U]) -> Vec<U> {
        let bm = self.functors[g].block_map(&self.cat);
        let mut out = vec![U::one(); a.len()];
        for (b, &t) in bm.iter().enumerate() {
            out[t] = a[b].clone();
        }
        out
    }

    /// `c'(g,h) = c(g,h)·d(g,h)` for central `d(g,h)` (one unit per block).
    pub fn rescale(&self, d: impl Fn(usize, usize) -> Vec<U>) -> Result<Self, GerbalError> {
        let n = self.group.order();
        let table: HashMap<(usize, usize), Vec<U>> = (0..n * n)
            .filter(|i| self.c[*i].is_some())
            .map(|i| {
                let (g, h) = (i / n, i % n);
                let gh = self.group.mul(g, h).unwrap();
                let dv = d(g, h);
                let v = (0..self.cat.len())
                    .map(|x| self.c(g, h).unwrap()[x].times(&dv[self.cat.block_of(self.functors[gh].object(x))]))
                    .collect();
                ((g, h), v)
            })
            .collect();
        Self::new(self.cat.clone(), self.group.clone(), self.functors.clone(), |g, h| table[&(g, h)].clone())
    }

    /// Multiplicative `δd(g₁,g₂,g₃) = ρ_{g₁}d(g₂,g₃)·d(g₁,g₂g₃)·d(g₁g₂,g₃)⁻¹·d(g₁,g₂)⁻¹`.
    pub fn coboundary_of(&self, d: impl Fn(usize, usize) -> Vec<U>) -> Cocycle3<U> {
        let n = self.group.order();
        let mut values = vec![None; n * n * n];
        for (g1, g2, g3, g12, g23, _) in defined_triples(&self.group) {
            let r = self.center_action(g1, &d(g2, g3));
            let (x, y, z) = (d(g1, g23), d(g12, g3), d(g1, g2));
            values[(g1 * n + g2) * n + g3] =
                Some((0..r.len()).map(|b| r[b].times(&x[b]).over(&y[b]).over(&z[b])).collect());
        }
        Cocycle3 { order: n, values }
    }

    /// `Z(C)^×`'s `μ_n`-torsion `(Z/n)^{blocks}` as a `G`-module.
    pub fn center_module(&self, n: i64) -> Result<GModule, GerbalError> {
        let g = self.group.to_group().ok_or(GerbalError::NotClosed)?;
        let nb = self.cat.block_count();
        let action = g.elements().map(|x| permutation_matrix(&self.functors[x].block_map(&self.cat))).collect();
        let gens: Vec<Vec<i64>> = (0..nb).map(|i| (0..nb).map(|j| i64::from(i == j)).collect()).collect();
        Ok(GModule::new(&g, n, nb, &gens, action)?)
    }

    /// `l_x = id` and `r_x(a) = F_x ∘ a`, read back through the per-object
    /// families on the images `F_x(X)`.
    pub fn pi0_presentation(&self, n: i64) -> Result<MonoidalPresentation, GerbalError> {
        let g = self.group.to_group().ok_or(GerbalError::NotClosed)?;
        let nb = self.cat.block_count();
        let center = center_units(&self.cat);
        let mut r = Vec::with_capacity(g.order());
        for x in g.elements() {
            let f = &self.functors[x];
            let mut m = vec![vec![0i64; nb]; nb];
            for j in 0..nb {
                let a: Vec<U> = (0..nb)
                    .map(|b| if b == j { U::from_root(Root::new(1, n)).expect("μ_n in the unit group") } else { U::one() })
                    .collect();
                let mut family = vec![U::one(); self.cat.len()];
                for y in 0..self.cat.len() {
                    family[f.object(y)] = a[self.cat.block_of(y)].clone();
                }
                let image = center.from_family(&self.cat, &family).map_err(|_| GerbalError::Spec("F_x(a) is not central".into()))?;
                for (i, v) in image.iter().enumerate() {
                    m[i][j] = v.as_root().and_then(|r| r.exponent_mod(n)).expect("μ_n is preserved");
                }
            }
            r.push(m);
        }
        let id: IntMatrix = (0..nb).map(|i| (0..nb).map(|j| i64::from(i == j)).collect()).collect();
        Ok(MonoidalPresentation { l: vec![id; g.order()], r, pi0: g, factors: vec![n; nb] })
    }
}

fn permutation_matrix(p: &[usize]) -> IntMatrix {
    let n = p.len();
    let mut m = vec![vec![0i64; n]; n];
    for (j, &i) in p.iter().enumerate() {
        m[i][j] = 1;
    }
    m
}

/// Triples `(g₁,g₂,g₃,g₁g₂,g₂g₃,g₁g₂g₃)` with every product in the sample.
fn defined_triples(g: &GroupSample) -> Vec<(usize, usize, usize, usize, usize, usize)> {
    let n = g.order();
    let mut out = Vec::new();
    for g1 in 0..n {
        for g2 in 0..n {
            let Some(g12) = g.mul(g1, g2) else { continue };
            for g3 in 0..n {
                let (Some(g23), Some(g123)) = (g.mul(g2, g3), g.mul(g12, g3)) else { continue };
                if g.mul(g1, g23) == Some(g123) {
                    out.push((g1, g2, g3, g12, g23, g123));
                }
            }
        }
    }
    out
}

/// A `Z(C)^×`-valued function on the defined triples of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle3<U> {
    order: usize,
    values: Vec<Option<Vec<U>>>,
}

impl<U: Unit> Cocycle3<U> {
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn get(&self, g1: usize, g2: usize, g3: usize) -> Option<&[U]> {
        self.values[(g1 * self.order + g2) * self.order + g3].as_deref()
    }
    pub fn defined(&self) -> usize {
        self.values.iter().flatten().count()
    }
    pub fn is_trivial(&self) -> bool {
        self.values.iter().flatten().all(|v| v.iter().all(U::is_one))
    }
    pub fn times(&self, o: &Cocycle3<U>) -> Cocycle3<U> {
        let values = self
            .values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.times(y)).collect()),
                _ => None,
            })
            .collect();
        Cocycle3 { order: self.order, values }
    }
    /// Projection to the blocks `keep` of the center.
    pub fn restrict(&self, keep: &[usize]) -> Cocycle3<U> {
        let values = self.values.iter().map(|v| v.as_ref().map(|v| keep.iter().map(|&b| v[b].clone()).collect())).collect();
        Cocycle3 { order: self.order, values }
    }
    /// Least `n` with every value in `μ_n`, when every value is a root of unity.
    pub fn root_order(&self) -> Option<i64> {
        let mut n = 1i64;
        for v in self.values.iter().flatten().flatten() {
            n = n.lcm(&v.as_root()?.order());
        }
        Some(n)
    }

    /// As a cochain with values in `(Z/n)^{blocks}`; needs every triple.
    pub fn to_cochain(&self, n: i64) -> Result<Cochain, GerbalError> {
        let width = self.values.iter().flatten().next().map_or(0, Vec::len);
        let mut c = Cochain::zero(self.order, 3, width, n);
        for i in 0..self.values.len() {
            let t = [i / (self.order * self.order), (i / self.order) % self.order, i % self.order];
            let v = self.values[i].as_ref().ok_or(GerbalError::NotClosed)?;
            let e: Option<Vec<i64>> = v.iter().map(|x| x.as_root().and_then(|r| r.exponent_mod(n))).collect();
            c.set(&t, &e.ok_or(GerbalError::NotInSubgroup(t[0], t[1], t[2]))?);
        }
        Ok(c)
    }
}

/// For each defined triple, the central `a(g₁,g₂,g₃)` with
/// `a ∘ c(g₁g₂,g₃)∘(c(g₁,g₂)F_{g₃}) = c(g₁,g₂g₃)∘F_{g₁}(c(g₂,g₃))`.
pub fn extract_3cocycle<U: Unit>(spec: &GerbalActionSpec<U>) -> Result<Cocycle3<U>, GerbalError> {
    let n = spec.group.order();
    let cat = &spec.cat;
    let mut values = vec![None; n * n * n];
    for (g1, g2, g3, g12, g23, g123) in defined_triples(&spec.group) {
        let (f1, f2, f3) = (&spec.functors[g1], &spec.functors[g2], &spec.functors[g3]);
        let (f12, f23, f123) = (&spec.functors[g12], &spec.functors[g23], &spec.functors[g123]);
        let (c12, c12_3, c23, c1_23) = (
            spec.c(g1, g2).unwrap(),
            spec.c(g12, g3).unwrap(),
            spec.c(g2, g3).unwrap(),
            spec.c(g1, g23).unwrap(),
        );
        let mut a: Vec<Option<U>> = vec![None; cat.block_count()];
        for x in 0..cat.len() {
            let x3 = f3.object(x);
            let top = f1.object(f2.object(x3));
            let end = f123.object(x);
            let path1 = c12[x3].times(&c12_3[x]).times(cat.comp(top, f12.object(x3), end));
            let mid = f1.object(f23.object(x));
            let path2 = c23[x].times(f1.scalar(f2.object(x3), f23.object(x))).times(&c1_23[x]).times(cat.comp(top, mid, end));
            let ratio = path2.over(&path1);
            let b = cat.block_of(end);
            match &a[b] {
                None => a[b] = Some(ratio),
                Some(v) if *v != ratio => return Err(GerbalError::NotCentral(g1, g2, g3)),
                _ => {}
            }
        }
        values[(g1 * n + g2) * n + g3] = Some(a.into_iter().map(|v| v.expect("F is essentially surjective")).collect());
    }
    Ok(Cocycle3 { order: n, values })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub checked: usize,
    pub failures: Vec<[usize; 4]>,
}

/// `ρ_{g₁}a(g₂,g₃,g₄)·a(g₁,g₂g₃,g₄)·a(g₁,g₂,g₃) = a(g₁g₂,g₃,g₄)·a(g₁,g₂,g₃g₄)`
/// on every quadruple where all five values are defined.
pub fn check_cocycle_identity<U: Unit>(spec: &GerbalActionSpec<U>, a: &Cocycle3<U>) -> IdentityCheck {
    let g = &spec.group;
    let n = g.order();
    let mut out = IdentityCheck { checked: 0, failures: Vec::new() };
    for g1 in 0..n {
        for g2 in 0..n {
            for g3 in 0..n {
                for g4 in 0..n {
                    let (Some(g12), Some(g23), Some(g34)) = (g.mul(g1, g2), g.mul(g2, g3), g.mul(g3, g4)) else { continue };
                    let vals = (a.get(g2, g3, g4), a.get(g1, g23, g4), a.get(g1, g2, g3), a.get(g12, g3, g4), a.get(g1, g2, g34));
                    let (Some(x), Some(y), Some(z), Some(u), Some(v)) = vals else { continue };
                    out.checked += 1;
                    let rx = spec.center_action(g1, x);
                    let ok = (0..rx.len()).all(|b| rx[b].times(&y[b]).times(&z[b]) == u[b].times(&v[b]));
                    if !ok {
                        out.failures.push([g1, g2, g3, g4]);
                    }
                }
            }
        }
    }
    out
}

/// When the class of the extracted cocycle vanishes in
/// `H³(G, μ_n^{blocks})`, the spec with `c` rescaled so that `a ≡ 1`;
/// `None` when the class is nonzero.
pub fn compatible_choice<U: Unit>(spec: &GerbalActionSpec<U>) -> Result<Option<GerbalActionSpec<U>>, GerbalError> {
    let g = spec.group.to_group().ok_or(GerbalError::NotClosed)?;
    let a = extract_3cocycle(spec)?;
    if a.is_trivial() {
        return Ok(Some(spec.clone()));
    }
    let n = a.root_order().ok_or_else(|| GerbalError::Unsupported("cocycle values are not roots of unity".into()))?;
    let m = spec.center_module(n)?;
    let f = a.to_cochain(n)?;
    let opts = ComplexOptions { normalized: f.is_normalized(g.identity()), ..ComplexOptions::default() };
    let h3 = cohomology(&g, &m, 3, opts)?;
    let Some(d) = h3.coboundary_witness(&f) else { return Ok(None) };
    let inv = |x: usize, y: usize| -> Option<Vec<U>> { d.get(&[x, y]).iter().map(|&e| U::from_root(Root::new(-e, n))).collect() };
    if g.elements().any(|x| g.elements().any(|y| inv(x, y).is_none())) {
        return Err(GerbalError::Unsupported(format!("μ_{n} is not in the unit group")));
    }
    let out = spec.rescale(|x, y| inv(x, y).unwrap())?;
    if !extract_3cocycle(&out)?.is_trivial() {
        return Err(GerbalError::Spec("rescaled action is not strict".into()));
    }
    Ok(Some(out))
}

/// Full subcategory on `objects`, which must be stable under every `F_g`;
/// also returns the map from its blocks to the original blocks, along
/// which the original cocycle restricts.
pub fn restrict_gerbal<U: Unit>(spec: &GerbalActionSpec<U>, objects: &[usize]) -> Result<(GerbalActionSpec<U>, Vec<usize>), GerbalError> {
    let (sub, blocks) = spec.cat.full_subcategory(objects)?;
    let mut index = vec![None; spec.cat.len()];
    for (i, &x) in objects.iter().enumerate() {
        index[x] = Some(i);
    }
    let mut functors = Vec::with_capacity(spec.functors.len());
    for (g, f) in spec.functors.iter().enumerate() {
        let mut map = Vec::with_capacity(objects.len());
        for &x in objects {
            map.push(index[f.object(x)].ok_or(GerbalError::NotInvariant { g, x })?);
        }
        functors.push(AutoEquiv::new(&sub, map, |a, b| f.scalar(objects[a], objects[b]).clone())?);
    }
    let out = GerbalActionSpec::new(sub, spec.group.clone(), functors, |g, h| {
        objects.iter().map(|&x| spec.c(g, h).unwrap()[x].clone()).collect()
    })?;
    Ok((out, blocks))
}

// ---------------------------------------------------------------- 2-groups

/// `π₀` acting on `π₁ = ⊕ Z/factors[i]` by matrices on factor coordinates,
/// with a normalized 3-cocycle as associator.
#[derive(Clone, Debug)]
pub struct TwoGroup {
    pi0: FiniteGroup,
    factors: Vec<i64>,
    action: Vec<IntMatrix>,
    module: GModule,
    associator: Cochain,
}

impl TwoGroup {
    pub fn new(
        pi0: FiniteGroup,
        factors: Vec<i64>,
        action: Vec<IntMatrix>,
        associator: impl Fn(&[usize]) -> Vec<i64>,
    ) -> Result<Self, GerbalError> {
        let module = GModule::from_factors(&pi0, &factors, action.clone())?;
        let assoc = Cochain::from_fn(&pi0, &module, 3, |t| module.embed(&associator(t)));
        if !assoc.is_normalized(pi0.identity()) {
            return Err(GerbalError::Spec("associator is not normalized".into()));
        }
        let d = coboundary(&pi0, &module, &assoc);
        if let Some(i) = (0..d.len()).find(|&i| d.values()[i].iter().any(|&x| x != 0)) {
            return Err(GerbalError::Spec(format!("pentagon fails at {:?}", d.tuple(i))));
        }
        Ok(TwoGroup { pi0, factors, action, module, associator: assoc })
    }

    pub fn strict(pi0: FiniteGroup, factors: Vec<i64>, action: Vec<IntMatrix>) -> Result<Self, GerbalError> {
        let w = factors.len();
        Self::new(pi0, factors, action, |_| vec![0; w])
    }

    pub fn pi0(&self) -> &FiniteGroup {
        &self.pi0
    }
    pub fn factors(&self) -> &[i64] {
        &self.factors
    }
    pub fn action(&self) -> &[IntMatrix] {
        &self.action
    }
    pub fn module(&self) -> &GModule {
        &self.module
    }
    pub fn associator(&self) -> &Cochain {
        &self.associator
    }
    pub fn is_strict(&self) -> bool {
        self.associator.is_zero()
    }
    /// The skeletal presentation: `Aut(x)` identified with `π₁` through `l`.
    pub fn presentation(&self) -> MonoidalPresentation {
        let w = self.factors.len();
        let id: IntMatrix = (0..w).map(|i| (0..w).map(|j| i64::from(i == j)).collect()).collect();
        MonoidalPresentation {
            pi0: self.pi0.clone(),
            factors: self.factors.clone(),
            l: vec![id; self.pi0.order()],
            r: self.action.clone(),
        }
    }
}

/// A monoidal groupoid with one object per element of `π₀`, each
/// `Aut(x)` identified with `π₁`; `l_x(a) = a ⊗ id_x` and `r_x(a) = id_x ⊗ a`
/// then become automorphisms of `π₁` (matrices on factor coordinates).
#[derive(Clone, Debug)]
pub struct MonoidalPresentation {
    pub pi0: FiniteGroup,
    pub factors: Vec<i64>,
    pub l: Vec<IntMatrix>,
    pub r: Vec<IntMatrix>,
}

/// `ρ_x = l_x⁻¹ ∘ r_x`, checked to be a homomorphism `π₀ → Aut(π₁)`.
pub fn pi0_action_on_pi1(p: &MonoidalPresentation) -> Result<Vec<IntMatrix>, GerbalError> {
    let f = &p.factors;
    let w = f.len();
    let size: usize = f.iter().map(|&m| m as usize).product();
    let decode = |mut i: usize| -> Vec<i64> {
        f.iter()
            .map(|&m| {
                let c = (i % m as usize) as i64;
                i /= m as usize;
                c
            })
            .collect()
    };
    let encode = |v: &[i64]| -> usize { v.iter().zip(f).rev().fold(0usize, |acc, (&c, &m)| acc * m as usize + c.rem_euclid(m) as usize) };
    let as_perm = |m: &IntMatrix, name: &str, x: usize| -> Result<Perm, GerbalError> {
        if m.len() != w || m.iter().any(|r| r.len() != w) {
            return Err(GerbalError::Spec(format!("{name}_{x} has the wrong shape")));
        }
        for i in 0..w {
            for j in 0..w {
                if (m[i][j] * f[j]).rem_euclid(f[i]) != 0 {
                    return Err(GerbalError::Spec(format!("{name}_{x} is not a homomorphism")));
                }
            }
        }
        let p: Perm = (0..size)
            .map(|i| {
                let v = decode(i);
                let img: Vec<i64> = (0..w).map(|r| (0..w).map(|c| m[r][c] * v[c]).sum::<i64>()).collect();
                encode(&img)
            })
            .collect();
        let mut seen = vec![false; size];
        for &y in &p {
            if std::mem::replace(&mut seen[y], true) {
                return Err(GerbalError::Spec(format!("{name}_{x} is not invertible")));
            }
        }
        Ok(p)
    };
    let g = &p.pi0;
    if p.l.len() != g.order() || p.r.len() != g.order() {
        return Err(GerbalError::Spec("one l and one r per object".into()));
    }
    let mut rho = Vec::with_capacity(g.order());
    for x in g.elements() {
        let l = as_perm(&p.l[x], "l", x)?;
        let r = as_perm(&p.r[x], "r", x)?;
        let mut linv = vec![0; size];
        for (i, &y) in l.iter().enumerate() {
            linv[y] = i;
        }
        rho.push(r.iter().map(|&y| linv[y]).collect::<Perm>());
    }
    if rho[g.identity()].iter().enumerate().any(|(i, &y)| i != y) {
        return Err(GerbalError::Spec("ρ_I is not the identity".into()));
    }
    for x in g.elements() {
        for y in g.elements() {
            let xy = g.mul(x, y);
            if (0..size).any(|a| rho[x][rho[y][a]] != rho[xy][a]) {
                return Err(GerbalError::Spec(format!("ρ_{x} ρ_{y} ≠ ρ_{xy}")));
            }
        }
    }
    Ok(rho
        .iter()
        .map(|r| {
            let cols: Vec<Vec<i64>> = (0..w)
                .map(|j| {
                    let mut e = vec![0i64; w];
                    e[j] = 1;
                    decode(r[encode(&e)])
                })
                .collect();
            (0..w).map(|i| (0..w).map(|j| cols[j][i]).collect()).collect()
        })
        .collect())
}

/// Which subgroup of `Z(C)^×` the 2-group's `π₁` is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterSubgroup {
    /// `μ_n` embedded diagonally (the same root on every block).
    Diagonal(i64),
    /// `μ_n` on every block independently.
    Full(i64),
}

/// The 2-group with objects `g ∈ G`, `Aut(g) = π₁` and associator the
/// extracted cocycle.
pub fn two_group_from_gerbal<U: Unit>(spec: &GerbalActionSpec<U>, sub: CenterSubgroup) -> Result<TwoGroup, GerbalError> {
    let g = spec.group.to_group().ok_or(GerbalError::NotClosed)?;
    if !spec.is_unital() {
        return Err(GerbalError::Spec("the action must be unital (F_e = id, c(e,·) = c(·,e) = 1)".into()));
    }
    let a = extract_3cocycle(spec)?;
    let n = g.order();
    let nb = spec.cat.block_count();
    let mut values: HashMap<[usize; 3], Vec<i64>> = HashMap::new();
    for g1 in 0..n {
        for g2 in 0..n {
            for g3 in 0..n {
                let v = a.get(g1, g2, g3).unwrap();
                let miss = GerbalError::NotInSubgroup(g1, g2, g3);
                let e: Vec<i64> = match sub {
                    CenterSubgroup::Diagonal(m) => {
                        if v.iter().any(|x| *x != v[0]) {
                            return Err(miss);
                        }
                        vec![v[0].as_root().and_then(|r| r.exponent_mod(m)).ok_or(miss)?]
                    }
                    CenterSubgroup::Full(m) => v.iter().map(|x| x.as_root().and_then(|r| r.exponent_mod(m))).collect::<Option<_>>().ok_or(miss)?,
                };
                values.insert([g1, g2, g3], e);
            }
        }
    }
    let (factors, action) = match sub {
        CenterSubgroup::Diagonal(m) => (vec![m], vec![vec![vec![1]]; n]),
        CenterSubgroup::Full(m) => (vec![m; nb], spec.pi0_presentation(m)?.r),
    };
    TwoGroup::new(g, factors, action, |t| values[&[t[0], t[1], t[2]]].clone())
}

/// The action of a 2-group with `π₁ = Z/n` (trivial `π₀`-action) on its own
/// linearization: objects `x ∈ π₀` (one per block), `F_g(x) = gx`, and
/// `c(g,h)_x = ω(g,h,x)⁻¹`. Its extracted cocycle is `ω`, diagonally.
pub fn tautological_action(t: &TwoGroup) -> Result<GerbalActionSpec<Root>, GerbalError> {
    if t.factors.len() != 1 || !t.module.is_trivial_action() {
        return Err(GerbalError::Unsupported("needs π₁ = Z/n with trivial action".into()));
    }
    let n = t.factors[0];
    let g = &t.pi0;
    let cat = LineCategory::<Root>::discrete(g.elements().map(|x| format!("g{x}")).collect());
    let functors = g
        .elements()
        .map(|x| AutoEquiv::new(&cat, g.elements().map(|y| g.mul(x, y)).collect(), |_, _| Root::one()))
        .collect::<Result<Vec<_>, _>>()?;
    let w = &t.associator;
    GerbalActionSpec::new(cat, GroupSample::from_group(g), functors, |a, b| {
        g.elements().map(|x| Root::new(-w.scalar(&[a, b, x]), n)).collect()
    })
}

// ---------------------------------------------------------------- gerbal pairs

/// `(G, Ĥ)` with `G ⊃ H` normal (quotient `K`, via `ext`), `Ĥ = H × Z/m`
/// (via `cext`), and `lifts[g] = ρ̃_g` as a permutation of `Ĥ`.
#[derive(Clone, Debug)]
pub struct GerbalPair {
    pub cext: CentralExtension,
    pub ext: ExtensionData,
    pub lifts: Vec<Perm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairVerdict {
    Valid,
    WrongShape,
    NotAutomorphism { g: usize },
    /// `π(ρ̃_g(x)) ≠ ρ_g(π(x))`.
    NotLift { g: usize, x: usize },
    /// `ρ̃_g(z) ≠ z` for central `z`.
    MovesCenter { g: usize, z: usize },
    /// `ρ̃_h(x) ≠ h̃ x h̃⁻¹`.
    NotInner { h: usize, x: usize },
    NotAction { g: usize, gp: usize },
}

impl GerbalPair {
    /// `G = H`, `ρ̃_h` conjugation by `(h, 0)`.
    pub fn inner(cext: CentralExtension) -> Self {
        let h = cext.base().clone();
        let all: Vec<usize> = h.elements().collect();
        let ext = ExtensionData::new(h.clone(), &all).expect("H is normal in itself");
        let lifts = h.elements().map(|x| cext.conj_perm(cext.lift(ext.g_to_h(x).unwrap()))).collect();
        GerbalPair { cext, ext, lifts }
    }

    pub fn with_section(&self, section: Vec<usize>) -> Result<Self, GerbalError> {
        Ok(GerbalPair { ext: self.ext.with_section(section)?, ..self.clone() })
    }

    /// `t̃(k,k') = (t(k,k'), 0)`, indexed `k·|K| + k'`.
    pub fn standard_tlifts(&self) -> Vec<usize> {
        let k = self.ext.k();
        (0..k.order() * k.order()).map(|i| self.cext.lift(self.ext.t(i / k.order(), i % k.order()))).collect()
    }
}

pub fn check_gerbal_pair(p: &GerbalPair) -> PairVerdict {
    let (cext, ext) = (&p.cext, &p.ext);
    let hg = cext.group();
    let g = ext.g();
    if p.lifts.len() != g.order() || p.lifts.iter().any(|l| l.len() != hg.order()) {
        return PairVerdict::WrongShape;
    }
    for x in g.elements() {
        let l = &p.lifts[x];
        let mut seen = vec![false; l.len()];
        if l.iter().any(|&y| std::mem::replace(&mut seen[y], true)) || !cext.is_hom(l) {
            return PairVerdict::NotAutomorphism { g: x };
        }
        if let Some(y) = hg.elements().find(|&y| cext.parts(l[y]).0 != ext.rho(x, cext.parts(y).0)) {
            return PairVerdict::NotLift { g: x, x: y };
        }
        if let Some(z) = cext.center_elements().into_iter().find(|&z| l[z] != z) {
            return PairVerdict::MovesCenter { g: x, z };
        }
        if let Some(h) = ext.g_to_h(x) {
            let c = cext.conj_perm(cext.lift(h));
            if let Some(y) = hg.elements().find(|&y| l[y] != c[y]) {
                return PairVerdict::NotInner { h, x: y };
            }
        }
    }
    for x in g.elements() {
        for y in g.elements() {
            let xy = g.mul(x, y);
            if hg.elements().any(|u| p.lifts[xy][u] != p.lifts[x][p.lifts[y][u]]) {
                return PairVerdict::NotAction { g: x, gp: y };
            }
        }
    }
    PairVerdict::Valid
}

/// `e(k₁,k₂,k₃) = t̃(k₁,k₂k₃) t̃(k₂,k₃) (t̃(k₁k₂,k₃) ρ̃_{s(k₃)⁻¹}(t̃(k₁,k₂)))⁻¹`,
/// a `Z/m`-valued 3-cocycle on `K`. `tlift[k·|K| + k']` is an element of
/// `Ĥ` over `t(k,k')`, equal to 1 when `k` or `k'` is.
pub fn gerbal_pair_3cocycle(p: &GerbalPair, tlift: &[usize]) -> Result<Cochain, GerbalError> {
    if check_gerbal_pair(p) != PairVerdict::Valid {
        return Err(GerbalError::Lifts("not a gerbal pair".into()));
    }
    let (cext, ext) = (&p.cext, &p.ext);
    let (k, g, hg) = (ext.k(), ext.g(), cext.group());
    let nk = k.order();
    if tlift.len() != nk * nk {
        return Err(GerbalError::Lifts("one lift per pair".into()));
    }
    for a in 0..nk {
        for b in 0..nk {
            let u = tlift[a * nk + b];
            if u >= hg.order() || cext.parts(u).0 != ext.t(a, b) {
                return Err(GerbalError::Lifts(format!("t̃({a},{b}) does not lie over t({a},{b})")));
            }
            if (a == k.identity() || b == k.identity()) && u != hg.identity() {
                return Err(GerbalError::Lifts(format!("t̃({a},{b}) must be 1")));
            }
        }
    }
    let tt = |a: usize, b: usize| tlift[a * nk + b];
    let mut out = Cochain::zero(nk, 3, 1, cext.modulus());
    for k1 in 0..nk {
        for k2 in 0..nk {
            for k3 in 0..nk {
                let (k12, k23) = (k.mul(k1, k2), k.mul(k2, k3));
                let left = hg.mul(tt(k1, k23), tt(k2, k3));
                let twisted = p.lifts[g.inv(ext.section(k3))][tt(k1, k2)];
                let right = hg.mul(tt(k12, k3), twisted);
                let e = hg.mul(left, hg.inv(right));
                let (h, z) = cext.parts(e);
                if h != cext.base().identity() {
                    return Err(GerbalError::Lifts(format!("e({k1},{k2},{k3}) is not central")));
                }
                out.set(&[k1, k2, k3], &[z]);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- Rep_λ

/// Representations of `Ĥ = H × Z/m` on which `z ∈ Z/m` acts by
/// `(−1)^{2λz/m}`, realized by ±1 monomial matrices over `Q`.
#[derive(Clone, Debug)]
pub struct RepCategory {
    cat: LineCategory<Scalar>,
    reps: Vec<Vec<Matrix>>,
    bases: HashMap<(usize, usize), Matrix>,
    irreducibles: usize,
}

/// `z ↦ 2λz/m mod 2`, the exponent of −1 by which `z` acts.
fn level_sign(m: i64, lambda: i64, z: i64) -> Result<i64, GerbalError> {
    if (2 * lambda).rem_euclid(m) != 0 {
        return Err(GerbalError::Unsupported(format!("λ = {lambda} on Z/{m} is not ±1-valued")));
    }
    Ok((2 * lambda / m * z).rem_euclid(2))
}

fn sign(e: i64) -> Scalar {
    if e.rem_euclid(2) == 0 {
        q(1)
    } else {
        q(-1)
    }
}

/// Linear characters `B → ±1` extending the level on the center, for `B`
/// generated by the center and `extra`; `(B membership, values)`.
fn linear_characters(cext: &CentralExtension, lambda: i64, extra: &[usize]) -> Result<Vec<Vec<Option<i64>>>, GerbalError> {
    let hg = cext.group();
    let mut gens = vec![cext.central(1)];
    gens.extend_from_slice(extra);
    let zsign = level_sign(cext.modulus(), lambda, 1)?;
    let mut out = Vec::new();
    for mask in 0..(1usize << extra.len()) {
        let mut gv = vec![zsign];
        gv.extend((0..extra.len()).map(|i| ((mask >> i) & 1) as i64));
        let mut chi: Vec<Option<i64>> = vec![None; hg.order()];
        chi[hg.identity()] = Some(0);
        let mut stack = vec![hg.identity()];
        let mut ok = true;
        while let Some(x) = stack.pop() {
            for (g, v) in gens.iter().zip(&gv) {
                let y = hg.mul(x, *g);
                let val = (chi[x].unwrap() + v) % 2;
                match chi[y] {
                    None => {
                        chi[y] = Some(val);
                        stack.push(y);
                    }
                    Some(w) if w != val => ok = false,
                    _ => {}
                }
            }
        }
        if ok {
            out.push(chi);
        }
    }
    Ok(out)
}

fn induce(hg: &FiniteGroup, chi: &[Option<i64>]) -> Vec<Matrix> {
    let mut reps: Vec<usize> = Vec::new();
    let mut covered = vec![false; hg.order()];
    for x in hg.elements() {
        if covered[x] {
            continue;
        }
        reps.push(x);
        for b in hg.elements().filter(|&b| chi[b].is_some()) {
            covered[hg.mul(x, b)] = true;
        }
    }
    let d = reps.len();
    hg.elements()
        .map(|x| {
            let mut m = vec![vec![q(0); d]; d];
            for (j, &rj) in reps.iter().enumerate() {
                let y = hg.mul(x, rj);
                let (i, b) = reps
                    .iter()
                    .enumerate()
                    .map(|(i, &ri)| (i, hg.mul(hg.inv(ri), y)))
                    .find(|&(_, b)| chi[b].is_some())
                    .expect("cosets cover the group");
                m[i][j] = sign(chi[b].unwrap());
            }
            m
        })
        .collect()
}

fn character(reps: &[Matrix]) -> Vec<Scalar> {
    reps.iter().map(|m| (0..m.len()).fold(q(0), |acc, i| acc + &m[i][i])).collect()
}

fn nullspace(n: usize, rows: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let s = Subspace::from_rows(n, rows).expect("row width");
    let piv = s.pivots().to_vec();
    (0..n)
        .filter(|c| !piv.contains(c))
        .map(|f| {
            let mut v = vec![q(0); n];
            v[f] = q(1);
            for (r, &p) in s.rows().iter().zip(&piv) {
                v[p] = -r[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of `{T : T·A(x) = B(x)·T for all x}`.
fn intertwiners(a: &[Matrix], b: &[Matrix]) -> Vec<Matrix> {
    let (da, db) = (a[0].len(), b[0].len());
    let n = da * db;
    let mut rows = Vec::new();
    for (ma, mb) in a.iter().zip(b) {
        for i in 0..db {
            for j in 0..da {
                let mut r = vec![q(0); n];
                for k in 0..da {
                    r[i * da + k] += &ma[k][j];
                }
                for k in 0..db {
                    r[k * da + j] -= &mb[i][k];
                }
                if r.iter().any(|x| !x.is_zero()) {
                    rows.push(r);
                }
            }
        }
    }
    nullspace(n, &rows).into_iter().map(|v| v.chunks(da).map(|c| c.to_vec()).collect()).collect()
}

fn first_nonzero(m: &Matrix) -> (usize, usize) {
    for (i, r) in m.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            if !x.is_zero() {
                return (i, j);
            }
        }
    }
    panic!("zero intertwiner")
}

/// `t = s·b` with `s` returned, or `None`.
fn proportion(t: &Matrix, b: &Matrix) -> Option<Scalar> {
    let (i, j) = first_nonzero(b);
    let s = &t[i][j] / &b[i][j];
    let ok = t.iter().zip(b).all(|(tr, br)| tr.iter().zip(br).all(|(x, y)| *x == &s * y));
    (ok && !s.is_zero()).then_some(s)
}

impl RepCategory {
    fn build(reps: Vec<Vec<Matrix>>, labels: Vec<String>, irreducibles: usize) -> Result<Self, GerbalError> {
        let chars: Vec<Vec<Scalar>> = reps.iter().map(|r| character(r)).collect();
        let mut classes: Vec<Vec<Scalar>> = Vec::new();
        let block: Vec<usize> = chars
            .iter()
            .map(|c| match classes.iter().position(|d| d == c) {
                Some(i) => i,
                None => {
                    classes.push(c.clone());
                    classes.len() - 1
                }
            })
            .collect();
        let mut bases = HashMap::new();
        for x in 0..reps.len() {
            for y in 0..reps.len() {
                if block[x] != block[y] {
                    continue;
                }
                let sp = intertwiners(&reps[x], &reps[y]);
                if sp.len() != 1 {
                    return Err(GerbalError::Category(format!("Hom({x},{y}) has dimension {}", sp.len())));
                }
                let t = &sp[0];
                let (i, j) = first_nonzero(t);
                let s = t[i][j].clone();
                bases.insert((x, y), t.iter().map(|r| r.iter().map(|v| v / &s).collect()).collect::<Matrix>());
            }
        }
        let comp = |x: usize, y: usize, z: usize| -> Scalar {
            let prod = mat_mul(&bases[&(y, z)], &bases[&(x, y)]);
            proportion(&prod, &bases[&(x, z)]).expect("Homs are lines")
        };
        let cat = LineCategory::new(labels, block, comp)?;
        Ok(RepCategory { cat, reps, bases, irreducibles })
    }

    pub fn category(&self) -> &LineCategory<Scalar> {
        &self.cat
    }
    pub fn irreducible_count(&self) -> usize {
        self.irreducibles
    }
    pub fn matrices(&self, x: usize) -> &[Matrix] {
        &self.reps[x]
    }
    pub fn dim(&self, x: usize) -> usize {
        self.reps[x][0].len()
    }
    pub fn basis(&self, x: usize, y: usize) -> Option<&Matrix> {
        self.bases.get(&(x, y))
    }
    pub fn find(&self, reps: &[Matrix]) -> Option<usize> {
        self.reps.iter().position(|r| r == reps)
    }
    /// `t = s·b_{xy}`; `None` unless `t` is a nonzero intertwiner `x → y`.
    pub fn coefficient(&self, x: usize, y: usize, t: &Matrix) -> Option<Scalar> {
        proportion(t, self.basis(x, y)?)
    }
    /// The object permutation `X ↦ X ∘ pre`.
    pub fn twist_permutation(&self, pre: &[usize]) -> Option<Vec<usize>> {
        (0..self.reps.len()).map(|x| self.find(&twist(&self.reps[x], pre))).collect()
    }
}

fn twist(reps: &[Matrix], pre: &[usize]) -> Vec<Matrix> {
    pre.iter().map(|&y| reps[y].clone()).collect()
}

fn level_irreducibles(cext: &CentralExtension, lambda: i64) -> Result<Vec<Vec<Matrix>>, GerbalError> {
    let hg = cext.group();
    let n = hg.order();
    let target = cext.base().order();
    let mut found: Vec<Vec<Matrix>> = Vec::new();
    let mut chars: Vec<Vec<Scalar>> = Vec::new();
    let mut total = 0usize;
    let mut extras: Vec<Vec<usize>> = vec![vec![]];
    extras.extend(hg.elements().map(|x| vec![x]));
    extras.extend(hg.elements().flat_map(|x| (x + 1..n).map(move |y| vec![x, y])));
    for extra in extras {
        if total == target {
            break;
        }
        for chi in linear_characters(cext, lambda, &extra)? {
            let w = induce(hg, &chi);
            let c = character(&w);
            let norm = c.iter().fold(q(0), |acc, x| acc + x * x);
            if norm != q(n as i64) || chars.contains(&c) {
                continue;
            }
            total += w[0].len() * w[0].len();
            chars.push(c);
            found.push(w);
        }
    }
    // level-λ irreducibles always exist (their squared dimensions sum to |H|),
    // so an empty or short list means they are not ±1 monomial
    if total != target {
        return Err(GerbalError::Unsupported("level-λ irreducibles are not all induced from ±1 characters".into()));
    }
    Ok(found)
}

/// The level-λ irreducibles of `Ĥ`, one block each.
pub fn rep_category(cext: &CentralExtension, lambda: i64) -> Result<RepCategory, GerbalError> {
    let irr = level_irreducibles(cext, lambda)?;
    let labels = (0..irr.len()).map(|i| format!("W{i}")).collect();
    let k = irr.len();
    RepCategory::build(irr, labels, k)
}

/// The level-λ irreducibles together with their twists `W ∘ α` for
/// `α ∈ autos` (duplicates removed).
pub fn rep_category_twisted(cext: &CentralExtension, lambda: i64, autos: &[Perm]) -> Result<RepCategory, GerbalError> {
    let irr = level_irreducibles(cext, lambda)?;
    let k = irr.len();
    let mut reps: Vec<Vec<Matrix>> = irr.clone();
    let mut labels: Vec<String> = (0..k).map(|i| format!("W{i}")).collect();
    for (ai, a) in autos.iter().enumerate() {
        for (i, w) in irr.iter().enumerate() {
            let t = twist(w, a);
            if !reps.contains(&t) {
                reps.push(t);
                labels.push(format!("W{i}∘α{ai}"));
            }
        }
    }
    RepCategory::build(reps, labels, k)
}

/// The gerbal action of `K` on `Rep_λ(Ĥ)`: `F_k(X) = X ∘ ρ̃_{s(k)}⁻¹`, acting
/// as the identity on intertwiners, with `c(k,k')_X = X(t̃(k,k'))`.
pub fn rep_gerbal_action(p: &GerbalPair, lambda: i64, tlift: &[usize]) -> Result<(RepCategory, GerbalActionSpec<Scalar>), GerbalError> {
    if check_gerbal_pair(p) != PairVerdict::Valid {
        return Err(GerbalError::Lifts("not a gerbal pair".into()));
    }
    let (g, k) = (p.ext.g(), p.ext.k());
    let nk = k.order();
    if tlift.len() != nk * nk {
        return Err(GerbalError::Lifts("one lift per pair".into()));
    }
    let autos: Vec<Perm> = g.elements().map(|x| p.lifts[g.inv(x)].clone()).collect();
    let rc = rep_category_twisted(&p.cext, lambda, &autos)?;
    let cat = rc.category().clone();
    let mut functors = Vec::with_capacity(nk);
    for kk in k.elements() {
        let pre = &p.lifts[g.inv(p.ext.section(kk))];
        let map = rc.twist_permutation(pre).ok_or_else(|| GerbalError::Category("twists are not closed".into()))?;
        let f = |x: usize, y: usize| rc.coefficient(map[x], map[y], rc.basis(x, y).unwrap()).expect("twisting preserves intertwiners");
        functors.push(AutoEquiv::new(&cat, map.clone(), f)?);
    }
    let spec = GerbalActionSpec::new(cat, GroupSample::from_group(k), functors.clone(), |a, b| {
        let fab = functors[a].compose(&functors[b]);
        let fk = &functors[k.mul(a, b)];
        (0..rc.category().len())
            .map(|x| rc.coefficient(fab.object(x), fk.object(x), &rc.matrices(x)[tlift[a * nk + b]]).unwrap_or_else(|| q(0)))
            .collect()
    })?;
    Ok((rc, spec))
}

/// `λ_*`: `Z/m`-valued cochains to `Z/2` (exponents of −1).
pub fn level_pushforward(c: &Cochain, lambda: i64) -> Result<Cochain, GerbalError> {
    let m = c.modulus();
    let mut out = Cochain::zero(c.group_order(), c.degree(), c.width(), 2);
    for i in 0..c.len() {
        let v: Result<Vec<i64>, _> = c.values()[i].iter().map(|&z| level_sign(m, lambda, z)).collect();
        out.set(&c.tuple(i), &v?);
    }
    Ok(out)
}
