//! The rank-one matrix groups `SL_2` and `PGL_2` over one floor of the tower:
//! enumeration, conjugacy classes, class multiplication coefficients and
//! subgroups.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Field;

/// Default cap on the order of an enumerated group.
pub const DEFAULT_GROUP_CAP: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pgl2,
    Sl2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Pgl2 => "pgl2",
            Family::Sl2 => "sl2",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgl2" => Ok(Family::Pgl2),
            "sl2" => Ok(Family::Sl2),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

/// A 2×2 matrix `[[a, b], [c, d]]` stored as field indices in canonical form.
///
/// For `SL_2` the entries are taken as given (determinant one). For `PGL_2`
/// the first nonzero entry in the order `a, b, c, d` is scaled to one, so two
/// matrices represent the same projective class iff they are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonElem(pub [u32; 4]);

impl CanonElem {
    pub fn entries(&self) -> [u32; 4] {
        self.0
    }
}

/// Matrix arithmetic for one family over one field, without enumerating the group.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    family: Family,
    field: Arc<Field>,
}

impl MatrixGroup {
    pub fn new(family: Family, field: Arc<Field>) -> Self {
        MatrixGroup { family, field }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// `q^3 − q`, the order of both families over `F_q`.
    pub fn order(&self) -> u64 {
        let q = self.field.order() as u64;
        q * q * q - q
    }

    pub fn identity(&self) -> CanonElem {
        CanonElem([1, 0, 0, 1])
    }

    pub fn det(&self, m: &CanonElem) -> u32 {
        let f = &self.field;
        let [a, b, c, d] = m.0;
        f.sub(f.mul(a, d), f.mul(b, c))
    }

    pub fn trace(&self, m: &CanonElem) -> u32 {
        self.field.add(m.0[0], m.0[3])
    }

    /// Brings a raw matrix with nonzero determinant into canonical form.
    pub fn canon(&self, m: [u32; 4]) -> CanonElem {
        match self.family {
            Family::Sl2 => CanonElem(m),
            Family::Pgl2 => {
                let lead = *m.iter().find(|&&x| x != 0).expect("singular matrix");
                let s = self.field.inv(lead).unwrap();
                CanonElem(m.map(|x| self.field.mul(s, x)))
            }
        }
    }

    /// Canonical form, or `None` when the matrix is not in the group.
    pub fn try_canon(&self, m: [u32; 4]) -> Option<CanonElem> {
        let raw = CanonElem(m);
        let det = self.det(&raw);
        match self.family {
            Family::Sl2 if det == 1 => Some(raw),
            Family::Pgl2 if det != 0 => Some(self.canon(m)),
            _ => None,
        }
    }

    pub fn mul(&self, x: &CanonElem, y: &CanonElem) -> CanonElem {
        let f = &self.field;
        let [a, b, c, d] = x.0;
        let [e, g, h, k] = y.0;
        self.canon([
            f.add(f.mul(a, e), f.mul(b, h)),
            f.add(f.mul(a, g), f.mul(b, k)),
            f.add(f.mul(c, e), f.mul(d, h)),
            f.add(f.mul(c, g), f.mul(d, k)),
        ])
    }

    pub fn inv(&self, x: &CanonElem) -> CanonElem {
        let f = &self.field;
        let [a, b, c, d] = x.0;
        let s = f.inv(self.det(x)).expect("singular matrix");
        self.canon([f.mul(s, d), f.mul(s, f.neg(b)), f.mul(s, f.neg(c)), f.mul(s, a)])
    }

    /// A unipotent element other than the identity: characteristic polynomial
    /// `(x − 1)^2` (for `PGL_2`, up to scaling: `tr^2 = 4 det`).
    pub fn is_nontrivial_unipotent(&self, m: &CanonElem) -> bool {
        if *m == self.identity() {
            return false;
        }
        let f = &self.field;
        let tr = self.trace(m);
        match self.family {
            Family::Sl2 => tr == f.add(1, 1),
            Family::Pgl2 => {
                let four = f.add(f.add(1, 1), f.add(1, 1));
                // scalars never appear in canonical PGL_2 form except as the identity
                f.mul(tr, tr) == f.mul(four, self.det(m))
            }
        }
    }

    /// Upper and lower unipotents over an additive basis plus one torus
    /// element; these generate the whole group.
    pub fn standard_generators(&self) -> Vec<CanonElem> {
        let f = &self.field;
        let mut gens: Vec<CanonElem> = f.basis().iter().map(|&x| CanonElem([1, x, 0, 1])).collect();
        gens.extend(f.basis().iter().map(|&x| CanonElem([1, 0, x, 1])));
        let g = f.primitive();
        gens.push(match self.family {
            Family::Sl2 => CanonElem([g, 0, 0, f.inv(g).unwrap()]),
            Family::Pgl2 => self.canon([g, 0, 0, 1]),
        });
        gens
    }

    /// Every element in canonical form, lexicographic in `(a, b, c, d)`.
    pub fn enumerate(&self) -> Vec<CanonElem> {
        let f = &self.field;
        let mut out = Vec::with_capacity(self.order() as usize);
        match self.family {
            Family::Sl2 => {
                for a in f.elements() {
                    for b in f.elements() {
                        for c in f.elements() {
                            match f.inv(a) {
                                Some(ia) => out.push(CanonElem([a, b, c, f.mul(ia, f.add(1, f.mul(b, c)))])),
                                None if b != 0 && c == f.neg(f.inv(b).unwrap()) => {
                                    for d in f.elements() {
                                        out.push(CanonElem([a, b, c, d]));
                                    }
                                }
                                None => {}
                            }
                        }
                    }
                }
            }
            Family::Pgl2 => {
                for c in 1..f.order() {
                    for d in f.elements() {
                        out.push(CanonElem([0, 1, c, d]));
                    }
                }
                for b in f.elements() {
                    for c in f.elements() {
                        for d in f.elements() {
                            if d != f.mul(b, c) {
                                out.push(CanonElem([1, b, c, d]));
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// A fully enumerated group with index-based arithmetic.
#[derive(Clone, Debug)]
pub struct GroupTable {
    ambient: MatrixGroup,
    elements: Vec<CanonElem>,
    index: HashMap<CanonElem, u32>,
    inverse: Vec<u32>,
    generators: Vec<u32>,
    identity: u32,
}

/// Enumerates `family` over `field`, refusing groups larger than `max_order`.
pub fn enumerate_group(family: Family, field: Arc<Field>, max_order: u64) -> Result<GroupTable> {
    let ambient = MatrixGroup::new(family, field);
    if ambient.order() > max_order {
        return Err(Error::SizeCapExceeded {
            what: "group order",
            value: ambient.order(),
            cap: max_order,
        });
    }
    let elements = ambient.enumerate();
    if elements.len() as u64 != ambient.order() {
        return Err(Error::InvariantViolation(format!(
            "enumerated {} elements, expected {}",
            elements.len(),
            ambient.order()
        )));
    }
    let index: HashMap<CanonElem, u32> = elements.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
    if index.len() != elements.len() {
        return Err(Error::InvariantViolation("duplicate canonical elements".into()));
    }
    let lookup = |e: &CanonElem| {
        index
            .get(e)
            .copied()
            .ok_or_else(|| Error::InvariantViolation(format!("{e:?} escapes the group")))
    };
    let inverse = elements
        .iter()
        .map(|e| lookup(&ambient.inv(e)))
        .collect::<Result<Vec<_>>>()?;
    let identity = lookup(&ambient.identity())?;
    let generators = ambient
        .standard_generators()
        .iter()
        .map(lookup)
        .collect::<Result<Vec<_>>>()?;

    // closure on a deterministic sample of pairs
    let n = elements.len();
    let stride = (n / 61).max(1);
    for i in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride * 7 + 1) {
            lookup(&ambient.mul(&elements[i], &elements[j]))?;
        }
    }

    let table = GroupTable {
        ambient,
        elements,
        index,
        inverse,
        generators,
        identity,
    };
    if table.closure(&table.generators).order() != n {
        return Err(Error::InvariantViolation("standard generators do not generate".into()));
    }
    Ok(table)
}

impl GroupTable {
    pub fn family(&self) -> Family {
        self.ambient.family
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.ambient.field
    }

    pub fn ambient(&self) -> &MatrixGroup {
        &self.ambient
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CanonElem] {
        &self.elements
    }

    pub fn element(&self, i: u32) -> &CanonElem {
        &self.elements[i as usize]
    }

    pub fn index_of(&self, e: &CanonElem) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    #[inline]
    pub fn mul(&self, i: u32, j: u32) -> u32 {
        let prod = self.ambient.mul(&self.elements[i as usize], &self.elements[j as usize]);
        self.index[&prod]
    }

    #[inline]
    pub fn inv(&self, i: u32) -> u32 {
        self.inverse[i as usize]
    }

    pub fn conj(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn element_order(&self, i: u32) -> u32 {
        let mut acc = i;
        let mut k = 1;
        while acc != self.identity {
            acc = self.mul(acc, i);
            k += 1;
        }
        k
    }

    /// `g^e` by repeated squaring.
    pub fn pow(&self, g: u32, mut e: u64) -> u32 {
        let mut base = g;
        let mut acc = self.identity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Subgroup generated by `gens`.
    pub fn closure(&self, gens: &[u32]) -> Subgroup {
        let mut seen = vec![false; self.order()];
        seen[self.identity as usize] = true;
        let mut queue = VecDeque::from([self.identity]);
        let mut members = vec![self.identity];
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        Subgroup::from_elements(members)
    }
}

/// Conjugacy classes with lookup tables.
///
/// Classes are ordered by (element order, class size, least member index),
/// so the identity class is always class 0. The representative of each
/// class is its least member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjData {
    group_order: u64,
    reps: Vec<u32>,
    sizes: Vec<u64>,
    orders: Vec<u32>,
    class_of: Vec<u32>,
    inverse_class: Vec<u32>,
}

impl ConjData {
    fn from_partition(g: &GroupTable, mut classes: Vec<Vec<u32>>) -> Self {
        for c in classes.iter_mut() {
            c.sort_unstable();
        }
        classes.sort_by_key(|c| (g.element_order(c[0]), c.len(), c[0]));
        let mut class_of = vec![0u32; g.order()];
        for (k, c) in classes.iter().enumerate() {
            for &x in c {
                class_of[x as usize] = k as u32;
            }
        }
        let reps: Vec<u32> = classes.iter().map(|c| c[0]).collect();
        let inverse_class = reps.iter().map(|&r| class_of[g.inv(r) as usize]).collect();
        ConjData {
            group_order: g.order() as u64,
            orders: reps.iter().map(|&r| g.element_order(r)).collect(),
            sizes: classes.iter().map(|c| c.len() as u64).collect(),
            reps,
            class_of,
            inverse_class,
        }
    }

    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    pub fn num_classes(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[u32] {
        &self.reps
    }

    pub fn rep(&self, k: usize) -> u32 {
        self.reps[k]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, k: usize) -> u64 {
        self.sizes[k]
    }

    /// Element order of the members of class `k`.
    pub fn order(&self, k: usize) -> u32 {
        self.orders[k]
    }

    pub fn class_of(&self, x: u32) -> usize {
        self.class_of[x as usize] as usize
    }

    /// `k*`, the class of inverses of class `k`.
    pub fn inverse_class(&self, k: usize) -> usize {
        self.inverse_class[k] as usize
    }

    pub fn identity_class(&self) -> usize {
        0
    }
}

/// Conjugacy classes by closure under conjugation by the group generators.
pub fn conjugacy_data(g: &GroupTable) -> ConjData {
    let mut seen = vec![false; g.order()];
    let mut classes = Vec::new();
    for start in 0..g.order() as u32 {
        if seen[start as usize] {
            continue;
        }
        seen[start as usize] = true;
        let mut class = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &s in g.generators() {
                let y = g.conj(s, x);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    class.push(y);
                    queue.push_back(y);
                }
            }
        }
        classes.push(class);
    }
    ConjData::from_partition(g, classes)
}

/// Conjugacy classes by conjugating with every group element. Quadratic in
/// the group order; kept as a cross-check for [`conjugacy_data`].
pub fn conjugacy_data_full(g: &GroupTable) -> ConjData {
    let mut seen = vec![false; g.order()];
    let mut classes = Vec::new();
    for x in 0..g.order() as u32 {
        if seen[x as usize] {
            continue;
        }
        let mut class: Vec<u32> = (0..g.order() as u32).map(|h| g.conj(h, x)).collect();
        class.sort_unstable();
        class.dedup();
        for &y in &class {
            seen[y as usize] = true;
        }
        classes.push(class);
    }
    ConjData::from_partition(g, classes)
}

/// Structure constants `a_{ijk} = #{(x, y) ∈ C_i × C_j : xy = z_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMultTable {
    n: usize,
    coeffs: Vec<u64>,
}

impl ClassMultTable {
    pub fn num_classes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        self.coeffs[(i * self.n + j) * self.n + k]
    }
}

/// One pass over the group per target class: for each `x`, the pair
/// `(x, x^{-1} z_k)` lands in `C_{class(x)} × C_{class(x^{-1} z_k)}`.
pub fn class_mult_coeffs(g: &GroupTable, cd: &ConjData) -> ClassMultTable {
    let n = cd.num_classes();
    let columns: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let z = cd.rep(k);
            let mut col = vec![0u64; n * n];
            for x in 0..g.order() as u32 {
                let y = g.mul(g.inv(x), z);
                col[cd.class_of(x) * n + cd.class_of(y)] += 1;
            }
            col
        })
        .collect();
    let mut coeffs = vec![0u64; n * n * n];
    for (k, col) in columns.iter().enumerate() {
        for ij in 0..n * n {
            coeffs[ij * n + k] = col[ij];
        }
    }
    ClassMultTable { n, coeffs }
}

/// A subgroup as a sorted list of element indices of its ambient table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    elements: Vec<u32>,
}

impl Subgroup {
    pub fn from_elements(mut elements: Vec<u32>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        Subgroup { elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_cyclic(&self, g: &GroupTable) -> bool {
        self.elements
            .iter()
            .any(|&x| g.element_order(x) as usize == self.order())
    }
}

/// `{h : h·point = point}` for an arbitrary action of `g`.
pub fn stabilizer<P: PartialEq>(g: &GroupTable, act: impl Fn(&CanonElem, &P) -> P, point: &P) -> Subgroup {
    let members = (0..g.order() as u32)
        .filter(|&h| act(g.element(h), point) == *point)
        .collect();
    Subgroup::from_elements(members)
}

pub fn subgroup_closure(g: &GroupTable, gens: &[u32]) -> Subgroup {
    let s = g.closure(gens);
    debug_assert_eq!(g.order() % s.order(), 0, "Lagrange");
    s
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of all element orders.
pub fn exponent(g: &GroupTable) -> u64 {
    (0..g.order() as u32).fold(1u64, |acc, x| {
        let o = g.element_order(x) as u64;
        acc / gcd(acc, o) * o
    })
}
