//! The field tower `F_p ⊂ F_q ⊂ F_{q^2}` used by every other module.
//!
//! Elements of `F_q` are stored as their coefficient vectors over `F_p`,
//! packed base `p` (coefficient `c_i` is digit `i`). Elements of `F_{q^2}`
//! are pairs `a + b·τ` with `τ^2 = δ`, packed as `a + q·b`. With this packing
//! the subfield `F_q` is exactly the set of extension indices below `q`, so a
//! matrix over `F_q` can be read as a matrix over `F_{q^2}` without conversion.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `q` accepted unless a caller asks for more.
pub const DEFAULT_SIZE_CAP: u32 = 13;

/// An element of `F_q`, canonically reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FqElem(u32);

impl FqElem {
    pub fn index(self) -> u32 {
        self.0
    }
}

/// An element `a + b·τ` of `F_{q^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fq2Elem {
    pub a: FqElem,
    pub b: FqElem,
}

/// Which floor of the tower a computation lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Base,
    Ext,
}

/// A finite field given by full addition and multiplication tables over
/// element indices `0..order`. Index 0 is zero and index 1 is one.
#[derive(Clone, Debug)]
pub struct Field {
    order: u32,
    characteristic: u32,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    basis: Vec<u32>,
    primitive: u32,
}

impl Field {
    fn from_tables(order: u32, characteristic: u32, add: Vec<u32>, mul: Vec<u32>, basis: Vec<u32>) -> Self {
        let n = order as usize;
        let mut neg = vec![0; n];
        let mut inv = vec![0; n];
        for x in 0..n {
            for y in 0..n {
                if add[x * n + y] == 0 {
                    neg[x] = y as u32;
                }
                if x != 0 && mul[x * n + y] == 1 {
                    inv[x] = y as u32;
                }
            }
        }
        let mut field = Field {
            order,
            characteristic,
            add,
            mul,
            neg,
            inv,
            basis,
            primitive: 0,
        };
        field.primitive = (1..order)
            .find(|&g| field.multiplicative_order(g) == order - 1)
            .expect("multiplicative group of a finite field is cyclic");
        field
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    /// An additive basis over the prime field.
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    /// The least generator of the multiplicative group.
    pub fn primitive(&self) -> u32 {
        self.primitive
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.order
    }

    #[inline]
    pub fn add(&self, x: u32, y: u32) -> u32 {
        self.add[(x * self.order + y) as usize]
    }

    #[inline]
    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg[y as usize])
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        self.mul[(x * self.order + y) as usize]
    }

    #[inline]
    pub fn neg(&self, x: u32) -> u32 {
        self.neg[x as usize]
    }

    #[inline]
    pub fn inv(&self, x: u32) -> Option<u32> {
        (x != 0).then(|| self.inv[x as usize])
    }

    pub fn pow(&self, x: u32, mut e: u64) -> u32 {
        let mut base = x;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn multiplicative_order(&self, x: u32) -> u32 {
        assert!(x != 0, "zero has no multiplicative order");
        let mut acc = x;
        let mut k = 1;
        while acc != 1 {
            acc = self.mul(acc, x);
            k += 1;
        }
        k
    }
}

/// The tower `F_p ⊂ F_q ⊂ F_{q^2}` with `q = p^n`, `p` odd.
#[derive(Clone, Debug)]
pub struct FieldTower {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    delta: FqElem,
    base: Arc<Field>,
    ext: Arc<Field>,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^n` with `p` an odd prime.
pub fn odd_prime_power(q: u32) -> Result<(u32, u32)> {
    if q < 3 {
        return Err(Error::NotPrimePower(q));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    if p == 2 {
        return Err(Error::EvenCharacteristic(2));
    }
    let mut rest = q;
    let mut n = 0;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p, n))
}

fn digits(mut k: u32, p: u32, n: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = k % p;
            k /= p;
            d
        })
        .collect()
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p`
/// (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for i in 0..dm {
                r[shift + i] = (r[shift + i] + (p - lead) * m[i]) % p;
            }
        }
    }
    r
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() as u32 - 1;
    for d in 1..=n / 2 {
        for k in 0..p.pow(d) {
            let mut divisor = digits(k, p, d);
            divisor.push(1);
            if poly_rem(modulus, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// First monic irreducible of degree `n`, scanning the lower coefficients
/// `(c_{n-1}, ..., c_0)` in lexicographic order.
fn smallest_irreducible(p: u32, n: u32) -> Vec<u32> {
    (0..p.pow(n))
        .map(|k| {
            let mut m = digits(k, p, n);
            m.push(1);
            m
        })
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}

impl FieldTower {
    /// Builds the tower for `q = p^n` with the default size cap.
    pub fn new(p: u32, n: u32) -> Result<Self> {
        Self::with_cap(p, n, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(p: u32, n: u32, cap: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic(p));
        }
        if n == 0 {
            return Err(Error::InvalidInput("extension degree must be at least 1".into()));
        }
        let q = (p as u64).checked_pow(n).unwrap_or(u64::MAX);
        if q > cap as u64 {
            return Err(Error::SizeCapExceeded {
                what: "q",
                value: q,
                cap: cap as u64,
            });
        }
        let q = q as u32;

        let modulus = smallest_irreducible(p, n);
        let base = build_base(p, n, &modulus);
        let squares: Vec<bool> = {
            let mut s = vec![false; q as usize];
            for x in base.elements() {
                s[base.mul(x, x) as usize] = true;
            }
            s
        };
        let delta = (1..q).find(|&x| !squares[x as usize]).expect("odd q has non-squares");
        let ext = build_ext(&base, delta);

        Ok(FieldTower {
            p,
            n,
            q,
            modulus,
            delta: FqElem(delta),
            base: Arc::new(base),
            ext: Arc::new(ext),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Coefficients of the defining polynomial of `F_q`, low to high, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The fixed non-square with `τ^2 = δ`.
    pub fn delta(&self) -> FqElem {
        self.delta
    }

    pub fn tau(&self) -> Fq2Elem {
        Fq2Elem {
            a: FqElem(0),
            b: FqElem(1),
        }
    }

    pub fn base(&self) -> &Arc<Field> {
        &self.base
    }

    pub fn ext(&self) -> &Arc<Field> {
        &self.ext
    }

    pub fn field(&self, level: Level) -> &Arc<Field> {
        match level {
            Level::Base => &self.base,
            Level::Ext => &self.ext,
        }
    }

    pub fn fq(&self, index: u32) -> FqElem {
        assert!(index < self.q, "index {index} outside F_{}", self.q);
        FqElem(index)
    }

    pub fn fq_elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    pub fn fq2_elements(&self) -> impl Iterator<Item = Fq2Elem> + '_ {
        (0..self.q * self.q).map(|i| self.ext_elem(i))
    }

    pub fn fq_coeffs(&self, x: FqElem) -> Vec<u32> {
        digits(x.0, self.p, self.n)
    }

    pub fn fq_from_coeffs(&self, coeffs: &[u32]) -> FqElem {
        let c: Vec<u32> = coeffs.iter().map(|&c| c % self.p).collect();
        FqElem(pack(&poly_rem(&c, &self.modulus, self.p), self.p))
    }

    pub fn embed(&self, x: FqElem) -> Fq2Elem {
        Fq2Elem { a: x, b: FqElem(0) }
    }

    pub fn ext_index(&self, x: Fq2Elem) -> u32 {
        x.a.0 + self.q * x.b.0
    }

    pub fn ext_elem(&self, index: u32) -> Fq2Elem {
        Fq2Elem {
            a: FqElem(index % self.q),
            b: FqElem(index / self.q),
        }
    }

    pub fn add2(&self, x: Fq2Elem, y: Fq2Elem) -> Fq2Elem {
        self.ext_elem(self.ext.add(self.ext_index(x), self.ext_index(y)))
    }

    pub fn mul2(&self, x: Fq2Elem, y: Fq2Elem) -> Fq2Elem {
        self.ext_elem(self.ext.mul(self.ext_index(x), self.ext_index(y)))
    }

    /// `x ↦ x^q`, i.e. `a + bτ ↦ a − bτ`.
    pub fn frobenius(&self, x: Fq2Elem) -> Fq2Elem {
        Fq2Elem {
            a: x.a,
            b: FqElem(self.base.neg(x.b.0)),
        }
    }

    pub fn frobenius_index(&self, index: u32) -> u32 {
        let (a, b) = (index % self.q, index / self.q);
        a + self.q * self.base.neg(b)
    }

    /// `x · x^q = a^2 − δ b^2`.
    pub fn norm(&self, x: Fq2Elem) -> FqElem {
        let f = &self.base;
        let a2 = f.mul(x.a.0, x.a.0);
        let b2 = f.mul(x.b.0, x.b.0);
        FqElem(f.sub(a2, f.mul(self.delta.0, b2)))
    }

    /// `x + x^q = 2a`.
    pub fn trace(&self, x: Fq2Elem) -> FqElem {
        FqElem(self.base.add(x.a.0, x.a.0))
    }

    /// The square-class character of `F_q^×`: `+1` on squares, `−1` otherwise.
    pub fn quadratic_character(&self, x: FqElem) -> Result<i8> {
        if x.0 == 0 {
            return Err(Error::ZeroInput);
        }
        Ok(if self.base.pow(x.0, ((self.q - 1) / 2) as u64) == 1 {
            1
        } else {
            -1
        })
    }

    /// The kernel `E^1` of the norm, in index order.
    pub fn norm_one_subgroup(&self) -> Vec<Fq2Elem> {
        self.fq2_elements().filter(|&x| self.norm(x).0 == 1).collect()
    }

    pub fn format_fq(&self, x: FqElem) -> String {
        if self.n == 1 {
            return x.0.to_string();
        }
        let terms: Vec<String> = self
            .fq_coeffs(x)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    pub fn format_fq2(&self, x: Fq2Elem) -> String {
        match (x.a.0, x.b.0) {
            (_, 0) => self.format_fq(x.a),
            (0, 1) => "t".into(),
            (0, _) => format!("({})t", self.format_fq(x.b)),
            (_, 1) => format!("{}+t", self.format_fq(x.a)),
            _ => format!("{}+({})t", self.format_fq(x.a), self.format_fq(x.b)),
        }
    }
}

impl fmt::Display for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{} ⊂ F_{}", self.q, self.q * self.q)
    }
}

fn build_base(p: u32, n: u32, modulus: &[u32]) -> Field {
    let q = p.pow(n);
    let qs = q as usize;
    let mut add = vec![0; qs * qs];
    let mut mul = vec![0; qs * qs];
    let elems: Vec<Vec<u32>> = (0..q).map(|k| digits(k, p, n)).collect();
    for x in 0..qs {
        for y in 0..qs {
            let s: Vec<u32> = elems[x].iter().zip(&elems[y]).map(|(a, b)| (a + b) % p).collect();
            add[x * qs + y] = pack(&s, p);
            let mut prod = vec![0u32; 2 * n as usize];
            for (i, a) in elems[x].iter().enumerate() {
                for (j, b) in elems[y].iter().enumerate() {
                    prod[i + j] = (prod[i + j] + a * b) % p;
                }
            }
            let mut r = poly_rem(&prod, modulus, p);
            r.resize(n as usize, 0);
            mul[x * qs + y] = pack(&r, p);
        }
    }
    let basis = (0..n).map(|i| p.pow(i)).collect();
    Field::from_tables(q, p, add, mul, basis)
}

fn build_ext(base: &Field, delta: u32) -> Field {
    let q = base.order();
    let n2 = (q * q) as usize;
    let mut add = vec![0; n2 * n2];
    let mut mul = vec![0; n2 * n2];
    for x in 0..n2 as u32 {
        let (xa, xb) = (x % q, x / q);
        for y in 0..n2 as u32 {
            let (ya, yb) = (y % q, y / q);
            let sa = base.add(xa, ya);
            let sb = base.add(xb, yb);
            add[(x as usize) * n2 + y as usize] = sa + q * sb;
            let ma = base.add(base.mul(xa, ya), base.mul(delta, base.mul(xb, yb)));
            let mb = base.add(base.mul(xa, yb), base.mul(xb, ya));
            mul[(x as usize) * n2 + y as usize] = ma + q * mb;
        }
    }
    let mut basis: Vec<u32> = base.basis().to_vec();
    basis.extend(base.basis().iter().map(|&e| q * e));
    Field::from_tables(q * q, base.characteristic(), add, mul, basis)
}
