//! Arithmetic and dense linear algebra over a prime field `F_ℓ` with
//! `ℓ < 2^32`, so products fit in `u64`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModP {
    ell: u64,
}

impl ModP {
    pub fn new(ell: u64) -> Self {
        assert!(ell > 2 && ell < (1 << 32), "modulus out of range");
        ModP { ell }
    }

    pub fn modulus(&self) -> u64 {
        self.ell
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.ell
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.ell as i64) as u64
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        (x + y) % self.ell
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        (x + self.ell - y) % self.ell
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        x * y % self.ell
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        (self.ell - x) % self.ell
    }

    pub fn pow(&self, x: u64, mut e: u64) -> u64 {
        let mut base = x % self.ell;
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

    /// Inverse by Fermat; `x` must be nonzero mod ℓ.
    pub fn inv(&self, x: u64) -> u64 {
        let x = x % self.ell;
        assert!(x != 0, "zero has no inverse mod {}", self.ell);
        self.pow(x, self.ell - 2)
    }

    /// The representative in `[0, ℓ/2)`, if there is one.
    pub fn lift_small(&self, x: u64) -> Option<u64> {
        let x = x % self.ell;
        (2 * x < self.ell).then_some(x)
    }

    /// The representative in `(−ℓ/2, ℓ/2)`.
    pub fn lift_signed(&self, x: u64) -> i64 {
        let x = x % self.ell;
        if 2 * x < self.ell {
            x as i64
        } else {
            x as i64 - self.ell as i64
        }
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least primitive root modulo the prime `ell`.
pub fn primitive_root(ell: u64) -> u64 {
    let m = ModP::new(ell);
    let factors = prime_factors(ell - 1);
    (2..ell)
        .find(|&g| factors.iter().all(|&f| m.pow(g, (ell - 1) / f) != 1))
        .expect("a prime has primitive roots")
}

pub type Matrix = Vec<Vec<u64>>;

/// Reduced row echelon form in place; zero rows are dropped. Returns the
/// pivot column of each remaining row.
pub fn rref(rows: &mut Matrix, m: ModP) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = m.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = m.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..ncols {
                    let v = m.mul(f, rows[r][j]);
                    rows[i][j] = m.sub(rows[i][j], v);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// A basis of `{x : A x = 0}` for an `r × c` matrix `A`.
pub fn nullspace(a: &Matrix, ncols: usize, m: ModP) -> Matrix {
    let mut rows = a.clone();
    let pivots = rref(&mut rows, m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = m.neg(row[f]);
            }
            v
        })
        .collect()
}

/// Characteristic polynomial `det(xI − A)`, coefficients low to high, via
/// reduction to upper Hessenberg form.
pub fn char_poly(a: &Matrix, m: ModP) -> Vec<u64> {
    let n = a.len();
    let mut h = a.clone();
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else {
            continue;
        };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = m.inv(h[j + 1][j]);
        for i in j + 2..n {
            let u = m.mul(h[i][j], inv);
            if u == 0 {
                continue;
            }
            for c in 0..n {
                let v = m.mul(u, h[j + 1][c]);
                h[i][c] = m.sub(h[i][c], v);
            }
            for row in h.iter_mut() {
                let v = m.mul(u, row[i]);
                row[j + 1] = m.add(row[j + 1], v);
            }
        }
    }

    // p_{k+1} = (x − h_kk) p_k − Σ_{i<k} h_ik (Π_{t=i+1..k} h_{t,t−1}) p_i
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 0..n {
        let mut next = vec![0u64; k + 2];
        for (d, &c) in polys[k].iter().enumerate() {
            next[d + 1] = m.add(next[d + 1], c);
            next[d] = m.sub(next[d], m.mul(h[k][k], c));
        }
        let mut prod = 1u64;
        for i in (0..k).rev() {
            prod = m.mul(prod, h[i + 1][i]);
            let f = m.mul(h[i][k], prod);
            if f != 0 {
                for (d, &c) in polys[i].iter().enumerate() {
                    next[d] = m.sub(next[d], m.mul(f, c));
                }
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

pub fn poly_eval(poly: &[u64], x: u64, m: ModP) -> u64 {
    poly.iter().rev().fold(0, |acc, &c| m.add(m.mul(acc, x), c))
}

/// Distinct roots of `poly` in `F_ℓ`, ascending, by exhaustive search with
/// deflation.
pub fn roots(poly: &[u64], m: ModP) -> Vec<u64> {
    let mut p = poly.to_vec();
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    let mut out = Vec::new();
    let mut x = 0;
    while p.len() > 1 && x < m.modulus() {
        if poly_eval(&p, x, m) == 0 {
            out.push(x);
            while p.len() > 1 && poly_eval(&p, x, m) == 0 {
                p = deflate(&p, x, m);
            }
        }
        x += 1;
    }
    out
}

/// Quotient of `poly` by `(x − r)`, assuming `r` is a root.
fn deflate(poly: &[u64], r: u64, m: ModP) -> Vec<u64> {
    let deg = poly.len() - 1;
    let mut q = vec![0u64; deg];
    let mut carry = 0;
    for d in (1..=deg).rev() {
        carry = m.add(poly[d], m.mul(carry, r));
        q[d - 1] = carry;
    }
    q
}

pub fn mat_mul(a: &Matrix, b: &Matrix, m: ModP) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(0, |acc, t| m.add(acc, m.mul(row[t], b[t][j]))))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// det by plain elimination, independent of the Hessenberg route.
    fn det(mut a: Matrix, m: ModP) -> u64 {
        let n = a.len();
        let mut d = 1;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| a[i][c] != 0) else {
                return 0;
            };
            if p != c {
                a.swap(p, c);
                d = m.neg(d);
            }
            d = m.mul(d, a[c][c]);
            let inv = m.inv(a[c][c]);
            for i in c + 1..n {
                let f = m.mul(a[i][c], inv);
                for j in c..n {
                    let v = m.mul(f, a[c][j]);
                    a[i][j] = m.sub(a[i][j], v);
                }
            }
        }
        d
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(13), 2);
        assert_eq!(primitive_root(37), 2);
        assert_eq!(primitive_root(41), 6);
    }

    #[test]
    fn lifting() {
        let m = ModP::new(37);
        assert_eq!(m.lift_small(18), Some(18));
        assert_eq!(m.lift_small(19), None);
        assert_eq!(m.lift_signed(36), -1);
        assert_eq!(m.from_i64(-1), 36);
    }

    #[test]
    fn roots_of_split_polynomial() {
        let m = ModP::new(13);
        // (x − 2)^2 (x − 5) = x^3 − 9x^2 + 24x − 20
        let p = vec![m.from_i64(-20), m.from_i64(24), m.from_i64(-9), 1];
        assert_eq!(roots(&p, m), vec![2, 5]);
    }

    proptest! {
        #[test]
        fn char_poly_matches_determinant(entries in proptest::collection::vec(0u64..31, 25), x in 0u64..31) {
            let m = ModP::new(31);
            let a: Matrix = entries.chunks(5).map(|r| r.to_vec()).collect();
            let cp = char_poly(&a, m);
            prop_assert_eq!(cp.len(), 6);
            let shifted: Matrix = (0..5)
                .map(|i| (0..5).map(|j| {
                    let d = if i == j { x } else { 0 };
                    m.sub(d, a[i][j])
                }).collect())
                .collect();
            prop_assert_eq!(poly_eval(&cp, x, m), det(shifted, m));
        }

        #[test]
        fn nullspace_vectors_are_annihilated(entries in proptest::collection::vec(0u64..7, 12)) {
            let m = ModP::new(7);
            let a: Matrix = entries.chunks(4).map(|r| r.to_vec()).collect();
            let ns = nullspace(&a, 4, m);
            let mut r = a.clone();
            let rank = rref(&mut r, m).len();
            prop_assert_eq!(rank + ns.len(), 4);
            for v in ns {
                for row in &a {
                    let dot = row.iter().zip(&v).fold(0, |acc, (x, y)| m.add(acc, m.mul(*x, *y)));
                    prop_assert_eq!(dot, 0);
                }
            }
        }
    }
}
