//! Character theory of `H` modulo a Dixon prime `ℓ`.
//!
//! Every quantity that ends up in a report is a nonnegative integer below
//! `ℓ/2`, so it is recovered exactly from its residue. Irrational character
//! values are only ever handled as residues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{self, CanonElem, ClassMultTable, ConjData, GroupTable, Subgroup};
use crate::modp::{self, Matrix, ModP};
use crate::pairs::{ProjPoint, SymmetricPair};

/// Upper end of the search for `ℓ`.
pub const PRIME_SEARCH_CAP: u64 = 1_000_000;

/// Random combinations tried on one subspace before giving up.
pub const MAX_SPLIT_ATTEMPTS: usize = 64;

/// Smallest prime `ℓ ≡ 1 (mod exponent)` with
/// `ℓ > max(2⌈√order⌉, multiplicity_bound)`.
pub fn dixon_prime(order: u64, exponent: u64, multiplicity_bound: u64) -> Result<u64> {
    if order == 0 || exponent == 0 {
        return Err(Error::InvalidInput("order and exponent must be positive".into()));
    }
    let mut root = (order as f64).sqrt() as u64;
    while root * root < order {
        root += 1;
    }
    while root > 0 && (root - 1) * (root - 1) >= order {
        root -= 1;
    }
    let floor = (2 * root).max(multiplicity_bound);
    let mut ell = exponent + 1;
    while ell <= PRIME_SEARCH_CAP {
        if ell > floor && modp::is_prime_u64(ell) {
            return Ok(ell);
        }
        ell += exponent;
    }
    Err(Error::SearchCapExceeded { cap: PRIME_SEARCH_CAP })
}

/// The prime `ℓ`, a primitive `e`-th root of unity mod `ℓ` (for `e` the
/// group exponent), and the seed for eigenspace splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DixonContext {
    pub ell: u64,
    pub exponent: u64,
    pub zeta: u64,
    pub seed: u64,
}

impl DixonContext {
    pub fn new(order: u64, exponent: u64, multiplicity_bound: u64, seed: u64) -> Result<Self> {
        let ell = dixon_prime(order, exponent, multiplicity_bound)?;
        Self::with_ell(ell, exponent, seed)
    }

    /// Uses a caller-chosen prime; it must still be `≡ 1 (mod exponent)`.
    pub fn with_ell(ell: u64, exponent: u64, seed: u64) -> Result<Self> {
        if !(3..1 << 32).contains(&ell) || !modp::is_prime_u64(ell) {
            return Err(Error::InvalidInput(format!("ℓ = {ell} is not a usable prime")));
        }
        if (ell - 1) % exponent != 0 {
            return Err(Error::InvalidInput(format!(
                "ℓ = {ell} is not 1 mod the exponent {exponent}"
            )));
        }
        let m = ModP::new(ell);
        let zeta = m.pow(modp::primitive_root(ell), (ell - 1) / exponent);
        Ok(DixonContext {
            ell,
            exponent,
            zeta,
            seed,
        })
    }

    /// The context for `H` of a pair: multiplicities are bounded by `|X| = q^2 + 1`.
    pub fn for_pair(pair: &SymmetricPair, seed: u64, ell_override: Option<u64>) -> Result<Self> {
        let h = pair.h();
        let e = groups::exponent(h);
        match ell_override {
            Some(ell) => Self::with_ell(ell, e, seed),
            None => Self::new(h.order() as u64, e, multiplicity_bound(pair), seed),
        }
    }

    pub fn modp(&self) -> ModP {
        ModP::new(self.ell)
    }
}

pub fn multiplicity_bound(pair: &SymmetricPair) -> u64 {
    let q = pair.q() as u64;
    2 * (q * q + 1)
}

/// Values on conjugacy classes, as residues mod `ℓ`. Permutation characters
/// and their differences also keep the exact integer values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFunction {
    pub values: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integers: Option<Vec<i64>>,
}

impl ClassFunction {
    pub fn from_integers(ints: Vec<i64>, m: ModP) -> Self {
        ClassFunction {
            values: ints.iter().map(|&v| m.from_i64(v)).collect(),
            integers: Some(ints),
        }
    }

    pub fn trivial(num_classes: usize) -> Self {
        ClassFunction {
            values: vec![1; num_classes],
            integers: Some(vec![1; num_classes]),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `k ↦ φ(k*)`.
    pub fn contragredient(&self, cd: &ConjData) -> Self {
        let n = self.values.len();
        ClassFunction {
            values: (0..n).map(|k| self.values[cd.inverse_class(k)]).collect(),
            integers: self
                .integers
                .as_ref()
                .map(|ints| (0..n).map(|k| ints[cd.inverse_class(k)]).collect()),
        }
    }

    pub fn sub(&self, other: &Self, m: ModP) -> Self {
        ClassFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| m.sub(a, b))
                .collect(),
            integers: match (&self.integers, &other.integers) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x - y).collect()),
                _ => None,
            },
        }
    }

    pub fn mul(&self, other: &Self, m: ModP) -> Self {
        ClassFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| m.mul(a, b))
                .collect(),
            integers: match (&self.integers, &other.integers) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x * y).collect()),
                _ => None,
            },
        }
    }
}

/// Irreducible characters of `H` mod `ℓ`, sorted by degree and then by
/// residue vector. The trivial character is row 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterTable {
    pub ctx: DixonContext,
    pub rows: Vec<ClassFunction>,
    pub degrees: Vec<u64>,
    pub trivial: usize,
    pub steinberg: Option<usize>,
}

impl CharacterTable {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn label(&self, i: usize) -> String {
        format!("chi{:02}", i + 1)
    }

    pub fn find_row(&self, phi: &ClassFunction) -> Option<usize> {
        self.rows.iter().position(|r| r.values == phi.values)
    }

    /// Verifies row count, `Σ d^2 = |H|`, and both orthogonality relations
    /// exactly mod `ℓ`.
    pub fn verify(&self, cd: &ConjData) -> Result<()> {
        let m = self.ctx.modp();
        let n = cd.num_classes();
        let fail = |msg: String| Err(Error::OrthogonalityFailure(msg));
        if self.rows.len() != n || self.degrees.len() != n {
            return fail(format!("{} rows for {n} classes", self.rows.len()));
        }
        if self.rows.iter().any(|r| r.values.len() != n) {
            return fail("row length differs from class count".into());
        }
        let sum_sq: u64 = self.degrees.iter().map(|d| d * d).sum();
        if sum_sq != cd.group_order() {
            return fail(format!("Σd² = {sum_sq} ≠ |H| = {}", cd.group_order()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.values[cd.identity_class()] != self.degrees[i] % self.ctx.ell {
                return fail(format!("row {i}: value at identity differs from its degree"));
            }
        }
        let inv_order = m.inv(cd.group_order());
        for i in 0..n {
            for j in i..n {
                let s = (0..n).fold(0, |acc, k| {
                    let t = m.mul(
                        cd.size(k) % m.modulus(),
                        m.mul(self.rows[i].values[k], self.rows[j].values[cd.inverse_class(k)]),
                    );
                    m.add(acc, t)
                });
                if m.mul(s, inv_order) != u64::from(i == j) {
                    return fail(format!("rows {i}, {j} are not orthonormal"));
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                let s = self.rows.iter().fold(0, |acc, r| {
                    m.add(acc, m.mul(r.values[k], r.values[cd.inverse_class(l)]))
                });
                let expect = if k == l {
                    m.reduce(cd.group_order() / cd.size(k))
                } else {
                    0
                };
                if s != expect {
                    return fail(format!("columns {k}, {l} violate column orthogonality"));
                }
            }
        }
        Ok(())
    }
}

/// Splits the invariant subspace spanned by `basis` (rows in reduced echelon
/// form) into eigenspaces of `mat`.
fn split_space(basis: &Matrix, mat: &Matrix, m: ModP) -> Option<Vec<Matrix>> {
    let dim = basis.len();
    let pivots: Vec<usize> = basis
        .iter()
        .map(|row| row.iter().position(|&x| x != 0).unwrap())
        .collect();
    let images: Vec<Vec<u64>> = basis
        .iter()
        .map(|b| {
            mat.iter()
                .map(|row| row.iter().zip(b).fold(0, |acc, (&x, &y)| m.add(acc, m.mul(x, y))))
                .collect()
        })
        .collect();
    // restricted[r][j]: coordinate r of mat·b_j
    let restricted: Matrix = (0..dim)
        .map(|r| (0..dim).map(|j| images[j][pivots[r]]).collect())
        .collect();
    let eigenvalues = modp::roots(&modp::char_poly(&restricted, m), m);
    let mut pieces = Vec::new();
    let mut total = 0;
    for lambda in eigenvalues {
        let shifted: Matrix = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            m.sub(restricted[i][j], lambda)
                        } else {
                            restricted[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let coords = modp::nullspace(&shifted, dim, m);
        let mut vecs: Matrix = coords
            .iter()
            .map(|y| {
                let mut v = vec![0u64; basis[0].len()];
                for (r, &c) in y.iter().enumerate() {
                    if c != 0 {
                        for (vk, &bk) in v.iter_mut().zip(&basis[r]) {
                            *vk = m.add(*vk, m.mul(c, bk));
                        }
                    }
                }
                v
            })
            .collect();
        modp::rref(&mut vecs, m);
        total += vecs.len();
        pieces.push(vecs);
    }
    // the class algebra is split semisimple over F_ℓ, so eigenspaces fill the space
    (total == dim).then_some(pieces)
}

/// Dixon–Schneider: simultaneous eigenvectors of the class matrices
/// `(M_i)_{jk} = a_{ijk}` are the central characters `ω_χ`, from which the
/// degrees and character values follow.
pub fn dixon_schneider(cd: &ConjData, cm: &ClassMultTable, ctx: &DixonContext) -> Result<CharacterTable> {
    let m = ctx.modp();
    let n = cd.num_classes();
    let class_mats: Vec<Matrix> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| m.reduce(cm.get(i, j, k))).collect())
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let identity: Matrix = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut pending = vec![identity];
    let mut lines: Vec<Vec<u64>> = Vec::new();
    while let Some(space) = pending.pop() {
        if space.len() == 1 {
            lines.push(space.into_iter().next().unwrap());
            continue;
        }
        let mut split = None;
        for _ in 0..MAX_SPLIT_ATTEMPTS {
            let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(0..ctx.ell)).collect();
            let combo: Matrix = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| (0..n).fold(0, |acc, i| m.add(acc, m.mul(weights[i], class_mats[i][j][k]))))
                        .collect()
                })
                .collect();
            match split_space(&space, &combo, m) {
                Some(pieces) if pieces.len() > 1 => {
                    split = Some(pieces);
                    break;
                }
                Some(_) => continue,
                None => {
                    return Err(Error::SplitFailure {
                        attempts: MAX_SPLIT_ATTEMPTS,
                    })
                }
            }
        }
        match split {
            Some(pieces) => pending.extend(pieces),
            None => {
                return Err(Error::SplitFailure {
                    attempts: MAX_SPLIT_ATTEMPTS,
                })
            }
        }
    }

    let order = cd.group_order();
    let mut root = 1u64;
    while (root + 1) * (root + 1) <= order {
        root += 1;
    }
    let e = cd.identity_class();
    let mut rows: Vec<(u64, Vec<u64>)> = Vec::with_capacity(n);
    for v in lines {
        let scale = m.inv(v[e]);
        let omega: Vec<u64> = v.iter().map(|&x| m.mul(x, scale)).collect();
        let norm = (0..n).fold(0, |acc, k| {
            let t = m.mul(m.mul(omega[k], omega[cd.inverse_class(k)]), m.inv(cd.size(k)));
            m.add(acc, t)
        });
        if norm == 0 {
            return Err(Error::OrthogonalityFailure("central character with zero norm".into()));
        }
        let d_sq = m.mul(m.reduce(order), m.inv(norm));
        let degree = (1..=root)
            .find(|&d| m.mul(d, d) == d_sq)
            .ok_or_else(|| Error::OrthogonalityFailure(format!("{d_sq} is not a square of a degree")))?;
        let values = (0..n)
            .map(|k| m.mul(m.mul(degree, omega[k]), m.inv(cd.size(k))))
            .collect();
        rows.push((degree, values));
    }
    rows.sort();

    let trivial = rows
        .iter()
        .position(|(_, v)| v.iter().all(|&x| x == 1))
        .ok_or_else(|| Error::OrthogonalityFailure("no trivial row".into()))?;
    let table = CharacterTable {
        ctx: *ctx,
        degrees: rows.iter().map(|(d, _)| *d).collect(),
        rows: rows
            .into_iter()
            .map(|(_, values)| ClassFunction { values, integers: None })
            .collect(),
        trivial,
        steinberg: None,
    };
    table.verify(cd)?;
    Ok(table)
}

/// `⟨φ, ψ⟩ = |H|^{-1} Σ_k |C_k| φ(k) ψ(k*)`, lifted to `[0, ℓ/2)`.
pub fn inner_product(phi: &ClassFunction, psi: &ClassFunction, cd: &ConjData, ctx: &DixonContext) -> Result<u64> {
    let m = ctx.modp();
    let s = (0..cd.num_classes()).fold(0, |acc, k| {
        let t = m.mul(
            m.reduce(cd.size(k)),
            m.mul(phi.values[k], psi.values[cd.inverse_class(k)]),
        );
        m.add(acc, t)
    });
    let v = m.mul(s, m.inv(cd.group_order()));
    m.lift_small(v).ok_or(Error::LiftOutOfRange {
        residue: v,
        ell: ctx.ell,
    })
}

/// `dim π^K = |K|^{-1} Σ_{x ∈ K} χ(x)`, lifted to `[0, ℓ/2)`.
pub fn invariant_dimension(chi: &ClassFunction, k: &Subgroup, cd: &ConjData, ctx: &DixonContext) -> Result<u64> {
    let m = ctx.modp();
    let s = k
        .elements()
        .iter()
        .fold(0, |acc, &x| m.add(acc, chi.values[cd.class_of(x)]));
    let v = m.mul(s, m.inv(k.order() as u64));
    m.lift_small(v).ok_or(Error::LiftOutOfRange {
        residue: v,
        ell: ctx.ell,
    })
}

/// Permutation character of `g` acting on `points`: the number of fixed
/// points of each class representative.
pub fn perm_character<P: PartialEq>(
    cd: &ConjData,
    g: &GroupTable,
    points: &[P],
    act: impl Fn(&CanonElem, &P) -> P,
    ctx: &DixonContext,
) -> ClassFunction {
    let ints = cd
        .reps()
        .iter()
        .map(|&r| points.iter().filter(|p| act(g.element(r), p) == **p).count() as i64)
        .collect();
    ClassFunction::from_integers(ints, ctx.modp())
}

/// Permutation character of `H` on an `H`-stable subset of `X`.
pub fn pair_perm_character(
    pair: &SymmetricPair,
    cd: &ConjData,
    set: &[ProjPoint],
    ctx: &DixonContext,
) -> ClassFunction {
    let ints = cd.reps().iter().map(|&r| pair.fixed_count(r, set) as i64).collect();
    ClassFunction::from_integers(ints, ctx.modp())
}

/// `St_G|_H`: fixed points on `X` minus one.
pub fn steinberg_restriction(pair: &SymmetricPair, cd: &ConjData, ctx: &DixonContext) -> ClassFunction {
    let ints = cd
        .reps()
        .iter()
        .map(|&r| pair.fixed_count(r, pair.x()) as i64 - 1)
        .collect();
    ClassFunction::from_integers(ints, ctx.modp())
}

/// `χ_{C[Y]} − 1`, the Steinberg character of `H`, not yet matched to a row.
pub fn steinberg_h_character(pair: &SymmetricPair, cd: &ConjData, ctx: &DixonContext) -> ClassFunction {
    let ints = cd
        .reps()
        .iter()
        .map(|&r| pair.fixed_count(r, pair.y()) as i64 - 1)
        .collect();
    ClassFunction::from_integers(ints, ctx.modp())
}

/// Locates `St_H` in the table after checking it is irreducible of degree `q`,
/// and records its index.
pub fn steinberg_of_h(pair: &SymmetricPair, cd: &ConjData, table: &mut CharacterTable) -> Result<usize> {
    let st = steinberg_h_character(pair, cd, &table.ctx);
    let norm = inner_product(&st, &st, cd, &table.ctx)?;
    if norm != 1 {
        return Err(Error::NotIrreducible(norm));
    }
    let idx = table.find_row(&st).ok_or(Error::NotInTable)?;
    if table.degrees[idx] != pair.q() as u64 {
        return Err(Error::InvariantViolation(format!(
            "St_H has degree {}, expected {}",
            table.degrees[idx],
            pair.q()
        )));
    }
    table.steinberg = Some(idx);
    Ok(idx)
}

/// `g ↦ χ(det g)` for the quadratic character `χ` of `F_q^×`. Well defined on
/// `PGL_2` because scaling changes the determinant by a square.
pub fn det_sign_character(pair: &SymmetricPair, cd: &ConjData, ctx: &DixonContext) -> Result<ClassFunction> {
    let h = pair.h();
    let tower = pair.tower();
    let ints = cd
        .reps()
        .iter()
        .map(|&r| {
            let det = h.ambient().det(h.element(r));
            tower.quadratic_character(tower.fq(det)).map(i64::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassFunction::from_integers(ints, ctx.modp()))
}

/// Multiplicity of every table row in `phi`.
pub fn decompose(phi: &ClassFunction, table: &CharacterTable, cd: &ConjData) -> Result<Vec<u64>> {
    table
        .rows
        .iter()
        .map(|chi| inner_product(phi, chi, cd, &table.ctx))
        .collect()
}

/// Checks that `phi` decomposes with lifted multiplicities whose
/// degree-weighted sum is `size`.
pub fn perm_decomposition_ok(phi: &ClassFunction, size: u64, table: &CharacterTable, cd: &ConjData) -> bool {
    match decompose(phi, table, cd) {
        Ok(mults) => mults.iter().zip(&table.degrees).map(|(a, d)| a * d).sum::<u64>() == size,
        Err(_) => false,
    }
}

/// For each row `χ` and every orbit, compares `⟨perm(Ω_i), χ⟩` with
/// `dim χ^{K_i}`.
pub fn frobenius_cross_check(pair: &SymmetricPair, orbit: usize, cd: &ConjData, table: &CharacterTable) -> bool {
    let o = &pair.omega_orbits()[orbit];
    let perm = pair_perm_character(pair, cd, &o.points, &table.ctx);
    table.rows.iter().all(|chi| {
        match (
            inner_product(&perm, chi, cd, &table.ctx),
            invariant_dimension(chi, &o.stabilizer, cd, &table.ctx),
        ) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    })
}

/// Eigenvalue multiplicities of `ρ(g)` for `g` in class `k`: entry `j` is the
/// multiplicity of `ζ_o^j`, `o` the order of `g`.
pub fn eigenvalue_multiplicities(
    chi: &ClassFunction,
    k: usize,
    g: &GroupTable,
    cd: &ConjData,
    ctx: &DixonContext,
) -> Result<Vec<u64>> {
    let m = ctx.modp();
    let o = cd.order(k) as u64;
    let zeta_o = m.pow(ctx.zeta, ctx.exponent / o);
    let rep = cd.rep(k);
    let power_values: Vec<u64> = (0..o).map(|t| chi.values[cd.class_of(g.pow(rep, t))]).collect();
    let inv_o = m.inv(o);
    (0..o)
        .map(|j| {
            let s = (0..o).fold(0, |acc, t| {
                let w = m.pow(zeta_o, (o - (j * t) % o) % o);
                m.add(acc, m.mul(power_values[t as usize], w))
            });
            let v = m.mul(s, inv_o);
            m.lift_small(v).ok_or(Error::LiftOutOfRange {
                residue: v,
                ell: ctx.ell,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{class_mult_coeffs, conjugacy_data, enumerate_group, Family};
    use crate::pairs::{build_galois_pair, Caps};

    fn table_for(family: Family, p: u32) -> (SymmetricPair, ConjData, CharacterTable) {
        let pair = build_galois_pair(family, p, 1, &Caps::default()).unwrap();
        let cd = conjugacy_data(pair.h());
        let cm = class_mult_coeffs(pair.h(), &cd);
        let ctx = DixonContext::for_pair(&pair, 0, None).unwrap();
        let mut t = dixon_schneider(&cd, &cm, &ctx).unwrap();
        steinberg_of_h(&pair, &cd, &mut t).unwrap();
        (pair, cd, t)
    }

    #[test]
    fn dixon_prime_rule() {
        assert_eq!(dixon_prime(24, 12, 20).unwrap(), 37);
        assert_eq!(dixon_prime(24, 12, 2).unwrap(), 13);
        assert!(matches!(
            dixon_prime(24, 2_000_000, 2),
            Err(Error::SearchCapExceeded { .. })
        ));
    }

    #[test]
    fn small_degrees() {
        let (_, _, t) = table_for(Family::Pgl2, 3);
        assert_eq!(t.degrees, vec![1, 1, 2, 3, 3]);
        let (_, _, t) = table_for(Family::Sl2, 3);
        assert_eq!(t.degrees, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn rows_have_unit_norm_and_trivial_first() {
        let (_, cd, t) = table_for(Family::Sl2, 5);
        assert_eq!(t.trivial, 0);
        for r in &t.rows {
            assert_eq!(inner_product(r, r, &cd, &t.ctx).unwrap(), 1);
        }
        assert_eq!(t.degrees[t.steinberg.unwrap()], 5);
    }

    #[test]
    fn table_independent_of_seed() {
        let pair = build_galois_pair(Family::Pgl2, 7, 1, &Caps::default()).unwrap();
        let cd = conjugacy_data(pair.h());
        let cm = class_mult_coeffs(pair.h(), &cd);
        let a = dixon_schneider(&cd, &cm, &DixonContext::for_pair(&pair, 0, None).unwrap()).unwrap();
        let b = dixon_schneider(&cd, &cm, &DixonContext::for_pair(&pair, 99, None).unwrap()).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn perm_character_basics() {
        let (pair, cd, t) = table_for(Family::Pgl2, 3);
        let h = pair.h();
        let base = pair.tower().base().clone();
        let y = crate::pairs::projective_line(&base);
        let perm = perm_character(&cd, h, &y, |g, p| crate::pairs::moebius_act(&base, g, *p), &t.ctx);
        assert_eq!(perm.integers.as_ref().unwrap()[0], 4);
        assert_eq!(inner_product(&perm, &perm, &cd, &t.ctx).unwrap(), 2);
        assert_eq!(perm, pair_perm_character(&pair, &cd, pair.y(), &t.ctx));

        let elems: Vec<u32> = (0..h.order() as u32).collect();
        let regular = perm_character(&cd, h, &elems, |g, x| h.mul(h.index_of(g).unwrap(), *x), &t.ctx);
        let ints = regular.integers.unwrap();
        assert_eq!(ints[0], 24);
        assert!(ints[1..].iter().all(|&v| v == 0));
    }

    #[test]
    fn steinberg_restriction_values() {
        let (pair, cd, t) = table_for(Family::Pgl2, 3);
        let st_g = steinberg_restriction(&pair, &cd, &t.ctx);
        let ints = st_g.integers.clone().unwrap();
        assert_eq!(ints[0], 9);
        assert!(ints.iter().all(|&v| v >= -1));
        let one = ClassFunction::trivial(cd.num_classes());
        assert_eq!(inner_product(&st_g, &one, &cd, &t.ctx).unwrap(), pair.r() as u64);
        let perm_x = pair_perm_character(&pair, &cd, pair.x(), &t.ctx);
        assert_eq!(inner_product(&perm_x, &one, &cd, &t.ctx).unwrap(), 1 + pair.r() as u64);
        let st_h = &t.rows[t.steinberg.unwrap()];
        assert_eq!(inner_product(&st_g, st_h, &cd, &t.ctx).unwrap(), 1);
        assert_eq!(inner_product(st_h, &one, &cd, &t.ctx).unwrap(), 0);
    }

    #[test]
    fn invariant_dimensions() {
        let (pair, cd, t) = table_for(Family::Pgl2, 3);
        let k1 = &pair.omega_orbits()[0].stabilizer;
        let st = &t.rows[t.steinberg.unwrap()];
        assert_eq!(invariant_dimension(st, k1, &cd, &t.ctx).unwrap(), 0);
        assert_eq!(invariant_dimension(&t.rows[t.trivial], k1, &cd, &t.ctx).unwrap(), 1);

        let (pair, cd, t) = table_for(Family::Sl2, 3);
        let e1 = pair.norm_one_image();
        let st = &t.rows[t.steinberg.unwrap()];
        assert_eq!(invariant_dimension(st, &e1, &cd, &t.ctx).unwrap(), 1);
    }

    #[test]
    fn frobenius_reciprocity_small() {
        for (fam, p) in [(Family::Pgl2, 3), (Family::Sl2, 5)] {
            let (pair, cd, t) = table_for(fam, p);
            assert!(frobenius_cross_check(&pair, 0, &cd, &t));
        }
    }

    #[test]
    fn lift_out_of_range_with_tiny_ell() {
        // ℓ = 13 is valid for PGL_2(3) but too small to lift ⟨perm_X, perm_X⟩
        let pair = build_galois_pair(Family::Pgl2, 3, 1, &Caps::default()).unwrap();
        let cd = conjugacy_data(pair.h());
        let ctx = DixonContext::for_pair(&pair, 0, Some(13)).unwrap();
        let big = pair_perm_character(&pair, &cd, pair.x(), &ctx);
        let scaled = big.mul(
            &ClassFunction::from_integers(vec![6; cd.num_classes()], ctx.modp()),
            ctx.modp(),
        );
        let one = ClassFunction::trivial(cd.num_classes());
        assert!(matches!(
            inner_product(&scaled, &one, &cd, &ctx),
            Err(Error::LiftOutOfRange { .. })
        ));
        assert!(DixonContext::for_pair(&pair, 0, Some(17)).is_err());
    }

    #[test]
    fn eigenvalue_data_is_consistent() {
        let (pair, cd, t) = table_for(Family::Sl2, 5);
        for (i, chi) in t.rows.iter().enumerate() {
            for k in 0..cd.num_classes() {
                let mults = eigenvalue_multiplicities(chi, k, pair.h(), &cd, &t.ctx).unwrap();
                assert_eq!(mults.iter().sum::<u64>(), t.degrees[i]);
            }
        }
    }

    #[test]
    fn sign_character_is_a_row() {
        let (pair, cd, t) = table_for(Family::Pgl2, 5);
        let sgn = det_sign_character(&pair, &cd, &t.ctx).unwrap();
        let idx = t.find_row(&sgn).unwrap();
        assert_eq!(t.degrees[idx], 1);
        assert_ne!(idx, t.trivial);
    }

    #[test]
    fn table_for_q9() {
        let tower = crate::fields::FieldTower::new(3, 2).unwrap();
        let h = enumerate_group(Family::Pgl2, tower.base().clone(), 20_000).unwrap();
        let cd = conjugacy_data(&h);
        let cm = class_mult_coeffs(&h, &cd);
        let ctx = DixonContext::new(720, groups::exponent(&h), 2 * 82, 0).unwrap();
        let t = dixon_schneider(&cd, &cm, &ctx).unwrap();
        assert_eq!(t.num_rows(), 11);
        assert_eq!(t.degrees.iter().map(|d| d * d).sum::<u64>(), 720);
    }
}
