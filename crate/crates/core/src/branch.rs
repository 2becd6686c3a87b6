//! Branching of `St_G` to `H`: the per-irreducible multiplicity formula, the
//! fixed-point decomposition behind it, the trivial-character count and the
//! family-specific structure reports.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{CacheKey, TableCache};
use crate::chars::{self, CharacterTable, ClassFunction, DixonContext};
use crate::error::{Error, Result};
use crate::fields::odd_prime_power;
use crate::groups::{class_mult_coeffs, conjugacy_data, ConjData, Family};
use crate::pairs::{self, build_galois_pair, Caps, ProjPoint, SymmetricPair};

/// Version of the report layout; bumped whenever a field changes meaning.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// One irreducible `π` of `H` and both sides of its branching formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    pub degree: u64,
    /// `dim Hom_H(St_G, π)`.
    pub lhs: u64,
    /// `dim π^{K_i}` for each split orbit.
    pub t: Vec<u64>,
    pub st_flag: bool,
    pub rhs: u64,
    pub ok: bool,
    pub trivial: bool,
    /// Residues of the character, kept for failure diagnostics.
    #[serde(skip)]
    pub residues: Vec<u64>,
    #[serde(skip)]
    pub orbit_sizes: Vec<usize>,
}

/// Fixed-point form of `St_G|_H ≅ ⊕_i ind_{K_i}^H 1 ⊕ St_H`: at every class
/// representative, `|Fix_X(h)| − 1 = Σ_i |Fix_{Ω_i}(h)| + |Fix_Y(h)| − 1`.
pub fn decomposition_identity_check(pair: &SymmetricPair, cd: &ConjData) -> bool {
    cd.reps().iter().all(|&h| {
        let lhs = pair.fixed_count(h, pair.x()) as i64 - 1;
        let split: usize = pair.omega_orbits().iter().map(|o| pair.fixed_count(h, &o.points)).sum();
        lhs == split as i64 + pair.fixed_count(h, pair.y()) as i64 - 1
    })
}

fn steinberg_index(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<usize> {
    match table.steinberg {
        Some(i) => Ok(i),
        None => table
            .find_row(&chars::steinberg_h_character(pair, cd, &table.ctx))
            .ok_or(Error::NotInTable),
    }
}

/// Both sides of the branching formula for every row of the table,
/// including the trivial one.
pub fn branch_rows(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<Vec<BranchRow>> {
    let ctx = &table.ctx;
    let st_g = chars::steinberg_restriction(pair, cd, ctx);
    let st_h = steinberg_index(pair, cd, table)?;
    let names = known_names(pair, cd, table)?;
    let orbit_sizes: Vec<usize> = pair.omega_orbits().iter().map(|o| o.points.len()).collect();
    (0..table.num_rows())
        .into_par_iter()
        .map(|i| {
            let chi = &table.rows[i];
            let lhs = chars::inner_product(&st_g, chi, cd, ctx)?;
            let t = pair
                .omega_orbits()
                .iter()
                .map(|o| chars::invariant_dimension(chi, &o.stabilizer, cd, ctx))
                .collect::<Result<Vec<u64>>>()?;
            let st_flag = i == st_h;
            let rhs = t.iter().sum::<u64>() + u64::from(st_flag);
            Ok(BranchRow {
                label: table.label(i),
                name: names.get(&i).cloned(),
                degree: table.degrees[i],
                lhs,
                t,
                st_flag,
                rhs,
                ok: lhs == rhs,
                trivial: i == table.trivial,
                residues: chi.values.clone(),
                orbit_sizes: orbit_sizes.clone(),
            })
        })
        .collect()
}

fn known_names(
    pair: &SymmetricPair,
    cd: &ConjData,
    table: &CharacterTable,
) -> Result<std::collections::BTreeMap<usize, String>> {
    let mut names = std::collections::BTreeMap::new();
    names.insert(table.trivial, "1".to_string());
    let st = steinberg_index(pair, cd, table)?;
    names.insert(st, "St_H".to_string());
    if pair.family() == Family::Pgl2 {
        let m = table.ctx.modp();
        let sgn = chars::det_sign_character(pair, cd, &table.ctx)?;
        if let Some(i) = table.find_row(&sgn) {
            names.insert(i, "sgn".to_string());
        }
        if let Some(i) = table.find_row(&sgn.mul(&table.rows[st], m)) {
            names.insert(i, "sgn.St_H".to_string());
        }
    }
    Ok(names)
}

/// Rows for every `π ≠ 1_H`; fails with the offending rows if any violates
/// the formula.
pub fn verify_branching_rows(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<Vec<BranchRow>> {
    let rows: Vec<BranchRow> = branch_rows(pair, cd, table)?
        .into_iter()
        .filter(|r| !r.trivial)
        .collect();
    let bad: Vec<BranchRow> = rows.iter().filter(|r| !r.ok).cloned().collect();
    if bad.is_empty() {
        Ok(rows)
    } else {
        Err(Error::VerificationFailure(bad))
    }
}

/// The multiplicity `m_0` of the trivial character, computed two ways, next
/// to the reference value `r − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialCase {
    pub m0_inner_product: u64,
    pub m0_burnside: u64,
    pub h_orbits_on_x: u64,
    pub r: u64,
    pub reference_r_minus_1: i64,
    pub discrepancy: bool,
    pub m0_equals_r: bool,
    pub note: String,
}

pub fn trivial_case_report(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<TrivialCase> {
    let st_g = chars::steinberg_restriction(pair, cd, &table.ctx);
    let one = ClassFunction::trivial(cd.num_classes());
    let m0 = chars::inner_product(&st_g, &one, cd, &table.ctx)?;

    let h = pair.h();
    let total: u64 = (0..h.order() as u32)
        .map(|x| pair.fixed_count(x, pair.x()) as u64)
        .sum();
    if total % h.order() as u64 != 0 {
        return Err(Error::InternalMismatch(format!(
            "fixed-point total {total} is not divisible by |H| = {}",
            h.order()
        )));
    }
    let burnside = total / h.order() as u64;
    let explicit = (pair.y_orbit_count() + pair.r()) as u64;
    if burnside != explicit || burnside == 0 || m0 != burnside - 1 {
        return Err(Error::InternalMismatch(format!(
            "m0 = {m0}, Burnside orbit count = {burnside}, explicit orbit count = {explicit}"
        )));
    }
    let r = pair.r() as u64;
    let reference = r as i64 - 1;
    Ok(TrivialCase {
        m0_inner_product: m0,
        m0_burnside: burnside - 1,
        h_orbits_on_x: burnside,
        r,
        reference_r_minus_1: reference,
        discrepancy: m0 as i64 != reference,
        m0_equals_r: m0 == r,
        note: "over a finite field every H-module is semisimple, so dim Hom_H(St_G, 1) equals \
               (#H-orbits on X) - 1 = r; the reference value r - 1 is reported for comparison"
            .into(),
    })
}

/// The bound `r ≤ 2` for finite fields.
pub fn r_bound_check(pair: &SymmetricPair) -> bool {
    pair.r() <= 2
}

/// A computed value next to the p-adic reference value, when one exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub finite_computed: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub padic_reference: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRow {
    pub name: String,
    pub label: String,
    pub degree: u64,
    pub lhs: u64,
    pub t_1: u64,
    pub padic_reference: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctionEntry {
    pub label: String,
    pub degree: u64,
    pub lhs: u64,
    pub t_1: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pgl2Special {
    pub r: usize,
    pub k1_order: usize,
    pub k1_cyclic: bool,
    pub k1_is_units_image: bool,
    /// `χ∘det` for `χ` trivial and quadratic.
    pub det_characters: Vec<NamedRow>,
    /// `χ ⊗ St_H` for `χ` trivial and quadratic.
    pub twisted_steinberg: Vec<NamedRow>,
    /// `(lhs, t_1)` for every irreducible.
    pub distinction_table: Vec<DistinctionEntry>,
    pub note: String,
}

/// `PGL_2` structure: one split orbit, `K_1 ≅ E^×/F^×` cyclic of order
/// `q + 1`, and the multiplicities of the one-dimensional and twisted
/// Steinberg characters.
pub fn pgl2_special_report(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<Pgl2Special> {
    if pair.family() != Family::Pgl2 {
        return Err(Error::InvalidInput("PGL_2 report requested for another family".into()));
    }
    let q = pair.q() as usize;
    if pair.r() != 1 {
        return Err(Error::StructureFailure(format!("r = {}, expected 1", pair.r())));
    }
    let k1 = &pair.omega_orbits()[0].stabilizer;
    let k1_cyclic = k1.is_cyclic(pair.h());
    if k1.order() != q + 1 || !k1_cyclic {
        return Err(Error::StructureFailure(format!(
            "K_1 has order {} (cyclic: {k1_cyclic}), expected cyclic of order {}",
            k1.order(),
            q + 1
        )));
    }

    let rows = branch_rows(pair, cd, table)?;
    let m = table.ctx.modp();
    let sgn = chars::det_sign_character(pair, cd, &table.ctx)?;
    let st = steinberg_index(pair, cd, table)?;
    let sgn_st = sgn.mul(&table.rows[st], m);
    let locate = |phi: &ClassFunction| table.find_row(phi).ok_or(Error::NotInTable);
    let named = |name: &str, idx: usize, padic: u64| NamedRow {
        name: name.into(),
        label: rows[idx].label.clone(),
        degree: rows[idx].degree,
        lhs: rows[idx].lhs,
        t_1: rows[idx].t[0],
        padic_reference: padic,
    };
    // the quadratic character stands in for the norm-class character
    let det_characters = vec![named("1.det", table.trivial, 0), named("sgn.det", locate(&sgn)?, 1)];
    let twisted_steinberg = vec![named("St_H", st, 1), named("sgn.St_H", locate(&sgn_st)?, 0)];
    let distinction_table = rows
        .iter()
        .map(|r| DistinctionEntry {
            label: r.label.clone(),
            degree: r.degree,
            lhs: r.lhs,
            t_1: r.t[0],
        })
        .collect();
    Ok(Pgl2Special {
        r: pair.r(),
        k1_order: k1.order(),
        k1_cyclic,
        k1_is_units_image: *k1 == pair.units_image(),
        det_characters,
        twisted_steinberg,
        distinction_table,
        note: "finite-field values are computed; p-adic reference values use the quadratic \
               character of F_q^x in place of the norm-class character"
            .into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2Special {
    pub e1_order: usize,
    pub e1_is_stabilizer: bool,
    pub e1_orbits_on_y: usize,
    pub e1_orbit_sizes: Vec<usize>,
    pub steinberg_e1_invariants: u64,
    pub steinberg_row: BranchRow,
    pub unit_index: u64,
    pub comparisons: Vec<Comparison>,
    pub note: String,
}

/// `SL_2` structure: `E^1`-orbits on `Y`, `dim St_H^{E^1}`, the branching row
/// of `St_H`, and `|E^× / E^1 F^×|`.
pub fn sl2_special_report(pair: &SymmetricPair, cd: &ConjData, table: &CharacterTable) -> Result<Sl2Special> {
    if pair.family() != Family::Sl2 {
        return Err(Error::InvalidInput("SL_2 report requested for another family".into()));
    }
    let e1 = pair.norm_one_image();
    let mut seen = BTreeSet::new();
    let mut sizes = Vec::new();
    for &y in pair.y() {
        if seen.contains(&y) {
            continue;
        }
        let orbit: BTreeSet<ProjPoint> = e1.elements().iter().map(|&k| pair.act(k, y)).collect();
        sizes.push(orbit.len());
        seen.extend(orbit);
    }

    let st = steinberg_index(pair, cd, table)?;
    let invariants = chars::invariant_dimension(&table.rows[st], &e1, cd, &table.ctx)?;
    let steinberg_row = branch_rows(pair, cd, table)?.swap_remove(st);

    let tower = pair.tower();
    let e1_elems = tower.norm_one_subgroup();
    let mut products = BTreeSet::new();
    for &x in &e1_elems {
        for a in tower.fq_elements().filter(|a| a.index() != 0) {
            products.insert(tower.mul2(x, tower.embed(a)));
        }
    }
    let q = tower.q() as u64;
    let unit_index = (q * q - 1) / products.len() as u64;

    let cmp = |quantity: &str, finite: i64, padic: i64| Comparison {
        quantity: quantity.into(),
        finite_computed: finite,
        padic_reference: Some(padic),
    };
    let comparisons = vec![
        cmp("E1 orbits on P1(F)", sizes.len() as i64, 2),
        cmp("dim St_H^E1", invariants as i64, 1),
        cmp("dim Hom_H(St_G, St_H)", steinberg_row.lhs as i64, 3),
        cmp("index of E1 F^x in E^x", unit_index as i64, 2),
        cmp("r", pair.r() as i64, 2),
    ];
    Ok(Sl2Special {
        e1_order: e1.order(),
        e1_is_stabilizer: pair.omega_orbits().iter().any(|o| o.stabilizer == e1),
        e1_orbits_on_y: sizes.len(),
        e1_orbit_sizes: sizes,
        steinberg_e1_invariants: invariants,
        steinberg_row,
        unit_index,
        comparisons,
        note: "the multiplicity of St_H differs from the p-adic value because the finite field \
               has a single split orbit (r = 1) where the p-adic field has two"
            .into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Special {
    Pgl2(Pgl2Special),
    Sl2(Box<Sl2Special>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub pair_ms: u64,
    pub chartable_ms: u64,
    pub verify_ms: u64,
    pub cache_hit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub command: Option<String>,
    pub version: String,
    pub format_version: u32,
    pub seed: u64,
    pub ell: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ell_override: Option<u64>,
    pub caps: Caps,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub family: Family,
    pub p: u32,
    pub n: u32,
    pub q: u32,
    pub modulus: Vec<u32>,
    pub delta: String,
    pub h_order: usize,
    pub x_size: usize,
    pub y_size: usize,
    pub omega_size: usize,
    pub y_orbit_count: usize,
    pub r: usize,
    pub g_orbits_on_x_squared: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub index: usize,
    pub basepoint: String,
    pub size: usize,
    pub stabilizer_order: usize,
    pub stabilizer_cyclic: bool,
    /// Equals the image of `E^×` (`PGL_2`) or `E^1` (`SL_2`).
    pub stabilizer_is_torus: bool,
    pub unipotent_free: bool,
    pub frobenius_reciprocity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartableSummary {
    pub classes: usize,
    pub ell: u64,
    pub exponent: u64,
    pub seed: u64,
    pub class_sizes: Vec<u64>,
    pub class_orders: Vec<u32>,
    pub degrees: Vec<u64>,
    pub sum_of_squares: u64,
    pub orthogonality: bool,
    pub trivial_label: String,
    pub steinberg_label: String,
    pub steinberg_h_norm: u64,
    pub perm_decompositions: bool,
    pub eigenvalue_data: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub decomposition_identity: bool,
    pub branching_formula: bool,
    pub r_bound: bool,
    pub orbit_structure: bool,
    pub frobenius_reciprocity: bool,
    pub steinberg_g_irreducible: bool,
    pub steinberg_h_irreducible: bool,
    pub chartable_certificates: bool,
    pub degree_bookkeeping: bool,
    pub trivial_case_consistent: bool,
    pub special_structure: bool,
    pub all_ok: bool,
}

/// Everything computed for one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub meta: Meta,
    pub pair: PairSummary,
    pub orbits: Vec<OrbitSummary>,
    pub chartable_summary: ChartableSummary,
    pub rows: Vec<BranchRow>,
    pub trivial_case: TrivialCase,
    pub special: Special,
    pub checks: Checks,
}

impl BranchReport {
    pub fn all_ok(&self) -> bool {
        self.checks.all_ok
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub ell_override: Option<u64>,
    pub caps: Caps,
    pub cache: Option<TableCache>,
    pub record_timings: bool,
}

/// Intermediate objects, kept for callers that need more than the report.
pub struct Analysis {
    pub pair: SymmetricPair,
    pub cd: ConjData,
    pub table: CharacterTable,
    pub cache_hit: bool,
    pub warnings: Vec<String>,
    pub pair_ms: u64,
    pub chartable_ms: u64,
}

/// Builds the pair and the character table of `H`, reading and writing the
/// table cache when one is configured.
pub fn prepare(family: Family, p: u32, n: u32, opts: &AnalysisOptions) -> Result<Analysis> {
    let start = Instant::now();
    let pair = build_galois_pair(family, p, n, &opts.caps)?;
    let cd = conjugacy_data(pair.h());
    let pair_ms = start.elapsed().as_millis() as u64;

    let start = Instant::now();
    let ctx = DixonContext::for_pair(&pair, opts.seed, opts.ell_override)?;
    let key = CacheKey::new(family, pair.q(), ctx.ell, opts.seed);
    let mut warnings = Vec::new();
    let mut cached = None;
    if let Some(cache) = &opts.cache {
        match cache.load(&key, &cd) {
            Ok(Some(t)) if t.ctx == ctx => cached = Some(t),
            Ok(Some(_)) => warnings.push(format!(
                "cache entry {} has a different context; recomputing",
                key.file_name()
            )),
            Ok(None) => {}
            Err(e) => warnings.push(format!("cache read failed: {e}")),
        }
    }
    let cache_hit = cached.is_some();
    let mut table = match cached {
        Some(t) => t,
        None => {
            let cm = class_mult_coeffs(pair.h(), &cd);
            chars::dixon_schneider(&cd, &cm, &ctx)?
        }
    };
    chars::steinberg_of_h(&pair, &cd, &mut table)?;
    if !cache_hit {
        if let Some(cache) = &opts.cache {
            if let Err(e) = cache.store(&key, &table) {
                warnings.push(format!("cache write failed: {e}"));
            }
        }
    }
    let chartable_ms = start.elapsed().as_millis() as u64;
    Ok(Analysis {
        pair,
        cd,
        table,
        cache_hit,
        warnings,
        pair_ms,
        chartable_ms,
    })
}

pub fn format_point(pair: &SymmetricPair, pt: ProjPoint) -> String {
    match pt {
        ProjPoint::Affine(x) => {
            let t = pair.tower();
            format!("[{}:1]", t.format_fq2(t.ext_elem(x)))
        }
        ProjPoint::Infinity => "[1:0]".into(),
    }
}

/// Runs every verification on a prepared pair and assembles the report.
pub fn verify(analysis: &Analysis, opts: &AnalysisOptions) -> Result<BranchReport> {
    let start = Instant::now();
    let Analysis { pair, cd, table, .. } = analysis;
    let ctx = &table.ctx;
    let q = pair.q() as u64;

    let rows = branch_rows(pair, cd, table)?;
    let st = steinberg_index(pair, cd, table)?;
    let trivial_case = trivial_case_report(pair, cd, table)?;
    let special = match pair.family() {
        Family::Pgl2 => Special::Pgl2(pgl2_special_report(pair, cd, table)?),
        Family::Sl2 => Special::Sl2(Box::new(sl2_special_report(pair, cd, table)?)),
    };

    let torus = match pair.family() {
        Family::Pgl2 => pair.units_image(),
        Family::Sl2 => pair.norm_one_image(),
    };
    let orbits: Vec<OrbitSummary> = pair
        .omega_orbits()
        .iter()
        .enumerate()
        .map(|(i, o)| OrbitSummary {
            index: i + 1,
            basepoint: format_point(pair, o.basepoint),
            size: o.points.len(),
            stabilizer_order: o.stabilizer.order(),
            stabilizer_cyclic: o.stabilizer.is_cyclic(pair.h()),
            stabilizer_is_torus: o.stabilizer == torus,
            unipotent_free: o
                .stabilizer
                .elements()
                .iter()
                .all(|&k| !pair.h().ambient().is_nontrivial_unipotent(pair.h().element(k))),
            frobenius_reciprocity: chars::frobenius_cross_check(pair, i, cd, table),
        })
        .collect();

    let st_h_char = chars::steinberg_h_character(pair, cd, ctx);
    let st_h_norm = chars::inner_product(&st_h_char, &st_h_char, cd, ctx)?;
    let mut perm_sets: Vec<&[ProjPoint]> = vec![pair.x(), pair.y()];
    perm_sets.extend(pair.omega_orbits().iter().map(|o| o.points.as_slice()));
    let perm_ok = perm_sets.iter().all(|set| {
        let phi = chars::pair_perm_character(pair, cd, set, ctx);
        chars::perm_decomposition_ok(&phi, set.len() as u64, table, cd)
    });
    let eigen_ok = (0..table.num_rows()).all(|i| {
        (0..cd.num_classes()).all(|k| {
            chars::eigenvalue_multiplicities(&table.rows[i], k, pair.h(), cd, ctx)
                .map(|m| m.iter().sum::<u64>() == table.degrees[i])
                .unwrap_or(false)
        })
    });
    let certificates = table.verify(cd).is_ok();

    let g_rank = pairs::g_transitivity_rank(pair);
    let orbit_structure = pair.r() == 1
        && pair.y_orbit_count() == 1
        && orbits
            .iter()
            .all(|o| o.size * o.stabilizer_order == pair.h().order() && o.unipotent_free)
        && orbits
            .iter()
            .all(|o| o.stabilizer_order as u64 == q + 1 && o.stabilizer_is_torus)
        && match pair.family() {
            Family::Pgl2 => orbits.iter().all(|o| o.stabilizer_cyclic),
            Family::Sl2 => true,
        };
    let special_structure = match &special {
        Special::Pgl2(s) => s.k1_cyclic && s.k1_is_units_image && s.k1_order as u64 == q + 1,
        Special::Sl2(s) => {
            s.e1_is_stabilizer && s.e1_orbits_on_y == 2 && s.steinberg_e1_invariants == 1 && s.unit_index == 2
        }
    };

    let mut checks = Checks {
        decomposition_identity: decomposition_identity_check(pair, cd),
        branching_formula: rows.iter().filter(|r| !r.trivial).all(|r| r.ok),
        r_bound: r_bound_check(pair),
        orbit_structure,
        frobenius_reciprocity: orbits.iter().all(|o| o.frobenius_reciprocity),
        steinberg_g_irreducible: g_rank == 2,
        steinberg_h_irreducible: st_h_norm == 1,
        chartable_certificates: certificates,
        degree_bookkeeping: rows.iter().map(|r| r.lhs * r.degree).sum::<u64>() == q * q,
        trivial_case_consistent: trivial_case.m0_equals_r && trivial_case.m0_inner_product == trivial_case.m0_burnside,
        special_structure,
        all_ok: false,
    };
    checks.all_ok = checks.decomposition_identity
        && checks.branching_formula
        && checks.r_bound
        && checks.orbit_structure
        && checks.frobenius_reciprocity
        && checks.steinberg_g_irreducible
        && checks.steinberg_h_irreducible
        && checks.chartable_certificates
        && checks.degree_bookkeeping
        && checks.trivial_case_consistent
        && checks.special_structure;

    let tower = pair.tower();
    let verify_ms = start.elapsed().as_millis() as u64;
    Ok(BranchReport {
        meta: Meta {
            tool: "stbranch".into(),
            command: None,
            version: env!("CARGO_PKG_VERSION").into(),
            format_version: REPORT_FORMAT_VERSION,
            seed: ctx.seed,
            ell: ctx.ell,
            ell_override: opts.ell_override,
            caps: opts.caps,
            timings: opts.record_timings.then_some(Timings {
                pair_ms: analysis.pair_ms,
                chartable_ms: analysis.chartable_ms,
                verify_ms,
                cache_hit: analysis.cache_hit,
            }),
        },
        pair: PairSummary {
            family: pair.family(),
            p: tower.p(),
            n: tower.n(),
            q: tower.q(),
            modulus: tower.modulus().to_vec(),
            delta: tower.format_fq(tower.delta()),
            h_order: pair.h().order(),
            x_size: pair.x().len(),
            y_size: pair.y().len(),
            omega_size: pair.omega().len(),
            y_orbit_count: pair.y_orbit_count(),
            r: pair.r(),
            g_orbits_on_x_squared: g_rank,
        },
        orbits,
        chartable_summary: ChartableSummary {
            classes: cd.num_classes(),
            ell: ctx.ell,
            exponent: ctx.exponent,
            seed: ctx.seed,
            class_sizes: cd.sizes().to_vec(),
            class_orders: (0..cd.num_classes()).map(|k| cd.order(k)).collect(),
            degrees: table.degrees.clone(),
            sum_of_squares: table.degrees.iter().map(|d| d * d).sum(),
            orthogonality: certificates,
            trivial_label: table.label(table.trivial),
            steinberg_label: table.label(st),
            steinberg_h_norm: st_h_norm,
            perm_decompositions: perm_ok,
            eigenvalue_data: eigen_ok,
        },
        rows,
        trivial_case,
        special,
        checks,
    })
}

/// Builds, verifies and reports one Galois pair.
pub fn analyze(family: Family, p: u32, n: u32, opts: &AnalysisOptions) -> Result<(BranchReport, Vec<String>)> {
    let analysis = prepare(family, p, n, opts)?;
    let report = verify(&analysis, opts)?;
    Ok((report, analysis.warnings))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub family: Family,
    pub q: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<BranchReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SweepEntry {
    pub fn ok(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.all_ok())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub pairs: usize,
    pub passed: usize,
    pub failed: Vec<String>,
    pub r_values: Vec<(Family, u32, usize)>,
    pub all_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub entries: Vec<SweepEntry>,
    pub summary: SweepSummary,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Every `(family, q)` combination, in canonical order, verified
/// independently. Failures are recorded per entry; the sweep continues.
pub fn sweep(families: &[Family], qs: &[u32], opts: &AnalysisOptions) -> SweepOutcome {
    let mut warnings = Vec::new();
    let fams: BTreeSet<Family> = families.iter().copied().collect();
    if fams.len() != families.len() {
        warnings.push("duplicate families removed".to_string());
    }
    let q_set: BTreeSet<u32> = qs.iter().copied().collect();
    if q_set.len() != qs.len() {
        warnings.push("duplicate q values removed".to_string());
    }
    let jobs: Vec<(Family, u32)> = fams.iter().flat_map(|&f| q_set.iter().map(move |&q| (f, q))).collect();
    let results: Vec<(SweepEntry, Vec<String>)> = jobs
        .par_iter()
        .map(|&(family, q)| {
            let outcome = odd_prime_power(q).and_then(|(p, n)| analyze(family, p, n, opts));
            match outcome {
                Ok((report, w)) => (
                    SweepEntry {
                        family,
                        q,
                        report: Some(report),
                        error: None,
                    },
                    w,
                ),
                Err(e) => (
                    SweepEntry {
                        family,
                        q,
                        report: None,
                        error: Some(e.to_string()),
                    },
                    Vec::new(),
                ),
            }
        })
        .collect();
    let mut entries = Vec::with_capacity(results.len());
    for (entry, w) in results {
        warnings.extend(w);
        entries.push(entry);
    }
    let summary = SweepSummary {
        pairs: entries.len(),
        passed: entries.iter().filter(|e| e.ok()).count(),
        failed: entries
            .iter()
            .filter(|e| !e.ok())
            .map(|e| format!("{} q={}", e.family, e.q))
            .collect(),
        r_values: entries
            .iter()
            .filter_map(|e| e.report.as_ref().map(|r| (e.family, e.q, r.pair.r)))
            .collect(),
        all_ok: entries.iter().all(SweepEntry::ok),
    };
    SweepOutcome {
        entries,
        summary,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepared(family: Family, p: u32) -> Analysis {
        prepare(family, p, 1, &AnalysisOptions::default()).unwrap()
    }

    fn row<'a>(rows: &'a [BranchRow], name: &str) -> &'a BranchRow {
        rows.iter().find(|r| r.name.as_deref() == Some(name)).unwrap()
    }

    #[test]
    fn pgl2_q3_rows() {
        let a = prepared(Family::Pgl2, 3);
        let rows = verify_branching_rows(&a.pair, &a.cd, &a.table).unwrap();
        assert_eq!(rows.len(), 4);
        let st = row(&rows, "St_H");
        assert_eq!((st.lhs, st.t.clone(), st.rhs), (1, vec![0], 1));
        let sgn = row(&rows, "sgn");
        assert_eq!((sgn.lhs, sgn.t.clone(), sgn.st_flag), (0, vec![0], false));
    }

    #[test]
    fn sl2_q3_steinberg_row() {
        let a = prepared(Family::Sl2, 3);
        let rows = verify_branching_rows(&a.pair, &a.cd, &a.table).unwrap();
        let st = row(&rows, "St_H");
        assert_eq!((st.lhs, st.t.clone(), st.rhs), (2, vec![1], 2));
    }

    #[test]
    fn trivial_case_values() {
        for fam in [Family::Pgl2, Family::Sl2] {
            let a = prepared(fam, 3);
            let t = trivial_case_report(&a.pair, &a.cd, &a.table).unwrap();
            assert_eq!((t.m0_inner_product, t.m0_burnside, t.h_orbits_on_x, t.r), (1, 1, 2, 1));
            assert_eq!(t.reference_r_minus_1, 0);
            assert!(t.discrepancy);
        }
    }

    #[test]
    fn identity_check_and_bound() {
        for (fam, p) in [(Family::Pgl2, 3), (Family::Pgl2, 5), (Family::Sl2, 7)] {
            let a = prepared(fam, p);
            assert!(decomposition_identity_check(&a.pair, &a.cd));
            assert!(r_bound_check(&a.pair));
        }
    }

    #[test]
    fn special_reports() {
        let a = prepared(Family::Pgl2, 5);
        let s = pgl2_special_report(&a.pair, &a.cd, &a.table).unwrap();
        assert_eq!((s.k1_order, s.k1_cyclic), (6, true));
        let sgn = s.det_characters.iter().find(|r| r.name == "sgn.det").unwrap();
        assert_eq!((sgn.lhs, sgn.t_1), (0, 0));
        assert!(sl2_special_report(&a.pair, &a.cd, &a.table).is_err());

        let a = prepared(Family::Sl2, 3);
        let s = sl2_special_report(&a.pair, &a.cd, &a.table).unwrap();
        assert_eq!(s.e1_orbits_on_y, 2);
        assert_eq!(s.e1_orbit_sizes, vec![2, 2]);
        assert_eq!(s.steinberg_e1_invariants, 1);
        assert_eq!(s.steinberg_row.lhs, 2);
        assert_eq!(s.unit_index, 2);
    }

    #[test]
    fn full_report_passes() {
        let (report, warnings) = analyze(Family::Sl2, 5, 1, &AnalysisOptions::default()).unwrap();
        assert!(warnings.is_empty());
        assert!(report.all_ok(), "{:?}", report.checks);
        assert!(report.meta.timings.is_none());
    }

    #[test]
    fn sweep_dedups_and_orders() {
        let out = sweep(&[Family::Sl2, Family::Pgl2], &[5, 3, 3], &AnalysisOptions::default());
        assert_eq!(out.entries.len(), 4);
        assert_eq!(out.warnings.len(), 1);
        let order: Vec<(Family, u32)> = out.entries.iter().map(|e| (e.family, e.q)).collect();
        assert_eq!(
            order,
            vec![(Family::Pgl2, 3), (Family::Pgl2, 5), (Family::Sl2, 3), (Family::Sl2, 5)]
        );
        assert!(out.summary.all_ok);
        assert!(sweep(&[Family::Pgl2], &[], &AnalysisOptions::default())
            .entries
            .is_empty());
    }

    #[test]
    fn sweep_records_failures() {
        let out = sweep(&[Family::Pgl2], &[3, 6, 17], &AnalysisOptions::default());
        assert_eq!(out.entries.len(), 3);
        assert!(out.entries[0].ok());
        assert!(out.entries[1].error.is_some());
        assert!(out.entries[2].error.as_deref().unwrap().contains("cap"));
        assert!(!out.summary.all_ok);
    }
}
