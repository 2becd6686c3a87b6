//! The flag variety `X = P^1(F_{q^2})` of `G`, its `θ`-stable locus
//! `Y = P^1(F_q)`, the split locus `Ω = X \ Y` and its `H`-orbits.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, FieldTower, Fq2Elem, DEFAULT_SIZE_CAP};
use crate::groups::{self, CanonElem, Family, GroupTable, MatrixGroup, Subgroup, DEFAULT_GROUP_CAP};

/// Size limits applied before anything is enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_q: u32,
    pub max_group_order: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_q: DEFAULT_SIZE_CAP,
            max_group_order: DEFAULT_GROUP_CAP,
        }
    }
}

/// A point of `P^1`, normalized to `[x:1]` or `[1:0]`. The derived order is
/// the enumeration order: affine points by field index, then infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProjPoint {
    Affine(u32),
    Infinity,
}

impl ProjPoint {
    /// Position in the enumeration of `P^1` over a field of `field_order` elements.
    pub fn index(self, field_order: u32) -> usize {
        match self {
            ProjPoint::Affine(x) => x as usize,
            ProjPoint::Infinity => field_order as usize,
        }
    }

    pub fn from_index(i: usize, field_order: u32) -> Self {
        if i == field_order as usize {
            ProjPoint::Infinity
        } else {
            ProjPoint::Affine(i as u32)
        }
    }

    /// `[x : y]` normalized; `(x, y) ≠ (0, 0)`.
    pub fn normalize(field: &Field, x: u32, y: u32) -> Self {
        match field.inv(y) {
            Some(iy) => ProjPoint::Affine(field.mul(x, iy)),
            None => {
                assert!(x != 0, "[0:0] is not a point");
                ProjPoint::Infinity
            }
        }
    }
}

pub fn projective_line(field: &Field) -> Vec<ProjPoint> {
    field
        .elements()
        .map(ProjPoint::Affine)
        .chain(std::iter::once(ProjPoint::Infinity))
        .collect()
}

/// `[[a, b], [c, d]]·[x : y] = [ax + by : cx + dy]`.
pub fn moebius_act(field: &Field, g: &CanonElem, pt: ProjPoint) -> ProjPoint {
    let [a, b, c, d] = g.0;
    let (x, y) = match pt {
        ProjPoint::Affine(x) => (x, 1),
        ProjPoint::Infinity => (1, 0),
    };
    ProjPoint::normalize(
        field,
        field.add(field.mul(a, x), field.mul(b, y)),
        field.add(field.mul(c, x), field.mul(d, y)),
    )
}

/// Entrywise Frobenius on a point of `P^1(F_{q^2})`.
pub fn theta_point(tower: &FieldTower, pt: ProjPoint) -> ProjPoint {
    match pt {
        ProjPoint::Affine(x) => ProjPoint::Affine(tower.frobenius_index(x)),
        ProjPoint::Infinity => ProjPoint::Infinity,
    }
}

/// Splits `X` into the `θ`-fixed points and the rest, preserving order.
pub fn theta_fixed_points(x: &[ProjPoint], tower: &FieldTower) -> (Vec<ProjPoint>, Vec<ProjPoint>) {
    x.iter().partition(|&&p| theta_point(tower, p) == p)
}

/// One `H`-orbit on the split locus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitOrbit {
    pub points: Vec<ProjPoint>,
    pub basepoint: ProjPoint,
    pub stabilizer: Subgroup,
}

/// Orbits of `set` under the subgroup generated by `gens`, each sorted,
/// listed by least point.
pub fn orbits_under(field: &Field, gens: &[CanonElem], set: &[ProjPoint]) -> Vec<Vec<ProjPoint>> {
    let mut remaining: Vec<ProjPoint> = set.to_vec();
    remaining.sort_unstable();
    let n = field.order();
    let mut seen = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for &start in &remaining {
        if seen[start.index(n)] {
            continue;
        }
        seen[start.index(n)] = true;
        let mut orbit = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(pt) = queue.pop_front() {
            for g in gens {
                let img = moebius_act(field, g, pt);
                if !seen[img.index(n)] {
                    seen[img.index(n)] = true;
                    orbit.push(img);
                    queue.push_back(img);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// `H`-orbits on `omega` with least-point basepoints and their stabilizers.
/// `H` acts through its matrices read over `ext`.
pub fn h_orbits(h: &GroupTable, ext: &Field, omega: &[ProjPoint]) -> Vec<SplitOrbit> {
    let gens: Vec<CanonElem> = h.generators().iter().map(|&g| *h.element(g)).collect();
    orbits_under(ext, &gens, omega)
        .into_iter()
        .map(|points| {
            let basepoint = points[0];
            let stabilizer = groups::stabilizer(h, |g, p| moebius_act(ext, g, *p), &basepoint);
            SplitOrbit {
                points,
                basepoint,
                stabilizer,
            }
        })
        .collect()
}

/// A rank-one symmetric pair `(G, θ, H)` realized on `P^1(F_{q^2})`.
#[derive(Clone, Debug)]
pub struct SymmetricPair {
    family: Family,
    tower: Arc<FieldTower>,
    h: GroupTable,
    g_generators: Vec<CanonElem>,
    x: Vec<ProjPoint>,
    y: Vec<ProjPoint>,
    omega: Vec<ProjPoint>,
    omega_orbits: Vec<SplitOrbit>,
    y_orbit_count: usize,
    galois: bool,
    /// `action[h * |X| + i]` is the index of `h·X[i]`.
    action: Vec<u32>,
}

/// Builds the Galois pair `(Res_{F_{q^2}/F_q} G_0, G_0)` for `G_0 = SL_2` or `PGL_2`.
pub fn build_galois_pair(family: Family, p: u32, n: u32, caps: &Caps) -> Result<SymmetricPair> {
    let tower = Arc::new(FieldTower::with_cap(p, n, caps.max_q)?);
    let h = groups::enumerate_group(family, tower.base().clone(), caps.max_group_order)?;
    let t = tower.clone();
    SymmetricPair::assemble(tower, h, move |pt| theta_point(&t, pt), true)
}

impl SymmetricPair {
    /// Assembles a pair from `H` and an involution on points. `H` must be
    /// stable under the involution; hypotheses are checked, not assumed.
    pub fn from_parts(tower: Arc<FieldTower>, h: GroupTable, theta: impl Fn(ProjPoint) -> ProjPoint) -> Result<Self> {
        Self::assemble(tower, h, theta, false)
    }

    fn assemble(
        tower: Arc<FieldTower>,
        h: GroupTable,
        theta: impl Fn(ProjPoint) -> ProjPoint,
        galois: bool,
    ) -> Result<Self> {
        let family = h.family();
        let ext = tower.ext().clone();
        let q = tower.q() as usize;
        let x = projective_line(&ext);
        let (y, omega): (Vec<ProjPoint>, Vec<ProjPoint>) = x.iter().partition(|&&p| theta(p) == p);
        for &p in &x {
            if theta(theta(p)) != p {
                return Err(Error::HypothesisViolation("θ is not an involution on X".into()));
            }
        }

        let h_gens: Vec<CanonElem> = h.generators().iter().map(|&g| *h.element(g)).collect();
        let y_orbit_count = orbits_under(&ext, &h_gens, &y).len();
        if y_orbit_count != 1 {
            return Err(Error::HypothesisViolation(format!(
                "H has {y_orbit_count} orbits on the θ-stable locus, expected 1"
            )));
        }
        if omega.is_empty() {
            return Err(Error::HypothesisViolation("split locus is empty".into()));
        }
        let omega_orbits = h_orbits(&h, &ext, &omega);

        let g_generators = MatrixGroup::new(family, ext.clone()).standard_generators();
        let xn = x.len();
        let mut action = vec![0u32; h.order() * xn];
        for (hi, g) in h.elements().iter().enumerate() {
            for (i, &pt) in x.iter().enumerate() {
                action[hi * xn + i] = moebius_act(&ext, g, pt).index(ext.order()) as u32;
            }
        }

        let pair = SymmetricPair {
            family,
            tower,
            h,
            g_generators,
            x,
            y,
            omega,
            omega_orbits,
            y_orbit_count,
            galois,
            action,
        };
        pair.check_invariants(q)?;
        Ok(pair)
    }

    fn check_invariants(&self, q: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        if self.galois && (self.x.len() != q * q + 1 || self.y.len() != q + 1 || self.omega.len() != q * q - q) {
            return fail(format!(
                "|X|, |Y|, |Ω| = {}, {}, {} for q = {q}",
                self.x.len(),
                self.y.len(),
                self.omega.len()
            ));
        }
        let total: usize = self.omega_orbits.iter().map(|o| o.points.len()).sum();
        if total != self.omega.len() {
            return fail(format!("orbits cover {total} of {} split points", self.omega.len()));
        }
        for o in &self.omega_orbits {
            if o.points.len() * o.stabilizer.order() != self.h.order() {
                return fail(format!(
                    "orbit of {:?}: {} · {} ≠ {}",
                    o.basepoint,
                    o.points.len(),
                    o.stabilizer.order(),
                    self.h.order()
                ));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn q(&self) -> u32 {
        self.tower.q()
    }

    pub fn h(&self) -> &GroupTable {
        &self.h
    }

    pub fn g_generators(&self) -> &[CanonElem] {
        &self.g_generators
    }

    pub fn x(&self) -> &[ProjPoint] {
        &self.x
    }

    pub fn y(&self) -> &[ProjPoint] {
        &self.y
    }

    pub fn omega(&self) -> &[ProjPoint] {
        &self.omega
    }

    pub fn omega_orbits(&self) -> &[SplitOrbit] {
        &self.omega_orbits
    }

    /// Number of `H`-orbits on the split locus.
    pub fn r(&self) -> usize {
        self.omega_orbits.len()
    }

    pub fn y_orbit_count(&self) -> usize {
        self.y_orbit_count
    }

    pub fn is_galois(&self) -> bool {
        self.galois
    }

    pub fn point_index(&self, pt: ProjPoint) -> usize {
        pt.index(self.tower.ext().order())
    }

    /// `h·pt` for `h` an element index of `H`.
    pub fn act(&self, h: u32, pt: ProjPoint) -> ProjPoint {
        let i = self.action[h as usize * self.x.len() + self.point_index(pt)];
        ProjPoint::from_index(i as usize, self.tower.ext().order())
    }

    /// `|{x ∈ set : h·x = x}|`.
    pub fn fixed_count(&self, h: u32, set: &[ProjPoint]) -> usize {
        let row = &self.action[h as usize * self.x.len()..(h as usize + 1) * self.x.len()];
        set.iter()
            .filter(|&&p| {
                let i = self.point_index(p);
                row[i] as usize == i
            })
            .count()
    }

    /// Image in `H` of `{a + bτ}` under `a + bτ ↦ [[a, δb], [b, a]]`; elements
    /// whose matrix is not in `H` are skipped.
    pub fn torus_image(&self, elems: &[Fq2Elem]) -> Subgroup {
        let delta = self.tower.delta().index();
        let f = self.tower.base();
        let amb = self.h.ambient();
        let members = elems
            .iter()
            .filter_map(|e| {
                let (a, b) = (e.a.index(), e.b.index());
                amb.try_canon([a, f.mul(delta, b), b, a])
                    .and_then(|m| self.h.index_of(&m))
            })
            .collect();
        Subgroup::from_elements(members)
    }

    /// Image of the norm-one group `E^1` in `H`.
    pub fn norm_one_image(&self) -> Subgroup {
        self.torus_image(&self.tower.norm_one_subgroup())
    }

    /// Image of `E^×` in `H` (for `PGL_2` this is `E^×/F^×`).
    pub fn units_image(&self) -> Subgroup {
        let units: Vec<Fq2Elem> = self
            .tower
            .fq2_elements()
            .filter(|x| x.a.index() != 0 || x.b.index() != 0)
            .collect();
        self.torus_image(&units)
    }

    /// Whether some stabilizer contains a nontrivial unipotent element.
    pub fn stabilizers_unipotent_free(&self) -> bool {
        self.omega_orbits.iter().all(|o| {
            o.stabilizer
                .elements()
                .iter()
                .all(|&k| !self.h.ambient().is_nontrivial_unipotent(self.h.element(k)))
        })
    }
}

/// Number of `G`-orbits on `X × X`, by closure under the generators of `G`.
/// Two orbits means `G` is doubly transitive on `X`.
pub fn g_transitivity_rank(pair: &SymmetricPair) -> usize {
    let ext = pair.tower.ext();
    let n = pair.x.len();
    let perms: Vec<Vec<usize>> = pair
        .g_generators
        .iter()
        .map(|g| {
            pair.x
                .iter()
                .map(|&p| pair.point_index(moebius_act(ext, g, p)))
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..n * n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for perm in &perms {
        for i in 0..n {
            for j in 0..n {
                let a = find(&mut parent, i * n + j);
                let b = find(&mut parent, perm[i] * n + perm[j]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..n * n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Compares the embedded copy of `H` with the full set of `θ`-fixed elements
/// of `G`, enumerating `G` outright. Only feasible for small `q`.
pub fn theta_fixed_subgroup_matches(pair: &SymmetricPair, max_order: u64) -> Result<bool> {
    let tower = &pair.tower;
    let g = MatrixGroup::new(pair.family, tower.ext().clone());
    if g.order() > max_order {
        return Err(Error::SizeCapExceeded {
            what: "group order",
            value: g.order(),
            cap: max_order,
        });
    }
    let mut fixed: Vec<CanonElem> = g
        .enumerate()
        .into_iter()
        .filter(|m| g.canon(m.0.map(|x| tower.frobenius_index(x))) == *m)
        .collect();
    fixed.sort_unstable();
    Ok(fixed.as_slice() == pair.h.elements())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(family: Family, p: u32, n: u32) -> SymmetricPair {
        build_galois_pair(family, p, n, &Caps::default()).unwrap()
    }

    #[test]
    fn projective_line_sizes() {
        for (p, n, size) in [(3, 1, 4), (3, 2, 10)] {
            let t = FieldTower::new(p, n).unwrap();
            assert_eq!(projective_line(t.base()).len(), size);
        }
        let t = FieldTower::new(5, 1).unwrap();
        assert_eq!(projective_line(t.ext()).len(), 26);
    }

    #[test]
    fn moebius_examples() {
        let t = FieldTower::new(3, 1).unwrap();
        let ext = t.ext();
        let delta = t.delta().index();
        let w = CanonElem([0, delta, 1, 0]);
        assert_eq!(moebius_act(ext, &w, ProjPoint::Affine(0)), ProjPoint::Infinity);
        let id = CanonElem([1, 0, 0, 1]);
        for p in projective_line(ext) {
            assert_eq!(moebius_act(ext, &id, p), p);
        }
    }

    #[test]
    fn moebius_is_an_action() {
        let t = FieldTower::new(3, 1).unwrap();
        let h = groups::enumerate_group(Family::Sl2, t.base().clone(), 100).unwrap();
        let ext = t.ext();
        let pts = projective_line(ext);
        for g in h.elements() {
            for k in h.elements() {
                let gk = h.ambient().mul(g, k);
                for &p in &pts {
                    assert_eq!(moebius_act(ext, &gk, p), moebius_act(ext, g, moebius_act(ext, k, p)));
                }
            }
        }
    }

    #[test]
    fn theta_splits_x() {
        for p in [3, 5, 7] {
            let t = FieldTower::new(p, 1).unwrap();
            let x = projective_line(t.ext());
            let (y, omega) = theta_fixed_points(&x, &t);
            let q = p as usize;
            assert_eq!((y.len(), omega.len()), (q + 1, q * q - q));
            let tau = ProjPoint::Affine(t.ext_index(t.tau()));
            assert!(omega.contains(&tau));
            for &pt in &x {
                assert_eq!(theta_point(&t, theta_point(&t, pt)), pt);
            }
        }
    }

    #[test]
    fn galois_pairs_small() {
        let pg = pair(Family::Pgl2, 3, 1);
        assert_eq!((pg.r(), pg.x().len(), pg.y().len(), pg.y_orbit_count()), (1, 10, 4, 1));
        assert_eq!(pg.omega_orbits()[0].stabilizer.order(), 4);
        let tau = ProjPoint::Affine(pg.tower().ext_index(pg.tower().tau()));
        assert_eq!(pg.omega_orbits()[0].basepoint, tau);

        let sl = pair(Family::Sl2, 3, 1);
        assert_eq!(sl.r(), 1);
        assert_eq!(sl.omega_orbits()[0].points.len(), 6);
        assert_eq!(sl.omega_orbits()[0].stabilizer, sl.norm_one_image());
        assert_eq!(sl.norm_one_image().order(), 4);

        let p5 = pair(Family::Pgl2, 5, 1);
        assert_eq!(p5.r(), 1);
        assert_eq!(p5.omega_orbits()[0].stabilizer.order(), 6);

        let p9 = pair(Family::Pgl2, 3, 2);
        assert_eq!((p9.x().len(), p9.y().len(), p9.omega().len()), (82, 10, 72));
    }

    #[test]
    fn borel_stabilizer() {
        let t = FieldTower::new(3, 1).unwrap();
        let h = groups::enumerate_group(Family::Pgl2, t.base().clone(), 100).unwrap();
        let base = t.base();
        let stab = groups::stabilizer(&h, |g, p| moebius_act(base, g, *p), &ProjPoint::Affine(0));
        assert_eq!(stab.order(), 6);
    }

    #[test]
    fn pgl2_stabilizer_is_cyclic_units_image() {
        for p in [3, 5, 7] {
            let pr = pair(Family::Pgl2, p, 1);
            let k = &pr.omega_orbits()[0].stabilizer;
            assert_eq!(k.order(), p as usize + 1);
            assert!(k.is_cyclic(pr.h()));
            assert_eq!(*k, pr.units_image());
            assert!(pr.stabilizers_unipotent_free());
        }
    }

    #[test]
    fn transitivity_rank_is_two() {
        assert_eq!(g_transitivity_rank(&pair(Family::Pgl2, 3, 1)), 2);
        assert_eq!(g_transitivity_rank(&pair(Family::Sl2, 3, 1)), 2);
    }

    #[test]
    fn embedded_h_is_the_theta_fixed_subgroup() {
        for fam in [Family::Pgl2, Family::Sl2] {
            for p in [3, 5] {
                assert!(theta_fixed_subgroup_matches(&pair(fam, p, 1), 20_000).unwrap());
            }
        }
    }

    #[test]
    fn identity_involution_is_rejected() {
        let t = Arc::new(FieldTower::new(3, 1).unwrap());
        let h = groups::enumerate_group(Family::Pgl2, t.base().clone(), 100).unwrap();
        let err = SymmetricPair::from_parts(t, h, |p| p).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolation(_)));
    }

    #[test]
    fn partition_of_fixed_points() {
        let pr = pair(Family::Sl2, 5, 1);
        for h in 0..pr.h().order() as u32 {
            let fx = pr.fixed_count(h, pr.x());
            let fy = pr.fixed_count(h, pr.y());
            let fo: usize = pr.omega_orbits().iter().map(|o| pr.fixed_count(h, &o.points)).sum();
            assert_eq!(fx, fy + fo);
        }
    }
}
