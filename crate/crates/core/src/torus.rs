//! Rational ranks of equivariant K-theory of the 2-torus under finite
//! groups acting by affine maps, via the delocalized sector sum
//! `Σ_[g] dim H*(T^g; Q)^{C(g)}`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corep::{CorepError, MagneticContext};
use crate::groups::{CentralExtensionZ2, Group, GroupError};
use crate::linalg;

pub type Mat2 = [[i64; 2]; 2];
pub type Vec2 = [Rational64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("not an action: witness ({0}, {1})")]
    NotAnAction(usize, usize),
    #[error("action has {got} maps for a group of order {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("map does not normalize the action (element {0})")]
    NotNormalizing(usize),
    #[error("not a spin-split extension: {0}")]
    NotSpinSplit(String),
    #[error("trace average is not an integer: {0}")]
    NonIntegral(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Corep(#[from] CorepError),
}

fn frac(x: Rational64) -> Rational64 {
    x - x.floor()
}

fn reduce(v: Vec2) -> Vec2 {
    [frac(v[0]), frac(v[1])]
}

fn apply_lin(a: &Mat2, x: &Vec2) -> Vec2 {
    [x[0] * a[0][0] + x[1] * a[0][1], x[0] * a[1][0] + x[1] * a[1][1]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn det(a: &Mat2) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `x ↦ A x + v` on `R²/Z²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(rename = "A")]
    pub a: Mat2,
    #[serde(with = "vec2_str")]
    pub v: Vec2,
}

/// Translations as `["p/q", "p/q"]`.
mod vec2_str {
    use super::Vec2;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Vec2, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec2, D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        let parse = |t: &str| {
            t.trim()
                .parse()
                .map_err(|_| D::Error::custom(format!("bad rational {t:?}")))
        };
        Ok(super::reduce([parse(&a)?, parse(&b)?]))
    }
}

impl AffineMap {
    pub fn linear(a: Mat2) -> Self {
        Self {
            a,
            v: [Rational64::zero(); 2],
        }
    }

    pub fn identity() -> Self {
        Self::linear([[1, 0], [0, 1]])
    }

    pub fn new(a: Mat2, v: Vec2) -> Self {
        Self { a, v: reduce(v) }
    }

    pub fn apply(&self, x: &Vec2) -> Vec2 {
        let y = apply_lin(&self.a, x);
        reduce([y[0] + self.v[0], y[1] + self.v[1]])
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        let v = apply_lin(&self.a, &other.v);
        Self::new(mat_mul(&self.a, &other.a), [v[0] + self.v[0], v[1] + self.v[1]])
    }

    /// Inverse, when `det A = ±1`.
    pub fn inverse(&self) -> Self {
        let d = det(&self.a);
        let a = &self.a;
        let ai = [[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]];
        let v = apply_lin(&ai, &self.v);
        Self::new(ai, [-v[0], -v[1]])
    }
}

/// One affine map per group element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineTorusAction {
    pub maps: Vec<AffineMap>,
}

impl AffineTorusAction {
    pub fn trivial(n: usize) -> Self {
        Self {
            maps: vec![AffineMap::identity(); n],
        }
    }

    pub fn map(&self, g: usize) -> &AffineMap {
        &self.maps[g]
    }

    /// The action pulled back along `emb: H → G`.
    pub fn restrict(&self, emb: &[usize]) -> Self {
        Self {
            maps: emb.iter().map(|&g| self.maps[g].clone()).collect(),
        }
    }
}

pub fn validate_action(group: &Group, action: &AffineTorusAction) -> Result<(), TorusError> {
    let n = group.order();
    if action.maps.len() != n {
        return Err(TorusError::WrongLength {
            expected: n,
            got: action.maps.len(),
        });
    }
    for (g, m) in action.maps.iter().enumerate() {
        if det(&m.a).abs() != 1 {
            return Err(TorusError::NotAnAction(g, g));
        }
    }
    let e = group.identity();
    if action.maps[e] != AffineMap::identity() {
        return Err(TorusError::NotAnAction(e, e));
    }
    for g in 0..n {
        for h in 0..n {
            if action.maps[g].compose(&action.maps[h]) != action.maps[group.mul(g, h)] {
                return Err(TorusError::NotAnAction(g, h));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedSetDescriptor {
    WholeTorus,
    Empty,
    Points {
        #[serde(serialize_with = "points_str")]
        points: Vec<Vec2>,
    },
    /// Parallel circles `x_j + t·direction`.
    Circles {
        count: usize,
        direction: [i64; 2],
        #[serde(serialize_with = "points_str")]
        base_points: Vec<Vec2>,
    },
}

fn points_str<S: serde::Serializer>(ps: &[Vec2], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| [p[0].to_string(), p[1].to_string()]))
}

impl FixedSetDescriptor {
    /// Betti numbers `(b0, b1, b2)`.
    pub fn betti(&self) -> [i64; 3] {
        match self {
            Self::WholeTorus => [1, 2, 1],
            Self::Empty => [0, 0, 0],
            Self::Points { points } => [points.len() as i64, 0, 0],
            Self::Circles { count, .. } => [*count as i64, *count as i64, 0],
        }
    }
}

fn int_inverse_times(m: &Mat2, x: &Vec2) -> Vec2 {
    // M⁻¹ x over Q
    let d = Rational64::from_integer(det(m));
    [
        (x[0] * m[1][1] - x[1] * m[0][1]) / d,
        (x[1] * m[0][0] - x[0] * m[1][0]) / d,
    ]
}

/// Solutions of `(A − I)x ≡ −v (mod Z²)`.
pub fn fixed_set(map: &AffineMap) -> FixedSetDescriptor {
    let m: Mat2 = [[map.a[0][0] - 1, map.a[0][1]], [map.a[1][0], map.a[1][1] - 1]];
    let rhs = [-map.v[0], -map.v[1]];
    let rank = linalg::rank(&m.iter().map(|r| r.to_vec()).collect());
    match rank {
        0 => {
            if map.v.iter().all(|x| x.is_zero()) {
                FixedSetDescriptor::WholeTorus
            } else {
                FixedSetDescriptor::Empty
            }
        }
        2 => {
            let d = det(&m).abs();
            let mut points = Vec::new();
            for n0 in 0..d {
                for n1 in 0..d {
                    let t = [rhs[0] + n0, rhs[1] + n1];
                    let p = reduce(int_inverse_times(&m, &t));
                    if !points.contains(&p) {
                        points.push(p);
                    }
                }
            }
            points.sort();
            debug_assert_eq!(points.len() as i64, d);
            FixedSetDescriptor::Points { points }
        }
        _ => {
            // L M R = diag(d1, 0); with x = R y: d1·y0 ≡ (L rhs)_0, 0 ≡ (L rhs)_1
            let s = linalg::smith_normal_form(&m.iter().map(|r| r.to_vec()).collect());
            let l = &s.left;
            let lr = [rhs[0] * l[0][0] + rhs[1] * l[0][1], rhs[0] * l[1][0] + rhs[1] * l[1][1]];
            if !lr[1].is_integer() {
                return FixedSetDescriptor::Empty;
            }
            let d1 = s.diag[0][0];
            let r = &s.right;
            let direction = [r[0][1], r[1][1]];
            let base_points = (0..d1)
                .map(|k| {
                    let y0 = (lr[0] + k) / d1;
                    reduce([y0 * r[0][0], y0 * r[1][0]])
                })
                .collect();
            FixedSetDescriptor::Circles {
                count: d1 as usize,
                direction,
                base_points,
            }
        }
    }
}

/// Traces `(t0, t1, t2)` of the pullback of `f` on `H*(F; Q)`, where `f`
/// maps the fixed set `F` to itself.
pub fn trace_on_fixed(fixed: &FixedSetDescriptor, f: &AffineMap) -> [i64; 3] {
    match fixed {
        FixedSetDescriptor::WholeTorus => [1, f.a[0][0] + f.a[1][1], det(&f.a)],
        FixedSetDescriptor::Empty => [0, 0, 0],
        FixedSetDescriptor::Points { points } => [points.iter().filter(|p| f.apply(p) == **p).count() as i64, 0, 0],
        FixedSetDescriptor::Circles {
            direction, base_points, ..
        } => {
            let w = direction;
            let covector = [-w[1], w[0]];
            let on_same = |p: &Vec2, q: &Vec2| {
                let d = [p[0] - q[0], p[1] - q[1]];
                (d[0] * covector[0] + d[1] * covector[1]).is_integer()
            };
            let image = [f.a[0][0] * w[0] + f.a[0][1] * w[1], f.a[1][0] * w[0] + f.a[1][1] * w[1]];
            let sign = if image == *w { 1 } else { -1 };
            let fixed_components = base_points.iter().filter(|p| on_same(&f.apply(p), p)).count() as i64;
            [fixed_components, sign * fixed_components, 0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sector {
    pub class_rep: usize,
    pub even: usize,
    pub odd: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank_even: usize,
    pub rank_odd: usize,
    pub sectors: Vec<Sector>,
}

impl RankResult {
    fn from_sectors(sectors: Vec<Sector>) -> Self {
        Self {
            rank_even: sectors.iter().map(|s| s.even).sum(),
            rank_odd: sectors.iter().map(|s| s.odd).sum(),
            sectors,
        }
    }
}

/// Exact average of integer traces; returns `(even, odd)` dimensions.
fn average(sum: [i64; 3], count: usize, what: &str) -> Result<(usize, usize), TorusError> {
    let c = count as i64;
    let even = sum[0] + sum[2];
    let odd = sum[1];
    if !even.is_multiple_of(&c) || !odd.is_multiple_of(&c) || even < 0 || odd < 0 {
        return Err(TorusError::NonIntegral(format!("{what}: {sum:?} / {count}")));
    }
    Ok(((even / c) as usize, (odd / c) as usize))
}

pub fn delocalized_rank(group: &Group, action: &AffineTorusAction) -> Result<RankResult, TorusError> {
    validate_action(group, action)?;
    let classes = group.conjugacy_classes();
    let sectors = classes
        .reps
        .iter()
        .map(|&g| {
            let fixed = fixed_set(action.map(g));
            let cent = group.centralizer(g);
            let mut sum = [0; 3];
            for &c in &cent {
                let t = trace_on_fixed(&fixed, action.map(c));
                for k in 0..3 {
                    sum[k] += t[k];
                }
            }
            let (even, odd) = average(sum, cent.len(), &format!("sector {g}"))?;
            Ok(Sector {
                class_rep: g,
                even,
                odd,
            })
        })
        .collect::<Result<Vec<_>, TorusError>>()?;
    Ok(RankResult::from_sectors(sectors))
}

/// Invariant ranks under an antiunitary element acting by `a0_map`, with
/// sector rule `[g] ↦ [a₀⁻¹ g⁻¹ a₀]` and sign `(−1)^k` on `H^{2k}`, `−1` on
/// `H¹`. Exploratory: the sector rule is a modelling choice.
pub fn involution_rank(
    group: &Group,
    action: &AffineTorusAction,
    a0_map: &AffineMap,
) -> Result<RankResult, TorusError> {
    validate_action(group, action)?;
    if det(&a0_map.a).abs() != 1 {
        return Err(TorusError::NotNormalizing(usize::MAX));
    }
    let a0_inv = a0_map.inverse();
    let n = group.order();
    // σ(g) = a₀⁻¹ g⁻¹ a₀, located by its affine map
    let sigma: Vec<usize> = (0..n)
        .map(|g| {
            let m = a0_inv.compose(&action.map(g).inverse()).compose(a0_map);
            (0..n)
                .find(|&h| *action.map(h) == m)
                .ok_or(TorusError::NotNormalizing(g))
        })
        .collect::<Result<_, _>>()?;
    let classes = group.conjugacy_classes();
    let cls = &classes.class_of;
    let base = delocalized_rank(group, action)?;
    let mut sectors = Vec::new();
    let mut seen = vec![false; classes.len()];
    for (ci, &g) in classes.reps.iter().enumerate() {
        if seen[ci] {
            continue;
        }
        let cj = cls[sigma[g]];
        seen[ci] = true;
        seen[cj] = true;
        if cj != ci {
            let s = &base.sectors[ci];
            sectors.push(Sector {
                class_rep: g,
                even: s.even,
                odd: s.odd,
            });
            continue;
        }
        // c·σ(g)·c⁻¹ = g; φ = c ∘ a₀⁻¹ maps T^g to itself
        let h = sigma[g];
        let c = (0..n).find(|&c| group.conj(c, h) == g).expect("same class");
        let phi = action.map(c).compose(&a0_inv);
        let fixed = fixed_set(action.map(g));
        let cent = group.centralizer(g);
        let mut sum = [0; 3];
        for &x in &cent {
            let t = trace_on_fixed(&fixed, action.map(x));
            let u = trace_on_fixed(&fixed, &phi.compose(action.map(x)));
            sum[0] += t[0] + u[0];
            sum[1] += t[1] - u[1];
            sum[2] += t[2] - u[2];
        }
        let (even, odd) = average(sum, 2 * cent.len(), &format!("sector {g}"))?;
        sectors.push(Sector {
            class_rep: g,
            even,
            odd,
        });
    }
    Ok(RankResult::from_sectors(sectors))
}

/// `G/N` for a normal subgroup given by element indices; returns the
/// quotient and the projection.
fn quotient(group: &Group, normal: &[usize]) -> Result<(Group, Vec<usize>), TorusError> {
    let n = group.order();
    let mut coset = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if coset[g] != usize::MAX {
            continue;
        }
        for &k in normal {
            coset[group.mul(g, k)] = reps.len();
        }
        reps.push(g);
    }
    let table = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| coset[group.mul(a, b)]).collect())
        .collect();
    Ok((Group::from_table(table)?, coset))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinSplitResult {
    /// Spin eigenvalues labelling the sectors.
    pub spin_values: Vec<i64>,
    pub per_sector: RankResult,
    pub total_even: usize,
    pub total_odd: usize,
    pub invariant: RankResult,
}

/// The twisted equivariant K-theory of `T²` for an extension whose
/// unitary part contains a spin operator `spin` (central, acting trivially
/// on `T²`): split into spin sectors, untwist each to `G̃₀/⟨z, spin⟩`, and
/// take invariants under the involution permuting the sectors.
pub fn magnetic_invariant_rank_spinsplit(
    ext: &CentralExtensionZ2,
    action: &AffineTorusAction,
    spin: usize,
) -> Result<SpinSplitResult, TorusError> {
    let total = ext.total.group();
    validate_action(total, action)?;
    let ctx = MagneticContext::twisted(ext)?;
    let emb = ctx.embedding();
    let to_g0 = |x: usize| {
        emb.iter()
            .position(|&e| e == x)
            .ok_or_else(|| TorusError::NotSpinSplit(format!("element {x} is antiunitary")))
    };
    let (sz, z) = (to_g0(spin)?, to_g0(ext.z)?);
    let g0 = ctx.g0();

    let normal = g0.generated_by(&[sz, z]);
    for &k in &normal {
        if *action.map(emb[k]) != AffineMap::identity() {
            return Err(TorusError::NotSpinSplit(format!("element {} moves the torus", emb[k])));
        }
        if (0..g0.order()).any(|x| g0.conj(x, k) != k) {
            return Err(TorusError::NotSpinSplit(format!("element {} is not central", emb[k])));
        }
    }

    // sectors: values of χ(spin) over twisted irreducibles
    let mut sector_of = BTreeMap::new();
    let inv = ctx.involution();
    let spin_value = |i: usize| {
        ctx.table()
            .row(i)
            .at_element(sz)
            .as_integer()
            .ok_or_else(|| TorusError::NotSpinSplit("spin eigenvalue is not an integer".into()))
    };
    for i in ctx.active_irreps() {
        let s = spin_value(i)?;
        let t = spin_value(inv[i])?;
        if let Some(&prev) = sector_of.get(&s) {
            if prev != t {
                return Err(TorusError::NotSpinSplit("involution does not permute sectors".into()));
            }
        }
        sector_of.insert(s, t);
    }
    let spin_values: Vec<i64> = sector_of.keys().copied().collect();
    let orbits = sector_of.iter().filter(|(s, t)| s <= t).count();

    let (q, proj) = quotient(g0, &normal)?;
    let mut maps = vec![None; q.order()];
    for (g, &c) in proj.iter().enumerate() {
        maps[c].get_or_insert_with(|| action.map(emb[g]).clone());
    }
    let q_action = AffineTorusAction {
        maps: maps.into_iter().map(|m| m.expect("every coset hit")).collect(),
    };
    let per_sector = delocalized_rank(&q, &q_action)?;
    let k = spin_values.len();
    let invariant = RankResult::from_sectors(
        per_sector
            .sectors
            .iter()
            .map(|s| Sector {
                class_rep: s.class_rep,
                even: s.even * orbits,
                odd: s.odd * orbits,
            })
            .collect(),
    );
    Ok(SpinSplitResult {
        spin_values,
        total_even: per_sector.rank_even * k,
        total_odd: per_sector.rank_odd * k,
        per_sector,
        invariant,
    })
}

/// The rotation `(x, y) ↦ (y, −x)`.
pub const C4T_KMAP: Mat2 = [[0, 1], [-1, 0]];

/// Action of the builtin twisted C4T×Sz group on `T²`: `ã` rotates by
/// `C4T_KMAP`, `b` and the central element act trivially.
pub fn builtin_c4t_sz_action(ext: &CentralExtensionZ2) -> AffineTorusAction {
    let g = ext.total.group();
    let a = 2; // ã
    let mut maps = vec![None; g.order()];
    let mut m = AffineMap::identity();
    let mut x = g.identity();
    for _ in 0..8 {
        for &k in &g.generated_by(&[8, ext.z]) {
            maps[g.mul(x, k)] = Some(m.clone());
        }
        x = g.mul(x, a);
        m = AffineMap::linear(C4T_KMAP).compose(&m);
    }
    AffineTorusAction {
        maps: maps.into_iter().map(|m| m.expect("ã, b, z generate")).collect(),
    }
}

pub fn c2_on_z2() -> (Group, AffineTorusAction) {
    let g = Group::cyclic(2);
    let a = AffineTorusAction {
        maps: vec![AffineMap::identity(), AffineMap::linear([[-1, 0], [0, -1]])],
    };
    (g, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::builtin_c4t_sz;

    fn z() -> Rational64 {
        Rational64::zero()
    }

    fn half() -> Rational64 {
        Rational64::new(1, 2)
    }

    #[test]
    fn validation() {
        let (g, a) = c2_on_z2();
        validate_action(&g, &a).unwrap();
        let bad = AffineTorusAction {
            maps: vec![AffineMap::identity(), AffineMap::linear([[2, 0], [0, 1]])],
        };
        assert_eq!(validate_action(&g, &bad), Err(TorusError::NotAnAction(1, 1)));
        let c4 = AffineTorusAction {
            maps: (0..4)
                .map(|k| (0..k).fold(AffineMap::identity(), |m, _| AffineMap::linear(C4T_KMAP).compose(&m)))
                .collect(),
        };
        validate_action(&Group::cyclic(4), &c4).unwrap();
    }

    #[test]
    fn fixed_sets() {
        assert_eq!(fixed_set(&AffineMap::identity()), FixedSetDescriptor::WholeTorus);
        let h = half();
        assert_eq!(
            fixed_set(&AffineMap::linear([[-1, 0], [0, -1]])),
            FixedSetDescriptor::Points {
                points: vec![[z(), z()], [z(), h], [h, z()], [h, h]]
            }
        );
        assert_eq!(fixed_set(&AffineMap::linear(C4T_KMAP)).betti(), [2, 0, 0]);
        let refl = AffineMap::linear([[1, 0], [0, -1]]);
        match fixed_set(&refl) {
            FixedSetDescriptor::Circles { count, .. } => assert_eq!(count, 2),
            f => panic!("{f:?}"),
        }
        let glide = AffineMap::new([[1, 0], [0, -1]], [h, z()]);
        assert_eq!(fixed_set(&glide), FixedSetDescriptor::Empty);
        assert_eq!(
            fixed_set(&AffineMap::new([[1, 0], [0, 1]], [h, z()])),
            FixedSetDescriptor::Empty
        );
    }

    #[test]
    fn delocalized_examples() {
        let triv = delocalized_rank(&Group::cyclic(1), &AffineTorusAction::trivial(1)).unwrap();
        assert_eq!((triv.rank_even, triv.rank_odd), (2, 2));
        let (g, a) = c2_on_z2();
        let r = delocalized_rank(&g, &a).unwrap();
        assert_eq!((r.rank_even, r.rank_odd), (6, 0));
        assert_eq!(r.sectors[0].even, 2);
        assert_eq!(r.sectors[1].even, 4);
        let r = delocalized_rank(&g, &AffineTorusAction::trivial(2)).unwrap();
        assert_eq!((r.rank_even, r.rank_odd), (4, 4));
    }

    #[test]
    fn involution_examples() {
        let g = Group::cyclic(1);
        let a = AffineTorusAction::trivial(1);
        let r = involution_rank(&g, &a, &AffineMap::identity()).unwrap();
        assert_eq!(r.rank_even, 1);
        let r = involution_rank(&g, &a, &AffineMap::linear(C4T_KMAP)).unwrap();
        assert_eq!(r.rank_even, 1);
    }

    #[test]
    fn spinsplit_builtin() {
        let (_, ext) = builtin_c4t_sz();
        let action = builtin_c4t_sz_action(&ext);
        let r = magnetic_invariant_rank_spinsplit(&ext, &action, 8).unwrap();
        assert_eq!(r.spin_values, vec![-1, 1]);
        assert_eq!((r.total_even, r.total_odd), (12, 0));
        assert_eq!((r.invariant.rank_even, r.invariant.rank_odd), (6, 0));
    }
}
