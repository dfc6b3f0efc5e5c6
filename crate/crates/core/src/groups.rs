//! Finite groups stored as multiplication tables, Z2-gradings (magnetic
//! groups) and central Z2-extensions given by explicit sign cocycles.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("not a group: {axiom} fails at {witness:?}")]
    NotAGroup { axiom: &'static str, witness: [usize; 3] },
    #[error("not graded: {reason} (witness {witness:?})")]
    NotGraded { reason: &'static str, witness: [usize; 2] },
    #[error("bad action: {action} is not an automorphism of Z/{m} of order dividing {k}")]
    BadAction { m: usize, k: usize, action: usize },
    #[error("not a cocycle: identity fails at {witness:?}")]
    NotACocycle { witness: [usize; 3] },
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
}

/// A finite group given by its full multiplication table.
///
/// `mul(a, b)` is the index of the product `a·b`. Element order is the
/// construction order and is kept stable by every operation here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    n: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    id: usize,
}

impl Group {
    /// Validates the group axioms by a full table scan.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Malformed("empty table".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::Malformed(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if x >= n {
                    return Err(GroupError::Malformed(format!("entry ({i},{j}) = {x} out of range")));
                }
            }
            mul.extend_from_slice(row);
        }
        Self::from_flat(n, mul)
    }

    fn from_flat(n: usize, mul: Vec<usize>) -> Result<Self, GroupError> {
        let at = |a: usize, b: usize| mul[a * n + b];
        let id = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| {
                // witness: first element failing to be a left identity for the candidate 0
                let a = (0..n).find(|&a| at(0, a) != a || at(a, 0) != a).unwrap_or(0);
                GroupError::NotAGroup {
                    axiom: "identity",
                    witness: [0, a, 0],
                }
            })?;
        let mut inv = vec![usize::MAX; n];
        for (a, slot) in inv.iter_mut().enumerate() {
            match (0..n).find(|&b| at(a, b) == id && at(b, a) == id) {
                Some(b) => *slot = b,
                None => {
                    return Err(GroupError::NotAGroup {
                        axiom: "inverse",
                        witness: [a, id, a],
                    })
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(GroupError::NotAGroup {
                            axiom: "associativity",
                            witness: [a, b, c],
                        });
                    }
                }
            }
        }
        Ok(Self { n, mul, inv, id })
    }

    /// Builds a group from a product closure that is a group by construction
    /// (cyclic, semidirect, dicyclic, products). Axioms are still checked in
    /// debug builds.
    fn from_rule(n: usize, rule: impl Fn(usize, usize) -> usize) -> Self {
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(rule(a, b));
            }
        }
        if cfg!(debug_assertions) && n <= 64 {
            return Self::from_flat(n, mul).expect("constructed table is a group");
        }
        let id = (0..n).find(|&e| (0..n).all(|a| mul[e * n + a] == a)).unwrap();
        let inv = (0..n)
            .map(|a| (0..n).find(|&b| mul[a * n + b] == id).unwrap())
            .collect();
        Self { n, mul, inv, id }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.id
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g h g⁻¹`
    #[inline]
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn pow(&self, g: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(g) } else { g };
        let mut acc = self.id;
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.id {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.n).map(|g| self.element_order(g)).fold(1, |acc, o| acc.lcm(&o))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn centralizer(&self, g: usize) -> Vec<usize> {
        (0..self.n).filter(|&h| self.mul(g, h) == self.mul(h, g)).collect()
    }

    /// Conjugacy classes, ordered by smallest member index.
    pub fn conjugacy_classes(&self) -> ConjClasses {
        let mut class_of = vec![usize::MAX; self.n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for g in 0..self.n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut cls: Vec<usize> = (0..self.n).map(|h| self.conj(h, g)).collect();
            cls.sort_unstable();
            cls.dedup();
            for &x in &cls {
                class_of[x] = c;
            }
            members.push(cls);
        }
        let reps = members.iter().map(|m| m[0]).collect();
        ConjClasses {
            class_of,
            reps,
            members,
        }
    }

    /// The subgroup on `elements`, relabelled in increasing index order.
    /// Returns the subgroup and its embedding (new index -> old index).
    pub fn subgroup(&self, elements: &[usize]) -> Result<(Group, Vec<usize>), GroupError> {
        let mut emb = elements.to_vec();
        emb.sort_unstable();
        emb.dedup();
        if let Some(&bad) = emb.iter().find(|&&x| x >= self.n) {
            return Err(GroupError::NotASubgroup(format!("element {bad} out of range")));
        }
        if emb.binary_search(&self.id).is_err() {
            return Err(GroupError::NotASubgroup("identity missing".into()));
        }
        let mut back = vec![usize::MAX; self.n];
        for (i, &g) in emb.iter().enumerate() {
            back[g] = i;
        }
        let m = emb.len();
        let mut mul = Vec::with_capacity(m * m);
        for &a in &emb {
            for &b in &emb {
                let ab = back[self.mul(a, b)];
                if ab == usize::MAX {
                    return Err(GroupError::NotASubgroup(format!(
                        "not closed: {a}·{b} = {}",
                        self.mul(a, b)
                    )));
                }
                mul.push(ab);
            }
        }
        let id = back[self.id];
        let inv = emb.iter().map(|&g| back[self.inv(g)]).collect();
        Ok((Group { n: m, mul, inv, id }, emb))
    }

    /// Smallest subgroup containing `gens`.
    pub fn generated_by(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[self.id] = true;
        let mut out = vec![self.id];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Checks that `map` (indexed by elements of `self`) is an injective
    /// homomorphism into `target`.
    pub fn check_embedding(&self, target: &Group, map: &[usize]) -> Result<(), GroupError> {
        if map.len() != self.n {
            return Err(GroupError::NotASubgroup(format!(
                "embedding has {} entries, expected {}",
                map.len(),
                self.n
            )));
        }
        let mut hit = vec![false; target.n];
        for &x in map {
            if x >= target.n || std::mem::replace(&mut hit[x], true) {
                return Err(GroupError::NotASubgroup(format!("embedding not injective at {x}")));
            }
        }
        for a in 0..self.n {
            for b in 0..self.n {
                if map[self.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(GroupError::NotASubgroup(format!("not a homomorphism at ({a},{b})")));
                }
            }
        }
        Ok(())
    }

    pub fn cyclic(m: usize) -> Self {
        Self::from_rule(m, |a, b| (a + b) % m)
    }

    /// `Z/m ⋊ Z/k` with `h a h⁻¹ = a^action`. Element `a^i h^j` has index
    /// `j·m + i`.
    pub fn semidirect(m: usize, k: usize, action: usize) -> Result<Self, GroupError> {
        if m == 0 || k == 0 {
            return Err(GroupError::Malformed("factor orders must be positive".into()));
        }
        let action = action % m.max(1);
        let unit = m == 1 || action.gcd(&m) == 1;
        let mut p = 1 % m;
        for _ in 0..k {
            p = p * action % m;
        }
        if !unit || p != 1 % m {
            return Err(GroupError::BadAction { m, k, action });
        }
        let powers: Vec<usize> = (0..k)
            .scan(1 % m, |acc, _| {
                let cur = *acc;
                *acc = *acc * action % m;
                Some(cur)
            })
            .collect();
        Ok(Self::from_rule(m * k, |x, y| {
            let (i, j) = (x % m, x / m);
            let (i2, j2) = (y % m, y / m);
            ((i + powers[j] * i2) % m) + m * ((j + j2) % k)
        }))
    }

    /// Dicyclic group of order `4m`: `a^{2m} = 1`, `x² = a^m`, `x a x⁻¹ = a⁻¹`.
    /// Element `a^i x^j` has index `j·2m + i`. `m = 2` is the quaternion group.
    pub fn dicyclic(m: usize) -> Result<Self, GroupError> {
        if m == 0 {
            return Err(GroupError::Malformed("dicyclic parameter must be positive".into()));
        }
        let r = 2 * m;
        Ok(Self::from_rule(4 * m, |x, y| {
            let (i, j) = (x % r, x / r);
            let (i2, j2) = (y % r, y / r);
            let twisted = if j == 1 { (r - i2) % r } else { i2 };
            let mut e = i + twisted;
            let mut jj = j + j2;
            if jj == 2 {
                jj = 0;
                e += m;
            }
            (e % r) + r * jj
        }))
    }

    /// Element `(a, b)` has index `a·|other| + b`.
    pub fn direct_product(&self, other: &Group) -> Self {
        let m = other.n;
        Self::from_rule(self.n * m, |x, y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjClasses {
    pub class_of: Vec<usize>,
    pub reps: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl ConjClasses {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

/// How a semidirect product `Z/m ⋊ Z/k` is graded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiRule {
    /// `φ(a^i h^j) = i mod 2`
    OnN,
    /// `φ(a^i h^j) = j mod 2`
    OnH,
    /// `φ(a^i h^j) = i + j mod 2`
    Both,
}

/// A finite group with a surjective grading `φ: G → Z2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagneticGroup {
    group: Group,
    phi: Vec<u8>,
}

impl MagneticGroup {
    pub fn new(group: Group, phi: Vec<u8>) -> Result<Self, GroupError> {
        let n = group.order();
        if phi.len() != n {
            return Err(GroupError::Malformed(format!(
                "phi has {} entries, expected {n}",
                phi.len()
            )));
        }
        if let Some(i) = phi.iter().position(|&p| p > 1) {
            return Err(GroupError::Malformed(format!("phi[{i}] is not 0 or 1")));
        }
        if !n.is_multiple_of(2) {
            return Err(GroupError::NotGraded {
                reason: "odd order admits no surjection onto Z2",
                witness: [0, 0],
            });
        }
        for a in 0..n {
            for b in 0..n {
                if phi[group.mul(a, b)] != phi[a] ^ phi[b] {
                    return Err(GroupError::NotGraded {
                        reason: "phi is not a homomorphism",
                        witness: [a, b],
                    });
                }
            }
        }
        if phi.iter().all(|&p| p == 0) {
            return Err(GroupError::NotGraded {
                reason: "phi is not surjective",
                witness: [0, 0],
            });
        }
        Ok(Self { group, phi })
    }

    pub fn build_from_table(mul: Vec<Vec<usize>>, phi: Vec<u8>) -> Result<Self, GroupError> {
        Self::new(Group::from_table(mul)?, phi)
    }

    pub fn build_semidirect(m: usize, k: usize, action: usize, rule: PhiRule) -> Result<Self, GroupError> {
        let group = Group::semidirect(m, k, action)?;
        let phi = (0..m * k)
            .map(|x| {
                let (i, j) = (x % m, x / m);
                (match rule {
                    PhiRule::OnN => i,
                    PhiRule::OnH => j,
                    PhiRule::Both => i + j,
                } % 2) as u8
            })
            .collect();
        Self::new(group, phi)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn phi(&self, g: usize) -> u8 {
        self.phi[g]
    }

    pub fn phi_table(&self) -> &[u8] {
        &self.phi
    }

    pub fn kernel_elements(&self) -> Vec<usize> {
        (0..self.order()).filter(|&g| self.phi[g] == 0).collect()
    }

    pub fn antiunitary_elements(&self) -> Vec<usize> {
        (0..self.order()).filter(|&g| self.phi[g] == 1).collect()
    }

    /// `G₀ = ker φ` with its embedding into `G`.
    pub fn kernel(&self) -> (Group, Vec<usize>) {
        self.group
            .subgroup(&self.kernel_elements())
            .expect("kernel of a homomorphism is a subgroup")
    }

    /// Direct product with grading `φ(a, b) = φ_left(a) + φ_right(b)`.
    pub fn graded_product(left: (&Group, &[u8]), right: (&Group, &[u8])) -> Result<Self, GroupError> {
        let group = left.0.direct_product(right.0);
        let m = right.0.order();
        let phi = (0..group.order()).map(|x| left.1[x / m] ^ right.1[x % m]).collect();
        Self::new(group, phi)
    }
}

/// A central extension `1 → {1, z} → total → base → 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralExtensionZ2 {
    pub total: MagneticGroup,
    pub proj: Vec<usize>,
    pub z: usize,
}

/// Builds the extension from a ±1 cocycle. Element `(g, s)` of the total
/// group has index `2g + s`, with `s = 1` carrying the central factor.
pub fn central_extension_z2(base: &MagneticGroup, cocycle: &[Vec<i8>]) -> Result<CentralExtensionZ2, GroupError> {
    let g = base.group();
    let n = g.order();
    if cocycle.len() != n || cocycle.iter().any(|r| r.len() != n) {
        return Err(GroupError::Malformed(format!("cocycle must be {n}x{n}")));
    }
    for (i, row) in cocycle.iter().enumerate() {
        if let Some(j) = row.iter().position(|&c| c != 1 && c != -1) {
            return Err(GroupError::Malformed(format!("cocycle entry ({i},{j}) is not ±1")));
        }
    }
    // A = Z2 is fixed by inversion, so the φ-twisted identity is the plain one.
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            for c in 0..n {
                if cocycle[a][b] * cocycle[ab][c] != cocycle[b][c] * cocycle[a][g.mul(b, c)] {
                    return Err(GroupError::NotACocycle { witness: [a, b, c] });
                }
            }
        }
    }
    let bit = |a: usize, b: usize| usize::from(cocycle[a][b] == -1);
    let total = Group::from_rule(2 * n, |x, y| {
        let (a, s) = (x / 2, x % 2);
        let (b, t) = (y / 2, y % 2);
        2 * g.mul(a, b) + ((s + t + bit(a, b)) % 2)
    });
    let id = total.identity();
    let z = id ^ 1;
    let phi = (0..2 * n).map(|x| base.phi(x / 2)).collect();
    let proj = (0..2 * n).map(|x| x / 2).collect();
    Ok(CentralExtensionZ2 {
        total: MagneticGroup::new(total, phi)?,
        proj,
        z,
    })
}

/// Magnetic group data of the C4T + Sz application.
///
/// `G = ⟨a⟩ × ⟨b⟩ ≅ Z4 × Z2` with `φ(a^i b^j) = i mod 2` (`a` = C4T,
/// `b` = Sz), and the central extension with `ã⁸ = b² = 1`, `b ã b = ã⁵`,
/// `z = ã⁴`. Element `a^i b^j` of `G` has index `4j + i`; its lift
/// `ã^i b^j` (`i < 4`) has index `2(4j + i)` in the total group.
pub fn builtin_c4t_sz() -> (MagneticGroup, CentralExtensionZ2) {
    let g = MagneticGroup::build_semidirect(4, 2, 1, PhiRule::OnN).expect("Z4 x Z2");
    let pow5 = [1usize, 5];
    let cocycle: Vec<Vec<i8>> = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (i, j) = (x % 4, x / 4);
                    let k = y % 4;
                    if (i + pow5[j] * k) % 8 >= 4 {
                        -1
                    } else {
                        1
                    }
                })
                .collect()
        })
        .collect();
    let ext = central_extension_z2(&g, &cocycle).expect("C4T x Sz cocycle");
    (g, ext)
}

/// The cocycle `c(T, T) = −1` on `G = Z2` whose extension is `Z4`.
pub fn kramers_cocycle() -> Vec<Vec<i8>> {
    vec![vec![1, 1], vec![1, -1]]
}

pub fn z2_time_reversal() -> MagneticGroup {
    MagneticGroup::new(Group::cyclic(2), vec![0, 1]).expect("Z2")
}
