//! Coefficient groups of magnetic equivariant K-theory at a point.
//!
//! The magnetic coefficients split over the corepresentation generators
//! into real, complex and quaternionic Bott tables.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chars::character_table;
use crate::corep::{CorepBasis, CorepError, MagneticContext, TypeLabel};
use crate::groups::{GroupError, MagneticGroup};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KError {
    #[error(transparent)]
    NotASubgroup(#[from] GroupError),
    #[error(transparent)]
    Corep(#[from] CorepError),
}

/// `Z^free_rank ⊕ ⊕ Z/t`, torsion sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroupExpr {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroupExpr {
    pub fn new(free_rank: usize, mut torsion: Vec<u64>) -> Self {
        torsion.retain(|&t| t > 1);
        torsion.sort_unstable();
        Self { free_rank, torsion }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        Self::new(rank, vec![])
    }

    pub fn cyclic(order: u64) -> Self {
        Self::new(0, vec![order])
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut t = self.torsion.clone();
        t.extend_from_slice(&other.torsion);
        Self::new(self.free_rank + other.free_rank, t)
    }

    /// `Z^k ⊗ self`
    pub fn times(&self, k: usize) -> Self {
        (0..k).fold(Self::zero(), |acc, _| acc.direct_sum(self))
    }
}

impl fmt::Display for AbelianGroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

const KO: [(usize, u64); 8] = [(1, 1), (0, 2), (0, 2), (0, 1), (1, 1), (0, 1), (0, 1), (0, 1)];

/// `KO^q`, `K^q` or `KSp^q` of a point, with `KSp^q = KO^{q−4}`.
pub fn bott_coefficients(field: TypeLabel, q: i64) -> AbelianGroupExpr {
    let ko = |q: i64| {
        let (r, t) = KO[(-q).rem_euclid(8) as usize];
        AbelianGroupExpr::new(r, vec![t])
    };
    match field {
        TypeLabel::R => ko(q),
        TypeLabel::H => ko(q - 4),
        TypeLabel::C => AbelianGroupExpr::free(usize::from(q.rem_euclid(2) == 0)),
    }
}

pub fn magnetic_coefficients(basis: &CorepBasis, q: i64) -> AbelianGroupExpr {
    basis.generators.iter().fold(AbelianGroupExpr::zero(), |acc, g| {
        acc.direct_sum(&bott_coefficients(g.label, q))
    })
}

/// `𝓡_R⊗KO(X) ⊕ 𝓡_C⊗K(X) ⊕ 𝓡_H⊗KSp(X)` for a space with trivial action.
pub fn trivial_space_ktheory(
    basis: &CorepBasis,
    ko_of_x: &AbelianGroupExpr,
    k_of_x: &AbelianGroupExpr,
    ksp_of_x: &AbelianGroupExpr,
) -> AbelianGroupExpr {
    ko_of_x
        .times(basis.count(TypeLabel::R))
        .direct_sum(&k_of_x.times(basis.count(TypeLabel::C)))
        .direct_sum(&ksp_of_x.times(basis.count(TypeLabel::H)))
}

/// Coefficients of the orbit `G/H`: magnetic if `H` contains an
/// antiunitary element, otherwise complex `K_H` of a point.
pub fn orbit_ktheory(group: &MagneticGroup, h: &[usize], q: i64) -> Result<AbelianGroupExpr, KError> {
    let (sub, emb) = group.group().subgroup(h)?;
    if emb.iter().any(|&g| group.phi(g) == 1) {
        let phi = emb.iter().map(|&g| group.phi(g)).collect();
        let mg = MagneticGroup::new(sub, phi)?;
        let basis = MagneticContext::new(mg)?.corep_basis()?;
        Ok(magnetic_coefficients(&basis, q))
    } else if q.rem_euclid(2) == 0 {
        let t = character_table(&sub).map_err(CorepError::from)?;
        Ok(AbelianGroupExpr::free(t.len()))
    } else {
        Ok(AbelianGroupExpr::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Z2Action {
    Trivial,
    Sign,
    SwapPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z2ModuleExpr {
    pub summands: Vec<(AbelianGroupExpr, Z2Action)>,
}

impl Z2ModuleExpr {
    /// Rank of the invariant sublattice.
    pub fn invariant_rank(&self) -> usize {
        self.summands
            .iter()
            .map(|(a, act)| match act {
                Z2Action::Trivial => a.free_rank,
                Z2Action::Sign => 0,
                Z2Action::SwapPair => a.free_rank / 2,
            })
            .sum()
    }
}

/// `K^q` of a point as a module over complex conjugation.
pub fn conj_module_structure(q: i64) -> Z2ModuleExpr {
    let summands = match q.rem_euclid(4) {
        0 => vec![(AbelianGroupExpr::free(1), Z2Action::Trivial)],
        2 => vec![(AbelianGroupExpr::free(1), Z2Action::Sign)],
        _ => vec![],
    };
    Z2ModuleExpr { summands }
}

pub fn periodicity_check(basis: &CorepBasis, q: i64) -> bool {
    magnetic_coefficients(basis, q) == magnetic_coefficients(basis, q + 8)
}

/// Rank of `(R(G₀) ⊗ K^q)^{Z2}` with `Z2` acting by the involution on
/// irreducibles and by conjugation on `K^q`. Uses only the involution, not
/// the indicator.
pub fn rational_invariant_rank(ctx: &MagneticContext, q: i64) -> usize {
    let inv = ctx.involution();
    let active = ctx.active_irreps();
    let fixed = active.iter().filter(|&&i| inv[i] == i).count();
    let pairs = (active.len() - fixed) / 2;
    match q.rem_euclid(4) {
        0 => fixed + pairs,
        2 => pairs,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{central_extension_z2, kramers_cocycle, z2_time_reversal, Group};

    fn z(r: usize) -> AbelianGroupExpr {
        AbelianGroupExpr::free(r)
    }

    #[test]
    fn bott_examples() {
        assert_eq!(bott_coefficients(TypeLabel::C, 0), z(1));
        assert_eq!(bott_coefficients(TypeLabel::C, -1), AbelianGroupExpr::zero());
        assert_eq!(bott_coefficients(TypeLabel::R, -1), AbelianGroupExpr::cyclic(2));
        assert_eq!(bott_coefficients(TypeLabel::R, -2), AbelianGroupExpr::cyclic(2));
        assert_eq!(bott_coefficients(TypeLabel::H, -4), bott_coefficients(TypeLabel::R, 0));
        assert_eq!(bott_coefficients(TypeLabel::R, 3), bott_coefficients(TypeLabel::R, -5));
    }

    #[test]
    fn magnetic_examples() {
        let kr = MagneticContext::new(z2_time_reversal()).unwrap().corep_basis().unwrap();
        for q in -7..=0 {
            assert_eq!(magnetic_coefficients(&kr, q), bott_coefficients(TypeLabel::R, q));
        }
        let ext = central_extension_z2(&z2_time_reversal(), &kramers_cocycle()).unwrap();
        let tw = MagneticContext::twisted(&ext).unwrap().corep_basis().unwrap();
        assert_eq!(magnetic_coefficients(&tw, 0), z(1));
        assert_eq!(magnetic_coefficients(&tw, -5), AbelianGroupExpr::cyclic(2));
        assert!(periodicity_check(&tw, -3));

        let g = MagneticGroup::graded_product((&Group::cyclic(2), &[0, 0]), (&Group::cyclic(2), &[0, 1])).unwrap();
        let b = MagneticContext::new(g).unwrap().corep_basis().unwrap();
        assert_eq!(b.count(TypeLabel::R), 2);
        assert_eq!(magnetic_coefficients(&b, 0), z(2));
        assert_eq!(magnetic_coefficients(&b, -1), AbelianGroupExpr::new(0, vec![2, 2]));
    }

    #[test]
    fn trivial_spaces() {
        let kr = MagneticContext::new(z2_time_reversal()).unwrap().corep_basis().unwrap();
        let pt = |f| bott_coefficients(f, 0);
        assert_eq!(
            trivial_space_ktheory(&kr, &pt(TypeLabel::R), &pt(TypeLabel::C), &pt(TypeLabel::H)),
            magnetic_coefficients(&kr, 0)
        );
        assert_eq!(trivial_space_ktheory(&kr, &z(2), &z(9), &z(9)), z(2));
    }

    #[test]
    fn orbits() {
        let g = z2_time_reversal();
        assert_eq!(orbit_ktheory(&g, &[0, 1], 0).unwrap(), z(1));
        assert_eq!(orbit_ktheory(&g, &[0], 0).unwrap(), z(1));
        assert_eq!(orbit_ktheory(&g, &[0], -1).unwrap(), AbelianGroupExpr::zero());
        assert!(matches!(orbit_ktheory(&g, &[1], 0), Err(KError::NotASubgroup(_))));
    }

    #[test]
    fn conjugation_modules() {
        assert_eq!(conj_module_structure(0).summands, vec![(z(1), Z2Action::Trivial)]);
        assert_eq!(conj_module_structure(-2).summands, vec![(z(1), Z2Action::Sign)]);
        assert_eq!(conj_module_structure(-4).summands, vec![(z(1), Z2Action::Trivial)]);
        assert!(conj_module_structure(-3).summands.is_empty());
        let ranks: Vec<_> = [0, -2, -1]
            .iter()
            .map(|&q| conj_module_structure(q).invariant_rank())
            .collect();
        assert_eq!(ranks, vec![1, 0, 0]);
    }

    #[test]
    fn display() {
        assert_eq!(AbelianGroupExpr::new(2, vec![2, 1]).to_string(), "Z^2 + Z/2");
        assert_eq!(AbelianGroupExpr::zero().to_string(), "0");
    }
}
