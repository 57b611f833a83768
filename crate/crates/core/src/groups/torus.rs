//! The torus (S¹_p)^k, its compact coordinates, the Lie-algebra side, and the
//! GL(k,Zp) reparametrization.
//!
//! A `CompactTorusElement` stores per-factor structure coordinates (bar, hat,
//! t). The hat exponent only exists for p ≡ 1 mod 4 and must vanish for the
//! element to lie in the compact subgroup G_p; `require_compact` is the gate
//! actions use before accepting raw circle input.

use crate::error::PadicError;
use crate::padic::{Padic, Prime};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::circle::{
    circle_inv, circle_mul, CircleDecomposition, CirclePoint, CircleTables,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusElement {
    pub factors: Vec<CirclePoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompactTorusElement {
    pub factors: Vec<CircleDecomposition>,
}

/// ξ, η, and momentum values live here; the dual pairing is the coordinate
/// dot product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LieAlgebraVector {
    pub components: Vec<Padic>,
}

impl fmt::Display for LieAlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl LieAlgebraVector {
    pub fn new(components: Vec<Padic>) -> Self {
        LieAlgebraVector { components }
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    /// ⟨ξ, η⟩ = Σ ξᵢηᵢ.
    pub fn pairing(&self, other: &LieAlgebraVector) -> Result<Padic, PadicError> {
        if self.rank() != other.rank() {
            return Err(PadicError::RankMismatch {
                expected: self.rank(),
                got: other.rank(),
            });
        }
        let mut acc: Option<Padic> = None;
        for (x, y) in self.components.iter().zip(&other.components) {
            if x.prime() != y.prime() {
                return Err(PadicError::PrimeMismatch(x.prime().get(), y.prime().get()));
            }
            let term = x.mul(y);
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        acc.ok_or_else(|| PadicError::RankMismatch {
            expected: 1,
            got: 0,
        })
    }
}

fn check_rank(expected: usize, got: usize) -> Result<(), PadicError> {
    if expected != got {
        return Err(PadicError::RankMismatch { expected, got });
    }
    Ok(())
}

impl TorusElement {
    pub fn new(factors: Vec<CirclePoint>) -> Self {
        assert!(!factors.is_empty(), "torus rank is at least 1");
        TorusElement { factors }
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn identity(p: Prime, prec: u32, k: usize) -> Self {
        TorusElement::new((0..k).map(|_| CirclePoint::identity(p, prec)).collect())
    }
}

pub fn torus_mul(g: &TorusElement, h: &TorusElement) -> Result<TorusElement, PadicError> {
    check_rank(g.rank(), h.rank())?;
    let factors = g
        .factors
        .iter()
        .zip(&h.factors)
        .map(|(a, b)| circle_mul(a, b))
        .collect::<Result<_, _>>()?;
    Ok(TorusElement { factors })
}

pub fn torus_inv(g: &TorusElement) -> TorusElement {
    TorusElement {
        factors: g.factors.iter().map(circle_inv).collect(),
    }
}

impl CompactTorusElement {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn identity(tables: &CircleTables, k: usize) -> Self {
        let p = tables.prime();
        let prec = tables.policy().default_digits;
        let hat = if p.get() % 4 == 1 { Some(0) } else { None };
        CompactTorusElement {
            factors: (0..k)
                .map(|_| CircleDecomposition {
                    bar: 0,
                    hat,
                    t: Padic::zero(p, i64::from(prec)),
                })
                .collect(),
        }
    }

    /// All hat exponents vanish, so the element lies in G_p.
    pub fn require_compact(&self) -> Result<(), PadicError> {
        for (i, f) in self.factors.iter().enumerate() {
            if f.hat.unwrap_or(0) != 0 {
                return Err(PadicError::NotInSubgroup(format!(
                    "factor {i} has free exponent {}; the compact subgroup needs 0",
                    f.hat.unwrap_or(0)
                )));
            }
        }
        Ok(())
    }
}

fn check_factor(tables: &CircleTables, f: &CircleDecomposition) -> Result<(), PadicError> {
    if f.t.prime() != tables.prime() {
        return Err(PadicError::PrimeMismatch(
            f.t.prime().get(),
            tables.prime().get(),
        ));
    }
    Ok(())
}

pub fn compact_torus_mul(
    tables: &CircleTables,
    g: &CompactTorusElement,
    h: &CompactTorusElement,
) -> Result<CompactTorusElement, PadicError> {
    check_rank(g.rank(), h.rank())?;
    let order = tables.torsion_order();
    let split = tables.prime().get() % 4 == 1;
    let mut factors = Vec::with_capacity(g.rank());
    for (a, b) in g.factors.iter().zip(&h.factors) {
        check_factor(tables, a)?;
        check_factor(tables, b)?;
        factors.push(CircleDecomposition {
            bar: (a.bar + b.bar) % order,
            hat: split.then(|| a.hat.unwrap_or(0) + b.hat.unwrap_or(0)),
            t: a.t.add(&b.t),
        });
    }
    Ok(CompactTorusElement { factors })
}

pub fn compact_torus_inv(
    tables: &CircleTables,
    g: &CompactTorusElement,
) -> Result<CompactTorusElement, PadicError> {
    let order = tables.torsion_order();
    let split = tables.prime().get() % 4 == 1;
    let mut factors = Vec::with_capacity(g.rank());
    for f in &g.factors {
        check_factor(tables, f)?;
        factors.push(CircleDecomposition {
            bar: (order - f.bar % order) % order,
            hat: split.then(|| -f.hat.unwrap_or(0)),
            t: f.t.neg(),
        });
    }
    Ok(CompactTorusElement { factors })
}

/// Embeds compact coordinates back into circle factors.
pub fn compact_to_torus(
    tables: &CircleTables,
    g: &CompactTorusElement,
) -> Result<TorusElement, PadicError> {
    let factors = g
        .factors
        .iter()
        .map(|f| {
            check_factor(tables, f)?;
            tables.recompose(f)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TorusElement { factors })
}

/// Structure coordinates of every factor; hat is reported as found, so the
/// result may fall outside G_p (see `require_compact`).
pub fn torus_decompose(
    tables: &CircleTables,
    g: &TorusElement,
) -> Result<CompactTorusElement, PadicError> {
    let factors = g
        .factors
        .iter()
        .map(|f| tables.decompose(f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompactTorusElement { factors })
}

fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * det_int(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// φ_A: torsion parts unchanged, t-row multiplied on the right by A. A must
/// be invertible over Zp, i.e. det(A) a p-adic unit.
pub fn torus_reparam(
    a: &[Vec<i64>],
    g: &CompactTorusElement,
) -> Result<CompactTorusElement, PadicError> {
    let k = g.rank();
    check_rank(k, a.len())?;
    for row in a {
        check_rank(k, row.len())?;
    }
    let p = g.factors[0].t.prime();
    let big: Vec<Vec<BigInt>> = a
        .iter()
        .map(|row| row.iter().map(|&e| BigInt::from(e)).collect())
        .collect();
    let det = det_int(&big);
    if det.is_zero() {
        return Err(PadicError::SingularMatrix("determinant is 0".into()));
    }
    if (&det % BigInt::from(p.get())).is_zero() {
        return Err(PadicError::SingularMatrix(format!(
            "determinant {det} is divisible by {}, not a unit in Zp",
            p.get()
        )));
    }
    let mut factors = Vec::with_capacity(k);
    for (j, base) in g.factors.iter().enumerate() {
        // t'_j = sum_i t_i A[i][j]; zero coefficients are skipped so they do
        // not cap the sum's precision.
        let mut acc: Option<Padic> = None;
        for (i, f) in g.factors.iter().enumerate() {
            let coeff = a[i][j];
            if coeff == 0 {
                continue;
            }
            let prec = f.t.rel_prec().unwrap_or(1);
            let term = f.t.mul(&Padic::from_i64(p, coeff, prec));
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        let t = acc.unwrap_or_else(|| g.factors[j].t.clone());
        factors.push(CircleDecomposition {
            bar: base.bar,
            hat: base.hat,
            t,
        });
    }
    Ok(CompactTorusElement { factors })
}

/// Ad* of any Abelian group is the identity.
pub fn coadjoint_abelian(eta: &LieAlgebraVector) -> LieAlgebraVector {
    eta.clone()
}
