//! SO(3, Qp): rotation matrices fixing the bilinear form x·y, with the
//! Lie algebra identified with (Qp)³ through A_ξ x = ξ × x.
//!
//! Elements are 3×3 matrices checked orthogonal with determinant 1 at
//! construction. Elementary rotations about the axes come from circle points,
//! so the curves ε ↦ rotation_axis(embed(ε)) double as exp(ε A_{e_i}).

use crate::error::PadicError;
use crate::padic::{Comparison, Padic, Prime};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::circle::CirclePoint;
use super::torus::LieAlgebraVector;

/// Row-major 3×3 matrix of Padic entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3 {
    entries: Vec<Padic>,
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            writeln!(
                f,
                "[{}, {}, {}]",
                self.at(i, 0),
                self.at(i, 1),
                self.at(i, 2)
            )?;
        }
        Ok(())
    }
}

impl Mat3 {
    pub fn from_rows(entries: Vec<Padic>) -> Result<Self, PadicError> {
        if entries.len() != 9 {
            return Err(PadicError::RankMismatch {
                expected: 9,
                got: entries.len(),
            });
        }
        let p = entries[0].prime();
        if let Some(e) = entries.iter().find(|e| e.prime() != p) {
            return Err(PadicError::PrimeMismatch(p.get(), e.prime().get()));
        }
        Ok(Mat3 { entries })
    }

    pub fn identity(p: Prime, prec: u32) -> Self {
        let one = Padic::one(p, prec);
        let zero = Padic::zero(p, i64::from(prec));
        let mut entries = vec![zero; 9];
        for i in 0..3 {
            entries[4 * i] = one.clone();
        }
        Mat3 { entries }
    }

    pub fn at(&self, i: usize, j: usize) -> &Padic {
        &self.entries[3 * i + j]
    }

    pub fn prime(&self) -> Prime {
        self.entries[0].prime()
    }

    pub fn transpose(&self) -> Mat3 {
        let mut entries = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                entries.push(self.at(j, i).clone());
            }
        }
        Mat3 { entries }
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let mut entries = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = self.at(i, 0).mul(other.at(0, j));
                for k in 1..3 {
                    acc = acc.add(&self.at(i, k).mul(other.at(k, j)));
                }
                entries.push(acc);
            }
        }
        Mat3 { entries }
    }

    pub fn mat_vec(&self, v: &LieAlgebraVector) -> Result<LieAlgebraVector, PadicError> {
        if v.rank() != 3 {
            return Err(PadicError::RankMismatch {
                expected: 3,
                got: v.rank(),
            });
        }
        let mut out = Vec::with_capacity(3);
        for i in 0..3 {
            let mut acc = self.at(i, 0).mul(&v.components[0]);
            for k in 1..3 {
                acc = acc.add(&self.at(i, k).mul(&v.components[k]));
            }
            out.push(acc);
        }
        Ok(LieAlgebraVector::new(out))
    }

    pub fn det(&self) -> Padic {
        let m = |i: usize, j: usize| self.at(i, j);
        let cof = |a: usize, b: usize, c: usize, d: usize| m(1, a).mul(m(2, b)).sub(&m(1, c).mul(m(2, d)));
        m(0, 0)
            .mul(&cof(1, 2, 2, 1))
            .sub(&m(0, 1).mul(&cof(0, 2, 2, 0)))
            .add(&m(0, 2).mul(&cof(0, 1, 1, 0)))
    }

    pub fn indistinguishable(&self, other: &Mat3) -> bool {
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.indistinguishable(b))
    }
}

/// ξ × v on rank-3 vectors.
pub fn cross(u: &LieAlgebraVector, v: &LieAlgebraVector) -> Result<LieAlgebraVector, PadicError> {
    for w in [u, v] {
        if w.rank() != 3 {
            return Err(PadicError::RankMismatch {
                expected: 3,
                got: w.rank(),
            });
        }
    }
    let a = &u.components;
    let b = &v.components;
    Ok(LieAlgebraVector::new(vec![
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]))
}

/// The generator matrix A_ξ with A_ξ x = ξ × x.
pub fn so3_generator_matrix(xi: &LieAlgebraVector) -> Result<Mat3, PadicError> {
    if xi.rank() != 3 {
        return Err(PadicError::RankMismatch {
            expected: 3,
            got: xi.rank(),
        });
    }
    let p = xi.components[0].prime();
    let prec = xi
        .components
        .iter()
        .filter_map(|c| c.rel_prec())
        .min()
        .unwrap_or(1);
    let z = Padic::zero(p, i64::from(prec));
    let c = &xi.components;
    Mat3::from_rows(vec![
        z.clone(),
        c[2].neg(),
        c[1].clone(),
        c[2].clone(),
        z.clone(),
        c[0].neg(),
        c[1].neg(),
        c[0].clone(),
        z,
    ])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Mat3", into = "Mat3")]
pub struct SO3 {
    mat: Mat3,
}

impl TryFrom<Mat3> for SO3 {
    type Error = PadicError;
    fn try_from(mat: Mat3) -> Result<Self, Self::Error> {
        SO3::new(mat)
    }
}

impl From<SO3> for Mat3 {
    fn from(g: SO3) -> Mat3 {
        g.mat
    }
}

impl fmt::Display for SO3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.mat.fmt(f)
    }
}

impl SO3 {
    /// Accepts Φ with ΦᵀΦ ≍ I and det Φ ≍ 1; rejection happens only on a
    /// certain violation.
    pub fn new(mat: Mat3) -> Result<Self, PadicError> {
        let p = mat.prime();
        let prec = mat
            .entries
            .iter()
            .filter_map(|e| e.rel_prec())
            .min()
            .unwrap_or(1);
        let gram = mat.transpose().mul(&mat);
        let id = Mat3::identity(p, prec);
        if !gram.indistinguishable(&id) {
            return Err(PadicError::NotInSubgroup(
                "matrix is not orthogonal: ΦᵀΦ differs from I".into(),
            ));
        }
        if let Comparison::Distinct { .. } = mat.det().compare(&Padic::one(p, prec)) {
            return Err(PadicError::NotInSubgroup(
                "matrix has determinant distinct from 1".into(),
            ));
        }
        Ok(SO3 { mat })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.mat
    }

    pub fn prime(&self) -> Prime {
        self.mat.prime()
    }

    pub fn identity(p: Prime, prec: u32) -> Self {
        SO3 {
            mat: Mat3::identity(p, prec),
        }
    }

    /// exp(t A_{e1}) for (a,b) = (cos t, sin t): rotation about the x-axis.
    pub fn rotation_x(c: &CirclePoint) -> Self {
        let p = c.prime();
        let prec = c.a.rel_prec().or(c.b.rel_prec()).unwrap_or(1);
        let one = Padic::one(p, prec);
        let z = Padic::zero(p, i64::from(prec));
        SO3 {
            mat: Mat3 {
                entries: vec![
                    one,
                    z.clone(),
                    z.clone(),
                    z.clone(),
                    c.a.clone(),
                    c.b.neg(),
                    z,
                    c.b.clone(),
                    c.a.clone(),
                ],
            },
        }
    }

    /// exp(t A_{e2}).
    pub fn rotation_y(c: &CirclePoint) -> Self {
        let p = c.prime();
        let prec = c.a.rel_prec().or(c.b.rel_prec()).unwrap_or(1);
        let one = Padic::one(p, prec);
        let z = Padic::zero(p, i64::from(prec));
        SO3 {
            mat: Mat3 {
                entries: vec![
                    c.a.clone(),
                    z.clone(),
                    c.b.clone(),
                    z.clone(),
                    one,
                    z.clone(),
                    c.b.neg(),
                    z,
                    c.a.clone(),
                ],
            },
        }
    }

    /// exp(t A_{e3}).
    pub fn rotation_z(c: &CirclePoint) -> Self {
        let p = c.prime();
        let prec = c.a.rel_prec().or(c.b.rel_prec()).unwrap_or(1);
        let one = Padic::one(p, prec);
        let z = Padic::zero(p, i64::from(prec));
        SO3 {
            mat: Mat3 {
                entries: vec![
                    c.a.clone(),
                    c.b.neg(),
                    z.clone(),
                    c.b.clone(),
                    c.a.clone(),
                    z.clone(),
                    z.clone(),
                    z,
                    one,
                ],
            },
        }
    }

    pub fn mul(&self, other: &SO3) -> Result<SO3, PadicError> {
        if self.prime() != other.prime() {
            return Err(PadicError::PrimeMismatch(
                self.prime().get(),
                other.prime().get(),
            ));
        }
        // Products of group elements stay in the group; no re-check.
        Ok(SO3 {
            mat: self.mat.mul(&other.mat),
        })
    }

    pub fn inv(&self) -> SO3 {
        SO3 {
            mat: self.mat.transpose(),
        }
    }

    /// ψ(Φ, x) = Φx on ambient vectors.
    pub fn apply(&self, v: &LieAlgebraVector) -> Result<LieAlgebraVector, PadicError> {
        self.mat.mat_vec(v)
    }

    /// Ad*_Φ under the cross-product identification: η ↦ Φη.
    pub fn coadjoint(&self, eta: &LieAlgebraVector) -> Result<LieAlgebraVector, PadicError> {
        self.mat.mat_vec(eta)
    }
}
