//! Phase spaces, symplectic form specifications, and tangent vectors.
//!
//! A phase space is a product of factors: p-adic integer balls, affine Qp
//! blocks, and unit spheres x^2+y^2+z^2 = 1. Membership is rejected only on
//! certain violations; a coordinate whose sign of valuation cannot be decided
//! at the current precision passes.

use crate::error::PadicError;
use crate::padic::{Comparison, Padic, Prime, Valuation};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One factor of a phase space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFactor {
    /// (Zp)^dim: coordinates with valuation >= 0.
    Ball { dim: usize },
    /// (Qp)^dim.
    Affine { dim: usize },
    /// Unit sphere in (Qp)^3.
    Sphere,
}

impl SpaceFactor {
    pub fn dim(&self) -> usize {
        match self {
            SpaceFactor::Ball { dim } | SpaceFactor::Affine { dim } => *dim,
            SpaceFactor::Sphere => 3,
        }
    }
}

/// Product of factors; coordinates concatenate the factors in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpaceSpec {
    pub factors: Vec<SpaceFactor>,
}

impl SpaceSpec {
    pub fn ball(dim: usize) -> Self {
        SpaceSpec {
            factors: vec![SpaceFactor::Ball { dim }],
        }
    }

    pub fn affine(dim: usize) -> Self {
        SpaceSpec {
            factors: vec![SpaceFactor::Affine { dim }],
        }
    }

    pub fn sphere() -> Self {
        SpaceSpec {
            factors: vec![SpaceFactor::Sphere],
        }
    }

    pub fn product(factors: Vec<SpaceFactor>) -> Self {
        SpaceSpec { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(SpaceFactor::dim).sum()
    }

    /// Certain-violation membership test.
    pub fn check_membership(&self, coords: &[Padic]) -> Result<(), PadicError> {
        if coords.len() != self.dim() {
            return Err(PadicError::SpaceMismatch(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        let mut off = 0;
        for factor in &self.factors {
            match factor {
                SpaceFactor::Ball { dim } => {
                    for j in 0..*dim {
                        if let Valuation::Finite(v) = coords[off + j].valuation() {
                            if v < 0 {
                                return Err(PadicError::SpaceMismatch(format!(
                                    "coordinate {} has valuation {v}, outside Zp",
                                    off + j
                                )));
                            }
                        }
                    }
                }
                SpaceFactor::Affine { .. } => {}
                SpaceFactor::Sphere => {
                    let (x, y, z) = (&coords[off], &coords[off + 1], &coords[off + 2]);
                    let s = x.mul(x).add(&y.mul(y)).add(&z.mul(z));
                    let prec = s.rel_prec().unwrap_or(1);
                    let one = Padic::one(x.prime(), prec);
                    if let Comparison::Distinct { first_diff } = s.compare(&one) {
                        return Err(PadicError::SpaceMismatch(format!(
                            "sphere constraint fails: x^2+y^2+z^2 differs from 1 at valuation {first_diff}"
                        )));
                    }
                }
            }
            off += factor.dim();
        }
        Ok(())
    }
}

/// A point of a phase space: coordinates plus the space tag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhasePoint {
    pub coords: Vec<Padic>,
    pub space: SpaceSpec,
}

impl PhasePoint {
    pub fn new(coords: Vec<Padic>, space: SpaceSpec) -> Result<Self, PadicError> {
        if coords.len() != space.dim() {
            return Err(PadicError::SpaceMismatch(format!(
                "space has dimension {}, got {} coordinates",
                space.dim(),
                coords.len()
            )));
        }
        Ok(PhasePoint { coords, space })
    }

    pub fn prime(&self) -> Prime {
        self.coords[0].prime()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn check_membership(&self) -> Result<(), PadicError> {
        self.space.check_membership(&self.coords)
    }

    pub fn indistinguishable(&self, other: &PhasePoint) -> bool {
        self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.indistinguishable(b))
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A tangent vector at a base point, in ambient coordinates.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: PhasePoint,
    pub components: Vec<Padic>,
}

impl TangentVector {
    pub fn new(base: PhasePoint, components: Vec<Padic>) -> Result<Self, PadicError> {
        if components.len() != base.dim() {
            return Err(PadicError::SpaceMismatch(format!(
                "tangent vector has {} components at a {}-dimensional point",
                components.len(),
                base.dim()
            )));
        }
        Ok(TangentVector { base, components })
    }

    /// Certain-violation test of tangency to every sphere factor:
    /// x v_x + y v_y + z v_z must not be distinct from 0.
    pub fn check_tangency(&self) -> Result<(), PadicError> {
        let mut off = 0;
        for factor in &self.base.space.factors {
            if let SpaceFactor::Sphere = factor {
                let mut acc: Option<Padic> = None;
                for j in 0..3 {
                    let term = self.base.coords[off + j].mul(&self.components[off + j]);
                    acc = Some(match acc {
                        None => term,
                        Some(s) => s.add(&term),
                    });
                }
                let pairing = acc.expect("three terms");
                if let Valuation::Finite(v) = pairing.valuation() {
                    return Err(PadicError::SpaceMismatch(format!(
                        "vector certainly leaves the sphere: constraint pairing has valuation {v}"
                    )));
                }
            }
            off += factor.dim();
        }
        Ok(())
    }
}

/// Picks the index of a certainly-unit-scale coordinate: the one with the
/// smallest certified valuation. At least one coordinate of a unit-sphere
/// point is a unit, so this is the chart whose denominator is invertible.
pub fn unit_chart(coords: &[Padic]) -> Result<usize, PadicError> {
    let mut best: Option<(usize, i64)> = None;
    for (i, c) in coords.iter().enumerate() {
        if let Valuation::Finite(v) = c.valuation() {
            if best.map_or(true, |(_, bv)| v < bv) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i).ok_or_else(|| {
        PadicError::InsufficientPrecision(
            "no coordinate has a certified valuation; cannot pick a chart".into(),
        )
    })
}

/// Symplectic form specification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymplecticFormSpec {
    /// Sum of dx_i ^ dy_i over interleaved coordinates (x1,y1,...,xn,yn).
    Standard { n: usize },
    /// weight * omega_S on the unit sphere, where omega_S = -(1/x) dy^dz
    /// = (1/y) dx^dz = -(1/z) dx^dy, evaluated in a unit-denominator chart.
    Sphere { weight: i64 },
    /// Weighted sum over concatenated coordinate blocks.
    Product { parts: Vec<(i64, SymplecticFormSpec)> },
}

/// One flattened factor of a form: total weight, ambient offset, and kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormFactor {
    Standard { offset: usize, n: usize },
    Sphere { offset: usize },
}

impl SymplecticFormSpec {
    pub fn dim(&self) -> usize {
        match self {
            SymplecticFormSpec::Standard { n } => 2 * n,
            SymplecticFormSpec::Sphere { .. } => 3,
            SymplecticFormSpec::Product { parts } => parts.iter().map(|(_, s)| s.dim()).sum(),
        }
    }

    /// Flattens nested products into (total weight, factor) pairs with
    /// absolute coordinate offsets.
    pub fn flatten(&self) -> Vec<(i64, FormFactor)> {
        let mut out = Vec::new();
        self.flatten_into(1, 0, &mut out);
        out
    }

    fn flatten_into(&self, weight: i64, offset: usize, out: &mut Vec<(i64, FormFactor)>) {
        match self {
            SymplecticFormSpec::Standard { n } => {
                out.push((weight, FormFactor::Standard { offset, n: *n }))
            }
            SymplecticFormSpec::Sphere { weight: w } => {
                out.push((weight * w, FormFactor::Sphere { offset }))
            }
            SymplecticFormSpec::Product { parts } => {
                let mut off = offset;
                for (w, part) in parts {
                    part.flatten_into(weight * w, off, out);
                    off += part.dim();
                }
            }
        }
    }

    /// omega_m(u, v) in ambient coordinates; u, v must be tangent for sphere
    /// factors (the chart formulas agree only on tangent pairs).
    pub fn evaluate(&self, at: &[Padic], u: &[Padic], v: &[Padic]) -> Result<Padic, PadicError> {
        let dim = self.dim();
        if at.len() != dim || u.len() != dim || v.len() != dim {
            return Err(PadicError::SpaceMismatch(format!(
                "form on {dim} coordinates applied to {}/{}/{} entries",
                at.len(),
                u.len(),
                v.len()
            )));
        }
        let mut acc: Option<Padic> = None;
        for (weight, factor) in self.flatten() {
            let term = match factor {
                FormFactor::Standard { offset, n } => {
                    let mut s: Option<Padic> = None;
                    for i in 0..n {
                        let (xi, yi) = (offset + 2 * i, offset + 2 * i + 1);
                        let t = u[xi].mul(&v[yi]).sub(&u[yi].mul(&v[xi]));
                        s = Some(match s {
                            None => t,
                            Some(a) => a.add(&t),
                        });
                    }
                    match s {
                        Some(t) => t,
                        None => continue,
                    }
                }
                FormFactor::Sphere { offset } => {
                    sphere_form_value(&at[offset..offset + 3], &u[offset..offset + 3], &v[offset..offset + 3])?
                }
            };
            let term = scale_int(&term, weight);
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        acc.ok_or_else(|| PadicError::SpaceMismatch("form has no factors".into()))
    }

    /// A tangent basis at `at`, as ambient-coordinate vectors: unit vectors
    /// for standard blocks, two chart-solved directions per sphere factor.
    pub fn tangent_basis(&self, at: &[Padic], prec: u32) -> Result<Vec<Vec<Padic>>, PadicError> {
        let dim = self.dim();
        if at.len() != dim {
            return Err(PadicError::SpaceMismatch(format!(
                "point has {} coordinates, form needs {dim}",
                at.len()
            )));
        }
        let p = at[0].prime();
        let zero = |bound: i64| Padic::zero(p, bound);
        let mut basis = Vec::new();
        for (_, factor) in self.flatten() {
            match factor {
                FormFactor::Standard { offset, n } => {
                    for j in 0..2 * n {
                        let mut vec = vec![zero(i64::from(prec)); dim];
                        vec[offset + j] = Padic::one(p, prec);
                        basis.push(vec);
                    }
                }
                FormFactor::Sphere { offset } => {
                    let chart = unit_chart(&at[offset..offset + 3])?;
                    let denom = &at[offset + chart];
                    for j in 0..3 {
                        if j == chart {
                            continue;
                        }
                        let mut vec = vec![zero(i64::from(prec)); dim];
                        vec[offset + j] = Padic::one(p, prec);
                        vec[offset + chart] = at[offset + j].div(denom)?.neg();
                        basis.push(vec);
                    }
                }
            }
        }
        Ok(basis)
    }
}

fn sphere_form_value(at: &[Padic], u: &[Padic], v: &[Padic]) -> Result<Padic, PadicError> {
    let chart = unit_chart(at)?;
    match chart {
        0 => u[1]
            .mul(&v[2])
            .sub(&u[2].mul(&v[1]))
            .div(&at[0])
            .map(|t| t.neg()),
        1 => u[0].mul(&v[2]).sub(&u[2].mul(&v[0])).div(&at[1]),
        _ => u[0]
            .mul(&v[1])
            .sub(&u[1].mul(&v[0]))
            .div(&at[2])
            .map(|t| t.neg()),
    }
}

/// Multiplies by a small exact integer without capping precision.
pub(crate) fn scale_int(x: &Padic, k: i64) -> Padic {
    if k == 1 {
        return x.clone();
    }
    let prec = x.rel_prec().unwrap_or(1).saturating_add(4);
    x.mul(&Padic::from_i64(x.prime(), k, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionPolicy;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn num(prime: u64, n: i64) -> Padic {
        Padic::from_i64(p(prime), n, 24)
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    #[test]
    fn standard_form_is_the_symplectic_pairing() {
        let form = SymplecticFormSpec::Standard { n: 2 };
        let at = vec![num(5, 0), num(5, 0), num(5, 0), num(5, 0)];
        // omega(dx1, dy1) = 1, omega(dy1, dx1) = -1, cross pairs vanish.
        let e = |i: usize| {
            let mut v = vec![num(5, 0); 4];
            v[i] = num(5, 1);
            v
        };
        let w = form.evaluate(&at, &e(0), &e(1)).unwrap();
        assert!(w.indistinguishable(&num(5, 1)));
        let w = form.evaluate(&at, &e(1), &e(0)).unwrap();
        assert!(w.indistinguishable(&num(5, -1)));
        let w = form.evaluate(&at, &e(0), &e(3)).unwrap();
        assert!(w.is_imprecise_zero());
    }

    #[test]
    fn sphere_form_charts_agree_on_tangent_pairs() {
        // Point with all three coordinates units: 9x^2 = 4+4+1 at p=7 scaled:
        // use (2/3, 2/3, 1/3): 4/9+4/9+1/9 = 1.
        let prime = p(7);
        let third = Padic::from_rational(prime, &1.into(), &3.into(), 24).unwrap();
        let at = vec![
            third.mul(&num(7, 2)),
            third.mul(&num(7, 2)),
            third.clone(),
        ];
        let form = SymplecticFormSpec::Sphere { weight: 1 };
        let basis = form.tangent_basis(&at, 24).unwrap();
        assert_eq!(basis.len(), 2);
        // Evaluate omega(u,v) via each chart formula by hand and compare.
        let (u, v) = (&basis[0], &basis[1]);
        let by_chart = |c: usize| -> Padic {
            match c {
                0 => u[1].mul(&v[2]).sub(&u[2].mul(&v[1])).div(&at[0]).unwrap().neg(),
                1 => u[0].mul(&v[2]).sub(&u[2].mul(&v[0])).div(&at[1]).unwrap(),
                _ => u[0].mul(&v[1]).sub(&u[1].mul(&v[0])).div(&at[2]).unwrap().neg(),
            }
        };
        let w0 = by_chart(0);
        assert!(w0.indistinguishable(&by_chart(1)));
        assert!(w0.indistinguishable(&by_chart(2)));
        let w = form.evaluate(&at, u, v).unwrap();
        assert!(w.indistinguishable(&w0));
    }

    #[test]
    fn product_form_weights_blocks() {
        // (-1)*standard(1) on a 2-coordinate block.
        let form = SymplecticFormSpec::Product {
            parts: vec![(-1, SymplecticFormSpec::Standard { n: 1 })],
        };
        let at = vec![num(3, 1), num(3, 1)];
        let u = vec![num(3, 1), num(3, 0)];
        let v = vec![num(3, 0), num(3, 1)];
        let w = form.evaluate(&at, &u, &v).unwrap();
        assert!(w.indistinguishable(&num(3, -1)));
    }

    #[test]
    fn ball_membership_rejects_only_certain_violations() {
        let space = SpaceSpec::ball(2);
        let good = vec![num(3, 4), num(3, 0)];
        assert!(space.check_membership(&good).is_ok());
        let frac = Padic::from_rational(p(3), &1.into(), &3.into(), 8).unwrap();
        let bad = vec![frac, num(3, 0)];
        assert!(matches!(
            space.check_membership(&bad),
            Err(PadicError::SpaceMismatch(_))
        ));
        // An imprecise zero with a weak bound might be anything in Zp.
        let fuzzy = vec![Padic::zero(p(3), 0), num(3, 0)];
        assert!(space.check_membership(&fuzzy).is_ok());
    }

    #[test]
    fn sphere_membership_checks_the_constraint() {
        let space = SpaceSpec::sphere();
        let ok = vec![num(5, 0), num(5, 0), num(5, 1)];
        assert!(space.check_membership(&ok).is_ok());
        let off = vec![num(5, 1), num(5, 0), num(5, 1)];
        assert!(matches!(
            space.check_membership(&off),
            Err(PadicError::SpaceMismatch(_))
        ));
    }

    #[test]
    fn tangency_check_flags_certain_normal_components() {
        let space = SpaceSpec::sphere();
        let base = PhasePoint::new(vec![num(5, 0), num(5, 0), num(5, 1)], space).unwrap();
        let tangent = TangentVector::new(base.clone(), vec![num(5, 1), num(5, 2), num(5, 0)]).unwrap();
        assert!(tangent.check_tangency().is_ok());
        let normal = TangentVector::new(base, vec![num(5, 0), num(5, 0), num(5, 1)]).unwrap();
        assert!(normal.check_tangency().is_err());
    }

    #[test]
    fn flatten_reports_offsets_and_weights() {
        let form = SymplecticFormSpec::Product {
            parts: vec![
                (-1, SymplecticFormSpec::Sphere { weight: 1 }),
                (-1, SymplecticFormSpec::Standard { n: 1 }),
            ],
        };
        assert_eq!(
            form.flatten(),
            vec![
                (-1, FormFactor::Sphere { offset: 0 }),
                (-1, FormFactor::Standard { offset: 3, n: 1 }),
            ]
        );
        assert_eq!(form.dim(), 5);
        let _ = pol();
    }
}
