//! The action catalog: executable descriptors with closed-form generators,
//! momentum maps, and flag claims the verifier can test.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use crate::error::PadicError;
use crate::groups::{
    circle_embed, compact_to_torus, cross, torus_decompose, torus_reparam, CircleTables,
    LieAlgebraVector, SO3, TorusElement,
};
use crate::padic::{Comparison, Padic, PrecisionPolicy, Prime, Valuation};

use super::digit;
use super::space::{PhasePoint, SpaceFactor, SpaceSpec, SymplecticFormSpec, TangentVector};
use super::toric::{BallNode, BallTree};

/// A group element for any catalog action.
#[derive(Clone, Debug)]
pub enum GroupElement {
    /// Additive parameter vector (entries in Qp, Zp, or pZp per the spec).
    Additive(Vec<Padic>),
    /// Product of circle points; actions require the compact part G_p.
    Torus(TorusElement),
    Rotation(SO3),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditiveDomain {
    Qp,
    Zp,
    PZp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Additive { k: usize, domain: AdditiveDomain },
    CompactTorus { k: usize },
    SpecialOrthogonal3,
}

impl GroupSpec {
    pub fn rank(&self) -> usize {
        match self {
            GroupSpec::Additive { k, .. } | GroupSpec::CompactTorus { k } => *k,
            GroupSpec::SpecialOrthogonal3 => 3,
        }
    }
}

/// The paper's claims for one action; exactly what the verifier puts on
/// trial, never consulted by act/generator/momentum themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ActionFlags {
    pub weakly_hamiltonian: bool,
    pub hamiltonian: bool,
    pub strictly_hamiltonian: bool,
    pub proper: bool,
    pub free: bool,
    pub has_fixed_points: bool,
}

/// Dispatch data per action. Public so downstream code (the verifier) can
/// build matching polynomial observables.
#[derive(Clone)]
pub enum ActionKind {
    Translation { n: usize },
    RotationPlane,
    RotationSphere,
    JaynesCummings,
    CoupledAngularMomentum { weights: (i64, i64) },
    So3AngularMomentum,
    WeakOnly { n: usize },
    NoFixedPoints { n: usize },
    Piecewise { n: usize },
    DigitCounterexample,
    Toric { tree: Arc<BallTree> },
    RotationPair { reparam: Option<(Vec<Vec<i64>>, Arc<CircleTables>)> },
}

impl fmt::Debug for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::Translation { n } => write!(f, "Translation {{ n: {n} }}"),
            ActionKind::RotationPlane => write!(f, "RotationPlane"),
            ActionKind::RotationSphere => write!(f, "RotationSphere"),
            ActionKind::JaynesCummings => write!(f, "JaynesCummings"),
            ActionKind::CoupledAngularMomentum { weights } => {
                write!(f, "CoupledAngularMomentum {{ weights: {weights:?} }}")
            }
            ActionKind::So3AngularMomentum => write!(f, "So3AngularMomentum"),
            ActionKind::WeakOnly { n } => write!(f, "WeakOnly {{ n: {n} }}"),
            ActionKind::NoFixedPoints { n } => write!(f, "NoFixedPoints {{ n: {n} }}"),
            ActionKind::Piecewise { n } => write!(f, "Piecewise {{ n: {n} }}"),
            ActionKind::DigitCounterexample => write!(f, "DigitCounterexample"),
            ActionKind::Toric { tree } => {
                write!(f, "Toric {{ n: {}, plan: {:?} }}", tree.rank(), tree.plan())
            }
            ActionKind::RotationPair { reparam } => write!(
                f,
                "RotationPair {{ reparam: {:?} }}",
                reparam.as_ref().map(|(a, _)| a)
            ),
        }
    }
}

/// One catalog action, fully describing how to evaluate it and what the
/// paper claims about it.
#[derive(Clone, Debug)]
pub struct ActionDescriptor {
    pub name: String,
    pub p: Prime,
    pub policy: PrecisionPolicy,
    pub kind: ActionKind,
    pub group: GroupSpec,
    pub space: SpaceSpec,
    pub form: SymplecticFormSpec,
    pub flags: ActionFlags,
}

fn strict_rotation(p: Prime) -> bool {
    p.get() % 4 != 1
}

impl ActionDescriptor {
    pub fn translation(p: Prime, policy: PrecisionPolicy, n: usize) -> Result<Self, PadicError> {
        require_positive(n)?;
        Ok(ActionDescriptor {
            name: "translation".into(),
            p,
            policy,
            kind: ActionKind::Translation { n },
            group: GroupSpec::Additive {
                k: n,
                domain: AdditiveDomain::Qp,
            },
            space: SpaceSpec::affine(2 * n),
            form: SymplecticFormSpec::Standard { n },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: true,
                proper: true,
                free: true,
                has_fixed_points: false,
            },
        })
    }

    pub fn rotation_plane(p: Prime, policy: PrecisionPolicy) -> Self {
        ActionDescriptor {
            name: "rotation_plane".into(),
            p,
            policy,
            kind: ActionKind::RotationPlane,
            group: GroupSpec::CompactTorus { k: 1 },
            space: SpaceSpec::affine(2),
            form: SymplecticFormSpec::Standard { n: 1 },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: strict_rotation(p),
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        }
    }

    pub fn rotation_sphere(p: Prime, policy: PrecisionPolicy) -> Self {
        ActionDescriptor {
            name: "rotation_sphere".into(),
            p,
            policy,
            kind: ActionKind::RotationSphere,
            group: GroupSpec::CompactTorus { k: 1 },
            space: SpaceSpec::sphere(),
            form: SymplecticFormSpec::Sphere { weight: 1 },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: strict_rotation(p),
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        }
    }

    pub fn jaynes_cummings(p: Prime, policy: PrecisionPolicy) -> Self {
        ActionDescriptor {
            name: "jaynes_cummings".into(),
            p,
            policy,
            kind: ActionKind::JaynesCummings,
            group: GroupSpec::CompactTorus { k: 1 },
            space: SpaceSpec::product(vec![SpaceFactor::Sphere, SpaceFactor::Affine { dim: 2 }]),
            form: SymplecticFormSpec::Product {
                parts: vec![
                    (-1, SymplecticFormSpec::Sphere { weight: 1 }),
                    (-1, SymplecticFormSpec::Standard { n: 1 }),
                ],
            },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: false,
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        }
    }

    pub fn coupled_angular_momentum(
        p: Prime,
        policy: PrecisionPolicy,
        weights: (i64, i64),
    ) -> Result<Self, PadicError> {
        if weights.0 == 0 || weights.1 == 0 {
            return Err(PadicError::Range(
                "coupled angular momentum weights must be nonzero".into(),
            ));
        }
        Ok(ActionDescriptor {
            name: "coupled_angular_momentum".into(),
            p,
            policy,
            kind: ActionKind::CoupledAngularMomentum { weights },
            group: GroupSpec::CompactTorus { k: 1 },
            space: SpaceSpec::product(vec![SpaceFactor::Sphere, SpaceFactor::Sphere]),
            form: SymplecticFormSpec::Product {
                parts: vec![
                    (weights.0, SymplecticFormSpec::Sphere { weight: 1 }),
                    (weights.1, SymplecticFormSpec::Sphere { weight: 1 }),
                ],
            },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: false,
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        })
    }

    pub fn so3_angular_momentum(p: Prime, policy: PrecisionPolicy) -> Self {
        ActionDescriptor {
            name: "so3_angular_momentum".into(),
            p,
            policy,
            kind: ActionKind::So3AngularMomentum,
            group: GroupSpec::SpecialOrthogonal3,
            space: SpaceSpec::affine(6),
            form: SymplecticFormSpec::Standard { n: 3 },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: false,
                // The ambient quadratic form is anisotropic only at p=2, so
                // SO(3,Qp) is compact exactly there.
                proper: p.get() == 2,
                free: false,
                has_fixed_points: true,
            },
        }
    }

    pub fn weak_only(p: Prime, policy: PrecisionPolicy, n: usize) -> Result<Self, PadicError> {
        require_positive(n)?;
        Ok(ActionDescriptor {
            name: "weak_only".into(),
            p,
            policy,
            kind: ActionKind::WeakOnly { n },
            group: GroupSpec::Additive {
                k: 2,
                domain: AdditiveDomain::Qp,
            },
            space: SpaceSpec::affine(2 * n),
            form: SymplecticFormSpec::Standard { n },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: false,
                strictly_hamiltonian: false,
                proper: true,
                free: true,
                has_fixed_points: false,
            },
        })
    }

    pub fn no_fixed_points(p: Prime, policy: PrecisionPolicy, n: usize) -> Result<Self, PadicError> {
        require_positive(n)?;
        Ok(ActionDescriptor {
            name: "no_fixed_points".into(),
            p,
            policy,
            kind: ActionKind::NoFixedPoints { n },
            group: GroupSpec::Additive {
                k: 1,
                domain: AdditiveDomain::Qp,
            },
            space: SpaceSpec::affine(2 * n),
            form: SymplecticFormSpec::Standard { n },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: n == 1,
                proper: true,
                free: true,
                has_fixed_points: false,
            },
        })
    }

    pub fn piecewise(p: Prime, policy: PrecisionPolicy, n: usize) -> Result<Self, PadicError> {
        require_positive(n)?;
        Ok(ActionDescriptor {
            name: "piecewise".into(),
            p,
            policy,
            kind: ActionKind::Piecewise { n },
            group: GroupSpec::Additive {
                k: 2,
                domain: AdditiveDomain::PZp,
            },
            space: SpaceSpec::ball(2 * n),
            form: SymplecticFormSpec::Standard { n },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: false,
                strictly_hamiltonian: false,
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        })
    }

    pub fn digit_counterexample(p: Prime, policy: PrecisionPolicy) -> Self {
        ActionDescriptor {
            name: "digit_counterexample".into(),
            p,
            policy,
            kind: ActionKind::DigitCounterexample,
            group: GroupSpec::Additive {
                k: 1,
                domain: AdditiveDomain::Qp,
            },
            space: SpaceSpec::ball(2),
            form: SymplecticFormSpec::Standard { n: 1 },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: false,
                strictly_hamiltonian: false,
                proper: false,
                free: true,
                has_fixed_points: false,
            },
        }
    }

    pub fn toric(
        p: Prime,
        policy: PrecisionPolicy,
        n: usize,
        plan: &[usize],
    ) -> Result<Self, PadicError> {
        let tree = BallTree::build(p, n, plan)?;
        let single = tree.census() == 1;
        Ok(ActionDescriptor {
            name: "toric".into(),
            p,
            policy,
            kind: ActionKind::Toric {
                tree: Arc::new(tree),
            },
            group: GroupSpec::CompactTorus { k: n },
            space: SpaceSpec::ball(2 * n),
            form: SymplecticFormSpec::Standard { n },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: single && strict_rotation(p),
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        })
    }

    pub fn rotation_pair(
        p: Prime,
        policy: PrecisionPolicy,
        reparam: Option<Vec<Vec<i64>>>,
    ) -> Result<Self, PadicError> {
        let reparam = match reparam {
            None => None,
            Some(a) => {
                if a.len() != 2 || a.iter().any(|row| row.len() != 2) {
                    return Err(PadicError::RankMismatch {
                        expected: 2,
                        got: a.len(),
                    });
                }
                let tables = CircleTables::new(p, policy)?;
                Some((a, Arc::new(tables)))
            }
        };
        Ok(ActionDescriptor {
            name: "rotation_pair".into(),
            p,
            policy,
            kind: ActionKind::RotationPair { reparam },
            group: GroupSpec::CompactTorus { k: 2 },
            space: SpaceSpec::affine(4),
            form: SymplecticFormSpec::Standard { n: 2 },
            flags: ActionFlags {
                weakly_hamiltonian: true,
                hamiltonian: true,
                strictly_hamiltonian: strict_rotation(p),
                proper: true,
                free: false,
                has_fixed_points: true,
            },
        })
    }

    /// The registry names, in the taxonomy order of the catalog.
    pub fn registry_names() -> &'static [&'static str] {
        &[
            "translation",
            "rotation_plane",
            "rotation_sphere",
            "jaynes_cummings",
            "coupled_angular_momentum",
            "so3_angular_momentum",
            "weak_only",
            "no_fixed_points",
            "piecewise",
            "digit_counterexample",
            "toric",
            "rotation_pair",
        ]
    }

    /// The ten fixed-parameter actions the classification table covers.
    pub fn taxonomy_names() -> &'static [&'static str] {
        &Self::registry_names()[..10]
    }

    /// Builds a registry action by name with its default parameters.
    pub fn by_name(name: &str, p: Prime, policy: PrecisionPolicy) -> Result<Self, PadicError> {
        match name {
            "translation" => Self::translation(p, policy, 2),
            "rotation_plane" => Ok(Self::rotation_plane(p, policy)),
            "rotation_sphere" => Ok(Self::rotation_sphere(p, policy)),
            "jaynes_cummings" => Ok(Self::jaynes_cummings(p, policy)),
            "coupled_angular_momentum" => Self::coupled_angular_momentum(p, policy, (1, 2)),
            "so3_angular_momentum" => Ok(Self::so3_angular_momentum(p, policy)),
            "weak_only" => Self::weak_only(p, policy, 2),
            "no_fixed_points" => Self::no_fixed_points(p, policy, 1),
            "piecewise" => Self::piecewise(p, policy, 2),
            "digit_counterexample" => Ok(Self::digit_counterexample(p, policy)),
            "toric" => Self::toric(p, policy, 1, &[]),
            "rotation_pair" => Self::rotation_pair(p, policy, None),
            other => Err(PadicError::UnknownAction(other.into())),
        }
    }

    pub fn lie_rank(&self) -> usize {
        self.group.rank()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Wraps raw coordinates as a checked point of this action's space.
    pub fn phase_point(&self, coords: Vec<Padic>) -> Result<PhasePoint, PadicError> {
        let m = PhasePoint::new(coords, self.space.clone())?;
        m.check_membership()?;
        Ok(m)
    }

    pub fn check_group(&self, g: &GroupElement) -> Result<(), PadicError> {
        match (&self.group, g) {
            (GroupSpec::Additive { k, domain }, GroupElement::Additive(v)) => {
                if v.len() != *k {
                    return Err(PadicError::GroupMismatch(format!(
                        "expected {k} additive parameters, got {}",
                        v.len()
                    )));
                }
                let floor = match domain {
                    AdditiveDomain::Qp => i64::MIN,
                    AdditiveDomain::Zp => 0,
                    AdditiveDomain::PZp => 1,
                };
                for (i, c) in v.iter().enumerate() {
                    self.check_prime(c.prime())?;
                    if let Valuation::Finite(val) = c.valuation() {
                        if val < floor {
                            return Err(PadicError::GroupMismatch(format!(
                                "parameter {i} has valuation {val}, below the domain floor {floor}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            (GroupSpec::CompactTorus { k }, GroupElement::Torus(t)) => {
                if t.rank() != *k {
                    return Err(PadicError::GroupMismatch(format!(
                        "expected a rank-{k} torus element, got rank {}",
                        t.rank()
                    )));
                }
                for (i, f) in t.factors.iter().enumerate() {
                    self.check_prime(f.prime())?;
                    if let Comparison::Distinct { .. } = f.on_circle() {
                        return Err(PadicError::GroupMismatch(format!(
                            "factor {i} is certainly off the circle"
                        )));
                    }
                    // For p = 1 mod 4 the circle has non-compact directions;
                    // G_p is exactly the integral part.
                    if self.p.get() % 4 == 1 {
                        for c in [&f.a, &f.b] {
                            if let Valuation::Finite(v) = c.valuation() {
                                if v < 0 {
                                    return Err(PadicError::NotInSubgroup(format!(
                                        "factor {i} has a coordinate of valuation {v}; G_p needs Zp entries"
                                    )));
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
            (GroupSpec::SpecialOrthogonal3, GroupElement::Rotation(r)) => {
                self.check_prime(r.prime())
            }
            _ => Err(PadicError::GroupMismatch(format!(
                "element shape does not match the {:?} group",
                self.group
            ))),
        }
    }

    fn check_prime(&self, q: Prime) -> Result<(), PadicError> {
        if q != self.p {
            return Err(PadicError::PrimeMismatch(self.p.get(), q.get()));
        }
        Ok(())
    }

    fn check_point(&self, m: &PhasePoint) -> Result<(), PadicError> {
        if m.dim() != self.dim() {
            return Err(PadicError::SpaceMismatch(format!(
                "point has dimension {}, the space has {}",
                m.dim(),
                self.dim()
            )));
        }
        self.check_prime(m.prime())?;
        m.check_membership()
    }

    fn zero(&self) -> Padic {
        Padic::zero(self.p, i64::from(self.policy.default_digits))
    }

    /// Evaluates the action. Rejects group/space mismatches before
    /// dispatching; the piecewise region test is three-valued.
    pub fn act(&self, g: &GroupElement, m: &PhasePoint) -> Result<PhasePoint, PadicError> {
        self.check_group(g)?;
        self.check_point(m)?;
        let c = &m.coords;
        let out = match (&self.kind, g) {
            (ActionKind::Translation { n }, GroupElement::Additive(a)) => {
                let mut out = c.clone();
                for i in 0..*n {
                    out[2 * i] = out[2 * i].add(&a[i]);
                }
                out
            }
            (ActionKind::RotationPlane, GroupElement::Torus(t)) => {
                let f = &t.factors[0];
                let (x, y) = rotate_plus(&f.a, &f.b, &c[0], &c[1]);
                vec![x, y]
            }
            (ActionKind::RotationSphere, GroupElement::Torus(t)) => {
                let f = &t.factors[0];
                let (x, y) = rotate_plus(&f.a, &f.b, &c[0], &c[1]);
                vec![x, y, c[2].clone()]
            }
            (ActionKind::JaynesCummings, GroupElement::Torus(t)) => {
                let f = &t.factors[0];
                let (x, y) = rotate_minus(&f.a, &f.b, &c[0], &c[1]);
                let (u, v) = rotate_minus(&f.a, &f.b, &c[3], &c[4]);
                vec![x, y, c[2].clone(), u, v]
            }
            (ActionKind::CoupledAngularMomentum { .. }, GroupElement::Torus(t)) => {
                let f = &t.factors[0];
                let (x1, y1) = rotate_plus(&f.a, &f.b, &c[0], &c[1]);
                let (x2, y2) = rotate_plus(&f.a, &f.b, &c[3], &c[4]);
                vec![x1, y1, c[2].clone(), x2, y2, c[5].clone()]
            }
            (ActionKind::So3AngularMomentum, GroupElement::Rotation(r)) => {
                let x = LieAlgebraVector::new(vec![c[0].clone(), c[2].clone(), c[4].clone()]);
                let y = LieAlgebraVector::new(vec![c[1].clone(), c[3].clone(), c[5].clone()]);
                let rx = r.apply(&x)?;
                let ry = r.apply(&y)?;
                interleave(&rx.components, &ry.components)
            }
            (ActionKind::WeakOnly { .. }, GroupElement::Additive(a)) => {
                let mut out = c.clone();
                out[0] = out[0].add(&a[0]);
                out[1] = out[1].add(&a[1]);
                out
            }
            (ActionKind::NoFixedPoints { .. }, GroupElement::Additive(a)) => {
                let mut out = c.clone();
                out[0] = out[0].add(&a[0]);
                out
            }
            (ActionKind::Piecewise { .. }, GroupElement::Additive(a)) => {
                if self.piecewise_region(c)? {
                    let mut out = c.clone();
                    out[0] = out[0].add(&a[0]);
                    out[1] = out[1].add(&a[1]);
                    out
                } else {
                    c.clone()
                }
            }
            (ActionKind::DigitCounterexample, GroupElement::Additive(a)) => {
                let (x, y) = digit::digit_act(&a[0], &c[0], &c[1])?;
                vec![x, y]
            }
            (ActionKind::Toric { tree }, GroupElement::Torus(t)) => {
                let leaf = tree.locate(c)?;
                let mut out = Vec::with_capacity(c.len());
                for (i, f) in t.factors.iter().enumerate() {
                    let (x, y) = self.rotate_about(
                        &f.a,
                        &f.b,
                        &c[2 * i],
                        &c[2 * i + 1],
                        &leaf.center[2 * i],
                        &leaf.center[2 * i + 1],
                    );
                    out.push(x);
                    out.push(y);
                }
                out
            }
            (ActionKind::RotationPair { reparam }, GroupElement::Torus(t)) => {
                let effective = match reparam {
                    None => t.clone(),
                    Some((a, tables)) => {
                        let dec = torus_decompose(tables, t)?;
                        dec.require_compact()?;
                        compact_to_torus(tables, &torus_reparam(a, &dec)?)?
                    }
                };
                let f1 = &effective.factors[0];
                let f2 = &effective.factors[1];
                let (x1, y1) = rotate_plus(&f1.a, &f1.b, &c[0], &c[1]);
                let (x2, y2) = rotate_plus(&f2.a, &f2.b, &c[2], &c[3]);
                vec![x1, y1, x2, y2]
            }
            _ => unreachable!("check_group filtered mismatched shapes"),
        };
        PhasePoint::new(out, self.space.clone())
    }

    /// The infinitesimal generator X_psi(xi) at m, in closed form.
    pub fn generator(
        &self,
        xi: &LieAlgebraVector,
        m: &PhasePoint,
    ) -> Result<TangentVector, PadicError> {
        if xi.rank() != self.lie_rank() {
            return Err(PadicError::RankMismatch {
                expected: self.lie_rank(),
                got: xi.rank(),
            });
        }
        self.check_point(m)?;
        let c = &m.coords;
        let x = &xi.components;
        let comps = match &self.kind {
            ActionKind::Translation { n } => {
                let mut out = vec![self.zero(); 2 * n];
                for i in 0..*n {
                    out[2 * i] = x[i].clone();
                }
                out
            }
            ActionKind::RotationPlane => {
                vec![x[0].mul(&c[1]), x[0].mul(&c[0]).neg()]
            }
            ActionKind::RotationSphere => {
                vec![x[0].mul(&c[1]), x[0].mul(&c[0]).neg(), self.zero()]
            }
            ActionKind::JaynesCummings => vec![
                x[0].mul(&c[1]).neg(),
                x[0].mul(&c[0]),
                self.zero(),
                x[0].mul(&c[4]).neg(),
                x[0].mul(&c[3]),
            ],
            ActionKind::CoupledAngularMomentum { .. } => vec![
                x[0].mul(&c[1]),
                x[0].mul(&c[0]).neg(),
                self.zero(),
                x[0].mul(&c[4]),
                x[0].mul(&c[3]).neg(),
                self.zero(),
            ],
            ActionKind::So3AngularMomentum => {
                let xv = LieAlgebraVector::new(vec![c[0].clone(), c[2].clone(), c[4].clone()]);
                let yv = LieAlgebraVector::new(vec![c[1].clone(), c[3].clone(), c[5].clone()]);
                let dx = cross(xi, &xv)?;
                let dy = cross(xi, &yv)?;
                interleave(&dx.components, &dy.components)
            }
            ActionKind::WeakOnly { n } => {
                let mut out = vec![self.zero(); 2 * n];
                out[0] = x[0].clone();
                out[1] = x[1].clone();
                out
            }
            ActionKind::NoFixedPoints { n } => {
                let mut out = vec![self.zero(); 2 * n];
                out[0] = x[0].clone();
                out
            }
            ActionKind::Piecewise { n } => {
                let mut out = vec![self.zero(); 2 * n];
                if self.piecewise_region(c)? {
                    out[0] = x[0].clone();
                    out[1] = x[1].clone();
                }
                out
            }
            ActionKind::DigitCounterexample => vec![x[0].clone(), self.zero()],
            ActionKind::Toric { tree } => {
                let leaf = tree.locate(c)?;
                let mut out = Vec::with_capacity(c.len());
                for i in 0..tree.rank() {
                    let dx = c[2 * i + 1].sub(&self.center_padic(leaf, 2 * i + 1, &c[2 * i + 1]));
                    let dy = c[2 * i].sub(&self.center_padic(leaf, 2 * i, &c[2 * i]));
                    out.push(x[i].mul(&dx));
                    out.push(x[i].mul(&dy).neg());
                }
                out
            }
            ActionKind::RotationPair { reparam } => {
                let xi_eff = self.reparam_xi(reparam, x)?;
                vec![
                    xi_eff[0].mul(&c[1]),
                    xi_eff[0].mul(&c[0]).neg(),
                    xi_eff[1].mul(&c[3]),
                    xi_eff[1].mul(&c[2]).neg(),
                ]
            }
        };
        TangentVector::new(m.clone(), comps)
    }

    /// The closed-form momentum value at m, as a dual vector.
    pub fn momentum(&self, m: &PhasePoint) -> Result<LieAlgebraVector, PadicError> {
        self.check_point(m)?;
        let c = &m.coords;
        let comps = match &self.kind {
            ActionKind::Translation { n } => (0..*n).map(|i| c[2 * i + 1].clone()).collect(),
            ActionKind::RotationPlane => vec![self.half_norm(&c[0], &c[1])],
            ActionKind::RotationSphere => vec![c[2].clone()],
            ActionKind::JaynesCummings => {
                vec![self.half_norm(&c[3], &c[4]).add(&c[2])]
            }
            ActionKind::CoupledAngularMomentum { weights } => {
                let r1 = Padic::from_i64(self.p, weights.0, self.policy.default_digits);
                let r2 = Padic::from_i64(self.p, weights.1, self.policy.default_digits);
                vec![r1.mul(&c[2]).add(&r2.mul(&c[5]))]
            }
            ActionKind::So3AngularMomentum => {
                let xv = LieAlgebraVector::new(vec![c[0].clone(), c[2].clone(), c[4].clone()]);
                let yv = LieAlgebraVector::new(vec![c[1].clone(), c[3].clone(), c[5].clone()]);
                cross(&xv, &yv)?.components
            }
            ActionKind::WeakOnly { .. } => vec![c[1].clone(), c[0].neg()],
            ActionKind::NoFixedPoints { .. } => vec![c[1].clone()],
            ActionKind::Piecewise { .. } => {
                if self.piecewise_region(c)? {
                    vec![c[1].clone(), c[0].neg()]
                } else {
                    vec![self.zero(), self.zero()]
                }
            }
            ActionKind::DigitCounterexample => vec![c[1].clone()],
            ActionKind::Toric { tree } => {
                let leaf = tree.locate(c)?;
                let mut out = Vec::with_capacity(tree.rank());
                for i in 0..tree.rank() {
                    let dx = c[2 * i].sub(&self.center_padic(leaf, 2 * i, &c[2 * i]));
                    let dy = c[2 * i + 1].sub(&self.center_padic(leaf, 2 * i + 1, &c[2 * i + 1]));
                    out.push(self.half_norm(&dx, &dy));
                }
                out
            }
            ActionKind::RotationPair { reparam } => {
                let base = vec![self.half_norm(&c[0], &c[1]), self.half_norm(&c[2], &c[3])];
                match reparam {
                    None => base,
                    Some((a, _)) => self.matrix_apply(a, &base),
                }
            }
        };
        Ok(LieAlgebraVector::new(comps))
    }

    /// Ad*_g on momentum values: the identity for every Abelian group in the
    /// catalog, the matrix action for SO(3).
    pub fn coadjoint(
        &self,
        g: &GroupElement,
        eta: &LieAlgebraVector,
    ) -> Result<LieAlgebraVector, PadicError> {
        self.check_group(g)?;
        if eta.rank() != self.lie_rank() {
            return Err(PadicError::RankMismatch {
                expected: self.lie_rank(),
                got: eta.rank(),
            });
        }
        match g {
            GroupElement::Rotation(r) => r.coadjoint(eta),
            _ => Ok(eta.clone()),
        }
    }

    /// [xi, eta]: zero for Abelian groups, the cross product for so(3).
    pub fn lie_bracket(
        &self,
        xi: &LieAlgebraVector,
        eta: &LieAlgebraVector,
    ) -> Result<LieAlgebraVector, PadicError> {
        if xi.rank() != self.lie_rank() || eta.rank() != self.lie_rank() {
            return Err(PadicError::RankMismatch {
                expected: self.lie_rank(),
                got: xi.rank().max(eta.rank()),
            });
        }
        match self.group {
            GroupSpec::SpecialOrthogonal3 => cross(xi, eta),
            _ => Ok(LieAlgebraVector::new(vec![self.zero(); self.lie_rank()])),
        }
    }

    /// A group element close to the identity in the direction xi: p^k xi for
    /// additive groups, per-factor embed(p^k xi_i) for tori, a product of
    /// coordinate rotations for SO(3). The derivative at k -> infinity is the
    /// generator field.
    pub fn small_element(&self, xi: &LieAlgebraVector, k: u32) -> Result<GroupElement, PadicError> {
        if xi.rank() != self.lie_rank() {
            return Err(PadicError::RankMismatch {
                expected: self.lie_rank(),
                got: xi.rank(),
            });
        }
        match self.group {
            GroupSpec::Additive { .. } => Ok(GroupElement::Additive(
                xi.components.iter().map(|c| c.shift(i64::from(k))).collect(),
            )),
            GroupSpec::CompactTorus { .. } => {
                let factors = xi
                    .components
                    .iter()
                    .map(|c| circle_embed(&c.shift(i64::from(k)), &self.policy))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(GroupElement::Torus(TorusElement::new(factors)))
            }
            GroupSpec::SpecialOrthogonal3 => {
                let embed = |c: &Padic| circle_embed(&c.shift(i64::from(k)), &self.policy);
                let rx = SO3::rotation_x(&embed(&xi.components[0])?);
                let ry = SO3::rotation_y(&embed(&xi.components[1])?);
                let rz = SO3::rotation_z(&embed(&xi.components[2])?);
                Ok(GroupElement::Rotation(rx.mul(&ry)?.mul(&rz)?))
            }
        }
    }

    /// The group identity element.
    pub fn group_identity(&self) -> GroupElement {
        let prec = self.policy.default_digits;
        match self.group {
            GroupSpec::Additive { k, .. } => {
                GroupElement::Additive(vec![Padic::zero(self.p, i64::from(prec)); k])
            }
            GroupSpec::CompactTorus { k } => {
                GroupElement::Torus(TorusElement::identity(self.p, prec, k))
            }
            GroupSpec::SpecialOrthogonal3 => GroupElement::Rotation(SO3::identity(self.p, prec)),
        }
    }

    /// Group multiplication, dispatching on the group spec.
    pub fn group_mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, PadicError> {
        self.check_group(g)?;
        self.check_group(h)?;
        match (g, h) {
            (GroupElement::Additive(a), GroupElement::Additive(b)) => Ok(GroupElement::Additive(
                a.iter().zip(b).map(|(x, y)| x.add(y)).collect(),
            )),
            (GroupElement::Torus(a), GroupElement::Torus(b)) => {
                Ok(GroupElement::Torus(crate::groups::torus_mul(a, b)?))
            }
            (GroupElement::Rotation(a), GroupElement::Rotation(b)) => {
                Ok(GroupElement::Rotation(a.mul(b)?))
            }
            _ => Err(PadicError::GroupMismatch(
                "cannot multiply elements of different shapes".into(),
            )),
        }
    }

    /// Group inverse.
    pub fn group_inv(&self, g: &GroupElement) -> Result<GroupElement, PadicError> {
        self.check_group(g)?;
        match g {
            GroupElement::Additive(a) => {
                Ok(GroupElement::Additive(a.iter().map(|x| x.neg()).collect()))
            }
            GroupElement::Torus(t) => Ok(GroupElement::Torus(crate::groups::torus_inv(t))),
            GroupElement::Rotation(r) => Ok(GroupElement::Rotation(r.inv())),
        }
    }

    /// JSON descriptor: registry name plus the parameters that built it.
    pub fn descriptor_json(&self) -> serde_json::Value {
        let params = match &self.kind {
            ActionKind::Translation { n }
            | ActionKind::WeakOnly { n }
            | ActionKind::NoFixedPoints { n }
            | ActionKind::Piecewise { n } => json!({ "n": n }),
            ActionKind::CoupledAngularMomentum { weights } => {
                json!({ "weights": [weights.0, weights.1] })
            }
            ActionKind::Toric { tree } => json!({ "n": tree.rank(), "plan": tree.plan() }),
            ActionKind::RotationPair { reparam } => {
                json!({ "reparam": reparam.as_ref().map(|(a, _)| a.clone()) })
            }
            _ => json!({}),
        };
        json!({
            "name": self.name,
            "p": self.p.get(),
            "group": self.group,
            "space": self.space,
            "form": self.form,
            "flags": self.flags,
            "params": params,
        })
    }

    /// Three-valued region test for the piecewise action: certainly inside,
    /// certainly outside, or an error when a coordinate straddles pZp at the
    /// current precision. A decidable "outside" short-circuits.
    fn piecewise_region(&self, c: &[Padic]) -> Result<bool, PadicError> {
        let mut unknown = false;
        for coord in &c[..2] {
            match coord.valuation() {
                Valuation::Finite(v) if v >= 1 => {}
                Valuation::Finite(_) => return Ok(false),
                Valuation::Unbounded { bound } if bound >= 1 => {}
                Valuation::Unbounded { .. } => unknown = true,
            }
        }
        if unknown {
            return Err(PadicError::IndeterminateCase(
                "piecewise region test straddles the pZp boundary".into(),
            ));
        }
        Ok(true)
    }

    fn half_norm(&self, x: &Padic, y: &Padic) -> Padic {
        let q = x.mul(x).add(&y.mul(y));
        let two = Padic::from_i64(self.p, 2, self.policy.default_digits);
        q.div(&two).expect("2 is nonzero")
    }

    fn center_padic(&self, leaf: &BallNode, j: usize, like: &Padic) -> Padic {
        super::int_at(self.p, &leaf.center[j], like.abs_prec())
    }

    fn rotate_about(
        &self,
        a: &Padic,
        b: &Padic,
        x: &Padic,
        y: &Padic,
        cx: &BigInt,
        cy: &BigInt,
    ) -> (Padic, Padic) {
        let cxp = super::int_at(self.p, cx, x.abs_prec());
        let cyp = super::int_at(self.p, cy, y.abs_prec());
        let dx = x.sub(&cxp);
        let dy = y.sub(&cyp);
        let (rx, ry) = rotate_plus(a, b, &dx, &dy);
        (cxp.add(&rx), cyp.add(&ry))
    }

    fn reparam_xi(
        &self,
        reparam: &Option<(Vec<Vec<i64>>, Arc<CircleTables>)>,
        xi: &[Padic],
    ) -> Result<Vec<Padic>, PadicError> {
        match reparam {
            None => Ok(xi.to_vec()),
            Some((a, _)) => {
                // Row vector times A: xi'_j = sum_i xi_i A[i][j].
                let mut out = Vec::with_capacity(2);
                for j in 0..2 {
                    let mut acc = self.zero();
                    for (i, x) in xi.iter().enumerate() {
                        if a[i][j] != 0 {
                            let coeff =
                                Padic::from_i64(self.p, a[i][j], self.policy.default_digits);
                            acc = acc.add(&x.mul(&coeff));
                        }
                    }
                    out.push(acc);
                }
                Ok(out)
            }
        }
    }

    fn matrix_apply(&self, a: &[Vec<i64>], mu: &[Padic]) -> Vec<Padic> {
        // (A mu)_i = sum_j A[i][j] mu_j.
        (0..a.len())
            .map(|i| {
                let mut acc = self.zero();
                for (j, m) in mu.iter().enumerate() {
                    if a[i][j] != 0 {
                        let coeff = Padic::from_i64(self.p, a[i][j], self.policy.default_digits);
                        acc = acc.add(&m.mul(&coeff));
                    }
                }
                acc
            })
            .collect()
    }
}

/// (x, y) -> (ax + by, ay - bx): the printed rotation convention.
fn rotate_plus(a: &Padic, b: &Padic, x: &Padic, y: &Padic) -> (Padic, Padic) {
    (
        a.mul(x).add(&b.mul(y)),
        a.mul(y).sub(&b.mul(x)),
    )
}

/// (x, y) -> (ax - by, ay + bx): the composite example's convention.
fn rotate_minus(a: &Padic, b: &Padic, x: &Padic, y: &Padic) -> (Padic, Padic) {
    (
        a.mul(x).sub(&b.mul(y)),
        a.mul(y).add(&b.mul(x)),
    )
}

fn interleave(x: &[Padic], y: &[Padic]) -> Vec<Padic> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    for (a, b) in x.iter().zip(y) {
        out.push(a.clone());
        out.push(b.clone());
    }
    out
}

fn require_positive(n: usize) -> Result<(), PadicError> {
    if n == 0 {
        return Err(PadicError::Range("the rank n must be positive".into()));
    }
    Ok(())
}
