//! Group layer: the p-adic circle, tori and their compact coordinates, and
//! SO(3, Qp).

pub mod circle;
pub mod so3;
pub mod torus;

pub use circle::{
    circle_embed, circle_inv, circle_mul, circle_pow, CircleDecomposition, CirclePoint,
    CircleTables,
};
pub use so3::{cross, so3_generator_matrix, Mat3, SO3};
pub use torus::{
    coadjoint_abelian, compact_to_torus, compact_torus_inv, compact_torus_mul, torus_decompose,
    torus_inv, torus_mul, torus_reparam, CompactTorusElement, LieAlgebraVector, TorusElement,
};
