//! Refinement trees of symplectic balls for the toric assembly.
//!
//! The root ball is (Zp)^{2n}. Subdividing a ball of radius p^{-r} centered
//! at c produces the p^{2n} cosets c + p^r d + p^{r+1}(Zp)^{2n}, one per
//! residue vector d; the residue digits are ordered lexicographically with
//! coordinate 0 most significant. A plan is a list of leaf indices into the
//! depth-first leaf sequence of the tree built so far, each subdividing that
//! leaf in place.

use crate::error::PadicError;
use crate::padic::{Padic, Prime};
use num_bigint::BigInt;

/// One ball in the refinement tree. An empty `children` list marks a leaf.
#[derive(Clone, Debug)]
pub struct BallNode {
    /// Center, an exact integer vector of length 2n.
    pub center: Vec<BigInt>,
    /// Radius exponent: the ball is center + p^depth (Zp)^{2n}.
    pub depth: u32,
    pub children: Vec<BallNode>,
}

impl BallNode {
    fn collect<'a>(&'a self, out: &mut Vec<&'a BallNode>) {
        if self.children.is_empty() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect(out);
            }
        }
    }

    fn leaf_mut(&mut self, idx: &mut usize) -> Option<&mut BallNode> {
        if self.children.is_empty() {
            if *idx == 0 {
                return Some(self);
            }
            *idx -= 1;
            return None;
        }
        for c in &mut self.children {
            if let Some(l) = c.leaf_mut(idx) {
                return Some(l);
            }
        }
        None
    }

    fn subdivide(&mut self, p: Prime, n: usize) {
        debug_assert!(self.children.is_empty());
        let dim = 2 * n;
        let count = (p.get() as usize).pow(dim as u32);
        let step = BigInt::from(p.get()).pow(self.depth);
        let mut children = Vec::with_capacity(count);
        for idx in 0..count {
            let mut center = self.center.clone();
            let mut rem = idx;
            // Coordinate 0 carries the most significant digit.
            for j in (0..dim).rev() {
                let digit = rem % p.get() as usize;
                rem /= p.get() as usize;
                center[j] += BigInt::from(digit) * &step;
            }
            children.push(BallNode {
                center,
                depth: self.depth + 1,
                children: Vec::new(),
            });
        }
        self.children = children;
    }
}

/// A refinement tree over (Zp)^{2n}, remembering the plan that built it.
#[derive(Clone, Debug)]
pub struct BallTree {
    p: Prime,
    n: usize,
    plan: Vec<usize>,
    root: BallNode,
}

impl BallTree {
    /// Builds the tree by applying the plan steps in order. Each step
    /// subdivides the leaf with that index in the current depth-first leaf
    /// list; an out-of-range index is a plan error.
    pub fn build(p: Prime, n: usize, plan: &[usize]) -> Result<Self, PadicError> {
        if n == 0 {
            return Err(PadicError::Range("toric rank n must be positive".into()));
        }
        let root = BallNode {
            center: vec![BigInt::from(0); 2 * n],
            depth: 0,
            children: Vec::new(),
        };
        let mut tree = BallTree {
            p,
            n,
            plan: plan.to_vec(),
            root,
        };
        for (step, &idx) in plan.iter().enumerate() {
            let count = tree.census();
            let mut cursor = idx;
            match tree.root.leaf_mut(&mut cursor) {
                Some(leaf) => leaf.subdivide(p, n),
                None => {
                    return Err(PadicError::Plan(format!(
                        "step {step} subdivides leaf {idx} but only {count} leaves exist"
                    )))
                }
            }
        }
        Ok(tree)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn plan(&self) -> &[usize] {
        &self.plan
    }

    /// Depth-first leaf list; its length is the fixed-point census.
    pub fn leaves(&self) -> Vec<&BallNode> {
        let mut out = Vec::new();
        self.root.collect(&mut out);
        out
    }

    /// Number of leaf balls, i.e. 1 + steps * (p^{2n} - 1).
    pub fn census(&self) -> usize {
        self.leaves().len()
    }

    /// Finds the leaf ball containing the point by reading the digits of
    /// m - center at each subdivision depth.
    pub fn locate(&self, point: &[Padic]) -> Result<&BallNode, PadicError> {
        let dim = 2 * self.n;
        if point.len() != dim {
            return Err(PadicError::RankMismatch {
                expected: dim,
                got: point.len(),
            });
        }
        let mut node = &self.root;
        while !node.children.is_empty() {
            let mut idx = 0usize;
            for j in 0..dim {
                let diff = point[j].sub(&crate::actions::int_at(
                    self.p,
                    &node.center[j],
                    point[j].abs_prec(),
                ));
                let digit = diff.digit_at(i64::from(node.depth)).ok_or_else(|| {
                    PadicError::IndeterminateCase(format!(
                        "digit at depth {} of coordinate {j} is unknown",
                        node.depth
                    ))
                })?;
                idx = idx * self.p.get() as usize + digit as usize;
            }
            node = &node.children[idx];
        }
        Ok(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn empty_plan_is_one_ball() {
        let t = BallTree::build(p3(), 1, &[]).unwrap();
        assert_eq!(t.census(), 1);
        assert_eq!(t.leaves()[0].center, vec![BigInt::from(0), BigInt::from(0)]);
    }

    #[test]
    fn one_subdivision_gives_nine() {
        let t = BallTree::build(p3(), 1, &[0]).unwrap();
        assert_eq!(t.census(), 9);
        let leaves = t.leaves();
        // Lex order, coordinate 0 most significant: (0,0),(0,1),(0,2),(1,0),...
        assert_eq!(leaves[1].center, vec![BigInt::from(0), BigInt::from(1)]);
        assert_eq!(leaves[3].center, vec![BigInt::from(1), BigInt::from(0)]);
        assert!(leaves.iter().all(|l| l.depth == 1));
    }

    #[test]
    fn two_subdivisions_give_seventeen() {
        let t = BallTree::build(p3(), 1, &[0, 0]).unwrap();
        assert_eq!(t.census(), 17);
        // First leaf now has depth 2 and center still (0,0).
        assert_eq!(t.leaves()[0].depth, 2);
        assert_eq!(t.leaves()[0].center, vec![BigInt::from(0), BigInt::from(0)]);
        // Leaf 9 was the second depth-1 ball before refinement.
        assert_eq!(t.leaves()[9].depth, 1);
    }

    #[test]
    fn out_of_range_step_is_a_plan_error() {
        assert!(matches!(
            BallTree::build(p3(), 1, &[1]),
            Err(PadicError::Plan(_))
        ));
        assert!(matches!(
            BallTree::build(p3(), 1, &[0, 9]),
            Err(PadicError::Plan(_))
        ));
    }

    #[test]
    fn locate_walks_to_the_right_leaf() {
        let t = BallTree::build(p3(), 1, &[0, 0]).unwrap();
        let pt = |x: i64, y: i64| {
            vec![
                Padic::from_i64(p3(), x, 16),
                Padic::from_i64(p3(), y, 16),
            ]
        };
        // (4, 2): digits (1,2) at depth 0 -> child 1*3+2 = 5 of the root.
        let leaf = t.locate(&pt(4, 2)).unwrap();
        assert_eq!(leaf.depth, 1);
        assert_eq!(leaf.center, vec![BigInt::from(1), BigInt::from(2)]);
        // (9, 3): depth-0 digits (0,0), depth-1 digits (0,1) -> center (0,3).
        let leaf = t.locate(&pt(9, 3)).unwrap();
        assert_eq!(leaf.depth, 2);
        assert_eq!(leaf.center, vec![BigInt::from(0), BigInt::from(3)]);
    }

    #[test]
    fn census_formula_for_random_plans() {
        // Always subdivide leaf 0: census grows by p^2 - 1 each step.
        for steps in 0..5usize {
            let plan = vec![0usize; steps];
            let t = BallTree::build(p3(), 1, &plan).unwrap();
            assert_eq!(t.census(), 1 + steps * 8);
        }
    }

    #[test]
    fn coarse_point_cannot_be_located() {
        let t = BallTree::build(p3(), 1, &[0, 0]).unwrap();
        // Absolute precision 1 cannot resolve the depth-1 digit.
        let pt = vec![
            Padic::from_i64(p3(), 0, 16).truncate_abs(1),
            Padic::from_i64(p3(), 0, 16).truncate_abs(1),
        ];
        assert!(matches!(
            t.locate(&pt),
            Err(PadicError::IndeterminateCase(_))
        ));
    }
}
