//! Sampled and symbolic checks over catalog actions.
//!
//! Two judgement styles are in play.  Difference-quotient comparisons
//! (hamilton, generator, symplectic pullback, gauge) tolerate the O(p^k)
//! truncation of a step-k quotient, so a discrepancy passes at valuation
//! k - guard and fails below it.  Identity comparisons (isotropy,
//! invariance, tau constancy, duality) treat ANY finite discrepancy
//! valuation as a certain violation; an unresolved zero passes only when
//! certified to default - 2*guard digits.

use serde::Serialize;
use serde_json::json;

use crate::actions::space::unit_chart;
use crate::actions::{
    ActionDescriptor, GroupElement, GroupSpec, PhasePoint, SpaceFactor, TangentVector,
};
use crate::error::PadicError;
use crate::exec::map_indexed;
use crate::groups::{cross, LieAlgebraVector};
use crate::padic::{hensel_sqrt, Padic, PrecisionPolicy, Valuation};

use super::poly::{PolyObservable, PolyOneForm, ZeroStatus, DROP_BOUND};
use super::report::{CheckReport, Judge, Obs, ObserveStyle, Tally, Verdict};
use super::sample::{sample_groups, sample_points, sample_points_integral};

/// Knobs shared by every sampled check.
#[derive(Debug, Clone, Copy)]
pub struct CheckParams {
    pub samples: usize,
    pub step_k: u32,
    pub seed: u64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams { samples: 64, step_k: 6, seed: 0 }
    }
}

/// Pass bar for step-k difference quotients.
pub fn quotient_threshold(policy: &PrecisionPolicy, k: u32) -> i64 {
    i64::from(k) - i64::from(policy.guard_digits)
}

/// Certification bar for identity comparisons.
pub fn certification_threshold(policy: &PrecisionPolicy) -> i64 {
    i64::from(policy.default_digits) - 2 * i64::from(policy.guard_digits)
}

/// Moves m by p^k v and repairs sphere factors: the constraint picks up an
/// O(p^2k) error, so the chart coordinate (the one of smallest valuation) is
/// re-solved by Hensel lifting with the sign matched to the original.  For a
/// tangent v the repair changes nothing at first order in p^k.
pub fn nudge(
    m: &PhasePoint,
    v: &[Padic],
    k: u32,
    policy: &PrecisionPolicy,
) -> Result<PhasePoint, PadicError> {
    if v.len() != m.coords.len() {
        return Err(PadicError::RankMismatch { expected: m.coords.len(), got: v.len() });
    }
    let step = i64::from(k);
    let mut coords: Vec<Padic> = m
        .coords
        .iter()
        .zip(v)
        .map(|(x, dv)| x.add(&dv.shift(step)))
        .collect();
    let mut off = 0usize;
    for factor in &m.space.factors {
        if let SpaceFactor::Sphere = factor {
            let chart = unit_chart(&m.coords[off..off + 3])?;
            let prec = policy.default_digits + policy.guard_digits;
            let mut s = Padic::one(m.prime(), prec);
            for j in 0..3 {
                if j != chart {
                    s = s.sub(&coords[off + j].mul(&coords[off + j]));
                }
            }
            let r = hensel_sqrt(&s, policy)?;
            let orig = &m.coords[off + chart];
            let plus = r.sub(orig).valuation();
            let minus = r.neg().sub(orig).valuation();
            let take_plus = match (plus, minus) {
                (Valuation::Unbounded { .. }, _) => true,
                (_, Valuation::Unbounded { .. }) => false,
                (Valuation::Finite(a), Valuation::Finite(b)) => a >= b,
            };
            coords[off + chart] = if take_plus { r } else { r.neg() };
        }
        off += factor.dim();
    }
    PhasePoint::new(coords, m.space.clone())
}

/// Step-k difference quotient of a scalar observable along v.
pub fn directional_derivative<F>(
    f: F,
    m: &PhasePoint,
    v: &[Padic],
    k: u32,
    policy: &PrecisionPolicy,
) -> Result<Padic, PadicError>
where
    F: Fn(&PhasePoint) -> Result<Padic, PadicError>,
{
    let moved = nudge(m, v, k, policy)?;
    Ok(f(&moved)?.sub(&f(m)?).shift(-i64::from(k)))
}

/// Exact pairing grad f(at) . v for a polynomial observable, the symbolic
/// counterpart the step quotient is audited against.
pub fn gradient_pairing(
    f: &PolyObservable,
    at: &[Padic],
    v: &[Padic],
) -> Result<Padic, PadicError> {
    let prec = at
        .first()
        .and_then(|c| c.rel_prec())
        .unwrap_or(PrecisionPolicy::default().default_digits);
    let mut acc = Padic::zero(f.prime(), i64::from(prec));
    for (i, dir) in v.iter().enumerate() {
        acc = acc.add(&f.partial(i).eval(at)?.mul(dir));
    }
    Ok(acc)
}

/// The generator approximated through the action itself:
/// (act(small_element(xi, k), m) - m) / p^k, componentwise.
pub fn numeric_generator(
    d: &ActionDescriptor,
    xi: &LieAlgebraVector,
    m: &PhasePoint,
    k: u32,
) -> Result<Vec<Padic>, PadicError> {
    let g = d.small_element(xi, k)?;
    let moved = d.act(&g, m)?;
    let step = i64::from(k);
    Ok(moved
        .coords
        .iter()
        .zip(&m.coords)
        .map(|(a, b)| a.sub(b).shift(-step))
        .collect())
}

fn basis_xi(d: &ActionDescriptor, i: usize) -> LieAlgebraVector {
    let prec = d.policy.default_digits;
    let comps = (0..d.lie_rank())
        .map(|j| {
            if j == i {
                Padic::one(d.p, prec)
            } else {
                Padic::zero(d.p, i64::from(prec))
            }
        })
        .collect();
    LieAlgebraVector::new(comps)
}

fn unit_dir(d: &ActionDescriptor, j: usize) -> Vec<Padic> {
    let prec = d.policy.default_digits;
    (0..d.dim())
        .map(|i| {
            if i == j {
                Padic::one(d.p, prec)
            } else {
                Padic::zero(d.p, i64::from(prec))
            }
        })
        .collect()
}

fn fmt_group(g: &GroupElement) -> String {
    match g {
        GroupElement::Additive(v) => {
            let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            format!("({})", parts.join(", "))
        }
        GroupElement::Torus(t) => {
            let parts: Vec<String> = t
                .factors
                .iter()
                .map(|f| format!("({}, {})", f.a, f.b))
                .collect();
            format!("[{}]", parts.join(", "))
        }
        GroupElement::Rotation(r) => r.to_string(),
    }
}

fn fold_samples<F>(tally: &mut Tally, n: usize, f: F)
where
    F: Fn(usize) -> Result<Vec<Obs>, PadicError> + Sync + Send,
{
    for (i, r) in map_indexed(n, f).into_iter().enumerate() {
        match r {
            Ok(list) => {
                for o in list {
                    tally.observe(o);
                }
            }
            Err(e) => tally.error(&format!("sample {i}"), e),
        }
    }
}

fn sampling_failed(
    tally: Tally,
    check: &str,
    d: &ActionDescriptor,
    e: PadicError,
) -> CheckReport {
    let mut tally = tally;
    tally.error("sampling", e);
    tally.finish(check, &d.name, d.p.get(), 0)
}

/// Numeric generator against the closed form, at every sampled point.
pub fn check_generator(d: &ActionDescriptor, params: &CheckParams) -> CheckReport {
    let k = params.step_k;
    let mut tally = Tally::new(ObserveStyle::Quotient, quotient_threshold(&d.policy, k));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "generator", d, e),
    };
    fold_samples(&mut tally, points.len(), |i| {
        let m = &points[i];
        let mut obs = Vec::new();
        for a in 0..d.lie_rank() {
            let xi = basis_xi(d, a);
            let numeric = numeric_generator(d, &xi, m, k)?;
            let closed = d.generator(&xi, m)?;
            for (j, (nu, cl)) in numeric.iter().zip(&closed.components).enumerate() {
                let val = nu.sub(cl).valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "m": m.to_string(),
                        "xi": a,
                        "component": j,
                        "numeric": nu.to_string(),
                        "closed_form": cl.to_string(),
                    })
                }));
            }
        }
        Ok(obs)
    });
    tally.finish("generator", &d.name, d.p.get(), points.len())
}

/// Hamilton's relation: the step-k quotient of mu_xi along each tangent
/// direction v against omega(X_xi, v).
pub fn check_hamilton(d: &ActionDescriptor, params: &CheckParams) -> CheckReport {
    let k = params.step_k;
    let mut tally = Tally::new(ObserveStyle::Quotient, quotient_threshold(&d.policy, k));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "hamilton", d, e),
    };
    let prec = d.policy.default_digits;
    fold_samples(&mut tally, points.len(), |i| {
        let m = &points[i];
        let dirs = d.form.tangent_basis(&m.coords, prec)?;
        let mut obs = Vec::new();
        for a in 0..d.lie_rank() {
            let xi = basis_xi(d, a);
            let x = d.generator(&xi, m)?;
            for (vi, v) in dirs.iter().enumerate() {
                let lhs = directional_derivative(
                    |pt| d.momentum(pt)?.pairing(&xi),
                    m,
                    v,
                    k,
                    &d.policy,
                )?;
                let rhs = d.form.evaluate(&m.coords, &x.components, v)?;
                let val = lhs.sub(&rhs).valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "m": m.to_string(),
                        "xi": a,
                        "direction": vi,
                        "quotient": lhs.to_string(),
                        "omega": rhs.to_string(),
                    })
                }));
            }
        }
        Ok(obs)
    });
    tally.finish("hamilton", &d.name, d.p.get(), points.len())
}

/// Pairwise isotropy of generators: omega(X_i, X_j) must vanish for an
/// Abelian group acting in a Hamiltonian way.  Vacuous at rank 1.
pub fn check_isotropy(d: &ActionDescriptor, params: &CheckParams) -> CheckReport {
    let mut tally = Tally::new(ObserveStyle::Exact, certification_threshold(&d.policy));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "isotropy", d, e),
    };
    let r = d.lie_rank();
    fold_samples(&mut tally, points.len(), |idx| {
        let m = &points[idx];
        let gens: Vec<TangentVector> = (0..r)
            .map(|a| d.generator(&basis_xi(d, a), m))
            .collect::<Result<_, _>>()?;
        let mut obs = Vec::new();
        for i in 0..r {
            for j in (i + 1)..r {
                let w = d.form.evaluate(&m.coords, &gens[i].components, &gens[j].components)?;
                let val = w.valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "m": m.to_string(),
                        "xi": i,
                        "eta": j,
                        "omega": w.to_string(),
                    })
                }));
            }
        }
        Ok(obs)
    });
    tally.finish("isotropy", &d.name, d.p.get(), points.len())
}

/// Momentum equivariance along sampled orbits: mu(g.m) against
/// Ad*_g(mu(m)), componentwise, identity style.
pub fn check_orbit_invariance(d: &ActionDescriptor, params: &CheckParams) -> CheckReport {
    let mut tally = Tally::new(ObserveStyle::Exact, certification_threshold(&d.policy));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "invariance", d, e),
    };
    let groups = match sample_groups(d, points.len(), params.seed, None) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "invariance", d, e),
    };
    fold_samples(&mut tally, points.len(), |i| {
        let m = &points[i];
        let g = &groups[i];
        let moved = d.act(g, m)?;
        let lhs = d.momentum(&moved)?;
        let rhs = d.coadjoint(g, &d.momentum(m)?)?;
        let mut obs = Vec::new();
        for (ci, (a, b)) in lhs.components.iter().zip(&rhs.components).enumerate() {
            let val = a.sub(b).valuation();
            obs.push(judge.obs(val, || {
                json!({
                    "m": m.to_string(),
                    "g": fmt_group(g),
                    "component": ci,
                    "after": a.to_string(),
                    "expected": b.to_string(),
                })
            }));
        }
        Ok(obs)
    });
    tally.finish("invariance", &d.name, d.p.get(), points.len())
}

/// Pullback of the form along the action: omega_{g.m}(Dg u, Dg v) against
/// omega_m(u, v) with Dg approximated by step-k quotients.  A fixed group
/// element applies to every sample; otherwise elements are drawn per sample.
pub fn check_pullback_symplectic(
    d: &ActionDescriptor,
    g: Option<&GroupElement>,
    params: &CheckParams,
) -> CheckReport {
    let k = params.step_k;
    let mut tally = Tally::new(ObserveStyle::Quotient, quotient_threshold(&d.policy, k));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "symplectic", d, e),
    };
    // Keep additive parameters above valuation -(k-1): the quotient only
    // sees the derivative when the digit window sits inside the step.
    let floor = Some(1 - i64::from(k));
    let groups = match g {
        Some(fixed) => vec![fixed.clone(); points.len()],
        None => match sample_groups(d, points.len(), params.seed, floor) {
            Ok(v) => v,
            Err(e) => return sampling_failed(tally, "symplectic", d, e),
        },
    };
    let prec = d.policy.default_digits;
    let step = i64::from(k);
    fold_samples(&mut tally, points.len(), |i| {
        let m = &points[i];
        let g = &groups[i];
        let dirs = d.form.tangent_basis(&m.coords, prec)?;
        let moved = d.act(g, m)?;
        let images: Vec<Vec<Padic>> = dirs
            .iter()
            .map(|v| {
                let shifted = d.act(g, &nudge(m, v, k, &d.policy)?)?;
                Ok(shifted
                    .coords
                    .iter()
                    .zip(&moved.coords)
                    .map(|(a, b)| a.sub(b).shift(-step))
                    .collect())
            })
            .collect::<Result<_, PadicError>>()?;
        let mut obs = Vec::new();
        for a in 0..dirs.len() {
            for b in (a + 1)..dirs.len() {
                let lhs = d.form.evaluate(&moved.coords, &images[a], &images[b])?;
                let rhs = d.form.evaluate(&m.coords, &dirs[a], &dirs[b])?;
                let val = lhs.sub(&rhs).valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "m": m.to_string(),
                        "g": fmt_group(g),
                        "u": a,
                        "v": b,
                        "pulled_back": lhs.to_string(),
                        "original": rhs.to_string(),
                    })
                }));
            }
        }
        Ok(obs)
    });
    tally.finish("symplectic", &d.name, d.p.get(), points.len())
}

fn tau_values(d: &ActionDescriptor, m: &PhasePoint) -> Result<Vec<Padic>, PadicError> {
    let r = d.lie_rank();
    let mu = d.momentum(m)?;
    let gens: Vec<TangentVector> = (0..r)
        .map(|a| d.generator(&basis_xi(d, a), m))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            let w = d.form.evaluate(&m.coords, &gens[i].components, &gens[j].components)?;
            let br = d.lie_bracket(&basis_xi(d, i), &basis_xi(d, j))?;
            let mb = mu.pairing(&br)?;
            out.push(w.sub(&mb));
        }
    }
    Ok(out)
}

/// The cocycle tau(xi, eta) = omega(X_xi, X_eta) - mu_[xi,eta], evaluated at
/// each sample and at a step-k neighbour.  The verdict judges local
/// constancy; the observed constants land in the witness list.
pub fn cocycle_tau(d: &ActionDescriptor, params: &CheckParams) -> CheckReport {
    let mut tally = Tally::new(ObserveStyle::Exact, certification_threshold(&d.policy));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "tau", d, e),
    };
    if d.lie_rank() < 2 {
        return tally.finish("tau", &d.name, d.p.get(), points.len());
    }
    let prec = d.policy.default_digits;
    let k = params.step_k;
    let results = map_indexed(points.len(), |i| -> Result<(Vec<Obs>, Vec<Padic>), PadicError> {
        let m = &points[i];
        let here = tau_values(d, m)?;
        let dirs = d.form.tangent_basis(&m.coords, prec)?;
        let near = tau_values(d, &nudge(m, &dirs[0], k, &d.policy)?)?;
        let mut obs = Vec::new();
        for (pair, (t1, t2)) in here.iter().zip(&near).enumerate() {
            let val = t1.sub(t2).valuation();
            obs.push(judge.obs(val, || {
                json!({
                    "m": m.to_string(),
                    "pair": pair,
                    "tau_here": t1.to_string(),
                    "tau_near": t2.to_string(),
                })
            }));
        }
        Ok((obs, here))
    });
    let mut constants: Vec<Padic> = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok((obs, taus)) => {
                for o in obs {
                    tally.observe(o);
                }
                for t in taus {
                    if constants.len() < 8 && !constants.iter().any(|c| c.indistinguishable(&t)) {
                        constants.push(t);
                    }
                }
            }
            Err(e) => tally.error(&format!("sample {i}"), e),
        }
    }
    let mut report = tally.finish("tau", &d.name, d.p.get(), points.len());
    for c in &constants {
        report.witnesses.push(json!({ "tau": c.to_string() }));
    }
    report
}

/// Compares the catalog momentum against an alternative rule mu2: their
/// difference must be locally constant, i.e. every step-k directional
/// derivative of mu - mu2 vanishes to quotient precision.  The observed
/// offsets are reported as witnesses.
pub fn check_gauge<F>(d: &ActionDescriptor, mu2: F, params: &CheckParams) -> CheckReport
where
    F: Fn(&PhasePoint) -> Result<LieAlgebraVector, PadicError> + Sync,
{
    let k = params.step_k;
    let mut tally = Tally::new(ObserveStyle::Quotient, quotient_threshold(&d.policy, k));
    let judge = tally.judge();
    let points = match sample_points(d, params.samples, params.seed) {
        Ok(v) => v,
        Err(e) => return sampling_failed(tally, "gauge", d, e),
    };
    let prec = d.policy.default_digits;
    let step = i64::from(k);
    let delta = |pt: &PhasePoint| -> Result<Vec<Padic>, PadicError> {
        let a = d.momentum(pt)?;
        let b = mu2(pt)?;
        if a.rank() != b.rank() {
            return Err(PadicError::RankMismatch { expected: a.rank(), got: b.rank() });
        }
        Ok(a.components
            .iter()
            .zip(&b.components)
            .map(|(x, y)| x.sub(y))
            .collect())
    };
    let results = map_indexed(points.len(), |i| -> Result<(Vec<Obs>, Vec<Padic>), PadicError> {
        let m = &points[i];
        let here = delta(m)?;
        let dirs = d.form.tangent_basis(&m.coords, prec)?;
        let mut obs = Vec::new();
        for (vi, v) in dirs.iter().enumerate() {
            let near = delta(&nudge(m, v, k, &d.policy)?)?;
            for (ci, (t, h)) in near.iter().zip(&here).enumerate() {
                let quot = t.sub(h).shift(-step);
                let val = quot.valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "m": m.to_string(),
                        "direction": vi,
                        "component": ci,
                        "derivative": quot.to_string(),
                    })
                }));
            }
        }
        Ok((obs, here))
    });
    let mut offsets: Vec<Vec<Padic>> = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok((obs, here)) => {
                for o in obs {
                    tally.observe(o);
                }
                let seen = offsets.iter().any(|prev| {
                    prev.len() == here.len()
                        && prev.iter().zip(&here).all(|(a, b)| a.indistinguishable(b))
                });
                if !seen && offsets.len() < 8 {
                    offsets.push(here);
                }
            }
            Err(e) => tally.error(&format!("sample {i}"), e),
        }
    }
    let mut report = tally.finish("gauge", &d.name, d.p.get(), points.len());
    for off in &offsets {
        let parts: Vec<String> = off.iter().map(|c| c.to_string()).collect();
        report.witnesses.push(json!({ "offset": parts }));
    }
    report
}

struct Elimination {
    rank: usize,
    kernel: Vec<Vec<Padic>>,
}

/// Row reduction over Q_p with min-valuation pivoting.  A column whose
/// remaining entries are all unresolved zeros certified past `cert` counts
/// as zero; one with an unresolved entry below `cert` cannot be classified
/// and trips RankDeficiency.
fn eliminate(
    d: &ActionDescriptor,
    rows: &[Vec<Padic>],
    cert: i64,
) -> Result<Elimination, PadicError> {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    let mut a: Vec<Vec<Padic>> = rows.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        if row >= m {
            break;
        }
        let mut best: Option<(usize, i64)> = None;
        let mut unresolved = false;
        for (rr, a_row) in a.iter().enumerate().skip(row) {
            match a_row[col].valuation() {
                Valuation::Finite(v) => {
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((rr, v));
                    }
                }
                Valuation::Unbounded { bound } => {
                    if bound < cert {
                        unresolved = true;
                    }
                }
            }
        }
        match best {
            None if unresolved => {
                return Err(PadicError::RankDeficiency(format!(
                    "column {col} has entries unresolved at the certification threshold {cert}"
                )));
            }
            None => continue,
            Some((prow, _)) => {
                a.swap(row, prow);
                let inv = a[row][col].inv()?;
                a[row] = a[row].iter().map(|x| x.mul(&inv)).collect();
                for rr in 0..m {
                    if rr != row {
                        let factor = a[rr][col].clone();
                        a[rr] = a[rr]
                            .iter()
                            .zip(&a[row])
                            .map(|(x, y)| x.sub(&factor.mul(y)))
                            .collect();
                    }
                }
                pivot_cols.push(col);
                row += 1;
            }
        }
    }
    let prec = d.policy.default_digits;
    let mut kernel = Vec::new();
    for f in 0..n {
        if pivot_cols.contains(&f) {
            continue;
        }
        let mut w = vec![Padic::zero(d.p, i64::from(prec)); n];
        w[f] = Padic::one(d.p, prec);
        for (i, &c) in pivot_cols.iter().enumerate() {
            w[c] = a[i][f].neg();
        }
        kernel.push(w);
    }
    Ok(Elimination { rank: pivot_cols.len(), kernel })
}

/// The momentum-generator duality identities at sampled points:
/// (1) every gradient row of mu pairs with directions as omega(X_xi, .),
/// (2) the kernel of T_m(mu) is omega-orthogonal to every generator and its
///     annihilator dimension equals the generator rank,
/// (3) T_m(mu)(X_xi) equals -ad*_xi(mu): zero for Abelian groups, the cross
///     product xi x mu for so(3).
///
/// Gradients come from central differences, exact for the catalog's
/// degree <= 2 momenta; spaces with sphere factors have no global chart with
/// that property and are rejected.
pub fn check_duality(
    d: &ActionDescriptor,
    params: &CheckParams,
) -> Result<CheckReport, PadicError> {
    if d.space.factors.iter().any(|f| matches!(f, SpaceFactor::Sphere)) {
        return Err(PadicError::UnsupportedAction(
            "duality gradients need a global affine chart; sphere factors are excluded".into(),
        ));
    }
    let cert = certification_threshold(&d.policy);
    let mut tally = Tally::new(ObserveStyle::Exact, cert);
    let judge = tally.judge();
    let points = sample_points_integral(d, params.samples, params.seed)?;
    let k = params.step_k;
    fold_samples(&mut tally, points.len(), |idx| {
        duality_obs(d, &points[idx], judge, cert, k)
    });
    Ok(tally.finish("duality", &d.name, d.p.get(), points.len()))
}

/// Duality diagnostics at one explicitly chosen point.
pub fn check_duality_at(
    d: &ActionDescriptor,
    m: &PhasePoint,
    params: &CheckParams,
) -> Result<CheckReport, PadicError> {
    if d.space.factors.iter().any(|f| matches!(f, SpaceFactor::Sphere)) {
        return Err(PadicError::UnsupportedAction(
            "duality gradients need a global affine chart; sphere factors are excluded".into(),
        ));
    }
    let cert = certification_threshold(&d.policy);
    let mut tally = Tally::new(ObserveStyle::Exact, cert);
    let judge = tally.judge();
    match duality_obs(d, m, judge, cert, params.step_k) {
        Ok(list) => {
            for o in list {
                tally.observe(o);
            }
        }
        Err(e) => tally.error("point", &e.to_string()),
    }
    Ok(tally.finish("duality", &d.name, d.p.get(), 1))
}

fn duality_obs(
    d: &ActionDescriptor,
    m: &PhasePoint,
    judge: Judge,
    cert: i64,
    k: u32,
) -> Result<Vec<Obs>, PadicError> {
    let dims = d.dim();
    let r = d.lie_rank();
    let prec = d.policy.default_digits;
    let so3 = matches!(d.group, GroupSpec::SpecialOrthogonal3);
    {
        let one = Padic::one(d.p, prec);
        let two = Padic::from_i64(d.p, 2, prec);
        let step = i64::from(k);
        // T[a][j] = d(mu_a)/dx_j by central difference, exact for degree <= 2.
        let mut t_rows: Vec<Vec<Padic>> = vec![Vec::with_capacity(dims); r];
        for j in 0..dims {
            let mut up = m.coords.clone();
            up[j] = up[j].add(&one.shift(step));
            let mut dn = m.coords.clone();
            dn[j] = dn[j].sub(&one.shift(step));
            let mu_up = d.momentum(&d.phase_point(up)?)?;
            let mu_dn = d.momentum(&d.phase_point(dn)?)?;
            for a in 0..r {
                let grad = mu_up.components[a]
                    .sub(&mu_dn.components[a])
                    .shift(-step)
                    .div(&two)?;
                t_rows[a].push(grad);
            }
        }
        let gens: Vec<TangentVector> = (0..r)
            .map(|a| d.generator(&basis_xi(d, a), m))
            .collect::<Result<_, _>>()?;
        let mu = d.momentum(m)?;
        let mut obs = Vec::new();
        // Identity 1: gradient rows against omega(X_a, e_j).
        for a in 0..r {
            for j in 0..dims {
                let rhs = d.form.evaluate(&m.coords, &gens[a].components, &unit_dir(d, j))?;
                let val = t_rows[a][j].sub(&rhs).valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "identity": "adjoint",
                        "m": m.to_string(),
                        "xi": a,
                        "direction": j,
                        "gradient": t_rows[a][j].to_string(),
                        "omega": rhs.to_string(),
                    })
                }));
            }
        }
        // Identity 2: ker T_m(mu) pairs to zero with every generator, and
        // the generator rank matches the momentum rank.
        let elim_t = eliminate(d, &t_rows, cert)?;
        let gen_rows: Vec<Vec<Padic>> = gens.iter().map(|g| g.components.clone()).collect();
        let elim_l = eliminate(d, &gen_rows, cert)?;
        if elim_l.rank != elim_t.rank {
            obs.push(Obs::with_witness(
                Valuation::Finite(0),
                json!({
                    "identity": "rank",
                    "m": m.to_string(),
                    "momentum_rank": elim_t.rank,
                    "generator_rank": elim_l.rank,
                }),
            ));
        }
        for (wi, w) in elim_t.kernel.iter().enumerate() {
            for a in 0..r {
                let v = d.form.evaluate(&m.coords, &gens[a].components, w)?;
                let val = v.valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "identity": "kernel",
                        "m": m.to_string(),
                        "xi": a,
                        "kernel_vector": wi,
                        "omega": v.to_string(),
                    })
                }));
            }
        }
        // Identity 3: T_m(mu)(X_xi) = -ad*_xi(mu).
        for a in 0..r {
            let mut image = Vec::with_capacity(r);
            for t_row in &t_rows {
                let mut acc = Padic::zero(d.p, i64::from(prec));
                for (t, x) in t_row.iter().zip(&gens[a].components) {
                    acc = acc.add(&t.mul(x));
                }
                image.push(acc);
            }
            let expected = if so3 {
                cross(&basis_xi(d, a), &mu)?.components
            } else {
                vec![Padic::zero(d.p, i64::from(prec)); r]
            };
            for (ci, (got, want)) in image.iter().zip(&expected).enumerate() {
                let val = got.sub(want).valuation();
                obs.push(judge.obs(val, || {
                    json!({
                        "identity": "equivariance",
                        "m": m.to_string(),
                        "xi": a,
                        "component": ci,
                        "got": got.to_string(),
                        "expected": want.to_string(),
                    })
                }));
            }
        }
        Ok(obs)
    }
}

/// Symbolic closedness of a polynomial 1-form.
pub fn check_closed(alpha: &PolyOneForm) -> CheckReport {
    let mut tally = Tally::new(ObserveStyle::Exact, DROP_BOUND);
    let defects = alpha.closure_defects();
    let count = defects.len();
    for (i, j, defect) in defects {
        match defect.zero_status() {
            ZeroStatus::CertainlyNonzero { exponents, valuation } => {
                tally.observe(Obs::with_witness(
                    Valuation::Finite(valuation),
                    json!({
                        "i": i,
                        "j": j,
                        "monomial": exponents,
                        "coefficient_valuation": valuation,
                    }),
                ));
            }
            ZeroStatus::Zeroish { min_bound: None } => {}
            ZeroStatus::Zeroish { min_bound: Some(b) } => {
                tally.observe(Obs::new(Valuation::Unbounded { bound: b }));
            }
        }
    }
    tally.finish("closed", "one_form", alpha.prime().get(), count)
}

fn restrict_beyond(g: &PolyObservable, i: usize) -> PolyObservable {
    let kept = g
        .terms()
        .filter(|(e, _)| e.iter().skip(i + 1).all(|&k| k == 0))
        .map(|(e, c)| (e.clone(), c.clone()));
    PolyObservable::from_terms(g.prime(), g.nvars(), kept)
        .expect("restriction preserves shape")
}

/// A primitive of a closed polynomial 1-form, normalized to vanish at 0:
/// f(x) = sum_i of the antiderivative in x_i of alpha_i restricted to
/// (x_1, ..., x_i, 0, ..., 0).  Fails with NotClosed when the closure check
/// fails or the reconstruction does not differentiate back to alpha.
pub fn integrate_closed_form(alpha: &PolyOneForm) -> Result<PolyObservable, PadicError> {
    let closed = check_closed(alpha);
    if closed.verdict == Verdict::Fail {
        return Err(PadicError::NotClosed(format!(
            "closure defect witnessed: {}",
            serde_json::Value::Array(closed.witnesses)
        )));
    }
    let p = alpha.prime();
    let n = alpha.dim();
    let mut f = PolyObservable::zero(p, n);
    for i in 0..n {
        f = f.add(&restrict_beyond(&alpha.components[i], i).antiderivative(i)?);
    }
    let df = PolyOneForm::differential(&f);
    for (i, (a, b)) in df.components.iter().zip(&alpha.components).enumerate() {
        if let ZeroStatus::CertainlyNonzero { exponents, valuation } = a.sub(b).zero_status() {
            return Err(PadicError::NotClosed(format!(
                "component {i} of the reconstructed differential misses alpha at monomial {exponents:?} (valuation {valuation})"
            )));
        }
    }
    Ok(f)
}

/// Aggregate classification from the assessment suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    HamiltonianCandidate,
    WeaklyHamiltonianOnly,
    NotWeaklyHamiltonian,
    Undetermined,
}

impl Classification {
    pub fn describe(&self) -> &'static str {
        match self {
            Classification::HamiltonianCandidate => {
                "Hamiltonian candidate (all sampled checks pass)"
            }
            Classification::WeaklyHamiltonianOnly => {
                "weakly Hamiltonian only (obstruction witnessed)"
            }
            Classification::NotWeaklyHamiltonian => {
                "not weakly Hamiltonian (Hamilton relation fails)"
            }
            Classification::Undetermined => {
                "undetermined (some check is below certification precision)"
            }
        }
    }
}

/// Every applicable check for one action, plus the overall classification.
#[derive(Debug)]
pub struct Assessment {
    pub reports: Vec<CheckReport>,
    pub classification: Classification,
}

impl Assessment {
    pub fn verdict(&self) -> Verdict {
        self.reports
            .iter()
            .fold(Verdict::Pass, |acc, r| acc.worst(r.verdict))
    }
}

/// Runs hamilton, isotropy, invariance, symplectic, tau, and (on affine
/// charts) duality, then classifies: a Hamiltonian candidate passes
/// everything; a passing Hamilton relation with a witnessed obstruction
/// elsewhere is weakly Hamiltonian only.
pub fn assess(d: &ActionDescriptor, params: &CheckParams) -> Assessment {
    let mut reports = vec![
        check_hamilton(d, params),
        check_isotropy(d, params),
        check_orbit_invariance(d, params),
        check_pullback_symplectic(d, None, params),
        cocycle_tau(d, params),
    ];
    if !d.space.factors.iter().any(|f| matches!(f, SpaceFactor::Sphere)) {
        match check_duality(d, params) {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                let mut t = Tally::new(ObserveStyle::Exact, certification_threshold(&d.policy));
                t.error("duality", e);
                reports.push(t.finish("duality", &d.name, d.p.get(), 0));
            }
        }
    }
    let ham = reports[0].verdict;
    let any_fail = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let any_indeterminate = reports.iter().any(|r| r.verdict == Verdict::Indeterminate);
    let classification = match ham {
        Verdict::Fail => Classification::NotWeaklyHamiltonian,
        Verdict::Indeterminate => Classification::Undetermined,
        Verdict::Pass => {
            if any_fail {
                Classification::WeaklyHamiltonianOnly
            } else if any_indeterminate {
                Classification::Undetermined
            } else {
                Classification::HamiltonianCandidate
            }
        }
    };
    Assessment { reports, classification }
}
