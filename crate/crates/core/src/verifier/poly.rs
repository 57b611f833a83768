//! Sparse polynomial observables over Q_p.
//!
//! Observables are polynomials in the ambient chart coordinates with p-adic
//! coefficients, stored as exponent-vector -> coefficient maps.  They carry
//! enough structure for symbolic differentiation, antidifferentiation, and
//! Poisson brackets against any supported symplectic form.

use std::collections::BTreeMap;
use std::fmt;

use crate::actions::{FormFactor, SymplecticFormSpec};
use crate::error::PadicError;
use crate::padic::{Padic, Prime, Valuation};

/// Coefficients indistinguishable from zero to at least this many digits are
/// dropped during normalization.  Anything kept below this bound still
/// signals "possibly nonzero" through [`ZeroStatus`].
pub(crate) const DROP_BOUND: i64 = 24;

/// Outcome of asking whether a polynomial is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroStatus {
    /// Some coefficient has a finite valuation, hence is certainly nonzero.
    CertainlyNonzero { exponents: Vec<u32>, valuation: i64 },
    /// Every coefficient is indistinguishable from zero; `min_bound` is the
    /// weakest certification among surviving terms (`None` when no terms
    /// survive at all, i.e. the polynomial is zero to working precision).
    Zeroish { min_bound: Option<i64> },
}

impl ZeroStatus {
    pub fn is_certain_zero(&self, threshold: i64) -> bool {
        match self {
            ZeroStatus::CertainlyNonzero { .. } => false,
            ZeroStatus::Zeroish { min_bound: None } => true,
            ZeroStatus::Zeroish { min_bound: Some(b) } => *b >= threshold,
        }
    }
}

/// A polynomial function of the ambient coordinates.
#[derive(Clone, PartialEq)]
pub struct PolyObservable {
    p: Prime,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Padic>,
}

impl fmt::Debug for PolyObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyObservable(p={}, nvars={}, [", self.p.get(), self.nvars)?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}: {}", e, c)?;
        }
        write!(f, "])")
    }
}

impl fmt::Display for PolyObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", c)?;
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", v)?,
                    _ => write!(f, "*x{}^{}", v, k)?,
                }
            }
        }
        Ok(())
    }
}

impl PolyObservable {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(p: Prime, nvars: usize) -> Self {
        PolyObservable { p, nvars, terms: BTreeMap::new() }
    }

    /// The constant polynomial with value `c`.
    pub fn constant(nvars: usize, c: Padic) -> Self {
        let p = c.prime();
        let mut out = Self::zero(p, nvars);
        out.insert(vec![0; nvars], c);
        out
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(p: Prime, nvars: usize, i: usize, prec: u32) -> Result<Self, PadicError> {
        if i >= nvars {
            return Err(PadicError::Range(format!(
                "coordinate index {} out of range for {} variables",
                i, nvars
            )));
        }
        let mut exps = vec![0u32; nvars];
        exps[i] = 1;
        let mut out = Self::zero(p, nvars);
        out.insert(exps, Padic::one(p, prec));
        Ok(out)
    }

    /// Builds a polynomial from explicit (exponents, coefficient) pairs.
    pub fn from_terms<I>(p: Prime, nvars: usize, terms: I) -> Result<Self, PadicError>
    where
        I: IntoIterator<Item = (Vec<u32>, Padic)>,
    {
        let mut out = Self::zero(p, nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(PadicError::RankMismatch { expected: nvars, got: exps.len() });
            }
            if c.prime() != p {
                return Err(PadicError::PrimeMismatch(p.get(), c.prime().get()));
            }
            out.accumulate(exps, c);
        }
        Ok(out)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Iterates over surviving terms in exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Padic)> {
        self.terms.iter()
    }

    pub fn is_zero_to_working_precision(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the highest surviving term, 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert(&mut self, exps: Vec<u32>, c: Padic) {
        if !dropped(&c) {
            self.terms.insert(exps, c);
        }
    }

    fn accumulate(&mut self, exps: Vec<u32>, c: Padic) {
        let merged = match self.terms.remove(&exps) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        self.insert(exps, merged);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.accumulate(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.p, self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.p, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.accumulate(exps, ca.mul(cb));
            }
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Padic) -> Self {
        let mut out = Self::zero(self.p, self.nvars);
        for (e, coeff) in &self.terms {
            out.insert(e.clone(), coeff.mul(c));
        }
        out
    }

    /// Divides every coefficient by the integer `k`.
    pub fn scale_div_int(&self, k: i64) -> Result<Self, PadicError> {
        let prec = self
            .terms
            .values()
            .filter_map(|c| c.rel_prec())
            .max()
            .unwrap_or(1);
        let divisor = Padic::from_i64(self.p, k, prec);
        let mut out = Self::zero(self.p, self.nvars);
        for (e, coeff) in &self.terms {
            out.insert(e.clone(), coeff.div(&divisor)?);
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.p, self.nvars);
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] = k - 1;
            let factor = Padic::from_u64(self.p, u64::from(k), c.rel_prec().unwrap_or(1).max(1));
            out.accumulate(exps, c.mul(&factor));
        }
        out
    }

    /// Antiderivative in variable `i` with zero constant of integration.
    ///
    /// The term `c x^k` maps to `c x^(k+1) / (k+1)`; the division costs
    /// `ord_p(k+1)` digits of certainty.  When that loss consumes all
    /// known digits of the coefficient the operation fails.
    pub fn antiderivative(&self, i: usize) -> Result<Self, PadicError> {
        let mut out = Self::zero(self.p, self.nvars);
        for (e, c) in &self.terms {
            let k = u64::from(e[i]) + 1;
            let loss = ord_int(self.p.get(), k);
            if let Some(rel) = c.rel_prec() {
                if loss >= u64::from(rel) {
                    return Err(PadicError::PrecisionExhausted(format!(
                        "dividing by {} loses {} digits but the coefficient carries only {}",
                        k, loss, rel
                    )));
                }
            }
            let mut exps = e.clone();
            exps[i] = e[i] + 1;
            let prec = c.rel_prec().unwrap_or(1).max(1);
            let divisor = Padic::from_u64(self.p, k, prec + loss as u32 + 1);
            out.accumulate(exps, c.div(&divisor)?);
        }
        Ok(out)
    }

    /// Evaluates the polynomial at a point.
    pub fn eval(&self, at: &[Padic]) -> Result<Padic, PadicError> {
        if at.len() != self.nvars {
            return Err(PadicError::RankMismatch { expected: self.nvars, got: at.len() });
        }
        let prec = self
            .terms
            .values()
            .filter_map(|c| c.rel_prec())
            .chain(at.iter().filter_map(|x| x.rel_prec()))
            .max()
            .unwrap_or(1);
        let mut acc = Padic::zero(self.p, i64::from(prec));
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&at[i].pow_int(i64::from(k))?);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Classifies the polynomial as certainly nonzero or zero-ish.
    pub fn zero_status(&self) -> ZeroStatus {
        let mut min_bound: Option<i64> = None;
        let mut worst: Option<(Vec<u32>, i64)> = None;
        for (e, c) in &self.terms {
            match c.valuation() {
                Valuation::Finite(v) => {
                    if worst.as_ref().map_or(true, |(_, w)| v < *w) {
                        worst = Some((e.clone(), v));
                    }
                }
                Valuation::Unbounded { bound } => {
                    min_bound = Some(min_bound.map_or(bound, |b: i64| b.min(bound)));
                }
            }
        }
        match worst {
            Some((exponents, valuation)) => ZeroStatus::CertainlyNonzero { exponents, valuation },
            None => ZeroStatus::Zeroish { min_bound },
        }
    }
}

fn dropped(c: &Padic) -> bool {
    match c.valuation() {
        Valuation::Finite(_) => false,
        Valuation::Unbounded { bound } => bound >= DROP_BOUND,
    }
}

fn working_prec(f: &PolyObservable, g: &PolyObservable) -> u32 {
    let mut best = 0;
    for (_, c) in f.terms() {
        if let Some(r) = c.rel_prec() {
            best = best.max(r);
        }
    }
    for (_, c) in g.terms() {
        if let Some(r) = c.rel_prec() {
            best = best.max(r);
        }
    }
    if best == 0 {
        crate::padic::PrecisionPolicy::default().default_digits
    } else {
        best
    }
}

fn ord_int(p: u64, mut k: u64) -> u64 {
    let mut ord = 0;
    while k % p == 0 {
        k /= p;
        ord += 1;
    }
    ord
}

/// A polynomial 1-form, one component per ambient coordinate.
#[derive(Debug, Clone)]
pub struct PolyOneForm {
    pub components: Vec<PolyObservable>,
}

impl PolyOneForm {
    pub fn new(components: Vec<PolyObservable>) -> Result<Self, PadicError> {
        let n = components.len();
        if n == 0 {
            return Err(PadicError::Range("a 1-form needs at least one component".into()));
        }
        let p = components[0].prime();
        for c in &components {
            if c.nvars() != n {
                return Err(PadicError::RankMismatch { expected: n, got: c.nvars() });
            }
            if c.prime() != p {
                return Err(PadicError::PrimeMismatch(p.get(), c.prime().get()));
            }
        }
        Ok(PolyOneForm { components })
    }

    pub fn prime(&self) -> Prime {
        self.components[0].prime()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// The closure defects d(alpha)_{ij} = d(alpha_j)/dx_i - d(alpha_i)/dx_j
    /// for i < j.  The form is closed exactly when every defect is zero.
    pub fn closure_defects(&self) -> Vec<(usize, usize, PolyObservable)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let defect = self.components[j].partial(i).sub(&self.components[i].partial(j));
                out.push((i, j, defect));
            }
        }
        out
    }

    /// The exterior derivative of a polynomial observable.
    pub fn differential(f: &PolyObservable) -> Self {
        let components = (0..f.nvars()).map(|i| f.partial(i)).collect();
        PolyOneForm { components }
    }
}

/// Poisson bracket of two observables with respect to a symplectic form.
///
/// Standard blocks contribute sum_i (df/dx_i dg/dy_i - df/dy_i dg/dx_i);
/// sphere blocks contribute the so(3)* bracket
/// -z (f_x g_y - f_y g_x) - x (f_y g_z - f_z g_y) - y (f_z g_x - f_x g_z);
/// a block with weight R scales its contribution by 1/R.
pub fn poisson_bracket(
    f: &PolyObservable,
    g: &PolyObservable,
    form: &SymplecticFormSpec,
) -> Result<PolyObservable, PadicError> {
    if f.nvars() != g.nvars() {
        return Err(PadicError::RankMismatch { expected: f.nvars(), got: g.nvars() });
    }
    if f.prime() != g.prime() {
        return Err(PadicError::PrimeMismatch(f.prime().get(), g.prime().get()));
    }
    if form.dim() != f.nvars() {
        return Err(PadicError::UnsupportedForm(format!(
            "form lives in dimension {} but the observables have {} variables",
            form.dim(),
            f.nvars()
        )));
    }
    let p = f.prime();
    let n = f.nvars();
    let mut acc = PolyObservable::zero(p, n);
    for (weight, factor) in form.flatten() {
        let contrib = match factor {
            FormFactor::Standard { offset, n: pairs } => {
                let mut block = PolyObservable::zero(p, n);
                for i in 0..pairs {
                    let xi = offset + 2 * i;
                    let yi = offset + 2 * i + 1;
                    let term = f
                        .partial(xi)
                        .mul(&g.partial(yi))
                        .sub(&f.partial(yi).mul(&g.partial(xi)));
                    block = block.add(&term);
                }
                block
            }
            FormFactor::Sphere { offset } => {
                // Coordinate factors must not cap the product's precision.
                let prec = working_prec(f, g);
                let x = PolyObservable::coordinate(p, n, offset, prec)?;
                let y = PolyObservable::coordinate(p, n, offset + 1, prec)?;
                let z = PolyObservable::coordinate(p, n, offset + 2, prec)?;
                let fx = f.partial(offset);
                let fy = f.partial(offset + 1);
                let fz = f.partial(offset + 2);
                let gx = g.partial(offset);
                let gy = g.partial(offset + 1);
                let gz = g.partial(offset + 2);
                let bxy = fx.mul(&gy).sub(&fy.mul(&gx));
                let byz = fy.mul(&gz).sub(&fz.mul(&gy));
                let bzx = fz.mul(&gx).sub(&fx.mul(&gz));
                z.mul(&bxy).add(&x.mul(&byz)).add(&y.mul(&bzx)).neg()
            }
        };
        if weight == 0 {
            return Err(PadicError::UnsupportedForm("form factor has weight zero".into()));
        }
        let scaled = if weight == 1 {
            contrib
        } else if weight == -1 {
            contrib.neg()
        } else {
            contrib.scale_div_int(weight)?
        };
        acc = acc.add(&scaled);
    }
    Ok(acc)
}
