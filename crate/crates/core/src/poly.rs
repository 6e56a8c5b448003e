//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Context`] fixes an ordered variable list split into an `x`-block
//! (coordinates) and a `t`-block (family parameters). Polynomials store a
//! map from exponent vectors to nonzero rational coefficients; the zero
//! polynomial is the empty map. Monomials are ordered graded-lexicographically
//! on the declared variable order, which is also the canonical print order.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Shared handle to a variable context.
pub type ContextRef = std::sync::Arc<Context>;

/// Default bound on any single exponent and on total degree.
pub const DEFAULT_DEGREE_CAP: u32 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands live in different variable contexts")]
    ContextMismatch,
    #[error("degree cap {cap} exceeded")]
    DegreeCapExceeded { cap: u32 },
    #[error("variable `{name}` is not bound and does not exist in the target context")]
    UnboundVariable { name: String },
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("duplicate or empty variable name `{name}`")]
    BadVariableName { name: String },
    #[error("weights must be positive and the degree at least the largest weight")]
    BadWeights,
}

/// Ordered variable list: `x`-block first, then the parameter block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    names: Vec<String>,
    x_count: usize,
    degree_cap: u32,
}

impl Context {
    pub fn new<S: Into<String>>(
        x_names: Vec<S>,
        t_names: Vec<S>,
    ) -> Result<ContextRef, PolyError> {
        Self::with_degree_cap(x_names, t_names, DEFAULT_DEGREE_CAP)
    }

    pub fn with_degree_cap<S: Into<String>>(
        x_names: Vec<S>,
        t_names: Vec<S>,
        degree_cap: u32,
    ) -> Result<ContextRef, PolyError> {
        let x_count = x_names.len();
        let names: Vec<String> = x_names
            .into_iter()
            .map(Into::into)
            .chain(t_names.into_iter().map(Into::into))
            .collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || names[..i].contains(n) {
                return Err(PolyError::BadVariableName { name: n.clone() });
            }
        }
        Ok(ContextRef::new(Context {
            names,
            x_count,
            degree_cap,
        }))
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn param_count(&self) -> usize {
        self.names.len() - self.x_count
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_param(&self, i: usize) -> bool {
        i >= self.x_count
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }
}

/// Exponent vector, one entry per context variable.
///
/// Ordered graded-lexicographically: first by total degree, ties broken
/// lexicographically on the declared variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn unit(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Weighted degree over the `x`-block; parameters weigh zero.
    pub fn weighted_degree(&self, weights: &[u64]) -> u64 {
        self.0
            .iter()
            .zip(weights.iter())
            .map(|(&e, &w)| e as u64 * w)
            .sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub(crate) fn checked_mul(&self, other: &Monomial, cap: u32) -> Result<Monomial, PolyError> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut total: u64 = 0;
        for (&a, &b) in self.0.iter().zip(other.0.iter()) {
            let e = a
                .checked_add(b)
                .filter(|&e| e <= cap)
                .ok_or(PolyError::DegreeCapExceeded { cap })?;
            total += e as u64;
            out.push(e);
        }
        if total > cap as u64 {
            return Err(PolyError::DegreeCapExceeded { cap });
        }
        Ok(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Weight system `(w₁,…,wₙ; D)` for quasihomogeneity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    weights: Vec<u64>,
    degree: u64,
}

impl WeightSystem {
    pub fn new(weights: Vec<u64>, degree: u64) -> Result<Self, PolyError> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(PolyError::BadWeights);
        }
        if degree < *weights.iter().max().unwrap() {
            return Err(PolyError::BadWeights);
        }
        Ok(WeightSystem { weights, degree })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "; {})", self.degree)
    }
}

/// Sparse exact-rational multivariate polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    ctx: ContextRef,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(ctx: &ContextRef) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &ContextRef, c: BigRational) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(ctx.var_count()), c);
        }
        p
    }

    pub fn one(ctx: &ContextRef) -> Self {
        Self::constant(ctx, BigRational::one())
    }

    pub fn variable(ctx: &ContextRef, i: usize) -> Self {
        assert!(i < ctx.var_count(), "variable index out of range");
        let mut p = Self::zero(ctx);
        p.terms
            .insert(Monomial::var(ctx.var_count(), i), BigRational::one());
        p
    }

    pub fn from_terms<I>(ctx: &ContextRef, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut p = Self::zero(ctx);
        for (m, c) in terms {
            assert_eq!(m.0.len(), ctx.var_count(), "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn context(&self) -> &ContextRef {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&Monomial::unit(self.ctx.var_count()))
    }

    /// Largest total degree among terms, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Smallest total degree among terms (order of vanishing at 0).
    pub fn vanishing_order(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.total_degree()).min()
    }

    fn same_context(&self, other: &Polynomial) -> bool {
        std::sync::Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        if !self.same_context(other) {
            return Err(PolyError::ContextMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        if !self.same_context(other) {
            return Err(PolyError::ContextMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        if !self.same_context(other) {
            return Err(PolyError::ContextMismatch);
        }
        let cap = self.ctx.degree_cap();
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.checked_mul(mb, cap)?;
                out.add_term(m, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> Result<Polynomial, PolyError> {
        let mut out = Self::one(&self.ctx);
        for _ in 0..e {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }

    /// Exact formal partial derivative with respect to variable `var`.
    pub fn partial_derivative(&self, var: usize) -> Polynomial {
        assert!(var < self.ctx.var_count(), "variable index out of range");
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] = e - 1;
            out.add_term(m2, c * BigRational::from_integer(e.into()));
        }
        out
    }

    /// Gradient with respect to the `x`-block.
    pub fn x_gradient(&self) -> Vec<Polynomial> {
        (0..self.ctx.x_count())
            .map(|i| self.partial_derivative(i))
            .collect()
    }

    /// Composition: bound variables are replaced by the given polynomials,
    /// unbound ones pass through to a same-named variable of the target
    /// context. All bound polynomials must share one context.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<usize, Polynomial>,
    ) -> Result<Polynomial, PolyError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let target = bindings.values().next().unwrap().ctx.clone();
        for b in bindings.values() {
            if !(std::sync::Arc::ptr_eq(&b.ctx, &target) || b.ctx == target) {
                return Err(PolyError::ContextMismatch);
            }
        }
        // map unbound source variables to target indices by name, lazily
        let mut passthrough: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out = Polynomial::zero(&target);
        let mut power_cache: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut acc = Polynomial::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if let Some(b) = bindings.get(&i) {
                    let p = match power_cache.get(&(i, e)) {
                        Some(p) => p.clone(),
                        None => {
                            let p = b.pow(e)?;
                            power_cache.insert((i, e), p.clone());
                            p
                        }
                    };
                    acc = acc.checked_mul(&p)?;
                } else {
                    let j = match passthrough.get(&i) {
                        Some(&j) => j,
                        None => {
                            let name = self.ctx.name(i);
                            let j = target.index_of(name).ok_or_else(|| {
                                PolyError::UnboundVariable {
                                    name: name.to_string(),
                                }
                            })?;
                            passthrough.insert(i, j);
                            j
                        }
                    };
                    let mut mono = Monomial::unit(target.var_count());
                    mono.0[j] = e;
                    acc = acc.checked_mul(&Polynomial::from_terms(
                        &target,
                        [(mono, BigRational::one())],
                    ))?;
                }
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    /// Exchange the roles of two variables of the same block.
    pub fn swap_variables(&self, a: usize, b: usize) -> Polynomial {
        assert_eq!(
            self.ctx.is_param(a),
            self.ctx.is_param(b),
            "can only swap variables within one block"
        );
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2.0.swap(a, b);
            out.add_term(m2, c.clone());
        }
        out
    }

    /// Fix every parameter to a rational value; the result lives in a fresh
    /// parameter-free context with the same `x`-names.
    pub fn specialize_parameters(
        &self,
        values: &[BigRational],
    ) -> Result<Polynomial, PolyError> {
        let p = self.ctx.param_count();
        if values.len() != p {
            return Err(PolyError::ArityMismatch {
                expected: p,
                got: values.len(),
            });
        }
        let n = self.ctx.x_count();
        let ctx = Context::with_degree_cap(
            self.ctx.names[..n].to_vec(),
            Vec::new(),
            self.ctx.degree_cap(),
        )?;
        let mut out = Polynomial::zero(&ctx);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            for (j, v) in values.iter().enumerate() {
                let e = m.0[n + j];
                for _ in 0..e {
                    coeff = &coeff * v;
                }
            }
            out.add_term(Monomial(m.0[..n].to_vec()), coeff);
        }
        Ok(out)
    }

    /// Decompose into weighted-homogeneous parts keyed by weighted degree.
    /// Parameters carry weight zero, so a family is quasihomogeneous exactly
    /// when every fibre is.
    pub fn weighted_decomposition(&self, w: &WeightSystem) -> BTreeMap<u64, Polynomial> {
        assert_eq!(
            w.len(),
            self.ctx.x_count(),
            "weight system must cover the x-variables"
        );
        let mut parts: BTreeMap<u64, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m.weighted_degree(w.weights());
            parts
                .entry(d)
                .or_insert_with(|| Polynomial::zero(&self.ctx))
                .add_term(m.clone(), c.clone());
        }
        parts
    }

    /// `Σ wᵢ xᵢ ∂f/∂xᵢ − D·f`; zero exactly when `f` is quasihomogeneous of
    /// type `(w; D)`.
    pub fn euler_defect(&self, w: &WeightSystem) -> Polynomial {
        assert_eq!(
            w.len(),
            self.ctx.x_count(),
            "weight system must cover the x-variables"
        );
        let mut out = Self::zero(&self.ctx);
        let d = BigRational::from_integer(w.degree().into());
        for (m, c) in &self.terms {
            let wd = BigRational::from_integer(m.weighted_degree(w.weights()).into());
            out.add_term(m.clone(), c * (wd - &d));
        }
        out
    }

    pub fn is_quasihomogeneous(&self, w: &WeightSystem) -> bool {
        self.euler_defect(w).is_zero()
    }

    /// Exact evaluation at a rational point (all variables).
    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.ctx.var_count(), "point arity mismatch");
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    term = &term * &point[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Floating-point evaluation at a point (all variables).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.ctx.var_count(), "point arity mismatch");
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut term = rational_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                term *= point[i].powi(e as i32);
            }
            acc += term;
        }
        acc
    }
}

/// `BigRational` to `f64`, via exact division of big integers.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial operation failed")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_polynomial;
    use crate::{q, qi};

    fn ctx_xy() -> ContextRef {
        Context::new(vec!["x", "y"], vec![]).unwrap()
    }

    fn bs_context() -> ContextRef {
        Context::new(vec!["x", "y", "z"], vec!["t"]).unwrap()
    }

    fn p(ctx: &ContextRef, s: &str) -> Polynomial {
        parse_polynomial(s, ctx).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let ctx = ctx_xy();
        let lhs = &p(&ctx, "x + y") * &p(&ctx, "x - y");
        assert_eq!(lhs, p(&ctx, "x^2 - y^2"));
    }

    #[test]
    fn additive_identity() {
        let ctx = ctx_xy();
        let f = p(&ctx, "3*x^2 - y + 7");
        assert_eq!(&f + &Polynomial::zero(&ctx), f);
    }

    #[test]
    fn subtraction_cancels_terms() {
        let ctx = bs_context();
        let lhs = &p(&ctx, "z^5 + t*y^6*z") - &p(&ctx, "t*y^6*z");
        assert_eq!(lhs, p(&ctx, "z^5"));
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = ctx_xy();
        let b = Context::new(vec!["u", "v"], vec![]).unwrap();
        let err = p(&a, "x").checked_add(&p(&b, "u")).unwrap_err();
        assert_eq!(err, PolyError::ContextMismatch);
    }

    #[test]
    fn briancon_speder_partials() {
        let ctx = bs_context();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        assert_eq!(f.partial_derivative(0), p(&ctx, "y^7 + 15*x^14"));
        assert_eq!(f.partial_derivative(1), p(&ctx, "6*t*y^5*z + 7*y^6*x"));
        assert_eq!(f.partial_derivative(2), p(&ctx, "5*z^4 + t*y^6"));
        assert!(Polynomial::constant(&ctx, qi(42))
            .partial_derivative(0)
            .is_zero());
    }

    #[test]
    fn substitute_hyperplane_section() {
        // literal substitution z := a*x + b*y into the Briançon–Speder family
        let ctx = Context::new(vec!["x", "y", "z"], vec!["t", "a", "b"]).unwrap();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        let target = Context::new(vec!["x", "y"], vec!["t", "a", "b"]).unwrap();
        let zsub = p(&target, "a*x + b*y");
        let mut bind = BTreeMap::new();
        bind.insert(2usize, zsub.clone());
        let g = f.substitute(&bind).unwrap();
        let expected = {
            let q5 = zsub.pow(5).unwrap();
            let rest = p(&target, "t*y^6") ;
            &(&q5 + &(&rest * &zsub)) + &p(&target, "y^7*x + x^15")
        };
        assert_eq!(g, expected);
    }

    #[test]
    fn substitute_identity_and_curve() {
        let ctx = ctx_xy();
        let f = p(&ctx, "x^2 + y^2");
        assert_eq!(f.substitute(&BTreeMap::new()).unwrap(), f);

        let s_ctx = Context::new(vec!["s"], vec![]).unwrap();
        let mut bind = BTreeMap::new();
        bind.insert(0usize, p(&s_ctx, "s"));
        bind.insert(1usize, p(&s_ctx, "s^2"));
        assert_eq!(f.substitute(&bind).unwrap(), p(&s_ctx, "s^2 + s^4"));
    }

    #[test]
    fn weighted_decomposition_briancon_speder() {
        let ctx = bs_context();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        let w = WeightSystem::new(vec![1, 2, 3], 15).unwrap();
        let parts = f.weighted_decomposition(&w);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[&15], f);
        assert!(f.is_quasihomogeneous(&w));
    }

    #[test]
    fn weighted_decomposition_section_leading_term() {
        let ctx = Context::new(vec!["x", "y"], vec!["t"]).unwrap();
        let f = p(&ctx, "x^5 + t*x*y^6");
        let w = WeightSystem::new(vec![3, 2], 15).unwrap();
        let parts = f.weighted_decomposition(&w);
        assert_eq!(parts.len(), 1);
        assert!(parts.contains_key(&15));
    }

    #[test]
    fn weighted_decomposition_splits_inhomogeneous() {
        let ctx = ctx_xy();
        let f = p(&ctx, "x^2 + y^3");
        let w = WeightSystem::new(vec![1, 1], 2).unwrap();
        let parts = f.weighted_decomposition(&w);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&2], p(&ctx, "x^2"));
        assert_eq!(parts[&3], p(&ctx, "y^3"));
    }

    #[test]
    fn euler_defect_examples() {
        let ctx = bs_context();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        let w = WeightSystem::new(vec![1, 2, 3], 15).unwrap();
        assert!(f.euler_defect(&w).is_zero());

        let ctx2 = ctx_xy();
        let g = p(&ctx2, "x^2 + y^3");
        let w2 = WeightSystem::new(vec![3, 2], 6).unwrap();
        assert!(g.euler_defect(&w2).is_zero());
        let w3 = WeightSystem::new(vec![1, 1], 2).unwrap();
        assert_eq!(g.euler_defect(&w3), p(&ctx2, "y^3"));
    }

    #[test]
    fn specialize_parameters_fixes_t() {
        let ctx = bs_context();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        let f1 = f.specialize_parameters(&[qi(1)]).unwrap();
        assert_eq!(f1.context().var_count(), 3);
        let expect_ctx = f1.context().clone();
        assert_eq!(
            f1,
            parse_polynomial("z^5 + y^6*z + y^7*x + x^15", &expect_ctx).unwrap()
        );
    }

    #[test]
    fn swap_variables_exchanges_roles() {
        let ctx = bs_context();
        let f = p(&ctx, "z^5 + t*y^6*z + y^7*x + x^15");
        let g = f.swap_variables(0, 2);
        assert_eq!(g, p(&ctx, "x^5 + t*y^6*x + y^7*z + z^15"));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let ctx = Context::with_degree_cap(vec!["x"], vec![], 10).unwrap();
        let f = parse_polynomial("x^6", &ctx).unwrap();
        let err = f.checked_mul(&f).unwrap_err();
        assert_eq!(err, PolyError::DegreeCapExceeded { cap: 10 });
    }

    #[test]
    fn rational_evaluation() {
        let ctx = ctx_xy();
        let f = p(&ctx, "x^2 + y^2 - 2*x");
        assert_eq!(f.eval_rational(&[qi(2), qi(0)]), qi(0));
        assert_eq!(f.eval_rational(&[q(1, 2), qi(1)]), q(1, 4) + qi(1) - qi(1));
    }
}
