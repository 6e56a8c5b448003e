//! Truncated univariate power series with valuation bookkeeping.
//!
//! A series stores its known coefficients below a truncation order `N`;
//! everything at exponent `≥ N` is unknown. Order propagation is
//! pessimistic: each operation records the tightest order it can guarantee,
//! so "zero up to order N" never silently passes for "zero".

use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("division by a series that is zero to order {order}")]
    DivisionByZero { order: u64 },
    #[error("division would need valuation {num} - {den} < 0 (Laurent tails are not supported)")]
    NegativeValuation { num: u64, den: u64 },
    #[error("composition requires the inner series to vanish at 0")]
    CompositionConstantTerm,
    #[error("result would have truncation order 0 (no known coefficients)")]
    NoKnownCoefficients,
}

/// Whether a valuation statement is exact or limited by truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Certified,
    TruncationLimited,
}

/// Order of vanishing of a truncated series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// A nonzero coefficient was found at `value`.
    Finite { value: u64, leading: BigRational },
    /// Every known coefficient vanishes; the true valuation is `≥ order`
    /// (possibly `+∞`), which truncation cannot distinguish.
    ZeroToOrder { order: u64 },
}

impl Valuation {
    pub fn value(&self) -> Option<u64> {
        match self {
            Valuation::Finite { value, .. } => Some(*value),
            Valuation::ZeroToOrder { .. } => None,
        }
    }

    pub fn leading(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite { leading, .. } => Some(leading),
            Valuation::ZeroToOrder { .. } => None,
        }
    }

    /// Lower bound on the true valuation.
    pub fn lower_bound(&self) -> u64 {
        match self {
            Valuation::Finite { value, .. } => *value,
            Valuation::ZeroToOrder { order } => *order,
        }
    }

    pub fn certainty(&self) -> Certainty {
        match self {
            Valuation::Finite { .. } => Certainty::Certified,
            Valuation::ZeroToOrder { .. } => Certainty::TruncationLimited,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Valuation::Finite { .. })
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite { value, leading } => write!(f, "v = {value} (leading {leading})"),
            Valuation::ZeroToOrder { order } => write!(f, "v >= {order} (zero to order)"),
        }
    }
}

/// Univariate power series known below a truncation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: BTreeMap<u64, BigRational>,
    order: u64,
}

impl TruncatedSeries {
    pub fn zero(order: u64) -> Self {
        TruncatedSeries {
            coeffs: BTreeMap::new(),
            order,
        }
    }

    pub fn constant(c: BigRational, order: u64) -> Self {
        Self::monomial(c, 0, order)
    }

    /// `c * s^exp`, known to `order`.
    pub fn monomial(c: BigRational, exp: u64, order: u64) -> Self {
        let mut s = Self::zero(order);
        if !c.is_zero() && exp < order {
            s.coeffs.insert(exp, c);
        }
        s
    }

    /// The identity series `s`.
    pub fn identity(order: u64) -> Self {
        Self::monomial(BigRational::from_integer(1.into()), 1, order)
    }

    pub fn from_coeffs<I>(coeffs: I, order: u64) -> Self
    where
        I: IntoIterator<Item = (u64, BigRational)>,
    {
        let mut s = Self::zero(order);
        for (e, c) in coeffs {
            if e < order && !c.is_zero() {
                let entry = s.coeffs.entry(e).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    s.coeffs.remove(&e);
                }
            }
        }
        s
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.coeffs.iter()
    }

    /// Known coefficient at `exp`; `None` when `exp` is beyond the order.
    pub fn coeff(&self, exp: u64) -> Option<BigRational> {
        if exp >= self.order {
            return None;
        }
        Some(
            self.coeffs
                .get(&exp)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        )
    }

    /// Every known coefficient is zero.
    pub fn is_zero_to_order(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match self.coeffs.iter().next() {
            Some((&e, c)) => Valuation::Finite {
                value: e,
                leading: c.clone(),
            },
            None => Valuation::ZeroToOrder { order: self.order },
        }
    }

    /// Lower bound on valuation used for order bookkeeping.
    fn val_lb(&self) -> u64 {
        self.valuation().lower_bound()
    }

    pub fn truncate(&self, order: u64) -> TruncatedSeries {
        let order = order.min(self.order);
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&e, _)| e < order)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            order,
        }
    }

    pub fn neg(&self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
            order: self.order,
        }
    }

    pub fn scale(&self, c: &BigRational) -> TruncatedSeries {
        if c.is_zero() {
            return Self::zero(self.order);
        }
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
            order: self.order,
        }
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for (&e, c) in other.coeffs.iter().filter(|(&e, _)| e < order) {
            let entry = out.coeffs.entry(e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.coeffs.remove(&e);
            }
        }
        out
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.add(&other.neg())
    }

    /// Product; the result order is `min(Nₐ + v(b), N_b + v(a))` so that the
    /// unknown tail of one factor can never contaminate a claimed
    /// coefficient.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = (self.order.saturating_add(other.val_lb()))
            .min(other.order.saturating_add(self.val_lb()));
        let mut out = Self::zero(order);
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                let e = ea + eb;
                if e >= order {
                    continue;
                }
                let entry = out.coeffs.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
                if entry.is_zero() {
                    out.coeffs.remove(&e);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> TruncatedSeries {
        // guard: s^0 of a zero-order series is still order-limited
        let mut out = Self::constant(BigRational::from_integer(1.into()), self.order.max(1));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Quotient `self / other`. Requires the divisor to have a certified
    /// finite valuation and `v(self) ≥ v(other)`; Laurent tails are
    /// rejected.
    pub fn div(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        let vb = match other.valuation() {
            Valuation::Finite { value, .. } => value,
            Valuation::ZeroToOrder { order } => {
                return Err(SeriesError::DivisionByZero { order })
            }
        };
        let va = self.val_lb();
        if !self.is_zero_to_order() && va < vb {
            return Err(SeriesError::NegativeValuation { num: va, den: vb });
        }
        if self.is_zero_to_order() {
            if self.order < vb {
                return Err(SeriesError::NegativeValuation {
                    num: self.order,
                    den: vb,
                });
            }
            return Ok(Self::zero(self.order - vb));
        }
        // shift both down by vb, then divide by a unit
        let a = self.shift_down(vb);
        let b = other.shift_down(vb);
        let order = a.order.min(b.order);
        if order == 0 {
            return Err(SeriesError::NoKnownCoefficients);
        }
        let b0 = b.coeff(0).unwrap();
        debug_assert!(!b0.is_zero());
        let mut q = Self::zero(order);
        let mut rem = a.truncate(order);
        for k in 0..order {
            let rk = rem.coeff(k).unwrap_or_else(BigRational::zero);
            if rk.is_zero() {
                continue;
            }
            let c = rk / &b0;
            // rem -= c * s^k * b
            for (&e, bc) in &b.coeffs {
                let idx = k + e;
                if idx >= order {
                    break;
                }
                let entry = rem.coeffs.entry(idx).or_insert_with(BigRational::zero);
                *entry -= &c * bc;
                if entry.is_zero() {
                    rem.coeffs.remove(&idx);
                }
            }
            q.coeffs.insert(k, c);
        }
        q.coeffs.retain(|_, c| !c.is_zero());
        Ok(q)
    }

    fn shift_down(&self, by: u64) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e - by, c.clone()))
                .collect(),
            order: self.order - by,
        }
    }

    /// Formal derivative `d/ds`.
    pub fn derivative(&self) -> TruncatedSeries {
        let order = self.order.saturating_sub(1).max(1);
        let mut out = Self::zero(order);
        for (&e, c) in &self.coeffs {
            if e == 0 || e > order {
                continue;
            }
            out.coeffs
                .insert(e - 1, c * BigRational::from_integer(e.into()));
        }
        out
    }

    /// Reparameterisation `s ↦ s^m`.
    pub fn dilate(&self, m: u64) -> TruncatedSeries {
        assert!(m >= 1);
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e * m, c.clone())).collect(),
            order: self.order * m,
        }
    }

    /// Composition `self(inner(s))`; the inner series must vanish at 0.
    pub fn compose(&self, inner: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        let vi = match inner.valuation() {
            Valuation::Finite { value: 0, .. } => {
                return Err(SeriesError::CompositionConstantTerm)
            }
            Valuation::Finite { value, .. } => value,
            // identically-zero inner: composition is the constant term
            Valuation::ZeroToOrder { order } => {
                let mut out = Self::zero((self.order.max(1)).saturating_mul(order.max(1)));
                if let Some(c0) = self.coeff(0) {
                    if !c0.is_zero() {
                        out.coeffs.insert(0, c0);
                    }
                }
                return Ok(out);
            }
        };
        // unknown tail of self enters at exponent >= order * v(inner)
        let order = self.order.saturating_mul(vi).min(inner.order);
        let mut out = Self::zero(order);
        let mut power = Self::constant(BigRational::from_integer(1.into()), order);
        let mut prev: u64 = 0;
        for (&e, c) in &self.coeffs {
            for _ in prev..e {
                power = power.mul(inner);
            }
            prev = e;
            out = out.add(&power.scale(c));
        }
        Ok(out)
    }

    /// Floating-point evaluation at `s`.
    pub fn eval_f64(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (&e, c) in &self.coeffs {
            acc += crate::poly::rational_to_f64(c) * s.powi(e as i32);
        }
        acc
    }

    /// The two series agree coefficientwise below `order`.
    pub fn agrees_with(&self, other: &TruncatedSeries, order: u64) -> bool {
        assert!(
            order <= self.order && order <= other.order,
            "cannot compare beyond the known order"
        );
        self.sub(other).truncate(order).is_zero_to_order()
    }
}

/// Determinant of a square matrix of series, by cofactor expansion.
pub(crate) fn det_series_matrix(m: &[Vec<TruncatedSeries>]) -> TruncatedSeries {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Option<TruncatedSeries> = None;
    for j in 0..m[0].len() {
        let minor: Vec<Vec<TruncatedSeries>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul(&det_series_matrix(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.unwrap()
}
