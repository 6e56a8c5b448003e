//! Analytic arcs `γ(s) = (x(s), t(s))`, evaluation of polynomials along
//! arcs, and a Newton solver for a series unknown defined implicitly by a
//! polynomial equation.

use crate::poly::{ContextRef, Polynomial};
use crate::series::{SeriesError, TruncatedSeries, Valuation};
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArcError {
    #[error("arc has {got} components for a context with {expected} variables")]
    ArityMismatch { expected: usize, got: usize },
    #[error("component `{name}` does not vanish at s = 0")]
    NonVanishingComponent { name: String },
    #[error("arc and polynomial contexts differ")]
    ContextMismatch,
    #[error("implicit solve: initial value is not a root of G(·, 0)")]
    NotARoot,
    #[error("implicit solve: dG/dunknown vanishes at the initial point")]
    DegenerateDerivative,
    #[error("implicit solve: polynomial involves variables besides the unknown and the parameter")]
    ExtraVariables,
    #[error("implicit solve did not converge (internal error)")]
    NoConvergence,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Analytic arc through the origin: one series per context variable,
/// `x`-block first. Every component vanishes at `s = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    ctx: ContextRef,
    x: Vec<TruncatedSeries>,
    t: Vec<TruncatedSeries>,
    order: u64,
}

impl Arc {
    pub fn new(
        ctx: &ContextRef,
        x: Vec<TruncatedSeries>,
        t: Vec<TruncatedSeries>,
    ) -> Result<Arc, ArcError> {
        if x.len() != ctx.x_count() || t.len() != ctx.param_count() {
            return Err(ArcError::ArityMismatch {
                expected: ctx.var_count(),
                got: x.len() + t.len(),
            });
        }
        let mut order = u64::MAX;
        for (i, c) in x.iter().chain(t.iter()).enumerate() {
            if c.coeff(0).map(|v| !v.is_zero()).unwrap_or(false) {
                return Err(ArcError::NonVanishingComponent {
                    name: ctx.name(i).to_string(),
                });
            }
            order = order.min(c.order());
        }
        Ok(Arc {
            ctx: ctx.clone(),
            x,
            t,
            order,
        })
    }

    pub fn context(&self) -> &ContextRef {
        &self.ctx
    }

    pub fn x_components(&self) -> &[TruncatedSeries] {
        &self.x
    }

    pub fn t_components(&self) -> &[TruncatedSeries] {
        &self.t
    }

    /// Component by unified variable index (`x`-block then `t`-block).
    pub fn component(&self, i: usize) -> &TruncatedSeries {
        if i < self.x.len() {
            &self.x[i]
        } else {
            &self.t[i - self.x.len()]
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &TruncatedSeries> {
        self.x.iter().chain(self.t.iter())
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Reparameterise `s ↦ s^m`.
    pub fn dilate(&self, m: u64) -> Arc {
        Arc {
            ctx: self.ctx.clone(),
            x: self.x.iter().map(|c| c.dilate(m)).collect(),
            t: self.t.iter().map(|c| c.dilate(m)).collect(),
            order: self.order * m,
        }
    }

    /// Numeric point `(x(s), t(s))` at a concrete parameter value.
    pub fn eval_f64(&self, s: f64) -> Vec<f64> {
        self.components().map(|c| c.eval_f64(s)).collect()
    }
}

/// Evaluate a polynomial at an arbitrary tuple of series (no vanishing
/// requirement on the components).
pub fn eval_series(f: &Polynomial, assignment: &[TruncatedSeries]) -> TruncatedSeries {
    assert_eq!(
        assignment.len(),
        f.context().var_count(),
        "assignment arity mismatch"
    );
    let base_order = assignment.iter().map(|s| s.order()).min().unwrap_or(1);
    let mut acc = TruncatedSeries::zero(base_order.max(1));
    let mut acc_started = false;
    // per-variable power cache
    let mut cache: Vec<Vec<TruncatedSeries>> = assignment
        .iter()
        .map(|s| vec![TruncatedSeries::constant(BigRational::from_integer(1.into()), s.order().max(1)), s.clone()])
        .collect();
    for (mono, coeff) in f.terms() {
        let mut term = TruncatedSeries::constant(coeff.clone(), u64::MAX);
        for (i, &e) in mono.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let powers = &mut cache[i];
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(&assignment[i]);
                powers.push(next);
            }
            term = term.mul(&powers[e as usize]);
        }
        if term.order() == u64::MAX {
            // constant-only monomial: clamp to the ambient order
            term = term.truncate(base_order.max(1));
        }
        acc = if acc_started { acc.add(&term) } else { term };
        acc_started = true;
    }
    if !acc_started {
        return TruncatedSeries::zero(base_order.max(1));
    }
    acc
}

/// Exact composition `f ∘ γ`, truncated at the order the arithmetic can
/// guarantee (at least the arc order for vanishing arcs).
pub fn evaluate_along_arc(f: &Polynomial, arc: &Arc) -> Result<TruncatedSeries, ArcError> {
    if f.context() != arc.context()
        && !std::sync::Arc::ptr_eq(f.context(), arc.context())
    {
        return Err(ArcError::ContextMismatch);
    }
    let assignment: Vec<TruncatedSeries> = arc.components().cloned().collect();
    Ok(eval_series(f, &assignment))
}

/// Result of [`implicit_solve`]: the series and the number of Newton
/// updates that were needed.
#[derive(Debug, Clone)]
pub struct ImplicitSolution {
    pub series: TruncatedSeries,
    pub newton_steps: usize,
}

/// Solve `G(λ(s), s) = 0` for a series `λ` with `λ(0) = initial`, to the
/// requested order, by Newton iteration (the correct order doubles each
/// step). Requires `G(initial, 0) = 0` and `∂G/∂λ(initial, 0) ≠ 0`.
pub fn implicit_solve(
    g: &Polynomial,
    unknown: usize,
    param: usize,
    initial: &BigRational,
    order: u64,
) -> Result<ImplicitSolution, ArcError> {
    let ctx = g.context();
    assert!(unknown != param, "unknown and parameter must differ");
    for (mono, _) in g.terms() {
        for (i, &e) in mono.0.iter().enumerate() {
            if e > 0 && i != unknown && i != param {
                return Err(ArcError::ExtraVariables);
            }
        }
    }
    let origin: Vec<BigRational> = (0..ctx.var_count())
        .map(|i| {
            if i == unknown {
                initial.clone()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    if !g.eval_rational(&origin).is_zero() {
        return Err(ArcError::NotARoot);
    }
    let g_unknown = g.partial_derivative(unknown);
    if g_unknown.eval_rational(&origin).is_zero() {
        return Err(ArcError::DegenerateDerivative);
    }

    let order = order.max(1);
    let assignment_for = |lam: &TruncatedSeries| -> Vec<TruncatedSeries> {
        (0..ctx.var_count())
            .map(|i| {
                if i == unknown {
                    lam.clone()
                } else if i == param {
                    TruncatedSeries::identity(order)
                } else {
                    TruncatedSeries::zero(order)
                }
            })
            .collect()
    };

    let mut lam = TruncatedSeries::constant(initial.clone(), order);
    let max_steps = (64 - u64::leading_zeros(order) as usize) + 3;
    for step in 0..=max_steps {
        let assignment = assignment_for(&lam);
        let residual = eval_series(g, &assignment).truncate(order);
        let done = match residual.valuation() {
            Valuation::ZeroToOrder { order: o } => o >= order,
            Valuation::Finite { .. } => false,
        };
        if done {
            return Ok(ImplicitSolution {
                series: lam,
                newton_steps: step,
            });
        }
        let deriv = eval_series(&g_unknown, &assignment).truncate(order);
        let update = residual.div(&deriv)?;
        lam = lam.sub(&update).truncate(order);
    }
    Err(ArcError::NoConvergence)
}
