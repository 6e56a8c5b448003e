//! Family changes of variables `Φ(y,τ) = (Ψ(y,τ), λ(τ))` with `Ψ(·,τ)` an
//! automorphism of `(ℝⁿ,0)`, composition `F∘Φ`, and the constructive
//! fold-inducing transform.
//!
//! Given an arc `γ(s) = (p(s), λ(s))` in the zero set along which the
//! radial Whitney limit is nonzero — equivalently `v(u) = v(p) + v(q)` for
//! `q = d_xF∘γ` and `u = ⟨p, q⟩` — the map
//!
//! ```text
//! ψ_1 = y_1 − (p_1/u)·h,   ψ_j = y_j + (p_j/p_1)·y_1 − (p_j/u)·h,
//! h   = q_2·y_2 + … + q_n·y_n
//! ```
//!
//! (after renumbering so that `v(p_1)` is minimal) is linear in `y` with
//! analytic series coefficients, has Jacobian determinant identically 1,
//! fixes the origin, and carries the axis point `(p_1(τ), 0, …, 0)` back to
//! `γ(τ)`. Along that axis the gradient of `F∘Φ` is proportional to the
//! position, so the composed family has a vanishing fold for the round
//! control function. [`verify_transported_kink`] replays all of these
//! identities on the actual composed series and reports the multiplier
//! `u/p_1²`.

use crate::arc::{Arc, ArcError};
use crate::poly::{ContextRef, Context, Monomial, Polynomial};
use crate::series::{det_series_matrix, SeriesError, TruncatedSeries, Valuation};
use crate::whitney::{limit_from_series, LimitVerdict, WhitneyError};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("fold transform construction needs a single parameter series")]
    SingleParameterOnly,
    #[error(
        "arc does not witness a Whitney failure: v(u) = {vu} but v(p) + v(q) = {vp} + {vq}"
    )]
    ValuationMismatch { vu: u64, vp: u64, vq: u64 },
    #[error("valuation of {which} is unresolved at the current truncation order")]
    UndeterminedValuation { which: String },
    #[error("Ψ does not fix the origin (component {component} has a constant term)")]
    PsiMovesOrigin { component: usize },
    #[error("λ does not fix the parameter origin (component {component})")]
    LambdaMovesOrigin { component: usize },
    #[error("Jacobian determinant vanishes at the origin; Ψ is not locally invertible")]
    NotLocallyInvertible,
    #[error("identity check failed: {which} (checked to order {order})")]
    IdentityFailed { which: String, order: u64 },
    #[error("arc #{index} is not in the zero set of the composed family")]
    StabilityArcOutsideZeroSet { index: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Arc(#[from] ArcError),
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
}

/// Polynomial in the `y`-variables whose coefficients are truncated series
/// in the family parameter τ. All coefficient series share one truncation
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedPolynomial {
    ctx: ContextRef,
    terms: BTreeMap<Monomial, TruncatedSeries>,
    order: u64,
}

impl MixedPolynomial {
    pub fn zero(ctx: &ContextRef, order: u64) -> Self {
        MixedPolynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            order,
        }
    }

    /// Build from `(monomial, coefficient series)` pairs; the common order
    /// is the minimum of the given order and every coefficient's order.
    pub fn from_terms<I>(ctx: &ContextRef, terms: I, order: u64) -> Self
    where
        I: IntoIterator<Item = (Monomial, TruncatedSeries)>,
    {
        let mut collected: BTreeMap<Monomial, TruncatedSeries> = BTreeMap::new();
        let mut common = order;
        for (m, s) in terms {
            assert_eq!(m.0.len(), ctx.var_count(), "monomial arity mismatch");
            assert!(
                m.0[ctx.x_count()..].iter().all(|&e| e == 0),
                "mixed monomials must not involve the parameter block"
            );
            common = common.min(s.order());
            let entry = collected
                .entry(m)
                .or_insert_with(|| TruncatedSeries::zero(s.order()));
            *entry = entry.add(&s);
        }
        let mut out = MixedPolynomial {
            ctx: ctx.clone(),
            terms: collected,
            order: common,
        };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        let order = self.order;
        self.terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(m, s)| (m, s.truncate(order)))
            .filter(|(_, s)| !s.is_zero_to_order())
            .collect();
    }

    pub fn context(&self) -> &ContextRef {
        &self.ctx
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &TruncatedSeries)> {
        self.terms.iter()
    }

    /// Every known coefficient of every term vanishes.
    pub fn is_zero_to_order(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> TruncatedSeries {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| TruncatedSeries::zero(self.order))
    }

    /// Coefficient series of the constant-in-`y` monomial.
    pub fn constant_coefficient(&self) -> TruncatedSeries {
        self.coefficient(&Monomial::unit(self.ctx.var_count()))
    }

    pub fn add(&self, other: &MixedPolynomial) -> MixedPolynomial {
        let order = self.order.min(other.order);
        let mut terms = self.terms.clone();
        for (m, s) in &other.terms {
            let entry = terms
                .entry(m.clone())
                .or_insert_with(|| TruncatedSeries::zero(order));
            *entry = entry.add(s);
        }
        let mut out = MixedPolynomial {
            ctx: self.ctx.clone(),
            terms,
            order,
        };
        out.normalize();
        out
    }

    pub fn neg(&self) -> MixedPolynomial {
        MixedPolynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.neg()))
                .collect(),
            order: self.order,
        }
    }

    pub fn sub(&self, other: &MixedPolynomial) -> MixedPolynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MixedPolynomial) -> MixedPolynomial {
        let cap = self.ctx.degree_cap();
        let mut terms: BTreeMap<Monomial, TruncatedSeries> = BTreeMap::new();
        let mut order = self.order.min(other.order);
        for (ma, sa) in &self.terms {
            for (mb, sb) in &other.terms {
                let m = ma
                    .checked_mul(mb, cap)
                    .expect("degree cap exceeded in mixed product");
                let prod = sa.mul(sb);
                order = order.min(prod.order());
                let entry = terms
                    .entry(m)
                    .or_insert_with(|| TruncatedSeries::zero(prod.order()));
                *entry = entry.add(&prod);
            }
        }
        let mut out = MixedPolynomial {
            ctx: self.ctx.clone(),
            terms,
            order,
        };
        out.normalize();
        out
    }

    pub fn scale_series(&self, s: &TruncatedSeries) -> MixedPolynomial {
        let mut order = self.order;
        let terms: BTreeMap<Monomial, TruncatedSeries> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let prod = c.mul(s);
                order = order.min(prod.order());
                (m.clone(), prod)
            })
            .collect();
        let mut out = MixedPolynomial {
            ctx: self.ctx.clone(),
            terms,
            order,
        };
        out.normalize();
        out
    }

    pub fn pow(&self, e: u32) -> MixedPolynomial {
        let unit = MixedPolynomial::from_terms(
            &self.ctx,
            [(
                Monomial::unit(self.ctx.var_count()),
                TruncatedSeries::constant(BigRational::one(), u64::MAX),
            )],
            u64::MAX,
        );
        let mut out = unit;
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative in a `y`-variable.
    pub fn partial_derivative(&self, var: usize) -> MixedPolynomial {
        assert!(var < self.ctx.x_count(), "not a y-variable");
        let mut terms: BTreeMap<Monomial, TruncatedSeries> = BTreeMap::new();
        for (m, s) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] = e - 1;
            let scaled = s.scale(&BigRational::from_integer(e.into()));
            let entry = terms
                .entry(m2)
                .or_insert_with(|| TruncatedSeries::zero(self.order));
            *entry = entry.add(&scaled);
        }
        let mut out = MixedPolynomial {
            ctx: self.ctx.clone(),
            terms,
            order: self.order,
        };
        out.normalize();
        out
    }

    /// Derivative in the parameter τ (coefficientwise).
    pub fn tau_derivative(&self) -> MixedPolynomial {
        let order = self.order.saturating_sub(1).max(1);
        let mut out = MixedPolynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.derivative()))
                .collect(),
            order,
        };
        out.normalize();
        out
    }

    /// Substitute series for the `y`-variables (τ stays the series
    /// parameter).
    pub fn eval_at_series(&self, point: &[TruncatedSeries]) -> TruncatedSeries {
        assert_eq!(point.len(), self.ctx.x_count(), "point arity mismatch");
        let mut acc = TruncatedSeries::zero(self.order);
        for (m, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, &e) in m.0[..self.ctx.x_count()].iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&point[i]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Compose with an arc over the same `(y, τ)` context: coefficients are
    /// composed with the arc's τ-component, `y`-variables with its
    /// `y`-components.
    pub fn along_arc(&self, arc: &Arc) -> Result<TruncatedSeries, TransformError> {
        if arc.context() != &self.ctx {
            return Err(TransformError::ArityMismatch {
                expected: self.ctx.var_count(),
                got: arc.context().var_count(),
            });
        }
        let tau = &arc.t_components()[0];
        let mut acc = TruncatedSeries::zero(self.order.min(arc.order()));
        for (m, coeff) in &self.terms {
            let mut term = coeff.compose(tau)?;
            for (i, &e) in m.0[..self.ctx.x_count()].iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&arc.x_components()[i]);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

impl fmt::Display for MixedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(s^{})", self.order);
        }
        for (k, (m, s)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({s})")?;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                write!(f, "*{}", self.ctx.name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Change of variables `Φ(y,τ) = (Ψ(y,τ), λ(τ))`: `Ψ` has one
/// [`MixedPolynomial`] per coordinate, `λ` one series per family parameter.
/// Validated so that `Ψ(0,τ) = 0`, `λ(0) = 0` and `Ψ(·,0)` is invertible
/// at the origin.
#[derive(Debug, Clone)]
pub struct FamilyMap {
    ctx: ContextRef,
    psi: Vec<MixedPolynomial>,
    lambda: Vec<TruncatedSeries>,
    order: u64,
}

/// Fresh `(y₁,…,yₙ; tau)` context for transform codomains.
pub fn transform_context(n: usize) -> ContextRef {
    Context::new(
        (1..=n).map(|i| format!("y{i}")).collect(),
        vec!["tau".to_string()],
    )
    .expect("valid generated names")
}

impl FamilyMap {
    pub fn new(
        ctx: &ContextRef,
        psi: Vec<MixedPolynomial>,
        lambda: Vec<TruncatedSeries>,
    ) -> Result<FamilyMap, TransformError> {
        let n = ctx.x_count();
        if psi.len() != n {
            return Err(TransformError::ArityMismatch {
                expected: n,
                got: psi.len(),
            });
        }
        let mut order = u64::MAX;
        for (i, component) in psi.iter().enumerate() {
            order = order.min(component.order());
            if !component.constant_coefficient().is_zero_to_order() {
                return Err(TransformError::PsiMovesOrigin { component: i });
            }
        }
        for (j, l) in lambda.iter().enumerate() {
            order = order.min(l.order());
            if l.coeff(0).map(|c| !c.is_zero()).unwrap_or(false) {
                return Err(TransformError::LambdaMovesOrigin { component: j });
            }
        }
        // local invertibility: det (∂Ψ/∂y) at y = 0 must be a unit series
        let rows: Vec<Vec<TruncatedSeries>> = psi
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| c.partial_derivative(j).constant_coefficient())
                    .collect()
            })
            .collect();
        let det0 = det_series_matrix(&rows);
        match det0.valuation() {
            Valuation::Finite { value: 0, .. } => {}
            _ => return Err(TransformError::NotLocallyInvertible),
        }
        Ok(FamilyMap {
            ctx: ctx.clone(),
            psi,
            lambda,
            order,
        })
    }

    /// The identity map for a one-parameter family.
    pub fn identity(family_ctx: &ContextRef, order: u64) -> FamilyMap {
        assert_eq!(family_ctx.param_count(), 1, "identity needs one parameter");
        let n = family_ctx.x_count();
        let ctx = transform_context(n);
        let psi = (0..n)
            .map(|i| {
                MixedPolynomial::from_terms(
                    &ctx,
                    [(
                        Monomial::var(ctx.var_count(), i),
                        TruncatedSeries::constant(BigRational::one(), order),
                    )],
                    order,
                )
            })
            .collect();
        let lambda = vec![TruncatedSeries::identity(order)];
        FamilyMap::new(&ctx, psi, lambda).expect("identity map is valid")
    }

    /// Parameter-only reparameterisation `Φ₂(y,τ) = (y, λ(τ))`.
    pub fn parameter_change(
        family_ctx: &ContextRef,
        lambda: Vec<TruncatedSeries>,
        order: u64,
    ) -> Result<FamilyMap, TransformError> {
        let n = family_ctx.x_count();
        let ctx = transform_context(n);
        let psi = (0..n)
            .map(|i| {
                MixedPolynomial::from_terms(
                    &ctx,
                    [(
                        Monomial::var(ctx.var_count(), i),
                        TruncatedSeries::constant(BigRational::one(), order),
                    )],
                    order,
                )
            })
            .collect();
        FamilyMap::new(&ctx, psi, lambda)
    }

    pub fn context(&self) -> &ContextRef {
        &self.ctx
    }

    pub fn psi(&self) -> &[MixedPolynomial] {
        &self.psi
    }

    pub fn lambda(&self) -> &[TruncatedSeries] {
        &self.lambda
    }

    pub fn order(&self) -> u64 {
        self.order
    }
}

/// Exact composition `F∘Φ(y,τ) = F(Ψ(y,τ), λ(τ))` as a mixed polynomial.
pub fn compose_family(f: &Polynomial, map: &FamilyMap) -> Result<MixedPolynomial, TransformError> {
    let n = f.context().x_count();
    let p = f.context().param_count();
    if map.psi.len() != n {
        return Err(TransformError::ArityMismatch {
            expected: n,
            got: map.psi.len(),
        });
    }
    if map.lambda.len() != p {
        return Err(TransformError::ArityMismatch {
            expected: p,
            got: map.lambda.len(),
        });
    }
    let ctx = &map.ctx;
    let mut psi_powers: Vec<Vec<MixedPolynomial>> = map
        .psi
        .iter()
        .map(|c| vec![MixedPolynomial::from_terms(
            ctx,
            [(
                Monomial::unit(ctx.var_count()),
                TruncatedSeries::constant(BigRational::one(), u64::MAX),
            )],
            u64::MAX,
        ), c.clone()])
        .collect();
    let mut lambda_powers: Vec<Vec<TruncatedSeries>> = map
        .lambda
        .iter()
        .map(|l| vec![TruncatedSeries::constant(BigRational::one(), u64::MAX), l.clone()])
        .collect();

    let mut acc = MixedPolynomial::zero(ctx, map.order);
    for (mono, coeff) in f.terms() {
        let mut series_factor = TruncatedSeries::constant(coeff.clone(), u64::MAX);
        for (j, &e) in mono.0[n..].iter().enumerate() {
            if e == 0 {
                continue;
            }
            let powers = &mut lambda_powers[j];
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(&map.lambda[j]);
                powers.push(next);
            }
            series_factor = series_factor.mul(&powers[e as usize]);
        }
        let mut term: Option<MixedPolynomial> = None;
        for (i, &e) in mono.0[..n].iter().enumerate() {
            if e == 0 {
                continue;
            }
            let powers = &mut psi_powers[i];
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(&map.psi[i]);
                powers.push(next);
            }
            term = Some(match term {
                None => powers[e as usize].clone(),
                Some(t) => t.mul(&powers[e as usize]),
            });
        }
        let piece = match term {
            Some(t) => t.scale_series(&series_factor),
            None => MixedPolynomial::from_terms(
                ctx,
                [(Monomial::unit(ctx.var_count()), series_factor)],
                u64::MAX,
            ),
        };
        acc = acc.add(&piece);
    }
    // the composition is known at least to the map's own order
    if acc.is_zero_to_order() && acc.order() == u64::MAX {
        return Ok(MixedPolynomial::zero(ctx, map.order));
    }
    Ok(acc)
}

/// Exact Jacobian determinant `det(∂Ψᵢ/∂y_j)` of a family map.
pub fn jacobian_det(map: &FamilyMap) -> MixedPolynomial {
    let n = map.psi.len();
    let rows: Vec<Vec<MixedPolynomial>> = map
        .psi
        .iter()
        .map(|c| (0..n).map(|j| c.partial_derivative(j)).collect())
        .collect();
    mixed_det(&rows)
}

fn mixed_det(m: &[Vec<MixedPolynomial>]) -> MixedPolynomial {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Option<MixedPolynomial> = None;
    for j in 0..n {
        let minor: Vec<Vec<MixedPolynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul(&mixed_det(&minor));
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

/// A constructed fold transform together with the witness data it was
/// built from.
#[derive(Debug, Clone)]
pub struct FoldTransform {
    pub map: FamilyMap,
    /// Index playing the role of the first coordinate (minimal `v(pᵢ)`).
    pub pivot: usize,
    pub p: Vec<TruncatedSeries>,
    pub q: Vec<TruncatedSeries>,
    pub u: TruncatedSeries,
    pub lambda: Vec<TruncatedSeries>,
}

fn certified_min_valuation(
    series: &[TruncatedSeries],
    which: &str,
) -> Result<(usize, u64), TransformError> {
    let mut best: Option<(usize, u64)> = None;
    for (i, s) in series.iter().enumerate() {
        if let Valuation::Finite { value, .. } = s.valuation() {
            if best.map(|(_, v)| value < v).unwrap_or(true) {
                best = Some((i, value));
            }
        }
    }
    let (idx, v) = best.ok_or_else(|| TransformError::UndeterminedValuation {
        which: which.to_string(),
    })?;
    // a zero-to-order component could still hide a smaller valuation
    for s in series {
        if let Valuation::ZeroToOrder { order } = s.valuation() {
            if order <= v {
                return Err(TransformError::UndeterminedValuation {
                    which: which.to_string(),
                });
            }
        }
    }
    Ok((idx, v))
}

/// Build the fold-inducing change of variables from arc data: `p = x∘γ`,
/// `q = d_xF∘γ`, `u = ⟨p, q⟩∘γ`, and the parameter series `λ = t∘γ`.
///
/// The coordinate playing the role of `y₁` is chosen automatically as the
/// `p`-component of minimal valuation and recorded as `pivot`. Requires
/// the witness condition `v(u) = v(p) + v(q)`; every coefficient series of
/// the result then has nonnegative valuation.
pub fn build_fold_transform(
    p: &[TruncatedSeries],
    q: &[TruncatedSeries],
    u: &TruncatedSeries,
    lambda: &[TruncatedSeries],
) -> Result<FoldTransform, TransformError> {
    let n = p.len();
    if q.len() != n {
        return Err(TransformError::ArityMismatch {
            expected: n,
            got: q.len(),
        });
    }
    if lambda.len() != 1 {
        return Err(TransformError::SingleParameterOnly);
    }
    let (pivot, vp) = certified_min_valuation(p, "p")?;
    let (_, vq) = certified_min_valuation(q, "q")?;
    let vu = match u.valuation() {
        Valuation::Finite { value, .. } => value,
        Valuation::ZeroToOrder { .. } => {
            return Err(TransformError::UndeterminedValuation {
                which: "u".to_string(),
            })
        }
    };
    if vu != vp + vq {
        return Err(TransformError::ValuationMismatch { vu, vp, vq });
    }

    let ctx = transform_context(n);
    let nv = ctx.var_count();
    let one = |exp_i: usize| Monomial::var(nv, exp_i);
    let mut psi: Vec<MixedPolynomial> = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms: Vec<(Monomial, TruncatedSeries)> = Vec::new();
        // identity part
        terms.push((
            one(i),
            TruncatedSeries::constant(BigRational::one(), u64::MAX),
        ));
        if i != pivot {
            // (p_i/p_pivot)·y_pivot
            let ratio = p[i].div(&p[pivot])?;
            terms.push((one(pivot), ratio));
        }
        // −(p_i/u)·h with h = Σ_{j≠pivot} q_j y_j; computed as (p_i·q_j)/u
        // so every division has nonnegative valuation
        for j in 0..n {
            if j == pivot {
                continue;
            }
            let coeff = p[i].mul(&q[j]).div(u)?.neg();
            terms.push((one(j), coeff));
        }
        psi.push(MixedPolynomial::from_terms(&ctx, terms, u64::MAX));
    }
    let map = FamilyMap::new(&ctx, psi, lambda.to_vec())?;
    Ok(FoldTransform {
        map,
        pivot,
        p: p.to_vec(),
        q: q.to_vec(),
        u: u.clone(),
        lambda: lambda.to_vec(),
    })
}

/// Verification record for the transported kink identities.
#[derive(Debug, Clone)]
pub struct KinkVerification {
    pub pivot: usize,
    /// Orders to which `∂(F∘Φ)/∂yᵢ ≡ 0` was confirmed, for each `i ≠ pivot`.
    pub vanishing_orders: Vec<(usize, u64)>,
    /// Order to which the pivot component equals `u/p₁`.
    pub radial_order: u64,
    /// Order to which `Φ(p₁(τ), 0, …, 0, τ) = γ(τ)` componentwise.
    pub transport_order: u64,
    /// The kink multiplier `u/p₁²`: gradient = multiplier · position.
    pub multiplier: TruncatedSeries,
}

/// Replay the proof identities on the composed family: along
/// `(p₁(τ), 0, …, 0)` every non-pivot component of the `y`-gradient of
/// `F∘Φ` vanishes, the pivot component equals `u/p₁`, and the map carries
/// the axis back to the original arc.
pub fn verify_transported_kink(
    f: &Polynomial,
    ft: &FoldTransform,
) -> Result<KinkVerification, TransformError> {
    let n = ft.p.len();
    let composed = compose_family(f, &ft.map)?;
    let axis_point: Vec<TruncatedSeries> = (0..n)
        .map(|i| {
            if i == ft.pivot {
                ft.p[ft.pivot].clone()
            } else {
                TruncatedSeries::zero(ft.p[ft.pivot].order())
            }
        })
        .collect();

    // transport: Ψ(p₁ e_pivot, τ) = p componentwise
    let mut transport_order = u64::MAX;
    for (i, psi) in ft.map.psi().iter().enumerate() {
        let image = psi.eval_at_series(&axis_point);
        let diff = image.sub(&ft.p[i]);
        transport_order = transport_order.min(diff.order());
        if !diff.is_zero_to_order() {
            return Err(TransformError::IdentityFailed {
                which: format!("transport of component {}", i + 1),
                order: diff.order(),
            });
        }
    }

    let mut vanishing_orders = Vec::new();
    let mut radial_order = 0;
    for i in 0..n {
        let grad_i = composed.partial_derivative(i).eval_at_series(&axis_point);
        if i == ft.pivot {
            let expected = ft.u.div(&ft.p[ft.pivot])?;
            let diff = grad_i.sub(&expected);
            radial_order = diff.order();
            if !diff.is_zero_to_order() {
                return Err(TransformError::IdentityFailed {
                    which: "pivot gradient component (expected u/p1)".to_string(),
                    order: diff.order(),
                });
            }
        } else {
            if !grad_i.is_zero_to_order() {
                return Err(TransformError::IdentityFailed {
                    which: format!("gradient component {} along the axis", i + 1),
                    order: grad_i.order(),
                });
            }
            vanishing_orders.push((i, grad_i.order()));
        }
    }

    let multiplier = ft.u.div(&ft.p[ft.pivot].mul(&ft.p[ft.pivot]))?;
    Ok(KinkVerification {
        pivot: ft.pivot,
        vanishing_orders,
        radial_order,
        transport_order,
        multiplier,
    })
}

/// Verdict comparison for one test arc.
#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub composed_a: Vec<LimitVerdict>,
    pub composed_bprime: LimitVerdict,
    pub original_a: Vec<LimitVerdict>,
    pub original_bprime: LimitVerdict,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
}

/// Desk-scale check that Whitney verdicts are stable under a family change
/// of variables: for each test arc in the zero set of `F∘Φ`, evaluate
/// conditions (a) and (b′) for the composed family along the arc and for
/// `F` along the image arc, and compare verdicts.
pub fn whitney_stability_check(
    f: &Polynomial,
    map: &FamilyMap,
    test_arcs: &[Arc],
) -> Result<StabilityReport, TransformError> {
    let composed = compose_family(f, map)?;
    let n = f.context().x_count();
    let mut rows = Vec::with_capacity(test_arcs.len());
    for (index, arc) in test_arcs.iter().enumerate() {
        if !composed.along_arc(arc)?.is_zero_to_order() {
            return Err(TransformError::StabilityArcOutsideZeroSet { index });
        }
        // composed family: gradient and parameter derivative along the arc
        let grad: Vec<TruncatedSeries> = (0..n)
            .map(|i| composed.partial_derivative(i).along_arc(arc))
            .collect::<Result<_, _>>()?;
        let den_grad = sum_squares(&grad);
        let tau_num = composed.tau_derivative().along_arc(arc)?;
        let composed_a = vec![limit_from_series(&tau_num, &[&den_grad]).verdict];
        let mut radial = TruncatedSeries::zero(arc.order());
        for (yi, gi) in arc.x_components().iter().zip(grad.iter()) {
            radial = radial.add(&yi.mul(gi));
        }
        let den_pos = sum_squares(arc.x_components());
        let composed_bprime = limit_from_series(&radial, &[&den_pos, &den_grad]).verdict;

        // image arc under Φ, then the original family's conditions
        let tau = &arc.t_components()[0];
        let x_img: Vec<TruncatedSeries> = map
            .psi()
            .iter()
            .map(|c| c.along_arc(arc))
            .collect::<Result<_, _>>()?;
        let t_img: Vec<TruncatedSeries> = map
            .lambda()
            .iter()
            .map(|l| l.compose(tau))
            .collect::<Result<_, _>>()?;
        let image = Arc::new(f.context(), x_img, t_img)?;
        let original_a: Vec<LimitVerdict> = crate::whitney::condition_a_along_arc(f, &image)?
            .into_iter()
            .map(|r| r.verdict)
            .collect();
        let original_bprime = crate::whitney::condition_bprime_along_arc(f, &image)?.verdict;

        let agree = composed_bprime == original_bprime
            && (original_a.len() != composed_a.len() || original_a == composed_a);
        rows.push(StabilityRow {
            composed_a,
            composed_bprime,
            original_a,
            original_bprime,
            agree,
        });
    }
    Ok(StabilityReport { rows })
}

fn sum_squares(series: &[TruncatedSeries]) -> TruncatedSeries {
    let order = series.iter().map(|s| s.order()).min().unwrap_or(1);
    let mut acc = TruncatedSeries::zero(order);
    for s in series {
        acc = acc.add(&s.mul(s));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_polynomial;
    use crate::{q, qi};

    fn series(pairs: &[(u64, i64)], order: u64) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(pairs.iter().map(|&(e, c)| (e, qi(c))), order)
    }

    #[test]
    fn compose_with_identity_keeps_structure() {
        let ctx = Context::new(vec!["x"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^2 - t", &ctx).unwrap();
        let map = FamilyMap::identity(&ctx, 16);
        let g = compose_family(&f, &map).unwrap();
        // g(y, τ) = y² − τ
        let y_sq = Monomial(vec![2, 0]);
        assert_eq!(g.coefficient(&y_sq).coeff(0), Some(qi(1)));
        assert_eq!(g.constant_coefficient().coeff(1), Some(qi(-1)));
        assert_eq!(g.terms().count(), 2);
    }

    #[test]
    fn parameter_only_reparameterisation() {
        let ctx = Context::new(vec!["x"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^2 - t", &ctx).unwrap();
        let lambda = vec![TruncatedSeries::monomial(qi(1), 2, 16)];
        let map = FamilyMap::parameter_change(&ctx, lambda, 16).unwrap();
        let g = compose_family(&f, &map).unwrap();
        // y² − τ²
        assert_eq!(g.coefficient(&Monomial(vec![2, 0])).coeff(0), Some(qi(1)));
        assert_eq!(g.constant_coefficient().coeff(2), Some(qi(-1)));
    }

    #[test]
    fn jacobian_of_identity_and_scaling() {
        let ctx = Context::new(vec!["x", "y"], vec!["t"]).unwrap();
        let map = FamilyMap::identity(&ctx, 12);
        let det = jacobian_det(&map);
        assert_eq!(det.constant_coefficient().coeff(0), Some(qi(1)));
        assert_eq!(det.terms().count(), 1);

        let tctx = transform_context(2);
        let psi = vec![
            MixedPolynomial::from_terms(
                &tctx,
                [(Monomial::var(3, 0), TruncatedSeries::constant(qi(2), 12))],
                12,
            ),
            MixedPolynomial::from_terms(
                &tctx,
                [(Monomial::var(3, 1), TruncatedSeries::constant(qi(1), 12))],
                12,
            ),
        ];
        let map2 = FamilyMap::new(&tctx, psi, vec![TruncatedSeries::identity(12)]).unwrap();
        let det2 = jacobian_det(&map2);
        assert_eq!(det2.constant_coefficient().coeff(0), Some(qi(2)));
    }

    #[test]
    fn family_map_validation() {
        let tctx = transform_context(1);
        // ψ with a constant term moves the origin
        let bad = MixedPolynomial::from_terms(
            &tctx,
            [(Monomial::unit(2), TruncatedSeries::monomial(qi(1), 1, 8))],
            8,
        );
        assert!(matches!(
            FamilyMap::new(&tctx, vec![bad], vec![TruncatedSeries::identity(8)]),
            Err(TransformError::PsiMovesOrigin { component: 0 })
        ));
        // degenerate linear part
        let tctx2 = transform_context(2);
        let y1 = MixedPolynomial::from_terms(
            &tctx2,
            [(Monomial::var(3, 0), TruncatedSeries::constant(qi(1), 8))],
            8,
        );
        assert!(matches!(
            FamilyMap::new(
                &tctx2,
                vec![y1.clone(), y1],
                vec![TruncatedSeries::identity(8)]
            ),
            Err(TransformError::NotLocallyInvertible)
        ));
    }

    #[test]
    fn small_fold_transform_has_unit_determinant() {
        // p = (s, s), q = (1, 1), u = 2s: v(u) = 1 = v(p) + v(q)
        let ps = vec![series(&[(1, 1)], 12), series(&[(1, 1)], 12)];
        let qs = vec![series(&[(0, 1)], 12), series(&[(0, 1)], 12)];
        let u = series(&[(1, 2)], 12);
        let lam = vec![TruncatedSeries::identity(12)];
        let ft = build_fold_transform(&ps, &qs, &u, &lam).unwrap();
        assert_eq!(ft.pivot, 0);
        // ψ1 = y1 − y2/2, ψ2 = y1 + y2/2 up to the series constants
        let det = jacobian_det(&ft.map);
        let c = det.constant_coefficient();
        assert_eq!(c.coeff(0), Some(qi(1)));
        let unit = Monomial::unit(3);
        for (m, s) in det.terms() {
            if *m == unit {
                assert_eq!(s.coeff(0), Some(qi(1)));
                assert!(s.coefficients().count() == 1);
            } else {
                panic!("extra term {m:?} = {s}");
            }
        }
        let psi1 = &ft.map.psi()[0];
        assert_eq!(psi1.coefficient(&Monomial::var(3, 1)).coeff(0), Some(q(-1, 2)));
    }

    #[test]
    fn degenerate_witness_is_rejected() {
        let ps = vec![series(&[(1, 1)], 12), series(&[(1, 1)], 12)];
        let qs = vec![series(&[(0, 1)], 12), series(&[(0, 1)], 12)];
        let u = series(&[(3, 1)], 12); // v(u) = 3 > 1
        let lam = vec![TruncatedSeries::identity(12)];
        assert_eq!(
            build_fold_transform(&ps, &qs, &u, &lam).unwrap_err(),
            TransformError::ValuationMismatch {
                vu: 3,
                vp: 1,
                vq: 0
            }
        );
    }

    #[test]
    fn truncation_starved_data_is_undetermined() {
        // u is zero to order 5 although the true inner product has v = 40
        let ps = vec![series(&[(5, 4)], 10), series(&[(5, 1)], 10)];
        let qs = vec![TruncatedSeries::zero(5), TruncatedSeries::zero(5)];
        let u = TruncatedSeries::zero(5);
        let lam = vec![TruncatedSeries::identity(10)];
        assert_eq!(
            build_fold_transform(&ps, &qs, &u, &lam).unwrap_err(),
            TransformError::UndeterminedValuation {
                which: "q".to_string()
            }
        );
    }

    #[test]
    fn pivot_reordering_is_automatic() {
        // v(p_1) = 3 > v(p_2) = 1: the second coordinate takes the pivot role
        let ps = vec![series(&[(3, 1)], 14), series(&[(1, 2)], 14)];
        let qs = vec![series(&[(2, 1)], 14), series(&[(2, 5)], 14)];
        // u = <p, q> = s^5 + 10 s^3: v = 3 = v(p) + v(q)
        let u = ps[0].mul(&qs[0]).add(&ps[1].mul(&qs[1]));
        let lam = vec![TruncatedSeries::identity(14)];
        let ft = build_fold_transform(&ps, &qs, &u, &lam).unwrap();
        assert_eq!(ft.pivot, 1);
        let det = jacobian_det(&ft.map);
        let unit = Monomial::unit(3);
        for (m, s) in det.terms() {
            assert_eq!(*m, unit);
            assert_eq!(s.coeff(0), Some(qi(1)));
            assert_eq!(s.coefficients().count(), 1);
        }
    }

    #[test]
    fn coalescing_family_transport_and_multiplier() {
        // n = 1 degenerates to the identity in y; the radial identity and
        // multiplier still hold: q = dF/dx ∘ γ, u = p·q
        let ctx = Context::new(vec!["x"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^3 - 3*t*x^2", &ctx).unwrap();
        let ps = vec![series(&[(1, 3)], 20)];
        let qs = vec![series(&[(2, 9)], 20)]; // 3x²−6tx ∘ (3s, s) = 9s²
        let u = ps[0].mul(&qs[0]);
        let lam = vec![TruncatedSeries::identity(20)];
        let ft = build_fold_transform(&ps, &qs, &u, &lam).unwrap();
        let record = verify_transported_kink(&f, &ft).unwrap();
        assert_eq!(record.pivot, 0);
        assert!(record.vanishing_orders.is_empty());
        // multiplier u/p² = 9s³·3... = (27 s³)/(9 s²) / (3s) = 3s
        assert_eq!(record.multiplier.coeff(1), Some(qi(3)));
        assert_eq!(record.multiplier.valuation().value(), Some(1));
    }

    #[test]
    fn stability_under_parameter_cubing() {
        let ctx = Context::new(vec!["x", "y", "z"], vec!["t"]).unwrap();
        let f = parse_polynomial("z^5 + t*y^6*z + y^7*x + x^15", &ctx).unwrap();
        let lambda = vec![TruncatedSeries::monomial(qi(1), 3, 40)];
        let map = FamilyMap::parameter_change(&ctx, lambda, 40).unwrap();
        // the y2-axis arc lies in the zero set of F∘Φ
        let tctx = map.context().clone();
        let arc = Arc::new(
            &tctx,
            vec![
                TruncatedSeries::zero(40),
                TruncatedSeries::identity(40),
                TruncatedSeries::zero(40),
            ],
            vec![TruncatedSeries::identity(40)],
        )
        .unwrap();
        let report = whitney_stability_check(&f, &map, &[arc]).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.agree, "{row:?}");
        assert_eq!(row.composed_bprime, LimitVerdict::Zero);
        assert_eq!(row.original_bprime, LimitVerdict::Zero);
        assert_eq!(row.composed_a, vec![LimitVerdict::Zero]);
        assert_eq!(row.original_a, vec![LimitVerdict::Zero]);
    }

    #[test]
    fn stability_under_identity_is_trivial() {
        let ctx = Context::new(vec!["x1", "x2"], vec!["t"]).unwrap();
        let f = parse_polynomial("x1^2 - x2^2", &ctx).unwrap();
        let map = FamilyMap::identity(&ctx, 24);
        let tctx = map.context().clone();
        let arc = Arc::new(
            &tctx,
            vec![TruncatedSeries::identity(24), TruncatedSeries::identity(24)],
            vec![TruncatedSeries::identity(24)],
        )
        .unwrap();
        let report = whitney_stability_check(&f, &map, &[arc]).unwrap();
        let row = &report.rows[0];
        assert!(row.agree);
        assert_eq!(row.composed_bprime, row.original_bprime);
    }
}
