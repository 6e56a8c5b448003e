//! Whitney regularity along arcs, kinks, vanishing folds, and the numeric
//! Milnor-radius search.
//!
//! The two practical Whitney conditions for a family `F(x, t)` vanishing on
//! `{0}×ℝᵖ` are limits over the zero set as `(x,t) → 0`:
//!
//! - condition (a): `(∂F/∂t_j) / ‖d_xF‖ → 0` for each parameter,
//! - condition (b′): `(Σᵢ xᵢ ∂F/∂xᵢ) / (‖x‖·‖d_xF‖) → 0`,
//!
//! and (a) together with (b′) is equivalent to Whitney's condition (b).
//! Along an analytic arc every quantity becomes a series in the arc
//! parameter, so each limit is decided exactly by comparing valuations of
//! squared norms; the limit value is carried as `c/√(d₁·d₂)` with exact
//! rationals. Verdicts are never guessed past the truncation order: a
//! comparison blocked by an unresolved valuation comes back undetermined.

use crate::arc::{evaluate_along_arc, Arc, ArcError};
use crate::minimize::{nelder_mead, NelderMeadOptions};
use crate::poly::{rational_to_f64, Polynomial};
use crate::series::{SeriesError, TruncatedSeries, Valuation};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WhitneyError {
    #[error("arc does not lie in the zero set (composition has a nonzero coefficient)")]
    ArcNotInZeroSet,
    #[error("arc lies in the small stratum to truncation order (all x-components vanish)")]
    ArcInSmallStratum,
    #[error("undetermined at the current truncation order: {detail}")]
    Undetermined { detail: String },
    #[error("point is the origin, where kinks are undefined")]
    PointIsOrigin,
    #[error("component #{component} does not vanish at the point")]
    PointNotOnFiber { component: usize },
    #[error("point is a singular point of the map (kink undefined)")]
    SingularPoint,
    #[error("control function is critical at the point")]
    RhoCritical,
    #[error("control function must involve only x-variables")]
    RhoUsesParameters,
    #[error("polynomials must share one parameter-free context")]
    ContextMismatch,
    #[error(transparent)]
    Arc(#[from] ArcError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVerdict {
    Zero,
    FiniteNonzero,
    Infinite,
    Undetermined,
}

impl std::fmt::Display for LimitVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitVerdict::Zero => write!(f, "zero"),
            LimitVerdict::FiniteNonzero => write!(f, "finite_nonzero"),
            LimitVerdict::Infinite => write!(f, "infinite"),
            LimitVerdict::Undetermined => write!(f, "undetermined"),
        }
    }
}

/// Exact limit `c/√(d₁·d₂)` of a normalized quotient, with `d₁, d₂ > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitValue {
    pub numerator: BigRational,
    pub radicand1: BigRational,
    pub radicand2: BigRational,
}

impl LimitValue {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.numerator)
            / (rational_to_f64(&self.radicand1).sqrt() * rational_to_f64(&self.radicand2).sqrt())
    }
}

impl std::fmt::Display for LimitValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/sqrt({}*{})",
            self.numerator, self.radicand1, self.radicand2
        )
    }
}

/// Outcome of one Whitney limit along an arc.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitResult {
    pub verdict: LimitVerdict,
    pub numerator_valuation: Valuation,
    /// Valuations of the squared denominators: one entry for condition (a),
    /// two (`‖x‖²`, `‖d_xF‖²`) for condition (b′).
    pub denominator_valuations: Vec<Valuation>,
    /// Exact limit when the verdict is `FiniteNonzero`.
    pub limit: Option<LimitValue>,
    /// Float approximation of the limit (0 for `Zero`).
    pub float_approx: Option<f64>,
}

impl LimitResult {
    /// `(2·v(num), Σ v(den²))` when every valuation involved is certified.
    pub fn valuation_comparison(&self) -> Option<(u64, u64)> {
        let num = self.numerator_valuation.value()?;
        let mut sum = 0;
        for v in &self.denominator_valuations {
            sum += v.value()?;
        }
        Some((2 * num, sum))
    }
}

/// Decide `num / √(Π densᵢ)` as `s → 0⁺` from valuations. The `dens` are
/// squared norms, so their leading coefficients are positive whenever they
/// are nonzero.
pub(crate) fn limit_from_series(num: &TruncatedSeries, dens: &[&TruncatedSeries]) -> LimitResult {
    let den_vals: Vec<Valuation> = dens.iter().map(|d| d.valuation()).collect();
    let num_val = num.valuation();
    if den_vals.iter().any(|v| !v.is_certified()) {
        return LimitResult {
            verdict: LimitVerdict::Undetermined,
            numerator_valuation: num_val,
            denominator_valuations: den_vals,
            limit: None,
            float_approx: None,
        };
    }
    let sum_vd: u64 = den_vals.iter().map(|v| v.value().unwrap()).sum();
    let make = |verdict, limit: Option<LimitValue>, float_approx| LimitResult {
        verdict,
        numerator_valuation: num_val.clone(),
        denominator_valuations: den_vals.clone(),
        limit,
        float_approx,
    };
    match &num_val {
        Valuation::Finite { value, leading } => match (2 * value).cmp(&sum_vd) {
            std::cmp::Ordering::Greater => make(LimitVerdict::Zero, None, Some(0.0)),
            std::cmp::Ordering::Equal => {
                let d1 = den_vals[0].leading().unwrap().clone();
                let d2 = den_vals
                    .get(1)
                    .map(|v| v.leading().unwrap().clone())
                    .unwrap_or_else(|| BigRational::from_integer(1.into()));
                let value = LimitValue {
                    numerator: leading.clone(),
                    radicand1: d1,
                    radicand2: d2,
                };
                let float = value.to_f64();
                make(LimitVerdict::FiniteNonzero, Some(value), Some(float))
            }
            std::cmp::Ordering::Less => {
                let sign = if leading.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                };
                make(LimitVerdict::Infinite, None, Some(sign))
            }
        },
        Valuation::ZeroToOrder { order } => {
            if 2 * order > sum_vd {
                make(LimitVerdict::Zero, None, Some(0.0))
            } else {
                make(LimitVerdict::Undetermined, None, None)
            }
        }
    }
}

fn sum_of_squares(series: &[TruncatedSeries]) -> TruncatedSeries {
    let order = series.iter().map(|s| s.order()).min().unwrap_or(1);
    let mut acc = TruncatedSeries::zero(order);
    for s in series {
        acc = acc.add(&s.mul(s));
    }
    acc
}

fn arc_preconditions(family: &Polynomial, arc: &Arc) -> Result<(), WhitneyError> {
    let residual = evaluate_along_arc(family, arc)?;
    if !residual.is_zero_to_order() {
        return Err(WhitneyError::ArcNotInZeroSet);
    }
    if arc.x_components().iter().all(|c| c.is_zero_to_order()) {
        return Err(WhitneyError::ArcInSmallStratum);
    }
    Ok(())
}

/// Condition (a) limits along an arc in the zero set, one per parameter.
pub fn condition_a_along_arc(
    family: &Polynomial,
    arc: &Arc,
) -> Result<Vec<LimitResult>, WhitneyError> {
    arc_preconditions(family, arc)?;
    let n = family.context().x_count();
    let p = family.context().param_count();
    let grad: Vec<TruncatedSeries> = (0..n)
        .map(|i| evaluate_along_arc(&family.partial_derivative(i), arc))
        .collect::<Result<_, _>>()?;
    let den = sum_of_squares(&grad);
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let num = evaluate_along_arc(&family.partial_derivative(n + j), arc)?;
        out.push(limit_from_series(&num, &[&den]));
    }
    Ok(out)
}

/// Condition (b′) limit along an arc in the zero set.
pub fn condition_bprime_along_arc(
    family: &Polynomial,
    arc: &Arc,
) -> Result<LimitResult, WhitneyError> {
    arc_preconditions(family, arc)?;
    let n = family.context().x_count();
    let grad: Vec<TruncatedSeries> = (0..n)
        .map(|i| evaluate_along_arc(&family.partial_derivative(i), arc))
        .collect::<Result<_, _>>()?;
    let mut num = TruncatedSeries::zero(arc.order());
    for (xi, gi) in arc.x_components().iter().zip(grad.iter()) {
        num = num.add(&xi.mul(gi));
    }
    let den1 = sum_of_squares(arc.x_components());
    let den2 = sum_of_squares(&grad);
    Ok(limit_from_series(&num, &[&den1, &den2]))
}

/// Which Whitney quotient to evaluate numerically.
#[derive(Debug, Clone, Copy)]
pub enum QuotientKind {
    ConditionA { param_index: usize },
    ConditionBPrime,
}

/// Float value of a Whitney quotient at a concrete arc parameter, for
/// spot-checking symbolic verdicts. Norm factors are square-rooted
/// separately to stay clear of `f64` underflow.
pub fn quotient_f64(family: &Polynomial, arc: &Arc, kind: QuotientKind, s: f64) -> f64 {
    let point = arc.eval_f64(s);
    let n = family.context().x_count();
    let grad_norm = (0..n)
        .map(|i| family.partial_derivative(i).eval_f64(&point).powi(2))
        .sum::<f64>()
        .sqrt();
    match kind {
        QuotientKind::ConditionA { param_index } => {
            let num = family.partial_derivative(n + param_index).eval_f64(&point);
            num / grad_norm
        }
        QuotientKind::ConditionBPrime => {
            let num: f64 = (0..n)
                .map(|i| point[i] * family.partial_derivative(i).eval_f64(&point))
                .sum();
            let x_norm = point[..n].iter().map(|x| x * x).sum::<f64>().sqrt();
            num / (x_norm * grad_norm)
        }
    }
}

/// Kink data at a rational point of a fibre.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KinkAtPoint {
    /// Proportionality factor `d_xf = λ·d_xρ`; only defined for k = 1.
    pub lambda: Option<BigRational>,
}

fn rational_matrix_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pivot);
        let lead = m[row][col].clone();
        for r in row + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &lead;
            for c in col..cols {
                let sub = &factor * &m[row][c];
                m[r][c] -= sub;
            }
        }
        row += 1;
        rank += 1;
        if row == m.len() {
            break;
        }
    }
    rank
}

fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigRational::zero();
    for (j, top) in m[0].iter().enumerate() {
        if top.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = top * &rational_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn column_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, start: usize, n: usize, k: usize) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(out, current, i + 1, n, k);
            current.pop();
        }
    }
    rec(&mut out, &mut current, 0, n, k);
    out
}

/// Test whether a rational point of the fibre `f⁻¹(0)` is a ρ-kink.
///
/// For one component the test is exact proportionality `d_xf = λ·d_xρ`
/// with `λ ≠ 0`; in general it is the vanishing of every `(k+1)×(k+1)`
/// minor of the rows `(d_xf₁,…,d_xf_k, d_xρ)`.
pub fn kink_test_point(
    components: &[Polynomial],
    rho: &Polynomial,
    point: &[BigRational],
) -> Result<Option<KinkAtPoint>, WhitneyError> {
    let ctx = components
        .first()
        .map(|f| f.context())
        .ok_or(WhitneyError::ContextMismatch)?;
    if ctx.param_count() != 0
        || components.iter().any(|f| f.context() != ctx)
        || rho.context() != ctx
    {
        return Err(WhitneyError::ContextMismatch);
    }
    let n = ctx.x_count();
    if point.iter().all(|v| v.is_zero()) {
        return Err(WhitneyError::PointIsOrigin);
    }
    for (i, f) in components.iter().enumerate() {
        if !f.eval_rational(point).is_zero() {
            return Err(WhitneyError::PointNotOnFiber { component: i });
        }
    }
    let jac: Vec<Vec<BigRational>> = components
        .iter()
        .map(|f| (0..n).map(|i| f.partial_derivative(i).eval_rational(point)).collect())
        .collect();
    let rho_grad: Vec<BigRational> = (0..n)
        .map(|i| rho.partial_derivative(i).eval_rational(point))
        .collect();
    if rho_grad.iter().all(|v| v.is_zero()) {
        return Err(WhitneyError::RhoCritical);
    }
    let k = components.len();
    if rational_matrix_rank(&jac) < k {
        return Err(WhitneyError::SingularPoint);
    }
    let mut stacked = jac.clone();
    stacked.push(rho_grad.clone());
    for subset in column_subsets(n, k + 1) {
        let sub: Vec<Vec<BigRational>> = stacked
            .iter()
            .map(|row| subset.iter().map(|&c| row[c].clone()).collect())
            .collect();
        if !rational_det(&sub).is_zero() {
            return Ok(None);
        }
    }
    if k == 1 {
        let i = rho_grad.iter().position(|v| !v.is_zero()).unwrap();
        let lambda = &jac[0][i] / &rho_grad[i];
        if lambda.is_zero() {
            return Ok(None);
        }
        Ok(Some(KinkAtPoint {
            lambda: Some(lambda),
        }))
    } else {
        Ok(Some(KinkAtPoint { lambda: None }))
    }
}

/// Which vanishing-fold requirement failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathFailure {
    /// `F ∘ γ` has a nonzero coefficient in some component.
    LeavesZeroSet { component: usize },
    /// Some `(k+1)×(k+1)` minor along the arc is certifiably nonzero.
    KinkFails { witness_minor: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldVerdict {
    pub is_fold: bool,
    pub failing: Option<PathFailure>,
    /// `λ(s)` with `d_xf∘γ = λ·d_xρ∘γ`, for one-component families.
    pub multiplier: Option<TruncatedSeries>,
}

use crate::series::det_series_matrix as series_det;

/// Decide whether an arc is a ρ-vanishing fold of the family.
///
/// Checks, in order: the arc stays in the zero set; `|x(s)|` and `|t(s)|`
/// are positive for small `s > 0` (leading coefficients); and the kink
/// condition along the arc — every `(k+1)×(k+1)` minor of
/// `(d_xf₁,…,d_xf_k, d_xρ)∘γ` vanishes identically to the available order,
/// with a certified nonzero multiplier `λ(s)` when k = 1. Questions the
/// truncation order cannot settle surface as [`WhitneyError::Undetermined`],
/// never as a silent pass.
pub fn vanishing_fold_test(
    components: &[Polynomial],
    rho: &Polynomial,
    arc: &Arc,
) -> Result<FoldVerdict, WhitneyError> {
    let ctx = components
        .first()
        .map(|f| f.context())
        .ok_or(WhitneyError::ContextMismatch)?;
    if components.iter().any(|f| f.context() != ctx) || rho.context() != ctx {
        return Err(WhitneyError::ContextMismatch);
    }
    for (m, _) in rho.terms() {
        if m.0[ctx.x_count()..].iter().any(|&e| e > 0) {
            return Err(WhitneyError::RhoUsesParameters);
        }
    }
    let n = ctx.x_count();
    let k = components.len();

    // path condition 2: |x(s)| > 0 and |t(s)| > 0 for small s > 0
    if !sum_of_squares(arc.x_components()).valuation().is_certified() {
        return Err(WhitneyError::Undetermined {
            detail: "every x-component is zero to the truncation order".into(),
        });
    }
    if ctx.param_count() > 0
        && !sum_of_squares(arc.t_components()).valuation().is_certified()
    {
        return Err(WhitneyError::Undetermined {
            detail: "every t-component is zero to the truncation order".into(),
        });
    }

    // path condition 3: the arc lies in the zero set
    for (i, f) in components.iter().enumerate() {
        if !evaluate_along_arc(f, arc)?.is_zero_to_order() {
            return Ok(FoldVerdict {
                is_fold: false,
                failing: Some(PathFailure::LeavesZeroSet { component: i }),
                multiplier: None,
            });
        }
    }

    // gradients along the arc
    let rows: Vec<Vec<TruncatedSeries>> = components
        .iter()
        .map(|f| {
            (0..n)
                .map(|i| evaluate_along_arc(&f.partial_derivative(i), arc))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let rho_row: Vec<TruncatedSeries> = (0..n)
        .map(|i| evaluate_along_arc(&rho.partial_derivative(i), arc))
        .collect::<Result<_, _>>()?;

    for (i, row) in rows.iter().enumerate() {
        if row.iter().all(|s| s.is_zero_to_order()) {
            return Err(WhitneyError::Undetermined {
                detail: format!("d_xf_{} vanishes along the arc to the truncation order", i + 1),
            });
        }
    }
    if rho_row.iter().all(|s| s.is_zero_to_order()) {
        return Err(WhitneyError::Undetermined {
            detail: "d_xρ vanishes along the arc to the truncation order".into(),
        });
    }

    // kink condition: all (k+1)×(k+1) minors vanish along the arc
    let mut stacked = rows.clone();
    stacked.push(rho_row.clone());
    for subset in column_subsets(n, k + 1) {
        let sub: Vec<Vec<TruncatedSeries>> = stacked
            .iter()
            .map(|row| subset.iter().map(|&c| row[c].clone()).collect())
            .collect();
        if !series_det(&sub).is_zero_to_order() {
            return Ok(FoldVerdict {
                is_fold: false,
                failing: Some(PathFailure::KinkFails {
                    witness_minor: subset,
                }),
                multiplier: None,
            });
        }
    }

    // multiplier λ(s) for one-component families
    let multiplier = if k == 1 {
        let pivot = (0..n)
            .filter(|&i| rho_row[i].valuation().is_certified())
            .min_by_key(|&i| rho_row[i].valuation().value().unwrap())
            .expect("certified component exists");
        let lambda = rows[0][pivot]
            .div(&rho_row[pivot])
            .map_err(|e| WhitneyError::Undetermined {
                detail: format!("multiplier ratio not resolvable: {e}"),
            })?;
        if !lambda.valuation().is_certified() {
            return Err(WhitneyError::Undetermined {
                detail: "kink multiplier is zero to the truncation order".into(),
            });
        }
        Some(lambda)
    } else {
        None
    };

    Ok(FoldVerdict {
        is_fold: true,
        failing: None,
        multiplier,
    })
}

/// Options for the numeric kink search.
#[derive(Debug, Clone)]
pub struct RadiusSearchOptions {
    pub epsilon: f64,
    pub budget: usize,
    pub seed: u64,
    pub residual_tolerance: f64,
    /// Candidates with `ρ` below this are discarded as origin artifacts.
    pub rho_floor: f64,
}

impl RadiusSearchOptions {
    pub fn new(epsilon: f64) -> Self {
        RadiusSearchOptions {
            epsilon,
            budget: 200,
            seed: 0,
            residual_tolerance: 1e-8,
            rho_floor: (1e-6 * epsilon).max(1e-10),
        }
    }
}

/// A numeric kink candidate. Never certified: exact verdicts only come
/// from the symbolic tests.
#[derive(Debug, Clone)]
pub struct KinkCandidate {
    pub point: Vec<f64>,
    pub rho: f64,
    pub residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct RadiusSearchOutcome {
    pub candidates: Vec<KinkCandidate>,
    pub starts: usize,
    pub note: String,
}

/// Multistart local minimization of a scale-normalized kink residual over
/// `{ρ < ε}`.
///
/// The residual at `x` is `Σⱼ (fⱼ/(‖x‖·‖∇fⱼ‖))²` plus the normalized Gram
/// determinant of the unit rows `(∇f₁,…,∇f_k, ∇ρ)` — zero exactly at a
/// kink, scale-free so one tolerance works at every distance from the
/// origin. Starting points are seed-indexed, so the outcome is
/// reproducible; results are heuristic candidates, smallest ρ first.
pub fn radius_search(
    components: &[Polynomial],
    rho: &Polynomial,
    opts: &RadiusSearchOptions,
) -> Result<RadiusSearchOutcome, WhitneyError> {
    let ctx = components
        .first()
        .map(|f| f.context())
        .ok_or(WhitneyError::ContextMismatch)?;
    if ctx.param_count() != 0
        || components.iter().any(|f| f.context() != ctx)
        || rho.context() != ctx
    {
        return Err(WhitneyError::ContextMismatch);
    }
    let n = ctx.x_count();
    let grads: Vec<Vec<Polynomial>> = components.iter().map(|f| f.x_gradient()).collect();
    let rho_grad: Vec<Polynomial> = rho.x_gradient();

    let gram_ratio = |rows: &[Vec<f64>]| -> f64 {
        // det of the Gram matrix of unit rows: in [0,1], zero iff dependent
        let m = rows.len();
        let mut g = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                g[i][j] = rows[i].iter().zip(rows[j].iter()).map(|(a, b)| a * b).sum();
            }
        }
        // LU determinant
        let mut det = 1.0;
        for c in 0..m {
            let mut pivot = c;
            for r in c + 1..m {
                if g[r][c].abs() > g[pivot][c].abs() {
                    pivot = r;
                }
            }
            if g[pivot][c] == 0.0 {
                return 0.0;
            }
            if pivot != c {
                g.swap(pivot, c);
                det = -det;
            }
            det *= g[c][c];
            for r in c + 1..m {
                let f = g[r][c] / g[c][c];
                for cc in c..m {
                    g[r][cc] -= f * g[c][cc];
                }
            }
        }
        det.max(0.0)
    };

    let residual_at = |x: &[f64]| -> f64 {
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut acc = 0.0;
        let mut unit_rows: Vec<Vec<f64>> = Vec::with_capacity(components.len() + 1);
        for (f, grad) in components.iter().zip(grads.iter()) {
            let fv = f.eval_f64(x);
            let g: Vec<f64> = grad.iter().map(|p| p.eval_f64(x)).collect();
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < 1e-120 || norm_x < 1e-120 {
                return 1.0 + fv * fv;
            }
            acc += (fv / (norm_x * gn)).powi(2);
            unit_rows.push(g.iter().map(|v| v / gn).collect());
        }
        let rg: Vec<f64> = rho_grad.iter().map(|p| p.eval_f64(x)).collect();
        let rgn = rg.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rgn < 1e-120 {
            return acc + 1.0;
        }
        unit_rows.push(rg.iter().map(|v| v / rgn).collect());
        acc + gram_ratio(&unit_rows)
    };

    let objective = |x: &[f64]| -> f64 {
        let r = rho.eval_f64(x);
        let wall = ((r - opts.epsilon).max(0.0) / opts.epsilon.max(1e-12)).powi(2) * 10.0;
        residual_at(x) + wall
    };

    let radius = opts.epsilon.max(1e-12).sqrt() * 1.5;
    let minima: Vec<Option<Vec<f64>>> = (0..opts.budget)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for _attempt in 0..32 {
                let start: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
                if rho.eval_f64(&start) < opts.epsilon {
                    let found = nelder_mead(objective, &start, &NelderMeadOptions::default());
                    // the wall term is nonnegative, so this screen never
                    // drops a point that would survive the ρ filter below
                    if !found.value.is_finite() || found.value >= opts.residual_tolerance {
                        return None;
                    }
                    return Some(found.point);
                }
            }
            None
        })
        .collect();

    let mut accepted: Vec<KinkCandidate> = Vec::new();
    for point in minima.into_iter().flatten() {
        let residual = residual_at(&point);
        if !residual.is_finite() || residual >= opts.residual_tolerance {
            continue;
        }
        let r = rho.eval_f64(&point);
        if !(opts.rho_floor..opts.epsilon).contains(&r) {
            continue;
        }
        let grads_ok = grads.iter().all(|grad| {
            grad.iter().map(|p| p.eval_f64(&point).powi(2)).sum::<f64>().sqrt() > 1e-10
        });
        let rho_ok = rho_grad
            .iter()
            .map(|p| p.eval_f64(&point).powi(2))
            .sum::<f64>()
            .sqrt()
            > 1e-10;
        if !grads_ok || !rho_ok {
            continue;
        }
        // merge with an existing cluster if closer than the dedupe radius
        let mut merged = false;
        for c in accepted.iter_mut() {
            let dist: f64 = c
                .point
                .iter()
                .zip(point.iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = 1e-5 * (1.0 + c.point.iter().map(|v| v * v).sum::<f64>().sqrt());
            if dist < scale {
                if residual < c.residual {
                    c.point = point.clone();
                    c.rho = r;
                    c.residual = residual;
                }
                merged = true;
                break;
            }
        }
        if !merged {
            accepted.push(KinkCandidate {
                point,
                rho: r,
                residual,
                certified: false,
            });
        }
    }
    accepted.sort_by(|a, b| {
        a.rho
            .partial_cmp(&b.rho)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.point.partial_cmp(&b.point).unwrap_or(std::cmp::Ordering::Equal))
    });
    let note = if accepted.is_empty() {
        "no kink found — not a proof".to_string()
    } else {
        format!("{} non-certified candidate(s)", accepted.len())
    };
    Ok(RadiusSearchOutcome {
        candidates: accepted,
        starts: opts.budget,
        note,
    })
}
