//! Milnor numbers of isolated-singularity germs.
//!
//! Two routes are provided. For a quasihomogeneous germ of type
//! `(w₁,…,wₙ; D)` the closed form `μ = ∏ (D−wᵢ)/wᵢ` is exact and instant.
//! For an arbitrary polynomial germ, [`milnor_local`] computes the dimension
//! of the local algebra `𝒪ₙ/(∂f/∂x₁,…,∂f/∂xₙ)` by degreewise linear algebra
//! in the truncated ring `ℚ[x]/m^{M+1}`, certifying the truncation with the
//! Nakayama-style saturation `m^M ⊆ J + m^{M+1}`. Once that saturation
//! holds at some degree `M`, the ideal contains `m^M` locally and the
//! truncated dimension equals the Milnor number; no standard-basis
//! machinery is needed at this scale.
//!
//! Coefficients are rational throughout, so the computed dimension is the
//! algebraic Milnor number (it equals the complex one after base change).

use crate::poly::{Polynomial, WeightSystem};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MilnorError {
    #[error("weighted formula needs D > w_i for every weight")]
    DegenerateWeights,
    #[error("weighted formula produced the non-integer {value} (inconsistent weight data)")]
    NonIntegerFormula { value: String },
    #[error("germ must not involve family parameters; specialize them first")]
    ParameterVariables,
    #[error("germ does not vanish at the origin")]
    NonzeroConstantTerm,
    #[error(
        "no Nakayama certificate up to degree {cap}; truncated dimensions were {staircase:?} \
         (non-isolated singularity, or raise the cap)"
    )]
    CertificateNotReached { cap: usize, staircase: Vec<usize> },
    #[error("family must have exactly one parameter, found {got}")]
    FamilyParameterCount { got: usize },
    #[error("sample #{index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<MilnorError>,
    },
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilnorMethod {
    WeightedFormula,
    LocalAlgebra,
}

impl std::fmt::Display for MilnorMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MilnorMethod::WeightedFormula => write!(f, "weighted-formula"),
            MilnorMethod::LocalAlgebra => write!(f, "local-algebra"),
        }
    }
}

/// Witness that `m^M ⊆ J + m^{M+1}` was verified at `degree = M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NakayamaCertificate {
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorResult {
    pub value: u64,
    pub method: MilnorMethod,
    /// Present exactly when the value came from the local-algebra route.
    pub certificate: Option<NakayamaCertificate>,
}

/// `μ = ∏ (D−wᵢ)/wᵢ` for a quasihomogeneous germ of the given type.
pub fn milnor_weighted(w: &WeightSystem) -> Result<u64, MilnorError> {
    let d = w.degree();
    let mut acc = BigRational::one();
    for &wi in w.weights() {
        if d <= wi {
            return Err(MilnorError::DegenerateWeights);
        }
        acc *= BigRational::new((d - wi).into(), wi.into());
    }
    if !acc.is_integer() {
        return Err(MilnorError::NonIntegerFormula {
            value: acc.to_string(),
        });
    }
    use num_traits::ToPrimitive;
    acc.to_integer()
        .to_u64()
        .ok_or(MilnorError::NonIntegerFormula {
            value: acc.to_string(),
        })
}

/// Sorted sparse row over monomial indices.
type Row = Vec<(usize, BigRational)>;

/// Forward elimination basis keyed by pivot column; pivot coefficients are 1.
struct Echelon {
    rows: BTreeMap<usize, Row>,
}

impl Echelon {
    fn new() -> Self {
        Echelon {
            rows: BTreeMap::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `row` against the basis; insert the remainder if nonzero.
    /// Returns whether the rank grew.
    fn insert(&mut self, mut row: Row) -> bool {
        loop {
            let Some(&(col, ref c)) = row.first() else {
                return false;
            };
            let lead = c.clone();
            let Some(pivot) = self.rows.get(&col) else {
                for (_, v) in row.iter_mut() {
                    *v = &*v / &lead;
                }
                self.rows.insert(col, row);
                return true;
            };
            row = row_sub_scaled(&row, pivot, lead);
        }
    }
}

/// `a − λ·b` for sorted sparse rows.
fn row_sub_scaled(a: &Row, b: &Row, lambda: BigRational) -> Row {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = va - &lambda * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, -(&lambda * vb)));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, -(&lambda * vb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// All exponent vectors with total degree ≤ `level`, graded-lex ascending,
/// together with the index lookup.
fn monomial_table(n: usize, level: usize) -> (Vec<Vec<u32>>, BTreeMap<Vec<u32>, usize>) {
    fn rec(all: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, var: usize, remaining: u32) {
        if var + 1 == current.len() {
            current[var] = remaining;
            all.push(current.clone());
            current[var] = 0;
            return;
        }
        for e in 0..=remaining {
            current[var] = e;
            rec(all, current, var + 1, remaining - e);
        }
        current[var] = 0;
    }
    let mut all: Vec<Vec<u32>> = Vec::new();
    let mut current = vec![0u32; n];
    for d in 0..=level as u32 {
        if n == 0 {
            if d == 0 {
                all.push(vec![]);
            }
            continue;
        }
        rec(&mut all, &mut current, 0, d);
    }
    all.sort_by(|a, b| {
        let da: u64 = a.iter().map(|&e| e as u64).sum();
        let db: u64 = b.iter().map(|&e| e as u64).sum();
        da.cmp(&db).then_with(|| a.cmp(b))
    });
    let index = all
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    (all, index)
}

fn count_monomials_of_degree(n: usize, d: usize) -> usize {
    // C(d + n - 1, n - 1)
    if n == 0 {
        return usize::from(d == 0);
    }
    let mut acc: u128 = 1;
    for k in 1..n {
        acc = acc * (d + k) as u128 / k as u128;
    }
    acc as usize
}

/// Rank of the image of the Jacobian ideal in `ℚ[x]/m^{level+1}`, spanned by
/// the truncations of all monomial multiples of the partial derivatives.
fn jacobian_image_rank(partials: &[Vec<(Vec<u32>, BigRational)>], n: usize, level: usize) -> usize {
    let (monomials, index) = monomial_table(n, level);
    let mut ech = Echelon::new();
    for terms in partials {
        if terms.is_empty() {
            continue;
        }
        let ord: u64 = terms
            .iter()
            .map(|(m, _)| m.iter().map(|&e| e as u64).sum())
            .min()
            .unwrap();
        if ord > level as u64 {
            continue;
        }
        let beta_max = level as u64 - ord;
        for beta in &monomials {
            let bd: u64 = beta.iter().map(|&e| e as u64).sum();
            if bd > beta_max {
                break;
            }
            let mut row: Row = Vec::new();
            for (alpha, c) in terms {
                let gamma: Vec<u32> =
                    beta.iter().zip(alpha.iter()).map(|(&b, &a)| b + a).collect();
                let gd: u64 = gamma.iter().map(|&e| e as u64).sum();
                if gd <= level as u64 {
                    row.push((index[&gamma], c.clone()));
                }
            }
            if row.is_empty() {
                continue;
            }
            row.sort_by_key(|(i, _)| *i);
            ech.insert(row);
        }
    }
    ech.rank()
}

fn partials_as_terms(f: &Polynomial) -> Vec<Vec<(Vec<u32>, BigRational)>> {
    f.x_gradient()
        .iter()
        .map(|p| {
            p.terms()
                .map(|(m, c)| (m.0.clone(), c.clone()))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn check_local_preconditions(f: &Polynomial) -> Result<(), MilnorError> {
    if f.context().param_count() > 0 {
        return Err(MilnorError::ParameterVariables);
    }
    if !f.constant_term().is_zero() {
        return Err(MilnorError::NonzeroConstantTerm);
    }
    Ok(())
}

/// Dimension of `ℚ[x]/(J + m^{level+1})` — the truncated quotient at one
/// level, without any certificate. Exposed so the certified answer can be
/// cross-checked at higher levels.
pub fn local_quotient_dimension(f: &Polynomial, level: usize) -> Result<usize, MilnorError> {
    check_local_preconditions(f)?;
    let n = f.context().x_count();
    let partials = partials_as_terms(f);
    let total: usize = (0..=level).map(|d| count_monomials_of_degree(n, d)).sum();
    Ok(total - jacobian_image_rank(&partials, n, level))
}

/// Milnor number by local-algebra dimension with a Nakayama certificate.
///
/// For increasing `M` the span of the truncated multiples
/// `{x^β·∂f/∂xᵢ : degree ≤ M}` is row-reduced inside `ℚ[x]/m^{M+1}`. The
/// saturation `m^M ⊆ J + m^{M+1}` holds exactly when the rank grows by the
/// full count of degree-`M` monomials from level `M−1` to level `M`; at the
/// first such `M` the quotient dimension is frozen and returned.
pub fn milnor_local(f: &Polynomial, degree_cap: usize) -> Result<MilnorResult, MilnorError> {
    check_local_preconditions(f)?;
    let n = f.context().x_count();
    let partials = partials_as_terms(f);
    let mut prev_rank = 0usize;
    let mut total_monomials = 0usize;
    let mut staircase = Vec::new();
    for m in 0..=degree_cap {
        total_monomials += count_monomials_of_degree(n, m);
        let rank = jacobian_image_rank(&partials, n, m);
        if rank - prev_rank == count_monomials_of_degree(n, m) {
            return Ok(MilnorResult {
                value: (total_monomials - rank) as u64,
                method: MilnorMethod::LocalAlgebra,
                certificate: Some(NakayamaCertificate { degree: m }),
            });
        }
        staircase.push(total_monomials - rank);
        prev_rank = rank;
    }
    Err(MilnorError::CertificateNotReached {
        cap: degree_cap,
        staircase,
    })
}

/// Default truncation cap: `2μ̂ + 4` when a weighted guess `μ̂` exists,
/// otherwise 50.
pub fn default_degree_cap(weighted_guess: Option<u64>) -> usize {
    match weighted_guess {
        Some(mu) => (2 * mu + 4) as usize,
        None => 50,
    }
}

/// How the Milnor number behaves across the sampled parameter values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constancy {
    Constant,
    /// μ at the `t = 0` sample differs from the common value elsewhere.
    JumpAtZero { at_zero: u64, generic: u64 },
    Varying,
}

#[derive(Debug, Clone)]
pub struct MuProfile {
    pub results: Vec<MilnorResult>,
    pub constancy: Constancy,
}

/// Milnor number at each sampled parameter value of a one-parameter family.
///
/// When a weight system is supplied and a specialisation is
/// quasihomogeneous for it, the closed form is used; otherwise the
/// local-algebra route runs. Samples are evaluated concurrently and merged
/// in input order.
pub fn mu_profile(
    family: &Polynomial,
    samples: &[BigRational],
    degree_cap: usize,
    weights: Option<&WeightSystem>,
) -> Result<MuProfile, MilnorError> {
    if family.context().param_count() != 1 {
        return Err(MilnorError::FamilyParameterCount {
            got: family.context().param_count(),
        });
    }
    let results: Vec<MilnorResult> = samples
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            let wrap = |e: MilnorError| MilnorError::AtSample {
                index,
                source: Box::new(e),
            };
            let fibre = family
                .specialize_parameters(std::slice::from_ref(t))
                .map_err(|e| wrap(e.into()))?;
            if let Some(w) = weights {
                if fibre.is_quasihomogeneous(w) {
                    let value = milnor_weighted(w).map_err(wrap)?;
                    return Ok(MilnorResult {
                        value,
                        method: MilnorMethod::WeightedFormula,
                        certificate: None,
                    });
                }
            }
            milnor_local(&fibre, degree_cap).map_err(wrap)
        })
        .collect::<Result<_, _>>()?;

    let values: Vec<u64> = results.iter().map(|r| r.value).collect();
    let constancy = classify(samples, &values);
    Ok(MuProfile { results, constancy })
}

fn classify(samples: &[BigRational], values: &[u64]) -> Constancy {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return Constancy::Constant;
    }
    if let Some(zi) = samples.iter().position(|s| s.is_zero()) {
        let others: Vec<u64> = values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != zi)
            .map(|(_, &v)| v)
            .collect();
        if !others.is_empty() && others.windows(2).all(|w| w[0] == w[1]) && others[0] != values[zi]
        {
            return Constancy::JumpAtZero {
                at_zero: values[zi],
                generic: others[0],
            };
        }
    }
    Constancy::Varying
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Context;
    use crate::qi;
    use crate::text::parse_polynomial;

    #[test]
    fn weighted_formula_reference_values() {
        assert_eq!(
            milnor_weighted(&WeightSystem::new(vec![1, 2, 3], 15).unwrap()).unwrap(),
            364
        );
        assert_eq!(
            milnor_weighted(&WeightSystem::new(vec![3, 2], 15).unwrap()).unwrap(),
            26
        );
        assert_eq!(
            milnor_weighted(&WeightSystem::new(vec![8, 5], 40).unwrap()).unwrap(),
            28
        );
        assert_eq!(
            milnor_weighted(&WeightSystem::new(vec![1, 1, 1, 1], 2).unwrap()).unwrap(),
            1
        );
    }

    #[test]
    fn weighted_formula_error_paths() {
        let w = WeightSystem::new(vec![2, 2], 2).unwrap();
        assert_eq!(milnor_weighted(&w), Err(MilnorError::DegenerateWeights));
        let w = WeightSystem::new(vec![2, 3], 7).unwrap();
        assert!(matches!(
            milnor_weighted(&w),
            Err(MilnorError::NonIntegerFormula { .. })
        ));
    }

    #[test]
    fn morse_point_has_mu_one() {
        let ctx = Context::new(vec!["x", "y"], vec![]).unwrap();
        let f = parse_polynomial("x^2 + y^2", &ctx).unwrap();
        let r = milnor_local(&f, 10).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.method, MilnorMethod::LocalAlgebra);
        assert_eq!(r.certificate, Some(NakayamaCertificate { degree: 1 }));
    }

    #[test]
    fn univariate_cusp() {
        let ctx = Context::new(vec!["x"], vec![]).unwrap();
        let f = parse_polynomial("x^3", &ctx).unwrap();
        assert_eq!(milnor_local(&f, 10).unwrap().value, 2);
    }

    #[test]
    fn higher_order_tail_does_not_disturb() {
        // locally (x^2): the x^5 tail must be absorbed by the truncation
        let ctx = Context::new(vec!["x"], vec![]).unwrap();
        let f = parse_polynomial("x^3 + x^5", &ctx).unwrap();
        assert_eq!(milnor_local(&f, 10).unwrap().value, 2);
    }

    #[test]
    fn section_leading_term_matches_weighted() {
        let ctx = Context::new(vec!["x", "y"], vec![]).unwrap();
        let f = parse_polynomial("x^5 + x*y^6", &ctx).unwrap();
        let r = milnor_local(&f, 56).unwrap();
        assert_eq!(r.value, 26);
        assert_eq!(
            r.value,
            milnor_weighted(&WeightSystem::new(vec![3, 2], 15).unwrap()).unwrap()
        );
        assert!(r.certificate.is_some());
    }

    #[test]
    fn smooth_germ_has_mu_zero() {
        let ctx = Context::new(vec!["x", "y"], vec![]).unwrap();
        let f = parse_polynomial("x + x^2 + y^3", &ctx).unwrap();
        let r = milnor_local(&f, 10).unwrap();
        assert_eq!(r.value, 0);
    }

    #[test]
    fn non_isolated_singularity_is_reported() {
        let ctx = Context::new(vec!["x", "y"], vec![]).unwrap();
        let f = parse_polynomial("x^2*y^2", &ctx).unwrap();
        match milnor_local(&f, 8) {
            Err(MilnorError::CertificateNotReached { cap, staircase }) => {
                assert_eq!(cap, 8);
                assert_eq!(staircase.len(), 9);
                // the truncated dimension keeps growing
                assert!(staircase.windows(2).all(|w| w[0] <= w[1]));
                assert!(staircase.last().unwrap() > &6);
            }
            other => panic!("expected certificate failure, got {other:?}"),
        }
    }

    #[test]
    fn preconditions_are_checked() {
        let ctx = Context::new(vec!["x"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^2 + t", &ctx).unwrap();
        assert_eq!(milnor_local(&f, 5), Err(MilnorError::ParameterVariables));
        let ctx2 = Context::new(vec!["x"], vec![]).unwrap();
        let g = parse_polynomial("x^2 + 1", &ctx2).unwrap();
        assert_eq!(milnor_local(&g, 5), Err(MilnorError::NonzeroConstantTerm));
    }

    #[test]
    fn briancon_speder_profile_is_constant() {
        let ctx = Context::new(vec!["x", "y", "z"], vec!["t"]).unwrap();
        let f = parse_polynomial("z^5 + t*y^6*z + y^7*x + x^15", &ctx).unwrap();
        let w = WeightSystem::new(vec![1, 2, 3], 15).unwrap();
        let profile = mu_profile(&f, &[qi(0), qi(1), qi(-1)], 50, Some(&w)).unwrap();
        assert_eq!(
            profile.results.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![364, 364, 364]
        );
        assert_eq!(profile.constancy, Constancy::Constant);
        assert!(profile
            .results
            .iter()
            .all(|r| r.method == MilnorMethod::WeightedFormula));
    }

    #[test]
    fn trivial_family_profile() {
        let ctx = Context::new(vec!["x", "y"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^2 + y^2", &ctx).unwrap();
        let profile = mu_profile(&f, &[qi(0), qi(1), qi(2)], 10, None).unwrap();
        assert_eq!(
            profile.results.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![1, 1, 1]
        );
        assert_eq!(profile.constancy, Constancy::Constant);
    }

    #[test]
    fn coalescing_family_jumps_at_zero() {
        let ctx = Context::new(vec!["x"], vec!["t"]).unwrap();
        let f = parse_polynomial("x^3 - 3*t*x^2", &ctx).unwrap();
        let profile = mu_profile(&f, &[qi(0), qi(1), qi(-1)], 12, None).unwrap();
        assert_eq!(
            profile.results.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![2, 1, 1]
        );
        assert_eq!(
            profile.constancy,
            Constancy::JumpAtZero {
                at_zero: 2,
                generic: 1
            }
        );
    }
}
