//! Shared generators for the property suites: random rationals, random
//! polynomials, and random quasihomogeneous germs equipped with an exact
//! zero-set arc.

#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vfold_core::poly::{Context, ContextRef, Monomial, Polynomial, WeightSystem};
use vfold_core::series::TruncatedSeries;
use vfold_core::BigRational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num: i64 = rng.random_range(-9..=9);
    let den: i64 = rng.random_range(1..=4);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn random_nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let q = random_rational(rng);
        if !num_traits::Zero::is_zero(&q) {
            return q;
        }
    }
}

/// Random sparse polynomial with small exponents and coefficients.
pub fn random_polynomial(rng: &mut ChaCha8Rng, ctx: &ContextRef, max_exp: u32) -> Polynomial {
    let nvars = ctx.var_count();
    let terms = rng.random_range(0..=6);
    let mut out = Polynomial::zero(ctx);
    for _ in 0..terms {
        let exps: Vec<u32> = (0..nvars).map(|_| rng.random_range(0..=max_exp)).collect();
        let mono = Polynomial::from_terms(ctx, [(Monomial(exps), random_rational(rng))]);
        out = out.checked_add(&mono).unwrap();
    }
    out
}

/// A quasihomogeneous germ with randomized weights and support, together
/// with a rational point of its zero set with all coordinates nonzero.
pub struct QhGerm {
    pub ctx: ContextRef,
    pub f: Polynomial,
    pub weights: WeightSystem,
    pub zero_point: Vec<BigRational>,
}

/// All exponent vectors of weighted degree exactly `d`.
fn monomials_of_weighted_degree(weights: &[u64], d: u64) -> Vec<Vec<u32>> {
    let n = weights.len();
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, weights: &[u64], var: usize, rem: u64) {
        if var + 1 == weights.len() {
            if rem.is_multiple_of(weights[var]) {
                current[var] = (rem / weights[var]) as u32;
                out.push(current.clone());
                current[var] = 0;
            }
            return;
        }
        let max_e = rem / weights[var];
        for e in 0..=max_e {
            current[var] = e as u32;
            rec(out, current, weights, var + 1, rem - e * weights[var]);
        }
        current[var] = 0;
    }
    rec(&mut out, &mut current, weights, 0, d);
    out
}

/// Generate a quasihomogeneous germ of random type `(w; D)` with
/// `wᵢ ∈ [1, 6]`, `D ≤ max_degree`, random monomial support, and a known
/// rational zero with nonzero coordinates.
pub fn random_qh_germ(rng: &mut ChaCha8Rng, n: usize, max_degree: u64) -> QhGerm {
    let point_pool: [(i64, i64); 8] = [
        (1, 1),
        (-1, 1),
        (2, 1),
        (-2, 1),
        (1, 2),
        (-1, 2),
        (3, 1),
        (-3, 2),
    ];
    loop {
        let weights: Vec<u64> = (0..n).map(|_| rng.random_range(1..=6)).collect();
        let wmax = *weights.iter().max().unwrap();
        let d: u64 = rng.random_range(wmax.max(4)..=max_degree.max(wmax.max(4)));
        let support = monomials_of_weighted_degree(&weights, d);
        if support.len() < 2 {
            continue;
        }
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let ctx = Context::new(names, Vec::<String>::new()).unwrap();
        let k = rng.random_range(2..=support.len().min(6));
        let mut chosen: Vec<usize> = Vec::new();
        while chosen.len() < k {
            let i = rng.random_range(0..support.len());
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        let mut f = Polynomial::zero(&ctx);
        for &i in &chosen {
            f = f
                .checked_add(&Polynomial::from_terms(
                    &ctx,
                    [(Monomial(support[i].clone()), random_nonzero_rational(rng))],
                ))
                .unwrap();
        }
        let point: Vec<BigRational> = (0..n)
            .map(|_| {
                let (a, b) = point_pool[rng.random_range(0..point_pool.len())];
                BigRational::new(BigInt::from(a), BigInt::from(b))
            })
            .collect();
        // absorb the value at the point into the first chosen monomial so
        // the point lands on the zero set without harming homogeneity
        let value = f.eval_rational(&point);
        let anchor = Polynomial::from_terms(
            &ctx,
            [(
                Monomial(support[chosen[0]].clone()),
                num_traits::One::one(),
            )],
        );
        let anchor_value = anchor.eval_rational(&point);
        let f = f
            .checked_sub(&anchor.scale(&(value / anchor_value)))
            .unwrap();
        if f.is_zero() {
            continue;
        }
        let weights_sys = WeightSystem::new(weights, d).unwrap();
        debug_assert!(f.is_quasihomogeneous(&weights_sys));
        debug_assert!(num_traits::Zero::is_zero(&f.eval_rational(&point)));
        return QhGerm {
            ctx,
            f,
            weights: weights_sys,
            zero_point: point,
        };
    }
}

/// A randomized unit `u(s) = s^m·(1 + …)`, for threading zero points into
/// zero-set arcs `γᵢ = Pᵢ·u^{wᵢ}`.
pub fn random_arc_unit(rng: &mut ChaCha8Rng, order: u64) -> TruncatedSeries {
    let m: u64 = rng.random_range(1..=2);
    let mut coeffs = vec![(m, BigRational::new(BigInt::from(1), BigInt::from(1)))];
    for _ in 0..rng.random_range(0..3u32) {
        let e: u64 = rng.random_range(m + 1..m + 6);
        coeffs.push((e, random_rational(rng)));
    }
    TruncatedSeries::from_coeffs(coeffs, order)
}

/// The arc `γᵢ(s) = Pᵢ·u(s)^{wᵢ}`, which stays exactly inside the zero set
/// of any `(w; D)`-quasihomogeneous germ vanishing at `P`.
pub fn qh_zero_arc(germ: &QhGerm, unit: &TruncatedSeries) -> Vec<TruncatedSeries> {
    germ.weights
        .weights()
        .iter()
        .zip(germ.zero_point.iter())
        .map(|(&w, p)| {
            let mut power = TruncatedSeries::constant(num_traits::One::one(), unit.order());
            for _ in 0..w {
                power = power.mul(unit);
            }
            power.scale(p)
        })
        .collect()
}
