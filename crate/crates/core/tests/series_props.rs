//! Valuation laws and solver guarantees for the series layer.

mod common;

use common::{random_polynomial, random_rational, rng};
use rand::Rng;
use vfold_core::arc::{eval_series, evaluate_along_arc, implicit_solve, Arc, ArcError};
use vfold_core::poly::Context;
use vfold_core::series::{TruncatedSeries, Valuation};
use vfold_core::{qi, BigRational};

fn random_series(r: &mut rand_chacha::ChaCha8Rng, order: u64) -> TruncatedSeries {
    let terms = r.random_range(0..=5);
    let coeffs: Vec<(u64, BigRational)> = (0..terms)
        .map(|_| (r.random_range(0..order), random_rational(r)))
        .collect();
    TruncatedSeries::from_coeffs(coeffs, order)
}

#[test]
fn product_valuations_add() {
    let mut r = rng(0xbeef_0001);
    for _ in 0..300 {
        let a = random_series(&mut r, 24);
        let b = random_series(&mut r, 24);
        let prod = a.mul(&b);
        match (a.valuation(), b.valuation()) {
            (
                Valuation::Finite { value: va, .. },
                Valuation::Finite { value: vb, .. },
            ) => {
                // rationals have no zero divisors, so the product valuation
                // is exactly the sum whenever it is visible
                if va + vb < prod.order() {
                    assert_eq!(prod.valuation().value(), Some(va + vb));
                }
            }
            _ => assert!(prod.is_zero_to_order()),
        }
    }
}

#[test]
fn sum_valuation_bounded_below_by_min() {
    let mut r = rng(0xbeef_0002);
    for _ in 0..300 {
        let a = random_series(&mut r, 24);
        let b = random_series(&mut r, 24);
        let sum = a.add(&b);
        let lb = a
            .valuation()
            .lower_bound()
            .min(b.valuation().lower_bound());
        assert!(sum.valuation().lower_bound() >= lb.min(sum.order()));
        // equality when the leading terms cannot cancel
        if let (
            Valuation::Finite { value: va, leading: ca },
            Valuation::Finite { value: vb, leading: cb },
        ) = (a.valuation(), b.valuation())
        {
            if va < vb {
                assert_eq!(sum.valuation().value(), Some(va));
                assert_eq!(sum.valuation().leading(), Some(&ca));
            } else if vb < va {
                assert_eq!(sum.valuation().value(), Some(vb));
                assert_eq!(sum.valuation().leading(), Some(&cb));
            }
        }
    }
}

#[test]
fn division_inverts_multiplication() {
    let mut r = rng(0xbeef_0003);
    let mut checked = 0;
    while checked < 120 {
        let a = random_series(&mut r, 20);
        let b = random_series(&mut r, 20);
        if b.is_zero_to_order() {
            continue;
        }
        let prod = a.mul(&b);
        if let Ok(back) = prod.div(&b) {
            let order = back.order().min(a.order());
            assert!(back.agrees_with(&a.truncate(order), order));
            checked += 1;
        }
    }
}

#[test]
fn evaluation_along_arc_is_a_ring_morphism() {
    let ctx = Context::new(vec!["x", "y"], vec![]).unwrap();
    let mut r = rng(0xbeef_0004);
    for _ in 0..80 {
        let f = random_polynomial(&mut r, &ctx, 3);
        let g = random_polynomial(&mut r, &ctx, 3);
        let x = random_series(&mut r, 18).mul(&TruncatedSeries::identity(18));
        let y = random_series(&mut r, 18).mul(&TruncatedSeries::identity(18));
        let arc = Arc::new(&ctx, vec![x, y], vec![]).unwrap();
        let fg = evaluate_along_arc(&(&f * &g), &arc).unwrap();
        let split = evaluate_along_arc(&f, &arc)
            .unwrap()
            .mul(&evaluate_along_arc(&g, &arc).unwrap());
        let order = fg.order().min(split.order());
        assert!(fg.truncate(order).agrees_with(&split.truncate(order), order));
    }
}

#[test]
fn implicit_solutions_always_meet_the_requested_order() {
    let ctx = Context::new(vec!["L", "s"], vec![]).unwrap();
    let mut r = rng(0xbeef_0005);
    let order = 24;
    let mut solved = 0;
    while solved < 60 {
        let raw = random_polynomial(&mut r, &ctx, 4);
        let initial = random_rational(&mut r);
        // force G(initial, 0) = 0 by absorbing the constant value
        let at_origin = raw.eval_rational(&[initial.clone(), qi(0)]);
        let g = raw
            .checked_sub(&vfold_core::poly::Polynomial::constant(&ctx, at_origin))
            .unwrap();
        match implicit_solve(&g, 0, 1, &initial, order) {
            Ok(sol) => {
                let assignment = vec![sol.series.clone(), TruncatedSeries::identity(order)];
                let residual = eval_series(&g, &assignment);
                assert!(
                    residual.truncate(order).is_zero_to_order(),
                    "residual {residual} for {g}"
                );
                let bound = 64 - order.leading_zeros() as usize + 3;
                assert!(sol.newton_steps <= bound);
                solved += 1;
            }
            Err(ArcError::DegenerateDerivative) => continue,
            Err(other) => panic!("unexpected failure: {other}"),
        }
    }
}

#[test]
fn dilate_matches_recomposition() {
    let mut r = rng(0xbeef_0006);
    for _ in 0..100 {
        let a = random_series(&mut r, 16);
        let m = r.random_range(1..=3u64);
        let inner = TruncatedSeries::monomial(qi(1), m, 16 * m);
        let direct = a.dilate(m);
        let composed = a.compose(&inner).unwrap();
        let order = direct.order().min(composed.order());
        assert!(direct.truncate(order).agrees_with(&composed.truncate(order), order));
    }
}
