//! Exact series identities of the constructed fold transform, on
//! randomized witness data and on the explicit failing arc of the
//! Briançon–Speder family.

mod common;

use common::{random_nonzero_rational, rng};
use rand::Rng;
use vfold_core::arc::{evaluate_along_arc, implicit_solve, Arc};
use vfold_core::poly::{Context, Monomial};
use vfold_core::qi;
use vfold_core::series::TruncatedSeries;
use vfold_core::text::parse_polynomial;
use vfold_core::transforms::{
    build_fold_transform, compose_family, jacobian_det, verify_transported_kink, FoldTransform,
};

fn random_witness_data(
    r: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    order: u64,
) -> (Vec<TruncatedSeries>, Vec<TruncatedSeries>, TruncatedSeries) {
    // positive leading coefficients ensure the inner product u = <p, q>
    // has valuation exactly v(p) + v(q)
    loop {
        let p: Vec<TruncatedSeries> = (0..n)
            .map(|_| {
                let v: u64 = r.random_range(1..=4);
                let mut coeffs = vec![(v, qi(r.random_range(1..=5)))];
                for _ in 0..r.random_range(0..3u32) {
                    coeffs.push((r.random_range(v + 1..v + 8), random_nonzero_rational(r)));
                }
                TruncatedSeries::from_coeffs(coeffs, order)
            })
            .collect();
        let q: Vec<TruncatedSeries> = (0..n)
            .map(|_| {
                let v: u64 = r.random_range(0..=3);
                let mut coeffs = vec![(v, qi(r.random_range(1..=5)))];
                for _ in 0..r.random_range(0..3u32) {
                    coeffs.push((r.random_range(v + 1..v + 8), random_nonzero_rational(r)));
                }
                TruncatedSeries::from_coeffs(coeffs, order)
            })
            .collect();
        let mut u = TruncatedSeries::zero(order);
        for (pi, qi_) in p.iter().zip(q.iter()) {
            u = u.add(&pi.mul(qi_));
        }
        let vp = p.iter().filter_map(|s| s.valuation().value()).min().unwrap();
        let vq = q.iter().filter_map(|s| s.valuation().value()).min().unwrap();
        if u.valuation().value() == Some(vp + vq) {
            return (p, q, u);
        }
    }
}

#[test]
fn constructed_maps_satisfy_the_proof_identities() {
    let mut r = rng(0xf01d_0001);
    for round in 0..40 {
        let n = 2 + (round % 3); // 2, 3, 4
        let (p, q, u) = random_witness_data(&mut r, n, 40);
        let lambda = vec![TruncatedSeries::identity(40)];
        let ft = build_fold_transform(&p, &q, &u, &lambda).unwrap();

        // determinant identically 1
        let det = jacobian_det(&ft.map);
        let unit = Monomial::unit(n + 1);
        assert!(det.order() > 0);
        for (m, s) in det.terms() {
            assert_eq!(*m, unit, "round {round}: stray determinant term");
            assert_eq!(s.coeff(0), Some(qi(1)));
            assert_eq!(s.coefficients().count(), 1, "round {round}: det = {s}");
        }

        // Ψ(0, τ) = 0 exactly
        for psi in ft.map.psi() {
            assert!(psi.constant_coefficient().is_zero_to_order());
        }

        // the axis transports back to the arc
        let axis: Vec<TruncatedSeries> = (0..n)
            .map(|i| {
                if i == ft.pivot {
                    ft.p[ft.pivot].clone()
                } else {
                    TruncatedSeries::zero(ft.p[ft.pivot].order())
                }
            })
            .collect();
        for (i, psi) in ft.map.psi().iter().enumerate() {
            let image = psi.eval_at_series(&axis);
            let diff = image.sub(&ft.p[i]);
            assert!(diff.is_zero_to_order(), "round {round}: transport {i}");
        }
    }
}

fn briancon_speder_fold(order: u64) -> (vfold_core::poly::Polynomial, Arc, FoldTransform) {
    let ctx = Context::new(vec!["x", "y", "z"], vec!["t"]).unwrap();
    let family = parse_polynomial("z^5 + t*y^6*z + y^7*x + x^15", &ctx).unwrap();
    let g_ctx = Context::new(vec!["L", "s"], vec![]).unwrap();
    let g = parse_polynomial("-4 + L + L^15*s^35", &g_ctx).unwrap();
    let lambda = implicit_solve(&g, 0, 1, &qi(4), order).unwrap().series;
    let x = lambda.mul(&TruncatedSeries::monomial(qi(1), 5, order + 5));
    let y = TruncatedSeries::monomial(qi(1), 5, order);
    let z = TruncatedSeries::monomial(qi(1), 8, order);
    let t = TruncatedSeries::monomial(qi(-5), 2, order);
    let arc = Arc::new(&ctx, vec![x, y, z], vec![t]).unwrap();

    let p: Vec<TruncatedSeries> = arc.x_components().to_vec();
    let q: Vec<TruncatedSeries> = (0..3)
        .map(|i| evaluate_along_arc(&family.partial_derivative(i), &arc).unwrap())
        .collect();
    let mut u = TruncatedSeries::zero(arc.order());
    for (pi, qi_) in p.iter().zip(q.iter()) {
        u = u.add(&pi.mul(qi_));
    }
    let ft = build_fold_transform(&p, &q, &u, arc.t_components()).unwrap();
    (family, arc, ft)
}

#[test]
fn briancon_speder_fold_transform_end_to_end() {
    let (family, arc, ft) = briancon_speder_fold(90);
    assert_eq!(ft.pivot, 0);
    assert_eq!(ft.u.valuation().value(), Some(40));

    let det = jacobian_det(&ft.map);
    let unit = Monomial::unit(4);
    for (m, s) in det.terms() {
        assert_eq!(*m, unit);
        assert_eq!(s.coeff(0), Some(qi(1)));
        assert_eq!(s.coefficients().count(), 1, "det = {s}");
    }

    let record = verify_transported_kink(&family, &ft).unwrap();
    assert_eq!(record.pivot, 0);
    assert_eq!(record.vanishing_orders.len(), 2);
    assert!(record.vanishing_orders.iter().all(|&(_, o)| o >= 45));
    assert!(record.radial_order >= 45);
    assert!(record.transport_order >= 45);
    // multiplier u/p₁² has valuation 40 − 10 = 30
    assert_eq!(record.multiplier.valuation().value(), Some(30));

    // the composed family's gradient along the axis is proportional to the
    // position: components 2, 3 vanish, and component 1 = (u/p₁²)·p₁
    let composed = compose_family(&family, &ft.map).unwrap();
    let axis: Vec<TruncatedSeries> = vec![
        ft.p[0].clone(),
        TruncatedSeries::zero(arc.order()),
        TruncatedSeries::zero(arc.order()),
    ];
    let g1 = composed.partial_derivative(0).eval_at_series(&axis);
    let reconstructed = record.multiplier.mul(&ft.p[0]);
    let order = g1.order().min(reconstructed.order());
    assert!(g1.truncate(order).agrees_with(&reconstructed.truncate(order), order));
}

#[test]
fn low_order_data_is_rejected_not_guessed() {
    // order 5 is far below the valuations the construction must resolve
    let (family, arc, _) = briancon_speder_fold(90);
    let truncated: Vec<TruncatedSeries> =
        arc.x_components().iter().map(|c| c.truncate(5)).collect();
    let q: Vec<TruncatedSeries> = (0..3)
        .map(|i| {
            evaluate_along_arc(&family.partial_derivative(i), &arc)
                .unwrap()
                .truncate(5)
        })
        .collect();
    let mut u = TruncatedSeries::zero(5);
    for (pi, qi_) in truncated.iter().zip(q.iter()) {
        u = u.add(&pi.mul(qi_));
    }
    let err = build_fold_transform(&truncated, &q, &u, arc.t_components()).unwrap_err();
    assert!(matches!(
        err,
        vfold_core::transforms::TransformError::UndeterminedValuation { .. }
    ));
}
