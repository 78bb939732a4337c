//! Randomized invariants: jet arithmetic obeys the calculus rules it
//! encodes, causal classification follows the discriminant through every
//! branch, and the shift/rescale maps keep exact solutions exact.

use proptest::prelude::*;

use dkpew::jet::{Jet3, NCOEF};
use dkpew::minitwistor::{curve_intersection, CausalClass, IncidenceRoots};
use dkpew::poly::Poly1;
use dkpew::solutions::SolutionSpec;
use dkpew::transforms::{apply_conftrans, apply_coordtrans};

fn jet() -> impl Strategy<Value = Jet3> {
    prop::collection::vec(-2.0..2.0_f64, NCOEF).prop_map(|v| {
        let mut c = [0.0; NCOEF];
        c.copy_from_slice(&v);
        Jet3 { c }
    })
}

/// All multi-indices with total order <= 4.
fn multi_indices() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=4 {
        for j in 0..=4 - i {
            for k in 0..=4 - i - j {
                out.push((i, j, k));
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn addition_adds_every_coefficient(a in jet(), b in jet()) {
        let s = a + b;
        for (i, j, k) in multi_indices() {
            prop_assert_eq!(s.coeff(i, j, k), a.coeff(i, j, k) + b.coeff(i, j, k));
        }
    }

    #[test]
    fn product_obeys_the_leibniz_rule(a in jet(), b in jet()) {
        let p = a * b;
        let scale = 1.0 + a.max_abs() * b.max_abs();
        prop_assert!((p.value() - a.value() * b.value()).abs() <= 1e-12 * scale);
        for axis in 0..3 {
            let (i, j, k) = [(1, 0, 0), (0, 1, 0), (0, 0, 1)][axis];
            let expect = a.partial(i, j, k) * b.value() + a.value() * b.partial(i, j, k);
            prop_assert!(
                (p.partial(i, j, k) - expect).abs() <= 1e-12 * scale,
                "axis {}: {} vs {}", axis, p.partial(i, j, k), expect
            );
        }
    }

    #[test]
    fn scaling_commutes_with_differentiation(a in jet(), s in -3.0..3.0_f64, axis in 0..3_usize) {
        let left = a.scale(s).deriv(axis);
        let right = a.deriv(axis).scale(s);
        let gap = (left - right).max_abs();
        prop_assert!(gap <= 1e-13 * (1.0 + a.max_abs() * s.abs()), "gap {gap:e}");
    }

    #[test]
    fn causal_class_tracks_the_discriminant(
        t1 in -1.0..1.0_f64, y1 in -1.0..1.0_f64, x1 in -1.0..1.0_f64,
        dt in 0.05..1.0_f64, dy in -1.0..1.0_f64, dx in -1.0..1.0_f64,
        flip in prop::bool::ANY,
    ) {
        let p1 = [t1, y1, x1];
        let sgn = if flip { -1.0 } else { 1.0 };
        let p2 = [t1 + sgn * dt, y1 + dy, x1 + dx];
        let ci = curve_intersection(p1, p2).unwrap();
        match ci.roots {
            IncidenceRoots::Real { first, second } => {
                prop_assert_eq!(ci.class, CausalClass::Spacelike);
                prop_assert!(ci.h_rr > 0.0);
                prop_assert!(first <= second);
            }
            IncidenceRoots::Double { .. } => {
                prop_assert_eq!(ci.class, CausalClass::Null);
                prop_assert_eq!(ci.h_rr, 0.0);
            }
            IncidenceRoots::ComplexPair { im, .. } => {
                prop_assert_eq!(ci.class, CausalClass::Timelike);
                prop_assert!(ci.h_rr < 0.0);
                prop_assert!(im > 0.0);
            }
            other => prop_assert!(false, "degenerate roots {other:?} despite dt != 0"),
        }
        // the relation is symmetric in the pair
        let swapped = curve_intersection(p2, p1).unwrap();
        prop_assert_eq!(swapped.class, ci.class);
        prop_assert_eq!(swapped.h_rr, ci.h_rr);
    }

    #[test]
    fn pairs_on_the_incidence_parabola_are_null(
        a in 1..=8_i32, b in prop::sample::select(vec![1.0_f64, 2.0, 4.0]),
        n1 in -16..16_i32, n2 in -16..16_i32, n3 in -16..16_i32,
    ) {
        // dy^2 = 4 dx dt holds exactly: everything is a dyadic rational on a
        // 1/16 grid, so the separations recomputed inside survive unrounded
        let (t1, y1, x1) = (n1 as f64 / 16.0, n2 as f64 / 16.0, n3 as f64 / 16.0);
        let (dt, dy, dx) = (b, a as f64, (a * a) as f64 / (4.0 * b));
        let ci = curve_intersection([t1, y1, x1], [t1 + dt, y1 + dy, x1 + dx]).unwrap();
        prop_assert_eq!(ci.class, CausalClass::Null);
        match ci.roots {
            IncidenceRoots::Double { value } => {
                prop_assert!((value - dy / dt).abs() <= 1e-12, "double root {value}");
            }
            other => prop_assert!(false, "expected a double root, got {other:?}"),
        }
    }

    #[test]
    fn shifts_and_rescalings_keep_solutions_exact(
        family in 0..5_usize,
        f0 in -0.25..0.25_f64, f1 in -0.25..0.25_f64,
        g0 in -0.25..0.25_f64, g1 in -0.25..0.25_f64,
        c0 in -0.2..0.2_f64, c1 in 0.6..1.4_f64, c2 in -0.04..0.04_f64,
        x in 0.2..1.0_f64, dy in 0.0..1.0_f64, t in 1.0..2.0_f64,
    ) {
        let (base, y0) = match family {
            0 => (SolutionSpec::flat(), 1.0),
            1 => (
                SolutionSpec::conformal_einstein(
                    Poly1::new(vec![0.4, 0.1]),
                    Poly1::new(vec![-0.2, 0.15]),
                    Poly1::constant(0.2),
                ),
                1.0,
            ),
            2 => (SolutionSpec::hyper_cr(Poly1::new(vec![0.3, -0.2])), 1.5),
            // slope kept small so the rescaled time stays below the caustic
            3 => (SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.1, 0.02])), 1.0),
            _ => (SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.1])), 1.0),
        };
        let moved = apply_conftrans(
            &apply_coordtrans(&base, &Poly1::new(vec![f0, f1]), &Poly1::new(vec![g0, g1])),
            &Poly1::new(vec![c0, c1, c2]),
        );
        let r = moved.dkp_residual(x, y0 + dy, t).unwrap().abs();
        prop_assert!(r < 1e-9, "residual {r:e}");
    }

    #[test]
    fn quadratic_bump_shifts_the_residual_by_its_second_derivative(
        mag in 1e-3..0.5_f64, negative in prop::bool::ANY,
    ) {
        let eps = if negative { -mag } else { mag };
        let bumped = SolutionSpec::custom("bumped-flat", move |x, y, t| {
            let base = SolutionSpec::flat().eval_jet(x, y, t, 4)?.jet;
            let yj = Jet3::var(1, y);
            Ok(base + yj * yj * eps)
        });
        let r = bumped.dkp_residual(0.5, 0.7, 1.3).unwrap();
        // u_xx = 0 for the base profile, so the bump contributes exactly -2 eps
        prop_assert!((r + 2.0 * eps).abs() <= 1e-12, "residual {r:e} vs {:e}", -2.0 * eps);
        prop_assert!(r.abs() >= eps.abs());
    }
}
