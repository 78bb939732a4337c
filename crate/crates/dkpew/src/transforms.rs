//! The two solution-preserving coordinate freedoms of the dKP flow and the
//! Legendre-type bridge to a second-heavenly potential.
//!
//! Both transforms return a new [`SolutionSpec`] (a custom family wrapping
//! the source) whose jets are produced by composing the source jets with the
//! coordinate map, so residual checks on the result exercise the genuine
//! chain rule rather than finite differences.
//!
//! The Galilean-type map with profiles `f(t)`, `g(t)` is
//!
//! ```text
//! u~(x~, y~, t~) = u(x~ - f' y~ - g,  y~ - 2 f,  t~) - y~ f'' - f'^2 - g',
//! ```
//!
//! and the time-reparametrization by `c(t)` (increasing where used) is
//!
//! ```text
//! u~ = c'^{2/3} u(c'^{1/3} x~ + (c''/(6 c'^{2/3})) y~^2,  c'^{2/3} y~,  c)
//!      + (c'' x~)/(3 c') + (y~^2/18) (3 c'''/c' - 4 (c''/c')^2).
//! ```
//!
//! Fractional powers use the real branch, so `c' > 0` is enforced at every
//! evaluation (the error is [`Error::ConformalBranch`]).
//!
//! The heavenly bridge evaluates the potential Hessian
//!
//! ```text
//! T_qq = 1/u_x,   T_yq = u_y/u_x + z,   T_yy = u_y^2/u_x + u u_x - u_t
//! ```
//!
//! and [`heavenly_metric_check`] pulls the associated metric
//! `2(dz dy + dq dt - T_qq dz^2 - T_yy dt^2 + 2 T_yq dz dt)` back through
//! `q = -u - z^2`, comparing against the direct lift of
//! [`crate::hyperkahler::metric_from_dkp`]; the two assemblies agree
//! identically.

use crate::error::{Error, Result};
use crate::hyperkahler::metric_from_dkp;
use crate::jet::Jet3;
use crate::poly::Poly1;
use crate::solutions::SolutionSpec;

/// Galilean-type transform with free profiles `f`, `g` of `t`.
pub fn apply_coordtrans(spec: &SolutionSpec, f: &Poly1, g: &Poly1) -> SolutionSpec {
    let src = spec.clone();
    let f = f.clone();
    let g = g.clone();
    let label = format!("galilean[{}]", spec.family.name());
    SolutionSpec::custom(label, move |x, y, t| {
        let xj = Jet3::var(0, x);
        let yj = Jet3::var(1, y);
        let tj = Jet3::var(2, t);
        let fj = f.eval_jet(&tj);
        let fp = f.deriv().eval_jet(&tj);
        let fpp = f.deriv().deriv().eval_jet(&tj);
        let gj = g.eval_jet(&tj);
        let gp = g.deriv().eval_jet(&tj);
        let xmap = xj - fp * yj - gj;
        let ymap = yj - fj.scale(2.0);
        let base = src.eval_jet(xmap.value(), ymap.value(), t, 4)?.jet;
        let pulled = base.compose(&(xmap - xmap.value()), &(ymap - ymap.value()), &(tj - t));
        Ok(pulled - yj * fpp - fp * fp - gp)
    })
}

/// Conformal time-reparametrization by `c(t)`; requires `c' > 0` wherever the
/// result is evaluated.
pub fn apply_conftrans(spec: &SolutionSpec, c: &Poly1) -> SolutionSpec {
    let src = spec.clone();
    let c = c.clone();
    let label = format!("conformal[{}]", spec.family.name());
    SolutionSpec::custom(label, move |x, y, t| {
        let xj = Jet3::var(0, x);
        let yj = Jet3::var(1, y);
        let tj = Jet3::var(2, t);
        let cj = c.eval_jet(&tj);
        let cp = c.deriv().eval_jet(&tj);
        let cpp = c.deriv().deriv().eval_jet(&tj);
        let cppp = c.deriv().deriv().deriv().eval_jet(&tj);
        if cp.value() <= 0.0 {
            return Err(Error::ConformalBranch(cp.value()));
        }
        let cp13 = cp.powf(1.0 / 3.0);
        let cp23 = cp.powf(2.0 / 3.0);
        let xmap = cp13 * xj + cpp / (cp23.scale(6.0)) * yj * yj;
        let ymap = cp23 * yj;
        let base = src.eval_jet(xmap.value(), ymap.value(), cj.value(), 4)?.jet;
        let pulled = base.compose(
            &(xmap - xmap.value()),
            &(ymap - ymap.value()),
            &(cj - cj.value()),
        );
        let ratio = cpp / cp;
        let shear = (cppp / cp).scale(3.0) - ratio * ratio * 4.0;
        Ok(cp23 * pulled + ratio * xj.scale(1.0 / 3.0) + yj * yj * shear.scale(1.0 / 18.0))
    })
}

/// Hessian block of the heavenly potential at a 4D point `(x, y, t, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeavenlyJet {
    pub theta_yy: f64,
    pub theta_yq: f64,
    pub theta_qq: f64,
}

pub fn heavenly_jet(spec: &SolutionSpec, p: [f64; 4]) -> Result<HeavenlyJet> {
    let j = spec.eval_jet(p[0], p[1], p[2], 1)?.jet;
    let (u, ux, uy, ut) = (
        j.value(),
        j.partial(1, 0, 0),
        j.partial(0, 1, 0),
        j.partial(0, 0, 1),
    );
    if ux.abs() < 1e-12 {
        return Err(Error::DegenerateMonopole(ux / 2.0));
    }
    Ok(HeavenlyJet {
        theta_yy: uy * uy / ux + u * ux - ut,
        theta_yq: uy / ux + p[3],
        theta_qq: 1.0 / ux,
    })
}

/// Max component gap between the heavenly-form metric pulled back through
/// `q = -u - z^2` and the direct lift, at `p = (x, y, t, z)`.
pub fn heavenly_metric_check(spec: &SolutionSpec, p: [f64; 4]) -> Result<f64> {
    let hj = heavenly_jet(spec, p)?;
    let j = spec.eval_jet(p[0], p[1], p[2], 1)?.jet;
    let (ux, uy, ut) = (j.partial(1, 0, 0), j.partial(0, 1, 0), j.partial(0, 0, 1));
    let z = p[3];
    // covectors on (x, y, t, z)
    let dy = [0.0, 1.0, 0.0, 0.0];
    let dt = [0.0, 0.0, 1.0, 0.0];
    let dz = [0.0, 0.0, 0.0, 1.0];
    let dq = [-ux, -uy, -ut, -2.0 * z];
    let mut pulled = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            pulled[i][k] = dz[i] * dy[k] + dz[k] * dy[i] + dq[i] * dt[k] + dq[k] * dt[i]
                - 2.0 * hj.theta_qq * dz[i] * dz[k]
                - 2.0 * hj.theta_yy * dt[i] * dt[k]
                + 2.0 * hj.theta_yq * (dz[i] * dt[k] + dz[k] * dt[i]);
        }
    }
    let g = metric_from_dkp(spec, p)?;
    let mut gap = 0.0_f64;
    for i in 0..4 {
        for k in 0..4 {
            gap = gap.max((pulled[i][k] - g[i][k]).abs());
        }
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn families() -> Vec<SolutionSpec> {
        vec![
            SolutionSpec::flat(),
            SolutionSpec::conformal_einstein(
                Poly1::new(vec![0.8, -0.2]),
                Poly1::new(vec![0.1, 0.4]),
                Poly1::constant(-0.5),
            ),
            SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3])),
            SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.4, -0.1])),
            SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5])),
        ]
    }

    #[test]
    fn zero_profiles_are_the_identity() {
        let spec = SolutionSpec::hyper_cr(Poly1::new(vec![0.4]));
        let id = apply_coordtrans(&spec, &Poly1::zero(), &Poly1::zero());
        let (x, y, t) = (0.7, 1.3, 0.9);
        let a = spec.eval_jet(x, y, t, 4).unwrap().jet;
        let b = id.eval_jet(x, y, t, 4).unwrap().jet;
        for k in 0..35 {
            assert_abs_diff_eq!(a.c[k], b.c[k], epsilon = 1e-13);
        }
        let idc = apply_conftrans(&spec, &Poly1::new(vec![0.0, 1.0]));
        let c = idc.eval_jet(x, y, t, 4).unwrap().jet;
        for k in 0..35 {
            assert_abs_diff_eq!(a.c[k], c.c[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn shifted_collapse_has_closed_form() {
        // f = 0, g(t) = t on u = -x/t gives u~ = -(x - t)/t - 1
        let moved = apply_coordtrans(&SolutionSpec::flat(), &Poly1::zero(), &Poly1::new(vec![0.0, 1.0]));
        let (x, y, t) = (0.8, -0.3, 1.4);
        let j = moved.eval_jet(x, y, t, 2).unwrap();
        assert_abs_diff_eq!(j.u(), -(x - t) / t - 1.0, epsilon = 1e-13);
        assert!(moved.dkp_residual(x, y, t).unwrap().abs() < 1e-12);
    }

    #[test]
    fn transforms_preserve_solutions() {
        let f = Poly1::new(vec![0.2, -0.3, 0.1]);
        let g = Poly1::new(vec![-0.4, 0.25]);
        let c = Poly1::new(vec![0.1, 1.2, 0.05]);
        for spec in families() {
            let gal = apply_coordtrans(&spec, &f, &g);
            let conf = apply_conftrans(&spec, &c);
            for &(x, y, t) in &[(0.9, 1.1, 0.8), (0.4, 1.6, 1.2)] {
                let r = gal.dkp_residual(x, y, t).unwrap();
                assert!(r.abs() < 1e-9, "{}: residual {r:.3e}", gal.family.name());
                let r = conf.dkp_residual(x, y, t).unwrap();
                assert!(r.abs() < 1e-9, "{}: residual {r:.3e}", conf.family.name());
            }
        }
    }

    #[test]
    fn conformal_branch_is_guarded() {
        // c' = 1 - 2t < 0 for t > 1/2
        let c = Poly1::new(vec![0.0, 1.0, -1.0]);
        let warped = apply_conftrans(&SolutionSpec::flat(), &c);
        assert!(matches!(
            warped.eval_jet(0.3, 0.2, 0.9, 2),
            Err(Error::ConformalBranch(_))
        ));
        assert!(warped.eval_jet(0.3, 0.2, 0.2, 2).is_ok());
    }

    #[test]
    fn pure_gauge_solution_from_zero() {
        let zero = SolutionSpec::custom("zero", |_, _, _| Ok(Jet3::zero()));
        let c = Poly1::new(vec![0.0, 1.0, 0.1]);
        let warped = apply_conftrans(&zero, &c);
        let (x, y, t) = (0.7, -0.4, 0.5);
        let cp = 1.0 + 0.2 * t;
        let cpp = 0.2;
        let expect = cpp * x / (3.0 * cp) + y * y / 18.0 * (-4.0 * (cpp / cp) * (cpp / cp));
        let j = warped.eval_jet(x, y, t, 2).unwrap();
        assert_abs_diff_eq!(j.u(), expect, epsilon = 1e-13);
        assert!(warped.dkp_residual(x, y, t).unwrap().abs() < 1e-13);
    }

    #[test]
    fn hessian_fixtures() {
        let flat = heavenly_jet(&SolutionSpec::flat(), [1.0, 1.0, 2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(flat.theta_qq, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(flat.theta_yq, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(flat.theta_yy, 0.0, epsilon = 1e-14);
        let ce = SolutionSpec::conformal_einstein(
            Poly1::constant(1.0),
            Poly1::zero(),
            Poly1::zero(),
        );
        let h = heavenly_jet(&ce, [0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(h.theta_qq, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.theta_yq, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.theta_yy, 0.0, epsilon = 1e-14);
        let stuck = SolutionSpec::custom("const", |_, _, _| Ok(Jet3::constant(1.0)));
        assert!(matches!(
            heavenly_jet(&stuck, [0.0; 4]),
            Err(Error::DegenerateMonopole(_))
        ));
    }

    #[test]
    fn heavenly_assembly_matches_the_lift() {
        assert!(heavenly_metric_check(&SolutionSpec::flat(), [1.0, 1.0, 2.0, 1.0]).unwrap() < 1e-12);
        let ce = SolutionSpec::conformal_einstein(
            Poly1::constant(1.0),
            Poly1::zero(),
            Poly1::zero(),
        );
        assert!(heavenly_metric_check(&ce, [1.0, 1.0, 1.0, 0.0]).unwrap() < 1e-12);
        for spec in families() {
            for &p in &[[0.9, 1.1, 0.8, 0.4], [0.5, -0.7, 1.3, -0.2]] {
                let gap = heavenly_metric_check(&spec, p).unwrap();
                assert!(gap < 1e-10, "{}: gap {gap:.3e}", spec.family.name());
            }
        }
    }
}
