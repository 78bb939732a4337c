//! Exact solution families of the dispersionless KP equation
//! `(u_t - u u_x)_x = u_yy`, evaluated as order-4 Taylor jets.
//!
//! Each family is parametrized by univariate polynomials and evaluated
//! analytically through jet arithmetic, so every partial derivative up to
//! total order 4 is exact (no finite differencing). The families:
//!
//! * `Flat` -- `u = -x/t`, the seed whose lifted metric is flat.
//! * `ConformalEinstein` -- `u = x f1(t) + (f1' - f1^2) y^2 / 2 + f2(t) y + f3(t)`,
//!   linear in `x`; its Weyl structure is conformal to an Einstein one.
//! * `HyperCr` -- `u = -x^2/y^2 + P(t)/y`, carrying the extra gauge field
//!   `rho = 4/y` of the hyper-CR (Einstein--Weyl plus parallel weighted
//!   vector) condition.
//! * `Hodograph` -- the y-independent reduction `u_t = u u_x` solved
//!   implicitly by `u = f(x + t u)`.
//! * `NoKilling` -- `u = t A'(t) - x/t + (y/t) sqrt(x/t + A(t))`, generically
//!   admitting no conformal Killing vector.
//! * `Custom` -- an arbitrary jet-valued closure (used for perturbations and
//!   transformed solutions; not serializable).
//!
//! For the minitwistor/Darboux machinery each family also carries a canonical
//! potential `w` with `w_x = u_y` and `w_y = u_t - u u_x` (the second
//! structure equation of the associated contact pair).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet3, ORDER};
use crate::poly::{Poly1, MAX_DEGREE};

/// Domain-guard tolerances carried by a [`SolutionSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guard {
    /// Minimum distance from vanishing denominators / square-root branch
    /// points (`|t|` for `Flat` and `NoKilling`, `|y|` for `HyperCr`,
    /// `x/t + A(t)` for `NoKilling`).
    #[serde(default = "default_min_denom")]
    pub min_denom: f64,
    /// Caustic tolerance for the hodograph solver: solving stops when
    /// `|1 - t f'(s)|` falls below this (characteristics crossing).
    #[serde(default = "default_caustic_tol")]
    pub caustic_tol: f64,
}

fn default_min_denom() -> f64 {
    1e-9
}

fn default_caustic_tol() -> f64 {
    1e-6
}

impl Default for Guard {
    fn default() -> Self {
        Guard { min_denom: default_min_denom(), caustic_tol: default_caustic_tol() }
    }
}

/// A non-serializable solution given by a jet-valued closure.
#[derive(Clone)]
pub struct CustomFamily {
    pub name: String,
    pub eval: Arc<dyn Fn(f64, f64, f64) -> Result<Jet3> + Send + Sync>,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    Flat,
    ConformalEinstein { f1: Poly1, f2: Poly1, f3: Poly1 },
    HyperCr { p: Poly1 },
    Hodograph { f: Poly1 },
    NoKilling { a: Poly1 },
    Custom(CustomFamily),
}

impl Family {
    /// Short kebab-case tag for reports and CLI selection.
    pub fn name(&self) -> &str {
        match self {
            Family::Flat => "flat",
            Family::ConformalEinstein { .. } => "conformal-einstein",
            Family::HyperCr { .. } => "hyper-cr",
            Family::Hodograph { .. } => "hodograph",
            Family::NoKilling { .. } => "no-killing",
            Family::Custom(c) => &c.name,
        }
    }
}

/// Serializable mirror of [`Family`] (everything but `Custom`).
#[derive(Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
enum FamilyRepr {
    Flat,
    ConformalEinstein { f1: Poly1, f2: Poly1, f3: Poly1 },
    HyperCr { p: Poly1 },
    Hodograph { f: Poly1 },
    NoKilling { a: Poly1 },
}

const FAMILY_NAMES: [&str; 5] =
    ["flat", "conformal-einstein", "hyper-cr", "hodograph", "no-killing"];

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(flatten)]
    family: FamilyRepr,
    #[serde(default)]
    guard: Guard,
}

/// A solution family together with its domain guard.
#[derive(Clone, Debug)]
pub struct SolutionSpec {
    pub family: Family,
    pub guard: Guard,
}

/// An order-`order` Taylor expansion of `u` at a point.
#[derive(Clone, Copy, Debug)]
pub struct JetPoint {
    /// Base point `(x, y, t)`.
    pub point: [f64; 3],
    /// Highest trustworthy total derivative order (<= 4).
    pub order: usize,
    pub jet: Jet3,
}

impl JetPoint {
    /// Mixed partial `d^{i+j+k} u / dx^i dy^j dt^k`; panics above `order`.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(i + j + k <= self.order, "jet queried above its order");
        self.jet.partial(i, j, k)
    }

    pub fn u(&self) -> f64 {
        self.jet.value()
    }
    pub fn ux(&self) -> f64 {
        self.jet.partial(1, 0, 0)
    }
    pub fn uy(&self) -> f64 {
        self.jet.partial(0, 1, 0)
    }
    pub fn ut(&self) -> f64 {
        self.jet.partial(0, 0, 1)
    }
    pub fn uxx(&self) -> f64 {
        self.jet.partial(2, 0, 0)
    }
    pub fn uxy(&self) -> f64 {
        self.jet.partial(1, 1, 0)
    }
    pub fn uyy(&self) -> f64 {
        self.jet.partial(0, 2, 0)
    }
    pub fn uxt(&self) -> f64 {
        self.jet.partial(1, 0, 1)
    }
}

impl SolutionSpec {
    pub fn new(family: Family) -> Self {
        SolutionSpec { family, guard: Guard::default() }
    }

    pub fn flat() -> Self {
        Self::new(Family::Flat)
    }

    pub fn conformal_einstein(f1: Poly1, f2: Poly1, f3: Poly1) -> Self {
        Self::new(Family::ConformalEinstein { f1, f2, f3 })
    }

    pub fn hyper_cr(p: Poly1) -> Self {
        Self::new(Family::HyperCr { p })
    }

    pub fn hodograph(f: Poly1) -> Self {
        Self::new(Family::Hodograph { f })
    }

    pub fn no_killing(a: Poly1) -> Self {
        Self::new(Family::NoKilling { a })
    }

    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64, f64, f64) -> Result<Jet3> + Send + Sync + 'static,
    ) -> Self {
        Self::new(Family::Custom(CustomFamily { name: name.into(), eval: Arc::new(eval) }))
    }

    /// Checks all parameter polynomials against the degree cap.
    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Flat | Family::Custom(_) => Ok(()),
            Family::ConformalEinstein { f1, f2, f3 } => {
                f1.check_degree(MAX_DEGREE)?;
                f2.check_degree(MAX_DEGREE)?;
                f3.check_degree(MAX_DEGREE)
            }
            Family::HyperCr { p } => p.check_degree(MAX_DEGREE),
            Family::Hodograph { f } => f.check_degree(MAX_DEGREE),
            Family::NoKilling { a } => a.check_degree(MAX_DEGREE),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let family = match &self.family {
            Family::Flat => FamilyRepr::Flat,
            Family::ConformalEinstein { f1, f2, f3 } => FamilyRepr::ConformalEinstein {
                f1: f1.clone(),
                f2: f2.clone(),
                f3: f3.clone(),
            },
            Family::HyperCr { p } => FamilyRepr::HyperCr { p: p.clone() },
            Family::Hodograph { f } => FamilyRepr::Hodograph { f: f.clone() },
            Family::NoKilling { a } => FamilyRepr::NoKilling { a: a.clone() },
            Family::Custom(c) => {
                return Err(Error::Config(format!(
                    "custom family `{}` cannot be serialized",
                    c.name
                )))
            }
        };
        Ok(serde_json::to_string(&SpecRepr { family, guard: self.guard.clone() })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if let Some(name) = value.get("family").and_then(|v| v.as_str()) {
            if !FAMILY_NAMES.contains(&name) {
                return Err(Error::UnknownFamily(name.to_string()));
            }
        }
        let repr: SpecRepr = serde_json::from_value(value)?;
        let family = match repr.family {
            FamilyRepr::Flat => Family::Flat,
            FamilyRepr::ConformalEinstein { f1, f2, f3 } => {
                Family::ConformalEinstein { f1, f2, f3 }
            }
            FamilyRepr::HyperCr { p } => Family::HyperCr { p },
            FamilyRepr::Hodograph { f } => Family::Hodograph { f },
            FamilyRepr::NoKilling { a } => Family::NoKilling { a },
        };
        let spec = SolutionSpec { family, guard: repr.guard };
        spec.validate()?;
        Ok(spec)
    }

    fn outside(&self, x: f64, y: f64, t: f64, reason: impl Into<String>) -> Error {
        Error::OutsideDomain { x, y, t, reason: reason.into() }
    }

    /// Domain-guard check for the point.
    pub fn guard_check(&self, x: f64, y: f64, t: f64) -> Result<()> {
        let g = &self.guard;
        match &self.family {
            Family::Flat => {
                if t.abs() < g.min_denom {
                    return Err(self.outside(x, y, t, "t = 0 singular slice"));
                }
            }
            Family::HyperCr { .. } => {
                if y.abs() < g.min_denom {
                    return Err(self.outside(x, y, t, "y = 0 singular slice"));
                }
            }
            Family::NoKilling { a } => {
                if t.abs() < g.min_denom {
                    return Err(self.outside(x, y, t, "t = 0 singular slice"));
                }
                let arg = x / t + a.eval(t);
                if arg < g.min_denom {
                    return Err(self.outside(x, y, t, "x/t + A(t) <= 0 square-root branch"));
                }
            }
            Family::ConformalEinstein { .. } | Family::Hodograph { .. } | Family::Custom(_) => {}
        }
        Ok(())
    }

    /// Order-4 Taylor jet of `u` at `(x, y, t)`, truncated to `order`.
    pub fn eval_jet(&self, x: f64, y: f64, t: f64, order: usize) -> Result<JetPoint> {
        if order > ORDER {
            return Err(Error::Config(format!(
                "jet order {order} exceeds supported maximum {ORDER}"
            )));
        }
        self.guard_check(x, y, t)?;
        let jet = self.u_jet(x, y, t)?;
        if !jet.c.iter().all(|c| c.is_finite()) {
            return Err(self.outside(x, y, t, "non-finite jet coefficients"));
        }
        Ok(JetPoint { point: [x, y, t], order, jet })
    }

    fn u_jet(&self, x: f64, y: f64, t: f64) -> Result<Jet3> {
        let xj = Jet3::var(0, x);
        let yj = Jet3::var(1, y);
        let tj = Jet3::var(2, t);
        match &self.family {
            Family::Flat => Ok(-(xj / tj)),
            Family::ConformalEinstein { f1, f2, f3 } => {
                let a1 = f1.eval_jet(&tj);
                let a1p = f1.deriv().eval_jet(&tj);
                let a2 = f2.eval_jet(&tj);
                let a3 = f3.eval_jet(&tj);
                Ok(xj * a1 + (a1p - a1 * a1) * yj * yj * 0.5 + a2 * yj + a3)
            }
            Family::HyperCr { p } => {
                let pj = p.eval_jet(&tj);
                Ok(-(xj * xj) / (yj * yj) + pj / yj)
            }
            Family::Hodograph { f } => self.hodograph_jet(f, x, t),
            Family::NoKilling { a } => {
                let aj = a.eval_jet(&tj);
                let apj = a.deriv().eval_jet(&tj);
                let arg = xj / tj + aj;
                Ok(tj * apj - xj / tj + (yj / tj) * arg.sqrt())
            }
            Family::Custom(c) => (c.eval)(x, y, t),
        }
    }

    /// Implicit solve of `u = f(x + t u)` on jets: scalar Newton for the
    /// value, then Newton in the jet ring (which converges order by order).
    fn hodograph_jet(&self, f: &Poly1, x: f64, t: f64) -> Result<Jet3> {
        let (u0, _s) = hodograph_solve(f, x, t, &self.guard)?;
        let fp = f.deriv();
        let xj = Jet3::var(0, x);
        let tj = Jet3::var(2, t);
        let mut u = Jet3::constant(u0);
        for _ in 0..6 {
            let s = xj + tj * u;
            let g = u - f.eval_jet(&s);
            let dg = -(tj * fp.eval_jet(&s)) + 1.0;
            u = u - g * dg.recip();
        }
        Ok(u)
    }

    /// Residual of the dispersionless KP equation,
    /// `u_xt - u_x^2 - u u_xx - u_yy`, from the analytic jet.
    pub fn dkp_residual(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let j = self.eval_jet(x, y, t, 2)?.jet;
        Ok(dkp_residual_of_jet(&j))
    }

    /// Canonical potential jet `w` with `w_x = u_y`, `w_y = u_t - u u_x`.
    ///
    /// Available for the closed-form families; `Custom` solutions do not
    /// carry one.
    pub fn canonical_w_jet(&self, x: f64, y: f64, t: f64) -> Result<Jet3> {
        self.guard_check(x, y, t)?;
        let xj = Jet3::var(0, x);
        let yj = Jet3::var(1, y);
        let tj = Jet3::var(2, t);
        match &self.family {
            // y-independent solutions: u_y = 0 and u_t = u u_x, so w = 0.
            Family::Flat | Family::Hodograph { .. } => Ok(Jet3::zero()),
            Family::ConformalEinstein { f1, f2, f3 } => {
                let a1 = f1.eval_jet(&tj);
                let a1p = f1.deriv().eval_jet(&tj);
                let a1pp = f1.deriv().deriv().eval_jet(&tj);
                let a2 = f2.eval_jet(&tj);
                let a2p = f2.deriv().eval_jet(&tj);
                let a3 = f3.eval_jet(&tj);
                let a3p = f3.deriv().eval_jet(&tj);
                let a = (a1p - a1 * a1) * 0.5;
                let ap = (a1pp - a1 * a1p * 2.0) * 0.5;
                Ok(xj * (a * yj * 2.0 + a2)
                    + (ap - a * a1) * yj * yj * yj * (1.0 / 3.0)
                    + (a2p - a1 * a2) * yj * yj * 0.5
                    + (a3p - a1 * a3) * yj)
            }
            Family::HyperCr { p } => {
                let pj = p.eval_jet(&tj);
                let ppj = p.deriv().eval_jet(&tj);
                let y3 = yj * yj * yj;
                let lny = if y > 0.0 { yj.ln() } else { (-yj).ln() };
                Ok((xj * xj * xj) / y3 * (2.0 / 3.0) - (pj * xj) / (yj * yj) + ppj * lny)
            }
            Family::NoKilling { a } => {
                let aj = a.eval_jet(&tj);
                let apj = a.deriv().eval_jet(&tj);
                let appj = a.deriv().deriv().eval_jet(&tj);
                let arg = xj / tj + aj;
                let t3 = tj * tj * tj;
                Ok(arg.powf(1.5) * (2.0 / 3.0) + (apj * 2.0 + tj * appj) * yj
                    - (yj * yj * yj) / t3 * (1.0 / 6.0))
            }
            Family::Custom(c) => Err(Error::Config(format!(
                "custom family `{}` has no canonical potential",
                c.name
            ))),
        }
    }
}

/// dKP residual read off an order->=2 jet.
pub fn dkp_residual_of_jet(j: &Jet3) -> f64 {
    j.partial(1, 0, 1) - j.partial(1, 0, 0).powi(2) - j.value() * j.partial(2, 0, 0)
        - j.partial(0, 2, 0)
}

/// Scalar hodograph solve of `u = f(x + t u)` by Newton iteration, seeded
/// with `u = f(x)`. Returns `(u, s)` with `s = x + t u`. Errors with
/// [`Error::Caustic`] when `|1 - t f'(s)|` is below the guard's tolerance and
/// with [`Error::NoConvergence`] if Newton stalls.
pub fn hodograph_solve(f: &Poly1, x: f64, t: f64, guard: &Guard) -> Result<(f64, f64)> {
    let fp = f.deriv();
    let mut u = f.eval(x);
    for _ in 0..100 {
        let s = x + t * u;
        let denom = 1.0 - t * fp.eval(s);
        if denom.abs() < guard.caustic_tol {
            return Err(Error::Caustic(denom.abs()));
        }
        let step = (u - f.eval(s)) / denom;
        u -= step;
        if step.abs() <= 1e-13 * u.abs().max(1.0) {
            let s = x + t * u;
            let denom = 1.0 - t * fp.eval(s);
            if denom.abs() < guard.caustic_tol {
                return Err(Error::Caustic(denom.abs()));
            }
            return Ok((u, s));
        }
    }
    Err(Error::NoConvergence(100))
}

/// Time at which the fastest characteristic of a hodograph solution first
/// crosses: along each characteristic `u_x(t) = F / (1 - t F)` with
/// `F = f'(s)` frozen, so `1 / max_x u_x(t) = 1 / F_max - t` decays linearly
/// and hits zero at `t* = 1 / F_max`. `F_max` is found by sampling `f'` on
/// `[s_lo, s_hi]` and polishing with a golden-section pass.
pub fn hodograph_breaking_time(f: &Poly1, s_lo: f64, s_hi: f64, samples: usize) -> Option<f64> {
    let fp = f.deriv();
    let n = samples.max(8);
    let mut best_s = s_lo;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let s = s_lo + (s_hi - s_lo) * i as f64 / n as f64;
        let v = fp.eval(s);
        if v > best {
            best = v;
            best_s = s;
        }
    }
    // golden-section polish around the best sample
    let h = (s_hi - s_lo) / n as f64;
    let (mut lo, mut hi) = (best_s - h, best_s + h);
    for _ in 0..80 {
        let m1 = lo + 0.381_966_011_250_105 * (hi - lo);
        let m2 = hi - 0.381_966_011_250_105 * (hi - lo);
        if fp.eval(m1) < fp.eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let fmax = fp.eval(0.5 * (lo + hi)).max(best);
    (fmax > 0.0).then(|| 1.0 / fmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ce_simple() -> SolutionSpec {
        // f1 = 1, f2 = f3 = 0: u = x - y^2/2
        SolutionSpec::conformal_einstein(Poly1::constant(1.0), Poly1::zero(), Poly1::zero())
    }

    #[test]
    fn flat_jet_values() {
        let s = SolutionSpec::flat();
        let j = s.eval_jet(1.0, 1.0, 2.0, 4).unwrap();
        assert_abs_diff_eq!(j.u(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.ux(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.ut(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(j.uy(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.partial(1, 0, 1), 0.25, epsilon = 1e-15);
        assert!(s.eval_jet(1.0, 1.0, 0.0, 4).is_err());
    }

    #[test]
    fn families_satisfy_dkp() {
        let specs = [
            SolutionSpec::flat(),
            ce_simple(),
            SolutionSpec::conformal_einstein(
                Poly1::new(vec![0.3, -0.2]),
                Poly1::new(vec![0.1, 0.0, 0.4]),
                Poly1::new(vec![-0.5, 0.2]),
            ),
            SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3])),
            SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.4, -0.1])),
            SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5])),
        ];
        for s in &specs {
            for &(x, y, t) in
                &[(0.4, 0.3, 0.8), (1.1, -0.6, 1.4), (0.9, 0.5, 2.1), (0.2, 1.2, 0.6)]
            {
                let r = s.dkp_residual(x, y, t).unwrap();
                assert!(r.abs() < 1e-10, "residual {r:.3e} for {:?}", s.family);
            }
        }
    }

    #[test]
    fn no_killing_frozen_jet() {
        // A(t) = t at (x, y, t) = (1, 0.5, 1): closed forms in sqrt(2)
        let s = SolutionSpec::no_killing(Poly1::new(vec![0.0, 1.0]));
        let j = s.eval_jet(1.0, 0.5, 1.0, 4).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(j.u(), r2 / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.ux(), -1.0 + r2 / 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.uy(), r2, epsilon = 1e-14);
        assert_abs_diff_eq!(j.ut(), 2.0 - r2 / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.uxx(), -r2 / 32.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.uxy(), r2 / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.uyy(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.partial(1, 0, 1), 1.0 - r2 / 4.0, epsilon = 1e-13);
        // branch guard: x/t + A(t) < 0
        assert!(s.eval_jet(-3.0, 0.5, 1.0, 4).is_err());
    }

    #[test]
    fn hodograph_matches_implicit_relation() {
        let f = Poly1::new(vec![0.2, 0.5, -0.3]);
        let s = SolutionSpec::hodograph(f.clone());
        let (x, t) = (0.7, 0.9);
        let j = s.eval_jet(x, 0.0, t, 4).unwrap();
        let u = j.u();
        assert_abs_diff_eq!(u, f.eval(x + t * u), epsilon = 1e-12);
        // u_x = F / (1 - t F), u_t = u u_x with F = f'(s)
        let bigf = f.deriv().eval(x + t * u);
        assert_abs_diff_eq!(j.ux(), bigf / (1.0 - t * bigf), epsilon = 1e-11);
        assert_abs_diff_eq!(j.ut(), u * j.ux(), epsilon = 1e-11);
        assert_abs_diff_eq!(j.uy(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn hodograph_caustic_guard() {
        // f(s) = s: u = x / (1 - t), breaks at t = 1
        let s = SolutionSpec::hodograph(Poly1::new(vec![0.0, 1.0]));
        assert!(matches!(
            s.eval_jet(0.3, 0.0, 1.0 - 1e-9, 2),
            Err(Error::Caustic(_))
        ));
        assert_abs_diff_eq!(
            hodograph_breaking_time(&Poly1::new(vec![0.0, 1.0]), -1.0, 1.0, 64).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn canonical_w_satisfies_structure_equations() {
        let specs = [
            SolutionSpec::flat(),
            ce_simple(),
            SolutionSpec::conformal_einstein(
                Poly1::new(vec![0.3, -0.2]),
                Poly1::new(vec![0.1, 0.0, 0.4]),
                Poly1::new(vec![-0.5, 0.2]),
            ),
            SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3])),
            SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.4, -0.1])),
            SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5])),
        ];
        for s in &specs {
            for &(x, y, t) in &[(0.4, 0.3, 0.8), (1.1, -0.6, 1.4), (0.3, -1.2, 2.2)] {
                let u = s.eval_jet(x, y, t, 2).unwrap().jet;
                let w = s.canonical_w_jet(x, y, t).unwrap();
                let wx = w.partial(1, 0, 0);
                let wy = w.partial(0, 1, 0);
                assert_abs_diff_eq!(wx, u.partial(0, 1, 0), epsilon = 1e-10);
                assert_abs_diff_eq!(
                    wy,
                    u.partial(0, 0, 1) - u.value() * u.partial(1, 0, 0),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn hyper_cr_negative_y_branch() {
        let s = SolutionSpec::hyper_cr(Poly1::new(vec![1.0, 0.5]));
        for &(x, y, t) in &[(0.4, -0.8, 0.3), (1.0, -1.5, 0.9)] {
            let u = s.eval_jet(x, y, t, 2).unwrap().jet;
            let w = s.canonical_w_jet(x, y, t).unwrap();
            assert_abs_diff_eq!(w.partial(1, 0, 0), u.partial(0, 1, 0), epsilon = 1e-11);
            assert_abs_diff_eq!(
                w.partial(0, 1, 0),
                u.partial(0, 0, 1) - u.value() * u.partial(1, 0, 0),
                epsilon = 1e-11
            );
        }
        assert!(s.eval_jet(0.4, 0.0, 0.3, 2).is_err());
    }

    #[test]
    fn serde_roundtrip_and_unknown_family() {
        let s = SolutionSpec::conformal_einstein(
            Poly1::new(vec![1.0]),
            Poly1::zero(),
            Poly1::new(vec![0.0, 2.0]),
        );
        let text = s.to_json().unwrap();
        let back = SolutionSpec::from_json(&text).unwrap();
        match back.family {
            Family::ConformalEinstein { f1, f3, .. } => {
                assert_eq!(f1.coeffs, vec![1.0]);
                assert_eq!(f3.coeffs, vec![0.0, 2.0]);
            }
            other => panic!("wrong family {other:?}"),
        }
        assert!(matches!(
            SolutionSpec::from_json(r#"{"family":"spherical"}"#),
            Err(Error::UnknownFamily(_))
        ));
        // degree cap enforced on deserialize
        let too_big = format!(
            r#"{{"family":"hyper-cr","params":{{"p":[{}]}}}}"#,
            vec!["1"; 12].join(",")
        );
        assert!(matches!(
            SolutionSpec::from_json(&too_big),
            Err(Error::DegreeOverflow { .. })
        ));
        // custom families refuse to serialize
        let c = SolutionSpec::custom("blob", |_, _, _| Ok(Jet3::zero()));
        assert!(c.to_json().is_err());
    }

    #[test]
    fn ce_simple_closed_form() {
        // u = x - y^2/2, w = -x y + y^3/6, third coefficient u3 = -u^2
        let s = ce_simple();
        let (x, y, t) = (0.8, -0.4, 1.7);
        let j = s.eval_jet(x, y, t, 4).unwrap();
        assert_abs_diff_eq!(j.u(), x - y * y / 2.0, epsilon = 1e-14);
        let w = s.canonical_w_jet(x, y, t).unwrap();
        assert_abs_diff_eq!(w.value(), -x * y + y * y * y / 6.0, epsilon = 1e-14);
    }
}
