//! Spectral-parameter machinery: the contact two-form on the extended phase
//! space `(x, y, t, λ̃)`, its simplicity obstructions, Laurent-series Darboux
//! checks, and the incidence/causality classifier for point pairs.
//!
//! The two-form is assembled from exact differentials,
//!
//! ```text
//! Π = dx∧dλ̃ + dy∧dH₂ + dt∧dH₃,
//! H₂ = λ̃²/2 + u,   H₃ = λ̃³/3 + λ̃ u + w,
//! ```
//!
//! so it is closed by construction; [`pi_closure_residual`] still probes the
//! assembled components with finite differences to guard assembly bugs.
//! `Π∧Π` collapses to `2λ̃ (wₓ − u_y) + 2 (u_t − u uₓ − w_y)` times the volume
//! element, so [`simplicity_residual`] returns exactly the two scalar
//! equations the flow couples through the potential `w`.
//!
//! [`darboux_check`] expands `dP∧dQ − Π` for the canonical series
//!
//! ```text
//! Q = λ̃ + Σᵢ uᵢ λ̃⁻ⁱ,   P = x + Q y + Q² t + Σᵢ wᵢ Q⁻ⁱ,
//! ```
//!
//! reporting the residual order by order in λ̃ over the three base-coordinate
//! slots `(x,y)`, `(x,t)`, `(y,t)`. The slots containing `dλ̃` keep
//! first-derivative tails of `w` at order `λ̃⁻¹` for every finite truncation,
//! so they are deliberately outside the check. With `u₁ = u` and `w₁ = w`
//! the orders `λ̃¹` and `λ̃⁰` cancel identically; the `λ̃⁻¹` order vanishes
//! exactly when `wₓ = u_y` holds and `u` solves the flow, which the
//! [`canonical_chain`] coefficients `(u, w, u₃)` realize for the closed-form
//! families.
//!
//! Points of the reduced space trace parabolas `ξ = x + λ̃ y + λ̃² t` in the
//! `(ξ, λ̃)` plane; [`curve_intersection`] applies the discriminant
//! `h = Δy² − 4 Δx Δt` of a point pair `(t, y, x)` and labels the pair
//! space-like (two real parameters), null (one double), or time-like
//! (conjugate pair), with the printed parameter formula
//! `λ = (2Δy ∓ √h) / (2Δt)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::jet::Jet3;
use crate::solutions::{Family, SolutionSpec};

/// Default truncation depth: series are kept down to `λ̃^{-DEFAULT_DEPTH}`.
pub const DEFAULT_DEPTH: usize = 6;

/// Index pairs of the two-form slots on `(x, y, t, λ̃)`.
const SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn slot_of(i: usize, j: usize) -> usize {
    SLOTS.iter().position(|&p| p == (i, j)).expect("ordered pair")
}

/// Laurent polynomial in the spectral parameter λ̃ whose coefficients are
/// point jets. Arithmetic truncates consistently below the `floor` power;
/// positive powers are carried exactly.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    floor: i32,
    lo: i32,
    c: Vec<Jet3>,
}

impl LaurentPoly {
    pub fn zero(floor: i32) -> Self {
        Self { floor, lo: 0, c: Vec::new() }
    }

    /// Single term `coeff · λ̃^pow`; terms below the floor are dropped.
    pub fn term(pow: i32, coeff: Jet3, floor: i32) -> Self {
        if pow < floor {
            return Self::zero(floor);
        }
        Self { floor, lo: pow, c: vec![coeff] }
    }

    pub fn floor(&self) -> i32 {
        self.floor
    }

    /// Coefficient of `λ̃^pow` (zero outside the stored range).
    pub fn coeff(&self, pow: i32) -> Jet3 {
        let idx = pow - self.lo;
        if idx < 0 || idx as usize >= self.c.len() {
            Jet3::zero()
        } else {
            self.c[idx as usize]
        }
    }

    /// Highest power carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<i32> {
        (0..self.c.len())
            .rev()
            .find(|&k| self.c[k].max_abs() > 0.0)
            .map(|k| self.lo + k as i32)
    }

    fn normalize(mut self) -> Self {
        while self.c.last().is_some_and(|j| j.max_abs() == 0.0) {
            self.c.pop();
        }
        let lead = self.c.iter().take_while(|j| j.max_abs() == 0.0).count();
        if lead > 0 {
            self.c.drain(..lead);
            self.lo += lead as i32;
        }
        if self.c.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let floor = self.floor.min(rhs.floor);
        if self.c.is_empty() {
            return Self { floor, ..rhs.clone() };
        }
        if rhs.c.is_empty() {
            return Self { floor, ..self.clone() };
        }
        let lo = self.lo.min(rhs.lo);
        let hi = (self.lo + self.c.len() as i32).max(rhs.lo + rhs.c.len() as i32);
        let mut c = vec![Jet3::zero(); (hi - lo) as usize];
        for (k, j) in self.c.iter().enumerate() {
            c[(self.lo - lo) as usize + k] = *j;
        }
        for (k, j) in rhs.c.iter().enumerate() {
            c[(rhs.lo - lo) as usize + k] = c[(rhs.lo - lo) as usize + k] + *j;
        }
        Self { floor, lo, c }.normalize()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|j| j.scale(s)).collect(), ..self.clone() }
    }

    pub fn mul_jet(&self, j: &Jet3) -> Self {
        Self { c: self.c.iter().map(|k| k.mul(j)).collect(), ..self.clone() }.normalize()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let floor = self.floor.min(rhs.floor);
        let mut out = Self::zero(floor);
        if self.c.is_empty() || rhs.c.is_empty() {
            return out;
        }
        let lo = (self.lo + rhs.lo).max(floor);
        let hi = self.lo + self.c.len() as i32 - 1 + rhs.lo + rhs.c.len() as i32 - 1;
        if hi < lo {
            return out;
        }
        out.lo = lo;
        out.c = vec![Jet3::zero(); (hi - lo + 1) as usize];
        for (a, ja) in self.c.iter().enumerate() {
            for (b, jb) in rhs.c.iter().enumerate() {
                let pow = self.lo + a as i32 + rhs.lo + b as i32;
                if pow < floor {
                    continue;
                }
                let idx = (pow - lo) as usize;
                out.c[idx] = out.c[idx] + ja.mul(jb);
            }
        }
        out.normalize()
    }

    /// Coefficient-wise derivative along a base axis (0 = x, 1 = y, 2 = t).
    pub fn deriv_base(&self, axis: usize) -> Self {
        Self { c: self.c.iter().map(|j| j.deriv(axis)).collect(), ..self.clone() }.normalize()
    }

    /// Derivative in the spectral parameter.
    pub fn deriv_lambda(&self) -> Self {
        let mut out = Self::zero(self.floor);
        for (k, j) in self.c.iter().enumerate() {
            let pow = self.lo + k as i32;
            if pow == 0 || pow - 1 < self.floor {
                continue;
            }
            out = out.add(&Self::term(pow - 1, j.scale(pow as f64), self.floor));
        }
        out
    }

    /// Series reciprocal about the leading term, truncated at the floor.
    /// Requires an invertible leading coefficient.
    pub fn recip(&self) -> Result<Self> {
        let d = self
            .degree()
            .ok_or_else(|| Error::Config("reciprocal of the zero series".into()))?;
        let lead = self.coeff(d);
        if lead.value() == 0.0 {
            return Err(Error::Config(
                "series reciprocal needs an invertible leading coefficient".into(),
            ));
        }
        let one = Self::term(0, Jet3::constant(1.0), self.floor);
        let mut inv = Self::term(-d, lead.recip(), self.floor);
        for _ in 0..8 {
            let err = one.sub(&self.mul(&inv));
            if err.degree().is_none() {
                break;
            }
            inv = inv.add(&inv.mul(&err));
        }
        Ok(inv)
    }

    /// Value of the series at a concrete λ̃ (λ̃ ≠ 0 if negative powers are
    /// present), with jet coefficients collapsed to their values.
    pub fn eval_lambda(&self, lam: f64) -> Jet3 {
        let mut acc = Jet3::zero();
        for (k, j) in self.c.iter().enumerate() {
            let pow = self.lo + k as i32;
            acc = acc + j.scale(lam.powi(pow));
        }
        acc
    }
}

/// The contact two-form with slots ordered by [`SLOTS`] on `(x, y, t, λ̃)`.
#[derive(Clone, Debug)]
pub struct PiForm {
    pub slots: [LaurentPoly; 6],
}

fn exterior_d(h: &LaurentPoly) -> [LaurentPoly; 4] {
    [h.deriv_base(0), h.deriv_base(1), h.deriv_base(2), h.deriv_lambda()]
}

fn unit_covector(axis: usize, floor: i32) -> [LaurentPoly; 4] {
    core::array::from_fn(|k| {
        if k == axis {
            LaurentPoly::term(0, Jet3::constant(1.0), floor)
        } else {
            LaurentPoly::zero(floor)
        }
    })
}

fn wedge(a: &[LaurentPoly; 4], b: &[LaurentPoly; 4]) -> [LaurentPoly; 6] {
    core::array::from_fn(|s| {
        let (i, j) = SLOTS[s];
        a[i].mul(&b[j]).sub(&a[j].mul(&b[i]))
    })
}

/// Assemble `Π = dx∧dλ̃ + dy∧dH₂ + dt∧dH₃` from order-≥1 jets of `u`, `w`.
pub fn build_pi(u: &Jet3, w: &Jet3) -> PiForm {
    let fl = -(DEFAULT_DEPTH as i32);
    let h2 = LaurentPoly::term(2, Jet3::constant(0.5), fl)
        .add(&LaurentPoly::term(0, *u, fl));
    let h3 = LaurentPoly::term(3, Jet3::constant(1.0 / 3.0), fl)
        .add(&LaurentPoly::term(1, *u, fl))
        .add(&LaurentPoly::term(0, *w, fl));
    let dx = unit_covector(0, fl);
    let dy = unit_covector(1, fl);
    let dt = unit_covector(2, fl);
    let dl = unit_covector(3, fl);
    let parts = [wedge(&dx, &dl), wedge(&dy, &exterior_d(&h2)), wedge(&dt, &exterior_d(&h3))];
    let slots = core::array::from_fn(|s| {
        parts[0][s].add(&parts[1][s]).add(&parts[2][s])
    });
    PiForm { slots }
}

/// `Π∧Π` against the volume element `dx∧dy∧dt∧dλ̃`, as a λ̃-series.
pub fn pi_wedge_square(pi: &PiForm) -> LaurentPoly {
    let s = &pi.slots;
    s[0].mul(&s[5])
        .sub(&s[1].mul(&s[4]))
        .add(&s[2].mul(&s[3]))
        .scale(2.0)
}

/// The two scalar obstructions to `Π∧Π = 0`: the values of the λ̃¹ and λ̃⁰
/// coefficients of `Π∧Π / 2`, equal to `wₓ − u_y` and `u_t − u uₓ − w_y`.
pub fn simplicity_residual(u: &Jet3, w: &Jet3) -> (f64, f64) {
    let sq = pi_wedge_square(&build_pi(u, w)).scale(0.5);
    (sq.coeff(1).value(), sq.coeff(0).value())
}

/// Finite-difference exterior derivative of the assembled two-form at a base
/// point and spectral value, maximized over the four coordinate triples.
/// Needs a family with a canonical potential.
pub fn pi_closure_residual(
    spec: &SolutionSpec,
    point: [f64; 3],
    lam: f64,
    step: f64,
) -> Result<f64> {
    let slot_val = |s: usize, q: [f64; 4]| -> f64 {
        (|| -> Result<f64> {
            let u = spec.eval_jet(q[0], q[1], q[2], 1)?.jet;
            let w = spec.canonical_w_jet(q[0], q[1], q[2])?;
            Ok(build_pi(&u, &w).slots[s].eval_lambda(q[3]).value())
        })()
        .unwrap_or(f64::NAN)
    };
    let p4 = [point[0], point[1], point[2], lam];
    let mut worst = 0.0_f64;
    for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let r = fd::partial(&|q| slot_val(slot_of(b, c), q), p4, a, step)
            - fd::partial(&|q| slot_val(slot_of(a, c), q), p4, b, step)
            + fd::partial(&|q| slot_val(slot_of(a, b), q), p4, c, step);
        if !r.is_finite() {
            return Err(Error::NonFinite(r));
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Expand `dP∧dQ − Π` with `Π` built from the chain heads `u₁`, `w₁`.
///
/// Returns `(order, residual)` pairs from λ̃¹ down to λ̃^{−(n−2)}, where the
/// residual at an order is the largest coefficient value across the three
/// base slots. Truncation keeps powers down to λ̃^{−n}; the two discarded
/// deepest orders absorb the truncation error, so the reported ones are
/// exact.
pub fn darboux_check(
    point: [f64; 3],
    u_chain: &[Jet3],
    w_chain: &[Jet3],
    n: usize,
) -> Result<Vec<(i32, f64)>> {
    let u = u_chain.first().copied().unwrap_or_else(Jet3::zero);
    let w = w_chain.first().copied().unwrap_or_else(Jet3::zero);
    darboux_check_against(point, &build_pi(&u, &w), u_chain, w_chain, n)
}

/// [`darboux_check`] against an externally supplied form, for probing chains
/// whose head coefficients deliberately differ from the solution behind `Π`.
pub fn darboux_check_against(
    point: [f64; 3],
    pi: &PiForm,
    u_chain: &[Jet3],
    w_chain: &[Jet3],
    n: usize,
) -> Result<Vec<(i32, f64)>> {
    if n < 2 {
        return Err(Error::TruncationTooShallow(n));
    }
    let floor = -(n as i32);
    let mut q = LaurentPoly::term(1, Jet3::constant(1.0), floor);
    for (i, ui) in u_chain.iter().enumerate() {
        q = q.add(&LaurentPoly::term(-(i as i32) - 1, *ui, floor));
    }
    let [x, y, t] = point;
    let qinv = q.recip()?;
    let mut p = LaurentPoly::term(0, Jet3::var(0, x), floor)
        .add(&q.mul_jet(&Jet3::var(1, y)))
        .add(&q.mul(&q).mul_jet(&Jet3::var(2, t)));
    let mut qpow = qinv.clone();
    for wi in w_chain {
        p = p.add(&qpow.mul_jet(wi));
        qpow = qpow.mul(&qinv);
    }
    let dq = [q.deriv_base(0), q.deriv_base(1), q.deriv_base(2)];
    let dp = [p.deriv_base(0), p.deriv_base(1), p.deriv_base(2)];
    let mut out = Vec::new();
    for k in (floor + 2..=1).rev() {
        let mut worst = 0.0_f64;
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let res = dp[a]
                .mul(&dq[b])
                .sub(&dp[b].mul(&dq[a]))
                .sub(&pi.slots[slot_of(a, b)]);
            worst = worst.max(res.coeff(k).value().abs());
        }
        out.push((k, worst));
    }
    Ok(out)
}

/// Canonical Laurent chain `(u₁, u₂, u₃) = (u, w, u₃)`, `(w₁) = (w)` for the
/// closed-form families, with the cubic coefficient solving
/// `∂ₓu₃ = u_t − 2 u uₓ`, `∂_y u₃ = w_t − 2 u u_y`.
pub fn canonical_chain(
    spec: &SolutionSpec,
    x: f64,
    y: f64,
    t: f64,
) -> Result<(Vec<Jet3>, Vec<Jet3>)> {
    let u = spec.eval_jet(x, y, t, 4)?.jet;
    let w = spec.canonical_w_jet(x, y, t)?;
    let xj = Jet3::var(0, x);
    let yj = Jet3::var(1, y);
    let tj = Jet3::var(2, t);
    let u3 = match &spec.family {
        // y-independent flows: u_t = u u_x, so u3 = -u^2/2 integrates both.
        Family::Flat | Family::Hodograph { .. } => u.mul(&u).scale(-0.5),
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
            let b = a * yj * yj + a2 * yj + a3;
            let c3 = (ap - a * a1) * (1.0 / 3.0);
            let c2 = (a2p - a1 * a2) * 0.5;
            let c1 = a3p - a1 * a3;
            let cy = c3 * yj * yj * 3.0 + c2 * yj * 2.0 + c1;
            let d = c3.deriv(2) * yj * yj * yj * yj * 0.25
                + c2.deriv(2) * yj * yj * yj * (1.0 / 3.0)
                + c1.deriv(2) * yj * yj * 0.5
                - b * b
                + a3 * a3;
            xj * xj * (a * 2.0 - a1 * a1) * 0.5 + xj * (cy - b * a1) + d
        }
        Family::HyperCr { p } => {
            let pj = p.eval_jet(&tj);
            let pp = p.deriv().eval_jet(&tj);
            let ppp = p.deriv().deriv().eval_jet(&tj);
            let lny = if y > 0.0 { yj.ln() } else { (-yj).ln() };
            let y2 = yj * yj;
            -(xj * xj * xj * xj) / (y2 * y2) + pj * xj * xj / (y2 * yj) * 2.0 + pp * xj / yj
                + ppp * (yj * lny - yj)
                - pj * pj / y2
        }
        Family::NoKilling { .. } | Family::Custom(_) => {
            return Err(Error::Config(format!(
                "family `{}` has no closed-form spectral chain",
                spec.family.name()
            )));
        }
    };
    Ok((vec![u, w, u3], vec![w]))
}

/// Causal relation of a point pair under the flat conformal structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    Spacelike,
    Null,
    Timelike,
}

/// Spectral parameters at which the two incidence parabolas meet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IncidenceRoots {
    /// Two real parameters `(2Δy ∓ √h)/(2Δt)` in ascending order (the set is
    /// what the geometry fixes; the formula's branch order flips with the
    /// sign of `Δt`).
    Real { first: f64, second: f64 },
    /// One double parameter `Δy/Δt`.
    Double { value: f64 },
    /// Conjugate pair `re ∓ i·im` with `im ≥ 0`.
    ComplexPair { re: f64, im: f64 },
    /// Degenerate `Δt = 0` case with a single finite parameter `−Δx/Δy`.
    Linear { value: f64 },
    /// Degenerate `Δt = Δy = 0` case: the parabolas never meet at finite λ̃.
    NoFinite,
}

/// Intersection data for a pair of points given as `(t, y, x)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurveIntersection {
    pub separation: [f64; 3],
    pub h_rr: f64,
    pub class: CausalClass,
    pub roots: IncidenceRoots,
}

/// Classify the pair `(p1, p2)` (each `(t, y, x)`) by the discriminant
/// `h = Δy² − 4ΔxΔt` and solve for the meeting parameters.
pub fn curve_intersection(p1: [f64; 3], p2: [f64; 3]) -> Result<CurveIntersection> {
    let r = [p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]];
    if r == [0.0; 3] {
        return Err(Error::CoincidentPoints);
    }
    let h = r[1] * r[1] - 4.0 * r[2] * r[0];
    let class = if h > 0.0 {
        CausalClass::Spacelike
    } else if h < 0.0 {
        CausalClass::Timelike
    } else {
        CausalClass::Null
    };
    let roots = if r[0] != 0.0 {
        if h > 0.0 {
            let s = h.sqrt();
            let a = (2.0 * r[1] - s) / (2.0 * r[0]);
            let b = (2.0 * r[1] + s) / (2.0 * r[0]);
            IncidenceRoots::Real { first: a.min(b), second: a.max(b) }
        } else if h < 0.0 {
            IncidenceRoots::ComplexPair {
                re: r[1] / r[0],
                im: (-h).sqrt() / (2.0 * r[0].abs()),
            }
        } else {
            IncidenceRoots::Double { value: r[1] / r[0] }
        }
    } else if r[1] != 0.0 {
        IncidenceRoots::Linear { value: -r[2] / r[1] }
    } else {
        IncidenceRoots::NoFinite
    };
    Ok(CurveIntersection { separation: r, h_rr: h, class, roots })
}

/// The incidence parabola `ξ = x + λ̃ y + λ̃² t` of a point `(t, y, x)`.
pub fn incidence_eval(p: [f64; 3], lam: Complex64) -> Complex64 {
    Complex64::from(p[2]) + lam * p[1] + lam * lam * p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly1;
    use approx::assert_abs_diff_eq;

    fn ce_basic() -> SolutionSpec {
        SolutionSpec::conformal_einstein(Poly1::constant(1.0), Poly1::zero(), Poly1::zero())
    }

    fn closed_form_families() -> Vec<SolutionSpec> {
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
    fn laurent_reciprocal_inverts_within_depth() {
        let spec = ce_basic();
        let (uc, _) = canonical_chain(&spec, 0.3, -0.7, 0.4).unwrap();
        let n = 6_i32;
        let mut q = LaurentPoly::term(1, Jet3::constant(1.0), -n);
        for (i, ui) in uc.iter().enumerate() {
            q = q.add(&LaurentPoly::term(-(i as i32) - 1, *ui, -n));
        }
        let qinv = q.recip().unwrap();
        let prod = q.mul(&qinv);
        for k in (-(n - 2)..=1).rev() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(prod.coeff(k).value(), want, epsilon = 1e-13);
        }
    }

    #[test]
    fn assembled_slots_match_their_closed_forms() {
        let spec = ce_basic();
        let (x, y, t) = (0.3, -0.7, 0.4);
        let u = spec.eval_jet(x, y, t, 4).unwrap().jet;
        let w = spec.canonical_w_jet(x, y, t).unwrap();
        let pi = build_pi(&u, &w);
        let checks: [(usize, i32, Jet3); 8] = [
            (0, 0, -u.deriv(0)),
            (1, 1, -u.deriv(0)),
            (1, 0, -w.deriv(0)),
            (2, 0, Jet3::constant(1.0)),
            (3, 1, -u.deriv(1)),
            (3, 0, u.deriv(2) - w.deriv(1)),
            (4, 1, Jet3::constant(1.0)),
            (5, 0, u),
        ];
        for (slot, pow, want) in checks {
            assert!(
                (pi.slots[slot].coeff(pow) - want).max_abs() < 1e-14,
                "slot {slot} power {pow}"
            );
        }
        assert!((pi.slots[5].coeff(2) - Jet3::constant(1.0)).max_abs() < 1e-14);
        // trivial pair: only the three dλ̃ columns survive
        let zpi = build_pi(&Jet3::zero(), &Jet3::zero());
        assert_eq!(zpi.slots[0].degree(), None);
        assert_eq!(zpi.slots[1].degree(), None);
        assert_eq!(zpi.slots[3].degree(), None);
        assert_eq!(zpi.slots[2].degree(), Some(0));
        assert_eq!(zpi.slots[4].degree(), Some(1));
        assert_eq!(zpi.slots[5].degree(), Some(2));
    }

    #[test]
    fn wedge_square_stays_low_degree() {
        let u = Jet3::var(0, 0.4) * Jet3::var(0, 0.4) * Jet3::var(1, -0.8);
        let w = Jet3::var(2, 0.9) * Jet3::var(1, -0.8);
        let sq = pi_wedge_square(&build_pi(&u, &w));
        assert!(sq.degree().is_none_or(|d| d <= 4));
        assert!(sq.degree().is_some_and(|d| d <= 1));
    }

    #[test]
    fn simplicity_vanishes_exactly_on_canonical_pairs() {
        for spec in closed_form_families() {
            for &(x, y, t) in &[(0.4, 0.3, 0.8), (1.1, -0.6, 1.4)] {
                let u = spec.eval_jet(x, y, t, 2).unwrap().jet;
                let w = spec.canonical_w_jet(x, y, t).unwrap();
                let (r1, r0) = simplicity_residual(&u, &w);
                assert!(
                    r1.abs() < 1e-10 && r0.abs() < 1e-10,
                    "{}: ({r1:.3e}, {r0:.3e})",
                    spec.family.name()
                );
            }
        }
        let (r1, r0) = simplicity_residual(&Jet3::zero(), &Jet3::zero());
        assert_eq!((r1, r0), (0.0, 0.0));
    }

    #[test]
    fn simplicity_detects_each_broken_equation() {
        // u = x, w = 0: first equation intact, second leaves -x
        let x0 = 0.7;
        let (r1, r0) = simplicity_residual(&Jet3::var(0, x0), &Jet3::zero());
        assert_abs_diff_eq!(r1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r0, -x0, epsilon = 1e-15);
        // u = 0, w = x: first equation leaves w_x = 1, second intact
        let (r1, r0) = simplicity_residual(&Jet3::zero(), &Jet3::var(0, 0.3));
        assert_abs_diff_eq!(r1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r0, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn assembled_form_is_closed() {
        let spec = SolutionSpec::conformal_einstein(
            Poly1::new(vec![0.8, -0.2]),
            Poly1::new(vec![0.1, 0.4]),
            Poly1::constant(-0.5),
        );
        for &lam in &[0.0, 0.7, -1.3] {
            let r = pi_closure_residual(&spec, [0.9, 1.2, 1.1], lam, 1e-2).unwrap();
            assert!(r < 1e-10, "lam {lam}: residual {r:.3e}");
        }
    }

    #[test]
    fn canonical_chains_close_to_cubic_order() {
        let cases = [
            (SolutionSpec::flat(), [0.5, 0.3, 1.2]),
            (ce_basic(), [0.3, -0.7, 0.4]),
            (
                SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3])),
                [0.4, 1.3, 0.7],
            ),
            (
                SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.4, -0.1])),
                [0.4, 0.3, 0.8],
            ),
        ];
        for (spec, p) in cases {
            let (uc, wc) = canonical_chain(&spec, p[0], p[1], p[2]).unwrap();
            let rows = darboux_check(p, &uc, &wc, DEFAULT_DEPTH).unwrap();
            for &(k, r) in &rows {
                if k >= -1 {
                    assert!(r < 1e-10, "{} order {k}: {r:.3e}", spec.family.name());
                }
            }
        }
    }

    #[test]
    fn chain_fixture_values_are_frozen() {
        let (uc, wc) = canonical_chain(&ce_basic(), 0.3, -0.7, 0.4).unwrap();
        assert_abs_diff_eq!(uc[0].value(), 0.055, epsilon = 1e-14);
        assert_abs_diff_eq!(uc[1].value(), 0.15283333333333332, epsilon = 1e-14);
        assert_abs_diff_eq!(uc[2].value(), -0.003025, epsilon = 1e-14);
        assert_abs_diff_eq!(wc[0].value(), uc[1].value(), epsilon = 0.0);
        let spec = SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3]));
        let (uc, _) = canonical_chain(&spec, 0.4, 1.3, 0.7).unwrap();
        assert_abs_diff_eq!(uc[0].value(), 0.2822485207100592, epsilon = 1e-13);
        assert_abs_diff_eq!(uc[1].value(), -0.17526518891390835, epsilon = 1e-13);
        assert_abs_diff_eq!(uc[2].value(), -0.171971919750709, epsilon = 1e-13);
    }

    #[test]
    fn zero_chain_is_flat_darboux() {
        let rows = darboux_check(
            [0.2, -0.5, 0.9],
            &[Jet3::zero(), Jet3::zero(), Jet3::zero()],
            &[Jet3::zero()],
            DEFAULT_DEPTH,
        )
        .unwrap();
        for (_, r) in rows {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn perturbed_head_coefficient_shows_at_order_zero() {
        let spec = ce_basic();
        let p = [0.3, -0.7, 0.4];
        let u = spec.eval_jet(p[0], p[1], p[2], 4).unwrap().jet;
        let w = spec.canonical_w_jet(p[0], p[1], p[2]).unwrap();
        let (mut uc, wc) = canonical_chain(&spec, p[0], p[1], p[2]).unwrap();
        uc[0] = uc[0] + Jet3::var(0, p[0]).scale(0.01);
        let rows = darboux_check_against(p, &build_pi(&u, &w), &uc, &wc, DEFAULT_DEPTH).unwrap();
        let r0 = rows.iter().find(|(k, _)| *k == 0).unwrap().1;
        assert_abs_diff_eq!(r0, 0.01, epsilon = 1e-14);
    }

    #[test]
    fn shallow_truncation_and_missing_chains_error() {
        assert!(matches!(
            darboux_check([0.0; 3], &[Jet3::zero()], &[Jet3::zero()], 1),
            Err(Error::TruncationTooShallow(1))
        ));
        let spec = SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5]));
        assert!(matches!(
            canonical_chain(&spec, 1.0, 0.5, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn intersection_fixtures_pin_the_three_classes() {
        let o = [0.0; 3];
        let c = curve_intersection([1.0, 2.0, 0.0], o).unwrap();
        assert_eq!(c.class, CausalClass::Spacelike);
        assert_abs_diff_eq!(c.h_rr, 4.0, epsilon = 0.0);
        assert_eq!(c.roots, IncidenceRoots::Real { first: 1.0, second: 3.0 });

        let c = curve_intersection([1.0, 2.0, 1.0], o).unwrap();
        assert_eq!(c.class, CausalClass::Null);
        assert_eq!(c.roots, IncidenceRoots::Double { value: 2.0 });

        let c = curve_intersection([1.0, 0.0, 1.0], o).unwrap();
        assert_eq!(c.class, CausalClass::Timelike);
        assert_eq!(c.roots, IncidenceRoots::ComplexPair { re: 0.0, im: 1.0 });
    }

    #[test]
    fn intersection_is_swap_symmetric_and_guards_degeneracies() {
        let p1 = [0.7, -1.2, 0.4];
        let p2 = [0.1, 0.8, -0.9];
        let a = curve_intersection(p1, p2).unwrap();
        let b = curve_intersection(p2, p1).unwrap();
        assert_eq!(a.class, b.class);
        assert_eq!(a.roots, b.roots);
        assert_abs_diff_eq!(a.h_rr, b.h_rr, epsilon = 0.0);

        assert!(matches!(curve_intersection(p1, p1), Err(Error::CoincidentPoints)));

        let lin = curve_intersection([0.0, 2.0, 3.0], [0.0; 3]).unwrap();
        assert_eq!(lin.roots, IncidenceRoots::Linear { value: -1.5 });
        assert_eq!(lin.class, CausalClass::Spacelike);
        // the linear-case parameter genuinely lies on both parabolas
        let z = Complex64::from(-1.5);
        let a = incidence_eval([0.0, 2.0, 3.0], z);
        let b = incidence_eval([0.0; 3], z);
        assert!((a - b).norm() < 1e-14);

        let none = curve_intersection([0.0, 0.0, 1.0], [0.0; 3]).unwrap();
        assert_eq!(none.roots, IncidenceRoots::NoFinite);
        assert_eq!(none.class, CausalClass::Null);
    }

    #[test]
    fn incidence_values_are_pinned() {
        let any = Complex64::new(0.3, 0.2);
        assert!((incidence_eval([0.0, 0.0, 1.0], any) - Complex64::from(1.0)).norm() < 1e-15);
        let v = incidence_eval([1.0, 0.0, 0.0], Complex64::from(2.0));
        assert!((v - Complex64::from(4.0)).norm() < 1e-15);
    }
}
