//! Lax distribution of the dKP equation and its four-dimensional lift.
//!
//! Vector fields here live on a 4-space `(x, y, t, fiber)` where `fiber` is
//! either the spectral parameter of the Lax pair or the `z` coordinate of the
//! hyper-Kahler lift. Components are polynomials in the fiber coordinate with
//! coefficients carried as Taylor jets in `(x, y, t)`, so commutators are
//! computed exactly (jet differentiation for the base directions, polynomial
//! differentiation for the fiber).
//!
//! The spectral pair is
//!
//! ```text
//! L0 = d/dt - u d/dx - L d/dy + u_y d/dL
//! L1 = d/dy - L d/dx + u_x d/dL
//! ```
//!
//! (`L` the spectral parameter). With the standard commutator
//! `[V, W] = V(W) - W(V)` the on-shell relation is `[L0, L1] = u_x L1`, so
//! [`lax_identity_residual`] reports the coefficients of
//! `[L0, L1] - u_x L1`; off shell the defect sits entirely in the `d/dL`
//! component at fiber order zero and equals the dKP residual.
//!
//! The lift replaces the spectral direction by a genuine coordinate `z`:
//!
//! ```text
//! n00 = d/dt - (u + z^2) d/dx + (u_y + u_x z) d/dz
//! n01 = d/dy + z d/dx
//! n10 = d/dy - z d/dx + u_x d/dz
//! n11 = d/dx
//! ```
//!
//! and the two-parameter family `[n00 - L n01, n10 - L n11]` collapses
//! on-shell for every `L`; the only off-shell term is again the dKP residual,
//! in the `d/dz` slot of `[n00, n10]`.

use crate::error::Result;
use crate::jet::Jet3;
use crate::solutions::SolutionSpec;

/// Polynomial in the fiber coordinate with jet coefficients.
#[derive(Clone, Debug, Default)]
pub struct FiberPoly {
    /// `coeffs[k]` multiplies `fiber^k`.
    pub coeffs: Vec<Jet3>,
}

impl FiberPoly {
    pub fn zero() -> Self {
        FiberPoly { coeffs: vec![] }
    }

    pub fn from_jets(coeffs: Vec<Jet3>) -> Self {
        let mut p = FiberPoly { coeffs };
        p.trim();
        p
    }

    pub fn constant(j: Jet3) -> Self {
        Self::from_jets(vec![j])
    }

    fn trim(&mut self) {
        while self
            .coeffs
            .last()
            .is_some_and(|j| j.c.iter().all(|&c| c == 0.0))
        {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn add(&self, rhs: &FiberPoly) -> FiberPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).copied().unwrap_or_else(Jet3::zero);
            let b = rhs.coeffs.get(k).copied().unwrap_or_else(Jet3::zero);
            out.push(a + b);
        }
        FiberPoly::from_jets(out)
    }

    fn sub(&self, rhs: &FiberPoly) -> FiberPoly {
        self.add(&rhs.scale(-1.0))
    }

    fn scale(&self, s: f64) -> FiberPoly {
        FiberPoly::from_jets(self.coeffs.iter().map(|j| j.scale(s)).collect())
    }

    fn mul_jet(&self, j: &Jet3) -> FiberPoly {
        FiberPoly::from_jets(self.coeffs.iter().map(|c| c.mul(j)).collect())
    }

    fn mul(&self, rhs: &FiberPoly) -> FiberPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return FiberPoly::zero();
        }
        let mut out = vec![Jet3::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (a, ca) in self.coeffs.iter().enumerate() {
            for (b, cb) in rhs.coeffs.iter().enumerate() {
                out[a + b] = out[a + b] + ca.mul(cb);
            }
        }
        FiberPoly::from_jets(out)
    }

    /// Derivative along a base axis (0 = x, 1 = y, 2 = t), acting on the jet
    /// coefficients.
    fn deriv_base(&self, axis: usize) -> FiberPoly {
        FiberPoly::from_jets(self.coeffs.iter().map(|j| j.deriv(axis)).collect())
    }

    /// Derivative along the fiber coordinate.
    fn deriv_fiber(&self) -> FiberPoly {
        if self.coeffs.len() <= 1 {
            return FiberPoly::zero();
        }
        FiberPoly::from_jets(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, j)| j.scale(k as f64))
                .collect(),
        )
    }

    /// Value at the base point for a given fiber coordinate.
    pub fn eval_value(&self, fiber: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, j| acc * fiber + j.value())
    }

    /// Largest absolute coefficient value at the base point.
    pub fn max_coeff_value(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0_f64, |m, j| m.max(j.value().abs()))
    }
}

/// A vector field on `(x, y, t, fiber)`; component order
/// `(d/dx, d/dy, d/dt, d/dfiber)`.
#[derive(Clone, Debug)]
pub struct VectorField4 {
    pub label: String,
    pub comps: [FiberPoly; 4],
}

impl VectorField4 {
    pub fn new(label: impl Into<String>, comps: [FiberPoly; 4]) -> Self {
        VectorField4 { label: label.into(), comps }
    }

    /// Largest absolute coefficient value across all components.
    pub fn max_coeff_value(&self) -> f64 {
        self.comps
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.max_coeff_value()))
    }

    /// Component values at a fiber coordinate, ordered `(x, y, t, fiber)`.
    pub fn values(&self, fiber: f64) -> [f64; 4] {
        [
            self.comps[0].eval_value(fiber),
            self.comps[1].eval_value(fiber),
            self.comps[2].eval_value(fiber),
            self.comps[3].eval_value(fiber),
        ]
    }

    fn scale(&self, s: f64) -> VectorField4 {
        VectorField4::new(
            format!("{}*{}", s, self.label),
            [
                self.comps[0].scale(s),
                self.comps[1].scale(s),
                self.comps[2].scale(s),
                self.comps[3].scale(s),
            ],
        )
    }

    fn add(&self, rhs: &VectorField4) -> VectorField4 {
        VectorField4::new(
            format!("{} + {}", self.label, rhs.label),
            [
                self.comps[0].add(&rhs.comps[0]),
                self.comps[1].add(&rhs.comps[1]),
                self.comps[2].add(&rhs.comps[2]),
                self.comps[3].add(&rhs.comps[3]),
            ],
        )
    }

    fn mul_jet(&self, j: &Jet3) -> VectorField4 {
        VectorField4::new(
            self.label.clone(),
            [
                self.comps[0].mul_jet(j),
                self.comps[1].mul_jet(j),
                self.comps[2].mul_jet(j),
                self.comps[3].mul_jet(j),
            ],
        )
    }

    /// Directional derivative of a scalar fiber-polynomial along the field:
    /// `V(f) = V^x d_x f + V^y d_y f + V^t d_t f + V^fiber d_fiber f`.
    fn apply(&self, f: &FiberPoly) -> FiberPoly {
        let mut out = self.comps[0].mul(&f.deriv_base(0));
        out = out.add(&self.comps[1].mul(&f.deriv_base(1)));
        out = out.add(&self.comps[2].mul(&f.deriv_base(2)));
        out.add(&self.comps[3].mul(&f.deriv_fiber()))
    }
}

/// Standard commutator `[V, W]^i = V(W^i) - W(V^i)`.
pub fn commutator(v: &VectorField4, w: &VectorField4) -> VectorField4 {
    let comps = [
        v.apply(&w.comps[0]).sub(&w.apply(&v.comps[0])),
        v.apply(&w.comps[1]).sub(&w.apply(&v.comps[1])),
        v.apply(&w.comps[2]).sub(&w.apply(&v.comps[2])),
        v.apply(&w.comps[3]).sub(&w.apply(&v.comps[3])),
    ];
    VectorField4::new(format!("[{}, {}]", v.label, w.label), comps)
}

fn one() -> FiberPoly {
    FiberPoly::constant(Jet3::constant(1.0))
}

fn fiber_linear(c0: Jet3, c1: Jet3) -> FiberPoly {
    FiberPoly::from_jets(vec![c0, c1])
}

/// The spectral-parameter Lax pair `(L0, L1)` at a point (see module docs).
pub fn dkp_lax_pair(
    spec: &SolutionSpec,
    x: f64,
    y: f64,
    t: f64,
) -> Result<(VectorField4, VectorField4)> {
    let u = spec.eval_jet(x, y, t, 4)?.jet;
    let ux = u.deriv(0);
    let uy = u.deriv(1);
    let l0 = VectorField4::new(
        "L0",
        [
            FiberPoly::constant(-u),
            fiber_linear(Jet3::zero(), Jet3::constant(-1.0)),
            one(),
            FiberPoly::constant(uy),
        ],
    );
    let l1 = VectorField4::new(
        "L1",
        [
            fiber_linear(Jet3::zero(), Jet3::constant(-1.0)),
            one(),
            FiberPoly::zero(),
            FiberPoly::constant(ux),
        ],
    );
    Ok((l0, l1))
}

/// Max absolute coefficient of `[L0, L1] - u_x L1` at the point. Vanishes
/// identically on solutions; off shell the only surviving entry is the dKP
/// residual in the `d/dfiber` component at fiber order 0.
pub fn lax_identity_residual(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<f64> {
    let u = spec.eval_jet(x, y, t, 4)?.jet;
    let (l0, l1) = dkp_lax_pair(spec, x, y, t)?;
    let bracket = commutator(&l0, &l1);
    let residual = bracket.add(&l1.mul_jet(&u.deriv(0)).scale(-1.0));
    Ok(residual.max_coeff_value())
}

/// The four lifted frame fields `(n00, n01, n10, n11)` on `(x, y, t, z)`.
pub fn hk_lift(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<[VectorField4; 4]> {
    let u = spec.eval_jet(x, y, t, 4)?.jet;
    let ux = u.deriv(0);
    let uy = u.deriv(1);
    let n00 = VectorField4::new(
        "n00",
        [
            FiberPoly::from_jets(vec![-u, Jet3::zero(), Jet3::constant(-1.0)]),
            FiberPoly::zero(),
            one(),
            fiber_linear(uy, ux),
        ],
    );
    let n01 = VectorField4::new(
        "n01",
        [
            fiber_linear(Jet3::zero(), Jet3::constant(1.0)),
            one(),
            FiberPoly::zero(),
            FiberPoly::zero(),
        ],
    );
    let n10 = VectorField4::new(
        "n10",
        [
            fiber_linear(Jet3::zero(), Jet3::constant(-1.0)),
            one(),
            FiberPoly::zero(),
            FiberPoly::constant(ux),
        ],
    );
    let n11 = VectorField4::new(
        "n11",
        [one(), FiberPoly::zero(), FiberPoly::zero(), FiberPoly::zero()],
    );
    Ok([n00, n01, n10, n11])
}

/// Max coefficient over the three spectral-parameter slots of
/// `[n00 - L n01, n10 - L n11]`, i.e. over `[n00, n10]`,
/// `[n00, n11] + [n01, n10]`, and `[n01, n11]`. Zero exactly when `u` is
/// on-shell (the whole family of distributions is then Frobenius-integrable
/// for every `L`).
pub fn lift_bracket_residual(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<f64> {
    let [n00, n01, n10, n11] = hk_lift(spec, x, y, t)?;
    let b0 = commutator(&n00, &n10);
    let b1 = commutator(&n00, &n11).add(&commutator(&n01, &n10));
    let b2 = commutator(&n01, &n11);
    Ok(b0
        .max_coeff_value()
        .max(b1.max_coeff_value())
        .max(b2.max_coeff_value()))
}

/// Divergence with respect to the coordinate volume `dt dy dx dz`:
/// `sum_a d_a V^a`. All four lift fields are divergence-free.
pub fn divergence(v: &VectorField4) -> FiberPoly {
    let mut out = v.comps[0].deriv_base(0);
    out = out.add(&v.comps[1].deriv_base(1));
    out = out.add(&v.comps[2].deriv_base(2));
    out.add(&v.comps[3].deriv_fiber())
}

/// Pairing of the four lift fields with the volume form `dt^dy^dx^dz`,
/// normalized by the tetrad convention: the return value is `det / 2`, which
/// equals the conformal factor `f^2 = u_x / 2` entering the metric
/// reconstruction `g^{-1} = f^{-2} (n01 . n10 - n00 . n11)`. The raw
/// determinant itself is `u_x`, independent of `z`.
pub fn volume_pairing(spec: &SolutionSpec, x: f64, y: f64, t: f64, z: f64) -> Result<f64> {
    let fields = hk_lift(spec, x, y, t)?;
    // rows: n00, n10, n01, n11; columns: (t, y, x, z) component values
    let order = [0usize, 2, 1, 3];
    let mut m = [[0.0; 4]; 4];
    for (r, &fi) in order.iter().enumerate() {
        let vals = fields[fi].values(z);
        m[r] = [vals[2], vals[1], vals[0], vals[3]];
    }
    Ok(crate::geometry::det(&m) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly1;
    use crate::solutions::dkp_residual_of_jet;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_solution_pair_commutes() {
        let zero = SolutionSpec::custom("zero", |_, _, _| Ok(Jet3::zero()));
        let (l0, l1) = dkp_lax_pair(&zero, 0.3, -0.2, 0.9).unwrap();
        let b = commutator(&l0, &l1);
        assert_eq!(b.max_coeff_value(), 0.0);
    }

    #[test]
    fn identity_residual_vanishes_on_families() {
        let specs = [
            SolutionSpec::flat(),
            SolutionSpec::conformal_einstein(
                Poly1::new(vec![0.3, -0.2]),
                Poly1::new(vec![0.1, 0.4]),
                Poly1::constant(-0.5),
            ),
            SolutionSpec::hyper_cr(Poly1::new(vec![0.7, -0.3])),
            SolutionSpec::hodograph(Poly1::new(vec![0.0, 0.4, -0.1])),
            SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5])),
        ];
        for s in &specs {
            for &(x, y, t) in &[(0.4, 0.3, 0.8), (1.1, -0.6, 1.4)] {
                let r = lax_identity_residual(s, x, y, t).unwrap();
                assert!(r < 1e-12, "{:?}: residual {r:.3e}", s.family);
            }
        }
    }

    #[test]
    fn off_shell_defect_is_the_dkp_residual() {
        // u = x^2 y: clearly not a solution
        let bad = SolutionSpec::custom("x2y", |x, y, _| {
            let xj = Jet3::var(0, x);
            let yj = Jet3::var(1, y);
            Ok(xj * xj * yj)
        });
        let (x, y, t) = (0.7, 0.4, 1.1);
        let u = bad.eval_jet(x, y, t, 4).unwrap().jet;
        let res = dkp_residual_of_jet(&u);
        let (l0, l1) = dkp_lax_pair(&bad, x, y, t).unwrap();
        let defect = commutator(&l0, &l1).add(&l1.mul_jet(&u.deriv(0)).scale(-1.0));
        // d/dfiber slot, fiber order 0, carries exactly the dKP residual
        assert_abs_diff_eq!(defect.comps[3].coeffs[0].value(), res, epsilon = 1e-12);
        for (i, c) in defect.comps.iter().enumerate() {
            for (k, j) in c.coeffs.iter().enumerate() {
                if (i, k) != (3, 0) {
                    assert_abs_diff_eq!(j.value(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn lift_brackets_close_on_shell() {
        let spec = SolutionSpec::no_killing(Poly1::new(vec![2.0, 0.5]));
        for &(x, y, t) in &[(0.4, 0.3, 0.8), (1.0, 0.5, 1.0)] {
            let r = lift_bracket_residual(&spec, x, y, t).unwrap();
            assert!(r < 1e-12, "lift bracket residual {r:.3e}");
        }
        // single off-shell bracket [n00, n10]: dKP residual in the z-slot
        let bad = SolutionSpec::custom("x2y", |x, y, _| {
            let xj = Jet3::var(0, x);
            let yj = Jet3::var(1, y);
            Ok(xj * xj * yj)
        });
        let (x, y, t) = (0.7, 0.4, 1.1);
        let res = bad.dkp_residual(x, y, t).unwrap();
        let [n00, _, n10, _] = hk_lift(&bad, x, y, t).unwrap();
        let b = commutator(&n00, &n10);
        assert_abs_diff_eq!(b.comps[3].coeffs[0].value(), res, epsilon = 1e-12);
    }

    #[test]
    fn lift_fields_are_divergence_free() {
        let spec = SolutionSpec::hyper_cr(Poly1::new(vec![0.4, 0.2]));
        let fields = hk_lift(&spec, 0.8, 1.2, 0.5).unwrap();
        for f in &fields {
            assert!(divergence(f).max_coeff_value() < 1e-13, "{}", f.label);
        }
    }

    #[test]
    fn volume_pairing_is_half_ux() {
        let spec = SolutionSpec::no_killing(Poly1::new(vec![0.0, 1.0]));
        let j = spec.eval_jet(1.0, 0.5, 1.0, 1).unwrap();
        for &z in &[0.0, 0.7, -1.3] {
            let vp = volume_pairing(&spec, 1.0, 0.5, 1.0, z).unwrap();
            assert_abs_diff_eq!(vp, j.ux() / 2.0, epsilon = 1e-12);
        }
    }
}
