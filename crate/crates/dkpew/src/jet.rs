//! Truncated trivariate Taylor arithmetic ("jets") up to total order 4.
//!
//! A [`Jet3`] stores the Taylor coefficients of a smooth function of three
//! variables around a base point: `c[i,j,k]` multiplies
//! `dx^i dy^j dt^k / (i! j! k!)` -- i.e. `c[i,j,k]` is the Taylor coefficient,
//! and the mixed partial is `c[i,j,k] * i! j! k!`, recovered by
//! [`Jet3::partial`]. All arithmetic (ring operations, composition, and the
//! analytic functions needed by the solution families) is exact on the
//! retained orders; coefficients beyond total degree 4 are dropped.
//!
//! The three slots are always ordered `(x, y, t)` here. Modules that use a
//! different coordinate ordering (the Weyl structure uses `(t, y, x)`)
//! re-order at their own boundary.

/// Maximum total derivative order retained.
pub const ORDER: usize = 4;

/// Number of monomials `x^i y^j t^k` with `i + j + k <= 4`.
pub const NCOEF: usize = 35;

/// Monomial exponents in graded order (total degree 0, 1, 2, ...).
const MON: [(usize, usize, usize); NCOEF] = build_monomials();

/// `IDX[i][j][k]` is the flat index of the monomial `x^i y^j t^k`.
const IDX: [[[usize; ORDER + 1]; ORDER + 1]; ORDER + 1] = build_index();

const fn build_monomials() -> [(usize, usize, usize); NCOEF] {
    let mut mon = [(0usize, 0usize, 0usize); NCOEF];
    let mut n = 0;
    let mut total = 0;
    while total <= ORDER {
        let mut i = 0;
        while i <= total {
            let mut j = 0;
            while j <= total - i {
                mon[n] = (i, j, total - i - j);
                n += 1;
                j += 1;
            }
            i += 1;
        }
        total += 1;
    }
    mon
}

const fn build_index() -> [[[usize; ORDER + 1]; ORDER + 1]; ORDER + 1] {
    let mut idx = [[[usize::MAX; ORDER + 1]; ORDER + 1]; ORDER + 1];
    let mut n = 0;
    while n < NCOEF {
        let (i, j, k) = MON[n];
        idx[i][j][k] = n;
        n += 1;
    }
    idx
}

const FACT: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Truncated Taylor expansion of a function of `(x, y, t)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    /// Taylor coefficients in the graded monomial order of `MON`.
    pub c: [f64; NCOEF],
}

impl Jet3 {
    /// The constant function `v`.
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = v;
        Jet3 { c }
    }

    /// The coordinate function along `axis` (0 = x, 1 = y, 2 = t) with value
    /// `v` at the base point.
    pub fn var(axis: usize, v: f64) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = v;
        let lin = match axis {
            0 => IDX[1][0][0],
            1 => IDX[0][1][0],
            2 => IDX[0][0][1],
            _ => panic!("Jet3::var: axis must be 0, 1 or 2"),
        };
        c[lin] = 1.0;
        Jet3 { c }
    }

    pub fn zero() -> Self {
        Jet3 { c: [0.0; NCOEF] }
    }

    /// Value of the function at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Mixed partial derivative `d^{i+j+k} f / dx^i dy^j dt^k` at the base
    /// point. Panics if `i + j + k > 4`.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(i + j + k <= ORDER, "partial order exceeds jet order");
        self.c[IDX[i][j][k]] * FACT[i] * FACT[j] * FACT[k]
    }

    /// Taylor coefficient accessor (partial divided by factorials).
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[IDX[i][j][k]]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet3 { c }
    }

    /// Jet of the partial derivative along `axis`. The result is exact only
    /// up to total order 3; its order-4 coefficients are zeroed.
    pub fn deriv(&self, axis: usize) -> Self {
        let mut out = [0.0; NCOEF];
        for (n, &(i, j, k)) in MON.iter().enumerate() {
            let (src, mult) = match axis {
                0 if i + 1 + j + k <= ORDER => (IDX[i + 1][j][k], (i + 1) as f64),
                1 if i + j + 1 + k <= ORDER => (IDX[i][j + 1][k], (j + 1) as f64),
                2 if i + j + k + 1 <= ORDER => (IDX[i][j][k + 1], (k + 1) as f64),
                0 | 1 | 2 => continue,
                _ => panic!("Jet3::deriv: axis must be 0, 1 or 2"),
            };
            out[n] = self.c[src] * mult;
        }
        Jet3 { c: out }
    }

    /// Truncated product.
    pub fn mul(&self, rhs: &Jet3) -> Self {
        let mut out = [0.0; NCOEF];
        for (na, &(ia, ja, ka)) in MON.iter().enumerate() {
            let ca = self.c[na];
            if ca == 0.0 {
                continue;
            }
            let da = ia + ja + ka;
            for (nb, &(ib, jb, kb)) in MON.iter().enumerate() {
                if da + ib + jb + kb > ORDER {
                    continue;
                }
                let cb = rhs.c[nb];
                if cb == 0.0 {
                    continue;
                }
                out[IDX[ia + ib][ja + jb][ka + kb]] += ca * cb;
            }
        }
        Jet3 { c: out }
    }

    /// The nilpotent part `self - value`: same jet with constant term zeroed.
    fn nilpotent(&self) -> Self {
        let mut c = self.c;
        c[0] = 0.0;
        Jet3 { c }
    }

    /// Evaluates a degree-4 power series `sum a_n s^n` at the nilpotent jet
    /// `s` (constant term must be zero) by Horner's scheme.
    fn series(s: &Jet3, a: [f64; ORDER + 1]) -> Self {
        debug_assert_eq!(s.c[0], 0.0);
        let mut acc = Jet3::constant(a[ORDER]);
        for n in (0..ORDER).rev() {
            acc = acc.mul(s) + a[n];
        }
        acc
    }

    /// Reciprocal `1 / self`. Follows IEEE semantics if the value at the base
    /// point is zero (coefficients become non-finite).
    pub fn recip(&self) -> Self {
        let v = self.c[0];
        let s = self.nilpotent().scale(1.0 / v);
        Jet3::series(&s, [1.0, -1.0, 1.0, -1.0, 1.0]).scale(1.0 / v)
    }

    /// Real power `self^p` for a positive base-point value.
    pub fn powf(&self, p: f64) -> Self {
        let v = self.c[0];
        let s = self.nilpotent().scale(1.0 / v);
        let mut binom = [1.0; ORDER + 1];
        for n in 1..=ORDER {
            binom[n] = binom[n - 1] * (p - (n - 1) as f64) / n as f64;
        }
        Jet3::series(&s, binom).scale(v.powf(p))
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Natural logarithm; requires a positive base-point value.
    pub fn ln(&self) -> Self {
        let v = self.c[0];
        let s = self.nilpotent().scale(1.0 / v);
        Jet3::series(&s, [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25]) + v.ln()
    }

    pub fn exp(&self) -> Self {
        let s = self.nilpotent();
        Jet3::series(&s, [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]).scale(self.c[0].exp())
    }

    pub fn sin(&self) -> Self {
        let (sv, cv) = self.c[0].sin_cos();
        let s = self.nilpotent();
        Jet3::series(&s, [sv, cv, -sv / 2.0, -cv / 6.0, sv / 24.0])
    }

    pub fn cos(&self) -> Self {
        let (sv, cv) = self.c[0].sin_cos();
        let s = self.nilpotent();
        Jet3::series(&s, [cv, -sv, -cv / 2.0, sv / 6.0, cv / 24.0])
    }

    /// Taylor composition: substitutes the zero-constant jets
    /// `(dx, dy, dt)` for the displacement variables of `self`. This is the
    /// chain rule to order 4: if `self` expands `f` around `p` and `dx` is the
    /// expansion of `X(q) - X(q0)` around `q0` with `X(q0) = p`, the result
    /// expands `f(X(q), Y(q), T(q))` around `q0`.
    pub fn compose(&self, dx: &Jet3, dy: &Jet3, dt: &Jet3) -> Self {
        debug_assert_eq!(dx.c[0], 0.0);
        debug_assert_eq!(dy.c[0], 0.0);
        debug_assert_eq!(dt.c[0], 0.0);
        let mut px = [Jet3::constant(1.0); ORDER + 1];
        let mut py = [Jet3::constant(1.0); ORDER + 1];
        let mut pt = [Jet3::constant(1.0); ORDER + 1];
        for n in 1..=ORDER {
            px[n] = px[n - 1].mul(dx);
            py[n] = py[n - 1].mul(dy);
            pt[n] = pt[n - 1].mul(dt);
        }
        let mut acc = Jet3::zero();
        for (n, &(i, j, k)) in MON.iter().enumerate() {
            let c = self.c[n];
            if c == 0.0 {
                continue;
            }
            acc = acc + px[i].mul(&py[j]).mul(&pt[k]).scale(c);
        }
        acc
    }

    /// Largest absolute coefficient, a convenient size measure.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

impl std::ops::Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet3 { c }
    }
}

impl std::ops::Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet3 { c }
    }
}

impl std::ops::Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl std::ops::Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        Jet3::mul(&self, &rhs)
    }
}

impl std::ops::Div for Jet3 {
    type Output = Jet3;
    fn div(self, rhs: Jet3) -> Jet3 {
        Jet3::mul(&self, &rhs.recip())
    }
}

impl std::ops::Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        let mut c = self.c;
        c[0] += rhs;
        Jet3 { c }
    }
}

impl std::ops::Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self + (-rhs)
    }
}

impl std::ops::Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample() -> Jet3 {
        // f = sin(x) * exp(y) + t^2 * x around (0.3, -0.2, 0.7), assembled
        // from the analytic pieces so every op gets exercised.
        let x = Jet3::var(0, 0.3);
        let y = Jet3::var(1, -0.2);
        let t = Jet3::var(2, 0.7);
        sin_jet(&x) * y.exp() + t * t * x
    }

    fn sin_jet(a: &Jet3) -> Jet3 {
        // sin(a0 + s) = sin a0 cos s + cos a0 sin s, series to order 4.
        let s = {
            let mut c = a.c;
            c[0] = 0.0;
            Jet3 { c }
        };
        let cos_s = Jet3::series(&s, [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0]);
        let sin_s = Jet3::series(&s, [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0]);
        cos_s.scale(a.c[0].sin()) + sin_s.scale(a.c[0].cos())
    }

    #[test]
    fn partials_match_closed_forms() {
        let f = sample();
        let (x, y, t): (f64, f64, f64) = (0.3, -0.2, 0.7);
        assert_abs_diff_eq!(f.value(), x.sin() * y.exp() + t * t * x, epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(1, 0, 0), x.cos() * y.exp() + t * t, epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(0, 1, 0), x.sin() * y.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(0, 0, 1), 2.0 * t * x, epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(2, 0, 0), -x.sin() * y.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(1, 1, 0), x.cos() * y.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(1, 0, 1), 2.0 * t, epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(2, 1, 1), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.partial(3, 1, 0), -x.cos() * y.exp(), epsilon = 1e-13);
    }

    #[test]
    fn division_and_roots_invert() {
        let f = sample() + 3.0; // keep the value well away from zero
        let g = f.recip();
        let id = f * g;
        assert_abs_diff_eq!(id.c[0], 1.0, epsilon = 1e-14);
        for &c in &id.c[1..] {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-13);
        }
        let r = f.sqrt();
        let back = r * r - f;
        assert!(back.max_abs() < 1e-13);
        let p = f.powf(1.5) * f.powf(-1.5);
        assert_abs_diff_eq!(p.c[0], 1.0, epsilon = 1e-13);
    }

    #[test]
    fn log_exp_roundtrip() {
        let f = sample() + 2.5;
        let round = f.ln().exp() - f;
        assert!(round.max_abs() < 1e-13);
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let f = sample();
        let fx = f.deriv(0);
        assert_abs_diff_eq!(fx.value(), f.partial(1, 0, 0), epsilon = 1e-15);
        assert_abs_diff_eq!(fx.partial(1, 0, 0), f.partial(2, 0, 0), epsilon = 1e-15);
        assert_abs_diff_eq!(fx.partial(0, 2, 1), f.partial(1, 2, 1), epsilon = 1e-15);
    }

    #[test]
    fn composition_is_the_chain_rule() {
        // g(q) = f(X(q), Y(q), T(q)) with X = q0^2 + q1, Y = q0 - q2,
        // T = q1 q2, checked against the directly assembled jet of g.
        let q = (0.4, 0.1, -0.3);
        let x0 = q.0 * q.0 + q.1;
        let y0 = q.0 - q.2;
        let t0 = q.1 * q.2;

        // f = x*y + t^3 expanded at (x0, y0, t0):
        let f = {
            let x = Jet3::var(0, x0);
            let y = Jet3::var(1, y0);
            let t = Jet3::var(2, t0);
            x * y + t * t * t
        };
        let (q0, q1, q2) = (Jet3::var(0, q.0), Jet3::var(1, q.1), Jet3::var(2, q.2));
        let bx = (q0 * q0 + q1 - x0).nilpotent();
        let by = (q0 - q2 - y0).nilpotent();
        let bt = (q1 * q2 - t0).nilpotent();
        let g = f.compose(&bx, &by, &bt);

        let direct = {
            let q0 = Jet3::var(0, q.0);
            let q1 = Jet3::var(1, q.1);
            let q2 = Jet3::var(2, q.2);
            let x = q0 * q0 + q1;
            let y = q0 - q2;
            let t = q1 * q2;
            x * y + t * t * t
        };
        assert!((g - direct).max_abs() < 1e-13);
    }
}
