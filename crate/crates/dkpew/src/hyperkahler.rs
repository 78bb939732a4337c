//! The four-dimensional hyper-Kahler geometry built over a dKP solution.
//!
//! Coordinates in this module are ordered **`(x, y, t, z)`** (indices
//! 0..3); `z` is the extra fiber direction. The metric attached to a
//! solution `u(x, y, t)` is
//!
//! ```text
//! g = V h - V^{-1} (dz + alpha)^2,     V = u_x / 2,
//! h = dy^2 - 4 dx dt - 4 u dt^2,       alpha = -u_y dt - (u_x / 2) dy,
//! ```
//!
//! with `det g = u_x^2`. The pair `(V, alpha)` solves the abelian monopole
//! equation `*_h (dV + (1/2) nu V) = d alpha` of the Weyl structure from
//! [`crate::weyl_geometry`]; [`monopole_residual`] checks that equation for
//! arbitrary candidate pairs using the explicit duality relations of the
//! 3-metric (see [`hodge_star_one_form`]).
//!
//! The null tetrad returned by [`tetrad`] reproduces `g` through
//!
//! ```text
//! g_ij = e00_i e11_j + e00_j e11_i - e01_i e10_j - e01_j e10_i,
//! ```
//!
//! and the associated self-dual two-forms
//!
//! ```text
//! S00 = e00 ^ e10,   S01 = e00 ^ e11 + e01 ^ e10,   S11 = e01 ^ e11
//! ```
//!
//! satisfy the simplicity identities `S01^S01 = -2 S00^S11 = 2 u_x` (as
//! coefficients of `dx^dy^dt^dz`, all other products vanish) and are closed
//! exactly when `u` is on-shell: the only nonzero exterior derivative is
//! `(dS11)_{xyt} = u_xt - u_x^2 - u u_xx - u_yy`.
//!
//! [`jones_tod_reduce`] runs the symmetry reduction along `K = d/dz` and
//! recovers the Weyl structure up to the conformal factor `-u_x^2 / 4` and
//! the induced gauge shift `nu -> nu + 2 d ln phi`.

use crate::error::{Error, Result};
use crate::geometry::{self, invert_with_det, MetricFn};
use crate::jet::Jet3;
use crate::poly::Poly1;
use crate::solutions::SolutionSpec;

type Mat4 = [[f64; 4]; 4];
type Point4 = [f64; 4];

const UX_FLOOR: f64 = 1e-12;

fn base_jet(spec: &SolutionSpec, p: Point4, order: usize) -> Result<Jet3> {
    Ok(spec.eval_jet(p[0], p[1], p[2], order)?.jet)
}

fn guard_ux(ux: f64) -> Result<f64> {
    if ux.abs() < UX_FLOOR {
        return Err(Error::DegenerateMonopole(ux / 2.0));
    }
    Ok(ux)
}

/// Metric components of the lift at `p = (x, y, t, z)`. Fails with
/// [`Error::DegenerateMonopole`] where `u_x` (hence `V = u_x/2` and
/// `det g = u_x^2`) collapses.
pub fn metric_from_dkp(spec: &SolutionSpec, p: Point4) -> Result<Mat4> {
    let j = base_jet(spec, p, 1)?;
    let (u, ux, uy) = (j.value(), j.partial(1, 0, 0), j.partial(0, 1, 0));
    guard_ux(ux)?;
    let mut g = [[0.0; 4]; 4];
    g[0][2] = -ux;
    g[2][0] = -ux;
    g[2][2] = -2.0 * u * ux - 2.0 * uy * uy / ux;
    g[1][2] = -uy;
    g[2][1] = -uy;
    g[3][3] = -2.0 / ux;
    g[3][1] = 1.0;
    g[1][3] = 1.0;
    g[3][2] = 2.0 * uy / ux;
    g[2][3] = 2.0 * uy / ux;
    Ok(g)
}

/// Assemble `V h - V^{-1}(dz + alpha)^2` for a candidate monopole pair given
/// as functions of the base point; `alpha` components are ordered `(t, y, x)`
/// like the one-forms of [`crate::weyl_geometry`]. Domain failures surface as
/// non-finite entries, matching the closure conventions used by the
/// finite-difference curvature routines.
pub fn monopole_metric(
    spec: &SolutionSpec,
    v: impl Fn(f64, f64, f64) -> Result<f64> + 'static,
    alpha: impl Fn(f64, f64, f64) -> Result<[f64; 3]> + 'static,
) -> impl Fn(Point4) -> Mat4 {
    let spec = spec.clone();
    move |p: Point4| {
        let bad = [[f64::NAN; 4]; 4];
        let (x, y, t) = (p[0], p[1], p[2]);
        let Ok(j) = spec.eval_jet(x, y, t, 0) else { return bad };
        let u = j.u();
        let Ok(vv) = v(x, y, t) else { return bad };
        let Ok(a_tyx) = alpha(x, y, t) else { return bad };
        if vv.abs() < UX_FLOOR {
            return bad;
        }
        // h in (x, y, t) order, alpha likewise
        let h = [[0.0, 0.0, -2.0], [0.0, 1.0, 0.0], [-2.0, 0.0, -4.0 * u]];
        let a = [a_tyx[2], a_tyx[1], a_tyx[0]];
        let mut g = [[0.0; 4]; 4];
        for i in 0..3 {
            for k in 0..3 {
                g[i][k] = vv * h[i][k] - a[i] * a[k] / vv;
            }
            g[i][3] = -a[i] / vv;
            g[3][i] = -a[i] / vv;
        }
        g[3][3] = -1.0 / vv;
        g
    }
}

/// Null tetrad covectors at `p`, components in `(x, y, t, z)` order.
#[derive(Clone, Copy, Debug)]
pub struct Tetrad {
    pub e00: Point4,
    pub e10: Point4,
    pub e01: Point4,
    pub e11: Point4,
}

pub fn tetrad(spec: &SolutionSpec, p: Point4) -> Result<Tetrad> {
    let j = base_jet(spec, p, 1)?;
    let (u, ux, uy) = (j.value(), j.partial(1, 0, 0), j.partial(0, 1, 0));
    guard_ux(ux)?;
    let z = p[3];
    Ok(Tetrad {
        e00: [0.0, 0.0, -ux, 0.0],
        e10: [0.0, 0.0, -uy / ux, 1.0 / ux],
        e01: [0.0, -ux, -(uy + z * ux), 1.0],
        e11: [1.0, 0.0, u - z * uy / ux, z / ux],
    })
}

/// `g_ij = e00_i e11_j + e00_j e11_i - e01_i e10_j - e01_j e10_i`.
pub fn tetrad_metric(frame: &Tetrad) -> Mat4 {
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = frame.e00[i] * frame.e11[j] + frame.e00[j] * frame.e11[i]
                - frame.e01[i] * frame.e10[j]
                - frame.e01[j] * frame.e10[i];
        }
    }
    g
}

/// Slot order for antisymmetric pairs: `(x,y) (x,t) (x,z) (y,t) (y,z) (t,z)`.
const PAIR_SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A two-form on `(x, y, t, z)` stored over [`PAIR_SLOTS`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoForm4 {
    pub c: [f64; 6],
}

impl TwoForm4 {
    /// Component `w_ij` for arbitrary index order (antisymmetric lookup).
    pub fn comp(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        for (s, &(a, b)) in PAIR_SLOTS.iter().enumerate() {
            if (a, b) == (i, j) {
                return self.c[s];
            }
            if (a, b) == (j, i) {
                return -self.c[s];
            }
        }
        unreachable!()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Wedge of two covectors.
pub fn wedge2(a: &Point4, b: &Point4) -> TwoForm4 {
    let mut c = [0.0; 6];
    for (s, &(i, j)) in PAIR_SLOTS.iter().enumerate() {
        c[s] = a[i] * b[j] - a[j] * b[i];
    }
    TwoForm4 { c }
}

/// Coefficient of `w ^ n` against the basis four-form `dx^dy^dt^dz`.
pub fn wedge4(w: &TwoForm4, n: &TwoForm4) -> f64 {
    let (wxy, wxt, wxz, wyt, wyz, wtz) = (w.c[0], w.c[1], w.c[2], w.c[3], w.c[4], w.c[5]);
    let (nxy, nxt, nxz, nyt, nyz, ntz) = (n.c[0], n.c[1], n.c[2], n.c[3], n.c[4], n.c[5]);
    wxy * ntz + wtz * nxy - wxt * nyz - wyz * nxt + wxz * nyt + wyt * nxz
}

/// The self-dual triple `(S00, S01, S11)` at `p` (see module docs).
pub fn sigma_forms(spec: &SolutionSpec, p: Point4) -> Result<[TwoForm4; 3]> {
    let f = tetrad(spec, p)?;
    let s00 = wedge2(&f.e00, &f.e10);
    let s11 = wedge2(&f.e01, &f.e11);
    let mut s01 = wedge2(&f.e00, &f.e11);
    let cross = wedge2(&f.e01, &f.e10);
    for k in 0..6 {
        s01.c[k] += cross.c[k];
    }
    Ok([s00, s01, s11])
}

/// Finite-difference exterior derivatives of the three forms; returns the
/// max absolute component of `dS00`, `dS01`, `dS11` over the four coordinate
/// triples. On-shell all three vanish; off-shell the defect is the dKP
/// residual, carried by `(dS11)_{xyt}`.
pub fn closure_residual(spec: &SolutionSpec, p: Point4, step: f64) -> Result<[f64; 3]> {
    let eval = |q: Point4| -> [[f64; 6]; 3] {
        match sigma_forms(spec, q) {
            Ok([a, b, c]) => [a.c, b.c, c.c],
            Err(_) => [[f64::NAN; 6]; 3],
        }
    };
    // grad[a][form][slot] = d_a S_(slot)
    let mut grad = [[[0.0; 6]; 3]; 4];
    for axis in 0..4 {
        for (s, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
            let mut q = p;
            q[axis] += s * step;
            let v = eval(q);
            let w = w / (12.0 * step);
            for form in 0..3 {
                for slot in 0..6 {
                    grad[axis][form][slot] += w * v[form][slot];
                }
            }
        }
    }
    let slot_of = |i: usize, j: usize| -> (usize, f64) {
        for (s, &(a, b)) in PAIR_SLOTS.iter().enumerate() {
            if (a, b) == (i, j) {
                return (s, 1.0);
            }
            if (a, b) == (j, i) {
                return (s, -1.0);
            }
        }
        unreachable!()
    };
    let mut out = [0.0_f64; 3];
    for form in 0..3 {
        for a in 0..4 {
            for b in (a + 1)..4 {
                for c in (b + 1)..4 {
                    let (sbc, fbc) = slot_of(b, c);
                    let (sac, fac) = slot_of(a, c);
                    let (sab, fab) = slot_of(a, b);
                    let d = grad[a][form][sbc] * fbc - grad[b][form][sac] * fac
                        + grad[c][form][sab] * fab;
                    if !d.is_finite() {
                        return Err(Error::NonFinite(d));
                    }
                    out[form] = out[form].max(d.abs());
                }
            }
        }
    }
    Ok(out)
}

/// Hodge star of a one-form on the 3-space `(t, y, x)` carrying
/// `h = dy^2 - 4 dx dt - 4u dt^2` (area element 2, orientation
/// `eps_tyx = -1`). Input components `(t, y, x)`, output two-form slots
/// `((t,y), (t,x), (y,x))`. The defining samples are
/// `*dt = dt^dy`, `*dy = 2 dt^dx`, `*dx = -2u dt^dy + dy^dx`.
pub fn hodge_star_one_form(u: f64, beta: [f64; 3]) -> [f64; 3] {
    // h^{-1} rows/cols in (t, y, x)
    let hinv = [[0.0, 0.0, -0.5], [0.0, 1.0, 0.0], [-0.5, 0.0, u]];
    let mut up = [0.0; 3];
    for i in 0..3 {
        for m in 0..3 {
            up[i] += hinv[i][m] * beta[m];
        }
    }
    // (*b)_{jk} = 2 eps_{jki} b^i with eps_{tyx} = -1
    [-2.0 * up[2], 2.0 * up[1], -2.0 * up[0]]
}

/// The distinguished monopole pair `V = u_x/2`,
/// `alpha = -u_y dt - (u_x/2) dy`, returned as jets (components `(t, y, x)`).
pub fn canonical_monopole(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<(Jet3, [Jet3; 3])> {
    let u = spec.eval_jet(x, y, t, 4)?.jet;
    let ux = u.deriv(0);
    let v = ux.scale(0.5);
    Ok((v, [-u.deriv(1), ux.scale(-0.5), Jet3::zero()]))
}

/// Residual two-form `*_h (dV + (1/2) nu V) - d alpha` of a candidate
/// monopole pair, slots `((t,y), (t,x), (y,x))`. Derivatives are taken from
/// the jets, so the result is exact up to rounding: zero for the canonical
/// pair on solutions, and equal to the dKP residual in the `(t,y)` slot when
/// `u` is taken off-shell.
pub fn monopole_residual(
    spec: &SolutionSpec,
    v: &Jet3,
    alpha: &[Jet3; 3],
    x: f64,
    y: f64,
    t: f64,
) -> Result<[f64; 3]> {
    let u = spec.eval_jet(x, y, t, 2)?.jet;
    let ux = u.partial(1, 0, 0);
    // b = dV + (1/2) nu V in (t, y, x); nu = -4 u_x dt
    let b = [
        v.partial(0, 0, 1) - 2.0 * ux * v.value(),
        v.partial(0, 1, 0),
        v.partial(1, 0, 0),
    ];
    let star = hodge_star_one_form(u.value(), b);
    // d alpha over ((t,y),(t,x),(y,x)); jet axes are (x, y, t)
    let d = |j: &Jet3, axis: usize| match axis {
        0 => j.partial(0, 0, 1),
        1 => j.partial(0, 1, 0),
        _ => j.partial(1, 0, 0),
    };
    let dalpha = [
        d(&alpha[1], 0) - d(&alpha[0], 1),
        d(&alpha[2], 0) - d(&alpha[0], 2),
        d(&alpha[2], 1) - d(&alpha[1], 2),
    ];
    Ok([star[0] - dalpha[0], star[1] - dalpha[1], star[2] - dalpha[2]])
}

/// [`monopole_residual`] for the canonical pair.
pub fn canonical_monopole_residual(
    spec: &SolutionSpec,
    x: f64,
    y: f64,
    t: f64,
) -> Result<[f64; 3]> {
    let (v, alpha) = canonical_monopole(spec, x, y, t)?;
    monopole_residual(spec, &v, &alpha, x, y, t)
}

/// The linearization of the dKP flow around `u`, applied to a perturbation
/// jet: `V_yy - V_xt + u V_xx + 2 u_x V_x + u_xx V`. For `V = u_x/2` this is
/// `-(1/2) d_x` of the dKP residual, hence zero along solutions.
pub fn linearized_dkp_apply(u: &Jet3, v: &Jet3) -> f64 {
    v.partial(0, 2, 0) - v.partial(1, 0, 1)
        + u.value() * v.partial(2, 0, 0)
        + 2.0 * u.partial(1, 0, 0) * v.partial(1, 0, 0)
        + u.partial(2, 0, 0) * v.value()
}

/// 4D Ricci tensor of the lifted metric by nested finite differences.
pub fn ricci4(spec: &SolutionSpec, p: Point4, step: f64) -> Result<Mat4> {
    let spec = spec.clone();
    let metric = move |q: Point4| -> Mat4 {
        metric_from_dkp(&spec, q).unwrap_or([[f64::NAN; 4]; 4])
    };
    finite_ricci(&metric, p, step)
}

/// FD Ricci of an arbitrary 4-metric closure, with non-finite trapping.
pub fn finite_ricci(metric: &MetricFn<4>, p: Point4, step: f64) -> Result<Mat4> {
    let ric = geometry::ricci(metric, p, step)?;
    let m = geometry::max_abs(&ric);
    if !m.is_finite() {
        return Err(Error::NonFinite(m));
    }
    Ok(ric)
}

fn parity4(p: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    let mut q = p;
    for i in 0..4 {
        for j in (i + 1)..4 {
            match q[i].cmp(&q[j]) {
                std::cmp::Ordering::Greater => {
                    q.swap(i, j);
                    sign = -sign;
                }
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// Result of the quotient by the triholomorphic Killing field `K = d/dz`.
#[derive(Clone, Copy, Debug)]
pub struct JonesTodReport {
    /// Reduced conformal metric `|K|^{-2} g - |K|^{-4} K (x) K` on the base,
    /// components in `(t, y, x)` order.
    pub h_reduced: [[f64; 3]; 3],
    /// Reduced one-form `2 |K|^{-2} *_g (K ^ dK)`, components `(t, y, x)`.
    pub nu_reduced: [f64; 3],
    /// Conformal factor relating `h_reduced` to the dKP Weyl metric
    /// (`-u_x^2 / 4`), read off the `dy^2` slot.
    pub factor: f64,
    /// Max deviation of `h_reduced - factor * h_dkp` over all slots.
    pub factor_spread: f64,
    /// `nu_reduced - nu_dkp - 2 d ln phi` with `phi^2 = |factor|`; zero
    /// because the reduction lands in a conformal gauge shifted by `phi`.
    pub gauge_residual: [f64; 3],
}

/// Reduce the lift along `d/dz` (on the section `z = 0`) and compare with the
/// Weyl structure of the same solution.
pub fn jones_tod_reduce(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<JonesTodReport> {
    let p = [x, y, t, 0.0];
    let g = metric_from_dkp(spec, p)?;
    let (ginv, _) = invert_with_det(&g)?;
    let ksq = g[3][3];
    if ksq.abs() < UX_FLOOR {
        return Err(Error::SingularMetric(ksq));
    }
    let uj = base_jet(spec, p, 4)?;
    let (u, ux) = (uj.value(), uj.partial(1, 0, 0));

    // K as a one-form: K_i = g_{iz}; its base-coordinate gradient from jets.
    let kx = Jet3::zero();
    let ky = Jet3::constant(1.0);
    let uxj = uj.deriv(0);
    let uyj = uj.deriv(1);
    let kt = uyj.scale(2.0) / uxj;
    let kz = uxj.recip().scale(-2.0);
    let kjets = [kx, ky, kt, kz];
    let kvals = [0.0, 1.0, kt.value(), kz.value()];
    // dk[i][j] = d_i K_j - d_j K_i (z-derivatives vanish, axis 3 inert)
    let dpart = |j: &Jet3, axis: usize| if axis < 3 { j.deriv(axis).value() } else { 0.0 };
    let mut dk = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            dk[i][j] = dpart(&kjets[j], i) - dpart(&kjets[i], j);
        }
    }
    // w = K ^ dK
    let mut w = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                w[i][j][k] = kvals[i] * dk[j][k] - kvals[j] * dk[i][k] + kvals[k] * dk[i][j];
            }
        }
    }
    // raise all three slots
    let mut wup = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            s += ginv[i][a] * ginv[j][b] * ginv[k][c] * w[a][b][c];
                        }
                    }
                }
                wup[i][j][k] = s;
            }
        }
    }
    // (*w)_m with the oriented volume factor u_x (vol = dt^dy^dx^dz)
    let volfac = -g[0][2];
    let mut star = [0.0; 4];
    for m in 0..4 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let sgn = parity4([i, j, k, m]);
                    if sgn != 0.0 {
                        s += wup[i][j][k] * sgn;
                    }
                }
            }
        }
        star[m] = volfac * s / 6.0;
    }
    let nu_reduced = [
        2.0 / ksq * star[2],
        2.0 / ksq * star[1],
        2.0 / ksq * star[0],
    ];

    // h_reduced over the base, re-ordered to (t, y, x)
    let kcov = [g[0][3], g[1][3], g[2][3]];
    let mut h_xyt = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            h_xyt[a][b] = g[a][b] / ksq - kcov[a] * kcov[b] / (ksq * ksq);
        }
    }
    let ord = [2usize, 1, 0];
    let mut h_reduced = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            h_reduced[a][b] = h_xyt[ord[a]][ord[b]];
        }
    }

    let factor = h_reduced[1][1];
    let h_dkp = [[-4.0 * u, 0.0, -2.0], [0.0, 1.0, 0.0], [-2.0, 0.0, 0.0]];
    let mut factor_spread = 0.0_f64;
    for a in 0..3 {
        for b in 0..3 {
            factor_spread = factor_spread.max((h_reduced[a][b] - factor * h_dkp[a][b]).abs());
        }
    }
    // gauge shift 2 d ln phi with phi^2 = |factor| = u_x^2 / 4
    let dlog = [
        uj.partial(1, 0, 1) / ux,
        uj.partial(1, 1, 0) / ux,
        uj.partial(2, 0, 0) / ux,
    ];
    let nu_dkp = [-4.0 * ux, 0.0, 0.0];
    let mut gauge_residual = [0.0; 3];
    for m in 0..3 {
        gauge_residual[m] = nu_reduced[m] - nu_dkp[m] - 2.0 * dlog[m];
    }
    Ok(JonesTodReport { h_reduced, nu_reduced, factor, factor_spread, gauge_residual })
}

/// Ricci-flat metric with a null Killing direction, coordinates
/// `(w, t, z, y)`: `g(d/dw, d/dt) = 1`, `g(d/dz, d/dy) = 1`,
/// `g(d/dz, d/dz) = t - F(w)`.
pub fn null_kv_metric(fhat: &Poly1) -> impl Fn(Point4) -> Mat4 {
    let fhat = fhat.clone();
    move |p: Point4| {
        let mut g = [[0.0; 4]; 4];
        g[0][1] = 1.0;
        g[1][0] = 1.0;
        g[2][3] = 1.0;
        g[3][2] = 1.0;
        g[2][2] = p[1] - fhat.eval(p[0]);
        g
    }
}

/// Max absolute 4D Ricci entry of [`null_kv_metric`]; zero for every
/// profile `F`.
pub fn null_kv_ricci_max(fhat: &Poly1, p: Point4, step: f64) -> Result<f64> {
    let metric = null_kv_metric(fhat);
    let ric = finite_ricci(&metric, p, step)?;
    Ok(geometry::max_abs(&ric))
}

/// Pull the lift of the collapsing solution `u = -x/t` back through
/// `x = X t + z^2 t / 2`, `y = Y - z t`; the result is the constant flat
/// metric `g(d/dX, d/dt) = 1`, `g(d/dz, d/dY) = 1`. Returns the pullback
/// components in `(X, Y, t, z)` order.
pub fn flat_chart_pullback(big_x: f64, big_y: f64, t: f64, z: f64) -> Result<Mat4> {
    let spec = SolutionSpec::flat();
    let x = big_x * t + z * z * t / 2.0;
    let y = big_y - z * t;
    let g = metric_from_dkp(&spec, [x, y, t, z])?;
    // rows: (x, y, t, z) over columns (X, Y, t, z)
    let jac = [
        [t, 0.0, big_x + z * z / 2.0, z * t],
        [0.0, 1.0, -z, -t],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let mut p = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += g[i][j] * jac[i][a] * jac[j][b];
                }
            }
            p[a][b] = s;
        }
    }
    Ok(p)
}

/// Max deviation of [`flat_chart_pullback`] from the constant flat metric.
pub fn flat_chart_residual(big_x: f64, big_y: f64, t: f64, z: f64) -> Result<f64> {
    let p = flat_chart_pullback(big_x, big_y, t, z)?;
    let mut expect = [[0.0; 4]; 4];
    expect[0][2] = 1.0;
    expect[2][0] = 1.0;
    expect[3][1] = 1.0;
    expect[1][3] = 1.0;
    let mut dev = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            dev = dev.max((p[i][j] - expect[i][j]).abs());
        }
    }
    Ok(dev)
}
