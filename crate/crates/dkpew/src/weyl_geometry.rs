//! Three-dimensional Weyl structures `(h, nu)` and their curvature tests.
//!
//! A Weyl structure is a conformal metric `h` together with a one-form `nu`
//! fixing the torsion-free connection `D` that preserves the conformal class:
//! `D h = nu (x) h`. Coordinates in this module are always ordered
//! **`(t, y, x)`** (indices 0, 1, 2); solution jets, which live on
//! `(x, y, t)`, are re-ordered at the boundary.
//!
//! The central object is the conformally invariant, trace-free residual
//!
//! ```text
//! chi_ij = R_ij + (1/2) grad_(i nu_j) + (1/4) nu_i nu_j
//!          - (1/3) (R + (1/2) div nu + (1/4) |nu|^2) h_ij
//! ```
//!
//! built from the Levi-Civita data of `h` in the sphere-positive curvature
//! convention of [`crate::geometry`]. For the structure induced by a dKP
//! solution,
//!
//! ```text
//! h = dy^2 - 4 dx dt - 4 u dt^2,    nu = -4 u_x dt,
//! ```
//!
//! `chi` has a single potentially nonzero slot, `chi_tt`, equal to **-2
//! times** the dKP residual `u_xt - u_x^2 - u u_xx - u_yy`; the structure is
//! Einstein--Weyl exactly when `u` solves the equation.
//!
//! The distinguished scalar reported by [`weyl_scalar`] is the trace of the
//! Weyl-connection Ricci tensor taken in the *opposite* curvature convention,
//! `W = -R - 2 div nu + (1/2) |nu|^2`; on dKP structures it equals
//! `-3 u_xx` pointwise. (With the sphere-positive sign used for `chi` the
//! same trace would come out as `+3 u_xx`; the flipped convention is the one
//! whose normalization the rest of the toolkit pins down, e.g. `W = 6` for
//! the hyper-CR family with `P = 0` on the slice `y = 1`.)

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{self, invert_with_det};
use crate::poly::Poly1;
use crate::solutions::SolutionSpec;

/// Index constants for the `(t, y, x)` ordering.
pub const T: usize = 0;
pub const Y: usize = 1;
pub const X: usize = 2;

type Point3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

/// A conformal 3-metric plus Weyl one-form, both given as closures on
/// `(t, y, x)`. Closures signal domain failures by returning non-finite
/// entries, which every public operation converts into an error.
#[derive(Clone)]
pub struct WeylStructure {
    pub label: String,
    h: Arc<dyn Fn(Point3) -> Mat3 + Send + Sync>,
    nu: Arc<dyn Fn(Point3) -> Point3 + Send + Sync>,
}

impl WeylStructure {
    pub fn new(
        label: impl Into<String>,
        h: impl Fn(Point3) -> Mat3 + Send + Sync + 'static,
        nu: impl Fn(Point3) -> Point3 + Send + Sync + 'static,
    ) -> Self {
        WeylStructure { label: label.into(), h: Arc::new(h), nu: Arc::new(nu) }
    }

    pub fn metric(&self, p: Point3) -> Mat3 {
        (self.h)(p)
    }

    pub fn one_form(&self, p: Point3) -> Point3 {
        (self.nu)(p)
    }

    /// `h(v, v)` at `p`; geodesic tests use this to track nullity.
    pub fn norm_sq(&self, p: Point3, v: Point3) -> f64 {
        let h = self.metric(p);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += h[i][j] * v[i] * v[j];
            }
        }
        s
    }
}

/// A vector field on `(t, y, x)`, used for symmetry and weighted-derivative
/// checks.
#[derive(Clone)]
pub struct VectorField3 {
    pub label: String,
    comps: Arc<dyn Fn(Point3) -> Point3 + Send + Sync>,
}

impl VectorField3 {
    pub fn new(
        label: impl Into<String>,
        comps: impl Fn(Point3) -> Point3 + Send + Sync + 'static,
    ) -> Self {
        VectorField3 { label: label.into(), comps: Arc::new(comps) }
    }

    pub fn at(&self, p: Point3) -> Point3 {
        (self.comps)(p)
    }

    /// Pointwise linear combination `sum c_k K_k`.
    pub fn linear_combination(terms: Vec<(f64, VectorField3)>) -> VectorField3 {
        let label = terms
            .iter()
            .map(|(c, k)| format!("{c}*{}", k.label))
            .collect::<Vec<_>>()
            .join(" + ");
        VectorField3::new(label, move |p| {
            let mut v = [0.0; 3];
            for (c, k) in &terms {
                let kv = k.at(p);
                for i in 0..3 {
                    v[i] += c * kv[i];
                }
            }
            v
        })
    }
}

/// The Weyl structure induced by a dKP solution:
/// `h = dy^2 - 4 dx dt - 4 u dt^2`, `nu = -4 u_x dt`.
pub fn ew_from_dkp(spec: &SolutionSpec) -> WeylStructure {
    let s1 = spec.clone();
    let s2 = spec.clone();
    WeylStructure::new(
        format!("ew-dkp/{:?}", spec.family),
        move |p| {
            let (t, y, x) = (p[T], p[Y], p[X]);
            match s1.eval_jet(x, y, t, 0) {
                Ok(j) => {
                    let u = j.u();
                    [[-4.0 * u, 0.0, -2.0], [0.0, 1.0, 0.0], [-2.0, 0.0, 0.0]]
                }
                Err(_) => [[f64::NAN; 3]; 3],
            }
        },
        move |p| {
            let (t, y, x) = (p[T], p[Y], p[X]);
            match s2.eval_jet(x, y, t, 1) {
                Ok(j) => [-4.0 * j.ux(), 0.0, 0.0],
                Err(_) => [f64::NAN; 3],
            }
        },
    )
}

/// The Weyl structure of the dispersionless-KdV reduction on `(t, y, s)`:
/// `h = dy^2 + 4 (t F(s) - 1) dt ds`, `nu = 4 F / (t F - 1) dt`.
pub fn dkdv_structure(f: &Poly1) -> WeylStructure {
    let f1 = f.clone();
    let f2 = f.clone();
    WeylStructure::new(
        "dkdv",
        move |p| {
            let a = 2.0 * (p[T] * f1.eval(p[X]) - 1.0);
            [[0.0, 0.0, a], [0.0, 1.0, 0.0], [a, 0.0, 0.0]]
        },
        move |p| {
            let fv = f2.eval(p[X]);
            [4.0 * fv / (p[T] * fv - 1.0), 0.0, 0.0]
        },
    )
}

fn ensure_finite_mat(m: &Mat3, p: Point3, what: &str) -> Result<()> {
    if m.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            x: p[X],
            y: p[Y],
            t: p[T],
            reason: format!("{what} not finite (domain guard hit inside a stencil)"),
        })
    }
}

/// Levi-Civita Christoffel symbols `Gamma^i_{jk}` of `h` at `p`.
pub fn christoffels(ws: &WeylStructure, p: Point3, step: f64) -> Result<[[[f64; 3]; 3]; 3]> {
    let h = ws.h.clone();
    let gamma = geometry::christoffel(&move |q| h(q), p, step)?;
    for plane in &gamma {
        ensure_finite_mat(plane, p, "Christoffel symbols")?;
    }
    Ok(gamma)
}

/// Ricci tensor of `h` (sphere-positive convention).
pub fn ricci(ws: &WeylStructure, p: Point3, step: f64) -> Result<Mat3> {
    let h = ws.h.clone();
    let ric = geometry::ricci(&move |q| h(q), p, step)?;
    ensure_finite_mat(&ric, p, "Ricci tensor")?;
    Ok(ric)
}

/// Scalar curvature of `h`.
pub fn scalar_curvature(ws: &WeylStructure, p: Point3, step: f64) -> Result<f64> {
    let h = ws.h.clone();
    let s = geometry::scalar_curvature(&move |q| h(q), p, step)?;
    if !s.is_finite() {
        return Err(Error::OutsideDomain {
            x: p[X],
            y: p[Y],
            t: p[T],
            reason: "scalar curvature not finite".into(),
        });
    }
    Ok(s)
}

/// Covariant derivative `grad_i nu_j` of the Weyl one-form.
pub fn nabla_nu(ws: &WeylStructure, p: Point3, step: f64) -> Result<Mat3> {
    let gamma = christoffels(ws, p, step)?;
    let nu = ws.one_form(p);
    let nu_fn = ws.nu.clone();
    let dnu_fn: &dyn Fn(Point3) -> Point3 = &move |q| nu_fn(q);
    let mut grad = [[0.0; 3]; 3];
    for i in 0..3 {
        let dnu_i = fd::partial_vec(dnu_fn, p, i, step);
        for j in 0..3 {
            let mut v = dnu_i[j];
            for k in 0..3 {
                v -= gamma[k][i][j] * nu[k];
            }
            grad[i][j] = v;
        }
    }
    ensure_finite_mat(&grad, p, "covariant derivative of nu")?;
    Ok(grad)
}

/// The trace-free conformal-Einstein residual `chi_ij` (see module docs).
/// Vanishing of all components at all points is the Einstein--Weyl property.
pub fn ew_residual(ws: &WeylStructure, p: Point3, step: f64) -> Result<Mat3> {
    let h = ws.metric(p);
    ensure_finite_mat(&h, p, "metric")?;
    let (hinv, _) = invert_with_det(&h)?;
    let ric = ricci(ws, p, step)?;
    let grad = nabla_nu(ws, p, step)?;
    let nu = ws.one_form(p);

    let mut scalar_r = 0.0;
    let mut div_nu = 0.0;
    let mut nu_sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            scalar_r += hinv[i][j] * ric[i][j];
            div_nu += hinv[i][j] * grad[i][j];
            nu_sq += hinv[i][j] * nu[i] * nu[j];
        }
    }
    let trace_part = (scalar_r + 0.5 * div_nu + 0.25 * nu_sq) / 3.0;

    let mut chi = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            chi[i][j] = ric[i][j] + 0.25 * (grad[i][j] + grad[j][i]) + 0.25 * nu[i] * nu[j]
                - trace_part * h[i][j];
        }
    }
    Ok(chi)
}

/// Distinguished curvature scalar of the Weyl connection,
/// `W = -R - 2 div nu + (1/2) |nu|^2` (see the module docs for the sign
/// convention). Equals `-3 u_xx` on dKP-induced structures.
pub fn weyl_scalar(ws: &WeylStructure, p: Point3, step: f64) -> Result<f64> {
    let h = ws.metric(p);
    ensure_finite_mat(&h, p, "metric")?;
    let (hinv, _) = invert_with_det(&h)?;
    let r = scalar_curvature(ws, p, step)?;
    let grad = nabla_nu(ws, p, step)?;
    let nu = ws.one_form(p);
    let mut div_nu = 0.0;
    let mut nu_sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            div_nu += hinv[i][j] * grad[i][j];
            nu_sq += hinv[i][j] * nu[i] * nu[j];
        }
    }
    Ok(-r - 2.0 * div_nu + 0.5 * nu_sq)
}

/// Residual of covariant constancy of a conformally weighted vector field of
/// weight `m`:
///
/// ```text
/// Dt_i v^j = grad_i v^j - (1/2) delta_i^j nu_k v^k
///            - ((m + 1)/2) nu_i v^j + (1/2) nu^j v_i
/// ```
///
/// For the dKP structure the field `v = d/dx` is parallel exactly at weight
/// `m = -1/2`.
pub fn weighted_constancy_residual(
    ws: &WeylStructure,
    v: &VectorField3,
    m: f64,
    p: Point3,
    step: f64,
) -> Result<Mat3> {
    let gamma = christoffels(ws, p, step)?;
    let h = ws.metric(p);
    let (hinv, _) = invert_with_det(&h)?;
    let nu = ws.one_form(p);
    let vv = v.at(p);
    let comps = v.comps.clone();
    let v_fn: &dyn Fn(Point3) -> Point3 = &move |q| comps(q);

    let mut nu_dot_v = 0.0;
    let mut nu_up = [0.0; 3];
    let mut v_down = [0.0; 3];
    for i in 0..3 {
        nu_dot_v += nu[i] * vv[i];
        for j in 0..3 {
            nu_up[i] += hinv[i][j] * nu[j];
            v_down[i] += h[i][j] * vv[j];
        }
    }

    let mut res = [[0.0; 3]; 3];
    for i in 0..3 {
        let dv_i = fd::partial_vec(v_fn, p, i, step);
        for j in 0..3 {
            let mut grad = dv_i[j];
            for k in 0..3 {
                grad += gamma[j][i][k] * vv[k];
            }
            let delta = if i == j { 1.0 } else { 0.0 };
            res[i][j] = grad - 0.5 * delta * nu_dot_v - 0.5 * (m + 1.0) * nu[i] * vv[j]
                + 0.5 * nu_up[j] * v_down[i];
        }
    }
    ensure_finite_mat(&res, p, "weighted derivative")?;
    Ok(res)
}

/// Symmetry residual of a candidate conformal Killing vector `K`: returns
/// `(Lie_K h - psi h, Lie_K nu - d psi)` with `psi = (1/3) h^{ij} (Lie_K h)_{ij}`
/// (so the first part is the trace-free piece of the metric Lie derivative).
/// Both parts vanish iff `K` preserves the Weyl structure.
pub fn symmetry_residual(
    ws: &WeylStructure,
    k: &VectorField3,
    p: Point3,
    step: f64,
) -> Result<(Mat3, Point3)> {
    let lie_h_at = {
        let h_fn = ws.h.clone();
        let k_fn = k.comps.clone();
        move |q: Point3| -> Mat3 {
            let h = h_fn(q);
            let kv = k_fn(q);
            let hf: &dyn Fn(Point3) -> Mat3 = &|r| h_fn(r);
            let kf: &dyn Fn(Point3) -> Point3 = &|r| k_fn(r);
            // dh[a] = d_a h, dk[a] = d_a K
            let mut dh = [[[0.0; 3]; 3]; 3];
            let mut dk = [[0.0; 3]; 3];
            for a in 0..3 {
                let mut q2 = q;
                for (s, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                    q2[a] = q[a] + s * step;
                    let hm = hf(q2);
                    let km = kf(q2);
                    let w = w / (12.0 * step);
                    for i in 0..3 {
                        dk[a][i] += w * km[i];
                        for j in 0..3 {
                            dh[a][i][j] += w * hm[i][j];
                        }
                    }
                }
            }
            let mut lie = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for a in 0..3 {
                        s += kv[a] * dh[a][i][j] + h[a][j] * dk[i][a] + h[i][a] * dk[j][a];
                    }
                    lie[i][j] = s;
                }
            }
            lie
        }
    };

    let psi_at = {
        let h_fn = ws.h.clone();
        let lie_h_at = lie_h_at.clone();
        move |q: Point3| -> f64 {
            let h = h_fn(q);
            let lie = lie_h_at(q);
            match invert_with_det(&h) {
                Ok((hinv, _)) => {
                    let mut tr = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            tr += hinv[i][j] * lie[i][j];
                        }
                    }
                    tr / 3.0
                }
                Err(_) => f64::NAN,
            }
        }
    };

    let h = ws.metric(p);
    let lie_h = lie_h_at(p);
    let psi = psi_at(p);
    let mut part_h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            part_h[i][j] = lie_h[i][j] - psi * h[i][j];
        }
    }

    // Lie_K nu = K^a d_a nu + nu_a d_i K^a; d psi by a nested stencil.
    let nu = ws.one_form(p);
    let kv = k.at(p);
    let nu_fn = ws.nu.clone();
    let k_fn = k.comps.clone();
    let nu_f: &dyn Fn(Point3) -> Point3 = &move |q| nu_fn(q);
    let k_f: &dyn Fn(Point3) -> Point3 = &move |q| k_fn(q);
    let psi_f: &dyn Fn(Point3) -> f64 = &psi_at;
    let mut dnu = [[0.0; 3]; 3];
    let mut dk = [[0.0; 3]; 3];
    for a in 0..3 {
        dnu[a] = fd::partial_vec(nu_f, p, a, step);
        dk[a] = fd::partial_vec(k_f, p, a, step);
    }
    let mut part_nu = [0.0; 3];
    for i in 0..3 {
        let mut lie_nu_i = 0.0;
        for a in 0..3 {
            lie_nu_i += kv[a] * dnu[a][i] + nu[a] * dk[i][a];
        }
        part_nu[i] = lie_nu_i - fd::partial(psi_f, p, i, step);
    }

    ensure_finite_mat(&part_h, p, "symmetry residual")?;
    if !part_nu.iter().all(|v| v.is_finite()) {
        return Err(Error::OutsideDomain {
            x: p[X],
            y: p[Y],
            t: p[T],
            reason: "symmetry residual (one-form part) not finite".into(),
        });
    }
    Ok((part_h, part_nu))
}

/// Max-abs over both parts of [`symmetry_residual`].
pub fn symmetry_residual_norm(
    ws: &WeylStructure,
    k: &VectorField3,
    p: Point3,
    step: f64,
) -> Result<f64> {
    let (mh, mn) = symmetry_residual(ws, k, p, step)?;
    let m = geometry::max_abs(&mh);
    Ok(mn.iter().fold(m, |acc, v| acc.max(v.abs())))
}

/// The four generators preserving the dKP Weyl structure for the hyper-CR
/// family (components on `(t, y, x)`):
/// `K1 = d/dt`, `K2 = (y/2) d/dy + x d/dx`, `K3 = t d/dt + (y/2) d/dy`,
/// `K4 = 3t^2 d/dt + 4ty d/dy + (y^2 + 2xt) d/dx`.
pub fn dkp_symmetry_k1() -> VectorField3 {
    VectorField3::new("K1", |_| [1.0, 0.0, 0.0])
}

pub fn dkp_symmetry_k2() -> VectorField3 {
    VectorField3::new("K2", |p| [0.0, 0.5 * p[Y], p[X]])
}

pub fn dkp_symmetry_k3() -> VectorField3 {
    VectorField3::new("K3", |p| [p[T], 0.5 * p[Y], 0.0])
}

pub fn dkp_symmetry_k4() -> VectorField3 {
    VectorField3::new("K4", |p| {
        [3.0 * p[T] * p[T], 4.0 * p[T] * p[Y], p[Y] * p[Y] + 2.0 * p[X] * p[T]]
    })
}

/// Residuals of the four hyper-CR compatibility equations for a dKP
/// solution, evaluated analytically from an order-4 jet with the gauge
/// function `rho = -2 u_xxy / u_xx`:
///
/// ```text
/// r1 = rho_y - 2 u_xx      r2 = rho_x
/// r3 = 2 rho u_x - rho_t + 4 u_xy      r4 = rho^2 + 8 u_xx
/// ```
///
/// All four vanish identically for the `HyperCr` family, any `P`.
pub fn hyper_cr_residuals(spec: &SolutionSpec, x: f64, y: f64, t: f64) -> Result<[f64; 4]> {
    let j = spec.eval_jet(x, y, t, 4)?.jet;
    let uxx = j.partial(2, 0, 0);
    if uxx.abs() < 1e-12 {
        return Err(Error::DegenerateGauge(uxx));
    }
    let a = j.partial(2, 1, 0); // u_xxy
    let rho = -2.0 * a / uxx;
    let rho_y = -2.0 * (j.partial(2, 2, 0) * uxx - a * j.partial(2, 1, 0)) / (uxx * uxx);
    let rho_x = -2.0 * (j.partial(3, 1, 0) * uxx - a * j.partial(3, 0, 0)) / (uxx * uxx);
    let rho_t = -2.0 * (j.partial(2, 1, 1) * uxx - a * j.partial(2, 0, 1)) / (uxx * uxx);
    Ok([
        rho_y - 2.0 * uxx,
        rho_x,
        2.0 * rho * j.partial(1, 0, 0) - rho_t + 4.0 * j.partial(1, 1, 0),
        rho * rho + 8.0 * uxx,
    ])
}

/// One sample along a Weyl geodesic.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Point3,
    pub v: Point3,
    /// `h(v, v)` at the sample; stays zero along null geodesics.
    pub null_defect: f64,
}

/// Integrates the geodesic equation of the *Weyl* connection
/// `Ghat^i_{jk} = Gamma^i_{jk} - (1/2)(delta^i_j nu_k + delta^i_k nu_j - h_{jk} nu^i)`
/// with a classical fourth-order Runge--Kutta scheme. Christoffel symbols are
/// refreshed from finite differences at every stage.
pub fn weyl_geodesic(
    ws: &WeylStructure,
    x0: Point3,
    v0: Point3,
    s_end: f64,
    steps: usize,
    fd_step: f64,
) -> Result<Vec<GeodesicSample>> {
    if steps == 0 {
        return Err(Error::Config("geodesic integration needs at least one step".into()));
    }
    let accel = |x: Point3, v: Point3| -> Result<Point3> {
        let gamma = christoffels(ws, x, fd_step)?;
        let h = ws.metric(x);
        let (hinv, _) = invert_with_det(&h)?;
        let nu = ws.one_form(x);
        let mut nu_up = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                nu_up[i] += hinv[i][j] * nu[j];
            }
        }
        let mut nu_dot_v = 0.0;
        let mut v_sq = 0.0;
        for i in 0..3 {
            nu_dot_v += nu[i] * v[i];
            for j in 0..3 {
                v_sq += h[i][j] * v[i] * v[j];
            }
        }
        let mut a = [0.0; 3];
        for i in 0..3 {
            let mut g = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    g += gamma[i][j][k] * v[j] * v[k];
                }
            }
            a[i] = -g + nu_dot_v * v[i] - 0.5 * v_sq * nu_up[i];
        }
        Ok(a)
    };

    let dt = s_end / steps as f64;
    let mut x = x0;
    let mut v = v0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(GeodesicSample { s: 0.0, x, v, null_defect: ws.norm_sq(x, v) });
    for n in 0..steps {
        let (k1x, k1v) = (v, accel(x, v)?);
        let half = 0.5 * dt;
        let x2 = add(x, scale(k1x, half));
        let v2 = add(v, scale(k1v, half));
        let (k2x, k2v) = (v2, accel(x2, v2)?);
        let x3 = add(x, scale(k2x, half));
        let v3 = add(v, scale(k2v, half));
        let (k3x, k3v) = (v3, accel(x3, v3)?);
        let x4 = add(x, scale(k3x, dt));
        let v4 = add(v, scale(k3v, dt));
        let (k4x, k4v) = (v4, accel(x4, v4)?);
        for i in 0..3 {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        out.push(GeodesicSample {
            s: (n + 1) as f64 * dt,
            x,
            v,
            null_defect: ws.norm_sq(x, v),
        });
    }
    Ok(out)
}

fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
