//! Levi-Civita curvature of a metric given as a closure, in any dimension.
//!
//! Sign conventions (the "sphere-positive" ones): the curvature tensor is
//! `R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}`
//! with `G` the Christoffel symbols, the Ricci tensor is the trace
//! `R_{jl} = R^i_{jil}`, and the round unit sphere has scalar curvature +2.
//! Metric derivatives are taken with fourth-order finite differences, so the
//! Ricci tensor of a smooth metric carries an O(step^4) error.

use crate::error::{Error, Result};

pub type MetricFn<const N: usize> = dyn Fn([f64; N]) -> [[f64; N]; N];

/// Gauss-Jordan inversion with partial pivoting; also returns the
/// determinant. Errors if the pivot magnitude collapses.
pub fn invert_with_det<const N: usize>(m: &[[f64; N]; N]) -> Result<([[f64; N]; N], f64)> {
    let mut a = *m;
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..N {
        let mut piv = col;
        for r in col + 1..N {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::SingularMetric(a[piv][col].abs()));
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        let s = 1.0 / a[col][col];
        for k in 0..N {
            a[col][k] *= s;
            inv[col][k] *= s;
        }
        for r in 0..N {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for k in 0..N {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    Ok((inv, det))
}

pub fn det<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    match invert_with_det(m) {
        Ok((_, d)) => d,
        Err(_) => 0.0,
    }
}

/// Christoffel symbols `G^i_{jk}` of the metric at `p`.
pub fn christoffel<const N: usize>(
    metric: &MetricFn<N>,
    p: [f64; N],
    step: f64,
) -> Result<[[[f64; N]; N]; N]> {
    let g = metric(p);
    let (ginv, _) = invert_with_det(&g)?;
    // dg[a][i][j] = d_a g_ij, one metric evaluation per stencil node
    let mut dg = [[[0.0; N]; N]; N];
    for a in 0..N {
        for (s, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
            let mut q = p;
            q[a] += s * step;
            let gq = metric(q);
            let w = w / (12.0 * step);
            for i in 0..N {
                for j in 0..N {
                    dg[a][i][j] += w * gq[i][j];
                }
            }
        }
    }
    let mut gamma = [[[0.0; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let mut s = 0.0;
                for l in 0..N {
                    s += ginv[i][l] * (dg[j][l][k] + dg[k][j][l] - dg[l][j][k]);
                }
                gamma[i][j][k] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Ricci tensor at `p`. The Christoffel derivative is a nested fourth-order
/// stencil over `christoffel`, itself a stencil over the metric.
pub fn ricci<const N: usize>(
    metric: &MetricFn<N>,
    p: [f64; N],
    step: f64,
) -> Result<[[f64; N]; N]> {
    let gamma = christoffel(metric, p, step)?;
    // dgamma[a][i][j][k] = d_a G^i_{jk}
    let mut dgamma = vec![[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for s in [-2.0, -1.0, 1.0, 2.0] {
            let mut q = p;
            q[a] += s * step;
            let gq = christoffel(metric, q, step)?;
            let w = match s as i64 {
                -2 => 1.0,
                -1 => -8.0,
                1 => 8.0,
                2 => -1.0,
                _ => unreachable!(),
            } / (12.0 * step);
            for i in 0..N {
                for j in 0..N {
                    for k in 0..N {
                        dgamma[a][i][j][k] += w * gq[i][j][k];
                    }
                }
            }
        }
    }
    let mut ric = [[0.0; N]; N];
    for j in 0..N {
        for l in 0..N {
            let mut r = 0.0;
            for i in 0..N {
                r += dgamma[i][i][l][j] - dgamma[l][i][i][j];
                for m in 0..N {
                    r += gamma[i][i][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][i][j];
                }
            }
            ric[j][l] = r;
        }
    }
    Ok(ric)
}

/// Scalar curvature `g^{jl} R_{jl}` at `p`.
pub fn scalar_curvature<const N: usize>(
    metric: &MetricFn<N>,
    p: [f64; N],
    step: f64,
) -> Result<f64> {
    let g = metric(p);
    let (ginv, _) = invert_with_det(&g)?;
    let ric = ricci(metric, p, step)?;
    let mut s = 0.0;
    for j in 0..N {
        for l in 0..N {
            s += ginv[j][l] * ric[j][l];
        }
    }
    Ok(s)
}

/// Largest absolute entry of a square matrix; a convenient residual norm.
pub fn max_abs<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    m.iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn inverse_roundtrip_and_det() {
        let m = [[2.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 1.0]];
        let (inv, d) = invert_with_det(&m).unwrap();
        assert_abs_diff_eq!(d, 3.0, epsilon = 1e-12); // 2*(3-1) - 1*(1-0) = 3
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m[i][k] * inv[k][j];
                }
                assert_abs_diff_eq!(s, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = [[1.0, 2.0], [2.0, 4.0]];
        assert!(matches!(invert_with_det(&m), Err(crate::Error::SingularMetric(_))));
    }

    #[test]
    fn round_sphere_curvature_is_positive() {
        // radius-a sphere: ds^2 = a^2 (dth^2 + sin^2 th dph^2), scalar = 2/a^2
        let a: f64 = 1.3;
        let metric = move |p: [f64; 2]| {
            let th = p[0];
            [[a * a, 0.0], [0.0, a * a * th.sin() * th.sin()]]
        };
        let p = [0.9, 0.4];
        let ric = ricci(&metric, p, 1e-3).unwrap();
        assert_abs_diff_eq!(ric[0][0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(ric[1][1], p[0].sin() * p[0].sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(
            scalar_curvature(&metric, p, 1e-3).unwrap(),
            2.0 / (a * a),
            epsilon = 1e-7
        );
    }

    #[test]
    fn flat_space_in_polar_coordinates() {
        let metric = |p: [f64; 2]| [[1.0, 0.0], [0.0, p[0] * p[0]]];
        let ric = ricci(&metric, [1.7, 0.3], 1e-2).unwrap();
        assert!(max_abs(&ric) < 1e-8);
    }
}
