//! Fourth-order central finite-difference stencils on closures.
//!
//! Everything geometric in this crate that cannot be differentiated exactly
//! through jets (metric closures, Lie derivatives, exterior derivatives of
//! sampled forms) goes through these helpers. The default step is 1e-2, which
//! for smooth fields balances the O(h^4) truncation error against roundoff
//! amplification of the nested second differences used by curvature.

/// Default step for all fourth-order stencils.
pub const DEFAULT_STEP: f64 = 1e-2;

/// Fourth-order first derivative of `f` along `axis` at `p`.
pub fn partial<const N: usize>(f: &dyn Fn([f64; N]) -> f64, p: [f64; N], axis: usize, h: f64) -> f64 {
    let eval = |s: f64| {
        let mut q = p;
        q[axis] += s;
        f(q)
    };
    (-eval(2.0 * h) + 8.0 * eval(h) - 8.0 * eval(-h) + eval(-2.0 * h)) / (12.0 * h)
}

/// Fourth-order first derivative of a vector-valued closure.
pub fn partial_vec<const N: usize, const M: usize>(
    f: &dyn Fn([f64; N]) -> [f64; M],
    p: [f64; N],
    axis: usize,
    h: f64,
) -> [f64; M] {
    let eval = |s: f64| {
        let mut q = p;
        q[axis] += s;
        f(q)
    };
    let (a, b, c, d) = (eval(2.0 * h), eval(h), eval(-h), eval(-2.0 * h));
    let mut out = [0.0; M];
    for m in 0..M {
        out[m] = (-a[m] + 8.0 * b[m] - 8.0 * c[m] + d[m]) / (12.0 * h);
    }
    out
}
