//! Scalar root finding and minimization on brackets.

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's method for a root of `f` in `[a, b]`, where `fa` and `fb` have opposite signs
/// (or one vanishes). Stops when the bracket is below `xtol + 4 eps |x|` or `f` hits zero.
pub fn brent_root<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, max_iter: usize) -> Result<RootResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(RootResult { x: a, fx: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootResult { x: b, fx: 0.0, iterations: 0 });
    }
    debug_assert!(fa.signum() != fb.signum(), "root not bracketed");
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(RootResult { x: b, fx: fb, iterations: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(RootResult { x: b, fx: fb, iterations: max_iter })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinResult {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Brent's parabolic/golden-section minimization of `f` on `[a, b]`.
pub fn brent_min<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<MinResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for iter in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * x.abs() * 1e-4 + 0.5 * xtol;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(MinResult { x, fx, iterations: iter });
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(mid - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = x + if d.abs() >= tol1 { d } else { tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(MinResult { x, fx, iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = brent_root(f, 0.0, 2.0, -2.0, 6.0, 1e-15, 100).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_then_steep_root() {
        let f = |x: f64| Ok((x - 0.3).powi(9));
        let r = brent_root(f, 0.0, 1.0, f(0.0).unwrap(), f(1.0).unwrap(), 1e-14, 300).unwrap();
        assert!((r.x - 0.3).abs() < 1e-3);
    }

    #[test]
    fn parabola_min() {
        let r = brent_min(|x| Ok((x - 1.25).powi(2) + 3.0), -4.0, 7.0, 1e-12, 200).unwrap();
        assert!((r.x - 1.25).abs() < 1e-8);
        assert!((r.fx - 3.0).abs() < 1e-15);
    }

    #[test]
    fn endpoint_min() {
        let r = brent_min(|x| Ok(x), 0.0, 1.0, 1e-12, 200).unwrap();
        assert!(r.x < 1e-10);
    }
}
