use crate::error::{domain, Error, Result};

const ROOT_MAX_ITER: usize = 300;
const GOLDEN_MAX_ITER: usize = 500;

/// A closed search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
            return Err(domain(format!("bracket requires finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Final state of a bracketed root search: the best estimate and the
/// enclosing interval on which `f` still changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub root: f64,
    /// Endpoint of the final interval at which f has the sign of f(lo).
    pub lo_side: f64,
    /// Endpoint of the final interval at which f has the sign of f(hi).
    pub hi_side: f64,
    pub iterations: usize,
}

/// Brent's method, returning the final sign-change interval as well as the
/// root estimate.
pub fn refine_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<RootBracket> {
    Bracket::new(bracket.lo, bracket.hi)?;
    if !(tol > 0.0) {
        return Err(domain("root tolerance must be positive"));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::NonFinite("root-finding objective"));
    }
    let lo_sign = fa.signum();
    if fa == 0.0 || fb == 0.0 {
        let root = if fa == 0.0 { a } else { b };
        return Ok(RootBracket {
            root,
            lo_side: root,
            hi_side: root,
            iterations: 0,
        });
    }
    if fa * fb > 0.0 {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=ROOT_MAX_ITER {
        if fb * fc > 0.0 {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            // b and c bracket the root
            let (lo_side, hi_side) = if fb == 0.0 {
                (b, b)
            } else if fb.signum() == lo_sign {
                (b, c)
            } else {
                (c, b)
            };
            return Ok(RootBracket {
                root: b,
                lo_side,
                hi_side,
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite("root-finding objective"));
        }
    }
    Err(Error::MaxIterations {
        what: "bracketed root finding",
        iterations: ROOT_MAX_ITER,
        best: b,
    })
}

/// Root of a continuous `f` on `bracket` by Brent's method. Converges
/// whenever f(lo)·f(hi) ≤ 0.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    refine_root(f, bracket, tol).map(|r| r.root)
}

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of `f` on `bracket`, refined until
/// the interval is no wider than `tol`. The bracket endpoints are also
/// compared so boundary minima are reported exactly.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<Minimum> {
    Bracket::new(bracket.lo, bracket.hi)?;
    if !(tol > 0.0) {
        return Err(domain("minimization tolerance must be positive"));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while b - a > tol {
        iter += 1;
        if iter > GOLDEN_MAX_ITER {
            return Err(Error::MaxIterations {
                what: "golden-section search",
                iterations: GOLDEN_MAX_ITER,
                best: if f1 <= f2 { x1 } else { x2 },
            });
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 {
        Minimum { x: x1, value: f1 }
    } else {
        Minimum { x: x2, value: f2 }
    };
    for x in [bracket.lo, bracket.hi] {
        let v = f(x);
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    if !best.value.is_finite() {
        return Err(Error::NonFinite("minimization objective"));
    }
    Ok(best)
}
