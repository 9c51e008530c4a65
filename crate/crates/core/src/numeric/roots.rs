use crate::error::{domain, Error, Result};

/// Bracket for a scalar root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl BracketedRoot {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(domain("BracketedRoot", "tolerance must be positive"));
        }
        if !(lo < hi) {
            return Err(domain("BracketedRoot", format!("empty bracket [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, tol })
    }
}

/// Brent's method. Requires a sign change over the bracket.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: &BracketedRoot) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Bracket {
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
    for _ in 0..300 {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * bracket.tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
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
    }
    Err(Error::Accuracy {
        func: "find_root",
        estimate: b,
        error: (c - b).abs(),
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`. Returns `(argmax, max)`; endpoints are compared too, so a
/// monotone function yields the boundary.
pub fn maximize_unimodal<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(domain("maximize_unimodal", format!("bad interval [{lo}, {hi}] or tol {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    if best.1.is_nan() {
        return Err(domain("maximize_unimodal", "objective is NaN"));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::q_function;

    #[test]
    fn linear_root() {
        let b = BracketedRoot::new(0.0, 5.0, 1e-12).unwrap();
        assert!((find_root(|x| x - 2.0, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail_root_matches_inverse() {
        let b = BracketedRoot::new(0.0, 10.0, 1e-12).unwrap();
        let x = find_root(|x| q_function(x) - 1e-5, &b).unwrap();
        assert!((x - 4.264_890_793_922_825).abs() < 1e-8);
    }

    #[test]
    fn missing_sign_change() {
        let b = BracketedRoot::new(3.0, 5.0, 1e-12).unwrap();
        assert!(matches!(find_root(|x| x - 2.0, &b), Err(Error::Bracket { .. })));
        assert!(BracketedRoot::new(1.0, 0.0, 1e-3).is_err());
        assert!(BracketedRoot::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn golden_section() {
        let (x, v) = maximize_unimodal(|r| -(r - 0.3) * (r - 0.3), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8 && v.abs() < 1e-15);
        // boundary maximum
        let (x, _) = maximize_unimodal(|r| -r, 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(x, 0.0);
    }
}
