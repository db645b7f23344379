//! Safeguarded scalar root finding.

/// Root of `f` inside a sign-changing bracket `[lo, hi]`, alternating secant and bisection steps
/// so the bracket at least halves every two iterations. Stops when the bracket is narrower than
/// `xtol` or an exact zero is hit; returns the endpoint with the smaller `|f|`.
pub fn bracketed_root(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> Option<f64> {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if !(flo * fhi < 0.0) {
        return None;
    }
    for it in 0..400 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let x = if it % 2 == 0 {
            let s = hi - fhi * (hi - lo) / (fhi - flo);
            // keep the secant point away from the bracket ends
            let margin = 0.01 * (hi - lo).abs();
            if s.is_finite() && (s - lo.min(hi)) > margin && (lo.max(hi) - s) > margin {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if !fx.is_finite() {
            return None;
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Some(if flo.abs() <= fhi.abs() { lo } else { hi })
}

/// Wraps an angle difference into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}
