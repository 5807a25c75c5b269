//! Bracketing root finder (Brent's method) and a bracket-expanding wrapper
//! for non-decreasing equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSettings {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
    /// Factor by which the bracket width grows while searching for a sign change.
    pub bracket_growth: f64,
}

impl Default for RootSettings {
    fn default() -> Self {
        Self {
            x_tol: 1e-9,
            f_tol: 1e-10,
            max_iter: 200,
            bracket_growth: 2.0,
        }
    }
}

impl RootSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0) {
            return Err(invalid("x_tol", self.x_tol));
        }
        if !(self.f_tol > 0.0) {
            return Err(invalid("f_tol", self.f_tol));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", 0.0));
        }
        if !(self.bracket_growth > 1.0) {
            return Err(invalid("bracket_growth", self.bracket_growth));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: "out of range",
    }
}

/// Outcome of [`solve_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneRoot {
    /// `g(lo_guess)` already reached the target.
    AlreadySatisfied(f64),
    Solved(f64),
}

impl MonotoneRoot {
    pub fn value(self) -> f64 {
        match self {
            MonotoneRoot::AlreadySatisfied(x) | MonotoneRoot::Solved(x) => x,
        }
    }
}

/// Root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, settings: &RootSettings) -> Result<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    brent(&mut f, lo, f_lo, hi, f_hi, settings)
}

/// Smallest `x ≥ lo_guess` with `g(x) = target` for non-decreasing `g`.
///
/// The upper end starts at `hi_guess` and is pushed outwards geometrically
/// (factor `bracket_growth` on the distance from `lo_guess`) until
/// `g` reaches the target.
pub fn solve_monotone<G: FnMut(f64) -> f64>(
    mut g: G,
    target: f64,
    lo_guess: f64,
    hi_guess: f64,
    settings: &RootSettings,
) -> Result<MonotoneRoot> {
    let g_lo = g(lo_guess);
    if g_lo.is_nan() {
        return Err(Error::Domain {
            what: "solve_monotone: g(lo_guess)",
            value: lo_guess,
        });
    }
    if g_lo >= target {
        return Ok(MonotoneRoot::AlreadySatisfied(lo_guess));
    }
    let mut a = lo_guess;
    let mut g_a = g_lo;
    let mut b = if hi_guess > lo_guess { hi_guess } else { lo_guess + 1.0 };
    for _ in 0..settings.max_iter {
        let g_b = g(b);
        if g_b.is_nan() {
            return Err(Error::Domain {
                what: "solve_monotone: g(x)",
                value: b,
            });
        }
        if g_b >= target {
            let mut h = |x: f64| g(x) - target;
            return brent(&mut h, a, g_a - target, b, g_b - target, settings).map(MonotoneRoot::Solved);
        }
        a = b;
        g_a = g_b;
        b = lo_guess + (b - lo_guess) * settings.bracket_growth;
        if !b.is_finite() {
            break;
        }
    }
    Err(Error::BracketExhausted {
        last_hi: a,
        last_value: g_a,
        target,
    })
}

fn brent<F: FnMut(f64) -> f64>(
    f: &mut F,
    lo: f64,
    f_lo: f64,
    hi: f64,
    f_hi: f64,
    settings: &RootSettings,
) -> Result<f64> {
    let (mut a, mut fa, mut b, mut fb) = (lo, f_lo, hi, f_hi);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain {
            what: "find_root: f at bracket end",
            value: if fa.is_nan() { a } else { b },
        });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..settings.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * settings.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= settings.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
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
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Domain {
                what: "find_root: f(x)",
                value: b,
            });
        }
    }
    Err(Error::Convergence {
        estimate: b,
        error_estimate: (c - b).abs(),
    })
}
