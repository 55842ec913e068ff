use std::time::Instant;

use super::{precedes, prescan_restarts, Method, OptimizerConfig, OptimizerReport, Step, Tracker};
use crate::error::Result;

/// (3 - √5) / 2
const GOLDEN: f64 = 0.381_966_011_250_105_1;
const SQRT_EPSILON: f64 = 1.490_116_119_384_765_6e-8;

pub(crate) const PRESCAN_POINTS: usize = 500;
pub(crate) const RESTARTS: usize = 5;

/// Brent's golden-section / parabolic minimiser on the configured bounds.
///
/// If the run meets a flat stretch (one value at two points), the objective
/// is treated as a step function and the run is followed by a pre-scan and
/// bracketed restarts; see [`super::prescan_restarts`].
pub fn brent_min<F>(objective: F, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let start = Instant::now();
    let tol = config.tolerance;
    let mut tracker = Tracker::new(objective, config);
    let outcome = (|| {
        let (lo, hi) = (tracker.lower(), tracker.upper());
        brent_bracket(&mut tracker, lo, hi, tol)?;
        if !tracker.plateau_seen() {
            return Ok(());
        }
        prescan_restarts(&mut tracker, PRESCAN_POINTS, RESTARTS, |t, a, b| {
            brent_bracket(t, a, b, tol)
        })
    })();
    tracker.finish(Method::Brent, outcome, start)
}

/// One Brent run on `[a, b]`, stopping once the bracket has collapsed to the
/// tolerance. Comparisons use the value-then-smaller-H order so that flat
/// stretches resolve toward their left end.
pub(crate) fn brent_bracket<F>(tracker: &mut Tracker<F>, a: f64, b: f64, tol: f64) -> Step<()>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = tracker.eval(x)?;
    let mut fw = fx;
    let mut fv = fx;
    let mut d = 0.0f64;
    let mut e = 0.0f64;

    loop {
        let mid = 0.5 * (a + b);
        let tol1 = SQRT_EPSILON * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(());
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through (v, fv), (w, fw), (x, fx)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = tracker.eval(u)?;

        if precedes(fu, u, fx, x) {
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
}
