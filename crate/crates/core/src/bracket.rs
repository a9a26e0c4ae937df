//! Root isolation by oscillation count, then Brent on the miss.
//!
//! Every parameter scan in this crate has the same shape: a scalar
//! parameter `x`, a shot that returns the boundary miss and the number of
//! sign changes, and a count that is nondecreasing in `x` and jumps by one
//! exactly at each root. Isolating the `k`-th root therefore means finding
//! `lo < hi` with `count(lo) = k - 1` and `count(hi) = k`, after which the
//! miss has opposite signs at the ends.

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Probe {
    pub x: f64,
    pub miss: f64,
    pub count: usize,
}

fn midpoint(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 && b > 2.0 * a {
        (a * b).sqrt()
    } else {
        0.5 * (a + b)
    }
}

/// Narrows `[lo, hi]` (with `lo.count < k <= hi.count`) until the counts
/// are exactly `k - 1` and `k`.
pub(crate) fn isolate<F>(
    probe: &F,
    mut lo: Probe,
    mut hi: Probe,
    k: usize,
    max_iter: usize,
) -> Result<(Probe, Probe), Error>
where
    F: Fn(f64) -> Result<Probe, Error>,
{
    debug_assert!(lo.count < k && hi.count >= k);
    for _ in 0..max_iter {
        if lo.count + 1 == k && hi.count == k {
            return Ok((lo, hi));
        }
        let mid = probe(midpoint(lo.x, hi.x))?;
        if mid.count >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi.x - lo.x).abs() <= 1e-15 * hi.x.abs().max(lo.x.abs()) {
            break;
        }
    }
    if lo.count + 1 == k && hi.count == k {
        Ok((lo, hi))
    } else {
        Err(Error::EigenvalueValidation {
            k,
            reason: format!(
                "could not isolate: counts {} at {} and {} at {}",
                lo.count, lo.x, hi.count, hi.x
            ),
        })
    }
}

/// Brent's method on the miss. Requires opposite signs at the ends.
/// Stops when the bracket is below `xtol` relative or `|miss| <= ftol`.
pub(crate) fn brent<F>(
    probe: &F,
    lo: Probe,
    hi: Probe,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Probe, Error>
where
    F: Fn(f64) -> Result<Probe, Error>,
{
    let (mut a, mut b) = (lo, hi);
    if a.miss.abs() <= ftol {
        return Ok(a);
    }
    if b.miss.abs() <= ftol {
        return Ok(b);
    }
    if (a.miss > 0.0) == (b.miss > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed: miss {} at {} and {} at {}",
            a.miss, a.x, b.miss, b.x
        )));
    }
    let mut c = a;
    let mut d = b.x - a.x;
    let mut e = d;
    for _ in 0..max_iter {
        if (b.miss > 0.0) == (c.miss > 0.0) {
            c = a;
            d = b.x - a.x;
            e = d;
        }
        if c.miss.abs() < b.miss.abs() {
            a = b;
            b = c;
            c = a;
        }
        let tol = 2.0 * f64::EPSILON * b.x.abs() + 0.5 * xtol * b.x.abs().max(f64::MIN_POSITIVE);
        let m = 0.5 * (c.x - b.x);
        if m.abs() <= tol || b.miss.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol && a.miss.abs() > b.miss.abs() {
            let s = b.miss / a.miss;
            let (mut p, mut q);
            if a.x == c.x {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = a.miss / c.miss;
                let r = b.miss / c.miss;
                p = s * (2.0 * m * qa * (qa - r) - (b.x - a.x) * (r - 1.0));
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
        let next_x = if d.abs() > tol {
            b.x + d
        } else {
            b.x + tol.copysign(m)
        };
        b = probe(next_x)?;
    }
    Ok(b)
}
