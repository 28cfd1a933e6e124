//! Real roots of a polynomial on a closed interval.
//!
//! Critical points come from the derivative's roots (recursively), so the
//! polynomial is monotone between consecutive breakpoints and a sign change
//! there brackets exactly one root. Breakpoints where |p| ≤ `touch` are
//! reported too, which catches even-multiplicity roots.

/// Coefficients in increasing degree.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ci)| i as f64 * ci)
        .collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(c, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign-change roots in `[lo, hi]`, ascending.
fn crossing_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let deg = c.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let c = &c[..=deg];
    let mut breaks = vec![lo];
    breaks.extend(crossing_roots(&derivative(c), lo, hi));
    breaks.push(hi);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(c, a), horner(c, b));
        if fa == 0.0 {
            out.push(a);
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            out.push(bisect(c, a, b));
        }
    }
    if horner(c, hi) == 0.0 {
        out.push(hi);
    }
    out.dedup();
    out
}

/// Roots of `c` in `[lo, hi]`, ascending, including near-touching extrema
/// and endpoints with `|p| ≤ touch`.
pub fn real_roots(c: &[f64], lo: f64, hi: f64, touch: f64) -> Vec<f64> {
    let mut out = crossing_roots(c, lo, hi);
    let mut probes = vec![lo, hi];
    probes.extend(crossing_roots(&derivative(c), lo, hi));
    for x in probes {
        if horner(c, x).abs() <= touch {
            out.push(x);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
