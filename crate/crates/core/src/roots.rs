//! Bisection on monotone functions.

/// Last point of `[lo, hi]` (to within `tol`) where the predicate is false,
/// for a predicate that is false on `[lo, t)` and true on `[t, hi]`.
/// Returns `(false_side, true_side)`.
pub fn bisect_threshold<F>(mut lo: f64, mut hi: f64, tol: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    // 200 halvings exhaust f64 resolution on any finite bracket
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Solves `f(x) = target` for `f` non-increasing on `[lo, hi]`. Returns the
/// clamped endpoint when the target is outside `f`'s range.
pub fn solve_decreasing<F>(lo: f64, hi: f64, target: f64, tol: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    if f(lo) <= target {
        return lo;
    }
    if f(hi) >= target {
        return hi;
    }
    let (_, x) = bisect_threshold(lo, hi, tol, |x| f(x) <= target);
    x
}
