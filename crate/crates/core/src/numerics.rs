//! Scalar numerical kernels shared by the edge calculus and the solvers:
//! composite Simpson weights, monotone bisection and golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Nodes and weights of the composite Simpson rule on `[0, 1]`.
///
/// `samples` is rounded up to the next odd number (at least 3).
pub fn simpson_rule(samples: usize) -> (Vec<f64>, Vec<f64>) {
    let mut n = samples.max(3);
    if n % 2 == 0 {
        n += 1;
    }
    let intervals = n - 1;
    let h = 1.0 / intervals as f64;
    let nodes = (0..n).map(|i| i as f64 * h).collect();
    let weights = (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`, assuming
/// `f(lo) <= target <= f(hi)`. Stops once the bracket is narrower than `tol`.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(
    mut f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grows `hi` geometrically (offset from `lo` doubles) until `accept(hi)` holds.
/// Returns `None` after `max_doublings` failures.
pub fn expand_upper<F: FnMut(f64) -> bool>(
    lo: f64,
    initial_offset: f64,
    max_doublings: usize,
    mut accept: F,
) -> Option<f64> {
    let mut offset = initial_offset;
    for _ in 0..=max_doublings {
        let hi = lo + offset;
        if accept(hi) {
            return Some(hi);
        }
        offset *= 2.0;
    }
    None
}

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
///
/// The endpoints are compared with the interior estimate, so maxima sitting
/// on the boundary are returned exactly.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Maximum {
    let (mut lo, mut hi) = (a, b);
    let fa = f(a);
    let fb = f(b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo > tol && iters < 300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        iters += 1;
    }
    let mut best = if f1 >= f2 {
        Maximum { arg: x1, value: f1 }
    } else {
        Maximum { arg: x2, value: f2 }
    };
    if fa > best.value {
        best = Maximum { arg: a, value: fa };
    }
    if fb > best.value {
        best = Maximum { arg: b, value: fb };
    }
    best
}

/// Golden-section maximization of a concave function on `[lo, +inf)`.
///
/// The upper end of the bracket doubles its offset from `lo` until the
/// function decreases there, which superlinear penalties guarantee.
pub fn golden_max_right<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    initial_offset: f64,
    tol: f64,
) -> Maximum {
    let mut offset = initial_offset.max(tol);
    let mut prev_x = lo;
    let mut prev_v = f(lo);
    let mut hi = lo + offset;
    for _ in 0..200 {
        let v = f(hi);
        if v < prev_v {
            break;
        }
        prev_x = hi;
        prev_v = v;
        offset *= 2.0;
        hi = lo + offset;
    }
    // the maximizer lies in [previous-but-one point, hi]
    let left = if prev_x > lo { lo + 0.25 * (prev_x - lo) } else { lo };
    let left = left.min(prev_x);
    golden_max(f, left.max(lo), hi, tol)
}

/// Maximizes a concave function over a box by nested golden-section search,
/// one coordinate at a time. Returns the maximizer and the value.
pub fn nested_golden_max<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> (Vec<f64>, f64) {
    let dim = lower.len();
    let mut point = vec![0.0; dim];
    let value = nested_level(f, lower, upper, tol, 0, &mut point);
    (point, value)
}

fn nested_level<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    level: usize,
    point: &mut Vec<f64>,
) -> f64 {
    let dim = lower.len();
    if level == dim {
        return f(point);
    }
    let mut best_tail: Vec<f64> = Vec::new();
    let mut best_value = f64::NEG_INFINITY;
    let best = {
        let mut inner = |x: f64| {
            point[level] = x;
            let v = nested_level(f, lower, upper, tol, level + 1, point);
            if v > best_value {
                best_value = v;
                best_tail = point[level..].to_vec();
            }
            v
        };
        golden_max(&mut inner, lower[level], upper[level], tol)
    };
    if best_tail.is_empty() {
        point[level] = best.arg;
        return nested_level(f, lower, upper, tol, level + 1, point);
    }
    point[level..].copy_from_slice(&best_tail);
    best_value
}
