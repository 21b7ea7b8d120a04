//! Adaptive Simpson quadrature.

const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` to roughly `abs_tol`, by recursive Simpson with Richardson correction.
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` for an `f` that is smooth between the given breakpoints.
///
/// Each piece is integrated separately with its endpoints pulled inward by
/// a relative `1e-12`, so the value of `f` exactly at a jump never enters.
/// `rel_tol` is applied per piece relative to its own magnitude.
pub(crate) fn integrate_piecewise(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &mut alloc::vec::Vec<f64>,
    rel_tol: f64,
) -> f64 {
    breakpoints.retain(|&x| x > a && x < b);
    breakpoints.push(a);
    breakpoints.push(b);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    breakpoints
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let pad = (hi - lo) * 1e-12;
            let (lo, hi) = (lo + pad, hi - pad);
            let rough = (hi - lo) * libm::fabs(f(0.5 * (lo + hi)));
            adaptive_simpson(f, lo, hi, rel_tol * rough.max(f64::MIN_POSITIVE))
        })
        .sum()
}
