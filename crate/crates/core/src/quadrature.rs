//! Adaptive composite Simpson integration.

/// Stopping rule for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonConfig {
    /// Absolute error budget for the whole interval.
    pub abs_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: u32,
}

impl Default for SimpsonConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, max_depth: 40 }
    }
}

/// Returned when some sub-interval still exceeded its error budget at
/// `max_depth`. Carries the best estimate obtained anyway.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotConverged {
    pub estimate: f64,
}

/// Integrates `f` over `[a, b]` by recursive bisection with Richardson
/// correction. Each half receives half of the parent's error budget; a panel
/// is accepted once `|S_left + S_right - S_whole| <= 15 * tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, config: SimpsonConfig) -> Result<f64, NotConverged>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut converged = true;
    let estimate = recurse(&f, Panel { a, b, fa, fm, fb, whole }, config.abs_tol, config.max_depth, &mut converged);
    if converged {
        Ok(estimate)
    } else {
        Err(NotConverged { estimate })
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn recurse<F>(f: &F, p: Panel, tol: f64, depth_left: u32, converged: &mut bool) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;

    // The second test catches panels that can no longer be split in f64.
    if delta.abs() <= 15.0 * tol || lm <= p.a || rm >= p.b {
        return left + right + delta / 15.0;
    }
    if depth_left == 0 {
        *converged = false;
        return left + right + delta / 15.0;
    }
    let half = 0.5 * tol;
    recurse(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, half, depth_left - 1, converged)
        + recurse(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, half, depth_left - 1, converged)
}
