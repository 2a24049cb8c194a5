use super::{chebyshev_coefficients, chebyshev_grid, OddPolynomial, SvtFunction};
use crate::error::{Error, Result};
use crate::tol::{DEGREE_CAP, GRID_POINTS};
use statrs::function::erf::{erf, erfc_inv};

/// Default log-amplitude margin between the certified interval and the kink at `√p*`.
///
/// A multiplicative guarantee that reaches the saturation point itself forces
/// degree `Θ(1/(δ√p*))`; stopping a factor `e^{-margin}` short keeps it logarithmic in `1/δ`.
pub const DEFAULT_EDGE_MARGIN: f64 = 0.1;

/// Number of Gauss–Chebyshev nodes used to expand targets.
const EXPANSION_NODES: usize = 2 * GRID_POINTS;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} outside (0, 1)")))
    }
}

/// Largest |P| over the verification grid on `[-1, 1]`.
pub fn grid_max_abs(p: &OddPolynomial) -> f64 {
    chebyshev_grid(-1.0, 1.0, GRID_POINTS).into_iter().fold(0.0, |m, x| m.max(p.eval(x).abs()))
}

/// Truncates the expansion at increasing odd degrees from `start`, normalizes
/// to `max|P| ≤ 1 − shrink`, and returns the first candidate that passes `accept`.
fn certify(
    full: &[f64],
    start: usize,
    shrink: f64,
    what: &str,
    accept: impl Fn(&OddPolynomial) -> bool,
) -> Result<OddPolynomial> {
    let mut d = start.max(1) | 1;
    while d <= DEGREE_CAP {
        let raw = OddPolynomial::from_full(full, d)?;
        let m = grid_max_abs(&raw);
        let p = raw.scaled((1.0 - shrink) / m.max(1.0));
        if accept(&p) {
            return Ok(p);
        }
        d += 2;
    }
    Err(Error::Capacity(format!("{what} needs degree above the cap {DEGREE_CAP}")))
}

/// Smallest odd degree whose coefficient tail weighted by `weight(k)` is at most `budget`.
fn tail_degree(full: &[f64], budget: f64, weight: impl Fn(usize) -> f64) -> usize {
    let mut tail = 0.0;
    let mut d = full.len() - 1;
    for k in (1..full.len()).rev() {
        tail += full[k].abs() * weight(k);
        if tail > budget {
            d = k;
            break;
        }
        d = k - 1;
    }
    d.max(1) | 1
}

/// Sign approximation for fixed-point amplification: `|P| ≤ 1` on `[-1, 1]`
/// and `1 − P(x) ≤ δ` on `[√p*, 1]`, from a truncated expansion of `erf(kx)`.
pub fn fpaa_polynomial(p_star: f64, delta: f64) -> Result<OddPolynomial> {
    check_unit("p*", p_star)?;
    check_unit("delta", delta)?;
    let k = erfc_inv(delta / 4.0) / p_star.sqrt();
    let full = chebyshev_coefficients(|x| erf(k * x), DEGREE_CAP, EXPANSION_NODES);
    let start = tail_degree(&full, delta / 4.0, |_| 1.0);
    let grid = chebyshev_grid(p_star.sqrt(), 1.0, GRID_POINTS);
    certify(&full, start, delta / 8.0, "fixed-point polynomial", |p| grid.iter().all(|&x| 1.0 - p.eval(x) <= delta))
}

/// Gaussian-smoothed `|y|`; never below `|y|`, exponentially close away from 0.
fn smooth_abs(y: f64, eps: f64) -> f64 {
    y * erf(y / eps) + eps / std::f64::consts::PI.sqrt() * (-(y / eps).powi(2)).exp()
}

/// Largest smoothing width whose excess over `|y|` at `|y| = margin`,
/// times `weight`, stays below `budget`.
fn smoothing_width(margin: f64, weight: f64, budget: f64) -> f64 {
    let excess = |eps: f64| weight * (smooth_abs(margin, eps) - margin);
    let (mut lo, mut hi) = (margin * 1e-3, margin * 4.0);
    if excess(hi) <= budget {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn check_margin(margin: f64) -> Result<()> {
    if margin > 0.0 && margin < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("edge margin {margin} outside (0, 1)")))
    }
}

pub fn laa_polynomial(p_star: f64, delta_mult: f64) -> Result<OddPolynomial> {
    laa_polynomial_with_margin(p_star, delta_mult, DEFAULT_EDGE_MARGIN)
}

/// Linear amplification `x/√p*` with multiplicative error `delta_mult` on
/// `[0, √p*·e^{-margin}]`, bounded by 1 everywhere.
///
/// The target is `exp(min_s(ln(x/√p*), 0))` with a Gaussian-smoothed minimum.
pub fn laa_polynomial_with_margin(p_star: f64, delta_mult: f64, margin: f64) -> Result<OddPolynomial> {
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::Domain(format!("p* = {p_star} outside (0, 1]")));
    }
    check_unit("delta_mult", delta_mult)?;
    check_margin(margin)?;
    let r = p_star.sqrt();
    let eps = smoothing_width(margin, 0.5, delta_mult / 4.0);
    let target = move |x: f64| {
        let a = x.abs();
        if a < 1e-300 {
            return 0.0;
        }
        let y = (a / r).ln();
        x.signum() * (0.5 * (y - smooth_abs(y, eps))).exp()
    };
    let full = chebyshev_coefficients(target, DEGREE_CAP, EXPANSION_NODES);
    let start = tail_degree(&full, delta_mult / 4.0, |k| r * k as f64);
    let ideal = SvtFunction::LinearAmp { p_star };
    let hi = r * (-margin).exp();
    certify(&full, start, delta_mult / 8.0, "linear-amplification polynomial", |p| {
        multiplicative_error(p, &ideal, (1e-6f64.min(hi), hi)).is_ok_and(|e| e <= delta_mult)
    })
}

pub fn inverse_polynomial(p_star: f64, p_max: f64, delta_mult: f64) -> Result<OddPolynomial> {
    inverse_polynomial_with_margin(p_star, p_max, delta_mult, DEFAULT_EDGE_MARGIN)
}

/// Truncated inverse `√p*/x` with multiplicative error `delta_mult` on
/// `[√p*·e^{margin}, √p_max]`, bounded by 1 everywhere.
///
/// The target is `exp(−|ln(x/√p*)|_s)`, which follows `x/√p*` below the kink.
pub fn inverse_polynomial_with_margin(p_star: f64, p_max: f64, delta_mult: f64, margin: f64) -> Result<OddPolynomial> {
    if !(p_star > 0.0 && p_star <= p_max && p_max <= 1.0) {
        return Err(Error::Domain(format!("need 0 < p* <= p_max <= 1, got {p_star}, {p_max}")));
    }
    check_unit("delta_mult", delta_mult)?;
    check_margin(margin)?;
    let r = p_star.sqrt();
    let eps = smoothing_width(margin, 1.0, delta_mult / 4.0);
    let target = move |x: f64| {
        let a = x.abs();
        if a < 1e-300 {
            return 0.0;
        }
        x.signum() * (-smooth_abs((a / r).ln(), eps)).exp()
    };
    let full = chebyshev_coefficients(target, DEGREE_CAP, EXPANSION_NODES);
    let floor = (p_star / p_max).sqrt();
    let start = tail_degree(&full, delta_mult / 4.0 * floor, |_| 1.0);
    let ideal = SvtFunction::TruncInverse { p_star };
    let lo = r * margin.exp();
    let hi = p_max.sqrt();
    certify(&full, start, delta_mult / 8.0, "truncated-inverse polynomial", |p| {
        lo > hi || multiplicative_error(p, &ideal, (lo, hi)).is_ok_and(|e| e <= delta_mult)
    })
}

/// Max over the verification grid on `[a, b]` of `|P(x)/f(x) − 1|`.
pub fn multiplicative_error(poly: &OddPolynomial, target: &SvtFunction, interval: (f64, f64)) -> Result<f64> {
    let (a, b) = interval;
    if !(a > 0.0 && a <= b && b <= 1.0) {
        return Err(Error::Domain(format!("interval [{a}, {b}] not inside (0, 1]")));
    }
    let mut worst: f64 = 0.0;
    for x in chebyshev_grid(a, b, GRID_POINTS) {
        let t = target.eval_unchecked(x);
        if t.abs() < 1e-14 {
            return Err(Error::Domain(format!("target vanishes at x = {x}")));
        }
        worst = worst.max((poly.eval(x) / t - 1.0).abs());
    }
    Ok(worst)
}
