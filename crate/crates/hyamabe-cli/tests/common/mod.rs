//! Fixed-step classical Runge-Kutta reference integrator, deliberately
//! independent of the adaptive solver: its own stepping, its own series
//! start, its own crossing and minimum detection. Used to cross-check
//! classifications and bracket locations.

use hyamabe::OdeParams;

pub struct Rk4Run {
    /// First zero crossing, linearly interpolated between steps.
    pub crossed: Option<f64>,
    /// First interior minimum with positive value.
    pub first_positive_min: Option<(f64, f64)>,
    pub phi_end: f64,
}

/// Integrate phi'' + (n-1) coth(t) phi' = F(phi) from a quadratic series
/// start at t = 1e-3 with fixed step `h`. Stops at the first crossing.
pub fn rk4_shoot(params: &OdeParams, alpha: f64, t_max: f64, h: f64) -> Rk4Run {
    let n1 = (params.n - 1) as f64;
    let f = |t: f64, y: [f64; 2]| -> [f64; 2] {
        let coth = 1.0 + 2.0 / (2.0 * t).exp_m1();
        [y[1], params.forcing(y[0]) - n1 * coth * y[1]]
    };
    let t0 = 1e-3;
    let fa = params.forcing(alpha);
    let nn = params.n as f64;
    let mut t = t0;
    let mut y = [alpha + fa * t0 * t0 / (2.0 * nn), fa * t0 / nn];
    let mut run = Rk4Run {
        crossed: None,
        first_positive_min: None,
        phi_end: y[0],
    };
    while t < t_max {
        let hc = h.min(t_max - t);
        let (pt, py) = (t, y);
        let k1 = f(t, y);
        let k2 = f(
            t + hc / 2.0,
            [y[0] + hc / 2.0 * k1[0], y[1] + hc / 2.0 * k1[1]],
        );
        let k3 = f(
            t + hc / 2.0,
            [y[0] + hc / 2.0 * k2[0], y[1] + hc / 2.0 * k2[1]],
        );
        let k4 = f(t + hc, [y[0] + hc * k3[0], y[1] + hc * k3[1]]);
        y = [
            y[0] + hc / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + hc / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        t += hc;
        if py[0] > 0.0 && y[0] <= 0.0 {
            let w = py[0] / (py[0] - y[0]);
            run.crossed = Some(pt + w * (t - pt));
            break;
        }
        if run.first_positive_min.is_none() && py[1] < 0.0 && y[1] >= 0.0 && y[0] > 0.0 {
            run.first_positive_min = Some((t, y[0]));
        }
    }
    run.phi_end = y[0];
    run
}

/// Bisect the crossing/no-crossing boundary in `[lo, hi]`; `hi` must
/// cross and `lo` must not at the given horizon.
pub fn rk4_alpha_gs(params: &OdeParams, mut lo: f64, mut hi: f64, t_max: f64, h: f64) -> f64 {
    assert!(rk4_shoot(params, hi, t_max, h).crossed.is_some());
    assert!(rk4_shoot(params, lo, t_max, h).crossed.is_none());
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if rk4_shoot(params, mid, t_max, h).crossed.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
