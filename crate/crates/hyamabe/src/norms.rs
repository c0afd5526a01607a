//! Sinh-weighted integrals of radial profiles and the truncation bound.
//!
//! For a radial function f(x) = phi(|x|) on hyperbolic n-space,
//!
//! ```text
//! int f^k dv     = V(S^(n-1)) int_0^inf phi^k   sinh^(n-1)(t) dt
//! int |grad f|^2 = V(S^(n-1)) int_0^inf (phi')^2 sinh^(n-1)(t) dt
//! ```
//!
//! The integrals are evaluated by composite Gauss-Legendre panels over
//! the integrator's dense output, plus the analytic contribution of the
//! series segment below t_start. Truncating at finite t is certified by
//! [`tail_bound`], which converts a pointwise bound phi(t) < eps into a
//! bound on the omitted contribution to the p-integral.

use crate::dimension::{rat_f64, sphere_volume, Dimensions};
use crate::error::{Error, Result};
use crate::numeric::{gl4, Kahan};
use crate::ode::Trajectory;

/// Profiles are truncated where they first drop below this level.
///
/// Cutting at phi(T) = eps leaves an exact defect a phi phi' sinh^(n-1)(T)
/// in the integrated Rayleigh identity. The worst validated case (n = 3,
/// lambda = -3/4) decays only just fast enough against the sinh^2 weight,
/// so the defect scales like eps^(2/3) there; 1e-10 keeps it below 1e-7
/// relative while staying well above where a width-1e-9 bracket midpoint
/// peels off the ground state.
pub const TRUNCATION_LEVEL: f64 = 1e-10;

/// Quadrature panel width; segments wider than this are subdivided.
pub const QUAD_PANEL: f64 = 1e-3;

/// Weighted norms of one truncated profile together with the truncation
/// certificate.
#[derive(Debug, Clone, Copy)]
pub struct NormBundle {
    /// L^p norm of f (p the subcritical exponent of the product).
    pub lp: f64,
    /// L^2 norm of f.
    pub l2: f64,
    /// L^2 norm of grad f.
    pub grad2: f64,
    /// Bound on the omitted tail's contribution to the p-integral of f.
    pub tail_bound_p: f64,
    /// Truncation time the norms were integrated up to.
    pub truncation_t: f64,
}

/// Where to cut a trajectory for norm purposes, and the profile value
/// there: the first sample below [`TRUNCATION_LEVEL`], else the first
/// interior minimum (beyond it the profile no longer follows the ground
/// state), else the zero crossing, else the horizon.
pub fn truncation_point(traj: &Trajectory) -> (f64, f64) {
    let chosen = traj
        .samples
        .iter()
        .find(|s| s.phi < TRUNCATION_LEVEL)
        .map(|s| (s.t, s.phi))
        .or_else(|| traj.first_positive_min())
        .or_else(|| traj.first_crossing().map(|(t, _)| (t, 0.0)))
        .unwrap_or_else(|| {
            let s = traj.last();
            (s.t, s.phi)
        });
    (chosen.0, chosen.1.abs().max(1e-300))
}

fn weighted_integral<G>(traj: &Trajectory, t_cut: f64, panel: f64, g: G) -> f64
where
    G: Fn(f64, f64, f64) -> f64,
{
    let n1 = traj.params.n as i32 - 1;
    let f = |t: f64, phi: f64, dphi: f64| g(t, phi, dphi) * t.sinh().powi(n1);
    let mut acc = Kahan::new();
    let sliver_end = traj.t_start().min(t_cut);
    acc.add(gl4(0.0, sliver_end, |t| {
        f(t, traj.phi_series(t), traj.dphi_series(t))
    }));
    for seg in &traj.segments {
        if seg.t0 >= t_cut {
            break;
        }
        let lo = seg.t0;
        let hi = seg.t1().min(t_cut);
        if hi <= lo {
            continue;
        }
        let m = ((hi - lo) / panel).ceil().max(1.0) as usize;
        let hp = (hi - lo) / m as f64;
        for j in 0..m {
            let a = lo + hp * j as f64;
            let b = if j + 1 == m { hi } else { a + hp };
            acc.add(gl4(a, b, |t| {
                let (phi, dphi) = seg.eval(t);
                f(t, phi, dphi)
            }));
        }
    }
    acc.value()
}

fn check_cut(traj: &Trajectory, t_cut: f64) -> Result<()> {
    if !(t_cut >= 0.0) || t_cut > traj.end_t() {
        return Err(Error::InvalidArgument(format!(
            "t_cut = {t_cut} outside the computed range [0, {}]",
            traj.end_t()
        )));
    }
    Ok(())
}

/// V(S^(n-1)) int_0^t_cut |phi|^k sinh^(n-1), the k-integral of f over
/// the ball of radius t_cut.
pub fn weighted_lk(traj: &Trajectory, k: f64, t_cut: f64) -> Result<f64> {
    weighted_lk_panel(traj, k, t_cut, QUAD_PANEL)
}

pub(crate) fn weighted_lk_panel(
    traj: &Trajectory,
    k: f64,
    t_cut: f64,
    panel: f64,
) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "norm exponent must be positive, got {k}"
        )));
    }
    check_cut(traj, t_cut)?;
    let vol = sphere_volume(traj.params.n - 1)?;
    Ok(vol * weighted_integral(traj, t_cut, panel, |_, phi, _| phi.abs().powf(k)))
}

/// V(S^(n-1)) int_0^t_cut (phi')^2 sinh^(n-1), the squared gradient
/// integral of f over the ball of radius t_cut.
pub fn weighted_grad2(traj: &Trajectory, t_cut: f64) -> Result<f64> {
    check_cut(traj, t_cut)?;
    let vol = sphere_volume(traj.params.n - 1)?;
    Ok(vol * weighted_integral(traj, t_cut, QUAD_PANEL, |_, _, dphi| dphi * dphi))
}

/// Certified bound on the tail integral int_{|x| > t} f^p given
/// phi(t) < eps, an upper bound on the full L^p norm, and an upper bound
/// on the constant Q the profile realizes:
///
/// ```text
/// K(eps) = eps^(p-2) lp_upper^2 q_upper
///          / (r^(m/(m+n)) V(S^m)^(2/(m+n)) D)
/// ```
///
/// via the chain int_tail f^p <= eps^(p-2) |f|_2^2 and the spectral-gap
/// bound relating |f|_2^2 to the Q-functional with the positive constant
/// D = (m+n-1)/(m+n-2) (n-1)^2 + m(m-1) - n(n-1).
pub fn tail_bound(
    eps: f64,
    r: f64,
    dims: &Dimensions,
    lp_upper: f64,
    q_upper: f64,
) -> Result<f64> {
    for (name, v) in [
        ("eps", eps),
        ("r", r),
        ("lp_upper", lp_upper),
        ("q_upper", q_upper),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tail_bound needs positive finite {name}, got {v}"
            )));
        }
    }
    let dc = dims.derived();
    let p = rat_f64(dc.p);
    let d = rat_f64(dc.d);
    let k = dc.k as f64;
    let m = dims.m() as f64;
    let vol_m = sphere_volume(dims.m())?;
    Ok(eps.powf(p - 2.0) * lp_upper * lp_upper * q_upper
        / (r.powf(m / k) * vol_m.powf(2.0 / k) * d))
}
