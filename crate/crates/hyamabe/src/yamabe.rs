//! Assembly of the curvature constant Q(r) from a ground-state solve.
//!
//! For the product of hyperbolic n-space with an m-sphere of radius
//! sqrt(r), minimizing over radial test functions on the hyperbolic
//! factor reduces the constant to the ground-state profile phi of the
//! radial equation at lambda(r), through
//!
//! ```text
//! Q(r) = a r^(m/k) V(S^m)^(2/k) |f|_p^(4/(k-2)),    k = n + m,
//! ```
//!
//! with the norm taken on hyperbolic space. [`compute_q`] runs the
//! pipeline lambda(r) -> ground-state bracket -> weighted norms ->
//! formula, certifies the quadrature truncation through the tail bound,
//! and propagates the bracket spread into an uncertainty for the result.

use crate::dimension::{rat_f64, sphere_volume, sphere_yamabe, Dimensions};
use crate::error::{Error, Result};
use crate::norms::{tail_bound, truncation_point, weighted_grad2, weighted_lk, NormBundle};
use crate::ode::{rescale_normalized, OdeParams, Trajectory};
use crate::shooting::{find_ground_state, ShootingControls};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Values of Q at the degenerate sphere radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConstants {
    /// Flat limit Q(0), a Gagliardo-Nirenberg-type constant; stored, not
    /// computed (its computation is a different algorithm entirely).
    pub q0: f64,
    /// Round unit sphere value Q(1) = Y(S^(n+m)).
    pub q1: f64,
}

const Q0_TABLE: [(u32, u32, f64); 3] = [
    (2, 2, 59.40481),
    (2, 3, 78.18644),
    (3, 2, 75.39687),
];

/// Stored Q(0) and computed Q(1) for the supported factor dimensions.
pub fn boundary_constants(dims: &Dimensions) -> Result<BoundaryConstants> {
    let q1 = sphere_yamabe(dims.k())?;
    Q0_TABLE
        .iter()
        .find(|&&(n, m, _)| n == dims.n() && m == dims.m())
        .map(|&(_, _, q0)| BoundaryConstants { q0, q1 })
        .ok_or(Error::UnknownQ0 {
            n: dims.n(),
            m: dims.m(),
            q1,
        })
}

/// Small-r lower bound Q(r) >= (m(m-1) - r n(n-1)) / m(m-1) * Q(0),
/// valid while the factor stays positive.
pub fn small_r_lower_bound(dims: &Dimensions, r: f64) -> Result<f64> {
    let mm = (dims.m() * (dims.m() - 1)) as f64;
    let nn = (dims.n() * (dims.n() - 1)) as f64;
    if !(r > 0.0 && r < mm / nn) {
        return Err(Error::InvalidArgument(format!(
            "lower bound needs r in (0, {}), got {r}",
            mm / nn
        )));
    }
    let q0 = boundary_constants(dims)?.q0;
    Ok((mm - r * nn) / mm * q0)
}

/// Scaling transfer: from Q(r0) an upper bound (r1/r0)^(m/k) Q(r0) for
/// Q(r1) when r0 <= r1; equivalently a down-range lower-bound transfer.
pub fn scaling_upper_transfer(
    q_at_r0: f64,
    r0: f64,
    r1: f64,
    dims: &Dimensions,
) -> Result<f64> {
    if !(r0 > 0.0 && r1 >= r0) {
        return Err(Error::InvalidArgument(format!(
            "transfer needs 0 < r0 <= r1, got r0 = {r0}, r1 = {r1}"
        )));
    }
    let e = dims.m() as f64 / dims.k() as f64;
    Ok((r1 / r0).powf(e) * q_at_r0)
}

/// The Q formula applied to a given L^p norm.
pub fn q_from_lp(dims: &Dimensions, r: f64, lp: f64) -> Result<f64> {
    let dc = dims.derived();
    let a = rat_f64(dc.a);
    let k = dc.k as f64;
    let m = dims.m() as f64;
    let vol_m = sphere_volume(dims.m())?;
    Ok(a * r.powf(m / k) * vol_m.powf(2.0 / k) * lp.powf(4.0 / (k - 2.0)))
}

/// Knobs of the Q pipeline.
#[derive(Debug, Clone, Copy)]
pub struct QControls {
    pub shooting: ShootingControls,
    /// Largest accepted relative tail contribution to the p-integral.
    pub tail_rel_max: f64,
    /// Bracket-width tightenings (100x each) allowed to meet the budget.
    pub tighten_rounds: u32,
    /// Permit r > 1 (mathematically fine, outside the validated domain).
    pub allow_large_r: bool,
}

impl Default for QControls {
    fn default() -> Self {
        Self {
            shooting: ShootingControls::default(),
            tail_rel_max: 1e-6,
            tighten_rounds: 3,
            allow_large_r: false,
        }
    }
}

/// A computed Q value with its provenance and error budget.
#[derive(Debug, Clone)]
pub struct QResult {
    pub dims: Dimensions,
    pub r: f64,
    pub lambda: f64,
    /// Ground-state initial value in the plain form.
    pub alpha_lambda: f64,
    pub norms: NormBundle,
    pub q_value: f64,
    /// Relative uncertainty: bracket spread of the norm plus the tail
    /// budget, propagated through the Q formula's norm exponent.
    pub q_rel_uncertainty: f64,
    /// Omitted tail relative to the p-integral (certified bound).
    pub tail_rel: f64,
    pub bisections: u32,
    pub bracket_width_rel: f64,
    pub width_tol_used: f64,
    /// Whether the solve ran in the normalized form (lambda > 0).
    pub normalized_form: bool,
}

fn lp_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    let (t_cut, _) = truncation_point(traj);
    Ok(weighted_lk(traj, p, t_cut)?.powf(1.0 / p))
}

/// Compute Q(r) for r in (0, 1].
pub fn compute_q(dims: &Dimensions, r: f64, controls: &QControls) -> Result<QResult> {
    if r > 1.0 && !controls.allow_large_r {
        return Err(Error::InvalidArgument(format!(
            "r = {r} is outside the validated domain (0, 1]; \
             set allow_large_r to force"
        )));
    }
    let lambda = dims.lambda_of_r(r)?;
    let dc = dims.derived();
    let p = rat_f64(dc.p);
    let q_exp = rat_f64(dc.q);
    let normalized = lambda > 0.0;
    let params = if normalized {
        OdeParams::normalized(lambda, q_exp, dims.n())?
    } else {
        OdeParams::plain(lambda, q_exp, dims.n())?
    };

    let mut sc = controls.shooting;
    let mut last_fail = (f64::INFINITY, f64::INFINITY);
    for _round in 0..=controls.tighten_rounds {
        let gs = find_ground_state(&params, &sc)?;
        let width_rel = gs.width_rel();
        let bisections = gs.bisections;
        let (mid, lo_traj, hi_traj) = if normalized {
            (
                rescale_normalized(&gs.trajectory)?,
                rescale_normalized(&gs.lo.trajectory)?,
                rescale_normalized(&gs.hi.trajectory)?,
            )
        } else {
            (gs.trajectory, gs.lo.trajectory, gs.hi.trajectory)
        };

        let (t_cut, eps) = truncation_point(&mid);
        let ip_mid = weighted_lk(&mid, p, t_cut)?;
        let lp_mid = ip_mid.powf(1.0 / p);
        let q_mid = q_from_lp(dims, r, lp_mid)?;

        // Self-consistent tail certificate: bound with 1%-inflated inputs,
        // re-inflate the norm by the bound itself, bound again.
        let k1 = tail_bound(eps, r, dims, 1.01 * lp_mid, 1.01 * q_mid)?;
        let lp_up = (ip_mid + k1).powf(1.0 / p).max(1.01 * lp_mid);
        let q_up = q_from_lp(dims, r, lp_up)?;
        let k2 = tail_bound(eps, r, dims, lp_up, q_up)?;
        let tail_rel = k2 / ip_mid;

        if tail_rel > controls.tail_rel_max {
            // Truncation happened while the profile had not yet collapsed
            // (the bracket is too wide for the certificate): tighten.
            last_fail = (tail_rel, width_rel);
            sc.width_tol = (sc.width_tol * 1e-2).max(1e-13);
            continue;
        }

        let lp_lo = lp_norm(&lo_traj, p)?;
        let lp_hi = lp_norm(&hi_traj, p)?;
        let spread =
            ((lp_hi - lp_mid).abs()).max((lp_mid - lp_lo).abs()) / lp_mid;
        let unc_lp_rel = spread + tail_rel / p + 1e-12;
        let k = dc.k as f64;
        let q_rel_uncertainty = 4.0 / (k - 2.0) * unc_lp_rel;

        let l2 = weighted_lk(&mid, 2.0, t_cut)?.sqrt();
        let grad2 = weighted_grad2(&mid, t_cut)?.sqrt();
        return Ok(QResult {
            dims: *dims,
            r,
            lambda,
            alpha_lambda: mid.alpha,
            norms: NormBundle {
                lp: lp_mid,
                l2,
                grad2,
                tail_bound_p: k2,
                truncation_t: t_cut,
            },
            q_value: q_mid,
            q_rel_uncertainty,
            tail_rel,
            bisections,
            bracket_width_rel: width_rel,
            width_tol_used: sc.width_tol,
            normalized_form: normalized,
        });
    }
    Err(Error::TailNotCertified {
        tail_rel: last_fail.0,
        width_rel: last_fail.1,
    })
}

/// Compute Q over a list of radii on a bounded worker pool, preserving
/// input order. Each radius is an independent solve.
pub fn sweep_q(
    dims: &Dimensions,
    rs: &[f64],
    controls: &QControls,
    jobs: usize,
) -> Vec<Result<QResult>> {
    let jobs = jobs.max(1).min(rs.len().max(1));
    if jobs == 1 {
        return rs.iter().map(|&r| compute_q(dims, r, controls)).collect();
    }
    let slots: Vec<Mutex<Option<Result<QResult>>>> =
        rs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= rs.len() {
                    break;
                }
                let res = compute_q(dims, rs[i], controls);
                *slots[i].lock().expect("result slot poisoned") = Some(res);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("every index was claimed by a worker")
        })
        .collect()
}
