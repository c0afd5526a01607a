//! Shooting on the initial amplitude.
//!
//! For fixed equation parameters the initial value phi(0) = alpha splits
//! into amplitudes whose profile crosses zero at finite time and
//! amplitudes whose profile stays positive forever. The ground state sits
//! on the boundary; [`find_ground_state`] brackets it by bisection.
//!
//! Deciding "stays positive" from a finite integration needs care. The
//! decidable signatures, in the order they are checked:
//!
//! * a zero crossing with non-negligible slope: crossing side;
//! * monotone decay below a smallness threshold at the horizon: the
//!   ground-state shadow, bracketed as positive side;
//! * for lambda > 0, an interior positive minimum: the profile has turned
//!   back up and by energy decay can never reach the axis;
//! * for lambda <= 0, a running weighted norm exceeding the norm of an
//!   already-classified crossing solution: crossing profiles have the
//!   smaller norm among solutions of this family, so the trajectory
//!   cannot cross anymore;
//! * for lambda > 0, ending at a value comparable to the equilibrium:
//!   still trapped in the potential well.
//!
//! Anything else is indeterminate at this horizon; the search retries
//! with the horizon doubled a few times before giving up.

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegrationControls, OdeParams, Outcome, Trajectory};

/// Profiles ending below this at the horizon, having decayed monotonically,
/// count as numerically indistinguishable from the ground state.
pub const DEFAULT_SMALLNESS: f64 = 1e-8;

/// Fraction of the equilibrium amplitude that counts as "still trapped"
/// at the horizon for lambda > 0.
const TRAPPED_FRACTION: f64 = 0.25;

/// Why a trajectory counts as staying positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositiveReason {
    /// Interior local minimum with phi > 0 (lambda > 0 only).
    InteriorMin { t: f64, phi: f64 },
    /// Running weighted norm exceeded that of a known crossing solution
    /// (lambda <= 0 only).
    NormExceeded { lp: f64, reference: f64 },
    /// Still at equilibrium scale when the horizon was reached.
    BoundedAway { phi_end: f64 },
}

/// Decided behaviour of a shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// Reaches zero at finite time: above the ground-state amplitude.
    Crossing { t: f64, dphi: f64 },
    /// Stays positive: below the ground-state amplitude.
    Positive(PositiveReason),
    /// Monotone decay to numerical zero: on the ground-state shadow.
    /// Treated as the positive side when bracketing.
    NearGroundState,
}

impl Classification {
    pub fn is_crossing(&self) -> bool {
        matches!(self, Classification::Crossing { .. })
    }
}

/// One integration with its decided classification.
#[derive(Debug, Clone)]
pub struct Shot {
    pub alpha: f64,
    pub classification: Classification,
    pub trajectory: Trajectory,
}

/// Decide the behaviour of a finished trajectory, or report that the
/// horizon was too short. `reference_lp` is the smallest running-norm
/// total seen on a crossing solution of the same parameters, when one is
/// known.
pub fn classify(
    traj: &Trajectory,
    reference_lp: Option<f64>,
    smallness: f64,
) -> Result<Classification> {
    if let Some((t, dphi)) = traj.first_crossing() {
        return Ok(Classification::Crossing { t, dphi });
    }
    debug_assert_eq!(traj.outcome, Outcome::ReachedHorizon);
    let end = traj.last();
    if traj.is_monotone() && end.phi.abs() < smallness {
        return Ok(Classification::NearGroundState);
    }
    let lambda = traj.params.lambda;
    if lambda > 0.0 {
        if let Some((t, phi)) = traj.first_positive_min() {
            return Ok(Classification::Positive(PositiveReason::InteriorMin {
                t,
                phi,
            }));
        }
    } else if let Some(reference) = reference_lp {
        let lp = traj.lp_running_total();
        if lp > reference {
            return Ok(Classification::Positive(PositiveReason::NormExceeded {
                lp,
                reference,
            }));
        }
    }
    if lambda > 0.0 {
        let eq = traj.params.equilibrium().expect("lambda > 0 has equilibrium");
        if end.phi >= TRAPPED_FRACTION * eq.min(traj.alpha) {
            return Ok(Classification::Positive(PositiveReason::BoundedAway {
                phi_end: end.phi,
            }));
        }
    }
    Err(Error::Indeterminate {
        t_max: traj.controls.t_max,
    })
}

/// Integrate one amplitude and classify it at the given horizon.
pub fn shoot(
    params: &OdeParams,
    alpha: f64,
    controls: &IntegrationControls,
    reference_lp: Option<f64>,
) -> Result<Shot> {
    let trajectory = integrate(params, alpha, controls)?;
    let classification = classify(&trajectory, reference_lp, DEFAULT_SMALLNESS)?;
    Ok(Shot {
        alpha,
        classification,
        trajectory,
    })
}

/// Knobs of the bracketing search.
#[derive(Debug, Clone, Copy)]
pub struct ShootingControls {
    /// Stop when (hi - lo) / hi falls below this.
    pub width_tol: f64,
    pub max_bisections: u32,
    /// Starting amplitude of the upward scan; defaults to 1 for the plain
    /// form and 2 for the normalized form.
    pub seed: Option<f64>,
    pub smallness: f64,
    pub integration: IntegrationControls,
    /// Horizon doublings allowed when a shot comes back indeterminate.
    pub horizon_retries: u32,
}

impl Default for ShootingControls {
    fn default() -> Self {
        Self {
            width_tol: 1e-9,
            max_bisections: 200,
            seed: None,
            smallness: DEFAULT_SMALLNESS,
            integration: IntegrationControls::default(),
            horizon_retries: 3,
        }
    }
}

/// Bracketed ground-state amplitude with the witnesses on both sides.
#[derive(Debug, Clone)]
pub struct GroundState {
    /// Bracket midpoint, the ground-state amplitude estimate.
    pub alpha: f64,
    pub bracket: (f64, f64),
    pub bisections: u32,
    /// Trajectory integrated at the midpoint amplitude.
    pub trajectory: Trajectory,
    /// Last positive-side witness.
    pub lo: Shot,
    /// Last crossing-side witness.
    pub hi: Shot,
}

impl GroundState {
    pub fn width_rel(&self) -> f64 {
        (self.bracket.1 - self.bracket.0) / self.bracket.1
    }
}

fn shoot_resolved(
    params: &OdeParams,
    alpha: f64,
    controls: &ShootingControls,
    reference_lp: Option<f64>,
) -> Result<Shot> {
    let mut ic = controls.integration;
    let mut last_horizon = ic.t_max;
    for _ in 0..=controls.horizon_retries {
        let trajectory = integrate(params, alpha, &ic)?;
        match classify(&trajectory, reference_lp, controls.smallness) {
            Ok(classification) => {
                return Ok(Shot {
                    alpha,
                    classification,
                    trajectory,
                })
            }
            Err(Error::Indeterminate { t_max }) => {
                last_horizon = t_max;
                ic.t_max *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Indeterminate {
        t_max: last_horizon,
    })
}

/// Bracket the ground-state amplitude by bisection on the shot
/// classification. Scans up from a seed until a crossing is found, down
/// until a positive-side witness is found, then bisects to the requested
/// relative width.
pub fn find_ground_state(
    params: &OdeParams,
    controls: &ShootingControls,
) -> Result<GroundState> {
    let floor = -((params.n as f64 - 1.0) / 2.0).powi(2);
    if params.lambda <= floor {
        return Err(Error::InvalidArgument(format!(
            "no decaying ground state: lambda = {} is at or below the \
             spectral floor {floor}",
            params.lambda
        )));
    }
    if !(controls.width_tol > 0.0 && controls.width_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "width_tol must lie in (0, 1), got {}",
            controls.width_tol
        )));
    }
    let seed = controls
        .seed
        .unwrap_or(if params.normalized { 2.0 } else { 1.0 });
    if !(seed > 0.0) || !seed.is_finite() {
        return Err(Error::SeedFailure(format!("bad seed amplitude {seed}")));
    }

    fn take_reference(shot: &Shot, reference: &mut Option<f64>) {
        let lp = shot.trajectory.lp_running_total();
        *reference = Some(reference.map_or(lp, |r| r.min(lp)));
    }
    let mut reference: Option<f64> = None;

    // Upward scan for a crossing witness.
    let mut lo: Option<Shot> = None;
    let mut hi: Option<Shot> = None;
    let mut a = seed;
    for _ in 0..60 {
        match shoot_resolved(params, a, controls, reference) {
            Ok(shot) if shot.classification.is_crossing() => {
                take_reference(&shot, &mut reference);
                hi = Some(shot);
                break;
            }
            Ok(shot) => lo = Some(shot),
            // Undecided at every horizon: crossing happens sooner at
            // larger amplitude, so keep scanning without a witness.
            Err(Error::Indeterminate { .. }) => {}
            Err(e) => return Err(e),
        }
        a *= 2.0;
    }
    let mut hi = hi.ok_or_else(|| {
        Error::SeedFailure(format!(
            "no crossing found scanning up from {seed} to {a}"
        ))
    })?;

    // Downward scan for a positive-side witness, if the upward scan
    // started above one.
    if lo.is_none() {
        let mut a = 0.5 * hi.alpha;
        for _ in 0..60 {
            let shot = shoot_resolved(params, a, controls, reference)?;
            if shot.classification.is_crossing() {
                take_reference(&shot, &mut reference);
                hi = shot;
            } else {
                lo = Some(shot);
                break;
            }
            a *= 0.5;
        }
    }
    let mut lo = lo.ok_or_else(|| {
        Error::SeedFailure(format!(
            "no positive-side amplitude found scanning down from {}",
            hi.alpha
        ))
    })?;

    let mut bisections = 0;
    while hi.alpha - lo.alpha > controls.width_tol * hi.alpha
        && bisections < controls.max_bisections
    {
        let mid = 0.5 * (lo.alpha + hi.alpha);
        if mid <= lo.alpha || mid >= hi.alpha {
            break;
        }
        let shot = shoot_resolved(params, mid, controls, reference)?;
        if shot.classification.is_crossing() {
            take_reference(&shot, &mut reference);
            hi = shot;
        } else {
            lo = shot;
        }
        bisections += 1;
    }

    let alpha = 0.5 * (lo.alpha + hi.alpha);
    let trajectory = integrate(params, alpha, &controls.integration)?;
    Ok(GroundState {
        alpha,
        bracket: (lo.alpha, hi.alpha),
        bisections,
        trajectory,
        lo,
        hi,
    })
}
