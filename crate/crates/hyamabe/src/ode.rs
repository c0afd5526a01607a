//! The radial profile equation on hyperbolic n-space and its integrator.
//!
//! Positive radial solutions of
//!
//! ```text
//! phi'' + (n-1) coth(t) phi' = lambda phi - phi^q        (plain form)
//! phi'' + (n-1) coth(t) phi' = lambda (phi - phi^q)      (normalized form)
//! ```
//!
//! are produced by a Dormand-Prince 5(4) pair with PI step-size control.
//! Each accepted step also stores a quintic Hermite dense-output segment
//! (built from values, slopes and curvatures at both step ends), so the
//! downstream quadrature can sample the profile anywhere. The integrator
//! watches for the first zero crossing of phi and for interior extrema,
//! and enforces that the mechanical energy
//!
//! ```text
//! E = phi'^2 / 2 + V(phi),   dE/dt = -(n-1) coth(t) phi'^2 <= 0
//! ```
//!
//! never increases beyond the tolerance-level drift; a violation aborts
//! the run, since it signals an inconsistent right-hand side or step size.

use crate::error::{Error, Result};
use crate::numeric::{bisect_root, coth, gl4, sign_pow, Kahan};
use std::io::{self, Write};

/// Parameters of the profile equation.
///
/// The normalized form is only meaningful for `lambda > 0`: it shares its
/// solution set with the plain form up to the amplitude factor
/// `lambda^(1/(q-1))` and keeps the interesting dynamics at unit scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    pub lambda: f64,
    pub q: f64,
    pub n: u32,
    pub normalized: bool,
}

impl OdeParams {
    pub fn new(lambda: f64, q: f64, n: u32, normalized: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "hyperbolic dimension must be at least 2, got {n}"
            )));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponent q must exceed 1, got {q}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        if normalized && !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "normalized form needs lambda > 0, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            q,
            n,
            normalized,
        })
    }

    pub fn plain(lambda: f64, q: f64, n: u32) -> Result<Self> {
        Self::new(lambda, q, n, false)
    }

    pub fn normalized(lambda: f64, q: f64, n: u32) -> Result<Self> {
        Self::new(lambda, q, n, true)
    }

    /// Forcing term F(phi) of phi'' + (n-1) coth(t) phi' = F(phi),
    /// extended oddly through zero so the flow stays well defined when a
    /// trajectory overshoots the axis inside a step.
    pub fn forcing(&self, phi: f64) -> f64 {
        let pow = sign_pow(phi, self.q);
        if self.normalized {
            self.lambda * (phi - pow)
        } else {
            self.lambda * phi - pow
        }
    }

    /// Potential V with V' = -F, so that E = phi'^2/2 + V(phi) decays.
    pub fn potential(&self, phi: f64) -> f64 {
        let amp = phi.abs().powf(self.q + 1.0) / (self.q + 1.0);
        if self.normalized {
            self.lambda * (-0.5 * phi * phi + amp)
        } else {
            -0.5 * self.lambda * phi * phi + amp
        }
    }

    /// Positive equilibrium amplitude of the plain form, when it exists.
    pub fn equilibrium(&self) -> Option<f64> {
        if self.lambda > 0.0 {
            if self.normalized {
                Some(1.0)
            } else {
                Some(self.lambda.powf(1.0 / (self.q - 1.0)))
            }
        } else {
            None
        }
    }

    fn accel(&self, t: f64, phi: f64, dphi: f64) -> f64 {
        self.forcing(phi) - (self.n as f64 - 1.0) * coth(t) * dphi
    }
}

/// Mechanical energy of a state; non-increasing along solutions.
pub fn energy(params: &OdeParams, phi: f64, dphi: f64) -> f64 {
    0.5 * dphi * dphi + params.potential(phi)
}

/// Integrator knobs. The defaults match the regime the certification
/// sweeps run in and are tight enough that the bracketing tolerance, not
/// the local error, dominates the final accuracy.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationControls {
    /// Hand-off point of the series start; must lie in (0, 1e-3].
    pub t_start: f64,
    /// Integration horizon.
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegrationControls {
    fn default() -> Self {
        Self {
            t_start: 1e-6,
            t_max: 50.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl IntegrationControls {
    fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0 && self.t_start <= 1e-3) {
            return Err(Error::InvalidArgument(format!(
                "t_start must lie in (0, 1e-3], got {}",
                self.t_start
            )));
        }
        if !(self.t_max > self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "t_max = {} must exceed t_start = {}",
                self.t_max, self.t_start
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Slope magnitudes below this are treated as integration noise by the
    /// event detection, so roundoff-level jitter of a flat tail cannot fake
    /// a crossing or an extremum.
    pub fn slope_deadband(&self) -> f64 {
        10.0 * self.abs_tol
    }
}

/// Series start near the coordinate singularity at t = 0. With F = forcing,
///
/// ```text
/// phi(t)  = alpha + F(alpha) t^2 / (2n) + O(t^4)
/// phi'(t) = F(alpha) t / n + O(t^3)
/// ```
///
/// (odd-order terms vanish because radial profiles are even in t).
pub fn series_start(params: &OdeParams, alpha: f64, t_start: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial amplitude must be positive, got {alpha}"
        )));
    }
    if !(t_start > 0.0 && t_start <= 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "t_start must lie in (0, 1e-3], got {t_start}"
        )));
    }
    let f = params.forcing(alpha);
    let n = params.n as f64;
    Ok((
        alpha + f * t_start * t_start / (2.0 * n),
        f * t_start / n,
    ))
}

/// Events observed along a trajectory. A zero crossing terminates the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    ZeroCrossing { t: f64, dphi: f64 },
    LocalMin { t: f64, phi: f64 },
    LocalMax { t: f64, phi: f64 },
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ReachedHorizon,
    CrossedZero,
}

/// State record at an accepted step.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    pub energy: f64,
    /// Running value of the surface-factor-free integral
    /// `int_0^t |phi|^(q+1) sinh^(n-1)(u) du`.
    pub lp_running: f64,
}

/// Quintic Hermite dense-output segment in Newton form over
/// sigma = (t - t0) / h with nodes {0, 0, 0, 1, 1, 1}.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    c: [f64; 6],
}

impl Segment {
    fn from_states(
        t0: f64,
        h: f64,
        y0: (f64, f64, f64),
        y1: (f64, f64, f64),
    ) -> Self {
        let (p0, d0, s0) = y0;
        let (p1, d1, s1) = y1;
        // Scaled derivative data on the unit interval.
        let d0 = d0 * h;
        let d1 = d1 * h;
        let s0 = s0 * h * h * 0.5;
        let s1 = s1 * h * h * 0.5;
        // Divided differences for confluent nodes {0,0,0,1,1,1}.
        let d23 = p1 - p0;
        let dd123 = d23 - d0;
        let dd234 = d1 - d23;
        let c3 = dd123 - s0;
        let d3_1234 = dd234 - dd123;
        let d3_2345 = s1 - dd234;
        let c4 = d3_1234 - c3;
        let c5 = (d3_2345 - d3_1234) - c4;
        Self {
            t0,
            h,
            c: [p0, d0, s0, c3, c4, c5],
        }
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Value and slope at t.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let s = (t - self.t0) / self.h;
        let c = &self.c;
        // Newton form: c0 + s(c1 + s(c2 + s(c3 + (s-1)(c4 + (s-1) c5)))).
        let mut v = c[5];
        let mut d = 0.0;
        let sm1 = s - 1.0;
        d = v + sm1 * d;
        v = c[4] + sm1 * v;
        d = v + sm1 * d;
        v = c[3] + sm1 * v;
        for k in [2, 1, 0] {
            d = v + s * d;
            v = c[k] + s * v;
        }
        (v, d / self.h)
    }

    fn scaled(&self, rho: f64) -> Self {
        let mut c = self.c;
        for v in &mut c {
            *v *= rho;
        }
        Self { t0: self.t0, h: self.h, c }
    }
}

/// A computed radial profile: accepted-step samples, dense-output
/// segments, detected events, and the data fixing its series start.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: OdeParams,
    pub controls: IntegrationControls,
    pub alpha: f64,
    /// Forcing at alpha; together with alpha this fixes the series start.
    pub f_alpha: f64,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub segments: Vec<Segment>,
    pub outcome: Outcome,
}

impl Trajectory {
    /// Series-start value below t_start.
    pub fn phi_series(&self, t: f64) -> f64 {
        self.alpha + self.f_alpha * t * t / (2.0 * self.params.n as f64)
    }

    /// Series-start slope below t_start.
    pub fn dphi_series(&self, t: f64) -> f64 {
        self.f_alpha * t / self.params.n as f64
    }

    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end_t(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }

    /// Dense-output value and slope anywhere in [0, end_t()].
    pub fn phi_dphi_at(&self, t: f64) -> (f64, f64) {
        if t < self.t_start() {
            return (self.phi_series(t), self.dphi_series(t));
        }
        if self.segments.is_empty() {
            let s = self.last();
            return (s.phi, s.dphi);
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.t1() < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }

    pub fn phi_at(&self, t: f64) -> f64 {
        self.phi_dphi_at(t).0
    }

    pub fn first_crossing(&self) -> Option<(f64, f64)> {
        self.events.iter().find_map(|e| match e {
            Event::ZeroCrossing { t, dphi } => Some((*t, *dphi)),
            _ => None,
        })
    }

    pub fn first_positive_min(&self) -> Option<(f64, f64)> {
        self.events.iter().find_map(|e| match e {
            Event::LocalMin { t, phi } if *phi > 0.0 => Some((*t, *phi)),
            _ => None,
        })
    }

    /// True when no interior extremum was recorded.
    pub fn is_monotone(&self) -> bool {
        !self
            .events
            .iter()
            .any(|e| matches!(e, Event::LocalMin { .. } | Event::LocalMax { .. }))
    }

    /// Smallest profile value seen, including polished extremum locations.
    pub fn min_phi(&self) -> f64 {
        let s = self
            .samples
            .iter()
            .map(|s| s.phi)
            .fold(f64::INFINITY, f64::min);
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::LocalMin { phi, .. } => Some(*phi),
                _ => None,
            })
            .fold(s, f64::min)
    }

    /// Final value of the running weighted L^(q+1) integral.
    pub fn lp_running_total(&self) -> f64 {
        self.last().lp_running
    }

    pub fn energy_trace(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.t, s.energy))
    }

    /// Write the samples as a `t,phi,dphi,energy` CSV body with header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,phi,dphi,energy")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.phi, s.dphi, s.energy
            )?;
        }
        Ok(())
    }

    /// Build a trajectory from a closed-form profile `f(t) = (phi, phi',
    /// phi'')` on a uniform grid. Intended for feeding known profiles into
    /// the quadrature; no events are generated.
    pub fn from_profile<F: Fn(f64) -> (f64, f64, f64)>(
        params: OdeParams,
        t_start: f64,
        t_end: f64,
        step: f64,
        f: F,
    ) -> Result<Self> {
        if !(t_start > 0.0 && t_start <= 1e-3 && t_end > t_start && step > 0.0) {
            return Err(Error::InvalidArgument(
                "profile grid needs 0 < t_start <= 1e-3 < t_end and step > 0".into(),
            ));
        }
        let controls = IntegrationControls {
            t_start,
            t_max: t_end,
            ..IntegrationControls::default()
        };
        let (alpha, _, dd0) = f(0.0);
        let f_alpha = params.n as f64 * dd0;
        let n1 = params.n as i32 - 1;
        let qp1 = params.q + 1.0;
        let weight = |t: f64, phi: f64| phi.abs().powf(qp1) * t.sinh().powi(n1);
        let mut lp = Kahan::new();
        lp.add(gl4(0.0, t_start, |t| {
            let phi = alpha + f_alpha * t * t / (2.0 * params.n as f64);
            weight(t, phi)
        }));
        let mut samples = Vec::new();
        let mut segments = Vec::new();
        let push_sample = |samples: &mut Vec<Sample>, t: f64, lp: f64| {
            let (phi, dphi, _) = f(t);
            samples.push(Sample {
                t,
                phi,
                dphi,
                energy: energy(&params, phi, dphi),
                lp_running: lp,
            });
        };
        push_sample(&mut samples, t_start, lp.value());
        let mut t = t_start;
        while t < t_end {
            let t_next = (t + step).min(t_end);
            segments.push(Segment::from_states(t, t_next - t, f(t), f(t_next)));
            lp.add(gl4(t, t_next, |u| weight(u, f(u).0)));
            push_sample(&mut samples, t_next, lp.value());
            t = t_next;
        }
        Ok(Self {
            params,
            controls,
            alpha,
            f_alpha,
            samples,
            events: Vec::new(),
            segments,
            outcome: Outcome::ReachedHorizon,
        })
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// b - b_hat, the embedded error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

fn sys(params: &OdeParams, t: f64, y: &State) -> State {
    [y[1], params.accel(t, y[0], y[1])]
}

/// Integrate from the series start until the horizon, the first zero
/// crossing, or an abort condition. Budget and step-underflow errors carry
/// the partial trajectory for inspection.
pub fn integrate(
    params: &OdeParams,
    alpha: f64,
    controls: &IntegrationControls,
) -> Result<Trajectory> {
    controls.validate()?;
    let (phi0, dphi0) = series_start(params, alpha, controls.t_start)?;
    let n = params.n as f64;
    let n1 = params.n as i32 - 1;
    let qp1 = params.q + 1.0;
    let f_alpha = params.forcing(alpha);
    let deadband = controls.slope_deadband();

    // Sliver of the running weighted integral below the series hand-off.
    let mut lp = Kahan::new();
    lp.add(gl4(0.0, controls.t_start, |t| {
        let phi = alpha + f_alpha * t * t / (2.0 * n);
        phi.abs().powf(qp1) * t.sinh().powi(n1)
    }));

    let mut traj = Trajectory {
        params: *params,
        controls: *controls,
        alpha,
        f_alpha,
        samples: Vec::new(),
        events: Vec::new(),
        segments: Vec::new(),
        outcome: Outcome::ReachedHorizon,
    };
    let mut t = controls.t_start;
    let mut y: State = [phi0, dphi0];
    let mut e_prev = energy(params, y[0], y[1]);
    traj.samples.push(Sample {
        t,
        phi: y[0],
        dphi: y[1],
        energy: e_prev,
        lp_running: lp.value(),
    });

    let mut k1 = sys(params, t, &y);
    // Explicit stepping next to the 1/t pole needs h of order t.
    let mut h = (0.25 * controls.t_start).min(1e-4);
    let mut err_old: f64 = 1e-4;
    let mut rejected = false;
    let mut steps = 0usize;

    while t < controls.t_max {
        steps += 1;
        if steps > controls.max_steps {
            return Err(Error::StepBudgetExhausted {
                steps,
                t,
                trajectory: Box::new(traj),
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::TolerancesNotMet {
                t,
                trajectory: Box::new(traj),
            });
        }
        let last = t + h >= controls.t_max;
        let hc = if last { controls.t_max - t } else { h };

        let stage = |coef: &[f64], ks: &[State]| -> State {
            let mut out = y;
            for (a, k) in coef.iter().zip(ks) {
                out[0] += hc * a * k[0];
                out[1] += hc * a * k[1];
            }
            out
        };
        let k2 = sys(params, t + C[0] * hc, &stage(&A2, &[k1]));
        let k3 = sys(params, t + C[1] * hc, &stage(&A3, &[k1, k2]));
        let k4 = sys(params, t + C[2] * hc, &stage(&A4, &[k1, k2, k3]));
        let k5 = sys(params, t + C[3] * hc, &stage(&A5, &[k1, k2, k3, k4]));
        let k6 = sys(params, t + C[4] * hc, &stage(&A6, &[k1, k2, k3, k4, k5]));
        let ks = [k1, k2, k3, k4, k5, k6];
        let mut y_new = y;
        for i in 0..6 {
            y_new[0] += hc * B[i] * ks[i][0];
            y_new[1] += hc * B[i] * ks[i][1];
        }
        let k7 = sys(params, t + hc, &y_new);

        let mut err_sq = 0.0;
        for c in 0..2 {
            let mut e = 0.0;
            for i in 0..6 {
                e += E[i] * ks[i][c];
            }
            e = hc * (e + E[6] * k7[c]);
            let sc = controls.abs_tol + controls.rel_tol * y[c].abs().max(y_new[c].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (0.5 * err_sq).sqrt();

        if !err.is_finite() {
            h *= 0.5;
            rejected = true;
            continue;
        }
        if err > 1.0 {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h = hc * fac;
            rejected = true;
            continue;
        }

        // Accepted. Pin the final step to the horizon so a roundoff-sized
        // remainder cannot drive the controller into the step-underflow trap.
        let t_new = if last { controls.t_max } else { t + hc };
        let seg = Segment::from_states(t, hc, (y[0], y[1], k1[1]), (y_new[0], y_new[1], k7[1]));

        // Interior extremum of phi: a sign change of the slope.
        let mut extremum: Option<(f64, f64, bool)> = None;
        if y[1] != 0.0 && (y[1] > 0.0) != (y_new[1] >= 0.0) && y[1].abs().max(y_new[1].abs()) >= deadband
        {
            let te = bisect_root(t, t_new, controls.abs_tol.max(4.0 * f64::EPSILON * t_new), |u| {
                seg.eval(u).1
            });
            let (pe, _) = seg.eval(te);
            extremum = Some((te, pe, y[1] < 0.0));
        }

        // First zero crossing of phi, including a dip hidden inside the step.
        let mut cross_hi: Option<f64> = None;
        if y[0] > 0.0 && y_new[0] <= 0.0 {
            cross_hi = Some(t_new);
        } else if let Some((te, pe, true)) = extremum {
            if y[0] > 0.0 && pe <= 0.0 {
                cross_hi = Some(te);
            }
        }
        if let Some(hi) = cross_hi {
            let b = bisect_root(t, hi, controls.abs_tol.max(4.0 * f64::EPSILON * hi), |u| {
                seg.eval(u).0
            });
            let (pb, db) = seg.eval(b);
            if db.abs() >= deadband {
                lp.add(gl4(t, b, |u| {
                    let (p, _) = seg.eval(u);
                    p.abs().powf(qp1) * u.sinh().powi(n1)
                }));
                let e_b = energy(params, pb, db);
                traj.segments.push(seg);
                traj.samples.push(Sample {
                    t: b,
                    phi: pb,
                    dphi: db,
                    energy: e_b,
                    lp_running: lp.value(),
                });
                traj.events.push(Event::ZeroCrossing { t: b, dphi: db });
                traj.outcome = Outcome::CrossedZero;
                return Ok(traj);
            }
            // Roundoff-level graze: not a real crossing, keep going.
        }

        if let Some((te, pe, is_min)) = extremum {
            if cross_hi.is_none() || pe > 0.0 {
                traj.events.push(if is_min {
                    Event::LocalMin { t: te, phi: pe }
                } else {
                    Event::LocalMax { t: te, phi: pe }
                });
            }
        }

        lp.add(gl4(t, t_new, |u| {
            let (p, _) = seg.eval(u);
            p.abs().powf(qp1) * u.sinh().powi(n1)
        }));
        let e_new = energy(params, y_new[0], y_new[1]);
        let eps_e = 100.0 * controls.abs_tol.max(controls.rel_tol * e_prev.abs());
        traj.segments.push(seg);
        traj.samples.push(Sample {
            t: t_new,
            phi: y_new[0],
            dphi: y_new[1],
            energy: e_new,
            lp_running: lp.value(),
        });
        if e_new > e_prev + eps_e {
            return Err(Error::EnergyViolation {
                t: t_new,
                from: e_prev,
                to: e_new,
                trajectory: Box::new(traj),
            });
        }

        // PI controller (accepted branch).
        let err_bounded = err.max(1e-10);
        let fac = 0.9 * err_bounded.powf(-0.17) * err_old.powf(0.04);
        let mut growth = fac.clamp(1.0 / 6.0, 6.0);
        if rejected {
            growth = growth.min(1.0);
        }
        rejected = false;
        err_old = err_bounded.max(1e-4);
        e_prev = e_new;
        t = t_new;
        y = y_new;
        k1 = k7;
        h = hc * growth;
    }
    traj.outcome = Outcome::ReachedHorizon;
    Ok(traj)
}

/// Map a normalized-form trajectory to the plain-form solution it
/// represents, multiplying amplitudes by lambda^(1/(q-1)) and recomputing
/// energies in the plain potential.
pub fn rescale_normalized(traj: &Trajectory) -> Result<Trajectory> {
    if !traj.params.normalized {
        return Err(Error::InvalidArgument(
            "rescale expects a normalized-form trajectory".into(),
        ));
    }
    let params = OdeParams {
        normalized: false,
        ..traj.params
    };
    let rho = traj.params.lambda.powf(1.0 / (traj.params.q - 1.0));
    let rho_p = rho.powf(traj.params.q + 1.0);
    let alpha = rho * traj.alpha;
    let samples = traj
        .samples
        .iter()
        .map(|s| Sample {
            t: s.t,
            phi: rho * s.phi,
            dphi: rho * s.dphi,
            energy: energy(&params, rho * s.phi, rho * s.dphi),
            lp_running: rho_p * s.lp_running,
        })
        .collect();
    let events = traj
        .events
        .iter()
        .map(|e| match *e {
            Event::ZeroCrossing { t, dphi } => Event::ZeroCrossing {
                t,
                dphi: rho * dphi,
            },
            Event::LocalMin { t, phi } => Event::LocalMin { t, phi: rho * phi },
            Event::LocalMax { t, phi } => Event::LocalMax { t, phi: rho * phi },
        })
        .collect();
    let segments = traj.segments.iter().map(|s| s.scaled(rho)).collect();
    Ok(Trajectory {
        params,
        controls: traj.controls,
        alpha,
        f_alpha: params.forcing(alpha),
        samples,
        events,
        segments,
        outcome: traj.outcome,
    })
}
