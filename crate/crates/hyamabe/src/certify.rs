//! Mechanical certification of Q(r) >= mu Q(0) on (0, 1].
//!
//! The engine is a descending recursion on the radius scale s = r,
//! starting from s_1 = 1. Given a verified Q at scale s_i, the transfer
//! inequality pushes the same lower bound down to
//!
//! ```text
//! s_{i+1} = (mu Q(0) / Q_i)^(k/m) s_i,
//! ```
//!
//! so the bound mu Q(0) holds on [s_{i+1}, s_i]. Once s drops below
//! (1 - mu) m(m-1) / (n(n-1)), the small-r estimate covers the rest of the
//! way to zero and the certification closes. Every step re-checks its own
//! arithmetic; the trace is replayable by [`check_trace`] without any
//! solver in the loop.

use crate::dimension::Dimensions;
use crate::error::{Error, Result};
use crate::yamabe::{boundary_constants, compute_q, QControls};

/// Knobs of the certification recursion.
#[derive(Debug, Clone, Copy)]
pub struct CertifyControls {
    pub q: QControls,
    /// Hard cap on recursion depth.
    pub max_steps: u32,
    /// Declare a stall when s shrinks by less than this relative amount.
    pub stall_rel: f64,
    /// Substitute flat-limit constant (testing hook; None = stored value).
    pub q0_override: Option<f64>,
}

impl Default for CertifyControls {
    fn default() -> Self {
        Self {
            q: QControls::default(),
            max_steps: 1000,
            stall_rel: 1e-12,
            q0_override: None,
        }
    }
}

/// One rung of the descent.
#[derive(Debug, Clone, Copy)]
pub struct CertStep {
    pub i: u32,
    /// Radius scale at which Q was evaluated, descending from 1.
    pub s: f64,
    pub q: f64,
    /// Q deflated by its own uncertainty; the value the step stands on.
    pub q_used: f64,
    pub q_uncertainty: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    /// The deflated Q at step `step` did not clear mu Q(0).
    Failed { step: u32 },
}

/// Full record of a certification run.
#[derive(Debug, Clone)]
pub struct CertificationTrace {
    pub dims: Dimensions,
    pub mu: f64,
    pub q0: f64,
    /// Descent target: s below this is covered by the small-r estimate.
    pub threshold: f64,
    /// Descent exponent k/m as an integer pair (k, m).
    pub exponent: (u32, u32),
    pub steps: Vec<CertStep>,
    pub final_s: f64,
    pub verdict: Verdict,
}

fn threshold_of(dims: &Dimensions, mu: f64) -> f64 {
    let mm = (dims.m() * (dims.m() - 1)) as f64;
    let nn = (dims.n() * (dims.n() - 1)) as f64;
    (1.0 - mu) * mm / nn
}

/// The recursion skeleton, generic over the Q evaluator so the arithmetic
/// is testable without the solver. `q_of(s)` returns (Q, relative
/// uncertainty) at scale s.
fn run_recursion<F>(
    dims: &Dimensions,
    mu: f64,
    q0: f64,
    max_steps: u32,
    stall_rel: f64,
    mut q_of: F,
) -> Result<CertificationTrace>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "certification needs mu in (0, 1), got {mu}"
        )));
    }
    if !(q0.is_finite() && q0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "certification needs a positive flat-limit constant, got {q0}"
        )));
    }
    let threshold = threshold_of(dims, mu);
    let exponent = (dims.k(), dims.m());
    let mut trace = CertificationTrace {
        dims: *dims,
        mu,
        q0,
        threshold,
        exponent,
        steps: Vec::new(),
        final_s: 1.0,
        verdict: Verdict::Certified,
    };
    if threshold >= 1.0 {
        // The small-r estimate already covers all of (0, 1].
        return Ok(trace);
    }

    let target = mu * q0;
    let e = dims.k() as f64 / dims.m() as f64;
    let mut s = 1.0;
    for i in 1..=max_steps {
        let (q, unc) = q_of(s)?;
        let q_used = q * (1.0 - unc);
        let pass = q_used > target;
        trace.steps.push(CertStep {
            i,
            s,
            q,
            q_used,
            q_uncertainty: unc,
            pass,
        });
        if !pass {
            trace.final_s = s;
            trace.verdict = Verdict::Failed { step: i };
            return Ok(trace);
        }
        let s_next = (target / q_used).powf(e) * s;
        if s - s_next < stall_rel * s {
            return Err(Error::Stalled { step: i, s });
        }
        if s_next < threshold {
            trace.final_s = s_next;
            return Ok(trace);
        }
        s = s_next;
    }
    Err(Error::Stalled {
        step: max_steps,
        s,
    })
}

/// Certify Q(r) >= mu Q(0) for all r in (0, 1].
pub fn certify(
    dims: &Dimensions,
    mu: f64,
    controls: &CertifyControls,
) -> Result<CertificationTrace> {
    let q0 = match controls.q0_override {
        Some(v) => v,
        None => boundary_constants(dims)?.q0,
    };
    let qc = controls.q;
    run_recursion(dims, mu, q0, controls.max_steps, controls.stall_rel, |s| {
        let res = compute_q(dims, s, &qc)?;
        Ok((res.q_value, res.q_rel_uncertainty))
    })
}

/// Replay a trace's arithmetic without the solver: recursion steps,
/// pass flags, threshold, and final coverage. Detects tampering or a
/// bookkeeping bug; does not re-solve the Q values.
pub fn check_trace(trace: &CertificationTrace, q0: f64) -> Result<Verdict> {
    let mu = trace.mu;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "trace carries mu = {mu} outside (0, 1)"
        )));
    }
    if q0 != trace.q0 {
        return Err(Error::ArithmeticMismatch {
            step: 0,
            detail: format!("flat-limit constant {} != expected {q0}", trace.q0),
        });
    }
    let threshold = threshold_of(&trace.dims, mu);
    if (threshold - trace.threshold).abs() > 1e-12 * threshold.max(1.0) {
        return Err(Error::ArithmeticMismatch {
            step: 0,
            detail: format!(
                "threshold {} != recomputed {threshold}",
                trace.threshold
            ),
        });
    }
    if threshold >= 1.0 {
        if !trace.steps.is_empty() || trace.verdict != Verdict::Certified {
            return Err(Error::ArithmeticMismatch {
                step: 0,
                detail: "trivial-coverage trace must be empty and certified".into(),
            });
        }
        return Ok(Verdict::Certified);
    }
    let target = mu * q0;
    let e = trace.dims.k() as f64 / trace.dims.m() as f64;
    let mut s = 1.0;
    for (idx, step) in trace.steps.iter().enumerate() {
        let i = idx as u32 + 1;
        if step.i != i {
            return Err(Error::ArithmeticMismatch {
                step: i,
                detail: format!("step index {} != position {i}", step.i),
            });
        }
        if (step.s - s).abs() > 1e-12 * s {
            return Err(Error::ArithmeticMismatch {
                step: i,
                detail: format!("scale {} != recursion value {s}", step.s),
            });
        }
        let q_used = step.q * (1.0 - step.q_uncertainty);
        if (q_used - step.q_used).abs() > 1e-12 * q_used.abs().max(1e-300) {
            return Err(Error::ArithmeticMismatch {
                step: i,
                detail: format!("deflated Q {} != recomputed {q_used}", step.q_used),
            });
        }
        let pass = step.q_used > target;
        if pass != step.pass {
            return Err(Error::ArithmeticMismatch {
                step: i,
                detail: "pass flag disagrees with comparison".into(),
            });
        }
        if !pass {
            if trace.verdict != (Verdict::Failed { step: i })
                || idx + 1 != trace.steps.len()
            {
                return Err(Error::ArithmeticMismatch {
                    step: i,
                    detail: "failing step must be last and set the verdict".into(),
                });
            }
            return Ok(trace.verdict);
        }
        let s_next = (target / step.q_used).powf(e) * s;
        if s_next >= s {
            return Err(Error::ArithmeticMismatch {
                step: i,
                detail: format!("descent did not decrease: {s} -> {s_next}"),
            });
        }
        s = s_next;
    }
    if trace.verdict != Verdict::Certified {
        return Err(Error::ArithmeticMismatch {
            step: trace.steps.len() as u32,
            detail: "all steps pass but verdict is not certified".into(),
        });
    }
    if s >= threshold {
        return Err(Error::ArithmeticMismatch {
            step: trace.steps.len() as u32,
            detail: format!("final scale {s} never dropped below {threshold}"),
        });
    }
    if (s - trace.final_s).abs() > 1e-12 * s {
        return Err(Error::ArithmeticMismatch {
            step: trace.steps.len() as u32,
            detail: format!("final scale {} != recomputed {s}", trace.final_s),
        });
    }
    Ok(Verdict::Certified)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d22() -> Dimensions {
        Dimensions::new(2, 2).unwrap()
    }

    // A fake Q with the right qualitative shape: interpolates between the
    // endpoint values along a power of s, always above q0.
    fn fake_q(s: f64, q0: f64, q1: f64) -> (f64, f64) {
        (q0 + (q1 - q0) * s.powf(0.5), 1e-9)
    }

    #[test]
    fn descent_reaches_threshold_and_certifies() {
        let trace = run_recursion(&d22(), 0.99, 59.40481, 1000, 1e-12, |s| {
            Ok(fake_q(s, 59.40481, 61.56239))
        })
        .unwrap();
        assert_eq!(trace.verdict, Verdict::Certified);
        assert!(trace.final_s < trace.threshold);
        assert!((trace.threshold - 0.01).abs() < 1e-15);
        assert!(!trace.steps.is_empty());
        // Scales strictly decrease and every step passes.
        for w in trace.steps.windows(2) {
            assert!(w[1].s < w[0].s);
        }
        assert!(trace.steps.iter().all(|st| st.pass));
        assert_eq!(check_trace(&trace, 59.40481).unwrap(), Verdict::Certified);
    }

    #[test]
    fn q_at_target_fails_on_first_step() {
        let mu = 0.99;
        let q0 = 59.40481;
        let trace = run_recursion(&d22(), mu, q0, 1000, 1e-12, |_| {
            // Exactly mu q0 never clears the strict comparison.
            Ok((mu * q0, 0.0))
        })
        .unwrap();
        assert_eq!(trace.verdict, Verdict::Failed { step: 1 });
        assert_eq!(trace.steps.len(), 1);
        assert!(!trace.steps[0].pass);
        assert_eq!(trace.final_s, 1.0);
        // The failed trace still replays cleanly.
        assert_eq!(
            check_trace(&trace, q0).unwrap(),
            Verdict::Failed { step: 1 }
        );
    }

    #[test]
    fn barely_passing_q_stalls() {
        let mu = 0.99;
        let q0 = 59.40481;
        let err = run_recursion(&d22(), mu, q0, 1000, 1e-12, |_| {
            Ok((mu * q0 * (1.0 + 1e-14), 0.0))
        })
        .unwrap_err();
        match err {
            Error::Stalled { step: 1, .. } => {}
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn step_cap_reports_stall() {
        let err = run_recursion(&d22(), 0.99, 59.40481, 3, 1e-12, |_| {
            Ok((59.40481 * 0.99 * 1.0001, 0.0))
        })
        .unwrap_err();
        match err {
            Error::Stalled { step: 3, .. } => {}
            other => panic!("expected the cap to stall, got {other:?}"),
        }
    }

    #[test]
    fn larger_mu_needs_more_steps() {
        let run = |mu: f64| {
            run_recursion(&d22(), mu, 59.40481, 10_000, 1e-12, |s| {
                Ok(fake_q(s, 59.40481, 61.56239))
            })
            .unwrap()
        };
        let lo = run(0.5);
        let hi = run(0.7);
        assert_eq!(lo.verdict, Verdict::Certified);
        assert_eq!(hi.verdict, Verdict::Certified);
        assert!(hi.steps.len() > lo.steps.len());
    }

    #[test]
    fn trivial_threshold_skips_descent() {
        // (2,3): threshold = (1 - mu) * 3; mu = 0.5 gives 1.5 >= 1.
        let d23 = Dimensions::new(2, 3).unwrap();
        let trace = run_recursion(&d23, 0.5, 78.18644, 1000, 1e-12, |_| {
            panic!("no solve should happen")
        })
        .unwrap();
        assert_eq!(trace.verdict, Verdict::Certified);
        assert!(trace.steps.is_empty());
        assert_eq!(trace.final_s, 1.0);
        assert_eq!(check_trace(&trace, 78.18644).unwrap(), Verdict::Certified);
    }

    #[test]
    fn mu_domain_is_validated() {
        for mu in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(run_recursion(&d22(), mu, 59.40481, 10, 1e-12, |s| {
                Ok(fake_q(s, 59.40481, 61.56239))
            })
            .is_err());
        }
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let mut trace = run_recursion(&d22(), 0.9, 59.40481, 1000, 1e-12, |s| {
            Ok(fake_q(s, 59.40481, 61.56239))
        })
        .unwrap();
        // Inflate one recorded scale: the replay must notice.
        let k = trace.steps.len() / 2;
        trace.steps[k].s *= 1.0 + 1e-6;
        match check_trace(&trace, 59.40481) {
            Err(Error::ArithmeticMismatch { step, .. }) => {
                assert_eq!(step as usize, k + 1);
            }
            other => panic!("expected a mismatch, got {other:?}"),
        }
    }

    #[test]
    fn wrong_flat_limit_is_rejected() {
        let trace = run_recursion(&d22(), 0.9, 59.40481, 1000, 1e-12, |s| {
            Ok(fake_q(s, 59.40481, 61.56239))
        })
        .unwrap();
        assert!(check_trace(&trace, 60.0).is_err());
    }

    #[test]
    fn forged_verdict_is_rejected() {
        let mut trace = run_recursion(&d22(), 0.99, 59.40481, 1000, 1e-12, |_| {
            Ok((0.99 * 59.40481, 0.0))
        })
        .unwrap();
        assert_eq!(trace.verdict, Verdict::Failed { step: 1 });
        trace.verdict = Verdict::Certified;
        assert!(check_trace(&trace, 59.40481).is_err());
    }
}
