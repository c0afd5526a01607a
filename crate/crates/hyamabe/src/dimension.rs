//! Dimension-dependent constants for the product of hyperbolic n-space with
//! a round m-sphere.
//!
//! Everything that is a ratio of integers is kept as an exact rational and
//! only converted to floating point at the boundary where the ODE solver or
//! the quadrature needs a real number.

use crate::error::{Error, Result};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use std::f64::consts::PI;

/// Factor dimensions of the product. Both must be at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    n: u32,
    m: u32,
}

/// Constants derived from the total dimension k = n + m.
///
/// `a` and `p` are the conformal Laplacian coefficient 4(k-1)/(k-2) and the
/// critical Sobolev exponent 2k/(k-2); `q = p - 1` is the ODE nonlinearity.
/// `c` is the curvature threshold separating the sign regimes and `d` the
/// positive combination entering the tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedConstants {
    pub a: Rational64,
    pub p: Rational64,
    pub q: Rational64,
    pub c: Rational64,
    pub d: Rational64,
    pub k: u32,
}

/// Sign regime of the conformal Yamabe constant, decided by the scalar
/// curvature of the sphere factor against the threshold `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PositiveAchieved,
    PositiveNotAchieved,
    MinusInfinity,
}

impl Dimensions {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::InvalidDimensions { n, m });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.n + self.m
    }

    /// Exact derived constants for the total dimension n + m.
    pub fn derived(&self) -> DerivedConstants {
        let n = self.n as i64;
        let m = self.m as i64;
        let k = n + m;
        let a = Rational64::new(4 * (k - 1), k - 2);
        let p = Rational64::new(2 * k, k - 2);
        let q = p - 1;
        let c = Rational64::new((n - 1) * (m - 1), m + n - 2);
        let d = Rational64::new(m + n - 1, m + n - 2) * Rational64::from_integer((n - 1) * (n - 1))
            + Rational64::from_integer(m * (m - 1) - n * (n - 1));
        DerivedConstants {
            a,
            p,
            q,
            c,
            d,
            k: self.k(),
        }
    }

    /// Zero-order coefficient lambda(r) = (m(m-1)/r - n(n-1)) / a of the
    /// profile equation, for the sphere factor scaled by r > 0.
    pub fn lambda_of_r(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r must be positive, got {r}"
            )));
        }
        let n = self.n as f64;
        let m = self.m as f64;
        let a = rat_f64(self.derived().a);
        Ok((m * (m - 1.0) / r - n * (n - 1.0)) / a)
    }

    /// lambda for a directly prescribed product scalar curvature s.
    pub fn lambda_of_s(&self, s: f64) -> f64 {
        s / rat_f64(self.derived().a)
    }

    /// Sign regime for a sphere factor of scalar curvature `s_g`.
    pub fn regime(&self, s_g: f64) -> Regime {
        let c = rat_f64(self.derived().c);
        if s_g > c {
            Regime::PositiveAchieved
        } else if s_g == c {
            Regime::PositiveNotAchieved
        } else {
            Regime::MinusInfinity
        }
    }

    /// Lower bound of the lambda range that admits a decaying positive
    /// profile: lambda must exceed -(n-1)^2/4.
    pub fn lambda_floor(&self) -> f64 {
        let n1 = (self.n - 1) as f64;
        -0.25 * n1 * n1
    }
}

/// Exact rational to nearest f64.
pub fn rat_f64(r: Rational64) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

/// ln Gamma((k+1)/2) for integer k >= 1, evaluated from the exact
/// half-integer product form so no general Gamma approximation enters.
fn ln_gamma_half(k: u32) -> f64 {
    if k % 2 == 1 {
        // (k+1)/2 is an integer: Gamma(j) = (j-1)!
        let j = (k + 1) / 2;
        let mut acc = crate::numeric::Kahan::new();
        for i in 2..j {
            acc.add((i as f64).ln());
        }
        acc.value()
    } else {
        // Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)
        let j = k / 2;
        let mut acc = crate::numeric::Kahan::new();
        acc.add(0.5 * PI.ln());
        for i in 1..=(2 * j) {
            acc.add((i as f64).ln());
        }
        for i in 1..=j {
            acc.add(-(i as f64).ln());
        }
        acc.add(-(j as f64) * 4f64.ln());
        acc.value()
    }
}

/// Volume of the round unit k-sphere, 2 pi^((k+1)/2) / Gamma((k+1)/2).
pub fn sphere_volume(k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(
            "sphere dimension must be at least 1".into(),
        ));
    }
    let ln_v = 2f64.ln() + 0.5 * (k as f64 + 1.0) * PI.ln() - ln_gamma_half(k);
    Ok(ln_v.exp())
}

/// Yamabe constant of the round k-sphere, k(k-1) V(S^k)^(2/k).
pub fn sphere_yamabe(k: u32) -> Result<f64> {
    if k < 3 {
        return Err(Error::InvalidArgument(
            "sphere Yamabe constant needs k >= 3".into(),
        ));
    }
    let kf = k as f64;
    Ok(kf * (kf - 1.0) * sphere_volume(k)?.powf(2.0 / kf))
}
