//! Small numerical helpers shared by the integrator and the quadrature code.

/// Compensated accumulator (Kahan-Babuska-Neumaier) for long sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// coth(t) for t > 0. Written on top of `exp_m1` so the small-argument
/// pole 1/t + t/3 - ... comes out without cancellation.
pub fn coth(t: f64) -> f64 {
    1.0 + 2.0 / (2.0 * t).exp_m1()
}

/// Odd power extension sign(x) * |x|^p, continuous through zero for p > 0.
pub fn sign_pow(x: f64, p: f64) -> f64 {
    if x >= 0.0 {
        x.powf(p)
    } else {
        -(-x).powf(p)
    }
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_86,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_86,
];

/// One 4-point Gauss-Legendre panel over [a, b]; exact through degree 7.
pub fn gl4<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..4 {
        s += GL4_W[i] * f(mid + half * GL4_X[i]);
    }
    s * half
}

/// Locate a root of `f` inside [a, b] by bisection, assuming f(a) and f(b)
/// have opposite signs. Stops when the window is below `t_tol`.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, t_tol: f64, mut f: F) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        if (b - a).abs() <= t_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coth_matches_reference_values() {
        // Large arguments settle on 1, small ones on the 1/t pole.
        assert_relative_eq!(coth(50.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(coth(1.0), 1.0 / f64::tanh(1.0), max_relative = 1e-15);
        let t = 1e-8;
        assert_relative_eq!(coth(t), 1.0 / t + t / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn gl4_is_exact_on_low_degree_polynomials() {
        let v = gl4(0.0, 2.0, |x| x.powi(7) - 3.0 * x.powi(4) + x);
        // antiderivative: x^8/8 - 3 x^5/5 + x^2/2
        let exact = 256.0 / 8.0 - 3.0 * 32.0 / 5.0 + 2.0;
        assert_relative_eq!(v, exact, max_relative = 1e-15);
    }

    #[test]
    fn kahan_sums_many_small_terms_accurately() {
        let mut k = Kahan::new();
        let n = 100_000;
        for _ in 0..n {
            k.add(0.1);
        }
        assert_relative_eq!(k.value(), 0.1 * n as f64, max_relative = 1e-15);
    }

    #[test]
    fn bisect_root_finds_simple_roots() {
        let r = bisect_root(1.0, 2.0, 1e-14, |x| x * x - 2.0);
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn sign_pow_is_odd() {
        assert_eq!(sign_pow(2.0, 3.0), 8.0);
        assert_eq!(sign_pow(-2.0, 3.0), -8.0);
        assert_eq!(sign_pow(0.0, 2.5), 0.0);
    }
}
