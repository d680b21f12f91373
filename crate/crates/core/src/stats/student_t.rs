//! Student-t distribution via the regularized incomplete beta function.

use num_traits::Float;

#[inline]
pub(crate) fn lit<F: Float>(x: f64) -> F {
    F::from(x).expect("literal representable")
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<F: Float>(x: F) -> F {
    let half = lit::<F>(0.5);
    if x < half {
        // reflection
        let pi = lit::<F>(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = lit::<F>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<F>(c) / (x + lit::<F>(i as f64));
    }
    let t = x + lit::<F>(7.5);
    lit::<F>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf<F: Float>(a: F, b: F, x: F) -> F {
    let one = F::one();
    let two = lit::<F>(2.0);
    let tiny = F::min_positive_value() / F::epsilon();
    let eps = F::epsilon();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=500 {
        let m = lit::<F>(m as f64);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `0 <= x <= 1`.
pub fn regularized_incomplete_beta<F: Float>(x: F, a: F, b: F) -> F {
    let one = F::one();
    if x <= F::zero() {
        return F::zero();
    }
    if x >= one {
        return one;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (one - x).ln();
    let front = ln_front.exp();
    if x < (a + one) / (a + b + lit::<F>(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        one - front * beta_cf(b, a, one - x) / b
    }
}

/// `P(T > t)` for `T ~ t(df)`.
pub fn t_sf<F: Float>(t: F, df: F) -> F {
    if t.is_infinite() {
        return if t > F::zero() { F::zero() } else { F::one() };
    }
    let half = lit::<F>(0.5);
    let x = df / (df + t * t);
    let tail = half * regularized_incomplete_beta(x, df * half, half);
    if t > F::zero() {
        tail
    } else {
        F::one() - tail
    }
}

/// `P(T <= t)` for `T ~ t(df)`.
pub fn t_cdf<F: Float>(t: F, df: F) -> F {
    if t.is_infinite() {
        return if t > F::zero() { F::one() } else { F::zero() };
    }
    let half = lit::<F>(0.5);
    let x = df / (df + t * t);
    let tail = half * regularized_incomplete_beta(x, df * half, half);
    if t > F::zero() {
        F::one() - tail
    } else {
        tail
    }
}

/// Inverse CDF by bracketing and bisection; `p` in (0, 1).
pub fn t_quantile<F: Float>(p: F, df: F) -> F {
    let half = lit::<F>(0.5);
    if p <= F::zero() {
        return F::neg_infinity();
    }
    if p >= F::one() {
        return F::infinity();
    }
    if p == half {
        return F::zero();
    }
    // Solve on the upper half and mirror.
    let (target, sign) = if p > half {
        (p, F::one())
    } else {
        (F::one() - p, -F::one())
    };
    let mut lo = F::zero();
    let mut hi = F::one();
    while t_cdf(hi, df) < target {
        lo = hi;
        hi = hi * lit::<F>(2.0);
        if hi > lit::<F>(1e300).min(F::max_value()) {
            break;
        }
    }
    for _ in 0..2000 {
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t_cdf(mid, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sign * half * (lo + hi)
}
