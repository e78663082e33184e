//! Gamma function, standard normal distribution and the Kolmogorov distribution.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
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

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Gamma function on the real line. Returns NaN at the poles 0, -1, -2, ...
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == libm::floor(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / (libm::sin(PI * x) * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    // w^(z+1/2) split in two halves so that it does not overflow before exp(-w) scales it back.
    let half = libm::pow(w, 0.5 * (z + 0.5));
    libm::sqrt(2.0 * PI) * half * (half * libm::exp(-w)) * lanczos_sum(z)
}

/// Natural logarithm of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == libm::floor(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return libm::log(PI / libm::fabs(libm::sin(PI * x))) - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * libm::log(w) - w + libm::log(lanczos_sum(z))
}

/// Γ(a)/Γ(b) evaluated through logarithms when either argument is large.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 30.0 && b < 30.0 {
        gamma(a) / gamma(b)
    } else {
        let sign = gamma_sign(a) * gamma_sign(b);
        sign * libm::exp(ln_gamma(a) - ln_gamma(b))
    }
}

fn gamma_sign(x: f64) -> f64 {
    // Γ < 0 on (-1, 0), (-3, -2), ...: exactly where floor(x) is odd.
    if x > 0.0 || libm::fmod(libm::floor(x), 2.0) == 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Standard normal CDF Φ.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail 1 - Φ(z), accurate for large positive z.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

/// Upper quantile z(p) with Φ(z(p)) = 1 - p, for p in (0, 1).
///
/// Safeguarded Newton iteration on the erfc-based upper tail; the bracket
/// [-40, 40] is tightened on every step and bisection takes over whenever a
/// Newton step would leave it. Absolute tolerance 1e-10.
pub fn normal_upper_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "tail probability must lie in (0, 1), got {p}");
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut z = 0.0;
    for _ in 0..200 {
        let f = normal_sf(z) - p;
        // sf is decreasing in z
        if f > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let slope = -normal_pdf(z);
        let mut next = if slope != 0.0 { z - f / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if libm::fabs(next - z) < 1e-10 || hi - lo < 1e-10 {
            return next;
        }
        z = next;
    }
    z
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
