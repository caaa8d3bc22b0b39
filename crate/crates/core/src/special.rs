//! Special functions used by the distributions and the test statistics.

use core::f64::consts::{PI, SQRT_2};

use libm::{erfc, exp, fabs, lgamma, log, sqrt};

use crate::{Error, Result};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Absolute tolerance used by every bisection-based quantile.
pub const QUANTILE_TOL: f64 = 1e-10;
/// Iteration cap of every bisection-based quantile.
pub const QUANTILE_MAX_ITER: usize = 200;

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of [`normal_cdf`]. Acklam's rational approximation followed by one
/// Halley step, accurate to a few ulps over (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = sqrt(-2.0 * log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = sqrt(-2.0 * log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement; the residual is taken on the smaller tail to keep precision.
    let e = if x < 0.0 { normal_cdf(x) - p } else { (1.0 - p) - normal_sf(x) };
    let u = e * sqrt(2.0 * PI) * exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    h
}

/// Regularised incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * log(x) + b * log(1.0 - x);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Regularised lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularised upper incomplete gamma function `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..1000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if fabs(del) < fabs(sum) * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - ln_gamma(a))
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - ln_gamma(a)) * h
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: f64) -> f64 {
    gamma_q(0.5 * dof, 0.5 * statistic)
}

/// CDF of Student's t with `nu` degrees of freedom.
pub fn student_t_cdf(t: f64, nu: f64) -> f64 {
    let t2 = t * t;
    if t2 < nu {
        // near the centre `ν / (ν + t²)` rounds to 1; use `P(|T| < t)` instead
        let central = 0.5 * beta_reg(0.5, 0.5 * nu, t2 / (nu + t2));
        return if t > 0.0 { 0.5 + central } else { 0.5 - central };
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + t2));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn student_t_pdf(t: f64, nu: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * log(nu * PI);
    exp(ln_norm - 0.5 * (nu + 1.0) * log(1.0 + t * t / nu))
}

/// Survival function of the Kolmogorov distribution, `P(K > z)`.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if z < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = exp(-2.0 * k * k * z * z);
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Generalised inverse of a nondecreasing `cdf` by bisection.
///
/// The bracket starts at `[-1, 1]` and doubles outward until it contains `p`.
pub fn bisect_quantile(cdf: impl Fn(f64) -> f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Quantile { probability: p });
    }
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while cdf(lo) > p {
        lo *= 2.0;
        expansions += 1;
        if expansions > 1100 {
            return Err(Error::Quantile { probability: p });
        }
    }
    while cdf(hi) < p {
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 {
            return Err(Error::Quantile { probability: p });
        }
    }
    bisect_root(|x| cdf(x) - p, lo, hi, QUANTILE_TOL, QUANTILE_MAX_ITER).ok_or(Error::Quantile { probability: p })
}

/// Bisection for an increasing function with `f(lo) ≤ 0 ≤ f(hi)`.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64> {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol {
        Some(0.5 * (lo + hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

    #[test]
    fn normal_cdf_known_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((normal_cdf(-3.6) / 1.591_085_901_575_338_3e-4 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14, "p = {p}");
        }
        for &p in &[1e-300, 1e-20, 1e-11, 1.0 - 1e-11] {
            let x = normal_quantile(p);
            let back = if x < 0.0 { normal_cdf(x) } else { 1.0 - normal_sf(x) };
            assert!(((back - p) / p.min(1.0 - p).max(1e-300)).abs() < 1e-6 || (back - p).abs() < 1e-15);
        }
    }

    #[test]
    fn agrees_with_statrs() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for i in -80..=80 {
            let x = i as f64 / 10.0;
            // statrs loses a few digits in the lower tail
            assert!((normal_cdf(x) - n.cdf(x)).abs() < 1e-9 * n.cdf(x), "x={x}");
        }
        for &nu in &[1.0, 2.5, 3.0, 10.0] {
            let t = StudentsT::new(0.0, 1.0, nu).unwrap();
            for i in -50..=50 {
                let x = i as f64 / 5.0;
                assert!((student_t_cdf(x, nu) - t.cdf(x)).abs() < 1e-12, "nu={nu} x={x}");
            }
        }
        for &k in &[1.0, 4.0, 37.0, 120.0] {
            let c = ChiSquared::new(k).unwrap();
            for i in 1..100 {
                let x = i as f64 * k / 25.0;
                assert!((chi_square_sf(x, k) - (1.0 - c.cdf(x))).abs() < 1e-12, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn student_t_closed_forms() {
        // ν = 1 is Cauchy, ν = 3 has an elementary CDF
        for i in -20..=20 {
            let x = i as f64 * 0.7;
            let cauchy = 0.5 + libm::atan(x) / PI;
            assert!((student_t_cdf(x, 1.0) - cauchy).abs() < 1e-13);
            let s = sqrt(3.0);
            let t3 = 0.5 + (x / (s * (1.0 + x * x / 3.0)) + libm::atan(x / s)) / PI;
            assert!((student_t_cdf(x, 3.0) - t3).abs() < 1e-13);
        }
    }

    #[test]
    fn kolmogorov_tail() {
        // P(K > 1.3581) = 0.05
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn bisection_quantile_of_logistic() {
        let cdf = |x: f64| 1.0 / (1.0 + exp(-x));
        for &p in &[1e-9, 0.1, 0.5, 0.77, 1.0 - 1e-9] {
            let x = bisect_quantile(cdf, p).unwrap();
            assert!((x - log(p / (1.0 - p))).abs() < 1e-9);
        }
        assert!(bisect_quantile(cdf, 0.0).is_err());
        assert!(bisect_quantile(cdf, 1.0).is_err());
    }
}
