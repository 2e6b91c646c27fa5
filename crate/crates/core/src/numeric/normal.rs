//! Univariate, bivariate and small multivariate normal probabilities.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

use super::quadrature::{integrate_scalar, Tolerance};

/// Variances below this are treated as point masses.
pub const DEGENERATE_VARIANCE: f64 = 1e-20;

const TAIL: f64 = 12.0;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Inverse of the standard normal cdf.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        let mut x = -SQRT_2 * erfc_inv(2.0 * p);
        // polish with Newton steps against the accurate cdf
        for _ in 0..2 {
            let d = pdf(x);
            if d <= 0.0 {
                break;
            }
            x -= (cdf(x) - p) / d;
        }
        x
    }
}

/// `P(X <= b)` for `X ~ N(mean, var)`.
pub fn cdf_at(mean: f64, var: f64, b: f64) -> f64 {
    if var <= DEGENERATE_VARIANCE {
        if mean <= b {
            1.0
        } else {
            0.0
        }
    } else {
        cdf((b - mean) / var.sqrt())
    }
}

const GL_W3: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
const GL_X3: [f64; 3] = [-0.932_469_514_203_152_2, -0.661_209_386_466_264_7, -0.238_619_186_083_197];
const GL_W6: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL_X6: [f64; 6] = [
    -0.981_560_634_246_719_1,
    -0.904_117_256_370_475,
    -0.769_902_674_194_305,
    -0.587_317_954_286_617_1,
    -0.367_831_498_998_180_2,
    -0.125_233_408_511_469_2,
];
const GL_W10: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const GL_X10: [f64; 10] = [
    -0.993_128_599_185_094_9,
    -0.963_971_927_277_913_8,
    -0.912_234_428_251_326,
    -0.839_116_971_822_218_8,
    -0.746_331_906_460_150_8,
    -0.636_053_680_726_515,
    -0.510_867_001_950_827_1,
    -0.373_706_088_715_419_6,
    -0.227_785_851_141_645_1,
    -0.076_526_521_133_497_33,
];

/// Upper orthant probability `P(X > h, Y > k)` for standard normals with
/// correlation `r` (Drezner–Wesolowsky with Genz's refinements).
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { cdf(-k) };
    }
    if k == f64::NEG_INFINITY {
        return cdf(-h);
    }
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL_W3, &GL_X3)
    } else if r.abs() < 0.75 {
        (&GL_W6, &GL_X6)
    } else {
        (&GL_W10, &GL_X10)
    };
    let two_pi = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for i in 0..w.len() {
            for sign in [1.0, -1.0] {
                let sn = (asr * (sign * x[i] + 1.0) / 2.0).sin();
                bvn += w[i] * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return (bvn * asr / (2.0 * two_pi) + cdf(-h) * cdf(-k)).clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / as_ + hk) / 2.0).exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * two_pi.sqrt() * cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for i in 0..w.len() {
            let xs = (a * (x[i] + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            bvn += a
                * w[i]
                * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                    - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
            let xs = as_ * (1.0 - x[i]).powi(2) / 4.0;
            let rs = (1.0 - xs).sqrt();
            bvn += a
                * w[i]
                * (-(bs / xs + hk) / 2.0).exp()
                * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += cdf(-h.max(k));
    } else {
        bvn = -bvn + (cdf(-h) - cdf(-k)).max(0.0);
    }
    bvn.clamp(0.0, 1.0)
}

/// `P(X <= h, Y <= k)` for standard normals with correlation `r`.
pub fn bivariate_cdf(h: f64, k: f64, r: f64) -> f64 {
    upper_orthant(-h, -k, r.clamp(-1.0, 1.0))
}

/// `P(X <= upper)` componentwise for `X ~ N(mean, cov)`, with `cov` stored
/// row-major. Infinite upper limits are allowed.
pub fn mvn_cdf(mean: &[f64], cov: &[f64], upper: &[f64]) -> f64 {
    let n = mean.len();
    debug_assert_eq!(cov.len(), n * n);
    debug_assert_eq!(upper.len(), n);
    if upper.iter().any(|b| *b == f64::NEG_INFINITY || b.is_nan()) {
        return 0.0;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| upper[i] != f64::INFINITY).collect();
    if keep.len() < n {
        let m: Vec<f64> = keep.iter().map(|&i| mean[i]).collect();
        let b: Vec<f64> = keep.iter().map(|&i| upper[i]).collect();
        let c: Vec<f64> = keep.iter().flat_map(|&i| keep.iter().map(move |&j| cov[i * n + j])).collect();
        return mvn_cdf(&m, &c, &b);
    }
    match n {
        0 => 1.0,
        1 => cdf_at(mean[0], cov[0], upper[0]),
        2 => {
            let (v0, v1) = (cov[0], cov[3]);
            if v0 <= DEGENERATE_VARIANCE || v1 <= DEGENERATE_VARIANCE {
                return cdf_at(mean[0], v0, upper[0]) * cdf_at(mean[1], v1, upper[1]);
            }
            let (s0, s1) = (v0.sqrt(), v1.sqrt());
            bivariate_cdf((upper[0] - mean[0]) / s0, (upper[1] - mean[1]) / s1, cov[1] / (s0 * s1))
        }
        _ => {
            let v0 = cov[0];
            let rest = n - 1;
            let mut cond_cov = vec![0.0; rest * rest];
            let mut slope = vec![0.0; rest];
            if v0 <= DEGENERATE_VARIANCE {
                if mean[0] > upper[0] {
                    return 0.0;
                }
                for i in 0..rest {
                    for j in 0..rest {
                        cond_cov[i * rest + j] = cov[(i + 1) * n + j + 1];
                    }
                }
                return mvn_cdf(&mean[1..], &cond_cov, &upper[1..]);
            }
            for i in 0..rest {
                slope[i] = cov[(i + 1) * n] / v0;
            }
            for i in 0..rest {
                for j in 0..rest {
                    cond_cov[i * rest + j] = cov[(i + 1) * n + j + 1] - cov[(i + 1) * n] * cov[j + 1] / v0;
                }
            }
            let s0 = v0.sqrt();
            let lo = -TAIL;
            let hi = ((upper[0] - mean[0]) / s0).min(TAIL);
            if hi <= lo {
                return 0.0;
            }
            let mut cond_mean = vec![0.0; rest];
            let integrand = |z: f64| {
                for i in 0..rest {
                    cond_mean[i] = mean[i + 1] + slope[i] * s0 * z;
                }
                pdf(z) * mvn_cdf(&cond_mean, &cond_cov, &upper[1..])
            };
            let tol = Tolerance { abs: 1e-13, rel: 1e-12, max_intervals: 200 };
            integrate_scalar(integrand, lo, hi, &[], tol)
                .unwrap_or(f64::NAN)
                .clamp(0.0, 1.0)
        }
    }
}
