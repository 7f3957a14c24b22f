//! Standard normal distribution functions.
//!
//! The CDF uses W. J. Cody's rational Chebyshev approximations (the same
//! scheme behind most `pnorm` implementations); the percent point function
//! starts from Acklam's rational approximation and is polished by a single
//! Newton step on the CDF.

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

const CODY_A: [f64; 5] = [
    2.235_252_035_460_683_9,
    161.028_231_068_555_88,
    1_067.689_485_460_371,
    18_154.981_253_343_56,
    0.065_682_337_918_207_45,
];
const CODY_B: [f64; 4] = [
    47.202_581_904_688_24,
    976.098_551_737_773_2,
    10_260.932_208_618_978,
    45_507.789_335_026_73,
];
const CODY_C: [f64; 9] = [
    0.398_941_512_088_134_66,
    8.883_149_794_388_376,
    93.506_656_132_177_86,
    597.270_276_394_800_3,
    2_494.537_585_290_372_7,
    6_848.190_450_536_283,
    11_602.651_437_647_35,
    9_842.714_838_383_978,
    1.076_557_677_372_019_2e-8,
];
const CODY_D: [f64; 8] = [
    22.266_688_044_328_116,
    235.387_901_782_625,
    1_519.377_599_407_554_8,
    6_485.558_298_266_761,
    18_615.571_640_885_1,
    34_900.952_721_145_98,
    38_912.003_286_093_27,
    19_685.429_676_859_99,
];
const CODY_P: [f64; 6] = [
    0.215_898_534_057_957,
    0.127_401_161_160_247_36,
    0.022_235_277_870_649_807,
    0.001_421_619_193_227_893_5,
    2.911_287_495_116_879e-5,
    0.023_073_441_764_940_17,
];
const CODY_Q: [f64; 5] = [
    1.284_260_096_144_911_2,
    0.468_238_212_480_865_1,
    0.065_988_137_868_928_55,
    0.003_782_396_332_027_582_4,
    7.297_515_550_839_662e-5,
];

/// Lower and upper tail probabilities `(Φ(x), 1 − Φ(x))`, each computed
/// without cancellation.
pub fn normal_tails(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    let y = x.abs();
    if y <= 0.674_489_75 {
        let xsq = if y > 1.11e-16 { x * x } else { 0.0 };
        let mut num = CODY_A[4] * xsq;
        let mut den = xsq;
        for i in 0..3 {
            num = (num + CODY_A[i]) * xsq;
            den = (den + CODY_B[i]) * xsq;
        }
        let temp = x * (num + CODY_A[3]) / (den + CODY_B[3]);
        return (0.5 + temp, 0.5 - temp);
    }
    let tail = if y <= 32f64.sqrt() {
        let mut num = CODY_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + CODY_C[i]) * y;
            den = (den + CODY_D[i]) * y;
        }
        let temp = (num + CODY_C[7]) / (den + CODY_D[7]);
        scaled_exp(y) * temp
    } else if y < 40.0 {
        let xsq = 1.0 / (x * x);
        let mut num = CODY_P[5] * xsq;
        let mut den = xsq;
        for i in 0..4 {
            num = (num + CODY_P[i]) * xsq;
            den = (den + CODY_Q[i]) * xsq;
        }
        let temp = xsq * (num + CODY_P[4]) / (den + CODY_Q[4]);
        scaled_exp(y) * (FRAC_1_SQRT_2PI - temp) / y
    } else {
        0.0
    };
    if x > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

// exp(-y²/2) split so the large part is exact in floating point.
fn scaled_exp(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq * 0.5).exp() * (-del * 0.5).exp()
}

/// Standard normal cumulative distribution function Φ.
pub fn normal_cdf(x: f64) -> f64 {
    normal_tails(x).0
}

/// Standard normal density φ.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam(q: f64) -> f64 {
    const LOW: f64 = 0.02425;
    let (a, b, c, d) = (&ACKLAM_A, &ACKLAM_B, &ACKLAM_C, &ACKLAM_D);
    if q < LOW {
        let r = (-2.0 * q.ln()).sqrt();
        (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5])
            / ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0)
    } else if q <= 1.0 - LOW {
        let s = q - 0.5;
        let r = s * s;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        let r = (-2.0 * (1.0 - q).ln()).sqrt();
        -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5])
            / ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0)
    }
}

/// Percent point function (inverse CDF) of the standard normal.
///
/// Accurate to `|Φ(z) − q| ≤ 1e-9` on the open unit interval; the upper
/// half is mirrored from the lower tail so `ppf(q) = −ppf(1 − q)`.
pub fn normal_ppf(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("probability {q} outside (0, 1)")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    if q > 0.5 {
        return Ok(-lower_ppf(1.0 - q));
    }
    Ok(lower_ppf(q))
}

fn lower_ppf(q: f64) -> f64 {
    let z = acklam(q);
    // one Newton step on Φ(z) − q
    let err = normal_cdf(z) - q;
    z - err * SQRT_2PI * (0.5 * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // erf by its positive-term series, erfc by Lentz continued fraction;
    // independent of the Cody rational forms above.
    fn oracle_cdf(x: f64) -> f64 {
        let t = x / std::f64::consts::SQRT_2;
        if t.abs() < 2.5 {
            // erf(t) = 2/√π e^{-t²} Σ 2ⁿ t^{2n+1} / (1·3·…·(2n+1))
            let mut term = t;
            let mut sum = t;
            let mut n = 0.0;
            while term.abs() > 1e-18 * sum.abs().max(1e-300) {
                n += 1.0;
                term *= 2.0 * t * t / (2.0 * n + 1.0);
                sum += term;
            }
            let erf = 2.0 / std::f64::consts::PI.sqrt() * (-t * t).exp() * sum;
            0.5 * (1.0 + erf)
        } else {
            let y = t.abs();
            // erfc(y) = e^{-y²}/√π · 1/(y + (1/2)/(y + 1/(y + (3/2)/(y + …))))
            let mut f = y;
            let mut c = y;
            let mut d = 0.0;
            for k in 1..300 {
                let a = k as f64 / 2.0;
                d = y + a * d;
                d = if d == 0.0 { 1e-300 } else { 1.0 / d };
                c = y + a / c;
                let delta = c * d;
                f *= delta;
                if (delta - 1.0).abs() < 1e-16 {
                    break;
                }
            }
            let erfc = (-y * y).exp() / std::f64::consts::PI.sqrt() / f;
            if t > 0.0 {
                1.0 - 0.5 * erfc
            } else {
                0.5 * erfc
            }
        }
    }

    fn oracle_ppf(q: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if oracle_cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_matches_series_oracle() {
        let mut x = -8.0;
        while x <= 8.0 {
            let got = normal_cdf(x);
            let want = oracle_cdf(x);
            assert!((got - want).abs() < 1e-14, "x={x} got={got} want={want}");
            x += 0.0137;
        }
    }

    #[test]
    fn oracle_values_for_ppf_examples() {
        // frozen from the bisection oracle
        assert!((oracle_ppf(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((oracle_ppf(0.1) + 1.281_551_565_544_601).abs() < 1e-9);
    }

    #[test]
    fn ppf_examples() {
        assert_eq!(normal_ppf(0.5).unwrap(), 0.0);
        assert!((normal_ppf(0.975).unwrap() - 1.959_964).abs() < 1e-6);
        assert!((normal_ppf(0.1).unwrap() + 1.281_552).abs() < 1e-6);
        assert!((normal_ppf(0.975).unwrap() - oracle_ppf(0.975)).abs() < 1e-12);
    }

    #[test]
    fn ppf_inverts_cdf() {
        for i in 1..1000 {
            let q = i as f64 / 1000.0;
            let z = normal_ppf(q).unwrap();
            assert!((normal_cdf(z) - q).abs() <= 1e-9, "q={q}");
        }
        for q in [1e-12, 1e-8, 1e-4, 0.02425, 1.0 - 1e-4, 1.0 - 1e-8] {
            let z = normal_ppf(q).unwrap();
            let rel = (normal_cdf(z) - q).abs();
            assert!(rel <= 1e-9, "q={q}");
        }
    }

    #[test]
    fn ppf_symmetry_on_percentile_grid() {
        for k in 1..100 {
            let q = k as f64 / 100.0;
            let lhs = normal_ppf(q).unwrap();
            let rhs = -normal_ppf(1.0 - q).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "q={q}");
        }
    }

    #[test]
    fn ppf_domain() {
        for q in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(normal_ppf(q), Err(Error::Domain(_))));
        }
    }
}
