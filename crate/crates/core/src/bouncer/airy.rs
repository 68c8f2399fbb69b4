//! Airy function of the first kind on the real line.
//!
//! Evaluation strategy:
//!
//! * `-5 <= u <= 1.5`: Maclaurin series seeded with `Ai(0)` and `Ai'(0)`.
//! * `u >= 9`: decaying asymptotic expansion in `zeta = 2/3 u^{3/2}`.
//! * `u <= -8`: oscillatory asymptotic expansion.
//! * otherwise: Taylor continuation of `y'' = u y` from the nearest
//!   asymptotic anchor (`u = 9` or `u = -8`) in steps of at most 0.5.
//!
//! The positive side cannot use the Maclaurin series much past `u = 2`: the
//! two series solutions grow like `exp(zeta)` while `Ai` decays like
//! `exp(-zeta)`, so the cancellation costs `exp(2 zeta)` in relative accuracy.
//! Continuing backwards from `u = 9` follows the dominant direction of `Ai`
//! and is stable.

use std::f64::consts::{FRAC_PI_4, PI};

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0) = -3^{-1/3} / Gamma(1/3)`.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_8;

const SERIES_LOWER: f64 = -5.0;
const SERIES_UPPER: f64 = 1.5;
const ASYMPTOTIC_POSITIVE: f64 = 9.0;
const ASYMPTOTIC_NEGATIVE: f64 = -8.0;
const MAX_STEP: f64 = 0.5;

/// Returns `(Ai(u), Ai'(u))`.
pub fn airy(u: f64) -> (f64, f64) {
    if u.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if u >= ASYMPTOTIC_POSITIVE {
        asymptotic_positive(u)
    } else if u <= ASYMPTOTIC_NEGATIVE {
        asymptotic_negative(u)
    } else if (SERIES_LOWER..=SERIES_UPPER).contains(&u) {
        taylor_step(0.0, AI_ZERO, AI_PRIME_ZERO, u)
    } else if u > SERIES_UPPER {
        let (y, dy) = asymptotic_positive(ASYMPTOTIC_POSITIVE);
        continue_solution(ASYMPTOTIC_POSITIVE, y, dy, u)
    } else {
        let (y, dy) = asymptotic_negative(ASYMPTOTIC_NEGATIVE);
        continue_solution(ASYMPTOTIC_NEGATIVE, y, dy, u)
    }
}

pub fn airy_ai(u: f64) -> f64 {
    airy(u).0
}

pub fn airy_ai_prime(u: f64) -> f64 {
    airy(u).1
}

/// The `n` largest zeros of `Ai`, all negative and strictly decreasing.
///
/// Each zero starts from the large-order asymptotic formula and is polished
/// by Newton iteration on `(Ai, Ai')`.
pub fn airy_zeros(n: usize) -> Vec<f64> {
    (1..=n).map(airy_zero).collect()
}

fn airy_zero(k: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    let t2 = t.powi(-2);
    let mut z = -t.powf(2.0 / 3.0)
        * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * 77_125.0 / 82_944.0)));
    for _ in 0..60 {
        let (ai, aip) = airy(z);
        let dz = ai / aip;
        z -= dz;
        if dz.abs() <= 1e-15 * z.abs() {
            break;
        }
    }
    z
}

/// Evaluates the Taylor expansion of the solution through `(u0, y0, dy0)`
/// at `u`. Only accurate for `|u - u0|` up to a few units.
fn taylor_step(u0: f64, y0: f64, dy0: f64, u: f64) -> (f64, f64) {
    let h = u - u0;
    if h == 0.0 {
        return (y0, dy0);
    }
    // a_{n+2} = (u0 a_n + a_{n-1}) / ((n+2)(n+1))
    let (mut a_prev, mut a_n, mut a_next) = (0.0, y0, dy0);
    let mut y = y0 + dy0 * h;
    let mut dy = dy0;
    let mut hp = h; // h^{n+1} for the next coefficient index n+1
    let mut small_run = 0;
    for n in 0..200usize {
        let a_new = (u0 * a_n + a_prev) / (((n + 2) * (n + 1)) as f64);
        a_prev = a_n;
        a_n = a_next;
        a_next = a_new;
        // a_next is now the coefficient of h^{n+2}
        let d_term = (n + 2) as f64 * a_next * hp;
        hp *= h;
        let term = a_next * hp;
        y += term;
        dy += d_term;
        let scale = y.abs().max(dy.abs()).max(f64::MIN_POSITIVE);
        if term.abs() <= 1e-18 * scale && d_term.abs() <= 1e-18 * scale {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    (y, dy)
}

fn continue_solution(u0: f64, y0: f64, dy0: f64, u: f64) -> (f64, f64) {
    let distance = u - u0;
    let steps = (distance.abs() / MAX_STEP).ceil().max(1.0) as usize;
    let h = distance / steps as f64;
    let (mut y, mut dy) = (y0, dy0);
    let mut x = u0;
    for i in 0..steps {
        let next = if i + 1 == steps { u } else { x + h };
        (y, dy) = taylor_step(x, y, dy, next);
        x = next;
    }
    (y, dy)
}

/// Coefficients `u_k` and `v_k` of the large-argument expansions.
fn asymptotic_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    u.push(1.0);
    v.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// Sums `sum_k sign^k c_k / zeta^k` over the indices selected by `parity`,
/// stopping at the smallest term.
fn truncated_sum(coeffs: &[f64], zeta: f64, start: usize, stride: usize, alternate: bool) -> f64 {
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < coeffs.len() {
        let term = coeffs[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        total += sign * term;
        last = term.abs();
        if last < 1e-18 * total.abs() {
            break;
        }
        if alternate {
            sign = -sign;
        }
        k += stride;
    }
    total
}

fn asymptotic_positive(u: f64) -> (f64, f64) {
    let (uc, vc) = asymptotic_coefficients(40);
    let zeta = 2.0 / 3.0 * u.powf(1.5);
    let quarter = u.powf(0.25);
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let s_ai = truncated_sum(&uc, -zeta, 0, 1, false);
    let s_dai = truncated_sum(&vc, -zeta, 0, 1, false);
    (pref / quarter * s_ai, -pref * quarter * s_dai)
}

fn asymptotic_negative(u: f64) -> (f64, f64) {
    let (uc, vc) = asymptotic_coefficients(60);
    let x = -u;
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let quarter = x.powf(0.25);
    let phase = zeta + FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let p_ai = truncated_sum(&uc, zeta, 0, 2, true);
    let q_ai = truncated_sum(&uc, zeta, 1, 2, true);
    let p_dai = truncated_sum(&vc, zeta, 0, 2, true);
    let q_dai = truncated_sum(&vc, zeta, 1, 2, true);
    let norm = 1.0 / PI.sqrt();
    let ai = norm / quarter * (s * p_ai - c * q_ai);
    let dai = -norm * quarter * (c * p_dai + s * q_dai);
    (ai, dai)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (u, Ai(u), Ai'(u)) from a 30-digit arbitrary precision evaluation.
    const REFERENCE: &[(f64, f64, f64)] = &[
        (-20.0, -0.176_406_127_077_984_69, 0.892_862_856_736_471_24),
        (-15.0, 0.278_217_490_870_828_93, 0.272_374_204_308_642_02),
        (-10.0, 0.040_241_238_486_443_191, 0.996_265_044_132_790_06),
        (-8.0, -0.052_705_050_356_386_203, 0.935_560_938_198_306_55),
        (-7.5, 0.321_775_716_380_647_88, 0.318_809_506_698_554_6),
        (-7.0, 0.184_280_835_250_505_64, -0.771_008_168_410_126_55),
        (-6.0, -0.329_145_173_629_823_1, 0.345_935_487_281_342_89),
        (-5.0, 0.350_761_009_024_114_32, 0.327_192_818_554_443_14),
        (-4.0, -0.070_265_532_949_289_515, -0.790_628_575_368_581_38),
        (-3.0, -0.378_814_293_677_658_07, 0.314_583_769_216_598_81),
        (-2.0, 0.227_407_428_201_685_58, 0.618_259_020_741_691_04),
        (-1.0, 0.535_560_883_292_352_12, -0.010_160_567_116_645_209),
        (0.0, 0.355_028_053_887_817_24, -0.258_819_403_792_806_8),
        (0.5, 0.231_693_606_480_833_49, -0.224_910_532_664_683_89),
        (1.0, 0.135_292_416_312_881_42, -0.159_147_441_296_793_21),
        (1.5, 0.071_749_497_008_105_41, -0.097_382_012_842_301_319),
        (2.0, 0.034_924_130_423_274_379, -0.053_090_384_433_653_632),
        (3.0, 0.006_591_139_357_460_719_1, -0.011_912_976_705_951_318),
        (
            4.0,
            0.000_951_563_851_204_801_87,
            -0.001_958_640_950_204_178_9,
        ),
        (
            5.0,
            0.000_108_344_428_136_074_42,
            -0.000_247_413_890_868_462_48,
        ),
        (6.0, 9.947_694_360_252_889_6e-6, -2.476_520_039_703_495_5e-5),
        (7.0, 7.492_128_863_997_167_1e-7, -2.008_150_894_738_792e-6),
        (8.0, 4.692_207_616_099_231_6e-8, -1.341_439_297_906_786_6e-7),
        (9.0, 2.471_168_430_872_489_8e-9, -7.480_641_389_658_946_4e-9),
        (
            10.0,
            1.104_753_255_289_868_6e-10,
            -3.520_633_676_738_923_6e-10,
        ),
        (
            12.0,
            1.393_184_688_875_360_8e-13,
            -4.854_736_554_985_308_5e-13,
        ),
        (
            15.0,
            2.164_962_520_737_992_3e-18,
            -8.420_567_954_017_772_8e-18,
        ),
        (
            20.0,
            1.691_672_868_670_540_3e-27,
            -7.586_391_625_748_355e-27,
        ),
    ];

    fn envelope(u: f64) -> f64 {
        // scale of Ai on the oscillatory side; the value itself elsewhere
        if u < 0.0 {
            (-u).max(1.0).powf(-0.25) / PI.sqrt()
        } else {
            1.0
        }
    }

    #[test]
    fn matches_reference_table() {
        for &(u, ai, dai) in REFERENCE {
            let (got, dgot) = airy(u);
            let scale = if u < 0.0 { envelope(u) } else { ai.abs() };
            let dscale = if u < 0.0 {
                envelope(u) * (-u).max(1.0).sqrt()
            } else {
                dai.abs()
            };
            assert!(
                (got - ai).abs() <= 1e-10 * scale,
                "Ai({u}) = {got:e}, expected {ai:e}"
            );
            assert!(
                (dgot - dai).abs() <= 1e-10 * dscale,
                "Ai'({u}) = {dgot:e}, expected {dai:e}"
            );
        }
    }

    #[test]
    fn value_at_origin_from_gamma_quadrature() {
        // Gamma(2/3) = int_0^inf 3 e^{-s^3} ds via composite Simpson
        let n = 20_000;
        let upper = 6.0;
        let h = upper / n as f64;
        let f = |s: f64| 3.0 * s * (-s * s * s).exp();
        let mut acc = f(0.0) + f(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        let gamma_two_thirds = acc * h / 3.0;
        let expected = 3f64.powf(-2.0 / 3.0) / gamma_two_thirds;
        assert!((airy_ai(0.0) - expected).abs() < 1e-12);
        assert!((airy_ai(0.0) - 0.355_028_053_8).abs() < 1e-10);
    }

    #[test]
    fn regimes_agree_at_crossovers() {
        for &u in &[
            SERIES_LOWER,
            SERIES_UPPER,
            ASYMPTOTIC_POSITIVE,
            ASYMPTOTIC_NEGATIVE,
        ] {
            let (ai, dai) = airy(u);
            let (left, dleft) = airy(u - 1e-12);
            let (right, dright) = airy(u + 1e-12);
            let scale = ai.abs().max(1e-3 * envelope(u));
            assert!(
                (left - right).abs() < 1e-9 * scale.max(ai.abs()),
                "Ai jump at {u}"
            );
            assert!(
                (dleft - dright).abs() < 1e-9 * dai.abs().max(1e-3),
                "Ai' jump at {u}"
            );
        }
        // series and continuation compared directly inside the overlap
        for &u in &[-6.0, -4.5, 2.0, 3.5] {
            let series = taylor_step(0.0, AI_ZERO, AI_PRIME_ZERO, u).0;
            let cont = airy(u).0;
            assert!(
                (series - cont).abs() < 1e-9 * envelope(u).max(cont.abs()),
                "u = {u}"
            );
        }
    }

    #[test]
    fn ode_residual_from_second_difference() {
        // plain second difference of Ai at h = 1e-4 divides the ~1e-13
        // evaluation noise by h^2, so the floor here is about 1e-5
        let h = 1e-4;
        let mut u = -10.0;
        while u <= 10.0 {
            let second = (airy_ai(u + h) - 2.0 * airy_ai(u) + airy_ai(u - h)) / (h * h);
            assert!((second - u * airy_ai(u)).abs() < 1e-5, "residual at {u}");
            u += 0.173;
        }
    }

    #[test]
    fn ode_residual_from_derivative_difference() {
        // central difference of Ai' with Richardson extrapolation (h, h/2)
        let h = 1e-4;
        let d = |u: f64, h: f64| (airy_ai_prime(u + h) - airy_ai_prime(u - h)) / (2.0 * h);
        let mut u = -10.0;
        while u <= 10.0 {
            let second = (4.0 * d(u, 0.5 * h) - d(u, h)) / 3.0;
            assert!((second - u * airy_ai(u)).abs() < 1e-8, "residual at {u}");
            u += 0.173;
        }
    }

    #[test]
    fn decays_monotonically_for_positive_argument() {
        let mut prev = airy_ai(0.0);
        for i in 1..=400 {
            let v = airy_ai(i as f64 * 0.05);
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }

    fn bisect_zero(mut lo: f64, mut hi: f64) -> f64 {
        let series = |u: f64| taylor_step(0.0, AI_ZERO, AI_PRIME_ZERO, u).0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series(lo).signum() == series(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zeros_match_bisection_oracle() {
        let zeros = airy_zeros(2);
        let first = bisect_zero(-3.0, -2.0);
        let second = bisect_zero(-4.5, -3.5);
        assert!((zeros[0] - first).abs() < 1e-12);
        assert!((zeros[1] - second).abs() < 1e-12);
        assert!((zeros[0] + 2.338_107_4).abs() < 1e-7);
        assert!((zeros[1] + 4.087_949_4).abs() < 1e-7);
    }

    #[test]
    fn zeros_are_roots_and_decrease() {
        let zeros = airy_zeros(12);
        for w in zeros.windows(2) {
            assert!(w[1] < w[0]);
        }
        for &z in &zeros {
            assert!(z < 0.0);
            assert!(airy_ai(z).abs() < 1e-10, "Ai({z}) = {}", airy_ai(z));
        }
        // exactly one sign change of Ai between consecutive zeros
        let mut bounds = vec![0.0];
        bounds.extend(zeros.iter().copied());
        for w in bounds.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let steps = 50;
            let mut changes = 0;
            let mut prev = airy_ai(w[0] - 1e-6);
            for i in 1..=steps {
                let u = w[0] - 1e-6 + (w[1] - w[0] + 2e-6) * i as f64 / steps as f64;
                let v = airy_ai(u);
                if v.signum() != prev.signum() {
                    changes += 1;
                }
                prev = v;
            }
            assert!(changes <= 2, "unexpected oscillation near {mid}");
        }
    }
}
