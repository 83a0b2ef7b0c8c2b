//! Independent reference values for the continuation numerics.

use bispectral_core::numeric::ComplexParams;
use num_complex::Complex64 as C;

/// Complex `ln Γ` by the Lanczos approximation (g = 7) with reflection.
pub fn ln_gamma(z: C) -> C {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        return C::new(pi, 0.0).ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut a = C::new(COEF[0], 0.0);
    for (i, &co) in COEF.iter().enumerate().skip(1) {
        a += co / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `ln C(z)` up to additive multiples of `2πi`, built from `ln Γ` directly.
pub fn ln_c(cp: &ComplexParams, z: &[C]) -> C {
    let l = cp.l;
    let (m, n, k, p, r) = (cp.m(), cp.n(), cp.k, cp.p, cp.r);
    let mut acc = C::new(0.0, 0.0);
    let mut long = |u: C, a: C, b: C| {
        acc += ln_gamma(-u) + ln_gamma(-u / 2.0 - a / 2.0) - ln_gamma(-u - a) - ln_gamma(-u / 2.0 - a / 2.0 - b);
    };
    for j in 0..l {
        long(z[j], m, n);
    }
    long(z[l] / k, p, r);
    for a in 0..l {
        for b in a + 1..l {
            for s in [1.0, -1.0] {
                let u = (z[a] + s * z[b]) / 2.0;
                acc += ln_gamma(-u) - ln_gamma(-u - k);
            }
        }
    }
    for j in 0..l {
        for s in [1.0, -1.0] {
            acc += (-(z[j] + s * z[l]) - 1.0 - k).ln();
        }
    }
    acc
}

/// `C(z+τ)/C(z)` from the logarithms.
pub fn c_ratio(cp: &ComplexParams, z: &[C], shifted: &[C]) -> C {
    (ln_c(cp, shifted) - ln_c(cp, z)).exp()
}
