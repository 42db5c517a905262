//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Kronrod estimate and `|K − G|`.
fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid);
    let mut k = fc * lit(WGK[7]);
    let mut g = fc * lit(WG[3]);
    for i in 0..7 {
        let dx = half * lit(XGK[i]);
        let s = f(mid - dx) + f(mid + dx);
        k += s * lit(WGK[i]);
        if i % 2 == 1 {
            g += s * lit(WG[i / 2]);
        }
    }
    (k * half, ((k - g) * half).abs())
}

fn adapt<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T, depth: u32) -> T {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return k;
    }
    let m = (a + b) * lit(0.5);
    let h = tol * lit(0.5);
    adapt(f, a, m, h, depth - 1) + adapt(f, m, b, h, depth - 1)
}

/// `∫_a^b f` to relative accuracy `rel` (absolute floor `rel` when the integral vanishes).
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, rel: T) -> T {
    let (k, _) = gk15(&f, a, b);
    let tol = rel * k.abs().max(T::one());
    adapt(&f, a, b, tol, 40)
}
