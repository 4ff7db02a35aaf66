//! Real-line quadrature rules: Gauss–Kronrod (7/15) panels and tanh-sinh.
//!
//! The complex contour engine in [`crate::contour`] builds on the raw rules
//! exported here; the adaptive drivers are used directly for real integrals
//! (hexagon primitives, Beta-type oracles).

use num_complex::Complex64;

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
pub const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Kronrod weights matching [`XGK`].
pub const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
pub const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes on [-1, 1] in increasing order with Kronrod and
/// Gauss weights (Gauss weight 0 where the node is Kronrod-only).
pub fn gk15_nodes() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        out[k] = (-XGK[k], WGK[k], wg);
        out[14 - k] = (XGK[k], WGK[k], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

/// One G7/K15 panel on [a, b]. Returns (Kronrod estimate, |K − G|).
pub fn gk15<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for (x, wk, wg) in gk15_nodes() {
        let v = f(c + h * x);
        k += v * wk;
        g += v * wg;
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod on a finite interval for complex-valued integrands.
///
/// Panels are bisected until each satisfies `err <= max(abs_tol, rel_tol * |I_panel|) * len/(b-a)`
/// or the depth limit is hit. Deterministic: the panel schedule depends only on f.
pub fn adaptive_gk<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (Complex64, f64) {
    fn rec<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64, tol_density: f64, rel_tol: f64, depth: u32) -> (Complex64, f64) {
        let (v, e) = gk15(&mut *f, a, b);
        let allowed = (tol_density * (b - a).abs()).max(rel_tol * v.norm());
        if e <= allowed || depth == 0 {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, m, tol_density, rel_tol, depth - 1);
        let (v2, e2) = rec(f, m, b, tol_density, rel_tol, depth - 1);
        (v1 + v2, e1 + e2)
    }
    if a == b {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let density = abs_tol / (b - a).abs();
    rec(&mut f, a, b, density, rel_tol, 40)
}

/// Real-valued convenience wrapper around [`adaptive_gk`].
pub fn adaptive_gk_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let (v, e) = adaptive_gk(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol);
    (v.re, e)
}

/// A tanh-sinh node on (0, 1): position `w`, complement `1 - w` (both
/// accurate near their respective endpoint) and weight `dw`.
#[derive(Clone, Copy, Debug)]
pub struct TsNode {
    pub w: f64,
    pub wc: f64,
    pub weight: f64,
}

/// Tanh-sinh nodes on (0, 1) with step `h`; nodes whose weight underflows are dropped.
pub fn tanh_sinh_nodes(h: f64) -> Vec<TsNode> {
    let mut out = Vec::new();
    let kmax = (6.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let (w, wc) = if u >= 0.0 {
            let e = (-2.0 * u).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = (2.0 * u).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if w <= 0.0 || wc <= 0.0 {
            continue;
        }
        let weight = h * std::f64::consts::PI * t.cosh() * w * wc;
        if weight < 1e-300 {
            continue;
        }
        out.push(TsNode { w, wc, weight });
    }
    out
}

/// Tanh-sinh on (0, 1) for integrands with algebraic endpoint singularities.
///
/// `f(w, 1 - w)` receives both the abscissa and its complement so callers can
/// evaluate factors like `w^p (1-w)^q` without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64) -> Complex64>(mut f: F, rel_tol: f64) -> (Complex64, f64) {
    let mut prev: Option<Complex64> = None;
    let mut h = 0.5;
    let mut last = Complex64::new(0.0, 0.0);
    for _ in 0..9 {
        let mut s = Complex64::new(0.0, 0.0);
        for node in tanh_sinh_nodes(h) {
            s += f(node.w, node.wc) * node.weight;
        }
        if let Some(p) = prev {
            let err = (s - p).norm();
            if err <= rel_tol * s.norm() {
                return (s, err);
            }
        }
        prev = Some(s);
        last = s;
        h *= 0.5;
    }
    let err = prev.map(|p| (p - last).norm()).unwrap_or(f64::INFINITY);
    (last, err)
}

/// Real tanh-sinh over (a, b); `f(x, x - a, b - x)`.
pub fn tanh_sinh_real<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let len = b - a;
    let (v, e) = tanh_sinh(
        |w, wc| {
            let da = w * len;
            let db = wc * len;
            let x = if w < 0.5 { a + da } else { b - db };
            Complex64::new(f(x, da, db), 0.0)
        },
        rel_tol,
    );
    (v.re * len, e * len.abs())
}

/// Neumaier-compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
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
