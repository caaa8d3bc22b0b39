//! Adaptive Gauss–Kronrod (7/15) quadrature on bounded intervals and boxes.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::{Error, Result};

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
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Maximum number of subintervals kept by [`integrate`].
pub const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK15 integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The segment with the largest error estimate is bisected until the summed error
/// estimate drops below `tol`. Fails with [`Error::Quadrature`] when the
/// subinterval budget runs out first.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if b < a {
        let r = integrate(f, b, a, tol)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total_value = value;
    let mut total_error = error;

    while total_error > tol {
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::Quadrature { achieved: total_error, tolerance: tol });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; keep the estimate
            heap.push(Segment { error: 0.0, ..worst });
            total_error -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        if total_error <= tol {
            // recompute from scratch to shed accumulated cancellation in the running sums
            total_value = heap.iter().map(|s| s.value).sum();
            total_error = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(Integral { value: total_value, error: total_error, evaluations })
}

/// Iterated integral `∫_{a}^{b} ∫_{lo(x)}^{hi(x)} f(x, y) dy dx`.
///
/// The inner integrals run at `tol / (b − a)` so that their errors stay within
/// the outer budget.
pub fn integrate_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    a: f64,
    b: f64,
    mut lo: impl FnMut(f64) -> f64,
    mut hi: impl FnMut(f64) -> f64,
    tol: f64,
) -> Result<Integral> {
    let width = (b - a).abs().max(1.0);
    let inner_tol = 0.1 * tol / width;
    let mut failure: Option<Error> = None;
    let mut inner_evals = 0;
    let outer = integrate(
        |x| {
            let (l, h) = (lo(x), hi(x));
            if h <= l {
                return 0.0;
            }
            match integrate(|y| f(x, y), l, h, inner_tol) {
                Ok(r) => {
                    inner_evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        a,
        b,
        0.9 * tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Integral { value: outer.value, error: outer.error + 0.1 * tol, evaluations: inner_evals })
}
