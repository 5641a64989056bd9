//! Scalar numerics shared by the geometry code: Gauss–Legendre nodes,
//! compensated summation, unimodal search, bracketed root finding and
//! natural cubic splines.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let k = (i + 1) as f64;
        let nf = n as f64;
        let mut z = (PI * (k - 0.25) / (nf + 0.5)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
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

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal (e.g. concave or quasi-concave)
/// function on `[a, b]`. Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let (mut xb, mut fb) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx > fb {
            xb = x;
            fb = fx;
        }
    }
    (xb, fb)
}

/// Minimizes a convex function of one variable starting from `x0`: expands a
/// bracket by doubling `step`, then refines with golden section.
pub fn minimize_convex<F: FnMut(f64) -> f64>(mut f: F, x0: f64, step: f64, tol: f64) -> (f64, f64) {
    let f0 = f(x0);
    let mut h = step.abs().max(1e-12);
    let fr = f(x0 + h);
    let dir = if fr <= f0 { 1.0 } else { -1.0 };
    let (mut lo, mut mid, mut fmid) = (x0 - dir * h, x0, f0);
    if dir < 0.0 {
        lo = x0 + h;
    }
    let mut hi = x0 + dir * h;
    let mut fhi = f(hi);
    let mut guard = 0;
    while fhi < fmid && guard < 200 {
        lo = mid;
        mid = hi;
        fmid = fhi;
        h *= 2.0;
        hi = mid + dir * h;
        fhi = f(hi);
        guard += 1;
    }
    let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let (x, v) = golden_max(|x| -f(x), a, b, tol);
    (x, -v)
}

/// Root of `f` on `[a, b]` given a sign change, by the Illinois variant of
/// regula falsi with a bisection safeguard.
pub fn root_bracketed<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    if fa.signum() == fb.signum() {
        return if fa.abs() < fb.abs() { a } else { b };
    }
    let mut side = 0i32;
    for it in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) || it % 8 == 7 {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Natural cubic spline through equally spaced samples on `[a, b]`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    a: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(a: f64, b: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2 && b > a);
        let h = (b - a) / (n - 1) as f64;
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal solve for second derivatives with natural ends.
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
                if i == 0 {
                    c[i] = 1.0 / 4.0;
                    d[i] = rhs / 4.0;
                } else {
                    let den = 4.0 - c[i - 1];
                    c[i] = 1.0 / den;
                    d[i] = (rhs - d[i - 1]) / den;
                }
            }
            for i in (0..k).rev() {
                m[i + 1] = if i + 1 < k { d[i] - c[i] * m[i + 2] } else { d[i] };
            }
        }
        Self { a, h, y, m }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = ((x - self.a) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let h = self.h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let v = 1.0 - u;
        v * y0 + u * y1 + h * h / 6.0 * ((v * v * v - v) * m0 + (u * u * u - u) * m1)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let h = self.h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let v = 1.0 - u;
        (y1 - y0) / h + h / 6.0 * (-(3.0 * v * v - 1.0) * m0 + (3.0 * u * u - 1.0) * m1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_gauss_legendre_is_accurate() {
        let (x, w) = gauss_legendre(128);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn golden_finds_concave_maximum() {
        let (x, v) = golden_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn convex_minimum_outside_initial_step() {
        let (x, v) = minimize_convex(|x| (x - 7.5).abs() + 1.0, 0.0, 0.1, 1e-12);
        assert!((x - 7.5).abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bracketed_root() {
        let r = root_bracketed(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let ys: Vec<f64> = (0..=40).map(|i| (i as f64 / 40.0 * 3.0).sin()).collect();
        let s = CubicSpline::new(0.0, 3.0, ys);
        assert!((s.value(1.234) - 1.234f64.sin()).abs() < 1e-5);
        assert!((s.derivative(1.5) - 1.5f64.cos()).abs() < 1e-4);
    }
}
