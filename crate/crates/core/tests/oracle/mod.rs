//! Independent reference computations for the solver, fitness and Welch
//! tests. Nothing here calls into the code under test.
#![allow(dead_code)]

pub fn rbf(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Dual box-constrained QP `min 1/2 a'Qa - e'a, y'a = 0, 0 <= a <= c` with
/// `Q_ij = y_i y_j K(x_i, x_j)`.
pub struct DualQp {
    pub q: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub c: f64,
}

impl DualQp {
    pub fn new(points: &[[f64; 2]], y: &[f64], c: f64, gamma: f64) -> Self {
        let n = points.len();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rbf(&points[i], &points[j], gamma)).collect())
            .collect();
        let q = (0..n)
            .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
            .collect();
        Self { q, k, y: y.to_vec(), c }
    }

    pub fn objective(&self, a: &[f64]) -> f64 {
        let n = a.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * self.q[i][j] * a[j];
            }
        }
        0.5 * quad - a.iter().sum::<f64>()
    }

    fn gradient(&self, a: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .map(|row| row.iter().zip(a).map(|(q, a)| q * a).sum::<f64>() - 1.0)
            .collect()
    }

    /// Euclidean projection onto the feasible set: clip(v - mu y) with mu
    /// found by bisection on the equality constraint.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let at = |mu: f64| -> Vec<f64> {
            v.iter()
                .zip(&self.y)
                .map(|(vi, yi)| (vi - mu * yi).clamp(0.0, self.c))
                .collect()
        };
        let balance = |a: &[f64]| a.iter().zip(&self.y).map(|(a, y)| a * y).sum::<f64>();
        let span = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + self.c + 1.0;
        let (mut lo, mut hi) = (-span, span);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(&at(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Accelerated projected gradient with adaptive restart.
    pub fn solve(&self, iterations: usize) -> Vec<f64> {
        let n = self.y.len();
        let lipschitz: f64 = self
            .q
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let step = 1.0 / lipschitz;
        let mut x = vec![0.0; n];
        let mut z = x.clone();
        let mut t = 1.0f64;
        for _ in 0..iterations {
            let g = self.gradient(&z);
            let trial: Vec<f64> = z.iter().zip(&g).map(|(z, g)| z - step * g).collect();
            let next = self.project(&trial);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let restart = self.objective(&next) > self.objective(&x);
            let momentum = if restart { 0.0 } else { (t - 1.0) / t_next };
            z = next.iter().zip(&x).map(|(n, p)| n + momentum * (n - p)).collect();
            let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = next;
            t = if restart { 1.0 } else { t_next };
            if moved < 1e-15 {
                break;
            }
        }
        x
    }

    /// Bias from free multipliers, or the midpoint of the feasible interval.
    pub fn bias(&self, a: &[f64]) -> f64 {
        let n = a.len();
        let margin = |i: usize| -> f64 { self.y[i] - (0..n).map(|j| a[j] * self.y[j] * self.k[i][j]).sum::<f64>() };
        let tol = 1e-6 * self.c;
        let free: Vec<f64> = (0..n)
            .filter(|&i| a[i] > tol && a[i] < self.c - tol)
            .map(margin)
            .collect();
        if !free.is_empty() {
            return free.iter().sum::<f64>() / free.len() as f64;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (i, &ai) in a.iter().enumerate() {
            let m = margin(i);
            let at_upper = ai >= self.c - tol;
            // b >= m for (y=+1, a=0) and (y=-1, a=C); b <= m otherwise
            if (self.y[i] > 0.0) != at_upper {
                lo = lo.max(m);
            } else {
                hi = hi.min(m);
            }
        }
        0.5 * (lo + hi)
    }
}

/// Minimum of the symmetric-free XOR dual over a grid of step `c / steps`,
/// with points ordered `(+, +, -, -)`.
pub fn xor_grid_minimum(qp: &DualQp, steps: usize) -> f64 {
    let h = qp.c / steps as f64;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let (a0, a1, a2) = (i as f64 * h, j as f64 * h, k as f64 * h);
                let a3 = a0 + a1 - a2;
                if !(0.0..=qp.c + 1e-12).contains(&a3) {
                    continue;
                }
                best = best.min(qp.objective(&[a0, a1, a2, a3]));
            }
        }
    }
    best
}

pub struct WelchReference {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn t_pdf(t: f64, df: f64) -> f64 {
    let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (c - (df + 1.0) / 2.0 * (1.0 + t * t / df).ln()).exp()
}

/// One Simpson panel: endpoints, their values, the midpoint value and the panel estimate.
#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(f: &dyn Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let (flm, frm) = (f(0.5 * (p.a + m)), f(0.5 * (m + p.b)));
    let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let delta = left + right - p.whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let lp = Panel {
        b: m,
        fb: p.fm,
        fm: flm,
        whole: left,
        ..p
    };
    let rp = Panel {
        a: m,
        fa: p.fm,
        fm: frm,
        whole: right,
        ..p
    };
    simpson(f, lp, tol / 2.0, depth - 1) + simpson(f, rp, tol / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(
        f,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        1e-13,
        50,
    )
}

/// Direct Welch formulas with the p-value from quadrature of the t density.
pub fn welch(a: &[f64], b: &[f64]) -> WelchReference {
    let (va, vb) = (var(a) / a.len() as f64, var(b) / b.len() as f64);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let central = integrate(&|s| t_pdf(s, df), 0.0, t.abs());
    WelchReference {
        t,
        df,
        p_two_sided: (1.0 - 2.0 * central).max(0.0),
    }
}
