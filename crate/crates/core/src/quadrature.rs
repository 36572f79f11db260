//! Quadrature primitives: Gauss-Legendre rules, adaptive Gauss-Kronrod, and
//! panel tables that carry a function sampled on a composite Gauss-Legendre
//! grid together with its interpolant and Cauchy transform.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, p_prev) = legendre_pair(n, x);
        if dp == 0.0 || !dp.is_finite() {
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn legendre(n: usize, x: f64) -> f64 {
    legendre_pair(n, x).0
}

// Kronrod 15 / Gauss 7 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    ((k * h), ((k - g) * h).norm())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_intervals: 4000 }
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration of a complex integrand over the
/// consecutive pieces delimited by `breaks`. Interior break points are never
/// sampled, which makes them safe places for removable singularities.
pub fn integrate_pieces<F: Fn(f64) -> C64>(f: F, breaks: &[f64], tol: Tolerance, what: &'static str) -> Result<C64> {
    struct Piece {
        a: f64,
        b: f64,
        value: C64,
        err: f64,
    }
    let mut pieces: Vec<Piece> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, err) = kronrod15(&f, w[0], w[1]);
            Piece { a: w[0], b: w[1], value, err }
        })
        .collect();
    loop {
        let total: C64 = pieces.iter().map(|p| p.value).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::NonFinite(what));
        }
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(total);
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::QuadratureDivergence { what, estimate: err });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one piece");
        let Piece { a, b, .. } = pieces.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::QuadratureDivergence { what, estimate: err });
        }
        for (lo, hi) in [(a, m), (m, b)] {
            let (value, err) = kronrod15(&f, lo, hi);
            pieces.push(Piece { a: lo, b: hi, value, err });
        }
    }
}

pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: Tolerance, what: &'static str) -> Result<C64> {
    integrate_pieces(f, &[a, b], tol, what)
}

pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance, what: &'static str) -> Result<f64> {
    integrate(|x| C64::new(f(x), 0.0), a, b, tol, what).map(|z| z.re)
}

/// Reference Gauss-Legendre rule with barycentric weights and the two highest
/// Legendre polynomials at the nodes (used for resolution checks).
#[derive(Debug, Clone)]
struct ReferenceRule {
    x: Vec<f64>,
    w: Vec<f64>,
    bary: Vec<f64>,
    p_last: Vec<f64>,
    p_second_last: Vec<f64>,
}

impl ReferenceRule {
    fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut bary: Vec<f64> = (0..n)
            .map(|j| {
                let prod: f64 = (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
                1.0 / prod
            })
            .collect();
        let scale = bary.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        bary.iter_mut().for_each(|b| *b /= scale);
        let p_last = x.iter().map(|&t| legendre(n - 1, t)).collect();
        let p_second_last = x.iter().map(|&t| legendre(n - 2, t)).collect();
        Self { x, w, bary, p_last, p_second_last }
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    /// Magnitude of the two highest Legendre coefficients of the interpolant.
    fn tail(&self, values: &[C64]) -> f64 {
        let n = self.len();
        let coef = |p: &[f64], k: usize| -> f64 {
            let s: C64 = values.iter().zip(&self.w).zip(p).map(|((v, w), pk)| v * (w * pk)).sum();
            (s * ((2 * k + 1) as f64 / 2.0)).norm()
        };
        coef(&self.p_last, n - 1) + coef(&self.p_second_last, n - 2)
    }
}

/// Composite Gauss-Legendre grid on `[panels[0].0, panels.last().1]`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    panels: Vec<(f64, f64)>,
    reference: ReferenceRule,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(panels: Vec<(f64, f64)>, n: usize) -> Self {
        let reference = ReferenceRule::new(n);
        let mut nodes = Vec::with_capacity(panels.len() * n);
        let mut weights = Vec::with_capacity(panels.len() * n);
        for &(a, b) in &panels {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in reference.x.iter().zip(&reference.w) {
                nodes.push(c + h * x);
                weights.push(h * w);
            }
        }
        Self { panels, reference, nodes, weights }
    }

    /// Panels refined geometrically towards `start` (`levels` halvings of the
    /// first uniform panel) followed by uniform panels of width `width`.
    pub fn graded(start: f64, end: f64, width: f64, levels: usize, n: usize) -> Self {
        let mut panels = Vec::new();
        let first_end = (start + width).min(end);
        let mut edges: Vec<f64> = (0..=levels).rev().map(|k| start + (first_end - start) * 0.5_f64.powi(k as i32)).collect();
        edges.insert(0, start);
        for w in edges.windows(2) {
            panels.push((w[0], w[1]));
        }
        let mut a = first_end;
        while a < end - 1e-12 {
            let b = (a + width).min(end);
            panels.push((a, b));
            a = b;
        }
        Self::new(panels, n)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[(f64, f64)] {
        &self.panels
    }

    pub fn per_panel(&self) -> usize {
        self.reference.len()
    }

    pub fn start(&self) -> f64 {
        self.panels[0].0
    }

    pub fn end(&self) -> f64 {
        self.panels[self.panels.len() - 1].1
    }

    fn panel_of(&self, x: f64) -> usize {
        match self.panels.binary_search_by(|&(a, b)| {
            if x < a {
                std::cmp::Ordering::Greater
            } else if x > b {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(i) => i,
            Err(i) => i.min(self.panels.len() - 1),
        }
    }

    /// Build a rule adapted to `f`: panels whose interpolant has a Legendre
    /// tail above `tol * max|f|` are bisected until resolved.
    pub fn adapt<F>(initial: PanelRule, f: F, tol: f64, max_panels: usize, what: &'static str) -> Result<PanelTable>
    where
        F: Fn(f64) -> Result<C64> + Sync + Send,
    {
        let n = initial.per_panel();
        let reference = initial.reference.clone();
        // Panels carry the tail of their parent; a split that no longer shrinks
        // the tail has hit the noise floor of `f`.
        let mut todo: Vec<((f64, f64), f64)> = initial.panels.iter().map(|&p| (p, f64::INFINITY)).collect();
        let mut done: Vec<((f64, f64), Vec<C64>)> = Vec::new();
        let mut scale = 0.0_f64;
        while !todo.is_empty() {
            let sampled: Vec<Result<Vec<C64>>> = crate::sweep::map(&todo, |&((a, b), _)| {
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
                reference.x.iter().map(|x| f(c + h * x)).collect()
            });
            let mut next = Vec::new();
            let mut batch = Vec::with_capacity(todo.len());
            for (&(panel, parent), values) in todo.iter().zip(sampled) {
                let values = values?;
                scale = values.iter().fold(scale, |m, v| m.max(v.norm()));
                batch.push((panel, parent, values));
            }
            for ((a, b), parent, values) in batch {
                let target = tol * scale.max(1e-300);
                let tail = reference.tail(&values);
                let floor = tail > NOISE_RATIO * parent && tail <= NOISE_SLACK * target;
                if tail <= target || floor || (b - a) < 1e-13 * (1.0 + a.abs()) {
                    done.push(((a, b), values));
                } else {
                    let m = 0.5 * (a + b);
                    next.push(((a, m), tail));
                    next.push(((m, b), tail));
                }
            }
            if done.len() + next.len() > max_panels {
                return Err(Error::QuadratureDivergence { what, estimate: tol });
            }
            todo = next;
        }
        done.sort_by(|x, y| x.0 .0.total_cmp(&y.0 .0));
        let panels = done.iter().map(|(p, _)| *p).collect();
        let values = done.into_iter().flat_map(|(_, v)| v).collect();
        debug_assert_eq!(n, reference.len());
        Ok(PanelTable::new(PanelRule::new(panels, n), values))
    }
}

/// A child panel whose tail exceeds this fraction of its parent's is at the noise floor.
const NOISE_RATIO: f64 = 0.25;
/// Largest multiple of the target accepted at the noise floor.
const NOISE_SLACK: f64 = 1e3;

/// Samples of a complex function on the nodes of a [`PanelRule`].
#[derive(Debug, Clone)]
pub struct PanelTable {
    rule: std::sync::Arc<PanelRule>,
    values: Vec<C64>,
}

impl PanelTable {
    pub fn new(rule: PanelRule, values: Vec<C64>) -> Self {
        assert_eq!(rule.nodes.len(), values.len());
        Self { rule: std::sync::Arc::new(rule), values }
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<C64>) -> Self {
        assert_eq!(self.rule.nodes.len(), values.len());
        Self { rule: self.rule.clone(), values }
    }

    pub fn rule(&self) -> &PanelRule {
        &self.rule
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    fn panel_values(&self, p: usize) -> &[C64] {
        let n = self.rule.per_panel();
        &self.values[p * n..(p + 1) * n]
    }

    fn to_reference(&self, p: usize, x: f64) -> f64 {
        let (a, b) = self.rule.panels[p];
        (2.0 * x - a - b) / (b - a)
    }

    /// Barycentric interpolation inside panel `p` at reference coordinate `t`.
    fn interp_in(&self, p: usize, t: f64) -> C64 {
        let r = &self.rule.reference;
        let vals = self.panel_values(p);
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..r.len() {
            let d = t - r.x[j];
            if d == 0.0 {
                return vals[j];
            }
            let c = r.bary[j] / d;
            num += vals[j] * c;
            den += c;
        }
        num / den
    }

    /// Value of the piecewise interpolant at `x` (clamped to the grid).
    pub fn eval(&self, x: f64) -> C64 {
        let p = self.rule.panel_of(x);
        self.interp_in(p, self.to_reference(p, x).clamp(-1.0, 1.0))
    }

    /// Derivative of the interpolant at the `j`-th global node.
    pub fn derivative_at_node(&self, j: usize) -> C64 {
        let n = self.rule.per_panel();
        let (p, k) = (j / n, j % n);
        let r = &self.rule.reference;
        let vals = self.panel_values(p);
        let mut d = C64::new(0.0, 0.0);
        for i in 0..n {
            if i != k {
                d += (vals[i] - vals[k]) * (r.bary[i] / r.bary[k] / (r.x[k] - r.x[i]));
            }
        }
        let (a, b) = self.rule.panels[p];
        d * (2.0 / (b - a))
    }

    /// Derivative of the interpolant at an arbitrary point.
    pub fn derivative(&self, x: f64) -> C64 {
        let p = self.rule.panel_of(x);
        let t = self.to_reference(p, x).clamp(-1.0, 1.0);
        let r = &self.rule.reference;
        let n = r.len();
        if let Some(k) = (0..n).find(|&k| (t - r.x[k]).abs() < 1e-13) {
            return self.derivative_at_node(p * n + k);
        }
        let vals = self.panel_values(p);
        let value = self.interp_in(p, t);
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..n {
            let d = t - r.x[j];
            num += (value - vals[j]) * (r.bary[j] / (d * d));
            den += r.bary[j] / d;
        }
        let (a, b) = self.rule.panels[p];
        num / den * (2.0 / (b - a))
    }

    /// `sum_j w_j f_j`.
    pub fn integral(&self) -> C64 {
        self.values.iter().zip(&self.rule.weights).map(|(v, w)| v * *w).sum()
    }

    /// `sum_j w_j f_j k(x_j)` on the stored nodes.
    pub fn integral_with<K: Fn(f64) -> C64>(&self, kernel: K) -> C64 {
        self.values
            .iter()
            .zip(&self.rule.nodes)
            .zip(&self.rule.weights)
            .map(|((v, &x), w)| v * kernel(x) * *w)
            .sum()
    }

    /// Adaptive integral of `kernel(x) * f(x)` over the grid, sampling `f`
    /// through its interpolant. `extra_breaks` are added to the panel edges.
    pub fn integrate_adaptive<K: Fn(f64, C64) -> C64>(
        &self,
        kernel: K,
        extra_breaks: &[f64],
        tol: Tolerance,
        what: &'static str,
    ) -> Result<C64> {
        let mut breaks: Vec<f64> = self.rule.panels.iter().map(|p| p.0).collect();
        breaks.push(self.rule.end());
        breaks.extend(extra_breaks.iter().copied().filter(|&b| b > self.rule.start() && b < self.rule.end()));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        integrate_pieces(|x| kernel(x, self.eval(x)), &breaks, tol, what)
    }

    /// Cauchy integral `int f(t) / (t - z) dt` over the grid for `z` off the
    /// segment. Panels close to `z` are subdivided, sampling `f` through the
    /// panel interpolant, until every piece is at least its own half-width
    /// away from `z`.
    pub fn cauchy(&self, z: C64) -> C64 {
        let n = self.rule.per_panel();
        let mut total = C64::new(0.0, 0.0);
        for (p, &(a, b)) in self.rule.panels.iter().enumerate() {
            let r = 0.5 * (b - a);
            if distance_to_segment(z, a, b) >= r {
                let off = p * n;
                for j in 0..n {
                    total += self.values[off + j] * (self.rule.weights[off + j] / (self.rule.nodes[off + j] - z));
                }
            } else {
                total += self.cauchy_refined(p, -1.0, 1.0, z, 0);
            }
        }
        total
    }

    fn cauchy_refined(&self, p: usize, lo: f64, hi: f64, z: C64, depth: usize) -> C64 {
        let (a, b) = self.rule.panels[p];
        let (xa, xb) = (a + 0.5 * (b - a) * (lo + 1.0), a + 0.5 * (b - a) * (hi + 1.0));
        let r = 0.5 * (xb - xa);
        if distance_to_segment(z, xa, xb) >= r || depth > 60 {
            let reference = &self.rule.reference;
            let (tc, th) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let (c, h) = (0.5 * (xa + xb), r);
            return reference
                .x
                .iter()
                .zip(&reference.w)
                .map(|(&t, &w)| self.interp_in(p, tc + th * t) * (w * h / (c + h * t - z)))
                .sum();
        }
        let mid = 0.5 * (lo + hi);
        self.cauchy_refined(p, lo, mid, z, depth + 1) + self.cauchy_refined(p, mid, hi, z, depth + 1)
    }

    /// Principal value `PV int f(t) / (t - mu) dt` for `mu` strictly inside the
    /// grid, by subtracting `f(mu)` and integrating the logarithm exactly.
    pub fn cauchy_pv(&self, mu: f64) -> C64 {
        let (start, end) = (self.rule.start(), self.rule.end());
        debug_assert!(mu > start && mu < end);
        let f_mu = self.eval(mu);
        let p_mu = self.rule.panel_of(mu);
        let (a, b) = self.rule.panels[p_mu];
        let near = 1e-9 * (b - a);
        let mut total = f_mu * ((end - mu) / (mu - start)).ln();
        for (j, (&x, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            let d = x - mu;
            if d.abs() <= near {
                total += self.derivative_at_node(j) * w;
            } else {
                total += (self.values[j] - f_mu) * (w / d);
            }
        }
        total
    }

    /// Principal value at the `j`-th node, exact use of the node derivative.
    pub fn cauchy_pv_at_node(&self, j: usize) -> C64 {
        let (start, end) = (self.rule.start(), self.rule.end());
        let mu = self.rule.nodes[j];
        let f_mu = self.values[j];
        let mut total = f_mu * ((end - mu) / (mu - start)).ln() + self.derivative_at_node(j) * self.rule.weights[j];
        for (k, (&x, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            if k != j {
                total += (self.values[k] - f_mu) * (w / (x - mu));
            }
        }
        total
    }
}

fn distance_to_segment(z: C64, a: f64, b: f64) -> f64 {
    let dx = if z.re < a {
        a - z.re
    } else if z.re > b {
        z.re - b
    } else {
        0.0
    };
    dx.hypot(z.im)
}

/// Gauss rule for the half-range Maxwell weight `exp(-x^2)` on `[0, inf)`,
/// built by the discretized Stieltjes procedure and the Golub-Welsch
/// eigenproblem. Returns nodes ascending and weights.
pub fn half_range_maxwell(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Discretize the weight on [0, 12] finely enough to be exact for the
    // polynomial degrees involved.
    let fine = PanelRule::new((0..48).map(|k| (0.25 * k as f64, 0.25 * (k + 1) as f64)).collect(), 32);
    let t = fine.nodes();
    let wt: Vec<f64> = fine.nodes().iter().zip(fine.weights()).map(|(x, w)| w * (-x * x).exp()).collect();
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut p_prev = vec![0.0; t.len()];
    let mut p = vec![1.0; t.len()];
    let mut norm_prev = 1.0;
    for k in 0..n {
        let norm: f64 = p.iter().zip(&wt).map(|(pi, w)| w * pi * pi).sum();
        alpha[k] = p.iter().zip(&wt).zip(t).map(|((pi, w), x)| w * x * pi * pi).sum::<f64>() / norm;
        if k > 0 {
            beta[k] = norm / norm_prev;
        }
        let next: Vec<f64> = (0..t.len()).map(|i| (t[i] - alpha[k]) * p[i] - beta[k] * p_prev[i]).collect();
        p_prev = std::mem::replace(&mut p, next);
        norm_prev = norm;
    }
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[j].sqrt()
        } else if j + 1 == i {
            beta[i].sqrt()
        } else {
            0.0
        }
    });
    let mass: f64 = wt.iter().sum();
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}
