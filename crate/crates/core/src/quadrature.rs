//! Gauss–Legendre rules and composite rules on [a, b].

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: flat list of nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Applies a `points`-node Gauss–Legendre rule on each panel between
    /// consecutive entries of `breaks`.
    pub fn composite(breaks: &[f64], points: usize) -> Rule {
        let (x, w) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity(points * breaks.len());
        let mut weights = Vec::with_capacity(points * breaks.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Rule { nodes, weights }
    }

    /// Rule on [a, b] from `panels` equal panels.
    pub fn uniform(a: f64, b: f64, panels: usize, points: usize) -> Rule {
        Rule::composite(&uniform_breaks(a, b, panels), points)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `panels + 1` equally spaced points from `a` to `b`.
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|j| if j == panels { b } else { a + (b - a) * j as f64 / panels as f64 }).collect()
}

/// Splits every panel of `breaks` in two.
pub fn bisect_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for pair in breaks.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    if let Some(last) = breaks.last() {
        out.push(*last);
    }
    out
}

/// Restriction of `breaks` (a partition of [0, 1]) to [0, x], with x
/// appended as the last break.
pub fn restrict_breaks(breaks: &[f64], x: f64) -> Vec<f64> {
    let mut out: Vec<f64> = breaks.iter().copied().filter(|&b| b < x).collect();
    if out.is_empty() {
        out.push(0.0);
    }
    out.push(x);
    out
}
