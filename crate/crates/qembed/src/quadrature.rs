//! Composite Gauss-Legendre quadrature.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are found by Newton iteration on the Legendre recurrence,
/// seeded with the Chebyshev-angle approximation.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    static CACHE: Lazy<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(rule) = CACHE.lock().unwrap().get(&n) {
        return rule.clone();
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = nf * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    CACHE
        .lock()
        .unwrap()
        .insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

const POINTS_PER_PANEL: usize = 32;

/// Composite rule on [a, b] with roughly `total_points` abscissae.
///
/// The interval is split into uniform panels; the first and last panel are
/// halved once to resolve square-root behavior at the endpoints.
pub fn panel_rule(a: f64, b: f64, total_points: usize) -> Vec<(f64, f64)> {
    assert!(b > a);
    let npanels = (total_points / POINTS_PER_PANEL).max(4);
    let (xs, ws) = gauss_legendre(POINTS_PER_PANEL);
    let h = (b - a) / npanels as f64;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    for p in 0..npanels {
        let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
        if p == 0 || p == npanels - 1 {
            let mid = 0.5 * (lo + hi);
            panels.push((lo, mid));
            panels.push((mid, hi));
        } else {
            panels.push((lo, hi));
        }
    }
    let mut rule = Vec::with_capacity(panels.len() * POINTS_PER_PANEL);
    for (lo, hi) in panels {
        let c = 0.5 * (hi + lo);
        let s = 0.5 * (hi - lo);
        for (&x, &w) in xs.iter().zip(&ws) {
            rule.push((c + s * x, s * w));
        }
    }
    rule
}

/// Integrate `f` over [a, b] with the composite rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, total_points: usize) -> f64 {
    panel_rule(a, b, total_points)
        .iter()
        .map(|&(x, w)| w * f(x))
        .sum()
}
