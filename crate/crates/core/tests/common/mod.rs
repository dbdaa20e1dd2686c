#![allow(dead_code)]

use topocausal::persistence::PersistenceDiagram;

/// 64-bit LCG (Knuth MMIX constants); uniform in [-0.5, 0.5). Easy to
/// reproduce bit-for-bit outside Rust.
pub fn lcg(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

pub fn ar1(seed: u64, n: usize, phi: f64) -> Vec<f64> {
    let mut prev = 0.0;
    lcg(seed, n)
        .into_iter()
        .map(|e| {
            prev = phi * prev + e;
            prev
        })
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Prim's algorithm on the complete graph; returns sorted edge weights.
pub fn mst_weights(points: &[Vec<f64>]) -> Vec<f64> {
    let m = points.len();
    if m < 2 {
        return vec![];
    }
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    best[0] = 0.0;
    let mut weights = Vec::with_capacity(m - 1);
    for step in 0..m {
        let u = (0..m)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            weights.push(best[u]);
        }
        for v in 0..m {
            if !in_tree[v] {
                let d = euclid(&points[u], &points[v]);
                if d < best[v] {
                    best[v] = d;
                }
            }
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

fn sup(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diag(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Minimum over all partial injections A -> B; unmatched points of either
/// side go to the diagonal.
pub fn brute_force_wd(a: &PersistenceDiagram, b: &PersistenceDiagram, p: f64) -> f64 {
    let xs = a.expanded();
    let ys = b.expanded();
    let mut used = vec![false; ys.len()];
    fn go(i: usize, xs: &[(f64, f64)], ys: &[(f64, f64)], used: &mut [bool], p: f64) -> f64 {
        if i == xs.len() {
            return ys
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(y, _)| to_diag(*y).powf(p))
                .sum();
        }
        let mut best = to_diag(xs[i]).powf(p) + go(i + 1, xs, ys, used, p);
        for j in 0..ys.len() {
            if !used[j] {
                used[j] = true;
                let c = sup(xs[i], ys[j]).powf(p) + go(i + 1, xs, ys, used, p);
                used[j] = false;
                best = best.min(c);
            }
        }
        best
    }
    go(0, &xs, &ys, &mut used, p).powf(1.0 / p)
}

pub fn diagram(pairs: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::from_pairs(0, pairs.iter().copied()).unwrap()
}

/// Random diagram with up to `max_points` points drawn from `u` (uniform
/// numbers in [-0.5, 0.5)). Births are not restricted to zero.
pub fn random_diagram(u: &mut impl Iterator<Item = f64>, max_points: usize) -> PersistenceDiagram {
    let k = ((u.next().unwrap() + 0.5) * (max_points + 1) as f64) as usize;
    let pairs: Vec<(f64, f64)> = (0..k.min(max_points))
        .map(|_| {
            let b = (u.next().unwrap() + 0.5) * 2.0;
            let d = b + (u.next().unwrap() + 0.5) * 3.0;
            (b, d)
        })
        .collect();
    diagram(&pairs)
}

/// Composite Simpson integral of the F(d1, d2) density over
/// `[f, inf)`, after the substitution `x = f + t / (1 - t)`.
pub fn f_tail_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    let ln_beta = |a: f64, b: f64| ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let log_c = (d1 / 2.0) * (d1 / d2).ln() - ln_beta(d1 / 2.0, d2 / 2.0);
    let density = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        (log_c + (d1 / 2.0 - 1.0) * x.ln() - ((d1 + d2) / 2.0) * (1.0 + d1 * x / d2).ln()).exp()
    };
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = f + t / (1.0 - t);
        density(x) / ((1.0 - t) * (1.0 - t))
    };
    let n = 200_000;
    let h = 1.0 / n as f64;
    let mut total = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * g(i as f64 * h);
    }
    total * h / 3.0
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
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
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}
