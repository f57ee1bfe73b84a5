//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use geoconc::geograph::ConnectionSet;
use geoconc::motif::MotifTemplate;
use geoconc::ppp::PointSet;

/// `Πx + Πy ≤ Π max + Π min`, exact in integers.
pub fn product_exchange_holds(x: &[u64], y: &[u64]) -> bool {
    let prod = |it: &mut dyn Iterator<Item = u64>| it.fold(1u128, |a, v| a * v as u128);
    let lhs = prod(&mut x.iter().copied()) + prod(&mut y.iter().copied());
    let rhs = prod(&mut x.iter().zip(y).map(|(a, b)| *a.max(b))) + prod(&mut x.iter().zip(y).map(|(a, b)| *a.min(b)));
    lhs <= rhs
}

/// `Σ_i Π_j n_{π_j(i)} ≤ Σ_i n_i^k` for permutations `perms` (one per factor).
pub fn permuted_products_hold(n: &[u64], perms: &[Vec<usize>]) -> bool {
    let lhs: u128 = (0..n.len()).map(|i| perms.iter().map(|p| n[p[i]] as u128).product::<u128>()).sum();
    let rhs: u128 = n.iter().map(|&v| (v as u128).pow(perms.len() as u32)).sum();
    lhs <= rhs
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Subgraphs of the graph on `tuple` isomorphic to `h`, by scanning every
/// edge subset of the right size and testing all vertex bijections.
fn subgraphs_on(points: &PointSet, s: &ConnectionSet, h: &MotifTemplate, tuple: &[usize]) -> u64 {
    let k = tuple.len();
    let mut present = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if s.connects(points.point(tuple[a]), points.point(tuple[b])).unwrap() {
                present.push((a, b));
            }
        }
    }
    let m = h.edges().len();
    let perms = permutations(k);
    let mut total = 0;
    for subset in 0u32..(1 << present.len()) {
        if subset.count_ones() as usize != m {
            continue;
        }
        let chosen: Vec<(usize, usize)> =
            present.iter().enumerate().filter(|(i, _)| subset >> i & 1 == 1).map(|(_, e)| *e).collect();
        let iso = perms.iter().any(|p| {
            h.edges().iter().all(|&(u, v)| {
                let (a, b) = (p[u].min(p[v]), p[u].max(p[v]));
                chosen.contains(&(a, b))
            })
        });
        total += iso as u64;
    }
    total
}

/// `Σ over ordered distinct k-tuples of (#H-subgraphs)/k!`, returned as the
/// exact numerator (i.e. `k!` times the U-statistic).
pub fn ordered_sum_numerator(points: &PointSet, s: &ConnectionSet, h: &MotifTemplate) -> u64 {
    let n = points.len();
    let k = h.k();
    let mut tuple = vec![0usize; k];
    let mut total = 0;
    fn rec(
        depth: usize,
        n: usize,
        tuple: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if depth == tuple.len() {
            f(tuple);
            return;
        }
        for v in 0..n {
            if tuple[..depth].contains(&v) {
                continue;
            }
            tuple[depth] = v;
            rec(depth + 1, n, tuple, f);
        }
    }
    rec(0, n, &mut tuple, &mut |t| total += subgraphs_on(points, s, h, t));
    total
}

/// Unbiased sample variance and the standard error of the sample mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance with its standard error from the fourth central
/// moment.
pub fn variance_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    (var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Expected number of edges of a disk graph with radius `rho` over a unit
/// intensity `t` on the unit square, by polar quadrature of
/// `(t²/2) ∫_{‖v‖≤ρ} (1-|v_1|)(1-|v_2|) dv`.
pub fn unit_square_edges_quadrature(t: f64, rho: f64) -> f64 {
    let (nr, na) = (1000, 1000);
    let mut acc = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) * rho / nr as f64;
        for j in 0..na {
            let a = (j as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / na as f64;
            acc += (1.0 - r * a.cos()) * (1.0 - r * a.sin()) * r;
        }
    }
    // four quadrants
    let integral = 4.0 * acc * (rho / nr as f64) * (std::f64::consts::FRAC_PI_2 / na as f64);
    0.5 * t * t * integral
}
