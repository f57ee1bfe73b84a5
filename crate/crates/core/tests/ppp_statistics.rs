use statrs::distribution::{ChiSquared, ContinuousCDF};

use geoconc::ppp::{sample, Density, Window};
use geoconc::rng::child_seed;

const RUNS: u64 = 10_000;

fn counts_in(density: &Density, window: &Window, t: f64, regions: &[Window], master: u64) -> Vec<Vec<u64>> {
    (0..RUNS)
        .map(|i| {
            let pts = sample(density, window, t, child_seed(master, i)).unwrap();
            regions.iter().map(|r| pts.iter().filter(|p| r.contains(p)).count() as u64).collect()
        })
        .collect()
}

#[test]
fn uniform_counts_are_poisson() {
    let m = Density::unit_cube(2).unwrap();
    let w = Window::unit_cube(2);
    let counts: Vec<u64> = counts_in(&m, &w, 5.0, std::slice::from_ref(&w), 11).into_iter().map(|c| c[0]).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    assert!((mean - 5.0).abs() <= 3.0 * (5.0 / n).sqrt(), "mean {mean}");

    // chi-square goodness of fit with the tail pooled at >= 11
    let pmf = |j: u64| (-5.0f64).exp() * 5f64.powi(j as i32) / (1..=j).map(|v| v as f64).product::<f64>();
    let mut observed = [0.0; 12];
    for &c in &counts {
        observed[c.min(11) as usize] += 1.0;
    }
    let mut expected: Vec<f64> = (0..11).map(|j| n * pmf(j)).collect();
    expected.push(n - expected.iter().sum::<f64>());
    let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(11.0).unwrap().cdf(stat);
    assert!(p > 0.01, "chi-square {stat}, p = {p}");
}

#[test]
fn disjoint_regions_are_uncorrelated() {
    let m = Density::power_law(2, 4.0, 2.0).unwrap();
    let w = Window::new_box(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    let left = Window::new_box(vec![-2.0, -2.0], vec![0.0, 2.0]).unwrap();
    let right = Window::new_box(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
    let counts = counts_in(&m, &w, 1.0, &[left, right], 12);
    let n = counts.len() as f64;
    let mean = |j: usize| counts.iter().map(|c| c[j] as f64).sum::<f64>() / n;
    let (ma, mb) = (mean(0), mean(1));
    let cov = counts.iter().map(|c| (c[0] as f64 - ma) * (c[1] as f64 - mb)).sum::<f64>() / (n - 1.0);
    let corr = cov / (ma * mb).sqrt();
    // Poisson counts: variances equal means
    assert!(corr.abs() < 4.0 / n.sqrt(), "correlation {corr}");
    assert!((ma - mb).abs() < 4.0 * ((ma + mb) / n).sqrt(), "symmetry {ma} vs {mb}");
}

#[test]
fn intensity_follows_density() {
    let m = Density::power_law(2, 10.0, 1.5).unwrap();
    let w = Window::new_ball(vec![0.0, 0.0], 4.0).unwrap();
    // two small boxes at radii 0.5 and 3
    let near = Window::new_box(vec![0.4, -0.1], vec![0.6, 0.1]).unwrap();
    let far = Window::new_box(vec![2.9, -0.1], vec![3.1, 0.1]).unwrap();
    let counts = counts_in(&m, &w, 1.0, &[near, far], 13);
    let total = |j: usize| counts.iter().map(|c| c[j] as f64).sum::<f64>();
    let expected = |lo: f64, hi: f64| {
        // midpoint quadrature over a 0.2 x 0.2 box
        let mut acc = 0.0;
        for a in 0..50 {
            for b in 0..50 {
                let x = [lo + (a as f64 + 0.5) * (hi - lo) / 50.0, -0.1 + (b as f64 + 0.5) * 0.2 / 50.0];
                acc += m.eval(&x);
            }
        }
        acc * 0.04 / 2500.0 * RUNS as f64
    };
    for (j, (lo, hi)) in [(0.4, 0.6), (2.9, 3.1)].into_iter().enumerate() {
        let e = expected(lo, hi);
        assert!((total(j) - e).abs() < 4.0 * e.sqrt(), "region {j}: {} vs {e}", total(j));
    }
}

#[test]
fn samples_are_reproducible_and_seed_sensitive() {
    let m = Density::power_law(3, 6.0, 2.0).unwrap();
    let w = Window::new_ball(vec![0.0; 3], 2.0).unwrap();
    let a = sample(&m, &w, 2.0, 99).unwrap();
    let b = sample(&m, &w, 2.0, 99).unwrap();
    assert_eq!(a.coords(), b.coords());
    let c = sample(&m, &w, 2.0, 100).unwrap();
    assert_ne!(a.coords(), c.coords());
}
