use gwb_core::measures::standard_normal_quantile;

/// Φ(x) by composite Simpson integration of the density from 0.
fn normal_cdf(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = phi(0.0) + phi(x);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * phi(i as f64 * h);
    }
    0.5 + s * h / 3.0
}

fn quantile_by_bisection(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn matches_bisection_of_integrated_density() {
    for p in [0.001, 0.025, 0.1, 0.3, 0.5, 0.6, 0.75, 0.9, 0.975, 0.999] {
        let (got, want) = (standard_normal_quantile(p), quantile_by_bisection(p));
        assert!((got - want).abs() < 1e-10, "p = {p}: {got} vs {want}");
    }
}

#[test]
fn three_quarters() {
    assert!((standard_normal_quantile(0.75) - 0.6744897501960817).abs() < 1e-12);
}
