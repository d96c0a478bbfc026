use fracdim::process::{LaplaceExponent, LevyModel};
use fracdim::sets::CompactSet;
use fracdim::simulate::sample_path;

fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn increments_are_stationary() {
    // 2e4 steps of size h; early and late increments must look alike
    let n = 20_000;
    let h = 1.0 / n as f64;
    let net = CompactSet::unit_interval().discretize(h).unwrap();
    let models = [
        LevyModel::brownian(),
        LevyModel::stable(0.8),
        LevyModel::subordinator(LaplaceExponent::stable(0.5)),
        LevyModel::subordinator(LaplaceExponent::Gamma { a: 1.0, b: 1.0 }),
    ];
    for (m, model) in models.iter().enumerate() {
        let p = sample_path(model, &net, 40 + m as u64).unwrap();
        let x = p.values.coords();
        let inc: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let half = inc.len() / 2;
        let mut early = inc[..10_000.min(half)].to_vec();
        let mut late = inc[inc.len() - 10_000.min(half)..].to_vec();
        let d = ks_statistic(&mut early, &mut late);
        let (na, nb) = (early.len() as f64, late.len() as f64);
        let critical = 1.628 * ((na + nb) / (na * nb)).sqrt();
        assert!(d < critical, "{}: D = {d} >= {critical}", model.tag());
    }
}

#[test]
fn brownian_increment_moments() {
    let net = CompactSet::unit_interval().discretize(1e-4).unwrap();
    let p = sample_path(&LevyModel::brownian(), &net, 9).unwrap();
    let x = p.values.coords();
    let h = p.times[1] - p.times[0];
    let inc: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let n = inc.len() as f64;
    let mean = inc.iter().sum::<f64>() / n;
    let var = inc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    // exponent |z|^2 means variance 2h per step
    assert!(mean.abs() < 4.0 * (2.0 * h / n).sqrt());
    assert!((var / (2.0 * h) - 1.0).abs() < 0.03, "{}", var / (2.0 * h));
}

#[test]
fn subordinator_laplace_transform() {
    // E exp(-lambda (X(t+h) - X(t))) = exp(-h Phi(lambda))
    let net = CompactSet::unit_interval().discretize(1e-4).unwrap();
    let phi = LaplaceExponent::stable(0.5);
    let p = sample_path(&LevyModel::subordinator(phi.clone()), &net, 10).unwrap();
    let x = p.values.coords();
    let h = p.times[1] - p.times[0];
    for lambda in [1e4, 1e6, 1e8] {
        let emp = x.windows(2).map(|w| (-lambda * (w[1] - w[0])).exp()).sum::<f64>() / (x.len() - 1) as f64;
        let exact = (-h * phi.eval(lambda)).exp();
        assert!((emp - exact).abs() < 0.02, "lambda {lambda}: {emp} vs {exact}");
    }
    assert!(x.windows(2).all(|w| w[1] >= w[0]));
}
