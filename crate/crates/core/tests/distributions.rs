use std::f64::consts::FRAC_PI_4;

use lincon_es_core::dist::{
    archimedean_density_check, ArchimedeanCopula, CopulaStep, GaussianStep, Generator, IsotropicStudentT, Marginal,
    StepDistribution,
};
use lincon_es_core::quad::integrate_2d;
use lincon_es_core::rng::stream;
use lincon_es_core::stats::ks_one_sample;
use lincon_es_core::RotationFrame;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

fn draws(dist: &dyn StepDistribution, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, 0);
    (0..n)
        .map(|_| {
            let mut x = vec![0.0; dist.dim()];
            dist.sample(&mut rng, &mut x);
            x
        })
        .collect()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let m = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
    let var: f64 = ra.iter().map(|x| (x - m) * (x - m)).sum();
    cov / var
}

fn kendall(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += ((a[i] - a[j]) * (b[i] - b[j])).signum() as i64;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn correlated_gaussian_projection_is_normal() {
    let cov = [2.0, 0.6, 0.6, 1.0];
    let g = GaussianStep::new(2, &cov).unwrap();
    let frame = RotationFrame::new(2, 0.5);
    let (s, c) = 0.5f64.sin_cos();
    let var = c * c * cov[0] + 2.0 * c * s * cov[1] + s * s * cov[3];
    let oracle = Normal::new(0.0, var.sqrt()).unwrap();
    let gs: Vec<f64> = draws(&g, 20_000, 1).iter().map(|x| frame.g(x)).collect();
    let p = ks_one_sample(&gs, |x| oracle.cdf(x)).unwrap().p_value;
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn copula_step_marginals_match_their_laws() {
    let frame = RotationFrame::new(2, 1.1);
    let step = CopulaStep::new(
        Generator::gumbel(2.0).unwrap(),
        Marginal::student_t(4.0, 0.0, 1.0).unwrap(),
        Marginal::normal(0.0, 1.5).unwrap(),
        vec![],
        frame,
    )
    .unwrap();
    let ys: Vec<(f64, f64)> = draws(&step, 20_000, 2).iter().map(|x| frame.rotate_planar(x[0], x[1])).collect();
    let t4 = StudentsT::new(0.0, 1.0, 4.0).unwrap();
    let n15 = Normal::new(0.0, 1.5).unwrap();
    let p1 = ks_one_sample(&ys.iter().map(|y| y.0).collect::<Vec<_>>(), |x| t4.cdf(x)).unwrap().p_value;
    let p2 = ks_one_sample(&ys.iter().map(|y| y.1).collect::<Vec<_>>(), |x| n15.cdf(x)).unwrap().p_value;
    assert!(p1 > 0.01 && p2 > 0.01, "{p1} {p2}");
}

#[test]
fn isotropic_student_t_projection_is_t() {
    let t = IsotropicStudentT::new(3, 3.0, 1.0).unwrap();
    let frame = RotationFrame::new(3, 0.3);
    let oracle = StudentsT::new(0.0, 1.0, 3.0).unwrap();
    let gs: Vec<f64> = draws(&t, 20_000, 3).iter().map(|x| frame.g(x)).collect();
    let p = ks_one_sample(&gs, |x| oracle.cdf(x)).unwrap().p_value;
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn gumbel_one_is_independent() {
    let c = ArchimedeanCopula::new(Generator::gumbel(1.0).unwrap());
    let mut rng = stream(4, 0);
    let (a, b): (Vec<f64>, Vec<f64>) = (0..100_000).map(|_| c.sample(&mut rng)).unzip();
    let rho = spearman(&a, &b);
    assert!(rho.abs() < 0.01, "rho = {rho}");
}

#[test]
fn sampled_kendall_tau_matches_generator() {
    for (g, tau) in [
        (Generator::gumbel(2.0).unwrap(), 0.5),
        (Generator::gumbel(3.0).unwrap(), 2.0 / 3.0),
        (Generator::clayton(2.0).unwrap(), 0.5),
    ] {
        let c = ArchimedeanCopula::new(g);
        let mut rng = stream(5, 0);
        let (a, b): (Vec<f64>, Vec<f64>) = (0..3_000).map(|_| c.sample(&mut rng)).unzip();
        let k = kendall(&a, &b);
        // the standard error of Kendall's tau at n = 3000 is below 0.012
        assert!((k - tau).abs() < 0.04, "{g:?}: {k}");
    }
}

#[test]
fn sampled_copula_matches_its_cdf() {
    let c = ArchimedeanCopula::new(Generator::gumbel(2.5).unwrap());
    let mut rng = stream(6, 0);
    let pts: Vec<(f64, f64)> = (0..50_000).map(|_| c.sample(&mut rng)).collect();
    for (u, v) in [(0.2, 0.3), (0.5, 0.5), (0.9, 0.7), (0.95, 0.95)] {
        let hits = pts.iter().filter(|p| p.0 <= u && p.1 <= v).count() as f64 / pts.len() as f64;
        let expected = c.cdf(u, v);
        let se = (expected * (1.0 - expected) / pts.len() as f64).sqrt();
        assert!((hits - expected).abs() < 4.0 * se, "({u}, {v}): {hits} vs {expected}");
    }
}

#[test]
fn clayton_density_matches_finite_difference() {
    for theta in [0.5, 2.0, 5.0] {
        for (u, v) in [(0.1, 0.2), (0.5, 0.5), (0.8, 0.3), (0.9, 0.95)] {
            let (analytic, numeric) = archimedean_density_check(Generator::clayton(theta).unwrap(), u, v).unwrap();
            assert!(((analytic - numeric) / numeric).abs() < 1e-4, "theta={theta} ({u},{v})");
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    let laws: Vec<Box<dyn StepDistribution>> = vec![
        Box::new(GaussianStep::new(2, &[2.0, 0.6, 0.6, 1.0]).unwrap()),
        Box::new(IsotropicStudentT::new(2, 5.0, 1.0).unwrap()),
        Box::new(
            CopulaStep::new(
                Generator::clayton(1.5).unwrap(),
                Marginal::normal(0.0, 1.0).unwrap(),
                Marginal::normal(0.0, 2.0).unwrap(),
                vec![],
                RotationFrame::new(2, FRAC_PI_4),
            )
            .unwrap(),
        ),
    ];
    for d in &laws {
        let [(a, b), (c, e)] = d.planar_box();
        let r = integrate_2d(|x, y| d.planar_density(x, y), a, b, |_| c, |_| e, 1e-6).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "{d:?}: {}", r.value);
    }
}
