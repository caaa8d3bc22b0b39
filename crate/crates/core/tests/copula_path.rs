use lincon_es_core::copula_path::{build_truncated_marginals, map_g, sample_feasible, sample_selected};
use lincon_es_core::dist::{CopulaStep, GaussianStep, Generator, Marginal};
use lincon_es_core::es::{sample_feasible_step, Generation};
use lincon_es_core::rng::stream;
use lincon_es_core::stats::ks_two_sample;
use lincon_es_core::{Problem, RotationFrame};

#[test]
fn feasible_steps_agree_with_rejection_sampling() {
    let frame = RotationFrame::new(3, 0.9);
    let g = GaussianStep::standard(3).unwrap();
    for delta in [0.0, 0.5, 2.0] {
        let m = build_truncated_marginals(&g, &frame, delta).unwrap();
        let mut ra = stream(1, 0);
        let mut rb = stream(1, 1);
        let mut buf = vec![0.0; 3];
        let mut path = vec![Vec::new(); 3];
        let mut direct = vec![Vec::new(); 3];
        for _ in 0..10_000 {
            let a = frame.rotate(&sample_feasible(&m, &frame, &mut ra).unwrap()).unwrap();
            sample_feasible_step(&g, &frame, delta, &mut rb, &mut buf).unwrap();
            let b = frame.rotate(&buf).unwrap();
            for k in 0..3 {
                path[k].push(a[k]);
                direct[k].push(b[k]);
            }
        }
        for k in 0..3 {
            let p = ks_two_sample(&path[k], &direct[k]).unwrap().p_value;
            assert!(p > 0.01, "delta={delta} coord={k}: p={p}");
        }
    }
}

#[test]
fn selected_steps_agree_in_three_dimensions() {
    let problem = Problem::new(3, 4, 0.6, 1.0).unwrap();
    let frame = problem.frame();
    let g = GaussianStep::standard(3).unwrap();
    let m = build_truncated_marginals(&g, &frame, 0.7).unwrap();
    let mut ra = stream(2, 0);
    let mut rb = stream(2, 1);
    let mut generation = Generation::new(&problem);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..10_000 {
        a.push(sample_selected(&m, &frame, 4, &mut ra).unwrap()[2]);
        b.push(generation.sample(&g, &frame, 0.7, &mut rb).unwrap()[2]);
    }
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
}

#[test]
fn images_are_always_feasible() {
    let frame = RotationFrame::new(2, 0.3);
    let g = GaussianStep::standard(2).unwrap();
    for delta in [0.0, 1e-9, 3.0] {
        let m = build_truncated_marginals(&g, &frame, delta).unwrap();
        for u in [1e-300, 1e-12, 0.5, 1.0 - 1e-12, 1.0] {
            let x = map_g(&[u, 0.5], &m, &frame).unwrap();
            assert!(frame.g(&x) <= delta, "delta={delta} u={u}: {}", frame.g(&x));
        }
    }
}

#[test]
fn dependent_laws_are_refused() {
    let frame = RotationFrame::new(2, 0.3);
    let step = CopulaStep::new(
        Generator::gumbel(2.0).unwrap(),
        Marginal::standard_normal(),
        Marginal::standard_normal(),
        vec![],
        frame,
    )
    .unwrap();
    assert!(build_truncated_marginals(&step, &frame, 1.0).is_err());
    let correlated = GaussianStep::new(2, &[1.0, 0.5, 0.5, 1.0]).unwrap();
    assert!(build_truncated_marginals(&correlated, &frame, 1.0).is_err());
}
