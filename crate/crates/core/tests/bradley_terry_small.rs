use geodesic_core::geometry::Point;
use geodesic_core::models::three_player_example;
use geodesic_core::optimizers::{
    Connection, DescentConfig, Outcome, StopKind, StopRule, run_exponentiated_gradient, run_geodesic_descent, run_mm,
};

const EPS: f64 = 1e-5;

fn e_geodesic(lr: f64) -> (usize, Outcome) {
    let (model, obs) = three_player_example();
    let nll = model.nll(&obs).unwrap();
    let init = Point::from_theta(model.theta_from_pi(&[1.0 / 3.0; 3]).unwrap());
    let cfg = DescentConfig::new(Connection::E, lr, StopRule::new(StopKind::GradNormPi, EPS).unwrap());
    let trace = run_geodesic_descent(&model, &nll, init, &cfg).unwrap();
    (trace.iterations, trace.outcome)
}

fn expgrad(lr: f64) -> (usize, Outcome) {
    let (model, obs) = three_player_example();
    let trace = run_exponentiated_gradient(
        &[1.0 / 3.0; 3],
        |pi| model.nll_full_gradient_pi(&obs, pi),
        |pi| Ok(geodesic_core::linalg::norm2(&model.nll_grad_pi(&obs, pi)?)),
        lr,
        EPS,
        100_000,
    )
    .unwrap();
    (trace.iterations, trace.outcome)
}

#[test]
fn mm_takes_twenty_iterations() {
    let (model, obs) = three_player_example();
    let trace = run_mm(&model, &obs, &[1.0 / 3.0; 3], EPS, 10_000).unwrap();
    assert_eq!((trace.iterations, trace.outcome), (20, Outcome::Converged));
}

#[test]
fn small_learning_rate_counts() {
    let (eg, outcome) = expgrad(0.01);
    assert_eq!(outcome, Outcome::Converged);
    assert!(eg.abs_diff(84) <= 2, "exponentiated gradient took {eg}");
    let (geo, outcome) = e_geodesic(0.01);
    assert_eq!(outcome, Outcome::Converged);
    assert!(geo.abs_diff(1468) <= 30, "e-geodesic took {geo}");
}

#[test]
fn unit_learning_rate_counts() {
    let (geo, outcome) = e_geodesic(1.0);
    assert_eq!(outcome, Outcome::Converged);
    assert!(geo.abs_diff(4) <= 1, "e-geodesic took {geo}");
    assert_eq!(expgrad(1.0).1, Outcome::Overflow);
}
