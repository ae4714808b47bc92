// temporary diagnostics, not part of the deliverable
use multireg_core::harness::certify::{random_eta_points, sandwich_check};
use multireg_core::harness::{add_noise, relative_error, ExampleFactory, ExampleId};
use multireg_core::model::TikhonovModel;
use multireg_core::operators::{build_convolution_kernel, GridSpec, KernelKind};
use multireg_core::penalties::Penalty;
use multireg_core::rules::{balance_fixed_point_ii, FixedPointOptions};
use multireg_core::solver::{solve, SolverOptions};
use multireg_core::value_function::{log_space_per_decade, RegParam};

#[test]
#[ignore]
fn diag_sandwich() {
    for (id, eps, lo, hi) in [
        (ExampleId::H1TvDeconvolution, 5e-3, 1e-6, 1e-1),
        (ExampleId::ElasticNetDeconvolution, 5e-3, 1e-6, 1e-1),
        (ExampleId::ElasticNetDeblurring, 1e-2, 1e-4, 1e-1),
    ] {
        let factory = ExampleFactory::<f64>::new(id, None, 0).unwrap();
        let problem = factory.problem(eps, 7).unwrap();
        let points = random_eta_points(20, lo, hi, 2, 40 + id.index() as u64);
        let solver = SolverOptions {
            tol_elastic_net: 1e-8,
            tol_splitting: 1e-10,
            max_iter: 300_000,
            ..Default::default()
        };
        let checks = sandwich_check(&problem.model, &points, 1e-4, 1e-2, &solver).unwrap();
        for c in checks.iter().filter(|c| !c.ok) {
            println!(
                "example {} FAIL at eta=({:.3e},{:.3e}): psi={:?} plus={:?} minus={:?}",
                id.index(),
                c.eta.get(0),
                c.eta.get(1),
                c.psi,
                c.grad_plus,
                c.grad_minus
            );
        }
        println!("example {}: {} failures", id.index(), checks.iter().filter(|c| !c.ok).count());
    }
}

fn bumps_w(t: f64, w: f64) -> f64 {
    let v = (-((t - 0.3) / w).powi(2)).exp() + 0.8 * (-((t - 0.7) / w).powi(2)).exp();
    if v < 0.01 {
        0.0
    } else {
        v
    }
}

#[test]
#[ignore]
fn diag_ex2_width() {
    let grid = GridSpec::new(0.0, 1.0, 100).unwrap();
    let op = build_convolution_kernel(KernelKind::BumpPair, &grid).unwrap();
    let rule_solver =
        SolverOptions { tol_elastic_net: 1e-8, max_iter: 300_000, ..Default::default() };
    let scan_solver =
        SolverOptions { tol_elastic_net: 1e-6, max_iter: 10_000, ..Default::default() };
    for w in [0.05f64, 0.07, 0.09] {
        let x_true: Vec<f64> = grid.nodes().iter().map(|&t| bumps_w(t, w)).collect();
        let y_true = op.apply(&x_true).unwrap();
        for eps in [5e-2f64, 5e-4, 5e-6] {
            let mut es = Vec::new();
            let mut el1s = Vec::new();
            let mut el2s = Vec::new();
            for seed in [3u64, 4, 5] {
                let (y, _d2) = add_noise(&y_true, eps, seed);
                let model = TikhonovModel::new(
                    op.clone(),
                    y.clone(),
                    vec![Penalty::l1(), Penalty::l2(100)],
                )
                .unwrap();
                // fine 25/decade pinned l1 scan, strongest first
                let mut warm: Option<Vec<f64>> = None;
                let mut e_l1 = f64::INFINITY;
                for &v in log_space_per_decade(1e-10, 1e1, 25).iter().rev() {
                    let opts = scan_solver.clone().with_warm_start(warm.clone());
                    let x = match solve(&model, &RegParam::pair(v, 1e-14).unwrap(), &opts) {
                        Ok(r) => r.x,
                        Err(multireg_core::CoreError::NotConverged { best, .. }) => best.x,
                        Err(e) => panic!("{e}"),
                    };
                    warm = Some(x.clone());
                    e_l1 = e_l1.min(relative_error(&x, &x_true).unwrap());
                }
                // direct ridge scan
                let ridge =
                    TikhonovModel::new(op.clone(), y.clone(), vec![Penalty::l2(100)]).unwrap();
                let mut e_l2 = f64::INFINITY;
                for &v in log_space_per_decade(1e-10, 1e1, 25).iter() {
                    let rec = solve(&ridge, &RegParam::new(vec![v]).unwrap(), &rule_solver)
                        .unwrap();
                    e_l2 = e_l2.min(relative_error(&rec.x, &x_true).unwrap());
                }
                // balancing, two-step-ish gamma 5 then adjusted exponent
                let mut fp = FixedPointOptions::defaults(2);
                fp.solver = rule_solver.clone();
                let tr = balance_fixed_point_ii(&model, 5.0, &fp).unwrap();
                let rec = solve(
                    &model,
                    &tr.final_eta,
                    &rule_solver.clone().with_warm_start(Some(tr.final_x.clone())),
                )
                .unwrap();
                es.push(relative_error(&rec.x, &x_true).unwrap());
                el1s.push(e_l1);
                el2s.push(e_l2);
            }
            let med = |v: &mut Vec<f64>| {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v[v.len() / 2]
            };
            println!(
                "w={w:.2} eps={eps:7.1e}: e_b={:9.3e} e_l1={:9.3e} e_l2={:9.3e}",
                med(&mut es),
                med(&mut el1s),
                med(&mut el2s)
            );
        }
    }
}
