// temporary: definitive l1-only error curve at eps=5e-4, harness noise seeds
use multireg_core::harness::{relative_error, ExampleFactory, ExampleId};
use multireg_core::rng::derive_seed;
use multireg_core::solver::{solve, SolverOptions};
use multireg_core::value_function::{log_space_per_decade, RegParam};

#[test]
#[ignore]
fn l1_only_definitive() {
    let factory =
        ExampleFactory::<f64>::new(ExampleId::ElasticNetDeconvolution, None, derive_seed(20260808, 0))
            .unwrap();
    for seed in [1u64, 2, 3] {
        let noise_seed = derive_seed(20260808 ^ seed, 3); // eps index 2 => stream 3
        let problem = factory.problem(5e-4, noise_seed).unwrap();
        // cold, tight solve per candidate: no warm-start hysteresis
        let mut best = (f64::INFINITY, 0.0);
        for &v in log_space_per_decade(1e-6, 1e1, 10).iter() {
            let opts = SolverOptions {
                tol_elastic_net: 1e-9,
                max_iter: 400_000,
                ..Default::default()
            };
            let eta = RegParam::pair(v, 1e-14).unwrap();
            let (x, ok) = match solve(&problem.model, &eta, &opts) {
                Ok(r) => (r.x, true),
                Err(multireg_core::CoreError::NotConverged { best, .. }) => (best.x, false),
                Err(e) => panic!("{e}"),
            };
            let err = relative_error(&x, &problem.x_true).unwrap();
            if ok && err < best.0 {
                best = (err, v);
            }
            if v > 1e-4 && v < 1e0 {
                println!("seed {seed} eta1={v:9.2e}: err={err:9.3e} converged={ok}");
            }
        }
        println!("seed {seed}: best converged e_l1 = {:9.3e} at {:9.2e}", best.0, best.1);
    }
}
