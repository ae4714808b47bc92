//! `multireg` — run the multi-parameter regularization experiments, dump
//! criterion landscapes, and certify the value-function properties.
//!
//! Subcommands:
//!   run        full experiment (rule + oracles) for one example
//!   landscape  Φ_γ/Ψ_γ grid over a parameter box for plotting
//!   certify    numerical certification of the value-function theory
//!
//! Every flag can also be given in a `key = value` config file via
//! `--config <file>`; command-line flags win on conflict.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use multireg_core::harness::certify::{asymptotics_check, random_eta_points, sandwich_check};
use multireg_core::harness::{
    emit_outputs, quadratic_toy, run_experiment, ExampleFactory, ExampleId, ExperimentConfig,
    OracleGridSpec, RuleChoice,
};
use multireg_core::harness::report::write_landscape;
use multireg_core::solver::SolverOptions;
use multireg_core::value_function::{certify_value_function, grid_2d_log};

type Flags = BTreeMap<String, String>;

fn usage() -> &'static str {
    "usage:
  multireg run --example {1|2|3} [--eps <list>] [--rule balance1|balance2|atik|discrepancy|oracle]
               [--gamma <f>] [--two-step true|false] [--cm <f>] [--ratio <f>] [--beta <f>] [--beta0 <f>]
               [--seeds <list>] [--size <n>] [--base-seed <n>] [--config <file>] --out <dir>
  multireg landscape --example {1|2|3} [--eps <f>] [--seed <n>] [--gamma <f>]
               [--grid lo:hi:per_decade] [--config <file>] --out <dir>
  multireg certify [--seed <n>] [--points <n>] [--out <dir>]"
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags::new();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        if let Some(key) = arg.strip_prefix("--") {
            let value = args.get(i + 1).ok_or_else(|| format!("missing value for --{key}"))?;
            flags.insert(key.to_string(), value.clone());
            i += 2;
        } else {
            return Err(format!("unexpected argument '{arg}'"));
        }
    }
    Ok(flags)
}

/// `key = value` lines, `#` comments; flags already present win.
fn merge_config_file(flags: &mut Flags, path: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {} is not 'key = value'", lineno + 1))?;
        let key = key.trim().to_string();
        if !flags.contains_key(&key) {
            flags.insert(key, value.trim().to_string());
        }
    }
    Ok(())
}

fn get_f64(flags: &Flags, key: &str) -> Result<Option<f64>, String> {
    flags
        .get(key)
        .map(|v| v.parse::<f64>().map_err(|_| format!("--{key}: bad number '{v}'")))
        .transpose()
}

fn get_usize(flags: &Flags, key: &str) -> Result<Option<usize>, String> {
    flags
        .get(key)
        .map(|v| v.parse::<usize>().map_err(|_| format!("--{key}: bad integer '{v}'")))
        .transpose()
}

fn get_list_f64(flags: &Flags, key: &str) -> Result<Option<Vec<f64>>, String> {
    flags
        .get(key)
        .map(|v| {
            v.split(',')
                .map(|tok| tok.trim().parse::<f64>().map_err(|_| format!("--{key}: bad number '{tok}'")))
                .collect()
        })
        .transpose()
}

fn get_list_u64(flags: &Flags, key: &str) -> Result<Option<Vec<u64>>, String> {
    flags
        .get(key)
        .map(|v| {
            v.split(',')
                .map(|tok| tok.trim().parse::<u64>().map_err(|_| format!("--{key}: bad integer '{tok}'")))
                .collect()
        })
        .transpose()
}

fn example_from(flags: &Flags) -> Result<ExampleId, String> {
    let idx = get_usize(flags, "example")?.ok_or("--example is required")?;
    ExampleId::from_index(idx).ok_or_else(|| format!("--example must be 1, 2 or 3, got {idx}"))
}

fn out_dir(flags: &Flags) -> Result<PathBuf, String> {
    flags.get("out").map(PathBuf::from).ok_or_else(|| "--out is required".to_string())
}

fn cmd_run(flags: &Flags) -> Result<(), String> {
    let example = example_from(flags)?;
    let dir = out_dir(flags)?;
    let mut config = ExperimentConfig::<f64>::defaults(example);

    if let Some(eps) = get_list_f64(flags, "eps")? {
        config.eps_list = eps;
    }
    if let Some(seeds) = get_list_u64(flags, "seeds")? {
        config.seeds = seeds;
    }
    if let Some(rule) = flags.get("rule") {
        config.rule = match rule.as_str() {
            "balance1" => RuleChoice::BalanceI,
            "balance2" => RuleChoice::BalanceII,
            "atik" => RuleChoice::ATikhonov {
                beta: get_f64(flags, "beta")?.unwrap_or(0.0),
                beta0: get_f64(flags, "beta0")?.unwrap_or(0.0),
            },
            "discrepancy" => RuleChoice::Discrepancy,
            "oracle" => RuleChoice::Oracle,
            other => return Err(format!("unknown rule '{other}'")),
        };
    }
    if let Some(g) = get_f64(flags, "gamma")? {
        config.gamma0 = g;
    }
    if let Some(ts) = flags.get("two-step") {
        config.two_step = ts.parse().map_err(|_| "--two-step expects true|false")?;
    }
    if let Some(cm) = get_f64(flags, "cm")? {
        config.c_m = cm;
    }
    if let Some(r) = get_f64(flags, "ratio")? {
        config.ratio = r;
    }
    if let Some(n) = get_usize(flags, "size")? {
        config.size = Some(n);
    }
    if let Some(s) = get_list_u64(flags, "base-seed")? {
        config.base_seed = s[0];
    }
    if let Some(t) = get_f64(flags, "rule-tol")? {
        config.rule_tol = t;
    }
    if let Some(n) = get_usize(flags, "rule-max-iter")? {
        config.rule_max_iter = n;
    }
    if let Some(spec) = flags.get("oracle-2d") {
        config.oracle_2d = parse_grid_spec(spec)?;
    }
    if let Some(spec) = flags.get("oracle-1d") {
        config.oracle_1d = parse_grid_spec(spec)?;
    }

    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    emit_outputs(&report, &dir).map_err(|e| e.to_string())?;

    println!("example {} rule {}", example.index(), config.rule.name());
    let labels: Vec<String> = report
        .rows
        .first()
        .map(|r| r.median_singles.iter().map(|(l, _)| l.clone()).collect())
        .unwrap_or_default();
    println!(
        "{:>10} {:>12} {:>12} {}",
        "eps",
        "e_b",
        "e_o",
        labels.iter().map(|l| format!("{:>12}", format!("e_{l}"))).collect::<String>()
    );
    for row in &report.rows {
        println!(
            "{:>10.1e} {:>12.3e} {:>12.3e} {}",
            row.epsilon,
            row.median_selected,
            row.median_oracle,
            row.median_singles
                .iter()
                .map(|(_, e)| format!("{:>12.3e}", e))
                .collect::<String>()
        );
    }
    if !report.failures.is_empty() {
        println!("{} cell(s) failed; see metadata.txt", report.failures.len());
    }
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn parse_grid_spec(spec: &str) -> Result<OracleGridSpec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid spec '{spec}' is not lo:hi:per_decade"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| "bad grid lower bound")?;
    let hi: f64 = parts[1].parse().map_err(|_| "bad grid upper bound")?;
    let per_decade: usize = parts[2].parse().map_err(|_| "bad grid density")?;
    Ok(OracleGridSpec { lo, hi, per_decade })
}

fn cmd_landscape(flags: &Flags) -> Result<(), String> {
    let example = example_from(flags)?;
    let dir = out_dir(flags)?;
    let default_eps = if example == ExampleId::ElasticNetDeblurring { 1e-2 } else { 5e-2 };
    let eps = get_f64(flags, "eps")?.unwrap_or(default_eps);
    let seed = get_list_u64(flags, "seed")?.map(|v| v[0]).unwrap_or(1);
    let gamma = get_f64(flags, "gamma")?.unwrap_or(5.0);
    let grid_spec = flags
        .get("grid")
        .map(|s| parse_grid_spec(s))
        .transpose()?
        .unwrap_or(OracleGridSpec { lo: 1e-6, hi: 1e0, per_decade: 10 });
    let size = get_usize(flags, "size")?;

    let factory = ExampleFactory::<f64>::new(example, size, 0).map_err(|e| e.to_string())?;
    let problem = factory.problem(eps, seed).map_err(|e| e.to_string())?;
    let axis = grid_spec.axis();
    let grid = grid_2d_log(
        axis[0],
        *axis.last().unwrap(),
        axis.len(),
        axis[0],
        *axis.last().unwrap(),
        axis.len(),
    );
    let scan_solver = SolverOptions { tol_elastic_net: 1e-8, tol_splitting: 1e-7, ..Default::default() };
    let cert = certify_value_function(&problem.model, &grid, gamma, &scan_solver)
        .map_err(|e| e.to_string())?;
    write_landscape(&cert.samples, &dir).map_err(|e| e.to_string())?;
    println!(
        "{} grid points; monotonicity violations {}, concavity violations {}, Psi<=Phi violations {}",
        cert.samples.len(),
        cert.monotonicity_violations.len(),
        cert.concavity_violations.len(),
        cert.criterion_order_violations.len()
    );
    println!("landscape written to {}", dir.display());
    Ok(())
}

fn cmd_certify(flags: &Flags) -> Result<(), String> {
    let seed = get_list_u64(flags, "seed")?.map(|v| v[0]).unwrap_or(7);
    let points = get_usize(flags, "points")?.unwrap_or(20);
    let out: Option<PathBuf> = flags.get("out").map(PathBuf::from);
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // monotonicity/concavity grids: benchmark example 2 and a quadratic toy
    let ex2 = ExampleFactory::<f64>::new(ExampleId::ElasticNetDeconvolution, None, 0)
        .map_err(|e| e.to_string())?;
    let problem = ex2.problem(5e-3, seed).map_err(|e| e.to_string())?;
    let grid = grid_2d_log(1e-8, 1e0, 10, 1e-8, 1e0, 10);
    let solver = SolverOptions { tol_elastic_net: 1e-8, ..Default::default() };
    let cert = certify_value_function(&problem.model, &grid, 5.0, &solver)
        .map_err(|e| e.to_string())?;
    check(
        "value function grid (deconvolution example)",
        cert.is_clean(),
        format!(
            "{} points, {} monotonicity / {} concavity / {} Psi<=Phi violations",
            cert.samples.len(),
            cert.monotonicity_violations.len(),
            cert.concavity_violations.len(),
            cert.criterion_order_violations.len()
        ),
    );
    if let Some(dir) = &out {
        write_landscape(&cert.samples, dir).map_err(|e| e.to_string())?;
    }

    let toy = quadratic_toy::<f64>(12, seed);
    let toy_grid = grid_2d_log(1e-8, 1e0, 20, 1e-8, 1e0, 20);
    let toy_cert = certify_value_function(&toy.model, &toy_grid, 5.0, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    check(
        "value function grid (quadratic toy)",
        toy_cert.is_clean(),
        format!(
            "{} points, {} monotonicity / {} concavity violations",
            toy_cert.samples.len(),
            toy_cert.monotonicity_violations.len(),
            toy_cert.concavity_violations.len()
        ),
    );

    // derivative sandwich on all three experiments
    for (id, eps, lo, hi) in [
        (ExampleId::H1TvDeconvolution, 5e-3, 1e-6, 1e-1),
        (ExampleId::ElasticNetDeconvolution, 5e-3, 1e-6, 1e-1),
        (ExampleId::ElasticNetDeblurring, 1e-2, 1e-4, 1e-1),
    ] {
        let factory = ExampleFactory::<f64>::new(id, None, 0).map_err(|e| e.to_string())?;
        let problem = factory.problem(eps, seed).map_err(|e| e.to_string())?;
        let etas = random_eta_points(points, lo, hi, 2, seed + id.index() as u64);
        let solver = SolverOptions {
            tol_elastic_net: 1e-8,
            tol_splitting: 1e-10,
            max_iter: 300_000,
            ..Default::default()
        };
        let checks = sandwich_check(&problem.model, &etas, 1e-4, 1e-2, &solver)
            .map_err(|e| e.to_string())?;
        let bad = checks.iter().filter(|c| !c.ok).count();
        check(
            &format!("derivative sandwich (example {})", id.index()),
            bad == 0,
            format!("{} of {} points within tolerance", checks.len() - bad, checks.len()),
        );
    }

    // small-parameter asymptotics on the quadratic toy
    let probes = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
    let asym = asymptotics_check(&toy, &probes, 1e-4).map_err(|e| e.to_string())?;
    let decaying = asym.value_gaps.windows(2).all(|w| w[1] <= w[0] * 1.01);
    let grad_ok = *asym.scaled_gradients.last().unwrap() <= 1e-6;
    check(
        "small-parameter asymptotics (quadratic toy)",
        decaying && grad_ok,
        format!(
            "value gap {:.2e} -> {:.2e}, final t*dF = {:.2e}",
            asym.value_gaps[0],
            asym.value_gaps.last().unwrap(),
            asym.scaled_gradients.last().unwrap()
        ),
    );

    if all_ok {
        println!("certification suite passed");
        Ok(())
    } else {
        Err("certification suite reported violations".into())
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some((command, rest)) = args.split_first() else {
        eprintln!("{}", usage());
        return ExitCode::FAILURE;
    };
    let mut flags = match parse_flags(rest) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}\n{}", usage());
            return ExitCode::FAILURE;
        }
    };
    if let Some(path) = flags.get("config").cloned() {
        if let Err(e) = merge_config_file(&mut flags, Path::new(&path)) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match command.as_str() {
        "run" => cmd_run(&flags),
        "landscape" => cmd_landscape(&flags),
        "certify" => cmd_certify(&flags),
        "help" | "--help" | "-h" => {
            println!("{}", usage());
            Ok(())
        }
        other => Err(format!("unknown command '{other}'\n{}", usage())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
