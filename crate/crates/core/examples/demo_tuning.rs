//! Sweeps demo kernel hyperparameters and reports safety and convergence
//! statistics over seeded campaigns.
//!
//! Usage: `cargo run --release --example demo_tuning -- θ_o l_o θ_c l_c`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safeopt_core::benchmarks::{AnalyticPlant, DemoFunction};
use safeopt_core::gp::KernelSpec;
use safeopt_core::safe_bo::{run_campaign, AlgoConfig, AxisSpec, CampaignSetup, ParameterGrid, PriorPolicy};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let [to, lo, tc, lc] = args[..] else {
        panic!("expected θ_o l_o θ_c l_c");
    };
    let obj = KernelSpec::new(0.0, to, vec![lo], 0.01 * to.sqrt()).unwrap();
    let con = KernelSpec::new(4.0, tc, vec![lc], 0.01 * tc.sqrt()).unwrap();
    for (function, upper, count, iters) in [(DemoFunction::Demo1, 10.0, 200, 30), (DemoFunction::Demo2, 16.0, 320, 40)] {
        for noisy in [false, true] {
            let grid = ParameterGrid::uniform(&[AxisSpec::new(0.0, upper, count)]).unwrap();
            let target = constrained_minimizer(function, 10.0);
            let mut violations = 0;
            let mut evals = 0;
            let mut near = 0;
            let mut in_second = 0;
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let init: Vec<Vec<f64>> = (0..3).map(|_| vec![rng.random_range(1.5..2.5)]).collect();
                let (so, sc) = if noisy { (obj.noise_std, con.noise_std) } else { (0.0, 0.0) };
                let mut plant = AnalyticPlant::new(function, so, sc, seed);
                let setup = CampaignSetup {
                    grid: grid.clone(),
                    objective_spec: obj.clone(),
                    constraint_spec: con.clone(),
                    config: AlgoConfig::safe_opt(4.0, iters),
                    init_points: init,
                    prior: PriorPolicy::default(),
                };
                let out = run_campaign(&mut plant, setup).unwrap();
                for e in &out.history {
                    let (_, c) = function.eval(e.point[0], None).unwrap();
                    evals += 1;
                    if c > 4.0 {
                        violations += 1;
                    }
                    if (12.5..=15.0).contains(&e.point[0]) {
                        in_second += 1;
                    }
                }
                let best = out.best.unwrap().point[0];
                if std::env::var("VERBOSE").is_ok() { eprintln!("seed {seed}: best {best:.3} max p {:.3}", out.history.iter().map(|e| e.point[0]).fold(0.0, f64::max)); }
                if (best - target).abs() <= 2.0 * grid.spacing()[0] + 1e-9 {
                    near += 1;
                }
            }
            println!(
                "{function:?} noisy={noisy}: violations {violations}/{evals}, best near {target:.3} in {near}/20, evals in [12.5,15]: {in_second}"
            );
        }
    }
}

fn constrained_minimizer(function: DemoFunction, upper: f64) -> f64 {
    (0..=1_000_000)
        .map(|i| upper * i as f64 / 1e6)
        .filter_map(|p| function.eval(p, None).ok().filter(|(_, c)| *c < 4.0).map(|(o, _)| (p, o)))
        .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
        .0
}
