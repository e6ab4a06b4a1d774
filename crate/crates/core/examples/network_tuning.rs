//! Random search over single-stage combustor parameters.
//!
//! Scores each candidate on: one unstable mode near 200 Hz without control,
//! a mode near 400 Hz that some controller setting destabilizes, and the
//! size and depth of the stable region of the (n, τ) map.
//!
//! Usage:
//!   cargo run --release --example network_tuning -- search <trials> <seed>
//!   cargo run --release --example network_tuning -- refine <trials> <seed> [p1,p2,...]
//!   cargo run --release --example network_tuning -- report [config.toml]
//!
//! `refine` hill-climbs from the shipped parameters (or the given vector) and
//! only accepts candidates whose 2-D safeOpt campaign on the sim-2d preset
//! stays below the voltage threshold and ends on an eigen-stable point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safeopt_core::benchmarks::load_preset;
use safeopt_core::network::*;
use safeopt_core::safe_bo::{run_campaign, AlgoConfig, CampaignSetup, ParameterGrid, PriorPolicy};

const N_GRID: [f64; 11] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5];

fn tau_grid() -> Vec<f64> {
    (0..14).map(|k| (0.5 + 0.5 * k as f64) * 1e-3).collect()
}

/// Parameters of the shipped single-stage config, in [`set_elements`] order.
const SHIPPED: [f64; 15] =
    [
        0.7889, 0.1715, 0.1372, 0.426, 1284.0, 0.0029, 672.3, 0.0009922, 2.0, 400.0, 735.9, 0.5325, -0.7703, 0.001375,
        0.1097,
    ];

/// Rounds a duct length to whole samples at 10 kHz.
fn snap(length: f64, c: f64) -> f64 {
    let cell = c / 10_000.0;
    ((length / cell).round().max(1.0) * cell * 1e6).round() / 1e6
}

fn set_elements(c: &mut NetworkConfig, p: &[f64]) {
    let [l1, l2, l3, l4, t_d, tau_f, w_b, orifice, zeta, cut_u, cut_d, r_u, r_d, a_up, sat] = p.try_into().unwrap();
    c.upstream_reflection = r_u;
    c.downstream_reflection = r_d;
    c.upstream_cutoff = Some(cut_u);
    c.downstream_cutoff = Some(cut_d);
    let c_hot = (343.0 * (t_d / 300.0f64).sqrt()).round();
    let rho_hot = (1.2 * 300.0 / t_d * 1e4).round() / 1e4;
    c.elements = vec![
        ElementConfig::Duct { length: snap(l1, 343.0), sound_speed: 343.0, density: 1.2 },
        ElementConfig::Loudspeaker { gain: -0.6, clip_limit: 5.0 },
        ElementConfig::Duct { length: snap(l2, 343.0), sound_speed: 343.0, density: 1.2 },
        ElementConfig::AreaJump {
            area_upstream: a_up,
            area_downstream: 0.0038,
            area_orifice: orifice.min(a_up),
            equivalent_length: 0.02,
            loss_coefficient: zeta,
            mean_orifice_velocity: 20.0,
        },
        ElementConfig::Duct { length: snap(l3, 343.0), sound_speed: 343.0, density: 1.2 },
        ElementConfig::Flame {
            temperature_upstream: 300.0,
            temperature_downstream: t_d,
            rho_c_ratio: None,
            ftf_delay: tau_f,
            ftf_bandwidth: w_b,
            saturation_scale: sat,
        },
        ElementConfig::Duct { length: snap(l4, c_hot), sound_speed: c_hot, density: rho_hot },
    ];
}

struct Score {
    value: f64,
    summary: String,
}

fn score(c: &NetworkConfig) -> Option<Score> {
    let m = assemble_network(c).ok()?;
    let open = eigenmodes(&m.with_controller(0.0, 1e-3).ok()?).ok()?;
    let unstable: Vec<&Mode> = open.iter().filter(|m| m.growth_rate > 0.0).collect();
    if unstable.len() != 1 {
        return None;
    }
    let main = unstable[0];
    if !(192.0..=208.0).contains(&main.frequency) || !(8.0..=60.0).contains(&main.growth_rate) {
        return None;
    }
    let second = dominant_mode_in(&open, 370.0, 430.0)?;
    let map = eigenvalue_map(&m, &N_GRID[1..], &tau_grid(), 400).ok()?;
    let second_flips = map
        .iter()
        .any(|e| dominant_mode_in(&e.modes, 370.0, 430.0).is_some_and(|m| m.growth_rate > 0.0));
    let stable: Vec<&EigenMapEntry> = map.iter().filter(|e| e.is_stable()).collect();
    if stable.is_empty() {
        return None;
    }
    let depth = stable.iter().map(|e| -e.max_growth()).fold(0.0, f64::max);
    let fraction = stable.len() as f64 / map.len() as f64;
    // favour a pocket at moderate-to-high gain
    let centre = stable.iter().map(|e| e.n).sum::<f64>() / stable.len() as f64;
    let value = fraction * 10.0 + depth.min(30.0) / 10.0 + if second_flips { 2.0 } else { 0.0 }
        - (centre - 1.6).abs() * 2.0;
    Some(Score {
        value,
        summary: format!(
            "main {:.1} Hz / {:.1} 1/s, second {:.1} Hz / {:.1} 1/s (flips {second_flips}), stable {}/{} depth {:.1} centre n {:.2}",
            main.frequency,
            main.growth_rate,
            second.frequency,
            second.growth_rate,
            stable.len(),
            map.len(),
            depth,
            centre
        ),
    })
}

fn search(trials: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges: [(f64, f64); 14] = [
        (0.3, 1.2),
        (0.05, 0.3),
        (0.03, 0.15),
        (0.4, 1.5),
        (1300.0, 2100.0),
        (0.5e-3, 4e-3),
        (500.0, 4000.0),
        (0.0006, 0.003),
        (0.3, 3.0),
        (100.0, 1000.0),
        (100.0, 1000.0),
        (0.6, 1.0),
        (-1.0, -0.5),
        (0.001, 0.02),
    ];
    let base = NetworkConfig::shipped();
    let mut best: Option<(f64, NetworkConfig)> = None;
    for t in 0..trials {
        let mut p: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        p.push(0.3);
        let mut c = base.clone();
        set_elements(&mut c, &p);
        if let Some(s) = score(&c) {
            if best.as_ref().is_none_or(|(b, _)| s.value > *b) {
                println!("trial {t}: score {:.2}  {}", s.value, s.summary);
                println!("  params {p:?}");
                best = Some((s.value, c));
            }
        }
    }
    if let Some((_, c)) = best {
        println!("{}", c.to_toml());
    }
}

/// Eleven initializers of the 2-D simulator campaign.
fn campaign_initializers() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.5],
        vec![0.4, 0.5],
        vec![0.8, 0.5],
        vec![0.0, 7.0],
        vec![0.4, 7.0],
        vec![0.8, 7.0],
        vec![0.0, 3.75],
        vec![0.25, 3.0],
        vec![0.25, 4.5],
        vec![0.5, 3.5],
        vec![0.75, 3.75],
    ]
}

/// Unsafe evaluations and best-point growth rate of one sim-2d safeOpt campaign.
fn campaign_check(c: &NetworkConfig, seed: u64) -> Option<(usize, f64, f64)> {
    let preset = load_preset("sim-2d").ok()?;
    let mut plant = NetworkPlant::new(c.clone(), None, seed).ok()?;
    let setup = CampaignSetup {
        grid: ParameterGrid::uniform(&preset.axes).ok()?,
        objective_spec: preset.objective,
        constraint_spec: preset.constraint,
        config: AlgoConfig::safe_opt(preset.safety_threshold, 34),
        init_points: campaign_initializers(),
        prior: PriorPolicy::default(),
    };
    let out = run_campaign(&mut plant, setup).ok()?;
    let unsafe_evals = out.history.iter().filter(|e| e.constraint > preset.safety_threshold).count();
    let worst = out.history.iter().map(|e| e.constraint).fold(0.0, f64::max);
    let best = out.best?;
    let m = plant.model().with_controller(best.point[0], best.point[1] * 1e-3).ok()?;
    Some((unsafe_evals, worst, eigenmodes(&m).ok()?[0].growth_rate))
}

fn refine(trials: usize, seed: u64, start: Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let evaluate = |p: &[f64]| -> Option<(f64, String)> {
        let mut c = NetworkConfig::shipped();
        set_elements(&mut c, p);
        let s = score(&c)?;
        let mut margin = f64::INFINITY;
        for seed in 0..2 {
            let (unsafe_evals, worst, growth) = campaign_check(&c, seed)?;
            if unsafe_evals > 0 || growth >= 0.0 {
                return None;
            }
            margin = margin.min(1.0 - worst);
        }
        // headroom below the threshold counts as much as the map shape
        Some((s.value + 10.0 * margin, format!("{} margin {margin:.2}", s.summary)))
    };
    let mut best_p = start;
    let mut best = evaluate(&best_p);
    println!("start: {:?}", best.as_ref().map(|b| &b.1));
    for t in 0..trials {
        let p: Vec<f64> = best_p
            .iter()
            .map(|&v| if rng.random_bool(0.3) { v * rng.random_range(0.85..1.15) } else { v })
            .collect();
        if p[11].abs() > 1.0 || p[12].abs() > 1.0 || p[7] > p[13] {
            continue;
        }
        if let Some(s) = evaluate(&p) {
            if best.as_ref().is_none_or(|b| s.0 > b.0) {
                println!("trial {t}: score {:.2}  {}", s.0, s.1);
                println!("  params {p:?}");
                best = Some(s);
                best_p = p;
            }
        }
    }
    let mut c = NetworkConfig::shipped();
    set_elements(&mut c, &best_p);
    println!("{}", c.to_toml());
}

fn report(c: &NetworkConfig) {
    let m = assemble_network(c).unwrap();
    println!("state dim {}", m.state_dim());
    for md in eigenmodes(&m).unwrap().iter().filter(|m| m.frequency < 1000.0).take(8) {
        println!("{:8.2} Hz  {:8.2} 1/s", md.frequency, md.growth_rate);
    }
    let taus = tau_grid();
    print!("n\\tau ");
    for t in &taus {
        print!("{:>6.1}", t * 1e3);
    }
    println!();
    for &n in &N_GRID {
        print!("{n:5.2} ");
        for e in eigenvalue_map(&m, &[n], &taus, 1).unwrap() {
            print!("{:>6.1}", e.max_growth());
        }
        println!();
    }
    let open = simulate(&m, m.duration, 1).unwrap();
    println!("uncontrolled: rms {:.1} Pa", open.rms_pressure);
    for seed in 0..2 {
        println!("campaign seed {seed}: (unsafe, max V, best growth) {:?}", campaign_check(c, seed));
    }
    for &n in &N_GRID[1..] {
        let mut line = format!("n={n:.1}:");
        for &t in &taus {
            let r = simulate(&m.with_controller(n, t).unwrap(), m.duration, 1).unwrap();
            line += &format!(" {:.0}/{:.2}", r.rms_pressure, r.rms_voltage);
        }
        println!("{line}");
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("search") => {
            let trials = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(500);
            let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
            search(trials, seed);
        }
        Some("refine") => {
            let trials = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
            let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
            let start = match args.get(3) {
                Some(list) => list.split(',').map(|v| v.trim().parse().expect("number")).collect(),
                None => SHIPPED.to_vec(),
            };
            refine(trials, seed, start);
        }
        Some("report") => {
            let c = match args.get(1) {
                Some(p) => NetworkConfig::load(std::path::Path::new(p)).unwrap(),
                None => NetworkConfig::shipped(),
            };
            report(&c);
        }
        _ => eprintln!("usage: network_tuning search <trials> <seed> | refine <trials> <seed> [params] | report [config.toml]"),
    }
}
