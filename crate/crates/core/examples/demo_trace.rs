use safeopt_core::benchmarks::{AnalyticPlant, DemoFunction};
use safeopt_core::gp::KernelSpec;
use safeopt_core::safe_bo::{AlgoConfig, AxisSpec, Campaign, CampaignSetup, ParameterGrid, PriorPolicy};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let [to, lo, tc, lc] = args[..] else { panic!() };
    let obj = KernelSpec::new(0.0, to, vec![lo], 0.01 * to.sqrt()).unwrap();
    let con = KernelSpec::new(4.0, tc, vec![lc], 0.01 * tc.sqrt()).unwrap();
    let grid = ParameterGrid::uniform(&[AxisSpec::new(0.0, 10.0, 200)]).unwrap();
    let mut plant = AnalyticPlant::noise_free(DemoFunction::Demo1);
    let setup = CampaignSetup { grid, objective_spec: obj, constraint_spec: con, config: AlgoConfig::safe_opt(4.0, 30), init_points: vec![vec![1.8], vec![2.0], vec![2.2]], prior: PriorPolicy::default() };
    let mut c = Campaign::initialize(&mut plant, setup).unwrap();
    while !c.is_finished() {
        let sel = c.plan().unwrap();
        let s = c.state();
        let m = s.minimizer_mask.iter().filter(|&&b| b).count();
        let e = s.expander_mask.iter().filter(|&&b| b).count();
        let (lo_i, hi_i) = (s.safe_mask.iter().position(|&b| b).unwrap(), s.safe_mask.iter().rposition(|&b| b).unwrap());
        let r = c.commit(&mut plant, sel).unwrap();
        println!("it {:2} p={:.3} O={:8.2} C={:.3} safe=[{:.2},{:.2}] |M|={m} |E|={e} inM={}", r.iteration, c.state().grid.point(sel)[0], r.measurement.objective, r.measurement.constraint, c.state().grid.point(lo_i)[0], c.state().grid.point(hi_i)[0], c.state().minimizer_mask[sel]);
    }
}
