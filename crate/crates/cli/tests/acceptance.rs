//! Acceptance suite: one PASS/FAIL line per criterion, with the raw numbers.
//!
//! Runs the criteria in order on the calling thread (the library still uses
//! the global rayon pool), so the timing bounds measure one criterion at a
//! time. Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 4 8`. Exits nonzero if any criterion fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use qaoa_gmvp::bench::{run_bench, run_cell, CellRecord, Mode};
use qaoa_gmvp::gmvp::{feasible_indices, GmvpInstance};
use qaoa_gmvp::landscape::scan_pair;
use qaoa_gmvp::noise::thermal_kraus;
use qaoa_gmvp::optim::{Objective, OptimizerSpec};
use qaoa_gmvp::qaoa::{QaoaParams, QaoaProblem};
use qaoa_gmvp::rng::RngStream;
use qaoa_gmvp::sim::{apply_kraus_trajectory, StateVector};
use qaoa_gmvp_cli::{bench_config, cmd_bench, default_config};

const PI: f64 = std::f64::consts::PI;
const THETA_STAR: [f64; 4] = [0.0, 0.0, 0.14286, 0.85714];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn random_theta(rng: &mut RngStream) -> Vec<f64> {
    vec![
        rng.uniform_in(0.0, 2.0 * PI),
        rng.uniform_in(0.0, 2.0 * PI),
        rng.uniform_in(0.0, PI),
        rng.uniform_in(0.0, PI),
    ]
}

fn simulator_exactness() -> Outcome {
    let problem = QaoaProblem::default_problem();
    let costs = oracle::cost_table(problem.instance().sigma(), 4, 3, 3);
    let mut rng = RngStream::new(101);
    let thetas: Vec<Vec<f64>> = (0..25).map(|_| random_theta(&mut rng)).collect();

    let start = Instant::now();
    let states: Vec<StateVector> = thetas
        .iter()
        .map(|t| problem.final_state(&QaoaParams::from_flat(t).unwrap()).unwrap())
        .collect();
    let values: Vec<f64> = thetas.iter().map(|t| problem.exact_cost(t).unwrap()).collect();
    let sim_time = start.elapsed();

    let (mut amp_err, mut value_err) = (0.0f64, 0.0f64);
    for ((theta, state), value) in thetas.iter().zip(&states).zip(&values) {
        let reference = oracle::final_state(&costs, 4, 3, 3, theta);
        for (a, b) in state.amplitudes().iter().zip(&reference) {
            amp_err = amp_err.max((a - b).norm());
        }
        value_err = value_err.max((value - oracle::expectation(&reference, &costs)).abs());
    }
    let total = start.elapsed();
    outcome(
        amp_err < 1e-10 && value_err < 1e-10 && total < Duration::from_secs(5),
        format!(
            "max amplitude error {amp_err:.2e}, max cost error {value_err:.2e} (< 1e-10); simulator {:.2} s, with oracle {:.2} s (< 5 s)",
            secs(sim_time),
            secs(total),
        ),
    )
}

fn hard_constraint() -> Outcome {
    let problem = QaoaProblem::default_problem();
    let mut rng = RngStream::new(202);
    let mut worst = 0.0f64;
    let mut total = 0.0;
    for _ in 0..100 {
        let state = problem
            .final_state(&QaoaParams::from_flat(&random_theta(&mut rng)).unwrap())
            .unwrap();
        let leak = oracle::leakage(state.amplitudes(), 3);
        worst = worst.max(leak);
        total += leak;
    }
    let at_star = oracle::leakage(
        problem
            .final_state(&QaoaParams::from_flat(&THETA_STAR).unwrap())
            .unwrap()
            .amplitudes(),
        3,
    );
    outcome(
        worst < 1e-10,
        format!(
            "max mass outside weight 3 {worst:.3e}, mean {:.3e}, at reference angles {at_star:.3e} (< 1e-10); \
             the three-qubit mixer term couples |100> with |011>",
            total / 100.0
        ),
    )
}

fn gamma1_inactivity() -> Outcome {
    let problem = QaoaProblem::default_problem();
    let base = problem.exact_cost(&THETA_STAR).unwrap();
    let mut spread = 0.0f64;
    for k in 0..50 {
        let mut theta = THETA_STAR;
        theta[0] = 2.0 * PI * k as f64 / 49.0;
        spread = spread.max((problem.exact_cost(&theta).unwrap() - base).abs());
    }
    outcome(
        spread < 1e-12,
        format!("max deviation {spread:.2e} from {base:.12} over 50 points (< 1e-12)"),
    )
}

/// Trajectory means and standard errors of (ρ₀₀, Re ρ₀₁, Im ρ₀₁, ρ₁₁) after
/// `steps` channel applications of length `d`.
fn trajectory_rho(t1: f64, t2: f64, d: f64, steps: usize, n: usize, psi: [C; 2], seed: u64) -> ([f64; 4], [f64; 4]) {
    let kraus = thermal_kraus(t1, t2, d).unwrap();
    let root = RngStream::new(seed);
    let (mut sum, mut sq) = ([0.0; 4], [0.0; 4]);
    for k in 0..n {
        let mut rng = root.child(k as u64);
        let mut s = StateVector::from_amplitudes(psi.to_vec()).unwrap();
        for _ in 0..steps {
            apply_kraus_trajectory(&mut s, 0, &kraus, &mut rng).unwrap();
        }
        let (a0, a1) = (s.amplitudes()[0], s.amplitudes()[1]);
        let c01 = a0 * a1.conj();
        let x = [a0.norm_sqr(), c01.re, c01.im, a1.norm_sqr()];
        for i in 0..4 {
            sum[i] += x[i];
            sq[i] += x[i] * x[i];
        }
    }
    let nf = n as f64;
    let mean = sum.map(|s| s / nf);
    let se = std::array::from_fn(|i| ((sq[i] / nf - mean[i] * mean[i]).max(0.0) / (nf - 1.0)).sqrt());
    (mean, se)
}

fn thermal_fidelity() -> Outcome {
    let start = Instant::now();
    let psi = [C::new(0.6, 0.0), C::from_polar(0.8, 0.7)];
    let rho0 = [
        [psi[0] * psi[0].conj(), psi[0] * psi[1].conj()],
        [psi[1] * psi[0].conj(), psi[1] * psi[1].conj()],
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t1, t2) in [("A", 380e-6f64, 400e-6), ("B", 80e-6, 100e-6)] {
        for d in [50e-9, 150e-9] {
            // repeat the gate-length channel up to a quarter of T1
            let steps = (t1 / 4.0 / d).round() as usize;
            let (mean, se) = trajectory_rho(t1, t2, d, steps, 10_000, psi, 4000 + steps as u64);
            let r = oracle::relax(rho0, t1, t2, steps as f64 * d);
            let expected = [r[0][0].re, r[0][1].re, r[0][1].im, r[1][1].re];
            let mut z = 0.0f64;
            for i in 0..4 {
                let dev = (mean[i] - expected[i]).abs() / se[i];
                z = z.max(dev);
            }
            pass &= z <= 3.0;
            parts.push(format!("{name}/{:.0}ns×{steps} {z:.2}", d * 1e9));
        }
    }
    let t = start.elapsed();
    outcome(
        pass && t < Duration::from_secs(10),
        format!(
            "max |deviation|/SE per case: {} (≤ 3); {:.2} s (< 10 s)",
            parts.join(", "),
            secs(t)
        ),
    )
}

fn optimizer_testbed() -> Outcome {
    let sphere = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum::<f64>());
    let rosen = |x: &[f64]| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let rastrigin = |x: &[f64]| Ok(20.0 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>());
    let da = OptimizerSpec::DualAnnealing {
        q_v: 2.62,
        q_a: -5.0,
        t0: 5230.0,
        maxfev: 5000,
        local_polish: true,
    };
    let run = |spec: &OptimizerSpec, f: &dyn Fn(&[f64]) -> qaoa_gmvp::Result<f64>, b: f64, x0: &[f64], seed| {
        let mut obj = Objective::new(vec![(-b, b); 2], f).unwrap();
        spec.run(&mut obj, x0, seed).unwrap()
    };
    let c = run(&OptimizerSpec::cobyla(), &sphere, 5.0, &[1.3, -2.2], 0);
    let p = run(&OptimizerSpec::powell(), &rosen, 5.0, &[-1.2, 1.0], 0);
    let d = run(&da, &rastrigin, 5.12, &[3.0, -4.0], 7);
    let deterministic = c == run(&OptimizerSpec::cobyla(), &sphere, 5.0, &[1.3, -2.2], 0)
        && p == run(&OptimizerSpec::powell(), &rosen, 5.0, &[-1.2, 1.0], 0)
        && d == run(&da, &rastrigin, 5.12, &[3.0, -4.0], 7);
    outcome(
        c.best_value < 1e-8 && p.best_value < 1e-6 && p.nfev <= 2000 && d.best_value < 1e-3 && d.nfev <= 5000 && deterministic,
        format!(
            "cobyla sphere {:.2e} ({} evals); powell rosenbrock {:.2e} ({} evals); dual annealing rastrigin {:.2e} ({} evals); reruns identical: {deterministic}",
            c.best_value, c.nfev, p.best_value, p.nfev, d.best_value, d.nfev
        ),
    )
}

/// Noiseless cells in both modes for every optimizer of the default
/// configuration, shared by the filtering and robustness criteria.
fn noiseless_cells() -> Vec<CellRecord> {
    let config = default_config();
    let bench = bench_config(&config, &["noiseless".into()], &Mode::both(), None, None).unwrap();
    run_bench(&bench).unwrap().cells
}

fn find<'a>(cells: &'a [CellRecord], opt: &str, profile: &str, mode: Mode) -> &'a CellRecord {
    cells
        .iter()
        .find(|c| c.optimizer == opt && c.profile == profile && c.mode == mode)
        .expect("cell present")
}

fn filtering_economy(cells: &[CellRecord]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for o in ["cobyla", "powell"] {
        let s = find(cells, o, "noiseless", Mode::Standard).mean_nfev;
        let f = find(cells, o, "noiseless", Mode::Filtered).mean_nfev;
        pass &= f < s;
        parts.push(format!("{o} filtered {f:.1} vs standard {s:.1}"));
    }
    outcome(pass, format!("mean nfev over 10 runs: {}", parts.join("; ")))
}

fn sample_std(cell: &CellRecord) -> f64 {
    let n = cell.runs.len() as f64;
    let var = cell
        .runs
        .iter()
        .map(|r| (r.best_value - cell.mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    var.sqrt()
}

fn robustness_ordering(noiseless: &[CellRecord]) -> Outcome {
    let config = default_config();
    let bench = bench_config(&config, &["thermal_a".into()], &[Mode::Standard], None, None).unwrap();
    let thermal: Vec<CellRecord> = bench
        .optimizers
        .iter()
        .map(|o| run_cell(&bench, o, &bench.profiles[0], Mode::Standard).unwrap())
        .collect();
    let names = ["cobyla", "powell", "dual_annealing"];
    let means: Vec<f64> = names
        .iter()
        .map(|o| find(noiseless, o, "noiseless", Mode::Standard).mean)
        .collect();
    let stds: Vec<f64> = names
        .iter()
        .map(|o| sample_std(find(&thermal, o, "thermal_a", Mode::Standard)))
        .collect();
    let min_std = stds.iter().copied().fold(f64::INFINITY, f64::min);
    let da_mean_ok = means[..2].iter().all(|&m| means[2] <= m + 1e-9);
    let da_std_ok = stds[2] <= 1.5 * min_std;
    let fmt = |v: &[f64]| {
        names
            .iter()
            .zip(v)
            .map(|(n, x)| format!("{n} {x:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        da_mean_ok && da_std_ok,
        format!(
            "noiseless mean: {}; thermal_a std: {} (dual annealing ≤ 1.5 × {min_std:.6})",
            fmt(&means),
            fmt(&stds)
        ),
    )
}

fn ruggedness_progression() -> Outcome {
    let start = Instant::now();
    let config = default_config();
    let section = config.landscape.as_ref().unwrap();
    let roughness = |name: &str| {
        let profile = config.profile(name).unwrap();
        scan_pair(&config.problem, (2, 3), 30, &section.theta_star, &profile, section.seed)
            .unwrap()
            .roughness()
    };
    let r: Vec<f64> = ["sampling", "thermal_a", "thermal_b"]
        .into_iter()
        .map(roughness)
        .collect();
    let t = start.elapsed();
    // context: the same metric on the exact grid, with no estimator noise
    let exact = roughness("noiseless");
    outcome(
        r[2] > r[1] && r[1] > r[0] && t < Duration::from_secs(600),
        format!(
            "beta1-beta2 roughness at 30x30: thermal_b {:.6}, thermal_a {:.6}, sampling {:.6}, required in decreasing order (noiseless {exact:.6}); {:.0} s on {} worker(s) (< 600 s)",
            r[2],
            r[1],
            r[0],
            secs(t),
            rayon::current_num_threads()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut exact = true;
    let mut oracle_gap = 0.0f64;
    for seed in 0..20 {
        let inst = GmvpInstance::random_instance(1000 + seed, 4, 3, 3).unwrap();
        let table = inst.cost_table();
        let feasible = feasible_indices(4, 3, 3);
        let (index, value) = inst.brute_force_optimum();
        let min = feasible.iter().map(|&j| table[j]).fold(f64::INFINITY, f64::min);
        exact &= feasible.len() == 220 && table.len() == 4096 && value == min && table[index] == min;
        // many indices decode to the same weights, so compare values, not argmins
        let reference = oracle::cost_table(inst.sigma(), 4, 3, 3);
        let ref_min = feasible.iter().map(|&j| reference[j]).fold(f64::INFINITY, f64::min);
        oracle_gap = oracle_gap
            .max((ref_min - value).abs())
            .max((reference[index] - ref_min).abs());
    }
    outcome(
        exact && oracle_gap < 1e-14,
        format!("20 instances: brute force == minimum of the 220 feasible table entries: {exact}; independent table gap {oracle_gap:.1e} (< 1e-14)"),
    )
}

fn reproducibility() -> Outcome {
    let config = default_config();
    let mut bench = bench_config(&config, &[], &Mode::both(), Some(2), Some(11)).unwrap();
    for o in &mut bench.optimizers {
        *o = match o.clone() {
            OptimizerSpec::Cobyla { rho_beg, rho_end, .. } => OptimizerSpec::Cobyla {
                rho_beg,
                rho_end,
                maxfev: 6,
            },
            OptimizerSpec::Powell { xtol, ftol, .. } => OptimizerSpec::Powell { xtol, ftol, maxfev: 6 },
            OptimizerSpec::DualAnnealing {
                q_v,
                q_a,
                t0,
                local_polish,
                ..
            } => OptimizerSpec::DualAnnealing {
                q_v,
                q_a,
                t0,
                maxfev: 6,
                local_polish,
            },
        };
    }
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_bench(&bench, &a).unwrap();
    cmd_bench(&bench, &b).unwrap();
    let mut same = true;
    let mut sizes = Vec::new();
    for f in ["summary.csv", "report.json"] {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        same &= x == y;
        sizes.push(format!("{f} {} bytes", x.len()));
    }
    outcome(
        same,
        format!(
            "24 cells x 2 runs, all four profiles: byte-identical {same} ({})",
            sizes.join(", ")
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let selected: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);

    let names = [
        "simulator exactness",
        "hard-constraint preservation",
        "gamma1 inactivity",
        "thermal channel fidelity",
        "optimizer testbed",
        "filtering economy",
        "robustness ordering",
        "ruggedness progression",
        "oracle equivalence",
        "reproducibility",
    ];
    let noiseless = (wanted(6) || wanted(7)).then(noiseless_cells);
    let mut failed = Vec::new();
    for (k, name) in names.iter().enumerate().map(|(i, n)| (i + 1, n)) {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let o = match k {
            1 => simulator_exactness(),
            2 => hard_constraint(),
            3 => gamma1_inactivity(),
            4 => thermal_fidelity(),
            5 => optimizer_testbed(),
            6 => filtering_economy(noiseless.as_ref().unwrap()),
            7 => robustness_ordering(noiseless.as_ref().unwrap()),
            8 => ruggedness_progression(),
            9 => oracle_equivalence(),
            _ => reproducibility(),
        };
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {k:>2} {name:<29} {verdict}  {} [{:.1} s]",
            o.detail,
            secs(start.elapsed())
        );
        if !o.pass {
            failed.push(k);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
