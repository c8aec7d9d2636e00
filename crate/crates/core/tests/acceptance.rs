//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints its `ACCEPTANCE <k> PASS|FAIL` line. Exits non-zero if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use adasense::asymptotics::{
    check_adasense_sparsity, check_bmac_lower_bound, check_single_phase_slope, energies_non_increasing,
    ratios_non_decreasing, sparse_energy_spread, PreambleRule, Tolerances,
};
use adasense::base::{
    dbm_to_watts, inverse_q, log_q_function, q_function, NoiseProfile, ReliabilityTarget, ScenarioParams,
};
use adasense::cli::log_space;
use adasense::montecarlo::{bmac_stopping_time_test, estimate, McEstimate, McSettings};
use adasense::schemes::{BmacConfig, Hypothesis, PerfReport, Scheme};
use adasense::solvers::{optimize_adasense, solve_bmac, sweep, OptimizationResult, SweepRow};
use common::oracle::{asymptotic_log_q, gauss_legendre, quadrature_q};

/// Outcome of one criterion.
type Verdict = (bool, String);

struct Panel {
    label: char,
    n: usize,
    p_dbm: f64,
    alpha: f64,
    band: (f64, f64),
}

/// Reference savings bands per panel, in percent.
const PANELS: [Panel; 8] = [
    Panel { label: 'a', n: 30, p_dbm: -60.0, alpha: 1e-3, band: (60.0, 63.0) },
    Panel { label: 'b', n: 50, p_dbm: -60.0, alpha: 1e-3, band: (73.0, 76.0) },
    Panel { label: 'c', n: 30, p_dbm: -60.0, alpha: 1e-5, band: (40.0, 50.0) },
    Panel { label: 'd', n: 50, p_dbm: -60.0, alpha: 1e-5, band: (59.0, 65.0) },
    Panel { label: 'e', n: 30, p_dbm: -80.0, alpha: 1e-3, band: (42.0, 52.0) },
    Panel { label: 'f', n: 50, p_dbm: -80.0, alpha: 1e-3, band: (53.0, 62.0) },
    Panel { label: 'g', n: 30, p_dbm: -80.0, alpha: 1e-5, band: (29.0, 32.0) },
    Panel { label: 'h', n: 50, p_dbm: -80.0, alpha: 1e-5, band: (44.0, 53.0) },
];

const BAND_SLACK: f64 = 5.0;

struct Grid {
    rows: Vec<SweepRow>,
    elapsed: Duration,
}

fn grid() -> &'static Grid {
    static GRID: OnceLock<Grid> = OnceLock::new();
    GRID.get_or_init(|| {
        let start = Instant::now();
        let profile = NoiseProfile::wake_up_receiver();
        let mut scenarios = Vec::new();
        for p_dbm in [-60.0, -80.0] {
            for n in [30, 50] {
                scenarios.push(ScenarioParams::new(dbm_to_watts(p_dbm).unwrap(), 1e-10, n).unwrap());
            }
        }
        let betas = log_space(1e-10, 1e-2, 25);
        let targets: Vec<ReliabilityTarget> = [1e-3, 1e-5]
            .iter()
            .flat_map(|&a| betas.iter().map(move |&b| ReliabilityTarget::new(a, b).unwrap()))
            .collect();
        let rows = sweep(&scenarios, &profile, &targets, &Scheme::ALL).unwrap();
        Grid { rows, elapsed: start.elapsed() }
    })
}

fn panel_rows<'a>(g: &'a Grid, p: &Panel) -> Vec<&'a SweepRow> {
    let power = dbm_to_watts(p.p_dbm).unwrap();
    g.rows
        .iter()
        .filter(|r| {
            r.scenario.preamble_len() == p.n
                && r.scenario.received_power_watts() == power
                && r.target.alpha() == p.alpha
        })
        .collect()
}

/// Savings range over the sweep plus the number of cells without a value.
fn savings_range(g: &Grid, p: &Panel) -> (f64, f64, usize) {
    let rows = panel_rows(g, p);
    let ada: Vec<_> = rows.iter().filter(|r| r.scheme == Scheme::AdaSense).collect();
    let vals: Vec<f64> = ada.iter().filter_map(|r| r.savings_vs_bmac_pct).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi, ada.len() - vals.len())
}

fn panel_check(label: char) -> Verdict {
    let g = grid();
    // the full table once, with the first panel criterion
    for p in PANELS.iter().filter(|_| label == PANELS[1].label) {
        let (lo, hi, missing) = savings_range(g, p);
        println!(
            "  panel ({}) n={} P={} dBm alpha={:e}: savings {lo:.2}..{hi:.2} % (reference {}..{}, missing {missing})",
            p.label, p.n, p.p_dbm, p.alpha, p.band.0, p.band.1
        );
    }
    let p = PANELS.iter().find(|p| p.label == label).unwrap();
    let (lo, hi, missing) = savings_range(g, p);
    let (min_ok, max_ok) = (p.band.0 - BAND_SLACK, p.band.1 + BAND_SLACK);
    let runtime_ok = g.elapsed <= Duration::from_secs(30 * 60);
    let pass = missing == 0 && lo >= min_ok && hi <= max_ok && runtime_ok;
    let detail = format!(
        "panel ({label}) savings {lo:.2}..{hi:.2} % vs accepted [{min_ok}, {max_ok}], {missing} cells missing, full 8-panel grid {:.1} s",
        g.elapsed.as_secs_f64()
    );
    (pass, detail)
}

fn criterion_01_panel_b_savings() -> Verdict {
    panel_check('b')
}

fn criterion_02_panel_g_savings() -> Verdict {
    panel_check('g')
}

fn criterion_03_scheme_ordering() -> Verdict {
    let g = grid();
    let (mut ada_bmac, mut bmac_sp, mut infeasible, mut cells) = (0, 0, 0, 0);
    for cell in g.rows.chunks(3) {
        cells += 1;
        let e = |s: Scheme| cell.iter().find(|r| r.scheme == s).unwrap().result.objective_energy;
        if cell.iter().any(|r| !r.result.feasible) {
            infeasible += 1;
        }
        if e(Scheme::AdaSense) > e(Scheme::Bmac) {
            ada_bmac += 1;
        }
        if e(Scheme::Bmac) > e(Scheme::SinglePhase) {
            bmac_sp += 1;
        }
    }
    let pass = ada_bmac == 0 && bmac_sp == 0 && infeasible == 0;
    let detail = format!(
        "{cells} cells, {ada_bmac} adasense>bmac, {bmac_sp} bmac>single-phase, {infeasible} with an infeasible scheme"
    );
    (pass, detail)
}

fn within_3se(est: &McEstimate, exact: &PerfReport) -> Vec<(&'static str, f64, f64, f64, bool)> {
    let mut out = vec![
        ("p_fa", est.p_fa.value, est.p_fa.std_error, exact.p_fa, est.p_fa.covers(exact.p_fa, 3.0)),
        ("p_miss", est.p_miss.value, est.p_miss.std_error, exact.p_miss, est.p_miss.covers(exact.p_miss, 3.0)),
        ("energy", est.energy.value, est.energy.std_error, exact.energy, est.energy.covers(exact.energy, 3.0)),
    ];
    if let (Some(pc), Some(truth)) = (est.p_continue, exact.p_continue) {
        out.push(("p_c", pc.value, pc.std_error, truth, pc.covers(truth, 3.0)));
    }
    out
}

fn criterion_04_monte_carlo_matches_closed_forms() -> Verdict {
    let start = Instant::now();
    let configs = [common::moderate_single_phase(), common::moderate_bmac(), common::moderate_adasense()];
    let mut pass = true;
    for (cfg, sc, prof) in &configs {
        let exact = cfg.evaluate(sc, prof).unwrap();
        let mut probs = vec![exact.p_fa, exact.p_miss];
        probs.extend(exact.p_continue);
        let in_range = probs.iter().all(|p| (1e-3..=0.3).contains(p));
        let est = estimate(cfg, sc, prof, &McSettings::new(1_000_000, 20_240_601).unwrap()).unwrap();
        pass &= in_range;
        for (name, value, se, truth, ok) in within_3se(&est, &exact) {
            println!(
                "  {} {name}: mc {value:.6e} +- {se:.2e}, exact {truth:.6e}, z = {:+.2}",
                cfg.scheme().name(),
                (value - truth) / se
            );
            pass &= ok;
        }
        if !in_range {
            println!("  {} has a probability outside [1e-3, 0.3]: {probs:?}", cfg.scheme().name());
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(120);
    let detail = format!("3 schemes x 1e6 trials per hypothesis, all within 3 SE = {pass}, {:.1} s", elapsed.as_secs_f64());
    (pass, detail)
}

fn criterion_05_bmac_stopping_time_law() -> Verdict {
    let (sc, prof) = common::moderate_scenario(20, 0.3);
    let p_r = 4e-5;
    let sigma = prof.noise_variance(p_r).unwrap().sqrt();
    // each idle sample passes with probability 0.8, so about 14 bins survive merging
    let cfg = BmacConfig { n: 20, receiver_power_watts: p_r, threshold: sigma * inverse_q(0.8).unwrap() };
    let gof = bmac_stopping_time_test(&cfg, &sc, &prof, Hypothesis::H0, &McSettings::new(1_000_000, 77).unwrap()).unwrap();
    let pass = gof.p_value >= 1e-3 && gof.bins >= 10;
    let detail = format!(
        "chi2 = {:.2} on {} dof ({} bins), p-value {:.4} vs significance 1e-3",
        gof.statistic, gof.degrees_of_freedom, gof.bins, gof.p_value
    );
    (pass, detail)
}

fn criterion_06_special_functions() -> Verdict {
    let rule = gauss_legendre(20);
    let mut q_rel = 0.0f64;
    for i in 0..=1600 {
        let x = -8.0 + 0.01 * i as f64;
        let oracle = quadrature_q(x, &rule);
        q_rel = q_rel.max((q_function(x).unwrap() - oracle).abs() / oracle);
    }
    // x -> Q -> x loses all digits once Q(x) rounds to 1, so the left edge stops at -6
    let mut x_trip = 0.0f64;
    for i in 0..=1400 {
        let x = -6.0 + 0.01 * i as f64;
        x_trip = x_trip.max((inverse_q(q_function(x).unwrap()).unwrap() - x).abs());
    }
    let mut p_trip = 0.0f64;
    for e in 0..=3000 {
        let p = 10f64.powf(-0.1 * e as f64).min(1.0 - 1e-12);
        p_trip = p_trip.max((q_function(inverse_q(p).unwrap()).unwrap() - p).abs() / p);
    }
    let mut tail = 0.0f64;
    for i in 0..=3000 {
        let x = 8.0 + 0.01 * i as f64;
        tail = tail.max((log_q_function(x).unwrap() - asymptotic_log_q(x)).abs());
    }
    let pass = q_rel <= 1e-12 && x_trip <= 1e-8 && p_trip <= 1e-8 && tail <= 1e-10;
    let detail = format!(
        "Q rel err {q_rel:.2e} on [-8, 8], round trip {x_trip:.2e} in x on [-6, 8] and {p_trip:.2e} rel in p, log-Q abs err {tail:.2e} on [8, 38]"
    );
    (pass, detail)
}

fn asymptote_alphas() -> Vec<f64> {
    (4..=20).map(|e| 10f64.powi(-e)).collect()
}

fn criterion_07_single_phase_slope() -> Verdict {
    let prof = NoiseProfile::wake_up_receiver();
    let tol = Tolerances::default();
    let fit = check_single_phase_slope(&prof, dbm_to_watts(-60.0).unwrap(), 1e-6, 1e-3, &asymptote_alphas()).unwrap();
    let pass = fit.within(&tol);
    let provisional = fit.r_squared >= 0.99 && (0.9..=1.1).contains(&fit.slope_ratio);
    let detail = format!(
        "slope/reference = {:.4}, r2 = {:.5}, band [{}, {}]; the provisional band [0.9, 1.1] would {}",
        fit.slope_ratio,
        fit.r_squared,
        tol.slope_ratio_min,
        tol.slope_ratio_max,
        if provisional { "pass" } else { "fail" }
    );
    (pass, detail)
}

fn criterion_08_bmac_bound_ratios_monotone() -> Verdict {
    let prof = NoiseProfile::wake_up_receiver();
    let sc = ScenarioParams::new(dbm_to_watts(-60.0).unwrap(), 1e-10, 30).unwrap();
    let rows = check_bmac_lower_bound(&prof, &sc, 1e-3, &asymptote_alphas()).unwrap();
    for r in &rows {
        println!("  alpha {:.0e}: exact {:.4e}, bound {:.4e}, ratio {:.4}", r.alpha, r.exact_energy, r.bound, r.ratio);
    }
    let pass = rows.iter().all(|r| r.feasible) && ratios_non_decreasing(&rows);
    let ratios: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.ratio)).collect();
    let detail = format!("ratios over alpha 1e-4..1e-20: [{}]", ratios.join(", "));
    (pass, detail)
}

fn criterion_09_sparsity_trend() -> Verdict {
    let prof = NoiseProfile::wake_up_receiver();
    let p1s = [1e-2, 1e-4, 1e-6, 1e-10];
    let points =
        check_adasense_sparsity(&prof, dbm_to_watts(-60.0).unwrap(), 1e-6, 1e-3, &p1s, PreambleRule::Fixed(50)).unwrap();
    for p in &points {
        println!("  p1 {:.0e}: energy {:.6e}, p_c {:?}", p.p1, p.optimal_energy, p.p_continue);
    }
    let tol = Tolerances::default();
    let spread = sparse_energy_spread(&points, 1e-4);
    let monotone = energies_non_increasing(&points, 1e-9);
    let pass = points.iter().all(|p| p.feasible) && monotone && spread <= tol.sparsity_flat_rel;
    let detail = format!("non-increasing = {monotone}, relative spread for p1 <= 1e-4 = {spread:.2e} (limit {})", tol.sparsity_flat_rel);
    (pass, detail)
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

/// Everything except the wall-clock fields.
fn solver_fingerprint(r: &OptimizationResult) -> String {
    format!("{:?} {:?} {:?} {:?} {:?}", r.config, r.report, r.feasible, r.objective_energy.to_bits(), r.diagnostics.best_start_index)
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_adasense")).current_dir(dir).args(args).output().unwrap().status.success()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const DETERMINISM_CFG: &str = r#"
[scenario]
n = [12, 30]
p_dbm = -70
p1 = 1e-6

[profile]
preset = "wake-up-receiver"

[targets]
alpha = 1e-4

[targets.beta_sweep]
points = 3

[scheme]
kind = "adasense"
l1 = 3
l2 = 4
p_r1 = 1e-6
p_r2 = 1e-5
eta1 = 0.0
eta2 = 0.0

[mc]
trials = 50000
seed = 99

[output]
formats = ["csv", "svg"]
"#;

fn criterion_10_determinism() -> Verdict {
    let prof = NoiseProfile::wake_up_receiver();
    let sc = ScenarioParams::new(dbm_to_watts(-60.0).unwrap(), 1e-10, 30).unwrap();
    let target = ReliabilityTarget::new(1e-4, 1e-6).unwrap();
    let solve = |threads| {
        pool(threads).install(|| {
            let a = optimize_adasense(&sc, &prof, &target).unwrap();
            let b = solve_bmac(&sc, &prof, &target).unwrap();
            format!("{} | {}", solver_fingerprint(&a), solver_fingerprint(&b))
        })
    };
    let solver_runs = [solve(1), solve(1), solve(3)];
    let solver_ok = solver_runs.iter().all(|s| s == &solver_runs[0]);

    let (cfg, msc, mprof) = common::moderate_adasense();
    let settings = McSettings::new(200_003, 5).unwrap();
    let mc = |threads| pool(threads).install(|| estimate(&cfg, &msc, &mprof, &settings).unwrap());
    let mc_runs = [mc(1), mc(1), mc(3)];
    let mc_ok = mc_runs.iter().all(|e| format!("{e:?}") == format!("{:?}", mc_runs[0]));

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("det.toml");
    std::fs::write(&cfg_path, DETERMINISM_CFG).unwrap();
    let c = cfg_path.to_str().unwrap();
    let single_path = dir.path().join("single.toml");
    std::fs::write(&single_path, DETERMINISM_CFG.replace("n = [12, 30]", "n = 12")).unwrap();
    let single = single_path.to_str().unwrap();
    let mut cli_ok = true;
    for (i, threads) in ["1", "1", "3"].iter().enumerate() {
        let out = format!("run{i}");
        for (cmd, config) in [("solve", c), ("sweep", c), ("simulate", single), ("eval", single)] {
            let ok = run_cli(dir.path(), &[cmd, "--config", config, "--out", &out, "--threads", threads, "--quiet"]);
            if !ok {
                println!("  {cmd} exited with an error");
            }
            cli_ok &= ok;
        }
    }
    let cli_runs: Vec<_> = (0..3).map(|i| dir_bytes(&dir.path().join(format!("run{i}")))).collect();
    let files = cli_runs[0].len();
    cli_ok &= files == 7 && cli_runs.iter().all(|r| r == &cli_runs[0]);

    let pass = solver_ok && mc_ok && cli_ok;
    let detail = format!(
        "solver identical = {solver_ok}, monte carlo identical = {mc_ok}, CLI outputs identical = {cli_ok} ({files} files), threads 1, 1, 3"
    );
    (pass, detail)
}

fn main() {
    let criteria: [fn() -> Verdict; 10] = [
        criterion_01_panel_b_savings,
        criterion_02_panel_g_savings,
        criterion_03_scheme_ordering,
        criterion_04_monte_carlo_matches_closed_forms,
        criterion_05_bmac_stopping_time_law,
        criterion_06_special_functions,
        criterion_07_single_phase_slope,
        criterion_08_bmac_bound_ratios_monotone,
        criterion_09_sparsity_trend,
        criterion_10_determinism,
    ];
    let mut failed = Vec::new();
    for (i, check) in criteria.iter().enumerate() {
        let k = i + 1;
        let (pass, detail) = std::panic::catch_unwind(*check).unwrap_or_else(|_| (false, "panicked".into()));
        println!("ACCEPTANCE {k} {}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(k);
        }
    }
    println!("acceptance: {} of {} criteria passed, failing {failed:?}", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
