//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! criteria execute in order and report their own timings.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use uecn::{run_pipeline, RunConfig, RunOutcome, Stage};
use uecn_core::channel;
use uecn_core::deploy::{akmc, energy_buoyancy, DeployOptions};
use uecn_core::math;
use uecn_core::model::{generate_scenario, Area, ChannelParams, EnergyParams, Point3, ScenarioConfig};
use uecn_core::moea::{self, MoeadConfig};
use uecn_core::relay::{self, dqn, RelayConfig, RelayEnv};
use uecn_core::rng::{self, StreamTag};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn channel_oracles() -> Check {
    let f2: f64 = 400.0;
    let thorp_hand = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003;
    let thorp = channel::thorp_phi_db(20.0);
    let ua = channel::pl_ua(1000.0, 20.0, 1.5);
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let q_oracle = 0.5 - simpson(pdf, 0.0, 1.0, 2000);
    let q = channel::q_function(1.0);
    let ok = (thorp - 4.1338).abs() < 1e-3
        && (thorp - thorp_hand).abs() < 1e-9
        && (ua - 49.13).abs() < 0.01
        && (q - 0.158655).abs() < 1e-6
        && (q - q_oracle).abs() < 1e-6;
    ensure(ok, format!("thorp {thorp:.5} dB/km, pl_ua {ua:.4} dB, Q(1) {q:.7} vs {q_oracle:.7}"))
}

fn slope(f: impl Fn(f64) -> f64, d: f64) -> f64 {
    let h = 1e-4 * d;
    (f(d + h) - f(d - h)) / (2.0 * h)
}

fn slope_signs() -> Check {
    let mut r = rng::stream(2024, StreamTag::Fuzz, 100);
    let mut violations = 0;
    let mut samples = 0;
    for _ in 0..100 {
        let mut p = ChannelParams::default();
        p.c_lambda = 0.02 + rng::unit(&mut r) * 0.5;
        p.kappa = 1.0 + rng::unit(&mut r);
        p.iota = 1e-3 + rng::unit(&mut r) * 4.0;
        p.theta0 = 0.2 + rng::unit(&mut r) * 1.2;
        let f_khz = 1.0 + rng::unit(&mut r) * 99.0;
        let f_rf = 1e3 + rng::unit(&mut r) * 1e7;
        let cos = math::cos(p.theta0) + rng::unit(&mut r) * (1.0 - math::cos(p.theta0));
        for _ in 0..10 {
            let d = 1.0 + rng::unit(&mut r) * 999.0;
            samples += 1;
            violations += (slope(|x| channel::ul_gain(x, cos, &p), d) >= 0.0) as usize;
            violations += (slope(|x| channel::pl_ua(x, f_khz, p.kappa), d) <= 0.0) as usize;
            violations += (slope(|x| channel::pl_rf(x, f_rf, &p), d) <= 0.0) as usize;
        }
    }
    ensure(violations == 0, format!("{violations} violations over {samples} distances x 3 links"))
}

fn buoyancy() -> Check {
    let p = EnergyParams::default();
    let mut worst: f64 = 0.0;
    for i in 1..=1000 {
        let z = p.d_max * i as f64 / 1000.0;
        let e = energy_buoyancy(z, &p).map_err(|e| e.to_string())?;
        worst = worst.max((e / (p.m_b * p.g * z / p.eta_b) - 1.0).abs());
    }
    ensure(worst <= 1e-9, format!("worst relative error {worst:.2e} over 1000 depths"))
}

fn gradient_check() -> f64 {
    let mut r = rng::stream(17, StreamTag::Fuzz, 101);
    let net = dqn::QNet::new(12, 16, 4, &mut r);
    let batch: Vec<dqn::Transition> = (0..32)
        .map(|i| dqn::Transition {
            phi: (0..12).map(|_| rng::unit(&mut r)).collect(),
            action: i % 4,
            reward: rng::unit(&mut r),
            phi_next: (0..12).map(|_| rng::unit(&mut r)).collect(),
        })
        .collect();
    let refs: Vec<&dqn::Transition> = batch.iter().collect();
    let y = dqn::targets(&net, &refs, 0.9);
    let g = dqn::loss_grad(&net, &refs, &y);
    let mut worst: f64 = 0.0;
    for k in 0..net.params.len() {
        let h = 1e-6;
        let (mut up, mut down) = (net.clone(), net.clone());
        up.params[k] += h;
        down.params[k] -= h;
        let fd = (dqn::loss(&up, &refs, &y) - dqn::loss(&down, &refs, &y)) / (2.0 * h);
        worst = worst.max((g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-6));
    }
    worst
}

// Each instance: 1..=4 designated relays and 1..=6 other nodes in a
// 120 m x 120 m x 40 m box. A method solves it when every node's chosen relay
// earns at least 99% of the best relay's reward.
fn rl_desk() -> Check {
    let cfg = RelayConfig::default();
    let mut solved = [0usize; 3];
    for inst in 0..100u64 {
        let mut r = rng::stream(inst, StreamTag::Fuzz, 0);
        let na = 1 + rng::index(&mut r, 4);
        let m = 1 + rng::index(&mut r, 6);
        let sc = ScenarioConfig {
            n_usns: na + m,
            area: Area {
                x: 120.0,
                y: 120.0,
                depth: 40.0,
            },
            ..Default::default()
        };
        let s = generate_scenario(&sc, inst).map_err(|e| e.to_string())?;
        let relays: Vec<usize> = (0..na).collect();
        let mut good = [true; 3];
        for node in na..na + m {
            let env = RelayEnv::new(&s, node, &relays).map_err(|e| e.to_string())?;
            let sel = relay::select_for_node(&env, &cfg, s.seed);
            for (i, (_, c)) in sel.results.iter().enumerate() {
                good[i] &= c.reward >= 0.99 * sel.optimum;
            }
        }
        for i in 0..3 {
            solved[i] += good[i] as usize;
        }
    }
    let grad = gradient_check();
    ensure(
        solved[0] >= 95 && solved[2] >= 90 && grad < 1e-4,
        format!(
            "q-learning {}/100, sarsa {}/100, dqn {}/100, gradient rel. error {grad:.1e}",
            solved[0], solved[1], solved[2]
        ),
    )
}

fn akmc_capacity() -> Check {
    let mut r = rng::stream(99, StreamTag::Fuzz, 102);
    let mut violations = 0;
    let mut clusters = 0;
    for seed in 0..200u64 {
        let n = 1 + rng::index(&mut r, 80);
        let n_max = 1 + rng::index(&mut r, 15);
        let x1 = 1 + rng::index(&mut r, n);
        let side = 10.0 + rng::unit(&mut r) * 990.0;
        let pts: Vec<(usize, Point3)> = (0..n)
            .map(|i| {
                let p = Point3::new(rng::unit(&mut r) * side, rng::unit(&mut r) * side, -rng::unit(&mut r) * 200.0);
                (i, p)
            })
            .collect();
        let out = akmc(&pts, x1, n_max, seed).map_err(|e| e.to_string())?;
        clusters += out.clusters.len();
        violations += out.clusters.iter().filter(|c| c.members.len() > n_max).count();
        violations += out.objective.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    }
    ensure(violations == 0, format!("{violations} violations, {clusters} clusters over 200 sets"))
}

// Six nodes in the default box with 1e8-bit packets, so that collection time
// competes with travel time and the front has more than one point.
fn moead_vs_grid() -> Check {
    let mut worst_ratio = f64::INFINITY;
    let mut dominated = 0;
    let mut sizes = Vec::new();
    for seed in 1..=4u64 {
        let sc = ScenarioConfig {
            n_usns: 6,
            packet_size_bits: 1e8,
            ..Default::default()
        };
        let s = generate_scenario(&sc, seed).map_err(|e| e.to_string())?;
        let c: Vec<usize> = (0..6).collect();
        let levels = moea::power_levels(16, s.links.max_power());
        let opts = DeployOptions::default();
        let grid = moea::grid_evaluations(&s, &c, &levels, &opts);
        if grid.len() != 96 {
            return Err(format!("grid has {} points", grid.len()));
        }
        let cfg = MoeadConfig {
            x2_levels: Some(levels),
            ..Default::default()
        };
        let run = moea::moead_run(&s, &c, &cfg, seed).map_err(|e| e.to_string())?;
        let fa: Vec<[f64; 2]> = run.archive.entries.iter().map(|e| e.f.as_array()).collect();
        let fg: Vec<[f64; 2]> = moea::pareto_filter(&grid).iter().map(|e| e.f.as_array()).collect();
        dominated += fa
            .iter()
            .filter(|a| grid.iter().any(|g| g.f.feasible && moea::dominates(&g.f.as_array(), a)))
            .count();
        let r = moea::hypervolume_reference(&[&fa, &fg]);
        worst_ratio = worst_ratio.min(moea::hypervolume(&fa, r) / moea::hypervolume(&fg, r));
        sizes.push(format!("{}/{}", fa.len(), fg.len()));
    }
    ensure(
        dominated == 0 && worst_ratio >= 0.9,
        format!(
            "{dominated} dominated archive points, worst HV ratio {:.3}, archive/front sizes {}",
            worst_ratio,
            sizes.join(" ")
        ),
    )
}

fn run_default(dir: &Path) -> Result<RunOutcome, String> {
    let _ = fs::remove_dir_all(dir);
    let mut cfg = RunConfig::default();
    cfg.out_dir = dir.to_path_buf();
    run_pipeline(&cfg, &Stage::ALL).map_err(|e| e.to_string())
}

fn rl_vs_baseline(out: &RunOutcome) -> Check {
    let rl = out.report.rl.as_ref().ok_or("no rl summary")?;
    let t = out.timings.iter().find(|(s, _)| *s == Stage::Rl).map_or(Duration::ZERO, |(_, t)| *t);
    ensure(
        rl.best_of_methods >= rl.nearest_relay && t < Duration::from_secs(120),
        format!(
            "{} nodes: best-of {:.1} b/s vs nearest relay {:.1} b/s, rl stage {:.1} s",
            rl.nodes,
            rl.best_of_methods,
            rl.nearest_relay,
            t.as_secs_f64()
        ),
    )
}

fn multi_auv(out: &RunOutcome) -> Check {
    let mop = out.report.mop.as_ref().ok_or("no mop summary")?;
    let sel = mop.selected.as_ref().ok_or("nothing selected")?;
    let one = mop.single_auv.as_ref().ok_or("no single-AUV baseline")?;
    let saving = mop.time_saving_percent.ok_or("no saving reported")?;
    let detail = format!(
        "x1* = {}: f1 {:.1} s vs one AUV {:.1} s, saving {saving:.1}%",
        sel.x1, sel.f1, one.f1
    );
    if sel.x1 <= 1 {
        return Ok(format!("{detail} (single AUV selected, nothing to compare)"));
    }
    ensure(sel.f1 < one.f1 && saving > 0.0, detail)
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(a: &Path, b: &Path) -> Check {
    let fa = files(a);
    if fa != files(b) {
        return Err("runs wrote different file sets".into());
    }
    let differing: Vec<String> = fa
        .iter()
        .filter(|f| fs::read(a.join(f)).ok() != fs::read(b.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    ensure(
        differing.is_empty(),
        format!("{} files compared, differing: {:?}", fa.len(), differing),
    )
}

fn report(name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let t = Instant::now();
    let res = f();
    let el = t.elapsed();
    let (ok, detail) = match res {
        Ok(d) => (el <= limit, d),
        Err(d) => (false, d),
    };
    let over = if el > limit { ", over time limit" } else { "" };
    println!(
        "{} {name} ({detail}) [{:.2} s of {} s{over}]",
        if ok { "PASS" } else { "FAIL" },
        el.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= report("channel oracles", secs(1), channel_oracles);
    ok &= report("loss and gain slope signs", secs(5), slope_signs);
    ok &= report("buoyancy closed form", secs(1), buoyancy);
    ok &= report("relay learning at desk scale", secs(120), rl_desk);

    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let (a, b) = (tmp.join("run-a"), tmp.join("run-b"));
    let t = Instant::now();
    let first = run_default(&a);
    let first_time = t.elapsed();
    match &first {
        Ok(out) => {
            ok &= report("relay learning beats nearest relay", secs(120), || rl_vs_baseline(out));
        }
        Err(e) => {
            ok &= report("relay learning beats nearest relay", secs(120), || Err(e.clone()));
        }
    }
    ok &= report("capacity-bounded clustering", secs(30), akmc_capacity);
    ok &= report("decomposition search vs grid front", secs(120), moead_vs_grid);
    ok &= report("several AUVs beat one", secs(300), || match &first {
        Ok(out) => multi_auv(out),
        Err(e) => Err(e.clone()),
    });
    ok &= report("end-to-end determinism", secs(600).saturating_sub(first_time), || {
        first.as_ref().map_err(|e| e.clone())?;
        run_default(&b)?;
        determinism(&a, &b)
    });

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
