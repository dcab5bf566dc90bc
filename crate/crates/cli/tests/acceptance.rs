//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! `SPM_CRITERIA=1,5,13` restricts the run; `SPM_LONG=1` adds the runs that
//! take hours on a single core. Exits nonzero when any line fails.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use spm_cli::config::{Experiment, RunConfig};
use spm_cli::run::{linear_marginal, run_experiment};
use spm_core::diagnostics::exact::KernelPairSolution;
use spm_core::diagnostics::{rel_l2_error_1d, rel_l2_error_piecewise_1d, resample_1d, union_span, GriddedFunction1D};
use spm_core::evolution::{run, RunOptions};
use spm_core::experiments::{
    benchmark_problem, benchmark_reference, reference_subcells, nonlocal_allen_cahn_problem, run_benchmark_1d, run_kernel_pair,
    run_linear_hd, run_vug_static, sample_beta_mixture, static_error, LinearHdConfig,
};
use spm_core::grid::GridSpec;
use spm_core::operators::{fractional_scale, FractionalParams, DEFAULT_JUMP_CAP};
use spm_core::problem::{NonlinearKind, NonlinearTerm, Strategy};
use spm_core::rng::RngStream;
use spm_core::vug::VugMap;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

type Res<T> = Result<T, String>;

#[derive(Default)]
struct Suite {
    long: bool,
    only: Option<Vec<u32>>,
    passed: usize,
    failed: usize,
    skipped: usize,
    /// Benchmark errors keyed by (strategy, N, h, τ, T, seed).
    bench: HashMap<(char, usize, u64, u64, u64, u64), f64>,
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of log y on log x.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

fn strategy_char(s: Strategy) -> char {
    match s {
        Strategy::A => 'A',
        Strategy::B => 'B',
    }
}

impl Suite {
    fn wants(&self, id: u32) -> bool {
        self.only.as_ref().is_none_or(|v| v.contains(&id))
    }

    fn line(&mut self, status: Option<bool>, id: &str, text: &str, secs: f64) {
        let tag = match status {
            Some(true) => {
                self.passed += 1;
                "PASS"
            }
            Some(false) => {
                self.failed += 1;
                "FAIL"
            }
            None => {
                self.skipped += 1;
                "SKIP"
            }
        };
        println!("[{tag}] {id:<4} {text}  ({secs:.1}s)");
        std::io::stdout().flush().ok();
    }

    fn check(&mut self, id: &str, clock: &Instant, r: Res<(bool, String)>) {
        let secs = clock.elapsed().as_secs_f64();
        match r {
            Ok((ok, text)) => self.line(Some(ok), id, &text, secs),
            Err(e) => self.line(Some(false), id, &format!("error: {e}"), secs),
        }
    }

    fn skip(&mut self, id: &str, text: &str) {
        self.line(None, id, text, 0.0);
    }

    fn bench_error(&mut self, s: Strategy, n: usize, h: f64, tau: f64, t: f64, seed: u64) -> Res<f64> {
        let key = (strategy_char(s), n, h.to_bits(), tau.to_bits(), t.to_bits(), seed);
        if let Some(e) = self.bench.get(&key) {
            return Ok(*e);
        }
        let o = run_benchmark_1d(s, n, h, tau, t, seed, &RunOptions::default(), None).map_err(err)?;
        self.bench.insert(key, o.error);
        Ok(o.error)
    }
}

// ------------------------------------------------------------------ 1

fn c1(s: &mut Suite) {
    for (id, strategy, t, target) in [("1a", Strategy::A, 1.0, 0.0574), ("1b", Strategy::B, 10.0, 0.0617)] {
        let clock = Instant::now();
        let r = s.bench_error(strategy, 1_000_000, 0.01, 0.01, t, 1).map(|e| {
            (
                within(e, target, 0.3),
                format!(
                    "benchmark strategy {} N=1e6 h=tau=0.01 T={t}: E={e:.5}, target {target} +-30% [{:.4}, {:.4}]",
                    strategy_char(strategy),
                    0.7 * target,
                    1.3 * target
                ),
            )
        });
        s.check(id, &clock, r);
    }
}

// ------------------------------------------------------------------ 2

fn c2(s: &mut Suite) {
    let ns = [1_000_000usize, 4_000_000, 16_000_000];
    for (id, strategy, t) in [("2a", Strategy::A, 1.0), ("2b", Strategy::B, 10.0)] {
        if strategy == Strategy::B && !s.long {
            s.skip(id, "strategy B N-slope at T=10 up to N=1.6e7 takes about 70 min on one core; set SPM_LONG=1");
            continue;
        }
        let clock = Instant::now();
        let r = (|| -> Res<(bool, String)> {
            let mut errs = Vec::new();
            for &n in &ns {
                errs.push(s.bench_error(strategy, n, 0.01, 0.01, t, 1)?);
            }
            let k = log_slope(&ns.map(|n| n as f64), &errs);
            Ok((
                (k + 0.5).abs() <= 0.15,
                format!(
                    "strategy {} T={t} errors {:.5?} over N=1e6,4e6,1.6e7: slope {k:.3} (target -0.5 +-0.15)",
                    strategy_char(strategy),
                    errs
                ),
            ))
        })();
        s.check(id, &clock, r);
    }
}

// ------------------------------------------------------------------ 3

/// Error of the seed-averaged piecewise-constant solution against the reference.
fn averaged_error(strategy: Strategy, n: usize, h: f64, tau: f64, t: f64, seeds: u64) -> Res<f64> {
    let reference = benchmark_reference(h, t).map_err(err)?;
    let mut mean = vec![0.0; reference.len() / reference_subcells(h)];
    for seed in 1..=seeds {
        let o = run_benchmark_1d(strategy, n, h, tau, t, seed, &RunOptions::default(), Some(&reference)).map_err(err)?;
        for (m, v) in mean.iter_mut().zip(&o.numeric.values) {
            *m += v / seeds as f64;
        }
    }
    let avg = GriddedFunction1D {
        origin: reference.origin,
        h,
        values: mean,
    };
    rel_l2_error_piecewise_1d(&avg, &reference).map_err(err)
}

fn c3(s: &mut Suite) {
    const N: usize = 10_000_000;
    const SEEDS: u64 = 5;
    let taus = [0.25, 0.2, 0.1];
    let hs = [0.2, 0.15, 0.1];
    let blocks: [(&str, Strategy, f64, bool); 4] = [
        ("3a", Strategy::A, 1.0, true),
        ("3b", Strategy::A, 1.0, false),
        ("3c", Strategy::B, 10.0, true),
        ("3d", Strategy::B, 10.0, false),
    ];
    for (id, strategy, t, tau_block) in blocks {
        let label = if tau_block { "tau" } else { "h" };
        if strategy == Strategy::B && !s.long {
            let cost = if tau_block { "about 30 min" } else { "about 8 h" };
            s.skip(id, &format!("strategy B {label}-order at T=10 with N=1e7 x 5 seeds takes {cost} on one core; set SPM_LONG=1"));
            continue;
        }
        let clock = Instant::now();
        let r = (|| -> Res<(bool, String)> {
            let xs: &[f64] = if tau_block { &taus } else { &hs };
            let mut errs = Vec::new();
            for &x in xs {
                let (h, tau) = if tau_block { (0.01, x) } else { (x, 0.01) };
                errs.push(averaged_error(strategy, N, h, tau, t, SEEDS)?);
            }
            let k = log_slope(xs, &errs);
            Ok((
                (k - 1.0).abs() <= 0.25,
                format!(
                    "strategy {} T={t} {label} in {xs:?}: errors {:.5?}, order {k:.3} (target 1 +-0.25; N=1e7, 5-seed mean solution)",
                    strategy_char(strategy),
                    errs
                ),
            ))
        })();
        s.check(id, &clock, r);
    }
}

// ------------------------------------------------------------------ 4

fn c4(s: &mut Suite) {
    if !s.long {
        s.skip("4", "strategy contrast at T=10, N=1.6e7 over 5 seeds takes about 40 min on one core; set SPM_LONG=1");
        return;
    }
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let reference = benchmark_reference(0.1, 10.0).map_err(err)?;
        let mut wins = 0;
        let mut pairs = Vec::new();
        for seed in 1..=5 {
            let run = |st| {
                run_benchmark_1d(st, 16_000_000, 0.1, 0.1, 10.0, seed, &RunOptions::default(), Some(&reference))
                    .map(|o| o.error)
                    .map_err(err)
            };
            let (a, b) = (run(Strategy::A)?, run(Strategy::B)?);
            wins += usize::from(b < a);
            pairs.push((a, b));
        }
        Ok((
            wins >= 4,
            format!("T=10 N=1.6e7 h=tau=0.1 (E_A, E_B) per seed {pairs:.4?}: B better in {wins}/5 (need >= 4)"),
        ))
    })();
    s.check("4", &clock, r);
}

// ------------------------------------------------------------------ 5

fn c5(s: &mut Suite) {
    let clock = Instant::now();
    let ns = [1_000_000usize, 2_000_000, 4_000_000];
    let err_t = [0.0693, 0.0573, 0.0495];
    let occ_t = [0.283, 0.318, 0.353];
    let r = (|| -> Res<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for k in 0..3 {
            let o = run_vug_static(4, ns[k], 0.0625, 1).map_err(err)?;
            let good = within(o.error, err_t[k], 0.1) && within(o.occupancy.ratio, occ_t[k], 0.1);
            ok &= good;
            parts.push(format!(
                "N={:.0e}: E={:.4} (target {}) occ={:.4} (target {})",
                ns[k] as f64, o.error, err_t[k], o.occupancy.ratio, occ_t[k]
            ));
        }
        let occ4 = run_vug_static(4, 1_000_000, 0.0625, 2).map_err(err)?.occupancy.ratio;
        let occ5 = run_vug_static(5, 1_000_000, 0.0625, 2).map_err(err)?.occupancy.ratio;
        ok &= occ5 < occ4;
        parts.push(format!("N=1e6 occupancy d=4 {occ4:.4} > d=5 {occ5:.4}"));
        Ok((ok, format!("static reconstruction d=4 h=0.0625, +-10%: {}", parts.join("; "))))
    })();
    s.check("5", &clock, r);
}

// ------------------------------------------------------------------ 6

fn u_curve(d: usize, n: usize, h_mid_cells: usize) -> Res<(bool, String)> {
    let e = sample_beta_mixture(d, n, 3).map_err(err)?;
    let mut errs = Vec::new();
    let cells = [h_mid_cells / 4, h_mid_cells, h_mid_cells * 8];
    for c in cells {
        let h = 1.0 / c as f64;
        let map = VugMap::build_solution_map(&e, &GridSpec::uniform(d, 0.0, h).map_err(err)?).map_err(err)?;
        errs.push(static_error(&map).map_err(err)?);
    }
    Ok((
        errs[1] < errs[0] && errs[1] < errs[2],
        format!(
            "d={d} N={n:.0e}: E(h=1/{})={:.4}, E(h=1/{})={:.4}, E(h=1/{})={:.4} (middle must be lowest)",
            cells[0], errs[0], cells[1], errs[1], cells[2], errs[2]
        ),
    ))
}

fn c6(s: &mut Suite) {
    let clock = Instant::now();
    let r = u_curve(5, 10_000_000, 8);
    s.check("6a", &clock, r);
    if s.long {
        let clock = Instant::now();
        let r = u_curve(6, 40_000_000, 16);
        s.check("6b", &clock, r);
    } else {
        s.skip("6b", "d=6, N=4e7 curve needs about 4 GB and 15 min; set SPM_LONG=1");
    }
}

// ------------------------------------------------------------------ 7, 8, 9

fn kernel_pair_series(sol: &KernelPairSolution, ns: &[usize]) -> Res<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for &n in ns {
        let (_, scores) = run_kernel_pair(sol, n, 0.4, 0.1, 2.0, 1, &RunOptions::default()).map_err(err)?;
        let last = scores.last().ok_or("no scores")?;
        out.push((last.error_p, last.error_m, last.sign_coherence));
    }
    Ok(out)
}

fn decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn c7_8_9(s: &mut Suite) {
    let ns = [2_500_000usize, 5_000_000, 10_000_000];
    if s.wants(7) || s.wants(8) {
        let clock = Instant::now();
        let series = kernel_pair_series(&KernelPairSolution::allen_cahn(6, 1.0), &ns);
        if s.wants(7) {
            let r = series.as_ref().map_err(Clone::clone).map(|v| {
                let p: Vec<f64> = v.iter().map(|x| x.0).collect();
                let m: Vec<f64> = v.iter().map(|x| x.1).collect();
                (
                    decreasing(&p) && decreasing(&m),
                    format!("6-D Allen-Cahn T=2 over N=2.5e6,5e6,1e7: E[P]={p:.4?} E[M]={m:.4?} (both must decrease)"),
                )
            });
            s.check("7a", &clock, r);
            s.skip("7b", "N=1e8 in 6-D needs about 10 GB for positions and maps; exceeds this machine");
        }
        if s.wants(8) {
            let clock2 = Instant::now();
            let r = series.map(|v| {
                let c = v.last().unwrap().2;
                (c >= 0.95, format!("6-D Allen-Cahn T=2 N=1e7: fraction of weights matching the cell sign {c:.5} (need >= 0.95)"))
            });
            s.check("8", &clock2, r);
        }
    }
    if s.wants(9) {
        let clock = Instant::now();
        let r = kernel_pair_series(&KernelPairSolution::hjb(7, 0.5), &ns).map(|v| {
            let p: Vec<f64> = v.iter().map(|x| x.0).collect();
            let m: Vec<f64> = v.iter().map(|x| x.1).collect();
            (
                decreasing(&p) && decreasing(&m),
                format!("7-D HJB T=2 over N=2.5e6,5e6,1e7: E[P]={p:.4?} E[M]={m:.4?} (finite, decreasing)"),
            )
        });
        s.check("9a", &clock, r);
        s.skip("9b", "N=1e8 in 7-D needs about 12 GB for positions and maps; exceeds this machine");
    }
}

// ------------------------------------------------------------------ 10

fn c10(s: &mut Suite) {
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let p = FractionalParams::new(1.5, 0.005).map_err(err)?;
        let tau = 0.1;
        let lambda = p.gamma_coeff() * tau;
        let steps = 100_000u64;
        let mut counts = vec![0u64; 128];
        for i in 0..steps {
            let mut rng = RngStream::new(2024, i).rng();
            let (_, k) = fractional_scale(&p, tau, DEFAULT_JUMP_CAP, &mut rng).map_err(err)?;
            counts[(k as usize).min(127)] += 1;
        }
        let pois = Poisson::new(lambda).map_err(err)?;
        let mut k_max = 0;
        while steps as f64 * (1.0 - pois.cdf(k_max + 1)) >= 5.0 {
            k_max += 1;
        }
        let mut stat = 0.0;
        for k in 0..=k_max {
            let (obs, expected) = if k < k_max {
                (counts[k as usize] as f64, steps as f64 * pois.pmf(k))
            } else {
                (counts[k as usize..].iter().sum::<u64>() as f64, steps as f64 * (1.0 - pois.cdf(k - 1)))
            };
            stat += (obs - expected).powi(2) / expected;
        }
        let crit = ChiSquared::new(k_max as f64).map_err(err)?.inverse_cdf(0.99);
        Ok((
            stat < crit && (lambda - 1.467).abs() < 5e-4,
            format!("jump counts over 1e5 steps vs Poisson({lambda:.4}) (expect 1.467): chi2={stat:.2} < {crit:.2} at 0.01, {k_max} dof"),
        ))
    })();
    s.check("10", &clock, r);
}

// ------------------------------------------------------------------ 11

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn c11(s: &mut Suite) {
    let cfg = LinearHdConfig {
        dim: 1000,
        c: 0.2,
        alpha: 1.5,
        epsilon: 0.005,
        b: 1.0,
        x0: 0.0,
        tau: 0.1,
        t_final: 4.0,
    };
    let exact = cfg.exact_o1();
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let o = run_linear_hd(&cfg, 100_000, 1, false).map_err(err)?;
        let o1 = o.series.last().unwrap().o1;
        let rel = ((o1 - exact) / exact).abs();
        Ok((rel <= 0.05, format!("d=1000 N=1e5 T=4: O1={o1:.5} vs {exact}: relative error {rel:.5} (need <= 0.05)")))
    })();
    s.check("11a", &clock, r);

    // Disjoint particle batches of one run are independent samples; the
    // median batch error is used because the batch means are heavy-tailed.
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let mut finals = Vec::new();
        for seed in 0..8 {
            let o = run_linear_hd(&cfg, 100_000, 100 + seed, true).map_err(err)?;
            finals.extend(o.marginal.unwrap().into_iter().map(|p| p[0]));
        }
        let ns = [1_000usize, 10_000, 100_000];
        let mut errs = Vec::new();
        for &n in &ns {
            let batch: Vec<f64> = finals.chunks_exact(n).map(|c| (c.iter().sum::<f64>() / n as f64 - exact).abs()).collect();
            errs.push(median(batch));
        }
        let k = log_slope(&ns.map(|n| n as f64), &errs);
        Ok((
            (k + 0.5).abs() <= 0.2,
            format!("O1 median batch error {errs:.5?} over N=1e3,1e4,1e5 (8e5 particles, d=1000): slope {k:.3} (target -0.5 +-0.2)"),
        ))
    })();
    s.check("11b", &clock, r);

    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let c2 = LinearHdConfig { dim: 2, ..cfg };
        let o = run_linear_hd(&c2, 1_000_000, 7, true).map_err(err)?;
        let mut rc = RunConfig::defaults(Experiment::NonlocalLinearHd);
        rc.dim = 2;
        rc.n = 1_000_000;
        let (num, reference) = linear_marginal(&o.marginal.unwrap(), &rc).map_err(err)?;
        let e = spm_core::diagnostics::rel_l2_error_2d(&num, &reference).map_err(err)?;
        Ok((
            e <= 0.1,
            format!(
                "d=2 N=1e6 T=4 marginal vs radial reference on a {}x{} window, h={}: relative L2 {e:.4} (need <= 0.1)",
                num.nx, num.ny, rc.h
            ),
        ))
    })();
    s.check("11c", &clock, r);
}

// ------------------------------------------------------------------ 12

fn c12(s: &mut Suite) {
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let n = 1_000_000;
        let mut proj = Vec::new();
        // finest first: it is the run most likely to fail
        for h in [0.05, 0.1, 0.2] {
            let spec = nonlocal_allen_cahn_problem(6, 1.5, 0.005, 0.01, 2.0).map_err(err)?;
            let grid = GridSpec::uniform(6, 0.0, h).map_err(err)?;
            match run(&spec, n, &grid, 1, &RunOptions::default(), |_, _| Ok(())) {
                Ok((state, _)) => {
                    // 1-D projection on the coarsest lattice, so all three are comparable
                    let (o, len) = spm_core::diagnostics::aligned_range(-6.0, 6.0, 0.0, 0.2);
                    proj.push(spm_core::diagnostics::project_1d(&state.ensemble, o, 0.2, len));
                }
                Err(e) => {
                    return Ok((false, format!("6-D nonlocal Allen-Cahn N=1e6 tau=0.01 T=2: the h={h} run failed: {e}")));
                }
            }
        }
        let (o, len) = union_span(&proj[0], &proj[1]);
        let fine = rel_l2_error_1d(&resample_1d(&proj[1], o, len), &resample_1d(&proj[0], o, len)).map_err(err)?;
        let coarse = rel_l2_error_1d(&resample_1d(&proj[2], o, len), &resample_1d(&proj[1], o, len)).map_err(err)?;
        Ok((
            fine < coarse,
            format!("6-D nonlocal Allen-Cahn N=1e6 T=2: |P(0.1)-P(0.05)| = {fine:.4} < |P(0.2)-P(0.1)| = {coarse:.4}"),
        ))
    })();
    s.check("12", &clock, r);
}

// ------------------------------------------------------------------ 13

fn c13(s: &mut Suite) {
    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let tmp = tempfile::tempdir().map_err(err)?;
        let mut same = true;
        for e in [Experiment::Benchmark1d, Experiment::AllenCahn6d, Experiment::NonlocalLinearHd] {
            let mut c = RunConfig::defaults(e);
            c.n = 200_000;
            c.t_final = if e == Experiment::Benchmark1d { 0.2 } else { 0.4 };
            c.workers = 2;
            let mut hashes = Vec::new();
            for k in 0..2 {
                c.output_dir = tmp.path().join(format!("{e}-{k}"));
                hashes.push(run_experiment(&c).map_err(err)?.files);
            }
            same &= hashes[0] == hashes[1];
        }
        Ok((same, "benchmark_1d, allen_cahn_6d, nonlocal_linear_hd rerun with the same seed, N and workers: CSV hashes identical".into()))
    })();
    s.check("13a", &clock, r);

    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let mut spec = benchmark_problem(Strategy::A, 0.01, 0.5);
        spec.nonlinearity = NonlinearTerm::new(NonlinearKind::None);
        let grid = GridSpec::uniform(1, 0.0, 0.01).map_err(err)?;
        let mut start = None;
        let mut worst = 0.0f64;
        run(&spec, 1_000_000, &grid, 5, &RunOptions::default(), |st, _| {
            let m = st.ensemble.mean_weight();
            let s0 = *start.get_or_insert(m);
            worst = worst.max((m - s0).abs());
            Ok(())
        })
        .map_err(err)?;
        Ok((worst <= 1e-12, format!("strategy A, f=0, N=1e6, 50 steps: max |mean weight drift| = {worst:.3e} (need <= 1e-12)")))
    })();
    s.check("13b", &clock, r);

    let clock = Instant::now();
    let r = (|| -> Res<(bool, String)> {
        let spec = benchmark_problem(Strategy::B, 0.01, 0.5);
        let grid = GridSpec::uniform(1, 0.0, 0.01).map_err(err)?;
        let mut bad = 0usize;
        let mut checked = 0usize;
        run(&spec, 1_000_000, &grid, 5, &RunOptions::default(), |st, _| {
            if let Some(z) = st.relocation_z {
                checked += 1;
                bad += st.ensemble.weights().iter().filter(|w| w.abs() != z).count();
            }
            Ok(())
        })
        .map_err(err)?;
        Ok((
            bad == 0 && checked == 50,
            format!("strategy B, N=1e6, {checked} steps: {bad} weights with |w| != Z"),
        ))
    })();
    s.check("13c", &clock, r);
}

fn main() {
    let mut s = Suite {
        long: std::env::var("SPM_LONG").is_ok_and(|v| v == "1"),
        only: std::env::var("SPM_CRITERIA")
            .ok()
            .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect()),
        ..Default::default()
    };
    // the harness passes flags such as --list; only a plain run executes
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    println!("acceptance suite ({} mode)", if s.long { "long" } else { "default" });
    let total = Instant::now();
    let stages: [(u32, fn(&mut Suite)); 10] = [
        (1, c1),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (10, c10),
        (11, c11),
        (12, c12),
        (13, c13),
    ];
    for (id, f) in stages {
        if s.wants(id) {
            f(&mut s);
        }
    }
    if s.wants(7) || s.wants(8) || s.wants(9) {
        c7_8_9(&mut s);
    }
    println!(
        "acceptance: {} passed, {} failed, {} skipped in {:.0}s",
        s.passed,
        s.failed,
        s.skipped,
        total.elapsed().as_secs_f64()
    );
    if s.failed > 0 {
        std::process::exit(1);
    }
}
