use spm_core::diagnostics::exact::KernelPairSolution;
use spm_core::evolution::{run, RunOptions, StepState};
use spm_core::experiments::{benchmark_problem, kernel_pair_problem, nonlocal_allen_cahn_problem};
use spm_core::grid::GridSpec;
use spm_core::problem::{ProblemSpec, Strategy};

fn final_state(spec: &ProblemSpec, n: usize, h: f64, workers: usize) -> (Vec<u64>, Vec<u64>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
    pool.install(|| {
        let grid = GridSpec::uniform(spec.dim, 0.0, h).unwrap();
        let mut zs = Vec::new();
        let (s, records): (StepState, _) = run(spec, n, &grid, 99, &RunOptions::default(), |s, _| {
            zs.push(s.z.to_bits());
            Ok(())
        })
        .unwrap();
        for r in &records {
            zs.push(r.mean_weight.to_bits());
            zs.push(r.stored_cells as u64);
        }
        let bits = s.ensemble.positions().iter().chain(s.ensemble.weights()).map(|v| v.to_bits()).collect();
        (bits, zs)
    })
}

// More particles than one chunk and one shard, so the parallel split is exercised.
#[test]
fn results_do_not_depend_on_worker_count() {
    let specs = [
        (benchmark_problem(Strategy::A, 0.05, 0.2), 0.05),
        (benchmark_problem(Strategy::B, 0.05, 0.2), 0.05),
        (kernel_pair_problem(&KernelPairSolution::hjb(7, 0.5), 0.1, 0.2).unwrap(), 0.4),
        (nonlocal_allen_cahn_problem(3, 1.5, 0.005, 0.05, 0.1).unwrap(), 0.2),
    ];
    for (spec, h) in &specs {
        let one = final_state(spec, 150_000, *h, 1);
        for w in [2, 5] {
            assert_eq!(one, final_state(spec, 150_000, *h, w), "dim {} with {w} workers", spec.dim);
        }
    }
}
