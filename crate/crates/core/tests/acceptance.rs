//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, non-zero
//! exit status on any failure.

use octonahm_core::selftest::{run_all, Pins};

/// Every tolerance and size used by the suite, pinned here.
fn pinned() -> Pins {
    Pins {
        cross_pairs: 10_000,
        cross_rel: 1e-12,
        cross_contraction_rel: 1e-15,
        lambda2_eig: 1e-12,
        blowup_n: 2000,
        blowup_match: 1e-6,
        blowup_t_star: 1e-2,
        rk4_ratio: (12.0, 20.0),
        chi_gauges: 10,
        chi_tol: 1e-8,
        kn_triples: 20,
        kn_n: 400,
        kn_f_hat: 1e-8,
        kn_init_agree: 2e-8,
        kn_round_trip: 1e-6,
        convexity_pairs: 10,
        convexity_n: 2000,
        convexity_solver_tol: 1e-7,
        convexity_slack: -1e-4,
        su3_mixes: 10,
        su3_tol: 1e-10,
        pole_eps: 1e-2,
        pole_n: 4000,
        pole_rows: 1e-9,
        pole_trace_drift: 1e-9,
        pole_identities: 1e-6,
        pole_weight_sum: 1e-6,
        pole_maps: 1e-6,
        pole_cauchy_eps: [2e-2, 1e-2, 5e-3],
        pole_solver_tol: 1e-6,
        ratmap_points: 20,
        ratmap_rel: 1e-10,
        adjoint_n: 1000,
        adjoint_rel: 1e-6,
        witness_min: 0.1,
    }
}

fn main() {
    let pins = pinned();
    if pins != Pins::default() {
        println!("[FAIL] pinned tolerances differ from the library defaults used by `octonahm selftest`");
        std::process::exit(1);
    }
    let start = std::time::Instant::now();
    let results = run_all(&pins);
    let mut failed = 0;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {}: {}", r.id, r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed in {:.1} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
