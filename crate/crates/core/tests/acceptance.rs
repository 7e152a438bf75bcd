//! End-to-end acceptance run. Prints one verdict line per criterion and exits
//! nonzero if any fails. Heavy: about four minutes on one core.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use bures_sep::curvature::{self, levy_gromov_comparison, scalar_curvature};
use bures_sep::estimators::{execute, RunConfig, RunControl, RunType};
use bures_sep::measures::{self, MetricConvention};
use bures_sep::qmc::Scramble;
use bures_sep::report::EstimateReport;
use bures_sep::separability::{self, partial_transpose};
use bures_sep::state_space::Spectrum;

struct Verdict {
    pass: bool,
    detail: String,
}

fn rel(x: f64, want: f64) -> f64 {
    (x / want - 1.0).abs()
}

/// `name=value (want, tol)` with a pass flag.
fn within(name: &str, x: f64, want: f64, tol: f64, relative: bool) -> (bool, String) {
    let err = if relative { rel(x, want) } else { (x - want).abs() };
    let ok = err <= tol;
    let kind = if relative { "rel" } else { "abs" };
    (ok, format!("{name}={x:.10} want {want:.10} {kind} err {err:.2e} tol {tol:e}{}", if ok { "" } else { " MISS" }))
}

fn all(parts: Vec<(bool, String)>) -> Verdict {
    Verdict { pass: parts.iter().all(|p| p.0), detail: parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ") }
}

fn seeded(run_type: RunType, n: u64, seed: u64) -> RunConfig {
    RunConfig::new(run_type, n, Scramble::Seeded { seed })
}

fn run(cfg: &RunConfig, ctl: RunControl) -> EstimateReport {
    execute(cfg, &ctl).expect("estimator run").report
}

fn value(r: &EstimateReport, k: &str) -> f64 {
    r.value(k).unwrap_or(f64::NAN)
}

fn simplex_constants() -> Verdict {
    let started = Instant::now();
    let want = [
        (2, 2.0 * PI),
        (3, 64.0 * PI / 35.0),
        (4, 2.0 * PI * PI / 35.0),
        (5, 8_388_608.0 * PI * PI / 156_165_009.0),
    ];
    let mut parts = Vec::new();
    for (m, w) in want {
        match measures::simplex_constant(m, MetricConvention::Sd) {
            Ok(q) => parts.push(within(&format!("D{m}"), q.value, w, 1e-6, true)),
            Err(e) => parts.push((false, format!("D{m} error {e}"))),
        }
    }
    let secs = started.elapsed().as_secs_f64();
    parts.push((secs < 120.0, format!("runtime {secs:.1}s (limit 120s)")));
    all(parts)
}

fn boundary_integral() -> Verdict {
    match measures::boundary_restricted_integral(4, MetricConvention::Sd) {
        Ok(q) => {
            let area = 4.0 * q.value * PI.powi(6) / 96.0;
            all(vec![
                within("R4", q.value, 0.871513859457, 1e-9, false),
                within("A_total", area, 142.0 * PI.powi(7) / 12285.0, 1e-8, true),
            ])
        }
        Err(e) => Verdict { pass: false, detail: format!("quadrature error {e}") },
    }
}

fn volume_run(r: &EstimateReport) -> Verdict {
    all(vec![
        within("V_total", value(r, "V_total"), PI.powi(8) / 1680.0, 5e-3, true),
        within("V_sep", value(r, "V_sep"), 0.416186, 2e-2, true),
        within("P_sep", value(r, "P_sep"), 8.0 / (11.0 * PI * PI), 2e-2, true),
    ])
}

fn entanglement_means(r: &EstimateReport) -> Verdict {
    let n = value(r, "mean_negativity");
    let c = value(r, "mean_concurrence");
    let mut v = all(vec![within("mean_N", n, 0.177162, 1.5e-2, true), within("mean_C", c, 0.197284, 1.5e-2, true)]);
    let factor = n / 0.177162;
    let alternate = (factor - 2.0).abs() < 0.2 || (factor - 0.5).abs() < 0.05;
    v.detail.push_str(&format!(
        "; N/ref={factor:.4} C/ref={:.4}; halved-trace-norm N={:.6} {}",
        c / 0.197284,
        n / 2.0,
        if alternate { "(factor-2 normalization applies)" } else { "(not a factor-2 discrepancy)" }
    ));
    v
}

fn separable_boundary() -> Verdict {
    let r = run(&seeded(RunType::BoundarySeparable, 3_000_000, 1), RunControl::default());
    all(vec![
        within("A_sep", value(&r, "A_sep"), 1.74893, 2e-2, true),
        within("root_fraction", value(&r, "root_fraction"), 0.685, 0.02, false),
        within("mean_root_count", value(&r, "mean_root_count"), 1.299, 0.05, false),
    ])
}

fn curvature_minimum() -> Verdict {
    let centre = scalar_curvature(&Spectrum::new([0.25; 4]).unwrap()).finite().unwrap_or(f64::NAN);
    let mut r = common::rng(570);
    let mut lowest = f64::INFINITY;
    let mut singular = 0;
    for _ in 0..100_000 {
        let s = Spectrum::new(common::random_spectrum(&mut r)).unwrap();
        match scalar_curvature(&s).finite() {
            Some(c) => lowest = lowest.min(c),
            None => singular += 1,
        }
    }
    let mut v = all(vec![
        within("R(1/4)", centre, 570.0, 1e-12, true),
        (lowest >= 570.0 - 1e-6, format!("min over 1e5 spectra {lowest:.6} ({singular} singular)")),
    ]);
    if let Ok(m) = curvature::min_scalar_curvature(4) {
        v.detail.push_str(&format!("; min_scalar_curvature(4)={m}"));
    }
    v
}

/// Agreement to four significant digits.
fn sig4(name: &str, x: f64, want: f64) -> (bool, String) {
    let ok = format!("{x:.3e}") == format!("{want:.3e}");
    (ok, format!("{name}={x:.6} want {want:.6}{}", if ok { "" } else { " MISS" }))
}

fn isoperimetric() -> Verdict {
    let c = match levy_gromov_comparison(PI.powi(6) / 2310.0, PI.powi(8) / 1680.0, 1.75414) {
        Ok(c) => c,
        Err(e) => return Verdict { pass: false, detail: format!("error {e}") },
    };
    all(vec![
        sig4("unit_ball_volume", c.unit_ball_volume, 256.0 * PI.powi(7) / 2_027_025.0),
        sig4("w", c.w, 1.31521),
        sig4("ratio", c.ratio, 0.318581),
        (!c.inequality_holds, format!("inequality_holds={}", c.inequality_holds)),
    ])
}

fn property_suites() -> Verdict {
    const N: usize = 100_000;
    let mut r = common::rng(8);
    let (mut two_negative, mut sign_mismatch, mut n_over_c, mut lu_flips) = (0, 0, 0, 0);
    let mut worst_det = 0.0f64;
    for _ in 0..N {
        let rho = common::random_state(&mut r);
        let pt = partial_transpose(&rho);
        two_negative += usize::from(pt.spectrum[1] < -1e-12);
        if pt.determinant.abs() > 1e-12 && (pt.determinant < 0.0) != (pt.spectrum[0] < 0.0) {
            sign_mismatch += 1;
        }
        let m = separability::entanglement_measures(&rho).expect("measures");
        n_over_c += usize::from(m.negativity > m.concurrence + 1e-10);
        let v = common::random_local_unitary(&mut r);
        let moved = common::conjugate(&v, &rho);
        let d = separability::pt_determinant(&moved);
        worst_det = worst_det.max((d - pt.determinant).abs());
        if pt.determinant.abs() > 1e-12 && separability::verdict(&moved) != separability::verdict(&rho) {
            lu_flips += 1;
        }
    }
    let mut parts = vec![
        (two_negative == 0, format!("two negative PT eigenvalues {two_negative}/{N}")),
        (sign_mismatch == 0, format!("det sign vs min eigenvalue mismatches {sign_mismatch}")),
        (n_over_c == 0, format!("N > C cases {n_over_c}")),
        (lu_flips == 0 && worst_det < 1e-13, format!("local-unitary verdict flips {lu_flips}, max |det change| {worst_det:.1e}")),
    ];

    let n = N as u64;
    let sd = seeded(RunType::Volume, n, 8);
    let one = run(&sd, RunControl { workers: 1, ..Default::default() });
    let reference = one.to_json_without_timing();
    let bures = run(&RunConfig { metric: MetricConvention::Bures, ..sd.clone() }, RunControl::default());
    let scale = MetricConvention::sd_over_bures(4);
    let ratios_equal = ["P_sep", "mean_negativity", "mean_concurrence"].iter().all(|k| one.value(k) == bures.value(k))
        && value(&one, "V_total") == scale * value(&bures, "V_total");
    parts.push((ratios_equal, format!("convention ratios bit-equal {ratios_equal}")));

    let same_workers = [2, 4, 7].iter().all(|&w| run(&sd, RunControl { workers: w, ..Default::default() }).to_json_without_timing() == reference);
    parts.push((same_workers, format!("worker-count determinism {same_workers}")));

    let dir = tempfile::tempdir().expect("temp dir");
    let ck = dir.path().join("acceptance.ckpt");
    let first = RunControl { checkpoint: Some(ck.clone()), stop_after: Some(n / 2), ..Default::default() };
    execute(&sd, &first).expect("partial run");
    let resumed = run(&sd, RunControl { checkpoint: Some(ck), resume: true, ..Default::default() });
    let identical = resumed.to_json_without_timing() == reference;
    parts.push((identical, format!("checkpoint/resume bit-identical {identical}")));
    all(parts)
}

fn cross_oracle() -> Verdict {
    let r = run(&seeded(RunType::Volume, 1_000_000, 9), RunControl::default());
    let o = common::pseudo_random_psep(1_000_000, 9, 32);
    let p = value(&r, "P_sep");
    let se = r.batch_se("P_sep").unwrap_or(f64::NAN).hypot(o.batch_se);
    let z = (p - o.p_sep).abs() / se;
    Verdict {
        pass: z <= 3.0,
        detail: format!("qmc {p:.6} oracle {:.6} combined se {se:.2e} |z|={z:.2} (65M run not executed)", o.p_sep),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |id: u32, title: &'static str, v: Verdict| {
        println!("criterion {id} {} {title}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, title, v));
    };
    report(1, "simplex constants", simplex_constants());
    report(2, "restricted boundary integral", boundary_integral());
    let started = Instant::now();
    let volume = run(&seeded(RunType::Volume, 10_000_000, 1), RunControl::default());
    let secs = started.elapsed().as_secs_f64();
    let mut v = volume_run(&volume);
    v.detail.push_str(&format!("; {secs:.0}s"));
    report(3, "volume run 1e7", v);
    report(4, "mean negativity and concurrence", entanglement_means(&volume));
    report(5, "separable boundary 3e6", separable_boundary());
    report(6, "scalar curvature minimum", curvature_minimum());
    report(7, "isoperimetric arithmetic", isoperimetric());
    report(8, "property suites 1e5", property_suites());
    report(9, "cross-oracle P_sep 1e6", cross_oracle());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass; failing: {failed:?}", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
