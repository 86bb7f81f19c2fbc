//! The ten acceptance criteria, one test each, at their stated tolerances
//! and runtime budgets. Each prints a single PASS/FAIL line; the line goes
//! straight to stdout so it survives libtest capture.
//!
//! Criteria 4, 5, 8 (two of four clauses) and 9 fail by construction: the
//! aggregated first-order constant cancels identically, so it has no root,
//! no asymptotic power law, and never yields a positive offset; and two of
//! the four residual-norm slopes carry intrinsic finite-window corrections
//! larger than the stated 2%. The tests document the measured truth and
//! fail honestly rather than loosening the stated checks.

use std::io::Write as _;
use std::process::Command;
use std::time::Instant;

use blowup_core::constants::{bubble_energy_constant, radial_integral, Method, MomentIndex};
use blowup_core::domain::ModelDomain;
use blowup_core::energy::{expansion_fit, residual_norm_components};
use blowup_core::fit::log_log_slope;
use blowup_core::params::ProblemParams;
use blowup_core::quad::QuadratureSpec;
use blowup_core::reduction::{
    c_n_asymptotics, c_n_root, c_n_summands, solve_critical_point, solve_reduced_model,
    AsymptoticRegime, CriticalPointModel, ReducedEnergyParams, SIGN_FLOOR,
};
use blowup_core::roots::sign_change_brackets;
use blowup_core::Error;

fn emit(line: &str) {
    // Raw handle: bypasses libtest's print capture so every criterion line
    // shows up in a plain `cargo test` run.
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").ok();
}

/// Print the criterion line, then enforce the budget and the verdict.
fn conclude(name: &str, t0: Instant, budget_s: f64, ok: bool, detail: &str) {
    let dt = t0.elapsed().as_secs_f64();
    let verdict = if ok { "PASS" } else { "FAIL" };
    emit(&format!(
        "[acceptance {name}] {verdict} ({dt:.2} s): {detail}"
    ));
    assert!(
        dt < budget_s,
        "criterion {name} took {dt:.2} s, budget {budget_s} s"
    );
    assert!(ok, "criterion {name}: {detail}");
}

fn grid_deltas() -> Vec<f64> {
    (0..8).map(|i| 1e-3 * 10f64.powf(i as f64 / 7.0)).collect()
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_blowuplab")
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .env_remove("BLOWUPLAB_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn report(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).expect("stdout is a JSON report")
}

#[test]
fn acceptance_01_moment_closed_form_vs_quadrature() {
    let t0 = Instant::now();
    let spec = QuadratureSpec::default();
    let mut worst = 0f64;
    let mut convergent = 0u32;
    let mut divergent = 0u32;
    for n in 5..=10u32 {
        for m in [0u32, 2, 4] {
            for k in [n - 2, n - 1, n] {
                for d in [1.05, 1.1832, 1.5, 2.0, 5.0] {
                    let params = ProblemParams::new(n, d).unwrap();
                    let idx = MomentIndex { m, k };
                    if n + m > 2 * k {
                        assert!(matches!(
                            radial_integral(&params, idx, Method::Gamma, &spec),
                            Err(Error::Divergent(_))
                        ));
                        divergent += 1;
                        continue;
                    }
                    let g = radial_integral(&params, idx, Method::Gamma, &spec).unwrap();
                    let q = radial_integral(&params, idx, Method::Quadrature, &spec).unwrap();
                    worst = worst.max((g - q).abs() / g.abs());
                    convergent += 1;
                }
            }
        }
    }
    let ok = worst <= 1e-10 && convergent > 0;
    conclude(
        "01 moment closed form vs quadrature",
        t0,
        5.0,
        ok,
        &format!(
            "{convergent} convergent cases agree to {worst:.2e} (tolerance 1e-10), \
             {divergent} divergent cases rejected"
        ),
    );
}

#[test]
fn acceptance_02_bubble_residuals() {
    let t0 = Instant::now();
    let mut worst_analytic = 0f64;
    let mut worst_fd = 0f64;
    let mut worst_boundary = 0f64;
    for n in 5..=9u32 {
        for d in ["1.2", "1.5", "2"] {
            let (code, stdout, stderr) = run_cli(&[
                "verify-bubble",
                "--n",
                &n.to_string(),
                "--D",
                d,
                "--points",
                "1000",
                "--seed",
                "42",
            ]);
            assert_eq!(code, 0, "verify-bubble n={n} D={d}: {stderr}");
            let r = report(&stdout);
            worst_analytic = worst_analytic.max(r["errors"]["interior_analytic"].as_f64().unwrap());
            worst_fd = worst_fd.max(r["errors"]["interior_fd"].as_f64().unwrap());
            worst_boundary = worst_boundary.max(r["errors"]["boundary_analytic"].as_f64().unwrap());
        }
    }
    let ok = worst_analytic <= 1e-12 && worst_fd <= 1e-6 && worst_boundary <= 1e-12;
    conclude(
        "02 bubble residuals",
        t0,
        5.0,
        ok,
        &format!(
            "15 (n, D) pairs x 1000 points: interior {worst_analytic:.2e} (<= 1e-12), \
             finite-difference {worst_fd:.2e} (<= 1e-6, h = 1e-4), \
             boundary {worst_boundary:.2e} (<= 1e-12)"
        ),
    );
}

#[test]
fn acceptance_03_kernel_residuals() {
    let t0 = Instant::now();
    let mut worst_analytic = 0f64;
    let mut worst_fd = 0f64;
    for n in 5..=9u32 {
        for d in ["1.2", "1.5", "2"] {
            let (code, stdout, stderr) = run_cli(&[
                "verify-kernel",
                "--n",
                &n.to_string(),
                "--D",
                d,
                "--points",
                "1000",
                "--seed",
                "7",
            ]);
            assert_eq!(code, 0, "verify-kernel n={n} D={d}: {stderr}");
            let r = report(&stdout);
            worst_analytic = worst_analytic.max(r["errors"]["kernel_analytic"].as_f64().unwrap());
            worst_fd = worst_fd.max(r["errors"]["dilation_fd"].as_f64().unwrap());
        }
    }
    let ok = worst_analytic <= 1e-10 && worst_fd <= 1e-8;
    conclude(
        "03 kernel residuals",
        t0,
        5.0,
        ok,
        &format!(
            "all kernel elements, 15 (n, D) pairs: analytic {worst_analytic:.2e} (<= 1e-10), \
             dilation scale-derivative cross-check {worst_fd:.2e} (<= 1e-8)"
        ),
    );
}

#[test]
fn acceptance_04_constant_root() {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 6..=10u32 {
        let expected = (((n + 1) as f64) / ((n - 1) as f64)).sqrt();
        // Exactly-one-sign-change clause, on the stated interval.
        let lo = 1.01f64;
        let hi = 1e3f64;
        let ratio = ((hi - 1.0) / (lo - 1.0)).powf(1.0 / 240.0);
        let grid: Vec<f64> = (0..241).map(|i| 1.0 + (lo - 1.0) * ratio.powi(i)).collect();
        let brackets = sign_change_brackets(
            |d| {
                let p = ProblemParams::new(n, d).unwrap();
                let s = c_n_summands(&p).unwrap();
                s.iter().sum::<f64>() / s.iter().map(|v| v.abs()).sum::<f64>()
            },
            &grid,
            SIGN_FLOOR,
        );
        match c_n_root(n, 1e-12) {
            Ok(root) if (root - expected).abs() <= 1e-8 && brackets.len() == 1 => {
                lines.push(format!("n={n}: root {root:.10}"));
            }
            Ok(root) => {
                ok = false;
                lines.push(format!(
                    "n={n}: root {root:.10} vs expected {expected:.10}, {} sign changes",
                    brackets.len()
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!(
                    "n={n}: no root ({} sign changes): {e}",
                    brackets.len()
                ));
            }
        }
    }
    conclude(
        "04 aggregated-constant root",
        t0,
        10.0,
        ok,
        &format!(
            "expected sqrt((n+1)/(n-1)) within 1e-8; the four blocks of the constant cancel \
             identically, so no sign change exists on (1.01, 1e3]. {}",
            lines.join("; ")
        ),
    );
}

#[test]
fn acceptance_05_constant_asymptotics() {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [6u32, 8, 10] {
        match c_n_asymptotics(n, AsymptoticRegime::NearOne) {
            Ok(probe) => {
                let slope = probe.slope.unwrap();
                let want = -(n as f64) / 2.0;
                let slope_ok = (slope - want).abs() <= 0.02 * want.abs();
                let positive = probe.values.iter().all(|v| *v > 0.0);
                if !(slope_ok && positive) {
                    ok = false;
                }
                lines.push(format!(
                    "n={n} near-one: slope {slope:.3} vs {want}, values positive: {positive}"
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("n={n} near-one: {e}"));
            }
        }
        match c_n_asymptotics(n, AsymptoticRegime::Infinity) {
            Ok(probe) => {
                let ratios = probe.ratios.unwrap();
                let negative = ratios.iter().all(|r| *r < 0.0);
                if !negative {
                    ok = false;
                }
                lines.push(format!("n={n} infinity: ratios {ratios:?}"));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("n={n} infinity: {e}"));
            }
        }
    }
    conclude(
        "05 aggregated-constant asymptotics",
        t0,
        10.0,
        ok,
        &format!(
            "expected slope -n/2 near D = 1 and a stable negative ratio at large D; the \
             constant is cancellation noise in both regimes. {}",
            lines.join("; ")
        ),
    );
}

#[test]
fn acceptance_06_energy_expansion_coefficients() {
    let t0 = Instant::now();
    let params = ProblemParams::new(6, 1.5).unwrap();
    let domain = ModelDomain::equal(1.0, 5, 1.0).unwrap();
    let spec = QuadratureSpec::default();
    let fit = expansion_fit(&params, &domain, &grid_deltas(), &spec).unwrap();
    let e_flat = bubble_energy_constant(&params, &spec).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for block in &fit.blocks {
        if block.rel_error > 0.01 {
            ok = false;
        }
        parts.push(format!("{} {:.2e}", block.name, block.rel_error));
    }
    // The aggregate reference is C_6(1.5) H(0), which cancels identically;
    // "matches within 1%" degenerates, so agreement is certified at the fit
    // noise floor instead: both the fitted and the predicted coefficient
    // must sit below 1e-3 of the flat energy.
    let agg_fitted = fit.aggregate.slope.abs() / e_flat.abs();
    let agg_predicted = fit.aggregate.reference.abs() / e_flat.abs();
    if agg_fitted > 1e-3 || agg_predicted > 1e-3 {
        ok = false;
    }
    parts.push(format!(
        "aggregate fitted {agg_fitted:.2e} and predicted {agg_predicted:.2e} of the flat \
         energy (both <= 1e-3; the constant cancels identically)"
    ));
    if fit.mass.rel_error > 0.01 {
        ok = false;
    }
    parts.push(format!("mass {:.2e}", fit.mass.rel_error));
    conclude(
        "06 energy expansion coefficients",
        t0,
        120.0,
        ok,
        &format!(
            "n=6, D=1.5, equal curvature 1, 8-point grid; per-term relative errors \
             (<= 1e-2): {}",
            parts.join(", ")
        ),
    );
}

#[test]
fn acceptance_07_flat_boundary_degeneration() {
    let t0 = Instant::now();
    let params = ProblemParams::new(6, 1.5).unwrap();
    let domain = ModelDomain::equal(0.0, 5, 1.0).unwrap();
    let spec = QuadratureSpec::default();
    let fit = expansion_fit(&params, &domain, &grid_deltas(), &spec).unwrap();
    let e_flat = bubble_energy_constant(&params, &spec).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for block in fit.blocks.iter().chain([&fit.aggregate]) {
        let noise = block.slope.abs() / e_flat.abs();
        if noise > 1e-3 {
            ok = false;
        }
        parts.push(format!("{} {:.2e}", block.name, noise));
    }
    let intercept_err = (fit.aggregate.intercept - e_flat).abs() / e_flat.abs();
    if intercept_err > 5e-3 {
        ok = false;
    }
    conclude(
        "07 flat-boundary degeneration",
        t0,
        60.0,
        ok,
        &format!(
            "k = 0: first-order coefficients over the flat energy (<= 1e-3): {}; \
             intercept error {intercept_err:.2e} (<= 5e-3)",
            parts.join(", ")
        ),
    );
}

#[test]
fn acceptance_08_residual_norm_scalings() {
    let t0 = Instant::now();
    let params = ProblemParams::new(7, 1.5).unwrap();
    let domain = ModelDomain::equal(1.0, 6, 1.0).unwrap();
    let spec = QuadratureSpec::default();
    let deltas = grid_deltas();
    let norms: Vec<_> = deltas
        .iter()
        .map(|d| residual_norm_components(&params, &domain, *d, &spec).unwrap())
        .collect();
    let slope_of = |pick: fn(&blowup_core::energy::ResidualNorms) -> f64| -> f64 {
        let ys: Vec<f64> = norms.iter().map(pick).collect();
        log_log_slope(&deltas, &ys).unwrap().coefficients[1]
    };
    let cases: [(&str, f64, f64); 4] = [
        ("w_volume", slope_of(|n| n.w_volume), 2.0),
        ("interior_op", slope_of(|n| n.interior_op), 2.5),
        ("boundary_cutoff", slope_of(|n| n.boundary_cutoff), 2.5),
        ("h_trace", slope_of(|n| n.h_trace), 1.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, slope, want) in cases {
        let rel = (slope - want).abs() / want;
        let this = rel <= 0.02;
        if !this {
            ok = false;
        }
        parts.push(format!(
            "{name} {slope:.4} vs {want} ({rel:.1e}{})",
            if this { "" } else { ", out of tolerance" },
        ));
    }
    conclude(
        "08 residual-norm scalings",
        t0,
        120.0,
        ok,
        &format!(
            "n=7 log-log slopes over [1e-3, 1e-2] (+- 2%): {}; the w_volume and h_trace \
             misses are intrinsic finite-window corrections of the defined norms (cutoff \
             tail ~ delta^(7/9), curvature variation ~ delta^(4/7)), confirmed against \
             25-digit quadrature; the asymptotic upper bounds delta^2 and delta^1 do hold",
            parts.join("; ")
        ),
    );
}

#[test]
fn acceptance_09_reduced_critical_point() {
    let t0 = Instant::now();
    let params = ProblemParams::new(6, 1.5).unwrap();
    let hess = (0..5)
        .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let model = CriticalPointModel::new(2.0, hess, vec![0.0; 5]).unwrap();
    let rp = ReducedEnergyParams::new(1.0, (0.0, 1e3)).unwrap();
    let spec = QuadratureSpec::default();

    // The Newton machinery itself, driven by an injected negative constant.
    let l2 = 12711.610501788393;
    let mech = solve_reduced_model(-1000.0, l2, &model, &rp, 1e-12).unwrap();
    let mech_ok = mech.iterations <= 5
        && (mech.d - 2000.0 / l2).abs() <= 1e-10 * (2000.0 / l2)
        && mech.gradient_norm <= 1e-10;

    let main = solve_critical_point(&params, &model, &rp, 1e-12, &spec);
    let control = solve_critical_point(
        &ProblemParams::new(6, 1.1).unwrap(),
        &model,
        &rp,
        1e-12,
        &spec,
    );
    let control_ok = matches!(control, Err(Error::Regime(_)));
    let (main_ok, main_msg) = match &main {
        Ok(cp) => (
            cp.iterations <= 5 && cp.d > 0.0 && cp.gradient_norm <= 1e-10,
            format!("d* = {:.6e} in {} iterations", cp.d, cp.iterations),
        ),
        Err(e) => (false, format!("{e}")),
    };
    let ok = mech_ok && main_ok && control_ok;
    conclude(
        "09 reduced critical point",
        t0,
        1.0,
        ok,
        &format!(
            "Newton machinery on an injected negative constant: {} iterations, offset to \
             closed form; real constant at n=6, D=1.5: {main_msg}; D=1.1 control raises \
             the regime error: {control_ok}",
            mech.iterations
        ),
    );
}

#[test]
fn acceptance_10_cli_determinism_and_exit_codes() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut notes = Vec::new();

    // Bit-identical CSV across repeated runs and thread caps, on both the
    // seeded-sampling and the Monte Carlo paths.
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let common = [
        "energy",
        "--n",
        "6",
        "--D",
        "1.5",
        "--curvatures",
        "1.0,1.1,0.9,1.0,1.2",
        "--deltas",
        "0.01",
        "--mc-samples",
        "20000",
        "--seed",
        "11",
        "--format",
        "csv",
    ];
    for (path, threads) in [(&csv_a, None), (&csv_b, Some("1"))] {
        let mut cmd = Command::new(bin());
        cmd.args(common).arg("--out").arg(path);
        match threads {
            Some(t) => cmd.env("BLOWUPLAB_THREADS", t),
            None => cmd.env_remove("BLOWUPLAB_THREADS"),
        };
        let out = cmd.output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    if std::fs::read(&csv_a).unwrap() != std::fs::read(&csv_b).unwrap() {
        ok = false;
        notes.push("monte-carlo CSV differs across runs/thread caps".to_string());
    }

    let (c1, s1, _) = run_cli(&["verify-bubble", "--n", "6", "--D", "1.5", "--seed", "3"]);
    let (c2, s2, _) = run_cli(&["verify-bubble", "--n", "6", "--D", "1.5", "--seed", "3"]);
    assert_eq!((c1, c2), (0, 0));
    let mut j1 = report(&s1);
    let mut j2 = report(&s2);
    j1.as_object_mut().unwrap().remove("wall_time");
    j2.as_object_mut().unwrap().remove("wall_time");
    if j1 != j2 {
        ok = false;
        notes.push("JSON reports differ beyond wall_time".to_string());
    }

    // Exit-code matrix: 0 = pass, 1 = input validation, 2 = numerical
    // failure or failed check.
    let bad_config = dir.path().join("bad.json");
    std::fs::write(&bad_config, r#"{"n": 6, "dleta": 0.1}"#).unwrap();
    let bad_config = bad_config.to_str().unwrap();
    let matrix: &[(&[&str], i32)] = &[
        (
            &[
                "beta",
                "--n",
                "6",
                "--m",
                "2",
                "--k",
                "6",
                "--D",
                "1.41421356",
                "--method",
                "both",
            ],
            0,
        ),
        (
            &[
                "cn-scan", "--n", "6", "--D-min", "1.05", "--D-max", "3", "--steps", "25",
            ],
            0,
        ),
        (
            &[
                "verify-kernel",
                "--n",
                "6",
                "--D",
                "1.5",
                "--points",
                "200",
                "--seed",
                "7",
            ],
            0,
        ),
        (&["energy", "--n", "6", "--D", "1.5", "--deltas", "0.01"], 0),
        (&["beta", "--n", "6", "--m", "8", "--k", "6", "--D", "2"], 1),
        (&["verify-bubble", "--n", "6", "--D", "0.9"], 1),
        (
            &[
                "beta", "--n", "6", "--m", "2", "--k", "6", "--D", "1.5", "--bogus",
            ],
            1,
        ),
        (
            &[
                "cn-scan", "--n", "6", "--D-min", "1.05", "--D-max", "3", "--steps", "1",
            ],
            1,
        ),
        (&["expansion", "--config", bad_config], 1),
        (&["energy", "--n", "6", "--curvatures", "1,1"], 1),
        (&["energy", "--n", "6", "--deltas", "0.5"], 1),
        (&["cn-root", "--n", "6"], 2),
        (&["cn-asym", "--n", "6", "--regime", "infinity"], 2),
        (&["cn-asym", "--n", "6", "--regime", "near-one"], 2),
        (
            &["critical-point", "--n", "6", "--D", "1.5", "--H0", "2"],
            2,
        ),
        (&["residual-norms", "--n", "7", "--D", "1.5"], 2),
    ];
    for (args, want) in matrix {
        let (code, _, stderr) = run_cli(args);
        if code != *want {
            ok = false;
            notes.push(format!("{args:?}: exit {code}, expected {want} ({stderr})"));
        }
    }
    conclude(
        "10 cli determinism and exit codes",
        t0,
        30.0,
        ok,
        &if notes.is_empty() {
            format!(
                "bit-identical CSV on the seeded Monte Carlo path, wall-time-stable JSON, \
                 and the {}-entry exit-code matrix all hold",
                matrix.len()
            )
        } else {
            notes.join("; ")
        },
    );
}
