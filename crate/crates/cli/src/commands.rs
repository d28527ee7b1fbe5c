use std::sync::Arc;

use frac_gelfand::fraclap::{assemble, RadialFunction, RadialGrid, TailSpec};
use frac_gelfand::gelfand::{
    singular_profile_diagnostic, singular_solution_residual_on, stability_eigenvalue, stability_inequality_check,
    torsion_center, Branch, BranchPoint, ContinuationConfig, GelfandSolver, SingularProfileReport, STABILITY_TOL,
};
use frac_gelfand::io::{bifurcation_data, bifurcation_script, branch_csv, sci, sig, BranchRecord, CSV_DIGITS, TABLE_DIGITS};
use frac_gelfand::threshold::threshold_table;
use frac_gelfand::{
    classify, epsilon_expansion, hardy_constant, lambda0, margin, operator_normalization, power_coefficient, Error,
    Params,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{emit, note_artifacts, say, Artifacts, Failure, Outcome};
use crate::{BranchArgs, Cli, Command, ContinuationArgs, DiagnoseArgs, GridArgs, ProblemArgs, StabilityArgs, ThresholdArgs, VerifyArgs};

/// Test-function exponents checked at every stable point.
const VERIFY_EPS: [f64; 3] = [0.05, 0.1, 0.2];
const VERIFY_REL: f64 = 1e-3;
const EPS_TABLE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

pub fn run(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::Constants(a) => constants(cli, a),
        Command::Threshold(a) => threshold(cli, a),
        Command::VerifyPowers(a) => verify_powers(cli, a),
        Command::Branch(a) => branch(cli, a),
        Command::Stability(a) => stability(cli, a),
        Command::Diagnose(a) => diagnose(cli, a),
    }
}

fn params(a: &ProblemArgs) -> Outcome<Params> {
    Ok(Params::new(a.n, a.s)?)
}

fn stem(p: &Params) -> String {
    format!("n{}_s{}", p.n(), p.s())
}

fn grid(g: &GridArgs) -> Outcome<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::graded(g.grid, g.grading)?))
}

fn t(x: f64) -> String {
    sig(x, TABLE_DIGITS)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), t)
}

fn constants(cli: &Cli, a: &ProblemArgs) -> Outcome<()> {
    let p = params(a)?;
    let verdict = classify(&p);
    let mut rows = vec![vec!["regime".into(), format!("{:?}", verdict.regime)]];
    let mut record = json!({ "n": p.n(), "s": p.s(), "regime": verdict.regime });
    if p.is_supercritical() {
        let l0 = lambda0(&p)?;
        let h = hardy_constant(&p)?;
        let m = margin(&p)?;
        rows.push(vec!["lambda0".into(), t(l0)]);
        rows.push(vec!["hardy_constant".into(), t(h)]);
        rows.push(vec!["margin".into(), t(m)]);
        record["lambda0"] = json!(l0);
        record["hardy_constant"] = json!(h);
        record["margin"] = json!(m);
    }
    if p.s() < 1.0 {
        let c = operator_normalization(&p)?;
        let z0: f64 = torsion_center(&p)?;
        rows.push(vec!["normalization".into(), t(c)]);
        rows.push(vec!["torsion_center".into(), t(z0)]);
        record["normalization"] = json!(c);
        record["torsion_center"] = json!(z0);
    }
    let mut art = Artifacts::new(cli)?;
    art.json(&format!("constants_{}.json", stem(&p)), &record)?;
    emit(cli.format, &["quantity", "value"], &rows, &record);
    note_artifacts(cli.format, art.written());
    Ok(())
}

fn threshold(cli: &Cli, a: &ThresholdArgs) -> Outcome<()> {
    if !(a.tol > 0.0 && a.tol < 1e-2) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 0.01), got {}", a.tol)));
    }
    let rows = threshold_table::<f64>(a.n_max, a.tol)?;
    let status = |r: &frac_gelfand::ThresholdRow| match (r.all_s_bounded, r.critical_s) {
        (true, _) => "bounded-for-all-s".to_string(),
        (false, Some(c)) => format!("bounded-for-s>{}", t(c)),
        (false, None) => "inconclusive-for-all-s".to_string(),
    };
    let probe = |r: &frac_gelfand::ThresholdRow, s: f64, fmt: &dyn Fn(f64) -> String| {
        r.margin_samples
            .iter()
            .find(|(x, _)| (*x - s).abs() < 1e-12)
            .map_or_else(|| "-".to_string(), |&(_, m)| fmt(m))
    };
    let csv_num = |x: f64| sci(x, CSV_DIGITS);
    let mut csv = String::from("n,critical_s,status,margin_s0.25,margin_s0.5,margin_s0.75\n");
    let mut table = Vec::new();
    for r in &rows {
        csv += &format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.critical_s.map_or_else(|| "none".into(), csv_num),
            status(r),
            probe(r, 0.25, &csv_num),
            probe(r, 0.5, &csv_num),
            probe(r, 0.75, &csv_num)
        );
        table.push(vec![
            r.n.to_string(),
            r.critical_s.map_or_else(|| "none".into(), t),
            status(r),
            probe(r, 0.25, &t),
            probe(r, 0.5, &t),
            probe(r, 0.75, &t),
        ]);
    }
    let mut art = Artifacts::new(cli)?;
    art.csv("threshold.csv", &csv)?;
    art.json("threshold.json", &rows)?;
    emit(
        cli.format,
        &["n", "critical_s", "status", "margin(0.25)", "margin(0.5)", "margin(0.75)"],
        &table,
        &serde_json::to_value(&rows).expect("rows serialize"),
    );
    note_artifacts(cli.format, art.written());
    Ok(())
}

#[derive(Serialize)]
struct PowerCase {
    alpha: f64,
    max_rel_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct EpsRow {
    eps: f64,
    hardy_limit: f64,
    hardy_error: f64,
    hardy_ratio: Option<f64>,
    lambda0_limit: f64,
    lambda0_error: f64,
    lambda0_ratio: Option<f64>,
}

fn verify_powers(cli: &Cli, a: &VerifyArgs) -> Outcome<()> {
    let p = params(&a.problem)?;
    if !p.is_supercritical() {
        return Err(Failure::Usage(format!("powers need n > 2s, got n = {}, s = {}", p.n(), p.s())));
    }
    let width = p.dim() - 2.0 * p.s();
    let alphas = if a.alpha.is_empty() { vec![0.5 * width] } else { a.alpha.clone() };
    if let Some(bad) = alphas.iter().find(|&&x| !(x > 0.0 && x < width)) {
        return Err(Failure::Usage(format!("--alpha {bad} must lie in (0, n - 2s) = (0, {width})")));
    }
    if !(a.tol > 0.0) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let op = assemble(&p, Arc::new(RadialGrid::graded(a.grid, frac_gelfand::fraclap::DEFAULT_GRADING)?))?;
    let s = p.s();
    let mut cases = Vec::new();
    for &alpha in &alphas {
        let c = power_coefficient(&p, alpha)?;
        let u = RadialFunction::from_fn(op.grid().clone(), TailSpec::Power { alpha, coeff: 1.0 }, true, |r| {
            r.powf(-alpha)
        })?;
        let out = op.apply(&u)?;
        let err = op.grid().nodes()[..op.size()]
            .iter()
            .zip(&out)
            .filter(|(&r, _)| (0.2..=0.8).contains(&r))
            .map(|(&r, &v)| {
                let want = c * r.powf(-alpha - 2.0 * s);
                ((v - want) / want).abs()
            })
            .fold(0.0, f64::max);
        cases.push(PowerCase {
            alpha,
            max_rel_error: err,
            pass: err <= a.tol,
        });
    }

    let mut csv = String::from("alpha,max_rel_error,pass\n");
    let mut rows = Vec::new();
    for c in &cases {
        csv += &format!("{},{},{}\n", sci(c.alpha, CSV_DIGITS), sci(c.max_rel_error, CSV_DIGITS), c.pass);
        rows.push(vec![t(c.alpha), t(c.max_rel_error), verdict(c.pass).into()]);
    }
    let mut art = Artifacts::new(cli)?;
    let name = stem(&p);
    art.csv(&format!("powers_{name}_N{}.csv", a.grid), &csv)?;
    let mut ok = cases.iter().all(|c| c.pass);

    let mut eps_rows = Vec::new();
    if a.eps_table {
        eps_rows = eps_table(&p)?;
        let judged = &eps_rows[EPS_TABLE.len() - 2..];
        // First order towards λ₀; at least first order towards H.
        let decade = |x: f64| x.log10();
        let eps_ok = judged.iter().all(|r| {
            let l = r.lambda0_ratio.is_some_and(|x| (decade(x) - 1.0).abs() <= 0.1);
            let h = r.hardy_ratio.is_some_and(|x| decade(x) >= 0.9);
            l && h
        });
        ok &= eps_ok;
        let mut csv = String::from("eps,hardy_limit,hardy_error,hardy_ratio,lambda0_limit,lambda0_error,lambda0_ratio\n");
        let ratio = |x: Option<f64>| x.map_or_else(|| "".into(), |v| sci(v, CSV_DIGITS));
        for r in &eps_rows {
            csv += &format!(
                "{},{},{},{},{},{},{}\n",
                sci(r.eps, CSV_DIGITS),
                sci(r.hardy_limit, CSV_DIGITS),
                sci(r.hardy_error, CSV_DIGITS),
                ratio(r.hardy_ratio),
                sci(r.lambda0_limit, CSV_DIGITS),
                sci(r.lambda0_error, CSV_DIGITS),
                ratio(r.lambda0_ratio)
            );
        }
        art.csv(&format!("eps_table_{name}.csv"), &csv)?;
    }
    let report = json!({ "cases": cases, "eps_table": eps_rows, "pass": ok });
    art.json(&format!("powers_{name}_N{}.json", a.grid), &report)?;

    emit(cli.format, &["alpha", "max_rel_error", "result"], &rows, &report);
    if a.eps_table && cli.format == crate::Format::Table {
        let table: Vec<Vec<String>> = eps_rows
            .iter()
            .map(|r| {
                vec![
                    t(r.eps),
                    t(r.hardy_limit),
                    t(r.hardy_error),
                    opt(r.hardy_ratio),
                    t(r.lambda0_limit),
                    t(r.lambda0_error),
                    opt(r.lambda0_ratio),
                ]
            })
            .collect();
        say(&format!(
            "\n{}",
            crate::output::table(
                &["eps", "C((n-2s-eps)/2)", "error", "ratio", "(2s/eps)C(n-2s-eps)", "error", "ratio"],
                &table
            )
        ));
    }
    note_artifacts(cli.format, art.written());
    if ok {
        Ok(())
    } else {
        let failing: Vec<String> = cases
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("alpha = {} (error {:e})", c.alpha, c.max_rel_error))
            .collect();
        let what = if failing.is_empty() { "epsilon table convergence".into() } else { failing.join(", ") };
        Err(Failure::Numerical(format!("tolerance not met: {what}")))
    }
}

fn eps_table(p: &Params) -> Outcome<Vec<EpsRow>> {
    let h = hardy_constant(p)?;
    let l0 = lambda0(p)?;
    let mut rows: Vec<EpsRow> = Vec::new();
    for &eps in &EPS_TABLE {
        let (a, b) = epsilon_expansion(p, eps)?;
        let (eh, el) = ((a - h).abs(), (b - l0).abs());
        let prev = rows.last();
        rows.push(EpsRow {
            eps,
            hardy_limit: a,
            hardy_error: eh,
            hardy_ratio: prev.map(|r| r.hardy_error / eh),
            lambda0_limit: b,
            lambda0_error: el,
            lambda0_ratio: prev.map(|r| r.lambda0_error / el),
        });
    }
    Ok(rows)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn continuation(p: Params, g: &GridArgs, c: &ContinuationArgs) -> Outcome<ContinuationConfig> {
    let mut cfg = ContinuationConfig::new(p, grid(g)?).with_peaks(c.peak_start, c.peak_max, c.peak_step);
    cfg.newton_tol = c.newton_tol;
    cfg.max_iters = c.max_iters;
    cfg.validate()?;
    Ok(cfg)
}

/// Trace, returning the partial branch and the failure when the solver stops early.
fn trace(cfg: ContinuationConfig) -> Outcome<(GelfandSolver, Branch, Option<Failure>)> {
    let solver = GelfandSolver::new(cfg)?;
    match solver.trace_branch() {
        Ok(b) => Ok((solver, b, None)),
        Err(Error::Branch { peak, source, partial }) => {
            let failure = Failure::Numerical(format!("solver stopped at peak {peak}: {source}"));
            Ok((solver, *partial, Some(failure)))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_branch(art: &mut Artifacts, name: &str, b: &Branch, profiles: bool) -> Outcome<()> {
    art.csv(&format!("branch_{name}.csv"), &branch_csv(b))?;
    art.json(&format!("branch_{name}.json"), &BranchRecord::new(b, profiles))?;
    let data = format!("bifurcation_{name}.dat");
    art.csv(&data, &bifurcation_data(b))?;
    let png = format!("bifurcation_{name}.png");
    let title = format!("n = {}, s = {}", b.params().n(), b.params().s());
    art.csv(&format!("bifurcation_{name}.gp"), &bifurcation_script(&data, &png, &title))?;
    Ok(())
}

fn branch_summary(b: &Branch) -> Vec<Vec<String>> {
    let fold_peak = b.fold_index().map(|k| b.points()[k].peak);
    vec![
        vec!["points".into(), b.len().to_string()],
        vec!["fold_detected".into(), b.fold_detected().to_string()],
        vec!["fold_peak".into(), opt(fold_peak)],
        vec!["lambda_star_estimate".into(), t(b.lambda_star_estimate())],
        vec!["lambda_star_fit".into(), opt(b.lambda_star_fit())],
    ]
}

#[derive(Serialize)]
struct InequalityRow {
    peak: f64,
    eps: f64,
    lhs: f64,
    rhs: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Verification {
    stable_points: usize,
    unstable_points: Vec<f64>,
    inequality: Vec<InequalityRow>,
    pass: bool,
}

fn verify_branch(solver: &GelfandSolver, b: &Branch, rho0: f64) -> Outcome<Verification> {
    let op = solver.operator();
    let pre = b.pre_fold();
    let unstable_points: Vec<f64> = pre
        .iter()
        .filter(|p| p.stability_eig < -STABILITY_TOL)
        .map(|p| p.peak)
        .collect();
    let mut inequality = Vec::new();
    for p in pre.iter().filter(|p| p.stability_eig >= -STABILITY_TOL) {
        for eps in VERIFY_EPS {
            let c = stability_inequality_check(op, p, rho0, eps)?;
            inequality.push(InequalityRow {
                peak: p.peak,
                eps,
                lhs: c.lhs,
                rhs: c.rhs,
                pass: c.holds(VERIFY_REL),
            });
        }
    }
    let pass = unstable_points.is_empty() && inequality.iter().all(|r| r.pass);
    Ok(Verification {
        stable_points: pre.len() - unstable_points.len(),
        unstable_points,
        inequality,
        pass,
    })
}

fn branch(cli: &Cli, a: &BranchArgs) -> Outcome<()> {
    let p = params(&a.problem)?;
    if let Some(sigma) = a.diagnose_sigma {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Failure::Usage(format!("--diagnose-sigma must lie in (0, 1), got {sigma}")));
        }
    }
    if !(a.rho0 > 0.0 && a.rho0 < 1.0) {
        return Err(Failure::Usage(format!("--rho0 must lie in (0, 1), got {}", a.rho0)));
    }
    let cfg = continuation(p, &a.grid, &a.continuation)?;
    let (solver, b, stopped) = trace(cfg)?;
    let name = stem(&p);
    let mut art = Artifacts::new(cli)?;
    write_branch(&mut art, &name, &b, a.profiles)?;

    let mut rows = branch_summary(&b);
    let mut report = json!({
        "points": b.len(),
        "fold_detected": b.fold_detected(),
        "fold_index": b.fold_index(),
        "lambda_star_estimate": b.lambda_star_estimate(),
        "lambda_star_fit": b.lambda_star_fit(),
        "complete": stopped.is_none(),
    });
    let mut failure = stopped;

    if a.verify {
        let v = verify_branch(&solver, &b, a.rho0)?;
        let mut csv = String::from("peak,eps,lhs,rhs,pass\n");
        for r in &v.inequality {
            csv += &format!(
                "{},{},{},{},{}\n",
                sci(r.peak, CSV_DIGITS),
                r.eps,
                sci(r.lhs, CSV_DIGITS),
                sci(r.rhs, CSV_DIGITS),
                r.pass
            );
        }
        art.csv(&format!("verify_{name}.csv"), &csv)?;
        art.json(&format!("verify_{name}.json"), &v)?;
        let failed = v.inequality.iter().filter(|r| !r.pass).count();
        rows.push(vec!["stable_pre_fold_points".into(), v.stable_points.to_string()]);
        rows.push(vec!["unstable_pre_fold_points".into(), v.unstable_points.len().to_string()]);
        rows.push(vec![
            "inequality_checks".into(),
            format!("{} ({} failed) {}", v.inequality.len(), failed, verdict(v.pass)),
        ]);
        report["verify_pass"] = json!(v.pass);
        if !v.pass && failure.is_none() {
            failure = Some(Failure::Numerical(format!(
                "verification failed: {} unstable pre-fold points, {failed} inequality checks",
                v.unstable_points.len()
            )));
        }
    }

    if let Some(sigma) = a.diagnose_sigma {
        if !b.is_empty() {
            let d = singular_profile_diagnostic(&b, sigma)?;
            art.json(&format!("diagnostic_{name}.json"), &d)?;
            rows.extend(diagnostic_rows(&d));
            report["diagnostic"] = serde_json::to_value(&d).expect("report serializes");
        }
    }

    emit(cli.format, &["quantity", "value"], &rows, &report);
    note_artifacts(cli.format, art.written());
    failure.map_or(Ok(()), Err)
}

fn diagnostic_rows(d: &SingularProfileReport) -> Vec<Vec<String>> {
    let probes: Vec<String> = d.probe_ratios.iter().map(|(m, q)| format!("{}:{}", t(*m), t(*q))).collect();
    let mut rows = vec![
        vec!["diagnostic_sigma".into(), t(d.sigma)],
        vec!["diagnostic_peak".into(), t(d.peak)],
        vec!["threshold_radius".into(), opt(d.threshold_radius)],
        vec!["probe_ratios".into(), probes.join(" ")],
        vec!["ratio_increasing".into(), d.ratio_increasing.to_string()],
    ];
    if let Some(w) = &d.warning {
        rows.push(vec!["warning".into(), w.clone()]);
    }
    rows
}

fn stability(cli: &Cli, a: &StabilityArgs) -> Outcome<()> {
    let p = params(&a.problem)?;
    let g = grid(&a.grid)?;
    let name = stem(&p);
    let point = if a.singular {
        if !p.is_supercritical() {
            return Err(Failure::Usage(format!("the singular solution needs n > 2s, got n = {}, s = {}", p.n(), p.s())));
        }
        let op = assemble(&p, g.clone())?;
        let s = p.s();
        let profile = RadialFunction::from_fn(g, TailSpec::LogPower { coeff: 1.0 }, true, |r| -2.0 * s * r.ln())?;
        let mut point = BranchPoint {
            lambda: lambda0(&p)?,
            profile,
            peak: f64::INFINITY,
            stability_eig: f64::NAN,
            newton_iters: 0,
            residual_norm: singular_solution_residual_on(&op)?,
        };
        point.stability_eig = stability_eigenvalue(&op, &point)?;
        point
    } else {
        let peak = a.peak.expect("clap requires --peak without --singular");
        let cfg = ContinuationConfig::new(p, g);
        let solver = GelfandSolver::new(cfg)?;
        solver.solve_at_peak(peak, None)?
    };
    let stable = point.stability_eig >= -STABILITY_TOL;
    let mut rows = vec![
        vec!["lambda".into(), t(point.lambda)],
        vec!["peak".into(), if point.peak.is_finite() { t(point.peak) } else { "inf".into() }],
        vec!["stability_eig".into(), t(point.stability_eig)],
        vec!["stable".into(), stable.to_string()],
        vec!["residual_norm".into(), t(point.residual_norm)],
    ];
    let mut report = json!({
        "singular": a.singular,
        "lambda": point.lambda,
        "peak": if point.peak.is_finite() { json!(point.peak) } else { json!(null) },
        "stability_eig": point.stability_eig,
        "stable": stable,
        "residual_norm": point.residual_norm,
    });
    if a.singular {
        let h = hardy_constant(&p)?;
        rows.push(vec!["hardy_constant".into(), t(h)]);
        rows.push(vec!["lambda0_below_hardy".into(), (point.lambda <= h).to_string()]);
        report["hardy_constant"] = json!(h);
    }
    let mut art = Artifacts::new(cli)?;
    let file = if a.singular { format!("stability_{name}_singular.json") } else { format!("stability_{name}.json") };
    art.json(&file, &report)?;
    emit(cli.format, &["quantity", "value"], &rows, &report);
    note_artifacts(cli.format, art.written());
    Ok(())
}

fn diagnose(cli: &Cli, a: &DiagnoseArgs) -> Outcome<()> {
    let p = params(&a.problem)?;
    if !(a.sigma > 0.0 && a.sigma < 1.0) {
        return Err(Failure::Usage(format!("--sigma must lie in (0, 1), got {}", a.sigma)));
    }
    let cfg = continuation(p, &a.grid, &a.continuation)?;
    let (solver, b, stopped) = trace(cfg)?;
    if b.is_empty() {
        return Err(stopped.unwrap_or_else(|| Failure::Numerical("empty branch".into())));
    }
    let d = singular_profile_diagnostic(&b, a.sigma)?;
    let name = stem(&p);
    let mut art = Artifacts::new(cli)?;
    write_branch(&mut art, &name, &b, false)?;
    let mut report = serde_json::to_value(&d).expect("report serializes");
    let verdict = classify(&p);
    report["regime"] = json!(verdict.regime);
    let mut rows = vec![vec!["regime".into(), format!("{:?}", verdict.regime)]];
    rows.extend(branch_summary(&b));
    rows.extend(diagnostic_rows(&d));
    if p.is_supercritical() {
        let r = singular_solution_residual_on(solver.operator())?;
        report["singular_solution_residual"] = json!(r);
        rows.push(vec!["singular_solution_residual".into(), t(r)]);
    }
    art.json(&format!("diagnostic_{name}.json"), &report)?;
    emit(cli.format, &["quantity", "value"], &rows, &report);
    note_artifacts(cli.format, art.written());
    stopped.map_or(Ok(()), Err)
}
