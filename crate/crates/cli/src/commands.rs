use std::fs;

use serde::Serialize;
use serde_json::json;

use masonry_core::calibration::{grid_search, joint_grid, log_space, mean_abs_error, run_calibration_suite};
use masonry_core::geometry::{experimental_stiffness, place_arch_bricks, ArchLayout};
use masonry_core::optimizer::{analysis_budget, gen_modified_sequential, gen_optimized3, BudgetMode, OptimizedPlan};
use masonry_core::sequences::{
    gen_cantilever, gen_sequential, simulate_plan, write_steps_csv, ReportSummary, SequenceReport,
};
use masonry_core::{Error, Result};

use crate::output::{num, provenance, write_csv, write_file, write_json};
use crate::{Command, Optimised, RunConfig, TwoRobot};

pub fn run(run: &RunConfig) -> Result<()> {
    if !matches!(run.command, Command::Budget) {
        fs::create_dir_all(&run.out).map_err(|e| Error::Io(format!("{}: {e}", run.out.display())))?;
    }
    match &run.command {
        Command::Calibrate { grid } => calibrate(run, *grid),
        Command::Simulate { method } => simulate(run, *method),
        Command::Optimize { method } => optimize(run, *method),
        Command::Compare => compare(run),
        Command::Budget => budget(run),
    }
}

fn calibrate(run: &RunConfig, grid: Option<usize>) -> Result<()> {
    let specs = run.settings.vault_specs()?;
    let measured = experimental_stiffness();
    let joint = run.settings.joint;
    run.log(1, format!("calibrating {} vault tests", specs.len()));
    let records = run_calibration_suite(&specs, &measured, joint)?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.test.to_string(),
                num(Some(r.k_e), 1),
                num(r.k_m, 1),
                num(r.e_rel, 1),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(run, "calibration.csv", &["test", "k_e", "k_m", "e_rel", "error"], &rows)?;

    let mae = mean_abs_error(&records);
    let surface = match grid {
        None => json!({
            "best": joint,
            "best_error": mae,
            "surface": [{ "joint": joint, "mean_abs_error": mae,
                          "failed_tests": records.iter().filter(|r| r.failed()).count() }],
        }),
        Some(n) => {
            if n < 2 {
                return Err(Error::Config(format!("--grid needs at least 2 points per axis, got {n}")));
            }
            let points = joint_grid(&log_space(1.0e7, 1.0e9, n), &log_space(1.0e5, 1.0e7, n), joint.rigid_factor);
            run.log(1, format!("scanning {} joint settings", points.len()));
            serde_json::to_value(grid_search(&specs, &measured, &points)?)?
        }
    };
    write_json(run, "error_surface.json", &surface)?;
    println!("mean |e_rel| = {}%", num(mae, 1));
    Ok(())
}

fn layout(run: &RunConfig) -> Result<ArchLayout> {
    place_arch_bricks(&run.settings.arch)
}

fn simulate(run: &RunConfig, method: TwoRobot) -> Result<()> {
    let lay = layout(run)?;
    let n = lay.n_bricks();
    let plan = match method {
        TwoRobot::Sequential => gen_sequential(n),
        TwoRobot::Cantilever => gen_cantilever(n),
    };
    run.log(1, format!("{} plan, {} steps", plan.method.name(), plan.steps.len()));
    let report = simulate_plan(&plan, &lay, run.settings.joint, run.settings.gravity)?;
    steps_csv(run, "steps.csv", &report)?;
    write_json(
        run,
        "summary.json",
        &json!({ "summary": ReportSummary::new(&report), "max_imbalance": report.max_imbalance() }),
    )?;
    print_summary(&report);
    Ok(())
}

fn steps_csv(run: &RunConfig, name: &str, report: &SequenceReport) -> Result<()> {
    let mut buf = Vec::new();
    write_steps_csv(&mut buf, report, &provenance(run))?;
    let path = run.out.join(name);
    write_file(&path, &buf)?;
    run.log(1, format!("wrote {}", path.display()));
    Ok(())
}

fn print_summary(r: &SequenceReport) {
    println!(
        "{}: {} steps, max F_rob {:.1} N, max M_sup {:.2} N·m, T_max {:.1} N, Δ_max {:.2}",
        r.method.name(),
        r.rows.len(),
        r.max_robot_force(),
        r.max_m_sup,
        r.tension.max,
        r.max_delta
    );
}

fn optimised(run: &RunConfig, lay: &ArchLayout, method: Optimised) -> Result<OptimizedPlan> {
    let (joint, g) = (run.settings.joint, run.settings.gravity);
    match method {
        Optimised::Full3 => gen_optimized3(lay, joint, g),
        Optimised::Modified => gen_modified_sequential(lay, joint, g),
    }
}

#[derive(Serialize)]
struct Budget {
    candidate_solves: usize,
    simplified: u64,
    exhaustive: u64,
    worst_imbalance: f64,
}

fn optimize(run: &RunConfig, method: Optimised) -> Result<()> {
    let lay = layout(run)?;
    let n = lay.n_bricks();
    run.log(1, format!("optimising supports for {n} bricks"));
    let opt = optimised(run, &lay, method)?;
    let report = simulate_plan(&opt.plan, &lay, run.settings.joint, run.settings.gravity)?;
    steps_csv(run, "optimized_steps.csv", &report)?;
    write_json(run, "cycles.json", &json!({ "cycles": opt.cycles }))?;
    let budget = Budget {
        candidate_solves: opt.solves,
        simplified: analysis_budget(n, BudgetMode::Simplified)?,
        exhaustive: analysis_budget(n, BudgetMode::Exhaustive)?,
        worst_imbalance: opt.worst_imbalance,
    };
    write_json(
        run,
        "summary.json",
        &json!({
            "summary": ReportSummary::new(&report),
            "max_imbalance": report.max_imbalance(),
            "budget": budget,
        }),
    )?;
    print_summary(&report);
    println!(
        "{} cycles, {} candidate solves (budget {} simplified, {} exhaustive)",
        opt.cycles.len(),
        budget.candidate_solves,
        budget.simplified,
        budget.exhaustive
    );
    Ok(())
}

#[derive(Serialize)]
struct ComparisonRow {
    metric: &'static str,
    unit: &'static str,
    sequential: Option<f64>,
    cantilever: Option<f64>,
    optimized3: Option<f64>,
}

fn compare(run: &RunConfig) -> Result<()> {
    let lay = layout(run)?;
    let n = lay.n_bricks();
    let (joint, g) = (run.settings.joint, run.settings.gravity);
    run.log(1, "sequential and cantilever plans");
    let seq = simulate_plan(&gen_sequential(n), &lay, joint, g)?;
    let cant = simulate_plan(&gen_cantilever(n), &lay, joint, g)?;
    run.log(1, "optimised three-robot plan");
    let opt = optimised(run, &lay, Optimised::Full3)?;
    let three = simulate_plan(&opt.plan, &lay, joint, g)?;

    let two_robot = |r: &SequenceReport, i: usize| (i < 2).then_some(r.max_f_rob[i]);
    let mut rows = Vec::new();
    for (i, metric) in ["F_rob1", "F_rob2", "F_rob3"].into_iter().enumerate() {
        rows.push(ComparisonRow {
            metric,
            unit: "N",
            sequential: two_robot(&seq, i),
            cantilever: two_robot(&cant, i),
            optimized3: Some(three.max_f_rob[i]),
        });
    }
    let all = |f: fn(&SequenceReport) -> f64| (Some(f(&seq)), Some(f(&cant)), Some(f(&three)));
    for (metric, unit, f) in [
        ("M_sup", "N·m", (|r: &SequenceReport| r.max_m_sup) as fn(&SequenceReport) -> f64),
        ("T_max", "N", |r| r.tension.max),
        ("Δ_max", "10⁻³ mm", |r| r.max_delta),
    ] {
        let (sequential, cantilever, optimized3) = all(f);
        rows.push(ComparisonRow {
            metric,
            unit,
            sequential,
            cantilever,
            optimized3,
        });
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.metric.into(),
                r.unit.into(),
                num(r.sequential, 2),
                num(r.cantilever, 2),
                num(r.optimized3, 2),
            ]
        })
        .collect();
    write_csv(
        run,
        "comparison.csv",
        &["metric", "unit", "sequential", "cantilever", "optimized3"],
        &table,
    )?;
    write_json(run, "comparison.json", &json!({ "bricks": n, "rows": rows }))?;
    println!("{:<8}{:>12}{:>12}{:>12}", "", "sequential", "cantilever", "optimized3");
    for r in &table {
        let cell = |s: &str| if s.is_empty() { "--".to_string() } else { s.to_string() };
        println!("{:<8}{:>12}{:>12}{:>12}", r[0], cell(&r[2]), cell(&r[3]), cell(&r[4]));
    }
    Ok(())
}

fn budget(run: &RunConfig) -> Result<()> {
    let n = run.settings.arch.n_bricks;
    let simplified = analysis_budget(n, BudgetMode::Simplified)?;
    let exhaustive = analysis_budget(n, BudgetMode::Exhaustive)?;
    println!("bricks simplified exhaustive");
    println!("{n} {simplified} {exhaustive}");
    Ok(())
}
