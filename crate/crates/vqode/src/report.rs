//! Experiment orchestration and report emission: per-seed trace and
//! evaluation CSVs, an aggregate CSV and a structured-text summary.
//! Identical inputs produce byte-identical report files.

use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{PreparedRun, SolverSetupOwnedAny};
use crate::error::VqodeError;
use crate::training::{evaluate_on_grid, run_training, TrainingTrace};

/// One evaluated point of the final model against the reference solution.
#[derive(Debug, Clone, Copy)]
pub struct EvalRow {
    pub x: f64,
    pub f: f64,
    pub f_ref: f64,
    pub f1: f64,
    pub f1_ref: f64,
    pub f2: f64,
    pub f2_ref: f64,
    pub de_loss: f64,
}

/// Per-seed outcome.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub trace: TrainingTrace,
    pub eval: Vec<EvalRow>,
    /// Mean of the per-point squared DE residuals over the evaluation grid.
    pub de_eval: f64,
    /// Squared boundary residuals at the final state.
    pub bc_eval: f64,
}

/// All seeds of one configured run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub label: String,
    pub seeds: Vec<SeedResult>,
}

impl RunReport {
    pub fn best_de_eval(&self) -> f64 {
        self.seeds.iter().map(|s| s.de_eval).fold(f64::INFINITY, f64::min)
    }

    pub fn part1_stats(&self) -> Option<(f64, f64, f64, f64)> {
        let vals: Vec<(usize, f64)> =
            self.seeds.iter().filter_map(|s| s.trace.part1_end).collect();
        if vals.len() != self.seeds.len() || vals.is_empty() {
            return None;
        }
        let n = vals.len() as f64;
        let iters: Vec<f64> = vals.iter().map(|v| v.0 as f64).collect();
        let losses: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
        let cv = |v: &[f64]| {
            let m = mean(v);
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            var.sqrt() / m
        };
        Some((mean(&iters), cv(&iters), mean(&losses), cv(&losses)))
    }
}

/// Execute every seed of a prepared run.
pub fn execute(run: &PreparedRun) -> Result<RunReport, VqodeError> {
    let seeds: Vec<SeedResult> = run
        .seeds
        .par_iter()
        .map(|&seed| execute_seed(run, seed))
        .collect::<Result<_, _>>()?;
    Ok(RunReport { label: run.label.clone(), seeds })
}

fn execute_seed(run: &PreparedRun, seed: u64) -> Result<SeedResult, VqodeError> {
    match &run.setup {
        SolverSetupOwnedAny::Dmss(owned) => {
            let setup = owned.borrow();
            let trace = run_training(&setup, &run.schedule, seed)?;
            let rows = evaluate_on_grid(&setup, &run.eval_map, &trace.theta, run.eval_points)?;
            let eval: Vec<EvalRow> = rows
                .iter()
                .map(|&(t, f, f1, f2, de)| {
                    let (fr, f1r, f2r) = owned.problem.analytical(t).expect("underdamped");
                    EvalRow { x: t, f, f_ref: fr, f1, f1_ref: f1r, f2, f2_ref: f2r, de_loss: de }
                })
                .collect();
            let de_eval = mean(eval.iter().map(|r| r.de_loss));
            // boundary residuals at t = 0 from a dedicated evaluation
            let (f0, f10, _, _) = crate::training::evaluate_at(&setup, &trace.theta, 0.0)?;
            let bc_eval =
                (f0 - owned.problem.u0).powi(2) + (f10 - owned.problem.du0).powi(2);
            Ok(SeedResult { seed, trace, eval, de_eval, bc_eval })
        }
        SolverSetupOwnedAny::Poisson(owned) => {
            let setup = owned.borrow();
            let trace = run_training(&setup, &run.schedule, seed)?;
            let rows = evaluate_on_grid(&setup, &run.eval_map, &trace.theta, run.eval_points)?;
            let eval: Vec<EvalRow> = rows
                .iter()
                .map(|&(t, f, f1, f2, de)| {
                    let (fr, f1r, f2r) = owned.problem.analytical(t);
                    EvalRow { x: t, f, f_ref: fr, f1, f1_ref: f1r, f2, f2_ref: f2r, de_loss: de }
                })
                .collect();
            let de_eval = mean(eval.iter().map(|r| r.de_loss));
            let bc_eval = trace.last().map(|r| r.loss.cs).unwrap_or(f64::NAN);
            Ok(SeedResult { seed, trace, eval, de_eval, bc_eval })
        }
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Write the deterministic report file set; returns the paths written.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, VqodeError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| VqodeError::Io(format!("create {}: {e}", dir.display())))?;
    let mut written = Vec::new();

    for seed_result in &report.seeds {
        let mut trace_csv = String::new();
        trace_csv.push_str(
            "iter,loss_total,loss_de,loss_cs,loss_reg,grad_maxnorm,lr,active_nodes,circuits_cum,gates_cum\n",
        );
        for r in &seed_result.trace.records {
            writeln!(
                trace_csv,
                "{},{},{},{},{},{},{},{},{},{}",
                r.iter,
                r.loss.total,
                r.loss.de,
                r.loss.cs,
                r.loss.reg,
                r.grad_maxnorm,
                r.lr,
                r.active_nodes,
                r.circuits_cum,
                r.gates_cum
            )
            .expect("write to string");
        }
        let p = dir.join(format!("trace_seed{}.csv", seed_result.seed));
        write_file(&p, &trace_csv)?;
        written.push(p);

        let mut eval_csv = String::new();
        eval_csv.push_str("x,f,f_ref,f1,f1_ref,f2,f2_ref,de_loss\n");
        for r in &seed_result.eval {
            writeln!(
                eval_csv,
                "{},{},{},{},{},{},{},{}",
                r.x, r.f, r.f_ref, r.f1, r.f1_ref, r.f2, r.f2_ref, r.de_loss
            )
            .expect("write to string");
        }
        let p = dir.join(format!("eval_seed{}.csv", seed_result.seed));
        write_file(&p, &eval_csv)?;
        written.push(p);
    }

    let mut agg = String::new();
    agg.push_str(
        "seed,iterations,part1_iters,part1_loss,de_eval,bc_eval,circuits_total,gates_total,reg_circuits,restarts\n",
    );
    for s in &report.seeds {
        let (p1i, p1l) = s
            .trace
            .part1_end
            .map(|(i, l)| (i.to_string(), l.to_string()))
            .unwrap_or_else(|| (String::new(), String::new()));
        writeln!(
            agg,
            "{},{},{},{},{},{},{},{},{},{}",
            s.seed,
            s.trace.iterations(),
            p1i,
            p1l,
            s.de_eval,
            s.bc_eval,
            s.trace.budget.total_circuits,
            s.trace.budget.total_basic_gates,
            s.trace.reg_circuits,
            s.trace.restarts
        )
        .expect("write to string");
    }
    let p = dir.join("aggregate.csv");
    write_file(&p, &agg)?;
    written.push(p);

    let mut summary = String::new();
    writeln!(summary, "run: {}", report.label).unwrap();
    writeln!(summary, "seeds: {}", report.seeds.len()).unwrap();
    for s in &report.seeds {
        writeln!(
            summary,
            "seed {}: iterations={} de_eval={} bc_eval={} circuits={} gates={}",
            s.seed,
            s.trace.iterations(),
            s.de_eval,
            s.bc_eval,
            s.trace.budget.total_circuits,
            s.trace.budget.total_basic_gates
        )
        .unwrap();
        if let Some((i, l)) = s.trace.part1_end {
            writeln!(summary, "seed {}: part1_iters={i} part1_loss={l}", s.seed).unwrap();
        }
        if let Some(last) = s.trace.last() {
            writeln!(
                summary,
                "seed {}: final loss_total={} loss_de={} loss_cs={} loss_reg={}",
                s.seed, last.loss.total, last.loss.de, last.loss.cs, last.loss.reg
            )
            .unwrap();
        }
    }
    if let Some((im, icv, lm, lcv)) = report.part1_stats() {
        writeln!(summary, "part1 iterations mean={im} cv={icv}").unwrap();
        writeln!(summary, "part1 loss mean={lm} cv={lcv}").unwrap();
    }
    writeln!(summary, "best de_eval: {}", report.best_de_eval()).unwrap();
    let p = dir.join("summary.txt");
    write_file(&p, &summary)?;
    written.push(p);

    Ok(written)
}

fn write_file(path: &Path, content: &str) -> Result<(), VqodeError> {
    std::fs::write(path, content)
        .map_err(|e| VqodeError::Io(format!("write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn dmss_short_run_emits_deterministic_reports() {
        let cfg: RunConfig = toml::from_str(
            r#"
            problem = "dmss"
            algorithm = "kyriienkoinspired"
            n_nodes = 7
            node_kind = 2
            seeds = [1]
            max_iters = 8
            eval_points = 10

            [ki]
            n_qubits = 3
            n_layers = 1
            "#,
        )
        .unwrap();
        let run = cfg.prepare().unwrap();
        let report1 = execute(&run).unwrap();
        let report2 = execute(&run).unwrap();
        let dir1 = std::env::temp_dir().join("vqode_report_test_1");
        let dir2 = std::env::temp_dir().join("vqode_report_test_2");
        let files1 = emit_report(&report1, &dir1).unwrap();
        let files2 = emit_report(&report2, &dir2).unwrap();
        assert_eq!(files1.len(), files2.len());
        for (a, b) in files1.iter().zip(&files2) {
            let ca = std::fs::read(a).unwrap();
            let cb = std::fs::read(b).unwrap();
            assert_eq!(ca, cb, "{} differs", a.display());
        }
        let eval = std::fs::read_to_string(dir1.join("eval_seed1.csv")).unwrap();
        assert!(eval.starts_with("x,f,f_ref,f1,f1_ref,f2,f2_ref,de_loss\n"));
        assert_eq!(eval.lines().count(), 11);
        let trace = std::fs::read_to_string(dir1.join("trace_seed1.csv")).unwrap();
        assert!(trace.starts_with(
            "iter,loss_total,loss_de,loss_cs,loss_reg,grad_maxnorm,lr,active_nodes,circuits_cum,gates_cum\n"
        ));
    }
}
