//! Runs both engines over the sweep points.

use std::time::Instant;

use serde::Serialize;

use super::config::{Axis, RunConfig};
use crate::analytic::Evaluator;
use crate::error::{Error, Result};
use crate::model::NetworkModel;
use crate::montecarlo::{estimate_coverage_grid, McConfig, McEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Mc,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Mc => "mc",
        }
    }
}

/// One output row. Failed cells hold NaN and an entry in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub tau_db: f64,
    pub engine: Engine,
    pub pc_total: f64,
    pub pc_tier: Vec<f64>,
    pub assoc_tier: Vec<f64>,
    pub mc_ci_halfwidth: Option<f64>,
    /// Paired doubled-window difference, when requested.
    pub mc_window_delta: Option<f64>,
    pub wall_ms: Option<f64>,
    pub errors: Vec<String>,
}

impl Row {
    fn blank(value: f64, tau_db: f64, engine: Engine, k: usize) -> Self {
        Self {
            sweep_value: value,
            tau_db,
            engine,
            pc_total: f64::NAN,
            pc_tier: vec![f64::NAN; k],
            assoc_tier: vec![f64::NAN; k],
            mc_ci_halfwidth: None,
            mc_window_delta: None,
            wall_ms: None,
            errors: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn association(cfg: &RunConfig, net: &NetworkModel) -> Vec<Result<f64>> {
    let ev = Evaluator::new(net, cfg.quad, cfg.z_truncation_multiplier);
    (0..net.len()).map(|i| ev.association(i)).collect()
}

fn analytic_row(cfg: &RunConfig, idx: usize, assoc: Option<&[Result<f64>]>) -> Row {
    let start = Instant::now();
    let p = &cfg.points[idx];
    let k = p.net.len();
    let mut row = Row::blank(p.value, p.tau_db, Engine::Analytic, k);
    let own;
    let assoc = match assoc {
        Some(a) => a,
        None => {
            own = association(cfg, &p.net);
            &own
        }
    };
    let ev = Evaluator::new(&p.net, cfg.quad, cfg.z_truncation_multiplier);
    for (i, a) in assoc.iter().enumerate().take(k) {
        match ev.tier_term(i, p.tau, p.net.noise) {
            Ok(v) => row.pc_tier[i] = v,
            Err(e) => row.errors.push(format!("pc_tier_{}: {e}", i + 1)),
        }
        match a {
            Ok(v) => row.assoc_tier[i] = *v,
            Err(e) => row.errors.push(format!("assoc_tier_{}: {e}", i + 1)),
        }
    }
    row.pc_total = row.pc_tier.iter().sum();
    row.wall_ms = Some(elapsed_ms(start));
    row
}

fn fill_mc(row: &mut Row, est: &McEstimate) {
    row.pc_total = est.p_hat;
    row.pc_tier.clone_from(&est.per_tier_joint);
    row.assoc_tier.clone_from(&est.association);
    row.mc_ci_halfwidth = Some(est.ci_halfwidth);
    row.mc_window_delta = est.window_delta;
}

fn mc_config(cfg: &RunConfig, net: &NetworkModel) -> McConfig {
    McConfig::new(cfg.window_for(net), cfg.trials, cfg.seed).with_execution(cfg.execution)
}

fn mc_rows(cfg: &RunConfig) -> Vec<Row> {
    let k = cfg.base.len();
    let blank = |i: usize| {
        let p = &cfg.points[i];
        Row::blank(p.value, p.tau_db, Engine::Mc, k)
    };
    if cfg.axis == Axis::TauDb {
        // One set of trials serves every threshold.
        let start = Instant::now();
        let grid: Vec<Vec<f64>> = cfg.points.iter().map(|p| vec![p.tau; k]).collect();
        let result = estimate_coverage_grid(&cfg.base, &mc_config(cfg, &cfg.base), &grid);
        let share = elapsed_ms(start) / cfg.points.len() as f64;
        return (0..cfg.points.len())
            .map(|i| {
                let mut row = blank(i);
                match &result {
                    Ok(ests) => fill_mc(&mut row, &ests[i]),
                    Err(e) => row.errors.push(e.to_string()),
                }
                row.wall_ms = Some(share);
                row
            })
            .collect();
    }
    (0..cfg.points.len())
        .map(|i| {
            let start = Instant::now();
            let p = &cfg.points[i];
            let mut row = blank(i);
            match estimate_coverage_grid(&p.net, &mc_config(cfg, &p.net), &[vec![p.tau; k]]) {
                Ok(ests) => fill_mc(&mut row, &ests[0]),
                Err(e) => row.errors.push(e.to_string()),
            }
            row.wall_ms = Some(elapsed_ms(start));
            row
        })
        .collect()
}

/// Evaluates every sweep point with the selected engines. Rows come back in
/// sweep order, analytic rows before MC rows for each point.
///
/// Per-cell failures are recorded in the row; only whole-run problems
/// (none at present beyond what parsing already rejects) return `Err`.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<Row>> {
    if cfg.points.is_empty() {
        return Err(Error::config("sweep", "sweep list is empty"));
    }
    let n = cfg.points.len();
    let analytic: Vec<Row> = if cfg.engines.analytic() {
        // The threshold does not enter the association probabilities.
        let shared = (cfg.axis == Axis::TauDb).then(|| association(cfg, &cfg.base));
        cfg.execution
            .map_ordered(n, |i| analytic_row(cfg, i, shared.as_deref()))
    } else {
        Vec::new()
    };
    let mc = if cfg.engines.mc() {
        mc_rows(cfg)
    } else {
        Vec::new()
    };

    let mut rows = Vec::with_capacity(analytic.len() + mc.len());
    let mut a = analytic.into_iter();
    let mut m = mc.into_iter();
    for _ in 0..n {
        rows.extend(a.next());
        rows.extend(m.next());
    }
    if !cfg.output.timing {
        for r in &mut rows {
            r.wall_ms = None;
        }
    }
    Ok(rows)
}
