//! Batch runs: one solver over many instances, optionally against an exact oracle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fewclass::{self, solve_few_classes, FewClassConfig};
use crate::model::edd::edd_feasible;
use crate::model::gsp::GspInstance;
use crate::model::ufp::{is_feasible_cover, UfpCoverInstance};
use crate::oracles::{exact_due_dates, exact_gsp_uniform_release, exact_ufp_cover, DEFAULT_DUE_DATE_NODES, DEFAULT_UFP_CAP};
use crate::par::{self, Execution};
use crate::rational::{is_integral, rat_to_json, to_f64, Rat};
use crate::reduction::{solve_e_approx, InnerSolver};
use crate::speedup::{solve_speedup, validate_speed_schedule, SpeedupConfig};
use crate::ufp_qptas::{self, solve_qptas, QptasConfig};
use crate::workbench::generate::{generate_gsp, generate_ufp, GspParams, UfpParams};
use crate::workbench::io::Instance;

pub const DEFAULT_ALPHA_GRID: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// UFP-cover scheme.
    Qptas,
    /// Cover reduction over an `alpha` grid with exact inner covers.
    EApprox,
    Speedup,
    FewClass,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Qptas, SolverKind::EApprox, SolverKind::Speedup, SolverKind::FewClass];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Qptas => "qptas",
            SolverKind::EApprox => "e-approx",
            SolverKind::Speedup => "speedup",
            SolverKind::FewClass => "few-class",
        }
    }

    pub fn wants_ufp(self) -> bool {
        self == SolverKind::Qptas
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown solver {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    /// Seeds `start..start+count`, drawn with the generator matching the solver.
    Seeds {
        start: u64,
        count: usize,
        ufp: UfpParams,
        gsp: GspParams,
    },
    Instances(Vec<(String, Instance)>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub solver: SolverKind,
    pub eps: Rat,
    pub oracle: bool,
    /// Size cap handed to the exact oracle.
    pub cap: usize,
    /// Leave the runtime column empty so reruns give identical output.
    pub record_runtime: bool,
    pub source: Source,
    pub exec: Execution,
}

impl ExperimentConfig {
    pub fn new(solver: SolverKind, eps: Rat, source: Source) -> Self {
        ExperimentConfig {
            solver,
            eps,
            oracle: true,
            cap: DEFAULT_UFP_CAP,
            record_runtime: true,
            source,
            exec: Execution::default(),
        }
    }
}

/// Result of one solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub cost: Rat,
    /// Proven bound on cost over the optimum (over the optimum at unit speed for speedup).
    pub guarantee: Rat,
    pub feasible: bool,
    pub speed: Option<Rat>,
    /// Solver-specific solution record.
    pub detail: serde_json::Value,
}

fn expect_gsp(inst: &Instance) -> Result<&GspInstance> {
    match inst {
        Instance::Gsp(g) => Ok(g),
        Instance::Ufp(_) => Err(Error::Precondition("solver needs a scheduling instance".into())),
    }
}

fn expect_ufp(inst: &Instance) -> Result<&UfpCoverInstance> {
    match inst {
        Instance::Ufp(u) => Ok(u),
        Instance::Gsp(_) => Err(Error::Precondition("solver needs a UFP-cover instance".into())),
    }
}

/// `1/eps` when it is an integer.
pub fn inverse_eps(eps: &Rat) -> Result<i64> {
    if !eps.is_positive() {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let inv = Rat::one() / eps;
    if !is_integral(&inv) {
        return Err(Error::Precondition("speedup needs 1/eps integral".into()));
    }
    i64::try_from(inv.to_integer()).map_err(|_| Error::Numeric("1/eps out of range".into()))
}

pub fn solve(solver: SolverKind, inst: &Instance, eps: &Rat, exec: Execution) -> Result<Outcome> {
    match solver {
        SolverKind::Qptas => {
            let u = expect_ufp(inst)?;
            let cfg = QptasConfig { exec, ..QptasConfig::new(eps.clone()) };
            let sol = solve_qptas(u, &cfg)?.ok_or_else(|| Error::Infeasible("demands cannot be covered".into()))?;
            Ok(Outcome {
                feasible: is_feasible_cover(u, &sol.tasks),
                cost: sol.cost.clone(),
                guarantee: ufp_qptas::guarantee_factor(eps),
                speed: None,
                detail: serde_json::to_value(&sol)?,
            })
        }
        SolverKind::EApprox => {
            let g = expect_gsp(inst)?;
            let r = solve_e_approx(g, DEFAULT_ALPHA_GRID, &InnerSolver::Exact { cap: DEFAULT_UFP_CAP }, exec)?;
            let detail = serde_json::json!({
                "schedule": r.schedule,
                "alpha": rat_to_json(&r.alpha),
                "runs": r.runs,
            });
            Ok(Outcome {
                feasible: r.schedule.validate(g).is_ok(),
                cost: r.cost,
                guarantee: r.grid_factor,
                speed: None,
                detail,
            })
        }
        SolverKind::Speedup => {
            let g = expect_gsp(inst)?;
            let cfg = SpeedupConfig { exec, ..SpeedupConfig::new(inverse_eps(eps)?) };
            let sol = solve_speedup(g, &cfg)?;
            Ok(Outcome {
                feasible: validate_speed_schedule(g, &sol.schedule, &sol.speed),
                cost: sol.cost.clone(),
                guarantee: Rat::one(),
                speed: Some(sol.speed.clone()),
                detail: serde_json::to_value(&sol)?,
            })
        }
        SolverKind::FewClass => {
            let g = expect_gsp(inst)?;
            let cfg = FewClassConfig { exec, ..FewClassConfig::new(eps.clone()) };
            let sol = solve_few_classes(g, &cfg)?;
            Ok(Outcome {
                feasible: edd_feasible(&g.jobs, &sol.assignment.due),
                cost: sol.cost.clone(),
                guarantee: fewclass::guarantee_factor(eps),
                speed: None,
                detail: serde_json::to_value(&sol)?,
            })
        }
    }
}

/// Exact optimum the solver is measured against; `None` if the instance is infeasible.
pub fn oracle(solver: SolverKind, inst: &Instance, cap: usize, exec: Execution) -> Result<Option<Rat>> {
    match solver {
        SolverKind::Qptas => Ok(exact_ufp_cover(expect_ufp(inst)?, cap, exec)?.map(|o| o.cost)),
        SolverKind::EApprox | SolverKind::Speedup => {
            Ok(exact_gsp_uniform_release(expect_gsp(inst)?, cap, exec)?.map(|o| o.cost))
        }
        SolverKind::FewClass => {
            let g = expect_gsp(inst)?;
            let all: Vec<i64> = (0..=g.horizon()).collect();
            Ok(exact_due_dates(g, &all, DEFAULT_DUE_DATE_NODES, exec)?.map(|o| o.cost))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub instance: String,
    pub solver: String,
    pub epsilon: String,
    pub cost: String,
    pub oracle_cost: Option<String>,
    pub ratio: Option<String>,
    pub guarantee: String,
    pub runtime_ms: Option<String>,
    pub feasible: bool,
    pub speed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub solver: String,
    pub epsilon: String,
    pub runs: usize,
    pub feasible: usize,
    pub with_oracle: usize,
    pub within_guarantee: usize,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

fn decimal(r: &Rat) -> String {
    format!("{:.9}", to_f64(r))
}

/// Exact ratio, or `None` when it is undefined (oracle zero, solver positive).
fn exact_ratio(cost: &Rat, opt: &Rat) -> Option<Rat> {
    if opt.is_zero() {
        cost.is_zero().then(Rat::one)
    } else {
        Some(cost / opt)
    }
}

fn instances(cfg: &ExperimentConfig) -> Result<Vec<(String, Instance)>> {
    match &cfg.source {
        Source::Instances(v) => Ok(v.clone()),
        Source::Seeds { start, count, ufp, gsp } => (0..*count as u64)
            .map(|i| {
                let seed = start + i;
                let inst = if cfg.solver.wants_ufp() {
                    Instance::Ufp(generate_ufp(seed, ufp)?)
                } else {
                    Instance::Gsp(generate_gsp(seed, gsp)?)
                };
                Ok((format!("seed-{seed}"), inst))
            })
            .collect(),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let insts = instances(cfg)?;
    let inner = if insts.len() > 1 { Execution::Sequential } else { cfg.exec };
    let results = par::map(cfg.exec, &insts, |(name, inst)| -> Result<(Row, Option<Rat>, bool)> {
        let t = Instant::now();
        let out = solve(cfg.solver, inst, &cfg.eps, inner)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        let opt = if cfg.oracle { oracle(cfg.solver, inst, cfg.cap, inner)? } else { None };
        let ratio = opt.as_ref().and_then(|o| exact_ratio(&out.cost, o));
        let within = ratio.as_ref().map_or(false, |r| r <= &out.guarantee);
        let row = Row {
            instance: name.clone(),
            solver: cfg.solver.name().to_string(),
            epsilon: cfg.eps.to_string(),
            cost: out.cost.to_string(),
            oracle_cost: opt.as_ref().map(|o| o.to_string()),
            ratio: ratio.as_ref().map(decimal),
            guarantee: decimal(&out.guarantee),
            runtime_ms: cfg.record_runtime.then(|| format!("{ms:.3}")),
            feasible: out.feasible,
            speed: out.speed.as_ref().map(decimal),
        };
        Ok((row, ratio, within))
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut ratios = Vec::new();
    let mut within_guarantee = 0;
    for r in results {
        let (row, ratio, within) = r?;
        if let Some(q) = ratio {
            ratios.push(to_f64(&q));
        }
        within_guarantee += usize::from(within);
        rows.push(row);
    }
    let summary = Summary {
        solver: cfg.solver.name().to_string(),
        epsilon: cfg.eps.to_string(),
        runs: rows.len(),
        feasible: rows.iter().filter(|r| r.feasible).count(),
        with_oracle: rows.iter().filter(|r| r.oracle_cost.is_some()).count(),
        within_guarantee,
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        max_ratio: ratios.iter().copied().reduce(f64::max),
    };
    Ok(Report { rows, summary })
}

impl Report {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn seeds(count: usize) -> Source {
        Source::Seeds {
            start: 0,
            count,
            ufp: UfpParams { n: 8, m: 5, ..UfpParams::default() },
            gsp: GspParams { n: 4, ..GspParams::default() },
        }
    }

    #[test]
    fn qptas_batch() {
        let mut cfg = ExperimentConfig::new(SolverKind::Qptas, frac(1, 2), seeds(20));
        cfg.record_runtime = false;
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 20);
        assert!(rep.rows.iter().all(|r| r.feasible));
        assert_eq!(rep.summary.within_guarantee, 20);
        for r in &rep.rows {
            let q: f64 = r.ratio.as_ref().unwrap().parse().unwrap();
            assert!(q >= 1.0 - 1e-9);
        }
        assert_eq!(rep.csv_string().unwrap(), run_experiment(&cfg).unwrap().csv_string().unwrap());
    }

    #[test]
    fn oracle_off_leaves_ratio_empty() {
        let mut cfg = ExperimentConfig::new(SolverKind::Speedup, frac(1, 2), seeds(3));
        cfg.oracle = false;
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.rows.iter().all(|r| r.ratio.is_none() && r.oracle_cost.is_none()));
        assert!(rep.rows.iter().all(|r| r.speed.is_some()));
        assert_eq!(rep.summary.mean_ratio, None);
        let csv = rep.csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "instance,solver,epsilon,cost,oracle_cost,ratio,guarantee,runtime_ms,feasible,speed"
        );
        assert!(lines.next().unwrap().contains(",,,"));
    }

    #[test]
    fn gsp_solvers_run() {
        for solver in [SolverKind::EApprox, SolverKind::FewClass] {
            let mut cfg = ExperimentConfig::new(solver, frac(1, 2), seeds(3));
            cfg.cap = 9;
            let rep = run_experiment(&cfg).unwrap();
            assert_eq!(rep.summary.feasible, 3, "{solver}");
            assert_eq!(rep.summary.within_guarantee, 3, "{solver}");
        }
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("nope".parse::<SolverKind>().is_err());
        assert!(inverse_eps(&frac(2, 5)).is_err());
        assert_eq!(inverse_eps(&frac(1, 3)).unwrap(), 3);
    }
}
