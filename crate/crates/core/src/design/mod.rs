//! Network design: choose bus arcs and per-trip paths by Benders
//! decomposition over transfer-expanded subproblems.

mod io;
mod subproblem;
mod teg;

use std::collections::BTreeMap;

pub use io::{read_design, write_design, write_trace, DesignFile};
pub use subproblem::{solve_subproblem, SubproblemSolution};
pub use teg::{build_teg, TegArc, TransferExpandedGraph, DESTINATION, ORIGIN};

use crate::lp::{
    solve_milp, Constraint, LinearProgram, MilpOptions, MilpProblem, MilpStatus, NoSeparator,
    SearchState, Sense, Separation, Separator,
};
use crate::model::{arc_fixed_cost, ArcId, DesignParameters, NetworkModel, Trip};
use crate::par::{self, Execution};
use crate::Result;

#[derive(Debug, Clone)]
pub struct BendersOptions {
    /// A cut is added when it exceeds `theta` by more than
    /// `cut_tolerance * (1 + |theta|)`.
    pub cut_tolerance: f64,
    /// Relative optimality gap of the master search.
    pub gap: f64,
    /// Cap on separation rounds; hitting it returns the incumbent flagged as
    /// not proven optimal.
    pub max_iterations: usize,
    pub max_nodes: usize,
    /// Cut rounds at fractional points per branch-and-bound node.
    pub fractional_rounds: usize,
    pub execution: Execution,
}

impl Default for BendersOptions {
    fn default() -> Self {
        BendersOptions {
            cut_tolerance: 1e-6,
            gap: 1e-6,
            max_iterations: 20_000,
            max_nodes: 100_000,
            fractional_rounds: 5,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStatus {
    Optimal,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub cuts_added: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripPath {
    pub trip_id: String,
    /// Arcs in travel order. Zero-length shuttle legs at hub endpoints are
    /// omitted.
    pub arcs: Vec<ArcId>,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub status: DesignStatus,
    /// Open bus arcs in network order.
    pub open_bus_arcs: Vec<ArcId>,
    pub objective_total: f64,
    pub fixed_cost_part: f64,
    pub passenger_part: f64,
    pub lower_bound: f64,
    pub paths: Vec<TripPath>,
    pub dropped_trips: Vec<String>,
    pub trace: Vec<TraceRow>,
}

impl DesignSolution {
    pub fn path(&self, trip_id: &str) -> Option<&TripPath> {
        self.paths.iter().find(|p| p.trip_id == trip_id)
    }
}

/// `theta >= intercept + sum(coefficients[a] * (z[a] - anchor[a]))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BendersCut {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub anchor: Vec<f64>,
}

impl BendersCut {
    pub fn value_at(&self, z: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(self.anchor.iter().zip(z))
                .map(|(c, (a, v))| c * (v - a))
                .sum::<f64>()
    }

    fn row(&self, theta: usize) -> Constraint {
        let mut coeffs = vec![(theta, 1.0)];
        let mut rhs = self.intercept;
        for (j, (&c, &a)) in self.coefficients.iter().zip(&self.anchor).enumerate() {
            if c.abs() > 1e-12 {
                coeffs.push((j, -c));
                rhs -= c * a;
            }
        }
        Constraint::new(coeffs, Sense::Ge, rhs)
    }
}

/// Fixed cost of every bus arc, in [`NetworkModel::bus_arcs`] order.
pub fn fixed_costs(network: &NetworkModel, params: &DesignParameters) -> Vec<f64> {
    network
        .bus_arcs()
        .iter()
        .map(|&id| arc_fixed_cost(network.arc(id), params).expect("bus arc"))
        .collect()
}

/// Master problem without cuts: variables `z` (one per bus arc) then `theta`.
/// Rows: bus frequency balance at every hub, and at most one frequency per
/// ordered hub pair.
pub fn master_problem(network: &NetworkModel, params: &DesignParameters) -> MilpProblem {
    let bus = network.bus_arcs();
    let nb = bus.len();
    let mut lp = LinearProgram::new(nb + 1);
    lp.objective[..nb].copy_from_slice(&fixed_costs(network, params));
    lp.objective[nb] = 1.0;
    for j in 0..nb {
        lp.upper[j] = 1.0;
    }
    let mut balance: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut pairs: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (j, &id) in bus.iter().enumerate() {
        let a = network.arc(id);
        let f = f64::from(a.frequency.unwrap_or(0));
        balance.entry(a.origin).or_default().push((j, f));
        balance.entry(a.dest).or_default().push((j, -f));
        pairs.entry((a.origin, a.dest)).or_default().push((j, 1.0));
    }
    for (_, coeffs) in balance {
        lp.add(Constraint::new(coeffs, Sense::Eq, 0.0));
    }
    for (_, coeffs) in pairs {
        if coeffs.len() > 1 {
            lp.add(Constraint::new(coeffs, Sense::Le, 1.0));
        }
    }
    let mut integer = vec![true; nb + 1];
    integer[nb] = false;
    MilpProblem::new(lp, integer)
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub z: Vec<f64>,
    pub theta: f64,
    pub objective: f64,
}

/// Solves the master problem with an explicit cut list.
pub fn solve_master(
    network: &NetworkModel,
    params: &DesignParameters,
    cuts: &[BendersCut],
) -> MasterSolution {
    let mut p = master_problem(network, params);
    let nb = network.bus_arcs().len();
    for c in cuts {
        p.lp.add(c.row(nb));
    }
    let r = solve_milp(&p, &mut NoSeparator, &MilpOptions::default());
    let x = r.x.expect("z = 0 is always feasible");
    MasterSolution {
        z: x[..nb].to_vec(),
        theta: x[nb],
        objective: r.objective,
    }
}

/// Builds one transfer-expanded graph per trip.
pub fn build_tegs(
    network: &NetworkModel,
    trips: &[Trip],
    params: &DesignParameters,
    exec: Execution,
) -> Result<Vec<TransferExpandedGraph>> {
    par::map(exec, trips, |t| build_teg(t, network, params))
        .into_iter()
        .collect()
}

/// Solves every subproblem at `z_hat` and aggregates the cut. Summation runs
/// in trip order, so the result does not depend on the execution mode.
pub fn benders_cut(
    tegs: &[TransferExpandedGraph],
    z_hat: &[f64],
    exec: Execution,
) -> (BendersCut, Vec<SubproblemSolution>) {
    let sols = par::map(exec, tegs, |g| solve_subproblem(g, z_hat));
    let mut coefficients = vec![0.0; z_hat.len()];
    let mut intercept = 0.0;
    for (g, s) in tegs.iter().zip(&sols) {
        intercept += s.cost;
        s.accumulate_coefficients(g, &mut coefficients);
    }
    let cut = BendersCut {
        intercept,
        coefficients,
        anchor: z_hat.to_vec(),
    };
    (cut, sols)
}

struct CutSeparator<'a> {
    tegs: &'a [TransferExpandedGraph],
    beta: &'a [f64],
    options: &'a BendersOptions,
    rounds: usize,
    cap_hit: bool,
    lower: f64,
    upper: f64,
    trace: Vec<TraceRow>,
}

impl Separator for CutSeparator<'_> {
    fn separate(&mut self, x: &[f64], integral: bool, state: &SearchState) -> Separation {
        let nb = self.beta.len();
        if self.rounds >= self.options.max_iterations {
            self.cap_hit = true;
            return Separation::default();
        }
        self.rounds += 1;
        let mut z = x[..nb].to_vec();
        if integral {
            z.iter_mut().for_each(|v| *v = v.round());
        }
        let theta = x[nb];
        let (cut, _) = benders_cut(self.tegs, &z, self.options.execution);
        let fixed: f64 = self.beta.iter().zip(&z).map(|(b, v)| b * v).sum();
        let feasible = integral.then(|| {
            let mut sol = z.clone();
            sol.push(cut.intercept);
            (sol, fixed + cut.intercept)
        });
        if let Some((_, v)) = &feasible {
            self.upper = self.upper.min(*v);
        }
        if let Some(inc) = state.incumbent {
            self.upper = self.upper.min(inc);
        }
        self.lower = self.lower.max(state.global_bound).min(self.upper);
        let violated = cut.intercept - theta > self.options.cut_tolerance * (1.0 + theta.abs());
        self.trace.push(TraceRow {
            iteration: self.rounds,
            lower_bound: self.lower,
            upper_bound: self.upper,
            cuts_added: usize::from(violated),
        });
        Separation {
            cuts: if violated { vec![cut.row(nb)] } else { Vec::new() },
            feasible,
        }
    }
}

/// Designs the network for `trips`.
///
/// Trips whose origin equals their destination are dropped with a warning.
pub fn benders_solve(
    network: &NetworkModel,
    trips: &[Trip],
    params: &DesignParameters,
    options: &BendersOptions,
) -> Result<DesignSolution> {
    params.validate()?;
    let mut kept = Vec::with_capacity(trips.len());
    let mut dropped = Vec::new();
    for t in trips {
        t.validate().or_else(|e| {
            if t.origin == t.dest {
                Ok(())
            } else {
                Err(e)
            }
        })?;
        if t.origin == t.dest {
            log::warn!("dropping trip {} with identical origin and destination", t.id);
            dropped.push(t.id.clone());
        } else {
            kept.push(t.clone());
        }
    }
    let tegs = build_tegs(network, &kept, params, options.execution)?;
    let beta = fixed_costs(network, params);
    let nb = beta.len();
    let problem = master_problem(network, params);
    let mut sep = CutSeparator {
        tegs: &tegs,
        beta: &beta,
        options,
        rounds: 0,
        cap_hit: false,
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        trace: Vec::new(),
    };
    let milp_options = MilpOptions {
        max_nodes: options.max_nodes,
        rel_gap: options.gap,
        abs_gap: 1e-9,
        fractional_rounds: options.fractional_rounds,
        ..MilpOptions::default()
    };
    let result = solve_milp(&problem, &mut sep, &milp_options);
    let optimal = result.status == MilpStatus::Optimal && !sep.cap_hit;
    let z: Vec<f64> = match &result.x {
        Some(x) => x[..nb].iter().map(|v| v.round()).collect(),
        None => vec![0.0; nb],
    };
    let (cut, sols) = benders_cut(&tegs, &z, options.execution);
    let fixed_cost_part: f64 = beta.iter().zip(&z).map(|(b, v)| b * v).sum();
    let objective_total = fixed_cost_part + cut.intercept;
    let paths = kept
        .iter()
        .zip(tegs.iter().zip(&sols))
        .map(|(t, (g, s))| TripPath {
            trip_id: t.id.clone(),
            arcs: s
                .path
                .iter()
                .map(|&i| g.arcs[i].original)
                .filter(|&id| {
                    let a = network.arc(id);
                    a.origin != a.dest
                })
                .collect(),
            cost: s.cost,
        })
        .collect();
    let open_bus_arcs = network
        .bus_arcs()
        .iter()
        .zip(&z)
        .filter(|(_, &v)| v > 0.5)
        .map(|(&id, _)| id)
        .collect();
    let lower_bound = if optimal {
        result.bound.min(objective_total)
    } else {
        sep.lower.min(objective_total)
    };
    let mut trace = sep.trace;
    if let Some(last) = trace.last_mut() {
        last.upper_bound = last.upper_bound.min(objective_total);
    }
    log::info!(
        "design: objective {objective_total:.4} (fixed {fixed_cost_part:.4}), {} nodes, {} cuts, {}",
        result.nodes,
        result.cuts,
        if optimal { "optimal" } else { "not proven optimal" }
    );
    Ok(DesignSolution {
        status: if optimal { DesignStatus::Optimal } else { DesignStatus::IterationLimit },
        open_bus_arcs,
        objective_total,
        fixed_cost_part,
        passenger_part: cut.intercept,
        lower_bound,
        paths,
        dropped_trips: dropped,
        trace,
    })
}
