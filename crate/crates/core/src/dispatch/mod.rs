//! Epoch-based real-time shuttle dispatching.
//!
//! Each epoch the pending requests are matched to shuttles by choosing one
//! candidate route per shuttle, or postponed at a penalty that doubles every
//! ten epochs. A selected route becomes the shuttle's committed plan; later
//! epochs may only insert new requests into it.

mod candidates;
mod log;

use std::collections::HashSet;

pub use self::log::{write_dispatch_log, EpochLog};
pub use candidates::{full_route_pool, generate_candidate_routes, plan_cost};

use crate::lp::{solve_milp, Constraint, LinearProgram, MilpOptions, MilpProblem, NoSeparator, Sense};
use crate::model::TravelMatrix;

#[derive(Debug, Clone)]
pub struct DispatchConfig {
    pub capacity: u32,
    pub epoch_s: f64,
    pub rho: f64,
    /// Penalty for postponing a fresh request, in seconds.
    pub base_penalty_s: f64,
    pub doubling_epochs: u32,
    /// Greedy route-extension steps per epoch.
    pub max_iterations: usize,
    /// Requests a plan may hold, on board or still to be picked up.
    pub max_plan_requests: usize,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        DispatchConfig {
            capacity: 4,
            epoch_s: 30.0,
            rho: 1.5,
            base_penalty_s: 420.0,
            doubling_epochs: 10,
            max_iterations: 200,
            max_plan_requests: 8,
        }
    }
}

impl DispatchConfig {
    pub fn penalty(&self, epochs_waiting: u32) -> f64 {
        let doublings = epochs_waiting / self.doubling_epochs.max(1);
        self.base_penalty_s * 2f64.powi(doublings.min(60) as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchRequest {
    pub id: usize,
    pub origin: usize,
    pub dest: usize,
    pub request_time_s: f64,
    /// Direct travel time from origin to destination.
    pub direct_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Pickup,
    Dropoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub request: DispatchRequest,
}

impl Action {
    pub fn pickup(request: DispatchRequest) -> Self {
        Action { kind: ActionKind::Pickup, request }
    }

    pub fn dropoff(request: DispatchRequest) -> Self {
        Action { kind: ActionKind::Dropoff, request }
    }

    pub fn location(&self) -> usize {
        match self.kind {
            ActionKind::Pickup => self.request.origin,
            ActionKind::Dropoff => self.request.dest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rider {
    pub request: DispatchRequest,
    pub pickup_s: f64,
}

/// A shuttle as seen by the dispatcher: it is (or will next be) at
/// `location` at `ready_s`, then executes `plan` in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuttleState {
    pub id: usize,
    pub location: usize,
    pub ready_s: f64,
    pub onboard: Vec<Rider>,
    pub plan: Vec<Action>,
}

impl ShuttleState {
    pub fn idle(id: usize, location: usize, ready_s: f64) -> Self {
        ShuttleState {
            id,
            location,
            ready_s,
            onboard: Vec::new(),
            plan: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRoute {
    /// Index into the shuttle slice.
    pub shuttle: usize,
    pub plan: Vec<Action>,
    /// Newly served request ids, ascending.
    pub served: Vec<usize>,
    /// Total wait before pickup over all pickups in the plan, in seconds.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingRequest {
    pub request: DispatchRequest,
    pub epochs_waiting: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Chosen pool index per shuttle.
    pub routes: Vec<usize>,
    pub postponed: Vec<usize>,
    pub objective: f64,
}

/// Picks one route per shuttle and postpones the rest at minimum total cost.
/// The pool must hold at least one route per shuttle.
pub fn select_routes(
    num_shuttles: usize,
    pending: &[PendingRequest],
    pool: &[CandidateRoute],
    config: &DispatchConfig,
) -> Selection {
    let nr = pool.len();
    let np = pending.len();
    let mut lp = LinearProgram::new(nr + np);
    for (j, r) in pool.iter().enumerate() {
        lp.objective[j] = r.cost;
        lp.upper[j] = 1.0;
    }
    for (k, p) in pending.iter().enumerate() {
        lp.objective[nr + k] = config.penalty(p.epochs_waiting);
        lp.upper[nr + k] = 1.0;
    }
    for (k, p) in pending.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r.served.binary_search(&p.request.id).is_ok())
            .map(|(j, _)| (j, 1.0))
            .collect();
        coeffs.push((nr + k, 1.0));
        lp.add(Constraint::new(coeffs, Sense::Eq, 1.0));
    }
    for s in 0..num_shuttles {
        let coeffs = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r.shuttle == s)
            .map(|(j, _)| (j, 1.0))
            .collect();
        lp.add(Constraint::new(coeffs, Sense::Eq, 1.0));
    }
    let res = solve_milp(&MilpProblem::pure(lp), &mut NoSeparator, &MilpOptions::default());
    let x = res.x.expect("idle routes and postponement keep the epoch feasible");
    let mut routes = vec![usize::MAX; num_shuttles];
    for (j, r) in pool.iter().enumerate() {
        if x[j] > 0.5 {
            routes[r.shuttle] = j;
        }
    }
    let postponed = pending
        .iter()
        .enumerate()
        .filter(|(k, _)| x[nr + k] > 0.5)
        .map(|(_, p)| p.request.id)
        .collect();
    Selection {
        routes,
        postponed,
        objective: res.objective,
    }
}

/// Holds the pending requests between epochs.
#[derive(Debug, Clone, Default)]
pub struct Dispatcher {
    pub config: DispatchConfig,
    pub pending: Vec<PendingRequest>,
    pub log: Vec<EpochLog>,
}

impl Dispatcher {
    pub fn new(config: DispatchConfig) -> Self {
        Dispatcher {
            config,
            pending: Vec::new(),
            log: Vec::new(),
        }
    }

    /// Adds the requests revealed since the last epoch, then assigns pending
    /// requests to shuttles. Shuttle plans are updated in place.
    pub fn run_epoch(
        &mut self,
        now: f64,
        shuttles: &mut [ShuttleState],
        new_requests: impl IntoIterator<Item = DispatchRequest>,
        matrix: &TravelMatrix,
    ) -> &EpochLog {
        self.pending.extend(new_requests.into_iter().map(|request| PendingRequest {
            request,
            epochs_waiting: 0,
        }));
        let pending_before = self.pending.len();
        let mut objective = 0.0;
        let mut served = 0;
        if !self.pending.is_empty() && !shuttles.is_empty() {
            let pool = generate_candidate_routes(now, shuttles, &self.pending, matrix, &self.config);
            let sel = select_routes(shuttles.len(), &self.pending, &pool, &self.config);
            objective = sel.objective;
            let mut assigned = HashSet::new();
            for (s, &j) in sel.routes.iter().enumerate() {
                let r = &pool[j];
                assigned.extend(r.served.iter().copied());
                shuttles[s].plan = r.plan.clone();
            }
            served = assigned.len();
            self.pending.retain(|p| !assigned.contains(&p.request.id));
        }
        for p in &mut self.pending {
            p.epochs_waiting += 1;
        }
        self.log.push(EpochLog {
            time_s: now,
            pending: pending_before,
            served,
            postponed: self.pending.len(),
            objective,
        });
        self.log.last().expect("just pushed")
    }
}
