use std::collections::BTreeMap;

use super::{Action, ActionKind, CandidateRoute, DispatchConfig, PendingRequest, ShuttleState};
use crate::model::TravelMatrix;

/// Total pre-pickup wait of executing `plan`, or `None` if it breaks
/// capacity or, when `check_detour` is set, a rider's detour limit.
pub fn plan_cost(
    shuttle: &ShuttleState,
    plan: &[Action],
    now: f64,
    matrix: &TravelMatrix,
    config: &DispatchConfig,
    check_detour: bool,
) -> Option<f64> {
    evaluate(shuttle, plan.iter(), now, matrix, config, check_detour, f64::INFINITY, &mut Vec::new())
}

/// Like [`plan_cost`] over any action sequence; gives up once the wait
/// reaches `bound`, since waits only accumulate.
#[allow(clippy::too_many_arguments)]
fn evaluate<'a>(
    shuttle: &ShuttleState,
    plan: impl Iterator<Item = &'a Action>,
    now: f64,
    matrix: &TravelMatrix,
    config: &DispatchConfig,
    check_detour: bool,
    bound: f64,
    picked: &mut Vec<(usize, f64)>,
) -> Option<f64> {
    let mut t = now.max(shuttle.ready_s);
    let mut loc = shuttle.location;
    let mut load = shuttle.onboard.len();
    picked.clear();
    picked.extend(shuttle.onboard.iter().map(|r| (r.request.id, r.pickup_s)));
    let mut cost = 0.0;
    for a in plan {
        t += matrix.time(loc, a.location());
        loc = a.location();
        let req = a.request;
        match a.kind {
            ActionKind::Pickup => {
                t = t.max(req.request_time_s);
                cost += t - req.request_time_s;
                load += 1;
                if load > config.capacity as usize || cost >= bound {
                    return None;
                }
                picked.push((req.id, t));
            }
            ActionKind::Dropoff => {
                let pick = picked.iter().find(|p| p.0 == req.id)?.1;
                if check_detour && t - pick > config.rho * req.direct_s + 1e-6 {
                    return None;
                }
                load = load.checked_sub(1)?;
            }
        }
    }
    (cost < bound).then_some(cost)
}

fn spliced<'a>(
    plan: &'a [Action],
    i: usize,
    j: usize,
    pickup: &'a Action,
    dropoff: &'a Action,
) -> impl Iterator<Item = &'a Action> {
    plan[..i]
        .iter()
        .chain(std::iter::once(pickup))
        .chain(plan[i..j].iter())
        .chain(std::iter::once(dropoff))
        .chain(plan[j..].iter())
}

fn materialize(plan: &[Action], i: usize, j: usize, pickup: &Action, dropoff: &Action) -> Vec<Action> {
    spliced(plan, i, j, pickup, dropoff).copied().collect()
}

/// Cheapest feasible insertion of a pickup and drop-off pair into `plan`
/// whose cost is below `bound`.
#[allow(clippy::too_many_arguments)]
fn best_insertion(
    shuttle: &ShuttleState,
    plan: &[Action],
    req: &PendingRequest,
    now: f64,
    matrix: &TravelMatrix,
    config: &DispatchConfig,
    bound: f64,
    scratch: &mut Vec<(usize, f64)>,
) -> Option<(Vec<Action>, f64)> {
    if open_requests(plan) >= config.max_plan_requests {
        return None;
    }
    let pickup = Action::pickup(req.request);
    let dropoff = Action::dropoff(req.request);
    let mut best: Option<(usize, usize, f64)> = None;
    let mut limit = bound;
    for i in 0..=plan.len() {
        for j in i..=plan.len() {
            let seq = spliced(plan, i, j, &pickup, &dropoff);
            if let Some(c) = evaluate(shuttle, seq, now, matrix, config, true, limit - 1e-9, scratch) {
                limit = c;
                best = Some((i, j, c));
            }
        }
    }
    best.map(|(i, j, c)| (materialize(plan, i, j, &pickup, &dropoff), c))
}

fn open_requests(plan: &[Action]) -> usize {
    plan.iter().filter(|a| a.kind == ActionKind::Dropoff).count()
}

fn for_each_insertion(plan: &[Action], req: &PendingRequest, mut f: impl FnMut(Vec<Action>)) {
    let pickup = Action::pickup(req.request);
    let dropoff = Action::dropoff(req.request);
    for i in 0..=plan.len() {
        for j in i..=plan.len() {
            f(materialize(plan, i, j, &pickup, &dropoff));
        }
    }
}

fn keep_best(
    best: &mut BTreeMap<(usize, Vec<usize>), CandidateRoute>,
    route: CandidateRoute,
) {
    let key = (route.shuttle, route.served.clone());
    match best.get(&key) {
        Some(r) if r.cost <= route.cost + 1e-9 => {}
        _ => {
            best.insert(key, route);
        }
    }
}

/// Route pool for one epoch: per shuttle the unchanged plan, every single
/// request insertion, and routes grown greedily from those insertions by
/// adding the request with the smallest extra wait. Growth is capped by
/// `config.max_iterations` steps in total.
pub fn generate_candidate_routes(
    now: f64,
    shuttles: &[ShuttleState],
    pending: &[PendingRequest],
    matrix: &TravelMatrix,
    config: &DispatchConfig,
) -> Vec<CandidateRoute> {
    let mut best = BTreeMap::new();
    let mut seeds = Vec::new();
    let mut scratch = Vec::new();
    for (s, sh) in shuttles.iter().enumerate() {
        let base = plan_cost(sh, &sh.plan, now, matrix, config, false).unwrap_or(0.0);
        keep_best(
            &mut best,
            CandidateRoute { shuttle: s, plan: sh.plan.clone(), served: Vec::new(), cost: base },
        );
        for p in pending {
            if let Some((plan, cost)) = best_insertion(sh, &sh.plan, p, now, matrix, config, f64::INFINITY, &mut scratch) {
                let route = CandidateRoute { shuttle: s, plan, served: vec![p.request.id], cost };
                seeds.push((cost - base, route.clone()));
                keep_best(&mut best, route);
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.shuttle.cmp(&b.1.shuttle)).then(a.1.served.cmp(&b.1.served)));
    let mut budget = config.max_iterations;
    'seeds: for (_, seed) in seeds {
        let sh = &shuttles[seed.shuttle];
        let mut route = seed;
        loop {
            if budget == 0 {
                break 'seeds;
            }
            budget -= 1;
            let mut step: Option<(Vec<Action>, f64, usize)> = None;
            for p in pending {
                if route.served.binary_search(&p.request.id).is_ok() {
                    continue;
                }
                let bound = step.as_ref().map_or(f64::INFINITY, |s| s.1);
                if let Some((plan, cost)) = best_insertion(sh, &route.plan, p, now, matrix, config, bound, &mut scratch) {
                    if step.as_ref().map_or(true, |s| cost < s.1 - 1e-9) {
                        step = Some((plan, cost, p.request.id));
                    }
                }
            }
            let Some((plan, cost, id)) = step else { break };
            let mut served = route.served.clone();
            served.push(id);
            served.sort_unstable();
            route = CandidateRoute { shuttle: route.shuttle, plan, served, cost };
            keep_best(&mut best, route.clone());
        }
    }
    best.into_values().collect()
}

/// Every feasible way of inserting every subset of pending requests into
/// every shuttle's plan, cheapest per (shuttle, subset). Exponential; meant
/// for small epochs and for checking the heuristic pool.
pub fn full_route_pool(
    now: f64,
    shuttles: &[ShuttleState],
    pending: &[PendingRequest],
    matrix: &TravelMatrix,
    config: &DispatchConfig,
) -> Vec<CandidateRoute> {
    let mut best = BTreeMap::new();
    for (s, sh) in shuttles.iter().enumerate() {
        let base = plan_cost(sh, &sh.plan, now, matrix, config, false).unwrap_or(0.0);
        keep_best(
            &mut best,
            CandidateRoute { shuttle: s, plan: sh.plan.clone(), served: Vec::new(), cost: base },
        );
        grow(s, sh, &sh.plan, &[], 0, now, pending, matrix, config, &mut best);
    }
    best.into_values().collect()
}

#[allow(clippy::too_many_arguments)]
fn grow(
    s: usize,
    sh: &ShuttleState,
    plan: &[Action],
    served: &[usize],
    from: usize,
    now: f64,
    pending: &[PendingRequest],
    matrix: &TravelMatrix,
    config: &DispatchConfig,
    best: &mut BTreeMap<(usize, Vec<usize>), CandidateRoute>,
) {
    if open_requests(plan) >= config.max_plan_requests {
        return;
    }
    for k in from..pending.len() {
        let p = &pending[k];
        let mut next = served.to_vec();
        next.push(p.request.id);
        next.sort_unstable();
        let mut feasible = Vec::new();
        for_each_insertion(plan, p, |cand| {
            // capacity violations only get worse with more requests, detour
            // violations may disappear, so keep every capacity-feasible plan
            if plan_cost(sh, &cand, now, matrix, config, false).is_some() {
                feasible.push(cand);
            }
        });
        for cand in feasible {
            if let Some(cost) = plan_cost(sh, &cand, now, matrix, config, true) {
                keep_best(best, CandidateRoute { shuttle: s, plan: cand.clone(), served: next.clone(), cost });
            }
            grow(s, sh, &cand, &next, k + 1, now, pending, matrix, config, best);
        }
    }
}
