//! Exhaustive oracles and random instances for epoch dispatching.

use odmts::dispatch::{plan_cost, Action, ActionKind, DispatchConfig, DispatchRequest, PendingRequest, Rider, ShuttleState};
use odmts::model::TravelMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid city with Manhattan travel times, one minute per block.
pub fn grid(n: usize, rng: &mut ChaCha8Rng) -> (TravelMatrix, Vec<(i32, i32)>) {
    let pts: Vec<(i32, i32)> = (0..n).map(|_| (rng.gen_range(0..8), rng.gen_range(0..8))).collect();
    let mut m = TravelMatrix::new((0..n).map(|i| format!("p{i}")).collect());
    for i in 0..n {
        for j in 0..n {
            let blocks = (pts[i].0 - pts[j].0).abs() + (pts[i].1 - pts[j].1).abs();
            m.insert(i, j, 60.0 * f64::from(blocks), 0.25 * f64::from(blocks));
        }
    }
    (m, pts)
}

pub fn request(id: usize, o: usize, d: usize, t: f64, m: &TravelMatrix) -> DispatchRequest {
    DispatchRequest { id, origin: o, dest: d, request_time_s: t, direct_s: m.time(o, d) }
}


pub fn oracle_route_cost(
    sh: &ShuttleState,
    news: &[DispatchRequest],
    now: f64,
    m: &TravelMatrix,
    cfg: &DispatchConfig,
) -> Option<f64> {
    // every merge of the committed plan with every valid ordering of the new
    // pickups and drop-offs
    fn rec(
        sh: &ShuttleState,
        news: &[DispatchRequest],
        status: &mut Vec<u8>,
        ci: usize,
        seq: &mut Vec<Action>,
        now: f64,
        m: &TravelMatrix,
        cfg: &DispatchConfig,
        best: &mut Option<f64>,
    ) {
        if ci == sh.plan.len() && status.iter().all(|&s| s == 2) {
            if let Some(c) = simulate(sh, seq, now, m, cfg) {
                if best.map_or(true, |b| c < b) {
                    *best = Some(c);
                }
            }
            return;
        }
        if ci < sh.plan.len() {
            seq.push(sh.plan[ci]);
            rec(sh, news, status, ci + 1, seq, now, m, cfg, best);
            seq.pop();
        }
        for k in 0..news.len() {
            if status[k] < 2 {
                let a = if status[k] == 0 { Action::pickup(news[k]) } else { Action::dropoff(news[k]) };
                status[k] += 1;
                seq.push(a);
                rec(sh, news, status, ci, seq, now, m, cfg, best);
                seq.pop();
                status[k] -= 1;
            }
        }
    }
    fn simulate(sh: &ShuttleState, seq: &[Action], now: f64, m: &TravelMatrix, cfg: &DispatchConfig) -> Option<f64> {
        let mut t = f64::max(now, sh.ready_s);
        let mut at = sh.location;
        let mut aboard: Vec<(usize, f64)> = sh.onboard.iter().map(|r| (r.request.id, r.pickup_s)).collect();
        let mut wait = 0.0;
        for a in seq {
            let here = if a.kind == ActionKind::Pickup { a.request.origin } else { a.request.dest };
            t += m.time(at, here);
            at = here;
            if a.kind == ActionKind::Pickup {
                t = t.max(a.request.request_time_s);
                wait += t - a.request.request_time_s;
                aboard.push((a.request.id, t));
                if aboard.len() > cfg.capacity as usize {
                    return None;
                }
            } else {
                let pos = aboard.iter().position(|x| x.0 == a.request.id)?;
                if t - aboard[pos].1 > cfg.rho * a.request.direct_s + 1e-6 {
                    return None;
                }
                aboard.remove(pos);
            }
        }
        Some(wait)
    }
    if news.is_empty() {
        // the committed plan always stays available
        return plan_cost(sh, &sh.plan, now, m, cfg, false);
    }
    let mut best = None;
    rec(sh, news, &mut vec![0; news.len()], 0, &mut Vec::new(), now, m, cfg, &mut best);
    best
}

/// Exhaustive assignment of each request to a shuttle or to postponement.
pub fn oracle_epoch(
    shuttles: &[ShuttleState],
    pending: &[PendingRequest],
    now: f64,
    m: &TravelMatrix,
    cfg: &DispatchConfig,
) -> f64 {
    let s = shuttles.len();
    let n = pending.len();
    let mut best = f64::INFINITY;
    let total = (s + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut groups = vec![Vec::new(); s];
        let mut cost = 0.0;
        for p in pending {
            let g = c % (s + 1);
            c /= s + 1;
            if g == s {
                cost += cfg.penalty(p.epochs_waiting);
            } else {
                groups[g].push(p.request);
            }
        }
        let mut ok = true;
        for (k, sh) in shuttles.iter().enumerate() {
            match oracle_route_cost(sh, &groups[k], now, m, cfg) {
                Some(x) => cost += x,
                None => ok = false,
            }
        }
        if ok {
            best = best.min(cost);
        }
    }
    best
}

pub fn random_epoch(seed: u64) -> (TravelMatrix, Vec<ShuttleState>, Vec<PendingRequest>, DispatchConfig, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, _) = grid(10, &mut rng);
    let cfg = DispatchConfig {
        capacity: rng.gen_range(1..=3),
        rho: [1.2, 1.5, 2.0][rng.gen_range(0..3)],
        ..DispatchConfig::default()
    };
    let now = 600.0;
    let n_sh = rng.gen_range(1..=3);
    let mut shuttles = Vec::new();
    let mut next_id = 100;
    for s in 0..n_sh {
        let loc = rng.gen_range(0..10);
        let mut sh = ShuttleState::idle(s, loc, now + rng.gen_range(0.0..120.0));
        if rng.gen_bool(0.4) {
            let mut d = rng.gen_range(0..10);
            if d == loc {
                d = (d + 1) % 10;
            }
            let r = request(next_id, loc, d, now - 300.0, &m);
            next_id += 1;
            sh.onboard.push(Rider { request: r, pickup_s: now - 60.0 });
            sh.plan.push(Action::dropoff(r));
        }
        shuttles.push(sh);
    }
    let n_req = rng.gen_range(1..=4);
    let pending = (0..n_req)
        .map(|k| {
            let o = rng.gen_range(0..10);
            let mut d = rng.gen_range(0..10);
            if d == o {
                d = (d + 3) % 10;
            }
            PendingRequest {
                request: request(k, o, d, now - rng.gen_range(0.0..200.0), &m),
                epochs_waiting: rng.gen_range(0..25),
            }
        })
        .collect();
    (m, shuttles, pending, cfg, now)
}
