//! Discrete-step simulation of one scenario under one allocator.
//!
//! Each step, every user with demand computes its drain fraction from its
//! zone's presence probability and handover rates, picks a network, and asks
//! for units from that (zone, network) pool. The allocator then decides the
//! grants of each pool, capacity is enforced and the pool is drained.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{
    can_serve, drain_fraction, enforce_capacity, enforce_capacity_blocking, occupancy_heterogeneous, select_network,
    AllocError, AllocationRecord, Candidate, NetworkChoice, Pool, ResourceState, ServiceLoad,
};
use crate::baselines::{self, SchedUser, SchedulerError, SchedulerInput};
use crate::bellman::{plan_pool, BellmanError, PoolMember};
use crate::geometry::{GeometryError, ZoneId};
use crate::mobility::{handover_rate, zone_exit_rate, HandoverContext, MobilityError};
use crate::scenario::{AllocatorKind, Overload, Scenario, Selection};
use crate::traffic::{NetworkId, ServiceId, UserId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("nothing to summarize: the run produced no steps")]
    EmptyRun,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Bellman(#[from] BellmanError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub scenario: Scenario,
    pub horizon: usize,
    pub allocator: AllocatorKind,
    pub seed: u64,
}

impl SimulationRun {
    /// Takes horizon, allocator and seed from the scenario itself.
    pub fn from_scenario(scenario: Scenario) -> Self {
        SimulationRun { horizon: scenario.horizon, allocator: scenario.allocator, seed: scenario.seed, scenario }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub records: Vec<AllocationRecord>,
    pub blocked: Vec<UserId>,
    /// Bits transferred from the first step up to and including this one.
    pub system_state: f64,
    /// Pool levels after this step.
    pub resources: BTreeMap<Pool, f64>,
}

/// A user's pending request on its selected pool.
struct Request {
    user: UserId,
    pool: Pool,
    /// Allocation fraction `Σ_k (P + τ^H_k)·τ_k`.
    drain: f64,
    /// Per-service fractions plus the full drain.
    actions: Vec<f64>,
    weight: f64,
    snr: f64,
    average_rate: f64,
    /// Bits per unit on the pool's network for steps `t..T`.
    coefficients: Vec<f64>,
}

/// Users with demand, with their per-service loads (fixed across steps).
struct Prepared {
    presence: f64,
    loads: Vec<ServiceLoad>,
}

fn prepare(scenario: &Scenario) -> Result<BTreeMap<UserId, Prepared>, SimError> {
    let mut counts: BTreeMap<(ZoneId, ServiceId), f64> = BTreeMap::new();
    for u in &scenario.users {
        for &(k, _) in &u.services {
            *counts.entry((u.zone, k)).or_default() += 1.0;
        }
    }
    counts.extend(scenario.active_overrides.iter().map(|(&k, &v)| (k, v)));

    let mut out = BTreeMap::new();
    for u in scenario.users.iter().filter(|u| !u.services.is_empty()) {
        let presence = scenario.service_area.presence_probability(u.zone)?;
        let exit = zone_exit_rate(scenario.mobility, u.zone, &scenario.service_area)?;
        let loads = u
            .services
            .iter()
            .map(|&(k, rate)| {
                let active_count = counts.get(&(u.zone, k)).copied().unwrap_or(0.0);
                let h = handover_rate(HandoverContext { active_count, exit_rate: exit })?;
                Ok(ServiceLoad::new(rate, h))
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        out.insert(u.id, Prepared { presence, loads });
    }
    Ok(out)
}

/// Runs the simulation for `sim.horizon` steps.
pub fn run(sim: &SimulationRun) -> Result<Vec<StepReport>, SimError> {
    if sim.horizon == 0 {
        return Err(SimError::ZeroHorizon);
    }
    let sc = &sim.scenario;
    let prepared = prepare(sc)?;
    let mut state = ResourceState::new(sc.initial_pools())?;
    let mut seeder = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut system_state = 0.0;
    let mut reports = Vec::with_capacity(sim.horizon);

    for t in 0..sim.horizon {
        let mut by_pool: BTreeMap<Pool, Vec<Request>> = BTreeMap::new();
        let mut blocked = Vec::new();

        for u in &sc.users {
            let Some(prep) = prepared.get(&u.id) else { continue };
            let drain = drain_fraction(prep.presence, &prep.loads)?;
            let mobile = (u.zone, sc.mobile);
            let wireless = sc.subzone_networks.get(&u.zone).map(|&n| (u.zone, n));
            let x_m = state.get(mobile.0, mobile.1).unwrap_or(0.0);
            let x_w = wireless.and_then(|p| state.get(p.0, p.1)).unwrap_or(0.0);

            let pool = match sc.options.selection {
                Selection::Resources => match select_network(x_m, x_w, u.min_units) {
                    NetworkChoice::Mobile => Some(mobile),
                    NetworkChoice::Wireless => wireless,
                    NetworkChoice::Blocked => None,
                },
                Selection::Occupancy => {
                    let candidates: Vec<Candidate> = std::iter::once((mobile, x_m))
                        .chain(wireless.map(|p| (p, x_w)))
                        .filter(|&(_, x)| can_serve(x, u.min_units))
                        .map(|((_, net), x)| Candidate {
                            network: net,
                            available: x,
                            occupancy: u.profile_at(t, sc.network(net)).bits_per_unit() * x * drain,
                        })
                        .collect();
                    occupancy_heterogeneous(&candidates).ok().map(|(net, _)| (u.zone, net))
                }
            };
            let Some(pool) = pool else {
                blocked.push(u.id);
                continue;
            };

            let network = sc.network(pool.1);
            let mut actions: Vec<f64> = prep
                .loads
                .iter()
                .map(|l| ((prep.presence + l.handover) * l.rate).clamp(0.0, 1.0))
                .collect();
            actions.push(drain.min(1.0));
            by_pool.entry(pool).or_default().push(Request {
                user: u.id,
                pool,
                drain,
                actions,
                weight: u.weight,
                snr: u.snr.unwrap_or_else(|| u.modulation_at(t, network).1 as f64),
                average_rate: u.average_rate,
                coefficients: (t..sim.horizon).map(|s| u.profile_at(s, network).bits_per_unit()).collect(),
            });
        }

        let mut records = Vec::new();
        for (pool, reqs) in &by_pool {
            let x = state.get(pool.0, pool.1).unwrap_or(0.0);
            let asked = grants_for(sim.allocator, reqs, x, sim.horizon - t, &mut seeder)?;
            let (grants, rejected) = match sc.options.overload {
                Overload::Scale => (enforce_capacity(&asked, x), Vec::new()),
                Overload::Block => enforce_capacity_blocking(&asked, x),
            };
            let mut drained = 0.0;
            for (i, (r, &g)) in reqs.iter().zip(&grants).enumerate() {
                if rejected.contains(&i) {
                    blocked.push(r.user);
                    continue;
                }
                drained += g;
                records.push(AllocationRecord {
                    user: r.user,
                    zone: r.pool.0,
                    network: r.pool.1,
                    step: t,
                    granted: g,
                    occupancy: r.coefficients[0] * g,
                });
            }
            state.drain(*pool, drained.min(x))?;
        }
        records.sort_by_key(|r| r.user);
        blocked.sort();

        system_state += records.iter().map(|r| r.occupancy).sum::<f64>();
        reports.push(StepReport {
            step: t,
            records,
            blocked,
            system_state,
            resources: state.pools().clone(),
        });
        state.advance();
    }
    Ok(reports)
}

/// Units each request in one pool is granted before capacity enforcement.
fn grants_for(
    allocator: AllocatorKind,
    reqs: &[Request],
    available: f64,
    remaining_steps: usize,
    seeder: &mut ChaCha8Rng,
) -> Result<Vec<f64>, SimError> {
    if allocator == AllocatorKind::Dp {
        let members: Vec<PoolMember> = reqs
            .iter()
            .map(|r| PoolMember { actions: r.actions.clone(), coefficients: r.coefficients.clone() })
            .collect();
        let plan = plan_pool(&members, remaining_steps)?;
        return Ok(plan.actions.iter().map(|w| available * w).collect());
    }

    // baselines redistribute the units the plain allocation would hand out
    let demands: Vec<f64> = reqs.iter().map(|r| available * r.drain).collect();
    let input = SchedulerInput {
        capacity: demands.iter().sum::<f64>().min(available),
        users: reqs
            .iter()
            .zip(&demands)
            .map(|(r, &demand)| SchedUser {
                demand,
                weight: r.weight,
                snr: r.snr,
                instantaneous_rate: r.coefficients[0],
                average_rate: r.average_rate,
            })
            .collect(),
    };
    let n = reqs.len();
    Ok(match allocator {
        AllocatorKind::Dp => unreachable!("handled above"),
        AllocatorKind::RoundRobin => baselines::round_robin(&input),
        AllocatorKind::Fq => baselines::fair_queuing(&input),
        AllocatorKind::Random => baselines::random_access(&input, seeder.gen()),
        AllocatorKind::MaxMin => baselines::max_min_fair(&input),
        AllocatorKind::Wfq => baselines::weighted_fair_queuing(&input)?,
        AllocatorKind::MaxSnr => baselines::whole_slot(n, baselines::max_snr(&input), input.capacity),
        AllocatorKind::Pf => baselines::whole_slot(n, baselines::proportional_fair(&input)?, input.capacity),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UserTotals {
    pub units: f64,
    pub bits: f64,
    pub blocked_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps: usize,
    pub total_bits: f64,
    pub total_units: f64,
    pub per_user: BTreeMap<UserId, UserTotals>,
    /// Distinct users blocked at least once.
    pub blocked_users: usize,
    /// Every (user, step) blocking occurrence.
    pub blocking_events: usize,
    pub final_resources: BTreeMap<Pool, f64>,
}

/// Aggregates step reports into run totals.
pub fn summarize(reports: &[StepReport]) -> Result<Summary, SimError> {
    let last = reports.last().ok_or(SimError::EmptyRun)?;
    let mut per_user: BTreeMap<UserId, UserTotals> = BTreeMap::new();
    let mut blocking_events = 0;
    for rep in reports {
        for r in &rep.records {
            let e = per_user.entry(r.user).or_default();
            e.units += r.granted;
            e.bits += r.occupancy;
        }
        for &u in &rep.blocked {
            per_user.entry(u).or_default().blocked_steps += 1;
            blocking_events += 1;
        }
    }
    Ok(Summary {
        steps: reports.len(),
        total_bits: per_user.values().map(|u| u.bits).sum(),
        total_units: per_user.values().map(|u| u.units).sum(),
        blocked_users: per_user.values().filter(|u| u.blocked_steps > 0).count(),
        blocking_events,
        final_resources: last.resources.clone(),
        per_user,
    })
}

/// Total units granted per pool over a run.
pub fn grants_per_pool(reports: &[StepReport]) -> BTreeMap<(ZoneId, NetworkId), f64> {
    let mut out = BTreeMap::new();
    for r in reports.iter().flat_map(|rep| &rep.records) {
        *out.entry((r.zone, r.network)).or_insert(0.0) += r.granted;
    }
    out
}
