//! Finite-horizon dynamic programming over the resource recursion.
//!
//! A pool holding `x` units is drained by a fraction `w` chosen each step from
//! a finite action set. The stage reward is the bits the drained units carry,
//! `c_t·x·w`, and the next state is `x·(1 − w)`. [`solve_dp`] maximizes the
//! summed reward by backward induction
//!
//! ```text
//! V_T(x) = 0
//! V_t(x) = max_{w ∈ Γ_t} [ c_t·x·w + V_{t+1}(x·(1 − w)) ]
//! ```
//!
//! over the tree of reachable states. Among optimal action sequences the
//! lexicographically smallest one is returned, which makes the result
//! comparable with [`brute_force_oracle`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative gap below which two values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Cap on the number of sequences [`brute_force_oracle`] will enumerate.
pub const ORACLE_SEQUENCE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellmanError {
    #[error("horizon must be at least one step")]
    ZeroHorizon,
    #[error("{actions} action sets but {coefficients} stage coefficients")]
    LengthMismatch { actions: usize, coefficients: usize },
    #[error("infeasible instance: empty action set at step {step}")]
    EmptyActionSet { step: usize },
    #[error("action {value} at step {step} is outside [0, 1]")]
    InvalidAction { step: usize, value: f64 },
    #[error("stage coefficient {value} at step {step} must be positive")]
    InvalidCoefficient { step: usize, value: f64 },
    #[error("state must be finite and non-negative, got {0}")]
    InvalidState(f64),
    #[error("instance has {0} action sequences, above the enumeration limit")]
    TooLarge(u64),
}

/// A finite-horizon allocation problem for one resource pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpInstance {
    /// `x⁰`
    pub initial_state: f64,
    /// `Γ_t` for each step; the horizon is its length.
    pub actions: Vec<Vec<f64>>,
    /// `c_t = K_r·N_of·N_bit` for each step.
    pub stage_coefficients: Vec<f64>,
}

impl DpInstance {
    pub fn new(initial_state: f64, actions: Vec<Vec<f64>>, stage_coefficients: Vec<f64>) -> Result<Self, BellmanError> {
        let inst = DpInstance { initial_state, actions, stage_coefficients };
        inst.validate()?;
        Ok(inst)
    }

    /// Same action set and coefficient at every step.
    pub fn stationary(initial_state: f64, actions: Vec<f64>, coefficient: f64, horizon: usize) -> Result<Self, BellmanError> {
        DpInstance::new(initial_state, vec![actions; horizon], vec![coefficient; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    pub fn validate(&self) -> Result<(), BellmanError> {
        if self.actions.is_empty() {
            return Err(BellmanError::ZeroHorizon);
        }
        if self.actions.len() != self.stage_coefficients.len() {
            return Err(BellmanError::LengthMismatch {
                actions: self.actions.len(),
                coefficients: self.stage_coefficients.len(),
            });
        }
        if !(self.initial_state >= 0.0 && self.initial_state.is_finite()) {
            return Err(BellmanError::InvalidState(self.initial_state));
        }
        for (step, (set, &c)) in self.actions.iter().zip(&self.stage_coefficients).enumerate() {
            if set.is_empty() {
                return Err(BellmanError::EmptyActionSet { step });
            }
            if let Some(&value) = set.iter().find(|w| !(0.0..=1.0).contains(*w)) {
                return Err(BellmanError::InvalidAction { step, value });
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(BellmanError::InvalidCoefficient { step, value: c });
            }
        }
        Ok(())
    }

    /// Action sets sorted ascending without duplicates.
    fn sorted_actions(&self) -> Vec<Vec<f64>> {
        self.actions.iter().map(|set| sorted_unique(set)).collect()
    }
}

fn sorted_unique(set: &[f64]) -> Vec<f64> {
    let mut v = set.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// An action sequence together with the states and rewards it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrace {
    /// `w^t`, one per step.
    pub actions: Vec<f64>,
    /// `x^0 ..= x^T`, one longer than `actions`.
    pub states: Vec<f64>,
    /// `F(x^t, w^t)` per step.
    pub stage_values: Vec<f64>,
    /// `Z*`, the summed stage values.
    pub total: f64,
}

impl PolicyTrace {
    /// Replays `actions` from `initial_state`.
    pub fn simulate(initial_state: f64, actions: &[f64], coefficients: &[f64]) -> Result<Self, BellmanError> {
        let mut states = Vec::with_capacity(actions.len() + 1);
        let mut stage_values = Vec::with_capacity(actions.len());
        let mut x = initial_state;
        states.push(x);
        for (&w, &c) in actions.iter().zip(coefficients) {
            stage_values.push(stage_value(x, w, c));
            x = transfer(x, w)?;
            states.push(x);
        }
        Ok(PolicyTrace {
            actions: actions.to_vec(),
            total: stage_values.iter().sum(),
            states,
            stage_values,
        })
    }

    pub fn final_state(&self) -> f64 {
        *self.states.last().expect("trace always holds the initial state")
    }
}

/// True when `a` beats `b` by more than the tie tolerance.
fn exceeds(a: f64, b: f64) -> bool {
    a - b > TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Drain fractions `(P + τ^H)·τ_k`, one per service, clamped into `[0, 1]`,
/// sorted and deduplicated. Empty when there are no services.
pub fn action_set(presence: f64, handover: f64, rates: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = rates
        .iter()
        .map(|r| ((presence + handover) * r).clamp(0.0, 1.0))
        .collect();
    sorted_unique(&w)
}

/// Transfer function `Φ(x, w) = x·(1 − w)`.
pub fn transfer(x: f64, w: f64) -> Result<f64, BellmanError> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(BellmanError::InvalidState(x));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(BellmanError::InvalidAction { step: 0, value: w });
    }
    Ok(x * (1.0 - w))
}

/// Stage reward `F(x, w) = c·x·w`, the bits carried by the drained units.
pub fn stage_value(x: f64, w: f64, coefficient: f64) -> f64 {
    coefficient * x * w
}

/// Memo key: the state rounded to 12 significant digits.
fn state_key(x: f64) -> String {
    format!("{x:.11e}")
}

struct Solver<'a> {
    actions: &'a [Vec<f64>],
    coefficients: &'a [f64],
    /// Per step: state key → (value-to-go, index of best action).
    memo: Vec<HashMap<String, (f64, usize)>>,
}

impl Solver<'_> {
    fn value(&mut self, step: usize, x: f64) -> f64 {
        if step == self.actions.len() {
            return 0.0;
        }
        let key = state_key(x);
        if let Some(&(v, _)) = self.memo[step].get(&key) {
            return v;
        }
        let c = self.coefficients[step];
        let mut best: Option<(f64, usize)> = None;
        for j in 0..self.actions[step].len() {
            let w = self.actions[step][j];
            let v = stage_value(x, w, c) + self.value(step + 1, x * (1.0 - w));
            if best.map_or(true, |(b, _)| exceeds(v, b)) {
                best = Some((v, j));
            }
        }
        let best = best.expect("validated action sets are non-empty");
        self.memo[step].insert(key, best);
        best.0
    }
}

/// Optimal policy by backward induction over the reachable-state tree.
pub fn solve_dp(inst: &DpInstance) -> Result<PolicyTrace, BellmanError> {
    inst.validate()?;
    let actions = inst.sorted_actions();
    let mut solver = Solver {
        actions: &actions,
        coefficients: &inst.stage_coefficients,
        memo: vec![HashMap::new(); actions.len()],
    };
    solver.value(0, inst.initial_state);

    let mut chosen = Vec::with_capacity(actions.len());
    let mut x = inst.initial_state;
    for (step, set) in actions.iter().enumerate() {
        let &(_, j) = solver.memo[step]
            .get(&state_key(x))
            .expect("forward pass follows states visited by the backward pass");
        chosen.push(set[j]);
        x = transfer(x, set[j])?;
    }
    PolicyTrace::simulate(inst.initial_state, &chosen, &inst.stage_coefficients)
}

/// Exhaustive search over every action sequence, each evaluated by a direct
/// forward simulation. Ties keep the lexicographically first sequence.
pub fn brute_force_oracle(inst: &DpInstance) -> Result<PolicyTrace, BellmanError> {
    inst.validate()?;
    let actions = inst.sorted_actions();
    let count = actions
        .iter()
        .try_fold(1u64, |acc, set| acc.checked_mul(set.len() as u64))
        .unwrap_or(u64::MAX);
    if count > ORACLE_SEQUENCE_LIMIT {
        return Err(BellmanError::TooLarge(count));
    }

    let mut idx = vec![0usize; actions.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut x = inst.initial_state;
        let mut total = 0.0;
        for (t, &j) in idx.iter().enumerate() {
            let w = actions[t][j];
            total += inst.stage_coefficients[t] * x * w;
            x -= x * w;
        }
        if best.as_ref().map_or(true, |(b, _)| exceeds(total, *b)) {
            best = Some((total, idx.clone()));
        }
        // odometer, last position fastest: lexicographic order
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                let (_, seq) = best.expect("at least one sequence");
                let chosen: Vec<f64> = seq.iter().enumerate().map(|(t, &j)| actions[t][j]).collect();
                return PolicyTrace::simulate(inst.initial_state, &chosen, &inst.stage_coefficients);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < actions[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Inputs of the forward allocation loop for one user on one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm1Input {
    /// `x⁰`
    pub initial_state: f64,
    /// `P_z`
    pub presence: f64,
    /// `τ^H_z`
    pub handover: f64,
    /// `τ^{i,k}_z` for each requested service.
    pub rates: Vec<f64>,
    /// `K_r·N_of·N_bit` for each step; its length is the horizon.
    pub coefficients: Vec<f64>,
}

/// The forward loop: at each step build `Γ` from the request rates, take the
/// action with the largest immediate reward (smallest on ties), apply the
/// transfer and accumulate the reward. With singleton action sets this is the
/// optimal policy; otherwise it is the step-greedy one.
pub fn run_algorithm1(input: &Algorithm1Input) -> Result<PolicyTrace, BellmanError> {
    if input.coefficients.is_empty() {
        return Err(BellmanError::ZeroHorizon);
    }
    let mut x = input.initial_state;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(BellmanError::InvalidState(x));
    }
    let mut chosen = Vec::with_capacity(input.coefficients.len());
    for (step, &c) in input.coefficients.iter().enumerate() {
        if !(c > 0.0 && c.is_finite()) {
            return Err(BellmanError::InvalidCoefficient { step, value: c });
        }
        let gamma = action_set(input.presence, input.handover, &input.rates);
        let mut best: Option<(f64, f64)> = None;
        for &w in &gamma {
            let f = stage_value(x, w, c);
            if best.map_or(true, |(b, _)| exceeds(f, b)) {
                best = Some((f, w));
            }
        }
        let (_, w) = best.ok_or(BellmanError::EmptyActionSet { step })?;
        chosen.push(w);
        x = transfer(x, w)?;
    }
    PolicyTrace::simulate(input.initial_state, &chosen, &input.coefficients)
}

/// One user sharing a pool: its action set and its coefficient for each
/// remaining step.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolMember {
    pub actions: Vec<f64>,
    pub coefficients: Vec<f64>,
}

/// Decision for the current step of a shared pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolDecision {
    /// Chosen drain fraction per member, in input order.
    pub actions: Vec<f64>,
    /// Optimal value per available unit over the remaining steps.
    pub value_per_unit: f64,
}

/// Plans the current step for several users drawing on one pool.
///
/// With every member choosing `w_i` the pool reward is `x·Σ c_i·w_i` and the
/// next state `x·(1 − Σ w_i)`, so the value function is linear in `x`:
/// `V_t(x) = v_t·x` with
///
/// ```text
/// v_t = v_{t+1} + Σ_i max_{w ∈ Γ_i} w·(c_i(t) − v_{t+1})
/// ```
///
/// The joint maximization separates per member. Exact as long as the members'
/// total drain stays within 1; beyond that the caller's capacity enforcement
/// scales grants down.
pub fn plan_pool(members: &[PoolMember], steps: usize) -> Result<PoolDecision, BellmanError> {
    if steps == 0 {
        return Err(BellmanError::ZeroHorizon);
    }
    let sets: Vec<Vec<f64>> = members.iter().map(|m| sorted_unique(&m.actions)).collect();
    for (m, set) in members.iter().zip(&sets) {
        if set.is_empty() {
            return Err(BellmanError::EmptyActionSet { step: 0 });
        }
        if let Some(&value) = set.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(BellmanError::InvalidAction { step: 0, value });
        }
        if m.coefficients.len() < steps {
            return Err(BellmanError::LengthMismatch { actions: steps, coefficients: m.coefficients.len() });
        }
    }

    let pick = |set: &[f64], margin: f64| -> f64 {
        let mut best = (set[0] * margin, set[0]);
        for &w in &set[1..] {
            if exceeds(w * margin, best.0) {
                best = (w * margin, w);
            }
        }
        best.1
    };

    // v[t] for t = steps down to 1; v_next ends as v_1
    let mut v_next = 0.0;
    for t in (1..steps).rev() {
        let mut v = v_next;
        for (m, set) in members.iter().zip(&sets) {
            let margin = m.coefficients[t] - v_next;
            v += pick(set, margin) * margin;
        }
        v_next = v;
    }
    let mut value = v_next;
    let mut actions = Vec::with_capacity(members.len());
    for (m, set) in members.iter().zip(&sets) {
        let margin = m.coefficients[0] - v_next;
        let w = pick(set, margin);
        value += w * margin;
        actions.push(w);
    }
    Ok(PoolDecision { actions, value_per_unit: value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(x0: f64, actions: Vec<f64>, coefs: Vec<f64>) -> DpInstance {
        let t = coefs.len();
        DpInstance::new(x0, vec![actions; t], coefs).unwrap()
    }

    #[test]
    fn action_set_examples() {
        assert!(action_set(0.3, 0.1, &[]).is_empty());
        let set = action_set(0.04, 0.01, &[0.5, 0.3]);
        assert_eq!(set.len(), 2);
        assert!((set[0] - 0.015).abs() < 1e-15);
        assert!((set[1] - 0.025).abs() < 1e-15);
        assert_eq!(action_set(0.0, 0.0, &[0.5, 0.2, 0.9]), vec![0.0]);
        assert_eq!(action_set(0.9, 0.5, &[2.0]), vec![1.0]);
    }

    #[test]
    fn transfer_and_stage_value_examples() {
        assert_eq!(transfer(42.0, 0.0).unwrap(), 42.0);
        assert_eq!(transfer(100.0, 0.5).unwrap(), 50.0);
        assert!((transfer(80.0, 0.025).unwrap() - 78.0).abs() < 1e-12);
        assert!(transfer(80.0, 1.5).is_err());
        assert!(transfer(-1.0, 0.5).is_err());
        assert_eq!(stage_value(100.0, 0.0, 7.0), 0.0);
        assert!((stage_value(100.0, 0.1, 1008.0) - 10080.0).abs() < 1e-9);
        assert_eq!(stage_value(100.0, 0.5, 1.0), 50.0);
    }

    #[test]
    fn two_step_equal_coefficients() {
        let trace = solve_dp(&inst(100.0, vec![0.1, 0.5], vec![1.0, 1.0])).unwrap();
        assert_eq!(trace.actions, vec![0.5, 0.5]);
        assert_eq!(trace.total, 75.0);
        assert_eq!(trace.states, vec![100.0, 50.0, 25.0]);
    }

    #[test]
    fn two_step_rising_coefficient_beats_greedy() {
        let trace = solve_dp(&inst(100.0, vec![0.1, 0.5], vec![1.0, 10.0])).unwrap();
        assert_eq!(trace.actions, vec![0.1, 0.5]);
        assert!((trace.total - 460.0).abs() < 1e-9);
        let greedy = PolicyTrace::simulate(100.0, &[0.5, 0.5], &[1.0, 10.0]).unwrap();
        assert!(greedy.total < trace.total);
    }

    #[test]
    fn single_step_single_action() {
        let trace = solve_dp(&inst(80.0, vec![0.25], vec![3.0])).unwrap();
        assert_eq!(trace.total, 3.0 * 80.0 * 0.25);
        let oracle = brute_force_oracle(&inst(80.0, vec![0.25, 0.1], vec![3.0])).unwrap();
        assert_eq!(oracle.actions, vec![0.25]);
    }

    #[test]
    fn invalid_instances() {
        assert_eq!(DpInstance::new(1.0, vec![], vec![]), Err(BellmanError::ZeroHorizon));
        assert_eq!(
            DpInstance::new(1.0, vec![vec![0.1], vec![]], vec![1.0, 1.0]),
            Err(BellmanError::EmptyActionSet { step: 1 })
        );
        assert!(DpInstance::new(1.0, vec![vec![1.1]], vec![1.0]).is_err());
        assert!(DpInstance::new(1.0, vec![vec![0.1]], vec![0.0]).is_err());
        assert!(DpInstance::new(-1.0, vec![vec![0.1]], vec![1.0]).is_err());
        assert!(DpInstance::new(1.0, vec![vec![0.1]], vec![1.0, 2.0]).is_err());
        let bad = DpInstance { initial_state: 1.0, actions: vec![vec![]], stage_coefficients: vec![1.0] };
        assert_eq!(solve_dp(&bad), Err(BellmanError::EmptyActionSet { step: 0 }));
    }

    #[test]
    fn oracle_guard() {
        let big = DpInstance::stationary(1.0, (0..10).map(|i| i as f64 / 10.0).collect(), 1.0, 7).unwrap();
        assert_eq!(brute_force_oracle(&big), Err(BellmanError::TooLarge(10_000_000)));
        let ok = DpInstance::stationary(1.0, (0..10).map(|i| i as f64 / 10.0).collect(), 1.0, 6).unwrap();
        assert!(brute_force_oracle(&ok).is_ok());
    }

    #[test]
    fn algorithm1_examples() {
        let zero = Algorithm1Input {
            initial_state: 0.0,
            presence: 0.04,
            handover: 0.01,
            rates: vec![0.5, 0.3],
            coefficients: vec![1008.0; 5],
        };
        assert_eq!(run_algorithm1(&zero).unwrap().total, 0.0);

        // singleton action 0.1 = (0.1 + 0.0) * 1.0
        let single = Algorithm1Input {
            initial_state: 100.0,
            presence: 0.1,
            handover: 0.0,
            rates: vec![1.0],
            coefficients: vec![1.0, 1.0],
        };
        let trace = run_algorithm1(&single).unwrap();
        assert!((trace.total - 19.0).abs() < 1e-12);
        assert!((trace.final_state() - 81.0).abs() < 1e-12);
        let dp = solve_dp(&DpInstance::stationary(100.0, vec![0.1], 1.0, 2).unwrap()).unwrap();
        assert_eq!(trace, dp);

        let one_step = Algorithm1Input { coefficients: vec![2.0], ..single.clone() };
        assert!((run_algorithm1(&one_step).unwrap().total - 20.0).abs() < 1e-12);

        let no_service = Algorithm1Input { rates: vec![], ..single };
        assert_eq!(run_algorithm1(&no_service), Err(BellmanError::EmptyActionSet { step: 0 }));
    }

    #[test]
    fn algorithm1_is_greedy_with_several_actions() {
        // actions {0.1, 0.5} from rates {1, 5} at presence 0.1
        let input = Algorithm1Input {
            initial_state: 100.0,
            presence: 0.1,
            handover: 0.0,
            rates: vec![1.0, 5.0],
            coefficients: vec![1.0, 10.0],
        };
        let greedy = run_algorithm1(&input).unwrap();
        assert_eq!(greedy.actions, vec![0.5, 0.5]);
        assert!((greedy.total - 300.0).abs() < 1e-9);
    }

    #[test]
    fn pool_plan_single_member_matches_solver() {
        let member = PoolMember { actions: vec![0.1, 0.5], coefficients: vec![1.0, 10.0] };
        let plan = plan_pool(&[member], 2).unwrap();
        assert_eq!(plan.actions, vec![0.1]);
        assert!((plan.value_per_unit * 100.0 - 460.0).abs() < 1e-9);
    }

    #[test]
    fn pool_plan_throttles_low_value_member() {
        // a cheap user draining now costs the valuable one later
        let cheap = PoolMember { actions: vec![0.05, 0.4], coefficients: vec![1.0, 1.0, 1.0] };
        let rich = PoolMember { actions: vec![0.3], coefficients: vec![100.0, 100.0, 100.0] };
        let plan = plan_pool(&[cheap, rich], 3).unwrap();
        assert_eq!(plan.actions, vec![0.05, 0.3]);
    }

    #[test]
    fn pool_plan_rejects_bad_members() {
        assert!(plan_pool(&[], 0).is_err());
        let empty = PoolMember { actions: vec![], coefficients: vec![1.0] };
        assert!(plan_pool(&[empty], 1).is_err());
        let short = PoolMember { actions: vec![0.1], coefficients: vec![1.0] };
        assert!(plan_pool(&[short], 2).is_err());
    }
}
