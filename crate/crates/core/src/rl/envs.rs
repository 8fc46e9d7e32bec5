//! Built-in environments whose return distributions can be enumerated or
//! checked by Monte-Carlo rollouts.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::mdp::{Categorical, MdpDescription, ToyMdp};
use crate::Result;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "single-state",
    "zero-reward",
    "chain3",
    "coin-chain",
    "one-arm",
    "bandit",
    "bandit-wide",
    "chain5",
    "windy-grid",
];

/// Looks up a built-in environment by name.
pub fn builtin(name: &str) -> Option<ToyMdp> {
    let mdp = match name {
        "single-state" => single_state(1.0, 0.5),
        "zero-reward" => single_state(0.0, 0.5),
        "chain3" => deterministic_chain(3, 1.0, 0.5),
        "coin-chain" => coin_chain(0.5),
        "one-arm" => bandit(&[vec![(0.0, 0.5), (2.0, 0.5)]], 0.5),
        "bandit" => bandit(&[vec![(1.0, 1.0)], vec![(0.0, 0.5), (2.0, 0.5)]], 0.5),
        "bandit-wide" => bandit(&[vec![(1.0, 1.0)], vec![(0.0, 0.5), (4.0, 0.5)]], 0.5),
        "chain5" => five_state_chain(vec![(0.0, 0.5), (2.0, 0.5)], 0.9),
        "windy-grid" => windy_gridworld(0.95),
        _ => return None,
    };
    let mut mdp = mdp.expect("built-in environments are valid");
    mdp.name = String::from(name);
    Some(mdp)
}

fn empty_rows(n_states: usize) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<Categorical>>) {
    (vec![Vec::new(); n_states], vec![Vec::new(); n_states])
}

fn unit_row(n_states: usize, next: usize) -> Vec<f64> {
    let mut row = vec![0.0; n_states];
    row[next] = 1.0;
    row
}

/// One non-terminal state looping onto itself with a fixed reward. The
/// return is the constant `reward / (1 - gamma)` up to horizon truncation.
pub fn single_state(reward: f64, gamma: f64) -> Result<ToyMdp> {
    ToyMdp::new(MdpDescription {
        name: String::from("single-state"),
        features: None,
        n_states: 1,
        n_actions: 1,
        transitions: vec![vec![vec![1.0]]],
        rewards: vec![vec![vec![(reward, 1.0)]]],
        terminal: vec![false],
        gamma,
        start: 0,
    })
}

/// `len` states in a row, one action, fixed reward per step, then terminal.
pub fn deterministic_chain(len: usize, reward: f64, gamma: f64) -> Result<ToyMdp> {
    let n = len + 1;
    let (mut transitions, mut rewards) = empty_rows(n);
    for s in 0..len {
        transitions[s] = vec![unit_row(n, s + 1)];
        rewards[s] = vec![vec![(reward, 1.0)]];
    }
    let mut terminal = vec![false; n];
    terminal[len] = true;
    ToyMdp::new(MdpDescription {
        name: String::from("chain"),
        features: None,
        n_states: n,
        n_actions: 1,
        transitions,
        rewards,
        terminal,
        gamma,
        start: 0,
    })
}

/// Two steps, each paying 0 or 1 with equal probability.
pub fn coin_chain(gamma: f64) -> Result<ToyMdp> {
    let (mut transitions, mut rewards) = empty_rows(3);
    for s in 0..2 {
        transitions[s] = vec![unit_row(3, s + 1)];
        rewards[s] = vec![vec![(0.0, 0.5), (1.0, 0.5)]];
    }
    ToyMdp::new(MdpDescription {
        name: String::from("coin-chain"),
        features: None,
        n_states: 3,
        n_actions: 1,
        transitions,
        rewards,
        terminal: vec![false, false, true],
        gamma,
        start: 0,
    })
}

/// One state, one arm per reward distribution, then terminal.
pub fn bandit(arms: &[Categorical], gamma: f64) -> Result<ToyMdp> {
    let (mut transitions, mut rewards) = empty_rows(2);
    transitions[0] = vec![unit_row(2, 1); arms.len()];
    rewards[0] = arms.to_vec();
    ToyMdp::new(MdpDescription {
        name: String::from("bandit"),
        features: None,
        n_states: 2,
        n_actions: arms.len(),
        transitions,
        rewards,
        terminal: vec![false, true],
        gamma,
        start: 0,
    })
}

/// Five states in a row. Action 0 moves left (staying put at the left end),
/// action 1 moves right; moving right from the last state ends the episode
/// with a reward drawn from `terminal_reward`. All other rewards are zero.
pub fn five_state_chain(terminal_reward: Categorical, gamma: f64) -> Result<ToyMdp> {
    const LEN: usize = 5;
    let n = LEN + 1;
    let (mut transitions, mut rewards) = empty_rows(n);
    for s in 0..LEN {
        let left = unit_row(n, s.saturating_sub(1));
        let right = unit_row(n, s + 1);
        transitions[s] = vec![left, right];
        let right_reward = if s + 1 == LEN { terminal_reward.clone() } else { vec![(0.0, 1.0)] };
        rewards[s] = vec![vec![(0.0, 1.0)], right_reward];
    }
    let mut terminal = vec![false; n];
    terminal[LEN] = true;
    ToyMdp::new(MdpDescription {
        name: String::from("chain5"),
        features: None,
        n_states: n,
        n_actions: 2,
        transitions,
        rewards,
        terminal,
        gamma,
        start: 0,
    })
}

/// 4x4 grid, start in the bottom-left corner, goal in the top-right corner.
/// Actions: 0 up, 1 down, 2 left, 3 right. In the two middle columns a
/// gust pushes the agent one extra row up with probability 1/2. Every step
/// costs 1.
pub fn windy_gridworld(gamma: f64) -> Result<ToyMdp> {
    const SIDE: usize = 4;
    let cells = SIDE * SIDE;
    let goal = cells; // absorbing terminal index
    let n = cells + 1;
    let index = |row: usize, col: usize| row * SIDE + col;
    let (mut transitions, mut rewards) = empty_rows(n);
    for row in 0..SIDE {
        for col in 0..SIDE {
            let s = index(row, col);
            let mut per_action = Vec::with_capacity(4);
            for a in 0..4 {
                let (r, c) = match a {
                    0 => ((row + 1).min(SIDE - 1), col),
                    1 => (row.saturating_sub(1), col),
                    2 => (row, col.saturating_sub(1)),
                    _ => (row, (col + 1).min(SIDE - 1)),
                };
                let calm = (r, c);
                let gust = ((r + 1).min(SIDE - 1), c);
                let outcomes: Vec<((usize, usize), f64)> =
                    if col == 1 || col == 2 { vec![(calm, 0.5), (gust, 0.5)] } else { vec![(calm, 1.0)] };
                let mut p = vec![0.0; n];
                for ((r, c), w) in outcomes {
                    let next = if (r, c) == (SIDE - 1, SIDE - 1) { goal } else { index(r, c) };
                    p[next] += w;
                }
                per_action.push(p);
            }
            transitions[s] = per_action;
            rewards[s] = vec![vec![(-1.0, 1.0)]; 4];
        }
    }
    // the goal cell itself is never occupied; keep its row valid anyway
    let goal_cell = index(SIDE - 1, SIDE - 1);
    transitions[goal_cell] = vec![unit_row(n, goal); 4];
    let mut terminal = vec![false; n];
    terminal[goal] = true;
    let mut features: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut f = vec![0.0; cells];
            if s < cells {
                f[s] = 1.0;
            }
            f
        })
        .collect();
    features[goal] = vec![0.0; cells];
    ToyMdp::new(MdpDescription {
        name: String::from("windy-grid"),
        features: Some(features),
        n_states: n,
        n_actions: 4,
        transitions,
        rewards,
        terminal,
        gamma,
        start: index(0, 0),
    })
}
