//! Finite cooperative games and exact Shapley values.
//!
//! Coalitions are bitmasks over the player list: bit `i` set means player `i` is a
//! member. A game with `n` players stores all `2ⁿ` payoffs densely, so `n` is capped at
//! [`MAX_PLAYERS`].

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_PLAYERS: usize = 12;

/// Permutation enumeration visits `n!` orderings; beyond this it is refused.
pub const MAX_PERMUTATION_PLAYERS: usize = 9;

pub const DEFAULT_TIE_TOL: f64 = 1e-9;

pub type Coalition = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct CooperativeGame {
    players: Vec<String>,
    values: Vec<f64>,
}

impl CooperativeGame {
    /// `values[s]` is the payoff of coalition bitmask `s`; `values[0]` must be zero.
    pub fn new(players: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = players.len();
        if n == 0 {
            return Err(Error::domain("a game needs at least one player"));
        }
        if n > MAX_PLAYERS {
            return Err(Error::domain(format!(
                "{n} players exceeds the limit of {MAX_PLAYERS}"
            )));
        }
        if values.len() != 1 << n {
            return Err(Error::domain(format!(
                "{n} players need {} coalition values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::domain("the empty coalition must have value 0"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite coalition value {v}")));
        }
        let mut seen = players.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != n {
            return Err(Error::domain("player names must be unique"));
        }
        Ok(CooperativeGame { players, values })
    }

    /// Builds a game from a payoff function over coalition bitmasks; `v(∅)` is forced to 0.
    pub fn from_fn<F: FnMut(Coalition) -> f64>(players: Vec<String>, mut v: F) -> Result<Self> {
        let n = players.len();
        if n > MAX_PLAYERS {
            return Err(Error::domain(format!(
                "{n} players exceeds the limit of {MAX_PLAYERS}"
            )));
        }
        let values = (0..1u32 << n)
            .map(|s| if s == 0 { 0.0 } else { v(s) })
            .collect();
        Self::new(players, values)
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn grand_coalition(&self) -> Coalition {
        ((1u64 << self.n_players()) - 1) as Coalition
    }

    pub fn value(&self, s: Coalition) -> f64 {
        self.values[s as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coalition_of(&self, members: &[&str]) -> Result<Coalition> {
        members.iter().try_fold(0, |acc, name| {
            let i = self
                .players
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::format(format!("unknown player `{name}`")))?;
            Ok(acc | 1 << i)
        })
    }

    pub fn members(&self, s: Coalition) -> Vec<&str> {
        (0..self.n_players())
            .filter(|i| s >> i & 1 == 1)
            .map(|i| self.players[i].as_str())
            .collect()
    }

    /// `α·self + β·other` over identical player lists.
    pub fn combine(&self, alpha: f64, other: &CooperativeGame, beta: f64) -> Result<Self> {
        if self.players != other.players {
            return Err(Error::domain("games have different players"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::new(self.players.clone(), values)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.players.clone(),
            self.values.iter().map(|v| c * v).collect(),
        )
    }

    pub fn to_json(&self) -> GameDocument {
        GameDocument {
            players: self.players.clone(),
            coalitions: (0..self.values.len() as Coalition)
                .map(|s| CoalitionEntry {
                    members: self.members(s).into_iter().map(String::from).collect(),
                    value: self.value(s),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &GameDocument) -> Result<Self> {
        let n = doc.players.len();
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::format(format!(
                "game must have 1..={MAX_PLAYERS} players, got {n}"
            )));
        }
        let index: BTreeMap<&str, usize> = doc
            .players
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        if index.len() != n {
            return Err(Error::format("duplicate player names"));
        }
        let mut values: Vec<Option<f64>> = vec![None; 1 << n];
        for entry in &doc.coalitions {
            let mut s = 0usize;
            for m in &entry.members {
                let i = *index
                    .get(m.as_str())
                    .ok_or_else(|| Error::format(format!("unknown player `{m}` in coalition")))?;
                if s >> i & 1 == 1 {
                    return Err(Error::format(format!("player `{m}` listed twice in a coalition")));
                }
                s |= 1 << i;
            }
            if values[s].replace(entry.value).is_some() {
                return Err(Error::format(format!(
                    "coalition {:?} given more than once",
                    entry.members
                )));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(s, v)| match (s, v) {
                (0, None) => Ok(0.0),
                (0, Some(v)) if v != 0.0 => {
                    Err(Error::format("the empty coalition must have value 0"))
                }
                (_, Some(v)) => Ok(v),
                (s, None) => Err(Error::format(format!(
                    "missing coalition {:?}",
                    (0..n)
                        .filter(|i| s >> i & 1 == 1)
                        .map(|i| doc.players[i].as_str())
                        .collect::<Vec<_>>()
                ))),
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(doc.players.clone(), values)
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let doc: GameDocument = serde_json::from_reader(reader)?;
        Self::from_document(&doc)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.to_json())?;
        Ok(())
    }
}

/// `{players:[…], coalitions:[{members:[…], value:…}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    pub players: Vec<String>,
    pub coalitions: Vec<CoalitionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionEntry {
    pub members: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyResult {
    pub players: Vec<String>,
    pub values: Vec<f64>,
    pub total: f64,
    /// `100 · value / total`, only when `total > 0`.
    pub dominance_pct: Option<Vec<f64>>,
    /// Player indices grouped into tiers of (near-)equal value, best tier first.
    pub ranking: Vec<Vec<usize>>,
}

impl ShapleyResult {
    pub fn from_values(players: Vec<String>, values: Vec<f64>, tie_tol: f64) -> Self {
        let total: f64 = values.iter().sum();
        let dominance_pct = (total > 0.0).then(|| values.iter().map(|v| 100.0 * v / total).collect());
        let ranking = rank_tiers(&values, tie_tol);
        ShapleyResult {
            players,
            values,
            total,
            dominance_pct,
            ranking,
        }
    }
}

/// Outcome of [`dominance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dominance {
    Dominant(usize),
    Tie(Vec<usize>),
    None,
}

fn rank_tiers(values: &[f64], tie_tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut tiers: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match tiers.last_mut() {
            Some(tier) if is_tie(values[tier[0]], values[i], tie_tol) => tier.push(i),
            _ => tiers.push(vec![i]),
        }
    }
    for tier in &mut tiers {
        tier.sort_unstable();
    }
    tiers
}

fn is_tie(a: f64, b: f64, tie_tol: f64) -> bool {
    (a - b).abs() <= tie_tol * a.abs().max(b.abs())
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Exact Shapley values via the subset-weighted formula
/// `φᵢ = Σ_{S ∌ i} |S|!(n−|S|−1)!/n! · (v(S ∪ {i}) − v(S))`.
pub fn shapley_values(game: &CooperativeGame, tie_tol: f64) -> Result<ShapleyResult> {
    let n = game.n_players();
    if n == 0 {
        return Err(Error::domain("empty player list"));
    }
    let fact = factorials(n);
    let weight: Vec<f64> = (0..n).map(|k| fact[k] * fact[n - k - 1] / fact[n]).collect();
    let values = (0..n)
        .map(|i| {
            let bit = 1 << i;
            (0..1u32 << n)
                .filter(|s| s & bit == 0)
                .map(|s| weight[s.count_ones() as usize] * (game.value(s | bit) - game.value(s)))
                .sum()
        })
        .collect();
    Ok(ShapleyResult::from_values(
        game.players().to_vec(),
        values,
        tie_tol,
    ))
}

/// Shapley values as the average marginal contribution over all `n!` player orderings.
pub fn shapley_by_permutations(game: &CooperativeGame, tie_tol: f64) -> Result<ShapleyResult> {
    let n = game.n_players();
    if n == 0 {
        return Err(Error::domain("empty player list"));
    }
    if n > MAX_PERMUTATION_PLAYERS {
        return Err(Error::domain(format!(
            "permutation enumeration is limited to {MAX_PERMUTATION_PLAYERS} players"
        )));
    }
    let mut totals = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut count = 0u64;
    let mut visit = |order: &[usize]| {
        let mut s: Coalition = 0;
        for &i in order {
            let with = s | 1 << i;
            totals[i] += game.value(with) - game.value(s);
            s = with;
        }
        count += 1;
    };
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    visit(&order);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let values = totals.iter().map(|t| t / count as f64).collect();
    Ok(ShapleyResult::from_values(
        game.players().to_vec(),
        values,
        tie_tol,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityReport {
    pub superadditive: bool,
    /// Unordered disjoint pairs `(A, B)` with `v(A ∪ B) < v(A) + v(B)`, `A < B` as bitmasks.
    pub violations: Vec<(Coalition, Coalition)>,
}

pub fn is_superadditive(game: &CooperativeGame) -> SuperadditivityReport {
    let full = game.grand_coalition();
    let mut violations = Vec::new();
    for a in 1..=full {
        let rest = full & !a;
        // Submasks of the complement of `a`, each unordered pair visited once.
        let mut b = rest;
        while b != 0 {
            if a < b && game.value(a | b) < game.value(a) + game.value(b) {
                violations.push((a, b));
            }
            b = (b - 1) & rest;
        }
    }
    violations.sort_unstable();
    SuperadditivityReport {
        superadditive: violations.is_empty(),
        violations,
    }
}

/// Monotone closure `v′(S) = max_{T ⊆ S} v(T)`.
///
/// On pairs this is the rule "a combination worth less than either member alone takes the
/// better member's value"; applied to every coalition it also lifts larger coalitions.
pub fn monotone_modify(game: &CooperativeGame) -> CooperativeGame {
    let n = game.n_players();
    let mut closed = game.values().to_vec();
    for s in 1..closed.len() {
        for i in 0..n {
            if s >> i & 1 == 1 {
                closed[s] = closed[s].max(closed[s & !(1 << i)]);
            }
        }
    }
    CooperativeGame {
        players: game.players.clone(),
        values: closed,
    }
}

/// Top ranking tier, or `None` when nobody contributes positively.
pub fn dominance(result: &ShapleyResult) -> Dominance {
    let all_non_positive = result.values.iter().all(|&v| v <= 0.0);
    if result.total <= 0.0 || all_non_positive {
        return Dominance::None;
    }
    match result.ranking.first() {
        Some(tier) if tier.len() == 1 => Dominance::Dominant(tier[0]),
        Some(tier) => Dominance::Tie(tier.clone()),
        None => Dominance::None,
    }
}

/// Built-in games of the three-student report-writing story.
pub mod demos {
    use super::*;

    fn abc(values: [f64; 7]) -> CooperativeGame {
        // Order: A, B, C, AB, AC, BC, ABC
        let [a, b, c, ab, ac, bc, abc] = values;
        let players = vec!["A".to_string(), "B".to_string(), "C".to_string()];
        CooperativeGame::new(players, vec![0.0, a, b, ab, c, ac, bc, abc])
            .expect("static demo game is valid")
    }

    /// Pages written by each group; super-additive.
    pub fn report_writing() -> CooperativeGame {
        abc([20.0, 27.0, 35.0, 55.0, 62.0, 74.0, 100.0])
    }

    /// Alice slows every group she joins.
    pub fn non_superadditive() -> CooperativeGame {
        abc([20.0, 27.0, 35.0, 10.0, 17.0, 74.0, 70.0])
    }

    /// Bill and Charlie alone.
    pub fn two_player() -> CooperativeGame {
        CooperativeGame::new(
            vec!["B".to_string(), "C".to_string()],
            vec![0.0, 27.0, 35.0, 74.0],
        )
        .expect("static demo game is valid")
    }

    pub fn by_name(name: &str) -> Option<CooperativeGame> {
        match name {
            "report-writing" => Some(report_writing()),
            "non-superadditive" => Some(non_superadditive()),
            "two-player" => Some(two_player()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 3] = ["report-writing", "non-superadditive", "two-player"];
}
