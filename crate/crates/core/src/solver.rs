//! Winnability search, the brute-force SAT oracle and the harness that
//! checks `solve(reduce(F))` against `brute_force_sat(F)`.
//!
//! Down-left instances only ever move squares left or down, so
//! Φ = Σ (x + y) drops by the chain length on every push. Together with the
//! ruined-square prune this bounds every path, which makes the search exact:
//! it answers `Winnable` or `NotWinnable`. Without the prune the same question
//! is answered by searching backward from the won configuration. General
//! instances get a budgeted search that can only answer `Winnable` or
//! `Unknown`.

use std::fmt;
use std::hash::BuildHasher;
use std::time::{Duration, Instant};

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula};
use crate::engine::{Direction, EngineError, Game, GameInstance, Position, PushTrace, SquareState};
use crate::model;
use crate::reduction::{self, ReductionError};

mod backward;

pub const DEFAULT_SAT_GUARD: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Winnable(PushTrace),
    NotWinnable,
    /// Budget exhausted, or a general instance whose search ended without a
    /// win. Carries a human-readable reason.
    Unknown(String),
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Winnable(_) => VerdictKind::Winnable,
            Verdict::NotWinnable => VerdictKind::NotWinnable,
            Verdict::Unknown(_) => VerdictKind::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    Winnable,
    NotWinnable,
    Unknown,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Winnable => "winnable",
            VerdictKind::NotWinnable => "not winnable",
            VerdictKind::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_states: usize,
    pub max_depth: usize,
    pub time_limit: Duration,
}

impl SearchBudget {
    pub fn new(max_states: usize, max_depth: usize, time_limit: Duration) -> Result<Self, SolverError> {
        if max_states == 0 || max_depth == 0 || time_limit.is_zero() {
            return Err(SolverError::Budget(format!(
                "all budget limits must be positive (states={max_states}, depth={max_depth}, time={time_limit:?})"
            )));
        }
        Ok(SearchBudget { max_states, max_depth, time_limit })
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_states: 20_000_000, max_depth: 100_000, time_limit: Duration::from_secs(600) }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Frontier {
    /// Shortest witness first.
    #[default]
    BreadthFirst,
    DepthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub budget: SearchBudget,
    /// Discard states holding a ruined square (down-left only). With pruning
    /// off a down-left instance is decided by the backward search instead;
    /// general instances only lose the halo check, which they never had.
    pub prune: bool,
    pub frontier: Frontier,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: SearchBudget::default(), prune: true, frontier: Frontier::BreadthFirst }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Distinct states stored, including the initial one.
    pub states: usize,
    pub expanded: usize,
    pub pruned: usize,
    pub max_depth: usize,
    /// Φ(initial) − Σ goals for down-left instances.
    pub depth_bound: Option<i64>,
    /// Pushes on a down-left instance that did not lower Φ by exactly the
    /// chain length. Always zero unless the engine is broken.
    pub potential_violations: usize,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub stats: SearchStats,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("budget misconfigured: {0}")]
    Budget(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{num_vars} variables exceeds the brute-force guard of {guard}; raise it with --sat-guard")]
    TooManyVariables { num_vars: usize, guard: usize },
    #[error("solver returned a trace that does not replay to a win")]
    UnsoundTrace,
}

/// Packs a square into one word: 15 bits per coordinate around the origin
/// plus two direction bits.
const COORD_BIAS: i32 = 1 << 14;

fn pack(sq: &SquareState) -> Option<u32> {
    let x = sq.pos.x.checked_add(COORD_BIAS)?;
    let y = sq.pos.y.checked_add(COORD_BIAS)?;
    if !(0..1 << 15).contains(&x) || !(0..1 << 15).contains(&y) {
        return None;
    }
    Some(((x as u32) << 17) | ((y as u32) << 2) | sq.dir.code())
}

fn unpack(w: u32) -> SquareState {
    let x = (w >> 17) as i32 - COORD_BIAS;
    let y = ((w >> 2) & 0x7fff) as i32 - COORD_BIAS;
    let pos = Position::new(x, y);
    let dir = match w & 3 {
        0 => Direction::L,
        1 => Direction::R,
        2 => Direction::D,
        _ => Direction::U,
    };
    SquareState { pos, dir }
}

/// Every visited state, stored flat; a state is the packed squares in
/// instance order. Index 0 is the initial state.
struct StateStore {
    width: usize,
    words: Vec<u32>,
    parent: Vec<u32>,
    via: Vec<u16>,
    depth: Vec<u32>,
    table: HashTable<u32>,
    hasher: FxBuildHasher,
}

impl StateStore {
    fn new(width: usize) -> Self {
        StateStore {
            width,
            words: Vec::new(),
            parent: Vec::new(),
            via: Vec::new(),
            depth: Vec::new(),
            table: HashTable::new(),
            hasher: FxBuildHasher,
        }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn key(&self, idx: u32) -> &[u32] {
        let start = idx as usize * self.width;
        &self.words[start..start + self.width]
    }

    fn hash(hasher: &FxBuildHasher, key: &[u32]) -> u64 {
        hasher.hash_one(key)
    }

    /// Inserts unless present; returns the new index.
    fn insert(&mut self, key: &[u32], parent: u32, via: u16, depth: u32) -> Option<u32> {
        let hash = Self::hash(&self.hasher, key);
        let (words, width) = (&self.words, self.width);
        let eq = |&i: &u32| &words[i as usize * width..(i as usize + 1) * width] == key;
        if self.table.find(hash, eq).is_some() {
            return None;
        }
        let idx = self.parent.len() as u32;
        self.words.extend_from_slice(key);
        self.parent.push(parent);
        self.via.push(via);
        self.depth.push(depth);
        let (words, hasher) = (&self.words, &self.hasher);
        self.table.insert_unique(hash, idx, |&i| {
            Self::hash(hasher, &words[i as usize * width..(i as usize + 1) * width])
        });
        Some(idx)
    }

    fn decode_into(&self, idx: u32, out: &mut Vec<SquareState>) {
        out.clear();
        out.extend(self.key(idx).iter().map(|&w| unpack(w)));
    }

    fn moves_to(&self, mut idx: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while idx != 0 {
            out.push(self.via[idx as usize] as usize);
            idx = self.parent[idx as usize];
        }
        out.reverse();
        out
    }
}

fn encode(squares: &[SquareState], buf: &mut Vec<u32>) -> bool {
    buf.clear();
    for sq in squares {
        match pack(sq) {
            Some(w) => buf.push(w),
            None => return false,
        }
    }
    true
}

/// Which states are kept out of the search.
struct Pruner {
    down_left: bool,
    prune: bool,
    /// Lowest column/row anything may occupy, for down-left instances.
    halo: Position,
}

impl Pruner {
    fn new(instance: &GameInstance, prune: bool) -> Self {
        let n = instance.squares.len() as i32;
        let min_x = instance.squares.iter().map(|s| s.goal.x).min().unwrap_or(0);
        let min_y = instance.squares.iter().map(|s| s.goal.y).min().unwrap_or(0);
        Pruner { down_left: model::is_down_left(instance), prune, halo: Position::new(min_x - n, min_y - n) }
    }

    fn rejects(&self, instance: &GameInstance, squares: &[SquareState], moved: &[usize]) -> bool {
        if !self.down_left {
            return false;
        }
        moved.iter().any(|&i| {
            let cur = &squares[i];
            if cur.pos.x < self.halo.x || cur.pos.y < self.halo.y {
                return true;
            }
            self.prune && model::is_ruined(&instance.squares[i], cur)
        })
    }
}

pub fn solve(instance: &GameInstance, options: &SolveOptions) -> Result<SolveReport, SolverError> {
    run(instance, options, false)
}

/// `halo_only` keeps an unpruned down-left search forward, bounded by the
/// halo alone. Only feasible for tiny instances.
fn run(instance: &GameInstance, options: &SolveOptions, halo_only: bool) -> Result<SolveReport, SolverError> {
    let budget = SearchBudget::new(options.budget.max_states, options.budget.max_depth, options.budget.time_limit)?;
    let started = Instant::now();
    let game = Game::new(instance.clone())?;
    let pruner = Pruner::new(instance, options.prune);
    let down_left = pruner.down_left;

    let mut order: Vec<usize> = (0..game.square_count()).collect();
    order.sort_by(|&a, &b| game.id_of(a).cmp(game.id_of(b)));

    let mut stats = SearchStats {
        depth_bound: down_left.then(|| game.initial_state().potential() - instance.goal_potential()),
        ..SearchStats::default()
    };

    let initial = game.initial_state();
    let finish = |verdict: Verdict, mut stats: SearchStats, store_len: usize| {
        stats.states = store_len;
        stats.elapsed_ms = started.elapsed().as_millis();
        SolveReport { verdict, stats }
    };

    if game.is_won(&initial) {
        return Ok(finish(Verdict::Winnable(PushTrace::default()), stats, 1));
    }
    let all: Vec<usize> = (0..game.square_count()).collect();
    if pruner.rejects(instance, &initial.squares, &all) {
        return Ok(finish(Verdict::NotWinnable, stats, 1));
    }

    if down_left && !options.prune && !halo_only {
        let (verdict, stats) = backward::search(&game, &order, &budget, started, stats)?;
        return Ok(finish(verdict, stats.clone(), stats.states));
    }

    let mut store = StateStore::new(game.square_count());
    let mut buf = Vec::with_capacity(game.square_count());
    if !encode(&initial.squares, &mut buf) {
        return Ok(finish(Verdict::Unknown("coordinates exceed the packed state range".into()), stats, 0));
    }
    store.insert(&buf, 0, 0, 0);

    let mut truncated: Option<String> = None;
    let mut cursor = 0usize;
    let mut stack: Vec<u32> = vec![0];
    let mut parent = Vec::with_capacity(game.square_count());
    let mut child = Vec::with_capacity(game.square_count());
    let mut chain = Vec::new();
    let mut children = Vec::new();

    loop {
        let next = match options.frontier {
            Frontier::BreadthFirst => {
                if cursor >= store.len() {
                    None
                } else {
                    cursor += 1;
                    Some((cursor - 1) as u32)
                }
            }
            Frontier::DepthFirst => stack.pop(),
        };
        let Some(idx) = next else { break };

        stats.expanded += 1;
        if stats.expanded.is_multiple_of(4096) && started.elapsed() > budget.time_limit {
            let reason = format!("time budget of {:?} exhausted", budget.time_limit);
            return Ok(finish(Verdict::Unknown(reason), stats, store.len()));
        }

        store.decode_into(idx, &mut parent);
        let depth = store.depth[idx as usize] as usize;
        let phi = potential(&parent);

        for &sq in &order {
            game.push_into(&parent, sq, &mut child, &mut chain);
            if down_left && potential(&child) != phi - chain.len() as i64 {
                stats.potential_violations += 1;
            }
            if pruner.rejects(instance, &child, &chain) {
                stats.pruned += 1;
                continue;
            }
            if depth + 1 > budget.max_depth {
                truncated.get_or_insert_with(|| format!("depth budget of {} reached", budget.max_depth));
                continue;
            }
            if !encode(&child, &mut buf) {
                truncated.get_or_insert_with(|| "coordinates exceed the packed state range".into());
                continue;
            }
            let Some(next) = store.insert(&buf, idx, sq as u16, depth as u32 + 1) else { continue };
            stats.max_depth = stats.max_depth.max(depth + 1);

            if game.all_on_goal(&child) {
                let trace = PushTrace::new(store.moves_to(next).into_iter().map(|i| game.id_of(i).clone()).collect());
                if !game.is_won(&game.replay(&trace)?) {
                    return Err(SolverError::UnsoundTrace);
                }
                return Ok(finish(Verdict::Winnable(trace), stats, store.len()));
            }
            if store.len() >= budget.max_states {
                let reason = format!("state budget of {} exhausted", budget.max_states);
                return Ok(finish(Verdict::Unknown(reason), stats, store.len()));
            }
            children.push(next);
        }
        if options.frontier == Frontier::DepthFirst {
            // visit the lexicographically first id first
            stack.extend(children.drain(..).rev());
        }
        children.clear();
    }

    let verdict = match (down_left, truncated) {
        (true, None) => Verdict::NotWinnable,
        (true, Some(reason)) => Verdict::Unknown(reason),
        (false, reason) => Verdict::Unknown(
            reason.unwrap_or_else(|| "search ended without a win; no verdict is claimed for general instances".into()),
        ),
    };
    Ok(finish(verdict, stats, store.len()))
}

fn potential(squares: &[SquareState]) -> i64 {
    squares.iter().map(|s| i64::from(s.pos.x) + i64::from(s.pos.y)).sum()
}

/// True iff replaying the trace from the initial state ends won.
pub fn verify_trace(instance: &GameInstance, trace: &PushTrace) -> Result<bool, EngineError> {
    let game = Game::new(instance.clone())?;
    let end = game.replay(trace)?;
    Ok(game.is_won(&end))
}

/// First satisfying assignment in lexicographic order (x1 most significant,
/// false before true), or `None` when unsatisfiable.
pub fn brute_force_sat(formula: &CnfFormula, guard: usize) -> Result<Option<Assignment>, SolverError> {
    let n = formula.num_vars;
    if n > guard || n > 63 {
        return Err(SolverError::TooManyVariables { num_vars: n, guard });
    }
    let mut values = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = mask >> (n - 1 - i) & 1 == 1;
        }
        let a = Assignment(values.clone());
        if formula.is_satisfied_by(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceRow {
    pub formula: String,
    pub satisfiable: bool,
    pub verdict: VerdictKind,
    pub unpruned: Option<VerdictKind>,
    pub agrees: bool,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
}

impl EquivalenceReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &EquivalenceRow> {
        self.rows.iter().filter(|r| !r.agrees)
    }

    pub fn all_agree(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

#[derive(Debug, Error)]
pub enum EquivalenceError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Reduces, solves and brute-forces every formula. With `compare_unpruned`
/// the search is repeated with pruning disabled and must give the same
/// verdict.
pub fn equivalence_check(
    family: &[CnfFormula],
    options: &SolveOptions,
    compare_unpruned: bool,
) -> Result<EquivalenceReport, EquivalenceError> {
    let mut report = EquivalenceReport::default();
    for formula in family {
        let instance = reduction::reduce(formula)?;
        let sat = brute_force_sat(formula, DEFAULT_SAT_GUARD)?.is_some();
        let solved = solve(&instance, &SolveOptions { prune: true, ..*options })?;
        let unpruned = if compare_unpruned {
            Some(solve(&instance, &SolveOptions { prune: false, ..*options })?.verdict.kind())
        } else {
            None
        };
        let verdict = solved.verdict.kind();
        let expected = if sat { VerdictKind::Winnable } else { VerdictKind::NotWinnable };
        let agrees = verdict == expected && unpruned.is_none_or(|u| u == verdict);
        report.rows.push(EquivalenceRow {
            formula: formula.to_string(),
            satisfiable: sat,
            verdict,
            unpruned,
            agrees,
            stats: solved.stats,
        });
    }
    Ok(report)
}
