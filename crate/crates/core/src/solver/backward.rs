//! Exact decision for down-left instances without the ruined-square test.
//!
//! Breadth-first from the won configuration through inverse pushes. A node
//! fixes every position and either fixes each facing or leaves it open, so
//! the preimage of a node under one push is again a node and nothing is lost.
//! Squares only move left or down, so no node needs a square above or right
//! of its start. The instance is winnable iff some node covers the initial
//! configuration; the pushers read back along the parent links form the
//! trace, in play order.

use std::time::Instant;

use super::{SearchBudget, SearchStats, SolverError, StateStore, Verdict};
use crate::engine::{Direction, Game, Position, PushTrace};

const LEFT: u8 = 0;
const DOWN: u8 = 1;
const EITHER: u8 = 2;

const NO_ARROW: u8 = u8::MAX;
const EMPTY: u16 = u16::MAX;

fn facing(dir: Direction) -> u8 {
    match dir {
        Direction::L => LEFT,
        Direction::D => DOWN,
        other => unreachable!("{other} in a down-left instance"),
    }
}

/// The cells a square may occupy, from its goal up to its start, and which
/// facings it can have at each one. At its start a square still has its
/// initial facing. Elsewhere it faces the last arrow it landed on, which lies
/// between its start and the cell, or its initial facing if it never landed
/// on one.
struct Cells {
    lo: Position,
    hi: Position,
    width: i32,
    allowed: Vec<u8>,
}

impl Cells {
    fn new(game: &Game, goal: Position, start: Position, dir: Direction) -> Self {
        let (lo, hi) = (goal, start);
        let width = hi.x - lo.x + 1;
        let height = hi.y - lo.y + 1;
        let at = |x: i32, y: i32| ((y - lo.y) * width + (x - lo.x)) as usize;
        let bit = |d: Direction| 1u8 << facing(d);

        // arrows on or above-right of each cell, start excluded, swept from
        // the start corner
        let mut seen = vec![0u8; (width * height) as usize];
        for y in (lo.y..=hi.y).rev() {
            for x in (lo.x..=hi.x).rev() {
                let cell = Position::new(x, y);
                let mut m = match game.arrow_at(cell) {
                    Some(a) if cell != hi => bit(a),
                    _ => 0,
                };
                if x < hi.x {
                    m |= seen[at(x + 1, y)];
                }
                if y < hi.y {
                    m |= seen[at(x, y + 1)];
                }
                seen[at(x, y)] = m;
            }
        }
        let mut allowed = vec![0u8; seen.len()];
        for y in lo.y..=hi.y {
            for x in lo.x..=hi.x {
                let cell = Position::new(x, y);
                allowed[at(x, y)] = match game.arrow_at(cell) {
                    _ if cell == hi => bit(dir),
                    Some(a) => bit(a),
                    None => bit(dir) | seen[at(x, y)],
                };
            }
        }
        Cells { lo, hi, width, allowed }
    }

    fn contains(&self, p: Position) -> bool {
        self.lo.x <= p.x && p.x <= self.hi.x && self.lo.y <= p.y && p.y <= self.hi.y
    }

    fn index(&self, p: Position) -> usize {
        ((p.y - self.lo.y) * self.width + (p.x - self.lo.x)) as usize
    }

    fn position(&self, index: usize) -> Position {
        let i = index as i32;
        Position::new(self.lo.x + i % self.width, self.lo.y + i / self.width)
    }

    /// Intersects a facing with what the square can have at `p`.
    fn narrow(&self, p: Position, f: u8) -> Option<u8> {
        let allowed = self.allowed[self.index(p)];
        let wanted = if f == EITHER { allowed } else { allowed & (1 << f) };
        match wanted.count_ones() {
            0 => None,
            1 => Some(wanted.trailing_zeros() as u8),
            _ => Some(EITHER),
        }
    }

    fn encode(&self, p: Position, f: u8) -> u16 {
        (self.index(p) * 3 + f as usize) as u16
    }

    fn decode(&self, code: u16) -> (Position, u8) {
        (self.position(code as usize / 3), (code % 3) as u8)
    }
}

/// A dense window over every cell any square may occupy.
struct Board {
    lo: Position,
    hi: Position,
    width: i32,
    arrows: Vec<u8>,
    occupant: Vec<u16>,
}

impl Board {
    fn index(&self, p: Position) -> usize {
        ((p.y - self.lo.y) * self.width + (p.x - self.lo.x)) as usize
    }

    fn arrow(&self, p: Position) -> Option<u8> {
        let a = self.arrows[self.index(p)];
        (a != NO_ARROW).then_some(a)
    }

    fn occupant(&self, p: Position) -> Option<usize> {
        if p.x < self.lo.x || p.y < self.lo.y || p.x > self.hi.x || p.y > self.hi.y {
            return None;
        }
        let o = self.occupant[self.index(p)];
        (o != EMPTY).then_some(o as usize)
    }
}

/// Two squares per word, each as its cell-and-facing code.
fn pack(cells: &[Cells], nodes: &[(Position, u8)], buf: &mut Vec<u32>) {
    buf.clear();
    for (k, pair) in nodes.chunks(2).enumerate() {
        let lo = cells[2 * k].encode(pair[0].0, pair[0].1) as u32;
        let hi = pair.get(1).map_or(0, |&(p, f)| cells[2 * k + 1].encode(p, f) as u32);
        buf.push(lo | hi << 16);
    }
}

fn unpack(cells: &[Cells], words: &[u32], out: &mut Vec<(Position, u8)>) {
    out.clear();
    for (i, c) in cells.iter().enumerate() {
        let w = words[i / 2];
        out.push(c.decode(if i % 2 == 0 { w as u16 } else { (w >> 16) as u16 }));
    }
}

pub(super) fn search(
    game: &Game,
    order: &[usize],
    budget: &SearchBudget,
    started: Instant,
    mut stats: SearchStats,
) -> Result<(Verdict, SearchStats), SolverError> {
    let specs = &game.instance().squares;
    let n = specs.len();
    let done = |verdict: Verdict, mut stats: SearchStats, states: usize| {
        stats.states = states;
        (verdict, stats)
    };

    if specs.iter().any(|s| s.goal.x > s.start.x || s.goal.y > s.start.y) {
        return Ok(done(Verdict::NotWinnable, stats, 0));
    }
    let cells: Vec<Cells> = specs.iter().map(|s| Cells::new(game, s.goal, s.start, s.dir)).collect();
    if cells.iter().any(|c| c.allowed.len() * 3 > usize::from(u16::MAX)) {
        return Ok(done(Verdict::Unknown("feasible boxes too large for the backward search".into()), stats, 0));
    }

    let lo = Position::new(
        specs.iter().map(|s| s.goal.x).min().unwrap_or(0),
        specs.iter().map(|s| s.goal.y).min().unwrap_or(0),
    );
    let hi = Position::new(
        specs.iter().map(|s| s.start.x).max().unwrap_or(0),
        specs.iter().map(|s| s.start.y).max().unwrap_or(0),
    );
    let width = hi.x - lo.x + 1;
    let area = (width * (hi.y - lo.y + 1)).max(0) as usize;
    let mut board = Board { lo, hi, width, arrows: vec![NO_ARROW; area], occupant: vec![EMPTY; area] };
    for a in &game.instance().arrows {
        if lo.x <= a.pos.x && a.pos.x <= hi.x && lo.y <= a.pos.y && a.pos.y <= hi.y {
            let i = board.index(a.pos);
            board.arrows[i] = facing(a.dir);
        }
    }

    let mut nodes: Vec<(Position, u8)> = Vec::with_capacity(n);
    for (c, s) in cells.iter().zip(specs) {
        nodes.push((s.goal, c.narrow(s.goal, EITHER).expect("every cell allows some facing")));
    }
    let covers = |nodes: &[(Position, u8)]| {
        nodes.iter().zip(specs).all(|(&(p, f), s)| p == s.start && (f == EITHER || f == facing(s.dir)))
    };
    if covers(&nodes) {
        return Ok(done(Verdict::Winnable(PushTrace::default()), stats, 1));
    }

    let mut store = StateStore::new(n.div_ceil(2));
    let mut buf = Vec::with_capacity(n.div_ceil(2));
    pack(&cells, &nodes, &mut buf);
    store.insert(&buf, 0, 0, 0);

    let mut truncated: Option<String> = None;
    let mut cur: Vec<(Position, u8)> = Vec::with_capacity(n);
    let mut pred: Vec<(Position, u8)> = Vec::with_capacity(n);
    let mut cursor = 0usize;

    while cursor < store.len() {
        let idx = cursor as u32;
        cursor += 1;
        stats.expanded += 1;
        if stats.expanded.is_multiple_of(4096) && started.elapsed() > budget.time_limit {
            let reason = format!("time budget of {:?} exhausted", budget.time_limit);
            return Ok(done(Verdict::Unknown(reason), stats, store.len()));
        }
        unpack(&cells, store.key(idx), &mut cur);
        for (i, &(p, _)) in cur.iter().enumerate() {
            let at = board.index(p);
            board.occupant[at] = i as u16;
        }
        let depth = store.depth[idx as usize] as usize;

        for &q in order {
            for dir in [Direction::L, Direction::D] {
                let (dx, dy) = dir.delta();
                let back = |p: Position| Position::new(p.x - dx, p.y - dy);
                let (qpos, qf) = cur[q];
                if !cells[q].contains(back(qpos)) {
                    stats.pruned += 1;
                    continue;
                }
                if board.occupant(back(qpos)).is_some() {
                    continue;
                }
                // after the push the pusher faces the arrow it landed on, or
                // still faces the way it moved
                let after = board.arrow(qpos).unwrap_or(facing(dir));
                if qf != EITHER && qf != after {
                    continue;
                }

                pred.clear();
                pred.extend_from_slice(&cur);
                let mut member = Some(q);
                let mut k = 0usize;
                while let Some(i) = member {
                    let (pos, f) = cur[i];
                    let arrow = board.arrow(pos);
                    if k > 0 && arrow.is_some_and(|a| f != EITHER && f != a) {
                        break;
                    }
                    let from = back(pos);
                    if !cells[i].contains(from) {
                        stats.pruned += 1;
                        break;
                    }
                    let before = match (k, arrow) {
                        (0, _) => facing(dir),
                        (_, Some(_)) => EITHER,
                        (_, None) => f,
                    };
                    let Some(before) = cells[i].narrow(from, before) else {
                        stats.pruned += 1;
                        break;
                    };
                    pred[i] = (from, before);
                    k += 1;

                    if depth + 1 > budget.max_depth {
                        truncated.get_or_insert_with(|| format!("depth budget of {} reached", budget.max_depth));
                        break;
                    }
                    pack(&cells, &pred, &mut buf);
                    if let Some(next) = store.insert(&buf, idx, q as u16, depth as u32 + 1) {
                        stats.max_depth = stats.max_depth.max(depth + 1);
                        if covers(&pred) {
                            let trace = trace_to(game, &store, next);
                            if !game.is_won(&game.replay(&trace)?) {
                                return Err(SolverError::UnsoundTrace);
                            }
                            return Ok(done(Verdict::Winnable(trace), stats, store.len()));
                        }
                        if store.len() >= budget.max_states {
                            let reason = format!("state budget of {} exhausted", budget.max_states);
                            return Ok(done(Verdict::Unknown(reason), stats, store.len()));
                        }
                    }
                    member = board.occupant(pos + dir);
                }
            }
        }
        for &(p, _) in &cur {
            let at = board.index(p);
            board.occupant[at] = EMPTY;
        }
    }

    let verdict = match truncated {
        None => Verdict::NotWinnable,
        Some(reason) => Verdict::Unknown(reason),
    };
    Ok(done(verdict, stats, store.len()))
}

fn trace_to(game: &Game, store: &StateStore, mut idx: u32) -> PushTrace {
    let mut moves = Vec::new();
    while idx != 0 {
        moves.push(game.id_of(store.via[idx as usize] as usize).clone());
        idx = store.parent[idx as usize];
    }
    PushTrace::new(moves)
}
