#![allow(dead_code)]

use gas_core::cnf::{Clause, CnfFormula, Literal};
use std::collections::{HashMap, HashSet};

use gas_core::engine::{ArrowSpec, Direction, Game, GameInstance, GameState, Position, PushOutcome, SquareSpec};
use gas_core::solver::brute_force_sat;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn p(x: i32, y: i32) -> Position {
    Position::new(x, y)
}

fn distinct_cells(rng: &mut impl Rng, k: usize, w: i32, h: i32) -> Vec<Position> {
    let mut all: Vec<Position> = (0..w).flat_map(|x| (0..h).map(move |y| p(x, y))).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

fn pick(rng: &mut impl Rng, dirs: &[Direction]) -> Direction {
    *dirs.choose(rng).expect("non-empty")
}

/// A board with squares and arrows in all four directions, crowded enough
/// that chains and adoptions are common.
pub fn random_board(rng: &mut impl Rng) -> GameInstance {
    let (w, h) = (rng.gen_range(3..8), rng.gen_range(3..8));
    let n = rng.gen_range(1..=((w * h) as usize / 2).min(10));
    let starts = distinct_cells(rng, n, w, h);
    let goals = distinct_cells(rng, n, w + 2, h + 2);
    let squares = starts
        .into_iter()
        .zip(goals)
        .enumerate()
        .map(|(i, (s, g))| SquareSpec::new(format!("s{i:02}"), s, pick(rng, &Direction::ALL), g))
        .collect();
    let k = rng.gen_range(0..(w * h) as usize / 2);
    let arrows = distinct_cells(rng, k, w, h)
        .into_iter()
        .map(|pos| ArrowSpec::new(pos, pick(rng, &Direction::ALL)))
        .collect();
    GameInstance::new(squares, arrows)
}

/// A small down-left instance: every goal lies below-left of its start.
pub fn random_down_left(rng: &mut impl Rng, max_squares: usize, size: i32) -> GameInstance {
    let dl = [Direction::L, Direction::D];
    let n = rng.gen_range(1..=max_squares);
    let starts = distinct_cells(rng, n, size, size);
    let mut squares: Vec<SquareSpec> = Vec::new();
    for (i, s) in starts.into_iter().enumerate() {
        let goal = loop {
            let g = p(s.x - rng.gen_range(0..3), s.y - rng.gen_range(0..3));
            if squares.iter().all(|q| q.goal != g) {
                break g;
            }
        };
        squares.push(SquareSpec::new(format!("{}", (b'a' + i as u8) as char), s, pick(rng, &dl), goal));
    }
    let k = rng.gen_range(0..=(size as usize));
    let arrows = distinct_cells(rng, k, size, size)
        .into_iter()
        .map(|pos| ArrowSpec::new(pos, pick(rng, &dl)))
        .collect();
    GameInstance::new(squares, arrows)
}

/// Inserts empty columns and rows at random cut points. Coordinates at or
/// above a cut move up/right by the band width.
pub fn pad_with_bands(rng: &mut impl Rng, instance: &GameInstance) -> GameInstance {
    let mut out = instance.clone();
    let coords = |f: fn(Position) -> i32| -> Vec<i32> {
        let mut v: Vec<i32> = instance
            .squares
            .iter()
            .flat_map(|s| [f(s.start), f(s.goal)])
            .chain(instance.arrows.iter().map(|a| f(a.pos)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let cuts = |rng: &mut dyn rand::RngCore, cs: &[i32]| -> Vec<(i32, i32)> {
        (0..rng.gen_range(1..=3)).map(|_| (cs[rng.gen_range(0..cs.len())], rng.gen_range(1..12))).collect()
    };
    let xcuts = cuts(rng, &coords(|q| q.x));
    let ycuts = cuts(rng, &coords(|q| q.y));
    let shift = |q: Position| {
        let dx: i32 = xcuts.iter().filter(|&&(c, _)| q.x >= c).map(|&(_, w)| w).sum();
        let dy: i32 = ycuts.iter().filter(|&&(c, _)| q.y >= c).map(|&(_, w)| w).sum();
        p(q.x + dx, q.y + dy)
    };
    for s in &mut out.squares {
        s.start = shift(s.start);
        s.goal = shift(s.goal);
    }
    for a in &mut out.arrows {
        a.pos = shift(a.pos);
    }
    out
}

/// A random preprocessed formula; clause literals over distinct variables.
pub fn random_formula(rng: &mut impl Rng, n: usize, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=n.min(3));
            let mut vars: Vec<u32> = (1..=n as u32).collect();
            vars.shuffle(rng);
            Clause(
                vars[..len]
                    .iter()
                    .map(|&v| if rng.gen_bool(0.5) { Literal::pos(v) } else { Literal::neg(v) })
                    .collect(),
            )
        })
        .collect();
    CnfFormula::new(n, clauses)
}

pub fn random_satisfiable(rng: &mut impl Rng, max_n: usize, max_m: usize) -> CnfFormula {
    loop {
        let (n, m) = (rng.gen_range(1..=max_n), rng.gen_range(0..=max_m));
        let f = random_formula(rng, n, m);
        if brute_force_sat(&f, 30).expect("small").is_some() {
            return f;
        }
    }
}

pub fn sample_formula() -> CnfFormula {
    CnfFormula::from_clauses(4, &[&[1, 2], &[1, -3, 4], &[-1, -2, -4], &[2, -3, 4]])
}

/// Checks one push against the rules, recomputing the chain from scratch.
/// Returns the first violated property.
pub fn check_push(game: &Game, before: &GameState, idx: usize, out: &PushOutcome) -> Result<(), String> {
    let after = &out.state;
    let dir = before.squares[idx].dir;
    let at: HashMap<Position, usize> = before.squares.iter().enumerate().map(|(i, s)| (s.pos, i)).collect();
    let mut chain = vec![idx];
    let mut cell = before.squares[idx].pos + dir;
    while let Some(&i) = at.get(&cell) {
        chain.push(i);
        cell = cell + dir;
    }

    let cells: HashSet<Position> = after.squares.iter().map(|s| s.pos).collect();
    if cells.len() != after.squares.len() {
        return Err("occupancy: two squares share a cell".into());
    }
    if out.chain != chain {
        return Err(format!("chain: engine moved {:?}, rules say {:?}", out.chain, chain));
    }
    for (i, (b, a)) in before.squares.iter().zip(&after.squares).enumerate() {
        if chain.contains(&i) {
            if a.pos != b.pos + dir {
                return Err(format!("chain conservation: square {i} moved {} -> {}", b.pos, a.pos));
            }
            let want = game.arrow_at(a.pos).unwrap_or(b.dir);
            if a.dir != want {
                return Err(format!("adoption: square {i} at {} faces {}, expected {want}", a.pos, a.dir));
            }
        } else if a != b {
            return Err(format!("locality: square {i} outside the chain changed"));
        }
    }
    if after.pushes != before.pushes + 1 {
        return Err("push counter did not advance by one".into());
    }
    let again = game.push_index(before, idx);
    if &again != out {
        return Err("purity: equal inputs gave different outputs".into());
    }
    Ok(())
}
