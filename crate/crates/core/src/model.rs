//! Instance validation, the down-left restriction, feasibility geometry and
//! empty-band compression.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::engine::{GameInstance, GameState, Position, SquareId, SquareSpec, SquareState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateSquareId(SquareId),
    DuplicateStart { pos: Position, first: SquareId, second: SquareId },
    DuplicateGoal { pos: Position, first: SquareId, second: SquareId },
    DuplicateArrow(Position),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateSquareId(id) => write!(f, "duplicate square id `{id}`"),
            Violation::DuplicateStart { pos, first, second } => {
                write!(f, "duplicate start position {pos} for squares `{first}` and `{second}`")
            }
            Violation::DuplicateGoal { pos, first, second } => write!(
                f,
                "duplicate goal position {pos} for squares `{first}` and `{second}` (no two squares may share a final position)"
            ),
            Violation::DuplicateArrow(pos) => write!(f, "duplicate arrow position {pos}"),
        }
    }
}

/// Checks every structural invariant of an instance. An empty result means
/// the instance is well formed.
pub fn validate(instance: &GameInstance) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut ids = BTreeSet::new();
    for s in &instance.squares {
        if !ids.insert(&s.id) {
            out.push(Violation::DuplicateSquareId(s.id.clone()));
        }
    }

    let mut starts: HashMap<Position, &SquareId> = HashMap::new();
    let mut goals: HashMap<Position, &SquareId> = HashMap::new();
    for s in &instance.squares {
        if let Some(first) = starts.insert(s.start, &s.id) {
            out.push(Violation::DuplicateStart { pos: s.start, first: first.clone(), second: s.id.clone() });
        }
        if let Some(first) = goals.insert(s.goal, &s.id) {
            out.push(Violation::DuplicateGoal { pos: s.goal, first: first.clone(), second: s.id.clone() });
        }
    }

    let mut arrows = BTreeSet::new();
    for a in &instance.arrows {
        if !arrows.insert(a.pos) {
            out.push(Violation::DuplicateArrow(a.pos));
        }
    }
    out
}

/// True iff every initial square direction and every arrow is `L` or `D`.
pub fn is_down_left(instance: &GameInstance) -> bool {
    instance.squares.iter().all(|s| s.dir.is_down_left())
        && instance.arrows.iter().all(|a| a.dir.is_down_left())
}

/// Inclusive bounding box over all starts, goals and arrows.
pub fn bounding_box(instance: &GameInstance) -> Option<(Position, Position)> {
    let points = instance
        .squares
        .iter()
        .flat_map(|s| [s.start, s.goal])
        .chain(instance.arrows.iter().map(|a| a.pos));
    points.fold(None, |acc, p| match acc {
        None => Some((p, p)),
        Some((lo, hi)) => Some((
            Position::new(lo.x.min(p.x), lo.y.min(p.y)),
            Position::new(hi.x.max(p.x), hi.y.max(p.y)),
        )),
    })
}

/// Cells a square of a down-left instance may still occupy on a winning
/// play: weakly above-right of its goal, weakly below-left of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeasibleBox {
    pub min: Position,
    pub max: Position,
}

impl FeasibleBox {
    pub fn of(square: &SquareSpec) -> Self {
        FeasibleBox { min: square.goal, max: square.start }
    }

    pub fn contains(&self, p: Position) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    /// A winnable down-left instance needs every goal weakly left-below its start.
    pub fn is_nonempty(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("ruined-square analysis requires a down-left instance")]
    NotDownLeft,
    #[error("state has {found} squares but the instance has {expected}")]
    StateMismatch { expected: usize, found: usize },
}

/// Squares that can no longer reach their goal in a down-left instance:
/// anything strictly left of or below its goal, and any blocker that has left
/// its cell.
pub fn ruined_squares(instance: &GameInstance, state: &GameState) -> Result<BTreeSet<SquareId>, ModelError> {
    if !is_down_left(instance) {
        return Err(ModelError::NotDownLeft);
    }
    if state.squares.len() != instance.squares.len() {
        return Err(ModelError::StateMismatch { expected: instance.squares.len(), found: state.squares.len() });
    }
    Ok(instance
        .squares
        .iter()
        .zip(&state.squares)
        .filter(|(spec, cur)| is_ruined(spec, cur))
        .map(|(spec, _)| spec.id.clone())
        .collect())
}

pub(crate) fn is_ruined(spec: &SquareSpec, cur: &SquareState) -> bool {
    let p = cur.pos;
    p.x < spec.goal.x || p.y < spec.goal.y || (spec.is_blocker() && p != spec.start)
}

/// Sorted coordinates of every column and row that holds a start, a goal or
/// an arrow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandIndex {
    pub xs: Vec<i32>,
    pub ys: Vec<i32>,
}

impl BandIndex {
    pub fn of(instance: &GameInstance) -> Self {
        let mut xs = BTreeSet::new();
        let mut ys = BTreeSet::new();
        let points = instance
            .squares
            .iter()
            .flat_map(|s| [s.start, s.goal])
            .chain(instance.arrows.iter().map(|a| a.pos));
        for p in points {
            xs.insert(p.x);
            ys.insert(p.y);
        }
        BandIndex { xs: xs.into_iter().collect(), ys: ys.into_iter().collect() }
    }
}

/// Builds the coordinate map that shrinks every run of empty lines between
/// occupied ones to at most `keep` lines. The lowest occupied coordinate is
/// a fixed point.
fn compress_axis(occupied: &[i32], keep: i64) -> HashMap<i32, i32> {
    let mut map = HashMap::with_capacity(occupied.len());
    let mut removed: i64 = 0;
    for (i, &c) in occupied.iter().enumerate() {
        if i > 0 {
            let gap = i64::from(c) - i64::from(occupied[i - 1]) - 1;
            removed += gap - gap.min(keep);
        }
        map.insert(c, (i64::from(c) - removed) as i32);
    }
    map
}

/// Deletes empty columns and rows so that no run of them is longer than the
/// number of squares. Columns/rows outside the occupied span are untouched.
pub fn normalize(instance: &GameInstance) -> GameInstance {
    let keep = instance.squares.len() as i64;
    let bands = BandIndex::of(instance);
    let mx = compress_axis(&bands.xs, keep);
    let my = compress_axis(&bands.ys, keep);
    let map = |p: Position| Position::new(mx[&p.x], my[&p.y]);

    let mut out = instance.clone();
    for s in &mut out.squares {
        s.start = map(s.start);
        s.goal = map(s.goal);
    }
    for a in &mut out.arrows {
        a.pos = map(a.pos);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ArrowSpec, Direction::*, Game};

    fn p(x: i32, y: i32) -> Position {
        Position::new(x, y)
    }

    fn gadget() -> GameInstance {
        GameInstance::new(
            vec![
                SquareSpec::new("p", p(4, 1), L, p(2, 1)),
                SquareSpec::new("x", p(3, 1), D, p(1, -4)),
                SquareSpec::new("b", p(2, 0), D, p(2, 0)),
            ],
            vec![ArrowSpec::new(p(3, -4), L)],
        )
    }

    #[test]
    fn variable_gadget_validates() {
        assert!(validate(&gadget()).is_empty());
        assert!(is_down_left(&gadget()));
    }

    #[test]
    fn duplicate_arrows_and_goals_are_reported() {
        let mut inst = gadget();
        inst.arrows.push(ArrowSpec::new(p(3, -4), D));
        inst.squares.push(SquareSpec::new("q", p(9, 9), L, p(2, 1)));
        let v = validate(&inst);
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|v| v.to_string().starts_with("duplicate arrow position")));
        assert!(v.iter().any(|v| matches!(v, Violation::DuplicateGoal { .. })));
        assert!(v.iter().any(|v| v.to_string().contains("final position")));
    }

    #[test]
    fn duplicate_ids_reported() {
        let inst = GameInstance::new(
            vec![SquareSpec::new("a", p(0, 0), L, p(0, 0)), SquareSpec::new("a", p(1, 0), L, p(1, 0))],
            vec![],
        );
        assert_eq!(validate(&inst), vec![Violation::DuplicateSquareId("a".into())]);
    }

    #[test]
    fn down_left_classification() {
        assert!(is_down_left(&GameInstance::default()));
        let mut inst = gadget();
        inst.arrows.push(ArrowSpec::new(p(7, 7), U));
        assert!(!is_down_left(&inst));
    }

    #[test]
    fn ruined_after_blocker_push() {
        let inst = GameInstance::new(
            vec![SquareSpec::new("b", p(0, 0), L, p(0, 0)), SquareSpec::new("a", p(3, 3), D, p(3, 0))],
            vec![],
        );
        let g = Game::new(inst.clone()).unwrap();
        let s0 = g.initial_state();
        assert!(ruined_squares(&inst, &s0).unwrap().is_empty());
        let s1 = g.push(&s0, &"b".into()).unwrap();
        assert_eq!(ruined_squares(&inst, &s1).unwrap(), BTreeSet::from(["b".into()]));
        let mut s = s1;
        for _ in 0..4 {
            s = g.push(&s, &"a".into()).unwrap();
        }
        assert_eq!(ruined_squares(&inst, &s).unwrap().len(), 2);
    }

    #[test]
    fn ruined_requires_down_left() {
        let inst = GameInstance::new(vec![SquareSpec::new("a", p(0, 0), U, p(0, 3))], vec![]);
        let g = Game::new(inst.clone()).unwrap();
        assert_eq!(ruined_squares(&inst, &g.initial_state()), Err(ModelError::NotDownLeft));
    }

    #[test]
    fn feasible_box() {
        let b = FeasibleBox::of(&SquareSpec::new("x", p(3, 1), D, p(1, -4)));
        assert!(b.is_nonempty());
        assert!(b.contains(p(1, -4)) && b.contains(p(3, 1)) && b.contains(p(2, 0)));
        assert!(!b.contains(p(0, 0)) && !b.contains(p(2, 2)));
    }

    #[test]
    fn normalize_without_gaps_is_identity() {
        assert_eq!(normalize(&gadget()), gadget());
    }

    #[test]
    fn normalize_compresses_long_gap() {
        let inst = GameInstance::new(vec![SquareSpec::new("a", p(101, 0), L, p(0, 0))], vec![]);
        let n = normalize(&inst);
        assert_eq!(n.squares[0].start, p(2, 0));
        assert_eq!(n.squares[0].goal, p(0, 0));
        assert_eq!(normalize(&n), n);
    }

    #[test]
    fn normalize_keeps_short_runs() {
        let inst = GameInstance::new(
            vec![SquareSpec::new("a", p(3, 10), L, p(0, 0)), SquareSpec::new("b", p(9, 0), D, p(9, -30))],
            vec![ArrowSpec::new(p(5, 0), D)],
        );
        let n = normalize(&inst);
        // xs 0,3,5,9 have gaps 2,1,3 with |S| = 2 -> 2,1,2
        assert_eq!(n.squares[1].start.x, 8);
        // ys -30,0,10 have gaps 29,9 -> 2,2
        assert_eq!(n.squares[1].goal.y, -30);
        assert_eq!(n.squares[1].start.y, -27);
        assert_eq!(n.squares[0].start.y, -24);
        assert_eq!(n.arrows[0].pos, p(5, -27));
    }
}
