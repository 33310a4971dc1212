//! Rules of the game: squares are pushed one cell along their own direction,
//! shove any contiguous chain in front of them, and take over the direction of
//! an arrow when they land on one.
//!
//! The lattice is unbounded and `y` grows upward, so `D` is `(0, -1)`.

use std::fmt;
use std::ops::Add;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    L,
    R,
    D,
    U,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::L, Direction::R, Direction::D, Direction::U];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::L => (-1, 0),
            Direction::R => (1, 0),
            Direction::D => (0, -1),
            Direction::U => (0, 1),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::L => Direction::R,
            Direction::R => Direction::L,
            Direction::D => Direction::U,
            Direction::U => Direction::D,
        }
    }

    /// Left and down are the only directions of the restricted game.
    pub fn is_down_left(self) -> bool {
        matches!(self, Direction::L | Direction::D)
    }

    pub fn arrow_glyph(self) -> char {
        match self {
            Direction::L => '<',
            Direction::R => '>',
            Direction::D => 'v',
            Direction::U => '^',
        }
    }

    pub(crate) fn code(self) -> u32 {
        self as u32
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::L => "L",
            Direction::R => "R",
            Direction::D => "D",
            Direction::U => "U",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Position { x, y }
    }

    pub fn step(self, dir: Direction) -> Position {
        self + dir
    }
}

impl Add<Direction> for Position {
    type Output = Position;

    fn add(self, dir: Direction) -> Position {
        let (dx, dy) = dir.delta();
        Position::new(self.x + dx, self.y + dy)
    }
}

impl From<[i32; 2]> for Position {
    fn from([x, y]: [i32; 2]) -> Self {
        Position { x, y }
    }
}

impl From<Position> for [i32; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SquareId(pub String);

impl SquareId {
    pub fn new(id: impl Into<String>) -> Self {
        SquareId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SquareId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SquareId {
    fn from(s: &str) -> Self {
        SquareId(s.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareSpec {
    pub id: SquareId,
    pub start: Position,
    pub dir: Direction,
    pub goal: Position,
}

impl SquareSpec {
    pub fn new(id: impl Into<String>, start: Position, dir: Direction, goal: Position) -> Self {
        SquareSpec { id: SquareId::new(id), start, dir, goal }
    }

    /// Blockers start on their own goal; the tag is derived, never stored.
    pub fn is_blocker(&self) -> bool {
        self.start == self.goal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowSpec {
    pub pos: Position,
    pub dir: Direction,
}

impl ArrowSpec {
    pub fn new(pos: Position, dir: Direction) -> Self {
        ArrowSpec { pos, dir }
    }
}

/// Immutable description of a level. Serialized form is the canonical
/// instance file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameInstance {
    pub squares: Vec<SquareSpec>,
    pub arrows: Vec<ArrowSpec>,
}

impl GameInstance {
    pub fn new(squares: Vec<SquareSpec>, arrows: Vec<ArrowSpec>) -> Self {
        GameInstance { squares, arrows }
    }

    /// Sum of `x + y` over all goals: the potential of a won state.
    pub fn goal_potential(&self) -> i64 {
        self.squares.iter().map(|s| i64::from(s.goal.x) + i64::from(s.goal.y)).sum()
    }
}

/// The winning-sequence representation: one square id per round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PushTrace {
    pub moves: Vec<SquareId>,
}

impl PushTrace {
    pub fn new(moves: Vec<SquareId>) -> Self {
        PushTrace { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for PushTrace {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        PushTrace { moves: iter.into_iter().map(|s| SquareId(s.into())).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SquareState {
    pub pos: Position,
    pub dir: Direction,
}

/// Snapshot of play. `squares` is indexed like `GameInstance::squares`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    pub squares: Vec<SquareState>,
    pub pushes: u64,
}

impl GameState {
    /// Φ = Σ (x + y) over current positions.
    pub fn potential(&self) -> i64 {
        self.squares.iter().map(|s| i64::from(s.pos.x) + i64::from(s.pos.y)).sum()
    }

    pub fn occupant(&self, pos: Position) -> Option<usize> {
        self.squares.iter().position(|s| s.pos == pos)
    }
}

/// Result of a single push, with the indices of the squares that moved in
/// chain order (the pushed square first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushOutcome {
    pub state: GameState,
    pub chain: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("unknown square id `{0}`")]
    UnknownSquare(SquareId),
    #[error("round {round}: {source}")]
    Replay {
        round: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error("viewport is degenerate: {0} .. {1}")]
    DegenerateViewport(Position, Position),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Inclusive lattice rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Viewport {
    pub min: Position,
    pub max: Position,
}

impl Viewport {
    pub fn new(min: Position, max: Position) -> Self {
        Viewport { min, max }
    }

    /// Smallest rectangle containing every start, goal and arrow, grown by
    /// `margin` cells on each side. An empty instance yields the single cell
    /// at the origin.
    pub fn fit(instance: &GameInstance, margin: i32) -> Self {
        match model::bounding_box(instance) {
            Some((min, max)) => Viewport::new(
                Position::new(min.x - margin, min.y - margin),
                Position::new(max.x + margin, max.y + margin),
            ),
            None => Viewport::new(Position::new(0, 0), Position::new(0, 0)),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }
}

/// A validated instance with lookup tables for play.
#[derive(Clone, Debug)]
pub struct Game {
    instance: GameInstance,
    arrows: FxHashMap<Position, Direction>,
    index: FxHashMap<SquareId, usize>,
}

impl Game {
    pub fn new(instance: GameInstance) -> Result<Self, EngineError> {
        let violations = model::validate(&instance);
        if !violations.is_empty() {
            return Err(EngineError::InvalidInstance(violations));
        }
        let arrows = instance.arrows.iter().map(|a| (a.pos, a.dir)).collect();
        let index = instance.squares.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        Ok(Game { instance, arrows, index })
    }

    pub fn instance(&self) -> &GameInstance {
        &self.instance
    }

    pub fn square_count(&self) -> usize {
        self.instance.squares.len()
    }

    pub fn index_of(&self, id: &SquareId) -> Result<usize, EngineError> {
        self.index.get(id).copied().ok_or_else(|| EngineError::UnknownSquare(id.clone()))
    }

    pub fn id_of(&self, idx: usize) -> &SquareId {
        &self.instance.squares[idx].id
    }

    pub fn arrow_at(&self, pos: Position) -> Option<Direction> {
        self.arrows.get(&pos).copied()
    }

    /// Every square at its start facing its initial direction. A square that
    /// starts on an arrow keeps its own direction until it lands somewhere.
    pub fn initial_state(&self) -> GameState {
        GameState {
            squares: self
                .instance
                .squares
                .iter()
                .map(|s| SquareState { pos: s.start, dir: s.dir })
                .collect(),
            pushes: 0,
        }
    }

    pub fn push(&self, state: &GameState, id: &SquareId) -> Result<GameState, EngineError> {
        let idx = self.index_of(id)?;
        Ok(self.push_index(state, idx).state)
    }

    /// Pushes the square at `idx`. Never fails: moving a blocker is legal, it
    /// only forfeits the game.
    pub fn push_index(&self, state: &GameState, idx: usize) -> PushOutcome {
        let mut squares = Vec::with_capacity(state.squares.len());
        let mut chain = Vec::new();
        self.push_into(&state.squares, idx, &mut squares, &mut chain);
        PushOutcome { state: GameState { squares, pushes: state.pushes + 1 }, chain }
    }

    /// Allocation-free form of [`Game::push_index`]: writes the successor
    /// squares into `out` and the moved indices into `chain`.
    pub fn push_into(&self, squares: &[SquareState], idx: usize, out: &mut Vec<SquareState>, chain: &mut Vec<usize>) {
        let dir = squares[idx].dir;
        chain.clear();
        chain.push(idx);
        let mut cell = squares[idx].pos + dir;
        while let Some(next) = squares.iter().position(|s| s.pos == cell) {
            chain.push(next);
            cell = cell + dir;
        }

        out.clear();
        out.extend_from_slice(squares);
        for &i in chain.iter() {
            let sq = &mut out[i];
            sq.pos = sq.pos + dir;
            if let Some(arrow) = self.arrow_at(sq.pos) {
                sq.dir = arrow;
            }
        }
    }

    pub fn is_won(&self, state: &GameState) -> bool {
        self.all_on_goal(&state.squares)
    }

    pub fn all_on_goal(&self, squares: &[SquareState]) -> bool {
        squares.iter().zip(&self.instance.squares).all(|(cur, spec)| cur.pos == spec.goal)
    }

    pub fn replay(&self, trace: &PushTrace) -> Result<GameState, EngineError> {
        let mut state = self.initial_state();
        for (i, id) in trace.moves.iter().enumerate() {
            state = self
                .push(&state, id)
                .map_err(|e| EngineError::Replay { round: i + 1, source: Box::new(e) })?;
        }
        Ok(state)
    }

    /// Text board, top row first. Squares show the first letter of their id,
    /// uppercase when resting on their own goal and lowercase otherwise; then
    /// arrows (`< > v ^`); then unoccupied goals as the lowercase letter of
    /// their owner; `.` for empty cells.
    pub fn render(&self, state: &GameState, viewport: Viewport) -> Result<String, EngineError> {
        if viewport.is_degenerate() {
            return Err(EngineError::DegenerateViewport(viewport.min, viewport.max));
        }
        let mut cells: FxHashMap<Position, char> = FxHashMap::default();
        for spec in &self.instance.squares {
            cells.insert(spec.goal, id_letter(&spec.id).to_ascii_lowercase());
        }
        for arrow in &self.instance.arrows {
            cells.insert(arrow.pos, arrow.dir.arrow_glyph());
        }
        for (cur, spec) in state.squares.iter().zip(&self.instance.squares) {
            let letter = id_letter(&spec.id);
            let glyph = if cur.pos == spec.goal {
                letter.to_ascii_uppercase()
            } else {
                letter.to_ascii_lowercase()
            };
            cells.insert(cur.pos, glyph);
        }

        let rows: Vec<String> = (viewport.min.y..=viewport.max.y)
            .rev()
            .map(|y| {
                (viewport.min.x..=viewport.max.x)
                    .map(|x| cells.get(&Position::new(x, y)).copied().unwrap_or('.'))
                    .collect()
            })
            .collect();
        Ok(rows.join("\n"))
    }
}

fn id_letter(id: &SquareId) -> char {
    id.0.chars().next().unwrap_or('?')
}
