//! Compiles a CNF formula into a down-left instance that is winnable exactly
//! when the formula is satisfiable, and turns a satisfying assignment into a
//! winning push sequence.
//!
//! Layout, for variable `i` in `1..=n` and clause `j` in `1..=m` (clause 1 is
//! the topmost):
//!
//! ```text
//! true column  x_t = 4i + 2        upper row y_n = 4(m - j) + 6
//! false column x_f = 4i + 4        lower row y_s = 4(m - j) + 4
//! top row      Y   = 4(m + 1)      x_l = x_t - 1, x_m = x_t + 1
//!                                  y_b = y_s - 1, y_m = y_s + 1
//! ```
//!
//! Clause squares start one column right of the last false column.

use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula, Literal};
use crate::engine::{ArrowSpec, Direction, Game, GameInstance, GameState, Position, PushTrace, SquareId, SquareSpec};
use crate::model;

/// Coordinates of every gadget line for an `n`-variable, `m`-clause formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutPlan {
    pub num_vars: usize,
    pub num_clauses: usize,
}

impl LayoutPlan {
    pub fn new(num_vars: usize, num_clauses: usize) -> Self {
        LayoutPlan { num_vars, num_clauses }
    }

    pub fn true_col(&self, var: usize) -> i32 {
        4 * var as i32 + 2
    }

    pub fn false_col(&self, var: usize) -> i32 {
        4 * var as i32 + 4
    }

    pub fn left_col(&self, var: usize) -> i32 {
        self.true_col(var) - 1
    }

    pub fn mid_col(&self, var: usize) -> i32 {
        self.true_col(var) + 1
    }

    pub fn top_row(&self) -> i32 {
        4 * (self.num_clauses as i32 + 1)
    }

    pub fn upper_row(&self, clause: usize) -> i32 {
        4 * (self.num_clauses as i32 - clause as i32) + 6
    }

    pub fn lower_row(&self, clause: usize) -> i32 {
        4 * (self.num_clauses as i32 - clause as i32) + 4
    }

    pub fn mid_row(&self, clause: usize) -> i32 {
        self.lower_row(clause) + 1
    }

    pub fn below_row(&self, clause: usize) -> i32 {
        self.lower_row(clause) - 1
    }

    pub fn clause_start_col(&self) -> i32 {
        4 * (self.num_vars as i32 + 1) + 1
    }

    /// Column a variable square descends for the given literal.
    pub fn literal_col(&self, lit: Literal) -> i32 {
        if lit.positive {
            self.true_col(lit.var as usize)
        } else {
            self.false_col(lit.var as usize)
        }
    }

    /// Inclusive box every emitted entity falls in.
    pub fn bounds(&self) -> (Position, Position) {
        (Position::new(1, 1), Position::new(self.clause_start_col(), self.top_row()))
    }
}

pub fn variable_id(var: usize) -> SquareId {
    SquareId(format!("x_{var}"))
}

pub fn decision_id(var: usize) -> SquareId {
    SquareId(format!("p_{var}"))
}

pub fn clause_id(clause: usize) -> SquareId {
    SquareId(format!("C_{clause}"))
}

pub fn indicator_id(clause: usize) -> SquareId {
    SquareId(format!("D_{clause}"))
}

pub fn variable_blocker_id(var: usize) -> SquareId {
    SquareId(format!("blk_v{var}"))
}

pub fn crossing_blocker_id(var: usize, clause: usize) -> SquareId {
    SquareId(format!("blk_{var}_{clause}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Neutral,
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "gadget")]
pub enum Gadget {
    Variable { var: usize },
    Clause { clause: usize },
    Crossing { var: usize, clause: usize, kind: CrossingKind },
}

impl fmt::Display for Gadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gadget::Variable { var } => write!(f, "variable gadget x{var}"),
            Gadget::Clause { clause } => write!(f, "clause gadget C{clause}"),
            Gadget::Crossing { var, clause, kind } => {
                let what = match kind {
                    CrossingKind::Neutral => "neutral crossing",
                    CrossingKind::Positive => "positive-literal crossing",
                    CrossingKind::Negative => "negative-literal crossing",
                };
                write!(f, "{what} x{var}/C{clause}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entity {
    Square(SquareSpec),
    Arrow(ArrowSpec),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutEntry {
    pub entity: Entity,
    pub gadget: Gadget,
}

/// An emitted instance together with the gadget each entity belongs to.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub plan: LayoutPlan,
    pub instance: GameInstance,
    pub layout: Vec<LayoutEntry>,
}

impl Reduction {
    /// One line per emitted entity, squares first.
    pub fn layout_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n={} m={}", self.plan.num_vars, self.plan.num_clauses);
        for e in &self.layout {
            let _ = match &e.entity {
                Entity::Square(s) => writeln!(
                    out,
                    "square {:<10} start {:<9} dir {} goal {:<9} {}",
                    s.id.as_str(),
                    s.start.to_string(),
                    s.dir,
                    s.goal.to_string(),
                    e.gadget
                ),
                Entity::Arrow(a) => writeln!(out, "arrow  {:<10} at    {:<9} {}", a.dir, a.pos.to_string(), e.gadget),
            };
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("formula is not preprocessed: clause {clause} is tautological or repeats a literal")]
    NotPreprocessed { clause: usize },
    #[error("formula has clauses but no variables")]
    NoVariables,
    #[error("clause {clause} mentions variable {var} but the formula declares {num_vars}")]
    VariableOutOfRange { clause: usize, var: u32, num_vars: usize },
    #[error("construction bug: {0}")]
    Construction(String),
}

struct Emitter {
    squares: Vec<SquareSpec>,
    arrows: Vec<ArrowSpec>,
    layout: Vec<LayoutEntry>,
}

impl Emitter {
    fn square(&mut self, id: SquareId, start: Position, dir: Direction, goal: Position, gadget: Gadget) {
        let spec = SquareSpec { id, start, dir, goal };
        self.layout.push(LayoutEntry { entity: Entity::Square(spec.clone()), gadget });
        self.squares.push(spec);
    }

    fn arrow(&mut self, pos: Position, dir: Direction, gadget: Gadget) {
        let arrow = ArrowSpec::new(pos, dir);
        self.layout.push(LayoutEntry { entity: Entity::Arrow(arrow), gadget });
        self.arrows.push(arrow);
    }
}

fn check_formula(formula: &CnfFormula) -> Result<(), ReductionError> {
    for (ci, clause) in formula.clauses.iter().enumerate() {
        for l in clause.literals() {
            if l.var == 0 || l.var as usize > formula.num_vars {
                return Err(ReductionError::VariableOutOfRange {
                    clause: ci + 1,
                    var: l.var,
                    num_vars: formula.num_vars,
                });
            }
        }
        let lits = clause.literals();
        let repeated = lits.iter().enumerate().any(|(k, l)| lits[..k].iter().any(|o| o.var == l.var));
        if repeated {
            return Err(ReductionError::NotPreprocessed { clause: ci + 1 });
        }
    }
    if formula.num_vars == 0 && !formula.clauses.is_empty() {
        return Err(ReductionError::NoVariables);
    }
    Ok(())
}

/// Builds the instance and its layout map.
pub fn reduce_with_layout(formula: &CnfFormula) -> Result<Reduction, ReductionError> {
    use Direction::{D, L};

    check_formula(formula)?;
    let n = formula.num_vars;
    let m = formula.num_clauses();
    let plan = LayoutPlan::new(n, m);
    let pos = Position::new;
    let top = plan.top_row();
    let mut em = Emitter { squares: Vec::new(), arrows: Vec::new(), layout: Vec::new() };

    for i in 1..=n {
        let g = Gadget::Variable { var: i };
        let (xt, xf) = (plan.true_col(i), plan.false_col(i));
        em.square(variable_id(i), pos(xf, top), D, pos(xt, 1), g);
        em.square(decision_id(i), pos(xf + 1, top), L, pos(xf - 1, top), g);
        let b = pos(xf - 1, top - 1);
        em.square(variable_blocker_id(i), b, D, b, g);
    }
    for j in 1..=m {
        let g = Gadget::Clause { clause: j };
        let (yn, ys) = (plan.upper_row(j), plan.lower_row(j));
        em.square(clause_id(j), pos(plan.clause_start_col(), yn), L, pos(1, ys), g);
        em.square(indicator_id(j), pos(3, ys), D, pos(2, ys - 1), g);
    }

    let crossing_kind = |i: usize, j: usize| match formula.clauses[j - 1].literal_of(i as u32) {
        None => CrossingKind::Neutral,
        Some(l) if l.positive => CrossingKind::Positive,
        Some(_) => CrossingKind::Negative,
    };

    for i in 1..=n {
        for j in 1..=m {
            let kind = crossing_kind(i, j);
            let g = Gadget::Crossing { var: i, clause: j, kind };
            let b = match kind {
                CrossingKind::Neutral => continue,
                CrossingKind::Positive => pos(plan.left_col(i), plan.mid_row(j)),
                CrossingKind::Negative => pos(plan.mid_col(i), plan.mid_row(j)),
            };
            em.square(crossing_blocker_id(i, j), b, D, b, g);
        }
    }

    for i in 1..=n {
        em.arrow(pos(plan.false_col(i), 1), L, Gadget::Variable { var: i });
    }
    for j in 1..=m {
        em.arrow(pos(1, plan.upper_row(j)), D, Gadget::Clause { clause: j });
    }
    for i in 1..=n {
        for j in 1..=m {
            let kind = crossing_kind(i, j);
            let g = Gadget::Crossing { var: i, clause: j, kind };
            let (xl, xt, xm, xf) = (plan.left_col(i), plan.true_col(i), plan.mid_col(i), plan.false_col(i));
            let (yb, ys, ym, yn) = (plan.below_row(j), plan.lower_row(j), plan.mid_row(j), plan.upper_row(j));
            for (x, y) in [(xl, ys), (xl, yn), (xm, ys), (xm, yn)] {
                em.arrow(pos(x, y), L, g);
            }
            // the literal's own column loses its mid-row arrow so a clause
            // square pushed down there keeps facing left
            let mut downs = vec![(xt, yb), (xf, yb)];
            if kind != CrossingKind::Positive {
                downs.push((xt, ym));
            }
            if kind != CrossingKind::Negative {
                downs.push((xf, ym));
            }
            for (x, y) in downs {
                em.arrow(pos(x, y), D, g);
            }
        }
    }

    let instance = GameInstance::new(em.squares, em.arrows);
    let violations = model::validate(&instance);
    if !violations.is_empty() {
        return Err(ReductionError::Construction(format!("emitted instance is invalid: {violations:?}")));
    }
    if !model::is_down_left(&instance) {
        return Err(ReductionError::Construction("emitted instance is not down-left".into()));
    }
    let arrow_cells: std::collections::HashSet<Position> = instance.arrows.iter().map(|a| a.pos).collect();
    let (lo, hi) = plan.bounds();
    for s in &instance.squares {
        if s.goal.x > s.start.x || s.goal.y > s.start.y {
            return Err(ReductionError::Construction(format!("goal of {} is not below-left of its start", s.id)));
        }
        if arrow_cells.contains(&s.start) {
            return Err(ReductionError::Construction(format!("{} starts on an arrow", s.id)));
        }
        for p in [s.start, s.goal] {
            if p.x < lo.x || p.y < lo.y || p.x > hi.x || p.y > hi.y {
                return Err(ReductionError::Construction(format!("{} leaves the layout box at {p}", s.id)));
            }
        }
    }
    Ok(Reduction { plan, instance, layout: em.layout })
}

pub fn reduce(formula: &CnfFormula) -> Result<GameInstance, ReductionError> {
    reduce_with_layout(formula).map(|r| r.instance)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceStats {
    pub squares: usize,
    pub arrows: usize,
    pub blockers: usize,
    /// Inclusive `[min, max]` corners over starts, goals and arrows.
    pub bounding_box: Option<[Position; 2]>,
}

impl InstanceStats {
    pub fn of(instance: &GameInstance) -> Self {
        InstanceStats {
            squares: instance.squares.len(),
            arrows: instance.arrows.len(),
            blockers: instance.squares.iter().filter(|s| s.is_blocker()).count(),
            bounding_box: model::bounding_box(instance).map(|(lo, hi)| [lo, hi]),
        }
    }
}

impl fmt::Display for InstanceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "squares={} arrows={} blockers={}", self.squares, self.arrows, self.blockers)?;
        match self.bounding_box {
            Some([lo, hi]) => write!(f, " box={lo}..{hi}"),
            None => write!(f, " box=empty"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStats {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub literal_occurrences: usize,
    #[serde(flatten)]
    pub instance: InstanceStats,
}

impl fmt::Display for ReductionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} L={} {}", self.num_vars, self.num_clauses, self.literal_occurrences, self.instance)
    }
}

/// Counts for a reduced formula, checked against the closed forms
/// `3n + 2m + L` squares and `n + m + 8nm - L` arrows.
pub fn reduction_stats(formula: &CnfFormula) -> Result<ReductionStats, ReductionError> {
    let reduction = reduce_with_layout(formula)?;
    stats_for(formula, &reduction.instance)
}

pub(crate) fn stats_for(formula: &CnfFormula, instance: &GameInstance) -> Result<ReductionStats, ReductionError> {
    let n = formula.num_vars;
    let m = formula.num_clauses();
    let lits = formula.literal_occurrences();
    let stats = InstanceStats::of(instance);
    let want_squares = 3 * n + 2 * m + lits;
    let want_arrows = n + m + 8 * n * m - lits;
    if stats.squares != want_squares || stats.arrows != want_arrows {
        return Err(ReductionError::Construction(format!(
            "expected {want_squares} squares / {want_arrows} arrows, emitted {} / {}",
            stats.squares, stats.arrows
        )));
    }
    if let Some([lo, hi]) = stats.bounding_box {
        let max_x = 4 * (n as i32 + 1) + 2;
        let max_y = 4 * (m as i32 + 1);
        if lo.x < 1 || lo.y < 1 || hi.x > max_x || hi.y > max_y {
            return Err(ReductionError::Construction(format!("bounding box {lo}..{hi} too large")));
        }
    }
    Ok(ReductionStats { num_vars: n, num_clauses: m, literal_occurrences: lits, instance: stats })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("assignment covers {found} variables, formula has {expected}")]
    AssignmentSize { expected: usize, found: usize },
    #[error("assignment does not satisfy clause {clause}")]
    Unsatisfied { clause: usize },
    #[error("construction bug: {0}")]
    Construction(String),
}

struct Schedule {
    game: Game,
    state: GameState,
    trace: Vec<SquareId>,
}

impl Schedule {
    fn push(&mut self, id: &SquareId) -> Result<(), WitnessError> {
        let idx = self.game.index_of(id).map_err(|e| WitnessError::Construction(e.to_string()))?;
        self.state = self.game.push_index(&self.state, idx).state;
        self.trace.push(id.clone());
        let ruined = model::ruined_squares(self.game.instance(), &self.state)
            .map_err(|e| WitnessError::Construction(e.to_string()))?;
        if !ruined.is_empty() {
            return Err(WitnessError::Construction(format!(
                "push {} ({id}) ruined {:?}",
                self.trace.len(),
                ruined.iter().map(SquareId::as_str).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    fn pos(&self, id: &SquareId) -> Position {
        self.state.squares[self.game.index_of(id).expect("emitted id")].pos
    }

    fn goal(&self, id: &SquareId) -> Position {
        self.game.instance().squares[self.game.index_of(id).expect("emitted id")].goal
    }
}

/// Builds a winning push sequence for the reduced instance from a
/// satisfying assignment. Every push is simulated; a push that ruins a
/// square or a schedule that does not end in a win is reported as a
/// construction bug.
pub fn synthesize_witness(formula: &CnfFormula, assignment: &Assignment) -> Result<PushTrace, WitnessError> {
    if assignment.num_vars() != formula.num_vars {
        return Err(WitnessError::AssignmentSize { expected: formula.num_vars, found: assignment.num_vars() });
    }
    if let Some(c) = formula.first_violated(assignment) {
        return Err(WitnessError::Unsatisfied { clause: c + 1 });
    }
    let reduction = reduce_with_layout(formula)?;
    let plan = reduction.plan;
    let game = Game::new(reduction.instance).map_err(|e| WitnessError::Construction(e.to_string()))?;
    let state = game.initial_state();
    let mut sch = Schedule { game, state, trace: Vec::new() };
    let n = plan.num_vars;
    let m = plan.num_clauses;

    // 1. choose columns with the decision squares
    for i in 1..=n {
        if !assignment.value(i as u32) {
            sch.push(&variable_id(i))?;
        }
        sch.push(&decision_id(i))?;
        sch.push(&decision_id(i))?;
    }

    // 2. park each clause square above the column of one true literal
    for (j, clause) in formula.clauses.iter().enumerate().map(|(k, c)| (k + 1, c)) {
        let lit = clause
            .literals()
            .iter()
            .copied()
            .find(|l| l.is_satisfied_by(assignment))
            .ok_or(WitnessError::Unsatisfied { clause: j })?;
        let col = plan.literal_col(lit);
        let id = clause_id(j);
        while sch.pos(&id).x > col {
            sch.push(&id)?;
        }
    }

    // 3. run every variable square down its column, stepping each clause
    //    square it drops into a lower row off the column right away
    let clause_rows: Vec<(SquareId, i32)> = (1..=m).map(|j| (clause_id(j), plan.lower_row(j))).collect();
    let max_steps = (plan.top_row() as usize + 4) * 2;
    for i in 1..=n {
        let x = variable_id(i);
        let goal = sch.goal(&x);
        let mut steps = 0;
        while sch.pos(&x) != goal {
            steps += 1;
            if steps > max_steps {
                return Err(WitnessError::Construction(format!("{x} did not reach its goal")));
            }
            sch.push(&x)?;
            let below = sch.pos(&x) + Direction::D;
            if let Some((c, _)) = clause_rows.iter().find(|(c, row)| sch.pos(c) == below && below.y == *row) {
                let c = c.clone();
                sch.push(&c)?;
            }
        }
    }

    // 4. slide each clause square home along its lower row, knocking the
    //    indicator square onto its column on the way
    for j in 1..=m {
        let c = clause_id(j);
        let row = plan.lower_row(j);
        if sch.pos(&c).y != row {
            return Err(WitnessError::Construction(format!("{c} never reached its lower row")));
        }
        while sch.pos(&c).x > 3 {
            sch.push(&c)?;
        }
        sch.push(&indicator_id(j))?;
        while sch.pos(&c) != sch.goal(&c) {
            if sch.pos(&c).x < 1 {
                return Err(WitnessError::Construction(format!("{c} overshot its goal")));
            }
            sch.push(&c)?;
        }
    }

    if !sch.game.is_won(&sch.state) {
        return Err(WitnessError::Construction("schedule ended without a win".into()));
    }
    Ok(PushTrace::new(sch.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::CnfFormula;

    fn sample() -> CnfFormula {
        CnfFormula::from_clauses(4, &[&[1, 2], &[1, -3, 4], &[-1, -2, -4], &[2, -3, 4]])
    }

    #[test]
    fn single_variable_no_clauses() {
        let inst = reduce(&CnfFormula::new(1, vec![])).unwrap();
        assert_eq!(inst.squares.len(), 3);
        assert_eq!(inst.arrows.len(), 1);
        let x = &inst.squares[0];
        assert_eq!((x.start, x.dir, x.goal), (Position::new(8, 4), Direction::D, Position::new(6, 1)));
        let p = &inst.squares[1];
        assert_eq!((p.start, p.dir, p.goal), (Position::new(9, 4), Direction::L, Position::new(7, 4)));
        assert!(inst.squares[2].is_blocker());
        assert_eq!(inst.squares[2].start, Position::new(7, 3));
        assert_eq!(inst.arrows[0], ArrowSpec::new(Position::new(8, 1), Direction::L));
    }

    #[test]
    fn empty_formula_without_variables() {
        let inst = reduce(&CnfFormula::new(0, vec![])).unwrap();
        assert!(inst.squares.is_empty() && inst.arrows.is_empty());
        assert_eq!(reduce(&CnfFormula::new(0, vec![Default::default()])), Err(ReductionError::NoVariables));
    }

    #[test]
    fn rejects_unpreprocessed() {
        let f = CnfFormula::from_clauses(1, &[&[1, -1]]);
        assert_eq!(reduce(&f), Err(ReductionError::NotPreprocessed { clause: 1 }));
        let f = CnfFormula::from_clauses(1, &[&[2]]);
        assert!(matches!(reduce(&f), Err(ReductionError::VariableOutOfRange { .. })));
    }

    #[test]
    fn sample_counts() {
        let s = reduction_stats(&sample()).unwrap();
        assert_eq!((s.instance.squares, s.instance.arrows, s.literal_occurrences), (31, 125, 11));
        assert_eq!(s.instance.blockers, 4 + 11);
        let [lo, hi] = s.instance.bounding_box.unwrap();
        assert!(lo.x >= 1 && lo.y >= 1 && hi.x <= 22 && hi.y <= 20);
    }

    #[test]
    fn sample_blocker_pattern() {
        // blockers at x_l for positive literals, x_m for negative ones
        let r = reduce_with_layout(&sample()).unwrap();
        let plan = r.plan;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for e in &r.layout {
            if let (Entity::Square(s), Gadget::Crossing { var, clause, kind }) = (&e.entity, e.gadget) {
                assert_eq!(s.start.y, plan.mid_row(clause));
                match kind {
                    CrossingKind::Positive => {
                        assert_eq!(s.start.x, plan.left_col(var));
                        positive.push((var, clause));
                    }
                    CrossingKind::Negative => {
                        assert_eq!(s.start.x, plan.mid_col(var));
                        negative.push((var, clause));
                    }
                    CrossingKind::Neutral => unreachable!(),
                }
            }
        }
        positive.sort();
        negative.sort();
        assert_eq!(positive, vec![(1, 1), (1, 2), (2, 1), (2, 4), (4, 2), (4, 4)]);
        assert_eq!(negative, vec![(1, 3), (2, 3), (3, 2), (3, 4), (4, 3)]);
    }

    #[test]
    fn small_stats() {
        let s = reduction_stats(&CnfFormula::from_clauses(2, &[&[1, -2]])).unwrap();
        assert_eq!((s.instance.squares, s.instance.arrows), (10, 17));
        let s = reduction_stats(&CnfFormula::new(1, vec![])).unwrap();
        assert_eq!((s.instance.squares, s.instance.arrows), (3, 1));
        let [lo, hi] = s.instance.bounding_box.unwrap();
        assert!(lo.x >= 1 && lo.y >= 1 && hi.x <= 10 && hi.y <= 4);
    }

    #[test]
    fn reduced_instance_is_fresh() {
        let inst = reduce(&sample()).unwrap();
        let g = Game::new(inst.clone()).unwrap();
        let s = g.initial_state();
        assert!(model::is_down_left(&inst));
        assert!(model::ruined_squares(&inst, &s).unwrap().is_empty());
        assert!(!g.is_won(&s));
    }

    #[test]
    fn witness_single_variable_true() {
        let f = CnfFormula::new(1, vec![]);
        let t = synthesize_witness(&f, &Assignment(vec![true])).unwrap();
        let ids: Vec<&str> = t.moves.iter().map(SquareId::as_str).collect();
        assert_eq!(ids, ["p_1", "p_1", "x_1", "x_1", "x_1"]);
    }

    #[test]
    fn witness_single_variable_false() {
        let f = CnfFormula::new(1, vec![]);
        let t = synthesize_witness(&f, &Assignment(vec![false])).unwrap();
        let ids: Vec<&str> = t.moves.iter().map(SquareId::as_str).collect();
        // down once, decide, two more down onto the arrow, two left
        assert_eq!(ids, ["x_1", "p_1", "p_1", "x_1", "x_1", "x_1", "x_1"]);
    }

    #[test]
    fn witness_replays_to_win() {
        let f = sample();
        let a = Assignment(vec![true, true, false, false]);
        let t = synthesize_witness(&f, &a).unwrap();
        let g = Game::new(reduce(&f).unwrap()).unwrap();
        assert!(g.is_won(&g.replay(&t).unwrap()));
        assert!(t.len() <= 50 * 5 * 5);
    }

    #[test]
    fn witness_rejects_unsatisfying_assignment() {
        let f = CnfFormula::from_clauses(2, &[&[1], &[2]]);
        assert_eq!(
            synthesize_witness(&f, &Assignment(vec![true, false])),
            Err(WitnessError::Unsatisfied { clause: 2 })
        );
        assert!(matches!(
            synthesize_witness(&f, &Assignment(vec![true])),
            Err(WitnessError::AssignmentSize { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn layout_report_lists_every_entity() {
        let r = reduce_with_layout(&sample()).unwrap();
        let report = r.layout_report();
        assert_eq!(report.lines().count(), 1 + 31 + 125);
        assert!(report.contains("square C_1"));
        assert!(report.contains("negative-literal crossing x3/C2"));
    }
}
