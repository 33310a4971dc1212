//! CNF formulas, DIMACS parsing and clause preprocessing.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable index.
    pub var: u32,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        Literal { var, positive: false }
    }

    pub fn from_dimacs(lit: i64) -> Self {
        Literal { var: lit.unsigned_abs() as u32, positive: lit > 0 }
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }

    pub fn negated(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }

    pub fn is_satisfied_by(self, assignment: &Assignment) -> bool {
        assignment.value(self.var) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = i64>) -> Self {
        Clause(lits.into_iter().map(Literal::from_dimacs).collect())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn is_tautology(&self) -> bool {
        self.0.iter().any(|l| self.0.contains(&l.negated()))
    }

    /// The literal of `var` in this clause, if any.
    pub fn literal_of(&self, var: u32) -> Option<Literal> {
        self.0.iter().copied().find(|l| l.var == var)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Self {
        CnfFormula { num_vars, clauses }
    }

    /// Convenience constructor from DIMACS-style signed integers.
    pub fn from_clauses(num_vars: usize, clauses: &[&[i64]]) -> Self {
        CnfFormula { num_vars, clauses: clauses.iter().map(|c| Clause::new(c.iter().copied())).collect() }
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn literal_occurrences(&self) -> usize {
        self.clauses.iter().map(|c| c.0.len()).sum()
    }

    /// Index of the first clause the assignment falsifies.
    pub fn first_violated(&self, assignment: &Assignment) -> Option<usize> {
        self.clauses.iter().position(|c| !c.0.iter().any(|l| l.is_satisfied_by(assignment)))
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.first_violated(assignment).is_none()
    }

    /// True when no clause is tautological or repeats a literal.
    pub fn is_preprocessed(&self) -> bool {
        self.clauses.iter().all(|c| {
            !c.is_tautology() && c.0.iter().enumerate().all(|(i, l)| !c.0[..i].contains(l))
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in &c.0 {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            f.write_str("(")?;
            for (k, l) in c.0.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ∨ ")?;
                }
                write!(f, "{l}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A total truth assignment over variables `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().enumerate().map(|(i, &v)| format!("x{}={}", i + 1, if v { 'T' } else { 'F' })).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("malformed header at line {line}: `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("duplicate header at line {line}")]
    DuplicateHeader { line: usize },
    #[error("invalid token at line {line}: `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("literal out of range at line {line}: {literal} exceeds {num_vars} declared variables")]
    LiteralOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("missing clause terminator `0` for clause starting at line {line}")]
    MissingTerminator { line: usize },
    #[error("clause count mismatch at line {line}: header declares {expected}, found {found}")]
    ClauseCountMismatch { line: usize, expected: usize, found: usize },
}

impl DimacsError {
    pub fn line(&self) -> Option<usize> {
        match self {
            DimacsError::MissingHeader => None,
            DimacsError::MalformedHeader { line, .. }
            | DimacsError::DuplicateHeader { line }
            | DimacsError::InvalidToken { line, .. }
            | DimacsError::LiteralOutOfRange { line, .. }
            | DimacsError::MissingTerminator { line }
            | DimacsError::ClauseCountMismatch { line, .. } => Some(*line),
        }
    }
}

/// Parses DIMACS CNF. Clauses may span lines; comment lines start with `c`.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            // SATLIB end-of-data marker
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line });
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let malformed = || DimacsError::MalformedHeader { line, text: trimmed.to_owned() };
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(malformed());
            }
            let n = parts[2].parse().map_err(|_| malformed())?;
            let m = parts[3].parse().map_err(|_| malformed())?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in trimmed.split_whitespace() {
            let lit: i64 =
                token.parse().map_err(|_| DimacsError::InvalidToken { line, token: token.to_owned() })?;
            if lit == 0 {
                clauses.push(Clause(std::mem::take(&mut current)));
                continue;
            }
            if lit.unsigned_abs() > n as u64 {
                return Err(DimacsError::LiteralOutOfRange { line, literal: lit, num_vars: n });
            }
            if current.is_empty() {
                clause_start = line;
            }
            current.push(Literal::from_dimacs(lit));
        }
    }

    let (n, m) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator { line: clause_start });
    }
    if clauses.len() != m {
        return Err(DimacsError::ClauseCountMismatch { line: last_line.max(1), expected: m, found: clauses.len() });
    }
    Ok(CnfFormula { num_vars: n, clauses })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreprocessReport {
    /// Original indices of removed tautological clauses.
    pub tautologies: Vec<usize>,
    /// (original clause index, literal) for every dropped repeat.
    pub duplicate_literals: Vec<(usize, Literal)>,
}

impl fmt::Display for PreprocessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} tautolog{} removed", self.tautologies.len(), if self.tautologies.len() == 1 { "y" } else { "ies" })?;
        write!(f, ", {} duplicate literal(s) removed", self.duplicate_literals.len())
    }
}

/// Drops tautological clauses and repeated literals. Empty clauses stay.
pub fn preprocess(formula: &CnfFormula) -> (CnfFormula, PreprocessReport) {
    let mut report = PreprocessReport::default();
    let mut clauses = Vec::with_capacity(formula.clauses.len());
    for (ci, clause) in formula.clauses.iter().enumerate() {
        if clause.is_tautology() {
            report.tautologies.push(ci);
            continue;
        }
        let mut lits: Vec<Literal> = Vec::with_capacity(clause.0.len());
        for &l in &clause.0 {
            if lits.contains(&l) {
                report.duplicate_literals.push((ci, l));
            } else {
                lits.push(l);
            }
        }
        clauses.push(Clause(lits));
    }
    (CnfFormula { num_vars: formula.num_vars, clauses }, report)
}

/// Every formula over `num_vars` variables with at most `max_clauses`
/// clauses, each clause a non-tautological set of 1..=`max_len` literals.
/// Formulas are multisets of clauses (clauses may repeat), listed in a fixed
/// order starting with the empty formula.
pub fn enumerate_family(num_vars: usize, max_clauses: usize, max_len: usize) -> Vec<CnfFormula> {
    let literals: Vec<Literal> =
        (1..=num_vars as u32).flat_map(|v| [Literal::pos(v), Literal::neg(v)]).collect();

    let mut pool = Vec::new();
    fn subsets(lits: &[Literal], from: usize, max_len: usize, cur: &mut Vec<Literal>, out: &mut Vec<Clause>) {
        if !cur.is_empty() {
            out.push(Clause(cur.clone()));
        }
        if cur.len() == max_len {
            return;
        }
        for i in from..lits.len() {
            if cur.iter().any(|l| l.var == lits[i].var) {
                continue;
            }
            cur.push(lits[i]);
            subsets(lits, i + 1, max_len, cur, out);
            cur.pop();
        }
    }
    subsets(&literals, 0, max_len, &mut Vec::new(), &mut pool);
    pool.sort_by_key(|c| c.0.len());

    let mut out = Vec::new();
    fn multisets(pool: &[Clause], from: usize, left: usize, cur: &mut Vec<Clause>, n: usize, out: &mut Vec<CnfFormula>) {
        out.push(CnfFormula { num_vars: n, clauses: cur.clone() });
        if left == 0 {
            return;
        }
        for i in from..pool.len() {
            cur.push(pool[i].clone());
            multisets(pool, i, left - 1, cur, n, out);
            cur.pop();
        }
    }
    multisets(&pool, 0, max_clauses, &mut Vec::new(), num_vars, &mut out);
    out.sort_by_key(|f| f.clauses.len());
    out
}
