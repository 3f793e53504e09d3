//! Two-tape machine simulator: an unbounded work tape plus a finite,
//! read-only program tape consumed strictly left to right.
//!
//! ## Tape discipline
//!
//! The work tape starts all blank (unless pre-loaded) and must keep its
//! non-blank cells in one contiguous segment: a non-blank write may only
//! land inside the segment or directly on either flank, and a blank may
//! only be written to a cell with at least one blank neighbour.  Violations
//! end the run with [`RunOutcome::InvalidWrite`].
//!
//! The program tape holds a blank in cell 0 and the program's bits in
//! cells 1 onward.  The program head starts on cell 0 and can only stay
//! put or advance, so the bits a run consumes are exactly the prefix up to
//! the head's high-water mark.  A step that needs to read past the last
//! bit ends the run with [`RunOutcome::ProgramExhausted`]; for a machine
//! that only halts with the head parked on a terminator this makes the set
//! of consumed prefixes prefix-free by construction.
//!
//! ## Table format
//!
//! Specs parse from (and print to) a plain-text table, one rule per line:
//!
//! ```text
//! start boot
//! # state  work  prog   write  move  next  prog-head
//! boot     B     B      B      R     boot  A
//! boot     B     *      B      L     done  S
//! ```
//!
//! Symbols are `0`, `1`, `B` (blank) with `*` as a wildcard in the two
//! read columns; moves are `L`/`R`; the program-head column is `S` (stay)
//! or `A` (advance); `H` names the halt state.  More-specific rules win
//! (exact beats wildcard, with the work column outranking the program
//! column), and the table must resolve every combination a non-halt state
//! could read.

pub mod builtin;

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::bits::BitString;

/// One tape-cell symbol (used by both tapes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkSymbol {
    /// Unwritten cell.
    Blank,
    /// A zero bit.
    Zero,
    /// A one bit.
    One,
}

impl WorkSymbol {
    fn index(self) -> usize {
        match self {
            WorkSymbol::Blank => 0,
            WorkSymbol::Zero => 1,
            WorkSymbol::One => 2,
        }
    }

    fn glyph(self) -> char {
        match self {
            WorkSymbol::Blank => 'B',
            WorkSymbol::Zero => '0',
            WorkSymbol::One => '1',
        }
    }

    fn from_bit(bit: bool) -> Self {
        if bit { WorkSymbol::One } else { WorkSymbol::Zero }
    }
}

/// Work-head movement; every step moves exactly one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// One cell toward lower positions.
    Left,
    /// One cell toward higher positions.
    Right,
}

/// Program-head movement; the head never goes back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgMove {
    /// Re-read the same program cell next step.
    Stay,
    /// Move to the next program cell.
    Advance,
}

/// Where a rule sends control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextState {
    /// Continue in the numbered state.
    State(u16),
    /// Terminate the run.
    Halt,
}

/// One resolved table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    /// Symbol written to the current work cell.
    pub write: WorkSymbol,
    /// Work-head move performed after the write.
    pub mv: Move,
    /// State entered next (or halt).
    pub next: NextState,
    /// Whether the program head advances.
    pub advance: ProgMove,
}

/// A complete machine: named states and a total transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    names: Vec<String>,
    start: u16,
    /// table[state][work][prog]
    table: Vec<[[Transition; 3]; 3]>,
}

/// Problems turning a table text into a [`MachineSpec`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineParseError {
    /// A line did not have the expected shape.
    #[error("line {line}: expected `state work prog write move next prog-head`, got {found:?}")]
    MalformedRule {
        /// 1-based source line.
        line: usize,
        /// The offending text.
        found: String,
    },
    /// A symbol, move, or head column held an unknown token.
    #[error("line {line}: invalid token {token:?} for {column}")]
    BadToken {
        /// 1-based source line.
        line: usize,
        /// The offending token.
        token: String,
        /// Which column it sat in.
        column: &'static str,
    },
    /// Two rules of equal specificity cover the same reads.
    #[error("line {line}: duplicate rule for state {state:?}")]
    DuplicateRule {
        /// 1-based source line.
        line: usize,
        /// The state whose rules collide.
        state: String,
    },
    /// No `start` line was present.
    #[error("missing `start <state>` line")]
    MissingStart,
    /// The start state never appears as a rule's source state.
    #[error("start state {0:?} has no rules")]
    UnknownStart(String),
    /// Some reachable (state, work, prog) read has no rule.
    #[error("state {state:?} has no rule for work {work}, program {prog}")]
    IncompleteTable {
        /// The uncovered state.
        state: String,
        /// Work symbol with no rule.
        work: char,
        /// Program symbol with no rule.
        prog: char,
    },
    /// `H` was used as a rule's source state.
    #[error("line {line}: the halt state takes no rules")]
    RuleForHalt {
        /// 1-based source line.
        line: usize,
    },
}

#[derive(Clone, Copy)]
struct RawRule {
    work: Option<WorkSymbol>,
    prog: Option<WorkSymbol>,
    transition: Transition,
    line: usize,
}

impl RawRule {
    /// Exactness rank: exact/exact > exact/* > */exact > */*.
    fn rank(&self) -> u8 {
        (self.work.is_some() as u8) << 1 | self.prog.is_some() as u8
    }

    fn matches(&self, work: WorkSymbol, prog: WorkSymbol) -> bool {
        self.work.map_or(true, |w| w == work) && self.prog.map_or(true, |p| p == prog)
    }
}

fn parse_symbol(
    token: &str,
    line: usize,
    column: &'static str,
    wildcard_ok: bool,
) -> Result<Option<WorkSymbol>, MachineParseError> {
    match token {
        "0" => Ok(Some(WorkSymbol::Zero)),
        "1" => Ok(Some(WorkSymbol::One)),
        "B" => Ok(Some(WorkSymbol::Blank)),
        "*" if wildcard_ok => Ok(None),
        _ => Err(MachineParseError::BadToken { line, token: token.into(), column }),
    }
}

impl FromStr for MachineSpec {
    type Err = MachineParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        fn intern(
            name: &str,
            names: &mut Vec<String>,
            rules: &mut Vec<Vec<RawRule>>,
            ids: &mut HashMap<String, u16>,
        ) -> u16 {
            *ids.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                rules.push(Vec::new());
                (names.len() - 1) as u16
            })
        }

        let mut start_name: Option<String> = None;
        let mut names: Vec<String> = Vec::new();
        let mut ids: HashMap<String, u16> = HashMap::new();
        let mut rules: Vec<Vec<RawRule>> = Vec::new();

        // Number states by the first rule they own, not by first mention:
        // `Display` emits rules grouped by state id, so a target named
        // before its own section must not jump the queue or the name table
        // would permute on every print/reparse cycle.
        for raw_line in text.lines() {
            let body = raw_line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.len() == 7 && tokens[0] != "H" {
                intern(tokens[0], &mut names, &mut rules, &mut ids);
            }
        }

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw_line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens[0] == "start" && tokens.len() == 2 {
                start_name = Some(tokens[1].to_string());
                continue;
            }
            if tokens.len() != 7 {
                return Err(MachineParseError::MalformedRule { line, found: body.to_string() });
            }
            if tokens[0] == "H" {
                return Err(MachineParseError::RuleForHalt { line });
            }
            let state = intern(tokens[0], &mut names, &mut rules, &mut ids);
            let work = parse_symbol(tokens[1], line, "work symbol", true)?;
            let prog = parse_symbol(tokens[2], line, "program symbol", true)?;
            let write = parse_symbol(tokens[3], line, "write symbol", false)?.unwrap();
            let mv = match tokens[4] {
                "L" => Move::Left,
                "R" => Move::Right,
                other => {
                    return Err(MachineParseError::BadToken {
                        line,
                        token: other.into(),
                        column: "move",
                    })
                }
            };
            let next = if tokens[5] == "H" {
                NextState::Halt
            } else {
                NextState::State(intern(tokens[5], &mut names, &mut rules, &mut ids))
            };
            let advance = match tokens[6] {
                "S" => ProgMove::Stay,
                "A" => ProgMove::Advance,
                other => {
                    return Err(MachineParseError::BadToken {
                        line,
                        token: other.into(),
                        column: "program-head",
                    })
                }
            };
            rules[state as usize].push(RawRule {
                work,
                prog,
                transition: Transition { write, mv, next, advance },
                line,
            });
        }

        let start_name = start_name.ok_or(MachineParseError::MissingStart)?;
        let &start = ids
            .get(&start_name)
            .ok_or_else(|| MachineParseError::UnknownStart(start_name.clone()))?;

        let symbols = [WorkSymbol::Blank, WorkSymbol::Zero, WorkSymbol::One];
        let mut table = Vec::with_capacity(names.len());
        for (state, state_rules) in rules.iter().enumerate() {
            let mut resolved = [[Transition {
                write: WorkSymbol::Blank,
                mv: Move::Right,
                next: NextState::Halt,
                advance: ProgMove::Stay,
            }; 3]; 3];
            for &work in &symbols {
                for &prog in &symbols {
                    let best = state_rules
                        .iter()
                        .filter(|r| r.matches(work, prog))
                        .max_by_key(|r| r.rank());
                    let Some(best) = best else {
                        return Err(MachineParseError::IncompleteTable {
                            state: names[state].clone(),
                            work: work.glyph(),
                            prog: prog.glyph(),
                        });
                    };
                    let ambiguous = state_rules
                        .iter()
                        .any(|r| r.matches(work, prog) && r.rank() == best.rank() && r.line != best.line);
                    if ambiguous {
                        return Err(MachineParseError::DuplicateRule {
                            line: best.line,
                            state: names[state].clone(),
                        });
                    }
                    resolved[work.index()][prog.index()] = best.transition;
                }
            }
            table.push(resolved);
        }
        Ok(MachineSpec { names, start, table })
    }
}

impl fmt::Display for MachineSpec {
    /// Canonical table text: `start` line, then every resolved rule fully
    /// expanded (no wildcards), grouped by state.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let symbols = [WorkSymbol::Blank, WorkSymbol::Zero, WorkSymbol::One];
        writeln!(f, "start {}", self.names[self.start as usize])?;
        for (state, entries) in self.table.iter().enumerate() {
            for &work in &symbols {
                for &prog in &symbols {
                    let t = entries[work.index()][prog.index()];
                    let next = match t.next {
                        NextState::Halt => "H",
                        NextState::State(s) => &self.names[s as usize],
                    };
                    writeln!(
                        f,
                        "{} {} {} {} {} {} {}",
                        self.names[state],
                        work.glyph(),
                        prog.glyph(),
                        t.write.glyph(),
                        match t.mv {
                            Move::Left => 'L',
                            Move::Right => 'R',
                        },
                        next,
                        match t.advance {
                            ProgMove::Stay => 'S',
                            ProgMove::Advance => 'A',
                        },
                    )?;
                }
            }
        }
        Ok(())
    }
}

impl MachineSpec {
    /// Number of non-halt states.
    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    /// Name of a state id (for traces).
    pub fn state_name(&self, state: u16) -> &str {
        &self.names[state as usize]
    }

    /// The start state id.
    pub fn start_state(&self) -> u16 {
        self.start
    }

    fn transition(&self, state: u16, work: WorkSymbol, prog: WorkSymbol) -> Transition {
        self.table[state as usize][work.index()][prog.index()]
    }
}

/// The work tape: a blank-padded strip with one contiguous written segment.
#[derive(Debug, Clone)]
pub struct WorkTape {
    cells: VecDeque<WorkSymbol>,
    /// Tape position of `cells[0]`.
    origin: i64,
    /// Inclusive bounds of the non-blank segment, if any.
    segment: Option<(i64, i64)>,
    /// Current head position.
    pub head: i64,
}

impl WorkTape {
    /// An all-blank tape with the head at position 0.
    pub fn new() -> Self {
        WorkTape { cells: VecDeque::new(), origin: 0, segment: None, head: 0 }
    }

    /// A tape pre-loaded with `bits` at positions `0..len`, head at 0.
    pub fn from_bits(bits: &BitString) -> Self {
        let mut tape = WorkTape::new();
        for (i, bit) in bits.iter().enumerate() {
            tape.write_unchecked(i as i64, WorkSymbol::from_bit(bit));
        }
        tape
    }

    /// Symbol at `pos` (blank outside the stored strip).
    pub fn read(&self, pos: i64) -> WorkSymbol {
        let idx = pos - self.origin;
        if idx < 0 || idx as usize >= self.cells.len() {
            WorkSymbol::Blank
        } else {
            self.cells[idx as usize]
        }
    }

    /// Inclusive bounds of the non-blank segment.
    pub fn segment(&self) -> Option<(i64, i64)> {
        self.segment
    }

    fn store(&mut self, pos: i64, sym: WorkSymbol) {
        if self.cells.is_empty() {
            self.origin = pos;
            self.cells.push_back(sym);
            return;
        }
        while pos < self.origin {
            self.cells.push_front(WorkSymbol::Blank);
            self.origin -= 1;
        }
        while (pos - self.origin) as usize >= self.cells.len() {
            self.cells.push_back(WorkSymbol::Blank);
        }
        self.cells[(pos - self.origin) as usize] = sym;
    }

    fn write_unchecked(&mut self, pos: i64, sym: WorkSymbol) {
        self.store(pos, sym);
        if sym != WorkSymbol::Blank {
            self.segment = match self.segment {
                None => Some((pos, pos)),
                Some((lo, hi)) => Some((lo.min(pos), hi.max(pos))),
            };
        }
    }

    /// Writes `sym` at `pos`, enforcing the contiguity discipline.
    ///
    /// Returns `false` when the write is illegal (the caller reports
    /// [`RunOutcome::InvalidWrite`]).
    pub fn write(&mut self, pos: i64, sym: WorkSymbol) -> bool {
        match (sym, self.segment) {
            (WorkSymbol::Blank, _) => {
                // A blank needs a blank neighbour.
                let left = self.read(pos - 1);
                let right = self.read(pos + 1);
                if left != WorkSymbol::Blank && right != WorkSymbol::Blank {
                    return false;
                }
                self.store(pos, WorkSymbol::Blank);
                self.segment = match self.segment {
                    Some((lo, hi)) if pos == lo && pos == hi => None,
                    Some((lo, hi)) if pos == lo => Some((lo + 1, hi)),
                    Some((lo, hi)) if pos == hi => Some((lo, hi - 1)),
                    other => other,
                };
                true
            }
            (_, None) => {
                self.write_unchecked(pos, sym);
                true
            }
            (_, Some((lo, hi))) => {
                // A mark may extend the segment by one cell at most.
                if pos < lo - 1 || pos > hi + 1 {
                    return false;
                }
                self.write_unchecked(pos, sym);
                true
            }
        }
    }

    /// The written segment as bits (empty when the tape is blank).
    ///
    /// The contiguity discipline guarantees no blanks inside the segment.
    pub fn output(&self) -> BitString {
        let Some((lo, hi)) = self.segment else {
            return BitString::new();
        };
        BitString::from_bits((lo..=hi).map(|pos| self.read(pos) == WorkSymbol::One))
    }
}

impl Default for WorkTape {
    fn default() -> Self {
        WorkTape::new()
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// The machine entered the halt state.
    Halted {
        /// Content of the work tape's written segment.
        output: BitString,
        /// High-water mark of the program head, i.e. bits consumed.
        program_bits_read: usize,
        /// Steps executed.
        steps: u64,
    },
    /// The step budget ran out first.
    StepLimitExceeded {
        /// Steps executed (= the budget).
        steps: u64,
    },
    /// A step needed a program bit past the end of the program.
    ProgramExhausted {
        /// Length of the program that ran out.
        bits_available: usize,
    },
    /// A write broke the work tape's contiguity discipline.
    InvalidWrite {
        /// Step index (0-based) of the offending write.
        step: u64,
        /// Work-tape position of the offending write.
        position: i64,
    },
}

/// Default step budget for the convenience runners.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// A paused machine: tape, control state, program head, step count.
#[derive(Debug, Clone)]
pub struct MachineConfig {
    /// The work tape (including head position).
    pub tape: WorkTape,
    /// Current control state.
    pub state: u16,
    /// Program-head position (0 = the leading blank cell).
    pub prog_pos: usize,
    /// Highest program position read so far.
    pub max_prog_read: usize,
    /// Steps executed so far.
    pub steps: u64,
}

/// One line of a step-by-step trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// 0-based step index.
    pub step: u64,
    /// State name before the step.
    pub state: String,
    /// Work-head position before the step.
    pub work_pos: i64,
    /// Program-head position before the step.
    pub prog_pos: usize,
    /// Work symbol read.
    pub read_work: char,
    /// Program symbol read.
    pub read_prog: char,
    /// Work symbol written.
    pub wrote: char,
    /// Work-head move (`L`/`R`).
    pub moved: char,
    /// Whether the program head advanced.
    pub advanced: bool,
}

impl MachineConfig {
    /// A fresh configuration in `spec`'s start state.
    pub fn new(spec: &MachineSpec) -> Self {
        MachineConfig {
            tape: WorkTape::new(),
            state: spec.start_state(),
            prog_pos: 0,
            max_prog_read: 0,
            steps: 0,
        }
    }

    /// Program symbol under the head, if the head is still on the tape.
    fn prog_symbol(&self, program: &BitString) -> Option<WorkSymbol> {
        if self.prog_pos == 0 {
            Some(WorkSymbol::Blank)
        } else {
            program.get(self.prog_pos - 1).map(WorkSymbol::from_bit)
        }
    }

    /// Executes one step; `Some(outcome)` means the run is over.
    pub fn step(&mut self, spec: &MachineSpec, program: &BitString) -> Option<RunOutcome> {
        self.step_traced(spec, program, None)
    }

    fn step_traced(
        &mut self,
        spec: &MachineSpec,
        program: &BitString,
        trace: Option<&mut Vec<TraceStep>>,
    ) -> Option<RunOutcome> {
        let Some(prog_sym) = self.prog_symbol(program) else {
            return Some(RunOutcome::ProgramExhausted { bits_available: program.len() });
        };
        self.max_prog_read = self.max_prog_read.max(self.prog_pos);
        let work_sym = self.tape.read(self.tape.head);
        let t = spec.transition(self.state, work_sym, prog_sym);
        if let Some(trace) = trace {
            trace.push(TraceStep {
                step: self.steps,
                state: spec.state_name(self.state).to_string(),
                work_pos: self.tape.head,
                prog_pos: self.prog_pos,
                read_work: work_sym.glyph(),
                read_prog: prog_sym.glyph(),
                wrote: t.write.glyph(),
                moved: match t.mv {
                    Move::Left => 'L',
                    Move::Right => 'R',
                },
                advanced: t.advance == ProgMove::Advance,
            });
        }
        let pos = self.tape.head;
        if !self.tape.write(pos, t.write) {
            return Some(RunOutcome::InvalidWrite { step: self.steps, position: pos });
        }
        self.tape.head += match t.mv {
            Move::Left => -1,
            Move::Right => 1,
        };
        if t.advance == ProgMove::Advance {
            self.prog_pos += 1;
        }
        self.steps += 1;
        match t.next {
            NextState::Halt => Some(RunOutcome::Halted {
                output: self.tape.output(),
                program_bits_read: self.max_prog_read,
                steps: self.steps,
            }),
            NextState::State(s) => {
                self.state = s;
                None
            }
        }
    }
}

fn run_config(
    spec: &MachineSpec,
    program: &BitString,
    step_limit: u64,
    mut config: MachineConfig,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> RunOutcome {
    loop {
        if config.steps >= step_limit {
            return RunOutcome::StepLimitExceeded { steps: config.steps };
        }
        if let Some(outcome) = config.step_traced(spec, program, trace.as_deref_mut()) {
            return outcome;
        }
    }
}

/// Runs `spec` on `program` with a blank work tape.
pub fn run(spec: &MachineSpec, program: &BitString, step_limit: u64) -> RunOutcome {
    run_config(spec, program, step_limit, MachineConfig::new(spec), None)
}

/// Runs `spec` with the work tape pre-loaded with `work` (head on its
/// first cell).
pub fn run_with_work(
    spec: &MachineSpec,
    work: &BitString,
    program: &BitString,
    step_limit: u64,
) -> RunOutcome {
    let mut config = MachineConfig::new(spec);
    config.tape = WorkTape::from_bits(work);
    run_config(spec, program, step_limit, config, None)
}

/// Like [`run`], but records every step.
pub fn run_traced(
    spec: &MachineSpec,
    work: Option<&BitString>,
    program: &BitString,
    step_limit: u64,
) -> (RunOutcome, Vec<TraceStep>) {
    let mut config = MachineConfig::new(spec);
    if let Some(work) = work {
        config.tape = WorkTape::from_bits(work);
    }
    let mut trace = Vec::new();
    let outcome = run_config(spec, program, step_limit, config, Some(&mut trace));
    (outcome, trace)
}
