//! A small complete SAT solver: DPLL with two-watched-literal unit
//! propagation and chronological backtracking. Decisions take the lowest
//! unassigned variable index, false first, so runs are deterministic and
//! models are reproducible byte for byte.

use crate::symbolic::cnf::Cnf;

fn widx(lit: i32) -> usize {
    (lit.unsigned_abs() as usize - 1) * 2 + usize::from(lit < 0)
}

struct Solver {
    nvars: usize,
    clauses: Vec<Vec<i32>>,
    /// watcher lists per literal; each clause keeps its watched literals in
    /// positions 0 and 1
    watches: Vec<Vec<usize>>,
    /// -1 unassigned, 0 false, 1 true
    assign: Vec<i8>,
    trail: Vec<i32>,
    qhead: usize,
    /// (trail position of the decision literal, second phase tried)
    decisions: Vec<(usize, bool)>,
}

impl Solver {
    fn value(&self, lit: i32) -> i8 {
        let v = self.assign[lit.unsigned_abs() as usize - 1];
        if v < 0 {
            -1
        } else if (v == 1) == (lit > 0) {
            1
        } else {
            0
        }
    }

    fn enqueue_unchecked(&mut self, lit: i32) {
        self.assign[lit.unsigned_abs() as usize - 1] = i8::from(lit > 0);
        self.trail.push(lit);
    }

    fn enqueue(&mut self, lit: i32) -> bool {
        match self.value(lit) {
            1 => true,
            0 => false,
            _ => {
                self.enqueue_unchecked(lit);
                true
            }
        }
    }

    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let lit = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = -lit;
            let fw = widx(false_lit);
            let mut i = 0;
            'clauses: while i < self.watches[fw].len() {
                let ci = self.watches[fw][i];
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let other = self.clauses[ci][0];
                if self.value(other) == 1 {
                    i += 1;
                    continue;
                }
                for k in 2..self.clauses[ci].len() {
                    let cand = self.clauses[ci][k];
                    if self.value(cand) != 0 {
                        self.clauses[ci].swap(1, k);
                        self.watches[fw].swap_remove(i);
                        self.watches[widx(cand)].push(ci);
                        continue 'clauses;
                    }
                }
                match self.value(other) {
                    0 => return false,
                    -1 => self.enqueue_unchecked(other),
                    _ => {}
                }
                i += 1;
            }
        }
        true
    }

    fn search(&mut self) -> Option<Vec<bool>> {
        loop {
            if self.propagate() {
                if self.trail.len() == self.nvars {
                    return Some(self.assign.iter().map(|&v| v == 1).collect());
                }
                let v = (0..self.nvars).find(|&v| self.assign[v] < 0).unwrap();
                self.decisions.push((self.trail.len(), false));
                self.enqueue_unchecked(-((v + 1) as i32));
            } else {
                loop {
                    let (tpos, flipped) = self.decisions.pop()?;
                    let dlit = self.trail[tpos];
                    for l in self.trail.drain(tpos..) {
                        self.assign[l.unsigned_abs() as usize - 1] = -1;
                    }
                    self.qhead = self.trail.len();
                    if !flipped {
                        self.decisions.push((tpos, true));
                        self.enqueue_unchecked(-dlit);
                        break;
                    }
                }
            }
        }
    }
}

/// Satisfiability of a CNF. Returns a total model (index i holds variable
/// i+1) or `None` when unsatisfiable. Variables no clause mentions come
/// back false.
pub fn dpll_sat(cnf: &Cnf) -> Option<Vec<bool>> {
    if cnf.clauses.iter().any(|c| c.is_empty()) {
        return None;
    }
    let mut solver = Solver {
        nvars: cnf.num_vars,
        clauses: cnf.clauses.clone(),
        watches: vec![Vec::new(); 2 * cnf.num_vars],
        assign: vec![-1; cnf.num_vars],
        trail: Vec::with_capacity(cnf.num_vars),
        qhead: 0,
        decisions: Vec::new(),
    };
    let mut units: Vec<i32> = Vec::new();
    for (ci, clause) in solver.clauses.iter().enumerate() {
        if clause.len() == 1 {
            units.push(clause[0]);
        } else {
            solver.watches[widx(clause[0])].push(ci);
            solver.watches[widx(clause[1])].push(ci);
        }
    }
    for lit in units {
        if !solver.enqueue(lit) {
            return None;
        }
    }
    solver.search()
}
