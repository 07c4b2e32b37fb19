//! CNF clauses and a DPLL satisfiability procedure with unit propagation.
//!
//! Literals follow the DIMACS convention: variable indices are 1-based and a
//! negative literal denotes the negated variable.

/// A literal: `v` for the variable `v`, `-v` for its negation.
pub type Lit = i32;

#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub clauses: Vec<Vec<Lit>>,
    pub num_vars: usize,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf { clauses: Vec::new(), num_vars }
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= self.num_vars));
        self.clauses.push(clause);
    }
}

/// Satisfiability of `cnf` under the given assumption literals.
///
/// Returns `false` immediately on contradictory assumptions.
pub fn sat_with(cnf: &Cnf, assumptions: &[Lit]) -> bool {
    let mut assign: Vec<Option<bool>> = vec![None; cnf.num_vars + 1];
    for &l in assumptions {
        let v = l.unsigned_abs() as usize;
        let val = l > 0;
        match assign[v] {
            Some(b) if b != val => return false,
            _ => assign[v] = Some(val),
        }
    }
    dpll(&cnf.clauses, &mut assign)
}

fn lit_value(assign: &[Option<bool>], l: Lit) -> Option<bool> {
    assign[l.unsigned_abs() as usize].map(|b| b == (l > 0))
}

/// Recursive DPLL. Restores `assign` to its entry state when returning
/// `false`; may leave a satisfying assignment in place on success.
fn dpll(clauses: &[Vec<Lit>], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail: Vec<usize> = Vec::new();
    let undo = |assign: &mut Vec<Option<bool>>, trail: &[usize]| {
        for &v in trail {
            assign[v] = None;
        }
    };

    // Unit propagation to saturation.
    loop {
        let mut changed = false;
        for clause in clauses {
            let mut satisfied = false;
            let mut unassigned: Option<Lit> = None;
            let mut unassigned_count = 0;
            for &l in clause {
                match lit_value(assign, l) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        unassigned_count += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match unassigned_count {
                0 => {
                    undo(assign, &trail);
                    return false;
                }
                1 => {
                    let l = unassigned.unwrap();
                    let v = l.unsigned_abs() as usize;
                    assign[v] = Some(l > 0);
                    trail.push(v);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    // Branch on the first unassigned variable of an unsatisfied clause.
    let mut branch_var = None;
    'outer: for clause in clauses {
        if clause.iter().any(|&l| lit_value(assign, l) == Some(true)) {
            continue;
        }
        for &l in clause {
            if lit_value(assign, l).is_none() {
                branch_var = Some(l.unsigned_abs() as usize);
                break 'outer;
            }
        }
    }
    let Some(v) = branch_var else {
        // Every clause satisfied (or no clauses left to satisfy).
        return true;
    };
    for val in [true, false] {
        assign[v] = Some(val);
        if dpll(clauses, assign) {
            return true;
        }
    }
    assign[v] = None;
    undo(assign, &trail);
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(num_vars: usize, clauses: &[&[Lit]]) -> Cnf {
        let mut c = Cnf::new(num_vars);
        for cl in clauses {
            c.add_clause(cl.to_vec());
        }
        c
    }

    #[test]
    fn empty_cnf_is_satisfiable() {
        assert!(sat_with(&cnf(0, &[]), &[]));
    }

    #[test]
    fn empty_clause_is_unsatisfiable() {
        assert!(!sat_with(&cnf(1, &[&[]]), &[]));
    }

    #[test]
    fn unit_conflict() {
        assert!(!sat_with(&cnf(1, &[&[1], &[-1]]), &[]));
    }

    #[test]
    fn contradictory_assumptions() {
        assert!(!sat_with(&cnf(1, &[]), &[1, -1]));
    }

    #[test]
    fn propagation_chain() {
        // a, a→b, b→c, ¬c: unsatisfiable purely by unit propagation.
        let c = cnf(3, &[&[1], &[-1, 2], &[-2, 3], &[-3]]);
        assert!(!sat_with(&c, &[]));
        // Without the final unit it is satisfiable.
        let c = cnf(3, &[&[1], &[-1, 2], &[-2, 3]]);
        assert!(sat_with(&c, &[]));
    }

    #[test]
    fn requires_branching() {
        // (a∨b) ∧ (¬a∨b) ∧ (a∨¬b): forces a=b=true.
        let c = cnf(2, &[&[1, 2], &[-1, 2], &[1, -2]]);
        assert!(sat_with(&c, &[]));
        assert!(!sat_with(&c, &[-2]));
    }

    #[test]
    fn pigeonhole_two_in_one() {
        // Two pigeons, one hole: p1h1 ∨ …, unsat.
        let c = cnf(2, &[&[1], &[2], &[-1, -2]]);
        assert!(!sat_with(&c, &[]));
    }
}
