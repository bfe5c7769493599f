use crate::error::{Error, Result};

/// A CNF formula over variables `1..=num_vars` with DIMACS-style signed literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::ClauseWidth { index, width: 0 });
            }
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > num_vars {
                    return Err(Error::InvalidInput(format!(
                        "literal {lit} in clause {index} is not a variable of 1..={num_vars}"
                    )));
                }
            }
        }
        Ok(Cnf { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Errors unless every clause has one or two literals.
    pub fn check_two_sat(&self) -> Result<()> {
        match self.clauses.iter().position(|c| c.len() > 2) {
            Some(index) => Err(Error::ClauseWidth { index, width: self.clauses[index].len() }),
            None => Ok(()),
        }
    }

    /// Evaluates the formula; `assignment[v - 1] != 0` means variable `v` is true.
    pub fn eval(&self, assignment: &[usize]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[lit.unsigned_abs() as usize - 1] != 0;
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }
}
