//! Exhaustive evaluation of all `2^p` subsets.
//!
//! Subsets are visited depth-first in ascending-index order so that each one
//! extends its parent's factor by a single row; results are bit-identical to
//! [`crate::ols::solve_subset`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramSystem;
use crate::ols::{full_aic, Factor, Objective, ObjectiveValue};
use crate::varset::VarSet;

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumRow {
    pub subset: VarSet,
    pub rss: f64,
    pub objective: ObjectiveValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub best: VarSet,
    pub objective: ObjectiveValue,
    pub full_aic: f64,
    pub evaluated: u64,
    #[serde(skip)]
    pub table: Option<Vec<EnumRow>>,
}

/// Evaluate every subset and return the minimizer of `n log(rss) + 2k`.
///
/// Ties go to the smaller subset, then to the lexicographically smallest.
pub fn enumerate_all(g: &GramSystem, cap: usize, keep_table: bool) -> Result<Enumeration> {
    let p = g.p();
    if p > cap {
        return Err(Error::EnumerationCap { p, cap });
    }
    let obj = Objective::new(g);
    let mut state = Walk {
        obj,
        p,
        best: None,
        evaluated: 0,
        table: keep_table.then(|| Vec::with_capacity(1usize << p)),
    };
    let mut factor = Factor::new(g);
    state.visit(&mut factor, VarSet::empty(), 0);
    let (best, objective) = state.best.expect("at least the empty subset is evaluated");
    Ok(Enumeration {
        best,
        objective,
        full_aic: full_aic(objective.value, g.n()),
        evaluated: state.evaluated,
        table: state.table,
    })
}

struct Walk {
    obj: Objective,
    p: usize,
    best: Option<(VarSet, ObjectiveValue)>,
    evaluated: u64,
    table: Option<Vec<EnumRow>>,
}

impl Walk {
    fn visit(&mut self, factor: &mut Factor<'_>, set: VarSet, next: usize) {
        let rss = factor.rss();
        let value = self.obj.eval(rss, set.len());
        self.evaluated += 1;
        if let Some(t) = self.table.as_mut() {
            t.push(EnumRow {
                subset: set,
                rss,
                objective: value,
            });
        }
        let better = match &self.best {
            None => true,
            Some((bs, bv)) => {
                value.value < bv.value
                    || (value.value == bv.value
                        && (set.len() < bs.len() || (set.len() == bs.len() && set.cmp_lex(*bs).is_lt())))
            }
        };
        if better {
            self.best = Some((set, value));
        }
        for j in next..self.p {
            let cp = factor.checkpoint();
            factor.push(j);
            self.visit(factor, set.with(j), j + 1);
            factor.rollback(cp);
        }
    }
}

/// Write the full table as CSV: `mask,k,rss,objective,full_aic`.
pub fn write_table<W: Write>(rows: &[EnumRow], n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mask", "k", "rss", "objective", "full_aic"])?;
    for r in rows {
        w.write_record([
            r.subset.bits().to_string(),
            r.subset.len().to_string(),
            r.rss.to_string(),
            r.objective.value.to_string(),
            full_aic(r.objective.value, n).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::ols::solve_subset;

    #[test]
    fn perfect_fit_dominates() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![1.0, 2.0, 3.0]).unwrap();
        let g = GramSystem::build(&d).unwrap();
        let e = enumerate_all(&g, 20, true).unwrap();
        assert_eq!(e.best.to_vec(), vec![0]);
        assert!(e.objective.clamped);
        assert_eq!(e.table.unwrap().len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let d = crate::synth::SynthSpec::new(30, 6).generate();
        let g = GramSystem::build(&d).unwrap();
        assert!(matches!(
            enumerate_all(&g, 5, false),
            Err(Error::EnumerationCap { p: 6, cap: 5 })
        ));
    }

    #[test]
    fn table_matches_fresh_solves_bit_for_bit() {
        let d = crate::synth::SynthSpec::new(25, 6).dependencies(1).seed(3).generate();
        let g = GramSystem::build(&d).unwrap();
        let e = enumerate_all(&g, 20, true).unwrap();
        let table = e.table.unwrap();
        assert_eq!(table.len(), 64);
        for row in &table {
            assert_eq!(row.rss, solve_subset(&g, row.subset).rss);
        }
        let min = table.iter().map(|r| r.objective.value).fold(f64::INFINITY, f64::min);
        assert_eq!(min, e.objective.value);
    }

    #[test]
    fn csv_table_has_one_row_per_subset() {
        let d = crate::synth::SynthSpec::new(20, 3).generate();
        let g = GramSystem::build(&d).unwrap();
        let e = enumerate_all(&g, 20, true).unwrap();
        let mut buf = Vec::new();
        write_table(e.table.as_deref().unwrap(), g.n(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 8);
    }
}
