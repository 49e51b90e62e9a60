//! Win counting across repeated realizations.

use std::collections::BTreeMap;

use serde::Serialize;

use super::BenchRow;
use crate::error::{Error, Result};

/// Number of realizations in which `solver` beat every other solver on a
/// problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeadToHead {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub wins: usize,
    pub reps: usize,
}

impl BenchRow {
    /// Numeric column by name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "f_final" => self.f_final,
            "n_i" => self.n_i as f64,
            "n_prod" => self.n_prod as f64,
            "n_f" => self.n_f as f64,
            "n_g" => self.n_g as f64,
            "n_eig" => self.n_eig as f64,
            "time" => self.time,
            "time_eig" => self.time_eig,
            "time_loop" => self.time_loop,
            _ => return None,
        })
    }
}

/// For each (problem, n, solver), counts the seeds on which that solver has
/// the strictly smallest metric among all solvers run with that seed. Ties
/// award nobody and runs that did not reach a stationary point never win.
pub fn head_to_head(rows: &[BenchRow], metric: &str) -> Result<Vec<HeadToHead>> {
    if rows.first().is_some_and(|r| r.metric(metric).is_none()) {
        return Err(Error::MissingColumn(metric.to_string()));
    }
    let mut by_seed: BTreeMap<(&str, usize, u64), Vec<&BenchRow>> = BTreeMap::new();
    let mut table: BTreeMap<(&str, usize, &str), HeadToHead> = BTreeMap::new();
    for r in rows {
        by_seed.entry((&r.problem, r.n, r.seed)).or_default().push(r);
        table
            .entry((&r.problem, r.n, &r.solver))
            .or_insert_with(|| HeadToHead {
                problem: r.problem.clone(),
                n: r.n,
                solver: r.solver.clone(),
                wins: 0,
                reps: 0,
            })
            .reps += 1;
    }
    for ((problem, n, _), group) in &by_seed {
        let value = |r: &BenchRow| r.metric(metric).filter(|_| r.is_stationary()).unwrap_or(f64::INFINITY);
        let best = group.iter().map(|r| value(r)).fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue;
        }
        let winners: Vec<&&BenchRow> = group.iter().filter(|r| value(r) == best).collect();
        if let [winner] = winners.as_slice() {
            if let Some(h) = table.get_mut(&(*problem, *n, winner.solver.as_str())) {
                h.wins += 1;
            }
        }
    }
    Ok(table.into_values().collect())
}
