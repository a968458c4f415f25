use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::BoxBounds;

/// A variable is at a bound when within this distance of it.
pub const AT_BOUND_TOL: f64 = 1e-9;

/// Snapshot cadence in iterations, in addition to every restart.
pub const SNAPSHOT_EVERY: usize = 100;

/// Which variables sit at a bound at one iteration: `-1` lower, `1` upper,
/// `0` neither.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSnapshot {
    pub iteration: usize,
    pub state: Vec<i8>,
}

pub fn active_state(x: &[f64], bounds: &BoxBounds, tol: f64) -> Vec<i8> {
    x.iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(&v, (&l, &u))| {
            if (v - l).abs() <= tol {
                -1
            } else if (v - u).abs() <= tol {
                1
            } else {
                0
            }
        })
        .collect()
}

/// Index of the last snapshot whose active set differs from its
/// predecessor; 0 when the set never changes.
pub fn last_active_set_change(snapshots: &[ActiveSnapshot]) -> Result<usize> {
    if snapshots.is_empty() {
        return Err(Error::invalid("no active-set snapshots recorded"));
    }
    Ok(snapshots
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].state != w[1].state)
        .map(|(i, _)| i + 1)
        .next_back()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snaps(states: &[&[i8]]) -> Vec<ActiveSnapshot> {
        states
            .iter()
            .enumerate()
            .map(|(i, s)| ActiveSnapshot {
                iteration: i * 100,
                state: s.to_vec(),
            })
            .collect()
    }

    #[test]
    fn constant_set_is_zero() {
        assert_eq!(last_active_set_change(&snaps(&[&[0, 1], &[0, 1], &[0, 1]])).unwrap(), 0);
    }

    #[test]
    fn last_change_index() {
        let mut states: Vec<&[i8]> = vec![&[0]; 10];
        states[3] = &[1];
        states[4] = &[1];
        states[5] = &[1];
        states[6] = &[1];
        // changes at 3 (0 -> 1) and 7 (1 -> 0)
        assert_eq!(last_active_set_change(&snaps(&states)).unwrap(), 7);
        assert!(last_active_set_change(&[]).is_err());
    }

    #[test]
    fn at_bound_tolerance() {
        let b = BoxBounds::new(vec![0.0, 0.0, f64::NEG_INFINITY], vec![1.0, f64::INFINITY, 2.0]).unwrap();
        assert_eq!(active_state(&[1e-10, 0.5, 2.0 - 5e-10], &b, AT_BOUND_TOL), vec![-1, 0, 1]);
        assert_eq!(active_state(&[2e-9, 1.0, 1.0], &b, AT_BOUND_TOL), vec![0, 0, 0]);
    }
}
