//! Exact minimum-cost assignment.
//!
//! Shortest-augmenting-path formulation with dual potentials (the O(n^3)
//! Hungarian method). Rows are inserted one at a time; each insertion grows
//! the matching along a shortest alternating path under reduced costs. Ties
//! resolve toward the smaller column index, so the solver is deterministic.

use crate::error::{Error, Result};

/// Solves the square assignment problem on a row-major `n x n` cost matrix.
/// Returns the column assigned to each row and the total cost.
pub fn min_cost_assignment(n: usize, cost: &[f64]) -> Result<(Vec<usize>, f64)> {
    if n == 0 {
        return Err(Error::EmptyInput("cost matrix"));
    }
    if cost.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "{} costs for a {}x{} matrix",
            cost.len(),
            n,
            n
        )));
    }
    if !cost.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite("assignment costs"));
    }

    // Column 0 is a virtual entry point; real columns are 1..=n.
    let mut row_potential = vec![0.0; n + 1];
    let mut col_potential = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // row matched to each column (0 = free)
    let mut path = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_reduced = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];

        loop {
            visited[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if visited[j] {
                    continue;
                }
                let reduced =
                    cost[(i0 - 1) * n + (j - 1)] - row_potential[i0] - col_potential[j];
                if reduced < min_reduced[j] {
                    min_reduced[j] = reduced;
                    path[j] = j0;
                }
                if min_reduced[j] < delta {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    row_potential[matched_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }

        // Augment along the alternating path back to the virtual column.
        while j0 != 0 {
            let j1 = path[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok((assignment, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_optimal_for_diagonal_dominance() {
        let cost = vec![
            0.0, 5.0, 9.0, //
            5.0, 0.0, 5.0, //
            9.0, 5.0, 0.0,
        ];
        let (assign, total) = min_cost_assignment(3, &cost).unwrap();
        assert_eq!(assign, vec![0, 1, 2]);
        assert_eq!(total, 0.0);
    }

    #[test]
    fn forces_off_diagonal_choice() {
        let cost = vec![
            1.0, 2.0, //
            2.0, 100.0,
        ];
        let (assign, total) = min_cost_assignment(2, &cost).unwrap();
        assert_eq!(assign, vec![1, 0]);
        assert_relative_eq!(total, 4.0);
    }

    #[test]
    fn single_entry() {
        let (assign, total) = min_cost_assignment(1, &[7.5]).unwrap();
        assert_eq!(assign, vec![0]);
        assert_relative_eq!(total, 7.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(min_cost_assignment(0, &[]).is_err());
        assert!(min_cost_assignment(2, &[1.0, 2.0, 3.0]).is_err());
        assert!(min_cost_assignment(1, &[f64::NAN]).is_err());
    }
}
