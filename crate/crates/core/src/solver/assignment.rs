//! Dense linear assignment (Jonker–Volgenant): column reduction, augmenting
//! row reduction, then shortest augmenting paths.

/// Optimal permutation plus dual prices with `u_i + v_j ≤ c_ij`.
#[derive(Debug, Clone)]
pub(crate) struct Assignment {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    pub u: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub v: Vec<f64>,
}

const UNASSIGNED: usize = usize::MAX;

/// Solves the `n × n` assignment problem for row-major `costs`.
pub(crate) fn solve_assignment(n: usize, costs: &[f64]) -> Assignment {
    assert_eq!(costs.len(), n * n);
    let c = |i: usize, j: usize| costs[i * n + j];

    let mut row_sol = vec![UNASSIGNED; n];
    let mut col_sol = vec![UNASSIGNED; n];
    let mut v = vec![0.0; n];
    let mut free: Vec<usize> = Vec::with_capacity(n);

    if n == 1 {
        return Assignment {
            row_to_col: vec![0],
            u: vec![c(0, 0)],
            v: vec![0.0],
        };
    }

    // column reduction
    let mut matches = vec![0usize; n];
    for j in (0..n).rev() {
        let mut imin = 0;
        let mut min = c(0, j);
        for i in 1..n {
            if c(i, j) < min {
                min = c(i, j);
                imin = i;
            }
        }
        v[j] = min;
        matches[imin] += 1;
        if matches[imin] == 1 {
            row_sol[imin] = j;
            col_sol[j] = imin;
        } else if v[j] < v[row_sol[imin]] {
            let j1 = row_sol[imin];
            row_sol[imin] = j;
            col_sol[j] = imin;
            col_sol[j1] = UNASSIGNED;
        } else {
            col_sol[j] = UNASSIGNED;
        }
    }

    // reduction transfer
    for i in 0..n {
        if matches[i] == 0 {
            free.push(i);
        } else if matches[i] == 1 {
            let j1 = row_sol[i];
            let mut min = f64::INFINITY;
            for j in 0..n {
                if j != j1 {
                    min = min.min(c(i, j) - v[j]);
                }
            }
            v[j1] -= min;
        }
    }

    // augmenting row reduction, two passes
    for _ in 0..2 {
        let mut k = 0;
        let prev_free = std::mem::take(&mut free);
        let mut queue = prev_free;
        // bounded so that float round-off cannot stall the loop
        let mut budget = 8 * n + 64;
        while k < queue.len() {
            let i = queue[k];
            k += 1;
            let mut umin = c(i, 0) - v[0];
            let mut j1 = 0;
            let mut usubmin = f64::INFINITY;
            let mut j2 = UNASSIGNED;
            for j in 1..n {
                let h = c(i, j) - v[j];
                if h < usubmin {
                    if h >= umin {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            let mut i0 = col_sol[j1];
            let strict = umin < usubmin;
            if strict {
                v[j1] -= usubmin - umin;
            } else if i0 != UNASSIGNED && j2 != UNASSIGNED {
                j1 = j2;
                i0 = col_sol[j2];
            }
            if i0 != UNASSIGNED && row_sol[i0] == j1 {
                row_sol[i0] = UNASSIGNED;
            }
            row_sol[i] = j1;
            col_sol[j1] = i;
            if i0 != UNASSIGNED {
                if strict && budget > 0 {
                    budget -= 1;
                    k -= 1;
                    queue[k] = i0;
                } else {
                    free.push(i0);
                }
            }
        }
    }

    // shortest augmenting paths for the remaining free rows
    let mut d = vec![0.0; n];
    let mut pred = vec![0usize; n];
    let mut col_list: Vec<usize> = (0..n).collect();
    for &free_row in &free {
        for j in 0..n {
            d[j] = c(free_row, j) - v[j];
            pred[j] = free_row;
            col_list[j] = j;
        }
        let mut low = 0;
        let mut up = 0;
        let mut last = 0;
        let mut min = 0.0;
        let end_of_path;
        'search: loop {
            if up == low {
                last = low;
                min = d[col_list[up]];
                up += 1;
                for k in up..n {
                    let j = col_list[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        col_list[k] = col_list[up];
                        col_list[up] = j;
                        up += 1;
                    }
                }
                for k in low..up {
                    if col_sol[col_list[k]] == UNASSIGNED {
                        end_of_path = col_list[k];
                        break 'search;
                    }
                }
            }
            let j1 = col_list[low];
            low += 1;
            let i = col_sol[j1];
            let h = c(i, j1) - v[j1] - min;
            let mut k = up;
            while k < n {
                let j = col_list[k];
                let v2 = c(i, j) - v[j] - h;
                if v2 < d[j] {
                    pred[j] = i;
                    if v2 == min {
                        if col_sol[j] == UNASSIGNED {
                            end_of_path = j;
                            break 'search;
                        }
                        col_list[k] = col_list[up];
                        col_list[up] = j;
                        up += 1;
                    }
                    d[j] = v2;
                }
                k += 1;
            }
        }
        // columns scanned before the final minimum get their prices raised
        for &j in &col_list[..last] {
            v[j] += d[j] - min;
        }
        let mut j = end_of_path;
        loop {
            let i = pred[j];
            col_sol[j] = i;
            let next = row_sol[i];
            row_sol[i] = j;
            j = next;
            if i == free_row {
                break;
            }
        }
    }

    let u = (0..n).map(|i| c(i, row_sol[i]) - v[row_sol[i]]).collect();
    Assignment {
        row_to_col: row_sol,
        u,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(n: usize, costs: &[f64], a: &Assignment) -> f64 {
        (0..n).map(|i| costs[i * n + a.row_to_col[i]]).sum()
    }

    #[test]
    fn tiny_cases() {
        let a = solve_assignment(2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(total(2, &[0.0, 1.0, 1.0, 0.0], &a), 0.0);
        let a = solve_assignment(2, &[0.0, 2.0, 3.0, 1.0]);
        assert_eq!(total(2, &[0.0, 2.0, 3.0, 1.0], &a), 1.0);
        let a = solve_assignment(3, &[1.0; 9]);
        assert_eq!(total(3, &[1.0; 9], &a), 3.0);
        let mut seen = a.row_to_col.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn matches_permutation_search() {
        use itertools::Itertools;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let n = 1 + trial % 6;
            // coarse integer costs force many ties
            let costs: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..4) as f64).collect();
            let a = solve_assignment(n, &costs);
            let best = (0..n)
                .permutations(n)
                .map(|p| (0..n).map(|i| costs[i * n + p[i]]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(total(n, &costs, &a), best);
            for i in 0..n {
                for j in 0..n {
                    assert!(a.u[i] + a.v[j] <= costs[i * n + j] + 1e-12);
                }
            }
        }
    }
}
