//! Exact solver for small balanced transportation problems.
//!
//! Successive shortest paths on the residual bipartite network, with
//! Bellman-Ford handling the negative-cost reverse arcs. Each augmentation
//! exhausts a supply, a demand, or a reverse arc, so the loop terminates
//! after finitely many steps.

use crate::error::{Error, Result};

const MASS_EPS: f64 = 1e-14;

/// Minimum of `sum_ij cost[i][j] * flow[i][j]` subject to row sums `supply`
/// and column sums `demand`, `flow >= 0`. Totals must agree within 1e-9.
pub fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (m, k) = (supply.len(), demand.len());
    if cost.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: cost.len(),
        });
    }
    if let Some(row) = cost.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: row.len(),
        });
    }
    if supply.iter().chain(demand).any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidDistribution("masses must be finite and non-negative".into()));
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("unbalanced totals {ts} vs {td}")));
    }

    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    let mut flow = vec![vec![0.0f64; k]; m];

    // Residual graph nodes: supplies 0..m, demands m..m+k.
    let nodes = m + k;
    loop {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred = vec![usize::MAX; nodes];
        for i in 0..m {
            if left[i] > MASS_EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..m {
                for j in 0..k {
                    let dj = m + j;
                    if dist[i] + cost[i][j] < dist[dj] - 1e-15 {
                        dist[dj] = dist[i] + cost[i][j];
                        pred[dj] = i;
                        changed = true;
                    }
                    if flow[i][j] > MASS_EPS && dist[dj] - cost[i][j] < dist[i] - 1e-15 {
                        dist[i] = dist[dj] - cost[i][j];
                        pred[i] = dj;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let target = (0..k)
            .filter(|&j| need[j] > MASS_EPS && dist[m + j].is_finite())
            .min_by(|&a, &b| dist[m + a].total_cmp(&dist[m + b]));
        let Some(j) = target else { break };

        // Walk back to the originating supply, collecting the bottleneck.
        let mut path = Vec::new();
        let mut node = m + j;
        let mut amount = need[j];
        while pred[node] != usize::MAX {
            let p = pred[node];
            if node >= m {
                path.push((p, node - m, true));
            } else {
                let jj = p - m;
                amount = amount.min(flow[node][jj]);
                path.push((node, jj, false));
            }
            node = p;
        }
        amount = amount.min(left[node]);
        if amount <= MASS_EPS {
            break;
        }
        for (i, jj, forward) in path {
            if forward {
                flow[i][jj] += amount;
            } else {
                flow[i][jj] -= amount;
            }
        }
        left[node] -= amount;
        need[j] -= amount;
    }

    Ok(flow
        .iter()
        .zip(cost)
        .map(|(fr, cr)| fr.iter().zip(cr).map(|(f, c)| f * c).sum::<f64>())
        .sum())
}
