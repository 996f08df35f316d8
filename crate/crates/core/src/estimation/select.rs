use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hull::HullPath;
use super::profile::CriterionProfile;

/// Treatment of the first slope jump, whose incoming slope is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum FirstJump {
    /// Accumulate jumps from the second hull vertex on.
    #[default]
    Discard,
    /// Use a finite incoming slope for the first vertex.
    Cap(f64),
}

/// Outcome of the jump-accumulation vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSelection {
    pub tau_index: usize,
    pub tau_star: f64,
    /// Hull vertex with the largest single jump among those voting for the
    /// winner; the last vertex when nothing was accumulated.
    pub selected_k: usize,
    /// Accumulated jump mass per voted grid index.
    pub mass: Vec<(usize, f64)>,
}

/// Jump-accumulation estimator: every interior hull vertex `K_p` votes for
/// `tau_hat(K_p)` with weight `alpha_{p-1} - alpha_p`; the grid point with the
/// largest total wins (ties toward the smallest index).
pub fn select_shift(profile: &CriterionProfile, hull: &HullPath) -> ShiftSelection {
    select_shift_with(profile, hull, FirstJump::Discard)
}

pub fn select_shift_with(profile: &CriterionProfile, hull: &HullPath, first_jump: FirstJump) -> ShiftSelection {
    let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
    let mut best_jump: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut vote = |vertex: usize, jump: f64| {
        let pos = hull.positions[vertex];
        let idx = profile.tau_hat_index[pos];
        *mass.entry(idx).or_insert(0.0) += jump;
        let entry = best_jump.entry(idx).or_insert((f64::NEG_INFINITY, hull.k[vertex]));
        if jump > entry.0 {
            *entry = (jump, hull.k[vertex]);
        }
    };
    if let (FirstJump::Cap(alpha0), Some(&first)) = (first_jump, hull.slopes.first()) {
        if alpha0 > first {
            vote(0, alpha0 - first);
        }
    }
    // Vertex p (0-based) has incoming slope slopes[p-1] and outgoing slopes[p];
    // the last vertex has no outgoing slope and casts no vote.
    for p in 1..hull.slopes.len() {
        vote(p, hull.slopes[p - 1] - hull.slopes[p]);
    }

    let mut winner: Option<(usize, f64)> = None;
    for (&idx, &m) in &mass {
        if winner.is_none_or(|(_, w)| m > w) {
            winner = Some((idx, m));
        }
    }
    let (tau_index, selected_k) = match winner {
        Some((idx, _)) => (idx, best_jump[&idx].1),
        None => {
            let last = hull.vertices() - 1;
            (profile.tau_hat_index[hull.positions[last]], hull.k[last])
        }
    };
    let pos = profile.tau_hat_index.iter().position(|&i| i == tau_index).unwrap_or(0);
    ShiftSelection {
        tau_index,
        tau_star: profile.tau_hat[pos],
        selected_k,
        mass: mass.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(ks: Vec<usize>, m: Vec<f64>, idx: Vec<usize>) -> CriterionProfile {
        CriterionProfile {
            tau_hat: idx.iter().map(|&i| i as f64 * 0.1).collect(),
            k_grid: ks,
            beta: 3.0,
            m_max: m,
            tau_hat_index: idx,
        }
    }

    #[test]
    fn unanimous_vote() {
        let p = profile(vec![1, 2, 3, 4], vec![0.0, 1.0, 1.5, 1.75], vec![3, 3, 3, 3]);
        let h = HullPath::from_values(&p.k_grid, &p.m_max).unwrap();
        let s = select_shift(&p, &h);
        assert_eq!(s.tau_index, 3);
        assert!((s.tau_star - 0.3).abs() < 1e-15);
    }

    #[test]
    fn only_interior_vertices_vote() {
        // Hull K = [1, 2, 4], slopes [2, 0.5]: vertex K=2 gets 1.5, K=4 gets nothing.
        let p = profile(vec![1, 2, 3, 4], vec![0.0, 2.0, 1.0, 3.0], vec![0, 5, 7, 8]);
        let h = HullPath::from_values(&p.k_grid, &p.m_max).unwrap();
        let s = select_shift(&p, &h);
        assert_eq!(s.tau_index, 5);
        assert_eq!(s.selected_k, 2);
        assert_eq!(s.mass, vec![(5, 1.5)]);
    }

    #[test]
    fn single_vertex_falls_back_to_first_length() {
        let p = profile(vec![1, 2, 3], vec![3.0, 2.0, 1.0], vec![4, 1, 2]);
        let h = HullPath::from_values(&p.k_grid, &p.m_max).unwrap();
        let s = select_shift(&p, &h);
        assert_eq!((s.tau_index, s.selected_k), (4, 1));
    }

    #[test]
    fn capped_first_jump_votes_for_first_vertex() {
        let p = profile(vec![1, 2, 3, 4], vec![0.0, 2.0, 1.0, 3.0], vec![0, 5, 7, 8]);
        let h = HullPath::from_values(&p.k_grid, &p.m_max).unwrap();
        let s = select_shift_with(&p, &h, FirstJump::Cap(10.0));
        assert_eq!(s.tau_index, 0);
        assert_eq!(s.mass, vec![(0, 8.0), (5, 1.5)]);
    }

    #[test]
    fn ties_go_to_smallest_grid_index() {
        // Slopes [3, 2, 1]: vertices K=2 and K=3 each get 1.
        let p = profile(vec![1, 2, 3, 4], vec![0.0, 3.0, 5.0, 6.0], vec![0, 9, 4, 1]);
        let h = HullPath::from_values(&p.k_grid, &p.m_max).unwrap();
        assert_eq!(h.slopes, vec![3.0, 2.0, 1.0]);
        assert_eq!(select_shift(&p, &h).tau_index, 4);
    }
}
