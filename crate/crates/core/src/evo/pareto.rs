use crate::objectives::ObjectivePair;

/// `a` is at least as good on both objectives and strictly better on one.
pub fn dominates(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.imputation_value >= b.imputation_value
        && a.cv_error <= b.cv_error
        && (a.imputation_value > b.imputation_value || a.cv_error < b.cv_error)
}

/// Front rank per point, 1 for the non-dominated set.
///
/// Equivalent to repeatedly peeling the non-dominated set, computed with
/// domination counts so the whole sort is `O(n²)`.
pub fn rank_fronts(points: &[ObjectivePair]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut level = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = level;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        level += 1;
    }
    rank
}
