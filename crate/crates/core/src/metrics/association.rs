/// Largest timestamp difference (seconds) for two samples to be paired.
pub const ASSOCIATION_TOLERANCE_S: f64 = 0.02;

/// Pairs samples of two sorted timestamp lists. Candidate pairs within
/// `tolerance` are accepted in order of increasing `|Δt|`, each index used
/// at most once. The result is sorted by the index into `a`.
pub fn associate(a: &[f64], b: &[f64], tolerance: f64) -> Vec<(usize, usize)> {
    let mut candidates = Vec::new();
    let mut start = 0;
    for (i, &ta) in a.iter().enumerate() {
        while start < b.len() && b[start] < ta - tolerance {
            start += 1;
        }
        for (j, &tb) in b.iter().enumerate().skip(start) {
            if tb > ta + tolerance {
                break;
            }
            candidates.push(((ta - tb).abs(), i, j));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lists_pair_by_index() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.033).collect();
        let p = associate(&t, &t, ASSOCIATION_TOLERANCE_S);
        assert_eq!(p, (0..10).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn outside_tolerance_is_unmatched() {
        let p = associate(&[0.0, 1.0], &[0.05, 1.01], ASSOCIATION_TOLERANCE_S);
        assert_eq!(p, vec![(1, 1)]);
    }

    #[test]
    fn closest_candidate_wins_and_indices_are_unique() {
        // b[0] is near both a[0] and a[1]; it goes to the closer a[1]
        let p = associate(&[0.0, 0.012], &[0.011], ASSOCIATION_TOLERANCE_S);
        assert_eq!(p, vec![(1, 0)]);
    }
}
