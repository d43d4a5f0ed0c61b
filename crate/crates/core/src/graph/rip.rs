use super::chordal::is_subset;

/// Returns an ordering of `cliques` satisfying the running intersection
/// property, or `None` if no such ordering exists.
///
/// Uses ear removal: a clique whose intersection with the union of the other
/// remaining cliques lies inside a single other remaining clique can be
/// placed last. Ear removal is confluent, so the greedy choice (lowest index
/// first) decides the property. Cliques are sorted internally; the input need
/// not be.
pub fn rip_order(cliques: &[Vec<usize>]) -> Option<Vec<usize>> {
    let sets: Vec<Vec<usize>> = cliques
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    let mut remaining: Vec<usize> = (0..sets.len()).collect();
    let mut removed = Vec::with_capacity(sets.len());
    while remaining.len() > 1 {
        let ear = remaining.iter().position(|&i| {
            let others = remaining.iter().filter(|&&k| k != i);
            let mut shared: Vec<usize> =
                sets[i].iter().copied().filter(|v| others.clone().any(|&k| sets[k].binary_search(v).is_ok())).collect();
            shared.sort_unstable();
            remaining.iter().any(|&k| k != i && is_subset(&shared, &sets[k]))
        })?;
        removed.push(remaining.remove(ear));
    }
    removed.extend(remaining);
    removed.reverse();
    Some(removed)
}

/// Whether some ordering `I_1, ..., I_p` has, for every `j >= 2`,
/// `I_j ∩ (I_1 ∪ ... ∪ I_{j-1}) ⊆ I_k` for some `k < j`.
pub fn check_rip(cliques: &[Vec<usize>]) -> bool {
    rip_order(cliques).is_some()
}
