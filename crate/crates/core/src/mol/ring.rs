//! Ring bond perception by bridge detection.

/// Flags every bond that lies on a cycle, i.e. every bond that is not a bridge.
///
/// Iterative Tarjan low-link over each connected component.
pub(crate) fn ring_bonds(n: usize, adjacency: &[Vec<(usize, usize)>], bond_count: usize) -> Vec<bool> {
    let mut in_ring = vec![true; bond_count];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    // (atom, bond used to enter it, next adjacency slot)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (u, parent_bond, ref mut slot)) = stack.last_mut() {
            if *slot < adjacency[u].len() {
                let (v, b) = adjacency[u][*slot];
                *slot += 1;
                if b == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        in_ring[parent_bond] = false;
                    }
                }
            }
        }
    }
    in_ring
}
