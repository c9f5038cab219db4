//! Reverse Cuthill-McKee node ordering to keep the stiffness band narrow.

use std::collections::VecDeque;

pub(crate) fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // start each component from a pseudo-peripheral node of minimum degree
    while let Some(seed) = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (adj[v].len(), v)) {
        let start = pseudo_peripheral(adj, seed, &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, blocked: &[bool]) -> usize {
    let mut current = seed;
    let mut best_depth = 0;
    for _ in 0..8 {
        let (far, depth) = farthest(adj, current, blocked);
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        current = far;
    }
    current
}

fn farthest(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d > last.1 || (d == last.1 && adj[v].len() < adj[last.0].len()) {
            last = (v, d);
        }
        for &w in &adj[v] {
            if !blocked[w] && dist[w] == usize::MAX {
                dist[w] = d + 1;
                queue.push_back(w);
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_covers_all_nodes() {
        let adj = vec![vec![3], vec![2], vec![1, 3], vec![0, 2], vec![]];
        let mut order = reverse_cuthill_mckee(&adj);
        order.sort_unstable();
        assert_eq!(order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn path_graph_gets_unit_bandwidth() {
        // path 0-4-1-3-2 numbered badly
        let edges = [(0, 4), (4, 1), (1, 3), (3, 2)];
        let mut adj = vec![Vec::new(); 5];
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let order = reverse_cuthill_mckee(&adj);
        let mut pos = [0; 5];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let bw = edges.iter().map(|&(a, b)| pos[a].abs_diff(pos[b])).max().unwrap();
        assert_eq!(bw, 1);
    }
}
