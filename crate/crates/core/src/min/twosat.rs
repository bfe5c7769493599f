//! 2-SAT by strongly connected components of the implication graph (Kosaraju).

use crate::cost::Cnf;

fn literal_node(lit: i32) -> usize {
    let var = lit.unsigned_abs() as usize - 1;
    if lit > 0 {
        2 * var
    } else {
        2 * var + 1
    }
}

/// A satisfying assignment (`true` = variable set) or `None` if unsatisfiable.
/// Clauses wider than two literals are not allowed.
pub fn solve(phi: &Cnf) -> Option<Vec<bool>> {
    let nodes = 2 * phi.num_vars();
    let mut graph = vec![Vec::new(); nodes];
    let mut reverse = vec![Vec::new(); nodes];
    let mut add = |from: usize, to: usize| {
        graph[from].push(to);
        reverse[to].push(from);
    };
    for clause in phi.clauses() {
        match *clause.as_slice() {
            [a] => add(literal_node(a) ^ 1, literal_node(a)),
            [a, b] => {
                add(literal_node(a) ^ 1, literal_node(b));
                add(literal_node(b) ^ 1, literal_node(a));
            }
            _ => panic!("2-SAT solver given a clause of width {}", clause.len()),
        }
    }

    // first pass: finishing order
    let mut visited = vec![false; nodes];
    let mut order = Vec::with_capacity(nodes);
    for start in 0..nodes {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((node, edge)) = stack.last_mut() {
            if let Some(&next) = graph[*node].get(*edge) {
                *edge += 1;
                if !visited[next] {
                    visited[next] = true;
                    stack.push((next, 0));
                }
            } else {
                order.push(*node);
                stack.pop();
            }
        }
    }

    // second pass on the reverse graph; components come out in topological order
    let mut component = vec![usize::MAX; nodes];
    let mut next_id = 0;
    for &start in order.iter().rev() {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = next_id;
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            for &prev in &reverse[node] {
                if component[prev] == usize::MAX {
                    component[prev] = next_id;
                    stack.push(prev);
                }
            }
        }
        next_id += 1;
    }

    (0..phi.num_vars())
        .map(|v| {
            let (t, f) = (component[2 * v], component[2 * v + 1]);
            if t == f {
                None
            } else {
                Some(t > f)
            }
        })
        .collect()
}
