//! Strongly connected components (iterative Tarjan) and irreducibility tests.

use nalgebra::DMatrix;

use crate::model::Edge;

/// Strongly connected components of a digraph given as successor lists.
///
/// Components are emitted in reverse topological order of the condensation.
pub fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// True iff the digraph on `n` nodes is a single strongly connected component.
///
/// Edge `(i, j, w)` is the arc `j -> i`; direction does not matter for the
/// answer but is kept faithful.
pub fn strongly_connected(n: usize, edges: &[Edge]) -> bool {
    if n == 0 {
        return false;
    }
    let mut succ = vec![Vec::new(); n];
    for e in edges {
        if e.weight > 0.0 {
            succ[e.source].push(e.target);
        }
    }
    strongly_connected_components(&succ).len() == 1
}

/// Irreducibility of a nonnegative matrix: its support graph (an arc `j -> i`
/// for every `m_ij > 0`) is strongly connected. A 1x1 matrix counts as
/// irreducible.
pub fn is_irreducible(m: &DMatrix<f64>) -> bool {
    m.nrows() > 0 && support_components(m).len() == 1
}

/// Strongly connected components of the support graph of `m`, each sorted.
/// In this order of blocks `m` is block triangular.
pub fn support_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut succ = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] > 0.0 {
                succ[j].push(i);
            }
        }
    }
    let mut comps = strongly_connected_components(&succ);
    for c in &mut comps {
        c.sort_unstable();
    }
    comps
}
