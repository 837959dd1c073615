//! Simple undirected graphs as packed adjacency bit rows, plus the graph6
//! codec and the structural predicates the bound catalog needs.

use crate::error::{Error, Result};
use crate::matrix::{IntMatrix, RealMatrix};

/// Simple graph: symmetric 0/1 adjacency with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("graph order must be positive".into()));
        }
        let words_per_row = n.div_ceil(64);
        Ok(Graph {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::Argument(format!(
                "edge ({u},{v}) out of range for order {}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::Argument("loops are not allowed".into()));
        }
        self.bits[u * self.words_per_row + v / 64] |= 1u64 << (v % 64);
        self.bits[v * self.words_per_row + u / 64] |= 1u64 << (u % 64);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row_words(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row_words(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    pub fn is_regular(&self) -> bool {
        let d0 = self.degree(0);
        (1..self.n).all(|u| self.degree(u) == d0)
    }

    /// Number of common neighbors of `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.row_words(u)
            .iter()
            .zip(self.row_words(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n).expect("order already validated");
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.has_edge(u, v) {
                    g.add_edge(u, v).expect("in range");
                }
            }
        }
        g
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if !seen[v] && self.has_edge(u, v) {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Connected components as vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    if !seen[v] && self.has_edge(u, v) {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Proper 2-coloring per component, or None if an odd cycle exists.
    /// Each entry is (side0, side1) for that component.
    pub fn bipartition_by_component(&self) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
        let mut color = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if color[start] != usize::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            let mut side0 = vec![start];
            let mut side1 = Vec::new();
            while let Some(u) = queue.pop_front() {
                for v in 0..self.n {
                    if !self.has_edge(u, v) {
                        continue;
                    }
                    if color[v] == usize::MAX {
                        color[v] = 1 - color[u];
                        if color[v] == 0 {
                            side0.push(v);
                        } else {
                            side1.push(v);
                        }
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
            out.push((side0, side1));
        }
        Some(out)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition_by_component().is_some()
    }

    /// True when the graph is a disjoint union of complete graphs.
    pub fn is_union_of_cliques(&self) -> bool {
        self.components().iter().all(|comp| {
            comp.iter()
                .enumerate()
                .all(|(i, &u)| comp[i + 1..].iter().all(|&v| self.has_edge(u, v)))
        })
    }

    /// Complete multipartite test: the complement must be a disjoint union of
    /// cliques. Returns the class sizes (complement component sizes) if so.
    pub fn complete_multipartite_classes(&self) -> Option<Vec<usize>> {
        let comp = self.complement();
        if comp.is_union_of_cliques() {
            Some(comp.components().iter().map(|c| c.len()).collect())
        } else {
            None
        }
    }

    pub fn adjacency_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    pub fn adjacency_int(&self) -> IntMatrix {
        IntMatrix::from_fn(self.n, self.n, |i, j| i64::from(self.has_edge(i, j)))
    }

    /// Validates a 0/1 symmetric zero-diagonal matrix as a graph.
    pub fn from_adjacency(m: &RealMatrix) -> Result<Graph> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension("adjacency matrix must be square".into()));
        }
        let n = m.rows();
        let mut g = Graph::empty(n)?;
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::Domain(format!("nonzero diagonal entry at ({i},{i})")));
            }
            for j in (i + 1)..n {
                let a = m.get(i, j);
                let b = m.get(j, i);
                if a != b {
                    return Err(Error::Domain(format!("asymmetric entries at ({i},{j})")));
                }
                if a == 1.0 {
                    g.add_edge(i, j)?;
                } else if a != 0.0 {
                    return Err(Error::Domain(format!("entry at ({i},{j}) is not 0 or 1")));
                }
            }
        }
        Ok(g)
    }

    /// Fills this graph (order must match `n <= 8`) from a packed
    /// upper-triangle bitmask in column-major order.
    pub fn set_from_mask(&mut self, mask: u64) {
        debug_assert!(self.n <= 8 && self.words_per_row == 1);
        for w in self.bits.iter_mut() {
            *w = 0;
        }
        let mut bit = 0;
        for j in 1..self.n {
            for i in 0..j {
                if mask >> bit & 1 == 1 {
                    self.bits[i] |= 1 << j;
                    self.bits[j] |= 1 << i;
                }
                bit += 1;
            }
        }
    }

    pub fn from_mask(n: usize, mask: u64) -> Result<Graph> {
        if n > 8 {
            return Err(Error::Argument("mask construction supports order <= 8".into()));
        }
        let mut g = Graph::empty(n)?;
        g.set_from_mask(mask);
        Ok(g)
    }

    /// Upper-triangle mask (column-major), for orders <= 8.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.n <= 8);
        let mut mask = 0u64;
        let mut bit = 0;
        for j in 1..self.n {
            for i in 0..j {
                if self.has_edge(i, j) {
                    mask |= 1 << bit;
                }
                bit += 1;
            }
        }
        mask
    }
}

/// Bipartite double cover of a biadjacency matrix: vertices are the rows
/// followed by the columns, edges where the 0/1 entry is one.
pub fn biadjacency_embed(b: &IntMatrix) -> Result<Graph> {
    if !b.is_zero_one() {
        return Err(Error::Domain("biadjacency matrix must be 0/1".into()));
    }
    let (m, n) = (b.rows(), b.cols());
    let mut g = Graph::empty(m + n)?;
    for i in 0..m {
        for j in 0..n {
            if b.get(i, j) == 1 {
                g.add_edge(i, m + j)?;
            }
        }
    }
    Ok(g)
}

/// Decodes a labeled tree from a Pruefer sequence over `0..n`.
pub fn tree_from_pruefer(n: usize, seq: &[usize]) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Argument("trees need order >= 2".into()));
    }
    if seq.len() != n - 2 {
        return Err(Error::Argument("Pruefer sequence must have length n-2".into()));
    }
    let mut degree = vec![1usize; n];
    for &v in seq {
        if v >= n {
            return Err(Error::Argument("Pruefer entry out of range".into()));
        }
        degree[v] += 1;
    }
    let mut g = Graph::empty(n)?;
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &v in seq {
        g.add_edge(leaf, v)?;
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    // the largest label survives to the end of the removal order
    g.add_edge(leaf, n - 1)?;
    Ok(g)
}

const G6_MIN: u8 = 63;
const G6_MAX: u8 = 126;

/// Parses a graph6 string: byte n+63 for n <= 62, then upper-triangle bits in
/// 6-bit chunks (column-major), each chunk offset by 63.
pub fn parse_graph6(text: &str) -> Result<Graph> {
    let bytes = text.trim_end_matches(['\n', '\r']).as_bytes();
    if bytes.is_empty() {
        return Err(Error::parse(0, "empty graph6 string"));
    }
    let first = bytes[0];
    if first == 126 {
        return Err(Error::parse(0, "orders above 62 are not supported"));
    }
    if !(G6_MIN..G6_MAX).contains(&first) {
        return Err(Error::parse(0, format!("invalid order byte {first}")));
    }
    let n = (first - G6_MIN) as usize;
    if n == 0 {
        return Err(Error::parse(0, "graph order must be positive"));
    }
    let nbits = n * (n - 1) / 2;
    let nbytes = nbits.div_ceil(6);
    if bytes.len() != 1 + nbytes {
        return Err(Error::parse(
            bytes.len().min(1 + nbytes),
            format!("expected {} data bytes, got {}", nbytes, bytes.len() - 1),
        ));
    }
    let mut g = Graph::empty(n)?;
    let mut bit = 0usize;
    'outer: for j in 1..n {
        for i in 0..j {
            let byte = bytes[1 + bit / 6];
            if !(G6_MIN..=G6_MAX).contains(&byte) {
                return Err(Error::parse(1 + bit / 6, format!("invalid data byte {byte}")));
            }
            let chunk = byte - G6_MIN;
            if chunk >> (5 - bit % 6) & 1 == 1 {
                g.add_edge(i, j)?;
            }
            bit += 1;
            if bit == nbits {
                break 'outer;
            }
        }
    }
    // padding bits must be zero for a canonical encoding
    if nbits % 6 != 0 {
        let last = bytes[bytes.len() - 1] - G6_MIN;
        let pad = 6 - nbits % 6;
        if last & ((1 << pad) - 1) != 0 {
            return Err(Error::parse(bytes.len() - 1, "nonzero padding bits"));
        }
    }
    Ok(g)
}

pub fn emit_graph6(g: &Graph) -> String {
    let n = g.order();
    assert!(n <= 62, "graph6 emission supports order <= 62");
    let nbits = n * (n - 1) / 2;
    let mut out = vec![G6_MIN + n as u8];
    let mut chunk = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            chunk = (chunk << 1) | u8::from(g.has_edge(i, j));
            filled += 1;
            if filled == 6 {
                out.push(G6_MIN + chunk);
                chunk = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(G6_MIN + (chunk << (6 - filled)));
    }
    debug_assert_eq!(out.len(), 1 + nbits.div_ceil(6));
    String::from_utf8(out).expect("graph6 bytes are printable ASCII")
}

pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n).expect("positive order");
    for u in 0..n {
        for v in (u + 1)..n {
            g.add_edge(u, v).expect("in range");
        }
    }
    g
}

pub fn cycle_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n).expect("positive order");
    for u in 0..n {
        g.add_edge(u, (u + 1) % n).expect("in range");
    }
    g
}

pub fn path_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n).expect("positive order");
    for u in 0..n.saturating_sub(1) {
        g.add_edge(u, u + 1).expect("in range");
    }
    g
}

pub fn star_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n).expect("positive order");
    for v in 1..n {
        g.add_edge(0, v).expect("in range");
    }
    g
}

pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut g = Graph::empty(a + b).expect("positive order");
    for u in 0..a {
        for v in a..a + b {
            g.add_edge(u, v).expect("in range");
        }
    }
    g
}

/// Disjoint union on a fresh vertex set.
pub fn disjoint_union(g: &Graph, h: &Graph) -> Graph {
    let n = g.order() + h.order();
    let mut out = Graph::empty(n).expect("positive order");
    for u in 0..g.order() {
        for v in (u + 1)..g.order() {
            if g.has_edge(u, v) {
                out.add_edge(u, v).expect("in range");
            }
        }
    }
    for u in 0..h.order() {
        for v in (u + 1)..h.order() {
            if h.has_edge(u, v) {
                out.add_edge(g.order() + u, g.order() + v).expect("in range");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph6_known_strings() {
        let k1 = parse_graph6("@").unwrap();
        assert_eq!(k1.order(), 1);
        assert_eq!(k1.edge_count(), 0);

        let k2 = parse_graph6("A_").unwrap();
        assert_eq!(k2.order(), 2);
        assert!(k2.has_edge(0, 1));

        let g = parse_graph6("D?{").unwrap();
        assert_eq!(g.order(), 5);
        // D?{ is the star on five vertices: every edge touches vertex 4
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.degree(4), 4);
    }

    #[test]
    fn graph6_round_trip_all_order_4() {
        for mask in 0..64u64 {
            let g = Graph::from_mask(4, mask).unwrap();
            let s = emit_graph6(&g);
            let back = parse_graph6(&s).unwrap();
            assert_eq!(back, g);
            assert_eq!(emit_graph6(&back), s);
        }
    }

    #[test]
    fn graph6_rejects_malformed() {
        assert!(parse_graph6("").is_err());
        assert!(parse_graph6("D?").is_err()); // truncated
        assert!(parse_graph6("A\x1f").is_err()); // byte out of range
        // K_2 with a nonzero padding bit
        assert!(parse_graph6("A`").is_err());
    }

    #[test]
    fn complement_of_complete_is_empty() {
        let g = complete_graph(5).complement();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn pruefer_tree_counts() {
        // n = 3: sequences (a) with a in 0..3, all paths
        for a in 0..3 {
            let t = tree_from_pruefer(3, &[a]).unwrap();
            assert_eq!(t.edge_count(), 2);
            assert!(t.is_connected());
        }
        // star comes from the constant sequence
        let t = tree_from_pruefer(5, &[0, 0, 0]).unwrap();
        assert_eq!(t.degree(0), 4);
    }

    #[test]
    fn multipartite_detection() {
        assert_eq!(
            complete_bipartite(2, 3).complete_multipartite_classes(),
            Some(vec![2, 3])
        );
        assert!(path_graph(4).complete_multipartite_classes().is_none());
        let k4 = complete_graph(4);
        assert_eq!(k4.complete_multipartite_classes(), Some(vec![1, 1, 1, 1]));
    }

    #[test]
    fn biadjacency_embed_k23() {
        let j = IntMatrix::from_fn(2, 3, |_, _| 1);
        let g = biadjacency_embed(&j).unwrap();
        assert_eq!(g.order(), 5);
        assert_eq!(g.edge_count(), 6);
        assert!(g.is_bipartite());
    }

    #[test]
    fn mask_round_trip() {
        for mask in [0u64, 1, 37, 63] {
            let g = Graph::from_mask(4, mask).unwrap();
            assert_eq!(g.to_mask(), mask);
        }
    }
}
