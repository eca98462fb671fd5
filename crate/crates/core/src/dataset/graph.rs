use crate::error::{Error, Result};
use crate::numeric::{sq_dist, Matrix};

/// Symmetric 0/1 adjacency over target training points, zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    /// Sorted neighbour lists.
    adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn empty(n: usize) -> Self {
        NeighborGraph { adjacency: vec![Vec::new(); n] }
    }

    /// Undirected graph from an edge list. Self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) outside {n} nodes")));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop on node {i}")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(NeighborGraph { adjacency })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.len();
        let mut m = vec![vec![0u8; n]; n];
        for (i, list) in self.adjacency.iter().enumerate() {
            for &j in list {
                m[i][j] = 1;
            }
        }
        m
    }
}

/// k-nearest-neighbour graph by Euclidean distance between the column means
/// of each point's instance matrix, symmetrised by union. Distance ties go to
/// the lower index.
pub fn build_neighbor_graph(points: &[&Matrix], k: usize) -> Result<NeighborGraph> {
    let n = points.len();
    if k >= n && !(k == 0 && n == 0) {
        return Err(Error::InvalidArgument(format!("k = {k} must be below the point count {n}")));
    }
    let means: Vec<Vec<f64>> = points.iter().map(|x| x.column_mean()).collect();
    let mut edges = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sq_dist(&means[i], &means[j]), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.extend(others.iter().take(k).map(|&(_, j)| (i, j)));
    }
    NeighborGraph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rand_uniform, Rng};

    fn scalar_points(values: &[f64]) -> Vec<Matrix> {
        values.iter().map(|&v| Matrix::from_rows(&[vec![v, v]]).unwrap()).collect()
    }

    #[test]
    fn k_zero_is_empty() {
        let pts = scalar_points(&[0.0, 1.0, 2.0]);
        let refs: Vec<&Matrix> = pts.iter().collect();
        assert_eq!(build_neighbor_graph(&refs, 0).unwrap().edge_count(), 0);
        assert!(build_neighbor_graph(&refs, 3).is_err());
    }

    #[test]
    fn collinear_points_match_exhaustive_oracle() {
        let values = [0.0, 1.0, 3.0];
        let pts = scalar_points(&values);
        let refs: Vec<&Matrix> = pts.iter().collect();
        let g = build_neighbor_graph(&refs, 1).unwrap();

        // nearest other point by brute force over all pairs
        let mut oracle = vec![vec![0u8; 3]; 3];
        for i in 0..3 {
            let mut best = None;
            for j in 0..3 {
                if j == i {
                    continue;
                }
                let d = (values[i] - values[j]).abs();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            let (_, j) = best.unwrap();
            oracle[i][j] = 1;
            oracle[j][i] = 1;
        }
        assert_eq!(g.to_dense(), oracle);
        assert!(g.contains(0, 1) && g.contains(1, 2) && !g.contains(0, 2));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let pts = scalar_points(&[0.0, -1.0, 1.0]);
        let refs: Vec<&Matrix> = pts.iter().collect();
        let g = build_neighbor_graph(&refs, 1).unwrap();
        assert!(g.contains(0, 1));
        assert!(!g.contains(1, 2));
    }

    #[test]
    fn symmetric_with_zero_diagonal() {
        let mut rng = Rng::new(1);
        let pts: Vec<Matrix> = (0..15).map(|_| rand_uniform(&mut rng, 3, 4, -1.0, 1.0).unwrap()).collect();
        let refs: Vec<&Matrix> = pts.iter().collect();
        let g = build_neighbor_graph(&refs, 4).unwrap();
        let m = g.to_dense();
        for i in 0..15 {
            assert_eq!(m[i][i], 0);
            assert!(g.neighbors(i).len() >= 4);
            for j in 0..15 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert_eq!(g, build_neighbor_graph(&refs, 4).unwrap());
    }

    #[test]
    fn edge_list_validation() {
        assert!(NeighborGraph::from_edges(2, &[(0, 0)]).is_err());
        assert!(NeighborGraph::from_edges(2, &[(0, 2)]).is_err());
        let g = NeighborGraph::from_edges(3, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }
}
