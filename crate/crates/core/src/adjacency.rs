use std::fmt::Write as _;
use std::io::{self, Write};

/// How the entries of an [`AdjacencyMatrix`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Binary,
    SlopeWeighted,
}

/// Dense symmetric `n x n` adjacency matrix of an undirected graph, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    kind: MatrixKind,
    weights: Vec<f64>,
}

impl AdjacencyMatrix {
    pub fn zeros(n: usize, kind: MatrixKind) -> Self {
        Self {
            n,
            kind,
            weights: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub(crate) fn set_symmetric(&mut self, i: usize, j: usize, w: f64) {
        debug_assert_ne!(i, j);
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != 0.0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    ///
    /// For a slope-weighted matrix this lists nonzero entries only, so a
    /// zero-slope edge is not reported.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().filter(|w| **w != 0.0).count())
            .sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Writes the matrix as CSV: one line per row, `0`/`1` for binary
    /// matrices and shortest round-trip decimals for weighted ones.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut line = String::with_capacity(self.n * 2);
        for i in 0..self.n {
            line.clear();
            for (j, w) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                match self.kind {
                    MatrixKind::Binary => line.push(if *w != 0.0 { '1' } else { '0' }),
                    MatrixKind::SlopeWeighted => {
                        let _ = write!(line, "{w}");
                    }
                }
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}
