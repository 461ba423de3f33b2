use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Overlapping windows of one observed series.
    Observed,
    /// Independent draws from the block distribution.
    Simulated,
}

/// Row-major matrix of `p`-dimensional blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    data: Vec<f64>,
    p: usize,
    kind: BlockKind,
}

impl BlockSet {
    /// Wrap row-major `data` with `p` columns.
    pub fn from_rows(data: Vec<f64>, p: usize, kind: BlockKind) -> Result<Self> {
        if p == 0 {
            return Err(Error::Dimension("block length p must be positive".into()));
        }
        if data.len() % p != 0 {
            return Err(Error::Dimension(format!(
                "{} values do not form rows of length {p}",
                data.len()
            )));
        }
        Ok(Self { data, p, kind })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.p..(j + 1) * self.p]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Overlapping length-`p` windows `(x_j, …, x_{j+p-1})`, `j = 0..T-p`.
pub fn make_blocks(series: &[f64], p: usize) -> Result<BlockSet> {
    if p == 0 {
        return Err(Error::Dimension("block length p must be positive".into()));
    }
    if series.len() < p {
        return Err(Error::Dimension(format!(
            "series of length {} is shorter than the block length {p}",
            series.len()
        )));
    }
    let n = series.len() - p + 1;
    let mut data = Vec::with_capacity(n * p);
    for window in series.windows(p) {
        data.extend_from_slice(window);
    }
    BlockSet::from_rows(data, p, BlockKind::Observed)
}

/// Distinct rows with multiplicities, in lexicographic order.
///
/// Count data produce many repeated blocks; every block-sum in this crate is a
/// weighted sum over the distinct rows, which is exact and far cheaper.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompactBlocks {
    pub rows: Vec<f64>,
    pub counts: Vec<f64>,
    pub p: usize,
    pub total: f64,
}

impl CompactBlocks {
    pub fn from_block_set(blocks: &BlockSet) -> Self {
        Self::from_flat(blocks.as_slice(), blocks.p())
    }

    pub fn from_flat(data: &[f64], p: usize) -> Self {
        let n = data.len() / p;
        let mut order: Vec<usize> = (0..n).collect();
        let row = |j: usize| &data[j * p..(j + 1) * p];
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut rows = Vec::with_capacity(data.len());
        let mut counts: Vec<f64> = Vec::with_capacity(n);
        let mut last: Option<usize> = None;
        for j in order {
            match last {
                Some(prev) if row(prev) == row(j) => {
                    *counts.last_mut().unwrap() += 1.0;
                }
                _ => {
                    rows.extend_from_slice(row(j));
                    counts.push(1.0);
                    last = Some(j);
                }
            }
        }
        Self {
            rows,
            counts,
            p,
            total: n as f64,
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.p..(j + 1) * self.p]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_windows() {
        let b = make_blocks(&[1.0, 2.0, 3.0, 4.0], 3).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(b.row(1), &[2.0, 3.0, 4.0]);
        assert_eq!(b.kind(), BlockKind::Observed);
    }

    #[test]
    fn series_of_length_p_gives_one_row() {
        let s = [0.5, -1.0, 2.0];
        let b = make_blocks(&s, 3).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.row(0), &s);
    }

    #[test]
    fn single_value_p1() {
        let b = make_blocks(&[5.0], 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.row(0), &[5.0]);
    }

    #[test]
    fn too_short_is_dimension_error() {
        assert!(matches!(make_blocks(&[1.0, 2.0], 3), Err(Error::Dimension(_))));
        assert!(matches!(make_blocks(&[1.0], 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn compaction_merges_equal_rows() {
        let data = [1.0, 0.0, 2.0, 1.0, 1.0, 0.0, 2.0, 1.0, 0.0, 0.0];
        let c = CompactBlocks::from_flat(&data, 2);
        assert_eq!(c.distinct(), 3);
        assert_eq!(c.total, 5.0);
        assert_eq!(c.counts.iter().sum::<f64>(), 5.0);
        assert_eq!(c.row(0), &[0.0, 0.0]);
        assert_eq!(c.counts[1], 2.0);
    }
}
