use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Hard cluster assignment for one side of the network.
///
/// Labels are stored zero-based (`0..k`); files and the C API use one-based labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Membership {
    labels: Vec<usize>,
    k: usize,
}

impl Membership {
    /// Checks that every label is below `k`. Empty clusters are allowed here;
    /// use [`Membership::check_nonempty`] where the model requires them filled.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Dimension("membership needs at least one cluster".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Dimension(format!("label {bad} out of range 0..{k}")));
        }
        Ok(Membership { labels, k })
    }

    /// Infers `k` as one more than the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(1, |m| m + 1);
        Membership::new(labels, k)
    }

    /// Accepts one-based labels as found in label files.
    pub fn from_one_based(labels: &[usize], k: Option<usize>) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Dimension("one-based labels must be >= 1".into()));
        }
        let zero: Vec<usize> = labels.iter().map(|l| l - 1).collect();
        match k {
            Some(k) => Membership::new(zero, k),
            None => Membership::from_labels(zero),
        }
    }

    /// Decodes a one-hot matrix.
    pub fn from_one_hot(z: &Matrix) -> Result<Self> {
        let mut labels = Vec::with_capacity(z.rows());
        for (i, row) in z.row_iter().enumerate() {
            let ones: Vec<usize> = (0..row.len()).filter(|&j| row[j] == 1.0).collect();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones.len() != 1 || zeros + 1 != row.len() {
                return Err(Error::Validation(vec![format!("row {i} of Z is not one-hot")]));
            }
            labels.push(ones[0]);
        }
        Membership::new(labels, z.cols())
    }

    pub fn to_one_hot(&self) -> Matrix {
        let mut z = Matrix::zeros(self.labels.len(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            z[(i, l)] = 1.0;
        }
        z
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn check_nonempty(&self) -> Result<()> {
        let empty: Vec<String> = self
            .sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(c, _)| format!("cluster {} is empty", c + 1))
            .collect();
        if empty.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(empty))
        }
    }

    /// Same labels with a larger cluster count (padding with empty clusters).
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Membership::new(self.labels.clone(), k)
    }

    /// Applies `perm[old] = new` to every label.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::Dimension("permutation length must equal k".into()));
        }
        Membership::new(self.labels.iter().map(|&l| perm[l]).collect(), self.k)
    }
}
