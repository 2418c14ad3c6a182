//! Segmentation metrics and majority-vote instance labels.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("confusion matrix needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("confusion matrix has {got} cells, expected {expected}")]
    BadMatrixSize { got: usize, expected: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("chance agreement is 1; kappa is undefined")]
    DegenerateAgreement,
    #[error("instance has no labeled pixels")]
    EmptyInstance,
    #[error("label {label} outside 0..{k}")]
    LabelOutOfRange { label: usize, k: usize },
}

/// A dense row-major label grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<u32>,
}

impl LabelGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<u32>) -> Self {
        assert_eq!(rows * cols, cells.len(), "grid cell count");
        Self { rows, cols, cells }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    /// Neither prediction nor truth contains foreground. Precision, recall,
    /// F1 and IoU are all reported as 1 in this case.
    pub fn is_empty_vs_empty(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }

    pub fn precision<T: Scalar>(&self) -> T {
        ratio_or(self.tp, self.tp + self.fp, self.fn_ == 0)
    }

    pub fn recall<T: Scalar>(&self) -> T {
        ratio_or(self.tp, self.tp + self.fn_, self.fp == 0)
    }

    pub fn f1<T: Scalar>(&self) -> T {
        if self.is_empty_vs_empty() {
            return T::one();
        }
        let p: T = self.precision();
        let r: T = self.recall();
        if p + r == T::zero() {
            T::zero()
        } else {
            T::of(2.0) * p * r / (p + r)
        }
    }

    pub fn iou<T: Scalar>(&self) -> T {
        ratio_or(self.tp, self.tp + self.fp + self.fn_, true)
    }
}

fn ratio_or<T: Scalar>(num: u64, den: u64, empty_is_perfect: bool) -> T {
    if den == 0 {
        if empty_is_perfect {
            T::one()
        } else {
            T::zero()
        }
    } else {
        T::of(num as f64) / T::of(den as f64)
    }
}

/// Per-pixel tallies with label 1 as foreground (any non-zero counts as 1).
pub fn confusion_binary(pred: &LabelGrid, truth: &LabelGrid) -> Result<BinaryCounts, MetricsError> {
    if pred.shape() != truth.shape() {
        return Err(MetricsError::ShapeMismatch(pred.shape(), truth.shape()));
    }
    let mut c = BinaryCounts::default();
    for (&p, &t) in pred.cells.iter().zip(&truth.cells) {
        match (p != 0, t != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `k × k` counts, rows = truth, columns = prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize, counts: Vec<u64>) -> Result<Self, MetricsError> {
        if k < 2 {
            return Err(MetricsError::TooFewClasses(k));
        }
        if counts.len() != k * k {
            return Err(MetricsError::BadMatrixSize {
                got: counts.len(),
                expected: k * k,
            });
        }
        Ok(Self { k, counts })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, MetricsError> {
        Self::new(rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn zeros(k: usize) -> Result<Self, MetricsError> {
        Self::new(k, vec![0; k * k])
    }

    /// Tallies two label grids holding class indices `0..k`.
    pub fn from_grids(k: usize, pred: &LabelGrid, truth: &LabelGrid) -> Result<Self, MetricsError> {
        if pred.shape() != truth.shape() {
            return Err(MetricsError::ShapeMismatch(pred.shape(), truth.shape()));
        }
        let mut m = Self::zeros(k)?;
        for (&p, &t) in pred.cells.iter().zip(&truth.cells) {
            let (p, t) = (p as usize, t as usize);
            for label in [p, t] {
                if label >= k {
                    return Err(MetricsError::LabelOutOfRange { label, k });
                }
            }
            m.counts[t * k + p] += 1;
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i * self.k..(i + 1) * self.k].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.k).map(|i| self.get(i, j)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.k).all(|i| (0..self.k).all(|j| i == j || self.get(i, j) == 0))
    }

    /// Observed agreement, `trace / N`.
    pub fn observed_agreement<T: Scalar>(&self) -> Result<T, MetricsError> {
        let n = self.total();
        if n == 0 {
            return Err(MetricsError::EmptyMatrix);
        }
        let diag: u64 = (0..self.k).map(|i| self.get(i, i)).sum();
        Ok(T::of(diag as f64) / T::of(n as f64))
    }

    /// Chance agreement from the marginal products, `Σ row_i·col_i / N²`.
    pub fn chance_agreement<T: Scalar>(&self) -> Result<T, MetricsError> {
        let n = self.total();
        if n == 0 {
            return Err(MetricsError::EmptyMatrix);
        }
        let n = T::of(n as f64);
        let sum: T = (0..self.k)
            .map(|i| T::of(self.row_sum(i) as f64) / n * (T::of(self.col_sum(i) as f64) / n))
            .sum();
        Ok(sum)
    }
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
pub fn kappa<T: Scalar>(m: &ConfusionMatrix) -> Result<T, MetricsError> {
    let po: T = m.observed_agreement()?;
    let pe: T = m.chance_agreement()?;
    if pe >= T::one() {
        return Err(MetricsError::DegenerateAgreement);
    }
    Ok((po - pe) / (T::one() - pe))
}

/// Pixel counts per class for one building instance, indexed by class
/// ordinal in the declared class order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PixelClassCounts {
    pub counts: Vec<u64>,
}

impl PixelClassCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn add(&mut self, class: usize, count: u64) {
        if self.counts.len() <= class {
            self.counts.resize(class + 1, 0);
        }
        self.counts[class] += count;
    }
}

/// Most frequent class ordinal; ties go to the lower ordinal.
pub fn resolve_instance_label(counts: &PixelClassCounts) -> Result<usize, MetricsError> {
    let mut best: Option<(usize, u64)> = None;
    for (class, &c) in counts.counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((class, c));
        }
    }
    best.map(|(class, _)| class)
        .ok_or(MetricsError::EmptyInstance)
}
