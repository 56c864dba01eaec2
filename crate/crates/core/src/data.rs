use crate::error::{Result, ShapError};

/// Row-major `n x p` matrix of finite reals: instances to explain, or a
/// background sample for kernel costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    p: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_row_major(p: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(ShapError::InvalidParameter("dataset needs at least one column".into()));
        }
        if !values.len().is_multiple_of(p) {
            return Err(ShapError::ShapeMismatch(format!("{} values do not fill rows of width {p}", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(ShapError::NonFiniteInput { index: pos % p });
        }
        Ok(Dataset { p, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(p: usize, rows: &[R]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * p);
        for r in rows {
            let r = r.as_ref();
            if r.len() != p {
                return Err(ShapError::DimensionMismatch { expected: p, got: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::from_row_major(p, values)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_rows(&self) -> usize {
        self.values.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}
