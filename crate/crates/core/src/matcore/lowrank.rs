use crate::error::{Error, Result};
use crate::matcore::dense::{hcat, shape, DenseMatrix};

/// Default largest `n` for which an `n x n` iterate may be materialized.
pub const DESK_THRESHOLD: usize = 4096;

/// A matrix held as `V·Wᵀ` with `V`, `W` of shape `n x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    v: DenseMatrix,
    w: DenseMatrix,
    /// Widths of the column blocks produced by the most recent concatenation
    /// (a single entry after construction or compression).
    block_widths: Vec<usize>,
}

impl LowRankFactors {
    pub fn new(v: DenseMatrix, w: DenseMatrix) -> Result<Self> {
        if v.nrows() != w.nrows() || v.ncols() != w.ncols() {
            return Err(Error::dims(shape(&v), shape(&w)));
        }
        let block_widths = vec![v.ncols()];
        Ok(Self { v, w, block_widths })
    }

    /// Symmetric factors `V·Vᵀ`.
    pub fn symmetric(v: DenseMatrix) -> Self {
        let w = v.clone();
        Self::new(v, w).expect("identical shapes")
    }

    /// The zero matrix with zero columns.
    pub fn empty(n: usize) -> Self {
        Self::symmetric(DenseMatrix::zeros(n, 0))
    }

    /// Column-wise concatenation of matching `(V, W)` blocks.
    pub fn concat(blocks: &[(&DenseMatrix, &DenseMatrix)]) -> Result<Self> {
        let vs: Vec<&DenseMatrix> = blocks.iter().map(|b| b.0).collect();
        let ws: Vec<&DenseMatrix> = blocks.iter().map(|b| b.1).collect();
        for &(v, w) in blocks {
            if v.ncols() != w.ncols() || v.nrows() != w.nrows() {
                return Err(Error::dims(shape(v), shape(w)));
            }
        }
        let block_widths = vs.iter().map(|v| v.ncols()).collect();
        Ok(Self { v: hcat(&vs), w: hcat(&ws), block_widths })
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn width(&self) -> usize {
        self.v.ncols()
    }

    pub fn block_widths(&self) -> &[usize] {
        &self.block_widths
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.v, self.w)
    }

    /// `V·(Wᵀ·B)`, evaluated right to left so no `n x n` product forms.
    pub fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.nrows() != self.n() {
            return Err(Error::dims(format!("{} rows", self.n()), shape(b)));
        }
        Ok(&self.v * self.w.tr_mul(b))
    }

    /// `W·(Vᵀ·B)`, the transpose action.
    pub fn apply_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.nrows() != self.n() {
            return Err(Error::dims(format!("{} rows", self.n()), shape(b)));
        }
        Ok(&self.w * self.v.tr_mul(b))
    }

    /// Transposed representation `W·Vᵀ`.
    pub fn transposed(&self) -> Self {
        Self { v: self.w.clone(), w: self.v.clone(), block_widths: self.block_widths.clone() }
    }
}

/// Forms `V·Wᵀ`. Meant for `n` up to [`DESK_THRESHOLD`].
pub fn materialize(f: &LowRankFactors) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(f.n(), f.n());
    if f.width() > 0 {
        x.gemm(1.0, &f.v, &f.w.transpose(), 0.0);
    }
    x
}

/// Recompresses the factors through thin QR decompositions of `V` and `W`
/// and a truncated SVD of the small core `R_V·R_Wᵀ`.
///
/// The discarded singular values satisfy `‖σ_tail‖₂ ≤ tol·‖σ‖₂`, which is
/// exactly the Frobenius error of the truncation relative to `‖V·Wᵀ‖_F`.
/// With `tol = 0` only exactly-zero singular values are dropped.
pub fn compress_factors(f: &LowRankFactors, tol: f64) -> Result<LowRankFactors> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("compression tolerance must be >= 0, got {tol}")));
    }
    let n = f.n();
    if f.width() == 0 {
        return Ok(f.clone());
    }
    let qr_v = f.v.clone().qr();
    let qr_w = f.w.clone().qr();
    let core = qr_v.r() * qr_w.r().transpose();
    let svd = core.svd(true, true);
    let sigma = &svd.singular_values;
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let budget = tol * tol * total;

    // smallest rank whose discarded tail fits the budget
    let mut keep = sigma.len();
    let mut tail = 0.0;
    while keep > 0 {
        let next = tail + sigma[keep - 1] * sigma[keep - 1];
        if next > budget {
            break;
        }
        tail = next;
        keep -= 1;
    }
    let keep = keep.min(f.width());
    if keep == 0 {
        return Ok(LowRankFactors::empty(n));
    }

    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let mut left = qr_v.q() * u.columns(0, keep);
    for (j, mut col) in left.column_iter_mut().enumerate() {
        col *= sigma[j];
    }
    let right = qr_w.q() * vt.rows(0, keep).transpose();
    LowRankFactors::new(left, right)
}
