//! Dense square matrices whose scalar operations run through a pluggable
//! arithmetic model, plus the norms used by the solver and its
//! instrumentation.
//!
//! The model quantizes every scalar operand on ingestion and every scalar
//! operation result; the `Exact` model is plain reference (`f64`)
//! arithmetic. Norms and the spectral-norm estimate always run at
//! reference precision: they are measurement, and measurement must not be
//! polluted by the model under study.

use crate::error::{Error, Result};
use crate::fixedpoint::FixedFormat;
use crate::rng::SplitMix64;
use crate::softfloat::FloatFormat;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

/// Governs every scalar operation in a computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithmeticModel {
    /// Reference-precision arithmetic, no quantization.
    Exact,
    /// Values and operation results quantized to a custom float format.
    Float(FloatFormat),
    /// Values and operation results on a saturating fixed-point grid.
    Fixed(FixedFormat),
}

impl ArithmeticModel {
    /// Quantizes a scalar entering a computation under this model.
    #[inline]
    pub fn ingest(&self, x: f64) -> Result<f64> {
        match self {
            ArithmeticModel::Exact => Ok(x),
            ArithmeticModel::Float(f) => Ok(f.quantize(x)),
            ArithmeticModel::Fixed(f) => f.quantize(x),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ArithmeticModel::Exact)
    }
}

impl fmt::Display for ArithmeticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticModel::Exact => write!(f, "exact"),
            ArithmeticModel::Float(fmt_) => fmt_.fmt(f),
            ArithmeticModel::Fixed(fmt_) => fmt_.fmt(f),
        }
    }
}

impl FromStr for ArithmeticModel {
    type Err = Error;

    /// Parses `exact`, a float format string or a fixed format string.
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ArithmeticModel::Exact);
        }
        if s.starts_with("fixed:") {
            return Ok(ArithmeticModel::Fixed(s.parse()?));
        }
        if s.starts_with("float:") || matches!(s, "half" | "single" | "double") {
            return Ok(ArithmeticModel::Float(s.parse()?));
        }
        Err(Error::InvalidFormat(format!(
            "unknown arithmetic model {s:?} (expected exact, half, single, double, \
             float:e<E>m<M> or fixed:i<I>f<F>)"
        )))
    }
}

/// Dense square real matrix, row-major, elements held at reference
/// precision. Approximation is applied through models, never through the
/// storage layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds an n-by-n matrix from a generator over (row, column).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch(row.len(), n));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n);
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, |i, j| self.data[j * n + i])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| self.data[i * n + j] == self.data[j * n + i]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Elementwise scaling at reference precision.
    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

fn check_same_dim(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(a.n, b.n));
    }
    Ok(())
}

fn check_finite(m: &Matrix) -> Result<()> {
    match m.data.iter().find(|x| !x.is_finite()) {
        Some(&x) => Err(Error::NonFinite(x)),
        None => Ok(()),
    }
}

/// Elementwise quantization of a matrix under a model. The exact model
/// returns the matrix unchanged; a fixed-point model rejects non-finite
/// elements (the computation has diverged beyond what the model can hold).
pub fn quantize_matrix(m: &Matrix, model: &ArithmeticModel) -> Result<Matrix> {
    match model {
        ArithmeticModel::Exact => Ok(m.clone()),
        ArithmeticModel::Float(f) => Ok(Matrix {
            n: m.n,
            data: m.data.iter().map(|&x| f.quantize(x)).collect(),
        }),
        ArithmeticModel::Fixed(f) => {
            let mut data = Vec::with_capacity(m.data.len());
            for &x in &m.data {
                data.push(f.quantize(x)?);
            }
            Ok(Matrix { n: m.n, data })
        }
    }
}

/// The shared multiply kernel. Operands must already be ingested under the
/// model that `q` implements; every partial product and every partial sum
/// is quantized, and per output element the accumulation order is
/// ascending k, so results are bit-identical for fixed inputs and model.
fn matmul_kernel(a: &Matrix, b: &Matrix, q: impl Fn(f64) -> f64) -> Matrix {
    let n = a.n;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let arow = &a.data[i * n..(i + 1) * n];
        for (k, &aik) in arow.iter().enumerate() {
            let brow = &b.data[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] = q(orow[j] + q(aik * brow[j]));
            }
        }
    }
    Matrix { n, data: out }
}

/// Matrix product under a model: `C[i][j]` folds `add(acc, mul(a, b))`
/// over ascending k, with operands quantized on ingestion.
pub fn matmul(a: &Matrix, b: &Matrix, model: &ArithmeticModel) -> Result<Matrix> {
    check_same_dim(a, b)?;
    match model {
        ArithmeticModel::Exact => Ok(matmul_kernel(a, b, |x| x)),
        ArithmeticModel::Float(f) => {
            let aq = quantize_matrix(a, model)?;
            let bq = quantize_matrix(b, model)?;
            Ok(matmul_kernel(&aq, &bq, |x| f.quantize(x)))
        }
        ArithmeticModel::Fixed(f) => {
            // ingestion is the only place a fixed model can fail: once on
            // the grid, saturation keeps every intermediate finite
            let aq = quantize_matrix(a, model)?;
            let bq = quantize_matrix(b, model)?;
            Ok(matmul_kernel(&aq, &bq, |x| f.quantize_finite(x)))
        }
    }
}

/// Elementwise `alpha*A + beta*B` under a model, with the scalars
/// quantized on ingestion like any other operand.
pub fn lincomb(
    alpha: f64,
    a: &Matrix,
    beta: f64,
    b: &Matrix,
    model: &ArithmeticModel,
) -> Result<Matrix> {
    check_same_dim(a, b)?;
    let qa = model.ingest(alpha)?;
    let qb = model.ingest(beta)?;
    let mut data = Vec::with_capacity(a.data.len());
    match model {
        ArithmeticModel::Exact => {
            for (&x, &y) in a.data.iter().zip(&b.data) {
                data.push(qa * x + qb * y);
            }
        }
        ArithmeticModel::Float(f) => {
            for (&x, &y) in a.data.iter().zip(&b.data) {
                let left = f.mul(f.quantize(x), qa);
                let right = f.mul(f.quantize(y), qb);
                data.push(f.add(left, right));
            }
        }
        ArithmeticModel::Fixed(f) => {
            for (&x, &y) in a.data.iter().zip(&b.data) {
                let left = f.quantize_finite(f.quantize(x)? * qa);
                let right = f.quantize_finite(f.quantize(y)? * qb);
                data.push(f.quantize_finite(left + right));
            }
        }
    }
    Ok(Matrix { n: a.n, data })
}

/// `alpha*M + beta*I` under a model, the affine building block of the
/// iteration update.
pub fn axpby_identity(alpha: f64, m: &Matrix, beta: f64, model: &ArithmeticModel) -> Result<Matrix> {
    lincomb(alpha, m, beta, &Matrix::identity(m.n), model)
}

/// Maximum column absolute sum, at reference precision.
pub fn norm_1(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    let n = m.n;
    let mut best = 0.0f64;
    for j in 0..n {
        let s: f64 = (0..n).map(|i| m.data[i * n + j].abs()).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// Maximum row absolute sum, at reference precision.
pub fn norm_inf(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    let mut best = 0.0f64;
    for row in m.data.chunks(m.n) {
        let s: f64 = row.iter().map(|x| x.abs()).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// Square root of the sum of squared elements, at reference precision.
pub fn norm_frobenius(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    Ok(m.data.iter().map(|x| x * x).sum::<f64>().sqrt())
}

fn matvec(m: &Matrix, v: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(m.data.chunks(m.n)) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

fn matvec_t(m: &Matrix, v: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (x, row) in v.iter().zip(m.data.chunks(m.n)) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * x;
        }
    }
}

/// Spectral norm (largest singular value) estimate by power iteration on
/// `M^T M` at reference precision, converged to a relative tolerance or
/// capped at `iters` steps. The start vector is a fixed seeded
/// pseudo-random vector so results are deterministic.
pub fn spectral_norm_est(m: &Matrix, iters: usize, tol: f64) -> Result<f64> {
    check_finite(m)?;
    let n = m.n;
    if n == 0 || m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let mut rng = SplitMix64::new(0x51ec_7ea1_u64);
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= vn;
    }
    let mut w = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        matvec(m, &v, &mut w);
        matvec_t(m, &w, &mut u);
        let new_lambda: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if un == 0.0 {
            lambda = new_lambda;
            break;
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / un;
        }
        if (new_lambda - lambda).abs() <= tol * new_lambda.abs() {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    Ok(lambda.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_model() -> ArithmeticModel {
        ArithmeticModel::Float(FloatFormat::half())
    }

    #[test]
    fn identity_quantizes_to_itself() {
        let i = Matrix::identity(3);
        assert_eq!(quantize_matrix(&i, &half_model()).unwrap(), i);
    }

    #[test]
    fn quantize_matrix_exact_is_bit_identical() {
        let m = Matrix::from_fn(3, |i, j| 0.1 * (i as f64) + 7.77 * (j as f64));
        assert_eq!(quantize_matrix(&m, &ArithmeticModel::Exact).unwrap(), m);
    }

    #[test]
    fn quantize_matrix_applies_scalar_rule() {
        let m = Matrix::from_rows(&[vec![1.0 / 3.0]]).unwrap();
        let model = ArithmeticModel::Float(FloatFormat::new(8, 2).unwrap());
        assert_eq!(quantize_matrix(&m, &model).unwrap().get(0, 0), 0.3125);
    }

    #[test]
    fn quantize_matrix_fixed_rejects_non_finite() {
        let m = Matrix::from_rows(&[vec![1.0, f64::INFINITY], vec![0.0, 1.0]]).unwrap();
        let model = ArithmeticModel::Fixed(FixedFormat::new(3, 4).unwrap());
        assert!(matches!(
            quantize_matrix(&m, &model),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn matmul_identity_returns_quantized_input() {
        let m = Matrix::from_fn(4, |i, j| 0.013 * (i * 4 + j) as f64);
        let i = Matrix::identity(4);
        let out = matmul(&m, &i, &half_model()).unwrap();
        assert_eq!(out, quantize_matrix(&m, &half_model()).unwrap());
    }

    #[test]
    fn matmul_exact_two_by_two() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let c = matmul(&a, &b, &ArithmeticModel::Exact).unwrap();
        assert_eq!(
            c,
            Matrix::from_rows(&[vec![19.0, 22.0], vec![43.0, 50.0]]).unwrap()
        );
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        assert!(matches!(
            matmul(&a, &b, &ArithmeticModel::Exact),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn lincomb_reduces_to_quantization_at_unit_scalars() {
        let m = Matrix::from_fn(3, |i, j| 0.1 + (i + 2 * j) as f64 * 0.07);
        let model = half_model();
        let out = axpby_identity(1.0, &m, 0.0, &model).unwrap();
        assert_eq!(out, quantize_matrix(&m, &model).unwrap());
        let id = axpby_identity(0.0, &m, 1.0, &model).unwrap();
        assert_eq!(id, Matrix::identity(3));
    }

    #[test]
    fn axpby_exact_hand_case() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let out = axpby_identity(2.0, &m, -1.0, &ArithmeticModel::Exact).unwrap();
        assert_eq!(
            out,
            Matrix::from_rows(&[vec![1.0, 4.0], vec![6.0, 7.0]]).unwrap()
        );
    }

    #[test]
    fn norms_of_identity() {
        let i = Matrix::identity(3);
        assert_eq!(norm_1(&i).unwrap(), 1.0);
        assert_eq!(norm_inf(&i).unwrap(), 1.0);
        assert_eq!(norm_frobenius(&i).unwrap(), 3.0f64.sqrt());
    }

    #[test]
    fn frobenius_three_four_five() {
        let m = Matrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(norm_frobenius(&m).unwrap(), 5.0);
    }

    #[test]
    fn norms_reject_non_finite() {
        let m = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(norm_1(&m).is_err());
        assert!(norm_inf(&m).is_err());
        assert!(norm_frobenius(&m).is_err());
        assert!(spectral_norm_est(&m, 10, 1e-6).is_err());
    }

    #[test]
    fn spectral_norm_diagonal_and_identity() {
        let d = Matrix::diagonal(&[3.0, 1.0]);
        let est = spectral_norm_est(&d, 1000, 1e-12).unwrap();
        assert!((est - 3.0).abs() < 1e-9, "est = {est}");
        let i = Matrix::identity(5);
        assert!((spectral_norm_est(&i, 1000, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(spectral_norm_est(&Matrix::zeros(4), 10, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn model_strings_round_trip() {
        for s in ["exact", "float:e11m10", "fixed:i13f18"] {
            let m: ArithmeticModel = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert_eq!(
            "half".parse::<ArithmeticModel>().unwrap(),
            ArithmeticModel::Float(FloatFormat::half())
        );
        assert!("banana".parse::<ArithmeticModel>().is_err());
    }
}
