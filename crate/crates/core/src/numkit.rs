//! Validated complex matrices and the spectral predicates the extension
//! constructions are built from: rank, pseudo-inverse, PSD square root and
//! the Loewner order.
//!
//! All decompositions are deterministic for a fixed input. Eigenpairs are
//! ordered by descending eigenvalue and every eigenvector (or left singular
//! vector) is rotated so that its first non-negligible component is real and
//! positive.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{ExtError, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Per-call numerical tolerances.
///
/// `rank` is the relative singular-value cutoff; when `None` the cutoff for an
/// `r × c` matrix is `1e-10 · max(r, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: Option<f64>,
    pub psd: f64,
    pub herm: f64,
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: None,
            psd: 1e-8,
            herm: 1e-10,
            eq: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank: Option<f64>, psd: f64, herm: f64, eq: f64) -> Result<Self> {
        let tol = Self {
            rank,
            psd,
            herm,
            eq,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("rank", self.rank.unwrap_or(0.0)),
            ("psd", self.psd),
            ("herm", self.herm),
            ("eq", self.eq),
        ];
        for (name, value) in named {
            if !value.is_finite() || value < 0.0 {
                return Err(ExtError::InvalidTolerance(format!(
                    "{name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Relative singular-value cutoff for a matrix of the given shape.
    pub fn rank_factor(&self, rows: usize, cols: usize) -> f64 {
        self.rank
            .unwrap_or_else(|| 1e-10 * rows.max(cols).max(1) as f64)
    }

    pub fn with_eq(mut self, eq: f64) -> Self {
        self.eq = eq;
        self
    }

    pub fn with_psd(mut self, psd: f64) -> Self {
        self.psd = psd;
        self
    }
}

// ---------------------------------------------------------------------------
// Validated matrix types
// ---------------------------------------------------------------------------

/// Dense complex matrix with finite entries. Zero-sized shapes are allowed so
/// that empty domains (`n × 0` bases) need no special casing.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self(m))
        } else {
            Err(ExtError::NonFinite)
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(CMat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(ExtError::DimensionMismatch(
                "rows have different lengths".into(),
            ));
        }
        Self::new(CMat::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Builds a real matrix from row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(ExtError::DimensionMismatch(
                "rows have different lengths".into(),
            ));
        }
        Self::new(CMat::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }
}

impl Deref for ComplexMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// Square matrix stored exactly as `(X + X†)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat, tol: &Tolerances) -> Result<Self> {
        hermitize(&ComplexMatrix::new(m)?, tol)
    }

    /// Symmetrizes without checking how far `m` is from hermitian. Only for
    /// matrices that are hermitian by construction.
    pub(crate) fn symmetrized(m: &CMat) -> Self {
        Self((m + m.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn from_real_rows(rows: &[&[f64]], tol: &Tolerances) -> Result<Self> {
        hermitize(&ComplexMatrix::from_real_rows(rows)?, tol)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.0)
    }
}

impl Deref for HermitianMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// Hermitian matrix whose spectrum is nonnegative up to `τ_psd·(1+λ_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix(HermitianMatrix);

impl PsdMatrix {
    pub fn new(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = h.eigen();
        check_psd_spectrum(&eig.values, tol)?;
        Ok(Self(h))
    }

    pub fn from_matrix(m: CMat, tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::new(m, tol)?, tol)
    }

    pub fn from_real_rows(rows: &[&[f64]], tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows, tol)?, tol)
    }

    pub fn identity(n: usize) -> Self {
        Self(HermitianMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(HermitianMatrix::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMat {
        self.0.as_matrix()
    }

    pub fn into_inner(self) -> CMat {
        self.0.into_inner()
    }
}

impl Deref for PsdMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        self.0.as_matrix()
    }
}

fn check_psd_spectrum(values: &[f64], tol: &Tolerances) -> Result<()> {
    let (Some(&max), Some(&min)) = (values.first(), values.last()) else {
        return Ok(());
    };
    if min < -tol.psd * (1.0 + max.max(0.0)) {
        return Err(ExtError::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Decompositions
// ---------------------------------------------------------------------------

/// Eigendecomposition of a hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    /// `V · diag(f(λ)) · V†`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = C64::new(f(lambda), 0.0);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Rotates `v` so that its first non-negligible entry is real positive.
fn normalize_phase(mut v: nalgebra::DVectorViewMut<'_, C64>) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Deterministic eigendecomposition of the hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        normalize_phase(vectors.column_mut(dst));
    }
    HermitianEigen { values, vectors }
}

/// Thin SVD `M = U Σ V†` with singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

/// Computed from the eigendecomposition of `[[0, M], [M†, 0]]`, whose
/// eigenpairs are `±σ` with vectors `[u; ±v]/√2`.
pub fn svd(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    let p = r.min(c);
    if p == 0 {
        return Svd {
            u: CMat::zeros(r, 0),
            singular_values: Vec::new(),
            v: CMat::zeros(c, 0),
        };
    }
    let mut aug = CMat::zeros(r + c, r + c);
    aug.view_mut((0, r), (r, c)).copy_from(m);
    aug.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let eig = hermitian_eigen(&aug);

    let mut u = CMat::zeros(r, p);
    let mut v = CMat::zeros(c, p);
    let mut singular_values = Vec::with_capacity(p);
    let mut complete_from = p;
    for j in 0..p {
        let w = eig.vectors.column(j);
        let (mut uj, mut vj) = (w.rows(0, r).into_owned(), w.rows(r, c).into_owned());
        let (nu, nv) = (uj.norm(), vj.norm());
        if eig.values[j] <= 0.0 || nu < 0.1 || nv < 0.1 {
            complete_from = j;
            break;
        }
        uj /= C64::new(nu, 0.0);
        vj /= C64::new(nv, 0.0);
        let scale = uj.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(pivot) = uj.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
            let phase = pivot.conj() / pivot.norm();
            uj *= phase;
            vj *= phase;
        }
        u.set_column(j, &uj);
        v.set_column(j, &vj);
        singular_values.push(eig.values[j]);
    }
    if complete_from < p {
        let fill = |basis: &mut CMat, n: usize| {
            let known = basis.columns(0, complete_from).into_owned();
            let rest = CMat::identity(n, n) - &known * known.adjoint();
            let comp = hermitian_eigen(&rest);
            for j in complete_from..p {
                basis.set_column(j, &comp.vectors.column(j - complete_from));
            }
        };
        fill(&mut u, r);
        fill(&mut v, c);
        singular_values.extend((complete_from..p).map(|j| eig.values[j].max(0.0)));
    }
    Svd {
        u,
        singular_values,
        v,
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd(m).singular_values
}

/// Largest singular value, 0 for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn numerical_rank(m: &CMat, tol: &Tolerances) -> usize {
    let factor = tol.rank_factor(m.nrows(), m.ncols());
    rank_above(&singular_values(m), 0.0, factor)
}

/// Moore–Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pinv(m: &CMat, tol: &Tolerances) -> CMat {
    pinv_above(m, 0.0, tol)
}

/// Pseudo-inverse with the cutoff taken relative to `max(σ_max, floor)`,
/// for matrices whose entries are rounding noise below the scale `floor`.
pub fn pinv_above(m: &CMat, floor: f64, tol: &Tolerances) -> CMat {
    let (r, c) = m.shape();
    let dec = svd(m);
    let rank = rank_above(&dec.singular_values, floor, tol.rank_factor(r, c));
    let mut out = CMat::zeros(c, r);
    for j in 0..rank {
        let inv = 1.0 / dec.singular_values[j];
        let vj = dec.v.column(j);
        let uj = dec.u.column(j);
        out += (vj * uj.adjoint()) * C64::new(inv, 0.0);
    }
    out
}

fn rank_above(s: &[f64], floor: f64, factor: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0).max(floor);
    if top > 0.0 {
        s.iter().filter(|&&x| x > factor * top).count()
    } else {
        0
    }
}

/// Orthonormal basis of the column space of `m` (left singular vectors above
/// the rank cutoff).
pub fn range_basis(m: &CMat, tol: &Tolerances) -> CMat {
    range_basis_above(m, 0.0, tol)
}

/// [`range_basis`] with the cutoff of [`pinv_above`].
pub fn range_basis_above(m: &CMat, floor: f64, tol: &Tolerances) -> CMat {
    let (r, c) = m.shape();
    let dec = svd(m);
    let rank = rank_above(&dec.singular_values, floor, tol.rank_factor(r, c));
    dec.u.columns(0, rank).into_owned()
}

/// Indices of a maximal independent subset of the columns of `m`, chosen
/// greedily in index order.
pub fn independent_columns(m: &CMat, tol: &Tolerances) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let target = numerical_rank(m, tol);
    for j in 0..m.ncols() {
        if chosen.len() == target {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(j);
        let sub = select_columns(m, &trial);
        if numerical_rank(&sub, tol) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

pub fn select_columns(m: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Orthonormal basis of the range of an orthogonal projection, obtained by
/// Gram–Schmidt over its columns in index order. For coordinate projections
/// this returns the corresponding standard basis vectors.
pub fn projection_basis(p: &CMat, tol: &Tolerances) -> CMat {
    let n = p.nrows();
    let target = numerical_rank(p, tol);
    let scale = p.norm().max(1e-300);
    let mut basis: Vec<CVec> = Vec::new();
    for j in 0..p.ncols() {
        if basis.len() == target {
            break;
        }
        let mut v: CVec = p.column(j).into_owned();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 * scale {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
        normalize_phase(out.column_mut(j));
    }
    out
}

// ---------------------------------------------------------------------------
// Structural operations
// ---------------------------------------------------------------------------

pub fn hermitize(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    if m.nrows() != m.ncols() {
        return Err(ExtError::DimensionMismatch(format!(
            "hermitize needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let residual = (m.as_matrix() - m.adjoint()).norm();
    if residual > tol.herm * (1.0 + m.norm()) {
        return Err(ExtError::NotHermitian { residual });
    }
    Ok(HermitianMatrix::symmetrized(m))
}

pub fn psd_sqrt(a: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let eig = a.hermitian().eigen();
    check_psd_spectrum(&eig.values, tol)?;
    let root = eig.recompose_with(|l| l.max(0.0).sqrt());
    Ok(PsdMatrix(HermitianMatrix::symmetrized(&root)))
}

pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: &Tolerances) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(ExtError::DimensionMismatch(format!(
            "Loewner comparison of {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let diff = b.as_matrix() - a.as_matrix();
    let values = hermitian_eigen(&diff).values;
    let Some(&min) = values.last() else {
        return Ok(true);
    };
    let norm = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(min >= -tol.psd * (1.0 + norm))
}

pub fn require_square(m: &CMat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(ExtError::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn require_shape(m: &CMat, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(ExtError::DimensionMismatch(format!(
            "{what} must be {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Checks that `p` is an orthogonal projection: `P² = P = P†`.
pub fn check_projection(p: &CMat, tol: &Tolerances) -> Result<()> {
    require_square(p, "projection")?;
    let residual = (p * p - p).norm().max((p - p.adjoint()).norm());
    if residual > tol.eq * (1.0 + p.norm()) {
        return Err(ExtError::NotProjection { residual });
    }
    Ok(())
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Complex matrix from real entries given in row-major order.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    DMatrix::from_row_slice(rows, cols, entries).map(real)
}

/// Complex diagonal matrix from real entries.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(
        n,
        n,
        |i, j| if i == j { real(values[i]) } else { real(0.0) },
    )
}

/// Standard basis vector `e_i` of `C^n` as an `n × 1` matrix.
pub fn unit_column(n: usize, i: usize) -> CMat {
    CMat::from_fn(n, 1, |r, _| if r == i { real(1.0) } else { real(0.0) })
}

/// Matrix unit `E_ij` in `M_m`.
pub fn matrix_unit(m: usize, i: usize, j: usize) -> CMat {
    CMat::from_fn(m, m, |r, s| {
        if r == i && s == j {
            real(1.0)
        } else {
            real(0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &CMat, b: &CMat, eps: f64) -> bool {
        a.shape() == b.shape() && (a - b).norm() <= eps
    }

    #[test]
    fn pinv_examples() {
        let t = tol();
        assert!(close(&pinv(&diag(&[2.0]), &t), &diag(&[0.5]), 1e-14));
        assert!(close(
            &pinv(&CMat::zeros(2, 2), &t),
            &CMat::zeros(2, 2),
            0.0
        ));
        assert!(close(
            &pinv(&diag(&[1.0, 0.0]), &t),
            &diag(&[1.0, 0.0]),
            1e-14
        ));
        assert_eq!(pinv(&CMat::zeros(3, 0), &t).shape(), (0, 3));
    }

    #[test]
    fn psd_sqrt_examples() {
        let t = tol();
        let id = PsdMatrix::identity(3);
        assert!(close(
            psd_sqrt(&id, &t).unwrap().as_matrix(),
            &CMat::identity(3, 3),
            1e-14
        ));

        let a = PsdMatrix::from_real_rows(&[&[4.0, 0.0], &[0.0, 9.0]], &t).unwrap();
        assert!(close(
            psd_sqrt(&a, &t).unwrap().as_matrix(),
            &diag(&[2.0, 3.0]),
            1e-13
        ));

        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]], &t).unwrap();
        let s3 = 3f64.sqrt();
        let expected = ComplexMatrix::from_real_rows(&[
            &[(s3 + 1.0) / 2.0, (s3 - 1.0) / 2.0],
            &[(s3 - 1.0) / 2.0, (s3 + 1.0) / 2.0],
        ])
        .unwrap();
        let r = psd_sqrt(&a, &t).unwrap();
        assert!(close(r.as_matrix(), &expected, 1e-13));
        assert!(close(
            &(r.as_matrix() * r.as_matrix()),
            a.as_matrix(),
            1e-13
        ));
    }

    #[test]
    fn psd_rejects_negative_spectrum() {
        let t = tol();
        let err = PsdMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]], &t).unwrap_err();
        assert!(matches!(err, ExtError::NotPsd { .. }));
        // slack within tolerance is accepted and clamped
        let a = PsdMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1e-12]], &t).unwrap();
        let r = psd_sqrt(&a, &t).unwrap();
        assert_eq!(r[(1, 1)], real(0.0));
    }

    #[test]
    fn loewner_examples() {
        let t = tol();
        let zero = HermitianMatrix::zeros(2);
        let id = HermitianMatrix::identity(2);
        assert!(loewner_leq(&zero, &id, &t).unwrap());
        assert!(!loewner_leq(&id, &zero, &t).unwrap());
        let a = HermitianMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]], &t).unwrap();
        assert!(loewner_leq(&a, &id, &t).unwrap());
        let err = loewner_leq(&id, &HermitianMatrix::identity(3), &t).unwrap_err();
        assert!(matches!(err, ExtError::DimensionMismatch(_)));
    }

    #[test]
    fn rank_examples() {
        let t = tol();
        assert_eq!(numerical_rank(&CMat::identity(3, 3), &t), 3);
        assert_eq!(numerical_rank(&CMat::zeros(2, 3), &t), 0);
        let ones = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(numerical_rank(&ones, &t), 1);
    }

    #[test]
    fn hermitize_examples() {
        let t = tol();
        let d = ComplexMatrix::new(diag(&[1.0, 2.0])).unwrap();
        assert_eq!(hermitize(&d, &t).unwrap().as_matrix(), d.as_matrix());
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(hermitize(&x, &t).unwrap().as_matrix(), x.as_matrix());
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitize(&n, &t),
            Err(ExtError::NotHermitian { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let m = CMat::from_element(1, 1, c(f64::NAN, 0.0));
        assert_eq!(ComplexMatrix::new(m), Err(ExtError::NonFinite));
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::new(None, -1.0, 0.0, 0.0).is_err());
        assert!(Tolerances::new(Some(f64::NAN), 0.0, 0.0, 0.0).is_err());
        assert!(Tolerances::new(Some(1e-12), 1e-9, 1e-9, 1e-9).is_ok());
        assert_eq!(Tolerances::default().rank_factor(3, 5), 5e-10);
    }

    #[test]
    fn eigen_is_sorted_and_phase_normalized() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let eig = hermitian_eigen(&m);
        assert!((eig.values[0] - 3.0).abs() < 1e-13 && (eig.values[1] - 1.0).abs() < 1e-13);
        for j in 0..2 {
            let first = eig.vectors[(0, j)];
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
        let back = eig.recompose_with(|l| l);
        assert!(close(&back, &m, 1e-13));
    }

    #[test]
    fn projection_basis_of_coordinate_projection() {
        let t = tol();
        let q = projection_basis(&diag(&[1.0, 0.0, 1.0]), &t);
        assert_eq!(q.shape(), (3, 2));
        assert!(close(
            &q,
            &select_columns(&CMat::identity(3, 3), &[0, 2]),
            1e-15
        ));
    }

    #[test]
    fn independent_columns_skips_dependents() {
        let t = tol();
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(independent_columns(&m, &t), vec![0, 2]);
    }
}
