//! Krein–von Neumann extensions of partially defined positive operators on
//! `C^n`, and the Hilbert-space lift `H_A` of a positive matrix.
//!
//! The anti-dual pairing is `⟨f, x⟩ = x†f`. A partial operator is given by a
//! domain basis `D` (independent columns) and values `G = A·D`.

use crate::error::{ExtError, Result};
use crate::numkit::{
    self, hermitian_eigen, numerical_rank, pinv_above, spectral_norm, CMat, ComplexMatrix,
    HermitianMatrix, PsdMatrix, Tolerances, C64,
};

/// Positive operator defined on the column span of `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialPositiveOperator {
    domain: CMat,
    values: CMat,
    gram: CMat,
}

impl PartialPositiveOperator {
    /// Validates shapes, independence of the domain columns and positivity
    /// of `D†G`. The kernel condition is left to [`check_restriction`].
    pub fn new(domain: ComplexMatrix, values: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let (n, k) = domain.shape();
        numkit::require_shape(&values, n, k, "values")?;
        let rank = numerical_rank(&domain, tol);
        if rank != k {
            return Err(ExtError::DependentDomain { rank, cols: k });
        }
        let gram = domain.adjoint() * values.as_matrix();
        let gram = HermitianMatrix::new(gram, tol)?;
        let gram = PsdMatrix::new(gram, tol)?.into_inner();
        Ok(Self {
            domain: domain.into_inner(),
            values: values.into_inner(),
            gram,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain.nrows()
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.ncols()
    }

    pub fn domain(&self) -> &CMat {
        &self.domain
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }

    /// `M = D†G`, the form `⟨Ax, x⟩` in domain coordinates.
    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// `‖G·(I − M⁺M)‖_F`; zero iff `ker M ⊆ ker G`.
    pub fn kernel_residual(&self, tol: &Tolerances) -> f64 {
        self.kernel_residual_above(0.0, tol)
    }

    /// `M` carries rounding noise of order `‖D‖·‖G‖`, so singular values are
    /// cut relative to that (or to the caller's `floor` if larger).
    fn gram_floor(&self, floor: f64) -> f64 {
        (spectral_norm(&self.domain) * spectral_norm(&self.values)).max(floor)
    }

    fn kernel_residual_above(&self, floor: f64, tol: &Tolerances) -> f64 {
        let k = self.domain_dim();
        let m_pinv = pinv_above(&self.gram, self.gram_floor(floor), tol);
        let leak = CMat::identity(k, k) - &m_pinv * &self.gram;
        (&self.values * leak).norm()
    }
}

/// Finite-dimensional form of the restriction condition: every `y` admits
/// `M_y` with `|⟨Ax, y⟩|² ≤ M_y ⟨Ax, x⟩`, which holds iff `ker(D†G) ⊆ ker(G)`.
pub fn check_restriction(op: &PartialPositiveOperator, tol: &Tolerances) -> bool {
    op.kernel_residual(tol) <= tol.eq * (1.0 + op.values.norm())
}

/// Smallest positive everywhere-defined extension `A_N = G·M⁺·G†`.
pub fn kvn_extend(op: &PartialPositiveOperator, tol: &Tolerances) -> Result<PsdMatrix> {
    kvn_extend_above(op, 0.0, tol)
}

/// [`kvn_extend`] for values known only up to rounding at the scale `floor`.
pub(crate) fn kvn_extend_above(
    op: &PartialPositiveOperator,
    floor: f64,
    tol: &Tolerances,
) -> Result<PsdMatrix> {
    let residual = op.kernel_residual_above(floor, tol);
    if residual > tol.eq * (1.0 + op.values.norm()) {
        return Err(ExtError::RestrictionConditionFailed { residual });
    }
    let n = op.ambient_dim();
    if op.domain_dim() == 0 {
        return Ok(PsdMatrix::zeros(n));
    }
    let m_pinv = pinv_above(&op.gram, op.gram_floor(floor), tol);
    let ext = &op.values * m_pinv * op.values.adjoint();
    let ext = HermitianMatrix::new(ext, tol)
        .map_err(|e| ExtError::NumericalFailure(format!("extension lost hermiticity: {e}")))?;
    PsdMatrix::new(ext, tol)
        .map_err(|e| ExtError::NumericalFailure(format!("extension lost positivity: {e}")))
}

/// Realization of the auxiliary Hilbert space `H_A` of a positive matrix.
///
/// `H_A` is identified with `ran A` in the orthonormal coordinates given by
/// `range_basis`: the canonical embedding `J` maps coordinates `h` to
/// `sqrt_a·Q·h`, and its adjoint `J*` maps `x` to `Q†·sqrt_a·x`. With this
/// choice `⟨J*x, J*y⟩ = y†Ax` and `J·J* = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertLift {
    pub a: PsdMatrix,
    pub sqrt_a: PsdMatrix,
    pub pinv_sqrt_a: CMat,
    pub rank: usize,
    pub range_basis: CMat,
}

impl HilbertLift {
    pub fn ambient_dim(&self) -> usize {
        self.a.dim()
    }

    /// `J*` as an `r × n` matrix.
    pub fn adjoint_embedding(&self) -> CMat {
        self.range_basis.adjoint() * self.sqrt_a.as_matrix()
    }

    /// `J` as an `n × r` matrix.
    pub fn embedding(&self) -> CMat {
        self.sqrt_a.as_matrix() * &self.range_basis
    }

    /// Orthogonal projection onto `ran A`.
    pub fn range_projector(&self) -> CMat {
        &self.range_basis * self.range_basis.adjoint()
    }

    /// `J·X·J*` for an operator `X` on `H_A` given in range coordinates.
    pub fn push_forward(&self, lifted: &CMat) -> HermitianMatrix {
        let j = self.embedding();
        HermitianMatrix::symmetrized(&(&j * lifted * j.adjoint()))
    }
}

pub fn hilbert_lift(a: &PsdMatrix, tol: &Tolerances) -> Result<HilbertLift> {
    let n = a.dim();
    let eig = hermitian_eigen(a.as_matrix());
    if let Some(&min) = eig.values.last() {
        let max = eig.values[0].max(0.0);
        if min < -tol.psd * (1.0 + max) {
            return Err(ExtError::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    let max = eig.values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_factor(n, n) * max;
    let rank = if max > 0.0 {
        eig.values.iter().filter(|&&l| l > cutoff).count()
    } else {
        0
    };
    let sqrt_a = eig.recompose_with(|l| l.max(0.0).sqrt());
    let mut pinv_sqrt_a = CMat::zeros(n, n);
    for j in 0..rank {
        let v = eig.vectors.column(j);
        pinv_sqrt_a += (v * v.adjoint()) * C64::new(1.0 / eig.values[j].sqrt(), 0.0);
    }
    let range_basis = eig.vectors.columns(0, rank).into_owned();
    Ok(HilbertLift {
        a: a.clone(),
        sqrt_a: PsdMatrix::new(HermitianMatrix::symmetrized(&sqrt_a), tol)?,
        pinv_sqrt_a: (&pinv_sqrt_a + pinv_sqrt_a.adjoint()) * C64::new(0.5, 0.0),
        rank,
        range_basis,
    })
}
