//! Two-sided extension problems reduced to symmetric extensions on a product
//! space: the generalized Parrott completion, the Strong Parrott theorem and
//! classical contractive completion.
//!
//! Given `T₁: E₁ ⊇ dom T₁ → F₂` and `T₂: E₂ ⊇ dom T₂ → F₁` with
//! `⟨T₁x₁, x₂⟩ = conj⟨T₂x₂, x₁⟩`, the operator `S₀(x₁, x₂) = (T₂x₂, T₁x₁)` is
//! symmetric on `E₁ × E₂` and bounded by `Λ = diag(A₁, A₂)`. The lower-left
//! block of a bound-preserving self-adjoint extension of `S₀` is a completion
//! `T` with `T₁ ⊆ T` and `T₂ ⊆ T*`.
//!
//! The bound constants `alpha1`, `alpha2` multiply the *unsquared* product
//! `⟨A₁x₁,x₁⟩⟨A₂y₂,y₂⟩` in the hypotheses; the symmetric-extension bound
//! enters squared, so `α_Λ(S₀)² ≤ max(alpha1, alpha2)`.

use crate::error::{ExtError, Result};
use crate::kvn::{hilbert_lift, HilbertLift};
use crate::numkit::{
    self, independent_columns, loewner_leq, numerical_rank, pinv, projection_basis, select_columns,
    spectral_norm, CMat, ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances,
};
use crate::sa_ext::{extend_symmetric, lift_partial, SymmetricPartialOperator};

/// Linear map defined on the span of `domain`, column `j` of `domain` being
/// sent to column `j` of `values`. Domain and codomain may differ in size.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMap {
    domain: CMat,
    values: CMat,
}

impl PartialMap {
    pub fn new(domain: ComplexMatrix, values: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if domain.ncols() != values.ncols() {
            return Err(ExtError::DimensionMismatch(format!(
                "domain has {} columns but values have {}",
                domain.ncols(),
                values.ncols()
            )));
        }
        let rank = numerical_rank(&domain, tol);
        if rank != domain.ncols() {
            return Err(ExtError::DependentDomain {
                rank,
                cols: domain.ncols(),
            });
        }
        Ok(Self {
            domain: domain.into_inner(),
            values: values.into_inner(),
        })
    }

    pub fn domain(&self) -> &CMat {
        &self.domain
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }
}

/// Data of the two-sided extension problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParrottInstance {
    /// `T₁: E₁ → F₂`, domain in `C^{n1}`, values in `C^{n2}`.
    pub t1: PartialMap,
    /// `T₂: E₂ → F₁`, domain in `C^{n2}`, values in `C^{n1}`.
    pub t2: PartialMap,
    pub a1: PsdMatrix,
    pub a2: PsdMatrix,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ParrottInstance {
    pub fn new(
        t1: PartialMap,
        t2: PartialMap,
        a1: PsdMatrix,
        a2: PsdMatrix,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        let (n1, n2) = (a1.dim(), a2.dim());
        let shape_err = |what: &str, got: usize, want: usize| {
            ExtError::DimensionMismatch(format!("{what} has {got} rows, expected {want}"))
        };
        if t1.domain.nrows() != n1 {
            return Err(shape_err("domain1", t1.domain.nrows(), n1));
        }
        if t1.values.nrows() != n2 {
            return Err(shape_err("values1", t1.values.nrows(), n2));
        }
        if t2.domain.nrows() != n2 {
            return Err(shape_err("domain2", t2.domain.nrows(), n2));
        }
        if t2.values.nrows() != n1 {
            return Err(shape_err("values2", t2.values.nrows(), n1));
        }
        for (name, alpha) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(ExtError::InvalidDims(format!(
                    "{name} must be finite and nonnegative, got {alpha}"
                )));
            }
        }
        Ok(Self {
            t1,
            t2,
            a1,
            a2,
            alpha1,
            alpha2,
        })
    }

    pub fn n1(&self) -> usize {
        self.a1.dim()
    }

    pub fn n2(&self) -> usize {
        self.a2.dim()
    }

    /// `max(alpha1, alpha2)`, the bound guaranteed for the completion.
    pub fn alpha_max(&self) -> f64 {
        self.alpha1.max(self.alpha2)
    }

    /// Residual of `D₂†V₁ = V₂†D₁`.
    pub fn compatibility_residual(&self) -> f64 {
        let lhs = self.t2.domain.adjoint() * &self.t1.values;
        let rhs = self.t2.values.adjoint() * &self.t1.domain;
        (lhs - rhs).norm()
    }

    fn compatibility_scale(&self) -> f64 {
        1.0 + self.t2.domain.norm() * self.t1.values.norm()
            + self.t2.values.norm() * self.t1.domain.norm()
    }
}

/// Squared bounds `(β₁², β₂²)` of `T₁` against `(A₁, A₂)` and of `T₂`
/// against `(A₂, A₁)`, or `None` when a partial map is unbounded.
fn squared_bounds(
    inst: &ParrottInstance,
    lifts: (&HilbertLift, &HilbertLift),
    tol: &Tolerances,
) -> (Option<f64>, Option<f64>) {
    let (l1, l2) = lifts;
    let b1 = lift_partial(&inst.t1.domain, &inst.t1.values, l1, l2, tol)
        .ok()
        .map(|(_, _, b)| b * b);
    let b2 = lift_partial(&inst.t2.domain, &inst.t2.values, l2, l1, tol)
        .ok()
        .map(|(_, _, b)| b * b);
    (b1, b2)
}

fn within_bound(squared: Option<f64>, alpha: f64, tol: &Tolerances) -> bool {
    squared.is_some_and(|b| b <= alpha * (1.0 + tol.eq) + tol.eq)
}

/// Compatibility identity plus both bound hypotheses at the declared
/// constants.
pub fn check_compatibility(inst: &ParrottInstance, tol: &Tolerances) -> Result<bool> {
    Ok(compatibility_failures(inst, tol)?.is_empty())
}

fn compatibility_failures(inst: &ParrottInstance, tol: &Tolerances) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    let residual = inst.compatibility_residual();
    if residual > tol.eq * inst.compatibility_scale() {
        failures.push(format!(
            "<T1 x1, x2> = conj <T2 x2, x1> fails (residual {residual:.3e})"
        ));
    }
    let l1 = hilbert_lift(&inst.a1, tol)?;
    let l2 = hilbert_lift(&inst.a2, tol)?;
    let (b1, b2) = squared_bounds(inst, (&l1, &l2), tol);
    if !within_bound(b1, inst.alpha1, tol) {
        failures.push(match b1 {
            Some(b) => format!("T1 bound {b:.6e} exceeds alpha1 = {}", inst.alpha1),
            None => "T1 is not bounded by (A1, A2)".to_string(),
        });
    }
    if !within_bound(b2, inst.alpha2, tol) {
        failures.push(match b2 {
            Some(b) => format!("T2 bound {b:.6e} exceeds alpha2 = {}", inst.alpha2),
            None => "T2 is not bounded by (A2, A1)".to_string(),
        });
    }
    Ok(failures)
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// The symmetric operator `S₀(x₁, x₂) = (T₂x₂, T₁x₁)` on `C^{n1+n2}` and
/// `Λ = diag(A₁, A₂)`.
pub fn assemble_symmetric(
    inst: &ParrottInstance,
    tol: &Tolerances,
) -> Result<(SymmetricPartialOperator, PsdMatrix)> {
    let failures = compatibility_failures(inst, tol)?;
    if !failures.is_empty() {
        return Err(ExtError::IncompatibleInstance(failures.join("; ")));
    }
    let (n1, n2) = (inst.n1(), inst.n2());
    let (k1, k2) = (inst.t1.domain.ncols(), inst.t2.domain.ncols());
    let domain = block_diag(&inst.t1.domain, &inst.t2.domain);
    let mut values = CMat::zeros(n1 + n2, k1 + k2);
    values
        .view_mut((n1, 0), (n2, k1))
        .copy_from(&inst.t1.values);
    values
        .view_mut((0, k1), (n1, k2))
        .copy_from(&inst.t2.values);
    let lambda = block_diag(inst.a1.as_matrix(), inst.a2.as_matrix());
    // A compatible instance is symmetric up to the compatibility tolerance,
    // which may be looser than the hermiticity slack.
    let relaxed = Tolerances {
        herm: tol.herm.max(tol.eq),
        ..*tol
    };
    let s0 = SymmetricPartialOperator::new(
        ComplexMatrix::new(domain)?,
        ComplexMatrix::new(values)?,
        &relaxed,
    )
    .map_err(|e| ExtError::IncompatibleInstance(e.to_string()))?;
    let lambda = PsdMatrix::from_matrix(lambda, tol)?;
    Ok((s0, lambda))
}

/// Which bound-preserving extension the completion is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endpoint {
    #[default]
    Min,
    Max,
    Mid,
}

/// Completion `T` (an `n2 × n1` matrix) read from `S_m`.
pub fn parrott_complete(inst: &ParrottInstance, tol: &Tolerances) -> Result<ComplexMatrix> {
    parrott_complete_at(inst, Endpoint::Min, tol)
}

pub fn parrott_complete_at(
    inst: &ParrottInstance,
    endpoint: Endpoint,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let (s0, lambda) = assemble_symmetric(inst, tol)?;
    let iv = extend_symmetric(&s0, &lambda, tol)?;
    if iv.alpha * iv.alpha > inst.alpha_max() * (1.0 + tol.eq) + tol.eq {
        return Err(ExtError::NotABounded(format!(
            "product bound {:.6e} exceeds max(alpha1, alpha2) = {}",
            iv.alpha * iv.alpha,
            inst.alpha_max()
        )));
    }
    let s = match endpoint {
        Endpoint::Min => iv.s_min,
        Endpoint::Max => iv.s_max,
        Endpoint::Mid => iv.interpolate(0.5),
    };
    let (n1, n2) = (inst.n1(), inst.n2());
    ComplexMatrix::new(s.view((n1, 0), (n2, n1)).into_owned())
}

/// `σ_max(A₂^{+1/2}·T·A₁^{+1/2})²`, the bound constant achieved by `T`.
pub fn completion_bound(t: &CMat, a1: &PsdMatrix, a2: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    let l1 = hilbert_lift(a1, tol)?;
    let l2 = hilbert_lift(a2, tol)?;
    let b = spectral_norm(&(&l2.pinv_sqrt_a * t * &l1.pinv_sqrt_a));
    Ok(b * b)
}

/// Data of the commutative-diagram problem: find a contraction `X: H → K`
/// with `X·S₁ = S₂` and `T₂·X = T₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongParrottInstance {
    pub s1: CMat,
    pub s2: CMat,
    pub t1: CMat,
    pub t2: CMat,
}

impl StrongParrottInstance {
    pub fn new(
        s1: ComplexMatrix,
        s2: ComplexMatrix,
        t1: ComplexMatrix,
        t2: ComplexMatrix,
    ) -> Result<Self> {
        let (h, p) = s1.shape();
        let k = s2.nrows();
        let q = t1.nrows();
        numkit::require_shape(&s2, k, p, "S2")?;
        numkit::require_shape(&t1, q, h, "T1")?;
        numkit::require_shape(&t2, q, k, "T2")?;
        Ok(Self {
            s1: s1.into_inner(),
            s2: s2.into_inner(),
            t1: t1.into_inner(),
            t2: t2.into_inner(),
        })
    }

    /// Names of the hypotheses that fail.
    pub fn hypothesis_failures(&self, tol: &Tolerances) -> Result<Vec<String>> {
        let mut failures = Vec::new();
        let residual = (&self.t1 * &self.s1 - &self.t2 * &self.s2).norm();
        let scale = 1.0 + self.t1.norm() * self.s1.norm() + self.t2.norm() * self.s2.norm();
        if residual > tol.eq * scale {
            failures.push(format!("T1*S1 = T2*S2 fails (residual {residual:.3e})"));
        }
        let gram = |m: &CMat| HermitianMatrix::symmetrized(&(m.adjoint() * m));
        let cogram = |m: &CMat| HermitianMatrix::symmetrized(&(m * m.adjoint()));
        if !loewner_leq(&gram(&self.s2), &gram(&self.s1), tol)? {
            failures.push("S2^* S2 <= S1^* S1 fails".to_string());
        }
        if !loewner_leq(&cogram(&self.t1), &cogram(&self.t2), tol)? {
            failures.push("T1 T1^* <= T2 T2^* fails".to_string());
        }
        Ok(failures)
    }
}

/// Restricts `x ↦ values·c` on `span(domain columns)` to an independent
/// column subset, verifying that the dropped columns carry consistent values.
fn independent_partial(
    domain: &CMat,
    values: &CMat,
    what: &str,
    tol: &Tolerances,
) -> Result<PartialMap> {
    let keep = independent_columns(domain, tol);
    let d = select_columns(domain, &keep);
    let v = select_columns(values, &keep);
    let coords = pinv(&d, tol) * domain;
    let mismatch = (&v * &coords - values).norm();
    if mismatch > tol.eq * (1.0 + values.norm()) {
        return Err(ExtError::HypothesisViolated(vec![format!(
            "{what} is not well defined on dependent columns (residual {mismatch:.3e})"
        )]));
    }
    PartialMap::new(ComplexMatrix::new(d)?, ComplexMatrix::new(v)?, tol)
}

/// A contraction `X` with `X·S₁ = S₂` and `T₂·X = T₁`.
pub fn strong_parrott(inst: &StrongParrottInstance, tol: &Tolerances) -> Result<ComplexMatrix> {
    let failures = inst.hypothesis_failures(tol)?;
    if !failures.is_empty() {
        return Err(ExtError::HypothesisViolated(failures));
    }
    let h = inst.s1.nrows();
    let k = inst.s2.nrows();
    // X₀(S₁x) = S₂x on ran S₁ and X₁(T₂*y) = T₁*y on ran T₂*.
    let x0 = independent_partial(&inst.s1, &inst.s2, "X0", tol)?;
    let x1 = independent_partial(&inst.t2.adjoint(), &inst.t1.adjoint(), "X1", tol)?;
    let parrott = ParrottInstance::new(
        x0,
        x1,
        PsdMatrix::identity(h),
        PsdMatrix::identity(k),
        1.0,
        1.0,
    )?;
    parrott_complete(&parrott, tol).map_err(|e| match e {
        ExtError::IncompatibleInstance(msg) => ExtError::HypothesisViolated(vec![msg]),
        other => other,
    })
}

/// Contractive completion from data on subspaces: `T|_{H₁} = T₁` and
/// `P_{K₁}·T = T₁'`.
///
/// `t1_on_h1` is `dim K × dim H₁` and `t1_prime` is `dim K₁ × dim H`, both in
/// the orthonormal bases of `H₁ = ran P_{H₁}` and `K₁ = ran P_{K₁}` obtained
/// by Gram–Schmidt over the projection's columns (the standard basis vectors
/// for coordinate subspaces).
pub fn classical_parrott(
    p_h1: &CMat,
    p_k1: &CMat,
    t1_on_h1: &CMat,
    t1_prime: &CMat,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    numkit::check_projection(p_h1, tol)?;
    numkit::check_projection(p_k1, tol)?;
    let q_h1 = projection_basis(p_h1, tol);
    let q_k1 = projection_basis(p_k1, tol);
    let (h, h1) = q_h1.shape();
    let (k, k1) = q_k1.shape();
    numkit::require_shape(t1_on_h1, k, h1, "T1 on H1")?;
    numkit::require_shape(t1_prime, k1, h, "T1'")?;

    let mut failures = Vec::new();
    for (name, m) in [("T1", t1_on_h1), ("T1'", t1_prime)] {
        let norm = spectral_norm(m);
        if norm > 1.0 + tol.eq {
            failures.push(format!("{name} is not a contraction (norm {norm:.6e})"));
        }
    }
    let matching = (q_k1.adjoint() * t1_on_h1 - t1_prime * &q_h1).norm();
    if matching > tol.eq * (1.0 + t1_on_h1.norm() + t1_prime.norm()) {
        failures.push(format!("P_K1 T1 = T1'|H1 fails (residual {matching:.3e})"));
    }
    if !failures.is_empty() {
        return Err(ExtError::HypothesisViolated(failures));
    }
    let t1 = PartialMap::new(
        ComplexMatrix::new(q_h1)?,
        ComplexMatrix::new(t1_on_h1.clone())?,
        tol,
    )?;
    let t2 = PartialMap::new(
        ComplexMatrix::new(q_k1)?,
        ComplexMatrix::new(t1_prime.adjoint())?,
        tol,
    )?;
    let inst = ParrottInstance::new(
        t1,
        t2,
        PsdMatrix::identity(h),
        PsdMatrix::identity(k),
        1.0,
        1.0,
    )?;
    parrott_complete(&inst, tol)
}
