//! Bound-preserving self-adjoint extensions of partially defined symmetric
//! operators.
//!
//! A symmetric partial operator `S₀` with `A`-bound `α` is lifted to a
//! bounded symmetric operator `Ŝ₀` on `H_A` (in range coordinates). The two
//! positive operators `α ± Ŝ₀` are extended with the Krein–von Neumann
//! construction and shifted back, which yields the extremal extensions
//! `S_m ⪯ S_M`; every self-adjoint extension with the same `A`-bound lies in
//! the Loewner interval between them.

use crate::error::{ExtError, Result};
use crate::kvn::{hilbert_lift, kvn_extend_above, HilbertLift, PartialPositiveOperator};
use crate::numkit::{
    self, loewner_leq, numerical_rank, pinv, pinv_above, range_basis_above, spectral_norm, CMat,
    ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances, C64,
};

/// Symmetric operator defined on the column span of `domain`:
/// `D†V` is hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPartialOperator {
    domain: CMat,
    values: CMat,
}

impl SymmetricPartialOperator {
    pub fn new(domain: ComplexMatrix, values: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let (n, k) = domain.shape();
        numkit::require_shape(&values, n, k, "values")?;
        let rank = numerical_rank(&domain, tol);
        if rank != k {
            return Err(ExtError::DependentDomain { rank, cols: k });
        }
        let form = domain.adjoint() * values.as_matrix();
        let residual = (&form - form.adjoint()).norm();
        if residual > tol.herm * (1.0 + form.norm()) {
            return Err(ExtError::NotSymmetric { residual });
        }
        Ok(Self {
            domain: domain.into_inner(),
            values: values.into_inner(),
        })
    }

    /// Restriction of an everywhere-defined hermitian matrix to `span(domain)`.
    pub fn restrict(s: &HermitianMatrix, domain: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        numkit::require_shape(&domain, s.dim(), domain.ncols(), "domain")?;
        let values = ComplexMatrix::new(s.as_matrix() * domain.as_matrix())?;
        Self::new(domain, values, tol)
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

    /// Residual `‖S·D − V‖_F` of a candidate extension.
    pub fn extension_residual(&self, s: &CMat) -> f64 {
        (s * &self.domain - &self.values).norm()
    }
}

/// `Ŝ₀` in range coordinates of `H_A`: it maps column `j` of `u` to column `j`
/// of `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSymmetric {
    pub lift: HilbertLift,
    pub u: CMat,
    pub w: CMat,
    pub alpha: f64,
}

/// Lift of a partial operator `x ↦ V·c` (for `x = D·c`) between two possibly
/// different spaces, bounded against `A_dom` on the domain side and `A_cod`
/// on the codomain side. Returns `(U, W, bound)` where `bound` is the
/// smallest `β` with `|y†Vc|² ≤ β² (x†A_dom x)(y†A_cod y)`.
pub(crate) fn lift_partial(
    domain: &CMat,
    values: &CMat,
    dom: &HilbertLift,
    cod: &HilbertLift,
    tol: &Tolerances,
) -> Result<(CMat, CMat, f64)> {
    let escaped = (values - cod.sqrt_a.as_matrix() * &cod.pinv_sqrt_a * values).norm();
    if escaped > tol.eq * (1.0 + values.norm()) {
        return Err(ExtError::NotABounded(format!(
            "values leave the range of the bounding operator (residual {escaped:.3e})"
        )));
    }
    let u = dom.adjoint_embedding() * domain;
    let w = cod.range_basis.adjoint() * &cod.pinv_sqrt_a * values;
    let u_pinv = pinv_above(&u, lift_floor(dom, domain), tol);
    let k = domain.ncols();
    let leak = (&w * (CMat::identity(k, k) - &u_pinv * &u)).norm();
    if leak > tol.eq * (1.0 + w.norm()) {
        return Err(ExtError::NotABounded(format!(
            "nonzero values on vectors annihilated by the bounding operator (residual {leak:.3e})"
        )));
    }
    let bound = spectral_norm(&(&w * &u_pinv));
    Ok((u, w, bound))
}

/// Scale below which `J*·D` is rounding noise.
fn lift_floor(lift: &HilbertLift, domain: &CMat) -> f64 {
    spectral_norm(lift.sqrt_a.as_matrix()) * spectral_norm(domain)
}

pub fn lift_symmetric(
    s0: &SymmetricPartialOperator,
    a: &PsdMatrix,
    tol: &Tolerances,
) -> Result<LiftedSymmetric> {
    check_dims(s0, a)?;
    let lift = hilbert_lift(a, tol)?;
    lift_with(s0, lift, tol)
}

fn lift_with(
    s0: &SymmetricPartialOperator,
    lift: HilbertLift,
    tol: &Tolerances,
) -> Result<LiftedSymmetric> {
    let (u, w, alpha) = lift_partial(&s0.domain, &s0.values, &lift, &lift, tol)?;
    let form = u.adjoint() * &w;
    let residual = (&form - form.adjoint()).norm();
    if residual > tol.eq * (1.0 + form.norm()) {
        return Err(ExtError::NumericalFailure(format!(
            "lifted operator is not symmetric (residual {residual:.3e})"
        )));
    }
    Ok(LiftedSymmetric { lift, u, w, alpha })
}

fn check_dims(s0: &SymmetricPartialOperator, a: &PsdMatrix) -> Result<()> {
    if s0.ambient_dim() != a.dim() {
        return Err(ExtError::DimensionMismatch(format!(
            "operator acts on C^{} but A is {}x{}",
            s0.ambient_dim(),
            a.dim(),
            a.dim()
        )));
    }
    Ok(())
}

/// The `A`-bound `α_A(S₀)`, computed as `‖Ŝ₀‖`.
pub fn a_bound(s0: &SymmetricPartialOperator, a: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(lift_symmetric(s0, a, tol)?.alpha)
}

/// Extremal bound-preserving extensions together with their lifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionInterval {
    pub alpha: f64,
    pub s_min: HermitianMatrix,
    pub s_max: HermitianMatrix,
    /// `Ŝ_m` on `H_A` in range coordinates.
    pub lifted_min: CMat,
    /// `Ŝ_M` on `H_A` in range coordinates.
    pub lifted_max: CMat,
    pub lift: HilbertLift,
}

impl ExtensionInterval {
    /// `(1−t)·S_m + t·S_M`.
    pub fn interpolate(&self, t: f64) -> HermitianMatrix {
        let m = self.s_min.as_matrix() * C64::new(1.0 - t, 0.0)
            + self.s_max.as_matrix() * C64::new(t, 0.0);
        HermitianMatrix::symmetrized(&m)
    }
}

pub fn extend_symmetric(
    s0: &SymmetricPartialOperator,
    a: &PsdMatrix,
    tol: &Tolerances,
) -> Result<ExtensionInterval> {
    check_dims(s0, a)?;
    let lift = hilbert_lift(a, tol)?;
    extend_with_lift(s0, lift, tol)
}

pub(crate) fn extend_with_lift(
    s0: &SymmetricPartialOperator,
    lift: HilbertLift,
    tol: &Tolerances,
) -> Result<ExtensionInterval> {
    let lifted = lift_with(s0, lift, tol)?;
    let r = lifted.lift.rank;
    let alpha = lifted.alpha;

    // Orthonormal basis of dom Ŝ₀ and the values of Ŝ₀ on it.
    let floor = lift_floor(&lifted.lift, &s0.domain);
    let basis = range_basis_above(&lifted.u, floor, tol);
    let image = &lifted.w * pinv_above(&lifted.u, floor, tol) * &basis;
    let shift = |sign: f64| -> Result<CMat> {
        let values = &basis * C64::new(alpha, 0.0) + &image * C64::new(sign, 0.0);
        let positive = PartialPositiveOperator::new(
            ComplexMatrix::new(basis.clone())?,
            ComplexMatrix::new(values)?,
            tol,
        )
        .map_err(numerical("shifted operator is not positive"))?;
        let ext = kvn_extend_above(&positive, 2.0 * alpha, tol)
            .map_err(numerical("Krein–von Neumann step"))?;
        Ok(ext.into_inner())
    };
    let identity = CMat::identity(r, r) * C64::new(alpha, 0.0);
    let lifted_min = shift(1.0)? - &identity;
    let lifted_max = &identity - shift(-1.0)?;

    let s_min = lifted.lift.push_forward(&lifted_min);
    let s_max = lifted.lift.push_forward(&lifted_max);
    let scale = 1.0 + s0.values.norm() + (s_min.norm() + s_max.norm()) * s0.domain.norm();
    for (name, s) in [("S_m", &s_min), ("S_M", &s_max)] {
        let residual = s0.extension_residual(s);
        if residual > tol.eq * scale {
            return Err(ExtError::NumericalFailure(format!(
                "{name} does not extend the operator (residual {residual:.3e})"
            )));
        }
    }
    Ok(ExtensionInterval {
        alpha,
        s_min,
        s_max,
        lifted_min,
        lifted_max,
        lift: lifted.lift,
    })
}

fn numerical(context: &'static str) -> impl Fn(ExtError) -> ExtError {
    move |e| ExtError::NumericalFailure(format!("{context}: {e}"))
}

/// `A`-bound of an everywhere-defined hermitian operator.
pub fn alpha_of_total(s: &HermitianMatrix, a: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    if s.dim() != a.dim() {
        return Err(ExtError::DimensionMismatch(format!(
            "S is {}x{} but A is {}x{}",
            s.dim(),
            s.dim(),
            a.dim(),
            a.dim()
        )));
    }
    let lift = hilbert_lift(a, tol)?;
    alpha_of_total_with(s.as_matrix(), &lift, tol)
}

pub(crate) fn alpha_of_total_with(s: &CMat, lift: &HilbertLift, tol: &Tolerances) -> Result<f64> {
    let n = lift.ambient_dim();
    let outside = CMat::identity(n, n) - lift.range_projector();
    let residual = (&outside * s).norm().max((s * &outside).norm());
    if residual > tol.eq * (1.0 + s.norm()) {
        return Err(ExtError::NotABounded(format!(
            "operator is not supported on the range of A (residual {residual:.3e})"
        )));
    }
    Ok(spectral_norm(&(&lift.pinv_sqrt_a * s * &lift.pinv_sqrt_a)))
}

pub fn in_interval(s: &HermitianMatrix, iv: &ExtensionInterval, tol: &Tolerances) -> Result<bool> {
    Ok(loewner_leq(&iv.s_min, s, tol)? && loewner_leq(s, &iv.s_max, tol)?)
}

/// Checks that both extremal extensions commute with a hermitian `B` that
/// leaves `dom S₀` invariant and satisfies `B·S₀ ⊆ S₀·B`. Only the Hilbert
/// case `A = I` is covered.
pub fn check_commutation(
    b: &HermitianMatrix,
    s0: &SymmetricPartialOperator,
    a: &PsdMatrix,
    tol: &Tolerances,
) -> Result<bool> {
    check_dims(s0, a)?;
    let n = s0.ambient_dim();
    if b.dim() != n {
        return Err(ExtError::DimensionMismatch(format!(
            "B is {}x{} but the operator acts on C^{n}",
            b.dim(),
            b.dim()
        )));
    }
    let mut violated = Vec::new();
    let off_identity = (a.as_matrix() - CMat::identity(n, n)).norm();
    if off_identity > tol.eq * (1.0 + (n as f64).sqrt()) {
        violated.push(format!(
            "A must be the identity (residual {off_identity:.3e})"
        ));
    }
    let d = &s0.domain;
    let v = &s0.values;
    let bmat = b.as_matrix();
    // B·D = D·C for the induced action C on domain coordinates.
    let coords = pinv(d, tol) * bmat * d;
    let invariance = (bmat * d - d * &coords).norm();
    if invariance > tol.eq * (1.0 + bmat.norm() * d.norm()) {
        violated.push(format!(
            "B does not leave the domain invariant (residual {invariance:.3e})"
        ));
    }
    let intertwining = (bmat * v - v * &coords).norm();
    if intertwining > tol.eq * (1.0 + bmat.norm() * v.norm()) {
        violated.push(format!(
            "B·S0 is not contained in S0·B (residual {intertwining:.3e})"
        ));
    }
    if !violated.is_empty() {
        return Err(ExtError::HypothesisViolated(violated));
    }
    let iv = extend_symmetric(s0, a, tol)?;
    let commutes = |s: &HermitianMatrix| {
        let comm = (s.as_matrix() * bmat - bmat * s.as_matrix()).norm();
        comm <= tol.eq * (1.0 + bmat.norm() * s.norm())
    };
    Ok(commutes(&iv.s_min) && commutes(&iv.s_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{diag, unit_column};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn partial(domain: CMat, values: CMat) -> SymmetricPartialOperator {
        SymmetricPartialOperator::new(
            ComplexMatrix::new(domain).unwrap(),
            ComplexMatrix::new(values).unwrap(),
            &tol(),
        )
        .unwrap()
    }

    fn worked() -> SymmetricPartialOperator {
        partial(unit_column(2, 0), unit_column(2, 0))
    }

    #[test]
    fn a_bound_examples() {
        let t = tol();
        let id = PsdMatrix::identity(2);
        let s = partial(CMat::identity(2, 2), diag(&[2.0, 1.0]));
        assert!((a_bound(&s, &id, &t).unwrap() - 2.0).abs() < 1e-12);
        assert!((a_bound(&worked(), &id, &t).unwrap() - 1.0).abs() < 1e-12);
        let zero = partial(unit_column(2, 0), CMat::zeros(2, 1));
        assert_eq!(a_bound(&zero, &id, &t).unwrap(), 0.0);
    }

    #[test]
    fn lift_with_weighted_bound() {
        // A = diag(4,1), S0 e1 = 2 e1: U = 2, W = 1, α = 1/2.
        let t = tol();
        let a = PsdMatrix::from_matrix(diag(&[4.0, 1.0]), &t).unwrap();
        let s0 = partial(unit_column(2, 0), unit_column(2, 0) * C64::new(2.0, 0.0));
        let lifted = lift_symmetric(&s0, &a, &t).unwrap();
        assert!((lifted.alpha - 0.5).abs() < 1e-12);
        let q = &lifted.lift.range_basis;
        let e1 = q.adjoint() * unit_column(2, 0);
        assert!((&lifted.u - &e1 * C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((&lifted.w - &e1).norm() < 1e-12);
    }

    #[test]
    fn degenerate_zero_lift() {
        let t = tol();
        let s0 = partial(unit_column(2, 0), CMat::zeros(2, 1));
        let lifted = lift_symmetric(&s0, &PsdMatrix::zeros(2), &t).unwrap();
        assert_eq!(lifted.lift.rank, 0);
        assert_eq!(lifted.u.shape(), (0, 1));
        assert_eq!(lifted.alpha, 0.0);
        let iv = extend_symmetric(&s0, &PsdMatrix::zeros(2), &t).unwrap();
        assert_eq!(iv.s_min.as_matrix(), &CMat::zeros(2, 2));
    }

    #[test]
    fn worked_interval() {
        let t = tol();
        let iv = extend_symmetric(&worked(), &PsdMatrix::identity(2), &t).unwrap();
        assert!((iv.alpha - 1.0).abs() < 1e-12);
        assert!((iv.s_min.as_matrix() - diag(&[1.0, -1.0])).norm() < 1e-12);
        assert!((iv.s_max.as_matrix() - diag(&[1.0, 1.0])).norm() < 1e-12);

        assert!(in_interval(&iv.s_min, &iv, &t).unwrap());
        assert!(in_interval(&iv.interpolate(0.5), &iv, &t).unwrap());
        let outside = HermitianMatrix::new(diag(&[1.0, 2.0]), &t).unwrap();
        assert!(!in_interval(&outside, &iv, &t).unwrap());
    }

    #[test]
    fn everywhere_defined_interval_collapses() {
        let t = tol();
        let s = HermitianMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -3.0]], &t).unwrap();
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]], &t).unwrap();
        let s0 = SymmetricPartialOperator::restrict(&s, ComplexMatrix::identity(2), &t).unwrap();
        let iv = extend_symmetric(&s0, &a, &t).unwrap();
        assert!((iv.s_min.as_matrix() - s.as_matrix()).norm() < 1e-10);
        assert!((iv.s_max.as_matrix() - s.as_matrix()).norm() < 1e-10);
    }

    #[test]
    fn zero_values_give_zero_extensions() {
        let t = tol();
        let s0 = partial(unit_column(2, 0), CMat::zeros(2, 1));
        let iv = extend_symmetric(&s0, &PsdMatrix::identity(2), &t).unwrap();
        assert_eq!(iv.alpha, 0.0);
        assert!(iv.s_min.norm() < 1e-14 && iv.s_max.norm() < 1e-14);
    }

    #[test]
    fn alpha_of_total_examples() {
        let t = tol();
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]], &t).unwrap();
        assert!((alpha_of_total(a.hermitian(), &a, &t).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            alpha_of_total(&HermitianMatrix::zeros(2), &a, &t).unwrap(),
            0.0
        );
        let s = HermitianMatrix::from_real_rows(&[&[0.0, 3.0], &[3.0, 1.0]], &t).unwrap();
        let norm = spectral_norm(s.as_matrix());
        let got = alpha_of_total(&s, &PsdMatrix::identity(2), &t).unwrap();
        assert!((got - norm).abs() < 1e-12);
    }

    #[test]
    fn alpha_of_total_rejects_unsupported() {
        let t = tol();
        let a = PsdMatrix::from_matrix(diag(&[1.0, 0.0]), &t).unwrap();
        let s = HermitianMatrix::identity(2);
        assert!(matches!(
            alpha_of_total(&s, &a, &t),
            Err(ExtError::NotABounded(_))
        ));
    }

    #[test]
    fn values_outside_range_are_not_bounded() {
        let t = tol();
        let a = PsdMatrix::from_matrix(diag(&[1.0, 0.0]), &t).unwrap();
        let s0 = partial(CMat::identity(2, 2), diag(&[1.0, 1.0]));
        assert!(matches!(
            a_bound(&s0, &a, &t),
            Err(ExtError::NotABounded(_))
        ));
    }

    #[test]
    fn non_symmetric_partial_rejected() {
        let err = SymmetricPartialOperator::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap(),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, ExtError::NotSymmetric { .. }));
    }

    #[test]
    fn commutation_examples() {
        let t = tol();
        let id = PsdMatrix::identity(2);
        assert!(check_commutation(&HermitianMatrix::identity(2), &worked(), &id, &t).unwrap());
        assert!(check_commutation(&HermitianMatrix::zeros(2), &worked(), &id, &t).unwrap());
        let b = HermitianMatrix::new(diag(&[3.0, -2.0]), &t).unwrap();
        assert!(check_commutation(&b, &worked(), &id, &t).unwrap());
    }

    #[test]
    fn commutation_hypothesis_violation() {
        let t = tol();
        let b = HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]], &t).unwrap();
        let err = check_commutation(&b, &worked(), &PsdMatrix::identity(2), &t).unwrap_err();
        assert!(matches!(err, ExtError::HypothesisViolated(_)));
        let a = PsdMatrix::from_matrix(diag(&[2.0, 1.0]), &t).unwrap();
        let err = check_commutation(&HermitianMatrix::identity(2), &worked(), &a, &t).unwrap_err();
        assert!(matches!(err, ExtError::HypothesisViolated(_)));
    }
}
