//! Hermitian extensions of symmetric functionals defined on left ideals of
//! the matrix algebra `M_m(C)`.
//!
//! A functional is stored through its density: `g(x) = tr(Φ·x)`. A positive
//! functional `f` with density `F` induces the form `⟨x, y⟩_f = f(y†x)`,
//! which on column-major coordinates `vec(x) ∈ C^{m²}` is the matrix
//! `Fᵀ ⊗ I_m`. Its Hilbert lift is the GNS space of `f`; left multiplication
//! by `x` is `I_m ⊗ x` and acts on the lift as `π_f(x)`.

use crate::error::{ExtError, Result};
use crate::kvn::{hilbert_lift, HilbertLift};
use crate::numkit::{
    self, hermitian_eigen, loewner_leq, matrix_unit, projection_basis, spectral_norm, CMat, CVec,
    ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances, C64,
};
use crate::oracle::{sampled_functional_bound, Rng};
use crate::sa_ext::{
    alpha_of_total_with, extend_with_lift, lift_symmetric, ExtensionInterval,
    SymmetricPartialOperator,
};

/// Bound constant of the necessity direction: a hermitian extension with
/// Hahn–Jordan parts `g±` makes `g₀` bounded by `f = g₊ + g₋` with this
/// constant.
pub const NECESSITY_BOUND: f64 = 4.0;

/// Functional `x ↦ tr(Φ·x)` on `M_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMatrix(CMat);

impl FunctionalMatrix {
    pub fn new(phi: ComplexMatrix) -> Result<Self> {
        numkit::require_square(&phi, "functional density")?;
        Ok(Self(phi.into_inner()))
    }

    pub fn zeros(m: usize) -> Self {
        Self(CMat::zeros(m, m))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn density(&self) -> &CMat {
        &self.0
    }

    pub fn eval(&self, x: &CMat) -> C64 {
        (&self.0 * x).trace()
    }

    /// Hermitian functionals are exactly those with hermitian density.
    pub fn hermitian(&self, tol: &Tolerances) -> Result<HermitianMatrix> {
        numkit::hermitize(&ComplexMatrix::new(self.0.clone())?, tol)
    }
}

/// Left ideal `{a : a = a·P}` of `M_m` for an orthogonal projection `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftIdeal {
    projection: CMat,
    range: CMat,
}

impl LeftIdeal {
    pub fn new(projection: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        numkit::check_projection(&projection, tol)?;
        let p = HermitianMatrix::symmetrized(&projection).into_inner();
        let range = projection_basis(&p, tol);
        Ok(Self {
            projection: p,
            range,
        })
    }

    pub fn full(m: usize) -> Self {
        Self {
            projection: CMat::identity(m, m),
            range: CMat::identity(m, m),
        }
    }

    pub fn size(&self) -> usize {
        self.projection.nrows()
    }

    pub fn projection(&self) -> &CMat {
        &self.projection
    }

    /// Orthonormal basis `e_i·q_l†` of the ideal, `q_l` spanning `ran P`.
    pub fn basis(&self) -> Vec<CMat> {
        let m = self.size();
        let mut out = Vec::with_capacity(m * self.range.ncols());
        for l in 0..self.range.ncols() {
            let q = self.range.column(l);
            for i in 0..m {
                let mut a = CMat::zeros(m, m);
                a.set_row(i, &q.adjoint());
                out.push(a);
            }
        }
        out
    }

    /// Spanning set `E_ij·P`.
    pub fn spanning_set(&self) -> Vec<CMat> {
        let m = self.size();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(matrix_unit(m, i, j) * &self.projection);
            }
        }
        out
    }

    pub fn contains(&self, a: &CMat, tol: &Tolerances) -> bool {
        (a * &self.projection - a).norm() <= tol.eq * (1.0 + a.norm())
    }
}

/// Functional `g₀(a) = tr(Γ·a)` on a left ideal, with `Γ = P·Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFunctional {
    ideal: LeftIdeal,
    gamma: CMat,
}

impl PartialFunctional {
    pub fn new(ideal: LeftIdeal, gamma: ComplexMatrix) -> Result<Self> {
        let m = ideal.size();
        numkit::require_shape(&gamma, m, m, "gamma")?;
        let gamma = &ideal.projection * gamma.as_matrix();
        Ok(Self { ideal, gamma })
    }

    /// Restriction of a total functional to the ideal.
    pub fn restrict(g: &FunctionalMatrix, ideal: LeftIdeal) -> Result<Self> {
        Self::new(ideal, ComplexMatrix::new(g.density().clone())?)
    }

    pub fn size(&self) -> usize {
        self.ideal.size()
    }

    pub fn ideal(&self) -> &LeftIdeal {
        &self.ideal
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    pub fn eval(&self, a: &CMat) -> C64 {
        (&self.gamma * a).trace()
    }

    /// Largest `|g₀(b†a) − conj g₀(a†b)|` over the spanning set of the ideal.
    pub fn symmetry_residual(&self) -> f64 {
        let span = self.ideal.spanning_set();
        let mut worst = 0.0_f64;
        for a in &span {
            for b in &span {
                let lhs = self.eval(&(b.adjoint() * a));
                let rhs = self.eval(&(a.adjoint() * b)).conj();
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// Largest `|g(a) − g₀(a)|` over the orthonormal basis of the ideal.
    pub fn extension_residual(&self, g: &FunctionalMatrix) -> f64 {
        self.ideal
            .basis()
            .iter()
            .map(|a| (g.eval(a) - self.eval(a)).norm())
            .fold(0.0, f64::max)
    }
}

pub fn is_symmetric_on_ideal(pf: &PartialFunctional, tol: &Tolerances) -> bool {
    pf.symmetry_residual() <= tol.eq * (1.0 + pf.gamma.norm())
}

fn vectorize(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

/// `Fᵀ ⊗ I_m`: the operator with `vec(y)†·A·vec(x) = f(y†x)`.
pub fn gram_operator(f: &PsdMatrix) -> CMat {
    let m = f.dim();
    f.transpose().kronecker(&CMat::identity(m, m))
}

/// Operator of the sesquilinear form `(x, y) ↦ g(y†x)`.
pub fn form_operator(g: &FunctionalMatrix) -> CMat {
    let m = g.size();
    g.density().transpose().kronecker(&CMat::identity(m, m))
}

/// Reads the density of `x ↦ vec(1)†·S·vec(x)`.
fn functional_from_form(s: &CMat, m: usize) -> CMat {
    let unit = vectorize(&CMat::identity(m, m));
    let row = unit.adjoint() * s;
    // tr(Φ E_ij) = Φ_ji and E_ij sits at index i + m·j.
    CMat::from_fn(m, m, |j, i| row[i + m * j])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentabilityReport {
    pub representable: bool,
    /// `((i, j), M)` with `|f(y†x†xy)| ≤ M·f(y†y)` for `x = E_ij`.
    pub constants: Vec<((usize, usize), f64)>,
}

/// Every positive functional on `M_m` is representable with `M_x = ‖x‖²`.
pub fn check_representable(f: &PsdMatrix) -> Result<RepresentabilityReport> {
    let m = f.dim();
    let eig = hermitian_eigen(f.as_matrix());
    if let Some(&min) = eig.values.last() {
        if min < -Tolerances::default().psd * (1.0 + eig.values[0].max(0.0)) {
            return Err(ExtError::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    let mut constants = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let norm = spectral_norm(&matrix_unit(m, i, j));
            constants.push(((i, j), norm * norm));
        }
    }
    Ok(RepresentabilityReport {
        representable: true,
        constants,
    })
}

/// GNS space of a positive functional, realized as the lift of its form.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsSpace {
    pub f: PsdMatrix,
    pub lift: HilbertLift,
    /// Coordinates of the class of the unit.
    pub cyclic: CVec,
}

impl GnsSpace {
    pub fn dim(&self) -> usize {
        self.lift.rank
    }

    pub fn algebra_size(&self) -> usize {
        self.f.dim()
    }

    /// Coordinates of the class `[x]`.
    pub fn vector(&self, x: &CMat) -> CVec {
        self.lift.adjoint_embedding() * vectorize(x)
    }

    /// `π_f(x)` in GNS coordinates.
    pub fn represent(&self, x: &CMat) -> CMat {
        let m = self.algebra_size();
        let left = CMat::identity(m, m).kronecker(x);
        self.lift.range_basis.adjoint() * left * &self.lift.range_basis
    }

    /// `⟨π_f(x)ξ, ξ⟩` for the cyclic vector `ξ`.
    pub fn vector_state(&self, x: &CMat) -> C64 {
        self.cyclic.dotc(&(self.represent(x) * &self.cyclic))
    }
}

pub fn gns(f: &PsdMatrix, tol: &Tolerances) -> Result<GnsSpace> {
    let m = f.dim();
    let form = PsdMatrix::from_matrix(gram_operator(f), tol)?;
    let lift = hilbert_lift(&form, tol)?;
    let cyclic = lift.adjoint_embedding() * vectorize(&CMat::identity(m, m));
    Ok(GnsSpace {
        f: f.clone(),
        lift,
        cyclic,
    })
}

/// `S₀` on `C^{m²}` with `⟨S₀ vec(a), vec(x)⟩ = g₀(x†a)` for `a` in the ideal.
pub fn functional_operator(
    pf: &PartialFunctional,
    tol: &Tolerances,
) -> Result<SymmetricPartialOperator> {
    let m = pf.size();
    let basis = pf.ideal.basis();
    let mut domain = CMat::zeros(m * m, basis.len());
    let mut values = CMat::zeros(m * m, basis.len());
    for (j, a) in basis.iter().enumerate() {
        domain.set_column(j, &vectorize(a));
        values.set_column(j, &vectorize(&(a * &pf.gamma)));
    }
    let relaxed = Tolerances {
        herm: tol.herm.max(tol.eq),
        ..*tol
    };
    SymmetricPartialOperator::new(
        ComplexMatrix::new(domain)?,
        ComplexMatrix::new(values)?,
        &relaxed,
    )
}

fn require_symmetric(pf: &PartialFunctional, tol: &Tolerances) -> Result<()> {
    if !is_symmetric_on_ideal(pf, tol) {
        return Err(ExtError::NotSymmetric {
            residual: pf.symmetry_residual(),
        });
    }
    Ok(())
}

fn require_size(pf: &PartialFunctional, f: &PsdMatrix) -> Result<()> {
    if pf.size() != f.dim() {
        return Err(ExtError::DimensionMismatch(format!(
            "functional lives on M_{} but f on M_{}",
            pf.size(),
            f.dim()
        )));
    }
    Ok(())
}

fn not_f_bounded(e: ExtError) -> ExtError {
    match e {
        ExtError::NotABounded(msg) => ExtError::NotFBounded(msg),
        other => other,
    }
}

/// Smallest `α` with `|g₀(x†a)|² ≤ α² f(x†x) f(a†a)`.
pub fn f_bound(pf: &PartialFunctional, f: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    require_size(pf, f)?;
    require_symmetric(pf, tol)?;
    let op = functional_operator(pf, tol)?;
    let form = PsdMatrix::from_matrix(gram_operator(f), tol)?;
    lift_symmetric(&op, &form, tol)
        .map(|l| l.alpha)
        .map_err(not_f_bounded)
}

/// `f`-bound of a total hermitian functional.
pub fn total_f_bound(g: &FunctionalMatrix, f: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    if g.size() != f.dim() {
        return Err(ExtError::DimensionMismatch(format!(
            "functional lives on M_{} but f on M_{}",
            g.size(),
            f.dim()
        )));
    }
    let lift = gns(f, tol)?.lift;
    alpha_of_total_with(&form_operator(g), &lift, tol).map_err(not_f_bounded)
}

/// Extremal hermitian extensions with the same `f`-bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalExtension {
    pub g_min: FunctionalMatrix,
    pub g_max: FunctionalMatrix,
    pub alpha: f64,
    pub interval: ExtensionInterval,
    pub gns: GnsSpace,
}

pub fn extend_functional(
    pf: &PartialFunctional,
    f: &PsdMatrix,
    tol: &Tolerances,
) -> Result<FunctionalExtension> {
    require_size(pf, f)?;
    require_symmetric(pf, tol)?;
    let space = gns(f, tol)?;
    let op = functional_operator(pf, tol)?;
    let iv = extend_with_lift(&op, space.lift.clone(), tol).map_err(not_f_bounded)?;
    let m = pf.size();
    let relaxed = Tolerances {
        herm: tol.herm.max(tol.eq),
        ..*tol
    };
    let read = |s: &HermitianMatrix| -> Result<FunctionalMatrix> {
        let phi = functional_from_form(s.as_matrix(), m);
        let phi = HermitianMatrix::new(phi, &relaxed)
            .map_err(|e| ExtError::NumericalFailure(format!("extension is not hermitian: {e}")))?;
        Ok(FunctionalMatrix(phi.into_inner()))
    };
    Ok(FunctionalExtension {
        g_min: read(&iv.s_min)?,
        g_max: read(&iv.s_max)?,
        alpha: iv.alpha,
        interval: iv,
        gns: space,
    })
}

/// `g_m ≤ g ≤ g_M` in the order of positive functionals.
pub fn functional_interval_member(
    g: &FunctionalMatrix,
    g_min: &FunctionalMatrix,
    g_max: &FunctionalMatrix,
    tol: &Tolerances,
) -> Result<bool> {
    let m = g.size();
    if g_min.size() != m || g_max.size() != m {
        return Err(ExtError::DimensionMismatch(format!(
            "functionals on M_{}, M_{}, M_{}",
            m,
            g_min.size(),
            g_max.size()
        )));
    }
    let (g, lo, hi) = (
        g.hermitian(tol)?,
        g_min.hermitian(tol)?,
        g_max.hermitian(tol)?,
    );
    Ok(loewner_leq(&lo, &g, tol)? && loewner_leq(&g, &hi, tol)?)
}

/// Splits a hermitian functional into positive parts with orthogonal
/// supports: `g = g₊ − g₋`.
pub fn hahn_jordan(
    g: &FunctionalMatrix,
    tol: &Tolerances,
) -> Result<(FunctionalMatrix, FunctionalMatrix)> {
    let h = g.hermitian(tol)?;
    let eig = h.eigen();
    let plus = eig.recompose_with(|l| l.max(0.0));
    let minus = eig.recompose_with(|l| (-l).max(0.0));
    Ok((
        FunctionalMatrix(HermitianMatrix::symmetrized(&plus).into_inner()),
        FunctionalMatrix(HermitianMatrix::symmetrized(&minus).into_inner()),
    ))
}

#[derive(Debug, Clone)]
pub struct CstarOptions {
    /// Positive functional to try first on the sufficiency path.
    pub f: Option<PsdMatrix>,
    /// Hermitian extension to test on the necessity path; defaults to the
    /// minimal extension found on the sufficiency path.
    pub extension: Option<FunctionalMatrix>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CstarOptions {
    fn default() -> Self {
        Self {
            f: None,
            extension: None,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyWitness {
    pub f: PsdMatrix,
    /// Whether `f` came from the caller (otherwise the trace was used).
    pub supplied: bool,
    pub g_min: FunctionalMatrix,
    pub g_max: FunctionalMatrix,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityReport {
    pub extension: FunctionalMatrix,
    /// `f = g₊ + g₋`.
    pub f: FunctionalMatrix,
    pub constant: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest sampled `|g₀(x†a)| / (f(x†x) f(a†a))^{1/2}`.
    pub measured_constant: f64,
    /// Exact `f`-bound of `g₀` with respect to `g₊ + g₋`.
    pub spectral_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CstarDecision {
    pub extendible: bool,
    pub sufficiency: SufficiencyWitness,
    pub necessity: NecessityReport,
}

/// Decides whether `g₀` has a continuous hermitian extension and reports
/// both directions of the characterization.
pub fn cstar_extendibility(
    pf: &PartialFunctional,
    opts: &CstarOptions,
    tol: &Tolerances,
) -> Result<CstarDecision> {
    require_symmetric(pf, tol)?;
    let m = pf.size();

    let supplied = match &opts.f {
        Some(f) => match extend_functional(pf, f, tol) {
            Ok(ext) => Some((f.clone(), ext)),
            Err(ExtError::NotFBounded(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let (f, ext, from_caller) = match supplied {
        Some((f, ext)) => (f, ext, true),
        None => {
            let trace = PsdMatrix::identity(m);
            let ext = extend_functional(pf, &trace, tol)?;
            (trace, ext, false)
        }
    };
    let sufficiency = SufficiencyWitness {
        f,
        supplied: from_caller,
        g_min: ext.g_min.clone(),
        g_max: ext.g_max.clone(),
        alpha: ext.alpha,
    };

    let extension = opts.extension.clone().unwrap_or_else(|| ext.g_min.clone());
    let mut failed = Vec::new();
    if extension.size() != m {
        return Err(ExtError::DimensionMismatch(format!(
            "extension lives on M_{} but g0 on M_{m}",
            extension.size()
        )));
    }
    if extension.hermitian(tol).is_err() {
        failed.push("extension is not hermitian".to_string());
    }
    let residual = pf.extension_residual(&extension);
    if residual > tol.eq * (1.0 + pf.gamma.norm()) {
        failed.push(format!(
            "extension does not agree with g0 on the ideal (residual {residual:.3e})"
        ));
    }
    if !failed.is_empty() {
        return Err(ExtError::HypothesisViolated(failed));
    }
    let (plus, minus) = hahn_jordan(&extension, tol)?;
    let dominating = FunctionalMatrix(plus.density() + minus.density());
    let dominating_psd = PsdMatrix::from_matrix(dominating.density().clone(), tol)?;
    let sampled = sampled_functional_bound(
        pf,
        &dominating_psd,
        NECESSITY_BOUND,
        opts.samples,
        &Rng::new(opts.seed),
        tol,
    );
    let spectral_bound = f_bound(pf, &dominating_psd, tol).ok();
    Ok(CstarDecision {
        extendible: true,
        sufficiency,
        necessity: NecessityReport {
            extension,
            f: dominating,
            constant: NECESSITY_BOUND,
            samples: opts.samples,
            violations: sampled.violations,
            measured_constant: sampled.supremum,
            spectral_bound,
        },
    })
}
