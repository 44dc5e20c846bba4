//! Independent checks: seeded randomness, sampled lower bounds for
//! `A`-bounds, brute-force completion search and random instances with a
//! known solution.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ExtError, Result};
use crate::func_ext::{FunctionalMatrix, LeftIdeal, PartialFunctional};
use crate::kvn::PartialPositiveOperator;
use crate::numkit::{
    pinv, range_basis, spectral_norm, CMat, CVec, ComplexMatrix, HermitianMatrix, PsdMatrix,
    Tolerances, C64,
};
use crate::parrott::{ParrottInstance, PartialMap, StrongParrottInstance};
use crate::sa_ext::SymmetricPartialOperator;

/// Largest ambient dimension `random_instance` produces.
pub const MAX_DIM: usize = 16;
/// Largest matrix algebra `M_m` for functional instances.
pub const MAX_ALGEBRA: usize = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d2_49e9_1d46_7eb5);
    z ^ (z >> 31)
}

/// Seeded ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream determined by the base seed and `stream` only.
    pub fn split(&self, stream: u64) -> Self {
        Self::new(splitmix(self.seed ^ splitmix(stream.wrapping_add(1))))
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn integer(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circular complex gaussian with unit variance.
    pub fn complex_gaussian(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.gaussian() * s, self.gaussian() * s)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> CMat {
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.complex_gaussian();
            }
        }
        m
    }

    pub fn gaussian_vector(&mut self, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| self.complex_gaussian())
    }
}

/// What to sample a bound for.
#[derive(Debug, Clone, Copy)]
pub enum BoundTarget<'a> {
    Partial(&'a SymmetricPartialOperator),
    Total(&'a HermitianMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleReport {
    /// Largest ratio `|y†Vc| / ((c†Kc)(y†Ay))^{1/2}` seen, `K = D†AD`.
    pub supremum: f64,
    pub evaluated: usize,
    pub skipped: usize,
    /// Pairs breaking `|y†Vc|² ≤ C²(c†Kc)(y†Ay)` for the requested `C`.
    pub violations: usize,
}

const REFINEMENT_ROUNDS: usize = 3;

/// Samples pairs `(c, y)` for the map `D·c ↦ V·c` against `A` on both sides.
/// Each random start is followed by alternating exact maximizations in `y`
/// and in `c`, so every recorded ratio is attained by an actual pair and the
/// supremum never exceeds the true bound.
pub fn sample_pairs(
    domain: &CMat,
    values: &CMat,
    a: &CMat,
    samples: usize,
    constant: Option<f64>,
    rng: &Rng,
    tol: &Tolerances,
) -> SampleReport {
    let (n, k) = domain.shape();
    let mut report = SampleReport {
        supremum: 0.0,
        evaluated: 0,
        skipped: 0,
        violations: 0,
    };
    if n == 0 || k == 0 {
        return report;
    }
    let a_norm = spectral_norm(a);
    let v_norm = spectral_norm(values);
    let a_pinv = pinv(a, tol);
    let gram = domain.adjoint() * a * domain;
    let gram_pinv = pinv(&gram, tol);

    let record = |c: &CVec, y: &CVec, report: &mut SampleReport| {
        let x = domain * c;
        let num = y.dotc(&(values * c)).norm();
        let dx = x.dotc(&(a * &x)).re.max(0.0);
        let dy = y.dotc(&(a * y)).re.max(0.0);
        let tiny_x = dx <= tol.eq * a_norm * x.norm_squared();
        let tiny_y = dy <= tol.eq * a_norm * y.norm_squared();
        if tiny_x || tiny_y {
            report.skipped += 1;
            if num > tol.eq.sqrt() * (1.0 + v_norm) * c.norm() * y.norm() {
                report.violations += usize::from(constant.is_some());
            }
            return;
        }
        report.evaluated += 1;
        let ratio = num / (dx * dy).sqrt();
        report.supremum = report.supremum.max(ratio);
        if let Some(bound) = constant {
            if num * num > bound * bound * dx * dy * (1.0 + tol.eq) {
                report.violations += 1;
            }
        }
    };

    for i in 0..samples {
        let mut local = rng.split(i as u64);
        let mut c = local.gaussian_vector(k);
        let mut y = local.gaussian_vector(n);
        record(&c, &y, &mut report);
        for _ in 0..REFINEMENT_ROUNDS {
            y = &a_pinv * (values * &c);
            if y.norm() == 0.0 {
                break;
            }
            record(&c, &y, &mut report);
            c = &gram_pinv * (values.adjoint() * &y);
            if c.norm() == 0.0 {
                break;
            }
            record(&c, &y, &mut report);
        }
    }
    report
}

/// Sampled lower estimate of the `A`-bound of a partial or total operator.
pub fn sampled_bound(
    target: BoundTarget<'_>,
    a: &PsdMatrix,
    samples: usize,
    rng: &Rng,
    tol: &Tolerances,
) -> f64 {
    match target {
        BoundTarget::Partial(s0) => {
            sample_pairs(s0.domain(), s0.values(), a, samples, None, rng, tol).supremum
        }
        BoundTarget::Total(s) => {
            let n = s.dim();
            sample_pairs(&CMat::identity(n, n), s, a, samples, None, rng, tol).supremum
        }
    }
}

/// Sampled `f`-bound of a partial functional, with violations counted
/// against `constant`.
pub fn sampled_functional_bound(
    pf: &PartialFunctional,
    f: &PsdMatrix,
    constant: f64,
    samples: usize,
    rng: &Rng,
    tol: &Tolerances,
) -> SampleReport {
    let m = pf.size();
    let basis = pf.ideal().basis();
    let mut domain = CMat::zeros(m * m, basis.len());
    let mut values = CMat::zeros(m * m, basis.len());
    for (j, a) in basis.iter().enumerate() {
        domain.set_column(j, &CVec::from_column_slice(a.as_slice()));
        let image = a * pf.gamma();
        values.set_column(j, &CVec::from_column_slice(image.as_slice()));
    }
    let form = f.transpose().kronecker(&CMat::identity(m, m));
    sample_pairs(&domain, &values, &form, samples, Some(constant), rng, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub params: Vec<f64>,
    pub completion: CMat,
    pub objective: f64,
    pub evaluated: usize,
}

/// Grid search over a family of at most three real parameters, followed by
/// one zoomed grid around the best feasible point.
pub fn min_completion_search<F, C, O>(
    bounds: &[(f64, f64)],
    points: usize,
    family: F,
    feasible: C,
    objective: O,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> CMat,
    C: Fn(&CMat) -> bool,
    O: Fn(&CMat) -> f64,
{
    let dim = bounds.len();
    if dim == 0 || dim > 3 {
        return Err(ExtError::InvalidDims(format!(
            "search family needs 1 to 3 parameters, got {dim}"
        )));
    }
    if bounds
        .iter()
        .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(ExtError::InvalidDims(
            "search bounds must be finite intervals".into(),
        ));
    }
    // Odd counts put the centre of the box on the grid.
    let per_axis = ((points.max(8) as f64).powf(1.0 / dim as f64).round() as usize).max(2) | 1;
    let mut best: Option<SearchOutcome> = None;
    let mut evaluated = 0;
    let mut scan = |ranges: &[(f64, f64)], best: &mut Option<SearchOutcome>| {
        let total = per_axis.pow(dim as u32);
        let mut params = vec![0.0; dim];
        for flat in 0..total {
            let mut rest = flat;
            for (p, &(lo, hi)) in params.iter_mut().zip(ranges) {
                let idx = rest % per_axis;
                rest /= per_axis;
                *p = lo + (hi - lo) * idx as f64 / (per_axis - 1) as f64;
            }
            let candidate = family(&params);
            evaluated += 1;
            if !feasible(&candidate) {
                continue;
            }
            let value = objective(&candidate);
            if best.as_ref().is_none_or(|b| value < b.objective) {
                *best = Some(SearchOutcome {
                    params: params.clone(),
                    completion: candidate,
                    objective: value,
                    evaluated: 0,
                });
            }
        }
    };
    scan(bounds, &mut best);
    let centre = best.as_ref().ok_or(ExtError::Infeasible)?.params.clone();
    let zoom: Vec<(f64, f64)> = bounds
        .iter()
        .zip(&centre)
        .map(|(&(lo, hi), &p)| {
            let cell = (hi - lo) / (per_axis - 1) as f64;
            ((p - cell).max(lo), (p + cell).min(hi))
        })
        .collect();
    scan(&zoom, &mut best);
    let mut out = best.ok_or(ExtError::Infeasible)?;
    out.evaluated = evaluated;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Kvn,
    SaExt,
    Parrott,
    StrongParrott,
    Functional,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 5] = [
        InstanceKind::Kvn,
        InstanceKind::SaExt,
        InstanceKind::Parrott,
        InstanceKind::StrongParrott,
        InstanceKind::Functional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Kvn => "kvn",
            InstanceKind::SaExt => "sa-ext",
            InstanceKind::Parrott => "parrott",
            InstanceKind::StrongParrott => "strong-parrott",
            InstanceKind::Functional => "functional-ext",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Random instance together with one solution it was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Kvn {
        op: PartialPositiveOperator,
        hidden: PsdMatrix,
    },
    SaExt {
        s0: SymmetricPartialOperator,
        a: PsdMatrix,
        hidden: HermitianMatrix,
    },
    Parrott {
        instance: ParrottInstance,
        hidden: CMat,
    },
    StrongParrott {
        instance: StrongParrottInstance,
        hidden: CMat,
    },
    Functional {
        partial: PartialFunctional,
        f: PsdMatrix,
        hidden: FunctionalMatrix,
    },
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Kvn { .. } => InstanceKind::Kvn,
            Instance::SaExt { .. } => InstanceKind::SaExt,
            Instance::Parrott { .. } => InstanceKind::Parrott,
            Instance::StrongParrott { .. } => InstanceKind::StrongParrott,
            Instance::Functional { .. } => InstanceKind::Functional,
        }
    }
}

fn random_psd(n: usize, rng: &mut Rng) -> (CMat, CMat) {
    let rank = if n == 0 || rng.uniform() < 0.5 {
        n
    } else {
        rng.integer(1, n)
    };
    let r = rng.gaussian_matrix(n, rank);
    (&r * r.adjoint(), r)
}

fn random_hermitian(n: usize, rng: &mut Rng) -> CMat {
    let g = rng.gaussian_matrix(n, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

fn random_contraction(rows: usize, cols: usize, rng: &mut Rng) -> CMat {
    let g = rng.gaussian_matrix(rows, cols);
    let norm = spectral_norm(&g);
    if norm == 0.0 {
        return g;
    }
    let target = 0.5 + 0.5 * rng.uniform();
    g * C64::new(target / norm, 0.0)
}

fn psd(m: CMat) -> Result<PsdMatrix> {
    PsdMatrix::from_matrix(m, &Tolerances::default())
}

fn check_dims(kind: InstanceKind, dims: &[usize], allowed: &[usize]) -> Result<()> {
    if !allowed.contains(&dims.len()) {
        return Err(ExtError::InvalidDims(format!(
            "{} expects {:?} dimensions, got {}",
            kind.name(),
            allowed,
            dims.len()
        )));
    }
    Ok(())
}

fn ambient(n: usize) -> Result<usize> {
    if n == 0 || n > MAX_DIM {
        return Err(ExtError::InvalidDims(format!(
            "dimension {n} outside 1..={MAX_DIM}"
        )));
    }
    Ok(n)
}

fn subspace(k: Option<usize>, n: usize, rng: &mut Rng) -> Result<usize> {
    match k {
        Some(k) if k > n => Err(ExtError::InvalidDims(format!(
            "domain dimension {k} exceeds ambient dimension {n}"
        ))),
        Some(k) => Ok(k),
        None => Ok(rng.integer(1, n)),
    }
}

/// Random instance of the given kind built from a hidden solution, so it is
/// feasible by construction.
///
/// `dims` is `[n]` or `[n, k]` for `kvn` and `sa-ext`, `[n1, n2]` or
/// `[n1, n2, k1, k2]` for `parrott`, `[h, k, p]` or `[h, k, p, q]` for
/// `strong-parrott` and `[m]` for `functional-ext`.
pub fn random_instance(kind: InstanceKind, dims: &[usize], rng: &mut Rng) -> Result<Instance> {
    let tol = Tolerances::default();
    match kind {
        InstanceKind::Kvn => {
            check_dims(kind, dims, &[1, 2])?;
            let n = ambient(dims[0])?;
            let k = subspace(dims.get(1).copied(), n, rng)?;
            let (b, _) = random_psd(n, rng);
            let d = rng.gaussian_matrix(n, k);
            let g = &b * &d;
            let op =
                PartialPositiveOperator::new(ComplexMatrix::new(d)?, ComplexMatrix::new(g)?, &tol)?;
            Ok(Instance::Kvn {
                op,
                hidden: psd(b)?,
            })
        }
        InstanceKind::SaExt => {
            check_dims(kind, dims, &[1, 2])?;
            let n = ambient(dims[0])?;
            let k = subspace(dims.get(1).copied(), n, rng)?;
            let (a, r) = random_psd(n, rng);
            let h = random_hermitian(r.ncols(), rng);
            let s = &r * h * r.adjoint();
            let d = rng.gaussian_matrix(n, k);
            let v = &s * &d;
            let s0 = SymmetricPartialOperator::new(
                ComplexMatrix::new(d)?,
                ComplexMatrix::new(v)?,
                &tol,
            )?;
            Ok(Instance::SaExt {
                s0,
                a: psd(a)?,
                hidden: HermitianMatrix::new(s, &tol)?,
            })
        }
        InstanceKind::Parrott => {
            check_dims(kind, dims, &[2, 4])?;
            let (n1, n2) = (ambient(dims[0])?, ambient(dims[1])?);
            let k1 = subspace(dims.get(2).copied(), n1, rng)?;
            let k2 = subspace(dims.get(3).copied(), n2, rng)?;
            let (a1, r1) = random_psd(n1, rng);
            let (a2, r2) = random_psd(n2, rng);
            let x = random_contraction(r2.ncols(), r1.ncols(), rng);
            let t = &r2 * x * r1.adjoint();
            let d1 = rng.gaussian_matrix(n1, k1);
            let d2 = rng.gaussian_matrix(n2, k2);
            let v1 = &t * &d1;
            let v2 = t.adjoint() * &d2;
            let t1 = PartialMap::new(ComplexMatrix::new(d1)?, ComplexMatrix::new(v1)?, &tol)?;
            let t2 = PartialMap::new(ComplexMatrix::new(d2)?, ComplexMatrix::new(v2)?, &tol)?;
            let instance = ParrottInstance::new(t1, t2, psd(a1)?, psd(a2)?, 1.0, 1.0)?;
            Ok(Instance::Parrott {
                instance,
                hidden: t,
            })
        }
        InstanceKind::StrongParrott => {
            check_dims(kind, dims, &[3, 4])?;
            let h = ambient(dims[0])?;
            let k = ambient(dims[1])?;
            let p = ambient(dims[2])?;
            let q = ambient(dims.get(3).copied().unwrap_or(p))?;
            let x = random_contraction(k, h, rng);
            let s1 = rng.gaussian_matrix(h, p);
            let t2 = rng.gaussian_matrix(q, k);
            let s2 = &x * &s1;
            let t1 = &t2 * &x;
            let instance = StrongParrottInstance::new(
                ComplexMatrix::new(s1)?,
                ComplexMatrix::new(s2)?,
                ComplexMatrix::new(t1)?,
                ComplexMatrix::new(t2)?,
            )?;
            Ok(Instance::StrongParrott {
                instance,
                hidden: x,
            })
        }
        InstanceKind::Functional => {
            check_dims(kind, dims, &[1])?;
            let m = dims[0];
            if m == 0 || m > MAX_ALGEBRA {
                return Err(ExtError::InvalidDims(format!(
                    "algebra size {m} outside 1..={MAX_ALGEBRA}"
                )));
            }
            let rank = rng.integer(0, m);
            let q = range_basis(&rng.gaussian_matrix(m, rank), &tol);
            let p = &q * q.adjoint();
            let (f, r) = random_psd(m, rng);
            let h = random_hermitian(r.ncols(), rng);
            let phi = HermitianMatrix::new(&r * h * r.adjoint(), &tol)?.into_inner();
            let ideal = LeftIdeal::new(ComplexMatrix::new(p.clone())?, &tol)?;
            let partial = PartialFunctional::new(ideal, ComplexMatrix::new(&p * &phi)?)?;
            Ok(Instance::Functional {
                partial,
                f: psd(f)?,
                hidden: FunctionalMatrix::new(ComplexMatrix::new(phi)?)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{diag, real_matrix};
    use crate::sa_ext::a_bound;

    #[test]
    fn rng_is_reproducible_and_splits_differ() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        let xs: Vec<f64> = (0..5).map(|_| a.gaussian()).collect();
        let ys: Vec<f64> = (0..5).map(|_| b.gaussian()).collect();
        assert_eq!(xs, ys);
        let base = Rng::new(7);
        assert_eq!(base.split(3).uniform(), base.split(3).uniform());
        assert_ne!(base.split(3).uniform(), base.split(4).uniform());
    }

    #[test]
    fn sampled_bound_examples() {
        let tol = Tolerances::default();
        let s = HermitianMatrix::new(diag(&[2.0, -1.0]), &tol).unwrap();
        let id = PsdMatrix::identity(2);
        let est = sampled_bound(BoundTarget::Total(&s), &id, 100, &Rng::new(1), &tol);
        assert!(est <= 2.0 + 1e-12 && est > 2.0 - 1e-3, "{est}");
        let zero = HermitianMatrix::zeros(2);
        assert_eq!(
            sampled_bound(BoundTarget::Total(&zero), &id, 100, &Rng::new(1), &tol),
            0.0
        );
    }

    #[test]
    fn sampled_bound_never_exceeds_exact() {
        let tol = Tolerances::default();
        let mut rng = Rng::new(11);
        for _ in 0..10 {
            let Instance::SaExt { s0, a, .. } =
                random_instance(InstanceKind::SaExt, &[6], &mut rng).unwrap()
            else {
                unreachable!()
            };
            let exact = a_bound(&s0, &a, &tol).unwrap();
            let est = sampled_bound(BoundTarget::Partial(&s0), &a, 200, &Rng::new(3), &tol);
            assert!(est <= exact * (1.0 + 1e-8) + 1e-12, "{est} > {exact}");
            assert!(est >= 0.98 * exact, "{est} vs {exact}");
        }
    }

    #[test]
    fn search_finds_parrott_minimum() {
        // Completions [[1, 1], [1, x]] of the known entries; the minimal norm
        // over x is at x = -1.
        let result = min_completion_search(
            &[(-2.0, 2.0)],
            1000,
            |p| real_matrix(2, 2, &[1.0, 1.0, 1.0, p[0]]),
            |_| true,
            spectral_norm,
        )
        .unwrap();
        assert!((result.params[0] + 1.0).abs() < 1e-4);
        assert!((result.objective - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn search_reports_infeasible() {
        let err =
            min_completion_search(&[(0.0, 1.0)], 10, |_| CMat::zeros(1, 1), |_| false, |_| 0.0)
                .unwrap_err();
        assert!(matches!(err, ExtError::Infeasible));
        assert!(matches!(
            min_completion_search(&[], 10, |_| CMat::zeros(1, 1), |_| true, |_| 0.0),
            Err(ExtError::InvalidDims(_))
        ));
    }

    #[test]
    fn random_instances_are_reproducible() {
        for kind in InstanceKind::ALL {
            let dims: &[usize] = match kind {
                InstanceKind::Parrott => &[3, 4],
                InstanceKind::StrongParrott => &[3, 4, 2],
                InstanceKind::Functional => &[3],
                _ => &[5],
            };
            let a = random_instance(kind, dims, &mut Rng::new(99)).unwrap();
            let b = random_instance(kind, dims, &mut Rng::new(99)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.kind(), kind);
        }
    }

    #[test]
    fn random_instance_limits() {
        let mut rng = Rng::new(0);
        assert!(matches!(
            random_instance(InstanceKind::Kvn, &[17], &mut rng),
            Err(ExtError::InvalidDims(_))
        ));
        assert!(matches!(
            random_instance(InstanceKind::Functional, &[5], &mut rng),
            Err(ExtError::InvalidDims(_))
        ));
        assert!(matches!(
            random_instance(InstanceKind::SaExt, &[3, 4], &mut rng),
            Err(ExtError::InvalidDims(_))
        ));
    }
}
