#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use opext_core::numkit::{range_basis, CMat};
use opext_core::oracle::Rng;
use opext_core::{ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances};

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `R·R†` with `R` an `n × rank` gaussian; returns both.
pub fn psd_of_rank(n: usize, rank: usize, rng: &mut Rng) -> (PsdMatrix, CMat) {
    let r = rng.gaussian_matrix(n, rank);
    let a = PsdMatrix::from_matrix(&r * r.adjoint(), &tol()).unwrap();
    (a, r)
}

pub fn hermitian(n: usize, rng: &mut Rng) -> CMat {
    let g = rng.gaussian_matrix(n, n);
    (&g + g.adjoint()) * cx(0.5)
}

pub fn unitary(n: usize, rng: &mut Rng) -> CMat {
    range_basis(&rng.gaussian_matrix(n, n), &tol())
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut out = DMatrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((r1, c1), (r2, c2)).copy_from(b);
    out
}

pub fn cm(m: CMat) -> ComplexMatrix {
    ComplexMatrix::new(m).unwrap()
}

pub fn herm(m: CMat) -> HermitianMatrix {
    HermitianMatrix::new(m, &tol()).unwrap()
}

/// Hermitian `B` with two eigenspaces, a PSD `C` and a hermitian `H`
/// commuting with it, and a
/// domain `D` invariant under `B`: `B·D = D·Λ` and `B·(C·D) = (C·D)·Λ`.
pub struct CommutingCase {
    pub b: CMat,
    pub c: CMat,
    pub h: CMat,
    pub d: CMat,
}

pub fn commuting_case(n: usize, rng: &mut Rng) -> CommutingCase {
    let p = rng.integer(1, n);
    let u = unitary(n, rng);
    let eig = block_diag(
        &(CMat::identity(p, p) * cx(1.0)),
        &(CMat::identity(n - p, n - p) * cx(2.0)),
    );
    let b = &u * eig * u.adjoint();
    let c1 = rng.gaussian_matrix(p, p);
    let c2 = rng.gaussian_matrix(n - p, n - p);
    let c = &u * block_diag(&(&c1 * c1.adjoint()), &(&c2 * c2.adjoint())) * u.adjoint();
    let h = &u * block_diag(&hermitian(p, rng), &hermitian(n - p, rng)) * u.adjoint();
    let k1 = rng.integer(1, p);
    let k2 = rng.integer(0, n - p);
    let d = &u * block_diag(&rng.gaussian_matrix(p, k1), &rng.gaussian_matrix(n - p, k2));
    CommutingCase { b, c, h, d }
}
