//! Batch verification of the module invariants on generated instances.

use opext_core::func_ext::{
    cstar_extendibility, extend_functional, functional_interval_member, total_f_bound, CstarOptions,
};
use opext_core::kvn::{check_restriction, kvn_extend};
use opext_core::numkit::{loewner_leq, spectral_norm};
use opext_core::oracle::{random_instance, sampled_bound, BoundTarget, Instance, Rng};
use opext_core::parrott::{
    check_compatibility, completion_bound, parrott_complete_at, strong_parrott, Endpoint,
};
use opext_core::sa_ext::{alpha_of_total, extend_symmetric, in_interval};
use opext_core::{ExtError, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

use crate::generate::instance_kind;
use crate::json::Kind;

/// Relative tolerance for bound preservation and extension identities.
const REL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub dims: Vec<usize>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub kind: Kind,
    pub count: usize,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub instances: Vec<InstanceReport>,
}

#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.0.push(name.to_string());
        }
    }

    fn error(&mut self, stage: &str, e: &ExtError) {
        self.0.push(format!("{stage}: {e}"));
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * (1.0 + b.abs())
}

pub fn random_dims(kind: Kind, rng: &mut Rng) -> Vec<usize> {
    match kind {
        Kind::Kvn | Kind::SaExt => vec![rng.integer(1, 8)],
        Kind::Parrott => vec![rng.integer(1, 6), rng.integer(1, 6)],
        Kind::StrongParrott => (0..4).map(|_| rng.integer(1, 5)).collect(),
        Kind::FunctionalExt | Kind::CstarCheck => vec![rng.integer(1, 4)],
    }
}

pub fn verify(
    kind: Kind,
    count: usize,
    seed: u64,
    dims: Option<&[usize]>,
    tol: &Tolerances,
) -> VerifyReport {
    let base = Rng::new(seed);
    let instances: Vec<InstanceReport> = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = base.split(index as u64);
            let dims = dims.map_or_else(|| random_dims(kind, &mut rng), <[usize]>::to_vec);
            let failures = match random_instance(instance_kind(kind), &dims, &mut rng) {
                Ok(instance) => check_instance(kind, &instance, rng.split(0), tol),
                Err(e) => vec![format!("generation: {e}")],
            };
            InstanceReport {
                index,
                dims,
                passed: failures.is_empty(),
                failures,
            }
        })
        .collect();
    let passed = instances.iter().filter(|r| r.passed).count();
    VerifyReport {
        kind,
        count,
        seed,
        passed,
        failed: count - passed,
        instances,
    }
}

fn check_instance(kind: Kind, instance: &Instance, rng: Rng, tol: &Tolerances) -> Vec<String> {
    let mut c = Checks::default();
    match instance {
        Instance::Kvn { op, hidden } => {
            c.check("restriction condition", check_restriction(op, tol));
            match kvn_extend(op, tol) {
                Ok(an) => {
                    let g = op.values();
                    let residual = (an.as_matrix() * op.domain() - g).norm();
                    c.check("extension", residual <= 1e-8 * (1.0 + g.norm()));
                    let minimal = loewner_leq(an.hermitian(), hidden.hermitian(), tol);
                    c.check("minimality", minimal.unwrap_or(false));
                }
                Err(e) => c.error("kvn_extend", &e),
            }
        }
        Instance::SaExt { s0, a, .. } => match extend_symmetric(s0, a, tol) {
            Ok(iv) => {
                let scale = 1.0 + s0.values().norm();
                for (name, t) in [("S_m", 0.0), ("S_M", 1.0), ("midpoint", 0.5)] {
                    let s = iv.interpolate(t);
                    c.check(
                        &format!("{name} extends S0"),
                        s0.extension_residual(&s) <= 10.0 * tol.eq * scale,
                    );
                    let alpha = alpha_of_total(&s, a, tol).map(|x| close(x, iv.alpha));
                    c.check(&format!("{name} preserves alpha"), alpha.unwrap_or(false));
                    c.check(
                        &format!("{name} in interval"),
                        in_interval(&s, &iv, tol).unwrap_or(false),
                    );
                }
                c.check(
                    "S_m <= S_M",
                    loewner_leq(&iv.s_min, &iv.s_max, tol).unwrap_or(false),
                );
                let sampled = sampled_bound(BoundTarget::Partial(s0), a, 200, &rng, tol);
                c.check(
                    "sampled bound below alpha",
                    sampled <= iv.alpha * (1.0 + tol.eq) + tol.eq,
                );
            }
            Err(e) => c.error("extend_symmetric", &e),
        },
        Instance::Parrott { instance: p, .. } => {
            c.check(
                "compatibility",
                check_compatibility(p, tol).unwrap_or(false),
            );
            for endpoint in [Endpoint::Min, Endpoint::Max, Endpoint::Mid] {
                match parrott_complete_at(p, endpoint, tol) {
                    Ok(t) => {
                        let t = t.into_inner();
                        let bound = completion_bound(&t, &p.a1, &p.a2, tol);
                        let ok = bound.is_ok_and(|b| b <= p.alpha_max() * (1.0 + REL) + tol.eq);
                        c.check(&format!("{endpoint:?} bound"), ok);
                        let r1 = (&t * p.t1.domain() - p.t1.values()).norm();
                        let r2 = (t.adjoint() * p.t2.domain() - p.t2.values()).norm();
                        c.check(
                            &format!("{endpoint:?} extends T1"),
                            r1 <= REL * (1.0 + p.t1.values().norm()),
                        );
                        c.check(
                            &format!("{endpoint:?} extends T2"),
                            r2 <= REL * (1.0 + p.t2.values().norm()),
                        );
                    }
                    Err(e) => c.error("parrott_complete", &e),
                }
            }
        }
        Instance::StrongParrott { instance: s, .. } => match strong_parrott(s, tol) {
            Ok(x) => {
                let x = x.into_inner();
                c.check("contraction", spectral_norm(&x) <= 1.0 + 1e-8);
                c.check(
                    "X S1 = S2",
                    (&x * &s.s1 - &s.s2).norm() <= REL * (1.0 + s.s1.norm()),
                );
                c.check(
                    "T2 X = T1",
                    (&s.t2 * &x - &s.t1).norm() <= REL * (1.0 + s.t2.norm()),
                );
            }
            Err(e) => c.error("strong_parrott", &e),
        },
        Instance::Functional { partial, f, .. } => {
            let scale = 1.0 + partial.gamma().norm();
            if kind == Kind::CstarCheck {
                let opts = CstarOptions {
                    f: Some(f.clone()),
                    samples: 500,
                    seed: rng.seed(),
                    ..CstarOptions::default()
                };
                match cstar_extendibility(partial, &opts, tol) {
                    Ok(d) => {
                        c.check("extendible", d.extendible);
                        c.check("necessity violations", d.necessity.violations == 0);
                        c.check(
                            "sufficiency extends g0",
                            partial.extension_residual(&d.sufficiency.g_min) <= REL * scale,
                        );
                    }
                    Err(e) => c.error("cstar_extendibility", &e),
                }
                return c.0;
            }
            match extend_functional(partial, f, tol) {
                Ok(ext) => {
                    for (name, g) in [("g_m", &ext.g_min), ("g_M", &ext.g_max)] {
                        c.check(
                            &format!("{name} extends g0"),
                            partial.extension_residual(g) <= REL * scale,
                        );
                        c.check(&format!("{name} hermitian"), g.hermitian(tol).is_ok());
                        let alpha = total_f_bound(g, f, tol).map(|x| close(x, ext.alpha));
                        c.check(&format!("{name} preserves alpha"), alpha.unwrap_or(false));
                    }
                    let ordered =
                        functional_interval_member(&ext.g_min, &ext.g_min, &ext.g_max, tol);
                    c.check("g_m <= g_M", ordered.unwrap_or(false));
                }
                Err(e) => c.error("extend_functional", &e),
            }
        }
    }
    c.0
}
