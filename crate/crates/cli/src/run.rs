//! Dispatch of instance files to the constructions.

use std::collections::BTreeMap;

use opext_core::func_ext::{
    cstar_extendibility, extend_functional, total_f_bound, CstarOptions, FunctionalMatrix,
    LeftIdeal, PartialFunctional,
};
use opext_core::kvn::{kvn_extend, PartialPositiveOperator};
use opext_core::numkit::{hermitian_eigen, spectral_norm, CMat};
use opext_core::parrott::{
    completion_bound, parrott_complete_at, strong_parrott, Endpoint, ParrottInstance, PartialMap,
    StrongParrottInstance,
};
use opext_core::sa_ext::{alpha_of_total, extend_symmetric, in_interval, SymmetricPartialOperator};
use opext_core::{ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances};
use serde_json::{json, Value};

use crate::json::{
    decode, encode, payload, CstarPayload, Failure, FunctionalPayload, InstanceFile, Kind,
    KvnPayload, ParrottPayload, ResultFile, SaExtPayload, Status, StrongParrottPayload,
    ToleranceEcho, ToleranceOverrides,
};

/// Settings from the command line; they take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub tolerances: ToleranceOverrides,
    pub seed: Option<u64>,
    pub endpoint: Option<Endpoint>,
}

pub fn endpoint_name(e: Endpoint) -> &'static str {
    match e {
        Endpoint::Min => "min",
        Endpoint::Max => "max",
        Endpoint::Mid => "mid",
    }
}

type Outputs = BTreeMap<String, Value>;
type Diagnostics = BTreeMap<String, f64>;

fn matrix(m: &CMat) -> Value {
    serde_json::to_value(encode(m)).expect("matrix encodes")
}

fn psd(m: ComplexMatrix, tol: &Tolerances) -> Result<PsdMatrix, Failure> {
    Ok(PsdMatrix::from_matrix(m.into_inner(), tol)?)
}

/// Smallest eigenvalue of the hermitian part of `b − a`.
fn order_gap(a: &CMat, b: &CMat) -> f64 {
    hermitian_eigen(&(b - a))
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
}

fn hermitian_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Runs one instance. `expected` is the subcommand's kind (`None` for `run`).
pub fn run_instance(file: &InstanceFile, expected: Option<Kind>, opts: &RunOptions) -> ResultFile {
    if let Some(kind) = expected {
        if kind != file.kind {
            let failure = Failure::invalid(
                "KindMismatch",
                format!(
                    "`{}` cannot run a `{}` instance",
                    kind.name(),
                    file.kind.name()
                ),
            );
            return ResultFile::failure(Some(file.kind), &failure);
        }
    }
    let overrides = opts.tolerances.over(file.tolerances.unwrap_or_default());
    let tol = match overrides.resolve() {
        Ok(t) => t,
        Err(e) => return ResultFile::failure(Some(file.kind), &e.into()),
    };
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    let endpoint = opts.endpoint.unwrap_or_default();
    let outcome = match file.kind {
        Kind::Kvn => run_kvn(file, &tol),
        Kind::SaExt => run_sa_ext(file, &tol),
        Kind::Parrott => run_parrott(file, endpoint, &tol),
        Kind::StrongParrott => run_strong_parrott(file, &tol),
        Kind::FunctionalExt => run_functional(file, &tol),
        Kind::CstarCheck => run_cstar(file, seed, &tol),
    };
    let mut result = match outcome {
        Ok((outputs, diagnostics)) => ResultFile {
            status: Status::Ok,
            kind: Some(file.kind),
            outputs,
            diagnostics,
            error: None,
            seed: None,
            tolerances: None,
        },
        Err(failure) => ResultFile::failure(Some(file.kind), &failure),
    };
    result.seed = Some(seed);
    result.tolerances = Some(ToleranceEcho::from(&tol));
    result
}

fn run_kvn(file: &InstanceFile, tol: &Tolerances) -> Result<(Outputs, Diagnostics), Failure> {
    let p: KvnPayload = payload(file)?;
    let op = PartialPositiveOperator::new(
        decode(&p.domain, "domain")?,
        decode(&p.values, "values")?,
        tol,
    )?;
    let an = kvn_extend(&op, tol)?;
    let a = an.as_matrix();
    let mut out = Outputs::new();
    out.insert("a_n".into(), matrix(a));
    let mut diag = Diagnostics::new();
    diag.insert(
        "extension_residual".into(),
        (a * op.domain() - op.values()).norm(),
    );
    diag.insert("kernel_residual".into(), op.kernel_residual(tol));
    diag.insert("hermitian_residual".into(), hermitian_residual(a));
    diag.insert(
        "min_eigenvalue".into(),
        order_gap(&CMat::zeros(a.nrows(), a.ncols()), a),
    );
    Ok((out, diag))
}

fn run_sa_ext(file: &InstanceFile, tol: &Tolerances) -> Result<(Outputs, Diagnostics), Failure> {
    let p: SaExtPayload = payload(file)?;
    let a = psd(decode(&p.a, "a")?, tol)?;
    let s0 = SymmetricPartialOperator::new(
        decode(&p.domain, "domain")?,
        decode(&p.values, "values")?,
        tol,
    )?;
    let probe = match &p.probe {
        Some(m) => Some(HermitianMatrix::new(decode(m, "probe")?.into_inner(), tol)?),
        None => None,
    };
    let iv = extend_symmetric(&s0, &a, tol)?;
    let mut out = Outputs::new();
    out.insert("alpha".into(), json!(iv.alpha));
    out.insert("s_min".into(), matrix(&iv.s_min));
    out.insert("s_max".into(), matrix(&iv.s_max));
    if let Some(probe) = &probe {
        if probe.dim() != a.dim() {
            return Err(Failure::invalid(
                "DimensionMismatch",
                format!("probe is {0}x{0} but A is {1}x{1}", probe.dim(), a.dim()),
            ));
        }
        out.insert(
            "probe_in_interval".into(),
            json!(in_interval(probe, &iv, tol)?),
        );
    }
    let mut diag = Diagnostics::new();
    for (name, s) in [("s_min", &iv.s_min), ("s_max", &iv.s_max)] {
        diag.insert(
            format!("{name}_extension_residual"),
            s0.extension_residual(s),
        );
        let alpha = alpha_of_total(s, &a, tol)?;
        diag.insert(format!("{name}_alpha_residual"), (alpha - iv.alpha).abs());
    }
    diag.insert("order_gap".into(), order_gap(&iv.s_min, &iv.s_max));
    Ok((out, diag))
}

fn run_parrott(
    file: &InstanceFile,
    endpoint: Endpoint,
    tol: &Tolerances,
) -> Result<(Outputs, Diagnostics), Failure> {
    let p: ParrottPayload = payload(file)?;
    let t1 = PartialMap::new(
        decode(&p.domain1, "domain1")?,
        decode(&p.values1, "values1")?,
        tol,
    )?;
    let t2 = PartialMap::new(
        decode(&p.domain2, "domain2")?,
        decode(&p.values2, "values2")?,
        tol,
    )?;
    let inst = ParrottInstance::new(
        t1,
        t2,
        psd(decode(&p.a1, "a1")?, tol)?,
        psd(decode(&p.a2, "a2")?, tol)?,
        p.alpha1,
        p.alpha2,
    )?;
    let t = parrott_complete_at(&inst, endpoint, tol)?.into_inner();
    let bound = completion_bound(&t, &inst.a1, &inst.a2, tol)?;
    let mut out = Outputs::new();
    out.insert("t".into(), matrix(&t));
    out.insert("endpoint".into(), json!(endpoint_name(endpoint)));
    out.insert("bound".into(), json!(bound));
    let mut diag = Diagnostics::new();
    diag.insert(
        "t1_residual".into(),
        (&t * inst.t1.domain() - inst.t1.values()).norm(),
    );
    diag.insert(
        "t2_residual".into(),
        (t.adjoint() * inst.t2.domain() - inst.t2.values()).norm(),
    );
    diag.insert(
        "compatibility_residual".into(),
        inst.compatibility_residual(),
    );
    diag.insert("bound_excess".into(), (bound - inst.alpha_max()).max(0.0));
    Ok((out, diag))
}

fn run_strong_parrott(
    file: &InstanceFile,
    tol: &Tolerances,
) -> Result<(Outputs, Diagnostics), Failure> {
    let p: StrongParrottPayload = payload(file)?;
    let inst = StrongParrottInstance::new(
        decode(&p.s1, "s1")?,
        decode(&p.s2, "s2")?,
        decode(&p.t1, "t1")?,
        decode(&p.t2, "t2")?,
    )?;
    let x = strong_parrott(&inst, tol)?.into_inner();
    let mut out = Outputs::new();
    out.insert("x".into(), matrix(&x));
    let mut diag = Diagnostics::new();
    diag.insert("norm".into(), spectral_norm(&x));
    diag.insert("s_residual".into(), (&x * &inst.s1 - &inst.s2).norm());
    diag.insert("t_residual".into(), (&inst.t2 * &x - &inst.t1).norm());
    Ok((out, diag))
}

fn partial_functional(
    projection: &crate::json::JsonMatrix,
    gamma: &crate::json::JsonMatrix,
    tol: &Tolerances,
) -> Result<PartialFunctional, Failure> {
    let ideal = LeftIdeal::new(decode(projection, "projection")?, tol)?;
    Ok(PartialFunctional::new(ideal, decode(gamma, "gamma")?)?)
}

fn run_functional(
    file: &InstanceFile,
    tol: &Tolerances,
) -> Result<(Outputs, Diagnostics), Failure> {
    let p: FunctionalPayload = payload(file)?;
    let pf = partial_functional(&p.projection, &p.gamma, tol)?;
    let f = psd(decode(&p.f, "f")?, tol)?;
    let ext = extend_functional(&pf, &f, tol)?;
    let mut out = Outputs::new();
    out.insert("alpha".into(), json!(ext.alpha));
    out.insert("g_min".into(), matrix(ext.g_min.density()));
    out.insert("g_max".into(), matrix(ext.g_max.density()));
    out.insert("gns_dim".into(), json!(ext.gns.dim()));
    let mut diag = Diagnostics::new();
    for (name, g) in [("g_min", &ext.g_min), ("g_max", &ext.g_max)] {
        diag.insert(
            format!("{name}_extension_residual"),
            pf.extension_residual(g),
        );
        diag.insert(
            format!("{name}_hermitian_residual"),
            hermitian_residual(g.density()),
        );
        let alpha = total_f_bound(g, &f, tol)?;
        diag.insert(format!("{name}_alpha_residual"), (alpha - ext.alpha).abs());
    }
    diag.insert(
        "order_gap".into(),
        order_gap(ext.g_min.density(), ext.g_max.density()),
    );
    diag.insert("symmetry_residual".into(), pf.symmetry_residual());
    Ok((out, diag))
}

fn run_cstar(
    file: &InstanceFile,
    seed: u64,
    tol: &Tolerances,
) -> Result<(Outputs, Diagnostics), Failure> {
    let p: CstarPayload = payload(file)?;
    let pf = partial_functional(&p.projection, &p.gamma, tol)?;
    let f = match &p.f {
        Some(m) => Some(psd(decode(m, "f")?, tol)?),
        None => None,
    };
    let extension = match &p.extension {
        Some(m) => Some(FunctionalMatrix::new(decode(m, "extension")?)?),
        None => None,
    };
    let opts = CstarOptions {
        f,
        extension,
        samples: p.samples.unwrap_or(CstarOptions::default().samples),
        seed,
    };
    let decision = cstar_extendibility(&pf, &opts, tol)?;
    let suff = &decision.sufficiency;
    let nec = &decision.necessity;
    let mut out = Outputs::new();
    out.insert("extendible".into(), json!(decision.extendible));
    out.insert(
        "sufficiency".into(),
        json!({
            "alpha": suff.alpha,
            "f": matrix(suff.f.as_matrix()),
            "f_supplied": suff.supplied,
            "g_min": matrix(suff.g_min.density()),
            "g_max": matrix(suff.g_max.density()),
        }),
    );
    out.insert(
        "necessity".into(),
        json!({
            "constant": nec.constant,
            "extension": matrix(nec.extension.density()),
            "f": matrix(nec.f.density()),
            "measured_constant": nec.measured_constant,
            "samples": nec.samples,
            "spectral_bound": nec.spectral_bound,
            "violations": nec.violations,
        }),
    );
    let mut diag = Diagnostics::new();
    diag.insert(
        "g_min_extension_residual".into(),
        pf.extension_residual(&suff.g_min),
    );
    diag.insert(
        "g_max_extension_residual".into(),
        pf.extension_residual(&suff.g_max),
    );
    diag.insert(
        "extension_residual".into(),
        pf.extension_residual(&nec.extension),
    );
    Ok((out, diag))
}
