//! Random instance files with a known solution.

use opext_core::oracle::{random_instance, Instance, InstanceKind, Rng};
use opext_core::ExtError;

use crate::json::{
    encode, CstarPayload, FunctionalPayload, InstanceFile, Kind, KvnPayload, ParrottPayload,
    SaExtPayload, StrongParrottPayload,
};

pub fn instance_kind(kind: Kind) -> InstanceKind {
    match kind {
        Kind::Kvn => InstanceKind::Kvn,
        Kind::SaExt => InstanceKind::SaExt,
        Kind::Parrott => InstanceKind::Parrott,
        Kind::StrongParrott => InstanceKind::StrongParrott,
        Kind::FunctionalExt | Kind::CstarCheck => InstanceKind::Functional,
    }
}

/// Dimensions used when only `--n` (or nothing) is given.
pub fn default_dims(kind: Kind, n: Option<usize>) -> Vec<usize> {
    match kind {
        Kind::Kvn | Kind::SaExt => vec![n.unwrap_or(4)],
        Kind::Parrott => vec![n.unwrap_or(3); 2],
        Kind::StrongParrott => vec![n.unwrap_or(2); 3],
        Kind::FunctionalExt | Kind::CstarCheck => vec![n.unwrap_or(2)],
    }
}

pub fn to_file(kind: Kind, instance: &Instance, seed: u64) -> InstanceFile {
    let payload = match (kind, instance) {
        (Kind::Kvn, Instance::Kvn { op, .. }) => serde_json::to_value(KvnPayload {
            domain: encode(op.domain()),
            values: encode(op.values()),
        }),
        (Kind::SaExt, Instance::SaExt { s0, a, .. }) => serde_json::to_value(SaExtPayload {
            a: encode(a.as_matrix()),
            domain: encode(s0.domain()),
            values: encode(s0.values()),
            probe: None,
        }),
        (Kind::Parrott, Instance::Parrott { instance: p, .. }) => {
            serde_json::to_value(ParrottPayload {
                a1: encode(p.a1.as_matrix()),
                a2: encode(p.a2.as_matrix()),
                domain1: encode(p.t1.domain()),
                values1: encode(p.t1.values()),
                domain2: encode(p.t2.domain()),
                values2: encode(p.t2.values()),
                alpha1: p.alpha1,
                alpha2: p.alpha2,
            })
        }
        (Kind::StrongParrott, Instance::StrongParrott { instance: s, .. }) => {
            serde_json::to_value(StrongParrottPayload {
                s1: encode(&s.s1),
                s2: encode(&s.s2),
                t1: encode(&s.t1),
                t2: encode(&s.t2),
            })
        }
        (Kind::FunctionalExt, Instance::Functional { partial, f, .. }) => {
            serde_json::to_value(FunctionalPayload {
                projection: encode(partial.ideal().projection()),
                gamma: encode(partial.gamma()),
                f: encode(f.as_matrix()),
            })
        }
        (Kind::CstarCheck, Instance::Functional { partial, f, .. }) => {
            serde_json::to_value(CstarPayload {
                projection: encode(partial.ideal().projection()),
                gamma: encode(partial.gamma()),
                f: Some(encode(f.as_matrix())),
                extension: None,
                samples: Some(1000),
            })
        }
        (kind, other) => panic!("{} cannot hold a {:?} instance", kind.name(), other.kind()),
    }
    .expect("payload encodes");
    InstanceFile {
        kind,
        payload,
        tolerances: None,
        seed: Some(seed),
    }
}

pub fn generate(kind: Kind, dims: &[usize], seed: u64) -> Result<InstanceFile, ExtError> {
    let instance = random_instance(instance_kind(kind), dims, &mut Rng::new(seed))?;
    Ok(to_file(kind, &instance, seed))
}
