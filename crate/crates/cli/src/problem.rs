//! Problem files: `{"n", "pi", "kernels": {name: rows}, "observables": {name: values}}`.

use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mcorder::{
    validate_kernel, Observable, SquareMatrix, StationaryDistribution, TransitionKernel,
};
use serde::de::{Deserializer, Error as _, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Name-keyed entries in file order. Duplicate names are a parse error.
#[derive(Debug, Clone, PartialEq)]
struct Named<T>(Vec<(String, T)>);

impl<T> Default for Named<T> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Named<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Named<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of named entries")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Named<T>, A::Error> {
                let mut out: Vec<(String, T)> = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if out.iter().any(|(k, _)| *k == key) {
                        return Err(A::Error::custom(format!("duplicate name {key:?}")));
                    }
                    let value = map.next_value()?;
                    out.push((key, value));
                }
                Ok(Named(out))
            }
        }

        d.deserialize_map(V(PhantomData))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    n: usize,
    pi: Vec<f64>,
    #[serde(default)]
    kernels: Named<Vec<Vec<f64>>>,
    #[serde(default)]
    observables: Named<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub n: usize,
    /// As written; may contain zeros until pruned.
    pub pi: Vec<f64>,
    pub kernels: Vec<(String, SquareMatrix)>,
    pub observables: Vec<(String, Vec<f64>)>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: Raw = serde_json::from_str(text).map_err(|e| anyhow!("parse error: {e}"))?;
        let n = raw.n;
        if n == 0 {
            bail!("n must be positive");
        }
        if raw.pi.len() != n {
            bail!("pi has {} entries, expected {n}", raw.pi.len());
        }
        let mut kernels = Vec::with_capacity(raw.kernels.0.len());
        for (name, rows) in raw.kernels.0 {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                bail!("kernel {name:?} is not {n}x{n}");
            }
            kernels.push((name, SquareMatrix::from_rows(&rows)?));
        }
        for (name, f) in &raw.observables.0 {
            if f.len() != n {
                bail!("observable {name:?} has {} entries, expected {n}", f.len());
            }
        }
        Ok(Self {
            n,
            pi: raw.pi,
            kernels,
            observables: raw.observables.0,
        })
    }

    pub fn stationary(&self) -> Result<StationaryDistribution> {
        if let Some(x) = self.pi.iter().position(|&p| p == 0.0) {
            bail!("pi[{x}] is zero; remove zero-mass states with `mcorder prune` first");
        }
        Ok(StationaryDistribution::new(self.pi.clone())?)
    }

    pub fn matrix(&self, name: &str) -> Result<&SquareMatrix> {
        self.kernels
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, m)| m)
            .ok_or_else(|| anyhow!("no kernel named {name:?} (have: {})", names(&self.kernels)))
    }

    /// Kernel `name`, checked against `pi`. Fails only if it is not stochastic.
    pub fn kernel(&self, name: &str, pi: &StationaryDistribution) -> Result<TransitionKernel> {
        validate_kernel(self.matrix(name)?.clone(), pi).with_context(|| format!("kernel {name:?}"))
    }

    pub fn observable(&self, name: &str) -> Result<Observable> {
        self.observables
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, f)| Observable::new(f.clone()))
            .ok_or_else(|| {
                anyhow!(
                    "no observable named {name:?} (have: {})",
                    names(&self.observables)
                )
            })
    }

    /// Drops zero-mass states from `pi`, every kernel and every observable.
    /// Rows are not renormalized.
    pub fn pruned(&self) -> (Self, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n).filter(|&x| self.pi[x] != 0.0).collect();
        let removed = (0..self.n).filter(|&x| self.pi[x] == 0.0).collect();
        let n = keep.len();
        let kernels = self
            .kernels
            .iter()
            .map(|(name, m)| {
                (
                    name.clone(),
                    SquareMatrix::from_fn(n, |i, j| m[(keep[i], keep[j])]),
                )
            })
            .collect();
        let observables = self
            .observables
            .iter()
            .map(|(name, f)| (name.clone(), keep.iter().map(|&x| f[x]).collect()))
            .collect();
        let pi = keep.iter().map(|&x| self.pi[x]).collect();
        (
            Self {
                n,
                pi,
                kernels,
                observables,
            },
            removed,
        )
    }

    pub fn to_json(&self) -> Value {
        let kernels: Map<String, Value> = self
            .kernels
            .iter()
            .map(|(k, m)| (k.clone(), json!(m.to_rows())))
            .collect();
        let observables: Map<String, Value> = self
            .observables
            .iter()
            .map(|(k, f)| (k.clone(), json!(f)))
            .collect();
        json!({ "n": self.n, "pi": self.pi, "kernels": kernels, "observables": observables })
    }
}

fn names<T>(entries: &[(String, T)]) -> String {
    entries
        .iter()
        .map(|(k, _)| k.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// A problem file loaded from disk with the digest of its bytes.
pub struct Loaded {
    pub problem: ProblemFile,
    pub digest: Value,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text =
        std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let problem = ProblemFile::parse(text).with_context(|| format!("in {}", path.display()))?;
    let digest = json!({
        "path": path.display().to_string(),
        "sha256": hex::encode(Sha256::digest(&bytes)),
    });
    Ok(Loaded { problem, digest })
}
