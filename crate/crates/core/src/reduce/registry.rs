use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::prompts::DEFAULT_ACTION_SPACE;
use super::{
    plan_keywords, reduce_axtree, reduce_dmr_bm25, reduce_dmr_dense, reduce_dmr_querygen, reduce_focusagent,
    reduce_gepa_program, reduce_original, reduce_prune4web, reduce_random, GepaProgram, KeywordWeights, ReduceError,
    Reducer, ReductionRequest,
};
use crate::dom::DomDocument;
use crate::provider::Providers;

/// Registered method ids.
pub const METHOD_IDS: &[&str] = &[
    "original",
    "random",
    "axtree",
    "dmr-bm25",
    "dmr-dense",
    "dmr-querygen",
    "focusagent",
    "prune4web",
    "gepa",
];

const NEEDS_K: &[&str] = &[
    "random",
    "dmr-bm25",
    "dmr-dense",
    "dmr-querygen",
    "focusagent",
    "prune4web",
];

/// A method id plus its parameters, written `id[:key=value,...]`, e.g.
/// `random:k=10,seed=7` or `gepa:program=workarena_r02`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    /// JSON keyword-weight file for `prune4web`; without it the planner and
    /// filter prompts run per instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<PathBuf>,
}

/// Whether method `id` requires a `k` parameter.
pub fn needs_k(id: &str) -> bool {
    NEEDS_K.contains(&id)
}

impl MethodSpec {
    /// Fills `k`, `seed` and `program` from defaults where this method uses
    /// them and the spec leaves them unset.
    pub fn with_defaults(mut self, k: Option<usize>, seed: Option<u64>, program: Option<&str>) -> Self {
        if needs_k(&self.method) && self.k.is_none() {
            self.k = k;
        }
        if self.method == "random" && self.seed.is_none() {
            self.seed = seed;
        }
        if self.method == "gepa" && self.program.is_none() {
            self.program = program.map(str::to_string);
        }
        self
    }

    pub fn new(method: impl Into<String>) -> Self {
        MethodSpec {
            method: method.into(),
            k: None,
            seed: None,
            program: None,
            weights: None,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_program(mut self, program: impl Into<String>) -> Self {
        self.program = Some(program.into());
        self
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.method)?;
        let mut params = Vec::new();
        if let Some(k) = self.k {
            params.push(format!("k={k}"));
        }
        if let Some(s) = self.seed {
            params.push(format!("seed={s}"));
        }
        if let Some(p) = &self.program {
            params.push(format!("program={p}"));
        }
        if let Some(w) = &self.weights {
            params.push(format!("weights={}", w.display()));
        }
        if !params.is_empty() {
            write!(f, ":{}", params.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for MethodSpec {
    type Err = ReduceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| ReduceError::InvalidConfig(msg);
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        if name.is_empty() {
            return Err(bad("empty method id".into()));
        }
        let mut spec = MethodSpec::new(name);
        for kv in params
            .into_iter()
            .flat_map(|p| p.split(','))
            .filter(|kv| !kv.trim().is_empty())
        {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "k" => {
                    spec.k = Some(
                        v.parse()
                            .map_err(|_| bad(format!("k must be a positive integer, got `{v}`")))?,
                    )
                }
                "seed" => {
                    spec.seed = Some(
                        v.parse()
                            .map_err(|_| bad(format!("seed must be an integer, got `{v}`")))?,
                    )
                }
                "program" => spec.program = Some(v.to_string()),
                "weights" => spec.weights = Some(PathBuf::from(v)),
                other => return Err(bad(format!("unknown method parameter `{other}`"))),
            }
        }
        Ok(spec)
    }
}

enum Kind {
    Original,
    Random(u64),
    AxTree,
    Bm25,
    Dense,
    QueryGen,
    Focus,
    Prune4Web(Option<KeywordWeights>),
    Gepa(GepaProgram),
}

struct Method {
    label: String,
    k: Option<usize>,
    kind: Kind,
    providers: Providers,
}

/// Instantiates a registered method. Config problems (unknown id, missing
/// k, bad program, unreadable weights) are reported here, before any
/// instance is processed.
pub fn build_reducer(spec: &MethodSpec, providers: &Providers) -> Result<Box<dyn Reducer>, ReduceError> {
    let id = spec.method.as_str();
    if !METHOD_IDS.contains(&id) {
        return Err(ReduceError::InvalidConfig(format!(
            "unknown method `{id}`; registered methods: {}",
            METHOD_IDS.join(", ")
        )));
    }
    if NEEDS_K.contains(&id) {
        match spec.k {
            None => return Err(ReduceError::MissingK),
            Some(0) => return Err(ReduceError::InvalidConfig("k must be positive".into())),
            Some(_) => {}
        }
    }
    let kind =
        match id {
            "original" => Kind::Original,
            "random" => Kind::Random(spec.seed.unwrap_or(0)),
            "axtree" => Kind::AxTree,
            "dmr-bm25" => Kind::Bm25,
            "dmr-dense" => Kind::Dense,
            "dmr-querygen" => Kind::QueryGen,
            "focusagent" => Kind::Focus,
            "prune4web" => Kind::Prune4Web(match &spec.weights {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| ReduceError::InvalidConfig(format!("reading {}: {e}", path.display())))?;
                    Some(serde_json::from_str(&text).map_err(|e| {
                        ReduceError::InvalidConfig(format!("keyword weights in {}: {e}", path.display()))
                    })?)
                }
                None => None,
            }),
            "gepa" => Kind::Gepa(spec.program.as_deref().unwrap_or("seed").parse()?),
            _ => unreachable!("checked against METHOD_IDS"),
        };
    Ok(Box::new(Method {
        label: spec.to_string(),
        k: spec.k,
        kind,
        providers: providers.clone(),
    }))
}

impl Reducer for Method {
    fn id(&self) -> &str {
        &self.label
    }

    fn reduce(&self, req: &ReductionRequest<'_>) -> Result<DomDocument, ReduceError> {
        let mut req = *req;
        req.k = self.k.or(req.k);
        let p = &self.providers;
        match &self.kind {
            Kind::Original => Ok(reduce_original(&req)),
            Kind::Random(seed) => reduce_random(&req, *seed),
            Kind::AxTree => reduce_axtree(&req, None),
            Kind::Bm25 => reduce_dmr_bm25(&req),
            Kind::Dense => reduce_dmr_dense(&req, p.embedder.as_ref()),
            Kind::QueryGen => reduce_dmr_querygen(&req, p.completion.as_ref(), p.embedder.as_ref()),
            Kind::Focus => reduce_focusagent(&req, p.completion.as_ref()),
            Kind::Prune4Web(Some(w)) => reduce_prune4web(&req, w),
            Kind::Prune4Web(None) => {
                let w = plan_keywords(&req, p.completion.as_ref(), DEFAULT_ACTION_SPACE)?;
                reduce_prune4web(&req, &w)
            }
            Kind::Gepa(program) => reduce_gepa_program(&req, *program),
        }
    }
}
