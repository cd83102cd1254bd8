use std::sync::atomic::{AtomicUsize, Ordering};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::MfsError;
use crate::dom::{ablate, DomDocument, RefSet};
use crate::provider::{CompletionRequest, TextCompletionProvider};
use crate::reduce::prompts::render_history;
use crate::text::collapse_ws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Fail,
    Pass,
}

/// Failure judgment for a removal set.
///
/// `test(S)` answers: with exactly the units in `S` removed from the
/// observation, does the failure still happen?
pub trait Oracle: Send + Sync {
    fn test(&self, removed: &RefSet) -> Result<Verdict, MfsError>;

    /// Calls made so far.
    fn call_count(&self) -> usize;
}

/// FAIL iff the hidden MFS is contained in the removal set.
#[derive(Debug)]
pub struct SimulationOracle {
    mfs: RefSet,
    calls: AtomicUsize,
}

pub fn simulation_oracle(ground_truth: RefSet) -> SimulationOracle {
    SimulationOracle {
        mfs: ground_truth,
        calls: AtomicUsize::new(0),
    }
}

impl SimulationOracle {
    pub fn ground_truth(&self) -> &RefSet {
        &self.mfs
    }
}

impl Oracle for SimulationOracle {
    fn test(&self, removed: &RefSet) -> Result<Verdict, MfsError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(if self.mfs.is_subset(removed) {
            Verdict::Fail
        } else {
            Verdict::Pass
        })
    }

    fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Wraps a predicate as a counting oracle.
pub struct FnOracle<F> {
    f: F,
    calls: AtomicUsize,
}

impl<F> FnOracle<F>
where
    F: Fn(&RefSet) -> Verdict + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnOracle {
            f,
            calls: AtomicUsize::new(0),
        }
    }
}

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&RefSet) -> Verdict + Send + Sync,
{
    fn test(&self, removed: &RefSet) -> Result<Verdict, MfsError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok((self.f)(removed))
    }

    fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

pub const AGENT_SYSTEM_PROMPT: &str = "You are a web agent operating a browser. Elements are identified by their \
bid attribute. Decide the single next action that moves the task forward and reply with it inside \
<action></action> tags, for example <action>click('12')</action>.";

fn agent_user_message(goal: &str, history: &[String], html: &str) -> String {
    format!(
        "Task Goal: {goal}\n\nAction History:\n{}\n\nCurrent Observation (HTML):\n{html}",
        render_history(history)
    )
}

/// Content of the first `<action>` tag, or the whole response.
pub fn extract_action(response: &str) -> &str {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?s)<action>(.*?)</action>").expect("valid regex"));
    re.captures(response)
        .and_then(|c| c.get(1))
        .map_or(response, |m| m.as_str())
}

/// One prediction over `ablate(doc, removed)`; FAIL iff it reproduces the
/// recorded erroneous action.
pub fn proxy_oracle(
    doc: &DomDocument,
    removed: &RefSet,
    agent: &dyn TextCompletionProvider,
    erroneous_action: &str,
    goal: &str,
    history: &[String],
) -> Result<Verdict, MfsError> {
    let ablated = ablate(doc, removed)?;
    let user = agent_user_message(goal, history, &ablated.serialize());
    let resp = agent.complete(&CompletionRequest {
        system: AGENT_SYSTEM_PROMPT,
        user: &user,
        image_ref: None,
    })?;
    Ok(if collapse_ws(extract_action(&resp)) == collapse_ws(erroneous_action) {
        Verdict::Fail
    } else {
        Verdict::Pass
    })
}

/// [`proxy_oracle`] bound to one instance.
pub struct ProxyOracle<'a> {
    pub doc: &'a DomDocument,
    pub agent: &'a dyn TextCompletionProvider,
    pub erroneous_action: String,
    pub goal: String,
    pub history: Vec<String>,
    calls: AtomicUsize,
}

impl<'a> ProxyOracle<'a> {
    pub fn new(
        doc: &'a DomDocument,
        agent: &'a dyn TextCompletionProvider,
        erroneous_action: impl Into<String>,
    ) -> Self {
        ProxyOracle {
            doc,
            agent,
            erroneous_action: erroneous_action.into(),
            goal: String::new(),
            history: Vec::new(),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_context(mut self, goal: impl Into<String>, history: Vec<String>) -> Self {
        self.goal = goal.into();
        self.history = history;
        self
    }
}

impl Oracle for ProxyOracle<'_> {
    fn test(&self, removed: &RefSet) -> Result<Verdict, MfsError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        proxy_oracle(
            self.doc,
            removed,
            self.agent,
            &self.erroneous_action,
            &self.goal,
            &self.history,
        )
    }

    fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}
