//! Consideration-set state machine.
//!
//! Every mutation is expressed as an [`EventKind`], validated against the
//! current state and appended to the log only if it succeeds, so replaying a
//! session's log through [`Session::replay`] rebuilds the exact same state.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::clock::Timestamp;
use crate::comparative::{BucketChange, CompareBucket, DEFAULT_BUCKET_CAP};
use crate::error::{Error, Result};
use crate::filter::{apply_filter, FilterSpec};
use crate::wheel::{
    build_wheel, selected_filter_spec, selection_from_list, toggle_select, WheelState, WheelTree,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Filtering,
    ComparativeView,
    Comparison,
    Decided,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Filtering => "filtering",
            Stage::ComparativeView => "comparative_view",
            Stage::Comparison => "comparison",
            Stage::Decided => "decided",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Created {
        session_id: String,
        variant: String,
    },
    WheelSelection {
        nodes: Vec<String>,
    },
    WheelToggled {
        node: String,
    },
    FilterSet {
        spec: FilterSpec,
    },
    BucketToggled {
        product_id: String,
        change: BucketChange,
    },
    Advanced {
        from: Stage,
        to: Stage,
    },
    Decided {
        product_id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: Timestamp,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Shared, read-only inputs a session operates against.
#[derive(Debug, Clone)]
pub struct SessionContext {
    pub catalog: Arc<Catalog>,
    pub wheel: Arc<WheelTree>,
    pub bucket_cap: usize,
}

impl SessionContext {
    pub fn new(catalog: Arc<Catalog>, bucket_cap: usize) -> Self {
        let wheel = Arc::new(build_wheel(&catalog));
        SessionContext {
            catalog,
            wheel,
            bucket_cap,
        }
    }

    pub fn with_default_cap(catalog: Arc<Catalog>) -> Self {
        Self::new(catalog, DEFAULT_BUCKET_CAP)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub catalog_variant: String,
    pub stage: Stage,
    pub wheel_state: WheelState,
    pub filter_spec: FilterSpec,
    pub filtered: Vec<String>,
    pub bucket: CompareBucket,
    pub final_choice: Option<String>,
    pub events: Vec<Event>,
}

/// Whether `from -> to` is a permitted stage change via `advance`.
/// Entering `Decided` only happens through `decide`.
pub fn transition_allowed(from: Stage, to: Stage) -> bool {
    use Stage::*;
    matches!(
        (from, to),
        (Filtering, ComparativeView)
            | (ComparativeView, Filtering)
            | (ComparativeView, Comparison)
            | (Comparison, ComparativeView)
    )
}

impl Session {
    pub fn new(ctx: &SessionContext, id: impl Into<String>, ts: Timestamp) -> Session {
        let id = id.into();
        let mut s = Session {
            id: id.clone(),
            catalog_variant: ctx.catalog.variant_tag().to_string(),
            stage: Stage::Filtering,
            wheel_state: WheelState::default(),
            filter_spec: FilterSpec::default(),
            filtered: ctx.catalog.all_ids(),
            bucket: CompareBucket::with_cap(ctx.bucket_cap),
            final_choice: None,
            events: Vec::new(),
        };
        s.push(
            ts,
            EventKind::Created {
                session_id: id,
                variant: s.catalog_variant.clone(),
            },
        );
        s
    }

    /// Rebuild a session from its event log.
    pub fn replay(ctx: &SessionContext, events: &[Event]) -> Result<Session> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| Error::MalformedInput("empty event log".into()))?;
        let EventKind::Created {
            session_id,
            variant,
        } = &first.kind
        else {
            return Err(Error::MalformedInput(
                "log must start with a creation event".into(),
            ));
        };
        if variant != ctx.catalog.variant_tag() {
            return Err(Error::UnknownVariant(variant.clone()));
        }
        let mut s = Session::new(ctx, session_id.clone(), first.ts);
        for e in rest {
            s.apply(ctx, e.kind.clone(), e.ts)?;
        }
        if s.events != events {
            return Err(Error::MalformedInput(
                "replayed log diverges from the recorded one".into(),
            ));
        }
        Ok(s)
    }

    pub fn last_ts(&self) -> Timestamp {
        self.events.last().map_or(0, |e| e.ts)
    }

    fn push(&mut self, ts: Timestamp, kind: EventKind) {
        let ts = ts.max(self.last_ts());
        self.events.push(Event {
            seq: self.events.len() as u64,
            ts,
            kind,
        });
    }

    fn require_shortlisting(&self) -> Result<()> {
        match self.stage {
            Stage::Filtering | Stage::ComparativeView => Ok(()),
            other => Err(Error::WrongStage(other.to_string())),
        }
    }

    fn refilter(&mut self, ctx: &SessionContext, spec: FilterSpec) -> Result<()> {
        self.filtered = apply_filter(&ctx.catalog, &spec)?;
        self.filter_spec = spec;
        Ok(())
    }

    /// Validate `kind` against the current state and, on success, mutate and
    /// log it. A rejected event leaves the session untouched.
    pub fn apply(&mut self, ctx: &SessionContext, kind: EventKind, ts: Timestamp) -> Result<()> {
        match &kind {
            EventKind::Created { .. } => {
                return Err(Error::MalformedInput("session already created".into()))
            }
            EventKind::WheelSelection { nodes } => {
                self.require_shortlisting()?;
                let state = selection_from_list(&ctx.wheel, nodes)?;
                let spec = selected_filter_spec(&ctx.wheel, &state);
                self.refilter(ctx, spec)?;
                self.wheel_state.selected = state.selected;
            }
            EventKind::WheelToggled { node } => {
                self.require_shortlisting()?;
                let state = toggle_select(&ctx.wheel, &self.wheel_state, node)?;
                let spec = selected_filter_spec(&ctx.wheel, &state);
                self.refilter(ctx, spec)?;
                self.wheel_state = state;
            }
            EventKind::FilterSet { spec } => {
                self.require_shortlisting()?;
                self.refilter(ctx, spec.clone())?;
            }
            EventKind::BucketToggled { product_id, change } => {
                self.require_shortlisting()?;
                let mut bucket = self.bucket.clone();
                let actual = bucket.toggle(product_id, &self.filtered)?;
                if actual != *change {
                    return Err(Error::MalformedInput(format!(
                        "bucket toggle of `{product_id}` was {actual:?}, log says {change:?}"
                    )));
                }
                self.bucket = bucket;
            }
            EventKind::Advanced { from, to } => {
                if *from != self.stage || !transition_allowed(*from, *to) {
                    return Err(Error::IllegalTransition {
                        from: self.stage.to_string(),
                        to: to.to_string(),
                    });
                }
                if *to == Stage::Comparison && self.bucket.is_empty() {
                    return Err(Error::IllegalTransition {
                        from: from.to_string(),
                        to: format!("{to} (compare bucket is empty)"),
                    });
                }
                self.stage = *to;
            }
            EventKind::Decided { product_id } => {
                if self.stage != Stage::Comparison {
                    return Err(Error::WrongStage(self.stage.to_string()));
                }
                if !self.bucket.contains(product_id) {
                    return Err(Error::NotInBucket(product_id.clone()));
                }
                self.final_choice = Some(product_id.clone());
                self.stage = Stage::Decided;
            }
        }
        self.push(ts, kind);
        Ok(())
    }

    pub fn select_nodes(
        &mut self,
        ctx: &SessionContext,
        nodes: Vec<String>,
        ts: Timestamp,
    ) -> Result<()> {
        self.apply(ctx, EventKind::WheelSelection { nodes }, ts)
    }

    pub fn toggle_node(&mut self, ctx: &SessionContext, node: &str, ts: Timestamp) -> Result<()> {
        self.apply(
            ctx,
            EventKind::WheelToggled {
                node: node.to_string(),
            },
            ts,
        )
    }

    /// Replace the active filter directly. Wheel selection is kept and takes
    /// over again on the next wheel change.
    pub fn set_filter(
        &mut self,
        ctx: &SessionContext,
        spec: FilterSpec,
        ts: Timestamp,
    ) -> Result<()> {
        self.apply(ctx, EventKind::FilterSet { spec }, ts)
    }

    pub fn toggle_bucket(
        &mut self,
        ctx: &SessionContext,
        product_id: &str,
        ts: Timestamp,
    ) -> Result<BucketChange> {
        let change = if self.bucket.contains(product_id) {
            BucketChange::Removed
        } else {
            BucketChange::Added
        };
        self.apply(
            ctx,
            EventKind::BucketToggled {
                product_id: product_id.to_string(),
                change,
            },
            ts,
        )?;
        Ok(change)
    }

    pub fn advance(&mut self, ctx: &SessionContext, target: Stage, ts: Timestamp) -> Result<()> {
        if target == Stage::Decided || self.stage == Stage::Decided {
            return Err(Error::IllegalTransition {
                from: self.stage.to_string(),
                to: target.to_string(),
            });
        }
        self.apply(
            ctx,
            EventKind::Advanced {
                from: self.stage,
                to: target,
            },
            ts,
        )
    }

    pub fn decide(&mut self, ctx: &SessionContext, product_id: &str, ts: Timestamp) -> Result<()> {
        self.apply(
            ctx,
            EventKind::Decided {
                product_id: product_id.to_string(),
            },
            ts,
        )
    }

    /// The event log as JSON lines.
    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn events_from_jsonl(text: &str) -> Result<Vec<Event>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::MalformedInput(e.to_string())))
            .collect()
    }
}

/// Thread-safe collection of sessions keyed by id. Each session sits behind
/// its own lock so writers to different sessions never contend.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, ctx: &SessionContext, ts: Timestamp) -> Session {
        let n = self.next.fetch_add(1, Ordering::SeqCst) + 1;
        let session = Session::new(ctx, format!("s{n:06}"), ts);
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        session
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    pub fn snapshot(&self, id: &str) -> Result<Session> {
        let handle = self.get(id)?;
        let guard = handle.lock().expect("session poisoned");
        Ok(guard.clone())
    }

    /// Run `f` with exclusive access to one session.
    pub fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T>,
    ) -> Result<T> {
        let handle = self.get(id)?;
        let mut guard = handle.lock().expect("session poisoned");
        f(&mut guard)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
