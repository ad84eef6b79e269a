//! Training-audit instrumentation.
//!
//! Every `scaler_fit` and model-fit call site reports the provenance ids of
//! the rows it consumed, tagged with the fold/candidate context. Leakage
//! checks then assert that no held-out row id ever appears in any event.

use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditSite {
    ScalerFit,
    ModelFit,
}

#[derive(Debug, Clone)]
pub struct AuditEvent {
    pub site: AuditSite,
    /// Where in the protocol the call happened, e.g. `outer3/cand12/inner4`.
    pub context: String,
    pub row_ids: Vec<String>,
}

/// Thread-safe event sink; sharable across parallel grid candidates.
#[derive(Debug, Default)]
pub struct TrainingAudit {
    events: Mutex<Vec<AuditEvent>>,
}

impl TrainingAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record<I>(&self, site: AuditSite, context: &str, row_ids: I)
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let event = AuditEvent {
            site,
            context: context.to_string(),
            row_ids: row_ids.into_iter().map(Into::into).collect(),
        };
        self.events.lock().unwrap().push(event);
    }

    pub fn events(&self) -> Vec<AuditEvent> {
        self.events.lock().unwrap().clone()
    }

    /// Ids that appeared in any event whose context starts with `prefix`.
    pub fn ids_touched_under(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        for e in self.events.lock().unwrap().iter() {
            if e.context.starts_with(prefix) {
                out.extend(e.row_ids.iter().cloned());
            }
        }
        out
    }
}

/// Records to the sink when one is attached.
pub(crate) fn record_if(
    audit: Option<&TrainingAudit>,
    site: AuditSite,
    context: &str,
    ids: impl Fn() -> Vec<String>,
) {
    if let Some(a) = audit {
        a.record(site, context, ids());
    }
}
