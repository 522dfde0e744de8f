//! JSON solve reports with element names, and their independent re-verification.

use std::sync::Arc;

use lrtrans::coset_geometry::is_left_right_transversal;
use lrtrans::group_core::GroupTable;
use lrtrans::nielsen_engine::{Entry, NielsenMove, Setting, Transcript};
use lrtrans::solvers::{Rejection, SolveReport, Strategy, Verification};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEntry {
    pub occ: usize,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema: u32,
    pub job: Vec<String>,
    pub strategy: Option<Strategy>,
    pub quotient_order: Option<usize>,
    pub initial: Vec<NamedEntry>,
    pub moves: Vec<NielsenMove>,
    #[serde(rename = "final")]
    pub final_: Vec<NamedEntry>,
    pub transversal: Vec<String>,
    pub verification: Verification,
    pub failure_reason: Option<Vec<Rejection>>,
}

fn named(g: &GroupTable, es: &[Entry]) -> Vec<NamedEntry> {
    es.iter().map(|e| NamedEntry { occ: e.occ, value: g.name(e.value) }).collect()
}

impl ReportDoc {
    pub fn new(g: &GroupTable, job_text: &str, r: &SolveReport) -> ReportDoc {
        ReportDoc {
            schema: SCHEMA,
            job: job_text.lines().map(String::from).collect(),
            strategy: r.theorem_used,
            quotient_order: r.quotient_order,
            initial: named(g, &r.transcript.initial),
            moves: r.transcript.moves.clone(),
            final_: named(g, &r.transcript.final_),
            transversal: r.transversal.iter().map(|&x| g.name(x)).collect(),
            verification: r.verification,
            failure_reason: r.failure_reason.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

fn unnamed(g: &GroupTable, es: &[NamedEntry], what: &str) -> Result<Vec<Entry>, String> {
    es.iter()
        .map(|e| {
            g.parse_element(&e.value)
                .map(|value| Entry { occ: e.occ, value })
                .ok_or_else(|| format!("{what} occurrence {}: unknown element {:?}", e.occ, e.value))
        })
        .collect()
}

/// Replays the transcript and re-checks transversality and generation without trusting the flags.
pub fn verify(doc: &ReportDoc, st: &Arc<Setting>) -> Result<String, String> {
    if doc.schema != SCHEMA {
        return Err(format!("unsupported report schema {}", doc.schema));
    }
    let g = &st.group;
    let transcript = Transcript { initial: unnamed(g, &doc.initial, "initial")?, moves: doc.moves.clone(), final_: unnamed(g, &doc.final_, "final")? };
    let out = transcript.replay(st).map_err(|(i, e)| format!("replay diverges at move {i}: {e}"))?;
    if !out.generates() {
        return Err("final multiset does not generate the group".into());
    }
    let Some(strategy) = doc.strategy else {
        if !doc.moves.is_empty() || !doc.transversal.is_empty() || doc.failure_reason.is_none() {
            return Err("failure report carries moves or a transversal".into());
        }
        return Ok("failure report is consistent".into());
    };
    let transversal: Vec<usize> = doc
        .transversal
        .iter()
        .map(|n| g.parse_element(n).ok_or_else(|| format!("transversal has unknown element {n:?}")))
        .collect::<Result<_, _>>()?;
    for v in out.values() {
        if !transversal.contains(&v) {
            return Err(format!("final value {} is missing from the transversal", g.name(v)));
        }
    }
    if !is_left_right_transversal(&st.atlas.cosets, &transversal) {
        return Err("transversal is not a left-right transversal".into());
    }
    if !doc.verification.all() {
        return Err("report flags disagree with the checks".into());
    }
    Ok(format!("verified {} report with {} moves", strategy, doc.moves.len()))
}
