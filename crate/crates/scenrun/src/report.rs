//! Run artifacts: `result.json`, the JSONL event log and `junit.xml`.

use crate::events::to_jsonl;
use crate::runner::{RunResult, Verdict};
use serde_json::json;
use std::io;
use std::path::{Path, PathBuf};

/// The fixed result schema:
/// `{"scenario", "variant", "verdict", "sim_duration_s", "wall_duration_s",
///   "seed", "events": [{"name", "t"}], "metrics"}`.
pub fn result_json(result: &RunResult) -> serde_json::Value {
    json!({
        "scenario": result.scenario,
        "variant": result.variant,
        "verdict": result.verdict.as_str(),
        "sim_duration_s": result.sim_duration_s,
        "wall_duration_s": result.wall_duration_s,
        "seed": result.seed,
        "events": result
            .events
            .iter()
            .map(|(name, t)| json!({"name": name, "t": t}))
            .collect::<Vec<_>>(),
        "metrics": result.metrics,
    })
}

/// Write result.json, the event log and (when present) tree.log for one run.
pub fn write_run_artifacts(result: &RunResult, out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let result_path = out_dir.join("result.json");
    std::fs::write(
        &result_path,
        serde_json::to_string_pretty(&result_json(result)).expect("result serializes") + "\n",
    )?;
    written.push(result_path);

    let events_path = out_dir.join(&result.event_output);
    std::fs::write(&events_path, to_jsonl(&result.event_log))?;
    written.push(events_path);

    if let Some(tree_log) = &result.tree_log {
        let tree_path = out_dir.join("tree.log");
        std::fs::write(&tree_path, tree_log)?;
        written.push(tree_path);
    }
    Ok(written)
}

fn xml_escape(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '&' => "&amp;".to_string(),
            '<' => "&lt;".to_string(),
            '>' => "&gt;".to_string(),
            '"' => "&quot;".to_string(),
            '\'' => "&apos;".to_string(),
            other => other.to_string(),
        })
        .collect()
}

/// One `<testcase>` per result; Fail maps to `<failure>`, Timeout to
/// `<failure type="timeout">`, Error to `<error>`.
pub fn junit_xml(results: &[RunResult]) -> String {
    let failures = results
        .iter()
        .filter(|r| matches!(r.verdict, Verdict::Fail | Verdict::Timeout))
        .count();
    let errors = results
        .iter()
        .filter(|r| r.verdict == Verdict::Error)
        .count();
    let total_time: f64 = results.iter().map(|r| r.wall_duration_s).sum();
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<testsuite name=\"scenrun\" tests=\"{}\" failures=\"{failures}\" errors=\"{errors}\" time=\"{total_time:.3}\">\n",
        results.len()
    ));
    for result in results {
        let name = result.variant.as_deref().unwrap_or(&result.scenario);
        out.push_str(&format!(
            "  <testcase classname=\"{}\" name=\"{}\" time=\"{:.3}\"",
            xml_escape(&result.scenario),
            xml_escape(name),
            result.wall_duration_s
        ));
        let detail = result.diagnostics.join("\n");
        match result.verdict {
            Verdict::Success => out.push_str("/>\n"),
            Verdict::Fail => out.push_str(&format!(
                ">\n    <failure message=\"{}\"/>\n  </testcase>\n",
                xml_escape(&detail)
            )),
            Verdict::Timeout => out.push_str(&format!(
                ">\n    <failure type=\"timeout\" message=\"{}\"/>\n  </testcase>\n",
                xml_escape(&detail)
            )),
            Verdict::Error => out.push_str(&format!(
                ">\n    <error message=\"{}\"/>\n  </testcase>\n",
                xml_escape(&detail)
            )),
        }
    }
    out.push_str("</testsuite>\n");
    out
}

pub fn write_junit(results: &[RunResult], out_dir: &Path) -> io::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("junit.xml");
    std::fs::write(&path, junit_xml(results))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn result(verdict: Verdict) -> RunResult {
        RunResult {
            scenario: "s".to_string(),
            variant: None,
            verdict,
            sim_duration_s: 1.0,
            wall_duration_s: 0.01,
            seed: 0,
            events: vec![("end".to_string(), 1.0)],
            metrics: BTreeMap::new(),
            event_log: Vec::new(),
            event_output: "events.jsonl".to_string(),
            tree_log: None,
            diagnostics: vec!["it <broke> & \"failed\"".to_string()],
        }
    }

    #[test]
    fn result_json_matches_schema() {
        let value = result_json(&result(Verdict::Success));
        assert_eq!(value["verdict"], "success");
        assert_eq!(value["variant"], serde_json::Value::Null);
        assert_eq!(value["events"][0]["name"], "end");
        assert_eq!(value["events"][0]["t"], 1.0);
        assert!(value["metrics"].is_object());
    }

    #[test]
    fn junit_counts_and_escaping() {
        let results = vec![
            result(Verdict::Success),
            result(Verdict::Fail),
            result(Verdict::Timeout),
            result(Verdict::Error),
        ];
        let xml = junit_xml(&results);
        assert!(xml.contains("tests=\"4\" failures=\"2\" errors=\"1\""));
        assert!(xml.contains("<failure type=\"timeout\""));
        assert!(xml.contains("&lt;broke&gt; &amp; &quot;failed&quot;"));
        assert!(!xml.contains("<broke>"));
    }

    #[test]
    fn junit_empty_is_valid() {
        let xml = junit_xml(&[]);
        assert!(xml.contains("tests=\"0\""));
        assert!(xml.trim_end().ends_with("</testsuite>"));
    }
}
