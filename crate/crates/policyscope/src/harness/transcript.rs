//! Plain-text transcript files: a commented header identifying the run, then
//! one block per LLM call with the prompt and the verbatim response. Replay
//! reads the responses (and their recorded latencies) back in call order.

use std::path::Path;

use crate::agents::AgentTranscript;
use crate::llm_client::ScriptEntry;
use crate::{Error, Result};

const MAGIC: &str = "# policyscope transcript v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptHeader {
    pub config_hash: String,
    pub benchmark: String,
    pub optimizer: String,
    pub seed: u64,
}

pub fn write_transcripts(
    path: &Path,
    header: &TranscriptHeader,
    transcripts: &[AgentTranscript],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# config_hash: {}\n", header.config_hash));
    out.push_str(&format!("# benchmark: {}\n", header.benchmark));
    out.push_str(&format!("# optimizer: {}\n", header.optimizer));
    out.push_str(&format!("# seed: {}\n", header.seed));
    out.push('\n');
    for (i, t) in transcripts.iter().enumerate() {
        let call = i + 1;
        out.push_str(&format!(
            "@@@ call {call} | iteration {} | role {} | parse {} | latency_ms {}\n",
            t.iteration,
            t.role.as_str(),
            t.parse_outcome,
            t.latency_ms
        ));
        out.push_str("--- prompt ---\n");
        out.push_str(&t.prompt);
        out.push('\n');
        out.push_str("--- response ---\n");
        out.push_str(&t.response);
        out.push('\n');
        out.push_str(&format!("@@@ end call {call}\n\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_header(path: &Path) -> Result<TranscriptHeader> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::file_format(path, format!("missing `{MAGIC}` header")));
    }
    let mut config_hash = None;
    let mut benchmark = None;
    let mut optimizer = None;
    let mut seed = None;
    for line in lines {
        let Some(rest) = line.strip_prefix("# ") else { break };
        if let Some((key, value)) = rest.split_once(": ") {
            match key {
                "config_hash" => config_hash = Some(value.to_string()),
                "benchmark" => benchmark = Some(value.to_string()),
                "optimizer" => optimizer = Some(value.to_string()),
                "seed" => seed = value.parse().ok(),
                _ => {}
            }
        }
    }
    Ok(TranscriptHeader {
        config_hash: config_hash
            .ok_or_else(|| Error::file_format(path, "missing config_hash header line"))?,
        benchmark: benchmark.unwrap_or_default(),
        optimizer: optimizer.unwrap_or_default(),
        seed: seed.unwrap_or_default(),
    })
}

/// The recorded responses in call order, as a script for the replay client.
pub fn read_entries(path: &Path) -> Result<Vec<ScriptEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    let mut cursor = 0usize;
    let mut call = 1usize;
    loop {
        let start_marker = format!("@@@ call {call} ");
        let Some(start) = text[cursor..].find(&start_marker) else { break };
        let block_start = cursor + start;
        let header_line_end = text[block_start..]
            .find('\n')
            .map(|i| block_start + i)
            .ok_or_else(|| Error::file_format(path, format!("truncated call {call} header")))?;
        let latency_ms = text[block_start..header_line_end]
            .rsplit("latency_ms ")
            .next()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0);

        let resp_marker = "--- response ---\n";
        let resp_start = text[block_start..]
            .find(resp_marker)
            .map(|i| block_start + i + resp_marker.len())
            .ok_or_else(|| Error::file_format(path, format!("call {call} has no response section")))?;
        let end_marker = format!("\n@@@ end call {call}");
        let resp_end = text[resp_start..]
            .find(&end_marker)
            .map(|i| resp_start + i)
            .ok_or_else(|| Error::file_format(path, format!("call {call} is not terminated")))?;
        entries.push(ScriptEntry {
            content: text[resp_start..resp_end].to_string(),
            latency_ms,
        });
        cursor = resp_end + end_marker.len();
        call += 1;
    }
    Ok(entries)
}
