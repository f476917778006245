//! Text edge-list format.
//!
//! ```text
//! p <n> <m>
//! # planted <c> <comma-separated S>     (optional)
//! # W <max weight>                      (optional, default n^2)
//! # label <id> <name>                   (optional, one per vertex)
//! <u> <v> <w>                           (m lines, 0-based ids)
//! ```
//!
//! Other lines starting with `#` are comments. Writers emit the header, the
//! metadata lines, then the edges sorted by `(u, v)`. Files whose endpoints
//! are not integer ids in `0..n` are read as labeled: labels get dense ids in
//! order of first appearance and the mapping is written back as `# label`
//! lines.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{default_max_weight, Edge, GraphError, PlantedCut, VertexId, VertexSide, WeightedMultigraph};

/// A graph together with the metadata carried by its file.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: WeightedMultigraph,
    pub planted: Option<PlantedCut>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, GraphError> {
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<GraphFile, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut planted_raw: Option<(usize, u64, String)> = None;
    let mut max_weight: Option<u64> = None;
    let mut declared_labels: Vec<(usize, VertexId, String)> = Vec::new();
    let mut raw_edges: Vec<(usize, String, String, u64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let toks: Vec<&str> = comment.split_whitespace().collect();
            match toks.first().copied() {
                Some("planted") => {
                    if toks.len() != 3 {
                        return Err(parse_err(lineno, "expected `# planted <c> <S>`"));
                    }
                    let c = parse_num(toks[1], lineno, "planted weight")?;
                    planted_raw = Some((lineno, c, toks[2].to_string()));
                }
                Some("W") => {
                    if toks.len() != 2 {
                        return Err(parse_err(lineno, "expected `# W <max weight>`"));
                    }
                    max_weight = Some(parse_num(toks[1], lineno, "max weight")?);
                }
                Some("label") => {
                    if toks.len() != 3 {
                        return Err(parse_err(lineno, "expected `# label <id> <name>`"));
                    }
                    let id = parse_num(toks[1], lineno, "label id")?;
                    declared_labels.push((lineno, id, toks[2].to_string()));
                }
                _ => {}
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if header.is_none() {
            if toks.len() != 3 || toks[0] != "p" {
                return Err(parse_err(lineno, "expected header `p <n> <m>`"));
            }
            header = Some((parse_num(toks[1], lineno, "n")?, parse_num(toks[2], lineno, "m")?));
            continue;
        }
        if toks.len() != 3 {
            return Err(parse_err(lineno, "expected `<u> <v> <w>`"));
        }
        let w = parse_num(toks[2], lineno, "weight")?;
        raw_edges.push((lineno, toks[0].to_string(), toks[1].to_string(), w));
    }

    let (n, m) = header.ok_or_else(|| parse_err(0, "missing header `p <n> <m>`"))?;
    if raw_edges.len() != m {
        return Err(parse_err(0, format!("header declares {m} edges, found {}", raw_edges.len())));
    }

    let numeric = |tok: &str| tok.parse::<VertexId>().ok().filter(|&v| (v as usize) < n);
    let all_numeric = raw_edges.iter().all(|(_, a, b, _)| numeric(a).is_some() && numeric(b).is_some());

    let mut labels: Option<Vec<String>> = None;
    let mut edges = Vec::with_capacity(m);
    if all_numeric {
        for (_, a, b, w) in &raw_edges {
            edges.push(Edge::new(numeric(a).unwrap(), numeric(b).unwrap(), *w));
        }
        if !declared_labels.is_empty() {
            let mut names = vec![None; n];
            for (lineno, id, name) in declared_labels {
                let slot = names
                    .get_mut(id as usize)
                    .ok_or_else(|| parse_err(lineno, format!("label id {id} out of range")))?;
                *slot = Some(name);
            }
            let names: Option<Vec<String>> = names.into_iter().collect();
            labels = Some(names.ok_or_else(|| parse_err(0, "label lines must cover every vertex"))?);
        }
    } else {
        let mut ids: HashMap<String, VertexId> = HashMap::new();
        let mut names = Vec::new();
        for (lineno, a, b, w) in &raw_edges {
            let mut id_of = |tok: &String| -> Result<VertexId, GraphError> {
                if let Some(&id) = ids.get(tok) {
                    return Ok(id);
                }
                if names.len() == n {
                    return Err(parse_err(*lineno, format!("more than {n} distinct labels")));
                }
                let id = names.len() as VertexId;
                ids.insert(tok.clone(), id);
                names.push(tok.clone());
                Ok(id)
            };
            let (u, v) = (id_of(a)?, id_of(b)?);
            edges.push(Edge::new(u, v, *w));
        }
        if names.len() != n {
            return Err(GraphError::Disconnected);
        }
        labels = Some(names);
    }

    let mut graph = WeightedMultigraph::with_max_weight(n, edges, max_weight.unwrap_or_else(|| default_max_weight(n)))?;
    if let Some(names) = labels {
        graph.set_labels(names);
    }

    let planted = match planted_raw {
        None => None,
        Some((lineno, weight, list)) => {
            let mut members = Vec::new();
            for tok in list.split(',') {
                members.push(parse_num::<VertexId>(tok, lineno, "planted vertex")?);
            }
            let side = VertexSide::new(n, members)?;
            Some(PlantedCut { weight, side })
        }
    };
    Ok(GraphFile { graph, planted })
}

/// Canonical text form of `file`.
pub fn write_graph(file: &GraphFile) -> String {
    let g = &file.graph;
    let mut out = String::new();
    let _ = writeln!(out, "p {} {}", g.n(), g.m());
    if let Some(planted) = &file.planted {
        let members: Vec<String> = planted.side.members().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "# planted {} {}", planted.weight, members.join(","));
    }
    if g.max_weight() != default_max_weight(g.n()) {
        let _ = writeln!(out, "# W {}", g.max_weight());
    }
    if let Some(labels) = g.labels() {
        for (i, name) in labels.iter().enumerate() {
            let _ = writeln!(out, "# label {i} {name}");
        }
    }
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
    }
    out
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<GraphFile, GraphError> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn save_graph(path: impl AsRef<Path>, file: &GraphFile) -> Result<(), GraphError> {
    std::fs::write(path, write_graph(file))?;
    Ok(())
}
