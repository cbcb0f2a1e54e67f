//! Plain-text instance files.
//!
//! * edges: `from to length` per line; an optional `# nodes N` line fixes the
//!   node count when trailing nodes are isolated;
//! * trajectories: `id: n1 n2 ... nl` per line;
//! * sites and facilities: one node id per line.
//!
//! Blank lines and `#` comments are ignored everywhere.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, TipsError};
use crate::network::{NodeId, RoadNetwork};
use crate::trajectory::{PlacementInstance, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct InstancePaths {
    pub edges: PathBuf,
    pub trajectories: PathBuf,
    /// Absent means every node is a candidate site.
    pub sites: Option<PathBuf>,
    /// Absent means there are no existing facilities.
    pub facilities: Option<PathBuf>,
}

impl InstancePaths {
    /// The conventional file names inside `dir`, with the optional files
    /// included only when they exist.
    pub fn in_dir(dir: &Path) -> Self {
        let optional = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        InstancePaths {
            edges: dir.join("edges.txt"),
            trajectories: dir.join("trajectories.txt"),
            sites: optional("sites.txt"),
            facilities: optional("facilities.txt"),
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> TipsError {
    TipsError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-empty, comment-stripped lines with 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn node_count_directive(text: &str) -> Option<(usize, &str)> {
    text.lines().enumerate().find_map(|(i, l)| {
        let rest = l.trim().strip_prefix('#')?.trim().strip_prefix("nodes")?;
        Some((i + 1, rest.trim()))
    })
}

pub fn parse_edges(text: &str, path: &Path) -> Result<RoadNetwork> {
    let mut records = Vec::new();
    let mut largest = None;
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [from, to, length] = fields[..] else {
            return Err(parse_error(path, line, "expected `from to length`"));
        };
        let node = |f: &str| {
            f.parse::<u32>()
                .map_err(|_| parse_error(path, line, format!("bad node id `{f}`")))
        };
        let (from, to) = (node(from)? as usize, node(to)? as usize);
        let length: f64 = length
            .parse()
            .map_err(|_| parse_error(path, line, format!("bad length `{length}`")))?;
        if !length.is_finite() {
            return Err(parse_error(path, line, "length is not finite"));
        }
        if length < 0.0 {
            return Err(parse_error(path, line, format!("negative length {length}")));
        }
        largest = largest.max(Some(from.max(to)));
        records.push((line, from, to, length));
    }
    let Some(largest) = largest else {
        return Err(TipsError::EmptyNetwork);
    };
    let node_count = match node_count_directive(text) {
        Some((line, value)) => {
            let n: usize = value
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad node count `{value}`")))?;
            if let Some(r) = records.iter().find(|r| r.1.max(r.2) >= n) {
                return Err(parse_error(
                    path,
                    r.0,
                    format!("endpoint outside the declared {n} nodes"),
                ));
            }
            n
        }
        None => largest + 1,
    };
    RoadNetwork::new(
        node_count,
        records.into_iter().map(|(_, a, b, w)| (a, b, w)),
    )
}

pub fn parse_trajectories(text: &str, path: &Path, net: &RoadNetwork) -> Result<Vec<Trajectory>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, body) in content_lines(text) {
        let (id, nodes) = body
            .split_once(':')
            .ok_or_else(|| parse_error(path, line, "expected `id: n1 n2 ...`"))?;
        let id: u64 = id
            .trim()
            .parse()
            .map_err(|_| parse_error(path, line, format!("bad trajectory id `{}`", id.trim())))?;
        if !seen.insert(id) {
            return Err(parse_error(
                path,
                line,
                format!("duplicate trajectory id {id}"),
            ));
        }
        let nodes = nodes
            .split_whitespace()
            .map(|f| parse_node(f, path, line, net))
            .collect::<Result<Vec<_>>>()?;
        let t = Trajectory::new(id, nodes).map_err(|e| parse_error(path, line, e.to_string()))?;
        out.push(t);
    }
    Ok(out)
}

fn parse_node(field: &str, path: &Path, line: usize, net: &RoadNetwork) -> Result<NodeId> {
    let v: u32 = field
        .parse()
        .map_err(|_| parse_error(path, line, format!("bad node id `{field}`")))?;
    let node = NodeId(v);
    if !net.contains(node) {
        return Err(parse_error(
            path,
            line,
            format!(
                "node {v} is not in the network ({} nodes)",
                net.node_count()
            ),
        ));
    }
    Ok(node)
}

pub fn parse_node_list(text: &str, path: &Path, net: &RoadNetwork) -> Result<Vec<NodeId>> {
    content_lines(text)
        .map(|(line, body)| parse_node(body, path, line, net))
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| parse_error(path, 0, e.to_string()))
}

pub fn parse_instance(paths: &InstancePaths) -> Result<PlacementInstance> {
    let net = parse_edges(&read(&paths.edges)?, &paths.edges)?;
    let trajectories = parse_trajectories(&read(&paths.trajectories)?, &paths.trajectories, &net)?;
    let sites = match &paths.sites {
        Some(p) => parse_node_list(&read(p)?, p, &net)?,
        None => (0..net.node_count()).map(NodeId::from).collect(),
    };
    let facilities = match &paths.facilities {
        Some(p) => parse_node_list(&read(p)?, p, &net)?,
        None => Vec::new(),
    };
    PlacementInstance::new(net, trajectories, sites, facilities)
}

pub fn format_edges(net: &RoadNetwork) -> String {
    let mut out = format!("# nodes {}\n", net.node_count());
    for e in net.edges() {
        writeln!(out, "{} {} {}", e.from, e.to, e.length).expect("writing to a String");
    }
    out
}

pub fn format_trajectories(trajs: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajs {
        write!(out, "{}:", t.id).expect("writing to a String");
        for v in &t.nodes {
            write!(out, " {v}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn format_node_list(nodes: &[NodeId]) -> String {
    nodes.iter().map(|v| format!("{v}\n")).collect()
}

/// Writes all four files into `dir` under the conventional names.
pub fn write_instance(inst: &PlacementInstance, dir: &Path) -> Result<InstancePaths> {
    fs::create_dir_all(dir)?;
    let paths = InstancePaths {
        edges: dir.join("edges.txt"),
        trajectories: dir.join("trajectories.txt"),
        sites: Some(dir.join("sites.txt")),
        facilities: Some(dir.join("facilities.txt")),
    };
    fs::write(&paths.edges, format_edges(&inst.network))?;
    fs::write(&paths.trajectories, format_trajectories(&inst.trajectories))?;
    fs::write(paths.sites.as_ref().unwrap(), format_node_list(&inst.sites))?;
    fs::write(
        paths.facilities.as_ref().unwrap(),
        format_node_list(&inst.facilities),
    )?;
    Ok(paths)
}
