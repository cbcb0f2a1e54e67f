//! Export of the MAX-TIPS and AVG-TIPS integer programs in CPLEX LP format.
//!
//! Sites are the columns of the distance matrix (`S ∪ F`). Variables:
//! `x_s` (site `s` open), `y_s_j` (trajectory position `j` served by `s`) and,
//! for MAX-TIPS, `z_s` (worst detour served by `s`) and `Z`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::avgtips::DistanceMatrix;
use crate::error::{Result, TipsError};
use crate::network::NodeId;
use crate::trajectory::{check_gamma, PlacementInstance};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    MaxTips,
    AvgTips,
}

impl std::str::FromStr for Problem {
    type Err = TipsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-tips" => Ok(Problem::MaxTips),
            "avg-tips" => Ok(Problem::AvgTips),
            other => Err(TipsError::InvalidParameter(format!(
                "unknown problem `{other}` (expected max-tips or avg-tips)"
            ))),
        }
    }
}

const LINE_WIDTH: usize = 100;

/// Accumulates one LP row, wrapping long expressions.
struct Row {
    text: String,
    width: usize,
    empty: bool,
}

impl Row {
    fn new(name: &str) -> Self {
        let text = format!(" {name}:");
        Row {
            width: text.len(),
            text,
            empty: true,
        }
    }

    fn term(&mut self, coefficient: f64, var: &str) {
        let body = if coefficient.abs() == 1.0 {
            var.to_string()
        } else {
            format!("{:.3} {var}", coefficient.abs())
        };
        self.push(coefficient < 0.0, body);
    }

    /// A distance coefficient, always printed with three decimals.
    fn distance(&mut self, coefficient: f64, var: &str) {
        self.push(coefficient < 0.0, format!("{:.3} {var}", coefficient.abs()));
    }

    fn push(&mut self, negative: bool, body: String) {
        let sign = if negative { "-" } else { "+" };
        let piece = if self.empty && sign == "+" {
            format!(" {body}")
        } else {
            format!(" {sign} {body}")
        };
        if self.width + piece.len() > LINE_WIDTH {
            self.text.push_str("\n   ");
            self.width = 3;
        }
        self.width += piece.len();
        self.text.push_str(&piece);
        self.empty = false;
    }

    fn finish(mut self, out: &mut String, tail: &str) {
        if self.empty {
            self.text.push_str(" 0");
        }
        self.text.push_str(tail);
        out.push_str(&self.text);
        out.push('\n');
    }
}

fn x(s: NodeId) -> String {
    format!("x_{s}")
}

fn y(s: NodeId, j: usize) -> String {
    format!("y_{s}_{j}")
}

fn z(s: NodeId) -> String {
    format!("z_{s}")
}

/// Renders the ILP for `problem` with `k` new sites; `gamma` is used only for
/// MAX-TIPS.
pub fn export_ilp(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    problem: Problem,
    k: usize,
    gamma: f64,
) -> Result<String> {
    matrix.check_covers(inst)?;
    if problem == Problem::MaxTips {
        check_gamma(gamma)?;
    }
    let sites = inst.all_columns();
    let m = inst.trajectory_count();
    let mut dist = vec![vec![0.0; m]; sites.len()];
    for (i, &s) in sites.iter().enumerate() {
        let c = matrix.column_index(s).expect("checked above");
        for (j, d) in dist[i].iter_mut().enumerate() {
            *d = matrix.get(j, c);
            if !d.is_finite() {
                return Err(TipsError::Unreachable {
                    trajectory: inst.trajectories[j].id,
                    site: s.index(),
                });
            }
        }
    }

    let mut out = String::new();
    let label = match problem {
        Problem::MaxTips => format!("MAX-TIPS, k = {k}, gamma = {gamma}"),
        Problem::AvgTips => format!("AVG-TIPS, k = {k}"),
    };
    writeln!(out, "\\ {label}, {} sites, {m} trajectories", sites.len()).unwrap();
    out.push_str("Minimize\n");
    let mut obj = Row::new("obj");
    match problem {
        Problem::MaxTips => obj.term(1.0, "Z"),
        Problem::AvgTips => {
            for (&s, row) in sites.iter().zip(&dist) {
                for (j, &d) in row.iter().enumerate() {
                    if d != 0.0 {
                        obj.distance(d, &y(s, j));
                    }
                }
            }
        }
    }
    obj.finish(&mut out, "");

    out.push_str("Subject To\n");
    if problem == Problem::MaxTips {
        for &s in &sites {
            let mut row = Row::new(&format!("worst_{s}"));
            row.term(1.0, "Z");
            row.term(-1.0, &z(s));
            row.finish(&mut out, " >= 0");
        }
        for (&s, column) in sites.iter().zip(&dist) {
            for (j, &d) in column.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let mut row = Row::new(&format!("detour_{s}_{j}"));
                row.term(1.0, &z(s));
                row.distance(-d, &y(s, j));
                row.finish(&mut out, " >= 0");
            }
        }
    }
    let mut card = Row::new("cardinality");
    for &s in &sites {
        card.term(1.0, &x(s));
    }
    card.finish(&mut out, &format!(" <= {}", k + inst.facilities.len()));
    for j in 0..m {
        let mut row = Row::new(&format!("serve_{j}"));
        for &s in &sites {
            row.term(1.0, &y(s, j));
        }
        let tail = match problem {
            Problem::MaxTips => " <= 1",
            Problem::AvgTips => " = 1",
        };
        row.finish(&mut out, tail);
    }
    if problem == Problem::MaxTips {
        let mut row = Row::new("served");
        for &s in &sites {
            for j in 0..m {
                row.term(1.0, &y(s, j));
            }
        }
        row.finish(&mut out, &format!(" >= {}", gamma * m as f64));
    }
    for &s in &sites {
        for j in 0..m {
            let mut row = Row::new(&format!("open_{s}_{j}"));
            row.term(1.0, &y(s, j));
            row.term(-1.0, &x(s));
            row.finish(&mut out, " <= 0");
        }
    }
    for &f in &inst.facilities {
        let mut row = Row::new(&format!("existing_{f}"));
        row.term(1.0, &x(f));
        row.finish(&mut out, " = 1");
    }

    if problem == Problem::MaxTips {
        out.push_str("Bounds\n Z >= 0\n");
        for &s in &sites {
            writeln!(out, " {} >= 0", z(s)).unwrap();
        }
    }
    out.push_str("Binaries\n");
    for &s in &sites {
        writeln!(out, " {}", x(s)).unwrap();
    }
    for &s in &sites {
        for j in 0..m {
            writeln!(out, " {}", y(s, j)).unwrap();
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Variables declared by [`export_ilp`]: `n + n·m`, plus `n + 1` continuous
/// ones for MAX-TIPS.
pub fn variable_count(problem: Problem, sites: usize, trajectories: usize) -> usize {
    let binaries = sites + sites * trajectories;
    match problem {
        Problem::MaxTips => binaries + sites + 1,
        Problem::AvgTips => binaries,
    }
}
