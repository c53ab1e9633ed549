//! Trajectory serialization.

use std::fmt::Write as _;

use serde::Serialize;

use crate::scenario::TrajectoryRow;

pub const CSV_HEADER: &str = "t,entropy_a,entropy_b,purity_a,purity_b,expect_h";
pub const CSV_COMMENT: &str = "# entropy in nats (natural logarithm)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

fn number(buf: &mut ryu::Buffer, x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    buf.format(x).to_string()
}

pub fn to_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::new();
    let mut buf = ryu::Buffer::new();
    out.push_str(CSV_COMMENT);
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [r.t, r.entropy_a, r.entropy_b, r.purity_a, r.purity_b, r.expect_h];
        let line: Vec<String> = fields.iter().map(|&x| number(&mut buf, x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

#[derive(Serialize)]
struct JsonTrajectory<'a> {
    entropy_units: &'static str,
    rows: &'a [TrajectoryRow],
}

pub fn to_json(rows: &[TrajectoryRow]) -> String {
    let doc = JsonTrajectory {
        entropy_units: "nats",
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("rows serialize");
    s.push('\n');
    s
}

pub fn render(rows: &[TrajectoryRow], format: Format) -> String {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}
