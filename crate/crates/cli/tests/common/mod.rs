#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermal-qkd"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// A parsed metrics or g2 table: leading `#` lines, header, rows.
#[derive(Debug)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Table {
        let mut lines = text.lines();
        let mut comments = Vec::new();
        let header = loop {
            let line = lines.next().expect("table has a header");
            match line.strip_prefix("# ") {
                Some(c) => comments.push(c.to_string()),
                None => break line,
            }
        };
        Table {
            comments,
            columns: header.split(',').map(str::to_string).collect(),
            rows: lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
        }
    }

    pub fn read(path: &Path) -> Table {
        Table::parse(&std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
    }

    pub fn index(&self, column: &str) -> usize {
        self.columns
            .iter()
            .position(|c| c == column)
            .unwrap_or_else(|| panic!("no column {column}"))
    }

    pub fn text(&self, column: &str) -> Vec<&str> {
        let k = self.index(column);
        self.rows.iter().map(|r| r[k].as_str()).collect()
    }

    pub fn col(&self, column: &str) -> Vec<f64> {
        self.text(column).iter().map(|v| v.parse().unwrap()).collect()
    }
}
