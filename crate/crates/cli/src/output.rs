use std::fs;
use std::io::Write;
use std::path::Path;

use num_traits::Zero;
use serde::Serialize;

use mermin_lhv::exact::to_f64;
use mermin_lhv::mc::CompareReport;
use mermin_lhv::solver::sig12;
use mermin_lhv::{ExactTable, LhvModel, Outcome, Setting};

pub fn text(out: Option<&Path>, body: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

pub fn json<T: Serialize>(out: Option<&Path>, value: &T) -> std::io::Result<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    body.push('\n');
    text(out, &body)
}

/// Nonzero cells as `setting,outcome,p`.
pub fn table_csv(table: &ExactTable) -> String {
    let mut out = String::from("setting,outcome,p\n");
    for s in Setting::all(table.n) {
        for o in Outcome::all(table.n) {
            let p = table.get(s, o);
            if !p.is_zero() {
                out.push_str(&format!("{s},{o},{}\n", sig12(to_f64(p))));
            }
        }
    }
    out
}

pub fn model_csv(model: &LhvModel) -> String {
    let mut out = String::from("strategy,instructions,k,l,m,p\n");
    for (g, w) in &model.weights {
        let c = g.classify(model.n);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            g.0,
            g.display(model.n),
            c.k,
            c.l,
            c.m,
            sig12(to_f64(w))
        ));
    }
    out
}

pub fn report_csv(report: &CompareReport) -> String {
    let mut out = String::from("setting,outcome,count,expected,z\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.setting,
            c.o,
            c.count,
            sig12(c.expected),
            c.z.map(sig12).unwrap_or_default()
        ));
    }
    out
}
