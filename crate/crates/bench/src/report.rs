//! Text, CSV and JSON renderings of a [`ClassReport`].

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::harness::ClassReport;

fn or_over(v: Option<usize>, p_max: usize) -> String {
    v.map_or_else(|| format!("> {p_max}"), |x| x.to_string())
}

/// Console table: one row per method, then one row per comparison.
pub fn text_table(r: &ClassReport) -> String {
    let mut s = String::new();
    let c = &r.class;
    writeln!(
        s,
        "class N={} {} count={} seed={}  delta={:e}  P_max={}  eps={:e}",
        c.dim, c.difficulty, c.count, c.seed, r.delta, r.p_max, r.epsilon
    )
    .unwrap();
    for bad in &r.invalid {
        writeln!(s, "excluded #{}: {}", bad.index, bad.error).unwrap();
    }
    writeln!(s, "{:<8} {:>10} {:>16} {:>10} {:>14} {:>9}", "method", "50%", "100%", "boxes", "average", "unsolved").unwrap();
    for m in &r.methods {
        writeln!(
            s,
            "{:<8} {:>10} {:>16} {:>10} {:>14} {:>9}",
            m.method.name(),
            or_over(m.half, r.p_max),
            m.c1.to_string(),
            m.c2.map_or("-".into(), |v| v.to_string()),
            format!("{:.2}", m.c3),
            m.unsolved()
        )
        .unwrap();
    }
    if !r.comparisons.is_empty() {
        writeln!(s, "{:<12} {:>12} {:>12} {:>9}", "vs new", "worst/new", "avg/new", "p:q").unwrap();
        for cmp in &r.comparisons {
            writeln!(
                s,
                "{:<12} {:>12} {:>12} {:>9}",
                cmp.competitor.name(),
                format!("{:.2}", cmp.c1_ratio),
                format!("{:.2}", cmp.c3_ratio),
                format!("{}:{}", cmp.p, cmp.q)
            )
            .unwrap();
        }
    }
    s
}

/// One row per (method, problem).
pub fn runs_csv(r: &ClassReport) -> String {
    let mut s = String::from("method,index,trials,boxes,solved,f_min\n");
    for m in &r.methods {
        for run in &m.runs {
            writeln!(s, "{},{},{},{},{},{:?}", m.method, run.index, run.trials, run.boxes, run.solved, run.f_min).unwrap();
        }
    }
    s
}

/// One row per method with the class criteria.
pub fn summary_csv(r: &ClassReport) -> String {
    let mut s = String::from("method,half,worst,worst_index,unsolved,boxes_at_worst,average,average_lower_bound\n");
    for m in &r.methods {
        writeln!(
            s,
            "{},{},{},{},{},{},{:?},{}",
            m.method,
            m.half.map_or(String::new(), |v| v.to_string()),
            m.c1.effective(),
            m.c1.argmax.map_or(String::new(), |v| v.to_string()),
            m.unsolved(),
            m.c2.map_or(String::new(), |v| v.to_string()),
            m.c3.value,
            m.c3.lower_bound
        )
        .unwrap();
    }
    s
}

pub fn to_json(r: &ClassReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `report.txt`, `runs.csv`, `summary.csv` and `report.json` into `dir`.
pub fn write_all(r: &ClassReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        ("report.txt", text_table(r)),
        ("runs.csv", runs_csv(r)),
        ("summary.csv", summary_csv(r)),
        ("report.json", to_json(r)),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use trisect_core::problems::{Difficulty, ProblemClass};

    use super::*;
    use crate::harness::{run_class, Method};

    #[test]
    fn renderings_cover_every_run() {
        let class = ProblemClass::new(2, Difficulty::Simple, 4, 9);
        let r = run_class(&[Method::New, Method::DirectL], &class, 1e-4, 3000, 2).unwrap();
        assert_eq!(runs_csv(&r).lines().count(), 1 + 8);
        assert_eq!(summary_csv(&r).lines().count(), 3);
        let t = text_table(&r);
        assert!(t.contains("directl") && t.contains("p:q"));
        let back: ClassReport = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }
}
