//! Line-oriented run traces.
//!
//! ```text
//! domain 2 0,0 1,1 0
//! trial 1 0 init 3.5 3.5 0,0
//! box 0 2 2/3,0 1/3,1/3
//! dot 0 2 0.0617 -1.25 1 0 4.5
//! ```
//!
//! `domain` gives the dimension, the bounds and the reflection flag. `trial`
//! lines carry index, iteration, phase, value, record value and the point.
//! `box` lines give id, group and both grid corners. `dot` lines give the
//! diagram position of a box, whether it is nondominated and its slope range.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::geometry::{Domain, GridVertex, Partition};
use crate::optimizer::{Phase, TrialEvent};
use crate::selection::{group_representatives, nondominated};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxLine {
    pub id: usize,
    pub s: u32,
    pub a: GridVertex,
    pub b: GridVertex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DotLine {
    pub id: usize,
    pub s: u32,
    pub d: f64,
    pub f: f64,
    pub selected: bool,
    pub k_lo: f64,
    pub k_hi: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub domain: Option<Domain>,
    pub trials: Vec<TrialEvent>,
    pub boxes: Vec<BoxLine>,
    pub dots: Vec<DotLine>,
}

impl Trace {
    pub fn dim(&self) -> Option<usize> {
        self.domain.as_ref().map(Domain::dim)
    }
}

fn join(v: &[f64]) -> String {
    let mut s = String::new();
    for (j, x) in v.iter().enumerate() {
        if j > 0 {
            s.push(',');
        }
        write!(s, "{x:?}").unwrap();
    }
    s
}

pub fn write_domain<W: Write>(w: &mut W, domain: &Domain) -> io::Result<()> {
    writeln!(
        w,
        "domain {} {} {} {}",
        domain.dim(),
        join(domain.lower()),
        join(domain.upper()),
        u8::from(domain.reflected())
    )
}

pub fn write_trials<W: Write>(w: &mut W, events: &[TrialEvent]) -> io::Result<()> {
    for e in events {
        writeln!(w, "trial {} {} {} {:?} {:?} {}", e.trial_index, e.iteration, e.phase, e.f, e.f_min, join(&e.x))?;
    }
    Ok(())
}

/// Every box of the partition, then every box as a diagram dot with its
/// hull membership over the whole partition.
pub fn write_partition<W: Write>(w: &mut W, partition: &Partition) -> io::Result<()> {
    for bx in partition.boxes() {
        writeln!(w, "box {} {} {} {}", bx.id, bx.s, bx.a, bx.b)?;
    }
    let reps = group_representatives(partition, partition.q_inf(), partition.q_0());
    let hull = nondominated(&reps);
    for bx in partition.boxes() {
        let pos = hull.selected.iter().position(|d| d.id == bx.id);
        let (lo, hi) = pos.map_or((f64::NAN, f64::NAN), |k| hull.slopes[k]);
        writeln!(
            w,
            "dot {} {} {:?} {:?} {} {:?} {:?}",
            bx.id,
            bx.s,
            bx.ch.d,
            bx.ch.f_lin,
            u8::from(pos.is_some()),
            lo,
            hi
        )?;
    }
    Ok(())
}

fn parse_floats(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.parse().ok()).collect()
}

fn parse_phase(s: &str) -> Option<Phase> {
    match s {
        "init" => Some(Phase::Init),
        "explore" => Some(Phase::Explore),
        "record" => Some(Phase::Record),
        _ => None,
    }
}

fn parse_line(trace: &mut Trace, line: &str) -> Result<(), String> {
    let f: Vec<&str> = line.split_whitespace().collect();
    let bad = || format!("malformed {} line", f[0]);
    let num = |k: usize| f.get(k).and_then(|t| t.parse::<f64>().ok()).ok_or_else(bad);
    let int = |k: usize| f.get(k).and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad);
    match f[0] {
        "domain" if f.len() == 5 => {
            let n = int(1)?;
            let lower = parse_floats(f[2]).ok_or_else(bad)?;
            let upper = parse_floats(f[3]).ok_or_else(bad)?;
            if lower.len() != n || upper.len() != n || lower.iter().zip(&upper).any(|(l, u)| l >= u) {
                return Err(bad());
            }
            trace.domain = Some(Domain::new(lower, upper, f[4] == "1"));
        }
        "trial" if f.len() == 7 => trace.trials.push(TrialEvent {
            trial_index: int(1)?,
            iteration: int(2)?,
            phase: parse_phase(f[3]).ok_or_else(bad)?,
            f: num(4)?,
            f_min: num(5)?,
            x: parse_floats(f[6]).ok_or_else(bad)?,
        }),
        "box" if f.len() == 5 => trace.boxes.push(BoxLine {
            id: int(1)?,
            s: int(2)? as u32,
            a: f[3].parse().map_err(|e| format!("{e}"))?,
            b: f[4].parse().map_err(|e| format!("{e}"))?,
        }),
        "dot" if f.len() == 8 => trace.dots.push(DotLine {
            id: int(1)?,
            s: int(2)? as u32,
            d: num(3)?,
            f: num(4)?,
            selected: f[5] == "1",
            k_lo: num(6)?,
            k_hi: num(7)?,
        }),
        other => return Err(format!("unknown or malformed record {other:?}")),
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Trace, TraceError> {
    let mut trace = Trace::default();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        parse_line(&mut trace, t).map_err(|msg| TraceError::Parse { line: k + 1, msg })?;
    }
    Ok(trace)
}
