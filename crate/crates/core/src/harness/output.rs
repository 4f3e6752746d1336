use std::fmt;
use std::io::Write;

use crate::dynamics::Trajectory;
use crate::error::Result;

/// One input column of a sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Int(i64),
    Float(f64),
    Text(&'static str),
}

impl Param {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Param::Int(i) => Some(i as f64),
            Param::Float(x) => Some(x),
            Param::Text(_) => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(i) => write!(f, "{i}"),
            Param::Float(x) => f.write_str(&num(*x)),
            Param::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub params: Vec<Param>,
    pub fidelity_final: f64,
    pub time_to_threshold: Option<f64>,
    pub concurrence_final: Option<f64>,
}

impl SweepRow {
    pub fn param(&self, table: &SweepTable, name: &str) -> Option<Param> {
        table.param_names.iter().position(|p| *p == name).map(|i| self.params[i])
    }
}

/// `index,param...,fidelity_final,time_to_threshold[,concurrence_final]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param_names: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(param_names: Vec<&'static str>, rows: Vec<SweepRow>) -> Self {
        SweepTable { param_names, rows }
    }

    pub fn has_concurrence(&self) -> bool {
        self.rows.iter().any(|r| r.concurrence_final.is_some())
    }

    /// Numeric value of `name` in every row.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.param_names.iter().position(|p| *p == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r.params[i].as_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn mean_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity_final).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_concurrence(&self) -> Option<f64> {
        let c: Vec<f64> = self.rows.iter().filter_map(|r| r.concurrence_final).collect();
        (!c.is_empty()).then(|| c.iter().sum::<f64>() / c.len() as f64)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let conc = self.has_concurrence();
        let mut header = vec!["index".to_string()];
        header.extend(self.param_names.iter().map(|s| s.to_string()));
        header.push("fidelity_final".into());
        header.push("time_to_threshold".into());
        if conc {
            header.push("concurrence_final".into());
        }
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.params.iter().map(|p| p.to_string()));
            rec.push(num(r.fidelity_final));
            rec.push(opt(r.time_to_threshold));
            if conc {
                rec.push(opt(r.concurrence_final));
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Shortest round-trip form, switching to exponent notation for very small or large values.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `time,V,fidelity_target,f1,f2,norm_drift[,concurrence][,a_edge1_sq]`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["time", "V", "fidelity_target", "f1", "f2", "norm_drift"];
    if traj.concurrence.is_some() {
        header.push("concurrence");
    }
    if traj.a_edge1_sq.is_some() {
        header.push("a_edge1_sq");
    }
    out.write_record(&header)?;
    for i in 0..traj.len() {
        let mut rec = vec![
            num(traj.times[i]),
            num(traj.lyapunov[i]),
            num(traj.fidelity_target[i]),
            num(traj.fields[0][i]),
            num(traj.fields[1][i]),
            num(traj.norm_drift[i]),
        ];
        if let Some(c) = &traj.concurrence {
            rec.push(num(c[i]));
        }
        if let Some(a) = &traj.a_edge1_sq {
            rec.push(num(a[i]));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
