//! CPLEX LP-format text export for cross-checking with external solvers.

use std::io::{self, Write};

use crate::scalar::Scalar;

use super::instance::LpInstance;

fn term(out: &mut impl Write, first: bool, coef: f64, name: &str) -> io::Result<()> {
    let sign = if coef < 0.0 { " -" } else if first { "" } else { " +" };
    let mag = coef.abs();
    if mag == 1.0 {
        write!(out, "{sign} {name}")
    } else {
        write!(out, "{sign} {mag:?} {name}")
    }
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

/// Writes `instance` in LP format. Rows are named `<tag>_<index>`.
pub fn write_lp<T: Scalar>(instance: &LpInstance<T>, mut out: impl Write) -> io::Result<()> {
    let name = |c: usize| instance.vars.var(c).map(|v| v.to_string()).unwrap_or_else(|| format!("x{c}"));
    writeln!(out, "\\ monthly bill minimisation, {} columns, {} rows", instance.num_vars(), instance.num_rows())?;
    writeln!(out, "Minimize")?;
    write!(out, " obj:")?;
    let mut first = true;
    for (c, v) in instance.cost.iter().enumerate() {
        let v = v.to_f64_lossy();
        if v != 0.0 {
            term(&mut out, first, v, &name(c))?;
            first = false;
            if c % 8 == 7 {
                writeln!(out)?;
            }
        }
    }
    if first {
        write!(out, " 0 {}", name(0))?;
    }
    writeln!(out)?;

    writeln!(out, "Subject To")?;
    let mut counts = std::collections::BTreeMap::new();
    for row in &instance.rows {
        let k = counts.entry(row.tag).or_insert(0usize);
        let label = format!("{}_{}", row.tag, k);
        *k += 1;
        let (lo, hi) = (row.lower.to_f64_lossy(), row.upper.to_f64_lossy());
        let mut emit = |label: &str, sense: &str, rhs: f64| -> io::Result<()> {
            write!(out, " {label}:")?;
            for (i, (c, v)) in row.terms.iter().enumerate() {
                term(&mut out, i == 0, v.to_f64_lossy(), &name(*c))?;
            }
            writeln!(out, " {sense} {}", num(rhs))
        };
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => emit(&label, "=", lo)?,
            (true, true) => {
                emit(&format!("{label}_lo"), ">=", lo)?;
                emit(&format!("{label}_hi"), "<=", hi)?;
            }
            (true, false) => emit(&label, ">=", lo)?,
            (false, true) => emit(&label, "<=", hi)?,
            (false, false) => {}
        }
    }

    writeln!(out, "Bounds")?;
    for (c, b) in instance.bounds.iter().enumerate() {
        let (lo, hi) = (b.lower.to_f64_lossy(), b.upper.to_f64_lossy());
        let n = name(c);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => writeln!(out, " {n} free")?,
            (true, false) if lo == 0.0 => {}
            _ => writeln!(out, " {} <= {n} <= {}", num(lo), num(hi))?,
        }
    }
    writeln!(out, "End")
}

/// LP-format text as a string.
pub fn lp_string<T: Scalar>(instance: &LpInstance<T>) -> String {
    let mut buf = Vec::new();
    write_lp(instance, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
