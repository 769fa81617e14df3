//! CSV files written by the commands.

use std::path::Path;

use anyhow::{Context, Result};
use pnp_ddg::driver::DiagnosticsRecord;
use pnp_ddg::Field;

/// Fifteen significant digits; NaN stays `NaN`.
pub fn num(v: f64) -> String {
    format!("{v:.14e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

pub fn diagnostics_header(species: usize) -> Vec<String> {
    let per = |p: &'static str| (1..=species).map(move |i| format!("{p}_{i}"));
    let mut h = vec!["t".to_string()];
    h.extend(per("mass"));
    h.push("energy".into());
    h.extend(per("min_avg"));
    h.extend(per("min_g"));
    h.push("theta_count".into());
    h.push("mu0".into());
    h
}

/// `min_g_i` is the smallest `g` on the test sets before limiting.
pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let species = records.first().map_or(0, |r| r.mass.len());
    let mut w = writer(path)?;
    w.write_record(diagnostics_header(species))?;
    for r in records {
        let mut row = vec![num(r.t)];
        row.extend(r.mass.iter().map(|&v| num(v)));
        row.push(num(r.energy));
        row.extend(r.min_avg.iter().map(|&v| num(v)));
        row.extend(r.min_g_pre.iter().map(|&v| num(v)));
        row.push(r.limited.to_string());
        row.push(num(r.mu0));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Cell index followed by the modal coefficients of that cell.
pub fn write_snapshot(path: &Path, field: &Field) -> Result<()> {
    let mut w = writer(path)?;
    let mut h = vec!["cell".to_string()];
    h.extend((0..field.nb()).map(|r| format!("a{r}")));
    w.write_record(&h)?;
    for k in 0..field.num_cells() {
        let mut row = vec![k.to_string()];
        row.extend(field.cell(k).iter().map(|&v| num(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One convergence row: mesh label and the errors `[c1, c2, psi]`.
pub struct ErrorRow {
    pub size: f64,
    pub errors: Vec<f64>,
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// `names` label the error columns. With `by_cells` the first column holds
/// `N` and orders use `h ~ 1/N`.
pub fn write_errors(path: &Path, names: &[String], by_cells: bool, rows: &[ErrorRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut h = vec![if by_cells { "N" } else { "h" }.to_string()];
    for n in names {
        h.push(format!("err_{n}"));
        h.push(format!("order_{n}"));
    }
    w.write_record(&h)?;
    let mesh_h = |r: &ErrorRow| if by_cells { 1.0 / r.size } else { r.size };
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![if by_cells { format!("{}", r.size as usize) } else { num(r.size) }];
        for (v, &e) in r.errors.iter().enumerate() {
            row.push(num(e));
            row.push(if i == 0 {
                String::new()
            } else {
                num(observed_order(rows[i - 1].errors[v], e, mesh_h(&rows[i - 1]), mesh_h(r)))
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            diagnostics_header(2).join(","),
            "t,mass_1,mass_2,energy,min_avg_1,min_avg_2,min_g_1,min_g_2,theta_count,mu0"
        );
    }

    #[test]
    fn numbers_keep_digits() {
        assert_eq!(num(0.1), "1.00000000000000e-1");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(1.0 / 3.0).parse::<f64>().unwrap(), 0.333333333333333);
    }

    #[test]
    fn halving_gives_log2() {
        assert!((observed_order(8.0, 1.0, 0.2, 0.1) - 3.0).abs() < 1e-14);
        assert!((observed_order(8.0, 1.0, 1.0 / 10.0, 1.0 / 20.0) - 3.0).abs() < 1e-14);
    }
}
