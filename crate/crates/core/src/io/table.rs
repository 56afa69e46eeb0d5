//! Branch points as CSV, one row per (branch, k).

use std::io::Write;

use crate::branches::Branch;
use crate::error::Result;

pub const CSV_HEADER: [&str; 6] = ["k", "branch_label", "branch_index", "re_omega", "im_omega", "residual"];

/// Writes every point of `branches`, sorted by label text, index and k.
/// Floats use the shortest representation that reads back exactly.
pub fn write_csv<W: Write>(branches: &[Branch], out: W) -> Result<()> {
    let mut rows: Vec<(&str, usize, f64, &crate::branches::BranchPoint)> = branches
        .iter()
        .flat_map(|b| b.points.iter().map(move |pt| (b.label.as_str(), b.index, pt.k, pt)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));

    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (label, index, k, pt) in rows {
        w.write_record([
            format!("{k:e}"),
            label.to_string(),
            index.to_string(),
            format!("{:e}", pt.omega.re),
            format!("{:e}", pt.omega.im),
            format!("{:e}", pt.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}
