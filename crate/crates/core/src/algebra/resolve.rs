use super::{DiffMatrix, GenMatrix, IndexFunction, IntMatrix, Item, PermanentKernel};
use crate::error::{Error, Result};

/// Outcome of greedy column fixing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// Counts of the chosen base columns.
    pub eta: IndexFunction,
    /// For every column: the chosen item and its coefficient.
    pub choices: Vec<(Item, i64)>,
    /// `per(assemble(eta)) mod p` on the selected rows.
    pub residue: u64,
}

/// Replaces every combination column by one of its terms while keeping the
/// permanent nonzero modulo `p`.
///
/// Multilinearity gives `per(A) = sum_z c_z per(A with column c_z A_G(z))`,
/// so a nonzero left side guarantees a nonzero branch. Columns are fixed
/// left to right, terms tried in canonical order.
pub fn resolve_nonzero_selection(a: &DiffMatrix, gen: &GenMatrix, p: u64) -> Result<Resolution> {
    let rows: Vec<usize> = (0..a.edge_count()).collect();
    resolve_nonzero_selection_rows(&PermanentKernel::default(), a, gen, &rows, p)
}

/// As [`resolve_nonzero_selection`] on a subset of rows.
pub fn resolve_nonzero_selection_rows(
    kernel: &PermanentKernel,
    a: &DiffMatrix,
    gen: &GenMatrix,
    rows: &[usize],
    p: u64,
) -> Result<Resolution> {
    if gen.len() != rows.len() {
        return Err(Error::NotSquare {
            rows: rows.len(),
            cols: gen.len(),
        });
    }
    let mut current = gen.evaluate_rows(a, rows)?;
    if kernel.modular(&current, p)? == 0 {
        return Err(Error::VanishingPermanent(p));
    }
    let mut choices = Vec::with_capacity(gen.len());
    for (j, expr) in gen.columns().iter().enumerate() {
        if expr.terms().len() == 1 {
            let (&z, &c) = expr.terms().iter().next().expect("one term");
            choices.push((z, c));
            continue;
        }
        let mut picked = None;
        for (&z, &c) in expr.terms() {
            let mut trial = current.clone();
            set_column(&mut trial, j, a, z, c, rows);
            if kernel.modular(&trial, p)? != 0 {
                picked = Some((z, c, trial));
                break;
            }
        }
        let (z, c, trial) = picked.ok_or_else(|| {
            Error::internal(format!("no branch of column {j} keeps the permanent nonzero mod {p}"))
        })?;
        current = trial;
        choices.push((z, c));
    }
    let mut eta = IndexFunction::zeros(a.vertex_count(), a.edge_count());
    for &(z, _) in &choices {
        *eta.get_mut(z) += 1;
    }
    let residue = kernel.modular(&a.assemble_rows(&eta, rows)?, p)?;
    if residue == 0 {
        return Err(Error::internal("resolved index function has vanishing permanent"));
    }
    if eta.max_edge() as u64 >= p {
        return Err(Error::internal("an edge column was chosen at least p times"));
    }
    Ok(Resolution {
        eta,
        choices,
        residue,
    })
}

fn set_column(m: &mut IntMatrix, j: usize, a: &DiffMatrix, z: Item, c: i64, rows: &[usize]) {
    for (i, &r) in rows.iter().enumerate() {
        m.set(i, j, c * a.entry(r, z));
    }
}
