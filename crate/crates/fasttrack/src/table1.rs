//! Sample sizes of the apply-or-waive strategy in the worked example
//! (`δ_rel = 1.4`, `ξ = 1.25`, `σ = 5.17`, `t_ξ(I₁) = 0.5`, `α_c = 0.15`).

use fasttrack_core::combination::{branch_metrics, build_combination, worked_example, CefFamily};
use fasttrack_core::design_space::{ExampleCost, Rounding};
use fasttrack_core::Tolerances;

use crate::error::Result;
use crate::output::fmt_num;

pub const EXAMPLE_SIGMA: f64 = 5.17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub family: CefFamily,
    pub i2_const: f64,
    pub i2_min: f64,
    pub i2_max: f64,
    pub e_i2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub n1: u64,
    pub rows: Vec<Table1Row>,
    pub rounding: Rounding,
    pub cost: ExampleCost,
}

pub fn table1(rounding: Rounding, tol: &Tolerances) -> Result<Table1> {
    let p = worked_example();
    let cost = ExampleCost { sigma: EXAMPLE_SIGMA };
    let mut rows = Vec::with_capacity(4);
    for family in CefFamily::ALL {
        let d = build_combination(&p, family, tol)?;
        let m = branch_metrics(&d, tol)?;
        rows.push(Table1Row {
            family,
            i2_const: d.i2_const,
            i2_min: d.i2_min,
            i2_max: m.max_i2_both,
            e_i2: m.e_i2_both,
        });
    }
    Ok(Table1 {
        n1: cost.group_size(p.i1, rounding),
        rows,
        rounding,
        cost,
    })
}

impl Table1Row {
    pub fn infos(&self) -> [f64; 4] {
        [self.i2_const, self.i2_min, self.i2_max, self.e_i2]
    }
}

impl Table1 {
    /// Per-group stage-two sizes in column order const, min, max, mean.
    pub fn sizes(&self, row: &Table1Row) -> [u64; 4] {
        row.infos().map(|i| self.cost.group_size(i, self.rounding))
    }

    pub fn header() -> Vec<String> {
        [
            "family",
            "n2_const",
            "n2_min",
            "n2_max",
            "e_n2",
            "total_const",
            "total_min",
            "total_max",
            "total_mean",
            "n2_const_exact",
            "n2_min_exact",
            "n2_max_exact",
            "e_n2_exact",
        ]
        .map(String::from)
        .to_vec()
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let n = self.sizes(r);
                let mut rec = vec![r.family.label().to_string()];
                rec.extend(n.iter().map(|v| v.to_string()));
                rec.extend(n.iter().map(|v| (v + self.n1).to_string()));
                rec.extend(r.infos().iter().map(|&i| fmt_num(self.cost.exact_group_size(i))));
                rec
            })
            .collect()
    }
}
