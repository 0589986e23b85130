use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::field::Field;

/// One logged sample of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordRow {
    pub t: f64,
    /// Step that produced this state (0 for the initial row).
    pub dt: f64,
    /// `H^ℓ` norms for `ℓ = 0..=k`.
    pub norms: Vec<f64>,
    pub p_l2: f64,
    /// ‖ℙu‖ in `H^{k−1}`.
    pub p_hk1: f64,
    /// ‖ℙ⊥u‖ in `H^{k−1}`.
    pub pperp_hk1: f64,
    /// ‖ℙu‖² in `H^k`.
    pub p_hk_sq: f64,
    pub pu_integral: f64,
    pub ftilde_sup: f64,
    /// ‖u‖²_{H^k} + pu_integral + ftilde_sup.
    pub energy_q: f64,
    /// Relative residual of the energy identity over the last step, NaN when
    /// not evaluated.
    pub identity_residual: f64,
}

impl RecordRow {
    pub fn hk(&self) -> f64 {
        *self.norms.last().expect("at least the L2 norm")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RunStatus {
    Completed,
    Aborted { reason: String },
}

/// Time series of a run plus optional field snapshots at the logged times.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub k_reg: usize,
    pub rows: Vec<RecordRow>,
    pub snapshots: Vec<Field>,
    pub status: RunStatus,
    pub steps: usize,
    pub min_dt_over_t: f64,
    pub max_dt_over_t: f64,
    /// Last healthy state.
    pub final_field: Field,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t,dt,L2");
        for l in 1..=self.k_reg {
            let _ = write!(h, ",H{l}");
        }
        h.push_str(",P_L2,P_Hk1,Pperp_Hk1,energy_Q,identity_residual");
        h
    }

    /// CSV text with the fixed column layout. Numbers use the shortest
    /// round-trip representation, so output is byte-stable.
    pub fn to_csv(&self) -> String {
        let mut s = self.csv_header();
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:e},{:e}", r.t, r.dt);
            for v in &r.norms {
                let _ = write!(s, ",{v:e}");
            }
            let _ = writeln!(
                s,
                ",{:e},{:e},{:e},{:e},{:e}",
                r.p_l2, r.p_hk1, r.pperp_hk1, r.energy_q, r.identity_residual
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}
