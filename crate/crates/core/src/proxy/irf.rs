use nalgebra::{DMatrix, DVector};

use super::ProxyIdentification;
use crate::var::{CompanionForm, VarModel};

/// Responses to the identified shock for horizons `0..=horizon`, one row per
/// horizon: `S_n C_y^h S_n' B_•1`.
pub fn irf(model: &VarModel, ident: &ProxyIdentification, horizon: usize) -> DMatrix<f64> {
    impulse_responses(&model.companion(), &ident.b_col, horizon)
}

/// Propagates `impact` through the companion recursion. Row 0 is a copy of
/// `impact`.
pub fn impulse_responses(companion: &CompanionForm, impact: &DVector<f64>, horizon: usize) -> DMatrix<f64> {
    let n = companion.n_vars();
    assert_eq!(impact.len(), n, "impact vector has wrong length");
    let np = companion.matrix.nrows();
    let mut out = DMatrix::zeros(horizon + 1, n);
    out.row_mut(0).copy_from(&impact.transpose());
    let mut state = DVector::zeros(np);
    state.rows_mut(0, n).copy_from(impact);
    for h in 1..=horizon {
        state = &companion.matrix * &state;
        out.row_mut(h).copy_from(&state.rows(0, n).transpose());
    }
    out
}
