use ndarray::{Array2, Axis};

use crate::kinetic::{
    b_matrix, d_matrix, Distribution, Influence, KineticParams, PopulationState, SubsystemId,
};

/// Time derivative of one subsystem's mass table.
pub type Derivative = Array2<f64>;

/// Net flow `J_s` from binary interactions inside subsystem `s`.
///
/// The candidate keeps its first component, so the gain at `(i, r)` only
/// collects candidates from row `i`:
///
/// ```text
/// J_s(i, r) = η_s [ Σ_{p,k,q} D^{kq}_{ip}(s)(ν_p → ν_r) f_ip f_kq − f_ir Σ_{k,q} f_kq ]
/// ```
pub fn flux_internal(s: SubsystemId, params: &KineticParams, d: &Distribution) -> Derivative {
    let grid = d.grid();
    let f = d.values();
    let mass = f.sum();
    let eta = params.eta(s);

    let gain = match s {
        SubsystemId::Ruler | SubsystemId::Competing => {
            // the kernel ignores the field particle: Σ_{k,q} f_kq factors out
            let kernel = d_matrix(grid, s, params, d.moments());
            f.dot(&kernel) * mass
        }
        SubsystemId::Citizens => {
            // Candidates at wealth i imitate field particles with k > i.
            //   richer_row[i][r] = Σ_{k>i} f_kr, richer[i] = Σ_r richer_row[i][r]
            //   gain(i, r) = β m_i richer_row[i][r] + f_ir (M − β richer[i])
            let beta = params.beta;
            let (nu, nr) = grid.shape();
            let row_mass = f.sum_axis(Axis(1));
            let mut richer_row = Array2::<f64>::zeros((nu, nr));
            for i in (0..nu - 1).rev() {
                let above = &richer_row.row(i + 1) + &f.row(i + 1);
                richer_row.row_mut(i).assign(&above);
            }
            let richer = richer_row.sum_axis(Axis(1));
            Array2::from_shape_fn((nu, nr), |(i, r)| {
                beta * row_mass[i] * richer_row[[i, r]] + f[[i, r]] * (mass - beta * richer[i])
            })
        }
    };
    (gain - f * mass) * eta
}

/// Net flow `𝒥_s` from the first moments of the other subsystems.
///
/// The candidate keeps its second component:
///
/// ```text
/// 𝒥_s(i, r) = Σ_{j≠s} μ^j_s [ Σ_h B^j_h(s)(u_h → u_i) f_hr − f_ir ]
/// ```
pub fn flux_external(
    s: SubsystemId,
    params: &KineticParams,
    state: &PopulationState,
) -> Derivative {
    let grid = state.grid();
    let f = state.dist(s).values();
    let mut out = Array2::zeros(grid.shape());
    for j in SubsystemId::ALL {
        let rate = params.rate(s, j);
        if rate == 0.0 {
            continue;
        }
        let Some(inf) = Influence::of(s, j) else {
            continue;
        };
        let kernel = b_matrix(grid, inf, params, state.dist(j).moments());
        out = out + (kernel.t().dot(f) - f) * rate;
    }
    out
}

/// Right-hand side of the evolution equation for all three subsystems.
pub fn rhs(state: &PopulationState, params: &KineticParams) -> [Derivative; 3] {
    SubsystemId::ALL
        .map(|s| flux_internal(s, params, state.dist(s)) + flux_external(s, params, state))
}
