use crate::fixed::{Fix, FRAC_BITS};

use super::{NeuronParams, NeuronState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LifOutcome {
    pub fired: bool,
    /// The new potential fell outside Q16.16 and was clamped.
    pub saturated: bool,
}

/// One forward-Euler update (dt = 1) of the leaky integrate-and-fire neuron:
///
/// `v' = v + (-(v - v_rst) + acc / g_l) / tau_m`
///
/// The neuron fires when `v' >= v_th` and is then reset to `v_rst`. The
/// accumulator is cleared. Intermediates are computed at 128 bits and
/// divisions truncate toward zero.
pub fn lif_step(state: &mut NeuronState, params: &NeuronParams) -> LifOutcome {
    let v = i128::from(state.v.raw());
    let v_rst = i128::from(params.v_rst.raw());
    let drive = (i128::from(state.acc) << FRAC_BITS) / i128::from(params.g_l.raw());
    let delta = ((-(v - v_rst) + drive) << FRAC_BITS) / i128::from(params.tau_m.raw());
    let (next, saturated) = Fix::saturating_from_wide(v + delta);
    state.acc = 0;
    if next >= params.v_th {
        state.v = params.v_rst;
        LifOutcome { fired: true, saturated }
    } else {
        state.v = next;
        LifOutcome { fired: false, saturated }
    }
}
