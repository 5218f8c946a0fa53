//! Stationary law of the collapsed process: root `α_λ`, normalizer, transform,
//! moments and atom, plus closed forms and tail diagnostics.

pub mod closed_form;
pub mod extensions;
pub mod solution;

pub use closed_form::{
    bm_closed_form_lst, bm_closed_form_lst_theta, level_crossing_p0, mm1_closed_form_lst,
    mm1_closed_form_lst_theta, BmRoots, Mm1Roots,
};
pub use extensions::{
    onoff_mixture_lst, small_alpha_expansion_check, tail_constant, w_tau_lst, wx_joint_lst,
    ExpansionCheck,
};
pub use solution::{
    atom_at_zero, find_alpha_lambda, fixed_point_residual, g_function, moments, normalizer_b,
    stationary_lst, Branch, StationarySolution, TransformGrid,
};
