//! Exact combinatorics and closed-form limiting variances of traces of powers.

mod closed_form;
mod counting;
mod exact;

pub use closed_form::{
    g_const, g_const_exact, h_limit, h_limit_exact, irwin_hall_density,
    irwin_hall_density_exact, limit_var_circulant, limit_var_reverse_circulant,
    limit_var_symmetric_circulant, limit_var_symmetric_circulant_with, limit_variance_ratio,
    EvenBranchExponent, LimitValue, Parity,
};
pub use counting::{
    a_level_in_range, b_level_in_range, binomial, brute_card, card_a, card_b, card_b_k, card_b_k_level, factorial, scaled_count,
    BruteQuery, CardinalityFamily, CardinalityResult, BRUTE_FORCE_BUDGET,
};
pub use exact::{
    exact_moments, exact_variance, polynomial_moments, trace_polynomial, ExactMoments,
    TraceExpansion, TracePolynomial, EXACT_VARIANCE_BUDGET,
};
