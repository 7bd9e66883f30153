//! Numeric kernel shared by every engine.

mod catalecticant;
mod form;
mod point;
mod roots;

pub(crate) use catalecticant::catalecticant_any;
pub use catalecticant::{
    catalecticant, catalecticant_shape, least_squares, numeric_rank, real_kernel, CatalecticantMatrix,
};
pub use form::{
    binomial, factorial, monomial_value, multinomial, power_of_linear_form, HomogeneousForm, MonomialBasis,
};
pub use point::{conjugate_point, ComplexScalar, ProjectivePoint, DEFAULT_TAU_REAL};
pub use roots::{
    binary_roots, eval_binary, pair_conjugate_roots, root_backward_error, univariate_roots, BinaryRoots, RootPartition,
};
