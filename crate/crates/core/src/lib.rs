//! a-Toeplitz quantization on the sphere.

pub mod a_toeplitz;
pub mod error;
pub mod frame;
pub mod io;
pub mod quadrature;
pub mod rate;
pub mod sphere;
pub mod symbol;
pub mod tqft;
pub mod trig_matrix;
pub mod window;

pub use error::{Error, Result};
pub use sphere::CMatrix;
pub use a_toeplitz::{a_toeplitz_quantize, roundtrip_report, ATopQuantizer, RoundtripReport};
pub use frame::{a_inner, building_vector, cn_coefficient, coherent_transform, frame_gram, FrameContext};
pub use sphere::{
    coherent_state, eval_basis, husimi, sphere_quadrature, toeplitz_quantize, Basis, Convention, QuantParams,
    SpherePoint, StateVector,
};
pub use symbol::{apply_symbol, c_factor_convolve, compose_symbols, naive_symbol, symbol_of_matrix, OperatorSymbol};
pub use tqft::{curve_operator, symbol_trace_error, trace_symbol, Curve, CurveSpec};
pub use trig_matrix::{act_on_frame, matrix_commutator, BandMatrix, OffsetRule};
pub use window::{default_window, make_gaussian_window, window_samples, Window};
