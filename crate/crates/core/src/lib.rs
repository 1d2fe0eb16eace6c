//! Explicit commutator factorizations `A = [B, C]` for traceless complex
//! matrices, and two finite laboratories probing the same identities on
//! tensor-leg operators and cyclic crossed products.
//!
//! The three factorization regimes are disjoint hypotheses:
//!
//! * [`normal::factor_normal`] — traceless normal input; diagonalize, reorder
//!   the eigenvalues so all prefix sums are small ([`steinitz`]), then use the
//!   nilpotent shift and the prefix-sum diagonal.
//! * [`nilpotent::factor_nilpotent`] — nilpotent input; unitary strict
//!   triangularization followed by an exact recurrence.
//! * [`shoda::factor_traceless`] — any traceless input; the classical
//!   zero-diagonal reduction. No norm control, but a universal oracle.
//!
//! [`tucci`] builds finite truncations of tensor-leg shift operators and
//! certifies their commutator identities and norm growth; [`ergodic`] does the
//! same for a cyclic crossed-product model. [`report`], [`io`] and [`suite`]
//! hold the verification, file-format and experiment-runner surfaces.

pub mod ergodic;
pub mod factorization;
pub mod io;
pub mod mat;
pub mod nilpotent;
pub mod normal;
pub mod report;
pub mod shoda;
pub mod steinitz;
pub mod suite;
pub mod tucci;

pub use factorization::{FactorError, Factorization, Method};
pub use mat::{CMatrix, MatError, Tolerances};
pub use num_complex::Complex64 as C64;
