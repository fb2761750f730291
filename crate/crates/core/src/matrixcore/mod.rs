//! Dense complex linear algebra over small dimensions.

mod compress;
mod eigen;
mod matrix;
mod partition;
pub mod random;
mod state;

pub use compress::{compress, compress_gram, Compression, GramCompression, RANK_TOL};
pub(crate) use eigen::schur_eig;
pub use eigen::{eig_hermitian, eig_unitary, lambda_max, HermitianEigen, UnitaryEigen};
pub use matrix::{gates, CMatrix, DENSE_CAP};
pub use partition::{total_dim, PartitionedOperator};
pub use random::{random_local_unitary, random_state, random_unitary};
pub use state::{StateVector, NORM_TOL};

pub use num_complex::Complex64 as C64;
