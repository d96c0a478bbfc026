//! Kernel matrices over nets and minimum energy on the probability simplex.

mod bruteforce;
mod frank_wolfe;
mod kkt;
mod matrix;
mod weights;

pub use bruteforce::{min_energy_bruteforce, LatticeMinimum, BRUTEFORCE_BUDGET, BRUTEFORCE_MAX_N};
pub use frank_wolfe::{min_energy, EnergyOptions, EnergyResult};
pub use kkt::{kkt_certificate, KktReport, SUPPORT_THRESHOLD};
pub use matrix::{build_kernel, build_kernel_on, pivoted_cholesky_psd, KernelMatrix, PsdStatus, DENSE_CAP, PSD_CHECK_CAP};
pub use weights::{SimplexWeights, SIMPLEX_TOLERANCE};
