//! Default parameters, in one place.
//!
//! | name                     | value                 | used by                      |
//! |--------------------------|-----------------------|------------------------------|
//! | `FD_STEP_BASE`           | eps^(1/4) ≈ 1.22e-4   | Ricci form, Newton derivatives |
//! | `FD_MAX_STEP`            | 0.1                   | stencil width bound          |
//! | `RICCI_TAU`              | 1e-6                  | Ricci sign threshold (relative) |
//! | `MARGIN_NUM_REL`         | 1e-7                  | convexity numerical margin   |
//! | `MARGIN_STRICT_REL`      | 1e-4                  | strict convexity margin      |
//! | `ILL_CONDITIONED`        | 1e10                  | Hess F condition flag        |
//! | `LINES`                  | 100                   | convexity sampler            |
//! | `LINE_SAMPLES`           | 21                    | points per line              |
//! | `SEED`                   | 20240601              | all seeded sampling          |
//! | `NEWTON_TOL`             | 1e-10                 | gradient norm stop           |
//! | `NEWTON_MAX_ITER`        | 100                   |                              |
//! | `NEWTON_MAX_STEP`        | 1.0                   | step length cap              |
//! | `DIVERGENCE_RADIUS`      | 50                    | iterate escape flag          |
//! | `ARMIJO_C1`              | 1e-4                  | sufficient decrease          |
//! | `BACKTRACK`              | 0.5                   | step reduction factor        |
//! | `N_STARTS`               | 8                     | multistart                   |
//! | `DECAY_FLOOR_REL`        | 1e-3                  | boundary decay floor         |
//! | `DECAY_RADII`            | 2, 4, ..., 16         |                              |
//! | `SPHERE_SAMPLES`         | 64                    | points per sphere            |
//! | `FS_LAMBDA`              | 1.0                   | CP^3 Fubini–Study scale      |
//! | `HAAR_RESOLUTION`        | (24, 24, 48)          | (n_theta, n_phi, n_psi)      |
//! | `SU2_T_RANGE`            | [-1.5, 1.5], 25 pts   | geodesic profiles            |
//! | `LAGRANGIAN_DEFECT`      | 1e-9                  | Lagrangian orbit detection   |

pub const FD_STEP_BASE: f64 = 1.220_703_125e-4; // f64::EPSILON.powf(0.25)
pub const FD_MAX_STEP: f64 = 0.1;
pub const RICCI_TAU: f64 = 1e-6;
pub const MARGIN_NUM_REL: f64 = 1e-7;
pub const MARGIN_STRICT_REL: f64 = 1e-4;
pub const ILL_CONDITIONED: f64 = 1e10;
pub const LINES: usize = 100;
pub const LINE_SAMPLES: usize = 21;
pub const SEED: u64 = 20_240_601;
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
pub const NEWTON_MAX_STEP: f64 = 1.0;
pub const DIVERGENCE_RADIUS: f64 = 50.0;
pub const ARMIJO_C1: f64 = 1e-4;
pub const BACKTRACK: f64 = 0.5;
pub const MAX_BACKTRACKS: usize = 60;
pub const N_STARTS: usize = 8;
pub const DECAY_FLOOR_REL: f64 = 1e-3;
pub const DECAY_RADII: [f64; 8] = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0];
pub const SPHERE_SAMPLES: usize = 64;
pub const FS_LAMBDA: f64 = 1.0;
pub const HAAR_RESOLUTION: (usize, usize, usize) = (24, 24, 48);
pub const SU2_T_MIN: f64 = -1.5;
pub const SU2_T_MAX: f64 = 1.5;
pub const SU2_T_POINTS: usize = 25;
pub const LAGRANGIAN_DEFECT: f64 = 1e-9;
