//! Numerical tolerances. Every threshold used by the library lives here so that a
//! single scale factor or environment override reaches all of them.

use serde::{Deserialize, Serialize};

/// Prefix of the environment variables that override individual tolerances,
/// e.g. `BRAKE_INDEX_TOL_KERNEL=1e-9`.
pub const ENV_PREFIX: &str = "BRAKE_INDEX_TOL_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-entry defect allowed in `MᵀJM − J`.
    pub symplectic: f64,
    /// Relative singular-value threshold for kernel dimensions.
    pub kernel: f64,
    /// Width of the unit-circle band for eigenvalue membership.
    pub eig: f64,
    /// Distance below which eigenvalues are merged into one cluster.
    pub cluster: f64,
    /// Relative eigenvalue threshold for the zero part of an inertia.
    pub inertia: f64,
    /// Relative singular-value threshold for ranks.
    pub rank: f64,
    /// Angular shift used for endpoint conventions of the spectral flow.
    pub flow_shift: f64,
    /// Largest accepted change of the unwrapped phase between consecutive samples.
    pub max_phase_step: f64,
    /// Bisection width for crossing localization, relative to the time span.
    pub crossing: f64,
    /// Perturbation sizes for degenerate endpoints of the ω-index.
    pub omega_eps: [f64; 2],
    /// Offsets of ω used by the splitting-number limit; those beyond half the gap to
    /// the rest of the spectrum are skipped.
    pub split_eps: [f64; 5],
    /// ε values certifying `0 < ε ≪ 1` for the symmetrization signature.
    pub sig_eps: [f64; 2],
    /// Boundary-condition tolerance of the shooting solver.
    pub bc: f64,
    /// Energy drift tolerance along an orbit.
    pub energy: f64,
    /// Hausdorff distance under which two orbits are the same class.
    pub dedup: f64,
    /// Central-symmetry tolerance for orbit classification.
    pub sym: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symplectic: 1e-9,
            kernel: 1e-8,
            eig: 1e-8,
            cluster: 1e-5,
            inertia: 1e-8,
            rank: 1e-8,
            flow_shift: 1e-6,
            max_phase_step: std::f64::consts::FRAC_PI_4,
            crossing: 1e-10,
            omega_eps: [1e-4, 1e-5],
            split_eps: [1e-1, 3e-2, 1e-2, 1e-3, 1e-4],
            sig_eps: [1e-3, 1e-4],
            bc: 1e-10,
            energy: 1e-9,
            dedup: 1e-6,
            sym: 1e-6,
        }
    }
}

impl Tolerances {
    /// Multiplies every threshold by `s` (perturbation sizes and angular steps excepted).
    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        t.symplectic *= s;
        t.kernel *= s;
        t.eig *= s;
        t.cluster *= s;
        t.inertia *= s;
        t.rank *= s;
        t.crossing *= s;
        t.bc *= s;
        t.energy *= s;
        t.dedup *= s;
        t.sym *= s;
        t
    }

    /// Defaults with overrides read from `BRAKE_INDEX_TOL_*` variables.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        t.apply_env(|k| std::env::var(k).ok());
        t
    }

    /// Applies overrides from any key lookup; unknown or unparsable values are ignored.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        let get = |name: &str| -> Option<f64> {
            lookup(&format!("{ENV_PREFIX}{name}")).and_then(|v| v.trim().parse().ok())
        };
        macro_rules! set {
            ($field:ident, $name:literal) => {
                if let Some(v) = get($name) {
                    self.$field = v;
                }
            };
        }
        set!(symplectic, "SYMPLECTIC");
        set!(kernel, "KERNEL");
        set!(eig, "EIG");
        set!(cluster, "CLUSTER");
        set!(inertia, "INERTIA");
        set!(rank, "RANK");
        set!(flow_shift, "FLOW_SHIFT");
        set!(crossing, "CROSSING");
        set!(bc, "BC");
        set!(energy, "ENERGY");
        set!(dedup, "DEDUP");
        set!(sym, "SYM");
    }
}
