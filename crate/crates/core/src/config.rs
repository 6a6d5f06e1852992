//! Central tolerance table.
//!
//! Every threshold used by the pipeline lives here so that a run (or a test)
//! can tighten or relax it by name. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed deviation of a distribution's total mass from one.
    pub prob_sum: f64,
    /// Clustering radius used to merge numerically repeated roots.
    pub root_merge: f64,
    /// Width of the band around the unit circle treated as "on the circle".
    pub on_circle: f64,
    /// Imaginary-part threshold for calling a branch point real.
    pub real_axis: f64,
    /// Conjugate-pair matching tolerance for cut pairing.
    pub conjugate_pair: f64,
    /// Relative fiber residual accepted for a computed root.
    pub fiber_residual: f64,
    /// Maximal gap between the tracked root and its partner at a cut endpoint.
    pub double_root: f64,
    /// Step-halving trigger: root jump relative to local root spacing.
    pub trace_jump: f64,
    /// Closure defect accepted for a traced curve.
    pub closure: f64,
    /// Boundary modulus defect accepted for a conformal map.
    pub conformal: f64,
    /// Agreement of successive refinements of the boundary value solve.
    pub bvp_refine: f64,
    /// Smallest boundary value grid.
    pub bvp_min_samples: f64,
    /// Largest boundary value grid.
    pub bvp_max_samples: f64,
    /// Relative functional-equation residual accepted on kernel points.
    pub fe_residual: f64,
    /// Tail mass accepted for a truncated-chain solve.
    pub tail_mass: f64,
    /// Negative slack tolerated on computed probabilities.
    pub negativity: f64,
    /// Root-gap threshold of the brute-force branch point sweep.
    pub sweep_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            prob_sum: 1e-12,
            root_merge: 1e-7,
            on_circle: 1e-9,
            real_axis: 1e-10,
            conjugate_pair: 1e-10,
            fiber_residual: 1e-9,
            double_root: 1e-5,
            trace_jump: 0.1,
            closure: 1e-8,
            conformal: 1e-8,
            bvp_refine: 1e-9,
            bvp_min_samples: 256.0,
            bvp_max_samples: 4096.0,
            fe_residual: 1e-7,
            tail_mass: 1e-8,
            negativity: 1e-8,
            sweep_gap: 1e-6,
        }
    }
}

impl Tolerances {
    pub const KEYS: &'static [&'static str] = &[
        "prob_sum",
        "root_merge",
        "on_circle",
        "real_axis",
        "conjugate_pair",
        "fiber_residual",
        "double_root",
        "trace_jump",
        "closure",
        "conformal",
        "bvp_refine",
        "bvp_min_samples",
        "bvp_max_samples",
        "fe_residual",
        "tail_mass",
        "negativity",
        "sweep_gap",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "prob_sum" => &mut self.prob_sum,
            "root_merge" => &mut self.root_merge,
            "on_circle" => &mut self.on_circle,
            "real_axis" => &mut self.real_axis,
            "conjugate_pair" => &mut self.conjugate_pair,
            "fiber_residual" => &mut self.fiber_residual,
            "double_root" => &mut self.double_root,
            "trace_jump" => &mut self.trace_jump,
            "closure" => &mut self.closure,
            "conformal" => &mut self.conformal,
            "bvp_refine" => &mut self.bvp_refine,
            "bvp_min_samples" => &mut self.bvp_min_samples,
            "bvp_max_samples" => &mut self.bvp_max_samples,
            "fe_residual" => &mut self.fe_residual,
            "tail_mass" => &mut self.tail_mass,
            "negativity" => &mut self.negativity,
            "sweep_gap" => &mut self.sweep_gap,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.clone().slot(key).map(|v| *v)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Domain(format!(
                "tolerance `{key}` must be a finite non-negative number, got {value}"
            )));
        }
        match self.slot(key) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::UnknownTolerance(key.to_string())),
        }
    }

    /// Parses `KEY=VAL` and applies it.
    pub fn apply_assignment(&mut self, spec: &str) -> Result<()> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("expected KEY=VAL, got `{spec}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("`{v}` is not a number")))?;
        self.set(k.trim(), value)
    }
}
