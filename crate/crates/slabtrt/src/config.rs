//! Run configuration: a flat key-value text format plus command-line
//! overrides. Unknown keys are rejected.
//!
//! ```text
//! # comment
//! problem     = larsen        # larsen | gray_slab | equilibrium
//! resolution  = reduced       # reduced (64/S4/16) | full (256/S8/50)
//! scheme      = IMEX-NPRK2[42]b
//! formulation = imex          # imex | semi
//! mode        = adaptive      # adaptive | fixed
//! tol         = 1e-2          # sets atol and rtol together
//! mask        = Er            # T | Er | both
//! t_final     = 1e-7
//! dt0         = 1e-13
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::problems::{make_equilibrium, make_gray_slab, make_larsen, ProblemSpec};
use crate::system::{Formulation, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMask {
    Temperature,
    RadEnergy,
    Both,
}

impl ErrorMask {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t" | "temperature" => Ok(ErrorMask::Temperature),
            "er" | "e_r" | "rad_energy" => Ok(ErrorMask::RadEnergy),
            "both" | "t+er" => Ok(ErrorMask::Both),
            other => Err(format!("unknown mask '{other}' (expected T, Er, or both)")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorMask::Temperature => "T",
            ErrorMask::RadEnergy => "Er",
            ErrorMask::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub cells: usize,
    pub sn: usize,
    pub groups: usize,
    pub scheme: String,
    pub formulation: Formulation,
    pub mode: RunMode,
    pub atol: f64,
    pub rtol: f64,
    pub mask: ErrorMask,
    pub t_final: f64,
    pub dt0: f64,
    pub dt: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_rejects: u32,
    pub lo_tol: f64,
    pub holo_tol: f64,
    pub max_outer: u32,
    pub output_times: Vec<f64>,
    pub outdir: String,
    pub rng_seed: u64,
    pub threads: usize,
    pub t0: f64,
    // Convergence-study settings.
    pub dt_start: f64,
    pub levels: usize,
    pub ref_scheme: String,
    pub ref_dt: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "larsen".into(),
            cells: 64,
            sn: 4,
            groups: 16,
            scheme: "IMEX-NPRK2[42]b".into(),
            formulation: Formulation::Imex,
            mode: RunMode::Adaptive,
            atol: 1e-2,
            rtol: 1e-2,
            mask: ErrorMask::RadEnergy,
            t_final: 1e-7,
            dt0: 1e-13,
            dt: 1e-12,
            dt_min: 1e-16,
            dt_max: f64::INFINITY,
            max_rejects: 30,
            lo_tol: 1e-10,
            holo_tol: 1e-8,
            max_outer: 25,
            output_times: Vec::new(),
            outdir: "out".into(),
            rng_seed: 0,
            threads: 1,
            t0: 1.0,
            dt_start: 3.2e-11,
            levels: 6,
            ref_scheme: "SSP-LDIRK3(3,3,2)".into(),
            ref_dt: 0.0, // 0 = smallest dt / 10
        }
    }
}

impl RunConfig {
    /// Parses `key = value` lines ('#' starts a comment), then applies
    /// `overrides` in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            cfg.set(k.trim(), v.trim())?;
            seen.insert(k.trim().to_string(), v.trim().to_string());
        }
        for ov in overrides {
            let (k, v) = ov
                .split_once('=')
                .ok_or_else(|| format!("override '{ov}': expected key=value"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let fp = |v: &str| -> Result<f64, String> {
            v.parse::<f64>().map_err(|_| format!("bad number '{v}' for key '{key}'"))
        };
        let ip = |v: &str| -> Result<usize, String> {
            v.parse::<usize>().map_err(|_| format!("bad integer '{v}' for key '{key}'"))
        };
        match key {
            "problem" => {
                match value {
                    "larsen" | "gray_slab" | "equilibrium" => self.problem = value.into(),
                    other => return Err(format!("unknown problem '{other}'")),
                }
            }
            "resolution" => match value {
                "reduced" => {
                    self.cells = 64;
                    self.sn = 4;
                    self.groups = 16;
                }
                "full" => {
                    self.cells = 256;
                    self.sn = 8;
                    self.groups = 50;
                }
                other => return Err(format!("unknown resolution '{other}'")),
            },
            "cells" => self.cells = ip(value)?,
            "sn" => self.sn = ip(value)?,
            "groups" => self.groups = ip(value)?,
            "scheme" => {
                imexrk::Scheme::from_name(value).map_err(|e| e.to_string())?;
                self.scheme = value.into();
            }
            "formulation" => {
                self.formulation = match value {
                    "semi" => Formulation::Semi,
                    "imex" => Formulation::Imex,
                    other => return Err(format!("unknown formulation '{other}'")),
                }
            }
            "mode" => {
                self.mode = match value {
                    "adaptive" => RunMode::Adaptive,
                    "fixed" => RunMode::Fixed,
                    other => return Err(format!("unknown mode '{other}'")),
                }
            }
            "atol" => self.atol = fp(value)?,
            "rtol" => self.rtol = fp(value)?,
            "tol" => {
                self.atol = fp(value)?;
                self.rtol = self.atol;
            }
            "mask" => self.mask = ErrorMask::parse(value)?,
            "t_final" => self.t_final = fp(value)?,
            "dt0" => self.dt0 = fp(value)?,
            "dt" => self.dt = fp(value)?,
            "dt_min" => self.dt_min = fp(value)?,
            "dt_max" => self.dt_max = fp(value)?,
            "max_rejects" => self.max_rejects = ip(value)? as u32,
            "lo_tol" => self.lo_tol = fp(value)?,
            "holo_tol" => self.holo_tol = fp(value)?,
            "max_outer" => self.max_outer = ip(value)? as u32,
            "output_times" => {
                self.output_times = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| fp(s.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "outdir" => self.outdir = value.into(),
            "rng_seed" => self.rng_seed = value.parse().map_err(|_| format!("bad seed '{value}'"))?,
            "threads" => self.threads = ip(value)?,
            "t0" => self.t0 = fp(value)?,
            "dt_start" => self.dt_start = fp(value)?,
            "levels" => self.levels = ip(value)?,
            "ref_scheme" => {
                imexrk::Scheme::from_name(value).map_err(|e| e.to_string())?;
                self.ref_scheme = value.into();
            }
            "ref_dt" => self.ref_dt = fp(value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, String> {
        let mut spec = match self.problem.as_str() {
            "larsen" => make_larsen(self.cells, self.sn, self.groups),
            "gray_slab" => make_gray_slab(self.cells, self.sn),
            "equilibrium" => {
                let mut s = make_equilibrium(self.t0);
                s.cells = self.cells.min(64);
                s
            }
            other => return Err(format!("unknown problem '{other}'")),
        };
        if self.problem != "equilibrium" {
            spec.cells = self.cells;
            spec.sn = self.sn;
        }
        Ok(spec)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        opts.lo.tol = self.lo_tol;
        opts.holo_tol = self.holo_tol;
        opts.max_outer = self.max_outer;
        opts.threads = self.threads.max(1);
        opts
    }

    /// Canonical text used for the output-file hash: every field in a
    /// fixed order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "problem={};cells={};sn={};groups={};scheme={};formulation={};mode={:?};atol={:e};rtol={:e};mask={};t_final={:e};dt0={:e};dt={:e};dt_min={:e};dt_max={:e};max_rejects={};lo_tol={:e};holo_tol={:e};max_outer={};output_times={:?};rng_seed={};threads={};t0={:e};dt_start={:e};levels={};ref_scheme={};ref_dt={:e}",
            self.problem, self.cells, self.sn, self.groups, self.scheme,
            self.formulation.name(), self.mode, self.atol, self.rtol,
            self.mask.name(), self.t_final, self.dt0, self.dt, self.dt_min,
            self.dt_max, self.max_rejects, self.lo_tol, self.holo_tol,
            self.max_outer, self.output_times, self.rng_seed, self.threads,
            self.t0, self.dt_start, self.levels, self.ref_scheme, self.ref_dt
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let text = "problem = gray_slab\ntol = 1e-3 # both tolerances\nmask = T\n";
        let cfg = RunConfig::parse(text, &["cells=32".into()]).unwrap();
        assert_eq!(cfg.problem, "gray_slab");
        assert_eq!(cfg.atol, 1e-3);
        assert_eq!(cfg.rtol, 1e-3);
        assert_eq!(cfg.mask, ErrorMask::Temperature);
        assert_eq!(cfg.cells, 32);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("qwerty = 1\n", &[]).is_err());
        assert!(RunConfig::parse("problem = larsen\n", &["nope=2".into()]).is_err());
        assert!(RunConfig::parse("scheme = RK4\n", &[]).is_err());
    }

    #[test]
    fn resolution_presets() {
        let cfg = RunConfig::parse("resolution = full\n", &[]).unwrap();
        assert_eq!((cfg.cells, cfg.sn, cfg.groups), (256, 8, 50));
        let cfg = RunConfig::parse("resolution = reduced\n", &[]).unwrap();
        assert_eq!((cfg.cells, cfg.sn, cfg.groups), (64, 4, 16));
    }
}
