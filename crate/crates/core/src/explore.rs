//! Design exploration over engine setpoints: efficiency maps, optimal power
//! splits, per-measure extremes, sizing sweeps and demand traces.
//!
//! Grid points are evaluated independently (in parallel) and written back by
//! index, so results do not depend on scheduling.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration;
use crate::error::{Error, Result, Stage};
use crate::recovery::Measure;
use crate::system::{operating_state, OperatingState, SystemConfig, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreOptions {
    /// Grid spacing of 2-D maps, kW.
    pub step_kw: f64,
    /// Spacing of 1-D line scans for single-engine systems, kW.
    pub line_step_kw: f64,
    /// Engine rescale factors outside this range tag sweep rows with a warning.
    pub rescale_validity: [f64; 2],
    /// Engine plus stack rated power held fixed across a sizing sweep, kW.
    pub sweep_total_kw: f64,
    pub sweep_r_values: Vec<f64>,
    /// How curves pick the split for each target output.
    pub split_rule: SplitRule,
}

/// Selection rule of an optimal curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Best grid point within half a cell of the target ([`optimal_split`]).
    Band,
    /// Least fuel delivering at least the target ([`contour_split`]).
    #[default]
    LeastFuel,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            step_kw: 2.0,
            line_step_kw: 0.25,
            rescale_validity: [0.25, 2.0],
            sweep_total_kw: calibration::COMPOSITE_TOTAL_RATED_KW,
            sweep_r_values: calibration::SWEEP_R_VALUES.to_vec(),
            split_rule: SplitRule::default(),
        }
    }
}

impl ExploreOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_kw > 0.0 && self.line_step_kw > 0.0) {
            return Err(Error::Config("explore steps must be positive".into()));
        }
        let [lo, hi] = self.rescale_validity;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Config("rescale_validity must be an increasing positive pair".into()));
        }
        if !(self.sweep_total_kw > 0.0) {
            return Err(Error::Config("sweep_total_kw must be positive".into()));
        }
        if let Some(r) = self.sweep_r_values.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::Config(format!("sweep_r_values must lie in (0, 1), got {r}")));
        }
        Ok(())
    }
}

/// Setpoint axes, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub w_gen_kw: Vec<f64>,
    pub w_fc_kw: Vec<f64>,
    /// Nominal spacing; sets the iso-power tolerance of optimal curves.
    pub step_kw: f64,
}

/// `0` followed by `lo, lo + step, …` and finally `hi`.
fn envelope_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut k = 0u32;
    loop {
        let p = lo + f64::from(k) * step;
        if p >= hi - 1e-9 * step {
            break;
        }
        v.push(p);
        k += 1;
    }
    v.push(hi);
    v
}

impl Grid {
    /// Full dispatch envelope of every engine in `cfg`, including the
    /// engine-off setting on each axis.
    pub fn envelope(cfg: &SystemConfig, step_kw: f64) -> Result<Grid> {
        if !(step_kw > 0.0) {
            return Err(Error::arg(format!("grid step must be positive, got {step_kw}")));
        }
        let w_gen_kw = match (&cfg.engine, cfg.topology.has_engine()) {
            (Some(e), true) => envelope_axis(e.min_power_kw(), e.rated_power_kw(), step_kw),
            _ => vec![0.0],
        };
        let w_fc_kw = match (&cfg.stack, cfg.topology.has_stack()) {
            (Some(s), true) => {
                let (lo, hi) = s.envelope()?;
                envelope_axis(lo, hi, step_kw)
            }
            _ => vec![0.0],
        };
        Ok(Grid {
            w_gen_kw,
            w_fc_kw,
            step_kw,
        })
    }

    pub fn len(&self) -> usize {
        self.w_gen_kw.len() * self.w_fc_kw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Outcome of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    Ok,
    /// Cracker capacity or conversion limit.
    Adu,
    Engine,
    FuelCell,
    Calibration,
    Numerical,
    Invalid,
}

impl Mask {
    pub fn from_error(e: &Error) -> Mask {
        match e {
            Error::Infeasible { stage: Stage::Adu, .. } => Mask::Adu,
            Error::Infeasible { stage: Stage::IceGen, .. } => Mask::Engine,
            Error::Infeasible { stage: Stage::FuelCell, .. } => Mask::FuelCell,
            Error::Infeasible { .. } => Mask::Invalid,
            Error::Calibration(_) | Error::TemperatureRange { .. } => Mask::Calibration,
            Error::Numerical(_) => Mask::Numerical,
            _ => Mask::Invalid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mask::Ok => "ok",
            Mask::Adu => "adu",
            Mask::Engine => "engine",
            Mask::FuelCell => "fuel_cell",
            Mask::Calibration => "calibration",
            Mask::Numerical => "numerical",
            Mask::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyMap {
    pub measure: Measure,
    pub grid: Grid,
    /// Row-major over (w_gen, w_fc); `None` where masked.
    pub eta_sys: Vec<Option<f64>>,
    pub w_sys_kw: Vec<Option<f64>>,
    /// Fuel heating-value input, kW; identical under every measure.
    pub fuel_kw: Vec<Option<f64>>,
    pub mask: Vec<Mask>,
}

impl EfficiencyMap {
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.w_fc_kw.len() + j
    }

    pub fn get(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let k = self.index(i, j);
        self.w_sys_kw[k].zip(self.eta_sys[k])
    }

    /// Feasible points as `(w_gen, w_fc, w_sys, eta)`.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let nf = self.grid.w_fc_kw.len();
        (0..self.mask.len()).filter_map(move |k| {
            let (w, e) = self.w_sys_kw[k].zip(self.eta_sys[k])?;
            Some((self.grid.w_gen_kw[k / nf], self.grid.w_fc_kw[k % nf], w, e))
        })
    }

    /// Columns `w_gen_kw,w_fc_kw,w_sys_kw,eta_sys,mask`; masked cells leave
    /// the value columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# units: kW, kW, kW, fraction, reason code\nw_gen_kw,w_fc_kw,w_sys_kw,eta_sys,mask\n");
        let nf = self.grid.w_fc_kw.len();
        for k in 0..self.mask.len() {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.grid.w_gen_kw[k / nf],
                self.grid.w_fc_kw[k % nf],
                fmt(self.w_sys_kw[k]),
                fmt(self.eta_sys[k]),
                self.mask[k].as_str()
            );
        }
        out
    }
}

/// Per-point states in row-major order.
fn grid_states(cfg: &SystemConfig, grid: &Grid) -> Result<Vec<std::result::Result<OperatingState, Mask>>> {
    if grid.is_empty() {
        return Err(Error::arg("grid has no points"));
    }
    cfg.validate()?;
    let nf = grid.w_fc_kw.len();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| operating_state(cfg, grid.w_gen_kw[k / nf], grid.w_fc_kw[k % nf]).map_err(|e| Mask::from_error(&e)))
        .collect())
}

fn map_from_states(states: &[std::result::Result<OperatingState, Mask>], grid: &Grid, m: Measure) -> EfficiencyMap {
    let mut eta = Vec::with_capacity(states.len());
    let mut w = Vec::with_capacity(states.len());
    let mut fuel = Vec::with_capacity(states.len());
    let mut mask = Vec::with_capacity(states.len());
    for s in states {
        match s.as_ref().map(|st| st.result(m)) {
            Ok(Ok(r)) => {
                eta.push(Some(r.eta_sys));
                w.push(Some(r.w_sys_kw));
                fuel.push(Some(r.ledger.fuel_lhv_kw));
                mask.push(Mask::Ok);
            }
            Ok(Err(e)) => {
                eta.push(None);
                w.push(None);
                fuel.push(None);
                mask.push(Mask::from_error(&e));
            }
            Err(code) => {
                eta.push(None);
                w.push(None);
                fuel.push(None);
                mask.push(*code);
            }
        }
    }
    EfficiencyMap {
        measure: m,
        grid: grid.clone(),
        eta_sys: eta,
        w_sys_kw: w,
        fuel_kw: fuel,
        mask,
    }
}

/// Efficiency map under the configuration's own measure.
pub fn build_map(cfg: &SystemConfig, grid: &Grid) -> Result<EfficiencyMap> {
    let states = grid_states(cfg, grid)?;
    Ok(map_from_states(&states, grid, cfg.measure))
}

/// Maps for all four measures from one set of grid evaluations.
pub fn build_measure_maps(cfg: &SystemConfig, grid: &Grid) -> Result<Vec<EfficiencyMap>> {
    let states = grid_states(cfg, grid)?;
    Ok(Measure::ALL.iter().map(|&m| map_from_states(&states, grid, m)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalEntry {
    pub target_kw: f64,
    pub w_gen_kw: f64,
    pub w_fc_kw: f64,
    pub w_sys_kw: f64,
    pub eta_sys: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalCurve {
    pub measure: Measure,
    pub entries: Vec<OptimalEntry>,
}

impl OptimalCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# units: kW, kW, kW, kW, fraction\ntarget_kw,w_gen_kw,w_fc_kw,w_sys_kw,eta_sys\n",
        );
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{}", e.target_kw, e.w_gen_kw, e.w_fc_kw, e.w_sys_kw, e.eta_sys);
        }
        out
    }
}

fn map_max_power(map: &EfficiencyMap) -> Option<f64> {
    map.points().map(|p| p.2).fold(None, |acc, w| Some(acc.map_or(w, |a: f64| a.max(w))))
}

/// Best split for each target output among grid points within half a cell
/// of the target; equal efficiencies go to the larger stack share.
pub fn optimal_split(map: &EfficiencyMap, targets: &[f64]) -> Result<OptimalCurve> {
    let tol = 0.5 * map.grid.step_kw;
    let max_w = map_max_power(map).unwrap_or(0.0);
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut entries = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        let best = map
            .points()
            .filter(|p| (p.2 - t).abs() <= tol)
            .fold(None::<(f64, f64, f64, f64)>, |best, p| match best {
                Some(b) if b.3 > p.3 || (b.3 == p.3 && b.1 >= p.1) => Some(b),
                _ => Some(p),
            });
        match best {
            Some((g, f, w, e)) => entries.push(OptimalEntry {
                target_kw: t,
                w_gen_kw: g,
                w_fc_kw: f,
                w_sys_kw: w,
                eta_sys: e,
            }),
            None => {
                return Err(Error::infeasible(
                    Stage::Explore,
                    format!("no grid point delivers {t} kW within ±{tol} kW; map maximum is {max_w:.3} kW"),
                ))
            }
        }
    }
    Ok(OptimalCurve {
        measure: map.measure,
        entries,
    })
}

/// Least-fuel way to deliver each target. Along every grid line, fuel input
/// is interpolated linearly between adjacent operating points and the
/// target is met where the interpolated output crosses it. Segments leaving
/// the engine-off setting are skipped, since nothing operates between off
/// and the dispatch floor. Grid points whose output already exceeds the
/// target also qualify, with the surplus curtailed; the entry's `w_sys_kw`
/// is then the operated output. Reported efficiency is `target / fuel`.
///
/// Fuel input is measure-independent and measures only add output, so every
/// way of meeting a target under a weaker measure also meets it under a
/// stronger one on the same fuel: curves built this way keep measure
/// dominance target by target.
pub fn contour_split(map: &EfficiencyMap, targets: &[f64]) -> Result<OptimalCurve> {
    let (ng, nf) = (map.grid.w_gen_kw.len(), map.grid.w_fc_kw.len());
    let node = |i: usize, j: usize| {
        let k = map.index(i, j);
        map.w_sys_kw[k].zip(map.fuel_kw[k]).map(|(w, f)| (map.grid.w_gen_kw[i], map.grid.w_fc_kw[j], w, f))
    };
    let mut segments = Vec::new();
    for i in 0..ng {
        for j in 0..nf {
            let Some(a) = node(i, j) else { continue };
            if i + 1 < ng && a.0 > 0.0 {
                segments.extend(node(i + 1, j).map(|b| (a, b)));
            }
            if j + 1 < nf && a.1 > 0.0 {
                segments.extend(node(i, j + 1).map(|b| (a, b)));
            }
        }
    }
    let max_w = map_max_power(map).unwrap_or(0.0);
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut entries = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        let crossings = segments.iter().filter(|(a, b)| (a.2 - t) * (b.2 - t) <= 0.0 && a.2 != b.2).map(|(a, b)| {
            let s = (t - a.2) / (b.2 - a.2);
            (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1), t, a.3 + s * (b.3 - a.3))
        });
        let above = (0..ng).flat_map(|i| (0..nf).filter_map(move |j| node(i, j))).filter(|p| p.2 >= t);
        let best = crossings.chain(above).fold(None::<(f64, f64, f64, f64)>, |best, p| match best {
            Some(c) if c.3 < p.3 || (c.3 == p.3 && c.1 >= p.1) => Some(c),
            _ => Some(p),
        });
        let Some((g, f, w, fuel)) = best.filter(|c| c.3 > 0.0) else {
            return Err(Error::infeasible(
                Stage::Explore,
                format!("no operating point delivers {t} kW; map maximum is {max_w:.3} kW"),
            ));
        };
        entries.push(OptimalEntry {
            target_kw: t,
            w_gen_kw: g,
            w_fc_kw: f,
            w_sys_kw: w,
            eta_sys: t / fuel,
        });
    }
    Ok(OptimalCurve {
        measure: map.measure,
        entries,
    })
}

/// Targets from one grid step up to the map's maximum output.
pub fn default_targets(map: &EfficiencyMap) -> Vec<f64> {
    let max_w = map_max_power(map).unwrap_or(0.0);
    let step = map.grid.step_kw;
    let n = (max_w / step).floor() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}

/// Optimal curve over the full reachable range, skipping targets that fall
/// between grid outputs.
pub fn optimal_curve(map: &EfficiencyMap) -> OptimalCurve {
    curve_by(map, SplitRule::Band)
}

/// Optimal curve over the full reachable range under `rule`, skipping
/// targets the rule cannot meet.
pub fn curve_by(map: &EfficiencyMap, rule: SplitRule) -> OptimalCurve {
    let split = match rule {
        SplitRule::Band => optimal_split,
        SplitRule::LeastFuel => contour_split,
    };
    let entries = default_targets(map)
        .into_iter()
        .filter_map(|t| split(map, &[t]).ok().map(|c| c.entries[0]))
        .collect();
    OptimalCurve {
        measure: map.measure,
        entries,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub measure: Measure,
    pub max_eta: f64,
    pub w_sys_at_max_eta_kw: f64,
    pub w_gen_at_max_eta_kw: f64,
    pub w_fc_at_max_eta_kw: f64,
    pub max_w_sys_kw: f64,
    pub eta_at_max_w_sys: f64,
    pub w_gen_at_max_w_sys_kw: f64,
    pub w_fc_at_max_w_sys_kw: f64,
}

/// Maximum efficiency and maximum output of a map.
pub fn map_extremes(map: &EfficiencyMap) -> Result<Extremes> {
    let mut best_eta: Option<(f64, f64, f64, f64)> = None;
    let mut best_w: Option<(f64, f64, f64, f64)> = None;
    for p in map.points() {
        if best_eta.is_none_or(|b| p.3 > b.3 || (p.3 == b.3 && p.1 > b.1)) {
            best_eta = Some(p);
        }
        if best_w.is_none_or(|b| p.2 > b.2 || (p.2 == b.2 && p.1 > b.1)) {
            best_w = Some(p);
        }
    }
    match (best_eta, best_w) {
        (Some(e), Some(w)) => Ok(Extremes {
            measure: map.measure,
            max_eta: e.3,
            w_sys_at_max_eta_kw: e.2,
            w_gen_at_max_eta_kw: e.0,
            w_fc_at_max_eta_kw: e.1,
            max_w_sys_kw: w.2,
            eta_at_max_w_sys: w.3,
            w_gen_at_max_w_sys_kw: w.0,
            w_fc_at_max_w_sys_kw: w.1,
        }),
        _ => Err(Error::infeasible(Stage::Explore, "map has no feasible point")),
    }
}

/// Scan grid for [`measure_extremes`]: a fine line for single-engine
/// systems, the 2-D envelope grid for the composite.
pub fn extremes_grid(cfg: &SystemConfig, opts: &ExploreOptions) -> Result<Grid> {
    match cfg.topology {
        Topology::Composite => Grid::envelope(cfg, opts.step_kw),
        _ => Grid::envelope(cfg, opts.line_step_kw),
    }
}

/// Four-measure table of maximum efficiency and maximum output.
pub fn measure_extremes(cfg: &SystemConfig, opts: &ExploreOptions) -> Result<Vec<Extremes>> {
    let grid = extremes_grid(cfg, opts)?;
    build_measure_maps(cfg, &grid)?.iter().map(map_extremes).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingSweepRow {
    pub r_ice: f64,
    pub engine_rated_kw: f64,
    pub stack_rated_kw: f64,
    pub max_eta: f64,
    pub w_sys_at_max_eta_kw: f64,
    pub max_w_sys_kw: f64,
    pub eta_at_max_w_sys: f64,
    pub load_factor: f64,
    pub warnings: Vec<String>,
}

/// Composite configuration with the engine rated at `r·total` and the stack
/// at `(1−r)·total`, bed resized for the new full-load demand. Engine curves
/// keep their load-normalised shape; the stack scales by cell count.
pub fn sized_config(base: &SystemConfig, r_ice: f64, total_kw: f64, opts: &ExploreOptions) -> Result<(SystemConfig, Vec<String>)> {
    if !(r_ice > 0.0 && r_ice < 1.0) {
        return Err(Error::arg(format!("r_ICE must lie in (0, 1), got {r_ice}")));
    }
    if !(total_kw > 0.0) {
        return Err(Error::arg(format!("total rated power must be positive, got {total_kw}")));
    }
    let (Some(engine), Some(stack)) = (&base.engine, &base.stack) else {
        return Err(Error::Config("a sizing sweep needs both [engine] and [stack] sections".into()));
    };
    let [lo, hi] = opts.rescale_validity;
    let mut warnings = Vec::new();
    let e_kw = r_ice * total_kw;
    let s_kw = (1.0 - r_ice) * total_kw;
    let f_e = e_kw / engine.rated_power_kw();
    let f_s = s_kw / stack.envelope()?.1;
    for (name, f) in [("engine", f_e), ("stack", f_s)] {
        if f < lo || f > hi {
            warnings.push(format!("{name} rescaled by {f:.3} outside the calibrated range [{lo}, {hi}]"));
        }
    }
    let mut cfg = SystemConfig {
        topology: Topology::Composite,
        engine: Some(engine.rescaled(e_kw)),
        stack: Some(stack.rescaled(s_kw)?),
        ..base.clone()
    };
    cfg.size_bed()?;
    Ok((cfg, warnings))
}

/// Measure-IV extremes and load factor across engine sizing ratios.
pub fn sizing_sweep(base: &SystemConfig, r_values: &[f64], total_kw: f64, opts: &ExploreOptions) -> Result<Vec<SizingSweepRow>> {
    r_values
        .iter()
        .map(|&r| {
            let (cfg, warnings) = sized_config(base, r, total_kw, opts)?;
            let grid = Grid::envelope(&cfg, opts.step_kw)?;
            let states = grid_states(&cfg, &grid)?;
            let ext = map_extremes(&map_from_states(&states, &grid, Measure::IV))?;
            Ok(SizingSweepRow {
                r_ice: r,
                engine_rated_kw: r * total_kw,
                stack_rated_kw: (1.0 - r) * total_kw,
                max_eta: ext.max_eta,
                w_sys_at_max_eta_kw: ext.w_sys_at_max_eta_kw,
                max_w_sys_kw: ext.max_w_sys_kw,
                eta_at_max_w_sys: ext.eta_at_max_w_sys,
                load_factor: ext.w_sys_at_max_eta_kw / ext.max_w_sys_kw,
                warnings,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub time_s: f64,
    pub demand_kw: f64,
    pub delivered_kw: f64,
    pub eta_sys: f64,
    pub fuel_kw: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub steps: Vec<TraceStep>,
    pub energy_out_kj: f64,
    pub fuel_energy_kj: f64,
    pub mean_eta: f64,
    pub clipped_steps: usize,
}

/// Runs a `(time s, demand kW)` trace through an optimal curve. Each sample
/// holds until the next; the last sample marks the end of the trace. Demand
/// above the curve is clipped to its maximum.
pub fn trace_eval(curve: &OptimalCurve, trace: &[(f64, f64)]) -> Result<TraceSummary> {
    if trace.is_empty() {
        return Err(Error::arg("demand trace is empty"));
    }
    if curve.entries.is_empty() {
        return Err(Error::arg("optimal curve has no entries"));
    }
    for w in trace.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::arg("trace times must be strictly increasing"));
        }
    }
    let top = curve.entries.iter().map(|e| e.w_sys_kw).fold(f64::MIN, f64::max);
    let mut steps = Vec::with_capacity(trace.len());
    let (mut out, mut fuel, mut clipped_steps) = (0.0, 0.0, 0usize);
    for (k, &(t, demand)) in trace.iter().enumerate() {
        if !(demand >= 0.0) {
            return Err(Error::arg(format!("negative demand {demand} kW at t = {t} s")));
        }
        let clipped = demand > top;
        let delivered = demand.min(top);
        clipped_steps += usize::from(clipped);
        let (eta, fuel_kw) = if delivered > 0.0 {
            let e = curve
                .entries
                .iter()
                .min_by(|a, b| (a.w_sys_kw - delivered).abs().total_cmp(&(b.w_sys_kw - delivered).abs()))
                .map(|e| e.eta_sys)
                .unwrap_or(0.0);
            if !(e > 0.0) {
                return Err(Error::infeasible(Stage::Explore, format!("curve has no positive efficiency near {delivered} kW")));
            }
            (e, delivered / e)
        } else {
            (0.0, 0.0)
        };
        let dt = trace.get(k + 1).map_or(0.0, |next| next.0 - t);
        out += delivered * dt;
        fuel += fuel_kw * dt;
        steps.push(TraceStep {
            time_s: t,
            demand_kw: demand,
            delivered_kw: delivered,
            eta_sys: eta,
            fuel_kw,
            clipped,
        });
    }
    Ok(TraceSummary {
        steps,
        energy_out_kj: out,
        fuel_energy_kj: fuel,
        mean_eta: if fuel > 0.0 { out / fuel } else { 0.0 },
        clipped_steps,
    })
}

/// SHA-256 of the configuration's JSON form.
pub fn fingerprint<T: Serialize>(value: &T) -> Result<String> {
    let text = serde_json::to_string(value).map_err(|e| Error::Numerical(format!("fingerprint serialisation: {e}")))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)]) -> OptimalCurve {
        OptimalCurve {
            measure: Measure::IV,
            entries: points
                .iter()
                .map(|&(w, e)| OptimalEntry {
                    target_kw: w,
                    w_gen_kw: w,
                    w_fc_kw: 0.0,
                    w_sys_kw: w,
                    eta_sys: e,
                })
                .collect(),
        }
    }

    #[test]
    fn axis_includes_off_and_both_ends() {
        let a = envelope_axis(5.0, 10.0, 2.0);
        assert_eq!(a, vec![0.0, 5.0, 7.0, 9.0, 10.0]);
        let b = envelope_axis(4.0, 8.0, 2.0);
        assert_eq!(b, vec![0.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn constant_trace_recovers_point_efficiency() {
        let c = curve(&[(10.0, 0.3), (20.0, 0.4), (30.0, 0.35)]);
        let s = trace_eval(&c, &[(0.0, 20.0), (5.0, 20.0), (10.0, 20.0)]).unwrap();
        assert!((s.mean_eta - 0.4).abs() < 1e-15);
        assert!((s.energy_out_kj - 200.0).abs() < 1e-12);
    }

    #[test]
    fn zero_trace_is_zero_both_sides() {
        let c = curve(&[(10.0, 0.3)]);
        let s = trace_eval(&c, &[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!((s.energy_out_kj, s.fuel_energy_kj, s.mean_eta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_level_trace_is_energy_weighted() {
        let c = curve(&[(10.0, 0.3), (30.0, 0.4)]);
        let s = trace_eval(&c, &[(0.0, 10.0), (2.0, 30.0), (3.0, 0.0)]).unwrap();
        // 20 kJ at 30 % and 30 kJ at 40 %
        let expected = 50.0 / (20.0 / 0.3 + 30.0 / 0.4);
        assert!((s.mean_eta - expected).abs() < 1e-14);
    }

    #[test]
    fn demand_above_curve_is_clipped() {
        let c = curve(&[(10.0, 0.3), (30.0, 0.4)]);
        let s = trace_eval(&c, &[(0.0, 50.0), (1.0, 0.0)]).unwrap();
        assert_eq!(s.clipped_steps, 1);
        assert_eq!(s.steps[0].delivered_kw, 30.0);
    }

    #[test]
    fn trace_rejects_bad_input() {
        let c = curve(&[(10.0, 0.3)]);
        assert!(trace_eval(&c, &[]).is_err());
        assert!(trace_eval(&c, &[(0.0, -1.0)]).is_err());
        assert!(trace_eval(&c, &[(1.0, 1.0), (0.5, 1.0)]).is_err());
    }

    fn toy_map() -> EfficiencyMap {
        EfficiencyMap {
            measure: Measure::I,
            grid: Grid {
                w_gen_kw: vec![0.0, 2.0],
                w_fc_kw: vec![0.0, 2.0],
                step_kw: 2.0,
            },
            eta_sys: vec![Some(0.0), Some(0.3), Some(0.3), None],
            w_sys_kw: vec![Some(0.0), Some(2.0), Some(2.0), None],
            fuel_kw: vec![Some(0.0), Some(2.0 / 0.3), Some(2.0 / 0.3), None],
            mask: vec![Mask::Ok, Mask::Ok, Mask::Ok, Mask::Adu],
        }
    }

    #[test]
    fn ties_go_to_the_stack() {
        let c = optimal_split(&toy_map(), &[2.0]).unwrap();
        assert_eq!((c.entries[0].w_gen_kw, c.entries[0].w_fc_kw), (0.0, 2.0));
    }

    fn line_map(measure: Measure, w: [f64; 2]) -> EfficiencyMap {
        EfficiencyMap {
            measure,
            grid: Grid {
                w_gen_kw: vec![0.0, 2.0, 4.0],
                w_fc_kw: vec![0.0],
                step_kw: 2.0,
            },
            eta_sys: vec![Some(0.0), Some(w[0] / 4.0), Some(w[1] / 8.0)],
            w_sys_kw: vec![Some(0.0), Some(w[0]), Some(w[1])],
            fuel_kw: vec![Some(0.0), Some(4.0), Some(8.0)],
            mask: vec![Mask::Ok; 3],
        }
    }

    #[test]
    fn contour_split_interpolates_fuel() {
        let e = contour_split(&line_map(Measure::I, [1.0, 3.0]), &[2.0]).unwrap().entries[0];
        assert_eq!((e.w_gen_kw, e.w_sys_kw), (3.0, 2.0));
        assert!((e.eta_sys - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn contour_split_curtails_above_the_floor() {
        // Nothing operates between off and the floor, so 0.5 kW comes from the floor point.
        let e = contour_split(&line_map(Measure::I, [1.0, 3.0]), &[0.5]).unwrap().entries[0];
        assert_eq!((e.w_gen_kw, e.w_sys_kw), (2.0, 1.0));
        assert!((e.eta_sys - 0.5 / 4.0).abs() < 1e-15);
        let c = contour_split(&toy_map(), &[1.0]).unwrap().entries[0];
        assert_eq!((c.w_gen_kw, c.w_fc_kw), (0.0, 2.0));
        assert!(contour_split(&toy_map(), &[2.5]).unwrap_err().is_infeasible());
    }

    #[test]
    fn contour_split_keeps_dominance_at_the_floor() {
        let weak = line_map(Measure::I, [1.0, 3.0]);
        let strong = line_map(Measure::IV, [1.6, 3.2]);
        let targets = [0.5, 1.0, 1.3, 2.0, 3.0];
        let a = contour_split(&weak, &targets).unwrap();
        let b = contour_split(&strong, &targets).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!(y.eta_sys >= x.eta_sys, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn unreachable_target_reports_map_maximum() {
        let err = optimal_split(&toy_map(), &[10.0]).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err.to_string().contains("2.000"), "{err}");
    }

    #[test]
    fn csv_leaves_masked_values_empty() {
        let csv = toy_map().to_csv();
        assert!(csv.lines().nth(1).unwrap().starts_with("w_gen_kw,w_fc_kw,w_sys_kw,eta_sys,mask"));
        assert!(csv.ends_with("2,2,,,adu\n"));
    }

    #[test]
    fn fingerprint_is_stable() {
        let a = fingerprint(&ExploreOptions::default()).unwrap();
        assert_eq!(a, fingerprint(&ExploreOptions::default()).unwrap());
        assert_eq!(a.len(), 64);
        let other = ExploreOptions {
            step_kw: 1.0,
            ..ExploreOptions::default()
        };
        assert_ne!(a, fingerprint(&other).unwrap());
    }
}
