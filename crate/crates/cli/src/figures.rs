//! Figure-data reproductions and the explore wrappers they share.

use nh3_powertrain::adu::conversion_curve;
use nh3_powertrain::config::RunConfig;
use nh3_powertrain::explore::{
    build_measure_maps, contour_split, curve_by, default_targets, extremes_grid, optimal_split, sized_config, sizing_sweep,
    EfficiencyMap, Grid, OptimalCurve, SizingSweepRow, SplitRule,
};
use nh3_powertrain::recovery::Measure;
use nh3_powertrain::system::Topology;

use crate::output::{num, opt, Output, Table};
use crate::CliError;

pub const FIGURES: [&str; 7] = ["fig6", "fig8", "fig9", "fig10", "fig11", "fig14", "fig15"];

/// Topology a figure is drawn for; `None` uses the configuration's own.
pub fn figure_topology(id: &str) -> Option<Topology> {
    match id {
        "fig8" => Some(Topology::IceHybrid),
        "fig9" => Some(Topology::FcHybrid),
        "fig10" | "fig11" | "fig14" | "fig15" => Some(Topology::Composite),
        _ => None,
    }
}

/// Temperatures of the conversion ladder, K.
const FIG6_TEMPERATURES: [f64; 4] = [673.15, 723.15, 773.15, 823.15];
/// r_ICE values whose optimal curves and load factors are compared.
const FIG15_R_VALUES: [f64; 3] = [0.25, 0.5, 0.75];

/// Geometric GHSV ladder, 1/h.
pub fn ghsv_ladder(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let r = (hi / lo).powf(1.0 / (n as f64 - 1.0));
    (0..n).map(|k| lo * r.powi(k as i32)).collect()
}

pub fn run(id: &str, cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    match id {
        "fig6" => fig6(cfg, out),
        "fig8" => line_figure(cfg, out, "fig8.csv", "w_gen_kw"),
        "fig9" => line_figure(cfg, out, "fig9.csv", "w_fc_kw"),
        "fig10" => {
            for map in composite_maps(cfg)? {
                write_map(&map, out, &format!("fig10_{}.csv", map.measure))?;
            }
            Ok(())
        }
        "fig11" => fig11(cfg, out),
        "fig14" => {
            let rows = sizing_sweep(&cfg.system, &cfg.explore.sweep_r_values, cfg.explore.sweep_total_kw, &cfg.explore)?;
            write_sweep(&rows, out, "fig14.csv")
        }
        "fig15" => fig15(cfg, out),
        other => Err(CliError::config(format!("unknown figure {other:?}; expected one of {}", FIGURES.join(", ")))),
    }
}

fn fig6(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let mut t = Table::new(&[
        ("temperature_k", "K"),
        ("ghsv_per_h", "1/h"),
        ("conversion", "fraction"),
        ("h2_rate_mol_s", "mol/s"),
    ]);
    let ladder = ghsv_ladder(30, 50.0, 50_000.0);
    for temp in FIG6_TEMPERATURES {
        let bed = nh3_powertrain::adu::CatalystBed {
            temperature_k: temp,
            ..cfg.system.bed.clone()
        };
        for p in conversion_curve(&bed, &ladder, &cfg.system.thermo)? {
            t.push(vec![num(temp), num(p.ghsv_per_h), num(p.conversion), num(p.h2_rate_mol_s)]);
        }
    }
    out.table("fig6.csv", &t)
}

/// Single-engine sweep with the four measures side by side.
fn line_figure(cfg: &RunConfig, out: &mut Output, name: &str, axis: &'static str) -> Result<(), CliError> {
    let grid = extremes_grid(&cfg.system, &cfg.explore)?;
    let maps = build_measure_maps(&cfg.system, &grid)?;
    let mut cols = vec![(axis, "kW")];
    cols.extend([("eta_sys_I", "fraction"), ("eta_sys_II", "fraction"), ("eta_sys_III", "fraction"), ("eta_sys_IV", "fraction")]);
    cols.extend([("w_sys_kw_I", "kW"), ("w_sys_kw_II", "kW"), ("w_sys_kw_III", "kW"), ("w_sys_kw_IV", "kW")]);
    let mut t = Table::new(&cols);
    let (n_gen, n_fc) = (grid.w_gen_kw.len(), grid.w_fc_kw.len());
    for i in 0..n_gen {
        for j in 0..n_fc {
            let setpoint = if axis == "w_gen_kw" { grid.w_gen_kw[i] } else { grid.w_fc_kw[j] };
            if setpoint == 0.0 {
                continue;
            }
            let vals: Vec<Option<(f64, f64)>> = maps.iter().map(|m| m.get(i, j)).collect();
            let mut row = vec![num(setpoint)];
            row.extend(vals.iter().map(|v| opt(v.map(|p| p.1))));
            row.extend(vals.iter().map(|v| opt(v.map(|p| p.0))));
            t.push(row);
        }
    }
    out.table(name, &t)
}

fn composite_maps(cfg: &RunConfig) -> Result<Vec<EfficiencyMap>, CliError> {
    let grid = Grid::envelope(&cfg.system, cfg.explore.step_kw)?;
    Ok(build_measure_maps(&cfg.system, &grid)?)
}

pub fn write_map(map: &EfficiencyMap, out: &mut Output, name: &str) -> Result<(), CliError> {
    out.raw_csv(name, &map.to_csv(), &["w_gen_kw", "w_fc_kw", "w_sys_kw", "eta_sys", "mask"])
}

pub fn write_curve(curve: &OptimalCurve, out: &mut Output, name: &str) -> Result<(), CliError> {
    out.raw_csv(name, &curve.to_csv(), &["target_kw", "w_gen_kw", "w_fc_kw", "w_sys_kw", "eta_sys"])
}

/// Optimal curves of all measures on the targets reachable under measure IV.
fn fig11(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let maps = composite_maps(cfg)?;
    let targets = default_targets(&maps[Measure::IV.index()]);
    let mut cols = vec![("target_kw", "kW")];
    for m in Measure::ALL {
        cols.extend(match m {
            Measure::I => [("eta_sys_I", "fraction"), ("w_gen_kw_I", "kW"), ("w_fc_kw_I", "kW"), ("w_sys_kw_I", "kW")],
            Measure::II => [("eta_sys_II", "fraction"), ("w_gen_kw_II", "kW"), ("w_fc_kw_II", "kW"), ("w_sys_kw_II", "kW")],
            Measure::III => [("eta_sys_III", "fraction"), ("w_gen_kw_III", "kW"), ("w_fc_kw_III", "kW"), ("w_sys_kw_III", "kW")],
            Measure::IV => [("eta_sys_IV", "fraction"), ("w_gen_kw_IV", "kW"), ("w_fc_kw_IV", "kW"), ("w_sys_kw_IV", "kW")],
        });
    }
    let mut t = Table::new(&cols);
    let split = match cfg.explore.split_rule {
        SplitRule::Band => optimal_split,
        SplitRule::LeastFuel => contour_split,
    };
    for &target in &targets {
        let mut row = vec![num(target)];
        for map in &maps {
            match split(map, &[target]) {
                Ok(c) => {
                    let e = c.entries[0];
                    row.extend([num(e.eta_sys), num(e.w_gen_kw), num(e.w_fc_kw), num(e.w_sys_kw)]);
                }
                Err(e) if e.is_infeasible() => row.extend(std::iter::repeat_n(String::new(), 4)),
                Err(e) => return Err(e.into()),
            }
        }
        t.push(row);
    }
    out.table("fig11.csv", &t)
}

pub fn write_sweep(rows: &[SizingSweepRow], out: &mut Output, name: &str) -> Result<(), CliError> {
    let mut t = Table::new(&[
        ("r_ice", "fraction"),
        ("engine_rated_kw", "kW"),
        ("stack_rated_kw", "kW"),
        ("max_eta", "fraction"),
        ("w_sys_at_max_eta_kw", "kW"),
        ("max_w_sys_kw", "kW"),
        ("eta_at_max_w_sys", "fraction"),
        ("load_factor", "fraction"),
        ("warnings", "text"),
    ]);
    for r in rows {
        t.push(vec![
            num(r.r_ice),
            num(r.engine_rated_kw),
            num(r.stack_rated_kw),
            num(r.max_eta),
            num(r.w_sys_at_max_eta_kw),
            num(r.max_w_sys_kw),
            num(r.eta_at_max_w_sys),
            num(r.load_factor),
            r.warnings.join("; "),
        ]);
    }
    out.table(name, &t)
}

fn fig15(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let rows = sizing_sweep(&cfg.system, &FIG15_R_VALUES, cfg.explore.sweep_total_kw, &cfg.explore)?;
    write_sweep(&rows, out, "fig15_load_factor.csv")?;
    let mut t = Table::new(&[
        ("r_ice", "fraction"),
        ("target_kw", "kW"),
        ("w_gen_kw", "kW"),
        ("w_fc_kw", "kW"),
        ("w_sys_kw", "kW"),
        ("eta_sys", "fraction"),
    ]);
    for r in FIG15_R_VALUES {
        let (sized, _) = sized_config(&cfg.system, r, cfg.explore.sweep_total_kw, &cfg.explore)?;
        let grid = Grid::envelope(&sized, cfg.explore.step_kw)?;
        let maps = build_measure_maps(&sized, &grid)?;
        for e in curve_by(&maps[Measure::IV.index()], cfg.explore.split_rule).entries {
            t.push(vec![num(r), num(e.target_kw), num(e.w_gen_kw), num(e.w_fc_kw), num(e.w_sys_kw), num(e.eta_sys)]);
        }
    }
    out.table("fig15_curves.csv", &t)
}
