//! Data behind the published tables and figures.

use std::path::Path;

use clap::ValueEnum;
use treesic::arrivals::gated_bounds;
use treesic::asymptotics::AsymptoticModel;
use treesic::bounds::{compute_bounds, TABLE_ANCHORS};
use treesic::cri::fair_series_table;
use treesic::sim::monte_carlo;
use treesic::Execution;

use crate::commands::{
    amplitude_table, bounds_row, protocol, sensitivity_points, simulate_row, windowed_report, z_grid, BOUNDS_HEADER,
    SIMULATE_HEADER,
};
use crate::output::Table;
use crate::{render, CliError, CliResult, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table1,
    Table2,
    Table3,
    FigCri,
    FigThroughput,
    FigAmplitude,
    FigSensitivity,
    FigDaryMst,
    FigDaryThroughput,
}

impl Target {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

const FIG_KS: [u32; 6] = [1, 2, 4, 8, 16, 32];
const FIG_N_MAX: u64 = 1000;
const DARY_N: u64 = 1000;

pub fn build(target: Target, trials: u64, seed: u64) -> CliResult<Table> {
    match target {
        Target::Table1 => {
            let mut t = Table::new(BOUNDS_HEADER.to_vec()).with_decimals(4);
            for &(k, m, n) in &TABLE_ANCHORS {
                t.push(bounds_row(&compute_bounds(m, k, n)?));
            }
            Ok(t)
        }
        Target::Table2 => {
            let mut t = Table::new(vec!["K", "lambda_S_norm", "lambda_U_norm"]).with_decimals(4);
            for &(k, _, _) in &TABLE_ANCHORS {
                let g = gated_bounds(k)?;
                t.push(vec![k.into(), g.lambda_s_norm.into(), g.lambda_u_norm.into()]);
            }
            Ok(t)
        }
        Target::Table3 => {
            let mut t =
                Table::new(vec!["K", "lambda_S_norm", "lambda_U_norm", "lambda_S_norm_no_sic"]).with_decimals(4);
            for &(k, m, n) in &TABLE_ANCHORS {
                let w = windowed_report(k, m, n, true)?;
                let ws = windowed_report(k, m, n, false)?;
                t.push(vec![k.into(), w.lambda_s_norm.into(), w.lambda_u_norm.into(), ws.lambda_s_norm.into()]);
            }
            Ok(t)
        }
        Target::FigCri | Target::FigThroughput => {
            let header = if target == Target::FigCri {
                vec!["n", "K", "K_L_n", "K_L_n_asym", "K_L_n_no_sic"]
            } else {
                vec!["n", "K", "T_n", "T_n_asym", "T_n_no_sic"]
            };
            let mut t = Table::new(header);
            for k in FIG_KS {
                let sic = fair_series_table(k, FIG_N_MAX, true, Execution::default())?;
                let no_sic = fair_series_table(k, FIG_N_MAX, false, Execution::default())?;
                let model = AsymptoticModel::new(k)?;
                let kf = k as f64;
                for n in 1..=FIG_N_MAX {
                    let (nf, i) = (n as f64, n as usize);
                    let row = if target == Target::FigCri {
                        [kf * sic[i], kf * model.cri(nf), kf * no_sic[i]]
                    } else {
                        [nf / (kf * sic[i]), model.throughput(nf), nf / (kf * no_sic[i])]
                    };
                    t.push(vec![n.into(), k.into(), row[0].into(), row[1].into(), row[2].into()]);
                }
            }
            Ok(t)
        }
        Target::FigAmplitude => amplitude_table(64),
        Target::FigSensitivity => {
            let mut t = Table::new(vec!["K", "z", "F", "F_no_sic"]);
            for &(k, m, n) in &TABLE_ANCHORS {
                for pt in sensitivity_points(k, m, n, &z_grid(0.5, m as f64)?)? {
                    t.push(vec![k.into(), pt.z.into(), pt.f.into(), pt.f_no_sic.into()]);
                }
            }
            Ok(t)
        }
        Target::FigDaryMst => {
            let mut t = Table::new(SIMULATE_HEADER.to_vec());
            for d in 2..=8 {
                let config = protocol(1, d, None, true)?;
                t.push(simulate_row(&config, seed, &monte_carlo(&config, DARY_N, trials, seed)?));
            }
            Ok(t)
        }
        Target::FigDaryThroughput => {
            let mut t = Table::new(SIMULATE_HEADER.to_vec());
            for d in [3usize, 8] {
                for k in [1u32, 4, 16] {
                    let config = protocol(k, d, None, true)?;
                    for n in log_grid(k as u64 + 1, DARY_N, 24) {
                        t.push(simulate_row(&config, seed, &monte_carlo(&config, n, trials, seed)?));
                    }
                }
            }
            Ok(t)
        }
    }
}

/// About `points` distinct integers spaced geometrically over `[lo, hi]`.
fn log_grid(lo: u64, hi: u64, points: u32) -> Vec<u64> {
    let ratio = (hi as f64 / lo as f64).ln();
    let mut grid: Vec<u64> =
        (0..points).map(|i| (lo as f64 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as u64).collect();
    grid.dedup();
    grid
}

fn gnuplot_script(target: Target, data: &str) -> String {
    // (x column, y column, grouping column, title)
    let (x, y, group, title) = match target {
        Target::Table1 => (1, 6, None, "A_m and B_m vs K"),
        Target::Table2 | Target::Table3 => (1, 2, None, "lambda_S / K vs K"),
        Target::FigCri => (1, 3, Some(2), "K L_n vs n"),
        Target::FigThroughput => (1, 3, Some(2), "T_n vs n"),
        Target::FigAmplitude => (1, 2, None, "2K|B(K,1)| vs K"),
        Target::FigSensitivity => (2, 3, Some(1), "F(z) vs z"),
        Target::FigDaryMst => (3, 11, None, "T_n vs d, n = 1000"),
        Target::FigDaryThroughput => (1, 11, Some(3), "T_n vs n"),
    };
    let mut s = format!("set datafile separator ','\nset key autotitle columnhead\nset title '{title}'\n");
    match group {
        None => s += &format!("plot '{data}' using {x}:{y} with linespoints\n"),
        Some(g) => {
            s += &format!("groups = system(\"tail -n +2 {data} | cut -d, -f{g} | sort -n -u | tr '\\\\n' ' '\")\n");
            s += &format!(
                "plot for [v in groups] '{data}' using {x}:(strcol({g}) eq v ? ${y} : NaN) with lines title v\n"
            );
        }
    }
    s
}

pub fn emit(target: Target, table: &Table, format: Format, out_dir: Option<&Path>, gnuplot: bool) -> CliResult<()> {
    let body = render(table, format);
    let Some(dir) = out_dir else {
        if gnuplot {
            return Err(CliError::Usage("--gnuplot needs --out-dir".into()));
        }
        print!("{body}");
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let data = format!("{}.{ext}", target.name());
    std::fs::write(dir.join(&data), body)?;
    if gnuplot {
        if format != Format::Csv {
            return Err(CliError::Usage("--gnuplot works with CSV output".into()));
        }
        std::fs::write(dir.join(format!("{}.gp", target.name())), gnuplot_script(target, &data))?;
    }
    Ok(())
}
