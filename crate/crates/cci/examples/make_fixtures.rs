//! Regenerates the synthetic data under `crates/cci/fixtures/`.
//!
//! ```text
//! cargo run -p cci --example make_fixtures
//! ```

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cci::csv_io::shipped_vocabulary;
use cci_core::index::{partition_vocabulary, MAX_GROUP_SIZE};
use cci_core::sim::{simulate, standard_normal_matrix, var_recursion, Dgp};
use cci_core::{DMatrix, MonthStamp, SeriesPanel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn month(y: i32, m: u32) -> MonthStamp {
    MonthStamp::new(y, m).unwrap()
}

fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
    println!("wrote {}", path.display());
}

fn quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn wide_csv(start: MonthStamp, names: &[String], columns: &[Vec<f64>], decimals: usize) -> String {
    let mut out = String::from("date");
    for n in names {
        let _ = write!(out, ",{}", quote(n));
    }
    out.push('\n');
    for t in 0..columns[0].len() {
        let _ = write!(out, "{}", start.offset(t as i64));
        for c in columns {
            let _ = write!(out, ",{:.*}", decimals, c[t]);
        }
        out.push('\n');
    }
    out
}

fn series_csv(start: MonthStamp, name: &str, values: &[f64], decimals: usize) -> String {
    let mut out = String::from("date,value,name\n");
    for (t, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{:.*},{}", start.offset(t as i64), decimals, v, name);
    }
    out
}

/// Search-volume groups for the bundled vocabulary, 2004-01..2023-06.
fn groups(dir: &Path) {
    let vocab = shipped_vocabulary();
    let start = month(2004, 1);
    let len = start.months_until(month(2023, 6)) as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Common concern factor: slow upward drift with a few episodes.
    let factor: Vec<f64> = (0..len)
        .map(|t| {
            let episode = |c: f64, w: f64| 0.8 * (-((t as f64 - c) / w).powi(2)).exp();
            1.0 + 0.004 * t as f64 + episode(40.0, 6.0) + episode(190.0, 10.0)
        })
        .collect();
    for (k, members) in partition_vocabulary(&vocab, MAX_GROUP_SIZE).unwrap().into_iter().enumerate() {
        let raw: Vec<Vec<f64>> = members
            .iter()
            .map(|m| {
                let phase = rng.random_range(0.0..TAU);
                if m.is_benchmark {
                    // Winter-peaking heating interest.
                    (0..len)
                        .map(|t| 60.0 * (1.0 + 0.25 * (TAU * t as f64 / 12.0).cos()) * rng.random_range(0.93..1.07))
                        .collect()
                } else {
                    let level = 40.0 * rng.random_range(0.05f64..1.0).powi(2);
                    let season = rng.random_range(0.0..0.3);
                    (0..len)
                        .map(|t| {
                            let s = 1.0 + season * (TAU * t as f64 / 12.0 + phase).sin();
                            level * factor[t] * s * rng.random_range(0.8..1.2)
                        })
                        .collect()
                }
            })
            .collect();
        let max = raw.iter().flatten().copied().fold(0.0, f64::max);
        let scaled: Vec<Vec<f64>> = raw.iter().map(|c| c.iter().map(|v| (100.0 * v / max).round()).collect()).collect();
        let names: Vec<String> = members.iter().map(|m| m.text.clone()).collect();
        write(&dir.join(format!("groups/group_{:02}.csv", k + 1)), &wide_csv(start, &names, &scaled, 0));
    }
}

/// Five-variable system and its instruments, 2004-01..2023-06.
fn estimation_data(dir: &Path) {
    let names: Vec<String> =
        ["cci", "ip_growth", "core_inflation", "policy_rate", "unemployment"].iter().map(|s| s.to_string()).collect();
    let t = month(2004, 1).months_until(month(2023, 6)) as usize + 1;
    let dgp = Dgp::benchmark(2024).with_names(names.clone());
    let sim = simulate(&dgp, t).unwrap();
    let start = month(2004, 1);
    let columns: Vec<Vec<f64>> = sim.panel.series().iter().map(|s| s.values().to_vec()).collect();
    write(&dir.join("panel.csv"), &wide_csv(start, &names, &columns, 6));
    write(&dir.join("instrument.csv"), &series_csv(start, "t90", sim.instrument.values(), 6));
    for (name, col) in names.iter().zip(&columns) {
        write(&dir.join(format!("series/{name}.csv")), &series_csv(start, name, col, 6));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let noise = standard_normal_matrix(&mut rng, t, 1);
    write(&dir.join("instrument_weak.csv"), &series_csv(start, "noise", noise.as_slice(), 6));
}

/// Three concern indices where the first leads the second.
fn compare_panel(dir: &Path) {
    let t = 240;
    let phi = vec![DMatrix::from_row_slice(3, 3, &[0.6, 0.0, 0.0, 0.35, 0.4, 0.0, 0.0, 0.0, 0.5])];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shocks = standard_normal_matrix(&mut rng, t + 100, 3);
    let mix = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.3, 1.0, 0.0, 0.4, 0.2, 1.0]);
    let eta = &shocks * mix.transpose();
    let y = var_recursion(&phi, None, &eta, None).rows(100, t).into_owned();
    let names: Vec<String> = ["cci", "media_index", "survey_index"].iter().map(|s| s.to_string()).collect();
    let panel = SeriesPanel::from_matrix(month(2004, 1), &names, &y).unwrap();
    let columns: Vec<Vec<f64>> = panel.series().iter().map(|s| s.values().to_vec()).collect();
    write(&dir.join("compare_panel.csv"), &wide_csv(month(2004, 1), &names, &columns, 6));
}

/// Gridded monthly temperatures, 1951-01..2023-12, warming after 1990.
fn grids(dir: &Path) {
    let start = month(1951, 1);
    let len = start.months_until(month(2023, 12)) as usize + 1;
    let mut manifest = String::from("grid_id,file,weight\n");
    for (k, (base, amplitude, trend, weight)) in
        [(12.0, 10.0, 0.03, 1.0), (18.0, 6.0, 0.02, 0.8), (5.0, 14.0, 0.04, 1.2), (22.0, 4.0, 0.025, 0.6)]
            .into_iter()
            .enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + k as u64);
        let noise = standard_normal_matrix(&mut rng, len, 1);
        let temps: Vec<f64> = (0..len)
            .map(|i| {
                let d = start.offset(i as i64);
                let years_after = (d.year() as f64 + (d.month() as f64 - 1.0) / 12.0 - 1991.0).max(0.0);
                base - amplitude * (TAU * d.month_index() as f64 / 12.0).cos()
                    + 1.2 * noise[(i, 0)]
                    + trend * years_after
            })
            .collect();
        let file = format!("grid_{}.csv", k + 1);
        let mut text = String::from("date,temp_c\n");
        for (i, v) in temps.iter().enumerate() {
            let _ = writeln!(text, "{},{v:.3}", start.offset(i as i64));
        }
        write(&dir.join("grids").join(&file), &text);
        let _ = writeln!(manifest, "g{},{file},{weight}", k + 1);
    }
    write(&dir.join("grids/manifest.csv"), &manifest);
    write(&dir.join("grids/empty_manifest.csv"), "grid_id,file,weight\n");
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    groups(&dir);
    estimation_data(&dir);
    compare_panel(&dir);
    grids(&dir);
}
