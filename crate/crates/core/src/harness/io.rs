//! CSV/JSON writers shared by the run stages.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::grid::QuadratureGrid;
use crate::light::{LightState, MixedLightState};
use crate::model::ElectronicState;
use crate::response::{DipoleSurface, ResonantProfile, SeriesCoefficients};

/// Rows kept when a time series is written out.
const MAX_ROWS: usize = 8192;

fn stride(n: usize) -> usize {
    n.div_ceil(MAX_ROWS).max(1)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_eigenstates(path: &Path, states: &[ElectronicState]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "index,energy_au,parity,nodes")?;
    for (i, s) in states.iter().enumerate() {
        writeln!(
            out,
            "{i},{:.12e},{:.6},{}",
            s.energy.unwrap_or(f64::NAN),
            s.parity(),
            s.node_count()
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_potential(path: &Path, xs: &[f64], v: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x_au,v_au")?;
    for (x, v) in xs.iter().zip(v) {
        writeln!(out, "{x:.8e},{v:.12e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, field: &SampledField) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t_au,force_au")?;
    let s = stride(field.values.len());
    for (n, f) in field.values.iter().enumerate().step_by(s) {
        writeln!(out, "{:.8e},{f:.12e}", field.time(n))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_surface(path: &Path, surface: &DipoleSurface) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "t_au")?;
    for q in &surface.q_values {
        write!(out, ",q={q:.6}")?;
    }
    writeln!(out)?;
    let n = surface.n_times();
    for i in (0..n).step_by(stride(n)) {
        write!(out, "{:.8e}", i as f64 * surface.dt)?;
        for row in &surface.traces {
            write!(out, ",{:.12e}", row[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, series: &SeriesCoefficients) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "t_au")?;
    for k in 0..=series.order {
        write!(out, ",f{k}")?;
    }
    writeln!(out)?;
    let n = series.n_times();
    for i in (0..n).step_by(stride(n)) {
        write!(out, "{:.8e}", i as f64 * series.dt)?;
        for f in &series.f {
            write!(out, ",{:.12e}", f[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile(path: &Path, profile: &ResonantProfile) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "q,d_omega,f_omega")?;
    for (q, d) in profile.q_values.iter().zip(&profile.d_omega) {
        let f = profile.f(*q).unwrap_or(f64::NAN);
        writeln!(out, "{q:.8e},{d:.12e},{f:.12e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar of `light_state.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightStateMeta {
    pub grid: QuadratureGrid,
    pub weights: Vec<f64>,
}

/// Columns `q, re_0, im_0, re_1, im_1, …`, one pair per ensemble component.
pub fn write_light_state(csv: &Path, json: &Path, state: &MixedLightState) -> Result<()> {
    let mut out = BufWriter::new(File::create(csv)?);
    write!(out, "q")?;
    for k in 0..state.states.len() {
        write!(out, ",re_{k},im_{k}")?;
    }
    writeln!(out)?;
    let g = state.grid();
    for i in 0..g.n_points {
        write!(out, "{:.10e}", g.point(i))?;
        for s in &state.states {
            let z = s.amplitudes[i];
            write!(out, ",{:.15e},{:.15e}", z.re, z.im)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    write_json(
        json,
        &LightStateMeta {
            grid: g,
            weights: state.weights.clone(),
        },
    )
}

/// Inverse of [`write_light_state`]; `csv` is `<stem>.csv` next to `<stem>.json`.
pub fn read_light_state(csv: &Path) -> Result<MixedLightState> {
    let meta_path = csv.with_extension("json");
    let meta: LightStateMeta = serde_json::from_reader(BufReader::new(
        File::open(&meta_path).map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?,
    ))?;
    let reader = BufReader::new(File::open(csv).map_err(|e| Error::Config(format!("{}: {e}", csv.display())))?);
    let k = meta.weights.len();
    let mut columns: Vec<Vec<C64>> = vec![Vec::with_capacity(meta.grid.n_points); k];
    for (line_no, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{} line {}: {e}", csv.display(), line_no + 1)))?;
        if vals.len() != 1 + 2 * k {
            return Err(Error::Config(format!(
                "{} line {}: expected {} columns",
                csv.display(),
                line_no + 1,
                1 + 2 * k
            )));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(C64::new(vals[1 + 2 * j], vals[2 + 2 * j]));
        }
    }
    let states = columns
        .into_iter()
        .map(|a| LightState::new(meta.grid, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedLightState {
        weights: meta.weights,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::light::state::gaussian_state;

    #[test]
    fn light_state_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = QuadratureGrid::symmetric(8.0, 64).unwrap();
        let s = MixedLightState {
            weights: vec![0.25, 0.75],
            states: vec![
                gaussian_state(&g, 1.0, -0.5, 0.5).unwrap(),
                gaussian_state(&g, -1.0, 0.0, 0.3).unwrap(),
            ],
        };
        let csv = dir.path().join("light_state.csv");
        write_light_state(&csv, &csv.with_extension("json"), &s).unwrap();
        let back = read_light_state(&csv).unwrap();
        assert_eq!(back.weights, s.weights);
        for (a, b) in back.states.iter().zip(&s.states) {
            for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }
}
