//! CSV and legacy VTK writers. Floats are written with 17 significant
//! digits so they parse back to the same bits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use fsge_core::mixture::MixtureParams;
use fsge_core::simulation::StepRecord;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_step(dir: &Path, rec: &StepRecord) -> Result<()> {
    let mut w = writer(&dir.join(format!("step_{}.csv", rec.t)))?;
    w.write_record(["theta_index", "z", "a_h", "h_h", "J_h", "phi_c_h", "dsig", "dtau", "p_h"])?;
    for i in 0..rec.n_theta {
        for j in 0..rec.n_z {
            let p = rec.patch(i, j);
            w.write_record([
                i.to_string(),
                num(rec.z[j]),
                num(p.a_h),
                num(p.h_h),
                num(p.j_h),
                num(p.phi_c_h),
                num(p.dsig),
                num(p.dtau),
                num(p.p_h),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence(dir: &Path, records: &[StepRecord], extra: &[fsge_core::coupling::IterationLog]) -> Result<()> {
    let mut w = writer(&dir.join("convergence.csv"))?;
    w.write_record(["t", "k", "scheme", "residual_norm", "rel_norm", "omega"])?;
    for l in records.iter().flat_map(|r| r.log.iter()).chain(extra) {
        w.write_record([
            l.t.to_string(),
            l.k.to_string(),
            l.update.label().to_string(),
            num(l.residual_norm),
            num(l.rel_norm),
            opt(l.omega),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(dir: &Path, records: &[StepRecord]) -> Result<()> {
    let mut w = writer(&dir.join("summary.csv"))?;
    w.write_record(["t", "iterations", "peak_a_h", "min_h_h", "max_h_h"])?;
    for r in records {
        let (lo, hi) = r.thickness_range();
        w.write_record([r.t.to_string(), r.iterations.to_string(), num(r.peak_radius()), num(lo), num(hi)])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean coupling evaluations over load steps 2..=10 (or up to the last step).
pub fn mean_iterations(records: &[StepRecord]) -> f64 {
    let v: Vec<f64> = records.iter().filter(|r| (2..=10).contains(&r.t)).map(|r| r.iterations as f64).collect();
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Deformed inner wall surface as a structured grid (θ × z, closed in θ).
pub fn write_wall_vtk(path: &Path, rec: &StepRecord, params: &MixtureParams) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let (nt, nz) = (rec.n_theta, rec.n_z);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "evolved wall, load step {}", rec.t)?;
    writeln!(f, "ASCII\nDATASET STRUCTURED_GRID")?;
    writeln!(f, "DIMENSIONS {} {} 1", nt + 1, nz)?;
    writeln!(f, "POINTS {} double", (nt + 1) * nz)?;
    for j in 0..nz {
        for i in 0..=nt {
            let ii = i % nt;
            let th = rec.theta[ii];
            let a = rec.patch(ii, j).a_h;
            writeln!(f, "{} {} {}", num(a * th.cos()), num(a * th.sin()), num(rec.z[j]))?;
        }
    }
    writeln!(f, "POINT_DATA {}", (nt + 1) * nz)?;
    let fields: [(&str, fn(&fsge_core::mixture::PatchState) -> f64); 4] = [
        ("h_h", |p| p.h_h),
        ("dsig", |p| p.dsig),
        ("dtau", |p| p.dtau),
        ("phi_c_h", |p| p.phi_c_h),
    ];
    for (name, get) in fields {
        writeln!(f, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for j in 0..nz {
            for i in 0..=nt {
                writeln!(f, "{}", num(get(rec.patch(i % nt, j))))?;
            }
        }
    }
    writeln!(f, "SCALARS displacement double 1\nLOOKUP_TABLE default")?;
    for j in 0..nz {
        for i in 0..=nt {
            writeln!(f, "{}", num(rec.patch(i % nt, j).a_h - params.a_o))?;
        }
    }
    f.flush()?;
    Ok(())
}

/// Flow field on the (z, r) half plane.
pub fn write_flow_vtk(path: &Path, rec: &StepRecord) -> Result<()> {
    let Some(flow) = &rec.flow else { return Ok(()) };
    let g = &flow.grid;
    let (nz, nr) = (g.n_z + 1, g.n_r + 1);
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "axisymmetric flow, load step {}", rec.t)?;
    writeln!(f, "ASCII\nDATASET STRUCTURED_GRID")?;
    writeln!(f, "DIMENSIONS {nz} {nr} 1")?;
    writeln!(f, "POINTS {} double", nz * nr)?;
    for j in 0..nr {
        for i in 0..nz {
            writeln!(f, "{} {} 0", num(g.z_nodes[i]), num(g.node_radius(i, j)))?;
        }
    }
    writeln!(f, "POINT_DATA {}", nz * nr)?;
    writeln!(f, "VECTORS velocity double")?;
    for j in 0..nr {
        for i in 0..nz {
            let k = i * nr + j;
            writeln!(f, "{} {} 0", num(flow.u_z[k]), num(flow.u_r[k]))?;
        }
    }
    writeln!(f, "SCALARS pressure double 1\nLOOKUP_TABLE default")?;
    for j in 0..nr {
        for i in 0..nz {
            writeln!(f, "{}", num(flow.p[i * nr + j]))?;
        }
    }
    f.flush()?;
    Ok(())
}
